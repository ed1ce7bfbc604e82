#include "delaystab/modal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "delaystab/errors.hpp"

namespace delaystab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Derivative {
    double dy;
    double dv;
};

}  // namespace

double beta_of_mode(const ModeSpec& mode) {
    mode.validate();
    const double w = mode.n * kPi / mode.ell;
    return w * w;
}

ModalQuasipolynomial modal_quasipolynomial(const ModeSpec& mode, const ControlParams& params) {
    return {beta_of_mode(mode), params.alpha, params.tau};
}

QuasimodeFields quasimode_fields(const QuasimodeData& data, std::span<const double> grid) {
    data.mode.validate();
    const double ell = data.mode.ell;
    const double k = data.mode.n * kPi / ell;
    QuasimodeFields out;
    out.u0.reserve(grid.size());
    out.u1.reserve(grid.size());
    for (double x : grid) {
        if (x < 0.0 || x > ell * (1.0 + 1e-12)) {
            throw InvalidArgument("quasimode grid point outside [0, ell]");
        }
        // sin(n pi) is not exactly zero in floating point; pin the Dirichlet ends.
        const bool end = (x == 0.0) || std::abs(x - ell) <= 1e-12 * ell;
        const double shape = end ? 0.0 : std::sin(k * x);
        out.u0.push_back(data.zeta0 * shape);
        out.u1.push_back(data.zeta1 * shape);
    }
    return out;
}

HistoryFunction HistoryFunction::sampled(std::vector<double> samples) {
    if (samples.size() < 2) throw InvalidArgument("sampled history needs at least two samples");
    for (double v : samples) {
        if (!std::isfinite(v)) throw InvalidArgument("history samples must be finite");
    }
    HistoryFunction h;
    h.kind_ = Kind::Sampled;
    h.samples_ = std::move(samples);
    return h;
}

double HistoryFunction::at(double t, double tau) const {
    if (kind_ == Kind::Zero) return 0.0;
    const auto intervals = static_cast<double>(samples_.size() - 1);
    const double pos = std::clamp((t + tau) / tau, 0.0, 1.0) * intervals;
    const auto i = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return (1.0 - frac) * samples_[i] + frac * samples_[i + 1];
}

ModalTrace dde_integrate(double beta, double alpha, double tau, double zeta0, double zeta1,
                         const HistoryFunction& history, double dt, double t_final) {
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    if (!(dt > 0.0) || dt >= tau) throw InvalidStep("dt must satisfy 0 < dt < tau");
    if (!(t_final >= tau)) throw InvalidArgument("t_final must be at least tau");

    const double ratio = tau / dt;
    const double nearest = std::round(ratio);
    const int delay_steps = static_cast<int>(
        std::abs(ratio - nearest) <= 1e-9 * ratio ? nearest : std::ceil(ratio));
    const double h = tau / delay_steps;
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / h - 1e-9));

    ModalTrace tr;
    tr.dt = h;
    tr.delay_steps = delay_steps;
    tr.times.resize(steps + 1);
    tr.y.resize(steps + 1);
    tr.ydot.resize(steps + 1);
    tr.y[0] = zeta0;
    tr.ydot[0] = zeta1;
    for (std::size_t j = 0; j <= steps; ++j) tr.times[j] = static_cast<double>(j) * h;

    auto rhs = [beta, alpha](double y, double v, double delayed) {
        return Derivative{v, -beta * y - alpha * delayed};
    };

    const auto m = static_cast<std::size_t>(delay_steps);
    for (std::size_t j = 0; j < steps; ++j) {
        double d0, dmid, d1;
        if (j >= m) {
            const std::size_t i = j - m;
            d0 = tr.y[i];
            d1 = tr.y[i + 1];
            dmid = 0.5 * (d0 + d1) + 0.125 * h * (tr.ydot[i] - tr.ydot[i + 1]);
        } else {
            const double t0 = tr.times[j] - tau;
            d0 = history.at(t0, tau);
            dmid = history.at(t0 + 0.5 * h, tau);
            d1 = history.at(t0 + h, tau);
        }
        const double y = tr.y[j];
        const double v = tr.ydot[j];
        const Derivative k1 = rhs(y, v, d0);
        const Derivative k2 = rhs(y + 0.5 * h * k1.dy, v + 0.5 * h * k1.dv, dmid);
        const Derivative k3 = rhs(y + 0.5 * h * k2.dy, v + 0.5 * h * k2.dv, dmid);
        const Derivative k4 = rhs(y + h * k3.dy, v + h * k3.dv, d1);
        tr.y[j + 1] = y + h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
        tr.ydot[j + 1] = v + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    }
    return tr;
}

DecayFit decay_rate_fit(std::span<const double> times, std::span<const double> values,
                        double t_a, double t_b) {
    if (times.size() != values.size()) throw InvalidArgument("times and values differ in length");
    if (!(t_a < t_b)) throw InvalidArgument("fit window must satisfy t_a < t_b");

    std::vector<double> pt, plog;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        if (times[i] < t_a || times[i] > t_b) continue;
        const double a = std::abs(values[i]);
        if (a > std::abs(values[i - 1]) && a >= std::abs(values[i + 1]) && a > 0.0) {
            pt.push_back(times[i]);
            plog.push_back(std::log(a));
        }
    }
    if (pt.size() < 5) throw InsufficientPeaks("fewer than five envelope peaks in the fit window");

    const auto n = static_cast<double>(pt.size());
    double mt = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < pt.size(); ++i) {
        mt += pt[i];
        ml += plog[i];
    }
    mt /= n;
    ml /= n;
    double stt = 0.0, stl = 0.0, sll = 0.0;
    for (std::size_t i = 0; i < pt.size(); ++i) {
        stt += (pt[i] - mt) * (pt[i] - mt);
        stl += (pt[i] - mt) * (plog[i] - ml);
        sll += (plog[i] - ml) * (plog[i] - ml);
    }
    DecayFit fit;
    fit.rate = stl / stt;
    // A flat envelope has nothing to explain; report a perfect fit.
    fit.r_squared = (sll > 0.0) ? (stl * stl) / (stt * sll) : 1.0;
    fit.window_start = t_a;
    fit.window_end = t_b;
    fit.n_peaks = static_cast<int>(pt.size());
    return fit;
}

double modal_energy(double y, double ydot, double beta, double ell) {
    return 0.5 * ell * (ydot * ydot + beta * y * y);
}

std::vector<double> modal_energy_trace(const ModalTrace& trace, double beta, double ell) {
    std::vector<double> e(trace.y.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = modal_energy(trace.y[i], trace.ydot[i], beta, ell);
    return e;
}

}  // namespace delaystab
