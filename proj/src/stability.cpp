#include "delaystab/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "delaystab/errors.hpp"

namespace delaystab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Roots of w^2 + b w + c = 0, larger first. Requires a nonnegative discriminant.
std::pair<double, double> real_quadratic_roots(double b, double c) {
    double disc = b * b - 4.0 * c;
    if (disc < -16.0 * kEps * b * b) throw std::logic_error("crossing quartic has no real roots in w^2");
    disc = std::max(disc, 0.0);
    const double sq = std::sqrt(disc);
    const double t = -0.5 * (b + std::copysign(sq, b));
    const double w1 = t;
    const double w2 = (t != 0.0) ? c / t : 0.0;
    return {std::max(w1, w2), std::min(w1, w2)};
}

}  // namespace

void ModeSpec::validate() const {
    if (n < 1) throw InvalidArgument("mode index n must be >= 1");
    if (!(ell > 0.0) || !std::isfinite(ell)) throw InvalidArgument("ell must be positive");
}

void ControlParams::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be positive");
    if (alpha == 0.0 || !std::isfinite(alpha)) throw InvalidArgument("alpha must be nonzero");
}

std::optional<int> k_index(const ModeSpec& mode, double tau) {
    mode.validate();
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    const double ratio = mode.n * tau / mode.ell;
    const double nearest = std::round(ratio);
    if (nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-12 * ratio) return std::nullopt;
    return static_cast<int>(std::floor(ratio));
}

OpenInterval admissible_alpha_interval(const ModeSpec& mode, double tau) {
    const auto k = k_index(mode, tau);
    if (!k) return {0.0, 0.0};
    const double n2 = static_cast<double>(mode.n) * mode.n;
    const double l2 = mode.ell * mode.ell;
    const double t2 = tau * tau;
    const double kk = *k;
    const double lower_gap = n2 * kPi2 * t2 - kk * kk * l2 * kPi2;
    const double upper_gap = (kk + 1) * (kk + 1) * l2 * kPi2 - n2 * kPi2 * t2;
    const double m = std::min(lower_gap, upper_gap);
    if (!(m > 0.0)) return {0.0, 0.0};
    const double bound = m / (l2 * t2);
    return (*k % 2 == 1) ? OpenInterval{0.0, bound} : OpenInterval{-bound, 0.0};
}

StabilityCertificate check_stabilizing(const ModeSpec& mode, const ControlParams& params) {
    mode.validate();
    params.validate();
    StabilityCertificate cert;
    cert.k = k_index(mode, params.tau);
    cert.alpha_interval = admissible_alpha_interval(mode, params.tau);
    cert.satisfied = !cert.alpha_interval.empty() && cert.alpha_interval.contains(params.alpha);
    return cert;
}

bool scaled_criterion_holds(double beta_tilde, double alpha_tilde, int k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;  // (-1)^(k+1)
    const double lhs = sign * alpha_tilde;
    const double kk = k;
    const double m = std::min(beta_tilde - kk * kk * kPi2, (kk + 1) * (kk + 1) * kPi2 - beta_tilde);
    return 0.0 < lhs && lhs < m;
}

std::optional<int> scaled_stable_k(double beta_tilde, double alpha_tilde) {
    if (beta_tilde < 0.0) return std::nullopt;
    const int kmax = static_cast<int>(std::ceil(std::sqrt(beta_tilde) / kPi)) + 1;
    for (int k = 0; k <= kmax; ++k) {
        if (scaled_criterion_holds(beta_tilde, alpha_tilde, k)) return k;
    }
    return std::nullopt;
}

CrossingData crossing_frequencies(double beta, double alpha) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
    if (alpha == 0.0 || !std::isfinite(alpha)) throw InvalidArgument("alpha must be nonzero");

    const double a = std::abs(alpha);
    // Quartic in w = omega^2: w^2 - 2 beta w - (alpha^2 - beta^2) = 0.
    const auto [w_hi, w_lo] = real_quadratic_roots(-2.0 * beta, (beta - a) * (beta + a));

    const double plus_sq = beta + a;
    const double minus_sq = beta - a;
    // Coefficient rounding moves the roots by about eps * max(beta, a)^2 / (root gap).
    const double slack = 8.0 * kEps * std::max(beta, a) * std::max(beta, a) / (2.0 * a);
    if (std::abs(w_hi - plus_sq) > 1e-12 * plus_sq + slack) {
        throw std::logic_error("crossing quartic root disagrees with beta + |alpha|");
    }

    CrossingData out;
    out.omega_plus = std::sqrt(plus_sq);
    if (alpha * alpha < beta * beta && minus_sq > 0.0) {
        if (std::abs(w_lo - minus_sq) > 1e-12 * minus_sq + slack) {
            throw std::logic_error("crossing quartic root disagrees with beta - |alpha|");
        }
        out.omega_minus = std::sqrt(minus_sq);
    }
    return out;
}

CrossingData critical_delays(double beta, double alpha, int max_count) {
    if (max_count < 1) throw InvalidArgument("max_count must be >= 1");
    CrossingData out = crossing_frequencies(beta, alpha);

    // exp(-i omega tau) = (omega^2 - beta) / alpha, which is +1 or -1.
    auto delays = [max_count](double omega, double target) {
        std::vector<double> taus;
        taus.reserve(static_cast<std::size_t>(max_count));
        for (int j = 0; j < max_count; ++j) {
            const double phase = (target > 0.0) ? 2.0 * (j + 1) * kPi : (2.0 * j + 1) * kPi;
            taus.push_back(phase / omega);
        }
        return taus;
    };
    const double sgn = (alpha > 0.0) ? 1.0 : -1.0;
    out.critical_delays_plus = delays(out.omega_plus, sgn);
    if (out.omega_minus) out.critical_delays_minus = delays(*out.omega_minus, -sgn);
    return out;
}

std::size_t RegionGrid::invalid_cells() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 0));
}

RegionGrid region_grid(AxisRange beta_tilde, AxisRange alpha_tilde, int resolution,
                       const RegionOptions& opts) {
    if (resolution < 8) throw InvalidArgument("resolution must be at least 8");
    if (!(beta_tilde.lo < beta_tilde.hi) || !(alpha_tilde.lo < alpha_tilde.hi)) {
        throw InvalidArgument("region ranges must be nonempty");
    }
    if (beta_tilde.lo < 0.0) throw InvalidArgument("beta~ range must be nonnegative");

    const auto n = static_cast<std::size_t>(resolution);
    RegionGrid grid;
    grid.beta_tilde_axis.resize(n);
    grid.alpha_tilde_axis.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = (static_cast<double>(i) + 0.5) / resolution;
        grid.beta_tilde_axis[i] = beta_tilde.lo + f * (beta_tilde.hi - beta_tilde.lo);
        grid.alpha_tilde_axis[i] = alpha_tilde.lo + f * (alpha_tilde.hi - alpha_tilde.lo);
    }
    grid.counts.assign(n * n, -1);
    grid.analytic_stable.assign(n * n, 0);
    grid.valid.assign(n * n, 0);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t cell = next++; cell < n * n; cell = next++) {
            const std::size_t i = cell / n;
            const std::size_t j = cell % n;
            const double bt = grid.beta_tilde_axis[i];
            const double at = grid.alpha_tilde_axis[j];
            grid.analytic_stable[cell] = scaled_stable_k(bt, at).has_value() ? 1 : 0;
            const ModalQuasipolynomial q{bt, at, 1.0};
            const double r = rhp_root_bound(q);
            try {
                grid.counts[cell] = count_roots_perturbed(q, {0.0, r, -r, r}, opts.roots).count;
                grid.valid[cell] = 1;
            } catch (const NumericalError&) {
                grid.counts[cell] = -1;
            }
        }
    };

    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n * n));
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();  // joins
    return grid;
}

std::vector<BoundaryLine> analytic_boundary_lines(double beta_tilde_max) {
    const int kmax = static_cast<int>(std::ceil(std::sqrt(std::max(beta_tilde_max, 0.0)) / kPi)) + 1;
    std::vector<BoundaryLine> lines;
    for (int k = 0; k <= kmax; ++k) {
        const double offset = k * k * kPi2;
        lines.push_back({BoundaryLine::Kind::Rising, k, offset});
        lines.push_back({BoundaryLine::Kind::Falling, k, offset});
        lines.push_back({BoundaryLine::Kind::Vertical, k, offset});
    }
    return lines;
}

double distance_to_analytic_boundary(double beta_tilde, double alpha_tilde,
                                     const std::vector<BoundaryLine>& lines) {
    double best = std::numeric_limits<double>::infinity();
    for (const BoundaryLine& line : lines) {
        double d = 0.0;
        switch (line.kind) {
            case BoundaryLine::Kind::Rising:
                d = std::abs(alpha_tilde - (beta_tilde - line.offset)) / std::numbers::sqrt2;
                break;
            case BoundaryLine::Kind::Falling:
                d = std::abs(alpha_tilde + (beta_tilde - line.offset)) / std::numbers::sqrt2;
                break;
            case BoundaryLine::Kind::Vertical:
                d = std::abs(beta_tilde - line.offset);
                break;
        }
        best = std::min(best, d);
    }
    return best;
}

}  // namespace delaystab
