#pragma once

// Single-mode reduction of the delayed wave equation: the modal delay ODE
// y'' + beta y + alpha y(t - tau) = 0, quasimode initial data, and envelope fitting.

#include <span>
#include <vector>

#include "delaystab/quasipoly.hpp"
#include "delaystab/stability.hpp"

namespace delaystab {

/// n^2 pi^2 / ell^2.
double beta_of_mode(const ModeSpec& mode);

ModalQuasipolynomial modal_quasipolynomial(const ModeSpec& mode, const ControlParams& params);

struct QuasimodeData {
    ModeSpec mode;
    double zeta0 = 1.0;  // displacement amplitude
    double zeta1 = 0.0;  // velocity amplitude
};

struct QuasimodeFields {
    std::vector<double> u0;
    std::vector<double> u1;
};

/// u0 = zeta0 sin(n pi x / ell), u1 = zeta1 sin(n pi x / ell). Exactly zero at x = 0 and x = ell.
QuasimodeFields quasimode_fields(const QuasimodeData& data, std::span<const double> grid);

/// Past values y(t) for t in [-tau, 0].
class HistoryFunction {
public:
    enum class Kind { Zero, Sampled };

    static HistoryFunction zero() { return HistoryFunction{}; }
    /// Uniform samples from t = -tau (first) to t = 0 (last); at least two.
    static HistoryFunction sampled(std::vector<double> samples);

    Kind kind() const { return kind_; }
    const std::vector<double>& samples() const { return samples_; }

    /// Linear interpolation of the samples at t in [-tau, 0].
    double at(double t, double tau) const;

private:
    Kind kind_ = Kind::Zero;
    std::vector<double> samples_;
};

struct ModalTrace {
    double dt = 0.0;       // step actually used (tau / delay_steps)
    int delay_steps = 0;   // M = tau / dt
    std::vector<double> times;
    std::vector<double> y;
    std::vector<double> ydot;
};

/// Classical RK4 on (y, y') with the step snapped so tau/dt is an integer M.
/// Delayed values inside a step come from the stored trajectory: the step
/// endpoints are stored samples and the midpoint uses cubic Hermite
/// interpolation of (y, y') on the aligned past step. Before t = tau the
/// history function supplies them.
///
/// Throws InvalidStep when dt <= 0 or dt >= tau, InvalidArgument when t_final < tau.
ModalTrace dde_integrate(double beta, double alpha, double tau, double zeta0, double zeta1,
                         const HistoryFunction& history, double dt, double t_final);

struct DecayFit {
    double rate = 0.0;       // slope of log(peak) against time
    double r_squared = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    int n_peaks = 0;
};

/// Least-squares fit of log(local maxima of |values|) against time within
/// [t_a, t_b]. Throws InsufficientPeaks with fewer than five maxima.
DecayFit decay_rate_fit(std::span<const double> times, std::span<const double> values,
                        double t_a, double t_b);

inline DecayFit decay_rate_fit(const ModalTrace& trace, double t_a, double t_b) {
    return decay_rate_fit(trace.times, trace.y, t_a, t_b);
}

/// (ell / 2) (ydot^2 + beta y^2): the string energy of y(t) sin(n pi x / ell).
double modal_energy(double y, double ydot, double beta, double ell);

std::vector<double> modal_energy_trace(const ModalTrace& trace, double beta, double ell);

}  // namespace delaystab
