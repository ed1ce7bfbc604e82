#pragma once

// Explicit leapfrog simulation of u_tt - c^2 u_xx = -alpha_eff u(x, t - tau_eff)
// on (0, L) with Dirichlet ends and identically zero pre-history.

#include <optional>
#include <span>
#include <vector>

#include "delaystab/modal.hpp"

namespace delaystab {

/// String in physical units; d = l / (c ell) maps dimensionless time to physical time.
struct PhysicalSetup {
    double l = 10.0;
    double c = 1.0;
    double ell = 1.0;
    double tau = 1.0;
    double alpha = 0.0;
};

/// Unit wave speed on (0, ell); parameters pass through unchanged.
struct DimensionlessSetup {
    double ell = 1.0;
    double tau = 1.0;
    double alpha = 0.0;
};

struct Discretization {
    double dx = 0.05;
    double dt = 0.005;
    double t_final = 100.0;
    bool snap_dt = false;                 // shrink dt so tau_eff / dt is an integer
    std::optional<double> energy_weight;  // default 2 |alpha_eff| tau_eff
};

struct SimConfig {
    double length = 0.0;
    double wave_speed = 1.0;
    double alpha_eff = 0.0;
    double tau_eff = 0.0;
    double dx = 0.0;
    double dt = 0.0;
    double t_final = 0.0;
    double energy_weight = 0.0;
    double time_scale = 1.0;  // d
    double ell = 1.0;

    int nx = 0;                         // cells; nodes are 0..nx
    int delay_steps = 0;                // M = round(tau_eff / dt)
    double delay_rounding_error = 0.0;  // |tau_eff - M dt|
    long steps = 0;                     // time levels after t = 0

    double courant() const { return wave_speed * dt / dx; }
};

/// Throws CflViolation when c dt / dx > 1, DelayTooSmall when tau_eff < dt and
/// InvalidArgument for non-positive inputs or a dx that does not divide the length.
SimConfig make_config(const PhysicalSetup& physical, const Discretization& disc);
SimConfig make_config(const DimensionlessSetup& setup, const Discretization& disc);

/// Node coordinates x_j = j dx, j = 0..nx.
std::vector<double> grid_points(const SimConfig& config);

/// Circular store of past displacement frames, addressed by time level.
/// Levels never written read as zero frames (the zero pre-history).
class DelayHistory {
public:
    DelayHistory() = default;
    DelayHistory(std::size_t width, std::size_t capacity);

    std::span<const double> frame(long level) const;
    /// Trapezoidal integral of u^2 over the string for a stored level.
    double squared_norm(long level) const { return norms_[slot(level)]; }
    void store(long level, std::span<const double> values, double dx);

    std::size_t capacity() const { return capacity_; }
    std::size_t width() const { return width_; }

private:
    std::size_t slot(long level) const;

    std::size_t width_ = 0;
    std::size_t capacity_ = 0;
    std::vector<double> data_;
    std::vector<double> norms_;
};

struct DelayedWaveState {
    std::vector<double> u_prev;  // level step - 1
    std::vector<double> u_curr;  // level step
    DelayHistory history;        // holds at least levels step - M - 1 .. step
    long step = 0;
};

/// u_prev = u0 and u_curr from the second-order Taylor starter; step = 1.
/// Throws ShapeMismatch on wrong lengths or nonzero end values.
DelayedWaveState init_state(const SimConfig& config, std::span<const double> u0,
                            std::span<const double> u1);

/// Advance one leapfrog step with the delayed frame M levels back.
void step(DelayedWaveState& state, const SimConfig& config);

/// Energy 1/2 int (u_t^2 + c^2 u_x^2) dx at level step - 1: u_t is the centred
/// difference of the neighbouring levels (forward difference at level 0),
/// u_x forward differences on cells.
double field_energy(const DelayedWaveState& state, const SimConfig& config);

/// field_energy + (xi / 2) int_0^L int_0^1 u(x, t - tau rho)^2 drho dx at level step - 1.
/// Throws HistoryIncomplete when step < M.
double weighted_energy(const DelayedWaveState& state, const SimConfig& config);

struct EnergyTrace {
    std::vector<double> times;
    std::vector<double> field_energy;
    std::vector<double> weighted_energy;
    int sample_stride = 1;
};

enum class EnergyKind { Field, Weighted };

/// Envelope fit of the chosen energy column; the rate is twice the amplitude rate.
inline DecayFit decay_rate_fit(const EnergyTrace& trace, double t_a, double t_b,
                               EnergyKind kind = EnergyKind::Field) {
    return decay_rate_fit(trace.times,
                          kind == EnergyKind::Field ? trace.field_energy : trace.weighted_energy, t_a,
                          t_b);
}

struct SnapshotSet {
    std::vector<double> times;
    std::vector<std::vector<double>> frames;
};

struct RunResult {
    EnergyTrace energy;
    SnapshotSet snapshots;
    DelayedWaveState final_state;
};

/// Advance to t_final, sampling energies every `energy_stride` levels and
/// frames at the levels nearest to `snapshot_times`. Throws NumericalBlowUp
/// if |u| exceeds 1e6.
RunResult run(const SimConfig& config, std::span<const double> u0, std::span<const double> u1,
              std::span<const double> snapshot_times, int energy_stride);

}  // namespace delaystab
