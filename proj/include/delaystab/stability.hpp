#pragma once

// Parameter-plane stabilization criterion for the delayed modal quasipolynomial,
// crossing frequencies / critical delays, and the scaled (beta~, alpha~) region chart.

#include <optional>
#include <vector>

#include "delaystab/quasipoly.hpp"

namespace delaystab {

struct ModeSpec {
    int n = 1;          // mode index, >= 1
    double ell = 1.0;   // string length, > 0

    void validate() const;
};

struct ControlParams {
    double tau = 0.0;    // delay, > 0
    double alpha = 0.0;  // gain, != 0

    void validate() const;
};

/// Open interval (lo, hi). Empty when lo >= hi.
struct OpenInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const { return !(lo < hi); }
    bool contains(double x) const { return lo < x && x < hi; }
};

struct StabilityCertificate {
    std::optional<int> k;  // floor(n tau / ell); absent at resonance
    OpenInterval alpha_interval;
    bool satisfied = false;
};

/// floor(n tau / ell), or nullopt when n tau / ell is a positive integer
/// (relative tolerance 1e-12) and no stabilizing gain exists.
std::optional<int> k_index(const ModeSpec& mode, double tau);

/// Gains alpha for which 0 < (-1)^(k+1) ell^2 tau^2 alpha < m holds, with
/// m = min{n^2 pi^2 tau^2 - k^2 ell^2 pi^2, (k+1)^2 ell^2 pi^2 - n^2 pi^2 tau^2}.
OpenInterval admissible_alpha_interval(const ModeSpec& mode, double tau);

StabilityCertificate check_stabilizing(const ModeSpec& mode, const ControlParams& params);

/// 0 < (-1)^(k+1) alpha~ < min{beta~ - k^2 pi^2, (k+1)^2 pi^2 - beta~} for this k.
bool scaled_criterion_holds(double beta_tilde, double alpha_tilde, int k);

/// First k in 0..ceil(sqrt(beta~)/pi)+1 satisfying the scaled criterion.
std::optional<int> scaled_stable_k(double beta_tilde, double alpha_tilde);

struct CrossingData {
    double omega_plus = 0.0;
    std::optional<double> omega_minus;  // present iff alpha^2 < beta^2
    std::vector<double> critical_delays_plus;
    std::vector<double> critical_delays_minus;
};

/// Positive roots of w^4 - 2 beta w^2 - (alpha^2 - beta^2) = 0. Delay lists are left empty.
CrossingData crossing_frequencies(double beta, double alpha);

/// Crossing frequencies plus the first `max_count` positive delays per frequency
/// at which Q(i omega) = 0.
CrossingData critical_delays(double beta, double alpha, int max_count);

struct AxisRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct RegionGrid {
    std::vector<double> beta_tilde_axis;
    std::vector<double> alpha_tilde_axis;
    std::vector<int> counts;            // row-major [beta index][alpha index]; -1 when invalid
    std::vector<char> analytic_stable;  // same layout
    std::vector<char> valid;

    std::size_t index(std::size_t i, std::size_t j) const { return i * alpha_tilde_axis.size() + j; }
    int count(std::size_t i, std::size_t j) const { return counts[index(i, j)]; }
    bool stable(std::size_t i, std::size_t j) const { return analytic_stable[index(i, j)] != 0; }
    std::size_t invalid_cells() const;
};

struct RegionOptions {
    unsigned threads = 0;  // 0 = hardware concurrency
    RootOptions roots;
};

/// Right-half-plane root counts of z^2 + beta~ + alpha~ exp(-z) at the cell
/// centres of a resolution x resolution grid, alongside the analytic criterion.
RegionGrid region_grid(AxisRange beta_tilde, AxisRange alpha_tilde, int resolution,
                       const RegionOptions& opts = {});

/// Straight lines bounding the analytic lobes in the (beta~, alpha~) plane.
struct BoundaryLine {
    enum class Kind { Rising, Falling, Vertical };
    Kind kind;
    int k;
    double offset;  // k^2 pi^2: alpha~ = +(beta~ - offset), -(beta~ - offset), or beta~ = offset
};

std::vector<BoundaryLine> analytic_boundary_lines(double beta_tilde_max);

/// Euclidean distance from (beta~, alpha~) to the nearest analytic boundary line.
double distance_to_analytic_boundary(double beta_tilde, double alpha_tilde,
                                     const std::vector<BoundaryLine>& lines);

}  // namespace delaystab
