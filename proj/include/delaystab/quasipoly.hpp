#pragma once

// Modal characteristic quasipolynomial Q(s) = s^2 + beta + alpha * exp(-s * tau):
// evaluation, argument-principle root counting, Newton root location and
// the spectral abscissa (rightmost real part of the root set).

#include <complex>
#include <cstddef>
#include <vector>

namespace delaystab {

using Complex = std::complex<double>;

struct ModalQuasipolynomial {
    double beta = 0.0;   // squared modal frequency, n^2 pi^2 / ell^2
    double alpha = 0.0;  // potential gain
    double tau = 0.0;    // delay

    /// Throws InvalidArgument unless beta > 0, tau >= 0 and everything is finite.
    void validate() const;
};

struct Rectangle {
    double re_min = 0.0;
    double re_max = 0.0;
    double im_min = 0.0;
    double im_max = 0.0;

    void validate() const;
    double width() const { return re_max - re_min; }
    double height() const { return im_max - im_min; }
    double diameter() const;
    bool contains(Complex z, double slack = 0.0) const;
    /// Same rectangle grown by `margin` on every side.
    Rectangle expanded(double margin) const;
};

struct Root {
    Complex value;
    double residual = 0.0;  // |Q(value)|
    bool certified = false;
};

/// Tolerances shared by the counting and location routines.
struct RootOptions {
    double root_tolerance = 1e-10;      // on |Q|, relative to the size of the largest term
    double boundary_tolerance = 1e-8;   // |Q| below this on a contour is a boundary root
    double cluster_radius = 1e-7;       // refined roots closer than this are merged
    int boundary_samples = 64;          // initial samples per rectangle edge
    std::size_t max_contour_evaluations = std::size_t{1} << 22;
    int max_newton_iterations = 100;
    int max_damping_halvings = 20;
    int grid_density = 32;              // initial seed grid density for locate_roots
    int max_density_doublings = 3;
    int max_perturbations = 5;          // outward shifts on BoundaryRootError
    double perturbation_fraction = 1e-4;
};

Complex evaluate(const ModalQuasipolynomial& q, Complex s);

/// dQ/ds = 2s - alpha * tau * exp(-s * tau).
Complex evaluate_derivative(const ModalQuasipolynomial& q, Complex s);

/// Radius of a closed disk containing every root with Re s >= 0: sqrt(beta + |alpha|).
double rhp_root_bound(const ModalQuasipolynomial& q);

/// Winding number of Q along the boundary of `rect`, i.e. the number of roots
/// inside counted with multiplicity. The phase is continued sample to sample and
/// a segment is bisected whenever its phase step exceeds pi/2.
///
/// Throws BoundaryRootError if |Q| < boundary_tolerance at a boundary sample and
/// NonConvergence when the evaluation budget is exhausted.
int count_roots_in_rectangle(const ModalQuasipolynomial& q, const Rectangle& rect,
                             int boundary_samples, double boundary_tolerance = 1e-8,
                             std::size_t max_evaluations = std::size_t{1} << 22);

struct PerturbedCount {
    int count = 0;
    Rectangle rect;    // rectangle actually used
    int retries = 0;   // number of outward shifts applied
};

/// count_roots_in_rectangle with the outward-shift retry policy applied on
/// BoundaryRootError. Rethrows after `max_perturbations` failed shifts.
PerturbedCount count_roots_perturbed(const ModalQuasipolynomial& q, const Rectangle& rect,
                                     const RootOptions& opts = {});

/// Single attempt: seeds from sign changes of Re Q and Im Q on a grid,
/// damped Newton refinement, de-duplication, then certification against the
/// winding count. Throws CertificationMismatch when the two disagree.
std::vector<Root> find_roots(const ModalQuasipolynomial& q, const Rectangle& rect,
                             int grid_density, double root_tolerance,
                             const RootOptions& opts = {});

struct RootSet {
    std::vector<Root> roots;
    Rectangle rect;              // possibly perturbed outward
    int winding_count = 0;
    int grid_density = 0;        // density of the accepted attempt
    bool uncertain_multiplicity = false;
};

/// find_roots plus the retry policy: boundary perturbation, then density
/// doubling on CertificationMismatch. Never throws CertificationMismatch; a
/// persistent mismatch is reported through `uncertain_multiplicity`.
RootSet locate_roots(const ModalQuasipolynomial& q, const Rectangle& rect,
                     const RootOptions& opts = {});

struct AbscissaOptions {
    double strip_width = 0.5;
    int max_strips = 400;
    RootOptions roots;
};

/// max{Re s : Q(s) = 0} to within `abscissa_tolerance`.
double spectral_abscissa(const ModalQuasipolynomial& q, double abscissa_tolerance = 1e-6,
                         const AbscissaOptions& opts = {});

}  // namespace delaystab
