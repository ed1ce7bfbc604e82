#include "delaystab/quasipoly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>

#include "delaystab/errors.hpp"

namespace delaystab {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Size of the largest term of Q at s; residuals are judged against it so that
// roots far into the left half-plane (where exp(-s tau) is huge) still converge.
double term_scale(const ModalQuasipolynomial& q, Complex s) {
    const double expo = std::abs(q.alpha) * std::exp(-s.real() * q.tau);
    return std::max({1.0, std::norm(s), q.beta, expo});
}

bool converged(const ModalQuasipolynomial& q, Complex s, Complex f, double tol) {
    return std::abs(f) <= tol * term_scale(q, s);
}

std::optional<Complex> newton_refine(const ModalQuasipolynomial& q, Complex z,
                                     double tol, const RootOptions& opts) {
    Complex f = evaluate(q, z);
    if (!finite(f)) return std::nullopt;
    int iter = 0;
    for (; iter < opts.max_newton_iterations && !converged(q, z, f, tol); ++iter) {
        const Complex df = evaluate_derivative(q, z);
        if (!finite(df) || df == Complex{}) return std::nullopt;
        const Complex step = f / df;
        double lambda = 1.0;
        bool accepted = false;
        Complex zn, fn;
        for (int h = 0; h <= opts.max_damping_halvings; ++h, lambda *= 0.5) {
            zn = z - lambda * step;
            fn = evaluate(q, zn);
            if (finite(fn) && std::abs(fn) < std::abs(f)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) return std::nullopt;
        z = zn;
        f = fn;
    }
    if (!converged(q, z, f, tol)) return std::nullopt;
    // A few undamped polishing steps take the residual to round-off level.
    for (int k = 0; k < 3; ++k) {
        const Complex df = evaluate_derivative(q, z);
        if (!finite(df) || df == Complex{}) break;
        const Complex zn = z - f / df;
        const Complex fn = evaluate(q, zn);
        if (!finite(fn) || !(std::abs(fn) < std::abs(f))) break;
        z = zn;
        f = fn;
    }
    return z;
}

struct Segment {
    Complex a, b;
    Complex fa, fb;
};

class ContourWinder {
public:
    ContourWinder(const ModalQuasipolynomial& q, double boundary_tolerance, std::size_t budget)
        : q_(q), tol_(boundary_tolerance), budget_(budget) {}

    Complex sample(Complex s) {
        if (++evaluations_ > budget_) {
            throw NonConvergence("contour refinement exceeded the evaluation budget");
        }
        const Complex f = evaluate(q_, s);
        if (!finite(f)) throw NonConvergence("quasipolynomial overflow on contour");
        if (std::abs(f) < tol_) {
            std::ostringstream os;
            os << "root on rectangle boundary near " << s.real() << (s.imag() < 0 ? "" : "+")
               << s.imag() << "i";
            throw BoundaryRootError(os.str());
        }
        return f;
    }

    // Phase increment of Q along the straight segment a -> b.
    double phase_change(Complex a, Complex fa, Complex b, Complex fb) {
        double total = 0.0;
        stack_.clear();
        stack_.push_back({a, b, fa, fb});
        while (!stack_.empty()) {
            const Segment seg = stack_.back();
            stack_.pop_back();
            const double d = std::arg(seg.fb / seg.fa);
            if (std::abs(d) <= kPi / 2) {
                total += d;
                continue;
            }
            const Complex mid = 0.5 * (seg.a + seg.b);
            if (mid == seg.a || mid == seg.b) {
                throw NonConvergence("contour segment cannot be refined further");
            }
            const Complex fm = sample(mid);
            stack_.push_back({seg.a, mid, seg.fa, fm});
            stack_.push_back({mid, seg.b, fm, seg.fb});
        }
        return total;
    }

private:
    const ModalQuasipolynomial& q_;
    double tol_;
    std::size_t budget_;
    std::size_t evaluations_ = 0;
    std::vector<Segment> stack_;
};

}  // namespace

void ModalQuasipolynomial::validate() const {
    if (!std::isfinite(beta) || !std::isfinite(alpha) || !std::isfinite(tau)) {
        throw InvalidArgument("quasipolynomial coefficients must be finite");
    }
    if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
    if (tau < 0.0) throw InvalidArgument("tau must be nonnegative");
}

void Rectangle::validate() const {
    if (!std::isfinite(re_min) || !std::isfinite(re_max) || !std::isfinite(im_min) ||
        !std::isfinite(im_max)) {
        throw InvalidArgument("rectangle bounds must be finite");
    }
    if (!(re_min < re_max) || !(im_min < im_max)) {
        throw InvalidArgument("rectangle must satisfy re_min < re_max and im_min < im_max");
    }
}

double Rectangle::diameter() const { return std::hypot(width(), height()); }

bool Rectangle::contains(Complex z, double slack) const {
    return z.real() >= re_min - slack && z.real() <= re_max + slack &&
           z.imag() >= im_min - slack && z.imag() <= im_max + slack;
}

Rectangle Rectangle::expanded(double margin) const {
    return {re_min - margin, re_max + margin, im_min - margin, im_max + margin};
}

Complex evaluate(const ModalQuasipolynomial& q, Complex s) {
    return s * s + q.beta + q.alpha * std::exp(-s * q.tau);
}

Complex evaluate_derivative(const ModalQuasipolynomial& q, Complex s) {
    return 2.0 * s - q.alpha * q.tau * std::exp(-s * q.tau);
}

double rhp_root_bound(const ModalQuasipolynomial& q) {
    return std::sqrt(q.beta + std::abs(q.alpha));
}

int count_roots_in_rectangle(const ModalQuasipolynomial& q, const Rectangle& rect,
                             int boundary_samples, double boundary_tolerance,
                             std::size_t max_evaluations) {
    rect.validate();
    const int n = std::max(boundary_samples, 4);
    ContourWinder winder(q, boundary_tolerance, max_evaluations);

    const Complex corners[5] = {
        {rect.re_min, rect.im_min}, {rect.re_max, rect.im_min}, {rect.re_max, rect.im_max},
        {rect.re_min, rect.im_max}, {rect.re_min, rect.im_min}};

    double phase = 0.0;
    Complex p0 = corners[0];
    Complex f0 = winder.sample(p0);
    for (int edge = 0; edge < 4; ++edge) {
        const Complex a = corners[edge];
        const Complex b = corners[edge + 1];
        // exp(-s tau) turns by tau radians per unit of Im s; sample well below
        // that so the pi/2 refinement test cannot be fooled by aliasing.
        const double turn_rate = std::max(q.tau, 1.0);
        const int samples = std::max(
            n, static_cast<int>(std::ceil(8.0 * turn_rate * std::abs(b - a))));
        for (int i = 1; i <= samples; ++i) {
            // Land exactly on the next corner so the contour closes.
            const Complex p1 = (i == samples) ? b : a + (b - a) * (static_cast<double>(i) / samples);
            const Complex f1 = winder.sample(p1);
            phase += winder.phase_change(p0, f0, p1, f1);
            p0 = p1;
            f0 = f1;
        }
    }
    const double winding = phase / (2.0 * kPi);
    const double rounded = std::round(winding);
    if (std::abs(winding - rounded) > 0.25) {
        throw NonConvergence("winding number is not close to an integer");
    }
    return static_cast<int>(rounded);
}

PerturbedCount count_roots_perturbed(const ModalQuasipolynomial& q, const Rectangle& rect,
                                     const RootOptions& opts) {
    Rectangle r = rect;
    const double shift = opts.perturbation_fraction * rect.diameter();
    for (int attempt = 0;; ++attempt) {
        try {
            const int c = count_roots_in_rectangle(q, r, opts.boundary_samples,
                                                   opts.boundary_tolerance,
                                                   opts.max_contour_evaluations);
            return {c, r, attempt};
        } catch (const BoundaryRootError&) {
            if (attempt >= opts.max_perturbations) throw;
            r = r.expanded(shift);
        }
    }
}

namespace {

void sort_rightmost_first(std::vector<Root>& roots) {
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
        return a.value.imag() > b.value.imag();
    });
}

// Newton-refined, de-duplicated roots seeded from grid cells where both Re Q
// and Im Q change sign. Not certified.
std::vector<Root> seed_and_refine(const ModalQuasipolynomial& q, const Rectangle& rect,
                                  int grid_density, double root_tolerance,
                                  const RootOptions& opts) {
    // Roughly square cells, density counted along a square of equal area.
    const double w = rect.width();
    const double h = rect.height();
    const double cell = std::sqrt(w * h) / grid_density;
    constexpr double kMaxCells = 4.0e6;
    int nx = std::max(4, static_cast<int>(std::ceil(w / cell)));
    int ny = std::max(4, static_cast<int>(std::ceil(h / cell)));
    if (static_cast<double>(nx) * ny > kMaxCells) {
        const double shrink = std::sqrt(kMaxCells / (static_cast<double>(nx) * ny));
        nx = std::max(4, static_cast<int>(nx * shrink));
        ny = std::max(4, static_cast<int>(ny * shrink));
    }
    const double hx = w / nx;
    const double hy = h / ny;

    std::vector<Complex> values(static_cast<std::size_t>(nx + 1) * (ny + 1));
    auto at = [&](int i, int j) -> Complex& {
        return values[static_cast<std::size_t>(j) * (nx + 1) + i];
    };
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            at(i, j) = evaluate(q, {rect.re_min + i * hx, rect.im_min + j * hy});
        }
    }

    std::vector<Root> roots;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Complex c[4] = {at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)};
            double re_lo = c[0].real(), re_hi = c[0].real();
            double im_lo = c[0].imag(), im_hi = c[0].imag();
            for (const Complex& v : c) {
                re_lo = std::min(re_lo, v.real());
                re_hi = std::max(re_hi, v.real());
                im_lo = std::min(im_lo, v.imag());
                im_hi = std::max(im_hi, v.imag());
            }
            if (!(re_lo <= 0.0 && re_hi >= 0.0 && im_lo <= 0.0 && im_hi >= 0.0)) continue;

            const Complex seed{rect.re_min + (i + 0.5) * hx, rect.im_min + (j + 0.5) * hy};
            const auto z = newton_refine(q, seed, root_tolerance, opts);
            if (!z || !rect.contains(*z)) continue;

            const double residual = std::abs(evaluate(q, *z));
            auto dup = std::find_if(roots.begin(), roots.end(), [&](const Root& r) {
                return std::abs(r.value - *z) <= opts.cluster_radius;
            });
            if (dup == roots.end()) {
                roots.push_back({*z, residual, false});
            } else if (residual < dup->residual) {
                dup->value = *z;
                dup->residual = residual;
            }
        }
    }
    sort_rightmost_first(roots);
    return roots;
}

}  // namespace

std::vector<Root> find_roots(const ModalQuasipolynomial& q, const Rectangle& rect,
                             int grid_density, double root_tolerance, const RootOptions& opts) {
    q.validate();
    rect.validate();
    if (grid_density < 16) throw InvalidArgument("grid_density must be at least 16");

    std::vector<Root> roots = seed_and_refine(q, rect, grid_density, root_tolerance, opts);
    const int winding = count_roots_in_rectangle(q, rect, opts.boundary_samples,
                                                 opts.boundary_tolerance,
                                                 opts.max_contour_evaluations);
    if (static_cast<int>(roots.size()) != winding) {
        std::ostringstream os;
        os << "refined " << roots.size() << " roots but the winding count is " << winding;
        throw CertificationMismatch(os.str(), winding, static_cast<int>(roots.size()));
    }
    for (Root& r : roots) r.certified = true;
    return roots;
}

RootSet locate_roots(const ModalQuasipolynomial& q, const Rectangle& rect,
                     const RootOptions& opts) {
    q.validate();
    const PerturbedCount pc = count_roots_perturbed(q, rect, opts);
    RootSet out;
    out.rect = pc.rect;
    out.winding_count = pc.count;

    int density = std::max(16, opts.grid_density);
    for (int attempt = 0;; ++attempt) {
        try {
            out.roots = find_roots(q, pc.rect, density, opts.root_tolerance, opts);
            out.grid_density = density;
            return out;
        } catch (const CertificationMismatch&) {
            if (attempt == opts.max_density_doublings) break;
            density *= 2;
        }
    }
    // Persistent mismatch, most likely a multiple root: report the distinct
    // roots found at the finest density and flag the set.
    out.roots = seed_and_refine(q, pc.rect, density, opts.root_tolerance, opts);
    out.grid_density = density;
    out.uncertain_multiplicity = true;
    return out;
}

namespace {

// Rightmost root real part inside a strip already known to contain roots,
// with nothing to the right of `strip.re_max`. Bracketing by winding counts.
double bisect_abscissa(const ModalQuasipolynomial& q, Rectangle strip, double tol,
                       const RootOptions& opts) {
    double lo = strip.re_min;
    double hi = strip.re_max;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        for (int attempt = 0;; ++attempt) {
            try {
                const int c = count_roots_in_rectangle(
                    q, {mid, hi, strip.im_min, strip.im_max}, opts.boundary_samples,
                    opts.boundary_tolerance, opts.max_contour_evaluations);
                if (c > 0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                break;
            } catch (const BoundaryRootError&) {
                // Near a multiple root |Q| stays below the boundary tolerance over a
                // whole neighbourhood; the bracket is then as tight as it can get.
                if (attempt >= opts.max_perturbations) return 0.5 * (lo + hi);
                // Nudge the cut off the root; the bracket stays valid either way.
                mid += 0.137 * (hi - mid);
            }
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double spectral_abscissa(const ModalQuasipolynomial& q, double abscissa_tolerance,
                         const AbscissaOptions& opts) {
    q.validate();
    if (!(abscissa_tolerance > 0.0)) throw InvalidArgument("abscissa_tolerance must be positive");

    auto rightmost = [&](const Rectangle& strip) {
        const RootSet set = locate_roots(q, strip, opts.roots);
        if (!set.uncertain_multiplicity && !set.roots.empty()) {
            double best = set.roots.front().value.real();
            for (const Root& r : set.roots) best = std::max(best, r.value.real());
            return best;
        }
        return bisect_abscissa(q, set.rect, abscissa_tolerance, opts.roots);
    };

    const double bound = rhp_root_bound(q);
    const Rectangle rhp{0.0, bound, -bound, bound};
    const PerturbedCount first = count_roots_perturbed(q, rhp, opts.roots);
    if (first.count > 0) return rightmost(first.rect);

    double right = first.rect.re_min;
    for (int k = 0; k < opts.max_strips; ++k) {
        std::optional<PerturbedCount> pc;
        for (int widen = 0; !pc; ++widen) {
            // The left cut is free; move it further out when it sits on a root cluster.
            const double left = right - opts.strip_width * (1.0 + 0.137 * widen);
            // On Re s >= left every root obeys |s|^2 <= beta + |alpha| exp(-left * tau).
            const double reach =
                std::sqrt(q.beta + std::abs(q.alpha) * std::exp(-left * q.tau)) * (1.0 + 1e-9) + 1e-9;
            if (!std::isfinite(reach)) throw NonConvergence("strip sweep overflowed before finding a root");
            try {
                pc = count_roots_perturbed(q, {left, right, -reach, reach}, opts.roots);
            } catch (const BoundaryRootError&) {
                if (widen >= opts.roots.max_perturbations) throw;
            }
        }
        if (pc->count > 0) return rightmost(pc->rect);
        right = pc->rect.re_min;
    }
    throw NonConvergence("no root found in the leftward strip sweep");
}

}  // namespace delaystab
