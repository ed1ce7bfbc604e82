// Acceptance run: one PASS/FAIL line per criterion, informational lines marked INFO.
// Exit status is the number of failed criteria (capped at 1 for ctest).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "delaystab/errors.hpp"
#include "delaystab/fdtd.hpp"
#include "delaystab/modal.hpp"
#include "delaystab/quasipoly.hpp"
#include "delaystab/stability.hpp"

using namespace delaystab;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

// Tolerances, pinned.
constexpr double kAbscissaTol = 1e-6;
constexpr double kCrossingRelTol = 1e-12;
constexpr double kCriticalResidual = 1e-10;
constexpr double kRegionAgreement = 0.995;
constexpr double kOracleLinf = 0.02;
constexpr double kOracleRefinement = 1.8;
constexpr double kDecayRelTol = 0.15;
constexpr double kConservationDrift = 0.005;

// Rightmost roots from an independent 30-digit solve (mpmath).
constexpr double kAbscissa[3] = {-0.048967206775477788, -0.32866022994940563, -0.21250790540230509};

struct Case {
    const char* name;
    double tau;
    double alpha;
    int k;
};
constexpr Case kCases[3] = {{"case 1", 1.5, 5.0, 1}, {"case 2", 1.5, 3.0, 1}, {"case 3", 2.5, -1.7766, 2}};

constexpr double kPaperL = 10.0;
constexpr double kPaperC = 1.118;

struct Verdict {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %d  %-36s %8.2f s  %s\n", v.pass ? "PASS" : "FAIL", id, title, secs, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
}

void info(const std::string& line) {
    std::printf("INFO     %s\n", line.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::vector<double> sine_mode(const SimConfig& cfg) {
    return quasimode_fields({{1, cfg.length}, 1.0, 0.0}, grid_points(cfg)).u0;
}

RunResult run_mode(const SimConfig& cfg, int stride) {
    const auto u0 = sine_mode(cfg);
    const std::vector<double> u1(u0.size(), 0.0);
    return run(cfg, u0, u1, {}, stride);
}

double oracle_error(double dx, double dt) {
    const SimConfig cfg = make_config(DimensionlessSetup{1.0, 1.5, 3.0}, Discretization{dx, dt, 20.0, true, {}});
    const auto f = quasimode_fields({{1, 1.0}, 1.0, 0.0}, grid_points(cfg));
    const ModalTrace tr = dde_integrate(kPi2, 3.0, 1.5, 1.0, 0.0, HistoryFunction::zero(), cfg.dt, 20.0);
    if (tr.y.size() != static_cast<std::size_t>(cfg.steps) + 1) throw std::logic_error("time grids differ");
    const auto mid = static_cast<std::size_t>(cfg.nx / 2);
    double err = 0.0, scale = 0.0;
    auto compare = [&](long level, const std::vector<double>& u) {
        const double y = tr.y[static_cast<std::size_t>(level)];
        err = std::max(err, std::abs(u[mid] - y));
        scale = std::max(scale, std::abs(y));
    };
    DelayedWaveState st = init_state(cfg, f.u0, f.u1);
    compare(0, st.u_prev);
    compare(1, st.u_curr);
    while (st.step < cfg.steps) {
        step(st, cfg);
        compare(st.step, st.u_curr);
    }
    return err / scale;
}

}  // namespace

int main() {
    std::printf("delaystab acceptance\n");

    report(1, "certificate reproduction", [] {
        bool ok = true;
        for (const Case& c : kCases) {
            const auto cert = check_stabilizing({1, 1.0}, {c.tau, c.alpha});
            ok = ok && cert.satisfied && cert.k == c.k;
        }
        for (double tau : {1.0, 2.0, 3.0}) {
            const auto cert = check_stabilizing({1, 1.0}, {tau, 1.0});
            ok = ok && !cert.satisfied && cert.alpha_interval.empty() && !cert.k;
            ok = ok && admissible_alpha_interval({1, 1.0}, tau).empty();
        }
        return Verdict{ok, "3 cases satisfied with k = 1, 1, 2; tau = 1, 2, 3 empty"};
    });

    report(2, "spectral ordering", [] {
        double a[3];
        bool ok = true;
        for (int i = 0; i < 3; ++i) {
            a[i] = spectral_abscissa({kPi2, kCases[i].alpha, kCases[i].tau}, 1e-9);
            ok = ok && a[i] < 0.0 && std::abs(a[i] - kAbscissa[i]) <= kAbscissaTol;
        }
        ok = ok && a[1] < a[2] && a[2] < a[0];
        return Verdict{ok, fmt("a1 = %.9f, a2 = %.9f, a3 = %.9f", a[0], a[1], a[2])};
    });

    report(3, "crossing-frequency identity", [] {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> beta_d(0.1, 100.0), alpha_d(-150.0, 150.0);
        double worst_id = 0.0, worst_res = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double beta = beta_d(rng);
            double alpha = alpha_d(rng);
            if (alpha == 0.0) alpha = 1.0;
            const CrossingData d = critical_delays(beta, alpha, 4);
            worst_id = std::max(worst_id, std::abs(d.omega_plus * d.omega_plus - (beta + std::abs(alpha))) /
                                              (beta + std::abs(alpha)));
            if ((alpha * alpha < beta * beta) != d.omega_minus.has_value()) return Verdict{false, "omega_minus presence"};
            if (d.omega_minus) {
                const double wm2 = *d.omega_minus * *d.omega_minus;
                worst_id = std::max(worst_id, std::abs(wm2 - (beta - std::abs(alpha))) / (beta - std::abs(alpha)));
            }
            auto residual = [&](double w, const std::vector<double>& taus) {
                for (double t : taus) worst_res = std::max(worst_res, std::abs(evaluate({beta, alpha, t}, {0.0, w})));
            };
            residual(d.omega_plus, d.critical_delays_plus);
            if (d.omega_minus) residual(*d.omega_minus, d.critical_delays_minus);
        }
        return Verdict{worst_id <= kCrossingRelTol && worst_res <= kCriticalResidual,
                       fmt("max identity error %.2e, max |Q(i w)| %.2e", worst_id, worst_res)};
    });

    report(4, "region chart 200x200", [] {
        const AxisRange b{0.0, 9.0 * kPi2}, a{-4.0 * kPi2, 4.0 * kPi2};
        const RegionGrid g = region_grid(b, a, 200);
        const double diag = std::hypot((b.hi - b.lo) / 200, (a.hi - a.lo) / 200);
        const auto lines = analytic_boundary_lines(b.hi);
        std::size_t compared = 0, agree = 0;
        for (std::size_t i = 0; i < 200; ++i) {
            for (std::size_t j = 0; j < 200; ++j) {
                if (distance_to_analytic_boundary(g.beta_tilde_axis[i], g.alpha_tilde_axis[j], lines) < diag) continue;
                ++compared;
                const bool valid = g.valid[g.index(i, j)] != 0;
                agree += (valid && g.stable(i, j) == (g.count(i, j) == 0)) ? 1 : 0;
            }
        }
        const double frac = static_cast<double>(agree) / static_cast<double>(compared);
        return Verdict{frac >= kRegionAgreement,
                       fmt("%.0f of %.0f off-boundary cells agree (%.4f), %.0f invalid cells", static_cast<double>(agree),
                           static_cast<double>(compared), frac, static_cast<double>(g.invalid_cells()))};
    });

    report(5, "winding certification", [] {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> beta_d(0.1, 50.0), alpha_d(-20.0, 20.0), tau_d(0.1, 3.0);
        std::uniform_real_distribution<double> re_d(-3.0, 2.0), im_d(-10.0, 10.0);
        int mismatches = 0, roots = 0, perturbed = 0;
        for (int i = 0; i < 500; ++i) {
            const ModalQuasipolynomial q{beta_d(rng), alpha_d(rng), tau_d(rng)};
            double r0 = re_d(rng), r1 = re_d(rng), i0 = im_d(rng), i1 = im_d(rng);
            if (r0 > r1) std::swap(r0, r1);
            if (i0 > i1) std::swap(i0, i1);
            r1 = std::max(r1, r0 + 0.2);
            i1 = std::max(i1, i0 + 0.2);
            const RootSet set = locate_roots(q, {r0, r1, i0, i1});
            if (set.uncertain_multiplicity || static_cast<int>(set.roots.size()) != set.winding_count) ++mismatches;
            roots += set.winding_count;
            perturbed += (set.rect.re_min != r0 || set.rect.re_max != r1) ? 1 : 0;
        }
        return Verdict{mismatches == 0, fmt("%.0f mismatches, %.0f roots certified, %.0f boundary retries",
                                            mismatches, roots, perturbed)};
    });

    report(6, "FDTD-DDE oracle equivalence", [] {
        const double coarse = oracle_error(0.05, 0.005);
        const double fine = oracle_error(0.025, 0.0025);
        return Verdict{coarse <= kOracleLinf && coarse / fine >= kOracleRefinement,
                       fmt("rel Linf %.4f at dx = 0.05, %.4f at dx = 0.025, ratio %.2f", coarse, fine, coarse / fine)};
    });

    for (int i = 0; i < 3; ++i) {
        const Case c = kCases[i];
        const std::string title = std::string("decay-rate closure, ") + c.name;
        report(7, title.c_str(), [c, i] {
            const SimConfig cfg =
                make_config(PhysicalSetup{kPaperL, kPaperC, 1.0, c.tau, c.alpha}, Discretization{});
            const double target = 2.0 * kAbscissa[i] / cfg.time_scale;
            const DecayFit fit = decay_rate_fit(run_mode(cfg, 10).energy, 2.0 * cfg.tau_eff, cfg.t_final);
            const double rel = std::abs(fit.rate - target) / std::abs(target);
            return Verdict{fit.rate < 0.0 && rel <= kDecayRelTol,
                           fmt("fit %.5f vs 2a/d %.5f (rel %.2f, r2 %.2f)", fit.rate, target, rel, fit.r_squared)};
        });
    }
    {
        // Same closure once the rightmost pair dominates: 60 dimensionless time units.
        for (int i = 0; i < 3; ++i) {
            const Case c = kCases[i];
            const double d = kPaperL / kPaperC;
            Discretization disc;
            disc.t_final = 60.0 * d;
            const SimConfig cfg = make_config(PhysicalSetup{kPaperL, kPaperC, 1.0, c.tau, c.alpha}, disc);
            const double target = 2.0 * kAbscissa[i] / cfg.time_scale;
            const double rate = decay_rate_fit(run_mode(cfg, 20).energy, 30.0 * d, 60.0 * d).rate;
            info(std::string(c.name) + fmt(": window [30d, 60d] fit %.5f vs 2a/d %.5f (rel %.3f)", rate, target,
                                          std::abs(rate - target) / std::abs(target)));
        }
    }

    report(8, "conservation baseline", [] {
        const SimConfig cfg = make_config(PhysicalSetup{kPaperL, kPaperC, 1.0, 1.5, 0.0}, Discretization{});
        const RunResult r = run_mode(cfg, 1);
        const auto [lo, hi] = std::minmax_element(r.energy.field_energy.begin(), r.energy.field_energy.end());
        const double drift = (*hi - *lo) / r.energy.field_energy.front();
        return Verdict{drift <= kConservationDrift, fmt("max relative energy spread %.2e over T_f = 100", drift)};
    });

    report(9, "delay-independent impossibility", [] {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> beta_d(0.1, 100.0), alpha_d(-150.0, 150.0);
        int confirmed = 0, checked = 0;
        bool crossing_seen[2] = {false, false};  // alpha > 0, alpha < 0
        for (int i = 0; i < 1000; ++i) {
            const double beta = beta_d(rng);
            double alpha = alpha_d(rng);
            if (alpha == 0.0) alpha = 1.0;
            const CrossingData d = critical_delays(beta, alpha, 2);
            if (!(d.omega_plus > 0.0)) return Verdict{false, "missing omega_plus"};
            auto confirm = [&](double w, const std::vector<double>& taus) {
                for (double t : taus) {
                    const double h = std::min(0.05, 0.25 * w);
                    const ModalQuasipolynomial q{beta, alpha, t};
                    ++checked;
                    if (count_roots_perturbed(q, {-h, h, w - h, w + h}).count >= 1) ++confirmed;
                }
            };
            confirm(d.omega_plus, d.critical_delays_plus);
            if (d.omega_minus) confirm(*d.omega_minus, d.critical_delays_minus);

            const int cls = alpha > 0.0 ? 0 : 1;
            if (!crossing_seen[cls] && i < 200) {
                const double t = d.critical_delays_plus.front();
                const double eps = 1e-3 * t;
                const double before = spectral_abscissa({beta, alpha, t - eps});
                const double after = spectral_abscissa({beta, alpha, t + eps});
                crossing_seen[cls] = after > before;
            }
        }
        const bool ok = confirmed == checked && crossing_seen[0] && crossing_seen[1];
        return Verdict{ok, fmt("%.0f of %.0f critical delays put a root in the axis box; crossing seen +%.0f/-%.0f",
                               confirmed, checked, crossing_seen[0], crossing_seen[1])};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
