#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "delaystab/errors.hpp"
#include "delaystab/modal.hpp"

using namespace delaystab;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

double peak_in(const ModalTrace& tr, double a, double b) {
    double m = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        if (tr.times[i] >= a && tr.times[i] <= b) m = std::max(m, std::abs(tr.y[i]));
    return m;
}

struct Case {
    double tau;
    double alpha;
};

}  // namespace

TEST_CASE("beta_of_mode and modal_quasipolynomial") {
    CHECK(beta_of_mode({1, 1.0}) == doctest::Approx(kPi2).epsilon(1e-15));
    CHECK(beta_of_mode({2, 1.0}) == doctest::Approx(4.0 * kPi2).epsilon(1e-15));
    CHECK(beta_of_mode({1, 10.0}) == doctest::Approx(kPi2 / 100.0).epsilon(1e-15));
    CHECK_THROWS_AS(beta_of_mode({0, 1.0}), InvalidArgument);

    const auto q = modal_quasipolynomial({1, 1.0}, {1.5, 5.0});
    CHECK(q.beta == doctest::Approx(kPi2));
    CHECK(q.alpha == 5.0);
    CHECK(q.tau == 1.5);
}

TEST_CASE("quasimode_fields") {
    const std::vector<double> grid{0.0, 0.25, 0.5, 1.0};
    const auto f = quasimode_fields({{1, 1.0}, 1.0, 0.0}, grid);
    CHECK(f.u0[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.u1[2] == 0.0);
    CHECK(f.u0[0] == 0.0);
    CHECK(f.u0[3] == 0.0);

    const std::vector<double> g3{0.0, 1.0 / 3.0, 1.0};
    const auto h = quasimode_fields({{3, 1.0}, -2.0, 0.7}, g3);
    CHECK(h.u0.front() == 0.0);
    CHECK(h.u0.back() == 0.0);
    CHECK(h.u1.back() == 0.0);

    const std::vector<double> phys{0.0, 5.0, 10.0};
    const auto p = quasimode_fields({{1, 10.0}, 1.0, 0.0}, phys);
    CHECK(p.u0[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.u0[2] == 0.0);

    const std::vector<double> outside{0.0, 1.5};
    CHECK_THROWS_AS(quasimode_fields({{1, 1.0}, 1.0, 0.0}, outside), InvalidArgument);
}

TEST_CASE("HistoryFunction") {
    CHECK(HistoryFunction::zero().at(-0.3, 1.0) == 0.0);
    const auto h = HistoryFunction::sampled({0.0, 1.0, 4.0});
    CHECK(h.at(-1.0, 1.0) == 0.0);
    CHECK(h.at(-0.25, 1.0) == doctest::Approx(2.5));
    CHECK(h.at(0.0, 1.0) == 4.0);
    CHECK_THROWS_AS(HistoryFunction::sampled({1.0}), InvalidArgument);
}

TEST_CASE("dde_integrate examples") {
    SUBCASE("undamped oscillator returns after one period") {
        const double w = kPi;
        const auto tr = dde_integrate(kPi2, 0.0, 1.0, 1.0, 0.0, HistoryFunction::zero(), 1.0 / 1000.0,
                                      2.0 * kPi / w);
        const double period = 2.0 * kPi / w;
        const auto j = static_cast<std::size_t>(std::lround(period / tr.dt));
        CHECK(std::abs(tr.y[j] - std::cos(w * tr.times[j])) < 1e-6);
        CHECK(std::abs(tr.y[j] - 1.0) < 1e-6);
    }
    SUBCASE("case 2 envelope decreases") {
        const auto tr = dde_integrate(kPi2, 3.0, 1.5, 1.0, 0.0, HistoryFunction::zero(), 1.5 / 1024, 40.0);
        CHECK(tr.delay_steps == 1024);
        CHECK(peak_in(tr, 20.0, 40.0) < peak_in(tr, 0.0, 20.0));
    }
    SUBCASE("resonant delay does not decay") {
        const auto tr = dde_integrate(kPi2, 5.0, 1.0, 1.0, 0.0, HistoryFunction::zero(), 1.0 / 512, 60.0);
        CHECK(peak_in(tr, 30.0, 60.0) >= peak_in(tr, 0.0, 30.0));
    }
    SUBCASE("step snapping and layout") {
        const auto tr = dde_integrate(kPi2, 3.0, 1.5, 1.0, 0.0, HistoryFunction::zero(), 0.01, 3.0);
        CHECK(tr.delay_steps == 150);
        CHECK(tr.dt == doctest::Approx(0.01).epsilon(1e-12));
        const auto coarse = dde_integrate(kPi2, 3.0, 1.0, 1.0, 0.0, HistoryFunction::zero(), 0.3, 3.0);
        CHECK(coarse.delay_steps == 4);
        CHECK(coarse.dt == 0.25);
        REQUIRE(tr.y.size() == tr.times.size());
        REQUIRE(tr.ydot.size() == tr.times.size());
        for (std::size_t j = 0; j < tr.times.size(); ++j) CHECK(tr.times[j] == j * tr.dt);
        CHECK(tr.times.back() >= 3.0 - 1e-12);
    }
    SUBCASE("zero history means no feedback before tau") {
        const auto tr = dde_integrate(kPi2, 50.0, 1.0, 1.0, 0.0, HistoryFunction::zero(), 1.0 / 256, 2.0);
        for (std::size_t j = 0; j <= 256; ++j) CHECK(std::abs(tr.y[j] - std::cos(kPi * tr.times[j])) < 1e-8);
    }
    SUBCASE("sampled history feeds the first interval") {
        // Constant history h: y'' + beta y = -alpha h on [0, tau].
        const double beta = 4.0, alpha = 2.0, hval = 0.5;
        const auto tr = dde_integrate(beta, alpha, 1.0, 1.0, 0.0, HistoryFunction::sampled({hval, hval}),
                                      1.0 / 256, 1.0);
        const double shift = -alpha * hval / beta;
        const double exact = shift + (1.0 - shift) * std::cos(2.0 * 1.0);
        CHECK(std::abs(tr.y.back() - exact) < 1e-9);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(dde_integrate(1.0, 1.0, 1.0, 1.0, 0.0, HistoryFunction::zero(), 1.0, 2.0), InvalidStep);
        CHECK_THROWS_AS(dde_integrate(1.0, 1.0, 1.0, 1.0, 0.0, HistoryFunction::zero(), 0.0, 2.0), InvalidStep);
        CHECK_THROWS_AS(dde_integrate(1.0, 1.0, 1.0, 1.0, 0.0, HistoryFunction::zero(), 0.1, 0.5),
                        InvalidArgument);
    }
}

TEST_CASE("decay_rate_fit") {
    std::vector<double> t, y;
    for (int i = 0; i <= 20000; ++i) {
        t.push_back(i * 1e-3);
        y.push_back(std::exp(-0.3 * t.back()) * std::cos(5.0 * t.back()));
    }
    const DecayFit f = decay_rate_fit(t, y, 0.0, 20.0);
    CHECK(std::abs(f.rate + 0.3) < 0.01);
    CHECK(f.r_squared > 0.999);
    CHECK(f.n_peaks >= 5);
    CHECK(f.window_start == 0.0);
    CHECK(f.window_end == 20.0);

    const auto osc = dde_integrate(kPi2, 0.0, 1.0, 1.0, 0.0, HistoryFunction::zero(), 1.0 / 256, 40.0);
    CHECK(std::abs(decay_rate_fit(osc, 0.0, 40.0).rate) < 1e-3);

    const auto c2 = dde_integrate(kPi2, 3.0, 1.5, 1.0, 0.0, HistoryFunction::zero(), 1.5 / 256, 60.0);
    const double a2 = spectral_abscissa({kPi2, 3.0, 1.5});
    const DecayFit f2 = decay_rate_fit(c2, 30.0, 60.0);
    CHECK(std::abs(f2.rate - a2) <= 0.10 * std::abs(a2));

    CHECK_THROWS_AS(decay_rate_fit(t, y, 0.0, 2.0), InsufficientPeaks);
    CHECK_THROWS_AS(decay_rate_fit(t, y, 3.0, 2.0), InvalidArgument);
    const std::vector<double> short_t{0.0, 1.0};
    CHECK_THROWS_AS(decay_rate_fit(short_t, y, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("modal_energy") {
    CHECK(modal_energy(0.0, 0.0, kPi2, 1.0) == 0.0);
    CHECK(modal_energy(1.0, 0.0, kPi2, 1.0) == doctest::Approx(kPi2 / 2.0).epsilon(1e-15));
    CHECK(modal_energy(0.0, 2.0, kPi2, 3.0) == doctest::Approx(6.0).epsilon(1e-15));

    // 100 periods of the uncontrolled mode.
    const double period = 2.0;
    const auto tr = dde_integrate(kPi2, 0.0, 1.0, 1.0, 0.0, HistoryFunction::zero(), period / 256,
                                  100.0 * period);
    const auto e = modal_energy_trace(tr, kPi2, 1.0);
    double drift = 0.0;
    for (double v : e) drift = std::max(drift, std::abs(v - e.front()) / e.front());
    CHECK(drift <= 1e-6);
}

TEST_CASE("property: energy drift per 1000 steps without control") {
    for (double beta : {1.0, kPi2, 4.0 * kPi2}) {
        const double period = 2.0 * kPi / std::sqrt(beta);
        const double dt = period / 256;
        // tau is an exact multiple of dt so no snapping occurs.
        const auto tr = dde_integrate(beta, 0.0, 10.0 * dt, 0.3, -1.1, HistoryFunction::zero(), dt, 5000.0 * dt);
        const auto e = modal_energy_trace(tr, beta, 1.0);
        for (std::size_t j = 1000; j < e.size(); j += 1000) {
            CHECK(std::abs(e[j] - e[j - 1000]) <= 1e-6 * e[j - 1000]);
        }
    }
}

TEST_CASE("property: convergence order against a dt/16 reference") {
    for (const Case c : {Case{1.5, 5.0}, Case{1.5, 3.0}, Case{2.5, -1.7766}}) {
        const double t_final = 4.0 * c.tau;
        auto terminal = [&](int m) {
            const auto tr = dde_integrate(kPi2, c.alpha, c.tau, 1.0, 0.0, HistoryFunction::zero(), c.tau / m, t_final);
            REQUIRE(tr.times.back() == doctest::Approx(t_final).epsilon(1e-12));
            return std::pair{tr.y.back(), tr.ydot.back()};
        };
        const int m = 64;
        const auto ref = terminal(16 * m);
        const auto coarse = terminal(m);
        const auto fine = terminal(2 * m);
        const double e1 = std::hypot(coarse.first - ref.first, coarse.second - ref.second);
        const double e2 = std::hypot(fine.first - ref.first, fine.second - ref.second);
        INFO("tau=" << c.tau << " e(dt)=" << e1 << " e(dt/2)=" << e2);
        CHECK(e1 / e2 >= 8.0);
    }
}

TEST_CASE("property: spectral consistency") {
    for (const Case c : {Case{1.5, 5.0}, Case{1.5, 3.0}, Case{2.5, -1.7766}}) {
        REQUIRE(check_stabilizing({1, 1.0}, {c.tau, c.alpha}).satisfied);
        // Long enough that the rightmost pair dominates the slower-decaying beat.
        const double t_final = 120.0;
        const auto tr = dde_integrate(kPi2, c.alpha, c.tau, 1.0, 0.0, HistoryFunction::zero(), c.tau / 256, t_final);
        const double a = spectral_abscissa({kPi2, c.alpha, c.tau});
        const DecayFit f = decay_rate_fit(tr, t_final / 2, t_final);
        INFO("tau=" << c.tau << " alpha=" << c.alpha << " fit=" << f.rate << " abscissa=" << a);
        CHECK(std::abs(f.rate - a) <= 0.10 * std::abs(a));
    }
    for (const Case c : {Case{1.0, 5.0}, Case{1.0, -2.0}, Case{2.0, 3.0}}) {
        REQUIRE(admissible_alpha_interval({1, 1.0}, c.tau).empty());
        const auto tr = dde_integrate(kPi2, c.alpha, c.tau, 1.0, 0.0, HistoryFunction::zero(), c.tau / 256, 30.0);
        CHECK(decay_rate_fit(tr, 15.0, 30.0).rate >= -1e-3);
    }
}

TEST_CASE("property: linearity in the initial amplitudes") {
    const auto base = dde_integrate(kPi2, 3.0, 1.5, 0.4, -0.9, HistoryFunction::zero(), 1.5 / 128, 30.0);
    for (double c : {-3.0, 0.5, 17.0}) {
        const auto scaled = dde_integrate(kPi2, 3.0, 1.5, c * 0.4, c * -0.9, HistoryFunction::zero(), 1.5 / 128, 30.0);
        double err = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < base.y.size(); ++j) {
            err = std::max(err, std::abs(scaled.y[j] - c * base.y[j]));
            scale = std::max(scale, std::abs(c * base.y[j]));
        }
        CHECK(err <= 1e-13 * scale);
    }
}
