#include <algorithm>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "delaystab/errors.hpp"
#include "delaystab/fdtd.hpp"
#include "delaystab/modal.hpp"
#include "delaystab/quasipoly.hpp"
#include "delaystab/stability.hpp"

namespace py = pybind11;
using namespace delaystab;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

template <class T>
py::array_t<T> to_matrix(const std::vector<T>& v, std::size_t rows, std::size_t cols) {
    py::array_t<T> a({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

Rectangle rect_from(py::sequence r) {
    if (py::len(r) != 4) throw InvalidArgument("rect must be (re_min, re_max, im_min, im_max)");
    return {r[0].cast<double>(), r[1].cast<double>(), r[2].cast<double>(), r[3].cast<double>()};
}

py::tuple interval_tuple(const OpenInterval& iv) { return py::make_tuple(iv.lo, iv.hi); }

}  // namespace

PYBIND11_MODULE(_delaystab, m) {
    m.doc() = "Core routines of delaystab";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    // Translators run newest first, so the most specific types are registered last.
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    m.def("evaluate", [](double beta, double alpha, double tau, Complex s) {
        return evaluate({beta, alpha, tau}, s);
    }, py::arg("beta"), py::arg("alpha"), py::arg("tau"), py::arg("s"));

    m.def("rhp_root_bound", [](double beta, double alpha, double tau) {
        return rhp_root_bound({beta, alpha, tau});
    }, py::arg("beta"), py::arg("alpha"), py::arg("tau") = 0.0);

    m.def("count_roots", [](double beta, double alpha, double tau, py::sequence rect) {
        return count_roots_perturbed({beta, alpha, tau}, rect_from(rect)).count;
    }, py::arg("beta"), py::arg("alpha"), py::arg("tau"), py::arg("rect"),
       "Roots inside rect = (re_min, re_max, im_min, im_max), with multiplicity.");

    m.def("locate_roots", [](double beta, double alpha, double tau, py::sequence rect) {
        const RootSet set = locate_roots({beta, alpha, tau}, rect_from(rect));
        py::list roots;
        for (const Root& r : set.roots) {
            roots.append(py::dict(py::arg("value") = r.value, py::arg("residual") = r.residual,
                                  py::arg("certified") = r.certified));
        }
        return py::dict(py::arg("roots") = roots, py::arg("winding_count") = set.winding_count,
                        py::arg("uncertain_multiplicity") = set.uncertain_multiplicity);
    }, py::arg("beta"), py::arg("alpha"), py::arg("tau"), py::arg("rect"));

    m.def("spectral_abscissa", [](double beta, double alpha, double tau, double tol) {
        py::gil_scoped_release release;
        return spectral_abscissa({beta, alpha, tau}, tol);
    }, py::arg("beta"), py::arg("alpha"), py::arg("tau"), py::arg("tol") = 1e-6);

    m.def("k_index", [](int n, double ell, double tau) { return k_index({n, ell}, tau); },
          py::arg("n"), py::arg("ell"), py::arg("tau"));

    m.def("admissible_alpha_interval", [](int n, double ell, double tau) {
        return interval_tuple(admissible_alpha_interval({n, ell}, tau));
    }, py::arg("n"), py::arg("ell"), py::arg("tau"));

    m.def("check_stabilizing", [](int n, double ell, double tau, double alpha) {
        const auto cert = check_stabilizing({n, ell}, {tau, alpha});
        return py::dict(py::arg("k") = cert.k, py::arg("alpha_interval") = interval_tuple(cert.alpha_interval),
                        py::arg("satisfied") = cert.satisfied);
    }, py::arg("n"), py::arg("ell"), py::arg("tau"), py::arg("alpha"));

    m.def("critical_delays", [](double beta, double alpha, int max_count) {
        const CrossingData d = critical_delays(beta, alpha, max_count);
        return py::dict(py::arg("omega_plus") = d.omega_plus, py::arg("omega_minus") = d.omega_minus,
                        py::arg("delays_plus") = d.critical_delays_plus,
                        py::arg("delays_minus") = d.critical_delays_minus);
    }, py::arg("beta"), py::arg("alpha"), py::arg("max_count") = 3);

    m.def("region_grid", [](std::pair<double, double> beta_tilde, std::pair<double, double> alpha_tilde,
                            int resolution, unsigned threads) {
        RegionGrid g;
        {
            py::gil_scoped_release release;
            RegionOptions opts;
            opts.threads = threads;
            g = region_grid({beta_tilde.first, beta_tilde.second}, {alpha_tilde.first, alpha_tilde.second},
                            resolution, opts);
        }
        const auto rows = g.beta_tilde_axis.size(), cols = g.alpha_tilde_axis.size();
        std::vector<bool> stable(g.analytic_stable.begin(), g.analytic_stable.end());
        py::array_t<bool> st({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
        std::copy(stable.begin(), stable.end(), st.mutable_data());
        return py::dict(py::arg("beta_tilde") = to_array(g.beta_tilde_axis),
                        py::arg("alpha_tilde") = to_array(g.alpha_tilde_axis),
                        py::arg("counts") = to_matrix(g.counts, rows, cols), py::arg("analytic_stable") = st);
    }, py::arg("beta_tilde"), py::arg("alpha_tilde"), py::arg("resolution") = 200, py::arg("threads") = 0u);

    m.def("dde_integrate", [](double beta, double alpha, double tau, double zeta0, double zeta1, double dt,
                              double t_final) {
        const ModalTrace tr = dde_integrate(beta, alpha, tau, zeta0, zeta1, HistoryFunction::zero(), dt, t_final);
        return py::dict(py::arg("dt") = tr.dt, py::arg("delay_steps") = tr.delay_steps,
                        py::arg("t") = to_array(tr.times), py::arg("y") = to_array(tr.y),
                        py::arg("ydot") = to_array(tr.ydot));
    }, py::arg("beta"), py::arg("alpha"), py::arg("tau"), py::arg("zeta0") = 1.0, py::arg("zeta1") = 0.0,
       py::arg("dt") = 0.005, py::arg("t_final") = 100.0);

    m.def("simulate_mode", [](double tau, double alpha, std::optional<std::pair<double, double>> physical, int n,
                              double dx, double dt, double t_final, int energy_stride) {
        Discretization disc{dx, dt, t_final, false, {}};
        const SimConfig cfg = physical ? make_config(PhysicalSetup{physical->first, physical->second, 1.0, tau, alpha}, disc)
                                       : make_config(DimensionlessSetup{1.0, tau, alpha}, disc);
        const auto f = quasimode_fields({{n, cfg.length}, 1.0, 0.0}, grid_points(cfg));
        RunResult r;
        {
            py::gil_scoped_release release;
            r = run(cfg, f.u0, f.u1, {}, energy_stride);
        }
        return py::dict(py::arg("t") = to_array(r.energy.times),
                        py::arg("field_energy") = to_array(r.energy.field_energy),
                        py::arg("weighted_energy") = to_array(r.energy.weighted_energy),
                        py::arg("u_final") = to_array(r.final_state.u_curr), py::arg("tau_eff") = cfg.tau_eff,
                        py::arg("time_scale") = cfg.time_scale);
    }, py::arg("tau"), py::arg("alpha"), py::arg("physical") = std::nullopt, py::arg("n") = 1,
       py::arg("dx") = 0.05, py::arg("dt") = 0.005, py::arg("t_final") = 100.0, py::arg("energy_stride") = 10,
       "Quasimode run of the delayed wave equation; physical = (l, c) or None for unit speed on (0, 1).");
}
