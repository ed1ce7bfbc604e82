import math

import numpy as np
import pytest

import delaystab as ds

PI2 = math.pi**2


def test_certificate_case2():
    cert = ds.check_stabilizing(1, 1.0, 1.5, 3.0)
    assert cert["satisfied"] and cert["k"] == 1
    lo, hi = cert["alpha_interval"]
    assert lo == 0.0 and hi == pytest.approx(1.25 * PI2 / 2.25, rel=1e-12)


def test_resonant_delay_has_no_gain():
    assert ds.k_index(1, 1.0, 2.0) is None
    lo, hi = ds.admissible_alpha_interval(1, 1.0, 2.0)
    assert not lo < hi


def test_abscissa_case2():
    assert ds.spectral_abscissa(PI2, 3.0, 1.5) == pytest.approx(-0.32866022994940563, abs=1e-6)


def test_roots_match_count():
    rect = (-2.0, 1.0, 0.0, 12.0)
    found = ds.locate_roots(PI2, 3.0, 1.5, rect)
    assert len(found["roots"]) == found["winding_count"] == ds.count_roots(PI2, 3.0, 1.5, rect)
    for r in found["roots"]:
        assert abs(ds.evaluate(PI2, 3.0, 1.5, r["value"])) < 1e-8


def test_critical_delay_is_axis_root():
    d = ds.critical_delays(PI2, -2.0, 2)
    w = d["omega_plus"]
    for tau in d["delays_plus"]:
        assert abs(ds.evaluate(PI2, -2.0, tau, complex(0.0, w))) < 1e-10


def test_region_grid_shapes():
    g = ds.region_grid((0.0, 9 * PI2), (-4 * PI2, 4 * PI2), 12, threads=2)
    assert g["counts"].shape == (12, 12) and g["analytic_stable"].dtype == np.bool_
    assert (g["counts"] >= 0).all()


def test_modal_and_fdtd_decay():
    tr = ds.dde_integrate(PI2, 3.0, 1.5, dt=0.01, t_final=20.0)
    assert tr["delay_steps"] == 150 and len(tr["y"]) == len(tr["t"])
    sim = ds.simulate_mode(1.5, 3.0, t_final=20.0)
    e = sim["field_energy"]
    assert e[-1] < 0.2 * e[0]


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        ds.spectral_abscissa(-1.0, 3.0, 1.5)
    with pytest.raises(ds.NumericalError):
        ds.simulate_mode(0.1, -500.0, t_final=20.0)
