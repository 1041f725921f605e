"""Closed-form results: Lambert-W transmission, Dicke cubic, saturation limits."""

import math

import numpy as np
import pytest

from cascadia import (dicke_bistability_window, dicke_cubic,
                      dicke_steady_states, lambert_w0, mean_polarization,
                      thermodynamic_saturation, uwm_inversion,
                      uwm_saturation)


# --- principal-branch Lambert W (log-domain argument) -------------------------


def test_lambert_w0_special_points():
    assert lambert_w0(-math.inf) == 0.0          # W(0)
    assert lambert_w0(1.0) == pytest.approx(1.0, rel=1e-14)  # W(e)
    # fixed high-precision reference: W(100)
    assert lambert_w0(math.log(100.0)) == pytest.approx(
        3.38563014029005, rel=1e-13)


@pytest.mark.parametrize("w", [1e-6, 1e-2, 1.0, 10.0, 1e3])
def test_lambert_w0_round_trip(w):
    # w + ln w = ln(w e^w); the log-domain form never overflows
    assert lambert_w0(w + math.log(w)) == pytest.approx(w, rel=1e-12)


def test_lambert_w0_vectorized_and_strict():
    out = lambert_w0(np.array([-np.inf, 0.0, 1.0]))
    assert out.shape == (3,)
    assert out[0] == 0.0
    with pytest.raises(ValueError):
        lambert_w0(float("nan"))


# --- saturation profile s(D) -------------------------------------------------


def test_saturation_at_zero_depth():
    assert uwm_saturation(20.0, 0.0) == pytest.approx(20.0, rel=1e-14)


def test_saturation_critical_point_value():
    # at s̃ = 1 the exponent tilt vanishes: s(D) = W(D)
    s = uwm_saturation(100.0, 100.0)
    assert s == pytest.approx(3.38563014029005, rel=1e-12)


def test_saturation_deep_attenuation():
    # weak-output Beer–Lambert limit: s ≈ s₀ e^{s₀ − D} once s ≪ 1
    s = uwm_saturation(20.0, 40.0)
    assert s == pytest.approx(20.0 * math.exp(-20.0), rel=1e-6)
    assert s == pytest.approx(4.12e-8, rel=1e-2)


def test_saturation_monotonicity():
    d = np.linspace(0.0, 60.0, 31)
    s = uwm_saturation(30.0, d)
    assert np.all(np.diff(s) < 0.0)
    # monotone in s₀ at fixed depth
    vals = [uwm_saturation(s0, 10.0) for s0 in (1.0, 5.0, 25.0, 125.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_inversion_from_saturation():
    s = uwm_saturation(8.0, 3.0)
    assert uwm_inversion(s) == pytest.approx(-1.0 / (1.0 + s), rel=1e-13)
    assert uwm_inversion(0.0) == -1.0


# --- thermodynamic-limit observables -----------------------------------------


def test_mean_polarization_limits():
    assert mean_polarization(0.0, 10.0) == pytest.approx(-1.0, abs=1e-14)
    assert mean_polarization(1e6, 10.0) == pytest.approx(0.0, abs=1e-4)
    vals = [mean_polarization(st * 40.0, 40.0) for st in (0.1, 0.5, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_thermodynamic_saturation_values():
    assert thermodynamic_saturation(0.5, 50.0) == 0.0
    assert thermodynamic_saturation(2.0, 50.0) == pytest.approx(50.0, rel=1e-12)
    assert thermodynamic_saturation(1.0, 0.0) == 0.0


def test_thermodynamic_saturation_is_pointwise_limit():
    # the finite-D profile converges to the scaled limit as D grows
    for s_tilde, limit_frac in ((0.5, 0.0), (2.0, 1.0)):
        errs = []
        for d in (1e2, 1e3, 1e4):
            frac = uwm_saturation(s_tilde * d, d) / d
            errs.append(abs(frac - limit_frac))
        assert errs[-1] < 1e-3
        assert errs[0] > errs[-1]


# --- collective (Dicke) cubic ------------------------------------------------


def test_bistability_window_closes_at_threshold():
    w = dicke_bistability_window(16.0)
    assert not w.exists  # fold point: the window has zero width
    assert w.s_minus == pytest.approx(27.0, abs=1e-8)
    assert w.s_plus == pytest.approx(27.0, abs=1e-8)


def test_bistability_window_at_d20():
    w = dicke_bistability_window(20.0)
    assert w.exists
    assert w.s_minus == pytest.approx(35.38196601125011, rel=1e-12)
    assert w.s_plus == pytest.approx(37.61803398874989, rel=1e-12)
    # lower edge sits at ~1.77 D here
    assert w.s_minus / 20.0 == pytest.approx(1.77, abs=0.01)


def test_no_window_below_threshold():
    assert not dicke_bistability_window(10.0).exists


def test_window_asymptotes():
    for d in (200.0, 1000.0):
        w = dicke_bistability_window(d)
        assert w.s_minus == pytest.approx(w.s_minus_asymptotic, rel=1e-2)
        assert w.s_plus == pytest.approx(w.s_plus_asymptotic, rel=1e-2)


def test_dicke_single_root_outside_window():
    r = dicke_steady_states(20.0, 10.0)
    assert r.roots.size == 1
    assert not r.bistable
    m = r.roots[0]
    assert -1.0 <= m <= 0.0
    assert abs(dicke_cubic(m, 20.0, 10.0)) < 1e-10
    assert r.stability == ("stable",)


def test_dicke_three_roots_inside_window():
    r = dicke_steady_states(20.0, 36.5)
    assert r.roots.size == 3
    assert r.bistable
    assert np.all(np.diff(r.roots) > 0.0)
    for m in r.roots:
        assert -1.0 <= m <= 0.0
        assert abs(dicke_cubic(m, 20.0, 36.5)) < 1e-10
    # middle branch unreachable by slow ramps from either side
    assert r.stability == ("stable", "unstable", "stable")


def test_dicke_zero_drive_is_ground_state():
    r = dicke_steady_states(20.0, 0.0)
    assert r.roots.size == 1
    assert r.roots[0] == pytest.approx(-1.0, abs=1e-12)
    assert r.stability == ("stable",)
