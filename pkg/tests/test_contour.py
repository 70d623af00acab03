from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xxzcorr.contour import (
    ContourError, build_contour, check_monodromy, fermi_factor, log1p_exp, max_lift,
    trace_level_set, unwrap_log,
)
from xxzcorr.model import ModelParams, bare_energy, bare_energy_deriv

P = ModelParams(J=1, delta=0.0, h=1, T=0.1)
Q = 0.5 * math.acosh(4)


def u(lam):
    return bare_energy(np.asarray(lam, dtype=complex), P, check=False) - 1j * math.pi * P.T


def du(lam):
    return bare_energy_deriv(np.asarray(lam, dtype=complex), P)


def _zero():
    z = complex(Q)
    for _ in range(50):
        z -= u(z) / du(z)
    return z


Z = _zero()
SCALE = math.pi * P.T / abs(du(Q))


def test_crossing_is_a_zero_of_u():
    assert abs(u(Z)) < 1e-14 and abs(u(-Z)) < 1e-14
    assert Z.imag > 0


def test_weights_integrate_constants_exactly():
    c = build_contour(P, (-Z, Z), SCALE)
    for seg in c.segments:
        assert abs(np.sum(seg.weights) - (seg.end - seg.start)) < 1e-12
    assert len(c.nodes) == len(c.weights) == len(c.labels)
    assert np.allclose(c.nodes[np.abs(c.nodes - Z).argmin()], Z, atol=0.05)


def test_contour_passes_through_the_zeros():
    c = build_contour(P, (-Z, Z), SCALE)
    assert abs(c.height(Z.real) - Z.imag) < 1e-12
    assert abs(c.height(-Z.real) + Z.imag) < 1e-12


def test_monodromy_vanishes_for_correct_threading():
    c = build_contour(P, (-Z, Z), SCALE)
    assert abs(check_monodromy(u, du, c, P.T)) < 1e-12


@pytest.mark.parametrize("zeros, winding", [((-Z, Z.conjugate()), -1), ((-Z.conjugate(), Z), 1)])
def test_monodromy_detects_mis_threaded_contour(zeros, winding):
    c = build_contour(P, zeros, SCALE)
    m = check_monodromy(u, du, c, P.T)
    assert abs(m - 2j * math.pi * winding) < 1e-10


def test_lift_beyond_cap_raises():
    z = complex(Q, 2 * max_lift(P))
    with pytest.raises(ContourError):
        build_contour(P, (-z, z), SCALE)


def test_interior_membership():
    c = build_contour(P, (-Z, Z), SCALE)
    assert c.is_interior(-0.7j)
    assert not c.is_interior(0.3j)
    assert c.is_interior(complex(Q, -0.05)) and not c.is_interior(complex(Q, Z.imag + 0.05))


@settings(max_examples=50, deadline=None)
@given(x=st.floats(min_value=-5, max_value=5), y=st.floats(min_value=-1.5, max_value=1.5))
def test_interior_is_i_pi_periodic(x, y):
    c = build_contour(P, (-Z, Z), SCALE)
    lam = complex(x, y)
    assume_ok = abs(y - c.height(x)) > 1e-9 and abs(y + math.pi / 2) > 1e-9
    if assume_ok:
        assert c.is_interior(lam) == c.is_interior(lam + 1j * math.pi)


@settings(max_examples=80, deadline=None)
@given(re=st.floats(min_value=-700, max_value=700), im=st.floats(min_value=-3, max_value=3))
def test_log1p_exp_is_stable_and_exact_mod_2pi_i(re, im):
    z = complex(re, im)
    val = complex(log1p_exp(z))
    assert math.isfinite(val.real) and math.isfinite(val.imag)
    if abs(re) < 30:
        ref = np.log1p(np.exp(z))
        k = (val - ref) / (2j * math.pi)
        assert abs(k.real - round(k.real)) < 1e-9 and abs(k.imag) < 1e-9


def test_fermi_factor_limits():
    x = np.array([-800, -1, 0, 1, 800], dtype=complex)
    f = fermi_factor(x)
    assert np.all(np.isfinite(f))
    assert np.allclose(f[1:4], 1 / (1 + np.exp(x[1:4])))
    assert abs(f[0] - 1) < 1e-15 and abs(f[4]) < 1e-300


def test_unwrapped_log_is_continuous():
    c = build_contour(P, (-Z, Z), SCALE)
    ln = unwrap_log(u(c.nodes), c, P.T)
    assert np.max(np.abs(np.diff(ln.imag))) < math.pi / 2
    assert abs(ln[0] - np.log1p(np.exp(-u(c.nodes[0]) / P.T))) < 1e-14


def test_level_set_tracer_stays_on_re_u_zero():
    lc = trace_level_set(u, du, [-Z, Z], P)
    for seg in lc.segments:
        assert np.max(np.abs(np.real(u(seg.nodes)))) < 1e-10
    assert min(abs(n - Z) for n in lc.nodes) < 0.05


def test_level_set_rejects_degenerate_seed():
    with pytest.raises(ContourError):
        trace_level_set(lambda z: (z - 1) ** 2, lambda z: 2 * (z - 1), [1.0, 1.0], P)


def test_contour_csv(tmp_path):
    c = build_contour(P, (-Z, Z), SCALE)
    path = tmp_path / "c.csv"
    c.to_csv(path, u(c.nodes))
    rows = path.read_text().splitlines()
    assert rows[0] == "branch,s,re_lam,im_lam,re_u,im_u"
    assert len(rows) == len(c.nodes) + 1
