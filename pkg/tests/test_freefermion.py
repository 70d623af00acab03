from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from oracles import ff_fermi_point, ff_fermi_velocity
from xxzcorr.freefermion import (
    SingularityError, build_ff_contour, check_membership, ff_amplitude, ff_double_integral,
    ff_exponent_rate, ff_leading, ff_phi, singular_points,
)
from xxzcorr.model import ModelParams, RegimeError

P = ModelParams(J=1, delta=0.0, h=1, T=0.5)


def _rate_oracle(J, h, T):
    """Straight-line form: both lines contribute -(1/pi) int sech(2x) ln|coth(e/2T)|."""
    q = ff_fermi_point(J, h)
    up = lambda x: 2 / math.cosh(2 * x) * math.log(abs(1 / math.tanh((h - 4 * J / math.cosh(2 * x)) / (2 * T))))
    lo = lambda x: 2 / math.cosh(2 * x) * math.log(1 / math.tanh((h + 4 * J / math.cosh(2 * x)) / (2 * T)))
    total = 0.0
    for f in (up, lo):
        total += quad(f, 0, q, limit=200)[0] + quad(f, q, 40, limit=200)[0]
    return -2 * total / (2 * math.pi)


@pytest.mark.parametrize("T", [0.2, 0.5, 1.0])
def test_rate_matches_direct_quadrature(T):
    p = P.replace(T=T)
    assert ff_exponent_rate(p) == pytest.approx(_rate_oracle(1.0, 1.0, T), rel=1e-9)
    assert ff_exponent_rate(p) < 0


def test_low_temperature_law():
    vals = [ff_exponent_rate(P.replace(T=T)) / T for T in (0.1, 0.05, 0.025)]
    r1 = [2 * vals[1] - vals[0], 2 * vals[2] - vals[1]]
    r2 = (4 * r1[1] - r1[0]) / 3
    assert r2 == pytest.approx(-math.pi / (2 * ff_fermi_velocity(1.0, 1.0)), rel=1e-5)


@pytest.mark.parametrize("T", [0.2, 0.5, 1.0])
def test_contour_membership(T):
    p = P.replace(T=T)
    c = build_ff_contour(p)
    check_membership(c)
    inner = build_ff_contour(p, offset=0.5 * c.lift)
    check_membership(inner)


@pytest.mark.parametrize("T", [0.2, 0.5, 1.0])
def test_contours_keep_clear_of_log_singularities(T):
    p = P.replace(T=T)
    c = build_ff_contour(p)
    sing = singular_points(p)
    inner = build_ff_contour(p, offset=0.5 * c.lift)
    # no singular point between the outer contour and its nested copy
    for z in sing:
        assert c.winding_number(z) == inner.winding_number(z)


def test_double_integral_is_offset_independent():
    lift = build_ff_contour(P).lift
    a = ff_double_integral(P, offset=0.5 * lift)
    b = ff_double_integral(P, offset=0.3 * lift)
    assert abs(a - b) < 1e-8


def test_offset_below_minimum_raises():
    with pytest.raises(SingularityError):
        ff_double_integral(P, offset=1e-4)


def test_phi_variants():
    q = ff_fermi_point(1.0, 1.0)
    assert np.isfinite(ff_phi(-q, P))
    with pytest.raises(SingularityError):
        ff_phi(-q, P, variant="printed")
    with pytest.raises(ValueError):
        ff_phi(-q, P, variant="other")


def test_amplitude_normalisation_and_leading_term():
    amp = ff_amplitude(P)
    assert abs(amp["normalized"] - amp["C"]) < 1e-15
    rate = ff_exponent_rate(P)
    for m in (3, 4):
        val = ff_leading(m, 0.0, P, C=amp["C"], rate=rate)
        assert val == pytest.approx((-1) ** m * amp["C"] * math.exp(m * rate))
    with pytest.warns(UserWarning):
        ff_leading(2, 1.0, P, C=amp["C"], rate=rate)
    with pytest.raises(ValueError):
        ff_leading(0, 0.0, P, C=amp["C"], rate=rate)


def test_interacting_chain_is_rejected():
    with pytest.raises((RegimeError, ValueError)):
        ff_exponent_rate(P.replace(delta=0.5))
