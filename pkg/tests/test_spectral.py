from __future__ import annotations

import json
import math

import numpy as np
import pytest

from xxzcorr.freefermion import ff_exponent_rate
from xxzcorr.model import ModelParams
from xxzcorr.nlie import ExcitationConfig, solve_dominant, solve_excited
from xxzcorr.spectral import (
    DOMINANT_CONFIG, dominant_corrlen, dumps, leading_asymptote, observables, reference_momentum, to_record,
)

P = ModelParams(J=1, delta=0.0, h=1, T=0.3)


@pytest.fixture(scope="module")
def ff_obs(dressed):
    return dominant_corrlen(P, dressed=dressed(0.0, 1.0))


def test_decay_rate_matches_free_fermion_exponent(ff_obs):
    assert abs(ff_obs.decay_rate + ff_exponent_rate(P)) < 1e-9
    assert ff_obs.config == DOMINANT_CONFIG
    assert abs(ff_obs.E) < 1e-12


def test_reference_terms_at_free_fermion_point(dressed):
    D = dressed(0.0, 1.0)
    dom = solve_dominant(P, D)
    # the dominant auxiliary function is real on the real axis: purely imaginary references
    obs = observables(solve_excited(P, D, DOMINANT_CONFIG), dom)
    assert abs(obs.P_D.real) < 1e-12 and abs(obs.E_D.real) < 1e-12
    assert abs(obs.P_D) > 0.1


def test_reference_requires_rootless_solution(dressed):
    sol = solve_excited(P, dressed(0.0, 1.0), DOMINANT_CONFIG)
    with pytest.raises(ValueError):
        reference_momentum(sol)


def test_mirrored_configuration_decays_faster(dressed):
    D = dressed(0.0, 1.0)
    a = dominant_corrlen(P, dressed=D, mirror=False)
    b = dominant_corrlen(P, dressed=D, config=DOMINANT_CONFIG.mirrored(), mirror=False)
    assert b.decay_rate > a.decay_rate


@pytest.mark.parametrize("tm", [-0.2, 0.05, 0.2])
def test_affine_in_t_over_m(ff_obs, tm):
    assert abs(ff_obs.at(tm).delta - (ff_obs.delta + tm * ff_obs.E)) < 1e-15


def test_leading_asymptote(ff_obs):
    for m in (1, 2, 7):
        val = leading_asymptote(ff_obs, m, amplitude=2.0)
        assert abs(val - (-1) ** m * 2.0 * np.exp(1j * m * ff_obs.delta)) < 1e-15
    assert abs(leading_asymptote(ff_obs, 10)) == pytest.approx(math.exp(-10 * ff_obs.decay_rate))
    with pytest.raises(ValueError):
        leading_asymptote(ff_obs, 0)


def test_record_is_json_ready(ff_obs):
    rec = json.loads(dumps(ff_obs, P))
    assert set(rec) >= {"q", "vF", "Zq", "P", "E", "delta", "decay_rate", "diagnostics", "params"}
    assert rec["decay_rate"] == ff_obs.decay_rate
    assert to_record(ff_obs, P)["config"]["h_plus"] == [0]


def test_space_like_cone_warning(dressed):
    with pytest.warns(UserWarning):
        dominant_corrlen(P, t_over_m=1.0, dressed=dressed(0.0, 1.0), mirror=False)
