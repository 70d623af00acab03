from __future__ import annotations

import time

import pytest

from xxzcorr.dressed import dressed_quantities
from xxzcorr.model import ModelParams
from xxzcorr.spectral import dominant_corrlen

_DRESSED: dict = {}
_CORR: dict = {}


def cached_dressed(delta: float, h: float, J: float = 1.0):
    key = (delta, h, J)
    if key not in _DRESSED:
        _DRESSED[key] = dressed_quantities(ModelParams(J=J, delta=delta, h=h, T=1.0))
    return _DRESSED[key]


def cached_corrlen(delta: float, h: float, T: float, J: float = 1.0):
    """(observables, wall time of the first computation) for the dominant configuration."""
    key = (delta, h, T, J)
    if key not in _CORR:
        params = ModelParams(J=J, delta=delta, h=h, T=T)
        dressed = cached_dressed(delta, h, J)
        t0 = time.perf_counter()
        obs = dominant_corrlen(params, dressed=dressed)
        _CORR[key] = (obs, time.perf_counter() - t0)
    return _CORR[key]


@pytest.fixture(scope="session")
def corrlen():
    return cached_corrlen


@pytest.fixture(scope="session")
def dressed():
    return cached_dressed


@pytest.fixture
def report(capsys):
    """Print one visible PASS/FAIL line, then assert."""
    def _report(name: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"
    return _report
