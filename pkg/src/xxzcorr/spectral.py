"""Effective momentum, effective energy and the dominant inverse correlation length.

For an excited auxiliary function u with holes x_a and particles y_a,

    P = sum p0(y) - sum p0(x) - (1 / 2 pi i) contour_integral p0'(lam) Ln[1 + e^{-u/T}] dlam - P_D

and E is the same with eps0 in place of p0.  P_D, E_D are the contour terms of
the dominant state.  The phase Delta = P + (t/m) E controls the leading
asymptotics (-1)^m A exp(i m Delta); Im Delta > 0 is the decay rate per site.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .dressed import DressedData, dressed_quantities
from .model import ModelParams, bare_energy, bare_energy_deriv, bare_momentum, bare_momentum_deriv
from .contour import ContourError
from .nlie import ConvergenceError, ExcitationConfig, NlieSolution, solve_dominant, solve_excited

log = logging.getLogger(__name__)

DOMINANT_CONFIG = ExcitationConfig(h_plus=(0,))


def _contour_term(sol: NlieSolution, deriv) -> complex:
    lam, w = sol.contour.nodes, sol.contour.weights
    return complex(-np.sum(w * deriv(lam, sol.params) * sol.ln_values) / (2j * math.pi))


def _root_term(sol: NlieSolution, bare) -> complex:
    p = sol.params
    return complex(sum(bare(y, p) for y in sol.particles) - sum(bare(x, p) for x in sol.holes))


def reference_momentum(dom: NlieSolution) -> complex:
    if len(dom.roots):
        raise ValueError("the reference solution must not carry roots")
    return _contour_term(dom, bare_momentum_deriv)


def reference_energy(dom: NlieSolution) -> complex:
    if len(dom.roots):
        raise ValueError("the reference solution must not carry roots")
    return _contour_term(dom, bare_energy_deriv)


def effective_momentum(sol: NlieSolution, dom: NlieSolution) -> complex:
    return _root_term(sol, bare_momentum) + _contour_term(sol, bare_momentum_deriv) \
        - reference_momentum(dom)


def effective_energy(sol: NlieSolution, dom: NlieSolution) -> complex:
    return _root_term(sol, bare_energy) + _contour_term(sol, bare_energy_deriv) \
        - reference_energy(dom)


@dataclass(frozen=True)
class SpectralObservables:
    P: complex
    E: complex
    P_D: complex
    E_D: complex
    t_over_m: float
    config: ExcitationConfig = DOMINANT_CONFIG
    diagnostics: dict = field(default_factory=dict)

    @property
    def delta(self) -> complex:
        return self.P + self.t_over_m * self.E

    def at(self, t_over_m: float) -> "SpectralObservables":
        return SpectralObservables(self.P, self.E, self.P_D, self.E_D, t_over_m, self.config,
                                   self.diagnostics)

    @property
    def decay_rate(self) -> float:
        """Im Delta: the correlator decays like exp(-m Im Delta)."""
        return self.delta.imag

    @property
    def oscillation(self) -> float:
        return self.delta.real


def observables(sol: NlieSolution, dom: NlieSolution, t_over_m: float = 0.0) -> SpectralObservables:
    P_D, E_D = reference_momentum(dom), reference_energy(dom)
    P = _root_term(sol, bare_momentum) + _contour_term(sol, bare_momentum_deriv) - P_D
    E = _root_term(sol, bare_energy) + _contour_term(sol, bare_energy_deriv) - E_D
    diag = {
        "residual": max(sol.residual, dom.residual),
        "root_residual": sol.root_residual,
        "monodromy_abs": max(abs(sol.monodromy), abs(dom.monodromy)),
        "iterations": sol.iterations + dom.iterations,
        "holes": [complex(x) for x in sol.holes],
        "particles": [complex(y) for y in sol.particles],
        "nodes": len(sol.contour.nodes),
    }
    return SpectralObservables(P, E, P_D, E_D, t_over_m, sol.config, diag)


def dominant_corrlen(params: ModelParams, t_over_m: float = 0.0, dressed: DressedData | None = None,
                     config: ExcitationConfig = DOMINANT_CONFIG, mirror: bool = True,
                     **solver_kwargs) -> SpectralObservables:
    """Full pipeline: dressed functions, dominant NLIE, excited NLIE, P, E and Delta.

    The single-hole configuration and (if ``mirror``) its image on the other
    Fermi point are both solved; the one with the smaller decay rate is returned.
    """
    if dressed is None:
        dressed = dressed_quantities(params)
    if abs(dressed.vF * t_over_m) >= 1:
        warnings.warn(f"|v_F t/m| = {abs(dressed.vF * t_over_m):.3g} is outside the space-like cone")
    dom = solve_dominant(params, dressed, **solver_kwargs)
    candidates = [config] + ([config.mirrored()] if mirror and config.mirrored() != config else [])
    best, skipped, mono = None, [], abs(dom.monodromy)
    for k, cfg in enumerate(candidates):
        try:
            sol = solve_excited(params, dressed, cfg, **solver_kwargs)
        except (ConvergenceError, ContourError) as exc:
            if k == 0:
                raise
            # the mirrored configuration is a cross-check, not the primary answer
            skipped.append(f"{cfg}: {exc}")
            continue
        obs = observables(sol, dom, t_over_m)
        mono = max(mono, abs(sol.monodromy))
        log.debug("config %s: Delta = %s", cfg, obs.delta)
        if best is None or obs.decay_rate < best.decay_rate:
            best = obs
    # monodromy of every converged solution, including the discarded mirror
    best.diagnostics.update(q=dressed.q, vF=dressed.vF, Zq=dressed.Zq, monodromy_all=mono)
    if skipped:
        best.diagnostics["skipped"] = skipped
    return best


def leading_asymptote(obs: SpectralObservables, m: int, t: float = 0.0, amplitude: complex = 1.0) -> complex:
    """(-1)^m * amplitude * exp(i m Delta(t/m))."""
    if m < 1:
        raise ValueError("distance m must be a positive integer")
    delta = obs.P + (t / m) * obs.E
    return (-1) ** m * amplitude * np.exp(1j * m * delta)


def to_record(obs: SpectralObservables, params: ModelParams) -> dict:
    """JSON-ready record: params, q, vF, Zq, P, E, delta, decay_rate, oscillation, diagnostics."""
    def c(z):
        return [float(np.real(z)), float(np.imag(z))]
    def conv(v):
        if isinstance(v, (complex, np.complexfloating)):
            return c(v)
        if isinstance(v, list):
            return [conv(x) for x in v]
        return v
    diag = {k: conv(v) for k, v in obs.diagnostics.items() if k not in ("q", "vF", "Zq")}
    return {
        "params": {"J": params.J, "delta": params.delta, "h": params.h, "T": params.T},
        "t_over_m": obs.t_over_m,
        "config": {k: list(v) for k, v in asdict(obs.config).items()},
        "q": obs.diagnostics.get("q"),
        "vF": obs.diagnostics.get("vF"),
        "Zq": obs.diagnostics.get("Zq"),
        "P": c(obs.P),
        "E": c(obs.E),
        "delta": c(obs.delta),
        "decay_rate": obs.decay_rate,
        "oscillation": obs.oscillation,
        "diagnostics": diag,
    }


def dumps(obs: SpectralObservables, params: ModelParams) -> str:
    return json.dumps(to_record(obs, params), indent=1, sort_keys=True)
