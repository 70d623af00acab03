"""Linear integral equations (id + K) f = g on [-q, q] and the dressed functions.

Nystrom discretisation on a Gauss-Legendre rule.  Solutions are continued to
complex rapidities through their own integral representation,
f(lam) = g(lam) - sum_k w_k K(lam - mu_k) f_k.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .model import (
    ModelParams, RegimeError, bare_energy, bare_energy_deriv, bare_momentum,
    bare_momentum_deriv, kernel, phase_mod2pi,
)

log = logging.getLogger(__name__)

DEFAULT_ORDER = 64


class FredholmError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.nodes)

    @classmethod
    def gauss_legendre(cls, Q: float, N: int) -> "QuadratureRule":
        x, w = np.polynomial.legendre.leggauss(N)
        return cls(Q * x, Q * w)


@dataclass(frozen=True)
class FredholmSolution:
    """Nodal values of f with (id + K) f = g, plus analytic continuation."""
    rule: QuadratureRule
    values: np.ndarray
    driving: Callable
    params: ModelParams
    residual: float
    condition: float

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=complex)
        kmat = kernel(lam[..., None] - self.rule.nodes, self.params, check=False)
        out = self.driving(lam) - kmat @ (self.rule.weights * self.values)
        return out if np.ndim(out) else complex(out)


def solve_fredholm(g: Callable, Q: float, params: ModelParams, N: int = DEFAULT_ORDER,
                   max_condition: float = 1e12) -> FredholmSolution:
    if Q <= 0:
        raise ValueError("interval half-length must be positive")
    if N < 8:
        raise ValueError("quadrature order must be at least 8")
    rule = QuadratureRule.gauss_legendre(Q, N)
    x, w = rule.nodes, rule.weights
    A = np.eye(N) + kernel(x[:, None] - x[None, :], params, check=False).real * w[None, :]
    rhs = np.asarray(g(x.astype(complex)))
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > max_condition:
        raise FredholmError(f"near-singular Nystrom matrix, condition estimate {cond:.3e}")
    f = np.linalg.solve(A, rhs)
    if np.all(np.abs(f.imag) <= 1e-14 * (1 + np.abs(f.real))):
        f = f.real
    residual = float(np.max(np.abs(A @ f - rhs)))
    return FredholmSolution(rule, f, g, params, residual, float(cond))


def dressed_energy_at_boundary(Q: float, params: ModelParams, N: int = DEFAULT_ORDER) -> float:
    """eps(Q | Q): the dressed energy on [-Q, Q] evaluated at the endpoint."""
    sol = solve_fredholm(lambda lam: bare_energy(lam, params, check=False), Q, params, N)
    return float(np.real(sol(Q)))


def find_fermi_boundary(params: ModelParams, tol: float = 1e-13, N: int = DEFAULT_ORDER,
                        bracket: tuple[float, float] = (1e-6, 10.0)) -> float:
    if not 0 < params.h < params.h_saturation:
        raise RegimeError("Fermi boundary requires 0 < h < 4J(1+delta)")
    lo, hi = bracket
    f_lo = dressed_energy_at_boundary(lo, params, N)
    if f_lo >= 0:
        # field so close to saturation that the zone is narrower than the bracket
        return lo
    f_hi = dressed_energy_at_boundary(hi, params, N)
    if f_hi <= 0:
        raise RegimeError("no sign change of eps(Q|Q) in the Fermi-boundary bracket")
    return brentq(dressed_energy_at_boundary, lo, hi, args=(params, N), xtol=tol, rtol=1e-15,
                  maxiter=200)


@dataclass(frozen=True)
class DressedData:
    params: ModelParams
    q: float
    energy: FredholmSolution
    energy_deriv: FredholmSolution
    charge: FredholmSolution
    momentum_deriv: FredholmSolution

    def eps(self, lam):
        return self.energy(lam)

    def eps_deriv(self, lam):
        return self.energy_deriv(lam)

    def Z(self, lam):
        return self.charge(lam)

    def p_deriv(self, lam):
        return self.momentum_deriv(lam)

    def p(self, lam):
        """Dressed momentum p = p0 - (1/2pi) int theta(lam - mu) p'(mu) dmu (inner phase branch)."""
        lam = np.asarray(lam, dtype=complex)
        rule = self.momentum_deriv.rule
        th = phase_mod2pi(lam[..., None] - rule.nodes, self.params)
        out = bare_momentum(lam, self.params) - th @ (rule.weights * self.momentum_deriv.values) / (2 * np.pi)
        return out if np.ndim(out) else complex(out)

    @property
    def Zq(self) -> float:
        return float(np.real(self.Z(self.q)))

    @property
    def vF(self) -> float:
        return float(np.real(self.eps_deriv(self.q)) / np.real(self.p_deriv(self.q)))

    @property
    def residual(self) -> float:
        return max(s.residual for s in (self.energy, self.energy_deriv, self.charge, self.momentum_deriv))


def dressed_quantities(params: ModelParams, N: int = DEFAULT_ORDER, q: float | None = None) -> DressedData:
    if q is None:
        q = find_fermi_boundary(params, N=N)
    eps = solve_fredholm(lambda lam: bare_energy(lam, params, check=False), q, params, N)
    deps = solve_fredholm(lambda lam: bare_energy_deriv(lam, params), q, params, N)
    Z = solve_fredholm(lambda lam: np.ones_like(np.asarray(lam, dtype=complex)), q, params, N)
    dp = solve_fredholm(lambda lam: bare_momentum_deriv(lam, params), q, params, N)
    data = DressedData(params, q, eps, deps, Z, dp)
    log.debug("dressed: q=%.12g vF=%.12g Z(q)=%.12g residual=%.2e", q, data.vF, data.Zq, data.residual)
    return data
