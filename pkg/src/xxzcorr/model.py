"""Physical parameters and bare functions of the XXZ chain in the massless regime.

All bare functions are complex analytic in the rapidity and accept scalars or
numpy arrays.  Poles and branch lines are guarded: evaluating within
``POLE_GUARD`` of one raises :class:`DomainError` instead of returning a
cancellation-dominated number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

POLE_GUARD = 1e-8


class DomainError(ValueError):
    """A rapidity sits on a pole or on a branch line of a bare function."""


class RegimeError(ValueError):
    """Model parameters outside 0 <= delta < 1, 0 < h < 4J(1+delta), T > 0, J > 0."""


@dataclass(frozen=True)
class ModelParams:
    J: float
    delta: float
    h: float
    T: float
    zeta: float = field(init=False)

    def __post_init__(self):
        if not self.J > 0:
            raise RegimeError(f"J must be positive, got {self.J}")
        if not 0 <= self.delta < 1:
            raise RegimeError(f"anisotropy must satisfy 0 <= delta < 1, got {self.delta}")
        if not 0 < self.h < self.h_saturation:
            raise RegimeError(
                f"field must satisfy 0 < h < 4J(1+delta) = {self.h_saturation}, got {self.h}")
        if not self.T > 0:
            raise RegimeError(f"temperature must be positive, got {self.T}")
        # delta == 0 gives exactly pi/2, which keeps the kernel identically zero
        zeta = math.pi / 2 if self.delta == 0 else math.acos(self.delta)
        object.__setattr__(self, "zeta", zeta)

    @property
    def h_saturation(self) -> float:
        return 4 * self.J * (1 + self.delta)

    @property
    def sin2zeta(self) -> float:
        # written through cos(zeta) = delta so that it vanishes exactly at delta = 0
        return 2 * self.delta * math.sqrt(1 - self.delta**2)

    @property
    def strip_halfwidth(self) -> float:
        """Half-width min(zeta, pi - zeta) of the strip where the bare phase is one-valued."""
        return min(self.zeta, math.pi - self.zeta)

    def replace(self, **changes) -> "ModelParams":
        kw = dict(J=self.J, delta=self.delta, h=self.h, T=self.T)
        kw.update(changes)
        return ModelParams(**kw)


def _reduce_ipi(lam):
    """Shift Im(lam) into (-pi/2, pi/2] using i*pi periodicity."""
    lam = np.asarray(lam, dtype=complex)
    k = np.floor((np.pi / 2 - lam.imag) / np.pi)
    return lam + 1j * np.pi * k


def _guard(lam, centers, what):
    red = _reduce_ipi(lam)
    for c in centers:
        if np.any(np.abs(red - c) < POLE_GUARD):
            raise DomainError(f"{what}: rapidity within {POLE_GUARD:g} of pole {c}")


def _out(x, lam):
    return x if np.ndim(lam) else complex(x)


def kernel(lam, params: ModelParams, check: bool = True):
    """Integral kernel sin(2 zeta) / (2 pi sinh(lam - i zeta) sinh(lam + i zeta))."""
    lam = np.asarray(lam, dtype=complex)
    z = params.zeta
    if params.sin2zeta == 0.0:
        return _out(np.zeros_like(lam), lam)
    if check:
        _guard(lam, [1j * z, -1j * z, 1j * (z - math.pi), 1j * (math.pi - z)], "kernel")
    val = params.sin2zeta / (2 * np.pi * np.sinh(lam - 1j * z) * np.sinh(lam + 1j * z))
    return _out(val, lam)


def kernel_matrix(a, b, params: ModelParams, deriv: bool = False) -> np.ndarray:
    """K(a_i - b_j) (or K') for all pairs, through cosh 2(a - b) built from exponentials.

    Uses sinh(x - i zeta) sinh(x + i zeta) = (cosh 2x - cos 2 zeta) / 2, so no
    transcendental function is evaluated per matrix entry.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if params.sin2zeta == 0.0:
        return np.zeros((a.size, b.size), dtype=complex)
    ea, eb = np.exp(2 * a), np.exp(-2 * b)
    plus = ea[:, None] * eb[None, :]
    minus = 1 / plus
    den = 0.5 * (plus + minus) - math.cos(2 * params.zeta)
    if not deriv:
        return params.sin2zeta / (np.pi * den)
    return -params.sin2zeta * (plus - minus) / (np.pi * den * den)


def kernel_deriv(lam, params: ModelParams):
    lam = np.asarray(lam, dtype=complex)
    z = params.zeta
    if params.sin2zeta == 0.0:
        return _out(np.zeros_like(lam), lam)
    a, b = np.sinh(lam - 1j * z), np.sinh(lam + 1j * z)
    val = -params.sin2zeta / (2 * np.pi) * (np.cosh(lam - 1j * z) * b + a * np.cosh(lam + 1j * z)) / (a * b) ** 2
    return _out(val, lam)


def bare_energy(lam, params: ModelParams, check: bool = True):
    """h - 2J sin^2(zeta) / (sinh(lam + i zeta/2) sinh(lam - i zeta/2))."""
    lam = np.asarray(lam, dtype=complex)
    z = params.zeta
    if check:
        _guard(lam, [0.5j * z, -0.5j * z], "bare_energy")
    s = math.sin(z)
    val = params.h - 2 * params.J * s * s / (np.sinh(lam + 0.5j * z) * np.sinh(lam - 0.5j * z))
    return _out(val, lam)


def bare_energy_deriv(lam, params: ModelParams):
    lam = np.asarray(lam, dtype=complex)
    z = params.zeta
    a, b = np.sinh(lam + 0.5j * z), np.sinh(lam - 0.5j * z)
    s = math.sin(z)
    val = 2 * params.J * s * s * (np.cosh(lam + 0.5j * z) * b + a * np.cosh(lam - 0.5j * z)) / (a * b) ** 2
    return _out(val, lam)


def bare_momentum(lam, params: ModelParams, check: bool = True):
    """i ln( sinh(i zeta/2 + lam) / sinh(i zeta/2 - lam) ), principal logarithm."""
    lam = np.asarray(lam, dtype=complex)
    z = params.zeta
    if check:
        _guard(lam, [0.5j * z, -0.5j * z], "bare_momentum")
    val = 1j * np.log(np.sinh(0.5j * z + lam) / np.sinh(0.5j * z - lam))
    return _out(val, lam)


def bare_momentum_deriv(lam, params: ModelParams):
    lam = np.asarray(lam, dtype=complex)
    z = params.zeta
    val = -math.sin(z) / (np.sinh(0.5j * z + lam) * np.sinh(0.5j * z - lam))
    return _out(val, lam)


def bare_phase(lam, params: ModelParams):
    """Bare phase with its two branches in the strip |Im lam| < pi/2.

    Raises DomainError on the branch-transition lines |Im lam| = min(zeta, pi - zeta),
    at |Im lam| >= pi/2, and at the logarithmic singularities.
    """
    lam = np.asarray(lam, dtype=complex)
    z = params.zeta
    w = params.strip_halfwidth
    im = np.abs(lam.imag)
    if np.any(im >= math.pi / 2 - POLE_GUARD) or (
            w < math.pi / 2 and np.any(np.abs(im - w) < POLE_GUARD)):
        raise DomainError("bare_phase: rapidity on a branch-transition line")
    _guard(lam, [1j * z, -1j * z], "bare_phase")
    inner = im < w
    num = np.sinh(1j * z + lam)
    val = np.where(
        inner,
        1j * np.log(num / np.sinh(1j * z - lam)),
        -math.pi * np.sign(math.pi - 2 * z) + 1j * np.log(num / np.sinh(lam - 1j * z)),
    )
    return _out(val, lam)


def phase_mod2pi(lam, params: ModelParams):
    """Bare phase up to integer multiples of 2 pi, defined on the whole plane.

    Only exp(i theta) enters the auxiliary function through exp(-u/T), so any
    determination congruent mod 2 pi is admissible away from the real strip.
    """
    lam = np.asarray(lam, dtype=complex)
    z = params.zeta
    if params.sin2zeta == 0.0:
        return _out(np.zeros_like(lam), lam)
    val = 1j * np.log(np.sinh(1j * z + lam) / np.sinh(1j * z - lam))
    return _out(val, lam)


def phase_deriv(lam, params: ModelParams):
    return 2 * np.pi * kernel(lam, params, check=False)
