"""Closed formulas at the free-fermion point delta = 0.

Here eps0 = h - 4J / cosh(2 lam), p0' = 2 / cosh(2 lam) and the space-like
transverse correlator behaves as

    (-1)^m C(T, h) exp{ m * rate },  rate = int_{C_h} dlam/(2 pi) p0' ln|coth(eps0 / 2T)|.

C_h is made of the line R - i pi/2 (left to right) and R (right to left),
indented so that -q and q - i pi/2 are inside while q and -q - i pi/2 are
outside.  The indentations are smooth bumps of height ``a`` about half way
between the real axis and the nearest zero of coth(eps0 / 2T).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .model import ModelParams, RegimeError, bare_energy, bare_energy_deriv, bare_momentum_deriv

MIN_OFFSET = 1e-3
GAUSS_POINTS = 16


class SingularityError(ValueError):
    pass


def _require_ff(params: ModelParams):
    if params.delta != 0:
        raise RegimeError("free-fermion formulas require delta = 0")


def fermi_point(params: ModelParams) -> float:
    _require_ff(params)
    return 0.5 * math.acosh(4 * params.J / params.h)


def _gauss(edges, n=GAUSS_POINTS):
    x, w = np.polynomial.legendre.leggauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    return (0.5 * (b - a) * x + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * w).ravel()


@dataclass(frozen=True)
class FFContour:
    """Discretised C_h (offset = 0) or the nested C_h' (offset > 0).

    ``lines`` holds (nodes, weights) for the upper line R (right to left) and the
    lower line R - i pi/2 (left to right); weights include d(lam) and orientation.
    """
    q: float
    L: float
    lift: float
    width: float
    offset: float
    upper: tuple
    lower: tuple

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([self.upper[0], self.lower[0]])

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate([self.upper[1], self.lower[1]])

    def profile(self, x):
        """Signed lift: +lift above -q, -lift below +q."""
        x = np.asarray(x, dtype=float)
        g = np.exp(-0.5 * ((x + self.q) / self.width) ** 2) - np.exp(-0.5 * ((x - self.q) / self.width) ** 2)
        return self.lift * g

    def profile_deriv(self, x):
        x = np.asarray(x, dtype=float)
        gp = -(x + self.q) / self.width**2 * np.exp(-0.5 * ((x + self.q) / self.width) ** 2) \
            + (x - self.q) / self.width**2 * np.exp(-0.5 * ((x - self.q) / self.width) ** 2)
        return self.lift * gp

    def polygon(self) -> np.ndarray:
        """Closed polygon through the nodes, used for winding numbers."""
        up, lo = self.upper[0], self.lower[0]
        return np.concatenate([lo, up, lo[:1]])

    def winding_number(self, z: complex) -> int:
        d = self.polygon() - z
        return int(round(np.sum(np.angle(d[1:] / d[:-1])) / (2 * math.pi)))

    def marked_points(self) -> dict:
        q = self.q
        return {"-q": -q, "q - i pi/2": q - 0.5j * math.pi,
                "q": q, "-q - i pi/2": -q - 0.5j * math.pi}


def singular_points(params: ModelParams, kmax: int = 8) -> np.ndarray:
    """Zeros and poles of coth(eps0/2T) (eps0 = i pi T k) in the strip -pi/2 <= Im <= pi/2."""
    J, h, T = params.J, params.h, params.T
    pts = []
    for k in range(-kmax, kmax + 1):
        z = np.arccosh(complex(4 * J / (h - 1j * math.pi * T * k))) / 2
        for w in (z, -z):
            for shift in (-1, 0, 1):
                v = w + 1j * math.pi * shift
                if -math.pi / 2 - 1e-12 <= v.imag <= math.pi / 2 + 1e-12:
                    pts.append(v)
    return np.array(pts)


def _clearance(params, q):
    """Distance from the Fermi points to the nearest other singular point."""
    pts = singular_points(params, kmax=2)
    d = [abs(z - sg * q) for z in pts for sg in (-1, 1) if abs(z - sg * q) > 1e-9]
    return min(d)


def build_ff_contour(params: ModelParams, offset: float = 0.0, lift: float | None = None,
                     L: float | None = None, base: float | None = None) -> FFContour:
    """Indented C_h, shifted inwards by ``offset`` on both lines when offset > 0.

    ``base`` is the smallest panel width (default: half the distance to the
    nearest singular point); panels widen exponentially away from +-q.
    """
    q = fermi_point(params)
    T = params.T
    slope = abs(float(np.real(bare_energy_deriv(q, params))))
    if lift is None:
        # well inside the distance to the neighbouring zeros of coth(eps0/2T)
        lift = min(0.3 * _clearance(params, q), 0.25 * math.pi / 2, 0.5 * q)
    if offset >= lift:
        raise SingularityError("nested offset must stay below the indentation height")
    if L is None:
        L = max(q, 1.0) + 25 * max(1.0, T / params.J)
    width = max(min(max(2 * lift, 0.5 * math.pi * T / slope), 0.5 * q), 1e-3)
    if base is None:
        base = 0.5 * (offset if offset > 0 else lift)
    edges = [-L]
    while edges[-1] < L:
        x = edges[-1]
        dist = min(abs(x - q), abs(x + q))
        w = min(0.5, base * math.exp(max(0.0, dist - 4 * width)))
        edges.append(min(x + w, L))
    s, ws = _gauss(np.array(edges))
    c = FFContour(q, L, lift, width, offset, (None, None), (None, None))
    g, dg = c.profile(s), c.profile_deriv(s)
    up = ((s + 1j * (g - offset))[::-1], (-ws * (1 + 1j * dg))[::-1])
    lo = (s - 0.5j * math.pi + 1j * (g + offset), ws * (1 + 1j * dg))
    c = FFContour(q, L, lift, width, offset, up, lo)
    sing = singular_points(params)
    gap = np.min(np.abs(c.nodes[:, None] - sing[None, :]))
    if gap < 0.25 * (lift - offset):
        raise SingularityError(f"contour passes within {gap:.3g} of a singularity of ln coth")
    return c


def check_membership(c: FFContour) -> dict:
    """Winding numbers of the four marked points; raises if the prescription fails."""
    wn = {k: c.winding_number(z) for k, z in c.marked_points().items()}
    want = {"-q": 1, "q - i pi/2": 1, "q": 0, "-q - i pi/2": 0}
    if {k: abs(v) for k, v in wn.items()} != want:
        raise SingularityError(f"contour prescription violated: {wn}")
    return wn


def ln_coth(lam: np.ndarray, params: ModelParams) -> np.ndarray:
    """Continuous ln coth(eps0/2T) along an ordered node set, real at the first node."""
    z = bare_energy(lam, params) / (2 * params.T)
    lc = np.log(1 / np.tanh(z))
    im = np.unwrap(lc.imag)
    im -= 2 * math.pi * round(im[0] / (2 * math.pi))
    return lc.real + 1j * im


def _line_ln_coth(c: FFContour, params):
    """ln coth along both lines; each continued from its left truncation point."""
    up = ln_coth(c.upper[0][::-1], params)[::-1]
    lo = ln_coth(c.lower[0], params)
    return up, lo


def _sech2(x):
    e = math.exp(-2 * abs(x))
    return 2 * e / (1 + e * e)


def _exponent_integrand(x, params, part):
    """p0' ln|coth(eps0/2T)| summed over both straight lines at abscissa x (complex form)."""
    J, h, T = params.J, params.h, params.T
    up_lam, lo_lam = complex(x), complex(x, -0.5 * math.pi)
    total = 0j
    for lam, orient in ((up_lam, -1), (lo_lam, 1)):
        s = _sech2(x)
        e0 = h - 4 * J * s if lam.imag == 0 else h + 4 * J * s
        dp = 2 * s if lam.imag == 0 else -2 * s
        total += orient * complex(dp) * math.log(abs(1 / math.tanh(e0 / (2 * T))))
    return total.real if part == 0 else total.imag


def ff_exponent_complex(params: ModelParams) -> complex:
    """int_{C_h} dlam/2pi p0' ln|coth(eps0/2T)| with real and imaginary parts integrated separately."""
    _require_ff(params)
    q = fermi_point(params)
    out = []
    for part in (0, 1):
        total = 0.0
        for a, b in ((0.0, q), (q, q + 5), (q + 5, math.inf)):
            total += quad(_exponent_integrand, a, b, args=(params, part), limit=400,
                          epsabs=1e-15, epsrel=1e-13)[0]
        out.append(2 * total / (2 * math.pi))  # the integrand is even in x
    return complex(out[0], out[1])


def ff_exponent_rate(params: ModelParams) -> float:
    """Per-site exponent int_{C_h} p0' ln|coth(eps0/2T)| dlam / 2pi (a negative number).

    ln|.| is not analytic, so the lines are taken straight; the logarithmic
    singularities at +-q are integrable and handled by splitting there.
    """
    return ff_exponent_complex(params).real


def _coth_deriv_matrix(a, b):
    """coth'(a_i - b_j) = -4 X / (X - 1)^2 with X = exp(2(a_i - b_j))."""
    X = np.exp(2 * a)[:, None] * np.exp(-2 * b)[None, :]
    return -4 * X / (X - 1) ** 2


def ff_double_integral(params: ModelParams, offset: float | None = None, chunk: int = 1024) -> complex:
    """int_{C_h'} dlam/2i pi int_{C_h} dmu/2i pi coth'(lam - mu) ln coth(eps0(lam)/2T) ln coth(eps0(mu)/2T).

    Both logarithms tend to c = ln coth(h/2T) at infinity.  Since the closed
    contour integral of coth'(lam - mu) over either variable vanishes, c is
    subtracted from both factors, which makes the truncated integrand decay.
    """
    _require_ff(params)
    outer0 = build_ff_contour(params)
    if offset is None:
        offset = 0.5 * outer0.lift
    if offset < MIN_OFFSET:
        raise SingularityError(f"nested-contour offset {offset:g} below {MIN_OFFSET:g}")
    inner = build_ff_contour(params, offset=offset, base=0.5 * offset)
    outer = build_ff_contour(params, base=0.5 * offset)
    c = math.log(1 / math.tanh(params.h / (2 * params.T)))
    fl = np.concatenate(_line_ln_coth(inner, params)) - c
    fm = np.concatenate(_line_ln_coth(outer, params)) - c
    lam, wl = inner.nodes, inner.weights
    mu, wm = outer.nodes, outer.weights
    vec = wm * fm
    total = 0j
    for i in range(0, len(lam), chunk):
        sl = slice(i, i + chunk)
        total += np.sum(wl[sl] * fl[sl] * (_coth_deriv_matrix(lam[sl], mu) @ vec))
    return complex(total / (2j * math.pi) ** 2)


def ff_phi(lam: complex, params: ModelParams, variant: str = "mu", c: FFContour | None = None) -> complex:
    """Phi(lam) = -(i/2) p0'(lam) exp{ int_{C_h} dmu/2pi p0'(mu) L * S(lam, mu) }.

    S = sinh(lam + mu + i pi/4) / sinh(lam - mu - i pi/4).  With variant="mu"
    the logarithm is ln coth(eps0(mu)/2T); variant="printed" uses eps0(lam),
    which diverges at lam = +-q.
    """
    _require_ff(params)
    c = c or build_ff_contour(params)
    mu, w = c.nodes, c.weights
    S = np.sinh(lam + mu + 0.25j * math.pi) / np.sinh(lam - mu - 0.25j * math.pi)
    if variant == "mu":
        L = np.concatenate(_line_ln_coth(c, params))
    elif variant == "printed":
        e = complex(bare_energy(lam, params))
        if abs(e) < 1e-12:
            raise SingularityError("printed variant of Phi is singular where eps0(lam) = 0")
        L = np.log(1 / np.tanh(e / (2 * params.T)))
    else:
        raise ValueError("variant must be 'mu' or 'printed'")
    expo = np.sum(w * bare_momentum_deriv(mu, params) * L * S) / (2 * math.pi)
    return complex(-0.5j * bare_momentum_deriv(lam, params) * np.exp(expo))


def ff_constant(params: ModelParams, variant: str = "mu", offset: float | None = None) -> complex:
    """C(T, h) = 2T Phi(-q) / eps0'(-q) * exp(-double integral)."""
    q = fermi_point(params)
    phi = ff_phi(-q, params, variant=variant)
    d = ff_double_integral(params, offset=offset)
    return complex(2 * params.T * phi / bare_energy_deriv(-q, params) * np.exp(-d))


def ff_amplitude(params: ModelParams, variant: str = "mu") -> dict:
    """Amplitude A_dom = eps0'(-q)/T * C and its normalisation T A / eps0'(-q) (= C)."""
    q = fermi_point(params)
    C = ff_constant(params, variant=variant)
    slope = complex(bare_energy_deriv(-q, params))
    A = slope / params.T * C
    return {"C": C, "A_dom": A, "normalized": params.T * A / slope}


def ff_leading(m: int, t: float, params: ModelParams, variant: str = "mu",
               C: complex | None = None, rate: float | None = None) -> complex:
    """(-1)^m C(T, h) exp(m * rate), valid for m > 4 J t."""
    if m < 1:
        raise ValueError("distance m must be a positive integer")
    if m <= 4 * params.J * t:
        warnings.warn("m <= 4Jt: outside the space-like regime of the free-fermion formula")
    C = ff_constant(params, variant=variant) if C is None else C
    rate = ff_exponent_rate(params) if rate is None else rate
    return complex((-1) ** m * C * math.exp(m * rate))
