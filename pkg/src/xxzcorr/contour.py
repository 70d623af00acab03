"""Integration contours for the quantum-transfer-matrix NLIEs.

The NLIE contour is a closed curve on the i*pi-periodic cylinder made of two
pieces:

* ``fermi``: runs from +L to -L near the real axis and crosses it at the two
  zeros of the auxiliary function close to -q and +q.  Near each crossing it
  is lifted by a Gaussian bump so that it passes exactly through the zero.
* ``shadow``: the line R - i pi/2, run from -L to +L.

The strip between them is the interior.  The short vertical legs at Re = +-L
are not discretised: every integrand paired with the contour decays like
exp(-2|Re lam|), so they only enter through the branch bookkeeping of the
logarithm (see :func:`xxzcorr.nlie.monodromy`).

:func:`trace_level_set` is a separate tool for the curves {Re f = 0}.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .model import ModelParams

GAUSS_POINTS = 16
FAR_PANEL = 0.5
DEFAULT_TAIL = 14.0


class ContourError(RuntimeError):
    pass


@dataclass(frozen=True)
class Segment:
    label: str
    s: np.ndarray          # parameter along the segment (monotone in traversal order)
    nodes: np.ndarray      # complex rapidities, in traversal order
    weights: np.ndarray    # complex quadrature weights, d(lam) included
    start: complex = 0j    # end points of the piece (not nodes)
    end: complex = 0j


@dataclass(frozen=True)
class Contour:
    segments: tuple[Segment, ...]
    zeros: tuple[complex, complex] = (0j, 0j)
    anchor: complex = 0j
    cutoff: float = DEFAULT_TAIL
    bumps: tuple = field(default=(), repr=False)

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([s.nodes for s in self.segments])

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate([s.weights for s in self.segments])

    @property
    def labels(self) -> np.ndarray:
        return np.concatenate([[s.label] * len(s.nodes) for s in self.segments])

    @property
    def params_s(self) -> np.ndarray:
        return np.concatenate([s.s for s in self.segments])

    def slices(self) -> list[slice]:
        out, i = [], 0
        for seg in self.segments:
            out.append(slice(i, i + len(seg.nodes)))
            i += len(seg.nodes)
        return out

    def height(self, x) -> np.ndarray:
        """Imaginary part of the fermi piece above the real abscissa x."""
        return _bump(np.asarray(x, dtype=float), self.bumps)

    def is_interior(self, lam: complex) -> bool:
        """Interior test modulo i*pi: between the shadow line and the fermi piece."""
        top = float(self.height(lam.real))
        im = lam.imag - math.pi * math.floor((lam.imag - top) / math.pi + 1.0)
        # im is now reduced into (top - pi, top]
        return -math.pi / 2 < im < top

    def to_csv(self, path: str | Path, u: np.ndarray | None = None) -> None:
        """Write columns branch, s, Re lam, Im lam, Re u, Im u."""
        lam = self.nodes
        u = np.full(lam.shape, np.nan + 0j) if u is None else np.asarray(u)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["branch", "s", "re_lam", "im_lam", "re_u", "im_u"])
            for lab, s, z, v in zip(self.labels, self.params_s, lam, u):
                w.writerow([lab, f"{s:.16e}", f"{z.real:.16e}", f"{z.imag:.16e}",
                            f"{v.real:.16e}", f"{v.imag:.16e}"])


def max_lift(params: ModelParams) -> float:
    """Largest admissible height of the fermi piece above or below the real axis.

    Half way to the bare-energy poles at +-i zeta/2, and for delta != 0 also
    clear of the kernel poles that approach the shadow line.
    """
    cap = 0.25 * params.zeta
    if params.sin2zeta != 0.0:
        cap = min(cap, 0.7 * (math.pi / 2 - params.zeta))
    return cap


def _bump(x, bumps):
    g = np.zeros_like(np.asarray(x, dtype=float))
    for c, a, w in bumps:
        g = g + a * np.exp(-0.5 * ((x - c) / w) ** 2)
    return g


def _bump_deriv(x, bumps):
    g = np.zeros_like(np.asarray(x, dtype=float))
    for c, a, w in bumps:
        g = g - a * (x - c) / w**2 * np.exp(-0.5 * ((x - c) / w) ** 2)
    return g


def _fit_bumps(zeros, width):
    """Gaussian bumps passing exactly through the given points."""
    c = np.array([z.real for z in zeros])
    target = np.array([z.imag for z in zeros])
    G = np.exp(-0.5 * ((c[:, None] - c[None, :]) / width) ** 2)
    amp = np.linalg.solve(G, target)
    return tuple((float(ci), float(ai), float(width)) for ci, ai in zip(c, amp))


def _breakpoints(centers, d0, L, far=FAR_PANEL, growth=1.5):
    """Panel edges on [-L, L], graded geometrically from width d0 at each center."""
    pts = {-L, L}
    for c in centers:
        off, width = 0.5 * d0, d0
        pts.update((c - off, c + off))
        while width < far:
            off += width
            pts.update((c - off, c + off))
            width *= growth
        pts.update(c + sg * k for sg in (-1, 1) for k in np.arange(off + far, 2 * L, far))
    pts = np.array(sorted(p for p in pts if -L <= p <= L))
    # drop slivers created by overlapping gradings
    keep = [pts[0]]
    for p in pts[1:]:
        if p - keep[-1] > 0.2 * d0:
            keep.append(p)
    keep[-1] = L
    return np.array(keep)


def _gauss_panels(edges, n=GAUSS_POINTS):
    x, w = np.polynomial.legendre.leggauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    s = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    ws = 0.5 * (b - a) * w[None, :]
    return s.ravel(), ws.ravel()


def build_contour(params: ModelParams, zeros: tuple[complex, complex], scale: float,
                  tail: float = DEFAULT_TAIL, shadow_panel: float | None = None,
                  bump_width: float | None = None) -> Contour:
    """Fermi piece through ``zeros`` (near -q, +q) plus the shadow line R - i pi/2.

    ``scale`` is the local length scale near the Fermi points, of order pi T / |u'(q)|.
    """
    zm, zp = zeros
    q = max(abs(zp.real), abs(zm.real), 1e-3)
    L = max(q, 1.0) + tail
    lift = max(abs(zm.imag), abs(zp.imag))
    if bump_width is None:
        # wide compared with the lift, so that the parametrised integrand stays analytic
        # in a broad strip; narrower than the Fermi-point separation
        bump_width = max(min(max(4 * scale, 1.5 * lift), q), 0.05)
    bumps = _fit_bumps([zm, zp], bump_width)
    grid = np.linspace(-q - 4 * bump_width, q + 4 * bump_width, 2001)
    if lift > max_lift(params) * (1 + 1e-12) or \
            np.max(np.abs(_bump(grid, bumps))) > 1.2 * max_lift(params):
        raise ContourError("contour lift too close to the poles of the bare functions")

    d0 = 0.5 * min(scale, 0.4)
    edges = _breakpoints([zm.real, zp.real], d0, L)
    s, ws = _gauss_panels(edges)
    order = np.argsort(-s)
    s, ws = s[order], ws[order]
    g, dg = _bump(s, bumps), _bump_deriv(s, bumps)
    gL = _bump(np.array([L, -L]), bumps)
    fermi = Segment("fermi", -s, s + 1j * g, -ws * (1 + 1j * dg),
                    complex(L, gL[0]), complex(-L, gL[1]))

    if shadow_panel is None:
        eta = math.pi / 2 - params.zeta
        shadow_panel = FAR_PANEL if eta == 0 else min(FAR_PANEL, 2 * eta)
    n_sh = int(math.ceil(2 * L / shadow_panel))
    edges_sh = np.linspace(-L, L, n_sh + 1)
    s2, ws2 = _gauss_panels(edges_sh)
    shadow = Segment("shadow", s2, s2 - 0.5j * math.pi, ws2.astype(complex),
                     complex(-L, -0.5 * math.pi), complex(L, -0.5 * math.pi))
    return Contour((fermi, shadow), zeros=(complex(zm), complex(zp)),
                   anchor=complex(fermi.nodes[0]), cutoff=tail, bumps=bumps)


# ---------------------------------------------------------------------------
# level sets {Re f = 0}


def _newton_zero(f, df, z0, tol=1e-13, maxit=60):
    z = complex(z0)
    for _ in range(maxit):
        d = df(z)
        if abs(d) < 1e-14:
            raise ContourError("degenerate crossing: f' vanishes at the seed")
        step = f(z) / d
        z -= step
        if abs(step) < tol * (1 + abs(z)):
            return z
    raise ContourError("Newton iteration for a zero did not converge")


def trace_level_set(f: Callable, df: Callable, seeds, params: ModelParams, cutoff: float = 40.0,
                    step: float = 0.01, tol: float = 1e-12, n_nodes: int = 256,
                    max_steps: int = 20000) -> Contour:
    """Trace the two branches of {Re f = 0} through zeros of f near the seeds.

    From each refined zero the curve is followed in both directions by a
    tangent predictor and a Newton corrector on Re f along the gradient.
    Tracing in a direction stops once |Im f| / T exceeds ``cutoff`` (along the
    level set |f| grows without bound towards the poles at +-i zeta/2).  Each
    branch is resampled to ``n_nodes`` Gauss-Legendre nodes in arclength.
    """
    T = params.T
    segs, zeros = [], []
    for label, seed in zip(("-", "+"), seeds):
        z0 = _newton_zero(f, df, seed)
        zeros.append(z0)
        halves = []
        for direction in (1, -1):
            pts = [z0]
            z = z0
            for _ in range(max_steps):
                d = df(z)
                if abs(d) < 1e-14:
                    raise ContourError("tracing stalled at a critical point of f")
                # along Re f = 0, df = f' dz is imaginary: dz ~ i conj(f')
                zp = z + step * direction * 1j * np.conj(d) / abs(d)
                for _ in range(30):
                    fz, dz = f(zp), df(zp)
                    # move along grad(Re f) = conj(f') to zero Re f
                    corr = -np.real(fz) * np.conj(dz) / abs(dz) ** 2
                    zp = zp + corr
                    if abs(corr) < tol:
                        break
                else:
                    raise ContourError("corrector did not converge")
                pts.append(zp)
                z = zp
                if abs(np.imag(f(z))) / T > cutoff:
                    break
            else:
                raise ContourError("level set did not reach the cutoff")
            halves.append(np.array(pts))
        path = np.concatenate([halves[1][::-1], halves[0][1:]])
        # orient so that Im f increases along the branch
        if np.imag(f(path[-1])) < np.imag(f(path[0])):
            path = path[::-1]
        arc = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(path)))])
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        sq = 0.5 * arc[-1] * (x + 1)
        re = np.interp(sq, arc, path.real)
        im = np.interp(sq, arc, path.imag)
        nodes = re + 1j * im
        # project the interpolated nodes back onto the level set
        for _ in range(5):
            d = np.array([df(z) for z in nodes])
            nodes = nodes - np.real([f(z) for z in nodes]) * np.conj(d) / np.abs(d) ** 2
        dl = np.gradient(nodes, sq)
        segs.append(Segment(label, sq, nodes, 0.5 * arc[-1] * w * dl, path[0], path[-1]))
    return Contour(tuple(segs), zeros=(zeros[0], zeros[1]), anchor=segs[0].nodes[0], cutoff=cutoff)


# ---------------------------------------------------------------------------
# logarithm bookkeeping


def log1p_exp(z):
    """Principal-branch-equivalent ln(1 + e^z), evaluated without overflow.

    For Re z > 0 the result is z + ln(1 + e^{-z}), which agrees with the
    principal value only modulo 2 pi i; callers unwrap along the contour.
    """
    z = np.asarray(z, dtype=complex)
    big = z.real > 0
    zz = np.where(big, -z, z)
    return np.where(big, z, 0) + np.log1p(np.exp(zz))


def cyclic_order(contour: Contour) -> np.ndarray:
    """Node indices in closed-loop order (fermi piece, then shadow line)."""
    return np.arange(len(contour.nodes))


def unwrap_log(u_nodes: np.ndarray, contour: Contour, T: float, anchor: int = 0) -> np.ndarray:
    """Continuous ln(1 + e^{-u/T}) along the closed contour, principal at node ``anchor``.

    The vertical legs between the two pieces are bridged by the principal
    value, which is continuous there as long as |e^{-u/T}| < 1 at the corners.
    """
    n = len(u_nodes)
    order = np.roll(cyclic_order(contour), -anchor)
    z = -np.asarray(u_nodes)[order] / T
    lg = log1p_exp(z)
    lg0 = np.log1p(np.exp(z[0])) if z[0].real < 30 else lg[0]
    im = np.unwrap(lg.imag)
    im += lg0.imag - im[0]
    out = np.empty(n, dtype=complex)
    out[order] = lg.real + 1j * im
    return out


def check_monodromy(u: Callable, du: Callable, contour: Contour, T: float) -> complex:
    """Closed-contour integral of (-u'/T) / (1 + e^{u/T}).

    Along each discretised piece the integral is done by quadrature; across the
    two vertical legs it is the difference of principal logarithms, exact when
    |e^{-u/T}| < 1 on the legs.  A non-zero multiple of 2 pi i means the
    logarithm is not single valued on the contour.
    """
    total = 0j
    ends = []
    for seg in contour.segments:
        uu, dd = np.asarray(u(seg.nodes)), np.asarray(du(seg.nodes))
        total += np.sum(seg.weights * (-dd / T) * fermi_factor(uu / T))
        ends.append((complex(u(seg.start)), complex(u(seg.end))))
    # legs: end of each piece to the start of the next one
    for k in range(len(ends)):
        a = ends[k][1]
        b = ends[(k + 1) % len(ends)][0]
        total += np.log1p(np.exp(-b / T)) - np.log1p(np.exp(-a / T))
    return complex(total)


def fermi_factor(x):
    """1 / (1 + e^x) for complex x without overflow."""
    x = np.asarray(x, dtype=complex)
    big = x.real > 0
    e = np.exp(np.where(big, -x, x))
    return np.where(big, e / (1 + e), 1 / (1 + e))
