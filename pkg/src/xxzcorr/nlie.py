"""Non-linear integral equations for the quantum transfer matrix in the Trotter limit.

The auxiliary function solves

    u(xi) = eps0(xi) - i pi s T - i T Theta(xi | x, y)
            - T * contour_integral K(xi - lam) Ln[1 + e^{-u/T}](lam) dlam

where Theta = sum_a theta(xi - y_a) - sum_a theta(xi - x_a) and the hole and
particle roots obey u(x_a) = -sigma 2 pi i T (h_a + 1/2),
u(y_a) = +sigma 2 pi i T (p_a + 1/2).  The dominant state has no roots and s = 0.

The nodal values and the roots are found together by a complex Newton
iteration.  Around it, the zeros of u close to -q and +q are re-located and
the contour is rebuilt through them until they stop moving.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contour import (
    Contour, ContourError, build_contour, max_lift, check_monodromy, fermi_factor, log1p_exp, unwrap_log,
)
from .dressed import DressedData
from .model import (
    ModelParams, bare_energy, bare_energy_deriv, kernel, kernel_deriv, kernel_matrix, phase_deriv, phase_mod2pi,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
MAX_ITER = 200
ROOT_COLLISION = 1e-6
PROXIMITY = 1e-3


class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual=float("nan")):
        super().__init__(f"{msg} (last residual {residual:.3e})")
        self.residual = residual


def _strictly_increasing(seq, name):
    seq = tuple(int(v) for v in seq)
    if any(v < 0 for v in seq) or any(b <= a for a, b in zip(seq, seq[1:])):
        raise ValueError(f"{name} must be strictly increasing non-negative integers, got {seq}")
    return seq


@dataclass(frozen=True)
class ExcitationConfig:
    p_plus: tuple = ()
    p_minus: tuple = ()
    h_plus: tuple = ()
    h_minus: tuple = ()

    def __post_init__(self):
        for name in ("p_plus", "p_minus", "h_plus", "h_minus"):
            object.__setattr__(self, name, _strictly_increasing(getattr(self, name), name))

    @property
    def n_holes(self) -> int:
        return len(self.h_plus) + len(self.h_minus)

    @property
    def n_particles(self) -> int:
        return len(self.p_plus) + len(self.p_minus)

    @property
    def s(self) -> int:
        return self.n_holes - self.n_particles

    def mirrored(self) -> "ExcitationConfig":
        return ExcitationConfig(self.p_minus, self.p_plus, self.h_minus, self.h_plus)

    def roots(self, T: float) -> list[tuple[str, int, int, complex]]:
        """(kind, sigma, quantum number, target value of u) for every root."""
        out = []
        for kind, sigma, nums in (("hole", 1, self.h_plus), ("hole", -1, self.h_minus),
                                  ("particle", 1, self.p_plus), ("particle", -1, self.p_minus)):
            sign = -1 if kind == "hole" else 1
            for k in nums:
                out.append((kind, sigma, k, sign * sigma * 2j * math.pi * T * (k + 0.5)))
        return out


@dataclass(frozen=True)
class NlieSolution:
    params: ModelParams
    config: ExcitationConfig
    contour: Contour
    u_values: np.ndarray
    ln_values: np.ndarray
    holes: np.ndarray
    particles: np.ndarray
    residual: float
    root_residual: float
    monodromy: complex
    iterations: int
    warnings: tuple = field(default=())

    @property
    def s(self) -> int:
        return self.config.s

    @property
    def roots(self) -> np.ndarray:
        return np.concatenate([self.holes, self.particles])

    @property
    def _signs(self) -> np.ndarray:
        return np.concatenate([-np.ones(len(self.holes)), np.ones(len(self.particles))])

    def u(self, xi):
        """Continuation of u off the nodes through the integral representation."""
        return _u_eval(xi, self.params, self.s, self.roots, self._signs, self.contour, self.ln_values)

    def du(self, xi):
        return _du_eval(xi, self.params, self.roots, self._signs, self.contour, self.ln_values)

    def to_json(self, path: str | Path | None = None) -> dict:
        c = self.contour
        rec = {
            "params": dict(J=self.params.J, delta=self.params.delta, h=self.params.h, T=self.params.T),
            "config": dict(p_plus=list(self.config.p_plus), p_minus=list(self.config.p_minus),
                           h_plus=list(self.config.h_plus), h_minus=list(self.config.h_minus)),
            "nodes": [[z.real, z.imag] for z in c.nodes],
            "branch": [str(b) for b in c.labels],
            "u": [[z.real, z.imag] for z in self.u_values],
            "holes": [[z.real, z.imag] for z in self.holes],
            "particles": [[z.real, z.imag] for z in self.particles],
            "zeros": [[z.real, z.imag] for z in c.zeros],
            "residual": self.residual,
            "root_residual": self.root_residual,
            "monodromy": [self.monodromy.real, self.monodromy.imag],
            "iterations": self.iterations,
        }
        if path is not None:
            Path(path).write_text(json.dumps(rec, indent=1))
        return rec


# ---------------------------------------------------------------------------
# evaluation of the right-hand side


def _theta_sum(xi, roots, signs, params):
    xi = np.asarray(xi, dtype=complex)
    out = np.zeros(xi.shape, dtype=complex)
    for r, c in zip(roots, signs):
        out += c * phase_mod2pi(xi - r, params)
    return out


def _theta_sum_deriv(xi, roots, signs, params):
    xi = np.asarray(xi, dtype=complex)
    out = np.zeros(xi.shape, dtype=complex)
    for r, c in zip(roots, signs):
        out += c * phase_deriv(xi - r, params)
    return out


def _u_eval(xi, params, s, roots, signs, contour, ln):
    xi = np.asarray(xi, dtype=complex)
    T = params.T
    lam, w = contour.nodes, contour.weights
    conv = (kernel_matrix(xi, lam, params) @ (w * ln)).reshape(xi.shape)
    out = (bare_energy(xi, params, check=False) - 1j * math.pi * s * T
           - 1j * T * _theta_sum(xi, roots, signs, params) - T * conv)
    return out if np.ndim(out) else complex(out)


def _du_eval(xi, params, roots, signs, contour, ln):
    xi = np.asarray(xi, dtype=complex)
    T = params.T
    lam, w = contour.nodes, contour.weights
    conv = (kernel_matrix(xi, lam, params, deriv=True) @ (w * ln)).reshape(xi.shape)
    out = (bare_energy_deriv(xi, params) - 1j * T * _theta_sum_deriv(xi, roots, signs, params)
           - T * conv)
    return out if np.ndim(out) else complex(out)


# ---------------------------------------------------------------------------
# solver


@dataclass
class _State:
    contour: Contour
    kmat: np.ndarray
    U: np.ndarray
    roots: np.ndarray


def _kernel_matrix(contour, params):
    lam, w = contour.nodes, contour.weights
    if params.sin2zeta == 0.0:
        return None
    return kernel_matrix(lam, lam, params) * w[None, :]


def _residuals(st, params, s, signs, targets):
    T = params.T
    lam = st.contour.nodes
    ln = unwrap_log(st.U, st.contour, T)
    rhs = bare_energy(lam, params, check=False) - 1j * math.pi * s * T \
        - 1j * T * _theta_sum(lam, st.roots, signs, params)
    if st.kmat is not None:
        rhs = rhs - T * (st.kmat @ ln)
    F = st.U - rhs
    # only e^{-U/T} enters Ln, so U is defined modulo 2 pi i T; reducing F keeps it
    # continuous when a branch line of theta(lam - root) sweeps across nodes
    F = F - 2j * math.pi * T * np.round(F.imag / (2 * math.pi * T))
    G = np.array([_u_eval(r, params, s, st.roots, signs, st.contour, ln) - t
                  for r, t in zip(st.roots, targets)], dtype=complex)
    return F, G, ln


def _newton_step(st, params, s, signs, F, G, ln):
    T = params.T
    lam, w = st.contour.nodes, st.contour.weights
    N, n = len(lam), len(st.roots)
    f = fermi_factor(st.U / T)
    # dF/dU = I - Kw diag(f);  dF/dr_b = -i T c_b theta'(lam - r_b)
    B = np.empty((N, n), dtype=complex)
    for b, (r, c) in enumerate(zip(st.roots, signs)):
        B[:, b] = -1j * T * c * phase_deriv(lam - r, params)
    C = np.empty((n, N), dtype=complex)
    D = np.empty((n, n), dtype=complex)
    for a, r in enumerate(st.roots):
        C[a] = kernel(r - lam, params, check=False) * w * f
        others = [(rb, cb) for b, (rb, cb) in enumerate(zip(st.roots, signs)) if b != a]
        D[a, a] = bare_energy_deriv(r, params) \
            - 1j * T * sum(cb * phase_deriv(r - rb, params) for rb, cb in others) \
            - T * np.sum(kernel_deriv(r - lam, params) * w * ln)
        for b, (rb, cb) in enumerate(zip(st.roots, signs)):
            if b != a:
                D[a, b] = 1j * T * cb * phase_deriv(r - rb, params)
    if st.kmat is None:
        # K = 0: the U block is the identity
        AinvF, AinvB = F, B
    else:
        A = np.eye(N, dtype=complex) - st.kmat * f[None, :]
        sol = np.linalg.solve(A, np.column_stack([F, B]))
        AinvF, AinvB = sol[:, 0], sol[:, 1:]
    if n:
        S = D - C @ AinvB
        dr = np.linalg.solve(S, G - C @ AinvF)
        dU = AinvF - AinvB @ dr
    else:
        dr, dU = np.zeros(0, dtype=complex), AinvF
    return dU, dr


def _norm(F, G):
    return max(np.max(np.abs(F)) if F.size else 0.0, np.max(np.abs(G)) if G.size else 0.0)


def _solve_fixed_contour(st, params, s, signs, targets, tol, max_iter, method, alpha):
    it = 0
    F, G, ln = _residuals(st, params, s, signs, targets)
    res = _norm(F, G)
    while res > tol and it < max_iter:
        it += 1
        if method == "newton":
            dU, dr = _newton_step(st, params, s, signs, F, G, ln)
            step = 1.0
            while True:
                trial = _State(st.contour, st.kmat, st.U - step * dU, st.roots - step * dr)
                F2, G2, ln2 = _residuals(trial, params, s, signs, targets)
                r2 = _norm(F2, G2)
                if r2 < res:
                    break
                step *= 0.5
                if step < 1e-3:
                    # no descent along the Newton direction: stalled, report to the caller
                    log.debug("nlie newton line search failed at residual %.3e", res)
                    return st, F, G, ln, res, it
        else:
            # damped Picard sweep for u; roots by one Newton step each
            new_U = st.U - alpha * F
            new_r = st.roots.copy()
            for a, r in enumerate(st.roots):
                du = _du_eval(r, params, st.roots, signs, st.contour, ln) \
                    + 1j * params.T * signs[a] * phase_deriv(0j, params)
                new_r[a] = r - G[a] / du
            trial = _State(st.contour, st.kmat, new_U, new_r)
            F2, G2, ln2 = _residuals(trial, params, s, signs, targets)
            r2 = _norm(F2, G2)
        st, F, G, ln, res = trial, F2, G2, ln2, r2
        log.debug("nlie %s iteration %d residual %.3e", method, it, res)
    return st, F, G, ln, res, it


def _locate_zero(u, du, z0, tol=1e-13, maxit=100, max_step=0.1):
    z = complex(z0)
    for _ in range(maxit):
        step = u(z) / du(z)
        if not np.isfinite(step):
            break
        if abs(step) > max_step:
            step *= max_step / abs(step)
        z -= step
        if abs(step) < tol:
            return z
    raise ContourError("could not locate the zero of u near the Fermi point")


def _crossing(u, du, z0, cap):
    """Zero of u near z0; if it lies higher than ``cap`` the crossing is lowered to the cap.

    Any crossing between the hole-like and the next root gives the same
    solution, so lowering only trades the through-zero property for distance
    from the poles of the bare functions.
    """
    z = _locate_zero(u, du, z0)
    if abs(z.imag) > cap:
        z = complex(z.real, math.copysign(cap, z.imag))
    return z


def _scale(dressed, T):
    return math.pi * T / max(abs(float(np.real(dressed.eps_deriv(dressed.q)))), 1e-3)


def _initial_roots(dressed, config, T):
    s = config.s
    out = []
    for kind, sigma, k, target in config.roots(T):
        goal = target + 1j * math.pi * s * T
        z = complex(sigma * dressed.q)
        for _ in range(100):
            step = (dressed.eps(z) - goal) / dressed.eps_deriv(z)
            if not np.isfinite(step):
                raise ConvergenceError("initial root guess from the dressed energy failed")
            if abs(step) > 0.1:
                step *= 0.1 / abs(step)
            z -= step
            if abs(step) < 1e-14:
                break
        else:
            raise ConvergenceError("initial root guess from the dressed energy failed")
        out.append((kind, z, target))
    return out


def solve_excited(params: ModelParams, dressed: DressedData, config: ExcitationConfig,
                  tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER, method: str = "newton",
                  alpha: float = 0.5, contour_kwargs: dict | None = None,
                  max_rebuilds: int = 20) -> NlieSolution:
    """Solve the NLIE with the driving term and quantization conditions of ``config``."""
    if params.T > 5 * params.J:
        raise ValueError("temperature above the solver-stability ceiling T <= 5J")
    if method not in ("newton", "picard"):
        raise ValueError("method must be 'newton' or 'picard'")
    dp = dressed.params
    if (dp.J, dp.delta, dp.h) != (params.J, params.delta, params.h):
        raise ValueError("dressed functions were computed for different J, delta or h")
    contour_kwargs = dict(contour_kwargs or {})
    T, s = params.T, config.s
    init = _initial_roots(dressed, config, T)
    kinds = [k for k, _, _ in init]
    roots = np.array([z for _, z, _ in init], dtype=complex)
    targets = np.array([t for _, _, t in init], dtype=complex)
    signs = np.array([-1.0 if k == "hole" else 1.0 for k in kinds])
    # order: holes first, particles after, as in NlieSolution
    order = np.argsort([0 if k == "hole" else 1 for k in kinds], kind="stable")
    roots, targets, signs = roots[order], targets[order], signs[order]
    _check_collisions(roots)

    def u0(xi):
        xi = np.asarray(xi, dtype=complex)
        return dressed.eps(xi) - 1j * math.pi * s * T - 1j * T * _theta_sum(xi, roots, signs, params)

    def du0(xi):
        return dressed.eps_deriv(xi) - 1j * T * _theta_sum_deriv(xi, roots, signs, params)

    cap = max_lift(params)
    zeros = tuple(_crossing(u0, du0, sg * dressed.q, cap) for sg in (-1, 1))
    scale = _scale(dressed, T)
    contour = build_contour(params, zeros, scale, **contour_kwargs)
    U = u0(contour.nodes)
    total_it = 0
    for rebuild in range(max_rebuilds):
        st = _State(contour, _kernel_matrix(contour, params), U, roots)
        st, F, G, ln, res, it = _solve_fixed_contour(
            st, params, s, signs, targets, tol, max_iter - total_it, method, alpha)
        total_it += it
        if res > tol:
            raise ConvergenceError("NLIE iteration did not converge", res)
        roots = st.roots

        def uc(xi, _st=st, _ln=ln):
            return _u_eval(xi, params, s, _st.roots, signs, _st.contour, _ln)

        def duc(xi, _st=st, _ln=ln):
            return _du_eval(xi, params, _st.roots, signs, _st.contour, _ln)

        new_zeros = tuple(_crossing(uc, duc, z, cap) for z in contour.zeros)
        shift = max(abs(a - b) for a, b in zip(new_zeros, contour.zeros))
        log.debug("rebuild %d: zero shift %.3e", rebuild, shift)
        if shift < 1e-11:
            break
        contour = build_contour(params, new_zeros, scale, **contour_kwargs)
        U = uc(contour.nodes)
    else:
        raise ConvergenceError("contour zeros did not settle", res)

    _check_collisions(roots)
    notes = []
    for r, kind in zip(roots, ["hole" if c < 0 else "particle" for c in signs]):
        inside = contour.is_interior(r)
        if (kind == "hole") != inside:
            raise ConvergenceError(f"{kind} root {r:.6g} on the wrong side of the contour", res)
        d = np.min(np.abs(contour.nodes - r))
        if d < PROXIMITY:
            msg = f"{kind} root {r:.6g} within {d:.2e} of the contour"
            warnings.warn(msg)
            notes.append(msg)
        if abs(duc(r)) < 1e-8:
            raise ConvergenceError(f"u' vanishes at the {kind} root {r:.6g}", res)
    for z, sg in zip(contour.zeros, (-1, 1)):
        if sg * np.real(duc(z)) <= 0:
            notes.append(f"sign condition on u' violated at zero {z:.6g}")
    mono = check_monodromy(uc, duc, contour, T)
    nh = int(np.sum(signs < 0))
    return NlieSolution(params, config, contour, st.U, ln, roots[:nh], roots[nh:],
                        float(np.max(np.abs(F))), float(np.max(np.abs(G))) if G.size else 0.0,
                        mono, total_it, tuple(notes))


def solve_dominant(params: ModelParams, dressed: DressedData, tol: float = DEFAULT_TOL,
                   **kwargs) -> NlieSolution:
    """Auxiliary function of the dominant state: no roots, s = 0."""
    return solve_excited(params, dressed, ExcitationConfig(), tol=tol, **kwargs)


def _check_collisions(roots):
    for i in range(len(roots)):
        for j in range(i):
            if abs(roots[i] - roots[j]) < ROOT_COLLISION:
                raise ConvergenceError("root collision: invalid excitation configuration")


def eval_Ln(sol: NlieSolution, nu: complex | None = None, anchor: int = 0, node: int | None = None):
    """Contour logarithm ln[1 + e^{-u/T}] at a point of the contour.

    The value is continued along the contour from the node ``anchor``, where the
    principal branch is taken.  ``nu`` is matched to its closest node and the
    remaining short step is taken along the straight segment.
    """
    T = sol.params.T
    ln = unwrap_log(sol.u_values, sol.contour, T, anchor=anchor)
    nodes = sol.contour.nodes
    if node is not None:
        return complex(ln[node])
    j = int(np.argmin(np.abs(nodes - nu)))
    step = log1p_exp(-sol.u(nu) / T) - log1p_exp(-sol.u_values[j] / T)
    step -= 2j * math.pi * round(step.imag / (2 * math.pi))
    return complex(ln[j] + step)
