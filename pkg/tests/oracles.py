"""Independent reference implementations used by the tests."""
from __future__ import annotations

import math

import mpmath as mp
import numpy as np


def ff_fermi_point(J: float, h: float) -> float:
    return 0.5 * math.acosh(4 * J / h)


def ff_fermi_velocity(J: float, h: float) -> float:
    return math.sqrt(16 * J * J - h * h)


def kernel_integral(delta: float) -> float:
    """int_R K = 1 - 2 zeta / pi."""
    return 1 - 2 * math.acos(delta) / math.pi


def mp_gauss_legendre(N: int, dps: int):
    """Gauss-Legendre rule refined by Newton from the double-precision nodes."""
    with mp.workdps(dps):
        x0, _ = np.polynomial.legendre.leggauss(N)
        nodes, weights = [], []
        for x in x0:
            x = mp.mpf(float(x))
            for _ in range(6):
                p0, p1 = mp.mpf(1), x
                for k in range(2, N + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = N * (x * p1 - p0) / (x * x - 1)
                x -= p1 / dp
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
        return nodes, weights


def mp_dressed_energy(J: float, delta: float, h: float, q: float, N: int, probes, dps: int = 50):
    """Nystrom solution of eps + int_{-q}^{q} K eps = eps0 in extended precision, at ``probes``."""
    with mp.workdps(dps):
        zeta = mp.acos(mp.mpf(delta))
        s2z = mp.sin(2 * zeta)
        Q = mp.mpf(q)

        def K(x):
            return s2z / (mp.pi * (mp.cosh(2 * x) - mp.cos(2 * zeta)))

        def eps0(x):
            return h - 2 * J * mp.sin(zeta) ** 2 / (mp.sinh(x + 1j * zeta / 2) * mp.sinh(x - 1j * zeta / 2))

        t, w = mp_gauss_legendre(N, dps)
        x = [Q * ti for ti in t]
        w = [Q * wi for wi in w]
        A = mp.matrix(N, N)
        b = mp.matrix(N, 1)
        for i in range(N):
            b[i] = mp.re(eps0(x[i]))
            for j in range(N):
                A[i, j] = (1 if i == j else 0) + K(x[i] - x[j]) * w[j]
        f = mp.lu_solve(A, b)
        return [mp.re(eps0(lam)) - mp.fsum(K(lam - x[j]) * w[j] * f[j] for j in range(N))
                for lam in (mp.mpf(p) for p in probes)]
