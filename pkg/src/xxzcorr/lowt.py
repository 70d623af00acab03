"""Low-temperature combinatorics of the particle-hole exponents.

For integer configurations (p, h) on the two Fermi points the O(T) part of
Delta is Delta_0 = (2 i pi / v_F) X with

    X = (Z l- - r/2Z)^2 + (1 - r^2)/4Z^2 + sum_s n_p^s n_h^s (1 + s r)
        + sum_s (1 + s r) [sum_a (p_a^s - (a-1)) + sum_a (h_a^s - (a-1))],

r = v_F t/m and l^s = s (n_p^s - n_h^s).  The r^2 terms cancel, so X is kept
as exact rational coefficients of Z^2, 1/Z^2, 1 and r.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

DEFAULT_NMAX = 3
DEFAULT_M = 6
TIE_RTOL = 1e-12


def _check_list(name: str, xs: tuple[int, ...]) -> None:
    if any(not isinstance(x, int) or x < 0 for x in xs):
        raise ValueError(f"{name} entries must be non-negative integers")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError(f"{name} must be strictly increasing")


@dataclass(frozen=True, order=True)
class LowTConfig:
    """Particle and hole quantum numbers on the + and - Fermi points."""
    p_plus: tuple[int, ...] = ()
    p_minus: tuple[int, ...] = ()
    h_plus: tuple[int, ...] = ()
    h_minus: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("p_plus", "p_minus", "h_plus", "h_minus"):
            xs = tuple(getattr(self, name))
            object.__setattr__(self, name, xs)
            _check_list(name, xs)
        if self.n_p_plus + self.n_p_minus + 1 != self.n_h_plus + self.n_h_minus:
            raise ValueError("sector constraint n_p+ + n_p- + 1 = n_h+ + n_h- violated")

    @property
    def n_p_plus(self) -> int:
        return len(self.p_plus)

    @property
    def n_p_minus(self) -> int:
        return len(self.p_minus)

    @property
    def n_h_plus(self) -> int:
        return len(self.h_plus)

    @property
    def n_h_minus(self) -> int:
        return len(self.h_minus)

    @property
    def ell_plus(self) -> int:
        return self.n_p_plus - self.n_h_plus

    @property
    def ell_minus(self) -> int:
        return -(self.n_p_minus - self.n_h_minus)

    def offsets(self, sign: int) -> int:
        ps, hs = (self.p_plus, self.h_plus) if sign > 0 else (self.p_minus, self.h_minus)
        return sum(x - a for a, x in enumerate(ps)) + sum(x - a for a, x in enumerate(hs))

    def encode(self) -> str:
        f = lambda xs: ";".join(map(str, xs))
        return f"p+[{f(self.p_plus)}] p-[{f(self.p_minus)}] h+[{f(self.h_plus)}] h-[{f(self.h_minus)}]"


MINIMIZER = LowTConfig(h_plus=(0,))


@dataclass(frozen=True)
class Delta0Terms:
    """X = a Z^2 + b / Z^2 + c + d r with exact rationals; Delta_0 = (2 i pi / v_F) X."""
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def x(self, Zq: float, r: float) -> float:
        return float(self.a) * Zq ** 2 + float(self.b) / Zq ** 2 + float(self.c) + float(self.d) * r

    def value(self, vF: float, Zq: float, t_over_m: float) -> complex:
        return 2j * math.pi / vF * self.x(Zq, vF * t_over_m)


def delta0_terms(config: LowTConfig) -> Delta0Terms:
    lm = config.ell_minus
    packed = {s: config.offsets(s) for s in (1, -1)}
    npnh = {1: config.n_p_plus * config.n_h_plus, -1: config.n_p_minus * config.n_h_minus}
    return Delta0Terms(
        a=Fraction(lm * lm),
        b=Fraction(1, 4),
        c=Fraction(sum(npnh[s] + packed[s] for s in (1, -1))),
        d=Fraction(-lm + sum(s * (npnh[s] + packed[s]) for s in (1, -1))),
    )


def delta0_parts(config: LowTConfig, vF: float, Zq: float, t_over_m: float) -> tuple[complex, complex]:
    """(Delta_0^(1), Delta_0^(2)) as displayed, evaluated in floating point."""
    r = vF * t_over_m
    lm = config.ell_minus
    pre = 2j * math.pi / vF
    d1 = (Zq * lm - r / (2 * Zq)) ** 2 + (1 - r * r) / (4 * Zq ** 2) \
        + config.n_p_plus * config.n_h_plus * (1 + r) + config.n_p_minus * config.n_h_minus * (1 - r)
    d2 = (1 + r) * config.offsets(1) + (1 - r) * config.offsets(-1)
    return pre * d1, pre * d2


def delta0(config: LowTConfig, dressed, t_over_m: float = 0.0) -> complex:
    """Delta_0 = Delta_0^(1) + Delta_0^(2); ``dressed`` supplies vF and Zq."""
    return delta0_terms(config).value(dressed.vF, dressed.Zq, t_over_m)


def _subsets(n: int, M: int) -> Iterator[tuple[int, ...]]:
    return itertools.combinations(range(M), n)


def enumerate_configs(n_max: int = DEFAULT_NMAX, M: int = DEFAULT_M) -> Iterator[LowTConfig]:
    """All configs with at most n_max holes and quantum numbers in [0, M-1]."""
    for nh in range(1, n_max + 1):
        np_ = nh - 1
        for nhp in range(nh + 1):
            for npp in range(np_ + 1):
                for hp in _subsets(nhp, M):
                    for hm in _subsets(nh - nhp, M):
                        for pp in _subsets(npp, M):
                            for pm in _subsets(np_ - npp, M):
                                yield LowTConfig(pp, pm, hp, hm)


def config_count(n_max: int = DEFAULT_NMAX, M: int = DEFAULT_M) -> int:
    """Closed-form size of the enumeration: sum_n C(2M, n) C(2M, n-1)."""
    return sum(math.comb(2 * M, n) * math.comb(2 * M, n - 1) for n in range(1, n_max + 1))


@dataclass(frozen=True)
class LowTResult:
    config: LowTConfig
    value: complex
    ties: tuple[LowTConfig, ...]
    count: int
    table: tuple[tuple[LowTConfig, complex], ...]


def minimize_im_delta0(dressed, t_over_m: float = 0.0, n_max: int = DEFAULT_NMAX,
                       M: int = DEFAULT_M) -> LowTResult:
    """Exhaustive argmin of Im Delta_0; ties (to TIE_RTOL) are reported in order."""
    vF, Zq = dressed.vF, dressed.Zq
    if abs(vF * t_over_m) >= 1:
        raise ValueError("|v_F t/m| must be < 1")
    if n_max < 2 or M < 3:
        raise ValueError("bounds require n_max >= 2 and M >= 3")
    table = tuple((c, delta0_terms(c).value(vF, Zq, t_over_m)) for c in enumerate_configs(n_max, M))
    best = min(v.imag for _, v in table)
    tol = TIE_RTOL * max(1.0, abs(best))
    winners = sorted(c for c, v in table if v.imag - best <= tol)
    value = dict(table)[winners[0]]
    return LowTResult(winners[0], value, tuple(winners[1:]), len(table), table)


def write_table(dest, result: LowTResult, header: str | None = None) -> None:
    """Audit table of every enumerated config; ``dest`` is a path or a text stream."""
    if not hasattr(dest, "write"):
        with open(dest, "w", newline="") as fh:
            return write_table(fh, result, header)
    if header:
        dest.write(f"# {header}\n")
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["config", "n_h", "ell_plus", "ell_minus", "ReDelta0", "ImDelta0"])
    for c, v in result.table:
        w.writerow([c.encode(), c.n_h_plus + c.n_h_minus, c.ell_plus, c.ell_minus,
                    repr(float(v.real)), repr(float(v.imag))])
