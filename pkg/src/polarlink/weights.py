"""Exponent matrices, simpliciality and polar/radial weight systems."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from . import rational
from .mixedpoly import MixedPolynomial


class WeightError(ValueError):
    """No unique weight system exists for the polynomial."""


class NotFull(WeightError):
    """Fewer monomials than variables: the weight is not determined."""


class SingularSystem(WeightError):
    """The exponent system has rank below n."""


class InconsistentSystem(WeightError):
    """Monomials demand incompatible degrees, so no weight exists."""


class NoPositiveDegree(WeightError):
    pass


@dataclass(frozen=True)
class ExponentMatrices:
    """``N`` and ``M`` as n x m integer arrays; column i is monomial i."""

    N: np.ndarray
    M: np.ndarray

    @property
    def n(self) -> int:
        return self.N.shape[0]

    @property
    def m(self) -> int:
        return self.N.shape[1]

    def polar_rows(self) -> list[list[int]]:
        """Rows of ᵀ(N−M), one per monomial."""
        return (self.N - self.M).T.tolist()

    def radial_rows(self) -> list[list[int]]:
        return (self.N + self.M).T.tolist()


@dataclass(frozen=True)
class WeightSystem:
    kind: str  # "polar" | "radial"
    weights: tuple[int, ...]
    degree: int

    def __post_init__(self):
        if self.kind not in ("polar", "radial"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.degree <= 0:
            raise ValueError("degree must be positive")
        if gcd(*self.weights) != 1:
            raise ValueError("weights must have gcd 1")

    @property
    def mixed_signs(self) -> bool:
        return min(self.weights) < 0 < max(self.weights)


def exponent_matrices(f: MixedPolynomial) -> ExponentMatrices:
    return ExponentMatrices(N=np.asarray(f.N).T.copy(), M=np.asarray(f.M).T.copy())


def is_simplicial(f: MixedPolynomial) -> bool:
    em = exponent_matrices(f)
    if em.m > em.n:
        return False
    return (
        rational.rank(em.polar_rows()) == em.m
        and rational.rank(em.radial_rows()) == em.m
    )


def is_full(f: MixedPolynomial) -> bool:
    return len(f) == f.n


def _normalize(x: list[Fraction], kind: str) -> WeightSystem:
    # x solves R x = 1; the weight is the smallest positive multiple of x in Z^n
    denom = lcm(*(v.denominator for v in x))
    ints = [int(v * denom) for v in x]
    g = gcd(*ints)
    if g == 0:
        raise NoPositiveDegree("zero weight vector")
    weights = tuple(v // g for v in ints)
    degree = Fraction(denom, g)
    if degree <= 0 or degree.denominator != 1:
        raise NoPositiveDegree(f"degree {degree} is not a positive integer")
    return WeightSystem(kind, weights, int(degree))


def _solve_weight(rows: list[list[int]], n: int, kind: str) -> WeightSystem:
    m = len(rows)
    if m < n:
        raise NotFull(f"{m} monomials for {n} variables: weight is not unique")
    if rational.rank(rows) < n:
        raise SingularSystem(f"{kind} exponent matrix has rank < {n}")
    try:
        x = rational.solve(rows, [1] * m)
    except rational.InconsistentSystem as exc:
        raise InconsistentSystem(f"no {kind} weight: monomial degrees are incompatible") from exc
    return _normalize(x, kind)


def polar_weight(f: MixedPolynomial) -> WeightSystem:
    """Solve ᵀ(N−M) p = d_p (1, ..., 1) exactly.

    Full polynomials give a square system. Overdetermined systems (more
    monomials than variables) are accepted when they are consistent and of
    rank n, which covers convex combinations such as f_{II,t}.
    """
    em = exponent_matrices(f)
    return _solve_weight(em.polar_rows(), em.n, "polar")


def radial_weight(f: MixedPolynomial) -> WeightSystem:
    em = exponent_matrices(f)
    return _solve_weight(em.radial_rows(), em.n, "radial")


def weight_residual(f: MixedPolynomial, w: WeightSystem) -> list[int]:
    """Exact per-monomial degree defect; all zeros iff ``w`` grades ``f``."""
    em = exponent_matrices(f)
    rows = em.polar_rows() if w.kind == "polar" else em.radial_rows()
    return [sum(r * p for r, p in zip(row, w.weights)) - w.degree for row in rows]


def polar_action(w: WeightSystem, s: complex, z: np.ndarray) -> np.ndarray:
    """s ∘ z = (s^{p_1} z_1, ..., s^{p_n} z_n) for s on the unit circle."""
    return np.asarray(z, dtype=complex) * s ** np.asarray(w.weights)


def check_polar_homogeneity(
    f: MixedPolynomial, w: WeightSystem, samples: int = 100, seed: int = 0
) -> float:
    """Max of |f(s∘z) − s^d f(z)| / (1 + |f(z)|) over random z and s ∈ S¹."""
    if w.kind != "polar":
        raise ValueError("check_polar_homogeneity needs a polar weight system")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z = rng.standard_normal(f.n) + 1j * rng.standard_normal(f.n)
        s = np.exp(1j * rng.uniform(0, 2 * np.pi))
        fz = f.eval(z)
        res = abs(f.eval(polar_action(w, s, z)) - s ** w.degree * fz) / (1 + abs(fz))
        worst = max(worst, res)
    return worst


def check_radial_homogeneity(
    f: MixedPolynomial, w: WeightSystem, samples: int = 100, seed: int = 0
) -> float:
    """Max of |f(r∘z) − r^d f(z)| / (r^d (1 + |f(z)|)) over random z and r ∈ [0.5, 2]."""
    if w.kind != "radial":
        raise ValueError("check_radial_homogeneity needs a radial weight system")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z = rng.standard_normal(f.n) + 1j * rng.standard_normal(f.n)
        r = rng.uniform(0.5, 2.0)
        fz = f.eval(z)
        zr = z * r ** np.asarray(w.weights, dtype=float)
        scale = r ** w.degree
        res = abs(f.eval(zr) - scale * fz) / (scale * (1 + abs(fz)))
        worst = max(worst, res)
    return worst
