"""The canonical diffeomorphism φ of (C*)^n carrying fibres of f to fibres of g.

Writing z_j = ρ_j e^{iθ_j}, φ keeps the arguments and replaces the moduli by
ξ = exp(E log ρ), where E solves ᵀ(N−M) E = ᵀ(N+M). Then every monomial of the
associated Laurent polynomial g(z) = Σ c_i z^{ν_i − μ_i} has the same modulus
and argument at φ(z) as the matching monomial of f at z, so g∘φ = f.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rational
from .mixedpoly import MixedPolynomial
from .weights import NotFull, SingularSystem, exponent_matrices


class OnCoordinatePlane(ValueError):
    """φ is only defined where every coordinate is nonzero."""


@dataclass(frozen=True, eq=False)
class LaurentPolynomial:
    coeffs: np.ndarray
    exponents: np.ndarray  # (m, n) integers, possibly negative

    @property
    def n(self) -> int:
        return self.exponents.shape[1]

    def eval(self, z) -> complex:
        z = np.asarray(z, dtype=complex)
        if np.any(z == 0) and np.any(self.exponents < 0):
            raise OnCoordinatePlane("Laurent polynomial evaluated on a coordinate plane")
        return complex(np.sum(self.coeffs * np.prod(z ** self.exponents, axis=1)))

    __call__ = eval


def associated_laurent(f: MixedPolynomial) -> LaurentPolynomial:
    return LaurentPolynomial(np.array(f.coeffs), np.asarray(f.N - f.M))


@dataclass(frozen=True, eq=False)
class TorusMap:
    E: tuple[tuple[Fraction, ...], ...]
    source: MixedPolynomial
    target: LaurentPolynomial

    @property
    def n(self) -> int:
        return len(self.E)

    def E_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.E])

    def inverse(self) -> "TorusMap":
        """φ^{-1}: log ρ = E^{-1} log ξ, i.e. ᵀ(N+M)^{-1} ᵀ(N−M)."""
        Einv = rational.inverse([list(row) for row in self.E])
        return TorusMap(tuple(tuple(row) for row in Einv), self.source, self.target)

    def with_E(self, E) -> "TorusMap":
        return TorusMap(tuple(tuple(Fraction(x) for x in row) for row in E), self.source, self.target)

    def fraction_strings(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.E]


def build_torus_map(f: MixedPolynomial) -> TorusMap:
    em = exponent_matrices(f)
    if em.m != em.n:
        raise NotFull(f"torus map needs a full polynomial (m = n), got m={em.m}, n={em.n}")
    minus, plus = em.polar_rows(), em.radial_rows()
    if rational.bareiss_det(minus) == 0:
        raise SingularSystem("det ᵀ(N−M) = 0")
    E = rational.matmul(rational.inverse(minus), plus)
    return TorusMap(tuple(tuple(row) for row in E), f, associated_laurent(f))


def apply_torus_map(tm: TorusMap, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape != (tm.n,):
        raise ValueError(f"expected a point in C^{tm.n}")
    rho = np.abs(z)
    if np.any(rho == 0):
        raise OnCoordinatePlane("φ is undefined on the coordinate planes")
    phase = z / rho
    xi = np.exp(tm.E_float() @ np.log(rho))
    return xi * phase


def check_fiber_preservation(tm: TorusMap, samples: int = 100, seed: int = 0) -> float:
    """Max of |g(φ(z)) − f(z)| / (1 + |f(z)|) over random torus points."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        rho = np.exp(rng.uniform(-1.0, 1.0, tm.n))
        z = rho * np.exp(1j * rng.uniform(0, 2 * np.pi, tm.n))
        fz = tm.source.eval(z)
        worst = max(worst, abs(tm.target.eval(apply_torus_map(tm, z)) - fz) / (1 + abs(fz)))
    return worst


def exact_residual(tm: TorusMap) -> list[list[Fraction]]:
    """ᵀ(N−M) E − ᵀ(N+M) in exact arithmetic (all zeros for a valid map)."""
    em = exponent_matrices(tm.source)
    lhs = rational.matmul(em.polar_rows(), [list(row) for row in tm.E])
    plus = em.radial_rows()
    return [[lhs[i][j] - plus[i][j] for j in range(tm.n)] for i in range(tm.n)]


def extendability_report(tm: TorusMap) -> dict:
    """Negative exponents of E block a continuous extension across z_j = 0.

    Diagonal E with positive entries (the mixed Brieskorn shape) extends;
    any other E without negative off-diagonal entries is reported as
    "no obstruction found", which is weaker than a proof of extendability.
    """
    n = tm.n
    negatives = [(i, j) for i in range(n) for j in range(n) if tm.E[i][j] < 0]
    off_diag_negative = [(i, j) for i, j in negatives if i != j]
    diagonal = all(tm.E[i][j] == 0 for i in range(n) for j in range(n) if i != j)
    if off_diag_negative:
        verdict = "non-extendable across coordinate planes"
    elif diagonal and not negatives:
        verdict = "extendable"
    else:
        verdict = "no obstruction found"
    return {
        "negative_entries": [list(p) for p in negatives],
        "diagonal": diagonal,
        "verdict": verdict,
        "E": tm.fraction_strings(),
    }
