"""The cyclic family f_{II,t} = (1 − t) f_II + t g_II and its bamboo/Brieskorn relatives.

Variable indices are 0-based throughout; index arithmetic is mod n.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

from .mixedpoly import MixedPolynomial


@dataclass(frozen=True)
class CyclicFamilySpec:
    n: int
    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if self.n < 2:
            raise ValueError("the cyclic family needs n >= 2")
        if len(self.a) != self.n or len(self.b) != self.n:
            raise ValueError(f"a and b must both have length n={self.n}")

    @classmethod
    def of(cls, a: Sequence[int], b: Sequence[int]) -> "CyclicFamilySpec":
        return cls(len(a), tuple(a), tuple(b))

    def as_dict(self) -> dict:
        return {"n": self.n, "a": list(self.a), "b": list(self.b)}


def validate_spec(spec: CyclicFamilySpec, require_b: bool = True) -> list[str]:
    """List the violated hypotheses; an empty list means the spec is admissible.

    ``require_b=False`` drops assumption (b) (some a_k >= 2), which is only
    needed for simpliciality when n is even.
    """
    problems = []
    bad_a = [j for j, x in enumerate(spec.a) if x < 1]
    bad_b = [j for j, x in enumerate(spec.b) if x < 0]
    if bad_a:
        problems.append(f"a_j >= 1 fails at j={bad_a}")
    if bad_b:
        problems.append(f"b_j >= 0 fails at j={bad_b}")
    if not any(x >= 1 for x in spec.b):
        problems.append("assumption (a): no b_j >= 1, f_II has no conjugate variable")
    if require_b and not any(x >= 2 for x in spec.a):
        problems.append("assumption (b): no a_k >= 2")
    return problems


@dataclass(frozen=True)
class FamilyMember:
    spec: CyclicFamilySpec
    t: float
    poly: MixedPolynomial

    @property
    def n(self) -> int:
        return self.spec.n

    def __call__(self, z) -> complex:
        return self.poly.eval(z)


def _unit(n: int, j: int, k: int = 1) -> list[int]:
    e = [0] * n
    e[j] = k
    return e


def cyclic_terms(spec: CyclicFamilySpec, t: float):
    """Yield (coeff, nu, mu) for Σ_j z_j^{a_j} z_{j+1} ((1−t)|z_j|^{2b_j} + t)."""
    n = spec.n
    for j in range(n):
        nxt = (j + 1) % n
        a, b = spec.a[j], spec.b[j]
        nu = _unit(n, j, a + b)
        nu[nxt] += 1
        yield 1 - t, nu, _unit(n, j, b)
        nu = _unit(n, j, a)
        nu[nxt] += 1
        yield t, nu, [0] * n


def make_member(spec: CyclicFamilySpec, t: float) -> FamilyMember:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0, 1]")
    return FamilyMember(spec, t, MixedPolynomial.from_terms(spec.n, cyclic_terms(spec, t)))


def f_II(spec: CyclicFamilySpec) -> MixedPolynomial:
    return make_member(spec, 0.0).poly


def g_II(spec: CyclicFamilySpec) -> MixedPolynomial:
    return make_member(spec, 1.0).poly


def make_bamboo(a: Sequence[int], b: Sequence[int]) -> MixedPolynomial:
    """f_I = Σ_{j<n} z_j^{a_j+b_j} z̄_j^{b_j} z_{j+1} + z_n^{a_n+b_n} z̄_n^{b_n}."""
    n = len(a)
    terms = []
    for j in range(n):
        nu = _unit(n, j, a[j] + b[j])
        if j + 1 < n:
            nu[j + 1] += 1
        terms.append((1, nu, _unit(n, j, b[j])))
    return MixedPolynomial.from_terms(n, terms)


def make_brieskorn(a: Sequence[int], b: Sequence[int]) -> MixedPolynomial:
    """Mixed Brieskorn polynomial Σ_j z_j^{a_j+b_j} z̄_j^{b_j}."""
    n = len(a)
    return MixedPolynomial.from_terms(
        n, ((1, _unit(n, j, a[j] + b[j]), _unit(n, j, b[j])) for j in range(n))
    )


def det_NM(spec: CyclicFamilySpec) -> int:
    """det ᵀ(N−M) of f_II, which is a_1⋯a_n + (−1)^{n+1}."""
    return prod(spec.a) + (-1) ** (spec.n + 1)


def surviving_terms(spec: CyclicFamilySpec, zero_set) -> list[int]:
    """Terms j of the cyclic sum that do not vanish when z_i = 0 for i in ``zero_set``."""
    zs = set(zero_set)
    return [j for j in range(spec.n) if j not in zs and (j + 1) % spec.n not in zs]


def bamboo_components(spec: CyclicFamilySpec, zero_set) -> list[tuple[int, ...]]:
    """Vertex chains of the restricted polynomial, each listed left to right.

    A chain (v_0, ..., v_L) carries the terms z_{v_k}^{a} z_{v_{k+1}}; its last
    vertex is the right end, where the variable appears only linearly. Chains
    may wrap past index n − 1 back to 0. ``zero_set`` must be nonempty.
    """
    n = spec.n
    zs = set(zero_set)
    if not zs:
        raise ValueError("the zero set must be nonempty (otherwise the graph is a cycle)")
    alive = set(surviving_terms(spec, zs))
    start = next(j for j in range(n) if j not in alive)
    runs: list[list[int]] = []
    current: list[int] = []
    for k in range(1, n + 1):
        j = (start + k) % n
        if j in alive:
            current.append(j)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    chains = [tuple(run) + ((run[-1] + 1) % n,) for run in runs]
    return sorted(chains, key=lambda c: c[0])
