"""Mixed polynomials f(z, z̄) = Σ c_i z^ν_i z̄^μ_i and their real-analytic structure."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class MixedMonomial:
    coeff: complex
    nu: tuple[int, ...]
    mu: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "nu", tuple(int(x) for x in self.nu))
        object.__setattr__(self, "mu", tuple(int(x) for x in self.mu))
        if self.coeff == 0:
            raise ValueError("monomial coefficient must be nonzero")
        if len(self.nu) != len(self.mu) or len(self.nu) < 1:
            raise ValueError("nu and mu must have the same length n >= 1")
        if min(self.nu) < 0 or min(self.mu) < 0:
            raise ValueError("exponents must be nonnegative")

    @property
    def degree(self) -> int:
        return sum(self.nu) + sum(self.mu)

    def support(self) -> frozenset[int]:
        return frozenset(j for j, (a, b) in enumerate(zip(self.nu, self.mu)) if a + b > 0)


class MixedPolynomial:
    """Immutable sum of mixed monomials in ``n`` complex variables.

    Monomials sharing an exponent pair are merged on construction and
    cancelled terms are dropped, so the zero polynomial has no monomials.
    Exponents are kept dense: ``N`` and ``M`` are ``(m, n)`` integer arrays.
    """

    def __init__(self, n: int, monomials: Iterable[MixedMonomial]):
        if n < 1:
            raise ValueError("need at least one variable")
        merged: dict[tuple, complex] = {}
        for mono in monomials:
            if len(mono.nu) != n:
                raise ValueError(f"monomial has {len(mono.nu)} variables, expected {n}")
            key = (mono.nu, mono.mu)
            merged[key] = merged.get(key, 0j) + mono.coeff
        self.n = n
        self.monomials: tuple[MixedMonomial, ...] = tuple(
            MixedMonomial(c, nu, mu) for (nu, mu), c in merged.items() if c != 0
        )
        m = len(self.monomials)
        self._coeffs = np.array([mono.coeff for mono in self.monomials], dtype=complex)
        self._N = np.array([mono.nu for mono in self.monomials], dtype=int).reshape(m, n)
        self._M = np.array([mono.mu for mono in self.monomials], dtype=int).reshape(m, n)
        for arr in (self._coeffs, self._N, self._M):
            arr.setflags(write=False)

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[tuple[complex, Sequence[int], Sequence[int]]]):
        """Build from ``(coeff, nu, mu)`` triples, skipping zero coefficients."""
        return cls(n, (MixedMonomial(c, nu, mu) for c, nu, mu in terms if c != 0))

    # -- structure -------------------------------------------------------

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def N(self) -> np.ndarray:
        """Holomorphic exponents, one row per monomial."""
        return self._N

    @property
    def M(self) -> np.ndarray:
        """Antiholomorphic exponents, one row per monomial."""
        return self._M

    def __len__(self) -> int:
        return len(self.monomials)

    def is_zero(self) -> bool:
        return not self.monomials

    @property
    def degree(self) -> int:
        return max((mono.degree for mono in self.monomials), default=0)

    def variables(self) -> frozenset[int]:
        """Indices of variables with z_j or z̄_j present."""
        out: frozenset[int] = frozenset()
        for mono in self.monomials:
            out |= mono.support()
        return out

    def is_holomorphic(self) -> bool:
        return not self._M.any()

    def conjugate(self) -> "MixedPolynomial":
        """The polynomial conj(f): swaps nu and mu and conjugates coefficients."""
        return MixedPolynomial(
            self.n, (MixedMonomial(m.coeff.conjugate(), m.mu, m.nu) for m in self.monomials)
        )

    def restrict(self, zero_set: Iterable[int]) -> "MixedPolynomial":
        """Substitute z_i = 0 for i in ``zero_set`` (0^0 = 1 on the rest)."""
        zs = set(zero_set)
        return MixedPolynomial(
            self.n, (m for m in self.monomials if not (m.support() & zs))
        )

    def scale(self, factor: complex) -> "MixedPolynomial":
        return MixedPolynomial(
            self.n,
            (MixedMonomial(m.coeff * factor, m.nu, m.mu) for m in self.monomials)
            if factor != 0 else (),
        )

    def __add__(self, other: "MixedPolynomial") -> "MixedPolynomial":
        if not isinstance(other, MixedPolynomial):
            return NotImplemented
        if other.n != self.n:
            raise ValueError("variable count mismatch")
        return MixedPolynomial(self.n, self.monomials + other.monomials)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedPolynomial):
            return NotImplemented
        return self.n == other.n and set(self.monomials) == set(other.monomials)

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self.monomials)))

    def __repr__(self) -> str:
        if not self.monomials:
            return f"MixedPolynomial(n={self.n}, 0)"
        return f"MixedPolynomial(n={self.n}, {to_string(self)})"

    # -- evaluation ------------------------------------------------------

    def _check(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.n,):
            raise ValueError(f"expected a point in C^{self.n}, got shape {z.shape}")
        return z

    def _terms(self, z: np.ndarray) -> np.ndarray:
        # numpy gives 0**0 == 1 for complex bases, which is the convention we want
        return self._coeffs * np.prod(z ** self._N * np.conj(z) ** self._M, axis=1)

    def __call__(self, z) -> complex:
        return self.eval(z)

    def eval(self, z) -> complex:
        z = self._check(z)
        return complex(self._terms(z).sum())

    def wirtinger(self, z) -> tuple[np.ndarray, np.ndarray]:
        """(∂f/∂z_j, ∂f/∂z̄_j) for all j."""
        z = self._check(z)
        zc = np.conj(z)
        zp = z ** self._N
        zcp = zc ** self._M
        df_dz = np.empty(self.n, dtype=complex)
        df_dzbar = np.empty(self.n, dtype=complex)
        for j in range(self.n):
            nu_j = self._N[:, j]
            mu_j = self._M[:, j]
            a = zp.copy()
            a[:, j] = nu_j * z[j] ** np.maximum(nu_j - 1, 0)
            df_dz[j] = np.sum(self._coeffs * np.prod(a * zcp, axis=1))
            b = zcp.copy()
            b[:, j] = mu_j * zc[j] ** np.maximum(mu_j - 1, 0)
            df_dzbar[j] = np.sum(self._coeffs * np.prod(zp * b, axis=1))
        return df_dz, df_dzbar


def real_jacobian(f: MixedPolynomial, z) -> np.ndarray:
    """2 x 2n Jacobian of (Re f, Im f) in the coordinates (x_1, y_1, ..., x_n, y_n)."""
    fz, fzb = f.wirtinger(z)
    d_dx = fz + fzb
    d_dy = 1j * (fz - fzb)
    J = np.empty((2, 2 * f.n))
    J[0, 0::2] = d_dx.real
    J[0, 1::2] = d_dy.real
    J[1, 0::2] = d_dx.imag
    J[1, 1::2] = d_dy.imag
    return J


def is_mixed_singular(f: MixedPolynomial, z, tol: float = 1e-8, relative: bool = True) -> bool:
    """True when grad Re f and grad Im f are linearly dependent at ``z``.

    The test is sigma_2 <= tol, or sigma_2 <= tol * sigma_1 when ``relative``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = np.linalg.svd(real_jacobian(f, z), compute_uv=False)
    bound = tol * s[0] if relative else tol
    return bool(s[1] <= bound)


# -- variable graph ----------------------------------------------------------

@dataclass(frozen=True)
class InterconnGraph:
    """Variable graph Γ: vertices are variables of f, edges join variables sharing a monomial."""

    vertices: frozenset[int]
    edges: frozenset[frozenset[int]]
    components: tuple[frozenset[int], ...]
    kinds: tuple[str, ...] = field(default=())

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)


def _classify(component: frozenset[int], edges: set[frozenset[int]]) -> str:
    if len(component) == 1:
        return "isolated"
    comp_edges = [e for e in edges if e <= component]
    degs = {v: sum(1 for e in comp_edges if v in e) for v in component}
    k = len(component)
    if len(comp_edges) == k - 1 and max(degs.values()) <= 2:
        return "bamboo"
    if len(comp_edges) == k and k >= 3 and all(d == 2 for d in degs.values()):
        return "cycle"
    return "other"


def variable_graph(f: MixedPolynomial) -> InterconnGraph:
    vertices = f.variables()
    edges: set[frozenset[int]] = set()
    for mono in f.monomials:
        supp = sorted(mono.support())
        for i, u in enumerate(supp):
            for v in supp[i + 1:]:
                edges.add(frozenset((u, v)))
    # connected components by flood fill, ordered by smallest vertex
    adj: dict[int, set[int]] = {v: set() for v in vertices}
    for e in edges:
        u, v = tuple(e)
        adj[u].add(v)
        adj[v].add(u)
    seen: set[int] = set()
    components = []
    for v in sorted(vertices):
        if v in seen:
            continue
        stack, comp = [v], set()
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(adj[x] - comp)
        seen |= comp
        components.append(frozenset(comp))
    kinds = tuple(_classify(c, edges) for c in components)
    return InterconnGraph(frozenset(vertices), frozenset(edges), tuple(components), kinds)


# -- text serialization -------------------------------------------------------

def to_records(f: MixedPolynomial) -> list[dict]:
    return [
        {"coeff_re": m.coeff.real, "coeff_im": m.coeff.imag, "nu": list(m.nu), "mu": list(m.mu)}
        for m in f.monomials
    ]


def from_records(records: Sequence[dict], n: int | None = None) -> MixedPolynomial:
    if n is None:
        if not records:
            raise ValueError("cannot infer n from an empty record list")
        n = len(records[0]["nu"])
    return MixedPolynomial(
        n,
        (
            MixedMonomial(complex(r["coeff_re"], r.get("coeff_im", 0.0)), r["nu"], r["mu"])
            for r in records
        ),
    )


def dumps(f: MixedPolynomial) -> str:
    return json.dumps({"n": f.n, "monomials": to_records(f)})


def loads(text: str) -> MixedPolynomial:
    doc = json.loads(text)
    return from_records(doc["monomials"], doc["n"])


def to_string(f: MixedPolynomial) -> str:
    """Human-readable form, e.g. ``(1+0j)*z1^3*zb1*z2``; variables are 1-based here."""
    parts = []
    for m in f.monomials:
        factors = [f"({m.coeff:g})"]
        for j, (a, b) in enumerate(zip(m.nu, m.mu), start=1):
            if a:
                factors.append(f"z{j}" + (f"^{a}" if a > 1 else ""))
            if b:
                factors.append(f"zb{j}" + (f"^{b}" if b > 1 else ""))
        parts.append("*".join(factors))
    return " + ".join(parts)
