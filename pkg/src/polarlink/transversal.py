"""Transversality of S_r and V_t: Jacobian identities, curve germs and certification.

For a point w of V_t ∩ S_r we look for a real curve w(s) = (r_j(s) w_j) in V_t
with f(w(s)) = (s+1) f(w). Its tangent at s = 0 has radial derivative
2 Σ_j r_j'(0) |w_j|², and positivity of that number shows the tangent leaves
the sphere. Two constructions are used, depending on the nullity set of w:

* no zero coordinates: linearise h(r, s) = 0 at r = 1 and solve A r' = β;
* some zero coordinates: the surviving polynomial splits into bamboo chains,
  each solved right-to-left by scalar monotone equations (or, when nothing
  survives, the plain scaling w(s) = (s+1) w).

Independently, ``direct_check`` computes the smallest singular value of the
3 x 2n Jacobian of (Re f, Im f, ‖z‖²).
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from ._parallel import child_seeds, parallel_map
from .family import (
    CyclicFamilySpec,
    FamilyMember,
    bamboo_components,
    make_member,
    validate_spec,
)
from .mixedpoly import MixedPolynomial
from .sampler import (
    LinkSample,
    SampleList,
    nullity_feasible,
    sample_link,
    sample_with_nullity,
    transversality_sigma,
)

log = logging.getLogger(__name__)


class DegenerateSystem(ArithmeticError):
    """det A is not positive: the Case-1 linear system gives no usable germ."""


class InfeasibleSample(ValueError):
    """The point handed to a curve construction is not on V_t."""


class ConvergenceFailure(RuntimeError):
    def __init__(self, message: str, s: float | None = None):
        super().__init__(message)
        self.s = s


# -- the map Φ_w and its Jacobian ---------------------------------------------

def _brackets(member: FamilyMember, w) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(a, b, c, β) with c_j = (1−t)|w_j|^{2b_j} and β_j = c_j + t."""
    a = np.array(member.spec.a, dtype=float)
    b = np.array(member.spec.b, dtype=float)
    absw = np.abs(np.asarray(w, dtype=complex))
    c = (1 - member.t) * absw ** (2 * b)
    return a, b, c, c + member.t


def h_functions(member: FamilyMember, w, r, s: float) -> np.ndarray:
    """h_j(r, s) = r_j^{a_j} r_{j+1} (c_j r_j^{2b_j} + t) − (s+1) β_j."""
    r = np.asarray(r, dtype=float)
    if r.shape != (member.n,):
        raise ValueError(f"r must have length {member.n}")
    a, b, c, beta = _brackets(member, w)
    r_next = np.roll(r, -1)
    return r ** a * r_next * (c * r ** (2 * b) + member.t) - (s + 1) * beta


@dataclass(frozen=True, eq=False)
class PhiJacobian:
    """Entries of J(Φ_w): ``alpha_diag[j]`` = α_{j,j}, ``alpha_next[j]`` = α_{j,j+1 mod n}."""

    alpha_diag: np.ndarray
    alpha_next: np.ndarray
    beta: np.ndarray

    @property
    def n(self) -> int:
        return len(self.beta)

    def block(self) -> np.ndarray:
        """The n x n matrix A of ∂h_j/∂r_k."""
        n = self.n
        A = np.diag(self.alpha_diag).astype(float)
        for j in range(n):
            A[j, (j + 1) % n] += self.alpha_next[j]
        return A

    def matrix(self) -> np.ndarray:
        n = self.n
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = self.block()
        J[:n, n] = -self.beta
        J[n, n] = 1.0
        return J


def phi_jacobian(member: FamilyMember, w, r=None) -> PhiJacobian:
    r = np.ones(member.n) if r is None else np.asarray(r, dtype=float)
    a, b, c, beta = _brackets(member, w)
    t = member.t
    r_next = np.roll(r, -1)
    r2b = r ** (2 * b)
    diag = r ** (a - 1) * r_next * (c * (a + 2 * b) * r2b + a * t)
    nxt = r ** a * (c * r2b + t)
    return PhiJacobian(diag, nxt, beta)


def det_closed_form(J: PhiJacobian) -> float:
    """det J(Φ_w) = Π α_{j,j} + (−1)^{n+1} Π α_{j,j+1}."""
    n = J.n
    return float(np.prod(J.alpha_diag) + (-1) ** (n + 1) * np.prod(J.alpha_next))


def matrix_A(member: FamilyMember, w) -> np.ndarray:
    return phi_jacobian(member, w).block()


# -- Case 1: no zero coordinates -----------------------------------------------

@dataclass(frozen=True, eq=False)
class CurveGerm:
    base: LinkSample
    dr_ds: np.ndarray
    tangent: np.ndarray
    radial_derivative: float
    method: str  # "cramer" | "linear-solve" | "bamboo-recursion" | "scaling"
    details: dict = field(default_factory=dict)


def _germ(base: LinkSample, dr: np.ndarray, method: str, **details) -> CurveGerm:
    w = base.w
    radial = float(2 * np.sum(dr * np.abs(w) ** 2))
    return CurveGerm(base, dr, dr * w, radial, method, details)


def cramer_dr(J: PhiJacobian, k: int = 0) -> float:
    """r_k'(0) from the alternating closed form of Cramer's rule.

    For k = 0 this is Σ_j (−1)^{j} A_{j} β_j A'_{j} / det A (0-based j), where
    A_j is the product of the first j off-diagonal entries and A'_j the
    product of the diagonal entries after row j. Other k use the cyclic
    symmetry of the system: rotate so that row k comes first.
    """
    n = J.n
    diag = np.roll(J.alpha_diag, -k)
    nxt = np.roll(J.alpha_next, -k)
    beta = np.roll(J.beta, -k)
    total = 0.0
    for j in range(n):
        left = np.prod(nxt[:j])
        right = np.prod(diag[j + 1:])
        total += (-1) ** j * left * beta[j] * right
    det = np.prod(diag) + (-1) ** (n + 1) * np.prod(nxt)
    return float(total / det)


def tangent_case1(member: FamilyMember, sample: LinkSample, tol: float = 1e-12) -> CurveGerm:
    """Germ from A r'(0) = β at r = (1, ..., 1).

    ``details`` records det A, the closed-form r_1'(0) and its discrepancy
    from the generic solve.
    """
    if sample.nullity:
        raise ValueError("tangent_case1 needs a sample without zero coordinates")
    J = phi_jacobian(member, sample.w)
    det = det_closed_form(J)
    scale = float(np.prod(J.alpha_diag))
    if not det > tol * scale:
        raise DegenerateSystem(f"det A = {det:.3e} is not positive (scale {scale:.3e})")
    dr = np.linalg.solve(J.block(), J.beta)
    dr1 = cramer_dr(J, 0)
    return _germ(
        sample, dr, "linear-solve",
        det_A=det,
        cramer_dr1=dr1,
        cramer_gap=abs(dr1 - dr[0]) / max(1.0, abs(dr[0])),
        min_dr=float(dr.min()),
    )


def _newton_r(member: FamilyMember, w, s: float, r0: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    r = r0.copy()
    for _ in range(max_iter):
        h = h_functions(member, w, r, s)
        if np.max(np.abs(h)) <= tol:
            return r
        r = r - np.linalg.solve(phi_jacobian(member, w, r).block(), h)
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            break
    h = h_functions(member, w, r, s)
    if np.all(np.isfinite(h)) and np.max(np.abs(h)) <= tol:
        return r
    raise ConvergenceFailure(f"Newton on h(r, s) = 0 failed at s = {s}", s)


class TracePoint(tuple):
    """(s, w(s), residual) with the scale factors ``r`` as an attribute."""

    def __new__(cls, s, w, residual, r):
        obj = super().__new__(cls, (s, w, residual))
        obj.r = r
        return obj

    @property
    def s(self):
        return self[0]

    @property
    def w(self):
        return self[1]

    @property
    def residual(self):
        return self[2]


def trace_curve(
    member: FamilyMember,
    sample: LinkSample,
    s_values: Sequence[float],
    tol: float = 1e-13,
    max_iter: int = 50,
) -> list[TracePoint]:
    """Solve h(r(s), s) = 0 by Newton continuation outward from r(0) = 1.

    Each s is started from the nearest already-solved parameter on the same
    side of 0; results come back in the order of ``s_values``.
    """
    if sample.nullity:
        raise ValueError("trace_curve needs a sample without zero coordinates")
    s_values = [float(s) for s in s_values]
    if any(abs(s) > 0.5 for s in s_values):
        raise ValueError("trace_curve supports |s| <= 0.5")
    w = sample.w
    f0 = member.poly.eval(w)
    solved: dict[float, np.ndarray] = {0.0: np.ones(member.n)}
    for side in (1, -1):
        prev = solved[0.0]
        for s in sorted({s for s in s_values if s * side > 0}, key=abs):
            prev = _newton_r(member, w, s, prev, tol, max_iter)
            solved[s] = prev
    out = []
    for s in s_values:
        r = solved[s]
        ws = r * w
        out.append(TracePoint(s, ws, abs(member.poly.eval(ws) - (s + 1) * f0), r))
    return out


# -- Case 2: some zero coordinates ---------------------------------------------

@dataclass(frozen=True)
class Restriction:
    poly: MixedPolynomial
    zero_set: tuple[int, ...]
    support: tuple[int, ...]  # variables present in the restricted polynomial
    components: tuple[tuple[int, ...], ...]  # bamboo chains, right end last


def restrict_to_nullity(member: FamilyMember, zero_set) -> Restriction:
    zs = tuple(sorted(set(zero_set)))
    if not zs:
        raise ValueError("restrict_to_nullity needs a nonempty zero set")
    poly = member.poly.restrict(zs)
    comps = tuple(bamboo_components(member.spec, zs))
    return Restriction(poly, zs, tuple(sorted(poly.variables())), comps)


def psi(member: FamilyMember, j: int, w_j_abs: float, s_j: float, xtol: float = 1e-14) -> float:
    """The root r_j > 0 of r^{a}(c r^{2b} + t) = s_j β for chain vertex j.

    The left side is strictly increasing, and r^a bounds it from below for
    r >= 1 and from above for r <= 1, so [min(1, s_j^{1/a}), max(1, s_j^{1/a})]
    always brackets the root. Bracketed Brent then two Newton polish steps.
    """
    if s_j <= 0:
        raise ValueError("s_j must be positive")
    a, b, t = member.spec.a[j], member.spec.b[j], member.t
    c = (1 - t) * w_j_abs ** (2 * b)
    beta = c + t
    target = s_j * beta

    def g(r):
        return r ** a * (c * r ** (2 * b) + t) - target

    def dg(r):
        return r ** (a - 1) * (c * (a + 2 * b) * r ** (2 * b) + a * t)

    root_a = s_j ** (1.0 / a)
    lo, hi = min(1.0, root_a), max(1.0, root_a)
    if g(lo) == 0:
        return lo
    if g(hi) == 0:
        return hi
    while g(lo) > 0:
        lo /= 2
    while g(hi) < 0:
        hi *= 2
    r = brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
    for _ in range(2):
        d = dg(r)
        if d > 0:
            r_new = r - g(r) / d
            if lo <= r_new <= hi:
                r = r_new
    return r


def chain_scales(member: FamilyMember, w, chain: Sequence[int], s: float) -> tuple[np.ndarray, np.ndarray]:
    """Right-to-left recursion along one chain: returns (r along chain, s_j along chain).

    r at the right end is 1; for earlier vertices s_j = (s+1)/r_{next} and
    r_j = psi_j(s_j). The last entry of the returned s-array is NaN (no equation
    at the right end).
    """
    L = len(chain)
    r = np.ones(L)
    sj = np.full(L, np.nan)
    absw = np.abs(np.asarray(w, dtype=complex))
    for k in range(L - 2, -1, -1):
        sj[k] = (s + 1) / r[k + 1]
        r[k] = psi(member, chain[k], absw[chain[k]], sj[k])
    return r, sj


def chain_derivative(member: FamilyMember, w, chain: Sequence[int]) -> np.ndarray:
    """r_j'(0) along a chain by implicit differentiation of the scalar equations.

    psi_j'(1) = β_j / (a_j β_j + 2 b_j c_j) and s_j'(0) = 1 − r_{next}'(0).
    """
    a, b, c, beta = _brackets(member, w)
    L = len(chain)
    d = np.zeros(L)
    for k in range(L - 2, -1, -1):
        j = chain[k]
        dpsi = beta[j] / (a[j] * beta[j] + 2 * b[j] * c[j])
        d[k] = dpsi * (1 - d[k + 1])
    return d


def _on_variety(member: FamilyMember, sample: LinkSample, tol: float) -> None:
    w = sample.w
    scale = 1 + np.linalg.norm(w) ** member.poly.degree
    if abs(member.poly.eval(w) - sample.level) > tol * scale:
        raise InfeasibleSample(f"|f(w)| = {abs(member.poly.eval(w)):.3e} is not zero")


def tangent_case2(member: FamilyMember, sample: LinkSample, tol: float = 1e-8) -> CurveGerm:
    if not sample.nullity:
        raise ValueError("tangent_case2 needs a sample with zero coordinates")
    _on_variety(member, sample, tol)
    w = sample.w
    res = restrict_to_nullity(member, sample.nullity)
    if res.poly.is_zero():
        dr = (w != 0).astype(float)
        return _germ(sample, dr, "scaling", restriction="f' == 0")
    dr = np.zeros(member.n)
    witnesses = []
    for chain in res.components:
        d = chain_derivative(member, w, chain)
        dr[list(chain)] = d
        # the vertex just left of the right end always moves outward
        witnesses.append(float(d[-2]))
    return _germ(
        sample, dr, "bamboo-recursion",
        components=[list(c) for c in res.components],
        witness_dr=witnesses,
        min_dr=float(dr.min()),
    )


def case2_curve(member: FamilyMember, sample: LinkSample, s: float) -> np.ndarray:
    """w(s) for the Case-2 construction (coordinates off the chains stay fixed)."""
    w = sample.w
    res = restrict_to_nullity(member, sample.nullity)
    if res.poly.is_zero():
        return (s + 1) * w
    out = w.copy()
    for chain in res.components:
        r, _ = chain_scales(member, w, chain, s)
        out[list(chain)] = r * w[list(chain)]
    return out


def tangent(member: FamilyMember, sample: LinkSample) -> CurveGerm:
    return tangent_case2(member, sample) if sample.nullity else tangent_case1(member, sample)


# -- direct rank test -----------------------------------------------------------

def direct_check(member: FamilyMember, sample: LinkSample | np.ndarray, tol: float | None = None) -> float:
    """sigma_min of the 3 x 2n Jacobian of (Re f, Im f, ‖z‖²) at the sample.

    When ``tol`` is given, also requires sigma_min > tol (raises nothing;
    callers compare). The origin is rejected.
    """
    w = sample.w if isinstance(sample, LinkSample) else np.asarray(sample, dtype=complex)
    if not np.any(w):
        raise ValueError("direct_check is undefined at the origin (r must be positive)")
    smin, _ = transversality_sigma(member.poly, w)
    return smin


# -- certification ----------------------------------------------------------------

@dataclass
class TransversalityCertificate:
    spec: dict
    t_grid: list[float]
    r_list: list[float]
    records: list[dict]
    summary: dict

    def as_dict(self) -> dict:
        return {
            "spec": self.spec,
            "grid": {"t": self.t_grid, "r": self.r_list},
            "records": self.records,
            "summary": self.summary,
        }


def nullity_patterns(member: FamilyMember, cap: int | None = None) -> list[tuple[int, ...]]:
    """Feasible nonempty zero sets of size <= min(n−1, 6) (or ``cap``)."""
    n = member.n
    cap = min(n - 1, 6) if cap is None else cap
    out = []
    for size in range(1, cap + 1):
        for zs in itertools.combinations(range(n), size):
            if nullity_feasible(member, zs)[0]:
                out.append(zs)
    return out


def _float_or_none(x):
    return None if x is None else float(x)


def check_sample(member: FamilyMember, sample: LinkSample, tol: float = 1e-8) -> dict:
    """Run both methods on one sample and return a JSON-ready record."""
    endpoint = member.t in (0.0, 1.0)
    smin, smax = transversality_sigma(member.poly, sample.w)
    direct_pass = smin > tol * smax
    record = {
        "t": member.t,
        "r": sample.r,
        "w_re": sample.w.real.tolist(),
        "w_im": sample.w.imag.tolist(),
        "nullity": list(sample.nullity),
        "sigma_min": smin,
        "sigma_max": smax,
        "direct_pass": direct_pass,
    }
    try:
        germ = tangent(member, sample)
    except (DegenerateSystem, InfeasibleSample, np.linalg.LinAlgError) as exc:
        record.update(method="error", error=f"{type(exc).__name__}: {exc}", dr_ds=None,
                      radial_derivative=None, constructive_pass=False)
    else:
        constructive_pass = germ.radial_derivative > 0 and germ.details.get("min_dr", 0.0) >= -1e-12
        record.update(
            method=germ.method,
            dr_ds=germ.dr_ds.tolist(),
            radial_derivative=germ.radial_derivative,
            constructive_pass=bool(constructive_pass),
        )
        if "cramer_gap" in germ.details:
            record["cramer_gap"] = germ.details["cramer_gap"]
            record["det_A"] = germ.details["det_A"]
    # at t in {0, 1} the verdict rests on the direct check alone
    agree = endpoint or record["constructive_pass"] == direct_pass
    record["endpoint"] = endpoint
    record["agree"] = agree
    record["pass"] = bool(direct_pass and agree and (endpoint or record["constructive_pass"]))
    return record


def _certify_cell(
    cell: tuple[int, float, float],
    spec: CyclicFamilySpec,
    samples_per_cell: int,
    nullity_samples: int,
    seed: int,
    tol: float,
    nullity_cap: int | None,
) -> tuple[list[dict], list[dict]]:
    idx, t, r = cell
    member = make_member(spec, t)
    cell_seed = int(child_seeds(seed, 1, (idx,))[0].generate_state(1)[0])
    batches: list[SampleList] = [sample_link(member, r, samples_per_cell, cell_seed)]
    for k, zs in enumerate(nullity_patterns(member, nullity_cap)):
        batches.append(sample_with_nullity(member, r, zs, nullity_samples, cell_seed + k + 1))
    records, failures = [], []
    for batch in batches:
        records.extend(check_sample(member, smp, tol) for smp in batch)
        failures.extend({"t": t, "r": r, **f} for f in batch.failures)
    return records, failures


def certify(
    spec: CyclicFamilySpec,
    t_grid: Sequence[float],
    r_list: Sequence[float],
    samples_per_cell: int = 50,
    seed: int = 0,
    tol: float = 1e-8,
    nullity_samples: int = 2,
    nullity_cap: int | None = None,
    jobs: int = 1,
    require_assumptions: bool = True,
) -> TransversalityCertificate:
    """Sample every (t, r) cell and check each point by both methods.

    Samples include random link points plus ``nullity_samples`` points for
    every feasible nullity pattern. Individual failures are recorded, never
    raised. ``require_assumptions=False`` skips hypothesis validation.
    """
    problems = validate_spec(spec)
    if problems and require_assumptions:
        raise ValueError("; ".join(problems))
    t_grid = [float(t) for t in t_grid]
    r_list = [float(r) for r in r_list]
    cells = [(i, t, r) for i, (t, r) in enumerate(itertools.product(t_grid, r_list))]
    task = partial(
        _certify_cell,
        spec=spec,
        samples_per_cell=samples_per_cell,
        nullity_samples=nullity_samples,
        seed=seed,
        tol=tol,
        nullity_cap=nullity_cap,
    )
    results = parallel_map(task, cells, jobs)
    records = [rec for recs, _ in results for rec in recs]
    failures = [f for _, fs in results for f in fs]
    n_pass = sum(rec["pass"] for rec in records)
    summary = {
        "records": len(records),
        "passed": n_pass,
        "failed": len(records) - n_pass,
        "direct_failures": sum(not rec["direct_pass"] for rec in records),
        "constructive_failures": sum(not rec["constructive_pass"] for rec in records),
        "disagreements": sum(not rec["agree"] for rec in records),
        "degenerate": sum("DegenerateSystem" in rec.get("error", "") for rec in records),
        "sampling_failures": len(failures),
        "sampling_failure_detail": failures,
        "spec_violations": problems,
        "vacuous": not records,
        "all_pass": n_pass == len(records) and not failures,
    }
    return TransversalityCertificate(spec.as_dict(), t_grid, r_list, records, summary)
