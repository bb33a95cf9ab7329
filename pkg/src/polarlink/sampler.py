"""Points on the link K_{t,r} = V_t ∩ S_r, and a numerical probe of the tube radius η₀.

Points are found by safeguarded Gauss-Newton projection onto the three real
constraints Re(f − c) = Im(f − c) = 0, ‖z‖² = r², with c = 0 for the link and
c = η e^{iθ} for nearby fibers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache, partial
from typing import Iterable, Sequence

import numpy as np

from . import weights
from ._parallel import child_seeds, parallel_map
from .family import FamilyMember, surviving_terms
from .mixedpoly import MixedPolynomial, real_jacobian

log = logging.getLogger(__name__)

ZERO_THRESHOLD = 1e-9  # relative to r
F_TOL = 1e-10  # |f(w) − c| <= F_TOL * (1 + ‖w‖^d) on acceptance
NORM_TOL = 1e-12  # | ‖w‖ − r | <= NORM_TOL * r on acceptance
NEWTON_TOL = 1e-12
MAX_ITER = 50
MAX_ATTEMPTS = 30


class ConvergenceFailure(RuntimeError):
    def __init__(self, message: str, residuals: tuple[float, float] | None = None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True, eq=False)
class LinkSample:
    t: float
    r: float
    w: np.ndarray
    nullity: tuple[int, ...]
    residuals: tuple[float, float]  # (|f(w) − level|, | ‖w‖ − r |)
    level: complex = 0j

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "r": self.r,
            "w_re": self.w.real.tolist(),
            "w_im": self.w.imag.tolist(),
            "nullity": list(self.nullity),
            "residuals": list(self.residuals),
        }


class SampleList(list):
    """List of :class:`LinkSample` that also carries failures and diagnostics."""

    def __init__(self, samples: Iterable[LinkSample] = (), failures=(), diagnostic: str | None = None):
        super().__init__(samples)
        self.failures: list[dict] = list(failures)
        self.diagnostic = diagnostic


# -- projection ---------------------------------------------------------------

def constraint_values(f: MixedPolynomial, z: np.ndarray, r: float, level: complex = 0j) -> np.ndarray:
    fz = f.eval(z) - level
    return np.array([fz.real, fz.imag, np.vdot(z, z).real - r * r])


def constraint_jacobian(f: MixedPolynomial, z: np.ndarray) -> np.ndarray:
    """3 x 2n real Jacobian of (Re f, Im f, ‖z‖²) in (x_1, y_1, ..., x_n, y_n)."""
    J = np.empty((3, 2 * f.n))
    J[:2] = real_jacobian(f, z)
    J[2, 0::2] = 2 * z.real
    J[2, 1::2] = 2 * z.imag
    return J


def _accepts(f: MixedPolynomial, z: np.ndarray, r: float, level: complex, f_tol: float, norm_tol: float):
    res_f = abs(f.eval(z) - level)
    res_n = abs(np.linalg.norm(z) - r)
    ok = res_f <= f_tol * (1 + np.linalg.norm(z) ** f.degree) and res_n <= norm_tol * r
    return ok, (float(res_f), float(res_n))


def _gauss_newton(f, z, r, level, free: np.ndarray, max_iter: int, newton_tol: float):
    """Pseudo-inverse Gauss-Newton on the free coordinates, halving on residual increase."""
    cols = np.repeat(free, 2)
    scale_f = 1 + r ** f.degree
    weights_vec = np.array([1 / scale_f, 1 / scale_f, 1 / (r * r)])

    def merit(zz):
        return np.linalg.norm(constraint_values(f, zz, r, level) * weights_vec)

    F = constraint_values(f, z, r, level)
    cur = np.linalg.norm(F * weights_vec)
    for _ in range(max_iter):
        if cur <= newton_tol:
            break
        J = constraint_jacobian(f, z)[:, cols]
        step = -np.linalg.pinv(J) @ F
        dz = np.zeros(f.n, dtype=complex)
        dz[free] = step[0::2] + 1j * step[1::2]
        lam = 1.0
        for _ in range(30):
            trial = z + lam * dz
            new = merit(trial)
            if new < cur:
                break
            lam *= 0.5
        else:
            break
        z = trial
        F = constraint_values(f, z, r, level)
        cur = new
    return z


def project(
    f: MixedPolynomial,
    start,
    r: float,
    level: complex = 0j,
    fixed_zero: Iterable[int] = (),
    zero_threshold: float = ZERO_THRESHOLD,
    max_iter: int = MAX_ITER,
    newton_tol: float = NEWTON_TOL,
) -> tuple[np.ndarray, tuple[int, ...], tuple[float, float]]:
    """Project ``start`` onto f^{-1}(level) ∩ S_r, snapping tiny coordinates to 0.

    Coordinates in ``fixed_zero`` are held at 0. Returns (w, nullity,
    residuals) or raises :class:`ConvergenceFailure`.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    z = np.array(start, dtype=complex)
    if z.shape != (f.n,):
        raise ValueError(f"start must lie in C^{f.n}")
    zero = set(fixed_zero)
    thresh = zero_threshold * r
    residuals = (np.inf, np.inf)
    for _ in range(f.n + 1):
        z[list(zero)] = 0
        free = np.array([j not in zero for j in range(f.n)])
        if not free.any():
            raise ConvergenceFailure("no free coordinates left on a sphere of positive radius")
        ok, residuals = _accepts(f, z, r, level, F_TOL * 1e-2, NORM_TOL * 1e-2)
        if not ok:
            z = _gauss_newton(f, z, r, level, free, max_iter, newton_tol)
        tiny = {j for j in range(f.n) if j not in zero and abs(z[j]) <= thresh}
        if tiny:
            zero |= tiny
            continue
        ok, residuals = _accepts(f, z, r, level, F_TOL, NORM_TOL)
        if not ok:
            raise ConvergenceFailure("Gauss-Newton did not reach tolerance", residuals)
        nullity = tuple(sorted(j for j in range(f.n) if z[j] == 0))
        return z, nullity, residuals
    raise ConvergenceFailure("snapping did not stabilise", residuals)


@lru_cache(maxsize=64)
def _polar_weight_or_none(poly: MixedPolynomial):
    try:
        return weights.polar_weight(poly)
    except weights.WeightError:
        return None


def _random_sphere_point(rng: np.random.Generator, n: int, r: float, free: np.ndarray) -> np.ndarray:
    z = np.zeros(n, dtype=complex)
    k = int(free.sum())
    z[free] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return z * (r / np.linalg.norm(z))


def _sample_one(
    seed_seq: np.random.SeedSequence,
    member: FamilyMember,
    r: float,
    zero_set: tuple[int, ...],
    require_exact_nullity: bool,
    level_modulus: float,
    zero_threshold: float,
    max_attempts: int,
):
    rng = np.random.default_rng(seed_seq)
    f = member.poly
    free = np.array([j not in zero_set for j in range(f.n)])
    pw = _polar_weight_or_none(f)
    last = None
    for _ in range(max_attempts):
        start = _random_sphere_point(rng, f.n, r, free)
        level = level_modulus * np.exp(1j * rng.uniform(0, 2 * np.pi)) if level_modulus else 0j
        try:
            w, nullity, residuals = project(f, start, r, level, zero_set, zero_threshold)
        except ConvergenceFailure as exc:
            last = exc.residuals
            continue
        if require_exact_nullity and nullity != zero_set:
            continue
        if pw is not None:
            # the polar action permutes the fibres f^{-1}(c e^{iθ}), so the level moves with it
            s = np.exp(1j * rng.uniform(0, 2 * np.pi))
            w = weights.polar_action(pw, s, w)
            level = level * s ** pw.degree
            w[list(nullity)] = 0
            _, residuals = _accepts(f, w, r, level, F_TOL, NORM_TOL)
        return LinkSample(member.t, r, w, nullity, residuals, complex(level))
    if last is not None:
        last = [float(x) if np.isfinite(x) else None for x in last]
    return {"reason": "ConvergenceFailure", "attempts": max_attempts, "last_residuals": last}


def _run_batch(
    member: FamilyMember,
    r: float,
    count: int,
    seed: int,
    zero_set: tuple[int, ...],
    require_exact_nullity: bool,
    level_modulus: float = 0.0,
    zero_threshold: float = ZERO_THRESHOLD,
    max_attempts: int = MAX_ATTEMPTS,
    jobs: int = 1,
    key: tuple[int, ...] = (),
) -> SampleList:
    if r <= 0:
        raise ValueError("radius must be positive")
    r = float(r)
    if count <= 0:
        return SampleList()
    task = partial(
        _sample_one,
        member=member,
        r=r,
        zero_set=zero_set,
        require_exact_nullity=require_exact_nullity,
        level_modulus=level_modulus,
        zero_threshold=zero_threshold,
        max_attempts=max_attempts,
    )
    results = parallel_map(task, child_seeds(seed, count, key), jobs)
    out = SampleList()
    for i, res in enumerate(results):
        if isinstance(res, LinkSample):
            out.append(res)
        else:
            out.failures.append({"index": i, **res})
    if out.failures:
        log.warning("%d of %d samples failed to converge", len(out.failures), count)
    return out


def sample_link(
    member: FamilyMember,
    r: float,
    count: int,
    seed: int,
    starts: Sequence | None = None,
    zero_threshold: float = ZERO_THRESHOLD,
    jobs: int = 1,
) -> SampleList:
    """Sample ``count`` points of V_t ∩ S_r from random starts.

    Explicit ``starts`` are projected first (a start already on the link is
    returned unchanged); random samples are then added up to ``count``.
    """
    r = float(r)
    out = SampleList()
    for i, start in enumerate(starts or ()):
        try:
            w, nullity, residuals = project(member.poly, start, r, zero_threshold=zero_threshold)
        except ConvergenceFailure as exc:
            out.failures.append({"index": i, "reason": "ConvergenceFailure", "message": str(exc)})
            continue
        out.append(LinkSample(member.t, r, w, nullity, residuals))
    remaining = count - len(starts or ())
    rand = _run_batch(member, r, remaining, seed, (), False, zero_threshold=zero_threshold, jobs=jobs)
    out.extend(rand)
    out.failures.extend(rand.failures)
    return out


def nullity_feasible(member: FamilyMember, zero_set: Iterable[int]) -> tuple[bool, str]:
    """Whether V_t ∩ S_r has points whose zero coordinates are exactly ``zero_set``."""
    zs = set(zero_set)
    if len(zs) >= member.n:
        return False, "InfeasibleNullity: all coordinates zero leaves only the origin"
    terms = surviving_terms(member.spec, zs)
    if len(terms) == 1:
        j = terms[0]
        return False, (
            f"InfeasibleNullity: restriction is the single term of index {j}, "
            "which cannot vanish with all remaining coordinates nonzero"
        )
    return True, ""


def sample_with_nullity(
    member: FamilyMember,
    r: float,
    zero_set: Iterable[int],
    count: int,
    seed: int,
    zero_threshold: float = ZERO_THRESHOLD,
    jobs: int = 1,
) -> SampleList:
    """Samples whose nullity set is exactly ``zero_set``, or an empty list with a diagnostic."""
    zs = tuple(sorted(set(zero_set)))
    if any(not 0 <= i < member.n for i in zs):
        raise ValueError(f"indices must lie in 0..{member.n - 1}")
    ok, why = nullity_feasible(member, zs)
    if not ok:
        return SampleList(diagnostic=why)
    key = (1,) + tuple(i + 1 for i in zs)
    return _run_batch(member, r, count, seed, zs, True, zero_threshold=zero_threshold, jobs=jobs, key=key)


def project_sample(member: FamilyMember, r: float, start, fixed_zero=()) -> LinkSample:
    """Single projection wrapped as a :class:`LinkSample`."""
    w, nullity, residuals = project(member.poly, start, r, fixed_zero=fixed_zero)
    return LinkSample(member.t, r, w, nullity, residuals)


# -- tube radius probe -------------------------------------------------------

@dataclass
class TubeEstimate:
    """Numerical probe of η₀; not a certified bound."""

    t: float
    r: float
    eta0: float
    grid: list[float]
    failures: list[dict]
    levels: list[dict] = field(default_factory=list)
    max_abs_f: float = 0.0
    note: str = "numerical probe, not a certified lower bound"


def max_modulus_on_sphere(f: MixedPolynomial, r: float, samples: int = 4000, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, f.n)) + 1j * rng.standard_normal((samples, f.n))
    z *= r / np.linalg.norm(z, axis=1, keepdims=True)
    return float(max(abs(f.eval(p)) for p in z))


def transversality_sigma(f: MixedPolynomial, w: np.ndarray) -> tuple[float, float]:
    """(sigma_min, sigma_max) of the 3 x 2n Jacobian of (Re f, Im f, ‖z‖²)."""
    s = np.linalg.svd(constraint_jacobian(f, np.asarray(w, dtype=complex)), compute_uv=False)
    return float(s[-1]), float(s[0])


def estimate_eta0(
    member: FamilyMember,
    r: float,
    eta_grid: Sequence[float],
    samples: int = 20,
    seed: int = 0,
    tol: float = 1e-8,
    jobs: int = 1,
) -> TubeEstimate:
    """Largest prefix of ``eta_grid`` whose fibres all meet S_r transversally.

    Levels above the sampled max |f| on S_r with no converged point are
    counted as vacuous passes (empty fibre) and flagged.
    """
    grid = [float(x) for x in eta_grid]
    if any(x <= 0 for x in grid) or grid != sorted(grid):
        raise ValueError("eta_grid must be positive and ascending")
    fmax = max_modulus_on_sphere(member.poly, r, seed=seed)
    levels, failures = [], []
    eta0 = 0.0
    prefix_ok = True
    for k, eta in enumerate(grid):
        batch = _run_batch(member, r, samples, seed, (), False, level_modulus=eta, jobs=jobs, key=(2, k))
        bad = []
        worst = np.inf
        for smp in batch:
            smin, smax = transversality_sigma(member.poly, smp.w)
            ratio = smin / smax
            worst = min(worst, ratio)
            if not smin > tol * smax:
                bad.append({"eta": eta, "w_re": smp.w.real.tolist(), "w_im": smp.w.imag.tolist(),
                            "sigma_min": smin, "sigma_max": smax})
        vacuous = not batch and eta > fmax
        if not batch and not vacuous:
            bad.append({"eta": eta, "reason": "no converged sample below sampled max |f|"})
        failures.extend(bad)
        levels.append({
            "eta": eta,
            "converged": len(batch),
            "unconverged": len(batch.failures),
            "min_sigma_ratio": None if not batch else float(worst),
            "vacuous": vacuous,
            "pass": not bad,
        })
        if bad:
            prefix_ok = False
        if prefix_ok:
            eta0 = eta
    return TubeEstimate(member.t, r, eta0, grid, failures, levels, fmax)
