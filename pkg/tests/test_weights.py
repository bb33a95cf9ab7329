from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from polarlink import rational, weights
from polarlink.family import CyclicFamilySpec, f_II, g_II, make_member
from polarlink.mixedpoly import MixedPolynomial

EXAMPLE1 = MixedPolynomial.from_terms(
    3, [(1, (3, 1, 0), (1, 0, 0)), (1, (0, 3, 1), (0, 1, 0)), (1, (1, 0, 3), (0, 0, 1))]
)


def sympy_weight(rows):
    """Independent oracle: sympy rational solve of R p = d (1..1), normalised."""
    R = sympy.Matrix(rows)
    x = R.LUsolve(sympy.ones(R.rows, 1))
    den = sympy.ilcm(*[v.q for v in x])
    ints = [int(v * den) for v in x]
    g = sympy.igcd(*ints)
    return tuple(v // g for v in ints), int(den / g)


# -- exact linear algebra ---------------------------------------------------------

def test_bareiss_matches_sympy():
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = int(rng.integers(1, 7))
        A = rng.integers(-5, 6, (k, k)).tolist()
        assert rational.bareiss_det(A) == sympy.Matrix(A).det()


def test_bareiss_zero_pivot_and_singular():
    assert rational.bareiss_det([[0, 1], [1, 0]]) == -1
    assert rational.bareiss_det([[1, 2], [2, 4]]) == 0
    assert rational.bareiss_det([]) == 1


def test_rank_and_solve():
    rng = np.random.default_rng(1)
    for _ in range(100):
        rows, cols = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        A = rng.integers(-3, 4, (rows, cols)).tolist()
        assert rational.rank(A) == sympy.Matrix(A).rank()
    A = [[2, 1], [1, 3]]
    x = rational.solve(A, [1, 1])
    assert x == [Fraction(2, 5), Fraction(1, 5)]
    with pytest.raises(rational.InconsistentSystem):
        rational.solve([[1, 0], [1, 0], [0, 1]], [1, 2, 3])
    with pytest.raises(rational.UnderdeterminedSystem):
        rational.solve([[1, 1]], [1])


def test_inverse_exact():
    A = [[2, 1, 0], [0, 2, 1], [1, 0, 2]]
    Ainv = rational.inverse(A)
    I = rational.matmul(A, Ainv)
    assert I == [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]


# -- exponent matrices and simpliciality ------------------------------------------

def test_exponent_matrices_example1():
    em = weights.exponent_matrices(EXAMPLE1)
    assert em.N.T.tolist() == [[3, 1, 0], [0, 3, 1], [1, 0, 3]]
    assert em.M.T.tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_exponent_matrices_holomorphic_and_single():
    em = weights.exponent_matrices(g_II(CyclicFamilySpec.of((2, 2, 2), (1, 1, 1))))
    assert not em.M.any()
    assert em.N.T.tolist() == [[2, 1, 0], [0, 2, 1], [1, 0, 2]]
    em = weights.exponent_matrices(MixedPolynomial.from_terms(2, [(1, (1, 0), (0, 1))]))
    assert em.N.T.tolist() == [[1, 0]] and em.M.T.tolist() == [[0, 1]]


def test_is_simplicial():
    assert weights.is_simplicial(EXAMPLE1)
    em = weights.exponent_matrices(EXAMPLE1)
    assert rational.bareiss_det(em.polar_rows()) == 9
    assert rational.bareiss_det(em.radial_rows()) == 65
    # n = 2 merges z1 z2 + z2 z1 into one monomial, which is simplicial
    for n in (4, 6):
        f = f_II(CyclicFamilySpec(n, (1,) * n, (0,) * n))
        assert not weights.is_simplicial(f)
    assert not weights.is_simplicial(MixedPolynomial.from_terms(1, [(1, (1,), (0,)), (1, (0,), (1,))]))


def test_is_simplicial_invariant_under_reorder_and_coefficients():
    terms = [(1, (3, 1, 0), (1, 0, 0)), (1, (0, 3, 1), (0, 1, 0)), (1, (1, 0, 3), (0, 0, 1))]
    shuffled = [(2.5 - 1j, nu, mu) for _, nu, mu in reversed(terms)]
    assert weights.is_simplicial(MixedPolynomial.from_terms(3, shuffled))


# -- weight systems ---------------------------------------------------------------

def test_polar_weight_examples():
    spec = CyclicFamilySpec.of((2, 2, 2), (1, 1, 1))
    w = weights.polar_weight(f_II(spec))
    assert (w.weights, w.degree) == ((1, 1, 1), 3)
    w = weights.polar_weight(f_II(CyclicFamilySpec.of((2, 3), (0, 1))))
    assert (w.weights, w.degree) == ((2, 1), 5)
    brieskorn = MixedPolynomial.from_terms(2, [(1, (3, 0), (1, 0)), (1, (0, 2), (0, 0))])
    w = weights.polar_weight(brieskorn)
    assert (w.weights, w.degree) == ((1, 1), 2)


def test_polar_weight_matches_sympy_oracle():
    rng = np.random.default_rng(2)
    for _ in range(40):
        n = int(rng.integers(2, 6))
        spec = CyclicFamilySpec(n, tuple(rng.integers(1, 5, n)), tuple(rng.integers(0, 4, n)))
        f = f_II(spec)
        if len(f) < n:  # n = 2 with merged monomials
            continue
        rows = weights.exponent_matrices(f).polar_rows()
        if sympy.Matrix(rows).det() == 0:
            continue
        w = weights.polar_weight(f)
        assert (w.weights, w.degree) == sympy_weight(rows)
        assert weights.weight_residual(f, w) == [0] * n


def test_radial_weight():
    spec = CyclicFamilySpec.of((2, 2, 2), (1, 1, 1))
    w = weights.radial_weight(f_II(spec))
    assert (w.weights, w.degree) == ((1, 1, 1), 5)
    with pytest.raises(weights.WeightError):
        weights.radial_weight(make_member(spec, 0.5).poly)
    w = weights.radial_weight(g_II(spec))
    assert (w.weights, w.degree) == ((1, 1, 1), 3)


def test_weight_errors():
    with pytest.raises(weights.NotFull):
        weights.polar_weight(MixedPolynomial.from_terms(2, [(1, (2, 1), (0, 0))]))
    with pytest.raises(weights.SingularSystem):
        weights.polar_weight(f_II(CyclicFamilySpec(4, (1,) * 4, (1, 0, 1, 0))))


def test_holomorphic_polar_equals_radial():
    for a in [(2, 2, 2), (3, 1, 2), (2, 5)]:
        g = g_II(CyclicFamilySpec.of(a, (1,) * len(a)))
        p, q = weights.polar_weight(g), weights.radial_weight(g)
        assert (p.weights, p.degree) == (q.weights, q.degree)


def test_mixed_sign_weights_reported():
    f = MixedPolynomial.from_terms(2, [(1, (3, 1), (0, 0)), (1, (1, 0), (0, 1))])
    w = weights.polar_weight(f)
    assert w.degree > 0
    assert weights.weight_residual(f, w) == [0, 0]
    assert w.mixed_signs


def test_check_polar_homogeneity():
    spec = CyclicFamilySpec.of((2, 2, 2), (1, 1, 1))
    w = weights.WeightSystem("polar", (1, 1, 1), 3)
    for t in (0, 0.25, 0.5, 0.75, 1):
        assert weights.check_polar_homogeneity(make_member(spec, t).poly, w, 100, seed=1) <= 1e-12
    assert weights.check_polar_homogeneity(EXAMPLE1, w, 100, seed=2) <= 1e-12
    z2 = MixedPolynomial.from_terms(1, [(1, (2,), (0,))])
    assert weights.check_polar_homogeneity(z2, weights.WeightSystem("polar", (1,), 1), 100, 3) > 0.1
    r1 = weights.check_polar_homogeneity(EXAMPLE1, w, 10, seed=5)
    assert r1 == weights.check_polar_homogeneity(EXAMPLE1, w, 10, seed=5)


def test_radial_homogeneity_of_f_II():
    f = f_II(CyclicFamilySpec.of((2, 3, 1), (1, 0, 2)))
    assert weights.check_radial_homogeneity(f, weights.radial_weight(f), 50, 0) <= 1e-11


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=2, max_size=6), st.data())
def test_polar_weight_of_family_is_t_independent(a, data):
    n = len(a)
    b = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    spec = CyclicFamilySpec.of(a, b)
    f0 = f_II(spec)
    if len(f0) < n or rational.bareiss_det(weights.exponent_matrices(f0).polar_rows()) == 0:
        return
    ref = weights.polar_weight(f0)
    t = data.draw(st.floats(0.01, 0.99))
    w = weights.polar_weight(make_member(spec, t).poly)
    assert w == ref
    p, d = w.weights, w.degree
    assert all(a[j] * p[j] + p[(j + 1) % n] == d for j in range(n))
    assert weights.check_polar_homogeneity(make_member(spec, t).poly, w, 20, 0) <= 1e-11
