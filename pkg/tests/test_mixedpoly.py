import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polarlink import mixedpoly
from polarlink.family import CyclicFamilySpec, g_II, make_bamboo, make_brieskorn, make_member
from polarlink.mixedpoly import MixedMonomial, MixedPolynomial, is_mixed_singular, real_jacobian

from conftest import OMEGA, brute_eval, random_poly


def poly(n, *terms):
    return MixedPolynomial.from_terms(n, terms)


EXAMPLE1 = poly(3, (1, (3, 1, 0), (1, 0, 0)), (1, (0, 3, 1), (0, 1, 0)), (1, (1, 0, 3), (0, 0, 1)))


def test_monomial_invariants():
    with pytest.raises(ValueError):
        MixedMonomial(0, (1,), (0,))
    with pytest.raises(ValueError):
        MixedMonomial(1, (1, 0), (0,))


def test_merge_and_cancel():
    f = poly(1, (1, (2,), (0,)), (2, (2,), (0,)), (1, (0,), (1,)), (-1, (0,), (1,)))
    assert len(f) == 1
    assert f.monomials[0].coeff == 3


def test_eval_examples():
    assert g_II(CyclicFamilySpec.of((2, 2, 2), (1, 1, 1))).eval([1, 1, 1]) == 3
    assert EXAMPLE1.eval([1, 0, 0]) == 0
    for t in (0.0, 0.3, 0.5, 1.0):
        f = make_member(CyclicFamilySpec.of((2, 2, 2), (1, 1, 1)), t).poly
        w = np.array([1, OMEGA, OMEGA])
        assert abs(f.eval(w)) < 1e-14
        assert abs(brute_eval(f, w)) < 1e-14


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        EXAMPLE1.eval([1, 2])


def test_zero_power_zero_is_one():
    f = poly(2, (1, (0, 0), (0, 0)), (1, (1, 0), (0, 0)))
    assert f.eval([0, 0]) == 1


def test_eval_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        f = random_poly(rng, n, int(rng.integers(1, 6)), 3)
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert abs(f.eval(z) - brute_eval(f, z)) <= 1e-12 * (1 + abs(brute_eval(f, z)))


def test_linearity_and_conjugate():
    rng = np.random.default_rng(1)
    for _ in range(30):
        f = random_poly(rng, 3, 3, 3)
        g = random_poly(rng, 3, 3, 3)
        z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        assert np.isclose((f + g).eval(z), f.eval(z) + g.eval(z), rtol=1e-12, atol=1e-12)
        assert np.isclose(f.conjugate().eval(z), np.conj(f.eval(z)), rtol=1e-12, atol=1e-12)


def test_real_jacobian_trivial():
    z1 = poly(1, (1, (1,), (0,)))
    assert np.allclose(real_jacobian(z1, [0.3 + 0.7j]), [[1, 0], [0, 1]])
    abs2 = poly(1, (1, (1,), (1,)))
    x, y = 0.4, -1.3
    assert np.allclose(real_jacobian(abs2, [x + 1j * y]), [[2 * x, 2 * y], [0, 0]])


def fd_jacobian(f, z, h=1e-6):
    J = np.empty((2, 2 * f.n))
    for j in range(f.n):
        for k, d in enumerate((1, 1j)):
            e = np.zeros(f.n, dtype=complex)
            e[j] = d * h
            diff = (f.eval(z + e) - f.eval(z - e)) / (2 * h)
            J[:, 2 * j + k] = diff.real, diff.imag
    return J


def test_real_jacobian_family_fd():
    f = make_member(CyclicFamilySpec.of((2, 3, 2), (1, 0, 2)), 0.4).poly
    rng = np.random.default_rng(2)
    for _ in range(20):
        z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        J = real_jacobian(f, z)
        assert np.max(np.abs(J - fd_jacobian(f, z))) <= 1e-6 * max(1, np.max(np.abs(J)))


def test_real_jacobian_fd_random_instances():
    """1000 random mixed polynomials, n <= 6, exponents <= 5."""
    rng = np.random.default_rng(3)
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        f = random_poly(rng, n, int(rng.integers(1, 5)), 5)
        z = 0.5 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        J = real_jacobian(f, z)
        err = np.max(np.abs(J - fd_jacobian(f, z, 1e-5)))
        assert err <= 1e-6 * max(1.0, np.max(np.abs(J)))


def test_mixed_singular_examples():
    spec = CyclicFamilySpec.of((2, 2, 2), (1, 1, 1))
    f = make_member(spec, 0.5).poly
    assert is_mixed_singular(f, np.zeros(3))
    assert is_mixed_singular(poly(1, (1, (1,), (1,))), [0.7 - 0.2j])
    assert not is_mixed_singular(f, [1, OMEGA, OMEGA])
    with pytest.raises(ValueError):
        is_mixed_singular(f, np.zeros(3), tol=0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_origin_is_singular_for_degree_two_and_up(n, seed):
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(3):
        nu = rng.integers(0, 3, n)
        mu = rng.integers(0, 3, n)
        if nu.sum() + mu.sum() < 2:
            nu[0] += 2
        terms.append((1 + 1j, nu, mu))
    f = MixedPolynomial.from_terms(n, terms)
    assert is_mixed_singular(f, np.zeros(n))


def test_variable_graph_kinds():
    for n in (3, 4, 5):
        spec = CyclicFamilySpec(n, (2,) * n, (1,) * n)
        g = mixedpoly.variable_graph(make_member(spec, 0.0).poly)
        assert g.kinds == ("cycle",) and len(g.components[0]) == n
    g = mixedpoly.variable_graph(make_bamboo((2, 2, 3, 1), (1, 0, 0, 2)))
    assert g.kinds == ("bamboo",)
    g = mixedpoly.variable_graph(make_brieskorn((2, 3, 4), (1, 0, 1)))
    assert g.kinds == ("isolated",) * 3 and not g.edges


def test_variable_graph_edges_follow_monomials():
    f = poly(4, (1, (1, 0, 1, 0), (0, 0, 0, 0)), (1, (0, 1, 0, 0), (0, 0, 0, 0)))
    g = mixedpoly.variable_graph(f)
    assert g.edges == {frozenset((0, 2))}
    assert set(g.components) == {frozenset((0, 2)), frozenset((1,))}
    assert 3 not in g.vertices


def test_serialization_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(20):
        f = random_poly(rng, 3, 4, 4)
        g = mixedpoly.loads(mixedpoly.dumps(f))
        assert g == f
        assert [m.coeff for m in g.monomials] == [m.coeff for m in f.monomials]
    assert mixedpoly.from_records(mixedpoly.to_records(EXAMPLE1)) == EXAMPLE1
