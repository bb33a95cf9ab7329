from fractions import Fraction

import numpy as np
import pytest
import sympy

from polarlink.family import CyclicFamilySpec, make_brieskorn
from polarlink.mixedpoly import MixedMonomial, MixedPolynomial
from polarlink.torusmap import (
    OnCoordinatePlane, apply_torus_map, build_torus_map, check_fiber_preservation,
    exact_residual, extendability_report,
)
from polarlink.weights import NotFull, SingularSystem, is_simplicial


def example_poly():
    # z1^3 zb1 z2 + z2^3 zb2 z3 + z3^3 zb3 z1
    terms = []
    for j in range(3):
        nu = [0, 0, 0]
        mu = [0, 0, 0]
        nu[j] = 3
        mu[j] = 1
        nu[(j + 1) % 3] = 1
        terms.append(MixedMonomial(1, tuple(nu), tuple(mu)))
    return MixedPolynomial(3, terms)


EXAMPLE_E = [[Fraction(v, 9) for v in row] for row in [[17, -4, 2], [2, 17, -4], [-4, 2, 17]]]


def random_full_simplicial(rng, n):
    while True:
        N = rng.integers(0, 4, (n, n))
        M = rng.integers(0, 3, (n, n))
        coeffs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        f = MixedPolynomial(n, [MixedMonomial(complex(c), tuple(map(int, nu)), tuple(map(int, mu)))
                                for c, nu, mu in zip(coeffs, N, M)])
        if len(f) == n and is_simplicial(f):
            return f


def sympy_E(f):
    minus = sympy.Matrix((f.N - f.M).tolist())
    plus = sympy.Matrix((f.N + f.M).tolist())
    return minus.inv() * plus


def test_example_matrix_exact():
    tm = build_torus_map(example_poly())
    assert [list(r) for r in tm.E] == EXAMPLE_E
    assert all(v == 0 for row in exact_residual(tm) for v in row)


def test_holomorphic_identity():
    f = MixedPolynomial(2, [MixedMonomial(1, (2, 1), (0, 0)), MixedMonomial(2, (0, 3), (0, 0))])
    tm = build_torus_map(f)
    assert [list(r) for r in tm.E] == [[1, 0], [0, 1]]
    assert check_fiber_preservation(tm, 100, seed=0) <= 1e-14
    assert extendability_report(tm)["verdict"] == "extendable"


def test_brieskorn_diagonal():
    spec = CyclicFamilySpec.of((2, 3, 1), (1, 2, 3))
    tm = build_torus_map(make_brieskorn(spec.a, spec.b))
    for j in range(3):
        for k in range(3):
            want = Fraction(spec.a[j] + 2 * spec.b[j], spec.a[j]) if j == k else 0
            assert tm.E[j][k] == want
    rep = extendability_report(tm)
    assert rep["verdict"] == "extendable" and rep["diagonal"]


def test_errors():
    with pytest.raises(NotFull):
        build_torus_map(MixedPolynomial(2, [MixedMonomial(1, (1, 1), (0, 0))]))
    f = MixedPolynomial(2, [MixedMonomial(1, (1, 0), (0, 0)), MixedMonomial(1, (2, 0), (1, 0))])
    with pytest.raises(SingularSystem):
        build_torus_map(f)


def test_apply_examples():
    tm = build_torus_map(example_poly())
    z = np.exp(1j * np.array([0.3, -1.2, 2.5]))
    assert np.allclose(apply_torus_map(tm, z), z, rtol=0, atol=1e-15)
    w = apply_torus_map(tm, [2, 1, 1])
    assert np.allclose(w, [2 ** (17 / 9), 2 ** (2 / 9), 2 ** (-4 / 9)], rtol=1e-14)
    with pytest.raises(OnCoordinatePlane):
        apply_torus_map(tm, [1, 0, 1j])


def test_phase_bitwise_preserved():
    tm = build_torus_map(example_poly())
    rng = np.random.default_rng(0)
    for _ in range(50):
        z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        w = apply_torus_map(tm, z)
        xi = np.abs(w)
        phase = z / np.abs(z)
        assert np.array_equal(w, np.exp(tm.E_float() @ np.log(np.abs(z))) * phase)
        assert np.allclose(w / xi, phase, rtol=0, atol=1e-15)


def test_fiber_preservation_example_and_negative_control():
    tm = build_torus_map(example_poly())
    assert check_fiber_preservation(tm, 100, seed=1) <= 1e-10
    bad = [list(r) for r in tm.E]
    bad[0][1] += 1
    assert check_fiber_preservation(tm.with_E(bad), 100, seed=1) > 1e-2


def test_random_full_simplicial_instances():
    rng = np.random.default_rng(2)
    for k in range(20):
        f = random_full_simplicial(rng, int(rng.integers(2, 6)))
        tm = build_torus_map(f)
        assert sympy.Matrix([list(r) for r in tm.E]) == sympy_E(f)
        assert all(v == 0 for row in exact_residual(tm) for v in row)
        assert check_fiber_preservation(tm, 100, seed=k) <= 1e-10


def test_inverse_round_trip():
    rng = np.random.default_rng(3)
    for f in [example_poly()] + [random_full_simplicial(rng, 3) for _ in range(5)]:
        tm = build_torus_map(f)
        inv = tm.inverse()
        for _ in range(20):
            z = np.exp(rng.uniform(-1, 1, f.n)) * np.exp(1j * rng.uniform(0, 6.28, f.n))
            assert np.allclose(apply_torus_map(inv, apply_torus_map(tm, z)), z, rtol=1e-12, atol=0)


def test_extendability_example():
    rep = extendability_report(build_torus_map(example_poly()))
    assert rep["verdict"] == "non-extendable across coordinate planes"
    assert rep["negative_entries"] == [[0, 1], [1, 2], [2, 0]]
    assert rep["E"][0] == ["17/9", "-4/9", "2/9"]


def test_extendability_positive_non_diagonal():
    tm = build_torus_map(example_poly()).with_E([[2, 1, 0], [0, 1, 0], [0, 0, 1]])
    assert extendability_report(tm)["verdict"] == "no obstruction found"


def test_laurent_rejects_coordinate_plane_with_negative_exponent():
    f = MixedPolynomial(2, [MixedMonomial(1, (2, 0), (0, 1)), MixedMonomial(1, (0, 2), (0, 0))])
    g = build_torus_map(f).target
    assert g.eval([2, 1]) == pytest.approx(5)
    with pytest.raises(OnCoordinatePlane):
        g.eval([1, 0])
