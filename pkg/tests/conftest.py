import numpy as np
import pytest

from polarlink.family import CyclicFamilySpec, make_member

OMEGA = np.exp(2j * np.pi / 3)


@pytest.fixture
def spec222():
    return CyclicFamilySpec.of((2, 2, 2), (1, 1, 1))


@pytest.fixture
def omega_point():
    return np.array([1, OMEGA, OMEGA])


@pytest.fixture
def member_half(spec222):
    return make_member(spec222, 0.5)


def brute_eval(f, z):
    """Term-by-term evaluation with Python scalars, independent of the numpy path."""
    total = 0j
    for mono in f.monomials:
        term = mono.coeff
        for j in range(f.n):
            term *= complex(z[j]) ** mono.nu[j] * complex(z[j]).conjugate() ** mono.mu[j]
        total += term
    return total


def random_poly(rng, n, m, max_exp):
    from polarlink.mixedpoly import MixedPolynomial

    terms = []
    for _ in range(m):
        c = complex(rng.standard_normal(), rng.standard_normal())
        terms.append((c, rng.integers(0, max_exp + 1, n), rng.integers(0, max_exp + 1, n)))
    return MixedPolynomial.from_terms(n, terms)


# acceptance lines collected by test_acceptance.py, echoed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])
