import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import el
from oracles import operator_norm
from ternstab import AlgebraInstance, ExplicitGrid, SampleGrid, check_algebra_axioms, tnorm, tproduct
from ternstab.errors import DimensionError, NonFiniteError
from ternstab.sampling import random_element

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
scalars = st.builds(complex, finite, finite)


def test_parse_names():
    assert AlgebraInstance.parse("complex") == AlgebraInstance("complex")
    assert AlgebraInstance.parse("pointwise:4").dimension == 4
    assert AlgebraInstance.parse("matrix:3").dimension == 9
    assert AlgebraInstance.parse("matrix:3").name == "matrix:3"


@pytest.mark.parametrize("bad", ["", "pointwise", "pointwise:0", "matrix:-2", "matrix:x", "quaternion:2"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        AlgebraInstance.parse(bad)


def test_tproduct_complex_line():
    A = AlgebraInstance.parse("complex")
    assert tproduct(A, el(2), el(1j), el(3))[0] == -6j


def test_tproduct_zero_outer(algebra):
    rng = np.random.default_rng(0)
    x = random_element(rng, algebra, (1, 2))
    y = random_element(rng, algebra, (1, 2))
    assert not np.any(tproduct(algebra, x, y, algebra.zero()))


def test_tproduct_pointwise():
    A = AlgebraInstance.parse("pointwise:2")
    np.testing.assert_array_equal(tproduct(A, el(1, 2), el(1, 1), el(1, 1)), el(1, 2))


def test_tproduct_matrix_is_x_ystar_z():
    A = AlgebraInstance.parse("matrix:2")
    x, y, z = el(1, 2j, 0, 1), el(1j, 0, 1, 1), el(0, 1, 1, 0)
    want = x.reshape(2, 2) @ y.reshape(2, 2).conj().T @ z.reshape(2, 2)
    np.testing.assert_array_equal(tproduct(A, x, y, z), want.ravel())


def test_tproduct_dimension_error_names_argument():
    A = AlgebraInstance.parse("pointwise:3")
    with pytest.raises(DimensionError) as exc:
        tproduct(A, el(1, 2, 3), el(1, 2), el(1, 2, 3))
    assert exc.value.argument == "y"


@pytest.mark.parametrize(
    "name, coords, expected",
    [
        ("complex", [3 + 4j], 5.0),
        ("pointwise:3", [1, -2, 1j], 2.0),
        ("matrix:2", [3, 0, 0, 1], 3.0),
    ],
)
def test_tnorm_examples(name, coords, expected):
    assert tnorm(AlgebraInstance.parse(name), el(*coords)) == pytest.approx(expected, rel=1e-12)


def test_tnorm_rejects_nonfinite():
    with pytest.raises(NonFiniteError):
        tnorm(AlgebraInstance.parse("pointwise:2"), el(1, math.inf))


def test_matrix_norm_against_svd():
    A = AlgebraInstance.parse("matrix:4")
    rng = np.random.default_rng(7)
    for _ in range(50):
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert tnorm(A, m.ravel()) == pytest.approx(operator_norm(m), rel=1e-9)


def test_matrix_norm_start_vector_in_kernel():
    # all-ones is annihilated by this matrix; the restart must still find 2
    A = AlgebraInstance.parse("matrix:2")
    m = np.array([[1, -1], [1, -1]], dtype=complex)
    assert tnorm(A, m.ravel()) == pytest.approx(operator_norm(m), rel=1e-12)
    assert tnorm(A, A.zero()) == 0.0


def test_matrix_norm_deterministic():
    A = AlgebraInstance.parse("matrix:3")
    x = random_element(np.random.default_rng(3), A, (1, 4))
    assert tnorm(A, x) == tnorm(A, x.copy())


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), alpha=scalars, beta=scalars)
def test_tproduct_linearity_properties(algebra, seed, alpha, beta):
    rng = np.random.default_rng(seed)
    x, x2, y, z = (random_element(rng, algebra, (0.5, 3)) for _ in range(4))
    T, nrm = algebra.tproduct, algebra.norm
    lhs = T(alpha * x + beta * x2, y, z)
    rhs = alpha * T(x, y, z) + beta * T(x2, y, z)
    scale = (abs(alpha) * nrm(x) + abs(beta) * nrm(x2)) * nrm(y) * nrm(z)
    assert nrm(lhs - rhs) <= 1e-9 * (scale + 1e-3)
    lhs = T(x, alpha * y, z)
    rhs = np.conj(alpha) * T(x, y, z)
    assert nrm(lhs - rhs) <= 1e-9 * (abs(alpha) * nrm(x) * nrm(y) * nrm(z) + 1e-3)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_submultiplicative_and_cstar(algebra, seed):
    rng = np.random.default_rng(seed)
    x, y, z = (random_element(rng, algebra, (0.1, 5)) for _ in range(3))
    nrm = algebra.norm
    p = nrm(x) * nrm(y) * nrm(z)
    assert nrm(algebra.tproduct(x, y, z)) <= p + 1e-9 * (p + 1)
    assert nrm(algebra.tproduct(x, x, x)) == pytest.approx(nrm(x) ** 3, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), alpha=scalars)
def test_tnorm_homogeneous(algebra, seed, alpha):
    x = random_element(np.random.default_rng(seed), algebra, (0.1, 5))
    assert tnorm(algebra, alpha * x) == pytest.approx(abs(alpha) * tnorm(algebra, x), rel=1e-9, abs=1e-300)


def test_axioms_complex_line_pass_tightly():
    rep = check_algebra_axioms(AlgebraInstance.parse("complex"), SampleGrid(seed=1, count=50), tol=1e-12)
    assert rep.passed


def test_axioms_pointwise_cstar_identity():
    rep = check_algebra_axioms(AlgebraInstance.parse("pointwise:4"), SampleGrid(seed=5, count=100, includes_structured=False))
    assert rep.worst("cstar_identity") <= 1e-12
    assert rep.results["cstar_identity"].checked == 100


def test_axioms_zero_grid_trivial(algebra):
    rep = check_algebra_axioms(algebra, ExplicitGrid([algebra.zero()]))
    assert rep.passed
    assert all(r.worst == 0 for r in rep.results.values())


def test_printed_middle_law_is_flagged_not_counted():
    rep = check_algebra_axioms(AlgebraInstance.parse("complex"), SampleGrid(seed=1, count=20))
    assert rep.passed
    assert not rep.results["associativity_middle_as_printed"].passed
    assert rep.flags and "associativity_middle_as_printed" in rep.flags[0]


def test_broken_product_is_detected():
    # a product without middle conjugation violates conjugate-linearity
    class Unconjugated(AlgebraInstance):
        def tproduct(self, x, y, z):
            return x * y * z

    rep = check_algebra_axioms(Unconjugated("pointwise", 2), SampleGrid(seed=3, count=10))
    assert not rep.passed
    assert rep.worst("middle_conjugate_linearity") > 0.1
