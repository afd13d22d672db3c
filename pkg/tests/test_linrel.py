import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharpspec import linrel as lr
from sharpspec.verify import random_operator, random_pair

TOL = 1e-10


def test_orthonormalize_drops_dependent_columns():
    S = lr.orthonormalize([[1.0, 0, 0], [2.0, 0, 0], [0, 1.0, 0]])
    assert S.dim == 2
    np.testing.assert_allclose(S.basis.T @ S.basis, np.eye(2), atol=1e-14)


def test_complement_and_sum_span_everything():
    S = lr.coordinate_subspace(5, [0, 3])
    C = lr.complement(S)
    assert C.dim == 3
    assert lr.distance(lr.subspace_sum(S, C), lr.full_subspace(5)) < TOL
    assert lr.intersect(S, C).dim == 0


def test_distance_is_one_for_different_dimensions():
    assert lr.distance(lr.coordinate_subspace(3, [0]), lr.coordinate_subspace(3, [0, 1])) == 1.0


def test_parts_of_matrix():
    M = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    p = lr.parts(lr.LinearRelation.from_matrix(M))
    assert (p.kernel.dim, p.range.dim, p.domain.dim, p.mul.dim) == (2, 1, 3, 0)
    assert lr.distance(p.kernel, lr.orthonormalize([[1.0, -1.0, 0.0], [0, 0, 1.0]])) < TOL


def test_multivalued_relation_has_mul():
    R = lr.LinearRelation.from_pairs(np.array([[0.0, 1.0]]), np.array([[1.0, 0.0]]))
    p = lr.parts(R)
    assert p.mul.dim == 1 and p.domain.dim == 1
    assert not R.is_functional()


def test_adjoint_of_matrix_is_transpose():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((4, 6))
    A = lr.LinearRelation.from_matrix(M)
    assert lr.relation_distance(lr.adjoint(A), lr.LinearRelation.from_matrix(M.T)) < TOL


def test_compose_matches_matrix_product():
    rng = np.random.default_rng(1)
    M, N = rng.standard_normal((3, 5)), rng.standard_normal((4, 3))
    C = lr.compose(lr.LinearRelation.from_matrix(M), lr.LinearRelation.from_matrix(N))
    np.testing.assert_allclose(C.operator_matrix(), N @ M, atol=1e-12)


def test_three_node_example():
    sp = lr.sharp(lr.path_pair(3))
    assert lr.distance(sp.kerB, lr.orthonormalize([[1.0, 1.0]])) < TOL
    dom = lr.parts(sp.A_sharp).domain
    assert lr.distance(dom, lr.orthonormalize([[1.0, 0, 1.0], [0, 1.0, 0]])) < TOL


def test_krein_extension_properties():
    S = lr.second_difference_operator(12, 1.0 / 11)
    _, rep = lr.krein_sharp(lr.krein_pair(S))
    assert rep.passed
    assert rep.info["kernel dim"] == 2
    assert min(rep.info["eigenvalues"]) > -1e-10


def test_point_spectrum_of_symmetric_matrix():
    rng = np.random.default_rng(2)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    M = Q @ np.diag([1.0, 2, 2, 3, 5, 8]) @ Q.T
    res = lr.point_spectrum(lr.LinearRelation.from_matrix(M))
    np.testing.assert_allclose(res.eigenvalues, [1, 2, 2, 3, 5, 8], atol=1e-10)
    assert res.clusters()[1] == (pytest.approx(2.0), 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_reduction_identities_hold(seed):
    A = lr.LinearRelation.from_matrix(random_operator(np.random.default_rng(seed)))
    rep = lr.verify_reduction_identities(A, TOL)
    assert rep.passed, [c for c in rep.checks if not c.passed]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_sharp_identities_hold(seed):
    rep = lr.verify_sharp_identities(lr.sharp(random_pair(np.random.default_rng(seed))), TOL)
    assert rep.passed, [c for c in rep.checks if not c.passed]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_adjoint_routes_agree_and_involute(seed):
    rng = np.random.default_rng(seed)
    R = lr.LinearRelation.from_pairs(rng.standard_normal((4, 3)), rng.standard_normal((5, 3)))
    assert lr.relation_distance(lr.adjoint(lr.adjoint(R)), R) < TOL
    assert lr.relation_distance(lr.adjoint(R), lr.pairing_adjoint(R)) < TOL


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_sharp_sits_between_min_and_max(seed):
    sp = lr.sharp(random_pair(np.random.default_rng(seed)))
    assert lr.inclusion_gap(sp.pair.A0.graph, sp.A_sharp.graph) < TOL
    assert lr.inclusion_gap(sp.A_sharp.graph, sp.pair.A.graph) < TOL
