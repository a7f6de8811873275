import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from frame_iterates import numerics as nx
from frame_iterates.errors import InvalidMatrix, NotHermitian

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_eigh_example():
    w, _ = nx.eigh([[1, 1], [1, 2]])
    assert np.allclose(w, [(3 - np.sqrt(5)) / 2, (3 + np.sqrt(5)) / 2], atol=1e-14)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        nx.eigh([[1, 2], [0, 1]])


def test_lstsq_example():
    x = nx.lstsq(np.array([[1.0], [1.0]]), np.array([0.0, 2.0]))
    assert np.allclose(x, [1.0])


def test_non_finite_rejected():
    with pytest.raises(InvalidMatrix):
        nx.as_matrix([[np.nan, 1.0]])


def test_svd_unpacks_with_right_basis_as_columns():
    a = np.random.default_rng(0).standard_normal((4, 3))
    u, s, v = nx.svd(a, full=False)
    assert np.allclose(u * s @ v.conj().T, a)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (5, 3), elements=finite))
def test_rank_nullity(a):
    r = nx.numerical_rank(a)
    assert nx.range_basis(a).shape[1] == r
    assert nx.null_basis(a).shape[1] == 3 - r


@settings(max_examples=50, deadline=None)
@given(arrays(float, (4, 4), elements=finite))
def test_opnorm_is_largest_singular_value(a):
    assert np.isclose(nx.opnorm(a), np.linalg.svd(a, compute_uv=False)[0])


def test_principal_angles_nested_subspaces():
    e = np.eye(3)
    assert np.allclose(nx.principal_angles(e[:, :1], e[:, :2]), 0)
    assert np.allclose(nx.principal_angles(e[:, :1], e[:, 1:2]), np.pi / 2)


@given(finite, finite)
def test_complex_text_roundtrip(re, im):
    z = complex(re, im)
    assert nx.parse_complex(nx.format_complex(z)) == z


def test_matrix_csv_roundtrip():
    a = np.random.default_rng(1).standard_normal((3, 4)) + 1j
    assert np.array_equal(nx.matrix_from_csv(nx.matrix_to_csv(a)), a)


def test_tolerance_override_validation():
    assert nx.DEFAULT_TOL.with_overrides(eta=1e-3).eta == 1e-3
    with pytest.raises(ValueError):
        nx.DEFAULT_TOL.with_overrides(edge_width=0)
