import numpy as np
import pytest

from frame_iterates.frames import (family_from_columns, frame_bounds, frame_operator, gram,
                                   kernel_basis, left_shift, right_shift, shift_invariance_defect)
from frame_iterates.generators import GeneratorSpec, generate


def test_right_and_left_shift():
    c, lost = right_shift([1, 2, 3])
    assert np.array_equal(c, [0, 1, 2]) and lost == 9
    c, lost = left_shift([1, 2, 3])
    assert np.array_equal(c, [2, 3, 0]) and lost == 1
    c, lost = right_shift([1, 2, 3], periodic=True)
    assert np.array_equal(c, [3, 1, 2]) and lost == 0


def test_repeated_vector_kernel():
    fam = family_from_columns([np.eye(2)[0], np.eye(2)[0]])
    ker = kernel_basis(fam)
    assert ker.dim == 1
    assert np.allclose(np.abs(ker.basis[:, 0]), 1 / np.sqrt(2))


def test_bounds_scale_quadratically():
    fam = generate(GeneratorSpec("sinc_oversampled", 12, {"rate": 3}))
    d1 = frame_bounds(fam)
    d2 = frame_bounds(fam.replace_vectors(3 * fam.vectors))
    assert np.isclose(d2.lower_bound_A, 9 * d1.lower_bound_A)
    assert np.isclose(d2.upper_bound_B, 9 * d1.upper_bound_B)


def test_gram_and_frame_operator_share_spectrum():
    fam = generate(GeneratorSpec("gabor", 8, {"ordering": "interleaved3"}))
    k = min(fam.size, fam.ambient_dim)
    a = np.sort(np.linalg.eigvalsh(gram(fam)))[-k:]
    b = np.sort(np.linalg.eigvalsh(frame_operator(fam)))[-k:]
    assert np.allclose(a, b, atol=1e-10)


def test_onb_is_tight_and_independent():
    d = frame_bounds(family_from_columns(list(np.eye(4))))
    assert d.tight and d.linearly_independent and d.excess == 0


@pytest.mark.parametrize("kind,params", [("sinc_oversampled", {"rate": 3}), ("shift_invariant", {})])
def test_defect_unitary_invariant(kind, params):
    fam = generate(GeneratorSpec(kind, 12, params))
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((fam.ambient_dim,) * 2))
    a = shift_invariance_defect(kernel_basis(fam)).defect
    b = shift_invariance_defect(kernel_basis(fam.transformed(q))).defect
    assert abs(a - b) <= 1e-10


def test_family_validation():
    with pytest.raises(ValueError):
        family_from_columns([])
