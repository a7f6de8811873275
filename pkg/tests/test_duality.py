import numpy as np
import pytest

from frame_iterates.duality import (canonical_dual, dual_from_h0, dual_operator_uniqueness,
                                    frame_operator_pinv, reconstruction_residual, toeplitz_defect,
                                    zero_padded_dual)
from frame_iterates.errors import NotApplicable
from frame_iterates.frames import frame_bounds
from frame_iterates.generators import GeneratorSpec, generate
from frame_iterates.iteration import represent_by_iteration


@pytest.fixture(scope="module")
def sinc():
    fam = generate(GeneratorSpec("sinc_oversampled", 24, {"rate": 3}))
    return fam, represent_by_iteration(fam)


def test_canonical_dual_is_involution(sinc):
    fam, _ = sinc
    dd = canonical_dual(canonical_dual(fam).family)
    assert np.allclose(dd.family.vectors, fam.vectors, atol=1e-10)


def test_reconstruction_is_symmetric(sinc):
    fam, _ = sinc
    d = canonical_dual(fam)
    assert d.reconstruction_residual <= 1e-10
    assert reconstruction_residual(d.family, fam.vectors) <= 1e-10


def test_h0_canonical_fixed_point(sinc):
    fam, rep = sinc
    h0 = frame_operator_pinv(fam) @ fam.vector(0)
    d = dual_from_h0(fam, rep, h0)
    assert np.allclose(d.vectors, canonical_dual(fam, rep).vectors, atol=1e-10)


def test_h0_off_span_is_projected(sinc):
    fam = generate(GeneratorSpec("shift_invariant", 16, {"profile": "sinc_dilated"}))
    rep = represent_by_iteration(fam)
    if frame_bounds(fam).rank == fam.ambient_dim:
        pytest.skip("family spans the ambient space")
    h0 = np.ones(fam.ambient_dim, complex)
    with pytest.warns(UserWarning):
        d = dual_from_h0(fam, rep, h0)
    assert d.reconstruction_residual <= 1e-8


def test_uniqueness_needs_representable_dual():
    fam = generate(GeneratorSpec("shift_invariant", 16, {"profile": "sinc_dilated"}))
    rep = represent_by_iteration(fam)
    z = zero_padded_dual(fam)
    with pytest.raises(NotApplicable):
        dual_operator_uniqueness(fam, rep, z)


def test_zero_padded_dual_reconstructs_but_is_dependent():
    fam = generate(GeneratorSpec("shift_invariant", 16, {"profile": "sinc_dilated"}))
    z = zero_padded_dual(fam)
    assert z.reconstruction_residual <= 1e-10
    assert frame_bounds(z.family).excess > 0


def test_periodic_fourier_gram_is_toeplitz():
    assert toeplitz_defect(generate(GeneratorSpec("fourier", 16, {"boundary": "periodic"}))) <= 1e-10
