import numpy as np
import pytest

import corpus
from frame_iterates.errors import NotRepresentable
from frame_iterates.generators import GeneratorSpec, appendix_matrix, generate
from frame_iterates.iteration import (BOUNDED, DIVERGENT, INCONCLUSIVE, boundedness_ladder,
                                      excess_growth_check, extension_injectivity_probe,
                                      growth_exponent, norm_bounds_check, represent_by_iteration)


def test_onb_shift_is_identity_on_indices():
    fam = corpus.hand_built()[0][0]
    rep = represent_by_iteration(fam)
    for k in range(fam.k_min, fam.k_max):
        assert np.allclose(rep.op_matrix @ fam.vector(k), fam.vector(k + 1))


def test_strict_raises_for_non_representable():
    with pytest.raises(NotRepresentable) as exc:
        represent_by_iteration(corpus.paired_repetition())
    assert not exc.value.rep.representable


def test_reversal_gives_inverse():
    fam = generate(GeneratorSpec("sinc_oversampled", 12, {"rate": 3}))
    t = represent_by_iteration(fam)
    r = represent_by_iteration(fam.reversed())
    d = t.domain_basis
    assert np.linalg.norm(r.op_matrix @ t.op_matrix @ d - d) <= 1e-8


@pytest.mark.parametrize("name", ["sinc r=3", "weighted onb", "gabor interleaved3", "fourier periodic"])
def test_norm_at_least_one(name):
    rep = represent_by_iteration(corpus.ladder_family(name, 16 if name != "sinc r=3" else 12))
    assert rep.norm_on_span >= 1 - 1e-8
    assert norm_bounds_check(rep, raise_on_fail=False)["ok"]


def test_riesz_families_are_bounded():
    lad = boundedness_ladder(GeneratorSpec("weighted_onb", 8), (8, 16, 32, 64))
    assert lad.verdict == BOUNDED
    assert all(abs(e.norm - 2) <= 1e-10 for e in lad.entries)


def test_growth_exponent_of_power_law():
    ws = [8, 16, 32, 64]
    assert np.isclose(growth_exponent(ws, [w ** 1.5 for w in ws]), 1.5)
    assert np.isclose(growth_exponent(ws, [3.0] * 4), 0.0)


def test_constant_excess_is_not_bounded():
    r = excess_growth_check(GeneratorSpec("onb_plus_dependent", 8, {"alpha": 0.5}), (8, 16, 32),
                            raise_on_fail=False)
    assert r["constant_excess"] and r["verdict"] != BOUNDED and r["ok"]


def test_untrusted_ladder_is_inconclusive():
    assert corpus.ladders()["appendix frame"].verdict == INCONCLUSIVE


def test_interleaved_onb_doubles():
    lad = corpus.ladders()["interleaved onb"]
    assert lad.verdict == DIVERGENT
    norms = [e.norm for e in lad.entries]
    assert all(1.9 < b / a < 2.1 for a, b in zip(norms, norms[1:]))


def test_extension_probe_sigma_min_decays():
    s = [extension_injectivity_probe(appendix_matrix(n))["sigma_min"] for n in (8, 16, 32)]
    assert s[0] > s[1] > s[2] > 0


def test_ladder_rejects_bad_windows():
    with pytest.raises(ValueError):
        boundedness_ladder(GeneratorSpec("weighted_onb", 8), (16, 8))
