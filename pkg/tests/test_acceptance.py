"""Acceptance criteria 1-14, each at its stated tolerance.

Every criterion prints one PASS/FAIL line (collected into the pytest
terminal summary; ``python3 tests/test_acceptance.py`` prints them directly).
"""
import os
import sys

import numpy as np
import pytest
from scipy.linalg import null_space

sys.path.insert(0, os.path.dirname(__file__))
import corpus  # noqa: E402

from frame_iterates import numerics as nx  # noqa: E402
from frame_iterates.duality import (canonical_dual, dual_from_h0,  # noqa: E402
                                    dual_operator_uniqueness, intertwining_check)
from frame_iterates.frames import frame_bounds, gram  # noqa: E402
from frame_iterates.generators import GeneratorSpec, appendix_matrix, generate  # noqa: E402
from frame_iterates.iteration import (BOUNDED, DIVERGENT, INCONCLUSIVE,  # noqa: E402
                                      represent_by_iteration, sigma_min_on_span)
from frame_iterates.perturbation import (lambda1, monte_carlo_sup,  # noqa: E402
                                         reproduce_lambda_stability,
                                         reproduce_mu_breaks_boundedness,
                                         reproduce_mu_breaks_independence,
                                         reproduce_riesz_partition)
from frame_iterates.reproduce import zero_padded  # noqa: E402

RESULTS = {}


def record(n: int, ok: bool, detail: str):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def _pairs(fam):
    u = fam.vectors
    if fam.periodic:
        return u, np.roll(u, -1, axis=1)
    return u[:, :-1], u[:, 1:]


def shift_compatible_oracle(fam) -> bool:
    """Independent oracle: excess 0 among the predecessors, or every
    dependency among them is carried to a dependency by the index shift."""
    prev, nxt = _pairs(fam)
    s0 = np.linalg.svd(prev, compute_uv=False)[0]
    ker = null_space(prev, rcond=max(prev.shape) * np.finfo(float).eps)
    if ker.shape[1] == 0:
        return True
    col = np.linalg.norm(nxt, axis=0).max()
    return np.linalg.norm(nxt @ ker) <= 1e-8 * max(col, s0)


# ----- criteria -------------------------------------------------------------

def criterion_1():
    fams = [(f, shift_compatible_oracle(f)) for f in corpus.generator_corpus()]
    hand = corpus.hand_built()
    for f, expected in hand:
        assert shift_compatible_oracle(f) == expected, f.label
    fams += hand
    wrong = []
    for f, expected in fams:
        rep = represent_by_iteration(f, strict=False, with_inverse=False)
        if (rep.residual <= 1e-8) != expected:
            wrong.append(f"{f.label} N={f.size}")
    return record(1, not wrong, f"{len(fams)} families, mismatches: {wrong or 'none'}")


def criterion_2():
    bad, count = [], 0
    for name, lad in corpus.ladders().items():
        if lad.verdict != BOUNDED:
            continue
        for e in lad.entries:
            count += 1
            top = e.sqrt_B_over_A + 1e-6
            if not (1 - 1e-8 <= e.norm <= top and 1 - 1e-8 <= e.inv_norm <= top):
                bad.append(f"{name} N={e.window}: |T|={e.norm:.6g} |T^-1|={e.inv_norm:.6g}")
    return record(2, count > 0 and not bad, f"{count} bounded-stable windows, violations: {bad or 'none'}")


def criterion_3():
    problems, flagged = [], []
    for name, lad in corpus.ladders().items():
        trusted = [d for d, t in zip(lad.defects_right, lad.trusted) if t]
        if lad.verdict == BOUNDED:
            mixed = any(not d <= 1e-6 for d in trusted)
        elif lad.verdict == DIVERGENT:
            mixed = any(not d >= 0.1 for d in trusted)
        else:
            continue
        if mixed:
            flagged.append(name)
            if lad.biconditional != INCONCLUSIVE:
                problems.append(f"{name}: mixed outcome not flagged")
        elif lad.biconditional != "consistent":
            problems.append(f"{name}: {lad.biconditional}")
    for name in corpus.SPEC_NAMED:
        if corpus.ladders()[name].biconditional != "consistent":
            problems.append(f"{name}: expected consistent")
    detail = f"problems: {problems or 'none'}; flagged inconclusive: {flagged or 'none'}"
    return record(3, not problems, detail)


def criterion_4():
    lads = corpus.ladders()
    g, lat = lads["gabor interleaved3"], lads["gabor lattice"]
    ok = (g.verdict == DIVERGENT and g.growth_exponent >= 0.1 and tuple(g.windows) == (8, 16, 32, 64)
          and lat.verdict == BOUNDED)
    return record(4, ok, f"reordered: {g.verdict} exponent {g.growth_exponent:.2f}; lattice: {lat.verdict}")


def criterion_5():
    worst, count, bad = 0.0, 0, []
    for name, spec, ws in corpus.LADDER_SPECS:
        if corpus.ladders()[name].verdict != BOUNDED:
            continue
        for n in ws:
            fam = generate(spec.with_size(n))
            if not frame_bounds(fam).tight:
                continue
            rep = represent_by_iteration(fam)
            d = rep.domain_basis
            iso = nx.opnorm(rep.op_matrix.conj().T @ rep.op_matrix @ d - d)
            worst, count = max(worst, iso), count + 1
            if iso > 1e-6:
                bad.append(f"{name} N={n}")
    return record(5, count > 0 and not bad, f"{count} tight windows, max |T*T - I| = {worst:.2e}")


def criterion_6():
    worst, count = 0.0, 0
    for name, spec, ws in corpus.LADDER_SPECS:
        if corpus.ladders()[name].verdict != BOUNDED:
            continue
        for n in ws[:3]:
            fam = generate(spec.with_size(n))
            rep = represent_by_iteration(fam)
            if not rep.invertible_on_span:
                continue
            d = canonical_dual(fam, rep, bounded_stable=True)
            worst, count = max(worst, d.iterated_form_residual), count + 1
    return record(6, count > 0 and worst <= 1e-7, f"{count} reps, max iterated-form residual {worst:.2e}")


def criterion_7():
    worst_rec = worst_uni = worst_h0 = 0.0
    fams = [generate(GeneratorSpec("sinc_oversampled", 24, {"rate": 3})),
            generate(GeneratorSpec("weighted_onb", 16))]
    for fam in fams:
        rep = represent_by_iteration(fam)
        q = rep.span_basis
        for seed in range(20):
            rng = np.random.default_rng(seed)
            h0 = q @ (rng.standard_normal(q.shape[1]) + 1j * rng.standard_normal(q.shape[1]))
            d = dual_from_h0(fam, rep, h0, seed=seed)
            u = dual_operator_uniqueness(fam, rep, d, raise_on_fail=False)
            worst_rec = max(worst_rec, d.reconstruction_residual)
            worst_uni = max(worst_uni, u["uniqueness_residual"])
        d0 = dual_from_h0(fam, rep, np.zeros(fam.ambient_dim))
        cd = canonical_dual(fam, rep)
        worst_h0 = max(worst_h0, float(np.abs(d0.vectors - cd.vectors).max()))
    ok = worst_rec <= 1e-8 and worst_uni <= 1e-7 and worst_h0 <= 1e-10
    return record(7, ok, f"reconstruction {worst_rec:.1e}, |VT*-I| {worst_uni:.1e}, h0=0 vs canonical {worst_h0:.1e}")


def criterion_8():
    r = zero_padded(raise_on_fail=False)
    c = r["checks"]
    return record(8, c["linearly_dependent"] and c["not_representable"],
                  f"dual residual {r['reconstruction_residual']:.1e}, excess {r['dual_excess']}, "
                  f"representation residual {r['dual_residual']:.2f}")


def criterion_9():
    tu_worst = tst_worst = 0.0
    unitary = nonunitary = 0
    bic_fail = []
    for name, spec, _ in corpus.LADDER_SPECS:
        fam = generate(spec.with_size(12 if name.startswith("sinc r=3") else 16)) \
            if name != "appendix frame" else generate(spec.with_size(10))
        rep = represent_by_iteration(fam, strict=False)
        if not rep.representable:
            continue
        bounded = corpus.ladders()[name].verdict == BOUNDED
        r = intertwining_check(fam, rep, bounded_stable=bounded, raise_on_fail=False)
        tu_worst = max(tu_worst, r["TU_minus_UT_rel"])
        if bounded and rep.invertible_on_span:
            tst_worst = max(tst_worst, r["TSTstar_minus_S_rel"])
            unitary += r["unitary"]
            nonunitary += not r["unitary"]
            if r["commutes"] != r["unitary"]:
                bic_fail.append(name)
    ok = tu_worst <= 1e-8 and tst_worst <= 1e-7 and not bic_fail and unitary >= 1 and nonunitary >= 1
    return record(9, ok, f"|TU-UT|/|U| {tu_worst:.1e}, |TST*-S|/|S| {tst_worst:.1e}, "
                         f"unitary {unitary}, non-unitary {nonunitary}, biconditional failures {bic_fail or 'none'}")


def criterion_10():
    runs = [reproduce_mu_breaks_independence(a, raise_on_fail=False) for a in (1e-3, 0.1, 0.5)]
    ind = all(r["verdict"]["g_is_frame"] and not r["verdict"]["g_representable"] for r in runs)
    sp = reproduce_mu_breaks_boundedness(0.1, raise_on_fail=False)
    fb, gd = sp["ladder_f"]["verdict"], sp["ladder_g"]["verdict"]
    ok = ind and fb == BOUNDED and gd == DIVERGENT
    return record(10, ok, f"mu-independence g frame & not representable: {ind}; sinc-perturb f {fb}, g {gd}")


def criterion_11():
    r = reproduce_lambda_stability(0.1, raise_on_fail=False)
    t = r["transfer"]
    lam = r["verdict"]["lambda1_min"]
    ok = (abs(lam - 0.1) <= 1e-10 and t["checks"]["g_representable"] and t["g_ladder_verdict"] == BOUNDED
          and t["max_kernel_angle"] <= 1e-7)
    return record(11, ok, f"lambda_1 {lam:.12f}, V {t['g_ladder_verdict']}, max kernel angle {t['max_kernel_angle']:.1e}")


def criterion_12():
    r = reproduce_riesz_partition(0.5, raise_on_fail=False)
    parts = r.get("g_parts", [])
    ok = (r["precondition"] and abs(r["mu_measured"] - 0.5 * r["sqrt_A"]) <= 1e-9 and len(parts) == 3
          and all(p["riesz"] and p["ladder_verdict"] == BOUNDED for p in parts))
    return record(12, ok, f"mu {r['mu_measured']:.6f} vs sqrt(A) {r['sqrt_A']:.3f}; parts "
                          + ", ".join(f"{p['ladder_verdict']} (excess {p['excess']})" for p in parts))


def criterion_13():
    lad = corpus.ladders()["interleaved onb"]
    smin = [sigma_min_on_span(appendix_matrix(n)) for n in (8, 16, 32, 64)]
    dec = all(b < a for a, b in zip(smin, smin[1:]))
    ok = lad.verdict == DIVERGENT and dec
    return record(13, ok, f"interleaved {lad.verdict}; sigma_min " + ", ".join(f"{s:.2e}" for s in smin))


def criterion_14():
    over, probes = [], 10_000
    fams = [generate(GeneratorSpec("sinc_oversampled", 24, {"rate": 3})),
            generate(GeneratorSpec("gabor", 16, {"ordering": "interleaved3"})),
            generate(GeneratorSpec("weighted_onb", 16)),
            generate(GeneratorSpec("riesz_appendix", 10))]
    slack = 1 + 1e-10
    for i, f in enumerate(fams):
        u = f.vectors
        if monte_carlo_sup(u, None, probes, seed=i) > nx.opnorm(u) * slack:
            over.append(f"|U| {f.label}")
        rep = represent_by_iteration(f, strict=False)
        if rep.representable:
            t = rep.op_matrix @ rep.span_basis
            if monte_carlo_sup(t, None, probes, seed=i) > rep.norm_on_span * slack:
                over.append(f"|T| {f.label}")
    # perturbation constants
    f = fams[0]
    g = generate(GeneratorSpec("sinc_oversampled", 24, {"rate": 3}))
    ug = g.vectors.copy()
    ug[:, g.pos(0)] *= np.exp(-2j * np.pi * 0.1 * np.linspace(-0.5, 0.5, ug.shape[0], endpoint=False))
    d = f.vectors - ug
    if monte_carlo_sup(d, None, probes, seed=7) > nx.opnorm(d) * slack:
        over.append("mu_min")
    lam = lambda1(f.vectors, 1.1 * f.vectors)
    mc_lam = monte_carlo_sup(-0.1 * f.vectors, f.vectors, probes, seed=8)
    if mc_lam > lam * slack or mc_lam < 0.98 * lam:
        over.append(f"lambda_1 {mc_lam} vs {lam}")
    # Gram eigenvalues against sampled Rayleigh quotients
    gram_err = 0.0
    rng = np.random.default_rng(3)
    for f in fams:
        w, v = nx.eigh(gram(f))
        c = rng.standard_normal((f.size, 2000)) + 1j * rng.standard_normal((f.size, 2000))
        ratio = np.linalg.norm(f.vectors @ c, axis=0) ** 2 / np.linalg.norm(c, axis=0) ** 2
        if ratio.min() < w[0] - 1e-8 or ratio.max() > w[-1] + 1e-8:
            over.append(f"Rayleigh {f.label}")
        at = np.linalg.norm(f.vectors @ v[:, [0, -1]], axis=0) ** 2
        gram_err = max(gram_err, abs(at[0] - w[0]), abs(at[1] - w[-1]))
        diag = frame_bounds(f)
        q = nx.range_basis(f.vectors)
        x = q @ (rng.standard_normal((q.shape[1], 2000)) + 1j * rng.standard_normal((q.shape[1], 2000)))
        fr = np.sum(np.abs(f.vectors.conj().T @ x) ** 2, axis=0) / np.linalg.norm(x, axis=0) ** 2
        if fr.min() < diag.lower_bound_A - 1e-8 or fr.max() > diag.upper_bound_B + 1e-8:
            over.append(f"frame bounds {f.label}")
    ok = not over and gram_err <= 1e-8
    return record(14, ok, f"violations: {over or 'none'}; eigenvector Rayleigh error {gram_err:.1e}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13, criterion_14]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i + 1:02d}" for i in range(len(CRITERIA))])
def test_acceptance(criterion):
    assert criterion(), RESULTS.get(CRITERIA.index(criterion) + 1)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
