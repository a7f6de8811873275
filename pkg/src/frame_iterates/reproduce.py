"""One function per worked example; each returns a report with named checks
and raises ContractViolation when a check fails."""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import numerics as nx
from .duality import canonical_dual, dual_operator_uniqueness, toeplitz_defect, zero_padded_dual
from .errors import ContractViolation, NotApplicable, NotRepresentable
from .frames import frame_bounds, gram
from .generators import GeneratorSpec, appendix_matrix, generate, phi_profile, profile_hat
from .iteration import (BOUNDED, DIVERGENT, boundedness_ladder, norm_bounds_check,
                        represent_by_iteration, sigma_min_on_span)
from .numerics import DEFAULT_TOL, Tolerances
from .perturbation import (reproduce_mu_breaks_boundedness, reproduce_mu_breaks_independence,
                           reproduce_riesz_partition)

LADDER = (8, 16, 32, 64)
SINC3_LADDER = (12, 24, 48, 96)


def _finish(name: str, report: dict, raise_on_fail: bool) -> dict:
    report["name"] = name
    report["ok"] = all(bool(v) for v in report["checks"].values())
    if raise_on_fail and not report["ok"]:
        failed = [k for k, v in report["checks"].items() if not v]
        raise ContractViolation(f"{name}: failed checks {failed}", report)
    return report


def fourier_onb(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True,
                window: int = 16, M: int = 64) -> dict:
    """Exponentials on a uniform grid: T acts as multiplication by e^{2 pi i x}."""
    fam = generate(GeneratorSpec("fourier", window, {"M": M}))
    rep = represent_by_iteration(fam, tol)
    x = np.arange(M) / M
    d = rep.domain_basis
    mod_err = nx.opnorm((rep.op_matrix - np.diag(np.exp(2j * np.pi * x))) @ d)
    g = gram(fam)
    offdiag = float(np.abs(g - np.diag(np.diag(g))).max())
    lad = boundedness_ladder(GeneratorSpec("fourier", 8), LADDER, tol)
    report = {"residual": rep.residual, "modulation_error": mod_err, "gram_offdiag": offdiag,
              "ladder": lad.as_dict(),
              "checks": {"residual": rep.residual <= 1e-10, "T_is_modulation": mod_err <= 1e-10,
                         "orthogonal": offdiag <= 1e-10, "bounded_stable": lad.verdict == BOUNDED}}
    return _finish("fourier-onb", report, raise_on_fail)


def shift_invariant(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True) -> dict:
    """Phi test on named generators, and the translation orbit of each."""
    profiles = {}
    checks = {}
    for name in ("sinc", "sinc_dilated", "bspline"):
        prof = phi_profile(profile_hat(name)[0], grid_size=256)
        profiles[name] = prof.as_dict()
    checks["sinc_flat"] = abs(profiles["sinc"]["essential_inf_offN"] - 1) <= 1e-12 and \
        abs(profiles["sinc"]["essential_sup"] - 1) <= 1e-12
    checks["sinc_riesz"] = profiles["sinc"]["riesz"]
    checks["dilated_frame_sequence_not_riesz"] = profiles["sinc_dilated"]["frame_sequence"] and \
        not profiles["sinc_dilated"]["riesz"]
    ladders = {}
    for name in ("sinc", "sinc_dilated", "bspline"):
        lad = boundedness_ladder(GeneratorSpec("shift_invariant", 8, {"profile": name}), LADDER, tol)
        ladders[name] = lad.as_dict()
        checks[f"{name}_bounded_stable"] = lad.verdict == BOUNDED
        checks[f"{name}_defects_small"] = max(lad.defects_right) <= 1e-8
        fam = generate(GeneratorSpec("shift_invariant", 16, {"profile": name}))
        checks[f"{name}_toeplitz"] = toeplitz_defect(fam) <= 1e-8
    report = {"profiles": profiles, "ladders": ladders, "checks": checks}
    return _finish("shift-invariant", report, raise_on_fail)


def gabor_unbounded(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True,
                    windows=LADDER) -> dict:
    """Reordered 1/3-oversampled Gabor system: divergent; lattice order: bounded."""
    spec = GeneratorSpec("gabor", 8, {"ordering": "interleaved3"})
    lad = boundedness_ladder(spec, windows, tol)
    lat = boundedness_ladder(GeneratorSpec("gabor", 8, {"ordering": "lattice"}), windows, tol)
    fam = generate(spec.with_size(windows[-1]))
    odd = [fam.pos(k) for k in fam.indices if k % 2]
    g = fam.vectors[:, odd].conj().T @ fam.vectors[:, odd]
    onb_err = float(np.abs(g - np.eye(len(odd))).max())
    trusted = [d for d, t in zip(lad.defects_right, lad.trusted) if t]
    report = {
        "ladder": lad.as_dict(), "lattice_ladder": lat.as_dict(), "odd_onb_error": onb_err,
        "ordering": "odd slots: integer-modulation ONB; even slots: branches m = 1, 2 (mod 3) "
                    "alternating; both enumerated by |a| * 2 + |n| (a modulation, n translation)",
        "checks": {
            "divergent": lad.verdict == DIVERGENT,
            "growth_exponent": lad.growth_exponent >= 0.1,
            "defect_at_every_window": len(trusted) == len(windows) and min(trusted) >= 0.1,
            "lattice_bounded_stable": lat.verdict == BOUNDED,
            "odd_subfamily_onb": onb_err <= 1e-8,
        },
    }
    return _finish("gabor-unbounded", report, raise_on_fail)


TIGHT_CORPUS = (
    (GeneratorSpec("sinc_oversampled", 12, {"rate": 3}), SINC3_LADDER),
    (GeneratorSpec("sinc_oversampled", 8, {"rate": 2}), LADDER),
    (GeneratorSpec("shift_invariant", 8, {"profile": "sinc_dilated"}), LADDER),
    (GeneratorSpec("gabor", 8, {"ordering": "lattice"}), (8, 16, 32)),
    (GeneratorSpec("fourier", 8), LADDER),
    (GeneratorSpec("fourier", 8, {"boundary": "periodic"}), LADDER),
)


def tight_isometry(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True) -> dict:
    """Tight frame sequences with a bounded operator: T is an isometry on span."""
    rows, checks = [], {}
    for spec, windows in TIGHT_CORPUS:
        lad = boundedness_ladder(spec, windows, tol)
        for n in windows:
            fam = generate(spec.with_size(n))
            diag = frame_bounds(fam, tol)
            rep = represent_by_iteration(fam, tol)
            d = rep.domain_basis
            iso = nx.opnorm(rep.op_matrix.conj().T @ rep.op_matrix @ d - d)
            nb = norm_bounds_check(rep, diag, lad.verdict == BOUNDED, tol, raise_on_fail=False)
            key = f"{fam.label} N={n}"
            rows.append({"family": key, "tight": diag.tight, "isometry_defect": iso,
                         "norm": rep.norm_on_span, "verdict": lad.verdict})
            checks[f"{key}: tight"] = diag.tight
            checks[f"{key}: isometry"] = iso <= 1e-6
            checks[f"{key}: norm bounds"] = nb["ok"] and lad.verdict == BOUNDED
    return _finish("tight-isometry", {"families": rows, "checks": checks}, raise_on_fail)


DUAL_CORPUS = (
    GeneratorSpec("sinc_oversampled", 24, {"rate": 3}),
    GeneratorSpec("sinc_oversampled", 16, {"rate": 2}),
    GeneratorSpec("shift_invariant", 16, {"profile": "sinc"}),
    GeneratorSpec("shift_invariant", 16, {"profile": "sinc_dilated"}),
    GeneratorSpec("shift_invariant", 16, {"profile": "bspline"}),
    GeneratorSpec("gabor", 8, {"ordering": "lattice"}),
    GeneratorSpec("weighted_onb", 16),
    GeneratorSpec("fourier", 16, {"boundary": "periodic"}),
)


def canonical_dual_iterated(tol: Tolerances = DEFAULT_TOL, seed: int = 0,
                            raise_on_fail: bool = True) -> dict:
    """S^+ f_k = (T*)^{-k} S^+ f_0 for every bounded invertible representation."""
    rows, checks = [], {}
    for spec in DUAL_CORPUS:
        fam = generate(spec)
        rep = represent_by_iteration(fam, tol)
        dual = canonical_dual(fam, rep, tol, bounded_stable=False, seed=seed)
        entry = {"family": fam.label, "invertible": rep.invertible_on_span, **dual.as_dict()}
        checks[f"{fam.label}: invertible"] = rep.invertible_on_span
        checks[f"{fam.label}: iterated form"] = dual.iterated_form_residual <= 1e-7
        checks[f"{fam.label}: reconstruction"] = dual.reconstruction_residual <= 1e-8
        if frame_bounds(fam, tol).excess == 0:
            bio = float(np.abs(dual.vectors.conj().T @ fam.vectors - np.eye(fam.size)).max())
            entry["biorthogonality_error"] = bio
            checks[f"{fam.label}: biorthogonal"] = bio <= 1e-8
        rows.append(entry)
    return _finish("canonical-dual-iterated", {"families": rows, "checks": checks}, raise_on_fail)


def zero_padded(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True,
                window: int = 16) -> dict:
    """Dual of an overcomplete translation family with 0 at slot 0: not representable."""
    fam = generate(GeneratorSpec("shift_invariant", window, {"profile": "sinc_dilated"}))
    dual = zero_padded_dual(fam, tol)
    diag = frame_bounds(dual.family, tol)
    try:
        represent_by_iteration(dual.family, tol)
        not_rep, residual = False, 0.0
    except NotRepresentable as exc:
        not_rep, residual = True, exc.rep.residual
    try:
        frep = represent_by_iteration(fam, tol)
        dual_operator_uniqueness(fam, frep, dual, tol)
        not_applicable = False
    except NotApplicable:
        not_applicable = True
    report = {"reconstruction_residual": dual.reconstruction_residual, "dual_excess": diag.excess,
              "dual_residual": residual,
              "checks": {"is_dual": dual.reconstruction_residual <= 1e-8,
                         "linearly_dependent": not diag.linearly_independent,
                         "not_representable": not_rep,
                         "uniqueness_not_applicable": not_applicable}}
    return _finish("zero-padded-dual", report, raise_on_fail)


def mu_independence(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True,
                    alphas=(1e-3, 0.1, 0.5), window: int = 32) -> dict:
    runs = [reproduce_mu_breaks_independence(a, window, tol, raise_on_fail=False) for a in alphas]
    checks = {}
    for r in runs:
        for k, v in r["checks"].items():
            checks[f"alpha={r['alpha']}: {k}"] = v
    return _finish("mu-independence", {"runs": runs, "checks": checks}, raise_on_fail)


def sinc_perturb(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True,
                 c: float = 0.1, windows=(4, 6, 8, 10)) -> dict:
    r = reproduce_mu_breaks_boundedness(c, windows, tol=tol, raise_on_fail=False)
    return _finish("sinc-perturb", r, raise_on_fail)


def riesz_partition(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True,
                    mu_fraction: float = 0.5) -> dict:
    r = reproduce_riesz_partition(mu_fraction, SINC3_LADDER, tol, raise_on_fail=False)
    return _finish("riesz-partition", r, raise_on_fail)


def interleaved_unbounded(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True,
                          windows=LADDER) -> dict:
    """Two ONBs with independent union, interleaved: the operator diverges."""
    lad = boundedness_ladder(GeneratorSpec("interleaved_onb", 8), windows, tol)
    report = {"ladder": lad.as_dict(),
              "checks": {"union_independent": all(e == 0 for e in lad.as_dict()["excess"]),
                         "divergent": lad.verdict == DIVERGENT}}
    return _finish("interleaved-unbounded", report, raise_on_fail)


def extension_noninjective(tol: Tolerances = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True,
                           windows=LADDER) -> dict:
    """e_1, e_{k-1} + e_k / k: the bounded extension e_k -> f_k loses injectivity."""
    smin = [sigma_min_on_span(appendix_matrix(n)) for n in windows]
    fam = generate(GeneratorSpec("riesz_appendix", 7))
    diag = frame_bounds(fam, tol)
    full = frame_bounds(generate(GeneratorSpec("riesz_appendix", 7, {"ambient": "full"})), tol)
    report = {"windows": list(windows), "sigma_min": smin, "excess_compressed": diag.excess,
              "A": diag.lower_bound_A, "B": diag.upper_bound_B,
              "checks": {"sigma_min_decreasing": all(b < a for a, b in zip(smin, smin[1:])),
                         "frame_with_excess_1": diag.excess == 1 and diag.lower_bound_A > diag.tau,
                         "independent_in_full_ambient": full.excess == 0}}
    return _finish("extension-noninjective", report, raise_on_fail)


REGISTRY: dict = {
    "fourier-onb": fourier_onb,
    "shift-invariant": shift_invariant,
    "gabor-unbounded": gabor_unbounded,
    "tight-isometry": tight_isometry,
    "canonical-dual-iterated": canonical_dual_iterated,
    "zero-padded-dual": zero_padded,
    "mu-independence": mu_independence,
    "sinc-perturb": sinc_perturb,
    "riesz-partition": riesz_partition,
    "interleaved-unbounded": interleaved_unbounded,
    "extension-noninjective": extension_noninjective,
}


def reproduce(name: str, tol: Tolerances = DEFAULT_TOL, seed: int = 0,
              raise_on_fail: bool = True, **opts) -> dict:
    try:
        fn: Callable = REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown example {name!r}; choose from {sorted(REGISTRY)}") from None
    return fn(tol=tol, seed=seed, raise_on_fail=raise_on_fail, **opts)
