"""Perturbation constants between two families, the transfer of
representability, and the stability/instability constructions."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import numerics as nx
from .errors import ContractViolation, InvalidPartition, ShapeError
from .frames import FrameFamily, frame_bounds
from .generators import GeneratorSpec, generate, translate_in_band
from .iteration import (BOUNDED, DIVERGENT, BoundednessLadder, _threads, boundedness_ladder,
                        represent_by_iteration)
from .numerics import DEFAULT_TOL, Tolerances

NOT_RUN = "not run"
MC_PROBES = 10_000


@dataclass
class PerturbationVerdict:
    mu_min: float
    lambda1_min: float
    lower_bound_A: float
    A_source: str  # reference | window
    cond_l1l2: bool
    cond_mu: bool
    g_is_frame: bool
    g_lower_bound: float
    g_outside_span: float
    g_representable: bool
    g_residual: float
    g_ladder_verdict: str = NOT_RUN

    def as_dict(self) -> dict:
        return {
            "mu_min": self.mu_min,
            "lambda1_min": self.lambda1_min,
            "A": self.lower_bound_A,
            "A_source": self.A_source,
            "cond_l1l2": self.cond_l1l2,
            "cond_mu": self.cond_mu,
            "g_is_frame": self.g_is_frame,
            "g_lower_bound": self.g_lower_bound,
            "g_outside_span": self.g_outside_span,
            "g_representable": self.g_representable,
            "g_residual": self.g_residual,
            "g_ladder_verdict": self.g_ladder_verdict,
        }


def _matrix(x) -> np.ndarray:
    if isinstance(x, FrameFamily):
        return x.vectors
    return np.asarray(x, dtype=complex)


def lambda1(uf: np.ndarray, ug: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """Smallest lambda_1 with |(U_f - U_g)c| <= lambda_1 |U_f c| for all c.

    Finite only when U_f - U_g vanishes on the kernel of U_f; then it is the
    largest singular value of (U_f - U_g) U_f^+.
    """
    d = uf - ug
    _, s, v = nx.svd(uf, full=True)
    r = int(np.sum(s > nx.rank_tol(uf.shape, s[0], tol)))
    if r < uf.shape[1] and nx.opnorm(d @ v[:, r:]) > tol.residual * s[0]:
        return float("inf")
    return nx.opnorm(d @ v[:, :r] / s[:r])


def measure_perturbation(f: FrameFamily, g, tol: Tolerances = DEFAULT_TOL,
                         g_source: Optional[Callable[[int], FrameFamily]] = None,
                         windows: Optional[Sequence[int]] = None) -> PerturbationVerdict:
    """Minimal mu (lambda_1 = lambda_2 = 0) and minimal lambda_1 (lambda_2 = mu = 0).

    ``g`` may be a FrameFamily or a raw matrix (so the zero family is allowed).
    With ``g_source`` and ``windows`` the boundedness ladder of g is run too.
    """
    uf, ug = f.vectors, _matrix(g)
    if uf.shape != ug.shape:
        raise ShapeError(f"families differ in shape: {uf.shape} vs {ug.shape}")
    mu = nx.opnorm(uf - ug)
    lam = lambda1(uf, ug, tol)
    if f.reference_bounds is not None:
        a, src = f.reference_bounds[0], "reference"
    else:
        a, src = frame_bounds(f, tol).lower_bound_A, "window"
    q = nx.range_basis(uf, tol)
    gnorm = nx.opnorm(ug) if np.any(ug) else 0.0
    outside = nx.opnorm(ug - q @ (q.conj().T @ ug)) / gnorm if gnorm > 0 else 0.0
    # lower frame bound of g on span(f): smallest singular value of Q* U_g
    sg = np.linalg.svd(q.conj().T @ ug, compute_uv=False)
    glow = float(sg[-1] ** 2) if sg.size == q.shape[1] else 0.0
    g_frame = bool(gnorm > 0 and glow > nx.rank_tol(uf.shape, nx.opnorm(uf), tol) ** 2
                   and outside <= tol.residual)
    if gnorm > 0:
        grep = represent_by_iteration(f.replace_vectors(ug, reference_bounds=None), tol, strict=False,
                                      with_inverse=False)
        g_rep, g_res = grep.representable, grep.residual
    else:
        g_rep, g_res = False, float("inf")
    verdict = PerturbationVerdict(
        mu_min=mu, lambda1_min=lam, lower_bound_A=float(a), A_source=src,
        cond_l1l2=bool(lam < 1), cond_mu=bool(mu < np.sqrt(a)),
        g_is_frame=g_frame, g_lower_bound=glow, g_outside_span=float(outside),
        g_representable=bool(g_rep), g_residual=float(g_res))
    if g_source is not None and windows is not None:
        verdict.g_ladder_verdict = boundedness_ladder(g_source, windows, tol).verdict
    return verdict


def kernel_angles(uf, ug, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Principal angles between N(U_f) and N(U_g)."""
    return nx.principal_angles(nx.null_basis(_matrix(uf), tol), nx.null_basis(_matrix(ug), tol))


def check_representability_transfer(f: FrameFamily, g: FrameFamily, verdict: PerturbationVerdict,
                                    tol: Tolerances = DEFAULT_TOL,
                                    f_ladder: Optional[BoundednessLadder] = None,
                                    g_ladder: Optional[BoundednessLadder] = None,
                                    raise_on_fail: bool = True) -> dict:
    """Under the lambda condition g is representable with the same kernel,
    and V inherits boundedness from T."""
    report = {"precondition": bool(verdict.cond_l1l2), "checks": {}}
    if not verdict.cond_l1l2:
        report["note"] = "lambda_1 >= 1: no claim"
        report["ok"] = True
        return report
    frep = represent_by_iteration(f, tol, strict=False, with_inverse=False)
    if not frep.representable:
        report.update(precondition=False, note="f is not representable: no claim", ok=True)
        return report
    g = g if isinstance(g, FrameFamily) else f.replace_vectors(g, reference_bounds=None)
    grep = represent_by_iteration(g, tol, strict=False, with_inverse=False)
    ang = kernel_angles(f, g, tol)
    max_angle = float(ang.max()) if ang.size else 0.0
    checks = {"g_representable": grep.representable, "kernels_equal": max_angle <= 1e-7}
    report.update(g_residual=grep.residual, max_kernel_angle=max_angle,
                  V_norm=grep.norm_on_span, T_norm=frep.norm_on_span,
                  V_minus_T=nx.opnorm(grep.op_matrix - frep.op_matrix))
    if f_ladder is not None:
        report["f_ladder_verdict"] = f_ladder.verdict
        if f_ladder.verdict == BOUNDED:
            if g_ladder is None:
                raise ValueError("f is bounded-stable: the ladder of g is needed to check transfer")
            report["g_ladder_verdict"] = g_ladder.verdict
            checks["g_bounded_stable"] = g_ladder.verdict == BOUNDED
    report["checks"] = checks
    report["ok"] = all(checks.values())
    if raise_on_fail and not report["ok"]:
        raise ContractViolation("representability did not transfer", report)
    return report


# ----- Monte-Carlo oracle ---------------------------------------------------

def monte_carlo_sup(num, den=None, n_probes: int = MC_PROBES, seed: int = 0,
                    chunk: int = 1000) -> float:
    """max over seeded random complex c of |num c| / |den c| (|c| if den is None).

    Chunks draw from spawned seeds, so the result does not depend on the
    number of worker threads.
    """
    num = nx.as_matrix(num)
    den = None if den is None else nx.as_matrix(den)
    n = num.shape[1]
    sizes = [min(chunk, n_probes - i) for i in range(0, n_probes, chunk)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def job(args):
        ss, m = args
        rng = np.random.default_rng(ss)
        c = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        top = np.linalg.norm(num @ c, axis=0)
        bot = np.linalg.norm(c if den is None else den @ c, axis=0)
        ok = bot > 0
        return float(np.max(top[ok] / bot[ok])) if ok.any() else 0.0

    work = list(zip(seeds, sizes))
    nthreads = min(_threads(), len(work))
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            vals = list(ex.map(job, work))
    else:
        vals = [job(w) for w in work]
    return max(vals)


# ----- instability constructions --------------------------------------------

def _replace_slot(fam: FrameFamily, k: int, vec) -> FrameFamily:
    u = fam.vectors.copy()
    u[:, fam.pos(k)] = vec
    return fam.replace_vectors(u, reference_bounds=None)


def reproduce_mu_breaks_independence(alpha: float = 0.5, window: int = 32,
                                     tol: Tolerances = DEFAULT_TOL, raise_on_fail: bool = True) -> dict:
    """f = ONB plus alpha * sum 2^{-j} e_j at slot 0, g = f with that vector set to 0.

    The mu condition holds with mu < sqrt(A) = 1, g is a frame, and yet g
    has the interior dependency delta_0, so it is not representable.
    """
    f = generate(GeneratorSpec("onb_plus_dependent", window, {"alpha": alpha}))
    g = _replace_slot(f, 0, np.zeros(f.ambient_dim))
    frep = represent_by_iteration(f, tol, strict=False, with_inverse=False)
    v = measure_perturbation(f, g, tol)
    report = {
        "alpha": alpha,
        "window": window,
        "mu_admissible": alpha,
        "f_representable": frep.representable,
        "verdict": v.as_dict(),
        "checks": {
            "f_representable": frep.representable,
            "mu_below_alpha": v.mu_min <= alpha + 1e-12,
            "cond_mu": v.cond_mu,
            "g_is_frame": v.g_is_frame,
            "g_not_representable": not v.g_representable,
        },
    }
    report["ok"] = all(report["checks"].values())
    if raise_on_fail and not report["ok"]:
        raise ContractViolation("mu-independence reproduction failed", report)
    return report


def sinc_family(rate: int = 3, boundary: str = "truncated") -> Callable[[int], FrameFamily]:
    spec = GeneratorSpec("sinc_oversampled", 8, {"rate": rate, "boundary": boundary})
    return lambda n: generate(spec.with_size(n))


def translated_slot_family(base: Callable[[int], FrameFamily], c: float) -> Callable[[int], FrameFamily]:
    """Window n -> the base family with f_0 replaced by T_c f_0."""
    def make(n):
        f = base(n)
        return _replace_slot(f, 0, translate_in_band(f, f.vector(0), c))
    return make


def completeness_residual(fam: FrameFamily, removed=(-1, 0), tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest relative distance of the removed vectors to the span of the rest."""
    keep = [i for i, k in enumerate(fam.indices) if k not in removed]
    q = nx.range_basis(fam.vectors[:, keep], tol)
    out = 0.0
    for k in removed:
        x = fam.vector(k)
        out = max(out, float(np.linalg.norm(x - q @ (q.conj().T @ x)) / np.linalg.norm(x)))
    return out


def reproduce_mu_breaks_boundedness(c: float = 0.1, windows: Sequence[int] = (4, 6, 8, 10),
                                    rate: int = 3, tol: Tolerances = DEFAULT_TOL,
                                    raise_on_fail: bool = True) -> dict:
    """Oversampled sinc family with g_0 = T_c f_0.

    Conditions checked per window: (a) f_{-1}, f_0 lie in the span of the
    remaining vectors (residual shrinking with the window), (b) mu < sqrt(A)
    with the declared bound A of the infinite family, (c) g linearly
    independent.  Then f must be bounded-stable and g divergent.
    """
    base = sinc_family(rate, "truncated")
    gmake = translated_slot_family(base, c)
    a_ref = float(rate)
    comp, mus, gexcess = [], [], []
    for n in windows:
        f, g = base(n), gmake(n)
        comp.append(completeness_residual(f, tol=tol))
        mus.append(nx.opnorm(f.vectors - g.vectors))
        gexcess.append(frame_bounds(g, tol).excess)
    cond_a = all(b < a for a, b in zip(comp, comp[1:])) and comp[-1] < 1e-3
    cond_b = bool(max(mus) < np.sqrt(a_ref))
    cond_c = all(e == 0 for e in gexcess)
    report = {
        "c": c, "rate": rate, "windows": list(windows), "A": a_ref,
        "completeness_residual": comp, "mu": mus,
        "mu_direct": mus[-1],  # equals |f_0 - T_c f_0|
        "g_excess": gexcess,
        "conditions": {"a_completeness": cond_a, "b_mu_below_sqrtA": cond_b,
                       "c_g_independent": cond_c},
    }
    if not cond_b:
        report.update(claim=False, note="mu >= sqrt(A): no stability claim", checks={}, ok=True)
        return report
    lf = boundedness_ladder(base, windows, tol, label=f"sinc rate={rate} truncated")
    lg = boundedness_ladder(gmake, windows, tol, label=f"sinc rate={rate} truncated, g0 = T_c f0")
    report["ladder_f"] = lf.as_dict()
    report["ladder_g"] = lg.as_dict()
    checks = {"f_bounded_stable": lf.verdict == BOUNDED}
    if c == 0:
        checks["g_bounded_stable"] = lg.verdict == BOUNDED
    else:
        checks.update(cond_a=cond_a, cond_c=cond_c, g_divergent=lg.verdict == DIVERGENT)
    report.update(claim=True, checks=checks, ok=all(checks.values()))
    if raise_on_fail and not report["ok"]:
        raise ContractViolation("sinc perturbation reproduction failed", report)
    return report


# ----- Riesz partitions -----------------------------------------------------

@dataclass
class RieszPartition:
    parts: list  # lists of indices k
    generators: list = field(default_factory=list)  # (phi_j, W_j) per part once verified

    def as_dict(self) -> dict:
        return {"parts": [list(map(int, p)) for p in self.parts]}

    @classmethod
    def from_dict(cls, d: dict) -> "RieszPartition":
        if "parts" not in d:
            raise InvalidPartition("partition spec needs 'parts'")
        return cls([list(map(int, p)) for p in d["parts"]])

    @classmethod
    def residues(cls, fam: FrameFamily, j: int) -> "RieszPartition":
        """Split the window by k mod j."""
        return cls([[int(k) for k in fam.indices if k % j == i] for i in range(j)])


def part_family(fam: FrameFamily, part: Sequence[int], stride: Optional[int] = None) -> FrameFamily:
    """Subfamily on the indices of ``part`` re-indexed by n, containing 0.

    For a residue class k = stride * n + i of a periodic family the part is a
    periodic orbit of the stride-th power of T.
    """
    part = sorted(int(k) for k in part)
    cols = [fam.pos(k) for k in part]
    n = len(part)
    if stride is not None and [k - part[0] for k in part] != list(range(0, n * stride, stride)):
        raise InvalidPartition("part is not an arithmetic progression with the given stride")
    lo = -(n // 2)
    periodic = fam.periodic and stride is not None and fam.size == n * stride
    u = fam.vectors[:, cols]
    return FrameFamily(u, lo, lo + n - 1, label=f"{fam.label} part".strip(), periodic=periodic)


def _validate_partition(fam: FrameFamily, partition: RieszPartition):
    flat = [k for p in partition.parts for k in p]
    if len(flat) != len(set(flat)):
        raise InvalidPartition("parts overlap")
    if sorted(flat) != list(fam.indices):
        raise InvalidPartition("parts do not cover the window")
    if any(len(p) < 2 for p in partition.parts):
        raise InvalidPartition("every part needs at least two vectors")


def riesz_check(fam: FrameFamily, tol: Tolerances = DEFAULT_TOL) -> dict:
    d = frame_bounds(fam, tol)
    return {"excess": d.excess, "A": d.lower_bound_A, "B": d.upper_bound_B,
            "riesz": d.excess == 0 and d.lower_bound_A > d.tau}


def verify_riesz_partition_stability(f: FrameFamily, partition: RieszPartition, g: FrameFamily,
                                     mu: float, tol: Tolerances = DEFAULT_TOL,
                                     stride: Optional[int] = None,
                                     part_sources: Optional[Sequence[Callable[[int], FrameFamily]]] = None,
                                     windows: Optional[Sequence[int]] = None,
                                     A: Optional[float] = None,
                                     raise_on_fail: bool = True) -> dict:
    """Split g by the Riesz partition of f and check every g-part is a Riesz
    sequence represented by a bounded operator W_j.

    ``part_sources[j]`` maps a window size to the j-th g-part at that size;
    with ``windows`` they drive the per-part boundedness ladders.
    """
    if f.vectors.shape != g.vectors.shape:
        raise ShapeError("f and g differ in shape")
    _validate_partition(f, partition)
    fparts = [part_family(f, p, stride) for p in partition.parts]
    fchecks = [riesz_check(p, tol) for p in fparts]
    for j, chk in enumerate(fchecks):
        if not chk["riesz"]:
            raise InvalidPartition(f"part {j} of f is not a Riesz sequence (excess {chk['excess']})")
    a = min(c["A"] for c in fchecks) if A is None else float(A)
    mu_meas = nx.opnorm(f.vectors - g.vectors)
    report = {"A": a, "mu": mu, "mu_measured": mu_meas, "sqrt_A": float(np.sqrt(a)),
              "f_parts": fchecks, "partition": partition.as_dict()}
    if not (mu_meas <= mu + 1e-12 and mu < np.sqrt(a)):
        report.update(precondition=False, note="mu >= sqrt(A) or |U_f - U_g| > mu: no claim",
                      checks={}, ok=True)
        return report
    report["precondition"] = True
    parts_out, checks = [], {}
    partition.generators = []
    for j, p in enumerate(partition.parts):
        gp = part_family(g, p, stride)
        chk = riesz_check(gp, tol)
        rep = represent_by_iteration(gp, tol, strict=False, with_inverse=False)
        entry = dict(chk, representable=rep.representable, residual=rep.residual,
                     norm=rep.norm_on_span, ladder_verdict=NOT_RUN)
        if part_sources is not None and windows is not None:
            lad = boundedness_ladder(part_sources[j], windows, tol, label=f"g part {j}")
            entry["ladder_verdict"] = lad.verdict
            entry["ladder_norms"] = lad.norms
            checks[f"part{j}_bounded_stable"] = lad.verdict == BOUNDED
        checks[f"part{j}_riesz"] = chk["riesz"]
        checks[f"part{j}_representable"] = rep.representable
        partition.generators.append((gp.vector(0), rep.op_matrix))
        parts_out.append(entry)
    report.update(g_parts=parts_out, checks=checks, ok=all(checks.values()))
    if raise_on_fail and not report["ok"]:
        raise ContractViolation("Riesz partition stability failed", report)
    return report


def partition_shifts(scale: float, pattern=(1.0, -1.0, 0.5)) -> np.ndarray:
    return scale * np.asarray(pattern, dtype=float)


def partitioned_translation(n: int, scale: float, pattern=(1.0, -1.0, 0.5)):
    """Periodic 3x sinc window, its residue partition, and g_k = T_{c_i} f_k (i = k mod 3)."""
    f = generate(GeneratorSpec("sinc_oversampled", n, {"rate": 3}))
    shifts = partition_shifts(scale, pattern)
    u = f.vectors.copy()
    for col, k in enumerate(f.indices):
        u[:, col] = translate_in_band(f, u[:, col], shifts[k % 3])
    g = f.replace_vectors(u, label=f"{f.label} part-translated", reference_bounds=None)
    return f, RieszPartition.residues(f, 3), g


def reproduce_riesz_partition(mu_fraction: float = 0.5, windows: Sequence[int] = (12, 24, 48, 96),
                              tol: Tolerances = DEFAULT_TOL, raise_on_fail: bool = True) -> dict:
    """Three integer-translate ONBs inside the 3x sinc family, each part
    translated by its own small shift so that |U_f - U_g| = mu_fraction * sqrt(A)."""
    n = windows[-1]
    a = 1.0  # each part is an orthonormal basis of the band

    def mu_of(scale):
        f, _, g = partitioned_translation(n, scale)
        return nx.opnorm(f.vectors - g.vectors)

    target = mu_fraction * np.sqrt(a)
    scale = brentq(lambda s: mu_of(s) - target, 1e-9, 0.3, xtol=1e-14)
    f, part, g = partitioned_translation(n, scale)
    mu = nx.opnorm(f.vectors - g.vectors)
    sources = []
    for i in range(3):
        def src(m, i=i):
            ff, pp, gg = partitioned_translation(m, scale)
            return part_family(gg, pp.parts[i], 3)
        sources.append(src)
    report = verify_riesz_partition_stability(f, part, g, max(mu, target), tol, stride=3,
                                              part_sources=sources, windows=windows, A=a,
                                              raise_on_fail=raise_on_fail)
    report["shift_scale"] = scale
    report["shifts"] = partition_shifts(scale).tolist()
    return report


def reproduce_lambda_stability(eps: float = 0.1, windows: Sequence[int] = (12, 24, 48, 96),
                               tol: Tolerances = DEFAULT_TOL, raise_on_fail: bool = True) -> dict:
    """g = (1 + eps) f on the periodic 3x sinc family, so U_f - U_g = -eps U_f and lambda_1 = eps."""
    spec = GeneratorSpec("sinc_oversampled", windows[-1], {"rate": 3})
    fmake = lambda m: generate(spec.with_size(m))
    gmake = lambda m: fmake(m).replace_vectors((1 + eps) * fmake(m).vectors, reference_bounds=None)
    f, g = fmake(windows[-1]), gmake(windows[-1])
    v = measure_perturbation(f, g, tol, g_source=gmake, windows=windows)
    lf = boundedness_ladder(fmake, windows, tol)
    lg = boundedness_ladder(gmake, windows, tol)
    transfer = check_representability_transfer(f, g, v, tol, lf, lg, raise_on_fail=raise_on_fail)
    return {"eps": eps, "verdict": v.as_dict(), "transfer": transfer,
            "ladder_f": lf.as_dict(), "ladder_g": lg.as_dict(), "ok": transfer["ok"]}
