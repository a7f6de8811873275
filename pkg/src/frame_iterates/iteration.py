"""Representing operator T with T f_k = f_{k+1}, and its boundedness ladder."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import solve_triangular

from . import numerics as nx
from .errors import ContractViolation, NotRepresentable
from .frames import (FrameFamily, frame_bounds, kernel_basis, kernel_cut,
                     shift_invariance_defect)
from .numerics import DEFAULT_TOL, Tolerances

BOUNDED = "bounded-stable"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"


@dataclass(eq=False)
class IteratedRep:
    op_matrix: np.ndarray  # M x M, T on its domain and 0 on the complement
    family: FrameFamily
    residual: float
    residual_direct: float
    representable: bool
    norm_on_span: float
    inv_norm_on_span: float
    invertible_on_span: bool
    domain_basis: np.ndarray  # orthonormal basis of the domain of T
    span_basis: np.ndarray  # orthonormal basis of span(fam)
    inverse_matrix: Optional[np.ndarray] = field(default=None, repr=False)
    f0_index: int = 0

    def apply(self, x) -> np.ndarray:
        return self.op_matrix @ np.asarray(x)

    def power_apply(self, x, k: int) -> np.ndarray:
        """T^k x for k >= 0, (T^{-1})^{|k|} x for k < 0."""
        x = np.asarray(x, dtype=complex)
        if k >= 0:
            for _ in range(k):
                x = self.op_matrix @ x
            return x
        if self.inverse_matrix is None:
            raise ValueError("inverse not available")
        for _ in range(-k):
            x = self.inverse_matrix @ x
        return x

    def as_dict(self) -> dict:
        return {
            "label": self.family.label,
            "k_min": self.family.k_min,
            "k_max": self.family.k_max,
            "periodic": self.family.periodic,
            "f0_index": self.f0_index,
            "representable": self.representable,
            "residual": self.residual,
            "residual_direct": self.residual_direct,
            "norm_on_span": self.norm_on_span,
            "inv_norm_on_span": self.inv_norm_on_span,
            "invertible_on_span": self.invertible_on_span,
        }


def _pairs(fam: FrameFamily):
    u = fam.vectors
    if fam.periodic:
        return u, np.roll(u, -1, axis=1)
    return u[:, :-1], u[:, 1:]


def _build(fam: FrameFamily, tol: Tolerances):
    prev, nxt = _pairs(fam)
    if prev.shape[1] == 0:
        raise NotRepresentable("window holds a single vector; nothing to iterate")
    # min-norm solution of T prev = nxt, i.e. prev* T* = nxt*
    t = nx.lstsq(prev.conj().T, nxt.conj().T, tol).conj().T
    _, s, v = nx.svd(prev, full=True)
    tau = nx.rank_tol(prev.shape, s[0], tol)
    r = int(np.sum(s > tau))
    v0 = v[:, r:]
    col_norms = np.linalg.norm(nxt, axis=0)
    safe = np.where(col_norms > 0, col_norms, 1.0)
    # T prev - nxt = -nxt V0 V0*, evaluated without forming T
    alg = np.linalg.norm(nxt @ v0 @ v0.conj().T, axis=0) / safe if v0.shape[1] else np.zeros(1)
    direct = np.linalg.norm(t @ prev - nxt, axis=0) / safe
    u_prev = nx.svd(prev, full=False).left_basis[:, :r]
    return t, float(np.max(alg)), float(np.max(direct)), u_prev


def represent_by_iteration(fam: FrameFamily, tol: Tolerances = DEFAULT_TOL,
                           strict: bool = True, with_inverse: bool = True) -> IteratedRep:
    """Least-squares construction of T on span(fam) with T f_k = f_{k+1}.

    The residual certifies exactness; above ``tol.residual`` the family is
    not representable (a dependency among the vectors is not carried to a
    dependency by the index shift).  With ``strict`` that raises
    NotRepresentable, otherwise the rep is returned with representable=False.
    """
    t, res, res_direct, domain = _build(fam, tol)
    span = nx.range_basis(fam.vectors, tol)
    representable = res <= tol.residual
    norm = nx.opnorm(t)
    inv_norm = float("inf")
    inv_mat = None
    invertible = False
    if with_inverse and representable:
        rev = represent_by_iteration(fam.reversed(), tol, strict=False, with_inverse=False)
        if rev.representable:
            inv_norm = rev.norm_on_span
            inv_mat = rev.op_matrix
            _, nxt = _pairs(fam)
            rng = nx.numerical_rank(nxt, tol)
            invertible = domain.shape[1] == span.shape[1] == rng
    rep = IteratedRep(t, fam, res, res_direct, representable, norm, inv_norm,
                      invertible, domain, span, inv_mat)
    if strict and not representable:
        raise NotRepresentable(
            f"residual {res:.3e} exceeds {tol.residual:.1e}: a dependency is not shift compatible",
            rep)
    return rep


def norm_bounds_check(rep: IteratedRep, diag=None, bounded_stable: bool = False,
                      tol: Tolerances = DEFAULT_TOL, raise_on_fail: bool = True) -> dict:
    """1 <= |T| (and |T^{-1}|); with a bounded verdict also |T| <= sqrt(B/A)."""
    if diag is None:
        diag = frame_bounds(rep.family, tol)
    bound = float(np.sqrt(diag.upper_bound_B / diag.lower_bound_A))
    checks = {
        "norm_lower": rep.norm_on_span >= 1 - tol.residual,
        "inv_norm_lower": rep.inv_norm_on_span >= 1 - tol.residual,
    }
    if bounded_stable:
        checks["norm_upper"] = rep.norm_on_span <= bound + tol.norm_slack
        checks["inv_norm_upper"] = rep.inv_norm_on_span <= bound + tol.norm_slack
    report = {
        "norm_on_span": rep.norm_on_span,
        "inv_norm_on_span": rep.inv_norm_on_span,
        "sqrt_B_over_A": bound,
        "checks": checks,
        "ok": all(checks.values()),
    }
    if raise_on_fail and not report["ok"]:
        raise ContractViolation("norm bounds violated", report)
    return report


# ----- boundedness ladder ---------------------------------------------------

@dataclass
class LadderEntry:
    window: int
    k_min: int
    k_max: int
    representable: bool
    residual: float
    norm: float
    inv_norm: float
    A: float
    B: float
    excess: int
    kernel_proxy_dim: int
    kernel_cut: float
    defect_right: float
    defect_left: float
    trusted_right: bool
    trusted_left: bool

    @property
    def sqrt_B_over_A(self) -> float:
        return float(np.sqrt(self.B / self.A))


@dataclass
class BoundednessLadder:
    label: str
    entries: list
    growth_exponent: float
    verdict: str
    biconditional: str
    reason: str = ""

    @property
    def windows(self):
        return [e.window for e in self.entries]

    @property
    def norms(self):
        return [e.norm for e in self.entries]

    @property
    def defects_right(self):
        return [e.defect_right for e in self.entries]

    @property
    def defects_left(self):
        return [e.defect_left for e in self.entries]

    @property
    def trusted(self):
        return [e.trusted_right for e in self.entries]

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "windows": self.windows,
            "norms": self.norms,
            "inv_norms": [e.inv_norm for e in self.entries],
            "residuals": [e.residual for e in self.entries],
            "representable": [e.representable for e in self.entries],
            "sqrt_B_over_A": [e.sqrt_B_over_A for e in self.entries],
            "excess": [e.excess for e in self.entries],
            "kernel_proxy_dim": [e.kernel_proxy_dim for e in self.entries],
            "defects_right": self.defects_right,
            "defects_left": self.defects_left,
            "trusted": self.trusted,
            "trusted_left": [e.trusted_left for e in self.entries],
            "growth_exponent": self.growth_exponent,
            "verdict": self.verdict,
            "biconditional": self.biconditional,
            "reason": self.reason,
        }

    def csv_rows(self):
        yield ("window", "norm", "defect")
        for e in self.entries:
            yield (e.window, e.norm, e.defect_right)


def analyze_window(fam: FrameFamily, window: int, tol: Tolerances = DEFAULT_TOL) -> LadderEntry:
    rep = represent_by_iteration(fam, tol, strict=False)
    diag = frame_bounds(fam, tol)
    cut = kernel_cut(fam, tol)
    ker = kernel_basis(fam, cut, tol)
    dr = shift_invariance_defect(ker, "right", tol)
    dl = shift_invariance_defect(ker, "left", tol)
    return LadderEntry(
        window=int(window), k_min=fam.k_min, k_max=fam.k_max,
        representable=rep.representable, residual=rep.residual,
        norm=rep.norm_on_span if rep.representable else float("inf"),
        inv_norm=rep.inv_norm_on_span if rep.representable else float("inf"),
        A=diag.lower_bound_A, B=diag.upper_bound_B, excess=diag.excess,
        kernel_proxy_dim=ker.dim, kernel_cut=cut,
        defect_right=dr.defect, defect_left=dl.defect,
        trusted_right=dr.trusted, trusted_left=dl.trusted)


def growth_exponent(windows: Sequence[float], norms: Sequence[float]) -> float:
    """Least-squares slope of log |T| against log N."""
    x = np.log(np.asarray(windows, dtype=float))
    y = np.log(np.asarray(norms, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FRAME_ITERATES_THREADS", "1")))
    except ValueError:
        return 1


def classify(entries, tol: Tolerances = DEFAULT_TOL):
    """Verdict, growth exponent, biconditional status and reason."""
    if not all(e.representable for e in entries):
        bad = [e.window for e in entries if not e.representable]
        return INCONCLUSIVE, float("nan"), "n/a", f"not representable at windows {bad}"
    ws = [e.window for e in entries]
    gexp = growth_exponent(ws, [e.norm for e in entries])
    trusted = [e for e in entries if e.trusted_right]
    if not trusted:
        return INCONCLUSIVE, gexp, INCONCLUSIVE, "untrusted defects at every window"
    if gexp >= tol.growth_divergent and len(entries) >= 3:
        verdict = DIVERGENT
    elif gexp <= tol.growth_bounded and all(
            e.norm <= e.sqrt_B_over_A + tol.norm_slack for e in trusted):
        verdict = BOUNDED
    else:
        return INCONCLUSIVE, gexp, "n/a", "growth exponent in the dead zone or norm above sqrt(B/A)"
    if verdict == BOUNDED:
        bad = [e.window for e in trusted if not e.defect_right <= tol.norm_slack]
    else:
        bad = [e.window for e in trusted if not e.defect_right >= tol.growth_divergent]
    if bad:
        # mixed outcome: the norm verdict stands, the biconditional is flagged
        return verdict, gexp, INCONCLUSIVE, f"right-shift defect disagrees with the verdict at windows {bad}"
    return verdict, gexp, "consistent", ""


FamilySource = Union[Callable[[int], FrameFamily], "object"]


def _factory(source) -> Callable[[int], FrameFamily]:
    if callable(source):
        return source
    from .generators import generate  # local import: generators depends on frames only

    return lambda n: generate(source.with_size(n))


def boundedness_ladder(source: FamilySource, windows: Sequence[int],
                       tol: Tolerances = DEFAULT_TOL, label: str = "") -> BoundednessLadder:
    """Build the family at each window size and classify the growth of |T|.

    ``source`` is a GeneratorSpec or a callable mapping a window size to a
    FrameFamily.
    """
    windows = [int(w) for w in windows]
    if len(windows) < 3:
        raise ValueError("a ladder needs at least 3 window sizes")
    if any(b <= a for a, b in zip(windows, windows[1:])):
        raise ValueError("window sizes must be strictly ascending")
    make = _factory(source)

    def job(n):
        return analyze_window(make(n), n, tol)

    nthreads = min(_threads(), len(windows))
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            entries = list(ex.map(job, windows))
    else:
        entries = [job(n) for n in windows]
    verdict, gexp, bic, reason = classify(entries, tol)
    if not label:
        label = getattr(source, "kind", "") or make(windows[0]).label
    return BoundednessLadder(label, entries, gexp, verdict, bic, reason)


def excess_growth_check(source: FamilySource, windows: Sequence[int],
                        tol: Tolerances = DEFAULT_TOL, ladder: Optional[BoundednessLadder] = None,
                        raise_on_fail: bool = True) -> dict:
    """Bounded T with positive excess forces the excess to grow without bound.

    Contrapositive: a constant positive excess must not come with a
    bounded-stable verdict.
    """
    if ladder is None:
        ladder = boundedness_ladder(source, windows, tol)
    ex = [e.excess for e in ladder.entries]
    nondecreasing = all(b >= a for a, b in zip(ex, ex[1:]))
    every_other = all(ex[i + 2] > ex[i] for i in range(len(ex) - 2)) and ex[-1] > ex[0]
    positive = any(x > 0 for x in ex)
    constant = positive and len(set(ex)) == 1
    checks = {}
    if ladder.verdict == BOUNDED and positive:
        checks["excess_nondecreasing"] = nondecreasing
        checks["excess_grows"] = every_other
    if constant:
        checks["constant_excess_not_bounded"] = ladder.verdict != BOUNDED
    report = {
        "windows": ladder.windows,
        "excess": ex,
        "verdict": ladder.verdict,
        "constant_excess": constant,
        "checks": checks,
        "ok": all(checks.values()),
    }
    if raise_on_fail and not report["ok"]:
        raise ContractViolation("excess growth check failed", report)
    return report


def sigma_min_on_span(op, basis: Optional[np.ndarray] = None) -> float:
    """Smallest singular value of op restricted to span(basis).

    Square nonsingular triangular operators use the triangular inverse, which
    keeps relative accuracy when sigma_min is far below machine epsilon.
    """
    a = nx.as_matrix(op)
    if basis is None:
        if a.shape[0] == a.shape[1]:
            upper = np.allclose(a, np.triu(a), rtol=0, atol=0)
            lower = np.allclose(a, np.tril(a), rtol=0, atol=0)
            if (upper or lower) and np.all(np.diag(a) != 0):
                inv = solve_triangular(a, np.eye(a.shape[0]), lower=lower and not upper)
                return 1.0 / nx.opnorm(inv)
        basis = np.eye(a.shape[1])
    s = np.linalg.svd(a @ basis, compute_uv=False)
    return float(s[-1]) if basis.shape[1] <= a.shape[0] else 0.0


def extension_injectivity_probe(op, fam: Optional[FrameFamily] = None,
                                tol: Tolerances = DEFAULT_TOL) -> dict:
    """sigma_min of an operator on span(fam) (whole space if fam is None)."""
    mat = op.op_matrix if isinstance(op, IteratedRep) else op
    if fam is None and isinstance(op, IteratedRep):
        fam = op.family
    basis = None if fam is None else nx.range_basis(fam.vectors, tol)
    smin = sigma_min_on_span(mat, basis)
    return {"sigma_min": smin, "norm": nx.opnorm(mat if basis is None else nx.as_matrix(mat) @ basis)}
