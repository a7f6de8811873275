"""Canonical dual, h0-parametrized iterated duals, and the operator identities
linking T, U, S and the dual operator V."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import numerics as nx
from .errors import (ContractViolation, IllConditioned, NotApplicable, NotRepresentable,
                     ShapeError)
from .frames import FrameFamily, frame_bounds, frame_operator, gram
from .iteration import IteratedRep, represent_by_iteration
from .numerics import DEFAULT_TOL, Tolerances

MAX_CONDITION = 1e12
N_RANDOM_PROBES = 10


@dataclass(eq=False)
class DualFamily:
    family: FrameFamily
    provenance: str  # canonical | h0_formula | user
    reconstruction_residual: float
    iterated_form_residual: float = float("nan")
    uniqueness_residual: float = float("nan")
    h0: Optional[np.ndarray] = field(default=None, repr=False)
    notes: list = field(default_factory=list)

    @property
    def vectors(self) -> np.ndarray:
        return self.family.vectors

    def as_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "reconstruction_residual": self.reconstruction_residual,
            "iterated_form_residual": self.iterated_form_residual,
            "uniqueness_residual": self.uniqueness_residual,
            "notes": list(self.notes),
        }


def span_projector(fam: FrameFamily, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    q = nx.range_basis(fam.vectors, tol)
    return q @ q.conj().T


def frame_operator_pinv(fam: FrameFamily, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """S^+ on span(fam), from the SVD of U (eigenvalues of S are sigma^2)."""
    u, s, _ = nx.svd(fam.vectors, full=False)
    r = int(np.sum(s > nx.rank_tol(fam.vectors.shape, s[0], tol)))
    return (u[:, :r] / s[:r] ** 2) @ u[:, :r].conj().T


def probe_set(fam: FrameFamily, seed: int = 0, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Projected standard basis directions plus seeded random span vectors."""
    q = nx.range_basis(fam.vectors, tol)
    p = q @ q.conj().T
    keep = np.linalg.norm(p, axis=0) > 1e-12
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((q.shape[1], N_RANDOM_PROBES)) + 1j * rng.standard_normal((q.shape[1], N_RANDOM_PROBES))
    return np.hstack([p[:, keep], q @ z])


def reconstruction_residual(fam: FrameFamily, dual_vectors, probes=None, seed: int = 0,
                            tol: Tolerances = DEFAULT_TOL) -> float:
    """max over probes f of |f - sum <f, g_k> f_k| / |f|."""
    if probes is None:
        probes = probe_set(fam, seed, tol)
    g = nx.as_matrix(dual_vectors)
    rec = fam.vectors @ (g.conj().T @ probes)
    return float(np.max(np.linalg.norm(probes - rec, axis=0) / np.linalg.norm(probes, axis=0)))


class AdjointInverse:
    """Repeated solves against T* on span(fam).

    The minimum-norm solution of T* x = y lies in range(T) = span(fam) when
    T is invertible there, so this realizes (T*)^{-1} on the span.
    """

    def __init__(self, rep: IteratedRep, tol: Tolerances = DEFAULT_TOL):
        self.tstar = rep.op_matrix.conj().T
        u, s, v = nx.svd(self.tstar, full=False)
        r = rep.span_basis.shape[1]
        self._u, self._s, self._v = u[:, :r], s[:r], v[:, :r]

    def solve(self, y):
        s = self._s[:, None] if np.ndim(y) == 2 else self._s
        return self._v @ ((self._u.conj().T @ y) / s)

    def powers(self, g0, fam: FrameFamily) -> np.ndarray:
        """Columns (T*)^{-k} g0 for k over the window of fam."""
        out = np.zeros((g0.size, fam.size), dtype=complex)
        out[:, fam.pos(0)] = g0
        x = g0
        for k in range(1, fam.k_max + 1):
            x = self.solve(x)
            out[:, fam.pos(k)] = x
        x = g0
        for k in range(-1, fam.k_min - 1, -1):
            x = self.tstar @ x
            out[:, fam.pos(k)] = x
        return out


def iterated_form_residual(dual_vectors, rep: IteratedRep, fam: FrameFamily,
                           tol: Tolerances = DEFAULT_TOL) -> float:
    """max_k |g_k - (T*)^{-k} g_0| / |g_0|."""
    g = nx.as_matrix(dual_vectors)
    g0 = g[:, fam.pos(0)]
    it = AdjointInverse(rep, tol).powers(g0, fam)
    return float(np.max(np.linalg.norm(g - it, axis=0)) / np.linalg.norm(g0))


def _check_conditioning(fam, tol):
    diag = frame_bounds(fam, tol)
    if diag.condition > MAX_CONDITION:
        raise IllConditioned(f"B/A = {diag.condition:.3e} exceeds {MAX_CONDITION:.0e}")
    return diag


def canonical_dual(fam: FrameFamily, rep: Optional[IteratedRep] = None,
                   tol: Tolerances = DEFAULT_TOL, bounded_stable: bool = False,
                   seed: int = 0) -> DualFamily:
    """g_k = S^+ f_k; with an invertible rep also the residual against (T*)^{-k} S^+ f_0."""
    _check_conditioning(fam, tol)
    g = frame_operator_pinv(fam, tol) @ fam.vectors
    dual = fam.replace_vectors(g, label=f"{fam.label} canonical dual".strip(), reference_bounds=None)
    out = DualFamily(dual, "canonical", reconstruction_residual(fam, g, seed=seed, tol=tol))
    if rep is not None and rep.invertible_on_span:
        out.iterated_form_residual = iterated_form_residual(g, rep, fam, tol)
        if bounded_stable and not out.iterated_form_residual <= 1e-7:
            raise ContractViolation("canonical dual is not of iterated form",
                                    {"iterated_form_residual": out.iterated_form_residual})
    elif rep is not None:
        out.notes.append("T not invertible on span: iterated form not checked")
    return out


def dual_from_h0(fam: FrameFamily, rep: IteratedRep, h0, tol: Tolerances = DEFAULT_TOL,
                 seed: int = 0) -> DualFamily:
    """g_0 = S^+ f_0 + h_0 - sum_j <S^+ f_0, f_j> (T*)^{-j} h_0 and g_k = (T*)^{-k} g_0.

    The sum runs over the window (for periodic families that is the whole
    orbit, so the formula is exact).  h0 is projected onto span(fam).
    """
    if not rep.invertible_on_span:
        raise NotApplicable("T is not invertible on span(fam)")
    _check_conditioning(fam, tol)
    h0 = np.asarray(h0, dtype=complex).reshape(-1)
    if h0.size != fam.ambient_dim:
        raise ShapeError(f"h0 has length {h0.size}, ambient dimension is {fam.ambient_dim}")
    notes = []
    ph0 = span_projector(fam, tol) @ h0
    if np.linalg.norm(h0 - ph0) > 1e-12 * max(1.0, np.linalg.norm(h0)):
        warnings.warn("h0 projected onto span(fam)", stacklevel=2)
        notes.append("h0 projected onto span")
    sp = frame_operator_pinv(fam, tol)
    ft0 = sp @ fam.vector(0)
    inv = AdjointInverse(rep, tol)
    hk = inv.powers(ph0, fam)  # (T*)^{-j} h0
    coeff = fam.vectors.conj().T @ ft0  # <S^+ f0, f_j>
    g0 = ft0 + ph0 - hk @ coeff
    g = inv.powers(g0, fam)
    dual = fam.replace_vectors(g, label=f"{fam.label} h0 dual".strip(), reference_bounds=None)
    if not fam.periodic:
        notes.append("sum over j truncated to the window")
    return DualFamily(dual, "h0_formula", reconstruction_residual(fam, g, seed=seed, tol=tol),
                      iterated_form_residual(g, rep, fam, tol), h0=ph0, notes=notes)


def dual_operator_uniqueness(fam: FrameFamily, rep: IteratedRep, dual: DualFamily,
                             tol: Tolerances = DEFAULT_TOL, raise_on_fail: bool = True) -> dict:
    """Build V with g_k = V^k g_0 and measure |V T* - I| on span(fam)."""
    try:
        vrep = represent_by_iteration(dual.family, tol, strict=True, with_inverse=False)
    except NotRepresentable as exc:
        raise NotApplicable(f"dual family is not representable: {exc}") from exc
    q = rep.span_basis
    resid = nx.opnorm(vrep.op_matrix @ rep.op_matrix.conj().T @ q - q)
    dual.uniqueness_residual = resid
    report = {"uniqueness_residual": resid, "V_norm": vrep.norm_on_span,
              "dual_residual": vrep.residual, "ok": resid <= 1e-7}
    if raise_on_fail and not report["ok"]:
        raise ContractViolation("dual operator differs from (T*)^{-1}", report)
    return report


def zero_padded_dual(fam: FrameFamily, tol: Tolerances = DEFAULT_TOL) -> DualFamily:
    """Drop f_0, take the canonical dual of the rest, and put 0 back at slot 0.

    Needs f_0 to be removable (the remaining family spans the same space).
    """
    keep = np.ones(fam.size, dtype=bool)
    keep[fam.pos(0)] = False
    rest = fam.vectors[:, keep]
    if nx.numerical_rank(rest, tol) < nx.numerical_rank(fam.vectors, tol):
        raise NotApplicable("f_0 cannot be removed without shrinking the span")
    u, s, _ = nx.svd(rest, full=False)
    r = int(np.sum(s > nx.rank_tol(rest.shape, s[0], tol)))
    g = np.zeros_like(fam.vectors)
    g[:, keep] = ((u[:, :r] / s[:r] ** 2) @ u[:, :r].conj().T) @ rest
    dual = fam.replace_vectors(g, label=f"{fam.label} zero-padded dual".strip(), reference_bounds=None)
    return DualFamily(dual, "user", reconstruction_residual(fam, g, tol=tol),
                      notes=["canonical dual of the family without f_0, with 0 inserted"])


def _interior_columns(fam: FrameFamily, w: int) -> np.ndarray:
    if fam.periodic:
        return np.arange(fam.size)
    return np.arange(w, fam.size - w)


def intertwining_check(fam: FrameFamily, rep: IteratedRep, tol: Tolerances = DEFAULT_TOL,
                       bounded_stable: bool = False, unit_tol: float = 1e-7,
                       raise_on_fail: bool = True) -> dict:
    """TU = U(right shift) on interior coefficients; TST* = S; ST = TS iff T unitary."""
    u = fam.vectors
    t = rep.op_matrix
    cols = _interior_columns(fam, int(tol.edge_width))
    nxt = np.roll(u, -1, axis=1) if fam.periodic else np.hstack([u[:, 1:], np.zeros((u.shape[0], 1))])
    unorm = nx.opnorm(u)
    tu = nx.opnorm((t @ u - nxt)[:, cols]) / unorm if cols.size else 0.0
    s = frame_operator(fam)
    snorm = nx.opnorm(s)
    d = rep.domain_basis
    comm = nx.opnorm((s @ t - t @ s) @ d) / snorm
    unit = nx.opnorm(t.conj().T @ t @ d - d)
    report = {
        "TU_minus_UT_rel": tu,
        "commutator_rel": comm,
        "unitarity_defect": unit,
        "commutes": comm <= unit_tol,
        "unitary": unit <= unit_tol,
        "checks": {"TU_equals_UT": tu <= 1e-8},
    }
    if bounded_stable and rep.invertible_on_span:
        q = rep.span_basis
        tst = nx.opnorm((t @ s @ t.conj().T - s) @ q) / snorm
        report["TSTstar_minus_S_rel"] = tst
        report["checks"]["TSTstar_equals_S"] = tst <= 1e-7
        report["checks"]["commutes_iff_unitary"] = report["commutes"] == report["unitary"]
    report["ok"] = all(report["checks"].values())
    if raise_on_fail and not report["ok"]:
        raise ContractViolation("intertwining identity failed", report)
    return report


def toeplitz_defect(fam: FrameFamily) -> float:
    """Largest deviation of the Gram matrix from constancy along diagonals,
    relative to its largest entry."""
    g = gram(fam)
    n = g.shape[0]
    scale = np.abs(g).max()
    worst = 0.0
    for off in range(-(n - 1), n):
        dg = np.diagonal(g, off)
        worst = max(worst, float(np.abs(dg - dg[0]).max()))
    return float(worst / scale)


def toeplitz_unitarity_check(fam: FrameFamily, rep: IteratedRep, tol: Tolerances = DEFAULT_TOL,
                             raise_on_fail: bool = True) -> dict:
    """A Toeplitz Gram forces T to be unitary with T* f_k = f_{k-1}."""
    defect = toeplitz_defect(fam)
    report = {"toeplitz_defect": defect, "toeplitz": bool(defect <= 1e-8), "checks": {}}
    if report["toeplitz"]:
        t = rep.op_matrix
        u = fam.vectors
        prev = np.roll(u, 1, axis=1) if fam.periodic else u[:, :-1]
        cur = u if fam.periodic else u[:, 1:]
        cols = _interior_columns(fam, int(tol.edge_width))
        if not fam.periodic:
            cols = cols[cols < cur.shape[1]]
        adj = np.linalg.norm(t.conj().T @ cur[:, cols] - prev[:, cols], axis=0) \
            / np.linalg.norm(cur[:, cols], axis=0)
        d = rep.domain_basis
        unit = nx.opnorm(t.conj().T @ t @ d - d)
        report.update(adjoint_shift_residual=float(adj.max()) if adj.size else 0.0,
                      unitarity_defect=unit)
        report["checks"] = {"adjoint_is_backward_shift": report["adjoint_shift_residual"] <= 1e-7,
                            "unitary": unit <= 1e-7}
    else:
        report["skipped"] = "Gram is not Toeplitz"
    report["ok"] = all(report["checks"].values())
    if raise_on_fail and not report["ok"]:
        raise ContractViolation("Toeplitz Gram without unitary T", report)
    return report
