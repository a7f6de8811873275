"""Frame families on a finite index window.

A family holds the vectors f_{k_min}, ..., f_{k_max} as the columns of an
M x n matrix.  Families built from a complete cyclic orbit are flagged
``periodic``: index k_max + 1 is identified with k_min, and the coefficient
shift wraps around instead of dropping the top entry.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import numerics as nx
from .errors import DegenerateFamily, ShapeError
from .numerics import DEFAULT_TOL, Tolerances


@dataclass(frozen=True, eq=False)
class FrameFamily:
    vectors: np.ndarray  # M x n, column j is f_{k_min + j}
    k_min: int
    k_max: int
    label: str = ""
    periodic: bool = False
    # frame bounds (A, B) of the infinite family the window is cut from, if known
    reference_bounds: Optional[tuple] = None

    def __post_init__(self):
        v = nx.as_matrix(self.vectors)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "k_min", int(self.k_min))
        object.__setattr__(self, "k_max", int(self.k_max))
        if not self.k_min <= 0 <= self.k_max:
            raise ShapeError(f"window must contain 0, got [{self.k_min}, {self.k_max}]")
        if v.shape[1] != self.k_max - self.k_min + 1:
            raise ShapeError(
                f"{v.shape[1]} vectors for window [{self.k_min}, {self.k_max}]")
        if not np.any(v):
            raise DegenerateFamily("all vectors of the family are zero")
        if self.reference_bounds is not None:
            a, b = (float(x) for x in self.reference_bounds)
            if not 0 < a <= b:
                raise ValueError("reference bounds need 0 < A <= B")
            object.__setattr__(self, "reference_bounds", (a, b))

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def pos(self, k: int) -> int:
        """Column position of index k."""
        if not self.k_min <= k <= self.k_max:
            raise IndexError(f"index {k} outside window [{self.k_min}, {self.k_max}]")
        return k - self.k_min

    def vector(self, k: int) -> np.ndarray:
        return self.vectors[:, self.pos(k)]

    def replace_vectors(self, vectors, label=None, reference_bounds="keep") -> "FrameFamily":
        rb = self.reference_bounds if reference_bounds == "keep" else reference_bounds
        return FrameFamily(np.array(vectors, dtype=complex), self.k_min, self.k_max,
                           label=self.label if label is None else label,
                           periodic=self.periodic, reference_bounds=rb)

    def reversed(self) -> "FrameFamily":
        """The family g_k = f_{-k}."""
        return FrameFamily(self.vectors[:, ::-1].copy(), -self.k_max, -self.k_min,
                           label=f"{self.label} reversed".strip(), periodic=self.periodic,
                           reference_bounds=self.reference_bounds)

    def transformed(self, q) -> "FrameFamily":
        """Apply a matrix to every vector (used for change of ambient basis)."""
        return self.replace_vectors(np.asarray(q) @ self.vectors)


@dataclass(frozen=True, eq=False)
class SynthesisOperator:
    matrix: np.ndarray
    family: FrameFamily

    def __call__(self, c) -> np.ndarray:
        return self.matrix @ np.asarray(c)


@dataclass(frozen=True)
class FrameDiagnostics:
    lower_bound_A: float
    upper_bound_B: float
    rank: int
    excess: int
    linearly_independent: bool
    tight: bool
    tau: float
    singular_values: np.ndarray = field(repr=False)

    @property
    def condition(self) -> float:
        return self.upper_bound_B / self.lower_bound_A

    def as_dict(self) -> dict:
        return {
            "lower_bound_A": self.lower_bound_A,
            "upper_bound_B": self.upper_bound_B,
            "rank": self.rank,
            "excess": self.excess,
            "linearly_independent": self.linearly_independent,
            "tight": self.tight,
            "tau": self.tau,
        }


@dataclass(frozen=True, eq=False)
class KernelBasis:
    basis: np.ndarray  # n x d, orthonormal columns
    edge_mass: np.ndarray  # per column
    cut: float
    periodic: bool
    edge_width: int

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def synthesis(fam: FrameFamily) -> SynthesisOperator:
    return SynthesisOperator(fam.vectors, fam)


def gram(fam: FrameFamily) -> np.ndarray:
    return fam.vectors.conj().T @ fam.vectors


def frame_operator(fam: FrameFamily) -> np.ndarray:
    return fam.vectors @ fam.vectors.conj().T


def frame_bounds(fam: FrameFamily, tol: Tolerances = DEFAULT_TOL) -> FrameDiagnostics:
    """Frame bounds on span(fam), rank and excess.

    The nonzero eigenvalues of S = U U* are the squared singular values of U;
    those above the rank tolerance give A (smallest) and B (largest).
    """
    u = fam.vectors
    s = np.linalg.svd(u, compute_uv=False)
    tau = nx.rank_tol(u.shape, s[0], tol)
    kept = s[s > tau]
    if kept.size == 0:
        raise DegenerateFamily("family has numerical rank 0")
    a, b = float(kept[-1] ** 2), float(kept[0] ** 2)
    rank = int(kept.size)
    excess = fam.size - rank
    return FrameDiagnostics(a, b, rank, excess, excess == 0, b / a - 1 <= 1e-8, tau, s)


def edge_rows(n: int, w: int) -> np.ndarray:
    w = min(w, n)
    return np.unique(np.r_[np.arange(w), np.arange(n - w, n)])


def kernel_cut(fam: FrameFamily, tol: Tolerances = DEFAULT_TOL, use_reference: bool = True) -> float:
    """Singular-value cut for the kernel proxy.

    With known reference bounds A of the infinite family, any coefficient
    vector with |Uc| <= f sqrt(A) |c| has at most f^2 of its mass outside the
    l2 kernel, so those directions stand in for N_U on a finite window.
    """
    s0 = np.linalg.svd(fam.vectors, compute_uv=False)[0]
    tau = nx.rank_tol(fam.vectors.shape, s0, tol)
    if use_reference and fam.reference_bounds is not None:
        return max(tau, tol.kernel_fraction * np.sqrt(fam.reference_bounds[0]))
    return tau


def kernel_basis(syn, cut: Optional[float] = None, tol: Tolerances = DEFAULT_TOL) -> KernelBasis:
    """Orthonormal basis of {c : |Uc| <= cut |c|}, default cut tau.

    The basis is rotated so that at most 2w columns touch the first/last w
    coefficients; the remaining columns carry no edge mass.
    """
    fam = syn.family if isinstance(syn, SynthesisOperator) else syn
    u = fam.vectors
    n = fam.size
    _, s, v = nx.svd(u, full=True)
    if cut is None:
        cut = nx.rank_tol(u.shape, s[0], tol)
    sfull = np.zeros(n)
    sfull[: s.size] = s
    k = v[:, sfull <= cut]
    w = int(tol.edge_width)
    if k.shape[1] == 0:
        return KernelBasis(k, np.zeros(0), float(cut), fam.periodic, w)
    if fam.periodic:
        return KernelBasis(k, np.zeros(k.shape[1]), float(cut), True, w)
    rows = edge_rows(n, w)
    _, _, eh = np.linalg.svd(k[rows, :])
    k = k @ eh.conj().T
    mass = np.sum(np.abs(k[rows, :]) ** 2, axis=0) / np.sum(np.abs(k) ** 2, axis=0)
    return KernelBasis(k, mass, float(cut), False, w)


def right_shift(c, periodic: bool = False):
    """(Tc)_k = c_{k-1}.  Returns (shifted, dropped mass)."""
    c = np.asarray(c)
    if periodic:
        return np.roll(c, 1, axis=0), 0.0
    out = np.zeros_like(c)
    out[1:] = c[:-1]
    return out, float(np.sum(np.abs(c[-1]) ** 2))


def left_shift(c, periodic: bool = False):
    """(T^{-1}c)_k = c_{k+1}.  Returns (shifted, dropped mass)."""
    c = np.asarray(c)
    if periodic:
        return np.roll(c, -1, axis=0), 0.0
    out = np.zeros_like(c)
    out[:-1] = c[1:]
    return out, float(np.sum(np.abs(c[0]) ** 2))


def shift_matrix(n: int, periodic: bool = False, direction: str = "right") -> np.ndarray:
    """Matrix of the coefficient shift on a window of length n."""
    m = np.eye(n, k=-1) if direction == "right" else np.eye(n, k=1)
    if periodic:
        if direction == "right":
            m[0, -1] = 1
        else:
            m[-1, 0] = 1
    return m


@dataclass(frozen=True)
class DefectResult:
    defect: float
    trusted: bool
    columns_used: int
    columns_total: int

    def __iter__(self):
        # allows ``defect, trusted = shift_invariance_defect(...)``
        return iter((self.defect, self.trusted))


def shift_invariance_defect(ker: KernelBasis, direction: str = "right",
                            tol: Tolerances = DEFAULT_TOL) -> DefectResult:
    """max over trusted kernel columns c of |(I - P) Tc| / |Tc|."""
    if direction not in ("right", "left"):
        raise ValueError("direction must be 'right' or 'left'")
    d = ker.dim
    if d == 0:
        return DefectResult(0.0, True, 0, 0)
    k = ker.basis
    shift = right_shift if direction == "right" else left_shift
    use = np.flatnonzero(ker.edge_mass <= tol.eta)
    if use.size == 0:
        return DefectResult(float("nan"), False, 0, d)
    tc, _ = shift(k[:, use], ker.periodic)
    resid = tc - k @ (k.conj().T @ tc)
    norms = np.linalg.norm(tc, axis=0)
    vals = np.linalg.norm(resid, axis=0) / np.where(norms > 0, norms, 1.0)
    return DefectResult(float(np.max(vals)), True, int(use.size), d)


def family_from_columns(cols: Sequence, k_min: int = 0, **kw) -> FrameFamily:
    u = np.column_stack([np.asarray(c, dtype=complex) for c in cols])
    return FrameFamily(u, k_min, k_min + u.shape[1] - 1, **kw)
