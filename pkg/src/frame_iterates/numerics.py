"""Dense complex linear algebra primitives.

Everything downstream goes through svd, eigh, lstsq and opnorm so that a
single rank tolerance policy applies everywhere:

    tau = max(rows, cols) * eps * sigma_max
"""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.linalg import subspace_angles

from .errors import InvalidMatrix, NotHermitian, ShapeError

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    """Tolerance set used by every check; embedded in every report."""

    tau_scale: float = 1.0
    eta: float = 1e-6  # edge-mass trust threshold
    edge_width: int = 1
    residual: float = 1e-8  # representability threshold
    kernel_fraction: float = 0.5  # ell^2-kernel proxy cut, times sqrt(A_ref)
    growth_divergent: float = 0.1
    growth_bounded: float = 0.02
    norm_slack: float = 1e-6

    def __post_init__(self):
        for name in ("tau_scale", "eta", "residual", "kernel_fraction", "norm_slack"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be positive")
        if int(self.edge_width) < 1:
            raise ValueError("edge_width must be >= 1")

    def with_overrides(self, **kw) -> "Tolerances":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOL = Tolerances()


class SvdResult(NamedTuple):
    # unpacks as (U, s, V) like numpy, but V holds right singular vectors as columns
    left_basis: np.ndarray
    singular_values: np.ndarray
    right_basis: np.ndarray  # columns are right singular vectors (V, not V*)


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.size == 0:
        raise InvalidMatrix(f"expected a nonempty 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix has non-finite entries")
    return a.astype(complex, copy=False)


def rank_tol(shape, sigma_max: float, tol: Tolerances = DEFAULT_TOL) -> float:
    return tol.tau_scale * max(shape) * EPS * float(sigma_max)


def svd(a, full: bool = True) -> SvdResult:
    a = as_matrix(a)
    u, s, vh = np.linalg.svd(a, full_matrices=full)
    return SvdResult(u, s, vh.conj().T)


def eigh(a, rtol: float = 1e-10):
    """Hermitian eigendecomposition, eigenvalues ascending."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"eigh needs a square matrix, got {a.shape}")
    scale = max(np.abs(a).max(), 1e-300)
    if np.abs(a - a.conj().T).max() > rtol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return w, v


def lstsq(a, b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Minimum-norm least-squares solution of a x = b, SVD with cutoff tau."""
    a = as_matrix(a)
    b_arr = np.asarray(b)
    vec = b_arr.ndim == 1
    b = as_matrix(b_arr)
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"lstsq: a has {a.shape[0]} rows, b has {b.shape[0]}")
    u, s, v = svd(a, full=False)
    r = int(np.sum(s > rank_tol(a.shape, s[0] if s.size else 0.0, tol)))
    x = v[:, :r] @ ((u[:, :r].conj().T @ b) / s[:r, None])
    return x[:, 0] if vec else x


def opnorm(a) -> float:
    a = as_matrix(a)
    return float(np.linalg.svd(a, compute_uv=False)[0])


def numerical_rank(a, tol: Tolerances = DEFAULT_TOL) -> int:
    s = svd(a, full=False).singular_values
    return int(np.sum(s > rank_tol(np.shape(a), s[0], tol))) if s.size else 0


def range_basis(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the column space (tau cutoff)."""
    u, s, _ = svd(a, full=False)
    r = int(np.sum(s > rank_tol(np.shape(a), s[0], tol)))
    return u[:, :r]


def null_basis(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical null space (tau cutoff)."""
    a = as_matrix(a)
    _, s, v = svd(a, full=True)
    r = int(np.sum(s > rank_tol(a.shape, s[0], tol)))
    return v[:, r:]


def principal_angles(a, b) -> np.ndarray:
    """Principal angles between the column spans of a and b (radians)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[1] == 0 and b.shape[1] == 0:
        return np.zeros(0)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.array([np.pi / 2])
    return subspace_angles(a, b)


def restricted_opnorm(a, basis) -> float:
    """Norm of a restricted to the span of an orthonormal basis."""
    if basis.shape[1] == 0:
        return 0.0
    return opnorm(a @ basis)


# ----- matrix CSV -----------------------------------------------------------

def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 or (z.imag == 0 and np.signbit(z.imag)) else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "")
    if not t:
        raise ValueError("empty complex entry")
    if t.endswith("i") or t.endswith("j"):
        t = t[:-1] + "j"
        try:
            return complex(t)
        except ValueError:
            raise ValueError(f"cannot parse complex entry {text!r}") from None
    return complex(float(t), 0.0)


def matrix_to_csv(a) -> str:
    a = as_matrix(a)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in a:
        w.writerow([format_complex(z) for z in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows:
        raise InvalidMatrix("empty matrix CSV")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ShapeError("ragged matrix CSV")
    return as_matrix(np.array([[parse_complex(x) for x in r] for r in rows]))
