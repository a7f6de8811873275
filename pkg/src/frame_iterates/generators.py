"""Deterministic constructors for the concrete systems.

Continuous objects live in discrete models whose Euclidean inner product is
the L2 inner product:

* translation families {T_{ka} phi} are built in the frequency domain on a
  uniform nu grid with weight sqrt(d nu); T_a is the exact phase e^{-2 pi i nu a}.
  With ``boundary="periodic"`` the window is one full period of the orbit
  (the default for translation and Gabor lattice families), with
  ``"truncated"`` it is a partial orbit in a much longer period;
* Gabor systems of chi_[0,1) use P samples per unit interval;
* sequence-space families use coordinates of an orthonormal basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateFamily, SpecError
from .frames import FrameFamily

KINDS = ("fourier", "shift_invariant", "sinc_oversampled", "gabor", "riesz_appendix",
         "interleaved_onb", "onb_plus_dependent", "weighted_onb")

PROFILES = ("sinc", "sinc_dilated", "bspline")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    size: int = 16
    params: dict = field(default_factory=dict)
    window: Optional[tuple] = None  # explicit (k_min, k_max) for truncated kinds

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if int(self.size) < 1:
            raise SpecError("size must be positive")
        object.__setattr__(self, "size", int(self.size))
        object.__setattr__(self, "params", dict(self.params))
        if self.window is not None:
            lo, hi = (int(x) for x in self.window)
            if not lo <= 0 <= hi:
                raise SpecError("window must contain index 0")
            object.__setattr__(self, "window", (lo, hi))

    def with_size(self, n: int) -> "GeneratorSpec":
        return replace(self, size=int(n), window=None)

    def with_params(self, **kw) -> "GeneratorSpec":
        p = dict(self.params)
        p.update(kw)
        return replace(self, params=p)

    def as_dict(self) -> dict:
        d = {"kind": self.kind, "size": self.size, "params": dict(self.params)}
        if self.window is not None:
            d["window"] = list(self.window)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        if "kind" not in d:
            raise SpecError("generator spec needs a 'kind'")
        d = dict(d)
        kind = d.pop("kind")
        size = d.pop("size", 16)
        window = d.pop("window", None)
        params = dict(d.pop("params", {}))
        params.update(d)  # flat keys are accepted too
        return cls(kind, size, params, tuple(window) if window is not None else None)


# ----- Phi(gamma) -----------------------------------------------------------

@dataclass
class PhiProfile:
    grid: np.ndarray
    values: np.ndarray
    essential_inf_offN: float
    essential_sup: float
    zero_fraction: float
    frame_sequence: bool
    riesz: bool

    def as_dict(self) -> dict:
        return {"essential_inf_offN": self.essential_inf_offN, "essential_sup": self.essential_sup,
                "zero_fraction": self.zero_fraction, "frame_sequence": self.frame_sequence,
                "riesz": self.riesz}


def _profile_from_values(grid, values, rel_cutoff=1e-8) -> PhiProfile:
    values = np.maximum(np.asarray(values, dtype=float), 0.0)
    top = float(values.max())
    if top <= 0:
        raise DegenerateFamily("phi vanishes: Phi is identically zero")
    zero = values <= rel_cutoff * top
    sup = float(values[~zero].max())
    inf = float(values[~zero].min())
    return PhiProfile(np.asarray(grid), values, inf, sup, float(zero.mean()),
                      frame_sequence=inf > 0, riesz=not zero.any())


def phi_profile(phi, grid_size: int = 64, dt: Optional[float] = None, bands: int = 8) -> PhiProfile:
    """Phi(gamma) = sum_k |phi_hat(gamma + k)|^2 on a uniform gamma grid in [0, 1).

    ``phi`` is either a callable phi_hat(nu) or an array of time samples with
    spacing ``dt`` (phi_hat via the DFT, truncated to the available spectrum).
    """
    if callable(phi):
        gam = np.arange(grid_size) / grid_size
        ks = np.arange(-bands, bands + 1)
        vals = sum(np.abs(phi(gam + k)) ** 2 for k in ks)
        return _profile_from_values(gam, vals)
    x = np.asarray(phi, dtype=complex)
    if dt is None:
        raise ValueError("time samples need a sample spacing dt")
    n = x.size
    span = n * dt
    per_band = span  # nu spacing is 1/span
    if abs(per_band - round(per_band)) > 1e-9 or abs(1 / dt - round(1 / dt)) > 1e-9:
        raise ValueError("need integer n*dt and 1/dt so that gamma grids align")
    per_band = int(round(per_band))
    # phi_hat(nu) ~ dt * sum_j x_j e^{-2 pi i nu t_j}, t_j = (j - n/2) dt
    hat = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(x))) * dt
    nu = (np.arange(n) - n // 2) / span
    gidx = np.round((nu % 1.0) * per_band).astype(int) % per_band
    vals = np.zeros(per_band)
    np.add.at(vals, gidx, np.abs(hat) ** 2)
    prof = _profile_from_values(np.arange(per_band) / per_band, vals)
    if grid_size != per_band:
        g = np.arange(grid_size) / grid_size
        prof = _profile_from_values(g, np.interp(g, prof.grid, prof.values, period=1.0))
    return prof


def profile_hat(profile: str) -> tuple[Callable, float]:
    """Named generator phi_hat and the half-width of its band."""
    if profile == "sinc":
        return (lambda nu: ((nu >= -0.5) & (nu < 0.5)).astype(float)), 0.5
    if profile == "sinc_dilated":
        return (lambda nu: np.sqrt(2.0) * ((nu >= -0.25) & (nu < 0.25))), 0.5
    if profile == "bspline":
        return (lambda nu: np.sinc(nu) ** 2), 2.0
    raise SpecError(f"unknown profile {profile!r}; expected one of {PROFILES}")


# ----- translation orbits ---------------------------------------------------

def _translation_family(phi_hat, half_band, step, ks, count_per_period, label, bounds):
    """Vectors phi_hat(nu) e^{-2 pi i nu k step} sqrt(d nu) on a nu grid.

    The grid spacing 1/(step * count_per_period) makes the orbit periodic
    with period count_per_period.
    """
    dnu = 1.0 / (step * count_per_period)
    lo = -half_band
    npts = 2 * half_band / dnu
    if abs(npts - round(npts)) > 1e-9 or abs(lo / dnu - round(lo / dnu)) > 1e-9:
        raise SpecError("window incompatible with the frequency grid "
                        f"(band {2 * half_band}, step {step}, period {count_per_period})")
    nu = lo + dnu * np.arange(int(round(npts)))
    amp = phi_hat(nu) * np.sqrt(dnu)
    vec = amp[:, None] * np.exp(-2j * np.pi * np.outer(nu, np.asarray(ks) * step))
    return vec, nu


def _periodic_window(n):
    lo = -(n // 2)
    return lo, lo + n - 1


def _sym_window(spec):
    if spec.window is not None:
        return spec.window
    h = spec.size // 2
    return -h, spec.size - h


def _pow2_at_least(x):
    return 1 << max(0, math.ceil(math.log2(max(1, x))))


def _fourier(spec: GeneratorSpec) -> FrameFamily:
    boundary = spec.params.get("boundary", "truncated")
    if boundary == "periodic":
        m = int(spec.params.get("M", spec.size))
        lo, hi = _periodic_window(m)
    else:
        lo, hi = _sym_window(spec)
        m = int(spec.params.get("M", max(64, _pow2_at_least(4 * (hi - lo)))))
        if m < 4 * (hi - lo):
            raise SpecError(f"ambient M={m} below 4 x window length {hi - lo}")
    x = np.arange(m) / m
    ks = np.arange(lo, hi + 1)
    u = np.exp(2j * np.pi * np.outer(x, ks)) / np.sqrt(m)
    return FrameFamily(u, lo, hi, label=f"fourier M={m}", periodic=boundary == "periodic",
                       reference_bounds=(1.0, 1.0))


def _shift_invariant(spec: GeneratorSpec) -> FrameFamily:
    profile = spec.params.get("profile", "sinc")
    phi_hat, half = profile_hat(profile)
    n = spec.size
    prof = phi_profile(phi_hat, grid_size=256)
    if spec.params.get("boundary", "periodic") != "periodic":
        raise SpecError("shift_invariant families are built periodic")
    lo, hi = _periodic_window(n)
    u, _ = _translation_family(phi_hat, half, 1.0, np.arange(lo, hi + 1), n,
                               profile, None)
    return FrameFamily(u, lo, hi, label=f"shift_invariant {profile}", periodic=True,
                       reference_bounds=(prof.essential_inf_offN, prof.essential_sup))


def _sinc(spec: GeneratorSpec) -> FrameFamily:
    r = int(spec.params.get("rate", 3))
    if r not in (1, 2, 3):
        raise SpecError("rate must be 1, 2 or 3")
    phi_hat, half = profile_hat("sinc")
    boundary = spec.params.get("boundary", "periodic")
    if boundary == "periodic":
        n = spec.size
        if n % (2 * r):
            raise SpecError(f"periodic window for rate {r} must be a multiple of {2 * r}")
        lo, hi = _periodic_window(n)
        u, _ = _translation_family(phi_hat, half, 1.0 / r, np.arange(lo, hi + 1), n, "", None)
        periodic = True
    elif boundary == "truncated":
        lo, hi = _sym_window(spec)
        count = hi - lo + 1
        m = int(spec.params.get("M", 4 * count + (4 * count) % 2))
        if m < 4 * count:
            raise SpecError(f"ambient M={m} below 4 x window length {count}")
        # nu spacing 1/m: orbit period r*m, far longer than the window
        u, _ = _translation_family(phi_hat, half, 1.0 / r, np.arange(lo, hi + 1), r * m, "", None)
        periodic = False
    else:
        raise SpecError(f"unknown boundary {boundary!r}")
    return FrameFamily(u, lo, hi, label=f"sinc rate={r} {boundary}", periodic=periodic,
                       reference_bounds=(float(r), float(r)))


def _z2n(k: int) -> int:
    return 2 * k if k >= 0 else -2 * k - 1


def _n2z(t: int) -> int:
    return t // 2 if t % 2 == 0 else -(t + 1) // 2


def _diamond(count: int, aspect: int):
    """First ``count`` points (a, n) of Z^2 ordered by |a|*aspect + |n|."""
    radius = 1
    while True:
        pts = [(a, n) for a in range(-radius, radius + 1) for n in range(-radius * aspect, radius * aspect + 1)
               if abs(a) * aspect + abs(n) <= radius * aspect]
        if len(pts) >= count:
            break
        radius *= 2
    pts.sort(key=lambda p: (abs(p[0]) * aspect + abs(p[1]), abs(p[0]), p[0] < 0, abs(p[1]), p[1] < 0))
    return pts[:count]


def gabor_interleaved_index(k: int, q: int, aspect: int, table=None):
    """(modulation m in units 1/q, interval n) of slot k in the reordered family.

    Odd slots run through the integer-modulation ONB, even slots alternate
    between the branches m = 1, 2 (mod q).
    """
    if k % 2:
        t = _z2n((k - 1) // 2)
        a, n = table[t]
        return q * a, n
    t = _z2n(k // 2)
    a, n = table[t // 2]
    return q * a + 1 + (t % 2), n


def _gabor(spec: GeneratorSpec) -> FrameFamily:
    ordering = spec.params.get("ordering", "lattice")
    q = int(spec.params.get("q", 3))
    if q != 3 and ordering == "interleaved3":
        raise SpecError("interleaved3 ordering needs q = 3")
    if ordering == "lattice":
        p = int(spec.params.get("P", 5))
        j = spec.size
        if math.gcd(j, q * p) != 1:
            raise SpecError(f"lattice ordering needs gcd(intervals={j}, q*P={q * p}) = 1")
        n = q * p * j
        lo, hi = _periodic_window(n)
        ks = np.arange(lo, hi + 1)
        u = np.zeros((p * j, n), dtype=complex)
        jj = np.arange(p)
        for col, k in enumerate(ks):
            iv = k % j
            u[iv * p + jj, col] = np.exp(2j * np.pi * (k % (q * p)) * jj / (q * p)) / np.sqrt(p)
        return FrameFamily(u, lo, hi, label=f"gabor lattice q={q} P={p} J={j}", periodic=True,
                           reference_bounds=(float(q), float(q)))
    if ordering != "interleaved3":
        raise SpecError(f"unknown gabor ordering {ordering!r}")
    p = int(spec.params.get("P", 16))
    aspect = int(spec.params.get("aspect", 2))
    lo, hi = _sym_window(spec)
    ks = list(range(lo, hi + 1))
    need = 2 * (max(abs(lo), abs(hi)) + 2)
    table = _diamond(need, aspect)
    slots = [gabor_interleaved_index(k, q, aspect, table) for k in ks]
    if max(abs(m) for m, _ in slots) >= q * p / 2:
        raise SpecError("P too small: modulations alias on the interval grid")
    nmax = max(abs(n) for _, n in slots)
    intervals = max(2 * nmax + 1, math.ceil(4 * len(ks) / p))
    intervals += (intervals + 1) % 2  # odd, centred on interval 0
    off = intervals // 2
    u = np.zeros((intervals * p, len(ks)), dtype=complex)
    jj = np.arange(p)
    for col, (m, n) in enumerate(slots):
        u[(n + off) * p + jj, col] = np.exp(2j * np.pi * m * jj / (q * p)) / np.sqrt(p)
    return FrameFamily(u, lo, hi, label=f"gabor interleaved3 P={p} aspect={aspect}",
                       reference_bounds=(float(q), float(q)))


def _riesz_appendix(spec: GeneratorSpec) -> FrameFamily:
    n_last = spec.size + 1  # 1-based indices 1..n_last stored at k = 0..size
    ambient = spec.params.get("ambient", "compressed")
    m = n_last - 1 if ambient == "compressed" else n_last
    if ambient not in ("compressed", "full") or m < 1:
        raise SpecError("ambient must be 'compressed' or 'full' (size >= 1)")
    u = appendix_matrix(n_last)[:m, :]
    return FrameFamily(u, 0, spec.size, label=f"riesz_appendix {ambient}")


def appendix_matrix(n: int) -> np.ndarray:
    """Columns f_1 = e_1, f_k = e_{k-1} + e_k / k (k = 2..n) in C^n."""
    u = np.zeros((n, n), dtype=complex)
    u[0, 0] = 1.0
    for k in range(2, n + 1):
        u[k - 2, k - 1] = 1.0
        u[k - 1, k - 1] = 1.0 / k
    return u


def haar_basis(m: int) -> np.ndarray:
    """Orthonormal Haar basis of C^m (m a power of 2), coarse to fine."""
    if m & (m - 1):
        raise SpecError("Haar basis needs a power-of-two grid")
    cols = [np.ones(m) / np.sqrt(m)]
    width = m
    while width > 1:
        half = width // 2
        for start in range(0, m, width):
            v = np.zeros(m)
            v[start:start + half] = 1.0
            v[start + half:start + width] = -1.0
            cols.append(v / np.sqrt(width))
        width = half
    return np.column_stack(cols)


def _interleaved_onb(spec: GeneratorSpec) -> FrameFamily:
    n = spec.size + 1
    m = int(spec.params.get("M", max(64, _pow2_at_least(4 * spec.size))))
    if m < 4 * spec.size or m & (m - 1):
        raise SpecError("M must be a power of two with M >= 4 x window length")
    x = np.arange(m) / m
    haar = haar_basis(m)
    cols = []
    for k in range(n):
        if k % 2 == 0:
            freq = _n2z(k // 2) + 0.5
            cols.append(np.exp(2j * np.pi * freq * x) / np.sqrt(m))
        else:
            cols.append(haar[:, k // 2])
    return FrameFamily(np.column_stack(cols), 0, n - 1,
                       label=f"interleaved_onb half-fourier/haar M={m}",
                       reference_bounds=(2.0, 2.0))


def _onb_plus_dependent(spec: GeneratorSpec) -> FrameFamily:
    alpha = float(spec.params.get("alpha", 0.5))
    if alpha <= 0:
        raise SpecError("alpha must be positive")
    lo, hi = _sym_window(spec)
    if lo > -1 or hi < 1:
        raise SpecError("window must reach at least [-1, 1]")
    # coordinates e_{lo+1} .. e_{hi}; e_j lives at row j - lo - 1
    m = hi - lo
    u = np.zeros((m, hi - lo + 1), dtype=complex)
    for col, k in enumerate(range(lo, hi + 1)):
        if k == 0:
            j = np.arange(1, hi + 1)
            u[j - lo - 1, col] = alpha * 2.0 ** (-j)
        else:
            j = k if k > 0 else k + 1
            u[j - lo - 1, col] = 1.0
    v2 = float(np.sum(np.abs(u[:, -lo]) ** 2))
    return FrameFamily(u, lo, hi, label=f"onb_plus_dependent alpha={alpha}",
                       reference_bounds=(1.0, 1.0 + v2))


def _weighted_onb(spec: GeneratorSpec) -> FrameFamily:
    w = np.asarray(spec.params.get("weights", [1.0, 2.0]), dtype=float)
    n = spec.size
    if n % w.size or np.any(w <= 0):
        raise SpecError("size must be a multiple of the weight period; weights positive")
    lo, hi = _periodic_window(n)
    u = np.zeros((n, n), dtype=complex)
    for col, k in enumerate(range(lo, hi + 1)):
        u[k % n, col] = w[k % w.size]
    return FrameFamily(u, lo, hi, label=f"weighted_onb weights={w.tolist()}", periodic=True,
                       reference_bounds=(float(w.min() ** 2), float(w.max() ** 2)))


_BUILDERS = {
    "fourier": _fourier,
    "shift_invariant": _shift_invariant,
    "sinc_oversampled": _sinc,
    "gabor": _gabor,
    "riesz_appendix": _riesz_appendix,
    "interleaved_onb": _interleaved_onb,
    "onb_plus_dependent": _onb_plus_dependent,
    "weighted_onb": _weighted_onb,
}


def generate(spec: GeneratorSpec) -> FrameFamily:
    if isinstance(spec, dict):
        spec = GeneratorSpec.from_dict(spec)
    return _BUILDERS[spec.kind](spec)


def translate_in_band(fam: FrameFamily, vec: np.ndarray, shift: float) -> np.ndarray:
    """Apply T_c to a vector of a sinc family (phase in the frequency model)."""
    nu = band_grid(fam)
    return np.exp(-2j * np.pi * nu * shift) * vec


def band_grid(fam: FrameFamily) -> np.ndarray:
    """Recover the nu grid of a [-1/2, 1/2) translation family."""
    m = fam.ambient_dim
    return -0.5 + np.arange(m) / m
