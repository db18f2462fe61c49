"""Periodic lattice discretization of functions on R^n.

Functions live on the torus [-L, L)^n sampled at N points per axis.  The
discrete Fourier transform is normalized so that it approximates the
continuum transform

    fhat(xi) = INT f(x) exp(-i xi.x) dx,
    f(x)     = (2 pi)^{-n} INT fhat(xi) exp(i xi.x) dxi,

i.e. the forward sum carries dx^n and the inverse carries
(dxi / 2 pi)^n.  With that convention the Riemann-sum L2 norm and the
spectral l2 norm agree exactly (discrete Parseval), so lattice norms
approximate continuum norms with no stray factors.

All operations are pure functions of their inputs; reductions use numpy's
fixed summation order, so results are reproducible run to run.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridSpec",
    "SampledField",
    "SpaceTimeField",
    "NormResult",
    "make_grid",
    "transform",
    "lebesgue_norm",
    "mixed_lebesgue_norm",
    "trapezoid_weights",
    "boundary_mass_fraction",
    "check_boundary_mass",
    "write_spacetime",
    "read_spacetime",
    "write_field",
    "read_field",
]

BOUNDARY_MASS_TOL = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic lattice on the torus [-L, L)^n.

    Position lattice per axis: x_m = -L + m * dx, m = 0..N-1, dx = 2L/N.
    Frequency lattice per axis: xi_j = (pi / L) * j, j = -N/2 .. N/2 - 1,
    stored in FFT (wrapped) order.
    """

    n: int
    length: float  # box half-length L
    npts: int      # points per axis N

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.length <= 0:
            raise ValueError(f"box half-length must be positive, got {self.length}")
        N = self.npts
        if N < 8 or (N & (N - 1)) != 0:
            raise ValueError(f"points per axis must be a power of two >= 8, got {N}")

    @property
    def dx(self) -> float:
        return 2.0 * self.length / self.npts

    @property
    def dxi(self) -> float:
        return np.pi / self.length

    @property
    def shape(self) -> tuple:
        return (self.npts,) * self.n

    @property
    def size(self) -> int:
        return self.npts ** self.n

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.n

    def axis_points(self) -> np.ndarray:
        """1-D position lattice -L + m*dx."""
        return -self.length + self.dx * np.arange(self.npts)

    def axis_frequencies(self) -> np.ndarray:
        """1-D angular frequency lattice in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.npts, d=self.dx)

    def meshgrid(self) -> tuple:
        axes = (self.axis_points(),) * self.n
        return np.meshgrid(*axes, indexing="ij")

    def frequency_meshgrid(self) -> tuple:
        axes = (self.axis_frequencies(),) * self.n
        return np.meshgrid(*axes, indexing="ij")

    def radii(self) -> np.ndarray:
        """|x| on the position lattice."""
        mesh = self.meshgrid()
        return np.sqrt(sum(c ** 2 for c in mesh))

    def frequency_radii(self) -> np.ndarray:
        """|xi| on the frequency lattice (FFT order)."""
        mesh = self.frequency_meshgrid()
        return np.sqrt(sum(c ** 2 for c in mesh))


@dataclass
class SampledField:
    """One complex amplitude per lattice point."""

    grid: GridSpec
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"value shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite entries")

    def copy(self, label: str | None = None) -> "SampledField":
        return SampledField(self.grid, self.values.copy(),
                            self.label if label is None else label)


@dataclass
class SpaceTimeField:
    """A time-indexed family of SampledFields on one shared grid."""

    grid: GridSpec
    times: np.ndarray
    slices: list = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.times) == 0:
            raise ValueError("times must be a non-empty 1-D array")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        if len(self.slices) != len(self.times):
            raise ValueError("one slice per time instant required")
        for s in self.slices:
            if s.grid != self.grid:
                raise ValueError("all slices must share the same grid")

    @classmethod
    def from_values(cls, grid: GridSpec, times, values) -> "SpaceTimeField":
        """Build from an array of shape (ntimes, *grid.shape)."""
        values = np.asarray(values, dtype=complex)
        slices = [SampledField(grid, v) for v in values]
        return cls(grid, np.asarray(times, float), slices)

    def value_array(self) -> np.ndarray:
        return np.stack([s.values for s in self.slices])


@dataclass
class NormResult:
    """A computed norm plus the metadata needed to reproduce it.

    ``est_error`` is a relative discretization/quadrature estimate when one
    is available (None otherwise).  ``diverged`` marks norms whose value is
    dominated by truncation rather than genuine decay.
    """

    value: float
    space: str
    exponents: dict
    meta: dict = field(default_factory=dict)
    est_error: float | None = None
    diverged: bool = False

    def to_json_dict(self) -> dict:
        def enc(v):
            if isinstance(v, float) and np.isinf(v):
                return "inf"
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return {
            "value": float(self.value),
            "space": self.space,
            "exponents": {k: enc(v) for k, v in self.exponents.items()},
            "meta": {k: enc(v) for k, v in self.meta.items()},
            "est_error": self.est_error,
            "diverged": self.diverged,
        }


def make_grid(n: int, length: float, npts: int) -> GridSpec:
    """Build a GridSpec; rejects non-power-of-two npts and n outside 1..3."""
    return GridSpec(n=n, length=float(length), npts=int(npts))


def _phase(grid: GridSpec) -> np.ndarray:
    """(-1)^(j_1+...+j_n) on the frequency lattice, from x_m = -L + m dx."""
    j = np.fft.fftfreq(grid.npts, d=1.0 / grid.npts)  # integer indices, FFT order
    sign = np.where(np.round(j).astype(int) % 2 == 0, 1.0, -1.0)
    out = sign
    for _ in range(grid.n - 1):
        out = np.multiply.outer(out, sign)
    return out


def transform(fld: SampledField, direction: str = "forward") -> SampledField:
    """Forward ('forward') or inverse ('inverse') discrete Fourier transform.

    Forward output lives on the frequency lattice in FFT order; the phase
    factor accounts for the position lattice starting at -L.
    """
    g = fld.grid
    ph = _phase(g)
    if direction == "forward":
        vals = g.cell_volume * ph * np.fft.fftn(fld.values)
    elif direction == "inverse":
        # (dxi/2pi)^n sum = ifftn * N^n * (dxi/2pi)^n = ifftn / dx^n
        vals = np.fft.ifftn(ph * fld.values) / g.cell_volume
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return SampledField(g, vals, fld.label)


def lebesgue_norm(fld: SampledField, p: float) -> NormResult:
    """Riemann-sum L^p norm; lattice max for p = inf."""
    p = float(p)
    if p < 1:
        raise ValueError(f"p must be in [1, inf], got {p}")
    a = np.abs(fld.values)
    if np.isinf(p):
        value = float(a.max())
    else:
        value = float((np.sum(a ** p) * fld.grid.cell_volume) ** (1.0 / p))
    return NormResult(
        value=value,
        space="lebesgue",
        exponents={"p": p},
        meta={"n": fld.grid.n, "L": fld.grid.length, "N": fld.grid.npts},
    )


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    """Trapezoidal quadrature weights for the given instants.

    A single instant gets unit weight so that one-slice space-time norms
    reduce to the spatial norm.
    """
    times = np.asarray(times, dtype=float)
    if len(times) == 1:
        return np.ones(1)
    w = np.zeros(len(times))
    dt = np.diff(times)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def mixed_lebesgue_norm(stf: SpaceTimeField, q: float, r: float) -> NormResult:
    """L^q in time of the spatial L^r norms, with trapezoid time weights."""
    q, r = float(q), float(r)
    if q < 1 or r < 1:
        raise ValueError("exponents must be in [1, inf]")
    spatial = np.array([lebesgue_norm(s, r).value for s in stf.slices])
    w = trapezoid_weights(stf.times)
    if np.isinf(q):
        value = float(spatial.max())
    else:
        value = float((np.sum(w * spatial ** q)) ** (1.0 / q))
    return NormResult(
        value=value,
        space="mixed-lebesgue",
        exponents={"q": q, "r": r},
        meta={"n": stf.grid.n, "L": stf.grid.length, "N": stf.grid.npts,
              "ntimes": len(stf.times)},
    )


def boundary_mass_fraction(fld: SampledField) -> float:
    """Fraction of |f|^2 mass within distance L/4 of the torus boundary."""
    g = fld.grid
    mesh = g.meshgrid()
    sup = np.max(np.stack([np.abs(c) for c in mesh]), axis=0)
    near = sup >= 0.75 * g.length
    total = float(np.sum(np.abs(fld.values) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(fld.values[near]) ** 2) / total)


def check_boundary_mass(fld: SampledField, tol: float = BOUNDARY_MASS_TOL) -> float:
    """Warn when boundary mass exceeds tol (wrap-around pollutes decay)."""
    frac = boundary_mass_fraction(fld)
    if frac >= tol:
        warnings.warn(
            f"field {fld.label!r} has boundary mass fraction {frac:.3e} >= {tol:.1e}; "
            "increase the box half-length",
            stacklevel=2,
        )
    return frac


# ---------------------------------------------------------------------------
# Binary container: header (n, L, N, slice count, times) + interleaved
# re/im float64 per slice, all little-endian.
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<qdqq")


def write_spacetime(stf: SpaceTimeField, path) -> None:
    g = stf.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.n, g.length, g.npts, len(stf.times)))
        fh.write(np.asarray(stf.times, dtype="<f8").tobytes())
        for s in stf.slices:
            flat = np.ascontiguousarray(s.values).ravel()
            inter = np.empty(2 * flat.size, dtype="<f8")
            inter[0::2] = flat.real
            inter[1::2] = flat.imag
            fh.write(inter.tobytes())


def read_spacetime(path) -> SpaceTimeField:
    with open(path, "rb") as fh:
        n, length, npts, nslices = _HEADER.unpack(fh.read(_HEADER.size))
        grid = GridSpec(n=int(n), length=float(length), npts=int(npts))
        times = np.frombuffer(fh.read(8 * nslices), dtype="<f8").copy()
        slices = []
        count = grid.size
        for _ in range(nslices):
            inter = np.frombuffer(fh.read(16 * count), dtype="<f8")
            vals = (inter[0::2] + 1j * inter[1::2]).reshape(grid.shape)
            slices.append(SampledField(grid, vals))
    return SpaceTimeField(grid, times, slices)


def write_field(fld: SampledField, path, time: float = 0.0) -> None:
    write_spacetime(SpaceTimeField(fld.grid, np.array([time]), [fld]), path)


def read_field(path) -> SampledField:
    stf = read_spacetime(path)
    out = stf.slices[0]
    return out
