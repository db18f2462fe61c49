"""Wiener amalgam norms on the lattice.

The amalgam norm of exponents (p, q) localizes f by a window translated
along a sub-lattice of step a, takes the inner L^p norm of each localized
piece, and then the outer norm

    ( a^n * sum_k ||f tau_k phi||_p^q )^(1/q)        (max over k for q = inf).

The a^(n/q) weight makes the outer sum a Riemann sum of the continuum
outer integral.

Two window regimes are supported on purpose:

* smooth windows (gaussian / smooth-bump) with unit L2 normalization, for
  decay measurements where only equivalence constants matter;
* exact cube partitions (side == step), where the window translates tile
  the lattice and identities such as W(L^p, L^p) = L^p or the Holder
  pairing hold with constant exactly 1 (for unit cubes).

Everything here is pure; translate loops use a fixed order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .extreal import as_extended, conjugate, from_recip, recip, to_float
from .grid import (
    GridSpec,
    NormResult,
    SampledField,
    SpaceTimeField,
    trapezoid_weights,
)

__all__ = [
    "WindowSpec",
    "NormResult",
    "unit_cube_partition",
    "amalgam_norm",
    "weak_lorentz_norm",
    "spacetime_amalgam_norm",
    "holder_pairing",
    "interpolate_exponents",
    "inclusion_check",
]

_KINDS = ("gaussian", "smooth-bump", "cube-indicator")


@dataclass(frozen=True)
class WindowSpec:
    """Test window and its translation lattice.

    radius: support radius (cube half-side; bump support radius; gaussian
    scale).  step: translation lattice spacing a > 0.  normalization:
    'l2' renormalizes the discretized window to unit L2 mass; 'partition'
    keeps a raw cube indicator and requires side == step so the translates
    tile space exactly.
    """

    kind: str
    radius: float
    step: float
    normalization: str = "l2"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.radius <= 0 or self.step <= 0:
            raise ValueError("radius and step must be positive")
        if self.normalization not in ("l2", "partition"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.normalization == "partition":
            if self.kind != "cube-indicator":
                raise ValueError("partition normalization requires a cube-indicator window")
            if not math.isclose(2.0 * self.radius, self.step, rel_tol=1e-12):
                raise ValueError("partition requires cube side == translation step")

    @property
    def is_partition(self) -> bool:
        return self.normalization == "partition"

    def profile(self, dist: np.ndarray) -> np.ndarray:
        """Window amplitude as a function of (componentwise max-) distance.

        For the cube indicator the argument is the max-norm offset; for the
        radial kinds it is the euclidean distance.
        """
        dist = np.asarray(dist, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-(dist ** 2) / (2.0 * self.radius ** 2))
        if self.kind == "smooth-bump":
            out = np.zeros_like(dist)
            inside = dist < self.radius
            u = dist[inside] / self.radius
            out[inside] = np.exp(-1.0 / (1.0 - u ** 2)) * np.e
            return out
        return (dist < self.radius).astype(float)


def unit_cube_partition() -> WindowSpec:
    """Side-1 cube indicator on the integer lattice (exact tiling)."""
    return WindowSpec(kind="cube-indicator", radius=0.5, step=1.0,
                      normalization="partition")


def _translate_shape(win: WindowSpec, grid: GridSpec) -> tuple[int, int]:
    """(samples per step s, translates per axis K); validates divisibility."""
    s = win.step / grid.dx
    if abs(s - round(s)) > 1e-9 or round(s) < 1:
        raise ValueError(
            f"window step {win.step} is not a multiple of the lattice step {grid.dx}")
    s = int(round(s))
    K = 2.0 * grid.length / win.step
    if abs(K - round(K)) > 1e-9:
        raise ValueError(
            f"window step {win.step} does not divide the torus side {2 * grid.length}")
    return s, int(round(K))


def materialize_window(win: WindowSpec, grid: GridSpec) -> np.ndarray:
    """Window centered at x = 0 on the grid, with periodic displacement."""
    if 2.0 * win.radius > 2.0 * grid.length + 1e-12:
        raise ValueError(
            "window support exceeds the torus; translates would self-overlap")
    mesh = grid.meshgrid()
    # periodic displacement from 0 in each axis
    disp = [((c + grid.length) % (2.0 * grid.length)) - grid.length for c in mesh]
    if win.kind == "cube-indicator":
        dist = np.max(np.stack([np.abs(d) for d in disp]), axis=0)
    else:
        dist = np.sqrt(sum(d ** 2 for d in disp))
    phi = win.profile(dist)
    if win.normalization == "l2":
        mass = np.sqrt(np.sum(np.abs(phi) ** 2) * grid.cell_volume)
        if mass == 0:
            raise ValueError("window vanishes on this grid; radius below lattice step")
        phi = phi / mass
    return phi


def _block_view(values: np.ndarray, n: int, K: int, s: int) -> np.ndarray:
    """Reshape an (N,)*n array into (K^n, s^n) exact partition blocks."""
    shape = []
    for _ in range(n):
        shape.extend([K, s])
    v = values.reshape(shape)
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    v = np.transpose(v, order)
    return v.reshape(K ** n, s ** n)


def _inner_lp(blocks: np.ndarray, p: float, cell: float) -> np.ndarray:
    a = np.abs(blocks)
    if np.isinf(p):
        return a.max(axis=-1)
    return (np.sum(a ** p, axis=-1) * cell) ** (1.0 / p)


def _outer_lq(vals: np.ndarray, q: float, weight: float) -> float:
    if np.isinf(q):
        return float(vals.max())
    return float((weight * np.sum(vals ** q)) ** (1.0 / q))


def amalgam_norm(fld: SampledField, p: float, q: float, window: WindowSpec) -> NormResult:
    """W(L^p, L^q) norm of a field with the given window."""
    p, q = to_float(as_extended(p)), to_float(as_extended(q))
    if p < 1 or q < 1:
        raise ValueError("exponents must lie in [1, inf]")
    g = fld.grid
    s, K = _translate_shape(window, g)
    if window.is_partition:
        # cubes centered at the translate lattice k*a: [k*a - a/2, k*a + a/2);
        # rolling by s//2 aligns block boundaries with the cube edges
        rolled = np.roll(fld.values, (s // 2,) * g.n, axis=tuple(range(g.n)))
        blocks = _block_view(rolled, g.n, K, s)
        local = _inner_lp(blocks, p, g.cell_volume)
    else:
        phi = materialize_window(window, g)
        locals_ = []
        for flat in range(K ** g.n):
            idx = np.unravel_index(flat, (K,) * g.n)
            shifted = np.roll(phi, tuple(i * s for i in idx),
                              axis=tuple(range(g.n)))
            prod = np.abs(fld.values * shifted)
            if np.isinf(p):
                locals_.append(prod.max())
            else:
                locals_.append((np.sum(prod ** p) * g.cell_volume) ** (1.0 / p))
        local = np.asarray(locals_)
    value = _outer_lq(local, q, window.step ** g.n)
    return NormResult(
        value=value,
        space="wiener-amalgam",
        exponents={"p": p, "q": q},
        meta={"n": g.n, "L": g.length, "N": g.npts, "window": window.kind,
              "step": window.step, "radius": window.radius,
              "normalization": window.normalization},
        est_error=0.0 if window.is_partition else None,
    )


def weak_lorentz_norm(sequence, p: float) -> NormResult:
    """Discrete weak L^{p,inf} norm: sup_m m^(1/p) a*_m, a* nonincreasing."""
    p = to_float(as_extended(p))
    if not (0 < p < math.inf):
        raise ValueError(f"weak Lorentz exponent must be in (0, inf), got {p}")
    a = np.abs(np.asarray(sequence, dtype=float).ravel())
    if a.size == 0:
        value = 0.0
    else:
        srt = np.sort(a)[::-1]
        m = np.arange(1, srt.size + 1, dtype=float)
        value = float(np.max(m ** (1.0 / p) * srt))
    return NormResult(value=value, space="weak-lorentz", exponents={"p": p},
                      meta={"length": int(a.size)})


def _time_translates(times: np.ndarray, window: WindowSpec):
    """Default translate indices k (centers k*step) for the sampled span."""
    a = window.step
    if window.is_partition:
        k = np.unique(np.floor(times / a + 0.5).astype(int))
        return list(k)
    lo = math.ceil((times[0] + window.radius) / a - 1e-12)
    hi = math.floor((times[-1] - window.radius) / a + 1e-12)
    return list(range(lo, hi + 1))


def spacetime_amalgam_norm(
    stf: SpaceTimeField,
    qt, q, rt, r,
    window_t: WindowSpec,
    window_x: WindowSpec,
    weak_outer_time: bool = False,
    time_translates=None,
) -> NormResult:
    """W(L^qt, L^q)_t W(L^rt, L^r)_x norm of a space-time field.

    Per slice the spatial amalgam norm is taken, giving a scalar function
    of t; that function then gets the temporal amalgam treatment.  With
    ``weak_outer_time`` the outer norm over time translates is replaced by
    the weak Lorentz norm of exponent q.
    """
    qtf, qf = to_float(as_extended(qt)), to_float(as_extended(q))
    spatial = np.array([amalgam_norm(s, rt, r, window_x).value for s in stf.slices])
    times = stf.times
    w = trapezoid_weights(times)
    ks = _time_translates(times, window_t) if time_translates is None else list(time_translates)
    if not ks:
        raise ValueError("no time-window translate fits inside the sampled span")
    if time_translates is not None:
        if window_t.is_partition:
            lo_need = min(ks) * window_t.step - 0.5 * window_t.step
            hi_need = max(ks) * window_t.step + 0.5 * window_t.step
        else:
            lo_need = min(ks) * window_t.step - window_t.radius
            hi_need = max(ks) * window_t.step + window_t.radius
        if lo_need < times[0] - window_t.step or hi_need > times[-1] + window_t.step:
            raise ValueError(
                f"insufficient time coverage: translates need [{lo_need:g}, {hi_need:g}] "
                f"but samples span [{times[0]:g}, {times[-1]:g}]")
    local = []
    for k in ks:
        c = k * window_t.step
        if window_t.is_partition:
            mask = (times >= c - 0.5 * window_t.step) & (times < c + 0.5 * window_t.step)
            vals = spatial[mask]
            wts = w[mask]
        else:
            phi = window_t.profile(np.abs(times - c))
            vals = spatial * phi
            wts = w
        if vals.size == 0:
            local.append(0.0)
        elif np.isinf(qtf):
            local.append(float(np.max(vals)))
        else:
            local.append(float(np.sum(wts * vals ** qtf) ** (1.0 / qtf)))
    local = np.asarray(local)
    if weak_outer_time:
        base = weak_lorentz_norm(local, qf).value if not np.isinf(qf) else float(local.max())
        value = base * window_t.step ** (0.0 if np.isinf(qf) else 1.0 / qf)
        space = "spacetime-amalgam-weak"
    else:
        value = _outer_lq(local, qf, window_t.step)
        space = "spacetime-amalgam"
    return NormResult(
        value=value,
        space=space,
        exponents={"qt": to_float(as_extended(qt)), "q": qf,
                   "rt": to_float(as_extended(rt)), "r": to_float(as_extended(r))},
        meta={"n": stf.grid.n, "ntimes": len(times),
              "time_window": window_t.kind, "space_window": window_x.kind,
              "translates": len(ks)},
    )


def spacetime_inner_product(F: SpaceTimeField, G: SpaceTimeField) -> complex:
    """<F, G> over space-time with trapezoid weights in time."""
    if F.grid != G.grid or len(F.times) != len(G.times) or not np.allclose(F.times, G.times):
        raise ValueError("fields must share grid and time instants")
    w = trapezoid_weights(F.times)
    acc = 0.0 + 0.0j
    for wi, fs, gs in zip(w, F.slices, G.slices):
        acc += wi * np.sum(fs.values * np.conj(gs.values)) * F.grid.cell_volume
    return complex(acc)


def holder_pairing(
    F: SpaceTimeField,
    G: SpaceTimeField,
    qt, q, rt, r,
    window_t: WindowSpec,
    window_x: WindowSpec,
):
    """|<F, G>| against the product of dual amalgam norms.

    Requires exact cube partitions (side 1) so the inequality constant is
    exactly 1; with other windows the constant would depend on the window
    and nothing sharp could be asserted.
    """
    for win, side in ((window_t, "time"), (window_x, "space")):
        if not win.is_partition:
            raise ValueError(f"holder_pairing requires a partition window in {side}")
        if not math.isclose(win.step, 1.0, rel_tol=1e-12):
            raise ValueError("holder_pairing requires unit cubes (constant-1 inequality)")
    qtc, qc, rtc, rc = (conjugate(e) for e in (qt, q, rt, r))
    pairing = abs(spacetime_inner_product(F, G))
    lhs_norm = spacetime_amalgam_norm(F, qt, q, rt, r, window_t, window_x).value
    rhs_norm = spacetime_amalgam_norm(G, qtc, qc, rtc, rc, window_t, window_x).value
    bound = lhs_norm * rhs_norm
    holds = pairing <= bound * (1.0 + 1e-10) + 1e-12
    return pairing, bound, holds


def interpolate_exponents(p0, q0, p1, q1, theta):
    """Reciprocal-affine exponent interpolation, exact in rationals.

    1/p = theta/p0 + (1-theta)/p1 and likewise for q, with 1/inf = 0.
    Requires 0 < theta < 1 and q0 < inf or q1 < inf.
    """
    theta = Fraction(theta) if not isinstance(theta, float) else Fraction(str(theta))
    if not (0 < theta < 1):
        raise ValueError(f"theta must lie strictly inside (0, 1), got {theta}")
    u0, v0, u1, v1 = recip(p0), recip(q0), recip(p1), recip(q1)
    if v0 == 0 and v1 == 0:
        raise ValueError("interpolation requires q0 < inf or q1 < inf")
    p = from_recip(theta * u0 + (1 - theta) * u1)
    q = from_recip(theta * v0 + (1 - theta) * v1)
    return p, q


def inclusion_check(fld: SampledField, p1, q1, p2, q2, window: WindowSpec):
    """W(L^p1, L^q1) into W(L^p2, L^q2): norm comparison with constant 1.

    Requires p1 >= p2 and q1 <= q2 (the inclusion direction) and unit-cube
    partition windows, so the comparison constant is exactly 1.
    """
    p1f, q1f, p2f, q2f = (to_float(as_extended(e)) for e in (p1, q1, p2, q2))
    if p1f < p2f or q1f > q2f:
        raise ValueError(
            f"inclusion requires p1 >= p2 and q1 <= q2; got ({p1f},{q1f}) -> ({p2f},{q2f})")
    if not window.is_partition or not math.isclose(window.step, 1.0, rel_tol=1e-12):
        raise ValueError("inclusion_check requires unit-cube partition windows")
    lhs = amalgam_norm(fld, p2f, q2f, window).value
    rhs = amalgam_norm(fld, p1f, q1f, window).value
    holds = lhs <= rhs * (1.0 + 1e-10) + 1e-12
    return lhs, rhs, holds
