"""Sampled elements of C_c(G, A) for the affine crossed product.

An element is a complex array f[i, j] ≈ f(a_i)(b_j) on a product grid with
a declared support box. The group grid must be symmetric with an odd number
of nodes, so that a − a′ and −a are again nodes and only the b-variable
ever needs interpolation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigError, ShapeError
from .group_model import Grid1D

_LOG_MAX = 700.0


def _index_box(grid: Grid1D, lo: float, hi: float) -> tuple[int, int, bool]:
    """Node indices covering [lo, hi], clamped to the grid; flag if clamped."""
    i0 = math.ceil((lo - grid.lo) / grid.h - 1e-9)
    i1 = math.floor((hi - grid.lo) / grid.h + 1e-9)
    clamped = i0 < 0 or i1 > grid.count - 1
    i0 = max(i0, 0)
    i1 = min(i1, grid.count - 1)
    return i0, i1, clamped


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Grid samples of f(a)(b), identically zero outside ``support``.

    ``support`` is (first a-index, last a-index, first b-index, last b-index),
    inclusive. An empty support is encoded with first > last.
    """

    values: np.ndarray
    a_grid: Grid1D
    b_grid: Grid1D
    support: tuple[int, int, int, int]
    truncated: bool = False
    overflow: bool = False

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.a_grid.count, self.b_grid.count):
            raise ShapeError(f"values of shape {v.shape} do not match the grids")
        if not np.all(np.isfinite(v)):
            raise ConfigError("algebra element has non-finite samples")
        i0, i1, j0, j1 = (int(k) for k in self.support)
        mask = np.zeros(v.shape, dtype=bool)
        if i0 <= i1 and j0 <= j1:
            mask[max(i0, 0): i1 + 1, max(j0, 0): j1 + 1] = True
        v[~mask] = 0.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "support", (i0, i1, j0, j1))

    @property
    def a(self) -> np.ndarray:
        return self.a_grid.points

    @property
    def b(self) -> np.ndarray:
        return self.b_grid.points

    @property
    def empty(self) -> bool:
        i0, i1, j0, j1 = self.support
        return i0 > i1 or j0 > j1

    def support_coords(self) -> tuple[float, float, float, float]:
        i0, i1, j0, j1 = self.support
        a, b = self.a, self.b
        return a[i0], a[i1], b[j0], b[j1]

    def with_values(self, values: np.ndarray, **kw) -> "AlgebraElement":
        return replace(self, values=values, **kw)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same_grids(self, other)
        s, o = self.support, other.support
        box = (min(s[0], o[0]), max(s[1], o[1]), min(s[2], o[2]), max(s[3], o[3]))
        return replace(self, values=self.values + other.values, support=box,
                       truncated=self.truncated or other.truncated)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + other.scaled(-1.0)

    def scaled(self, k: complex) -> "AlgebraElement":
        return replace(self, values=k * self.values)

    # -- serialization -------------------------------------------------
    def to_csv(self, path: str | Path) -> None:
        """Write ``a,b,re,im`` rows (a outer), preceded by a support comment."""
        with open(path, "w", newline="") as fh:
            fh.write("# support=" + ",".join(str(k) for k in self.support) + "\n")
            w = csv.writer(fh)
            w.writerow(["a", "b", "re", "im"])
            for i, a in enumerate(self.a):
                for j, b in enumerate(self.b):
                    z = self.values[i, j]
                    w.writerow([repr(float(a)), repr(float(b)), repr(float(z.real)),
                                repr(float(z.imag))])

    @classmethod
    def from_csv(cls, path: str | Path) -> "AlgebraElement":
        with open(path, newline="") as fh:
            first = fh.readline()
            if not first.startswith("# support="):
                raise ConfigError(f"{path}: missing support header")
            support = tuple(int(k) for k in first.split("=", 1)[1].split(","))
            rows = list(csv.DictReader(fh))
        a = np.array([float(r["a"]) for r in rows])
        b = np.array([float(r["b"]) for r in rows])
        z = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
        na = np.unique(a).size
        nb = np.unique(b).size
        if na * nb != z.size:
            raise ShapeError(f"{path}: rows do not form a product grid")
        ag = Grid1D(float(a[0]), float(a[-1]), na)
        bg = Grid1D(float(b[0]), float(b[-1]), nb)
        return cls(z.reshape(na, nb), ag, bg, support)  # type: ignore[arg-type]


def _same_grids(*els: AlgebraElement) -> None:
    a0, b0 = els[0].a_grid, els[0].b_grid
    for e in els[1:]:
        if e.a_grid != a0 or e.b_grid != b0:
            raise ShapeError("elements are sampled on different grids")


def _require_symmetric(grid: Grid1D) -> None:
    if not grid.symmetric:
        raise ShapeError("the group grid must be symmetric about 0 with an odd count")


def zero_element(a_grid: Grid1D, b_grid: Grid1D) -> AlgebraElement:
    return AlgebraElement(np.zeros((a_grid.count, b_grid.count)), a_grid, b_grid, (0, -1, 0, -1))


def from_function(
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a_grid: Grid1D,
    b_grid: Grid1D,
    box: tuple[float, float, float, float],
) -> AlgebraElement:
    """Sample fn(a, b) and declare the support box (a0, a1, b0, b1)."""
    i0, i1, ai = _index_box(a_grid, box[0], box[1])
    j0, j1, bi = _index_box(b_grid, box[2], box[3])
    A, B = np.meshgrid(a_grid.points, b_grid.points, indexing="ij")
    return AlgebraElement(fn(A, B), a_grid, b_grid, (i0, i1, j0, j1), truncated=ai or bi)


def c2_bump(x: np.ndarray, radius: float) -> np.ndarray:
    """(1 − (x/R)²)³ on |x| < R, zero elsewhere: a C² window with exact support."""
    t = np.clip(1.0 - (np.asarray(x, dtype=float) / radius) ** 2, 0.0, None)
    return t ** 3


def gaussian_element(
    a_grid: Grid1D,
    b_grid: Grid1D,
    center: tuple[float, float] = (0.0, 0.0),
    width: tuple[float, float] = (0.3, 0.8),
    radius: tuple[float, float] = (0.6, 2.0),
    amplitude: complex = 1.0,
    chirp: float = 0.0,
) -> AlgebraElement:
    """Separable Gaussian windowed by C² bumps; ``chirp`` adds a phase e^{i·chirp·b}."""
    a0, b0 = center
    sa, sb = width
    ra, rb = radius

    def fn(A: np.ndarray, B: np.ndarray) -> np.ndarray:
        g = np.exp(-0.5 * ((A - a0) / sa) ** 2 - 0.5 * ((B - b0) / sb) ** 2)
        return amplitude * g * c2_bump(A - a0, ra) * c2_bump(B - b0, rb) * np.exp(1j * chirp * B)

    return from_function(fn, a_grid, b_grid, (a0 - ra, a0 + ra, b0 - rb, b0 + rb))


# ---------------------------------------------------------------------------
# interpolation in b


def interp_b(rows: np.ndarray, grid: Grid1D, x: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of each row at points x, zero outside the grid.

    rows: (m, nb); x: any shape. Returns (m, *x.shape).
    """
    t = (np.asarray(x, dtype=float) - grid.lo) / grid.h
    inside = (t >= -1e-12) & (t <= grid.count - 1 + 1e-12)
    t = np.clip(t, 0.0, grid.count - 1)
    i = np.minimum(np.floor(t).astype(int), grid.count - 2)
    frac = t - i
    out = rows[:, i] * (1.0 - frac) + rows[:, i + 1] * frac
    return np.where(inside, out, 0.0)


def hat_matrix(grid: Grid1D, x: np.ndarray, coeff: np.ndarray) -> np.ndarray:
    """M[j, m] = Σ_l coeff[l]·φ_m(x[j, l]) for hat functions φ_m of the grid.

    So that (M @ v)[j] = Σ_l coeff[l]·(linear interpolant of v)(x[j, l]).
    """
    nj, nl = x.shape
    t = (x - grid.lo) / grid.h
    inside = (t >= -1e-12) & (t <= grid.count - 1 + 1e-12)
    t = np.clip(t, 0.0, grid.count - 1)
    i = np.minimum(np.floor(t).astype(int), grid.count - 2)
    frac = t - i
    c = np.broadcast_to(coeff, (nj, nl))
    wl = np.where(inside, c * (1.0 - frac), 0.0)
    wr = np.where(inside, c * frac, 0.0)
    rows = np.repeat(np.arange(nj), nl)
    flat = np.concatenate([rows * grid.count + i.ravel(), rows * grid.count + i.ravel() + 1])
    weights = np.concatenate([wl.ravel(), wr.ravel()])
    size = nj * grid.count
    if np.iscomplexobj(weights):
        out = (np.bincount(flat, weights.real, size) + 1j * np.bincount(flat, weights.imag, size))
    else:
        out = np.bincount(flat, weights, size)
    return out.reshape(nj, grid.count)


# ---------------------------------------------------------------------------
# algebra operations


def _corners(scales: tuple[float, float], lo: float, hi: float) -> tuple[float, float]:
    vals = [s * v for s in scales for v in (lo, hi)]
    return min(vals), max(vals)


def star_alpha(f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    """(f⋆g)(a)(b) = ∫da′db′ e^{a′} f(a′)(b′) g(a−a′)(e^{a′}(b−b′)) on the grid."""
    _same_grids(f, g)
    ag, bg = f.a_grid, f.b_grid
    _require_symmetric(ag)
    if f.empty or g.empty:
        return zero_element(ag, bg)
    na, nb = ag.count, bg.count
    mid = na // 2
    a, b = ag.points, bg.points
    wa, wb = ag.weights, bg.weights
    fi0, fi1, fj0, fj1 = f.support
    out = np.zeros((na, nb), dtype=complex)
    bsl = slice(fj0, fj1 + 1)
    diff = b[:, None] - b[None, bsl]
    for k in range(fi0, fi1 + 1):
        coeff = f.values[k, bsl] * wb[bsl]
        P = hat_matrix(bg, math.exp(a[k]) * diff, coeff)
        shift = k - mid  # output row i reads g row i − shift
        lo, hi = max(0, shift), min(na, na + shift)
        out[lo:hi] += wa[k] * math.exp(a[k]) * (g.values[lo - shift: hi - shift] @ P.T)
    fa0, fa1, fb0, fb1 = f.support_coords()
    ga0, ga1, gb0, gb1 = g.support_coords()
    i0, i1, ta = _index_box(ag, fa0 + ga0, fa1 + ga1)
    # interpolated rows of g are nonzero up to one cell past their support
    blo, bhi = _corners((math.exp(-fa0), math.exp(-fa1)), gb0 - bg.h, gb1 + bg.h)
    j0, j1, tb = _index_box(bg, fb0 + blo, fb1 + bhi)
    return AlgebraElement(out, ag, bg, (i0, i1, j0, j1),
                          truncated=ta or tb or f.truncated or g.truncated)


def star_at(f: AlgebraElement, g: AlgebraElement, ia: int, bval: float) -> complex:
    """(f⋆g)(a_ia)(bval) by the same lattice quadrature, for any real bval."""
    _same_grids(f, g)
    ag, bg = f.a_grid, f.b_grid
    _require_symmetric(ag)
    mid = ag.count // 2
    a, b = ag.points, bg.points
    wa, wb = ag.weights, bg.weights
    total = 0.0 + 0.0j
    for k in range(f.support[0], f.support[1] + 1):
        m = ia - k + mid
        if not 0 <= m < ag.count:
            continue
        row = interp_b(g.values[m][None, :], bg, math.exp(a[k]) * (bval - b))[0]
        total += wa[k] * math.exp(a[k]) * np.sum(wb * f.values[k] * row)
    return complex(total)


def involution(f: AlgebraElement) -> AlgebraElement:
    """f*(a)(b) = e^{a}·conj f(−a)(−e^{a}b)."""
    ag, bg = f.a_grid, f.b_grid
    _require_symmetric(ag)
    if f.empty:
        return zero_element(ag, bg)
    a, b = ag.points, bg.points
    na = ag.count
    out = np.zeros((na, bg.count), dtype=complex)
    i0, i1 = na - 1 - f.support[1], na - 1 - f.support[0]
    for i in range(i0, i1 + 1):
        src = f.values[na - 1 - i][None, :]
        out[i] = math.exp(a[i]) * np.conj(interp_b(src, bg, -math.exp(a[i]) * b)[0])
    fa0, fa1, fb0, fb1 = f.support_coords()
    # −e^{a}b ∈ [fb0, fb1] with a ∈ [−fa1, −fa0]  ⇒  b ∈ −e^{−a}·[fb0, fb1]
    blo, bhi = _corners((-math.exp(fa0), -math.exp(fa1)), fb0 - bg.h, fb1 + bg.h)
    j0, j1, tb = _index_box(bg, blo, bhi)
    return AlgebraElement(out, ag, bg, (i0, i1, j0, j1), truncated=tb or f.truncated)


def beta_z(f: AlgebraElement, z: complex) -> AlgebraElement:
    """β_z(f)(a) = e^{−za}·f(a), formed in log-magnitude and clamped on overflow."""
    z = complex(z)
    if z == 0:
        return f
    a = f.a[:, None]
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(f.values)) - z.real * a
    over = logmag > _LOG_MAX
    phase = np.exp(1j * np.angle(f.values) - 1j * z.imag * a)
    mag = np.exp(np.minimum(logmag, _LOG_MAX))
    vals = np.where(f.values == 0, 0.0, mag * phase)
    return replace(f, values=vals, overflow=f.overflow or bool(np.any(over)))


def scale_w(a: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.exp(np.abs(a)))


def scale_sigma(b: np.ndarray) -> np.ndarray:
    return 1.0 + np.abs(b)


def seminorm(f: AlgebraElement, m: int = 0, n: int = 0) -> float:
    """‖f‖_{m,n} = ∫∫ w(a)^m σ(b)^n |f(a)(b)| da db (trapezoid)."""
    if m < 0 or n < 0 or int(m) != m or int(n) != n:
        raise ConfigError("seminorm indices must be non-negative integers")
    wa = f.a_grid.weights * scale_w(f.a) ** m
    wb = f.b_grid.weights * scale_sigma(f.b) ** n
    return float(wa @ np.abs(f.values) @ wb)


def dual_weight(f: AlgebraElement, g: AlgebraElement) -> complex:
    """φ̂(f*⋆g) = ∫∫ e^{−a} conj f(a)(b) g(a)(b) da db."""
    _same_grids(f, g)
    wa = f.a_grid.weights * np.exp(-f.a)
    return complex(wa @ (np.conj(f.values) * g.values) @ f.b_grid.weights)


def point_pairing(g: AlgebraElement, f: AlgebraElement) -> complex:
    """(g⋆f)(0)(0) = ∫da′db′ e^{a′} g(a′)(b′) f(−a′)(−e^{a′}b′)."""
    return star_at(g, f, g.a_grid.count // 2, 0.0)


def element_norm_diff(x: AlgebraElement, y: AlgebraElement) -> float:
    return seminorm(x - y, 0, 0)
