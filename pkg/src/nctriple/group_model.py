"""Acting groups, their homomorphisms and the truncated sampling grids."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Grid1D:
    """Uniform sampling of [lo, hi] with ``count`` points."""

    lo: float
    hi: float
    count: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ConfigError(f"grid bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise ConfigError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.count) != self.count or self.count < 3:
            raise ConfigError(f"grid needs an integer count >= 3, got {self.count}")

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.count, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    @property
    def symmetric(self) -> bool:
        return abs(self.lo + self.hi) <= 1e-12 * (self.hi - self.lo) and self.count % 2 == 1

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.lo, self.hi, (self.count - 1) * factor + 1)

    def index_of(self, x: float, atol: float = 1e-9) -> int:
        """Index of a grid node equal to x (within atol·h); raises if none."""
        k = (x - self.lo) / self.h
        i = int(round(k))
        if not (0 <= i < self.count) or abs(k - i) > atol:
            raise ConfigError(f"{x} is not a node of {self}")
        return i

    @classmethod
    def parse(cls, spec: str) -> "Grid1D":
        """Parse ``lo:hi:count``."""
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid spec must be lo:hi:count, got {spec!r}")
        try:
            lo, hi = float(parts[0]), float(parts[1])
            count = int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad grid spec {spec!r}: {exc}") from None
        return cls(lo, hi, count)


class GroupKind(str, Enum):
    REAL_LINE = "real_line"
    INTEGERS = "integers"
    DILATION = "dilation"


Hom = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GroupModel:
    """One of the three acting groups together with (Δ_G, ν, ϑ).

    ``grid`` samples the group: a uniform Grid1D for the real line and the
    dilation group, integer nodes for ℤ. ``n`` is the base-space dimension
    (1 except for dilations of ℝⁿ).
    """

    kind: GroupKind
    grid: Grid1D | None
    n_range: tuple[int, int] | None = None
    n: int = 1

    @property
    def points(self) -> np.ndarray:
        if self.kind is GroupKind.INTEGERS:
            assert self.n_range is not None
            return np.arange(self.n_range[0], self.n_range[1] + 1, dtype=float)
        assert self.grid is not None
        return self.grid.points

    def modular_fn(self, r: np.ndarray) -> np.ndarray:
        return np.ones_like(np.asarray(r, dtype=float))

    def nu(self, r: np.ndarray) -> np.ndarray:
        """Jacobian homomorphism of the action on the base: e^{−n·r}."""
        return np.exp(-self.n * np.asarray(r, dtype=float))

    def vartheta(self, r: np.ndarray) -> np.ndarray:
        return np.exp(-0.5 * np.asarray(r, dtype=float))

    def contains(self, r: float) -> bool:
        if self.kind is GroupKind.INTEGERS:
            assert self.n_range is not None
            return float(r).is_integer() and self.n_range[0] <= r <= self.n_range[1]
        assert self.grid is not None
        return self.grid.lo - 1e-12 <= r <= self.grid.hi + 1e-12


def make_group(kind: GroupKind | str, spec: Grid1D | tuple, n: int = 1) -> GroupModel:
    """Build a group model.

    ``spec`` is a Grid1D (or ``(lo, hi, count)``) for the continuous groups
    and ``(n_min, n_max)`` for the integers.
    """
    kind = GroupKind(kind)
    if kind is GroupKind.INTEGERS:
        if isinstance(spec, Grid1D) or len(spec) != 2:
            raise ConfigError("integer group needs an index range (n_min, n_max)")
        lo, hi = spec
        if int(lo) != lo or int(hi) != hi or not lo < hi:
            raise ConfigError(f"bad integer range {spec}")
        return GroupModel(kind, None, (int(lo), int(hi)), 1)
    grid = spec if isinstance(spec, Grid1D) else Grid1D(*spec)
    if kind is GroupKind.DILATION:
        if int(n) != n or n < 1:
            raise ConfigError(f"dilation dimension must be a positive integer, got {n}")
        return GroupModel(kind, grid, None, int(n))
    return GroupModel(kind, grid, None, 1)


def haar_weights(g: GroupModel) -> np.ndarray:
    if g.kind is GroupKind.INTEGERS:
        return np.ones(g.points.size)
    assert g.grid is not None
    return g.grid.weights


def homomorphism_residual(fn: Hom, r: np.ndarray, rp: np.ndarray) -> float:
    """max |f(r+r′) − f(r)f(r′)| / |f(r)f(r′)| over the paired samples."""
    lhs = fn(r + rp)
    rhs = fn(r) * fn(rp)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))
