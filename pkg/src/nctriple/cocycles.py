"""Scalar and function-valued α-one-cocycles.

A cocycle satisfies c(r + r′) = c(r)·α_r[c(r′)] (all groups here are
abelian and written additively). Scalar cocycles take values in the
constants, on which the action is trivial, so the law reduces to a
multiplicative homomorphism. Function-valued cocycles live on a
log-uniform base lattice where the dilation action is an index shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .group_model import GroupKind, GroupModel, make_group

TRIVIAL_THRESHOLD = 1e-8


class Action(Protocol):
    def apply(self, r: float, value): ...


class TrivialAction:
    """α_r acting on constants: the identity."""

    def apply(self, r: float, value):
        return value

    def __repr__(self) -> str:
        return "TrivialAction()"


@dataclass(frozen=True)
class LogLattice:
    """Base points {0} ∪ {±e^{k·h} : |k| ≤ K}, sorted increasingly.

    Dilations x ↦ e^{r}x by multiples of h permute the nonzero nodes, which
    makes the action exact and multiplicative.
    """

    h: float
    K: int

    def __post_init__(self) -> None:
        if not self.h > 0 or self.K < 1:
            raise ConfigError("log lattice needs h > 0 and K >= 1")

    @property
    def size(self) -> int:
        return 4 * self.K + 3

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    @property
    def points(self) -> np.ndarray:
        pos = np.exp(self.exponents * self.h)
        return np.concatenate([-pos[::-1], [0.0], pos])


@dataclass(frozen=True)
class DilationAction:
    """(α_r φ)(x) = φ(e^{r}x) on a LogLattice, constant beyond the lattice ends."""

    lattice: LogLattice

    def apply(self, r: float, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value)
        K = self.lattice.K
        m = r / self.lattice.h
        pos = value[2 * K + 2:]
        neg = value[: 2 * K + 1][::-1]  # index k ↔ −e^{k h}

        def shift(branch: np.ndarray) -> np.ndarray:
            t = np.clip(np.arange(2 * K + 1) + m, 0, 2 * K)
            lo = np.floor(t).astype(int)
            hi = np.minimum(lo + 1, 2 * K)
            frac = t - lo
            return branch[lo] * (1.0 - frac) + branch[hi] * frac

        out = np.empty_like(value)
        out[2 * K + 2:] = shift(pos)
        out[: 2 * K + 1] = shift(neg)[::-1]
        out[2 * K + 1] = value[2 * K + 1]
        return out


@dataclass(frozen=True)
class Cocycle:
    """A map r ↦ c(r) with the action used in the cocycle law."""

    fn: Callable[[float], object]
    action: Action = field(default_factory=TrivialAction)
    name: str = "c"
    positive: bool = False

    def __call__(self, r: float):
        return self.fn(float(r))


def scalar_cocycle(fn: Callable[[float], complex], name: str, positive: bool = False) -> Cocycle:
    return Cocycle(fn, TrivialAction(), name, positive)


def cocycle_law_residual(
    c: Cocycle, pairs: Sequence[tuple[float, float]], group: GroupModel | None = None
) -> float:
    """max over pairs of |c(r+r′) − c(r)·α_r[c(r′)]| / max(1, |c(r)·α_r[c(r′)]|).

    The denominator keeps the residual scale-free for exponentially large
    values; for values of modulus ≤ 1 it is the plain absolute defect.
    """
    worst = 0.0
    for r, rp in pairs:
        if group is not None and not (group.contains(r) and group.contains(rp)
                                      and group.contains(r + rp)):
            raise DomainError(f"pair ({r}, {rp}) leaves the group grid")
        lhs = np.asarray(c(r + rp))
        rhs = np.asarray(c(r)) * np.asarray(c.action.apply(r, c(rp)))
        scale = np.maximum(1.0, np.abs(rhs))
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    return worst


def identity_residual(c: Cocycle) -> float:
    return float(np.max(np.abs(np.asarray(c(0.0)) - 1.0)))


def _check_positive(c: Cocycle, probe: Sequence[float]) -> None:
    for r in probe:
        v = np.asarray(c(r))
        if np.any(np.abs(np.imag(v)) > 0) or np.any(np.real(v) <= 0):
            raise DomainError(f"{c.name} is not positive at r={r}; complex powers are undefined")


def cocycle_ops(c1: Cocycle, which: str, c2: Cocycle | None = None, z: complex | None = None,
                probe: Sequence[float] = tuple(np.linspace(-2.0, 2.0, 9))) -> Cocycle:
    """Product, inverse, adjoint or power of cocycles (pointwise operations)."""
    if which == "product":
        if c2 is None:
            raise ConfigError("product needs a second cocycle")
        return Cocycle(lambda r: np.asarray(c1(r)) * np.asarray(c2(r)), c1.action,
                       f"{c1.name}*{c2.name}", c1.positive and c2.positive)
    if which == "inverse":
        return Cocycle(lambda r: 1.0 / np.asarray(c1(r)), c1.action, f"{c1.name}^-1", c1.positive)
    if which == "adjoint":
        return Cocycle(lambda r: np.conj(np.asarray(c1(r))), c1.action, f"{c1.name}^*", c1.positive)
    if which == "power":
        if z is None:
            raise ConfigError("power needs an exponent z")
        if not c1.positive:
            _check_positive(c1, probe)

        def pw(r: float):
            v = np.asarray(c1(r))
            if np.any(np.real(v) <= 0) or np.any(np.imag(v) != 0):
                raise DomainError(f"{c1.name} is not positive at r={r}")
            out = np.exp(z * np.log(np.real(v)))
            return out.real if np.imag(z) == 0 else out

        return Cocycle(pw, c1.action, f"{c1.name}^{z}", np.imag(z) == 0)
    raise ConfigError(f"unknown cocycle operation {which!r}")


@dataclass(frozen=True)
class CoboundaryWitness:
    b: np.ndarray | float
    residual: float

    @property
    def trivial(self) -> bool:
        return self.residual < TRIVIAL_THRESHOLD


NO_FIT = "no-fit"


def coboundary_fit(c: Cocycle, sample: Sequence[float]) -> CoboundaryWitness | str:
    """Fit log b so that log c(r) ≈ α_r(log b) − log b over the sampled r.

    Returns a witness whose residual max_r |c(r) − b^{−1}α_r(b)| decides
    triviality, or ``"no-fit"`` when the normal equations are singular for
    nonzero data (e.g. a nontrivial scalar cocycle under the trivial action).
    """
    rs = [float(r) for r in sample if r != 0.0]
    logs = []
    for r in rs:
        v = np.asarray(c(r))
        if np.any(np.real(v) <= 0) or np.any(np.imag(v) != 0):
            raise DomainError("coboundary_fit needs a positive cocycle")
        logs.append(np.log(np.real(v)).ravel())
    data = np.concatenate(logs)
    size = logs[0].size
    basis = np.eye(size)
    blocks = []
    for r in rs:
        shifted = np.column_stack([np.ravel(c.action.apply(r, basis[:, j].reshape(np.shape(c(r)))))
                                   for j in range(size)])
        blocks.append(shifted - basis)
    design = np.vstack(blocks)
    if not np.any(design):
        if np.allclose(data, 0.0, atol=0.0):
            b = np.ones(size) if np.ndim(c(rs[0])) else 1.0
            return CoboundaryWitness(b, 0.0)
        return NO_FIT
    beta, *_ = np.linalg.lstsq(design, data, rcond=None)
    b = np.exp(beta)
    if not np.ndim(c(rs[0])):
        b = float(b[0])
    residual = 0.0
    for r in rs:
        model = c.action.apply(r, b) / b
        residual = max(residual, float(np.max(np.abs(np.asarray(c(r)) - model))))
    return CoboundaryWitness(b, residual)


def coboundary(b: np.ndarray, action: DilationAction, name: str = "db") -> Cocycle:
    """The coboundary r ↦ b^{−1}·α_r(b)."""
    b = np.asarray(b, dtype=float)
    return Cocycle(lambda r: action.apply(r, b) / b, action, name, True)


def function_lattice(step: float, reach: float = 25.0) -> LogLattice:
    """Log lattice with spacing ``step`` reaching e^{±reach}."""
    return LogLattice(step, int(math.ceil(reach / step)))


# ---------------------------------------------------------------------------
# the three worked examples


def example_group(example: str) -> GroupModel:
    if example == "affine":
        return make_group(GroupKind.REAL_LINE, (-8.0, 8.0, 161))
    if example == "zr":
        return make_group(GroupKind.INTEGERS, (-20, 20))
    if example.startswith("dilation"):
        return make_group(GroupKind.DILATION, (-8.0, 8.0, 161), n=dilation_dim(example))
    raise ConfigError(f"unknown example {example!r}")


def dilation_dim(example: str) -> int:
    if ":" in example:
        try:
            return int(example.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad dilation dimension in {example!r}") from None
    return 3


def example_cocycles(example: str) -> dict[str, Cocycle]:
    """p, z and q of a worked example (scalar, trivial action on constants)."""
    n = dilation_dim(example) if example.startswith("dilation") else 1
    if example not in ("affine", "zr") and not example.startswith("dilation"):
        raise ConfigError(f"unknown example {example!r}")
    return {
        "p": scalar_cocycle(lambda r: math.exp(-r), "p", True),
        "z": scalar_cocycle(lambda r: math.exp(-0.5 * r), "z", True),
        "q": scalar_cocycle(lambda r: math.exp(-0.5 * n * r), "q", True),
    }


def perturbed(c: Cocycle, eps: float) -> Cocycle:
    """c(r) + ε·r, which breaks the law for ε ≠ 0."""
    return Cocycle(lambda r: np.asarray(c(r)) + eps * r, c.action, f"{c.name}+{eps}r", False)


def standard_pairs(group: GroupModel, count: int = 50, seed: int = 0,
                   min_abs: float = 0.0) -> list[tuple[float, float]]:
    """Random pairs (r, r′) whose sum stays in the group grid."""
    rng = np.random.default_rng(seed)
    pts = group.points
    lo, hi = pts[0] / 2.0, pts[-1] / 2.0
    pairs: list[tuple[float, float]] = []
    while len(pairs) < count:
        if group.kind is GroupKind.INTEGERS:
            r, rp = (float(v) for v in rng.integers(int(lo), int(hi) + 1, size=2))
        else:
            r, rp = (float(v) for v in rng.uniform(lo, hi, size=2))
        if abs(r) >= min_abs and abs(rp) >= min_abs:
            pairs.append((r, rp))
    return pairs
