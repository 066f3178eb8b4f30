"""Gamma and the Gauss hypergeometric function on the non-positive real axis."""

from __future__ import annotations

import math

from .errors import DomainError, PrecisionError

SERIES_TERM_CAP = 100_000
_SERIES_RTOL = 1e-15


def gamma_fn(x: float) -> float:
    """Γ(x) for x > 0.

    Delegates to :func:`math.gamma` (CPython evaluates it with a Lanczos
    approximation accurate to a few ulps), after enforcing the domain.
    """
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"gamma_fn requires a finite x > 0, got {x!r}")
    return math.gamma(x)


def log_gamma(x: float) -> float:
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"log_gamma requires a finite x > 0, got {x!r}")
    return math.lgamma(x)


def _series(a: float, b: float, c: float, z: float) -> float:
    # plain Gauss series, |z| < 1
    total = 1.0
    term = 1.0
    for k in range(SERIES_TERM_CAP):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
        if abs(term) < _SERIES_RTOL * abs(total):
            return total
        if term == 0.0:
            return total
    raise PrecisionError(
        f"2F1({a}, {b}; {c}; {z}) series did not converge in {SERIES_TERM_CAP} terms"
    )


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """₂F₁(a, b; c; z) for real parameters and real z ≤ 0.

    On (−1, 0] the Gauss series is summed directly. For z ≤ −1 the Pfaff
    transformation ₂F₁(a,b;c;z) = (1−z)^{−a} ₂F₁(a, c−b; c; z/(z−1)) moves
    the argument into [1/2, 1), where the series converges.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if not all(math.isfinite(v) for v in (a, b, c, z)):
        raise DomainError("hyp2f1 parameters must be finite")
    if z > 0.0:
        raise DomainError(f"hyp2f1 is only supported for z <= 0, got z={z}")
    if c <= 0.0 and c == math.floor(c):
        raise DomainError(f"hyp2f1: c={c} is a non-positive integer")
    if z == 0.0:
        return 1.0
    if z > -1.0:
        return _series(a, b, c, z)
    return pfaff_hyp2f1(a, b, c, z)


def pfaff_hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Evaluate through the Pfaff transformation regardless of where z lies (z ≤ 0)."""
    if z > 0.0:
        raise DomainError(f"pfaff_hyp2f1 needs z <= 0, got {z}")
    w = z / (z - 1.0)
    return (1.0 - z) ** (-a) * _series(a, c - b, c, w)
