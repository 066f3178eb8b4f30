"""Trace integrals, convergence classifiers and spectral-dimension estimates.

The central integrand is

    g_{s,c}(a, b) = e^{−(1+c)a} [1 + e^{−2a} b² + (η + ω e^{−a})²]^{−s/2}.

Every routine returns a :class:`TraceReport`. Closed forms use :mod:`specfun`;
quadrature paths never touch ₂F₁, so the two can serve as mutual oracles.
Integrals over ℝ are evaluated from their log-integrands (see
:func:`quadrature.log_line_integral`), which keeps e^{±a} factors finite
and makes convergence a statement about asymptotic log-slopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import quadrature as quad
from .algebra import AlgebraElement, involution, point_pairing, interp_b
from .errors import ConfigError, DomainError
from .hilbert import TripleParams
from .specfun import gamma_fn, hyp2f1, log_gamma

CLOSED = "closed-form"
QUADRATURE = "quadrature"
SERIES = "series"

CONVERGENT = quad.CONVERGENT
DIVERGENT = quad.DIVERGENT
INCONCLUSIVE = quad.INCONCLUSIVE

_METHOD_ALIASES = {"closed": CLOSED, CLOSED: CLOSED, QUADRATURE: QUADRATURE, "quad": QUADRATURE}


@dataclass(frozen=True)
class TraceReport:
    """A trace or integral value with provenance.

    ``tail_estimate`` is the relative change when the truncation box grows
    by 50% (0 for closed forms). For divergent classifications ``value`` is
    the last partial value, not a limit.
    """

    value: complex | float
    method: str
    tail_estimate: float
    classification: str
    error: float = 0.0

    @property
    def convergent(self) -> bool:
        return self.classification == CONVERGENT

    def scaled(self, factor: complex | float) -> "TraceReport":
        v = self.value * factor
        if isinstance(v, complex) and v.imag == 0.0:
            v = v.real
        return TraceReport(v, self.method, self.tail_estimate, self.classification,
                           self.error * abs(factor))


def _method(name: str) -> str:
    try:
        return _METHOD_ALIASES[name]
    except KeyError:
        raise ConfigError(f"unknown method {name!r}; use closed-form or quadrature") from None


def _merge(*classes: str) -> str:
    if DIVERGENT in classes:
        return DIVERGENT
    if INCONCLUSIVE in classes:
        return INCONCLUSIVE
    return CONVERGENT


def _real_if_possible(v: complex) -> complex | float:
    v = complex(v)
    return v.real if v.imag == 0.0 else v


# ---------------------------------------------------------------------------
# the building block log(1 + (η + ω e^{x})²)


def log1p_t2(eta: float, omega: float, x: np.ndarray) -> np.ndarray:
    """log(1 + (η + ω e^{x})²), overflow-free for large x."""
    x = np.asarray(x, dtype=float)
    lt = math.log(abs(omega)) + x
    big = lt > 30.0
    t = eta + omega * np.exp(np.where(big, 0.0, x))
    small_val = np.log1p(t * t)
    ratio = eta / omega * np.exp(-np.where(big, x, 0.0))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_t = np.where(big, lt, 0.0) + np.log(np.abs(1.0 + ratio))
        big_val = 2.0 * log_t + np.log1p(np.exp(-2.0 * log_t))
    return np.where(big, big_val, small_val)


def bessel_ratio(s: float) -> float:
    """√π·Γ((s−1)/2)/Γ(s/2) = ∫_ℝ (1+b²)^{−s/2} db, for s > 1."""
    return math.sqrt(math.pi) * math.exp(log_gamma(0.5 * (s - 1.0)) - log_gamma(0.5 * s))


def radial_volume(n: int, s: float) -> quad.LineIntegral:
    """∫_{ℝⁿ} (1+|ξ|²)^{−s/2} dξ by quadrature in x = log|ξ|.

    Convergent iff s > n. The sphere area 2π^{n/2}/Γ(n/2) is the only
    closed-form ingredient.
    """
    if n < 1:
        raise ConfigError("dimension must be >= 1")
    log_area = math.log(2.0) + 0.5 * n * math.log(math.pi) - log_gamma(0.5 * n)

    def logf(x: np.ndarray) -> np.ndarray:
        return log_area + n * x - 0.5 * s * np.logaddexp(0.0, 2.0 * x)

    return quad.log_line_integral(logf)


# ---------------------------------------------------------------------------
# g_{s,c}


@dataclass(frozen=True)
class GscSpec:
    s: float
    c: float
    eta: float
    omega: float

    def __post_init__(self) -> None:
        if self.omega == 0.0:
            raise ConfigError("omega must be nonzero")
        if not all(math.isfinite(v) for v in (self.s, self.c, self.eta, self.omega)):
            raise ConfigError("GscSpec fields must be finite")

    def log_g(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        with np.errstate(divide="ignore"):
            lb = -2.0 * a + 2.0 * np.log(np.abs(b))
        return -(1.0 + self.c) * a - 0.5 * self.s * np.logaddexp(
            log1p_t2(self.eta, self.omega, -a), lb)

    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.exp(self.log_g(a, b))

    def log_b_closed(self, a: np.ndarray) -> np.ndarray:
        """log ∫db g_{s,c}(a, b) = −ca + ((1−s)/2)·log(1+T²) + log(√πΓ((s−1)/2)/Γ(s/2))."""
        a = np.asarray(a, dtype=float)
        return (-self.c * a + 0.5 * (1.0 - self.s) * log1p_t2(self.eta, self.omega, -a)
                + math.log(bessel_ratio(self.s)))


@dataclass(frozen=True)
class BIntegral:
    """∫db g_{s,c}(a, b) by quadrature, with the closed form alongside."""

    quadrature: TraceReport
    closed: TraceReport


def gsc_b_integral(spec: GscSpec, a: float) -> BIntegral:
    """The b-integral of g_{s,c} at fixed a.

    Quadrature runs in x = log|b| (both half-lines, each even by symmetry):
    the log-integrand has slopes 1 and 1 − s, so divergence for s ≤ 1 is
    read off exactly.
    """
    a = float(a)
    pos = gsc_b_half(spec, a, +1)
    neg = gsc_b_half(spec, a, -1)
    qrep = TraceReport(pos.value + neg.value, QUADRATURE, max(pos.tail, neg.tail),
                       _merge(pos.classification, neg.classification), pos.error + neg.error)
    if spec.s > 1.0:
        crep = TraceReport(float(np.exp(spec.log_b_closed(a))), CLOSED, 0.0, CONVERGENT)
    else:
        crep = TraceReport(qrep.value, QUADRATURE, qrep.tail_estimate, DIVERGENT)
    return BIntegral(qrep, crep)


def gsc_b_half(spec: GscSpec, a: float, sign: int = 1) -> quad.LineIntegral:
    """∫ over b ≷ 0 of g_{s,c}(a, b), as a log-line integral in x = log|b|."""
    def logf(x: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return x + spec.log_g(a, sign * np.exp(x))

    return quad.log_line_integral(logf)


def _partial_box_2d(spec: GscSpec, half_width: float = 10.0, panels: int = 16) -> float:
    # tensor Gauss–Legendre partial over [−L, L]², only used when s ≤ 1
    x, w = np.polynomial.legendre.leggauss(32)
    edges = np.linspace(-half_width, half_width, panels + 1)
    nodes = np.concatenate([0.5 * (hi - lo) * x + 0.5 * (hi + lo) for lo, hi in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([0.5 * (hi - lo) * w for lo, hi in zip(edges[:-1], edges[1:])])
    A, B = np.meshgrid(nodes, nodes, indexing="ij")
    return float(weights @ spec(A, B) @ weights)


def gsc_full_integral(spec: GscSpec) -> TraceReport:
    """∫∫ g_{s,c} da db, convergent iff c > 0 and s > 1 + c.

    The b-integral is taken in closed form and the a-integral by a
    tail-aware quadrature of its logarithm (slopes s − 1 − c and −c).
    """
    if spec.s <= 1.0:
        return TraceReport(_partial_box_2d(spec), QUADRATURE, float("inf"), DIVERGENT)
    res = quad.log_line_integral(spec.log_b_closed)
    return TraceReport(res.value, QUADRATURE, res.tail, res.classification, res.error)


def gsc_u_integral(spec: GscSpec) -> quad.QuadResult:
    """The same double integral along u = e^{−a}:

    √πΓ((s−1)/2)/Γ(s/2) · ∫₀^∞ u^{c−1} [1 + (η+ωu)²]^{(1−s)/2} du,

    with the u-integral mapped to [0,1] halves (see quadrature.semi_infinite).
    Only meaningful in the convergent region.
    """
    if not (spec.c > 0.0 and spec.s > 1.0 + spec.c):
        raise DomainError("u-integral requested outside the convergence region")
    k = bessel_ratio(spec.s)

    def f(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lu = np.log(u)
            val = np.exp((spec.c - 1.0) * lu + 0.5 * (1.0 - spec.s)
                         * log1p_t2(spec.eta, spec.omega, lu))
        return np.where(u > 0, val, 0.0)

    pivot = max(1.0, abs(spec.eta / spec.omega))
    r = quad.semi_infinite(f, 0.0, scale=pivot, atol=1e-14, rtol=1e-12)
    return quad.QuadResult(k * r.value, k * r.error, r.panels, r.converged)


def domination_constants(spec: GscSpec, a_box: float, b_box: float,
                         count: int = 200) -> tuple[float, float, float]:
    """max |∂_a g|/g, |∂_b g|/g, |∂_a∂_b g|/g on a count×count lattice of [−a_box,a_box]×[−b_box,b_box].

    Central differences of log g with step 1e−4 (relative errors of order 1e−8).
    """
    a = np.linspace(-a_box, a_box, count)
    b = np.linspace(-b_box, b_box, count)
    A, B = np.meshgrid(a, b, indexing="ij")
    d = 1e-4
    L = spec.log_g
    la = (L(A + d, B) - L(A - d, B)) / (2 * d)
    lb = (L(A, B + d) - L(A, B - d)) / (2 * d)
    lab = (L(A + d, B + d) - L(A + d, B - d) - L(A - d, B + d) + L(A - d, B - d)) / (4 * d * d)
    return float(np.max(np.abs(la))), float(np.max(np.abs(lb))), float(np.max(np.abs(lab + la * lb)))


# ---------------------------------------------------------------------------
# compactness criterion and affine traces


def compactness_criterion(p: TripleParams, group=None) -> TraceReport:
    """Convergence of ∫₀^∞ u^{2c−1}[1+(η+ωu)²]^{−s} du (c ≥ 0, s ≥ 1).

    ``group`` is accepted for interface symmetry; the reduction to this
    u-integral is specific to the affine model.
    """
    if p.s < 1.0:
        raise DomainError("the compactness criterion is stated for s >= 1")

    def logf(x: np.ndarray) -> np.ndarray:
        return 2.0 * p.c * x - p.s * log1p_t2(p.eta, p.omega, x)

    res = quad.log_line_integral(logf)
    return TraceReport(res.value, QUADRATURE, res.tail, res.classification, res.error)


def affine_closed_form(p: TripleParams, phi: complex = 1.0) -> complex | float:
    """2φ·[π/(|ω|(s−2)) − (η/ω)·√πΓ((s−1)/2)/Γ(s/2)·₂F₁(½,(s−1)/2;3/2;−η²)], s > 2."""
    s, eta, omega = p.s, p.eta, p.omega
    if s <= 2.0:
        raise DomainError("closed form requires s > 2")
    first = math.pi / (abs(omega) * (s - 2.0))
    second = (eta / omega) * bessel_ratio(s) * hyp2f1(0.5, 0.5 * (s - 1.0), 1.5, -eta * eta)
    return _real_if_possible(2.0 * phi * (first - second))


def _affine_a_part(p: TripleParams) -> quad.LineIntegral:
    # ∫ da e^{−a}[1 + T(a)²]^{(1−s)/2}
    return quad.log_line_integral(
        lambda a: -a + 0.5 * (1.0 - p.s) * log1p_t2(p.eta, p.omega, -a))


def _pairing(f: AlgebraElement | None, g: AlgebraElement | None, phi) -> complex:
    if f is not None or g is not None:
        if f is None or g is None:
            raise ConfigError("both f and g are needed for the pairing")
        return point_pairing(g, f)
    return 1.0 if phi is None else phi


def trace_affine(p: TripleParams, method: str = CLOSED, *, f: AlgebraElement | None = None,
                 g: AlgebraElement | None = None, phi: complex | None = None) -> TraceReport:
    """Modular trace of π(f)Θ(1+𝒟²)^{−s/2}π(g) in the affine example.

    The prefactor φ̂(g⋆f) = (g⋆f)(0)(0) is computed from ``f`` and ``g`` when
    given, otherwise ``phi`` (default 1) is used. The quadrature path is
    2φ·∫∫ g_{s,1}, with both one-dimensional factors evaluated numerically.
    Finite iff s > 2; otherwise the report is divergent and carries the
    quadrature partial value.
    """
    method = _method(method)
    phi = _pairing(f, g, phi)
    if method == CLOSED and p.s > 2.0:
        return TraceReport(affine_closed_form(p, phi), CLOSED, 0.0, CONVERGENT)
    jb = radial_volume(1, p.s)
    ja = _affine_a_part(p)
    val = _real_if_possible(2.0 * phi * jb.value * ja.value)
    err = 2.0 * abs(phi) * (jb.error * ja.value + ja.error * jb.value)
    return TraceReport(val, QUADRATURE, max(jb.tail, ja.tail),
                       _merge(jb.classification, ja.classification), err)


def trace_theta_power(f: AlgebraElement, p: TripleParams) -> TraceReport:
    """Tr Θ^{1+c} π(f*⋆f)(1+𝒟²)^{−s/2} = (f*⋆f)(0)(0)·∫∫ g_{s,c+1}.

    Convergent iff s > 2 + c. No ℂ² spin factor is included.
    """
    weight = point_pairing(involution(f), f)
    base = gsc_full_integral(GscSpec(p.s, p.c + 1.0, p.eta, p.omega))
    return base.scaled(_real_if_possible(weight))


# ---------------------------------------------------------------------------
# symbol norm


def h_transform(f: AlgebraElement) -> np.ndarray:
    """Samples of h(a)(b) = e^{−a} f(a)(e^{−a} b) on the grid of f."""
    a = f.a
    out = np.zeros_like(f.values)
    i0, i1 = f.support[0], f.support[1]
    for i in range(i0, i1 + 1):
        out[i] = math.exp(-a[i]) * interp_b(f.values[i][None, :], f.b_grid, math.exp(-a[i]) * f.b)[0]
    return out


def fourier_l1(values: np.ndarray, ha: float, hb: float, pad: int = 4) -> float:
    """∫∫|ℱh| dα dβ with ℱh(α,β) = (2π)^{−1}∫∫ e^{−i(αa+βb)} h da db, via a zero-padded FFT."""
    na, nb = values.shape
    ma, mb = pad * na, pad * nb
    spec = np.fft.fft2(values, s=(ma, mb)) * (ha * hb / (2.0 * math.pi))
    dalpha = 2.0 * math.pi / (ma * ha)
    dbeta = 2.0 * math.pi / (mb * hb)
    return float(np.sum(np.abs(spec)) * dalpha * dbeta)


def symbol_L1_norm(f: AlgebraElement, p: TripleParams, pad: int = 4) -> TraceReport:
    """|a_{s,c}(f)|_{1,(0,0)} = 2π·∫|ℱh| · ∫∫ e^{−a} g_{s,c}.

    Convergent iff s > 2 + c; requires c > 0.
    """
    if not p.c > 0.0:
        raise DomainError("the symbol norm is defined for c > 0")
    if f.empty:
        return TraceReport(0.0, QUADRATURE, 0.0, CONVERGENT)
    fl1 = fourier_l1(h_transform(f), f.a_grid.h, f.b_grid.h, pad)
    base = gsc_full_integral(GscSpec(p.s, p.c + 1.0, p.eta, p.omega))
    return base.scaled(2.0 * math.pi * fl1)


# ---------------------------------------------------------------------------
# ℤ⋉ℝ and dilations


def series_zr(p: TripleParams, phi: complex = 1.0, tol: float = 1e-10) -> TraceReport:
    """φ·Σ_{n∈ℤ} e^{−n}[1 + (η+ωe^{−n})²]^{(1−s)/2}, convergent iff s > 2."""

    def logterm(n: np.ndarray) -> np.ndarray:
        return -n + 0.5 * (1.0 - p.s) * log1p_t2(p.eta, p.omega, -n)

    res = quad.log_series(logterm, tol=tol)
    return TraceReport(_real_if_possible(phi * res.value), SERIES, res.tail, res.classification)


@dataclass(frozen=True)
class DilationSpec:
    n: int
    eta: float
    omega: float
    s: float
    fhat0: complex = 1.0

    def __post_init__(self) -> None:
        if self.omega == 0.0:
            raise ConfigError("omega must be nonzero")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("dilation dimension must be a positive integer")


def dilation_closed_form(spec: DilationSpec) -> complex | float:
    """2f̂(0)π^{n/2}/Γ(s/2)·[√πΓ((s−n+1)/2)/(|ω|(s−n−1)) − (η/ω)Γ((s−n)/2)₂F₁(½,(s−n)/2;3/2;−η²)].

    The sign of the second term follows ω (not |ω|); the two agree for ω > 0.
    """
    n, s, eta, omega = spec.n, spec.s, spec.eta, spec.omega
    if s <= n + 1:
        raise DomainError("closed form requires s > n + 1")
    pref = 2.0 * spec.fhat0 * math.pi ** (0.5 * n) / gamma_fn(0.5 * s)
    first = math.sqrt(math.pi) * gamma_fn(0.5 * (s - n + 1)) / (abs(omega) * (s - n - 1))
    second = (eta / omega) * gamma_fn(0.5 * (s - n)) * hyp2f1(0.5, 0.5 * (s - n), 1.5, -eta * eta)
    return _real_if_possible(pref * (first - second))


def trace_dilation(spec: DilationSpec, method: str = CLOSED) -> TraceReport:
    """Trace for dilations of ℝⁿ; finite iff s > n + 1.

    Quadrature: 2f̂(0)·∫_{ℝⁿ}(1+|ξ|²)^{−s/2}dξ·∫ da e^{−a}[1+T²]^{(n−s)/2},
    both factors numerical.
    """
    method = _method(method)
    if method == CLOSED and spec.s > spec.n + 1:
        return TraceReport(dilation_closed_form(spec), CLOSED, 0.0, CONVERGENT)
    vol = radial_volume(spec.n, spec.s)
    ja = quad.log_line_integral(
        lambda a: -a + 0.5 * (spec.n - spec.s) * log1p_t2(spec.eta, spec.omega, -a))
    val = _real_if_possible(2.0 * spec.fhat0 * vol.value * ja.value)
    err = 2.0 * abs(spec.fhat0) * (vol.error * ja.value + ja.error * vol.value)
    return TraceReport(val, QUADRATURE, max(vol.tail, ja.tail),
                       _merge(vol.classification, ja.classification), err)


# ---------------------------------------------------------------------------
# the untwisted representation on H


def smooth_plateau(x: np.ndarray, flat: float, ramp: float) -> np.ndarray:
    """1 on |x| ≤ flat, 0 on |x| ≥ flat + ramp, quintic smoothstep (C²) in between."""
    u = np.clip((np.abs(np.asarray(x, dtype=float)) - flat) / ramp, 0.0, 1.0)
    return 1.0 - u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)


@dataclass(frozen=True)
class FlatGerm:
    """f(a)(y) = amplitude·P(a; eps, a_ramp)·P(y; b_flat, b_ramp).

    Locally constant in a on [−eps, eps], compactly supported in both
    variables, with f(0)(0) = amplitude.
    """

    eps: float = 0.25
    a_ramp: float = 0.5
    b_flat: float = 1.0
    b_ramp: float = 1.0
    amplitude: float = 1.0

    def __call__(self, a: np.ndarray, y: np.ndarray) -> np.ndarray:
        return (self.amplitude * smooth_plateau(a, self.eps, self.a_ramp)
                * smooth_plateau(y, self.b_flat, self.b_ramp))

    @property
    def a_max(self) -> float:
        return self.eps + self.a_ramp

    @property
    def y_max(self) -> float:
        return self.b_flat + self.b_ramp

    def at_origin(self) -> float:
        return self.amplitude

    def a_breaks(self) -> tuple[float, ...]:
        return (-self.eps, self.eps)

    def element(self, a_grid, b_grid) -> AlgebraElement:
        from .algebra import from_function
        return from_function(self, a_grid, b_grid,
                             (-self.a_max, self.a_max, -self.y_max, self.y_max))


class _SampledGerm:
    """Bilinear interpolant of an AlgebraElement, with the FlatGerm interface."""

    def __init__(self, f: AlgebraElement, eps: float):
        self.f = f
        a0, a1, b0, b1 = f.support_coords()
        self.a_max = max(abs(a0), abs(a1))
        self.y_max = max(abs(b0), abs(b1))
        self.eps = eps

    def __call__(self, a: np.ndarray, y: np.ndarray) -> np.ndarray:
        ag = self.f.a_grid
        a = np.asarray(a, dtype=float)
        t = np.clip((a - ag.lo) / ag.h, 0.0, ag.count - 1)
        i = np.minimum(np.floor(t).astype(int), ag.count - 2)
        fr = t - i
        lo = interp_b(self.f.values, self.f.b_grid, y)  # (na, *y.shape)
        # pick rows i and i+1 per entry of a (a and y broadcast together)
        a_b, y_b = np.broadcast_arrays(a, y)
        i_b = np.broadcast_to(i, a_b.shape)
        fr_b = np.broadcast_to(fr, a_b.shape)
        idx = np.indices(a_b.shape)
        v0 = lo[(i_b,) + tuple(idx)]
        v1 = lo[(i_b + 1,) + tuple(idx)]
        return (1.0 - fr_b) * v0 + fr_b * v1

    def at_origin(self) -> complex:
        return complex(self(np.array(0.0), np.array(0.0)))

    def a_breaks(self) -> tuple[float, ...]:
        return (-self.eps, self.eps)


_U_NODES, _U_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _inner_y(germ, a: np.ndarray, s: float, panels: int = 24) -> np.ndarray:
    """∫ db f(a)(b·t)(1+b²)^{−s/2} with t = 1 − e^{−a}, for an array of a ≠ 0.

    With y = |t| sinh(u) on each half-line the kernel becomes cosh(u)^{1−s}
    and the range is u ∈ [0, asinh(y_max/|t|)].
    """
    a = np.asarray(a, dtype=float)
    t = np.abs(-np.expm1(-a))[:, None]
    top = np.arcsinh(germ.y_max / t)
    edges = np.linspace(0.0, 1.0, panels + 1)
    tau = np.concatenate([0.5 * (hi - lo) * _U_NODES + 0.5 * (hi + lo)
                          for lo, hi in zip(edges[:-1], edges[1:])])
    wt = np.concatenate([0.5 * (hi - lo) * _U_WEIGHTS for lo, hi in zip(edges[:-1], edges[1:])])
    u = top * tau[None, :]
    kern = np.exp((1.0 - s) * (u + np.log1p(np.exp(-2.0 * u)) - math.log(2.0)))
    y = t * np.sinh(u)
    aa = np.broadcast_to(a[:, None], u.shape)
    vals = (germ(aa, y) + germ(aa, -y)) * kern
    return (vals @ wt) * top[:, 0]


def _outer(germ, s: float, lo: float, hi: float, rtol: float) -> quad.QuadResult:
    def f(a: np.ndarray) -> np.ndarray:
        return np.exp(-0.5 * a) * _inner_y(germ, a, s)

    return quad.gauss_legendre(f, lo, hi, atol=1e-13, rtol=rtol, max_panels=400)


def untwisted_near_quadrature(germ, s: float, eps: float, rtol: float = 1e-9) -> quad.QuadResult:
    """∫_{−ε}^{ε} da e^{−a/2} ∫ db f(a)(b(1−e^{−a}))(1+b²)^{−s/2}, numerically."""
    left = _outer(germ, s, -eps, 0.0, rtol)
    right = _outer(germ, s, 0.0, eps, rtol)
    return quad.QuadResult(left.value + right.value, left.error + right.error,
                           left.panels + right.panels, left.converged and right.converged)


def untwisted_window_model(f0: complex, s: float, eps: float) -> TraceReport:
    """4 sinh(ε/2)·f(0)(0)·∫(1+b²)^{−s/2} db, the b-integral done numerically."""
    jb = radial_volume(1, s)
    return TraceReport(_real_if_possible(4.0 * math.sinh(0.5 * eps) * f0 * jb.value), QUADRATURE,
                       jb.tail, jb.classification, 4.0 * math.sinh(0.5 * eps) * abs(f0) * jb.error)


def trace_untwisted_H(f: FlatGerm | AlgebraElement, s: float, eps: float | None = None,
                      near: str = "model") -> TraceReport:
    """Tr (ρ⋊U)(f)(1+D²)^{−s/2} = ∫∫ e^{−a/2} f(a)(b(1−e^{−a}))(1+b²)^{−s/2} da db.

    The region |a| > ε is integrated numerically and is finite for every s.
    On |a| ≤ ε, where f is locally constant in a, ``near="model"`` uses the
    window value 4 sinh(ε/2) f(0)(0) ∫(1+b²)^{−s/2}db (finite iff s > 1) and
    ``near="quadrature"`` integrates the exact integrand instead.
    """
    if isinstance(f, AlgebraElement):
        if eps is None:
            raise ConfigError("eps is required for sampled elements")
        germ = _SampledGerm(f, eps)
        if f.empty:
            return TraceReport(0.0, QUADRATURE, 0.0, CONVERGENT)
    else:
        germ = f
        eps = f.eps if eps is None else eps
    if not 0.0 < eps < germ.a_max:
        raise ConfigError("eps must lie inside the a-support")
    far_r = _outer(germ, s, eps, germ.a_max, 1e-9)
    far_l = _outer(germ, s, -germ.a_max, -eps, 1e-9)
    far = far_l.value + far_r.value
    if near == "model":
        nr = untwisted_window_model(germ.at_origin(), s, eps)
        return TraceReport(_real_if_possible(nr.value + far), QUADRATURE, nr.tail_estimate,
                           nr.classification, nr.error + far_l.error + far_r.error)
    if near == "quadrature":
        nq = untwisted_near_quadrature(germ, s, eps)
        cls = CONVERGENT if s > 1.0 else DIVERGENT
        return TraceReport(_real_if_possible(nq.value + far), QUADRATURE, 0.0, cls,
                           nq.error + far_l.error + far_r.error)
    raise ConfigError(f"unknown near-part mode {near!r}")


# ---------------------------------------------------------------------------
# spectral dimension


@dataclass(frozen=True)
class DimensionEstimate:
    p: float
    uncertainty: float
    verdict: str
    onset: float
    samples: tuple[tuple[float, float], ...] = field(default=())

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"


def pole_from_pair(s1: float, t1: float, s2: float, t2: float) -> float:
    """Pole p of T(s) = C/(s − p) through two samples."""
    return (t1 * s1 - t2 * s2) / (t1 - t2)


def spectral_dimension(trace_fn: Callable[[float], TraceReport], p_range: tuple[float, float],
                       offsets: Sequence[float] = (0.01, 0.02, 0.04), tol: float = 0.02,
                       resolution: float = 1e-4) -> DimensionEstimate:
    """Locate the abscissa of convergence and fit a simple pole above it.

    The onset is bracketed by bisection on the convergence classification
    over ``p_range`` (lower end divergent, upper end convergent). The trace
    is then sampled at onset + offsets and the pole is solved from the pairs
    (s₁,s₂) and (s₂,s₃); the estimate is accepted when they agree within ``tol``.
    """
    lo, hi = float(p_range[0]), float(p_range[1])
    if not lo < hi:
        raise ConfigError("p_range must be increasing")
    if trace_fn(lo).classification != DIVERGENT or trace_fn(hi).classification != CONVERGENT:
        return DimensionEstimate(float("nan"), float("inf"), "inconclusive", float("nan"))
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if trace_fn(mid).classification == CONVERGENT:
            hi = mid
        else:
            lo = mid
    onset = hi
    samples = []
    for off in offsets:
        rep = trace_fn(onset + off)
        if rep.classification != CONVERGENT:
            return DimensionEstimate(float("nan"), float("inf"), "inconclusive", onset)
        samples.append((onset + off, float(np.real(rep.value))))
    (s1, t1), (s2, t2), (s3, t3) = samples[:3]
    p12 = pole_from_pair(s1, t1, s2, t2)
    p23 = pole_from_pair(s2, t2, s3, t3)
    spread = abs(p12 - p23)
    verdict = "accepted" if spread <= tol else "inconclusive"
    return DimensionEstimate(p12, spread, verdict, onset, tuple(samples))


def richardson_residue(trace_fn: Callable[[float], TraceReport], pole: float,
                       h0: float = 0.1, levels: int = 3) -> float:
    """Extrapolate (s − p)·T(s) to s → p from nodes h0, h0/2, h0/4, … (linear error model)."""
    hs = [h0 / 2 ** k for k in range(levels)]
    col = [h * complex(trace_fn(pole + h).value) for h in hs]
    order = 1
    while len(col) > 1:
        fac = 2 ** order
        col = [(fac * col[i + 1] - col[i]) / (fac - 1) for i in range(len(col) - 1)]
        order += 1
    return _real_if_possible(col[0])
