"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a :class:`Table`: fixed columns, one row per check, and a
pass/fail verdict per row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import cocycles as cc
from .algebra import (AlgebraElement, beta_z, gaussian_element, involution, point_pairing,
                      dual_weight, seminorm, star_alpha)
from .errors import ConfigError
from .group_model import Grid1D
from .hilbert import (HilbertGrid, TripleParams, build_extended_operators, commutator_bound,
                      operator_norm, real_structure_defects, represent, smooth_subspace,
                      twisted_commutator)
from .spectral import (DilationSpec, FlatGerm, TraceReport, series_zr, spectral_dimension,
                       trace_affine, trace_dilation, trace_untwisted_H)

PASS = "PASS"
FAIL = "FAIL"


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row {row} does not match columns {self.columns}")
        self.rows.append(tuple(row))

    @property
    def failures(self) -> list[tuple]:
        k = self.columns.index("verdict")
        return [r for r in self.rows if r[k] != PASS]

    @property
    def passed(self) -> bool:
        return not self.failures


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def _tol(tols: dict[str, float], name: str, default: float) -> float:
    return float(tols.get(name, default))


# ---------------------------------------------------------------------------
# cocycles


def cocycle_suite(example: str = "affine", perturb: float = 0.01, seed: int = 0,
                  tols: dict[str, float] | None = None) -> Table:
    tols = tols or {}
    law_tol = _tol(tols, "law", 1e-10)
    t = Table(("test", "residual", "verdict"))
    group = cc.example_group(example)
    pairs = cc.standard_pairs(group, 50, seed)
    cs = cc.example_cocycles(example)
    for name, c in cs.items():
        t.add(f"identity_{name}", cc.identity_residual(c), _verdict(cc.identity_residual(c) < 1e-12))
        r = cc.cocycle_law_residual(c, pairs, group)
        t.add(f"law_{name}", r, _verdict(r < law_tol))
    p = cs["p"]
    for z in (1.0, -1.0, 0.5, -0.5):
        r = cc.cocycle_law_residual(cc.cocycle_ops(p, "power", z=z), pairs, group)
        t.add(f"law_p^{z:g}", r, _verdict(r < law_tol))
    prod = cc.cocycle_ops(p, "product", cs["q"])
    rev = cc.cocycle_ops(cs["q"], "product", p)
    comm = max(abs(prod(r) - rev(r)) / abs(prod(r)) for r, _ in pairs)
    t.add("product_commutes", comm, _verdict(comm < 1e-12))
    one = cc.cocycle_ops(p, "product", cc.cocycle_ops(p, "inverse"))
    inv = max(abs(one(r) - 1.0) for r, _ in pairs)
    t.add("inverse", inv, _verdict(inv < 1e-12))
    fit = cc.coboundary_fit(p, [r for r, _ in pairs[:8]])
    t.add("p_not_coboundary", 0.0 if fit == cc.NO_FIT else fit.residual, _verdict(fit == cc.NO_FIT))
    lat = cc.function_lattice(0.25)
    action = cc.DilationAction(lat)
    b = 1.0 + np.exp(-lat.points ** 2)
    cob = cc.coboundary(b, action)
    w = cc.coboundary_fit(cob, [0.25, 0.5, -0.75])
    res = w.residual if isinstance(w, cc.CoboundaryWitness) else math.inf
    t.add("coboundary_roundtrip", res, _verdict(res < 1e-8))
    if perturb:
        far = cc.standard_pairs(group, 50, seed, min_abs=1.0)
        r = cc.cocycle_law_residual(cc.perturbed(p, perturb), far, group)
        t.add(f"perturbed_{perturb:g}_detected", r, _verdict(r > 1e-3))
    return t


# ---------------------------------------------------------------------------
# algebra


def default_elements(a_grid: Grid1D, b_grid: Grid1D) -> tuple[AlgebraElement, AlgebraElement,
                                                              AlgebraElement]:
    """Three windowed Gaussians with distinct centres, a chirp and a complex amplitude."""
    return (gaussian_element(a_grid, b_grid, (0.1, 0.2), (0.2, 0.6), (0.45, 1.6)),
            gaussian_element(a_grid, b_grid, (-0.1, -0.3), (0.25, 0.7), (0.45, 1.6), chirp=0.3),
            gaussian_element(a_grid, b_grid, (0.05, 0.1), (0.2, 0.5), (0.45, 1.6),
                             amplitude=1 - 0.5j))


ALGEBRA_LAWS = ("associativity", "involution", "anti_multiplicative", "beta_automorphism",
                "beta_star")

EXACT_FLOOR = 1e-12


def algebra_defects(a_grid: Grid1D, b_grid: Grid1D, z: complex = 0.7 + 0.4j) -> dict[str, float]:
    """Relative ‖·‖_{0,0} defects of the *-algebra and β-laws on the given grids."""
    f, g, h = default_elements(a_grid, b_grid)
    fg = star_alpha(f, g)
    left = star_alpha(fg, h)
    right = star_alpha(f, star_alpha(g, h))
    bf = star_alpha(beta_z(f, 1.0), beta_z(g, 1.0))
    b1 = beta_z(involution(f), z)
    b2 = involution(beta_z(f, -np.conj(z)))
    return {
        "associativity": seminorm(left - right) / seminorm(left),
        "involution": seminorm(involution(involution(f)) - f) / seminorm(f),
        "anti_multiplicative": seminorm(involution(fg) - star_alpha(involution(g), involution(f)))
        / seminorm(fg),
        "beta_automorphism": seminorm(beta_z(fg, 1.0) - bf) / seminorm(fg),
        "beta_star": seminorm(b1 - b2) / seminorm(b1),
    }


def refinement_orders(values: Sequence[float]) -> list[float]:
    """log₂ of successive defect ratios; NaN when both defects sit at roundoff."""
    out = []
    for x, y in zip(values[:-1], values[1:]):
        if x < EXACT_FLOOR and y < EXACT_FLOOR:
            out.append(float("nan"))
        else:
            out.append(math.log2(x / y))
    return out


def algebra_suite(a_grid: Grid1D | None = None, b_grid: Grid1D | None = None,
                  tols: dict[str, float] | None = None, levels: int = 3) -> Table:
    """Defects at the base grid plus refinement orders over ``levels − 1`` doublings.

    A law whose defect is at roundoff (< 1e−12) on every level is exact on
    the lattice; its order is reported as NaN and counts as a pass.
    """
    tols = tols or {}
    a_grid = a_grid or Grid1D(-2.0, 2.0, 65)
    b_grid = b_grid or Grid1D(-8.0, 8.0, 65)
    t = Table(("test", "defect", "tolerance", "verdict"))
    ladder = [algebra_defects(a_grid, b_grid)]
    ag, bg = a_grid, b_grid
    for _ in range(levels - 1):
        ag, bg = ag.refined(), bg.refined()
        ladder.append(algebra_defects(ag, bg))
    tol = _tol(tols, "algebra", 5e-4)
    lo, hi = _tol(tols, "order_min", 1.7), _tol(tols, "order_max", 2.3)
    for law in ALGEBRA_LAWS:
        d = ladder[0][law]
        t.add(law, d, tol, _verdict(d < tol))
        for k, order in enumerate(refinement_orders([lv[law] for lv in ladder])):
            ok = math.isnan(order) or lo <= order <= hi
            t.add(f"{law}_order_{k + 1}", order, f"[{lo:g},{hi:g}]", _verdict(ok))
    f, g, _ = default_elements(a_grid, b_grid)
    sub = seminorm(star_alpha(f, g)) / (seminorm(f) * seminorm(g))
    t.add("submultiplicative", sub, 1.005, _verdict(sub <= 1.005))
    rel = pairing_consistency(a_grid, Grid1D(b_grid.lo, b_grid.hi, PAIRING_B_COUNT))
    t.add(f"pairing_consistency_b{PAIRING_B_COUNT}", rel, 5e-4, _verdict(rel < 5e-4))
    return t


PAIRING_B_COUNT = 513


def pairing_consistency(a_grid: Grid1D, b_grid: Grid1D) -> float:
    """|(f*⋆f)(0)(0) − φ̂(f*⋆f)| / |φ̂(f*⋆f)| for a windowed Gaussian bump.

    The point value goes through two b-interpolations, so it needs a finer
    b-grid than the other laws to reach 5e−4.
    """
    f = gaussian_element(a_grid, b_grid, (0.0, 0.0), (0.5, 1.0), (1.2, 3.0))
    pp = point_pairing(involution(f), f)
    dw = dual_weight(f, f)
    return abs(pp - dw) / abs(dw)


# ---------------------------------------------------------------------------
# operators


def operator_grid(spec: Grid1D | None = None, a_grid: Grid1D | None = None) -> HilbertGrid:
    """Default lattice for ℋ: a ∈ [−0.8, 0.8] (9 nodes), b ∈ [−7, 7] (65 nodes)."""
    return HilbertGrid(a_grid or Grid1D(-0.8, 0.8, 9), spec or Grid1D(-7.0, 7.0, 65))


def operator_elements(grid: HilbertGrid) -> tuple[AlgebraElement, AlgebraElement]:
    ag, bg = grid.a_grid, grid.b_grid
    f = gaussian_element(ag, bg, (0.0, 0.1), (0.15, 0.5), (0.3, 1.0), chirp=0.4)
    g = gaussian_element(ag, bg, (0.0, -0.1), (0.15, 0.4), (0.3, 1.0), amplitude=0.8 + 0.3j)
    return f, g


def reality_subspace(grid: HilbertGrid) -> np.ndarray:
    return smooth_subspace(grid, 0.35, 3.0, deg_a=2, deg_b=2, spin=2)


def commutator_suite(p: TripleParams, grid: HilbertGrid | None = None,
                     tols: dict[str, float] | None = None) -> Table:
    tols = tols or {}
    grid = grid or operator_grid()
    t = Table(("quantity", "value", "bound", "verdict"))
    ops = build_extended_operators(grid, p)
    f, g = operator_elements(grid)
    pf = represent(f, grid)
    pbf = represent(beta_z(f, 1.0), grid)

    th = ops.Theta_hat @ pf - pbf @ ops.Theta_hat
    scale = operator_norm(ops.Theta_hat @ pf).value
    v = operator_norm(th).value / scale
    t.add("theta_twisted_commutator", v, 1e-10, _verdict(v < 1e-10))

    ct = twisted_commutator(ops.T, f, grid)
    rhs = (pf - pbf).scaled(p.eta)
    ref = max(operator_norm(ct).value, operator_norm(pf).value)
    v = operator_norm(ct - rhs).value / ref
    t.add("T_twisted_commutator_identity", v, 1e-10, _verdict(v < 1e-10))

    m, mu = commutator_bound(f)
    v = operator_norm(twisted_commutator(ops.D_hat, f, grid)).value
    t.add("D_twisted_commutator_norm", v, m * mu, _verdict(v <= m * mu))

    dt = ops.Dirac @ ops.Theta - ops.Theta @ ops.Dirac
    v = float(np.max(np.abs(dt.matrix)))
    t.add("Dirac_Theta_commutator", v, 0.0, _verdict(v == 0.0))

    for name, op in (("Dirac_hermiticity", ops.Dirac), ("Theta_hermiticity", ops.Theta),
                     ("D_hat_hermiticity", ops.D_hat), ("T_hermiticity", ops.T)):
        v = op.hermiticity_residual()
        t.add(name, v, 1e-10, _verdict(v < 1e-10))
    diag = np.diag(ops.Theta.matrix)
    off = float(np.max(np.abs(ops.Theta.matrix - np.diag(diag))))
    ok = off == 0.0 and bool(np.all(diag.real > 0)) and bool(np.all(diag.imag == 0))
    t.add("Theta_positive_diagonal", off, 0.0, _verdict(ok))

    if math.isclose(p.eta, -p.omega, rel_tol=0.0, abs_tol=1e-12):
        tol = _tol(tols, "reality", 0.05)
        d = real_structure_defects(grid, p, f, g, reality_subspace(grid))
        t.add("J_squared", d.j_squared, tol, _verdict(d.j_squared < tol))
        t.add("J_Dirac", d.j_dirac, tol, _verdict(d.j_dirac < tol))
        t.add("opposite_commutator", d.opposite_commutator, tol,
              _verdict(d.opposite_commutator < tol))
    return t


# ---------------------------------------------------------------------------
# traces and dimensions


def parse_example(example: str) -> tuple[str, int]:
    if example in ("affine", "zr", "untwisted"):
        return example, 1
    if example.startswith("dilation"):
        return "dilation", cc.dilation_dim(example)
    raise ConfigError(f"unknown example {example!r}")


def trace_for(example: str, eta: float, omega: float, method: str = "closed-form",
              c: float = 0.0) -> Callable[[float], TraceReport]:
    """s ↦ TraceReport for a worked example, with unit pairing factor."""
    kind, n = parse_example(example)
    if kind == "affine":
        return lambda s: trace_affine(TripleParams(eta, omega, s, c), method)
    if kind == "zr":
        return lambda s: series_zr(TripleParams(eta, omega, s, c))
    if kind == "dilation":
        return lambda s: trace_dilation(DilationSpec(n, eta, omega, s), method)
    germ = FlatGerm()
    return lambda s: trace_untwisted_H(germ, s)


def trace_suite(example: str, eta: float, omega: float, s_list: Sequence[float],
                method: str = "both", tols: dict[str, float] | None = None) -> Table:
    tols = tols or {}
    kind, _ = parse_example(example)
    if kind == "untwisted":
        raise ConfigError("trace is available for affine, zr and dilation:N")
    t = Table(("example", "eta", "omega", "s", "method", "value", "tail", "classification",
               "verdict"))
    methods = ["closed-form", "quadrature"] if method == "both" else [method]
    if kind == "zr":
        methods = ["series"]
    agree = _tol(tols, "agreement", 1e-6)
    for s in s_list:
        reps = []
        for m in methods:
            rep = trace_for(example, eta, omega, "closed-form" if m == "series" else m)(s)
            reps.append(rep)
            ok = rep.classification != "inconclusive"
            if len(methods) == 2 and len(reps) == 2 and all(r.convergent for r in reps):
                ok = ok and abs(reps[0].value - reps[1].value) <= agree * abs(reps[0].value)
            t.add(example, eta, omega, s, rep.method, rep.value, rep.tail_estimate,
                  rep.classification, _verdict(ok))
    return t


DIMENSION_RANGES = {"affine": (1.0, 3.0), "zr": (1.0, 3.0), "untwisted": (0.5, 2.0)}


def expected_dimension(example: str) -> float:
    kind, n = parse_example(example)
    return {"affine": 2.0, "zr": 2.0, "untwisted": 1.0}.get(kind, n + 1.0)


def dimension_suite(example: str, eta: float = 1.0, omega: float = -1.0,
                    tols: dict[str, float] | None = None) -> Table:
    tols = tols or {}
    kind, n = parse_example(example)
    rng = DIMENSION_RANGES.get(kind, (n, n + 2.0))
    est = spectral_dimension(trace_for(example, eta, omega, "quadrature"), rng)
    tol = _tol(tols, "dimension", 0.02)
    ok = est.accepted and abs(est.p - expected_dimension(example)) <= tol
    t = Table(("example", "p_estimate", "uncertainty", "verdict"))
    t.add(example, est.p, est.uncertainty, _verdict(ok))
    return t


__all__ = [
    "PASS", "FAIL", "Table", "cocycle_suite", "algebra_suite", "algebra_defects",
    "refinement_orders", "commutator_suite", "trace_suite", "dimension_suite", "trace_for",
    "default_elements", "operator_grid", "operator_elements", "reality_subspace",
    "expected_dimension",
]
