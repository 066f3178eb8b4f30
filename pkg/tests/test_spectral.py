import math

import numpy as np
import pytest

from nctriple.algebra import gaussian_element, zero_element
from nctriple.errors import ConfigError, DomainError
from nctriple.group_model import Grid1D
from nctriple.hilbert import TripleParams
from nctriple.spectral import (CONVERGENT, DIVERGENT, DilationSpec, FlatGerm, GscSpec,
                               bessel_ratio, compactness_criterion, domination_constants,
                               gsc_b_half, gsc_b_integral, gsc_full_integral, gsc_u_integral,
                               pole_from_pair, richardson_residue, series_zr, spectral_dimension,
                               symbol_L1_norm, trace_affine, trace_dilation, trace_theta_power,
                               trace_untwisted_H, untwisted_near_quadrature,
                               untwisted_window_model)
from nctriple.suites import trace_for

AG = Grid1D(-1.0, 1.0, 21)
BG = Grid1D(-4.0, 4.0, 81)


def bump():
    return gaussian_element(AG, BG, (0.0, 0.0), (0.3, 0.8), (0.9, 3.0))


# g_{s,c}

def test_b_integral_example():
    r = gsc_b_integral(GscSpec(3.0, 0.5, 0.0, 1.0), 0.0)
    expect = math.sqrt(math.pi) / (math.gamma(1.5) * 2.0)
    assert r.closed.value == pytest.approx(expect, rel=1e-14)
    assert r.quadrature.value == pytest.approx(expect, rel=1e-8)
    assert r.quadrature.convergent


def test_b_integral_diverges_at_s_one():
    r = gsc_b_integral(GscSpec(1.0, 0.5, 0.0, 1.0), 0.3)
    assert r.quadrature.classification == DIVERGENT
    assert r.closed.classification == DIVERGENT


@pytest.mark.parametrize("a", [-1.5, 0.0, 0.7, 2.0])
def test_b_integrand_is_even(a):
    spec = GscSpec(3.5, 0.2, 1.0, -1.0)
    pos = gsc_b_half(spec, a, +1).value
    neg = gsc_b_half(spec, a, -1).value
    assert abs(pos - neg) <= 1e-12 * pos
    full = gsc_b_integral(spec, a)
    assert 2.0 * pos == pytest.approx(full.quadrature.value, rel=1e-12)
    assert full.quadrature.value == pytest.approx(full.closed.value, rel=1e-9)


def test_g_is_positive():
    spec = GscSpec(3.0, 0.5, 1.0, -1.0)
    a = np.linspace(-20, 20, 101)
    A, B = np.meshgrid(a, a * 10, indexing="ij")
    # log g stays finite far out, where g itself may underflow
    assert np.all(np.isfinite(spec.log_g(A, B)))
    A, B = np.meshgrid(a / 4, a, indexing="ij")
    assert np.all(spec(A, B) > 0)


def test_full_integral_matches_u_path():
    spec = GscSpec(2.0, 0.5, 1.0, -1.0)
    r = gsc_full_integral(spec)
    assert r.convergent
    assert r.value == pytest.approx(gsc_u_integral(spec).value, rel=1e-8)


@pytest.mark.parametrize("c,s", [(0.0, 2.0), (0.5, 1.4)])
def test_full_integral_divergent_cases(c, s):
    assert gsc_full_integral(GscSpec(s, c, 1.0, -1.0)).classification == DIVERGENT


def test_u_path_refuses_outside_region():
    with pytest.raises(DomainError):
        gsc_u_integral(GscSpec(1.4, 0.5, 0.0, 1.0))


@pytest.mark.parametrize("spec", [GscSpec(3.0, 0.5, 1.0, -1.0), GscSpec(4.0, 1.0, 0.0, 1.0),
                                  GscSpec(3.0, 0.5, 0.0, 1.0)])
def test_domination_constants_do_not_grow_with_the_box(spec):
    small = domination_constants(spec, 5.0, 5.0)
    big = domination_constants(spec, 10.0, 10.0)
    for x, y in zip(small, big):
        assert math.isfinite(x) and abs(y - x) <= 0.05 * x


# compactness criterion

@pytest.mark.parametrize("c,s,expect", [(1.0, 2.0, CONVERGENT), (0.0, 3.0, DIVERGENT),
                                        (1.0, 1.0, DIVERGENT)])
def test_compactness_examples(c, s, expect):
    assert compactness_criterion(TripleParams(1.0, -1.0, s, c)).classification == expect


def test_compactness_domain():
    with pytest.raises(DomainError):
        compactness_criterion(TripleParams(1.0, -1.0, 0.5, 0.2))


# affine traces

def test_affine_pi_example():
    r = trace_affine(TripleParams(0.0, 1.0, 4.0))
    assert r.value == pytest.approx(math.pi, rel=1e-14)
    assert r.tail_estimate == 0.0


def test_affine_two_paths_agree():
    p = TripleParams(1.0, -1.0, 3.0)
    c = trace_affine(p, "closed-form").value
    q = trace_affine(p, "quadrature").value
    assert abs(c - q) <= 1e-6 * abs(c)


@pytest.mark.parametrize("omega", [1.0, -2.0])
def test_affine_residue(omega):
    res = richardson_residue(lambda s: trace_affine(TripleParams(0.7, omega, s)), 2.0)
    assert res == pytest.approx(2.0 * math.pi / abs(omega), rel=1e-3)


def test_affine_divergent_at_two():
    r = trace_affine(TripleParams(1.0, -1.0, 2.0))
    assert r.classification == DIVERGENT


def test_affine_decreasing_in_s():
    vals = [trace_affine(TripleParams(1.0, -1.0, s)).value for s in np.linspace(2.05, 6.0, 25)]
    assert np.all(np.diff(vals) < 0)


def test_affine_pairing_from_elements():
    f = bump()
    r1 = trace_affine(TripleParams(0.0, 1.0, 4.0), f=f, g=f)
    from nctriple.algebra import point_pairing
    assert r1.value == pytest.approx(math.pi * point_pairing(f, f), rel=1e-12)
    with pytest.raises(ConfigError):
        trace_affine(TripleParams(0.0, 1.0, 4.0), f=f)


def test_unknown_method():
    with pytest.raises(ConfigError):
        trace_affine(TripleParams(0.0, 1.0, 4.0), "simpson")


# Θ-power trace and symbol norm

def test_theta_power_regions():
    f = bump()
    assert trace_theta_power(f, TripleParams(1.0, -1.0, 3.0, 0.5)).convergent
    assert trace_theta_power(f, TripleParams(1.0, -1.0, 2.4, 0.5)).classification == DIVERGENT


def test_theta_power_of_zero():
    z = zero_element(AG, BG)
    assert trace_theta_power(z, TripleParams(1.0, -1.0, 3.0, 0.5)).value == 0.0


def test_symbol_norm():
    f = bump()
    r = symbol_L1_norm(f, TripleParams(1.0, -1.0, 5.0, 1.0))
    assert r.convergent and r.value > 0
    assert symbol_L1_norm(zero_element(AG, BG), TripleParams(1.0, -1.0, 5.0, 1.0)).value == 0.0
    with pytest.raises(DomainError):
        symbol_L1_norm(f, TripleParams(1.0, -1.0, 5.0, 0.0))


# ℤ⋉ℝ

def test_series_regions():
    assert series_zr(TripleParams(1.0, 1.0, 2.5)).convergent
    assert series_zr(TripleParams(1.0, 1.0, 2.0)).classification == DIVERGENT


def test_series_matches_direct_sum():
    p = TripleParams(1.0, 1.0, 10.0)
    n = np.arange(-40, 41, dtype=float)
    direct = math.fsum(np.exp(-n) * (1.0 + (1.0 + np.exp(-n)) ** 2) ** (-4.5))
    assert series_zr(p).value == pytest.approx(direct, rel=1e-12)


# dilations

def test_dilation_example():
    r = trace_dilation(DilationSpec(3, 0.0, 1.0, 5.0))
    expect = 2.0 * math.pi ** 1.5 / math.gamma(2.5) * math.sqrt(math.pi) * math.gamma(1.5)
    assert r.value == pytest.approx(expect, rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dilation_residue(n):
    omega = 1.5
    res = richardson_residue(lambda s: trace_dilation(DilationSpec(n, 0.5, omega, s)), n + 1.0)
    expect = 2.0 * math.pi ** (0.5 * (n + 1)) / (omega * math.gamma(0.5 * (n + 1)))
    assert res == pytest.approx(expect, rel=1e-3)


def test_dilation_two_paths():
    spec = DilationSpec(2, 1.0, 1.0, 4.5)
    c = trace_dilation(spec).value
    q = trace_dilation(spec, "quadrature").value
    assert abs(c - q) <= 1e-6 * abs(c)


def test_dilation_one_reduces_to_affine():
    # n = 1 with unit fhat0 is the affine trace
    for eta, omega in [(0.0, 1.0), (1.0, -1.0), (2.0, 0.5)]:
        d = trace_dilation(DilationSpec(1, eta, omega, 3.3), "quadrature").value
        a = trace_affine(TripleParams(eta, omega, 3.3)).value
        assert d == pytest.approx(a, rel=1e-6)


def test_dilation_validation():
    with pytest.raises(ConfigError):
        DilationSpec(0, 0.0, 1.0, 3.0)
    assert trace_dilation(DilationSpec(2, 0.0, 1.0, 3.0)).classification == DIVERGENT


# untwisted representation

def test_untwisted_regions():
    germ = FlatGerm()
    assert trace_untwisted_H(germ, 1.0).classification == DIVERGENT
    assert trace_untwisted_H(germ, 2.0).convergent


def test_untwisted_near_part_matches_window_value():
    germ = FlatGerm(eps=1e-3, a_ramp=0.5, b_flat=5.0, b_ramp=1.0)
    q = untwisted_near_quadrature(germ, 2.0, 1e-3).value
    m = untwisted_window_model(1.0, 2.0, 1e-3).value
    assert m == pytest.approx(4.0 * math.sinh(5e-4) * bessel_ratio(2.0), rel=1e-12)
    assert abs(q - m) <= 1e-4 * m


def test_untwisted_zero_element():
    assert trace_untwisted_H(zero_element(AG, BG), 2.0, eps=0.1).value == 0.0


def test_untwisted_needs_eps_for_elements():
    with pytest.raises(ConfigError):
        trace_untwisted_H(bump(), 2.0)


# spectral dimension

def test_pole_from_pair_exact_on_model():
    t = lambda s: 3.0 / (s - 1.7)
    assert pole_from_pair(1.8, t(1.8), 1.9, t(1.9)) == pytest.approx(1.7, abs=1e-12)


@pytest.mark.parametrize("example,rng,expect", [
    ("affine", (1.0, 3.0), 2.0), ("zr", (1.0, 3.0), 2.0), ("dilation:3", (3.0, 5.0), 4.0),
    ("untwisted", (0.5, 2.0), 1.0)])
def test_spectral_dimension_examples(example, rng, expect):
    est = spectral_dimension(trace_for(example, 1.0, -1.0, "quadrature"), rng)
    assert est.accepted
    assert est.p == pytest.approx(expect, abs=0.02)


def test_spectral_dimension_bad_bracket():
    est = spectral_dimension(trace_for("affine", 1.0, -1.0, "quadrature"), (2.5, 3.0))
    assert not est.accepted
    with pytest.raises(ConfigError):
        spectral_dimension(trace_for("affine", 1.0, -1.0), (3.0, 1.0))


@pytest.mark.parametrize("threshold,fn", [
    (2.0, lambda s: trace_affine(TripleParams(1.0, -1.0, s), "quadrature")),
    (2.0, lambda s: series_zr(TripleParams(1.0, -1.0, s))),
    (3.0, lambda s: trace_dilation(DilationSpec(2, 1.0, -1.0, s), "quadrature")),
    (2.5, lambda s: trace_theta_power(bump(), TripleParams(1.0, -1.0, s, 0.5))),
])
def test_classification_flips_within_resolution(threshold, fn):
    assert fn(threshold - 0.01).classification == DIVERGENT
    assert fn(threshold + 0.01).classification == CONVERGENT
