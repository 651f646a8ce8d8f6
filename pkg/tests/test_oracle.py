import math
from dataclasses import replace

import numpy as np
import pytest

from dtdd import ClusterParams, DomainError, MobileQuery, NetworkParams, SmallCellQuery, isr_dl_dl, omega
from dtdd.oracle import (
    LatticeField,
    OracleConfig,
    cluster_coefficient,
    epstein_sums,
    mc_disc_sum,
    oracle_cluster_dl_ul,
    oracle_coverage,
    oracle_coverage_curve,
    oracle_dl_dl,
    oracle_dl_ul,
    oracle_ul_dl,
    oracle_ul_ul,
    theta_mean,
)

NET = NetworkParams()
OC = OracleConfig()
SMALL = OracleConfig(lattice_max_norm=60.0, near_radius=10.0)


def test_config_validation():
    for kwargs in ({"lattice_max_norm": 9.0}, {"mc_draws": 0}, {"seed": -1}, {"seed": 2**64},
                   {"quad_radial_order": 0}, {"near_radius": 1.0}, {"mc_radius": 30.0}):
        with pytest.raises(DomainError):
            OracleConfig(**kwargs)


def test_zero_distance():
    assert oracle_dl_dl(0.0, 0.3, NET).value == 0.0
    assert oracle_ul_dl(0.0, 0.3, NET).value == 0.0
    assert oracle_ul_ul(0.0, NET).value == 0.0
    assert oracle_dl_ul(0.0, NET).value == 0.0


def test_far_field_expansion_matches_direct_sum():
    b = 1.2
    direct = LatticeField(b, 120.0, near_radius=120.0)
    expanded = LatticeField(b, 120.0, near_radius=15.0)
    w = np.array([0.0, 0.3 + 0.2j, -0.6 + 0.1j, 0.9j])
    # dropped angular harmonics scale like (|w| / near)^6
    assert np.allclose(expanded(w), direct(w), rtol=1e-9, atol=0)


def test_epstein_sums_match_six_omega():
    zs = [1.2, 1.75, 3.0]
    for z, r in zip(zs, epstein_sums(zs, 2000.0)):
        assert r.value == pytest.approx(6 * omega(z), rel=1e-8)
        assert abs(r.value - 6 * omega(z)) <= r.tail_bound


@pytest.mark.parametrize("b", [1.2, 1.75])
def test_tail_bound_brackets_refined_value(b):
    net = replace(NET, b=b)
    coarse, fine = OracleConfig(lattice_max_norm=100.0), OracleConfig(lattice_max_norm=200.0)
    for fn in (lambda oc: oracle_dl_dl(0.4, 0.2, net, oc),
               lambda oc: oracle_ul_dl(0.3, 0.0, net, oc),
               lambda oc: oracle_ul_ul(0.3, net, oc),
               lambda oc: oracle_dl_ul(0.3, net, oc)):
        lo, hi = fn(coarse), fn(fine)
        assert lo.tail_bound > 0
        assert abs(lo.value - hi.value) <= lo.tail_bound


def test_dl_dl_theta_mean_matches_series_and_theta_spread_is_reported():
    net = replace(NET, b=1.75)
    mean = theta_mean(lambda t: oracle_dl_dl(0.3, t, net, OC))
    assert isr_dl_dl(MobileQuery(0.3), net) == pytest.approx(mean.value, rel=1e-9)
    profile = [oracle_dl_dl(0.3, t, net, OC).value for t in np.linspace(0, math.pi / 3, 13)]
    spread = (max(profile) - min(profile)) / mean.value
    # slowly varying, but not flat
    assert 1e-4 < spread < 5e-2
    # 60-degree symmetry and reflection
    assert oracle_dl_dl(0.3, 0.1, net, OC).value == pytest.approx(oracle_dl_dl(0.3, -0.1, net, OC).value, rel=1e-12)
    assert oracle_dl_dl(0.3, 0.1, net, OC).value == pytest.approx(
        oracle_dl_dl(0.3, 0.1 + math.pi / 3, net, OC).value, rel=1e-12)


def test_ul_dl_quadrature_converged():
    base = oracle_ul_dl(0.3, 0.0, NET, OC).value
    doubled = oracle_ul_dl(0.3, 0.0, NET, replace(OC, quad_radial_order=128, quad_angular_order=256)).value
    assert doubled == pytest.approx(base, rel=1e-6)


def test_ul_ul_structure():
    k1 = replace(NET, k=1.0)
    vals = {oracle_ul_ul(x, k1, OC).value for x in (0.1, 0.3, 0.5)}
    assert len(vals) == 1
    tiny = oracle_ul_ul(0.3, replace(NET, cell_radius=1e-4), OC).value
    assert tiny < 1e-10


def test_dl_ul_scalings():
    net = NetworkParams(b=1.75, k=0.0, p_dl=1.0, p_target=1.0, delta=1.0)
    r = oracle_dl_ul(1.0, net, OC)
    assert r.value == pytest.approx(6 * omega(1.75), rel=1e-9)
    assert r.value == pytest.approx(6 * omega(1.75), abs=r.tail_bound)
    k = replace(net, k=0.4)
    ratio = oracle_dl_ul(0.4, replace(k, delta=2.0, cell_radius=0.9), OC).value / oracle_dl_ul(0.4, k, OC).value
    assert ratio == pytest.approx(2.0 ** (-2 * 1.75 * 0.4), rel=1e-13)


def test_mc_zero_variance_case_is_exact():
    # radius 0 and a fixed target: every draw gives the same sum
    centers = np.array([2.0 + 0j, -1.0 + 1.0j])
    mean, err = mc_disc_sum(centers, 0.0, 0.5 + 0j, 1.5, 2, replace(OC, mc_draws=1000))
    expected = abs(2.0 - 0.5) ** -3 + abs(-1.0 + 1.0j - 0.5) ** -3
    assert mean == pytest.approx(expected, rel=1e-14)
    assert err == pytest.approx(0.0, abs=1e-12 * expected)


def test_mc_unbiased_against_quadrature():
    # E|c + w|^{-2b} over w uniform in a disc, vs deterministic disc quadrature of the same field
    b, disc = 1.5, 0.4
    centers = np.array([1.0 + 0j])
    mean, err = mc_disc_sum(centers, disc, 0j, b, 1, replace(OC, mc_draws=400_000))
    t, wt = np.polynomial.legendre.leggauss(80)
    t, wt = 0.5 * (t + 1), 0.5 * wt
    phi = 2 * math.pi * (np.arange(256) + 0.5) / 256
    pts = 1.0 + disc * t[:, None] * np.exp(1j * phi)[None, :]
    ring = (np.abs(pts) ** (-2 * b)).mean(axis=1)
    exact = 2 * float(np.sum(wt * t * ring))
    assert abs(mean - exact) <= 4 * err


def test_mc_stderr_scales_with_draws():
    centers = np.array([1.0 + 0j, 0.5 + 0.866j])
    _, e_small = mc_disc_sum(centers, 0.3, 0j, 1.2, 3, replace(OC, mc_draws=10_000))
    _, e_big = mc_disc_sum(centers, 0.3, 0j, 1.2, 3, replace(OC, mc_draws=1_000_000))
    assert e_small / e_big == pytest.approx(10.0, rel=0.1)


def test_mc_deterministic_across_workers():
    centers = np.array([1.0 + 0j, 0.5 + 0.866j, -1.0 + 0j])
    oc1 = replace(OC, mc_draws=100_000, mc_chunk=7_000)
    a = mc_disc_sum(centers, 0.3, 0.1 + 0j, 1.2, 3, oc1)
    b = mc_disc_sum(centers, 0.3, 0.1 + 0j, 1.2, 3, replace(oc1, workers=4))
    c = mc_disc_sum(centers, 0.3, 0.1 + 0j, 1.2, 3, oc1)
    assert a == b == c
    d = mc_disc_sum(centers, 0.3, 0.1 + 0j, 1.2, 3, replace(oc1, seed=7))
    assert d != a


def test_cluster_oracle_zero_intensity_and_determinism():
    q = SmallCellQuery(0.3, 1.2, 0.4)
    assert oracle_cluster_dl_ul(0.3, ClusterParams(intensity=0.0), q).value == 0.0
    oc = replace(SMALL, mc_draws=20_000)
    a = cluster_coefficient(ClusterParams(), 1.2, 0.4, oc)
    b = cluster_coefficient(ClusterParams(), 1.2, 0.4, replace(oc, workers=3))
    assert a == b
    assert a.mc_stderr > 0 and a.tail_bound > 0


def test_coverage_oracle_limits():
    q = SmallCellQuery(0.0, 1.75, 0.8)
    oc = replace(SMALL, mc_draws=20_000)
    assert oracle_coverage(1e-9, ClusterParams(), q, oc).value == 1.0
    assert oracle_coverage(1e9, ClusterParams(), q, oc).value == 0.0
    curve = oracle_coverage_curve([0.01, 0.1, 1.0, 10.0], ClusterParams(), q, oc)
    vals = [r.value for r in curve]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        oracle_coverage(0.0, ClusterParams(), q, oc)


def test_oracle_domain_guards():
    with pytest.raises(DomainError):
        oracle_dl_dl(0.6, 0.0, NET)
    with pytest.raises(DomainError):
        oracle_ul_dl(0.56, 0.0, NET)
    with pytest.raises(DomainError):
        oracle_cluster_dl_ul(1.0, ClusterParams(), SmallCellQuery(0.3))
