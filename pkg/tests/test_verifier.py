from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from conftest import random_psd
from covapprox.distributions import DistributionSpec, MarginalSpec
from covapprox.normal import gaussian_abs_median
from covapprox.rng import RngStream
from covapprox.slab import SlabBody
from covapprox.verifier import (
    ApproximationReport,
    brute_force_radial,
    certify_approximation,
    check_marginal_conditions,
    estimate_abs_median,
    estimate_psi,
    kolmogorov_distance,
    normalize_to_l2_sphere,
    rademacher_sup_estimate,
    sample_l2_sphere_direction,
    sample_l2_sphere_directions,
)


def ellipsoid_radial(T, scale=1.0):
    T = np.asarray(T, dtype=float)
    return lambda u: scale / math.sqrt(u @ T @ u)


def test_directions_on_l2_sphere():
    u = sample_l2_sphere_directions(np.eye(4), 100, RngStream(1))
    assert np.allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-14)
    T = np.diag([4.0, 1.0])
    u = sample_l2_sphere_direction(T, RngStream(2))
    assert abs(u @ T @ u - 1) < 1e-10
    T = random_psd(np.random.default_rng(3), 6)
    us = sample_l2_sphere_directions(T, 500, RngStream(3))
    assert np.max(np.abs(np.einsum("pd,de,pe->p", us, T, us) - 1)) < 1e-10


def test_sphere_directions_are_centred():
    u = sample_l2_sphere_directions(np.eye(3), 10**5, RngStream(4))
    assert np.all(np.abs(u.mean(axis=0)) < 4 / math.sqrt(10**5 * 3) * 3)


def test_normalize_rejects_zero():
    with pytest.raises(ValueError):
        normalize_to_l2_sphere(np.eye(2), [[0.0, 0.0]])


@pytest.mark.parametrize("scale", [1.0, 2.0, 0.3])
def test_certify_scaled_ellipsoid(scale):
    T = random_psd(np.random.default_rng(5), 5)
    rep = certify_approximation(ellipsoid_radial(T, scale), T, 2000, RngStream(5))
    assert rep.min_ratio == pytest.approx(scale, rel=1e-12)
    assert rep.max_ratio == pytest.approx(scale, rel=1e-12)
    assert rep.infinite_radial_count == 0
    assert rep.direction_count == 2000


def test_certify_reports_infinite_and_offenders():
    body = SlabBody(np.array([[1.0, 0.0]]), 1.0, 1)  # unbounded along e2
    rep = certify_approximation(body, np.eye(2), 200, RngStream(6), extra_directions=[[0.0, 3.0]])
    assert rep.infinite_radial_count >= 1
    assert rep.outer_scale == math.inf and rep.implied_eta == math.inf
    assert math.isinf(rep.worst_offenders[0].ratio)
    assert rep.direction_count == 201


def test_report_round_trip():
    rep = certify_approximation(ellipsoid_radial(np.eye(3), 1.1), np.eye(3), 50, RngStream(7))
    assert ApproximationReport.from_dict(rep.to_dict()) == rep
    assert rep.implied_eta == pytest.approx(1 - 1 / 1.1)
    assert (rep.seed, rep.stream_id) == (7, 0)


def test_certify_rejects_nonpositive_radial():
    with pytest.raises(ValueError, match="non-positive"):
        certify_approximation(lambda u: 0.0, np.eye(2), 5, RngStream(8))


def test_brute_force_examples():
    cube = SlabBody(np.eye(2), 1.0, 2)
    assert brute_force_radial(cube.contains, [1.0, 0.0], 1e3).radius == pytest.approx(1.0, rel=1e-12)
    T = random_psd(np.random.default_rng(9), 4)
    inside = lambda v: v @ T @ v <= 1.0
    for u in sample_l2_sphere_directions(T, 20, RngStream(9)):
        assert abs(brute_force_radial(inside, u, 1e3).radius - 1) < 1e-10
    with pytest.raises(ValueError):
        brute_force_radial(lambda v: False, [1.0], 10.0)
    assert brute_force_radial(lambda v: True, [1.0], 10.0).unbounded


def test_condition_checks_gaussian():
    alpha = gaussian_abs_median()
    rep = check_marginal_conditions(DistributionSpec.standard_gaussian(4), 1, alpha, [0.1], 8, 20_000, RngStream(10))
    assert rep.condition1_deviation <= 4 * rep.condition1_stderr
    two_sided = 2 * (stats.norm.cdf(alpha) - stats.norm.cdf(alpha - 0.1))
    assert two_sided == pytest.approx(0.0656, abs=5e-4)
    assert rep.mass_by_eps[0.1] == pytest.approx(two_sided, abs=5 * math.sqrt(two_sided / 20_000))
    assert rep.gamma_hat == pytest.approx(two_sided / 0.1, abs=0.05)


def test_condition_checks_sphere():
    spec = DistributionSpec.uniform_sphere(50)
    alpha = estimate_abs_median(spec, 10**6, RngStream(11))
    rep = check_marginal_conditions(spec, 1, alpha, [0.1], 8, 20_000, RngStream(12))
    assert rep.condition1_deviation <= 4 * rep.condition1_stderr


def test_condition_check_validation():
    spec = DistributionSpec.standard_gaussian(2)
    with pytest.raises(ValueError):
        check_marginal_conditions(spec, 1, 0.67, [0.1], 2, 100, RngStream(0))
    with pytest.raises(ValueError):
        check_marginal_conditions(spec, 1, 0.67, [0.9], 2, 10_000, RngStream(0))


def test_kolmogorov_distance_oracle():
    y = np.random.default_rng(13).standard_normal(2000)
    assert kolmogorov_distance(y) == pytest.approx(stats.kstest(y, "norm").statistic, rel=1e-10)


def test_psi_examples():
    psi = estimate_psi(MarginalSpec("rademacher"), 1, 10**5, RngStream(14))
    assert psi == pytest.approx(stats.norm.cdf(1.0) - 0.5, abs=0.01)
    trials = 10**5
    psi = estimate_psi(MarginalSpec("standard_gaussian"), 4, trials, RngStream(15))
    assert psi <= 1.36 / math.sqrt(trials) * 1.5
    with pytest.raises(ValueError):
        estimate_psi(MarginalSpec("rademacher"), 1, 10, RngStream(0))


def test_sup_estimate_examples():
    est = rademacher_sup_estimate(DistributionSpec.mixed_product("rademacher", d=1), 1, 1000, RngStream(16))
    assert est.value == 1.0 and est.stderr == 0.0 and est.bound == 1.0
    est = rademacher_sup_estimate(DistributionSpec.standard_gaussian(20), 10, 2000, RngStream(17))
    assert est.value < math.sqrt(200)
    # E||g||_2 for g ~ N(0, 10 Id_20) is sqrt(10) * sqrt(2) Gamma(10.5) / Gamma(10)
    expected = math.sqrt(10) * math.sqrt(2) * math.exp(math.lgamma(10.5) - math.lgamma(10))
    assert est.value == pytest.approx(expected, abs=4 * est.stderr)


@pytest.mark.parametrize("k,d", [(5, 5), (20, 50)])
@pytest.mark.parametrize(
    "make",
    [
        lambda d: DistributionSpec.standard_gaussian(d),
        lambda d: DistributionSpec.uniform_sphere(d),
        lambda d: DistributionSpec.heavy_tail_xu(d, 1.0),
        lambda d: DistributionSpec.mixed_product(MarginalSpec("student_like", 5.0), d=d),
    ],
)
def test_sup_bound_any_spec(make, k, d):
    est = rademacher_sup_estimate(make(d), k, 1000, RngStream(k * d))
    assert est.within_bound(3.0)
