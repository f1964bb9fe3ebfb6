from __future__ import annotations

import json
import math

import numpy as np
import pytest
from scipy import stats

from conftest import random_psd
from covapprox.distributions import (
    DistributionSpec,
    MarginalSpec,
    SpecError,
    block_average,
    iter_batches,
    sample_batch,
    true_covariance,
    xu_fourth_moment,
    xu_second_moment,
)
from covapprox.normal import abs_normal_mass, gaussian_abs_median, normal_cdf, normal_quantile
from covapprox.rng import RngStream, as_generator


# --- random streams ---------------------------------------------------------

def test_streams_are_reproducible_and_distinct():
    a = RngStream(7).generator().standard_normal(5)
    b = RngStream(7).generator().standard_normal(5)
    c = RngStream(8).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    kids = {RngStream(7).spawn(i).stream_id for i in range(100)}
    assert len(kids) == 100
    assert RngStream(7).spawn(3) == RngStream(7).spawn(3)


def test_stream_validation():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(2**64)
    assert isinstance(as_generator(5), np.random.Generator)


# --- normal helpers ---------------------------------------------------------

def test_abs_median_value():
    alpha = gaussian_abs_median()
    assert alpha == pytest.approx(0.6744897502, abs=1e-9)
    assert alpha == pytest.approx(stats.norm.ppf(0.75), abs=1e-12)
    assert normal_cdf(alpha) - normal_cdf(-alpha) == pytest.approx(0.5, abs=1e-9)
    assert abs_normal_mass(0.0, alpha) == pytest.approx(0.5, abs=1e-12)


def test_abs_median_monte_carlo():
    g = RngStream(11).generator().standard_normal(10**7)
    assert np.median(np.abs(g)) == pytest.approx(gaussian_abs_median(), abs=1e-3)


@pytest.mark.parametrize("p", [1e-10, 0.01, 0.3, 0.5, 0.9, 1 - 1e-10])
def test_quantile_inverts_cdf(p):
    assert normal_quantile(p) == pytest.approx(stats.norm.ppf(p), rel=1e-10, abs=1e-12)


# --- specs and sampling -----------------------------------------------------

def test_sphere_samples_have_unit_norm():
    x = sample_batch(DistributionSpec.uniform_sphere(7), 1000, RngStream(1))
    assert np.max(np.abs(np.linalg.norm(x, axis=1) - 1)) < 1e-12


def test_xu_coordinates():
    spec = DistributionSpec.heavy_tail_xu(100, 1.0)
    assert spec.spike_radius == 10.0
    x = sample_batch(spec, 20_000, RngStream(2))
    assert set(np.unique(x)) <= {-10.0, -1.0, 1.0, 10.0}
    assert np.any(np.abs(x) == 10.0)


def test_xu_covariance_example():
    cov = true_covariance(DistributionSpec.heavy_tail_xu(100, 1.0))
    assert np.allclose(cov, 1.0099 * np.eye(100), rtol=0, atol=1e-15)
    assert xu_second_moment(100, 1.0) == pytest.approx(0.01 + 1 - 0.0001, abs=1e-15)
    assert xu_fourth_moment(100, 1.0) == pytest.approx(2 - 1e-4, abs=1e-15)


def test_xu_rejects_small_u():
    with pytest.raises(SpecError):
        DistributionSpec.heavy_tail_xu(10, 0.05)


def test_covariances():
    t = random_psd(np.random.default_rng(0), 4)
    assert np.array_equal(true_covariance(DistributionSpec.gaussian(t)), t)
    assert np.allclose(true_covariance(DistributionSpec.uniform_sphere(5)), np.eye(5) / 5)
    mp = DistributionSpec.mixed_product(MarginalSpec("rademacher", scale=2.0), mixing=t)
    assert np.allclose(true_covariance(mp), 4.0 * t)


def test_gaussian_mean_clt():
    n = 10**6
    x = sample_batch(DistributionSpec.standard_gaussian(4), n, RngStream(3))
    assert np.all(np.abs(x.mean(axis=0)) < 4 / math.sqrt(n))


@pytest.mark.parametrize("kind,p", [("standard_gaussian", None), ("rademacher", None), ("centered_exponential", None), ("student_like", 5.0)])
def test_marginals_are_standardised(kind, p):
    y = MarginalSpec(kind, p).sample(RngStream(4).generator(), 400_000)
    assert abs(y.mean()) < 5 * y.std() / math.sqrt(y.size)
    assert y.var() == pytest.approx(1.0, abs=0.03)


def test_mixed_product_covariance_statistical():
    t = random_psd(np.random.default_rng(5), 3)
    spec = DistributionSpec.mixed_product("centered_exponential", mixing=t)
    x = sample_batch(spec, 400_000, RngStream(5))
    assert np.max(np.abs(x.T @ x / x.shape[0] - t)) < 0.03


def test_invalid_specs():
    with pytest.raises(SpecError):
        DistributionSpec.gaussian(np.diag([1.0, -1.0]))
    with pytest.raises(SpecError):
        DistributionSpec.gaussian(np.diag([1.0, 0.0]))
    with pytest.raises(SpecError):
        MarginalSpec("cauchy")
    with pytest.raises(SpecError):
        MarginalSpec("student_like", 2.0)
    with pytest.raises(SpecError):
        DistributionSpec.from_dict({"kind": "gaussian", "d": 2, "mean": 1})


@pytest.mark.parametrize(
    "spec",
    [
        DistributionSpec.gaussian(np.array([[2.0, 0.5], [0.5, 1.0]])),
        DistributionSpec.uniform_sphere(3),
        DistributionSpec.heavy_tail_xu(20, 1.0),
        DistributionSpec.mixed_product(MarginalSpec("student_like", 6.0), mixing=np.eye(2) * 3),
    ],
)
def test_spec_round_trip(spec):
    back = DistributionSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert back.kind == spec.kind and back.d == spec.d
    assert np.allclose(back.covariance, spec.covariance)
    a = sample_batch(spec, 50, RngStream(9))
    b = sample_batch(back, 50, RngStream(9))
    assert np.array_equal(a, b)


def test_sampling_determinism_and_streaming():
    spec = DistributionSpec.standard_gaussian(3)
    a = sample_batch(spec, 1000, RngStream(12))
    b = np.concatenate(list(iter_batches(spec, 1000, RngStream(12), chunk=1000)))
    assert np.array_equal(a, b)
    assert sum(c.shape[0] for c in iter_batches(spec, 1000, RngStream(12), chunk=300)) == 1000


# --- block averages ---------------------------------------------------------

def test_block_average_identity_and_constant():
    x = np.random.default_rng(0).standard_normal((10, 3))
    assert np.array_equal(block_average(x, 1).vectors, x)
    v = np.array([1.0, -2.0, 0.5])
    out = block_average(np.tile(v, (8, 1)), 4)
    assert out.n == 2 and out.dropped == 0
    assert np.allclose(out.vectors, 2 * v)


def test_block_average_drops_tail():
    out = block_average(np.ones((105, 2)), 10)
    assert out.n == 10 and out.dropped == 5
    with pytest.raises(ValueError):
        block_average(np.ones((3, 2)), 4)


@pytest.mark.parametrize("m", [1, 3, 8])
def test_block_average_keeps_covariance(m):
    t = np.array([[2.0, 0.6], [0.6, 1.0]])
    x = sample_batch(DistributionSpec.gaussian(t), 100_000 * m, RngStream(m))
    z = block_average(x, m).vectors
    assert np.max(np.abs(z.T @ z / z.shape[0] - t)) < 5 * 2.0 * math.sqrt(2 / z.shape[0])
