from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covapprox.slab import (
    BodyError,
    SlabBody,
    SlabMode,
    ThresholdNetwork,
    build_slab_body,
    ceil_count,
    export_threshold_network,
)
from covapprox.verifier import brute_force_radial

CUBE = SlabBody(np.eye(2), 1.0, 2)


def random_body(gen, d=None, n=None):
    d = d or int(gen.integers(1, 21))
    n = n or int(gen.integers(1, 201))
    return SlabBody(gen.standard_normal((n, d)), float(gen.uniform(0.2, 2.0)), int(gen.integers(1, n + 1)))


def test_mode_parameters():
    theta, k = SlabMode.smoothed(1, 0.05).threshold_and_count(100)
    assert k == 45
    assert theta == pytest.approx(0.7244897502, abs=1e-9)
    assert SlabMode.isomorphic(0.5, 0.2).threshold_and_count(100) == (0.25, 95)
    assert SlabMode.general(0.5, 0.1).threshold_and_count(10)[1] == 4
    assert SlabMode.sharp(0.1).threshold_and_count(10)[0] == pytest.approx(0.6744897502, abs=1e-9)


def test_ceil_count_ignores_float_noise():
    assert 0.1 * 3 * 10 > 3.0
    assert ceil_count(0.1 * 3 * 10) == 3
    assert ceil_count(45.2) == 46


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="smoothed", eta=0.5),
        dict(kind="smoothed", eta=-0.1),
        dict(kind="smoothed", eta=0.1, m=0),
        dict(kind="isomorphic", lam=0.0, delta=0.2),
        dict(kind="isomorphic", lam=1.0, delta=4.0),
        dict(kind="general", beta=0.3, eta=0.3),
        dict(kind="bogus"),
    ],
)
def test_mode_validation(kwargs):
    with pytest.raises(BodyError):
        SlabMode(**kwargs)


def test_body_validation():
    with pytest.raises(BodyError):
        SlabBody(np.eye(2), 0.0, 1)
    with pytest.raises(BodyError):
        SlabBody(np.eye(2), 1.0, 3)
    with pytest.raises(BodyError):
        SlabBody(np.zeros((0, 2)), 1.0, 1)
    with pytest.raises(BodyError):
        build_slab_body(np.ones((3, 2)), SlabMode.smoothed(4, 0.1))


def test_cube_membership_and_radial():
    assert CUBE.contains([0.0, 0.0])
    assert CUBE.contains([1.0, 1.0])
    assert not CUBE.contains([1.01, 0.0])
    assert CUBE.radial(np.array([1.0, 1.0]) / math.sqrt(2)) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert CUBE.radial([1.0, 0.0]) == 1.0
    assert SlabBody(np.eye(2), 1.0, 1).radial([1.0, 0.0]) == math.inf
    with pytest.raises(BodyError):
        CUBE.radial([0.0, 0.0])


def test_smoothed_build_records_dropped():
    x = np.random.default_rng(0).standard_normal((105, 3))
    body = build_slab_body(x, SlabMode.smoothed(10, 0.1))
    assert body.n == 10 and body.meta["dropped"] == 5
    assert body.k == 4


def test_origin_always_inside(gen):
    for _ in range(20):
        b = random_body(gen)
        assert b.contains(np.zeros(b.d))


def test_radial_matches_bisection(gen):
    worst = 0.0
    for _ in range(50):
        b = random_body(gen)
        us = gen.standard_normal((20, b.d))
        closed = b.radial_many(us)
        for u, r in zip(us, closed):
            ray = brute_force_radial(b.contains, u, 1e3)
            if r >= 1e3:
                assert ray.unbounded
                continue
            assert not ray.unbounded
            worst = max(worst, abs(ray.radius - r) / r)
    assert worst <= 1e-9


def test_contains_agrees_with_radial(gen):
    for _ in range(20):
        b = random_body(gen)
        v = gen.standard_normal((200, b.d)) * gen.uniform(0.01, 5.0)
        r = b.radial_many(v)
        # skip points within 1e-9 of the boundary, where rounding decides
        clear = np.abs(r - 1.0) > 1e-9
        assert np.array_equal(b.contains_many(v)[clear], (r >= 1.0)[clear])


def test_symmetry_and_star_shape(gen):
    for _ in range(10):
        b = random_body(gen)
        v = gen.standard_normal((300, b.d))
        inside = b.contains_many(v)
        assert np.array_equal(inside, b.contains_many(-v))
        assert np.all(b.contains_many(0.5 * v[inside]))


@given(st.floats(0.01, 100.0), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_radial_homogeneity(scale, seed):
    gen = np.random.default_rng(seed)
    b = random_body(gen, d=4, n=30)
    u = gen.standard_normal(4)
    r1, r2 = b.radial(u), b.radial(scale * u)
    if math.isinf(r1):
        assert math.isinf(r2)
    else:
        assert r2 == pytest.approx(r1 / scale, rel=1e-12)


def test_monotone_in_theta_and_k(gen):
    z = gen.standard_normal((50, 5))
    us = gen.standard_normal((100, 5))
    small = SlabBody(z, 0.5, 20).radial_many(us)
    assert np.all(SlabBody(z, 0.8, 20).radial_many(us) >= small)
    assert np.all(SlabBody(z, 0.5, 10).radial_many(us) >= small)


def test_single_slab_network_has_two_units():
    net = export_threshold_network(SlabBody(np.array([[1.0, 2.0]]), 0.5, 1))
    assert net.units == 2


def test_network_at_origin(gen):
    b = random_body(gen)
    assert export_threshold_network(b).unit_sum(np.zeros((1, b.d)))[0] == b.n


def test_network_matches_membership(gen):
    for _ in range(20):
        b = random_body(gen, n=int(gen.integers(1, 60)))
        net = export_threshold_network(b)
        v = gen.standard_normal((500, b.d)) * 2.0
        assert np.array_equal(net.evaluate(v), b.contains_many(v))


def test_network_exact_on_slab_boundary():
    b = SlabBody(np.array([[1.0, 0.0], [0.0, 1.0]]), 1.0, 2)
    net = export_threshold_network(b)
    pts = np.array([[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0000001], [0.0, 0.0]])
    assert np.array_equal(net.evaluate(pts), b.contains_many(pts))


def test_network_json_round_trip(gen):
    b = random_body(gen, d=3, n=10)
    net = export_threshold_network(b)
    back = ThresholdNetwork.from_dict(json.loads(net.to_json()))
    v = gen.standard_normal((100, 3))
    assert np.array_equal(back.evaluate(v), net.evaluate(v))
