import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aerokin.collision import half_moment_sphere, half_moment_sphere_mc
from aerokin.quadrature import frame_from_axis, gauss_legendre, lebedev, maxwell_spherical

vectors = st.lists(st.floats(-10, 10), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 1e-3)


def test_lebedev_polynomial_exactness():
    dirs, wts = lebedev(17)
    assert np.sum(wts) == pytest.approx(4 * np.pi, rel=1e-14)
    assert np.sum(wts * dirs[:, 0] ** 2) == pytest.approx(4 * np.pi / 3, rel=1e-13)
    assert np.sum(wts * dirs[:, 0] ** 2 * dirs[:, 1] ** 2) == pytest.approx(4 * np.pi / 15, rel=1e-13)
    assert abs(np.sum(wts * dirs[:, 2] ** 3)) < 1e-14


def test_maxwell_spherical_third_moment():
    quad = maxwell_spherical(24, 17)
    r = np.linalg.norm(quad.nodes, axis=1)
    exact = 2 ** 1.5 * math.gamma(3) / math.gamma(1.5)
    assert np.sum(quad.maxwell_weights() * r ** 3) == pytest.approx(exact, rel=1e-13)
    finer = maxwell_spherical(32, 17)
    rf = np.linalg.norm(finer.nodes, axis=1)
    assert abs(np.sum(finer.maxwell_weights() * rf ** 3) - exact) < 1e-12


def test_gauss_legendre_interval():
    x, w = gauss_legendre(5, 1.0, 3.0)
    assert np.sum(w * x ** 9) == pytest.approx((3 ** 10 - 1) / 10, rel=1e-14)


@given(vectors)
def test_frame_is_rotation_with_axis_last(axis):
    rot = frame_from_axis(np.array(axis))
    np.testing.assert_allclose(rot @ rot.T, np.eye(3), atol=1e-13)
    assert np.linalg.det(rot) == pytest.approx(1.0)
    np.testing.assert_allclose(rot[:, 2], np.array(axis) / np.linalg.norm(axis), atol=1e-14)


def test_half_moment_special_cases():
    a = np.array([0.0, 0.0, 2.0])
    assert half_moment_sphere(a, a) == pytest.approx(2 * np.pi / 3 * 4, rel=1e-14)
    assert half_moment_sphere(a, -a) == pytest.approx(0.0, abs=1e-15)
    b = np.array([1.0, 0.0, 0.0])
    # orthogonal: (2/3)|a||b|
    assert half_moment_sphere(a, b) == pytest.approx(4 / 3, rel=1e-14)


@given(vectors, vectors)
def test_half_moment_closed_matches_lebedev(a, b):
    # the kink in (n.a)_+ limits the Lebedev rule to a few 1e-3
    a, b = np.array(a), np.array(b)
    closed = half_moment_sphere(a, b)
    leb = half_moment_sphere(a, b, method="lebedev")
    assert abs(closed - leb) <= 5e-3 * np.linalg.norm(a) * np.linalg.norm(b)


def test_half_moment_monte_carlo_oracle():
    a = np.array([0.3, -1.0, 0.5])
    b = np.array([1.0, 0.2, 0.7])
    mean, stderr = half_moment_sphere_mc(a, b, n_samples=1_000_000, seed=4)
    assert abs(half_moment_sphere(a, b) - mean) <= 4 * stderr
