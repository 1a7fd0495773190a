import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from diffmac.lattice import (
    NSM,
    LatticeError,
    calibrate_second_moment,
    coefficients,
    cvp_quantize,
    is_lattice_point,
    make_lattice,
    mod_lattice,
    sample_dither,
    scale_to_power,
)

from oracles import brute_force_cvp, d4_box_points, enumerate_points, mean_and_stderr

ALL = [("scalar-z", 1), ("cubic-zn", 2), ("cubic-zn", 8), ("d4", 4), ("e8", 8)]


def lat_of(kind, dim, scale=1.0):
    return make_lattice(kind, dim, scale)


# -- construction ------------------------------------------------------------


def test_scalar_z_scale_two():
    lat = make_lattice("scalar-z", 1, 2.0)
    assert lat.second_moment == pytest.approx(1 / 3, rel=1e-12)
    np.testing.assert_array_equal(lat.generator, [[2.0]])


def test_cubic_second_moment():
    assert make_lattice("cubic-zn", 4, 1.0).second_moment == pytest.approx(1 / 12, rel=1e-12)


def test_e8_stored_second_moment():
    # unit-volume E8, so second moment == NSM
    lat = make_lattice("e8")
    assert lat.volume == pytest.approx(1.0, rel=1e-12)
    assert lat.second_moment == pytest.approx(0.071682, abs=5e-7)


@pytest.mark.parametrize("kind,dim", ALL)
def test_second_moment_matches_nsm_and_volume(kind, dim):
    lat = make_lattice(kind, dim, 1.7)
    det = abs(np.linalg.det(1.7 * lat.base_generator))
    assert det > 0
    assert lat.second_moment == pytest.approx(lat.nsm * det ** (2 / dim), rel=1e-9)


@pytest.mark.parametrize(
    "kind,dim,scale",
    [("d4", 3, 1.0), ("e8", 4, 1.0), ("scalar-z", 2, 1.0), ("e8", 8, 0.0), ("d4", 4, -1.0), ("hex", 2, 1.0)],
)
def test_make_lattice_errors(kind, dim, scale):
    with pytest.raises(LatticeError):
        make_lattice(kind, dim, scale)


def test_cubic_needs_dimension():
    with pytest.raises(LatticeError):
        make_lattice("cubic-zn")


# -- CVP ---------------------------------------------------------------------


def test_cvp_examples():
    assert cvp_quantize(make_lattice("scalar-z"), [0.4])[0] == 0.0
    np.testing.assert_array_equal(cvp_quantize(make_lattice("cubic-zn", 2), [0.4, -1.6]), [0.0, -2.0])


def test_d4_example_against_box_search():
    x = np.array([0.6, 0.6, 0.0, 0.0])
    pts = d4_box_points()
    d = np.sum((pts - x) ** 2, axis=1)
    best = pts[np.argmin(d)]
    np.testing.assert_array_equal(best, [1, 1, 0, 0])
    assert d.min() == pytest.approx(0.32)
    assert np.sum(x**2) == pytest.approx(0.72)
    np.testing.assert_array_equal(cvp_quantize(make_lattice("d4"), x), best)


def test_d4_box_search_random(rng):
    lat = make_lattice("d4")
    pts = d4_box_points()
    x = rng.uniform(-1.0, 1.0, size=(2000, 4))
    d = np.sum((x[:, None, :] - pts[None]) ** 2, axis=-1)
    np.testing.assert_allclose(cvp_quantize(lat, x), pts[np.argmin(d, axis=1)])


def test_mod_examples():
    z = make_lattice("scalar-z")
    assert mod_lattice(z, [0.4])[0] == pytest.approx(0.4)
    assert mod_lattice(z, [0.7])[0] == pytest.approx(-0.3)
    z2 = make_lattice("cubic-zn", 2)
    np.testing.assert_allclose(mod_lattice(z2, [0.4, -1.6]), [0.4, 0.4], atol=1e-12)


@pytest.mark.parametrize("bad", [[np.nan] * 8, [np.inf] + [0.0] * 7])
def test_non_finite_rejected(bad):
    with pytest.raises(LatticeError):
        cvp_quantize(make_lattice("e8"), bad)


def test_dimension_mismatch_rejected():
    with pytest.raises(LatticeError):
        mod_lattice(make_lattice("d4"), np.zeros(3))


def _queries(lat, rng, count):
    """Points covering the Voronoi cell, plus near-boundary points."""
    n = lat.dim
    direction = rng.standard_normal((count, n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = 1.05 * lat.covering_radius * rng.random(count) ** (1.0 / n)
    w = direction * radius[:, None]
    # half-way to a shortest vector, nudged off the tie
    short = enumerate_points(lat.generator, 1.01 * np.min(np.linalg.norm(lat.generator, axis=1)))
    short = short[np.linalg.norm(short, axis=1) > 0]
    k = count // 10
    mids = 0.5 * short[rng.integers(len(short), size=k)] + 1e-7 * rng.standard_normal((k, n))
    w[:k] = mids
    return w


@pytest.mark.parametrize("kind,dim", ALL)
@pytest.mark.parametrize("scale", [1.0, 3.3])
def test_cvp_matches_brute_force(kind, dim, scale, rng):
    lat = make_lattice(kind, dim, scale)
    w = _queries(lat, rng, 10_000)
    offsets = rng.integers(-50, 51, size=w.shape) @ lat.generator
    expected = brute_force_cvp(lat.generator, w)
    got = cvp_quantize(lat, w + offsets) - offsets
    d_got = np.linalg.norm(w - got, axis=1)
    d_exp = np.linalg.norm(w - expected, axis=1)
    # equal distance is the contract; points may differ only on near-ties
    np.testing.assert_allclose(d_got, d_exp, atol=1e-8 * scale)
    differ = np.any(np.abs(got - expected) > 1e-9 * scale, axis=1)
    assert np.all(np.abs(d_got[differ] - d_exp[differ]) < 1e-8 * scale)
    assert np.all(is_lattice_point(lat, cvp_quantize(lat, w + offsets)))


@pytest.mark.parametrize("kind,dim", ALL)
def test_norm_minimality_in_shell(kind, dim, rng):
    lat = make_lattice(kind, dim, 2.0)
    shell = enumerate_points(lat.generator, 1.5 * lat.covering_radius)
    x = rng.uniform(-lat.scale, lat.scale, size=(500, dim))
    r = np.linalg.norm(mod_lattice(lat, x), axis=1)
    d = np.linalg.norm(x[:, None, :] - shell[None], axis=-1).min(axis=1)
    assert np.all(r <= d + 1e-9)
    assert np.all(r <= np.linalg.norm(x, axis=1) + 1e-12)


def test_lattice_point_coefficients_are_integral(rng):
    lat = make_lattice("e8", scale=2.5)
    p = cvp_quantize(lat, rng.normal(scale=10.0, size=(100, 8)))
    z = coefficients(lat, p)
    np.testing.assert_allclose(z, np.round(z), atol=1e-6)
    assert not is_lattice_point(lat, np.full(8, 0.3))


# -- algebraic properties ----------------------------------------------------

kind_dims = st.sampled_from(ALL)
scales = st.floats(0.1, 20.0)


def _vec(dim):
    return arrays(np.float64, dim, elements=st.floats(-50, 50, allow_nan=False))


@given(data=st.data(), kd=kind_dims, scale=scales)
def test_mod_idempotent(data, kd, scale):
    lat = make_lattice(*kd, scale)
    x = data.draw(_vec(lat.dim))
    once = mod_lattice(lat, x)
    np.testing.assert_allclose(mod_lattice(lat, once), once, atol=1e-9 * scale)


@given(data=st.data(), kd=kind_dims, scale=scales)
def test_shift_invariance(data, kd, scale):
    lat = make_lattice(*kd, scale)
    x = data.draw(_vec(lat.dim))
    z = np.array(data.draw(st.lists(st.integers(-20, 20), min_size=lat.dim, max_size=lat.dim)), dtype=float)
    shift = z @ lat.generator
    tol = 1e-9 * max(1.0, scale * 100)
    np.testing.assert_allclose(mod_lattice(lat, x + shift), mod_lattice(lat, x), atol=tol)
    np.testing.assert_allclose(cvp_quantize(lat, x + shift), cvp_quantize(lat, x) + shift, atol=tol)


@given(data=st.data(), kd=kind_dims)
def test_mod_lands_in_voronoi_cell(data, kd):
    lat = make_lattice(*kd, 1.0)
    x = data.draw(_vec(lat.dim))
    np.testing.assert_allclose(cvp_quantize(lat, mod_lattice(lat, x)), 0.0, atol=1e-12)


# -- dither and second moment ------------------------------------------------


def test_dither_scalar_moments(rng):
    lat = make_lattice("scalar-z", 1, 2.0)
    u = sample_dither(lat, rng, 1_000_000)[:, 0]
    m, se = mean_and_stderr(u)
    assert abs(m) < 3 * se
    v, se_v = mean_and_stderr(u**2)
    assert abs(v - 1 / 3) < 3 * se_v
    assert u.min() >= -1.0 and u.max() < 1.0


@pytest.mark.parametrize("kind,dim", ALL)
def test_dither_in_voronoi_cell(kind, dim, rng):
    lat = make_lattice(kind, dim, 1.3)
    u = sample_dither(lat, rng, 20_000)
    assert np.all(cvp_quantize(lat, u) == 0.0)


@pytest.mark.parametrize(
    "kind,dim,expected",
    [("scalar-z", 1, 1 / 12), ("cubic-zn", 8, 1 / 12), ("d4", 4, 13 / 120)],
)
def test_calibrate_second_moment(kind, dim, expected, rng):
    lat = make_lattice(kind, dim)
    est, se = calibrate_second_moment(lat, 1_000_000, rng)
    assert abs(est - expected) < 3 * se


def test_calibrate_rejects_small_sample(rng):
    with pytest.raises(LatticeError):
        calibrate_second_moment(make_lattice("e8"), 100, rng)


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["d4", "e8"])
def test_stored_nsm_matches_monte_carlo(kind):
    # The stored constants are checked here, not trusted as inputs.
    lat = make_lattice(kind)
    est, se = calibrate_second_moment(lat, 10_000_000, np.random.default_rng(2024))
    normalized = est / lat.volume ** (2 / lat.dim)
    assert abs(normalized - NSM[kind]) < 3 * se / lat.volume ** (2 / lat.dim)
    reference = {"d4": 0.076603, "e8": 0.071682}[kind]
    assert abs(normalized - reference) < 3 * se / lat.volume ** (2 / lat.dim) + 5e-7


def test_scale_to_power_examples(rng):
    z = scale_to_power(make_lattice("scalar-z"), 3.0)
    assert z.scale == pytest.approx(6.0, rel=1e-12)
    assert z.second_moment == pytest.approx(3.0, rel=1e-9)
    z2 = scale_to_power(make_lattice("cubic-zn", 2), 1 / 12)
    assert z2.scale == pytest.approx(1.0, rel=1e-12)
    e8 = scale_to_power(make_lattice("e8"), 10.0)
    assert e8.second_moment == pytest.approx(10.0, rel=1e-9)
    est, se = calibrate_second_moment(e8, 500_000, rng)
    assert abs(est - 10.0) < 3 * se


@given(kd=kind_dims, p=st.floats(1e-3, 1e3))
def test_scale_to_power_exact(kd, p):
    assert scale_to_power(make_lattice(*kd, 1.0), p).second_moment == pytest.approx(p, rel=1e-9)


def test_scale_to_power_rejects_bad_power():
    with pytest.raises(LatticeError):
        scale_to_power(make_lattice("d4"), 0.0)


@pytest.mark.parametrize("kind,dim", [("scalar-z", 1), ("d4", 4), ("e8", 8)])
def test_crypto_lemma(kind, dim, rng):
    lat = scale_to_power(make_lattice(kind, dim), 5.0)
    for v in (np.zeros(dim), 1e3 * np.ones(dim) + rng.normal(size=dim)):
        u = sample_dither(lat, rng, 200_000)
        out = mod_lattice(lat, v - u)
        m, se = mean_and_stderr(np.sum(out**2, axis=1) / dim)
        assert abs(m - lat.second_moment) < 3 * se


def test_lattice_is_immutable():
    lat = make_lattice("e8")
    with pytest.raises(ValueError):
        lat.base_generator[0, 0] = 5.0
    assert math.isclose(lat.generator[0, 0], 2.0)
