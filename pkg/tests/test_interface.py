import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helegraph.interface import (ClassKParams, DiniModulus, class_k_check, make_interface,
                                 pairwise_seminorm, seminorm)

from conftest import TWO_PI, grid


def test_flat_interface_has_zero_gradient(flat):
    f = flat(1.0, 64)
    assert np.all(f.gradient("spectral") == 0)
    assert np.all(f.gradient("centered") == 0)


def test_spectral_gradient_exact_on_band_limited_data():
    x = grid(64)
    f = make_interface(1 + 0.1 * np.cos(x), TWO_PI, 2.0)
    assert np.max(np.abs(f.gradient() + 0.1 * np.sin(x))) <= 1e-10


def test_sawtooth_accepted_at_construction():
    x = grid(64)
    f = make_interface(1 + 0.3 * (x / TWO_PI - np.floor(x / TWO_PI + 0.5)), TWO_PI, 2.0)
    assert f.nx == 64


@pytest.mark.parametrize("samples, msg", [
    (np.ones(7), "even"),
    (np.ones(6), "even"),
    (np.r_[np.ones(7), np.nan], "finite"),
    (np.r_[np.ones(7), np.inf], "finite"),
])
def test_make_interface_rejects(samples, msg):
    with pytest.raises(ValueError, match=msg):
        make_interface(samples, TWO_PI, 2.0)


def test_samples_are_read_only(flat):
    f = flat()
    with pytest.raises(ValueError):
        f.samples[0] = 3.0


def test_shift_and_evaluate(cosine):
    f = cosine(amp=0.3, n=32)
    g = f.shifted(5)
    np.testing.assert_allclose(g.samples, f.evaluate(f.x + 5 * f.dx), atol=1e-12)
    np.testing.assert_allclose(f.evaluate(0.3, 1), -0.3 * math.sin(0.3), atol=1e-12)


K = ClassKParams(0.2, 2.0, 1.0, DiniModulus("holder", 0.5))


def test_class_k_constant_member(flat):
    rep = class_k_check(flat(1.0), K)
    assert rep.member and rep.dini_constant == 0.0


def test_class_k_cosine_member(cosine):
    assert class_k_check(cosine(amp=0.5), K).member


def test_class_k_violation_named(flat):
    rep = class_k_check(flat(0.1), K)
    assert not rep.member
    assert "f <= delta" in rep.violations


@pytest.mark.parametrize("c", [1.0, 0.5])
@pytest.mark.parametrize("kind", ["lipschitz", "holder(0.5)", "holder(0.1)", DiniModulus("log", power=2.0)])
def test_seminorm_of_constant_is_zero(flat, c, kind):
    assert seminorm(flat(c), kind).value == 0.0


def test_lipschitz_of_cosine_against_brute_force():
    x = grid(4096)
    v = np.cos(x)
    d = np.abs(v[:, None] - v[None, :])
    dist = np.abs(x[:, None] - x[None, :])
    dist = np.minimum(dist, TWO_PI - dist)
    np.fill_diagonal(dist, 1.0)
    oracle = float((d / dist).max())
    f = make_interface(np.cos(grid(256)), TWO_PI, 2.0)
    rep = seminorm(f, "lipschitz")
    assert abs(rep.value - 1.0) < 1e-3
    assert abs(oracle - 1.0) < 1e-6
    i, j = rep.witness_pair
    dij = min(abs(i - j), 256 - abs(i - j)) * f.dx
    assert math.isclose(abs(f.samples[i] - f.samples[j]) / dij, rep.value)


def _rough_profile(n):
    x = grid(n)
    return 1 + 0.2 * np.abs(np.sin(x / 2)) ** 1.5


def _brute_holder(v, dx, g):
    n = v.size
    idx = np.arange(n)
    k = np.abs(idx[:, None] - idx[None, :])
    k = np.minimum(k, n - k)
    np.fill_diagonal(k, 1)
    return float((np.abs(v[:, None] - v[None, :]) / (k * dx) ** g).max())


def test_holder_of_rough_gradient():
    vals = {}
    for n in (128, 512):
        f = make_interface(_rough_profile(n), TWO_PI, 2.0)
        for g in (0.5, 0.9):
            rep = seminorm(f, f"holder({g})", backend="centered")
            assert math.isclose(rep.value, _brute_holder(f.grad_centered, f.dx, g), rel_tol=1e-12)
            vals[n, g] = rep.value
    assert vals[512, 0.5] < 1.1 * vals[128, 0.5]
    assert vals[512, 0.9] > 1.5 * vals[128, 0.9]


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), seed=st.integers(0, 2**16))
def test_seminorm_homogeneous(lam, seed):
    rng = np.random.default_rng(seed)
    v = 1 + 0.1 * rng.standard_normal(32)
    f = make_interface(v, TWO_PI, 2.0)
    g = make_interface(lam * v, TWO_PI, 2.0)
    for kind in ("lipschitz", "holder(0.25)"):
        assert math.isclose(seminorm(g, kind).value, abs(lam) * seminorm(f, kind).value, rel_tol=1e-12)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2), seed=st.integers(0, 2**16))
def test_gradient_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, 32))
    fu, fv = make_interface(u, 1.0, 2.0), make_interface(v, 1.0, 2.0)
    fw = make_interface(a * u + b * v, 1.0, 2.0)
    for backend in ("spectral", "centered"):
        np.testing.assert_allclose(fw.gradient(backend), a * fu.gradient(backend) + b * fv.gradient(backend),
                                   atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(amp=st.floats(0, 0.9), delta=st.floats(0.05, 0.9), m=st.floats(0.05, 2.0),
       dd=st.floats(0, 0.04), dm=st.floats(0, 1))
def test_class_k_monotone(amp, delta, m, dd, dm):
    f = make_interface(1 + amp * np.cos(grid(32)), TWO_PI, 2.0)
    small = class_k_check(f, ClassKParams(delta, 2.0, m))
    big = class_k_check(f, ClassKParams(delta - dd, 2.0, m + dm))
    assert big.member or not small.member


@pytest.mark.parametrize("mod, expected", [
    (DiniModulus("holder", 0.5), 2.0),
    (DiniModulus("holder", 1.0), 1.0),
])
def test_dini_integral_holder(mod, expected):
    assert mod.dini_integral() == expected


def test_dini_integral_log_finite_and_matches_quadrature():
    import mpmath as mp

    mod = DiniModulus("log", power=2.0)
    # s = exp(-u) turns int_0^1 rho(s)/s ds into int_0^inf rho(exp(-u)) du
    direct = float(mp.quad(lambda u: mp.log(mp.e + mp.exp(u)) ** -2, [0, 10, 100, mp.inf]))
    assert math.isfinite(mod.dini_integral())
    assert mod.dini_integral() == pytest.approx(direct, rel=1e-8)


@pytest.mark.parametrize("kw", [dict(kind="holder", beta=0.0), dict(kind="holder", beta=1.5),
                                dict(kind="log", power=1.0), dict(kind="wave")])
def test_bad_moduli_rejected(kw):
    with pytest.raises(ValueError):
        DiniModulus(**kw)


def test_class_params_invariants():
    with pytest.raises(ValueError):
        ClassKParams(1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        ClassKParams(0.2, 2.0, 0.0)


def test_pairwise_seminorm_witness():
    v = np.zeros(16)
    v[3] = 1.0
    rep = pairwise_seminorm(v, 0.5, lambda d: d)
    assert rep.value == 2.0 and 3 in rep.witness_pair
