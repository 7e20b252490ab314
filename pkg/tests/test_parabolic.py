import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from helegraph.parabolic import (KernelClassParams, LinearMember, difference_quotient_check, extremal, linear_apply,
                                 random_member, scaling_check)

from conftest import TWO_PI, grid

PARAMS = KernelClassParams(Lambda=2.0, r0=1.0)


def inverse_square(h):
    return 1.0 / np.asarray(h, dtype=float) ** 2


@pytest.fixture(scope="module")
def members():
    rng = np.random.default_rng(11)
    return [random_member(rng, PARAMS, symmetric=i % 2 == 0) for i in range(10)]


def bump(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2)


def test_params_validation():
    with pytest.raises(ValueError):
        KernelClassParams(Lambda=0.5)
    with pytest.raises(ValueError):
        KernelClassParams(r0=0.0)
    with pytest.raises(ValueError):
        KernelClassParams(n=2)


def test_member_verification():
    assert LinearMember.build(0.0, inverse_square, PARAMS).verified
    assert LinearMember.build(1.5, inverse_square, PARAMS).verified
    assert not LinearMember.build(2.5, inverse_square, PARAMS).verified
    assert not LinearMember.build(0.0, lambda h: 3 * inverse_square(h), PARAMS).verified
    assert not LinearMember.build(0.0, lambda h: 0.3 * inverse_square(h), PARAMS).verified


@pytest.mark.parametrize("symmetric", [True, False])
def test_random_members_verify(symmetric):
    rng = np.random.default_rng(5)
    ms = [random_member(rng, PARAMS, symmetric) for _ in range(25)]
    assert all(m.verified for m in ms)
    assert all(m.is_even() for m in ms)


def test_constant_gives_zero(members):
    u = np.full(128, 0.7)
    for m in members:
        np.testing.assert_allclose(linear_apply(u, m, TWO_PI), 0.0, atol=1e-12)
    for sign in ("plus", "minus"):
        np.testing.assert_allclose(extremal(u, PARAMS, sign, TWO_PI), 0.0, atol=1e-12)


def test_affine_window_drift_only(members):
    n, P, s = 256, 8.0, 0.3
    x = -P / 2 + np.arange(n) * P / n
    u = s * x
    dx = P / n
    for m in members:
        got = linear_apply(u, m, P)[n // 2]
        # the half-period node wraps to -P/2: its two half-weight terms contribute -s P K(P/2) dx / 2
        expected = m.b * s - s * P * float(m.K(P / 2)) * dx / 2
        assert got == pytest.approx(expected, abs=1e-12)


def test_cosine_oracle():
    member = LinearMember.build(0.0, inverse_square, PARAMS)
    x = grid(1024)
    ref = -2 * quad(lambda h: (1 - math.cos(h)) / h**2, 0, math.pi, epsabs=1e-14, limit=200)[0]
    out = linear_apply(np.cos(x), member, TWO_PI)
    assert abs(out[0] - ref) <= 1e-6
    np.testing.assert_allclose(out, ref * np.cos(x), atol=1e-6)


def test_cosine_oracle_random_member(members):
    x = grid(1024)
    for m in members[:4]:
        # even K: L cos = cos(x) int (cos h - 1) K dh - b sin(x)
        half = quad(lambda h: (math.cos(h) - 1) * m.K(h), 0, math.pi, epsabs=1e-13, limit=400)[0]
        ref = 2 * half * np.cos(x) - m.b * np.sin(x)
        np.testing.assert_allclose(linear_apply(np.cos(x), m, TWO_PI), ref, atol=1e-4)


def test_mirror_identity():
    rng = np.random.default_rng(3)
    u = np.real(np.fft.ifft(np.fft.fft(rng.standard_normal(128)) * (np.abs(np.fft.fftfreq(128, 1 / 128)) < 8)))
    a = extremal(-u, PARAMS, "plus", TWO_PI)
    b = -extremal(u, PARAMS, "minus", TWO_PI)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


def test_concave_bump_at_max():
    x = np.linspace(-8, 8, 256, endpoint=False)
    u = bump(x)
    j = int(np.argmax(u))
    assert extremal(u, PARAMS, "minus", 16.0)[j] < 0
    assert extremal(u, PARAMS, "plus", 16.0)[j] < 0
    # oracle: all second differences are negative, so M- weights them by Lambda
    ref = PARAMS.Lambda * 2 * quad(lambda h: (math.exp(-h * h) - 1) / h**2, 0, 8, epsabs=1e-12)[0]
    assert extremal(u, PARAMS, "minus", 16.0)[j] == pytest.approx(ref, rel=1e-3)


def test_bad_sign():
    with pytest.raises(ValueError):
        extremal(np.zeros(16), PARAMS, "both", TWO_PI)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.01, 100.0), seed=st.integers(0, 2**16))
def test_positive_homogeneity(lam, seed):
    rng = np.random.default_rng(seed)
    x = grid(64)
    u = sum(rng.standard_normal() * np.cos(k * x + rng.uniform(0, 6)) for k in range(1, 5))
    for sign in ("plus", "minus"):
        np.testing.assert_allclose(extremal(lam * u, PARAMS, sign, TWO_PI), lam * extremal(u, PARAMS, sign, TWO_PI),
                                   rtol=1e-10, atol=1e-10 * lam)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**16), j0=st.integers(0, 63))
def test_monotonicity_at_touching_point(seed, j0):
    rng = np.random.default_rng(seed)
    x = grid(64)
    u = sum(rng.standard_normal() * np.sin(k * x + rng.uniform(0, 6)) for k in range(1, 4))
    w = (1 - np.cos(x - x[j0])) * np.exp(0.5 * np.sin(x + rng.uniform(0, 6)))
    v = u + w
    assert np.all(v >= u) and v[j0] == u[j0]
    assert extremal(v - u, PARAMS, "plus", TWO_PI)[j0] >= 0


def test_sandwich(members):
    x = np.linspace(-8, 8, 256, endpoint=False)
    for u in (bump(x), np.sin(TWO_PI * x / 16) + 0.3 * bump(x - 1)):
        lo = extremal(u, PARAMS, "minus", 16.0)
        hi = extremal(u, PARAMS, "plus", 16.0)
        for m in members:
            lu = linear_apply(u, m, 16.0)
            assert np.all(lo <= lu + 1e-12) and np.all(lu <= hi + 1e-12)


def test_scaling_identity():
    rep = scaling_check(bump, 1.0, PARAMS)
    assert rep.passed and max(rep.max_error.values()) == 0.0


def test_scaling_half(members):
    rep = scaling_check(bump, 0.5, PARAMS, member=members[1])
    assert rep.passed and rep.member_reverified
    assert max(rep.max_error.values()) <= 1e-4
    assert set(rep.to_dict()) == {"r", "max_error", "member_reverified", "passed", "tol"}


@pytest.mark.parametrize("r", [0.3, 1.5, 0.0])
def test_scaling_incompatible(r):
    with pytest.raises(ValueError):
        scaling_check(bump, r, PARAMS)


def heat_trajectory(speed=1.0, reverse=False, n=128, dt=0.01, steps=21):
    # exact solution of u_t = L u for K = 1/h^2 on the 2 pi period
    sigma = 2 * quad(lambda h: (1 - math.cos(h)) / h**2, 0, math.pi, epsabs=1e-14)[0]
    x = grid(n)
    ts = np.arange(steps) * dt
    sgn = 1.0 if reverse else -1.0
    return [(t, np.exp(sgn * speed * sigma * t) * np.cos(x)) for t in ts]


def test_difference_quotient_exact_solution():
    rep = difference_quotient_check(heat_trajectory(), [1, 2, 4], PARAMS, A=1e-3, period=TWO_PI)
    assert rep.passed
    assert rep.min_frac_sub == 1.0 and rep.min_frac_super == 1.0


@pytest.mark.parametrize("kw", [{"reverse": True}, {"speed": 10.0}])
def test_difference_quotient_negative_controls(kw):
    rep = difference_quotient_check(heat_trajectory(**kw), [1, 2, 4], PARAMS, A=1e-3, period=TWO_PI)
    assert not rep.passed
    assert min(rep.min_frac_sub, rep.min_frac_super) < 0.8


def test_difference_quotient_flat():
    snaps = [(t, np.full(64, math.sqrt(2 * t + 1))) for t in np.linspace(0, 1, 6)]
    rep = difference_quotient_check(snaps, [1, 3], PARAMS, A=0.0, period=TWO_PI)
    assert rep.passed and rep.min_frac_sub == 1.0 and rep.min_frac_super == 1.0
    assert all(r["holder_seminorm"] == 0.0 for r in rep.rows)


def test_residual_csv():
    rep = difference_quotient_check(heat_trajectory(steps=5), [1], PARAMS, A=1e-3, period=TWO_PI)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "t,h,frac_sub_ok,frac_super_ok,holder_seminorm"
    assert len(lines) == 1 + 3


def test_residual_errors():
    snaps = heat_trajectory(steps=2)
    with pytest.raises(ValueError, match="three snapshots"):
        difference_quotient_check(snaps, [1], PARAMS, A=0.0, period=TWO_PI)
    with pytest.raises(ValueError, match="positive"):
        difference_quotient_check(heat_trajectory(steps=4), [0], PARAMS, A=0.0, period=TWO_PI)
