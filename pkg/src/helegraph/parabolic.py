"""Kernel class L_Lambda, extremal operators and the difference-quotient residual harness.

All singular integrals are taken over one period, |h| <= P/2, with the
trapezoid rule on the grid offsets h_k = k dx. The shell |h| <= 2 dx is
replaced by its Taylor value u''(x) int_0^{2dx} h^2 K(h) dh.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .interface import pairwise_seminorm

__all__ = [
    "KernelClassParams",
    "LinearMember",
    "ResidualReport",
    "ScalingReport",
    "difference_quotient_check",
    "extremal",
    "linear_apply",
    "random_member",
    "scaling_check",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class KernelClassParams:
    Lambda: float = 2.0
    r0: float = 1.0
    n: int = 1

    def __post_init__(self):
        if not self.Lambda >= 1.0:
            raise ValueError("Lambda must be >= 1")
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if self.n != 1:
            raise ValueError("only one-dimensional interfaces are supported")


def _gauss(fn, a: float, b: float) -> float:
    x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    return float(0.5 * (b - a) * np.sum(_GL_W * fn(x)))


def _annulus_moment(K, rho: float, r0: float, pieces: int = 64) -> float:
    """int_{rho < |h| < r0} h K(h) dh (signed; zero for even K)."""
    if rho >= r0:
        return 0.0
    edges = np.geomspace(rho, r0, pieces + 1)
    return sum(_gauss(lambda h: h * (K(h) - K(-h)), a, b) for a, b in zip(edges[:-1], edges[1:]))


@dataclass(frozen=True)
class LinearMember:
    """L u = b u' + int [u(x+h) - u(x) - 1_{|h|<r0} u'(x) h] K(h) dh with verified class conditions."""

    b: float
    K: Callable = field(repr=False)
    params: KernelClassParams = KernelClassParams()
    h_ladder: np.ndarray = field(default=None, repr=False)
    rho_ladder: np.ndarray = field(default=None, repr=False)
    verified: bool = False
    bound_ratio: float = float("nan")
    drift_sup: float = float("nan")

    @classmethod
    def build(cls, b: float, K: Callable, params: KernelClassParams, h_max: float = 10.0,
              n_ladder: int = 200) -> "LinearMember":
        h = np.geomspace(1e-4, h_max, n_ladder)
        h = np.concatenate([h, -h])
        kh2 = np.asarray(K(h), dtype=float) * h**2
        lam = params.Lambda
        ratio = float(max(kh2.max() / lam, 1.0 / (lam * kh2.min()))) if kh2.min() > 0 else float("inf")
        rho = np.geomspace(1e-4, params.r0, 30)
        sup = max(abs(b - _annulus_moment(K, r, params.r0)) for r in rho)
        ok = bool(ratio <= 1.0 + 1e-12 and sup <= lam + 1e-12)
        return cls(b=b, K=K, params=params, h_ladder=h, rho_ladder=rho, verified=ok,
                   bound_ratio=ratio, drift_sup=sup)

    def rescaled(self, r: float) -> "LinearMember":
        """Member acting on u_r(x) = u(r x)/r: K_r(h) = r^2 K(r h), b_r = b - int_{r r0 < |s| < r0} s K."""
        K = self.K
        b_r = self.b - _annulus_moment(K, r * self.params.r0, self.params.r0)
        return LinearMember.build(b_r, lambda h: r**2 * K(r * h), self.params)

    def is_even(self, n: int = 64) -> bool:
        h = np.geomspace(1e-3, 10.0, n)
        return bool(np.allclose(self.K(h), self.K(-h), rtol=1e-14, atol=0))


def random_member(rng: np.random.Generator, params: KernelClassParams, symmetric: bool = True) -> LinearMember:
    """Even kernel K(h) = g(|h|)/h^2 with g a random smooth function in [1/Lambda, Lambda] and |b| <= Lambda.

    ``symmetric=False`` keeps K even but draws a nonzero drift, the general-b case.
    """
    lam = params.Lambda
    lo, hi = math.log(1.0 / lam), math.log(lam)
    mid, amp = 0.5 * (lo + hi), 0.5 * (hi - lo) * rng.uniform(0.0, 1.0)
    w = rng.uniform(0.2, 3.0, 4)
    ph = rng.uniform(0, 2 * np.pi, 4)

    def K(h):
        h = np.asarray(h, dtype=float)
        s = sum(np.sin(4 * wi * np.log1p(np.abs(h)) + pi) for wi, pi in zip(w, ph)) / 4
        return np.exp(mid + amp * s) / h**2

    b = 0.0 if symmetric else rng.uniform(-lam, lam)
    return LinearMember.build(b, K, params)


def _grid(u: np.ndarray, period: float):
    n = u.size
    dx = period / n
    k = np.arange(n // 2 + 1)
    return n, dx, k * dx


def _derivatives(u: np.ndarray, dx: float):
    du = (np.roll(u, -1) - np.roll(u, 1)) / (2 * dx)
    d2u = (np.roll(u, -1) - 2 * u + np.roll(u, 1)) / dx**2
    return du, d2u


def _trapezoid_weights(n: int, dx: float) -> np.ndarray:
    """Weights for offsets k = 0..n/2: zero inside the shell, half at k = 2 and k = n/2."""
    w = np.full(n // 2 + 1, dx)
    w[:2] = 0.0
    w[2] *= 0.5
    w[-1] *= 0.5
    return w


def linear_apply(u, member: LinearMember, period: float) -> np.ndarray:
    """Apply L_{K,b} to periodic samples u."""
    u = np.asarray(u, dtype=float)
    n, dx, h = _grid(u, period)
    du, d2u = _derivatives(u, dx)
    w = _trapezoid_weights(n, dx)
    with np.errstate(divide="ignore"):
        kp = np.where(w > 0, member.K(np.where(h > 0, h, 1.0)), 0.0)
        km = np.where(w > 0, member.K(-np.where(h > 0, h, 1.0)), 0.0)
    hc = np.where(h < member.params.r0, h, 0.0)
    wkp, wkm = w * kp, w * km
    integral = kernels.linear_sum(u, du, wkp, wkm, hc)
    shell = 2 * dx
    m2 = _gauss(lambda s: 0.5 * s**2 * (member.K(s) + member.K(-s)), 0.0, shell)
    return member.b * du + integral + d2u * m2


def extremal(u, params: KernelClassParams, sign: str, period: float) -> np.ndarray:
    """M+ u = Lambda |u'| + int_0^{P/2} F(u(x+h) + u(x-h) - 2u(x)) h^-2 dh,

    F(d) = Lambda d for d > 0 and d / Lambda for d < 0; M- is the mirror image
    with the roles of Lambda and 1/Lambda exchanged and -Lambda |u'|.
    """
    u = np.asarray(u, dtype=float)
    n, dx, h = _grid(u, period)
    du, d2u = _derivatives(u, dx)
    w = _trapezoid_weights(n, dx)
    with np.errstate(divide="ignore"):
        wk = np.where(w > 0, w / np.where(h > 0, h, 1.0) ** 2, 0.0)
    lam = params.Lambda
    if sign == "plus":
        lp, lm, s = lam, 1.0 / lam, 1.0
    elif sign == "minus":
        lp, lm, s = 1.0 / lam, lam, -1.0
    else:
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    integral = kernels.extremal_sum(u, wk, lp, lm)
    shell = 2 * dx * d2u
    shell = np.where(shell > 0, lp * shell, lm * shell)
    return s * lam * np.abs(du) + integral + shell


@dataclass
class ScalingReport:
    r: float
    max_error: dict
    member_reverified: bool
    passed: bool
    tol: float

    def to_dict(self) -> dict:
        return {"r": self.r, "max_error": self.max_error, "member_reverified": self.member_reverified,
                "passed": self.passed, "tol": self.tol}


def scaling_check(u: Callable, r: float, params: KernelClassParams, period: float = 16.0, nx: int = 512,
                  member: LinearMember | None = None, tol: float = 1e-4) -> ScalingReport:
    """Check M(u_r)(x_j) = M(u)(r x_j) for u_r(x) = u(r x)/r.

    u_r is sampled on x_j = j P / nx over the period P and u on the matching
    nodes r x_j over the period r P, so both sides use the same node count.
    """
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    if abs(math.log2(r) - round(math.log2(r))) > 1e-12:
        raise ValueError("r must be a power of 2 for matched grids")
    x = np.arange(nx) * period / nx
    ur = np.asarray(u(r * x), dtype=float) / r
    uo = np.asarray(u(r * x), dtype=float)
    err = {}
    for sign in ("plus", "minus"):
        a = extremal(ur, params, sign, period)
        b = extremal(uo, params, sign, r * period)
        err[sign] = float(np.abs(a - b).max())
    ok_member = True
    if member is not None:
        ok_member = member.rescaled(r).verified
    passed = max(err.values()) <= tol and ok_member
    return ScalingReport(r=r, max_error=err, member_reverified=ok_member, passed=passed, tol=tol)


@dataclass
class ResidualReport:
    rows: list
    A: float
    tol: float
    min_frac_sub: float
    min_frac_super: float
    gamma_fit: float
    passed: bool
    threshold: float = 0.95

    HEADER = ("t", "h", "frac_sub_ok", "frac_super_ok", "holder_seminorm")

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.HEADER)
        for row in self.rows:
            wr.writerow([repr(float(row[k])) for k in self.HEADER])
        return buf.getvalue()


def difference_quotient_check(snapshots, h_list, params: KernelClassParams, A: float, period: float,
                              gamma: float = 0.1, tol: float = 1e-8, threshold: float = 0.95) -> ResidualReport:
    """Sub/supersolution residuals of v_h = (u(x+h) - u(x))/h along a trajectory.

    ``snapshots`` is a sequence of (t, samples) with at least three entries;
    ``h_list`` holds positive grid offsets (integers). At interior times dt v_h
    is a centered difference and the report counts nodes where
    dt v - M+ v <= A + tol and dt v - M- v >= -(A + tol).
    """
    snaps = [(float(t), np.asarray(u, dtype=float)) for t, u in snapshots]
    if len(snaps) < 3:
        raise ValueError("need at least three snapshots")
    n = snaps[0][1].size
    dx = period / n
    rows = []
    for k in h_list:
        k = int(k)
        if k < 1:
            raise ValueError("h offsets must be positive integers")
        hval = k * dx
        vs = [(t, (np.roll(u, -k) - u) / hval) for t, u in snaps]
        for i in range(1, len(vs) - 1):
            (t0, v0), (t1, v1), (t2, v2) = vs[i - 1], vs[i], vs[i + 1]
            dt_v = (v2 - v0) / (t2 - t0)
            sub = dt_v - extremal(v1, params, "plus", period) <= A + tol
            sup = dt_v - extremal(v1, params, "minus", period) >= -(A + tol)
            hold = pairwise_seminorm(v1, dx, lambda d: d**gamma).value
            rows.append({"t": t1, "h": hval, "frac_sub_ok": float(sub.mean()),
                         "frac_super_ok": float(sup.mean()), "holder_seminorm": hold})
    fsub = min(r["frac_sub_ok"] for r in rows)
    fsup = min(r["frac_super_ok"] for r in rows)
    gamma_fit = _holder_trend(rows)
    return ResidualReport(rows=rows, A=A, tol=tol, min_frac_sub=fsub, min_frac_super=fsup,
                          gamma_fit=gamma_fit, passed=fsub >= threshold and fsup >= threshold,
                          threshold=threshold)


def _holder_trend(rows) -> float:
    """Exponent g in max_{[t0/2, t0]} [v_h]_gamma ~ t0^-g over the available t0 (all h pooled)."""
    ts = np.array(sorted({r["t"] for r in rows}))
    if ts.size < 4:
        return float("nan")
    t0s = ts[-1] * np.array([0.25, 0.5, 1.0])
    vals = []
    for t0 in t0s:
        sel = [r["holder_seminorm"] for r in rows if t0 / 2 - 1e-12 <= r["t"] <= t0 + 1e-12]
        vals.append(max(sel) if sel else np.nan)
    vals = np.array(vals)
    good = np.isfinite(vals) & (vals > 0)
    if good.sum() < 2:
        return float("nan")
    return float(-np.polyfit(np.log(t0s[good]), np.log(vals[good]), 1)[0])
