"""Grid truncation, Whitney decompositions, partitions of unity and the projections pi_m.

Level m uses the lattice G_m = h_m Z^N with h_m = 2^-m and the window B_{2^m}.

Cube construction (one of several lattice-invariant variants): the fundamental
cell [0, h]^N is subdivided dyadically; a cube is accepted as soon as
dist(Q, G_m) >= diam(Q)/2, otherwise it is split. Accepted cubes therefore
satisfy diam/2 <= dist < 3 diam. Subdivision stops at ``depth`` levels; the
uncovered remainder consists of cubes touching a lattice point, and points
there are evaluated by the limit of the construction (every cube near a
lattice point y has nearest grid point y, so the extensions reduce to the
data at y). The window decomposition is the fundamental family translated
by every lattice vector, which makes it translation invariant by
construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import BSpline

__all__ = [
    "GridSamples",
    "WhitneyDecomposition",
    "approximate",
    "decompose",
    "discrete_gradient",
    "extend0",
    "extend1",
    "fractional_laplacian",
    "project",
]

C1 = 0.5
C2 = 3.0
EXPAND = 9.0 / 8.0
MAX_LEVEL = {1: 12, 2: 7}

_STEP = BSpline.basis_element(np.arange(5.0), extrapolate=False).antiderivative()


def _theta(t):
    """C^3 plateau: 1 for |t| <= 1, 0 for |t| >= 9/8 (integrated cubic B-spline)."""
    a = np.abs(np.asarray(t, dtype=float))
    s = (EXPAND - a) / (EXPAND - 1.0) * 4.0
    return np.where(s >= 4.0, 1.0, np.where(s <= 0.0, 0.0, np.nan_to_num(_STEP(np.clip(s, 0, 4)))))


def _theta_grad_max() -> float:
    s = np.linspace(1.0, EXPAND, 2001)
    v = _theta(s)
    return float(np.max(np.abs(np.diff(v) / np.diff(s))))


@dataclass(frozen=True)
class WhitneyDecomposition:
    """Fundamental cubes of [0, h]^N; lows[k] is the lower corner, sides[k] the side length."""

    m: int
    N: int
    depth: int
    lows: np.ndarray = field(repr=False)
    sides: np.ndarray = field(repr=False)
    nearest: np.ndarray = field(repr=False)
    grad_constant: float = float("nan")

    @property
    def h(self) -> float:
        return 2.0**-self.m

    @property
    def radius(self) -> float:
        return 2.0**self.m

    @property
    def diams(self) -> np.ndarray:
        return self.sides * math.sqrt(self.N)

    @property
    def centers(self) -> np.ndarray:
        return self.lows + 0.5 * self.sides[:, None]

    def __len__(self):
        return self.sides.size

    # ------------------------------------------------------------------ geometry
    def cubes_in_window(self, max_cells: int | None = None):
        """Translate the fundamental cubes over all cells meeting the window (generator of arrays)."""
        h, R = self.h, self.radius
        n = int(math.ceil(R / h))
        if max_cells is not None:
            n = min(n, max_cells)
        rng = range(-n, n)
        if self.N == 1:
            for i in rng:
                yield np.array([i * h])
        else:
            for i in rng:
                for j in rng:
                    yield np.array([i * h, j * h])

    def translated(self, z) -> "WhitneyDecomposition":
        """Fundamental family re-expressed after translating every cube by the lattice vector z."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(np.abs(z / self.h - np.round(z / self.h)) > 0):
            raise ValueError("z must be a lattice vector")
        lows = self.lows + z
        cell = np.floor(lows / self.h) * self.h
        return WhitneyDecomposition(self.m, self.N, self.depth, lows - cell, self.sides,
                                    self.nearest + z - cell, self.grad_constant)

    def cube_set(self) -> set:
        return {(tuple(lo), s) for lo, s in zip(self.lows.tolist(), self.sides.tolist())}

    # ------------------------------------------------------------------ partition
    def _local(self, x: np.ndarray):
        """For points x (P, N): candidate cubes from the 3^N surrounding cells.

        Returns (psi, yhat) with psi (P, C) unnormalised weights and yhat (C, P, N)
        the nearest grid points of the candidate cubes.
        """
        h = self.h
        cell = np.floor(x / h) * h
        offs = np.array(np.meshgrid(*[[-1, 0, 1]] * self.N, indexing="ij")).reshape(self.N, -1).T * h
        psis, yhats = [], []
        for o in offs:
            base = cell + o
            ctr = base[:, None, :] + self.centers[None, :, :]
            t = (x[:, None, :] - ctr) / (0.5 * self.sides[None, :, None])
            psi = np.prod(_theta(t), axis=2)
            psis.append(psi)
            yhats.append(base[:, None, :] + self.nearest[None, :, :])
        return np.concatenate(psis, axis=1), np.concatenate(yhats, axis=1)

    def near_grid(self, x: np.ndarray):
        """Mask of points inside the unresolved neighbourhood of a lattice point and that point."""
        h = self.h
        y = np.round(x / h) * h
        d = np.linalg.norm(x - y, axis=1)
        return d <= self.sides.min() * EXPAND * math.sqrt(self.N), y

    def weights(self, x):
        """Partition weights phi_k(x) over candidate cubes plus the nearest grid point of each."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.N:
            x = x.reshape(-1, self.N)
        psi, yhat = self._local(x)
        tot = psi.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            phi = np.where(tot > 0, psi / tot, 0.0)
        return phi, yhat, tot[:, 0]

    def partition_sum(self, x) -> np.ndarray:
        phi, _, _ = self.weights(x)
        return phi.sum(axis=1)

    # ------------------------------------------------------------------ audits
    def cube_properties(self) -> dict:
        """The four cube-lemma properties checked on the fundamental family and its neighbours."""
        lows, sides = self.lows, self.sides
        highs = lows + sides[:, None]
        h = self.h
        # 1. disjoint interiors
        disjoint = True
        for k in range(len(self)):
            ov = np.all((np.minimum(highs[k], highs) - np.maximum(lows[k], lows)) > 1e-15 * h, axis=1)
            ov[k] = False
            if ov.any():
                disjoint = False
                break
        # 2. coverage of the cell minus the lattice up to the unresolved corner cubes
        vol = float(np.sum(sides**self.N))
        smallest = sides.min()
        residual = 2**self.N * smallest**self.N
        covered = abs(vol + residual - h**self.N) <= 1e-12 * h**self.N
        # 3. distance comparable to diameter
        ratio = self._dist_to_lattice() / self.diams
        comparable = bool(ratio.min() >= C1 - 1e-12 and ratio.max() <= C2 + 1e-12)
        # 4. bounded overlap of expanded cubes and comparable sizes of touching cubes
        overlap, size_ok = self._overlap_audit()
        return {
            "disjoint_interiors": bool(disjoint),
            "covers_complement": bool(covered),
            "dist_comparable_to_diam": comparable,
            "bounded_overlap": bool(overlap <= 4**self.N and size_ok),
            "ratio_range": [float(ratio.min()), float(ratio.max())],
            "max_overlap": int(overlap),
            "uncovered_volume": float(residual),
        }

    def _dist_to_lattice(self) -> np.ndarray:
        h = self.h
        lo, hi = self.lows, self.lows + self.sides[:, None]
        # distance from a box inside [0,h]^N to the nearest cell corner
        gap = np.minimum(lo, h - hi)
        gap = np.maximum(gap, 0.0)
        return np.linalg.norm(gap, axis=1) if self.N > 1 else gap[:, 0]

    def _all_neighbour_cubes(self):
        h = self.h
        offs = np.array(np.meshgrid(*[[-1, 0, 1]] * self.N, indexing="ij")).reshape(self.N, -1).T * h
        lows = np.concatenate([self.lows + o for o in offs])
        sides = np.tile(self.sides, len(offs))
        return lows, sides

    def _overlap_audit(self):
        lows, sides = self._all_neighbour_cubes()
        c = lows + 0.5 * sides[:, None]
        half = 0.5 * EXPAND * sides
        worst, size_ok = 0, True
        for k in range(len(self)):
            ck, hk = self.centers[k], 0.5 * EXPAND * self.sides[k]
            touch = np.all(np.abs(c - ck) < half[:, None] + hk, axis=1)
            # overlap count at the centre of cube k
            inside = np.all(np.abs(c - ck) < half[:, None], axis=1)
            worst = max(worst, int(inside.sum()))
            r = sides[touch] / self.sides[k]
            if r.min() < 0.25 - 1e-12 or r.max() > 4 + 1e-12:
                size_ok = False
        return worst, size_ok

    def partition_properties(self, n_points: int = 1000, seed: int = 0) -> dict:
        """Sum to one, values in [0, 1], support in Q*, gradient bound C/diam at random points."""
        rng = np.random.default_rng(seed)
        x = rng.uniform(0, self.h, size=(n_points, self.N))
        near, _ = self.near_grid(x)
        x = x[~near]
        phi, yhat, _ = self.weights(x)
        s = phi.sum(axis=1)
        psi, _ = self._local(x)
        # support: psi > 0 only for cubes whose Q* contains x (true by construction of theta)
        lows, sides = self._all_neighbour_cubes()
        cell = np.floor(x / self.h) * self.h
        ctr = cell[:, None, :] + (lows + 0.5 * sides[:, None])[None]
        inside = np.all(np.abs(x[:, None, :] - ctr) <= 0.5 * EXPAND * sides[None, :, None], axis=2)
        support_ok = bool(np.all((psi > 0) <= inside))
        grad = self._gradient_constant(x[: min(200, len(x))])
        return {
            "sum_to_one": bool(np.all(np.abs(s - 1.0) <= 1e-12)),
            "range_0_1": bool(phi.min() >= 0.0 and phi.max() <= 1.0 + 1e-15),
            "support_in_expanded_cube": support_ok,
            "gradient_bound": bool(grad <= self.grad_constant * (1 + 1e-6)),
            "max_sum_error": float(np.abs(s - 1.0).max()),
            "gradient_constant": float(grad),
        }

    def _gradient_constant(self, x: np.ndarray) -> float:
        """max_k |grad phi_k(x)| diam(Q_k) by central differences."""
        if len(x) == 0:
            return 0.0
        eps = self.sides.min() * 1e-3
        phi0, _, _ = self.weights(x)
        diam = np.tile(self.diams, 3**self.N)
        g2 = np.zeros_like(phi0)
        for j in range(self.N):
            e = np.zeros(self.N)
            e[j] = eps
            gp, _, _ = self.weights(x + e)
            gm, _, _ = self.weights(x - e)
            g2 += ((gp - gm) / (2 * eps)) ** 2
        return float(np.max(np.sqrt(g2) * diam[None, :]))

    def to_json(self) -> str:
        cubes = [{"low": lo, "side": s, "center": c, "diameter": d, "nearest": y}
                 for lo, s, c, d, y in zip(self.lows.tolist(), self.sides.tolist(), self.centers.tolist(),
                                           self.diams.tolist(), self.nearest.tolist())]
        return json.dumps({"m": self.m, "N": self.N, "depth": self.depth, "c1": C1, "c2": C2,
                           "expand": EXPAND, "grad_constant": self.grad_constant, "cubes": cubes},
                          sort_keys=True, indent=1)


def decompose(m: int, N: int = 1, depth: int | None = None) -> WhitneyDecomposition:
    """Whitney decomposition of the complement of G_m, built on one cell and tiled."""
    if N not in (1, 2):
        raise ValueError("N must be 1 or 2")
    if m > MAX_LEVEL[N]:
        raise ValueError(f"level cap exceeded: m <= {MAX_LEVEL[N]} for N={N}")
    depth = depth if depth is not None else (40 if N == 1 else 18)
    h = 2.0**-m
    accepted_lo, accepted_s = [], []
    pending = [(np.zeros(N), h)]
    for _ in range(depth):
        nxt = []
        for lo, s in pending:
            for corner in np.array(np.meshgrid(*[[0, 1]] * N, indexing="ij")).reshape(N, -1).T:
                clo = lo + corner * (s / 2)
                chi = clo + s / 2
                gap = np.maximum(np.minimum(clo, h - chi), 0.0)
                dist = float(np.linalg.norm(gap))
                if dist >= C1 * (s / 2) * math.sqrt(N):
                    accepted_lo.append(clo)
                    accepted_s.append(s / 2)
                else:
                    nxt.append((clo, s / 2))
        pending = nxt
    lows = np.array(accepted_lo)
    sides = np.array(accepted_s)
    centers = lows + 0.5 * sides[:, None]
    nearest = np.round(centers / h) * h
    # |grad psi_Q| <= theta' * 2/side per factor; normalisation at most doubles it
    # and at most 2^N neighbouring cubes of comparable size contribute
    gc = 2.0 * _theta_grad_max() * 2.0**N * math.sqrt(N) * 2.0
    return WhitneyDecomposition(m, N, depth, lows, sides, nearest, grad_constant=gc)


@dataclass(frozen=True)
class GridSamples:
    """Lazy samples of a function on G_m, truncated to the window |x| < 2^m."""

    m: int
    N: int
    fn: Callable = field(repr=False)

    @property
    def h(self) -> float:
        return 2.0**-self.m

    @property
    def radius(self) -> float:
        return 2.0**self.m

    def in_window(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float).reshape(-1, self.N)
        return np.linalg.norm(y, axis=1) < self.radius

    def __call__(self, y) -> np.ndarray:
        """Truncated values at lattice points y (shape (P, N) or (P,) for N = 1)."""
        y = np.asarray(y, dtype=float).reshape(-1, self.N)
        inside = self.in_window(y)
        out = np.zeros(len(y))
        if inside.any():
            arg = y[inside, 0] if self.N == 1 else y[inside]
            v = np.asarray(self.fn(arg), dtype=float).reshape(-1)
            if not np.all(np.isfinite(v)):
                raise ValueError("grid samples must be finite")
            out[inside] = v
        return out

    def gradient(self, y) -> np.ndarray:
        """Centered differences of the truncated samples (zeros outside the window)."""
        y = np.asarray(y, dtype=float).reshape(-1, self.N)
        g = np.empty_like(y)
        for j in range(self.N):
            e = np.zeros(self.N)
            e[j] = self.h
            g[:, j] = (self(y + e) - self(y - e)) / (2 * self.h)
        return g


def discrete_gradient(g: GridSamples, x) -> np.ndarray:
    """Centered difference at a lattice point x; neighbours must lie in the window."""
    x = np.asarray(x, dtype=float).reshape(1, g.N)
    if np.any(np.abs(x / g.h - np.round(x / g.h)) > 1e-12):
        raise ValueError("x must be a lattice point")
    for j in range(g.N):
        e = np.zeros(g.N)
        e[j] = g.h
        if not (g.in_window(x + e)[0] and g.in_window(x - e)[0]):
            raise ValueError("neighbour outside the window")
    return g.gradient(x)[0]


def _decomp_for(g: GridSamples, dec: WhitneyDecomposition | None) -> WhitneyDecomposition:
    if dec is None:
        return decompose(g.m, g.N)
    if dec.m != g.m or dec.N != g.N:
        raise ValueError("decomposition level does not match the samples")
    return dec


def _extend(g: GridSamples, x, dec, order: int) -> np.ndarray:
    dec = _decomp_for(g, dec)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0 or (g.N == 2 and x.ndim == 1)
    x = x.reshape(-1, g.N)
    out = np.empty(len(x))
    near, y0 = dec.near_grid(x)
    if near.any():
        v = g(y0[near])
        if order == 1:
            v = v + np.sum(g.gradient(y0[near]) * (x[near] - y0[near]), axis=1)
        out[near] = v
    far = ~near
    if far.any():
        xf = x[far]
        phi, yhat, _ = dec.weights(xf)
        P, C = phi.shape
        active = phi > 0
        pts = yhat[active]
        uniq, inv = np.unique(pts, axis=0, return_inverse=True)
        vals = g(uniq)[inv.reshape(-1)]
        if order == 1:
            grads = g.gradient(uniq)[inv.reshape(-1)]
            xs = np.broadcast_to(xf[:, None, :], yhat.shape)[active]
            vals = vals + np.sum(grads * (xs - pts), axis=1)
        contrib = np.zeros((P, C))
        contrib[active] = vals
        out[far] = np.sum(phi * contrib, axis=1)
    return out[0] if scalar else out


def extend0(g: GridSamples, x, dec: WhitneyDecomposition | None = None):
    """E^0 g(x) = sum_k phi_k(x) g(yhat_k)."""
    return _extend(g, x, dec, 0)


def extend1(g: GridSamples, x, dec: WhitneyDecomposition | None = None):
    """E^1 g(x) = sum_k phi_k(x) [g(yhat_k) + grad_m g(yhat_k) . (x - yhat_k)]."""
    return _extend(g, x, dec, 1)


class Projected:
    """pi_m f = E^1_m(T_m f) as a callable."""

    def __init__(self, f: Callable, m: int, N: int = 1, dec: WhitneyDecomposition | None = None):
        self.samples = GridSamples(m, N, f)
        self.dec = _decomp_for(self.samples, dec)

    def __call__(self, x):
        return extend1(self.samples, x, self.dec)


def project(f: Callable, m: int, N: int = 1, dec: WhitneyDecomposition | None = None) -> Projected:
    return Projected(f, m, N, dec)


def fractional_laplacian(f: Callable, x, R0: float = 1.0, panels: int = 40, order: int = 16) -> np.ndarray:
    """L_Delta(f, x) = int_0^R0 (f(x+h) + f(x-h) - 2 f(x)) / h^2 dh (one dimension).

    Gauss-Legendre on geometric panels from a = 1e-5 R0. The inner piece on
    (0, a) is a f''(x) + O(a^3), with f'' taken from the second difference at a;
    starting lower would trade truncation for cancellation roundoff.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    gx, gw = np.polynomial.legendre.leggauss(order)
    a0 = 1e-5 * R0
    edges = np.geomspace(a0, R0, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    h = np.concatenate([(0.5 * (b - a) * gx + 0.5 * (a + b)).ravel(), [a0]])
    w = (0.5 * (b - a) * gw).ravel()
    fx = np.asarray(f(x), dtype=float)
    xp = (x[:, None] + h[None, :]).ravel()
    xm = (x[:, None] - h[None, :]).ravel()
    vals = np.asarray(f(np.concatenate([xp, xm])), dtype=float)
    fp, fm = vals[: xp.size].reshape(x.size, -1), vals[xp.size:].reshape(x.size, -1)
    q = (fp + fm - 2 * fx[:, None]) / h**2
    return np.sum(w * q[:, :-1], axis=1) + a0 * q[:, -1]


class Approximation:
    """J^m(f) = E^0_m T_m J(pi_m f) as a callable in x."""

    def __init__(self, J: Callable, f: Callable, m: int, N: int = 1, dec: WhitneyDecomposition | None = None):
        self.proj = project(f, m, N, dec)
        self.image = GridSamples(m, N, lambda y: J(self.proj, y))

    def __call__(self, x):
        return extend0(self.image, x, self.proj.dec)


def approximate(J: Callable, m: int, N: int = 1, dec: WhitneyDecomposition | None = None):
    """Return f -> J^m(f); ``J(g, y)`` evaluates the operator on the callable g at points y."""
    dec = dec if dec is not None else decompose(m, N)
    return lambda f: Approximation(J, f, m, N, dec)
