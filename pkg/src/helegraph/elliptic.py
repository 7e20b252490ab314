"""Bulk solves on the flattened phase rectangles.

Each phase of the strip is mapped to the reference rectangle [0, P) x [0, 1] by a
vertical scaling, y = a(x) + s(x) * yhat, with a = 0, s = f for the plus phase and
a = f, s = L - f for the minus phase. The constant-coefficient operator
div(A grad U) pulls back to the divergence-form operator div(Ahat grad V) with
Ahat = s * J A J^T, J the Jacobian of (x, y) -> (x, yhat).

The reference operator is discretised with the flux-conservative 9-point
stencil (face-averaged diagonal coefficients, centred cross terms), which gives
a symmetric matrix. Node rows j = 0 and j = Ny carry Dirichlet data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import RectBivariateSpline

from .interface import GraphInterface

log = logging.getLogger(__name__)

__all__ = [
    "BulkSolution",
    "GreensReport",
    "GrowthReport",
    "HarmonicDecayReport",
    "SolverConfig",
    "SolverError",
    "TransformedProblem",
    "boundary_flux",
    "flatten",
    "greens_boundary_ratio",
    "greens_function",
    "harmonic_measure",
    "harmonic_measure_decay",
    "linear_growth_check",
    "physical_coordinates",
    "sample_physical",
    "solve_bulk",
]

# Largest overshoot of the Dirichlet range seen by any solve in this process.
MAX_PRINCIPLE_RECORD = {"worst": 0.0}


class SolverError(RuntimeError):
    """Linear solve failed to reach the requested residual."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings shared by every bulk solve.

    ny is the number of vertical cells of the reference rectangle (Ny + 1 node rows).
    """

    ny: int = 64
    tol: float = 1e-10
    method: str = "auto"
    direct_limit: int = 2**18
    maxiter: int = 4000
    backend: str = "spectral"


@dataclass(frozen=True)
class TransformedProblem:
    phase: str
    f: GraphInterface
    A: np.ndarray
    a11: np.ndarray
    a12: np.ndarray
    a22: np.ndarray
    source: np.ndarray
    bottom: np.ndarray
    top: np.ndarray
    offset: np.ndarray
    thickness: np.ndarray
    slope: np.ndarray
    lam_min: float
    lam_max: float

    @property
    def nx(self) -> int:
        return self.a11.shape[0]

    @property
    def ny(self) -> int:
        return self.a11.shape[1] - 1

    @property
    def dx(self) -> float:
        return self.f.dx

    @property
    def dy(self) -> float:
        return 1.0 / self.ny

    @property
    def gamma_row(self) -> int:
        """Node row of the free boundary in the reference rectangle."""
        return self.ny if self.phase == "plus" else 0

    def with_data(self, bottom=None, top=None, source=None) -> "TransformedProblem":
        kw = {}
        if bottom is not None:
            kw["bottom"] = np.broadcast_to(np.asarray(bottom, float), (self.nx,)).copy()
        if top is not None:
            kw["top"] = np.broadcast_to(np.asarray(top, float), (self.nx,)).copy()
        if source is not None:
            kw["source"] = np.broadcast_to(np.asarray(source, float), self.a11.shape).copy()
        return replace(self, **kw)


@dataclass(frozen=True)
class BulkSolution:
    values: np.ndarray
    residual_norm: float
    problem: TransformedProblem = field(repr=False)
    max_principle_violation: float | None = None
    positive_offdiag: int = 0
    positive_offdiag_max: float = 0.0

    @property
    def phase(self) -> str:
        return self.problem.phase


def _check_spd(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2) or not np.allclose(A, A.T) or np.linalg.eigvalsh(A).min() <= 0:
        raise ValueError("A2 must be a symmetric positive definite 2x2 matrix")
    return A


def flatten(f: GraphInterface, phase: str, A2=None, ny: int = 64, backend: str = "spectral"):
    """Pull the phase's bulk operator back to the reference rectangle.

    Returns the pushforward coefficients with the default Dirichlet data of the
    two-phase problem: U = 1 on y = 0, U = 0 on the graph, U = -1 on y = L.
    """
    if phase not in ("plus", "minus"):
        raise ValueError(f"phase must be 'plus' or 'minus', got {phase!r}")
    L = f.strip_height
    if f.samples.min() <= 0.0 or f.samples.max() >= L:
        raise ValueError("interface must lie strictly inside the strip (0, L)")
    A = np.eye(2) if phase == "plus" or A2 is None else _check_spd(A2)
    fx = f.samples
    fp = f.gradient(backend)
    if phase == "plus":
        a, da, s, ds = np.zeros_like(fx), np.zeros_like(fx), fx, fp
    else:
        a, da, s, ds = fx, fp, L - fx, -fp
    yhat = np.arange(ny + 1) / ny
    s2 = s[:, None]
    q = -(da[:, None] + yhat[None, :] * ds[:, None]) / s2
    al, be, ga = A[0, 0], A[0, 1], A[1, 1]
    a11 = np.broadcast_to(s2 * al, q.shape).copy()
    a12 = s2 * al * q + be
    a22 = s2 * al * q * q + 2.0 * q * be + ga / s2
    tr = 0.5 * (a11 + a22)
    disc = np.sqrt(0.25 * (a11 - a22) ** 2 + a12**2)
    lam_min, lam_max = float((tr - disc).min()), float((tr + disc).max())
    if lam_min <= 0:
        raise ValueError("pushforward coefficients are not uniformly elliptic")
    nx = fx.size
    if phase == "plus":
        bottom, top = np.ones(nx), np.zeros(nx)
    else:
        bottom, top = np.zeros(nx), -np.ones(nx)
    return TransformedProblem(
        phase=phase,
        f=f,
        A=A,
        a11=a11,
        a12=a12,
        a22=a22,
        source=np.zeros_like(a11),
        bottom=bottom,
        top=top,
        offset=np.asarray(a, float).copy(),
        thickness=np.asarray(s, float).copy(),
        slope=np.asarray(fp, float).copy(),
        lam_min=lam_min,
        lam_max=lam_max,
    )


def _assemble(p: TransformedProblem):
    nx, ny = p.nx, p.ny
    m = ny - 1
    hx, hy = p.dx, p.dy
    a11, a12, a22 = p.a11, p.a12, p.a22
    a11e = 0.5 * (a11 + np.roll(a11, -1, axis=0))
    a11w = np.roll(a11e, 1, axis=0)
    a22n = 0.5 * (a22[:, :-1] + a22[:, 1:])  # face j+1/2 for j = 0..ny-1
    J = slice(1, ny)
    c = 1.0 / (4.0 * hx * hy)
    a12_e = np.roll(a12, -1, axis=0)[:, J]
    a12_w = np.roll(a12, 1, axis=0)[:, J]
    a12_n = a12[:, 2:]
    a12_s = a12[:, :-2]
    stencil = {
        (0, 0): (a11e[:, J] + a11w[:, J]) / hx**2 + (a22n[:, 1:] + a22n[:, :-1]) / hy**2,
        (1, 0): -a11e[:, J] / hx**2,
        (-1, 0): -a11w[:, J] / hx**2,
        (0, 1): -a22n[:, 1:] / hy**2,
        (0, -1): -a22n[:, :-1] / hy**2,
        (1, 1): -c * (a12_e + a12_n),
        (-1, 1): c * (a12_w + a12_n),
        (1, -1): c * (a12_e + a12_s),
        (-1, -1): -c * (a12_w + a12_s),
    }
    ii, jj = np.meshgrid(np.arange(nx), np.arange(1, ny), indexing="ij")
    rows_all = (ii * m + (jj - 1)).ravel()
    rhs = p.source[:, J].ravel().copy()
    rows, cols, vals = [], [], []
    pos_count, pos_max = 0, 0.0
    for (di, dj), coef in stencil.items():
        ni = (ii + di) % nx
        nj = jj + dj
        cf = coef.ravel()
        njr = nj.ravel()
        nir = ni.ravel()
        inner = (njr >= 1) & (njr <= ny - 1)
        rows.append(rows_all[inner])
        cols.append((nir * m + njr - 1)[inner])
        vals.append(cf[inner])
        if (di, dj) != (0, 0):
            pos = cf[inner] > 0
            pos_count += int(pos.sum())
            if pos.any():
                pos_max = max(pos_max, float(cf[inner][pos].max()))
        bot = njr == 0
        if bot.any():
            np.subtract.at(rhs, rows_all[bot], cf[bot] * p.bottom[nir[bot]])
        tp = njr == ny
        if tp.any():
            np.subtract.at(rhs, rows_all[tp], cf[tp] * p.top[nir[tp]])
    n = nx * m
    mat = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return mat, rhs, pos_count, pos_max


def solve_bulk(p: TransformedProblem, cfg: SolverConfig | None = None) -> BulkSolution:
    """Solve the reference problem to relative residual <= cfg.tol."""
    cfg = cfg or SolverConfig(ny=p.ny)
    mat, rhs, pos_count, pos_max = _assemble(p)
    n = mat.shape[0]
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    method = cfg.method
    if method == "auto":
        method = "direct" if n <= cfg.direct_limit else "krylov"
    history = []
    if method == "direct":
        lu = spla.splu(mat, permc_spec="MMD_AT_PLUS_A")
        v = lu.solve(rhs)
        res = float(np.linalg.norm(mat @ v - rhs)) / scale
        if res > cfg.tol:
            # one step of iterative refinement
            v = v + lu.solve(rhs - mat @ v)
            res = float(np.linalg.norm(mat @ v - rhs)) / scale
        history.append(res)
    elif method == "krylov":
        ilu = spla.spilu(mat, drop_tol=1e-5, fill_factor=20)
        M = spla.LinearOperator(mat.shape, ilu.solve)
        v, info = spla.gmres(
            mat, rhs, M=M, rtol=cfg.tol, atol=0.0, restart=200, maxiter=cfg.maxiter,
            callback=history.append, callback_type="pr_norm",
        )
        res = float(np.linalg.norm(mat @ v - rhs)) / scale
    else:
        raise ValueError(f"unknown solver method {cfg.method!r}")
    if not np.isfinite(res) or res > cfg.tol:
        raise SolverError(f"bulk solve residual {res:.3e} exceeds tol {cfg.tol:.1e}", history)
    values = np.empty((p.nx, p.ny + 1))
    values[:, 0] = p.bottom
    values[:, -1] = p.top
    values[:, 1:-1] = v.reshape(p.nx, p.ny - 1)
    violation = None
    if not np.any(p.source):
        lo = min(p.bottom.min(), p.top.min())
        hi = max(p.bottom.max(), p.top.max())
        violation = float(max(lo - values.min(), values.max() - hi, 0.0))
        if violation > MAX_PRINCIPLE_RECORD["worst"]:
            MAX_PRINCIPLE_RECORD["worst"] = violation
    return BulkSolution(
        values=values,
        residual_norm=res,
        problem=p,
        max_principle_violation=violation,
        positive_offdiag=pos_count,
        positive_offdiag_max=pos_max,
    )


def _one_sided(values: np.ndarray, at_top: bool, h: float) -> np.ndarray:
    """d/dyhat at the boundary row: 3-point one-sided difference plus one Richardson step."""
    v = values if not at_top else values[:, ::-1]
    sign = 1.0 if not at_top else -1.0
    d1 = (-3.0 * v[:, 0] + 4.0 * v[:, 1] - v[:, 2]) / (2.0 * h)
    d2 = (-3.0 * v[:, 0] + 4.0 * v[:, 2] - v[:, 4]) / (4.0 * h)
    return sign * (4.0 * d1 - d2) / 3.0


def boundary_flux(u: BulkSolution, edge: str) -> np.ndarray:
    """One-sided normal derivative of U on the graph, nu pointing into the plus phase.

    gamma_plus gives d+_nu U from the plus-phase solve; gamma_minus gives
    d-_nu U = -lim (U(X - t nu) - U(X))/t from the minus-phase solve.
    In both cases the value is -V_yhat * sqrt(1 + f'^2) / s at the graph row.
    """
    expected = {"gamma_plus": "plus", "gamma_minus": "minus"}
    if edge not in expected:
        raise ValueError(f"unknown edge {edge!r}")
    p = u.problem
    if expected[edge] != p.phase:
        raise ValueError(f"edge {edge} does not belong to the {p.phase} phase solve")
    dv = _one_sided(u.values, at_top=(p.phase == "plus"), h=p.dy)
    return -dv * np.sqrt(1.0 + p.slope**2) / p.thickness


def physical_coordinates(p: TransformedProblem):
    """Physical (X, Y) of every reference node, each of shape (Nx, Ny + 1)."""
    yhat = np.arange(p.ny + 1) / p.ny
    X = np.broadcast_to(p.f.x[:, None], p.a11.shape)
    Y = p.offset[:, None] + p.thickness[:, None] * yhat[None, :]
    return X, Y


def sample_physical(u: BulkSolution, X, Y) -> np.ndarray:
    """Bicubic interpolation of the solution at physical points inside the phase."""
    p = u.problem
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    f = p.f
    fx = f.evaluate(np.mod(X, f.period))
    if p.phase == "plus":
        yhat = Y / fx
    else:
        yhat = (Y - fx) / (f.strip_height - fx)
    if np.any(yhat < -1e-12) or np.any(yhat > 1 + 1e-12):
        raise ValueError("sample point lies outside the phase domain")
    pad = 4
    xs = np.arange(-pad, p.nx + pad) * p.dx
    vals = np.concatenate([u.values[-pad:], u.values, u.values[:pad]], axis=0)
    spline = RectBivariateSpline(xs, np.arange(p.ny + 1) / p.ny, vals, kx=3, ky=3)
    return spline.ev(np.mod(X, f.period), np.clip(yhat, 0.0, 1.0))


def harmonic_measure(f: GraphInterface, indicator, phase: str = "plus", A2=None,
                     cfg: SolverConfig | None = None) -> BulkSolution:
    """Bulk solution with data 1 on the indicated graph nodes and 0 on the rest of the boundary."""
    cfg = cfg or SolverConfig()
    ind = np.asarray(indicator, dtype=bool)
    if ind.shape != (f.nx,) or not ind.any():
        raise ValueError("indicator must be a nonempty boolean mask over the x-grid")
    p = flatten(f, phase, A2=A2, ny=cfg.ny, backend=cfg.backend)
    data = ind.astype(float)
    if phase == "plus":
        p = p.with_data(bottom=0.0, top=data)
    else:
        p = p.with_data(bottom=data, top=0.0)
    return solve_bulk(p, cfg)


def greens_function(f: GraphInterface, source_node, phase: str = "plus", A2=None,
                    cfg: SolverConfig | None = None) -> BulkSolution:
    """Discrete Green's function with pole at reference node (i, j).

    The load is 1/(dx*dyhat) at the node; in reference coordinates this is the
    unit-mass delta, which equals the physical unit delta after the change of
    variables, so the values are G(X, Y) in physical coordinates.
    """
    cfg = cfg or SolverConfig()
    i, j = source_node
    if not 1 <= j <= cfg.ny - 1:
        raise ValueError("Green's function source must be an interior node")
    p = flatten(f, phase, A2=A2, ny=cfg.ny, backend=cfg.backend)
    src = np.zeros_like(p.a11)
    src[i % p.nx, j] = 1.0 / (p.dx * p.dy)
    return solve_bulk(p.with_data(bottom=0.0, top=0.0, source=src), cfg)


def _boundary_distance(f: GraphInterface, phase: str, X, Y, refine: int = 8):
    """Euclidean distance from physical points to the boundary of the phase domain."""
    L = f.strip_height
    xs = np.arange(f.nx * refine) * (f.dx / refine)
    gy = f.evaluate(xs)
    X = np.atleast_1d(np.asarray(X, float))
    Y = np.atleast_1d(np.asarray(Y, float))
    dx = np.abs(np.mod(X[:, None] - xs[None, :] + 0.5 * f.period, f.period) - 0.5 * f.period)
    dgraph = np.sqrt(dx**2 + (Y[:, None] - gy[None, :]) ** 2).min(axis=1)
    dwall = Y if phase == "plus" else L - Y
    return np.minimum(dgraph, dwall)


@dataclass(frozen=True)
class GreensReport:
    C: float
    ratio_min: float
    ratio_max: float
    n_pairs: int
    r0: float
    symmetry_defect: float
    min_value: float


def greens_boundary_ratio(f: GraphInterface, cfg: SolverConfig | None = None, phase: str = "plus",
                          r0: float | None = None, depths=(2, 4, 8), n_sources: int = 2) -> GreensReport:
    """Check G |x-y|^2 / (d(x) d(y)) in [1/C, C] over boundary-regime pairs with |x-y| <= r0.

    Poles sit at a few depths below the graph; targets are all nodes within r0 of the pole
    with |x - y| >= max(d(x), d(y)).
    """
    cfg = cfg or SolverConfig()
    p = flatten(f, phase, ny=cfg.ny, backend=cfg.backend)
    X, Y = physical_coordinates(p)
    if r0 is None:
        r0 = 0.5 * float(p.thickness.min())
    ratios = []
    sym = 0.0
    gmin = np.inf
    g_row = p.gamma_row
    sols = {}
    for k in range(n_sources):
        i0 = (k * p.nx) // max(n_sources, 1)
        for dpt in depths:
            j0 = g_row - dpt if phase == "plus" else g_row + dpt
            sol = greens_function(f, (i0, j0), phase, cfg=cfg)
            sols[(i0, j0)] = sol
            G = sol.values
            gmin = min(gmin, float(G[:, 1:-1].min()))
            xs, ys = X[i0, j0], Y[i0, j0]
            dxp = np.abs(np.mod(X - xs + 0.5 * f.period, f.period) - 0.5 * f.period)
            dist = np.sqrt(dxp**2 + (Y - ys) ** 2)
            near = (dist <= r0) & (dist > 0)
            near[:, [0, -1]] = False
            if not near.any():
                continue
            dsrc = _boundary_distance(f, phase, [xs], [ys])[0]
            dt = _boundary_distance(f, phase, X[near], Y[near])
            dd = dist[near]
            regime = dd >= np.maximum(dsrc, dt)
            r = G[near][regime] * dd[regime] ** 2 / (dsrc * dt[regime])
            ratios.append(r)
    keys = list(sols)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            (ia, ja), (ib, jb) = keys[a], keys[b]
            gab = sols[keys[a]].values[ib, jb]
            gba = sols[keys[b]].values[ia, ja]
            sym = max(sym, abs(gab - gba) / max(abs(gab), 1e-300))
    r = np.concatenate(ratios) if ratios else np.array([np.nan])
    rmin, rmax = float(r.min()), float(r.max())
    return GreensReport(
        C=max(rmax, 1.0 / rmin),
        ratio_min=rmin,
        ratio_max=rmax,
        n_pairs=int(r.size),
        r0=float(r0),
        symmetry_defect=float(sym),
        min_value=float(gmin),
    )


def _inward_normal(f: GraphInterface, i0: int, backend: str):
    fp = f.gradient(backend)[i0]
    nrm = math.sqrt(1.0 + fp * fp)
    return np.array([fp / nrm, -1.0 / nrm])


@dataclass(frozen=True)
class GrowthReport:
    s: np.ndarray
    ratios: np.ndarray
    lower: float
    upper: float
    C: float


def linear_growth_check(f: GraphInterface, x0_node: int, s_values=None,
                        cfg: SolverConfig | None = None) -> GrowthReport:
    """Sample U_f(X0 + s nu)/s along the inward normal of the plus phase at a graph node."""
    cfg = cfg or SolverConfig()
    sol = solve_bulk(flatten(f, "plus", ny=cfg.ny, backend=cfg.backend), cfg)
    i0 = int(x0_node) % f.nx
    x0, y0 = f.x[i0], f.samples[i0]
    nu = _inward_normal(f, i0, cfg.backend)
    if s_values is None:
        s_values = np.geomspace(4.0 * f.samples.min() / cfg.ny, 0.2, 8)
    s = np.asarray(s_values, dtype=float)
    X = x0 + s * nu[0]
    Y = y0 + s * nu[1]
    if np.any(Y <= 0) or np.any(Y >= f.evaluate(np.mod(X, f.period))):
        raise ValueError("normal ladder leaves the plus phase")
    U = sample_physical(sol, X, Y)
    ratios = U / s
    lo, hi = float(ratios.min()), float(ratios.max())
    C = max(hi, 1.0 / lo) if lo > 0 else np.inf
    return GrowthReport(s=s, ratios=ratios, lower=lo, upper=hi, C=float(C))


@dataclass(frozen=True)
class HarmonicDecayReport:
    R: np.ndarray
    s: np.ndarray
    W: np.ndarray
    ratio_spread: np.ndarray
    alpha: float
    C: float


def harmonic_measure_decay(f: GraphInterface, x0_node: int, R_list, s_list=None,
                           cfg: SolverConfig | None = None, phase: str = "plus") -> HarmonicDecayReport:
    """Harmonic measure of the graph outside B_R(X0), sampled at X0 + s nu.

    Reports, per R, the spread max/min - 1 of W/s over the s ladder (linear growth
    from the zero boundary), and the log-log slope alpha of W/s against R.
    """
    cfg = cfg or SolverConfig()
    i0 = int(x0_node) % f.nx
    dist = np.abs(np.mod(f.x - f.x[i0] + 0.5 * f.period, f.period) - 0.5 * f.period)
    dist = np.sqrt(dist**2 + (f.samples - f.samples[i0]) ** 2)
    nu = _inward_normal(f, i0, cfg.backend)
    if phase == "minus":
        nu = -nu
    if s_list is None:
        dyp = (f.samples[i0] if phase == "plus" else f.strip_height - f.samples[i0]) / cfg.ny
        s_list = dyp * np.array([4.0, 6.0, 8.0, 12.0, 16.0])
    s = np.asarray(s_list, float)
    X = f.x[i0] + s * nu[0]
    Y = f.samples[i0] + s * nu[1]
    W = []
    for R in R_list:
        ind = dist >= R
        sol = harmonic_measure(f, ind, phase, cfg=cfg)
        W.append(sample_physical(sol, X, Y))
    W = np.array(W)
    q = W / s[None, :]
    spread = q.max(axis=1) / q.min(axis=1) - 1.0
    qm = q.mean(axis=1)
    slope = np.polyfit(np.log(np.asarray(R_list, float)), np.log(qm), 1)[0]
    alpha = float(-slope)
    C = float(np.max(qm * np.asarray(R_list, float) ** alpha))
    return HarmonicDecayReport(R=np.asarray(R_list, float), s=s, W=W, ratio_spread=spread,
                               alpha=alpha, C=C)
