"""Nonlinear Dirichlet-to-Neumann operators I+, I-, the velocity H, and the Muskat reference."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import kernels
from .elliptic import SolverConfig, boundary_flux, flatten, solve_bulk
from .interface import ClassKParams, GraphInterface, class_k_check

__all__ = [
    "BoundaryLaw",
    "ClassViolation",
    "VelocityField",
    "dtn_minus",
    "dtn_plus",
    "muskat_rhs",
    "muskat_rhs_window",
    "velocity",
]


class ClassViolation(ValueError):
    """Interface left the class K(delta, L, m, rho) while strict enforcement is on."""


@dataclass(frozen=True)
class BoundaryLaw:
    """The law G(a, b) combining the one-sided fluxes, with ellipticity constants.

    kind is ``one_phase_identity`` (G = a), ``difference`` (G = a - b) or ``custom``;
    custom laws are bicubic tables ``table = (a_nodes, b_nodes, values)``.
    """

    kind: str = "one_phase_identity"
    lam: float = 1.0
    Lam: float = 1.0
    A2: tuple = ((1.0, 0.0), (0.0, 1.0))
    table: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("one_phase_identity", "difference", "custom"):
            raise ValueError(f"unknown boundary law {self.kind!r}")
        if self.kind == "custom" and self.table is None:
            raise ValueError("custom law needs a table")
        if not 0 < self.lam <= self.Lam:
            raise ValueError("need 0 < lambda <= Lambda")

    @property
    def uses_minus(self) -> bool:
        return self.kind != "one_phase_identity"

    @property
    def phases(self) -> int:
        return 2 if self.uses_minus else 1

    @property
    def A2_matrix(self) -> np.ndarray:
        return np.asarray(self.A2, dtype=float)

    def _spline(self):
        a, b, v = self.table
        return RectBivariateSpline(np.asarray(a, float), np.asarray(b, float), np.asarray(v, float))

    def __call__(self, a, b=None):
        a = np.asarray(a, dtype=float)
        if self.kind == "one_phase_identity":
            return a.copy()
        b = np.asarray(b, dtype=float)
        if self.kind == "difference":
            return a - b
        return self._spline().ev(a, b)

    def check_ellipticity(self, a_range=(0.1, 5.0), b_range=(0.1, 5.0), n: int = 25,
                          tol: float = 1e-6) -> bool:
        """Sampled finite-difference check of lambda <= dG/da <= Lambda, lambda <= -dG/db <= Lambda."""
        a = np.linspace(*a_range, n)
        b = np.linspace(*b_range, n)
        A, B = np.meshgrid(a, b, indexing="ij")
        h = 1e-5
        ga = (self(A + h, B) - self(A - h, B)) / (2 * h)
        ok = np.all(ga >= self.lam - tol) and np.all(ga <= self.Lam + tol)
        if self.uses_minus:
            gb = -(self(A, B + h) - self(A, B - h)) / (2 * h)
            ok = ok and np.all(gb >= self.lam - tol) and np.all(gb <= self.Lam + tol)
        return bool(ok)


@dataclass(frozen=True)
class VelocityField:
    values: np.ndarray
    I_plus: np.ndarray
    I_minus: np.ndarray | None
    grad_factor: np.ndarray


def _enforce(f: GraphInterface, klass: ClassKParams | None, strict: bool):
    if klass is None:
        return
    rep = class_k_check(f, klass)
    if rep.member:
        return
    msg = "interface outside class K: " + ", ".join(rep.violations)
    if strict:
        raise ClassViolation(msg)
    warnings.warn(msg, stacklevel=3)


def dtn_plus(f: GraphInterface, cfg: SolverConfig | None = None,
             klass: ClassKParams | None = None, strict: bool = True) -> np.ndarray:
    """I+(f, x): normal derivative on the graph of the harmonic function of the plus phase."""
    cfg = cfg or SolverConfig()
    _enforce(f, klass, strict)
    sol = solve_bulk(flatten(f, "plus", ny=cfg.ny, backend=cfg.backend), cfg)
    return boundary_flux(sol, "gamma_plus")


def dtn_minus(f: GraphInterface, law: BoundaryLaw | None = None, cfg: SolverConfig | None = None,
              klass: ClassKParams | None = None, strict: bool = True) -> np.ndarray:
    """I-(f, x) from tr(A2 D^2 U) = 0 above the graph, U = 0 on it and U = -1 at y = L."""
    cfg = cfg or SolverConfig()
    law = law or BoundaryLaw("difference")
    _enforce(f, klass, strict)
    p = flatten(f, "minus", A2=law.A2_matrix, ny=cfg.ny, backend=cfg.backend)
    return boundary_flux(solve_bulk(p, cfg), "gamma_minus")


def velocity(f: GraphInterface, law: BoundaryLaw, cfg: SolverConfig | None = None,
             klass: ClassKParams | None = None, strict: bool = True) -> VelocityField:
    """H(f, x) = G(I+, I-) sqrt(1 + |f'|^2), assembled nodewise."""
    cfg = cfg or SolverConfig()
    _enforce(f, klass, strict)
    ip = dtn_plus(f, cfg)
    im = dtn_minus(f, law, cfg) if law.uses_minus else None
    factor = np.sqrt(1.0 + f.gradient(cfg.backend) ** 2)
    return VelocityField(values=law(ip, im) * factor, I_plus=ip, I_minus=im, grad_factor=factor)


def muskat_rhs(f: GraphInterface, backend: str = "spectral") -> np.ndarray:
    """Periodic-window Muskat operator

        int [f(y) - f(x) - (y - x) f'(x)] / ((y - x)^2 + (f(y) - f(x))^2) dy

    over y in x + [-P/2, P/2], trapezoid rule; the node y = x takes the limit
    f''(x) / (2 (1 + f'(x)^2)).
    """
    fp = f.gradient(backend)
    fpp = f.second_derivative(backend)
    diag = 0.5 * fpp / (1.0 + fp**2)
    return kernels.muskat_sum(f.samples, fp, f.dx, diag)


def muskat_rhs_window(samples, x, slope=None, curvature=None) -> np.ndarray:
    """Muskat integral over a finite window of the line (no periodic wrap).

    Derivatives default to second-order finite differences of the samples.
    """
    f = np.asarray(samples, dtype=float)
    x = np.asarray(x, dtype=float)
    fp = np.gradient(f, x, edge_order=2) if slope is None else np.asarray(slope, float)
    if curvature is None:
        fpp = np.gradient(fp, x, edge_order=2)
    else:
        fpp = np.asarray(curvature, float)
    diag = 0.5 * fpp / (1.0 + fp**2)
    return kernels.muskat_window_sum(f, fp, x, diag)
