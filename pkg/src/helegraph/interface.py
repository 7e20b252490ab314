"""Periodic graph interfaces, their derivatives, seminorms and class-K membership."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ClassKParams",
    "DiniModulus",
    "GraphInterface",
    "MembershipReport",
    "SeminormReport",
    "class_k_check",
    "make_interface",
    "pairwise_seminorm",
    "seminorm",
    "spectral_derivative",
    "centered_derivative",
]


def spectral_derivative(values: np.ndarray, period: float, order: int = 1) -> np.ndarray:
    """Periodic Fourier derivative of uniformly sampled data.

    The Nyquist mode is dropped for odd orders so that real data stays real.
    """
    n = values.size
    coef = np.fft.rfft(values)
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=period / n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[-1] = 0.0
    return np.fft.irfft(coef * mult, n=n)


def centered_derivative(values: np.ndarray, period: float, order: int = 1) -> np.ndarray:
    dx = period / values.size
    if order == 1:
        return (np.roll(values, -1) - np.roll(values, 1)) / (2.0 * dx)
    if order == 2:
        return (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / dx**2
    raise ValueError(f"unsupported derivative order {order}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GraphInterface:
    """Samples of f at x_j = j*P/Nx on a periodic window, inside the strip 0 < y < L.

    Both gradient backends are computed at construction; ``gradient(backend)``
    selects one.
    """

    samples: np.ndarray
    period: float
    strip_height: float
    grad_spectral: np.ndarray = field(repr=False)
    grad_centered: np.ndarray = field(repr=False)
    curv_spectral: np.ndarray = field(repr=False)

    @property
    def nx(self) -> int:
        return self.samples.size

    @property
    def dx(self) -> float:
        return self.period / self.samples.size

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    def gradient(self, backend: str = "spectral") -> np.ndarray:
        if backend == "spectral":
            return self.grad_spectral
        if backend == "centered":
            return self.grad_centered
        raise ValueError(f"unknown gradient backend {backend!r}")

    def second_derivative(self, backend: str = "spectral") -> np.ndarray:
        if backend == "spectral":
            return self.curv_spectral
        return centered_derivative(self.samples, self.period, 2)

    def evaluate(self, x, derivative: int = 0) -> np.ndarray:
        """Trigonometric interpolant of the samples (or its derivative) at arbitrary x."""
        x = np.asarray(x, dtype=float)
        n = self.nx
        coef = np.fft.rfft(self.samples) / n
        k = 2.0 * np.pi * np.fft.rfftfreq(n, d=self.dx)
        w = np.full(coef.size, 2.0)
        w[0] = 1.0
        w[-1] = 1.0  # Nyquist mode counted once
        phase = np.exp(1j * np.multiply.outer(x, k))
        term = coef * w * (1j * k) ** derivative
        if derivative % 2 == 1:
            term[-1] = 0.0
        return np.real(phase @ term)

    def with_samples(self, samples: np.ndarray) -> "GraphInterface":
        return make_interface(samples, self.period, self.strip_height)

    def shifted(self, z: int) -> "GraphInterface":
        """Translate by ``z`` grid cells: result(x) = f(x + z*dx)."""
        return self.with_samples(np.roll(self.samples, -z))


def make_interface(samples, period: float, strip_height: float) -> GraphInterface:
    """Build a :class:`GraphInterface`, precomputing spectral and centered gradients."""
    f = np.asarray(samples, dtype=float).ravel()
    if f.size < 8 or f.size % 2:
        raise ValueError(f"need an even number of samples >= 8, got {f.size}")
    if not np.all(np.isfinite(f)):
        raise ValueError("interface samples must be finite")
    if not period > 0 or not strip_height > 0:
        raise ValueError("period and strip height must be positive")
    return GraphInterface(
        samples=_readonly(f),
        period=float(period),
        strip_height=float(strip_height),
        grad_spectral=_readonly(spectral_derivative(f, period)),
        grad_centered=_readonly(centered_derivative(f, period)),
        curv_spectral=_readonly(spectral_derivative(f, period, 2)),
    )


@dataclass(frozen=True)
class DiniModulus:
    """Named Dini modulus.

    ``holder``: rho(s) = s**beta with 0 < beta <= 1.
    ``log``: rho(s) = ln(e + 1/s)**(-power) with power > 1 (power = 1 is not Dini).
    """

    kind: str = "holder"
    beta: float = 0.5
    power: float = 2.0

    def __post_init__(self):
        if self.kind not in ("holder", "log"):
            raise ValueError(f"unknown modulus family {self.kind!r}")
        if self.kind == "holder" and not 0.0 < self.beta <= 1.0:
            raise ValueError("holder exponent must lie in (0, 1]")
        if self.kind == "log" and not self.power > 1.0:
            raise ValueError("log modulus needs power > 1 to be Dini")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "holder":
            return s**self.beta
        safe = np.where(s > 0, s, 1.0)
        # ln(e + 1/s) = -ln(s) + ln(1 + e s) avoids overflow for tiny s
        return np.where(s > 0, (np.log1p(np.e * safe) - np.log(safe)) ** (-self.power), 0.0)

    def dini_integral(self) -> float:
        """Integral of rho(s)/s over (0, 1).

        Holder: 1/beta. Log: with u = ln(e + 1/s) the integral becomes
        int_{ln(e+1)}^inf u**(-p) e^u / (e^u - e) du, finite exactly when p > 1.
        """
        if self.kind == "holder":
            return 1.0 / self.beta
        from scipy.integrate import quad

        p = self.power
        val, _ = quad(
            lambda u: u ** (-p) / (1.0 - np.exp(1.0 - u)), math.log(math.e + 1.0), np.inf, limit=200
        )
        return val

    def label(self) -> str:
        return f"holder({self.beta:g})" if self.kind == "holder" else f"log({self.power:g})"


@dataclass(frozen=True)
class ClassKParams:
    delta: float
    strip_height: float
    lip_bound: float
    modulus: DiniModulus = DiniModulus()

    def __post_init__(self):
        if not 0.0 < self.delta < self.strip_height / 2.0:
            raise ValueError("need 0 < delta < L/2")
        if not self.lip_bound > 0:
            raise ValueError("Lipschitz bound must be positive")


@dataclass(frozen=True)
class SeminormReport:
    kind: str
    value: float
    witness_pair: tuple[int, int]


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    violations: tuple[str, ...]
    lipschitz: float
    dini_constant: float

    def __bool__(self) -> bool:
        return self.member


def pairwise_seminorm(values: np.ndarray, dx: float, weight) -> SeminormReport:
    """sup over periodic grid pairs of |v_i - v_j| / weight(dist(i, j)).

    ``weight`` maps distances to positive denominators.
    """
    n = values.size
    best, pair = 0.0, (0, 0)
    for k in range(1, n // 2 + 1):
        diff = np.abs(np.roll(values, -k) - values)
        q = diff / float(weight(k * dx))
        i = int(np.argmax(q))
        if q[i] > best:
            best, pair = float(q[i]), (i, (i + k) % n)
    return SeminormReport(kind="", value=best, witness_pair=pair)


def _parse_kind(kind):
    if isinstance(kind, DiniModulus):
        return "dini", kind
    if isinstance(kind, str):
        if kind == "lipschitz":
            return "lipschitz", None
        if kind.startswith("holder(") and kind.endswith(")"):
            return "holder", float(kind[7:-1])
        if kind.startswith("log"):
            power = float(kind[4:-1]) if kind.startswith("log(") else 2.0
            return "dini", DiniModulus("log", power=power)
    if isinstance(kind, tuple) and kind[0] in ("holder", "dini"):
        return kind
    raise ValueError(f"unknown seminorm kind {kind!r}")


def seminorm(f: GraphInterface, kind, backend: str = "centered") -> SeminormReport:
    """Discrete seminorm of f.

    ``lipschitz`` acts on f itself; ``holder(g)`` and Dini moduli act on the
    gradient of f, as in the C^{1,g} and Dini-gradient norms.
    """
    name, arg = _parse_kind(kind)
    if name == "lipschitz":
        rep = pairwise_seminorm(f.samples, f.dx, lambda d: d)
        label = "lipschitz"
    elif name == "holder":
        rep = pairwise_seminorm(f.gradient(backend), f.dx, lambda d: d**arg)
        label = f"holder({arg:g})"
    else:
        rep = pairwise_seminorm(f.gradient(backend), f.dx, lambda d: float(arg(d)))
        label = f"dini({arg.label()})"
    return SeminormReport(kind=label, value=rep.value, witness_pair=rep.witness_pair)


def class_k_check(f: GraphInterface, k: ClassKParams, backend: str = "centered") -> MembershipReport:
    """Report membership of f in K(delta, L, m, rho) with a list of violated constraints."""
    if not math.isclose(f.strip_height, k.strip_height):
        raise ValueError("interface and class parameters disagree on the strip height")
    violations = []
    if f.samples.min() <= k.delta:
        violations.append("f <= delta")
    if f.samples.max() >= k.strip_height - k.delta:
        violations.append("f >= L - delta")
    lip = seminorm(f, "lipschitz").value
    if lip > k.lip_bound:
        violations.append(f"lipschitz {lip:.6g} > m")
    dini = seminorm(f, k.modulus, backend=backend).value
    if not np.isfinite(dini):
        violations.append("gradient modulus not finite")
    return MembershipReport(
        member=not violations, violations=tuple(violations), lipschitz=lip, dini_constant=dini
    )
