"""Run configuration, snapshots, and deterministic JSON/CSV emission."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

__all__ = [
    "ConfigError",
    "RunConfig",
    "SNAPSHOT_VERSION",
    "Snapshot",
    "SnapshotError",
    "config_hash",
    "dump_json",
    "load_config",
    "load_snapshot",
    "output_dir",
    "save_snapshot",
    "solution_csv",
    "write_csv",
    "write_report",
]

SNAPSHOT_VERSION = "helegraph-snapshot/1"
REPORT_VERSION = "helegraph-report/1"


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


class SnapshotError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    nx: int = 128
    ny: int = 128
    period: float = 2 * math.pi
    L: float = 2.0
    delta: float = 0.2
    lip_bound: float = 1.0
    modulus: dict = field(default_factory=lambda: {"kind": "holder", "beta": 0.5})
    law: dict = field(default_factory=lambda: {"kind": "one_phase_identity", "lam": 1.0, "Lam": 1.0,
                                               "A2": [[1.0, 0.0], [0.0, 1.0]]})
    initial: dict = field(default_factory=lambda: {"kind": "flat", "value": 1.0})
    T: float = 0.5
    cadence: float = 0.1
    cfl: float = 0.5
    dt_max: float = 1e-2
    solver_tol: float = 1e-10
    gammas: tuple = (0.1, 0.25, 0.5)
    probe: dict = field(default_factory=dict)
    out: str = "helegraph_out"
    seed: int = 0
    backend: str = "spectral"
    threads: int = 1

    _POSITIVE = ("period", "L", "delta", "lip_bound", "T", "cadence", "cfl", "dt_max", "solver_tol")

    def __post_init__(self):
        for name in self._POSITIVE:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(name, f"must be a positive number, got {v!r}")
        for name in ("nx", "ny", "threads"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(name, f"must be a positive integer, got {v!r}")
        if self.nx % 2 or self.nx < 8:
            raise ConfigError("nx", "must be even and >= 8")
        if self.cfl > 1:
            raise ConfigError("cfl", "must lie in (0, 1]")
        if not 0 < self.delta < self.L / 2:
            raise ConfigError("delta", "must satisfy 0 < delta < L/2")
        if self.backend not in ("spectral", "centered"):
            raise ConfigError("backend", "must be 'spectral' or 'centered'")
        if self.law.get("kind") not in ("one_phase_identity", "difference"):
            raise ConfigError("law.kind", "must be 'one_phase_identity' or 'difference'")
        if self.initial.get("kind") not in ("flat", "cosine", "dini"):
            raise ConfigError("initial.kind", "must be 'flat', 'cosine' or 'dini'")
        if any(not 0 < g < 1 for g in self.gammas):
            raise ConfigError("gammas", "exponents must lie in (0, 1)")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        for k in data:
            if k not in names:
                raise ConfigError(k, "unknown field")
        kw = dict(data)
        if "gammas" in kw:
            kw["gammas"] = tuple(kw["gammas"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError("?", str(exc)) from exc

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["gammas"] = list(self.gammas)
        return d

    def with_overrides(self, **kw) -> "RunConfig":
        d = self.to_dict()
        d.update({k: v for k, v in kw.items() if v is not None})
        return RunConfig.from_dict(d)

    # builders ---------------------------------------------------------------
    def interface(self):
        from .interface import make_interface

        x = np.arange(self.nx) * self.period / self.nx
        ini = self.initial
        if ini["kind"] == "flat":
            vals = np.full(self.nx, float(ini.get("value", 1.0)))
        elif ini["kind"] == "cosine":
            k = 2 * np.pi / self.period * ini.get("mode", 1)
            vals = ini.get("base", 1.0) + ini.get("amp", 0.2) * np.cos(k * x + ini.get("phase", 0.0))
        else:
            from .evolution import dini_initial_data

            vals = dini_initial_data(x, self.period, base=ini.get("base", 1.0), amp=ini.get("amp", 0.1),
                                     power=ini.get("power", 1.5))
        return make_interface(vals, self.period, self.L)

    def boundary_law(self):
        from .dtn import BoundaryLaw

        lw = self.law
        A2 = tuple(tuple(float(v) for v in row) for row in lw.get("A2", [[1.0, 0.0], [0.0, 1.0]]))
        try:
            return BoundaryLaw(lw["kind"], float(lw.get("lam", 1.0)), float(lw.get("Lam", 1.0)), A2)
        except ValueError as exc:
            raise ConfigError("law", str(exc)) from exc

    def solver(self):
        from .elliptic import SolverConfig

        return SolverConfig(ny=self.ny, tol=self.solver_tol, backend=self.backend)

    def klass(self):
        from .interface import ClassKParams, DiniModulus

        mod = DiniModulus(**self.modulus)
        return ClassKParams(self.delta, self.L, self.lip_bound, mod)

    def flow(self):
        from .evolution import FlowConfig

        return FlowConfig(solver=self.solver(), klass=self.klass(), cfl=self.cfl, dt_max=self.dt_max,
                          gammas=tuple(self.gammas))


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError("--config", f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("--config", "top level must be an object")
    return RunConfig.from_dict(data)


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dump_json(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats, non-finite floats as strings."""
    return json.dumps(_canonical(obj), sort_keys=True, indent=2) + "\n"


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(_canonical(cfg.to_dict()), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def output_dir(default) -> Path:
    d = Path(os.environ.get("HELEGRAPH_OUT") or default)
    d.mkdir(parents=True, exist_ok=True)
    return d


def write_report(path, report: dict, cfg: RunConfig | None = None) -> Path:
    body = dict(report)
    body["version"] = REPORT_VERSION
    body["tool_version"] = __version__
    if cfg is not None:
        body["config_hash"] = config_hash(cfg)
    path = Path(path)
    path.write_text(dump_json(body))
    return path


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, header, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path = Path(path)
    path.write_text(buf.getvalue())
    return path


def solution_csv(sol) -> str:
    """Row-major CSV of a bulk solution with a ``# Nx Ny phase`` header line."""
    v = sol.values
    lines = [f"# {v.shape[0]} {v.shape[1] - 1} {sol.phase}"]
    lines += [",".join("%.17g" % x for x in row) for row in v]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Snapshot:
    t: float
    samples: np.ndarray
    period: float
    strip_height: float
    diagnostics: dict = field(default_factory=dict)
    version: str = SNAPSHOT_VERSION


def _floats(values) -> str:
    out = []
    for v in values:
        v = float(v)
        if not math.isfinite(v):
            raise SnapshotError("snapshot values must be finite")
        out.append(repr(v))
    return "[" + ", ".join(out) + "]"


def save_snapshot(path, snap: Snapshot) -> Path:
    """Write a snapshot as JSON; floats use ``repr`` so the round trip is exact, signed zeros included."""
    diag = dump_json(snap.diagnostics).strip().replace("\n", "\n  ")
    text = (
        "{\n"
        f'  "version": {json.dumps(snap.version)},\n'
        f'  "t": {repr(float(snap.t))},\n'
        f'  "period": {repr(float(snap.period))},\n'
        f'  "strip_height": {repr(float(snap.strip_height))},\n'
        f'  "n": {len(snap.samples)},\n'
        f'  "samples": {_floats(snap.samples)},\n'
        f'  "diagnostics": {diag}\n'
        "}\n"
    )
    path = Path(path)
    path.write_text(text)
    return path


def load_snapshot(path) -> Snapshot:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"corrupt or truncated snapshot {path}: {exc}") from exc
    ver = data.get("version")
    if ver != SNAPSHOT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {ver!r}; expected {SNAPSHOT_VERSION!r}")
    try:
        samples = np.array(data["samples"], dtype=float)
        if samples.size != int(data["n"]):
            raise SnapshotError("sample count does not match header")
        return Snapshot(t=float(data["t"]), samples=samples, period=float(data["period"]),
                        strip_height=float(data["strip_height"]),
                        diagnostics=data.get("diagnostics", {}), version=ver)
    except KeyError as exc:
        raise SnapshotError(f"snapshot missing field {exc}") from exc
