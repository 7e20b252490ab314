"""Command-line entry point: ``helegraph <command> [target] [options]``.

Exit status: 0 when every enabled assertion passes, 1 on an assertion
failure, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .io import (ConfigError, RunConfig, Snapshot, config_hash, load_config, output_dir, save_snapshot,
                 write_csv, write_report)

log = logging.getLogger("helegraph")

PROBES = ("kernel", "symbol", "drift", "sandwich")
VERIFIES = ("greens", "gcp", "decay", "whitney", "parabolic", "shift", "rotation")


def _parse_list(text: str | None):
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError("--xi", f"expected a comma-separated list of numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="helegraph", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", help="output directory (HELEGRAPH_OUT overrides)")
        sp.add_argument("--seed", type=int, help="random seed")
        sp.add_argument("--threads", type=int, help="worker threads for independent solves")
        sp.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("evolve", help="integrate the interface flow"))
    sp = sub.add_parser("probe", help="structure probes of the velocity operator")
    sp.add_argument("target", choices=PROBES)
    sp.add_argument("--xi", help="modes for the symbol probe, e.g. 1,2,4")
    common(sp)
    sp = sub.add_parser("verify", help="property checks")
    sp.add_argument("target", choices=VERIFIES)
    sp.add_argument("--pairs", type=int, default=100, help="number of GCP pairs")
    common(sp)
    common(sub.add_parser("report", help="aggregate the JSON reports in the output directory"))
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return cfg.with_overrides(out=args.out, seed=args.seed, threads=args.threads)


# --------------------------------------------------------------------------- commands

def cmd_evolve(cfg: RunConfig, out: Path, args):
    from .evolution import FlowError, evolve

    f0 = cfg.interface()
    law = cfg.boundary_law()
    try:
        traj = evolve(f0, law, cfg.T, cadence=cfg.cadence, cfg=cfg.flow())
    except FlowError as exc:
        st = exc.last_state
        save_snapshot(out / "snapshot_failed.json", Snapshot(st.t, st.f.samples, f0.period, f0.strip_height))
        return False, f"evolve failed at t={st.t:.6g}", {"error": str(exc)}
    gam = [f"holder_g{i + 1}" for i in range(len(cfg.gammas))]
    write_csv(out / "diagnostics.csv", ["t", "min_f", "max_f", "lip", *gam, "member"],
              [d.row() for d in traj.diagnostics])
    for k, s in enumerate(traj.snapshots):
        save_snapshot(out / f"snapshot_{k:04d}.json",
                      Snapshot(s.t, s.f.samples, f0.period, f0.strip_height,
                               {"lip": s.diagnostics[-1].lip, "member": s.diagnostics[-1].member}))
    checks = {}
    lip0 = traj.diagnostics[0].lip
    checks["lipschitz_non_inflation"] = max(d.lip for d in traj.diagnostics) <= lip0 + 1e-8
    ini = cfg.initial
    if ini["kind"] == "flat" and not law.uses_minus:
        c = float(ini.get("value", 1.0))
        exact = math.sqrt(c * c + 2 * cfg.T)
        err = float(np.max(np.abs(traj.final.f.samples - exact)) / exact)
        traj.report["flat_exact"] = {"exact": exact, "rel_error": err}
        checks["flat_exact"] = err <= 1e-3
    traj.report["checks"] = checks
    ok = all(checks.values())
    fin = traj.final.f.samples
    return ok, f"evolve T={cfg.T:g} steps={traj.report['steps']} f in [{fin.min():.6f}, {fin.max():.6f}]", traj.report


def cmd_probe(cfg: RunConfig, out: Path, args):
    from . import probe

    f = cfg.interface()
    law = cfg.boundary_law()
    scfg = cfg.solver()
    pr = cfg.probe
    if args.target == "symbol":
        xi = _parse_list(args.xi) or pr.get("xi", [1, 2, 4, 8])
        rep = probe.symbol_check(float(pr.get("c", 1.0)), cfg.L, law, xi, eps=pr.get("eps", 1e-3),
                                 nx=cfg.nx, period=cfg.period, cfg=scfg, rtol=pr.get("rtol", 0.01))
        rows = rep.measured["rows"]
        write_csv(out / "symbol.csv", ["xi", "measured", "oracle", "rel_error"],
                  [[r["xi"], r["measured"], r["oracle"], r["rel_error"]] for r in rows])
        n_ok = sum(r["rel_error"] <= rep.tolerances["rtol"] for r in rows)
        return rep.passed, f"symbol {n_ok}/{len(rows)}", rep.to_dict()
    R0 = pr.get("R0", min(cfg.period / 4, 5 * cfg.delta))
    h = np.geomspace(pr.get("h_min", 0.1), R0, int(pr.get("n_h", 6)))
    if args.target == "kernel":
        bumps = probe.default_bumps(f, np.concatenate([h, -h]))
        k = probe.probe_kernel(f, law, bumps=bumps, eps=pr.get("eps", 1e-3), cfg=scfg, R0=R0)
        write_csv(out / "kernel.csv", ["h", "K", "K_h2", "defect"],
                  [[a, b, b * a * a, d] for a, b, d in zip(k.h_samples, k.K_values, k.defects)])
        ok = bool(np.all(k.K_values > 0) and math.isfinite(k.C))
        return ok, f"kernel C={k.C:.4g}", k.to_dict()
    if args.target == "sandwich":
        bumps = [probe.BumpSpec(**b) for b in pr.get("bumps", [{"h": 0.5, "w": 0.2, "A": 0.05}])]
        rep = probe.bump_sandwich_test(f, law, bumps, cfg=scfg, C_max=pr.get("C_max", 10.0))
        return rep.passed, f"sandwich C={rep.measured['C']:.4g}", rep.to_dict()
    # drift
    bumps = probe.default_bumps(f, np.concatenate([h, -h]))
    k = probe.probe_kernel(f, law, bumps=bumps, eps=pr.get("eps", 1e-3), cfg=scfg, R0=R0)
    rep = probe.probe_drift(f, law, pr.get("tau", [0.25, 0.5, 1.0]), pr.get("r", [0.2, 0.4]),
                            cfg=scfg, kernel=k)
    write_csv(out / "drift.csv", ["r", "D", "E", "compensated"],
              [[c["r"], c["D"], c["E"], c["compensated"]] for c in rep.measured["compensation"]])
    return rep.passed, f"drift C={rep.measured['C_tau']:.4g}", rep.to_dict()


def cmd_verify(cfg: RunConfig, out: Path, args):
    from . import probe

    law = cfg.boundary_law()
    scfg = cfg.solver()
    t = args.target
    if t == "gcp":
        rep = probe.gcp_test(cfg.seed, law, n_pairs=args.pairs, nx=cfg.nx, cfg=scfg, period=cfg.period,
                             L=cfg.L, threads=cfg.threads)
        return rep.passed, f"gcp {rep.measured['n_ok']}/{args.pairs}", rep.to_dict()
    if t == "greens":
        from .elliptic import greens_boundary_ratio, harmonic_measure_decay

        f = cfg.interface()
        g = greens_boundary_ratio(f, scfg)
        d = harmonic_measure_decay(f, 0, [cfg.period / 16, cfg.period / 8, cfg.period / 4], cfg=scfg)
        C_max = cfg.probe.get("greens_C_max", 50.0)
        ok = g.C <= C_max and d.alpha > 0 and float(d.ratio_spread.max()) <= 0.1
        rep = {"greens": g.__dict__, "decay": {"R": d.R, "s": d.s, "W": d.W, "spread": d.ratio_spread,
                                               "alpha": d.alpha, "C": d.C}, "passed": ok}
        return ok, f"greens C={g.C:.4g} alpha={d.alpha:.3g}", rep
    if t == "decay":
        from .interface import make_interface

        P = cfg.probe.get("period", 16 * math.pi)
        nx = cfg.probe.get("nx", 256)
        base = cfg.probe.get("base", 3.0)
        f = make_interface(np.full(nx, base), P, cfg.probe.get("L", 2 * base))
        rep = probe.decay_test(f, law, [P / 32, P / 16, P / 8], cfg=scfg)
        return rep.passed, f"decay alpha={rep.measured['alpha']:.4g}", rep.to_dict()
    if t == "shift":
        f = cfg.interface()
        reps = [probe.constant_shift_test(f, law, [0.01, 0.05], "plus", scfg)]
        if law.uses_minus:
            reps.append(probe.constant_shift_test(f, law, [0.01, 0.05], "minus", scfg))
        ok = all(r.passed for r in reps)
        return ok, "shift " + " ".join(f"C={r.measured['C']:.4g}" for r in reps), {r.name: r.to_dict() for r in reps}
    if t == "rotation":
        rep = probe.rotation_estimate_test(cfg.interface(), law, [0.01, 0.005], cfg=scfg)
        return rep.passed, f"rotation C={rep.measured['C']:.4g}", rep.to_dict()
    if t == "whitney":
        from .whitney import decompose

        res = {}
        for N, m in ((1, 3), (2, 2)):
            d = decompose(m, N)
            res[f"N{N}_m{m}"] = {"cube": d.cube_properties(), "partition": d.partition_properties(seed=cfg.seed)}
        flags = [v for r in res.values() for part in r.values() for v in part.values() if isinstance(v, bool)]
        return all(flags), f"whitney {sum(flags)}/{len(flags)}", res
    # parabolic
    from .parabolic import KernelClassParams, extremal, linear_apply, random_member

    params = KernelClassParams(cfg.probe.get("Lambda", 2.0), cfg.probe.get("r0", 1.0))
    rng = np.random.default_rng(cfg.seed)
    x = np.arange(cfg.nx) * cfg.period / cfg.nx
    bad = 0
    n = int(cfg.probe.get("members", 50))
    for i in range(n):
        mem = random_member(rng, params, symmetric=bool(i % 2 == 0))
        u = sum(rng.normal() / (k + 1) ** 2 * np.cos((k + 1) * x + rng.uniform(0, 6.3)) for k in range(6))
        L = linear_apply(u, mem, cfg.period)
        lo, hi = extremal(u, params, "minus", cfg.period), extremal(u, params, "plus", cfg.period)
        if not mem.verified or np.any(L < lo - 1e-9) or np.any(L > hi + 1e-9):
            bad += 1
    return bad == 0, f"parabolic {n - bad}/{n}", {"members": n, "failures": bad}


def cmd_report(cfg: RunConfig, out: Path, args):
    rows = []
    for p in sorted(out.glob("report_*.json")):
        data = json.loads(p.read_text())
        rows.append({"file": p.name, "passed": bool(data.get("passed")), "summary": data.get("summary", "")})
    ok = bool(rows) and all(r["passed"] for r in rows)
    return ok, f"report {sum(r['passed'] for r in rows)}/{len(rows)}", {"reports": rows}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _config(args)
        if args.command == "probe" and args.xi is not None:
            _parse_list(args.xi)
        out = output_dir(cfg.out)
        handler = {"evolve": cmd_evolve, "probe": cmd_probe, "verify": cmd_verify, "report": cmd_report}
        ok, summary, report = handler[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    name = args.command if not hasattr(args, "target") else f"{args.command}_{args.target}"
    line = f"{'PASS' if ok else 'FAIL'} {summary}"
    body = {"command": name, "passed": ok, "summary": line, "config": cfg.to_dict(), "result": report}
    write_report(out / f"report_{name}.json", body, cfg)
    print(line)
    return 0 if ok else 1


def main():  # pragma: no cover - console script shim
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()


__all__ = ["build_parser", "config_hash", "main", "run"]
