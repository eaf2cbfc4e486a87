"""Command line entry point: ``qrecec <command> [options]``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .experiments import (SweepError, SweepSpec, emit_csv, episode_seed, run_point,
                          run_sweep, scale_specs, slope_from_rows, summarize,
                          threshold_specs, zsweep_specs, SlopeFitError)
from .network import (ConfigError, ExperimentSettings, ProtocolSettings, SimConfig, Topology,
                       load_config, z_profile)
from .noise import HardwareProfile, NoiseParameterError


def _common(p: argparse.ArgumentParser, out: bool = True) -> None:
    p.add_argument("--config", type=Path, help="JSON configuration file")
    p.add_argument("--runs", type=int, help="episodes per point")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--mode", choices=("cec", "none"), help="classical error correction mode")
    p.add_argument("--links", type=int, help="number of links in a chain")
    p.add_argument("--link-km", type=float, help="length of each link in km")
    p.add_argument("--z", type=float, help="hardware quality parameter in [0, 1]")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    if out:
        p.add_argument("--out", type=Path, help="CSV output path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qrecec",
                                 description="Encoded entanglement distribution simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="run episodes for one configuration"), out=False)
    sp = sub.add_parser("sweep", help="run a sweep described by a JSON spec file")
    sp.add_argument("spec", type=Path)
    _common(sp)
    _common(sub.add_parser("threshold", help="single-parameter sweeps with slope fits"))
    _common(sub.add_parser("zsweep", help="coordinated hardware sweep"))
    _common(sub.add_parser("scale", help="link-count and distance sweeps, cec vs none"))
    v = sub.add_parser("validate", help="quick invariant and oracle checks")
    v.add_argument("--seed", type=int, default=0)
    return ap


def _config(args) -> SimConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = SimConfig(Topology.chain(1, 20.0), HardwareProfile(), ProtocolSettings(),
                        ExperimentSettings())
    topo, profile, proto, exp = cfg.topology, cfg.profile, cfg.protocol, cfg.experiment
    if args.links is not None or args.link_km is not None:
        n = args.links if args.links is not None else len(topo.links)
        km = args.link_km if args.link_km is not None else topo.links[0].length_km
        topo = Topology.chain(n, km)
    if args.z is not None:
        profile = z_profile(args.z, profile if args.config is not None else None)
    if args.mode is not None:
        proto = replace(proto, cec_mode=args.mode)
    if args.runs is not None:
        if args.runs < 1:
            raise ConfigError("--runs must be at least 1")
        exp = replace(exp, runs=args.runs)
    if args.seed is not None:
        exp = replace(exp, seed=args.seed)
    return SimConfig(topo, profile, proto, exp)


def _row_line(r) -> str:
    return (f"{r.sweep_var}={r.value:g} mode={r.mode} runs={r.runs} "
            f"F={r.mean_fidelity:.5f}+-{r.stderr_fidelity:.5f} "
            f"latency={r.mean_latency_s * 1e3:.3f}ms fail={r.failure_rate:.4f}")


def cmd_run(args) -> int:
    cfg = _config(args)
    seeds = [episode_seed(cfg.experiment.seed, 0, i) for i in range(cfg.experiment.runs)]
    res = run_point(cfg.topology, cfg.profile, cfg.protocol, seeds, args.jobs)
    row = summarize("run", cfg.topology.total_km, cfg.protocol.cec_mode, res)
    print(f"links={len(cfg.topology.links)} total_km={cfg.topology.total_km:g} "
          f"ft_mode={cfg.protocol.ft_mode}")
    print(_row_line(row))
    return 0


def _spec_from_file(path: Path, args) -> SweepSpec:
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read sweep spec {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("sweep spec must be a JSON object")
    allowed = {"kind", "grid", "variable", "n_links", "link_km", "total_km", "z", "runs",
               "seed", "modes", "hardware", "protocol"}
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in sweep spec: {', '.join(sorted(extra))}")
    kw = {k: doc[k] for k in allowed - {"hardware", "protocol"} if k in doc}
    if "modes" in kw:
        kw["modes"] = tuple(kw["modes"])
    if "hardware" in doc or "protocol" in doc:
        base = load_config({"nodes": ["a", "b"],
                            "links": [{"left": "a", "right": "b", "length_km": 1.0}],
                            "hardware": doc.get("hardware", {}),
                            "protocol": doc.get("protocol", {})})
        kw["base"], kw["settings"] = base.profile, base.protocol
    if args.runs is not None:
        kw["runs"] = args.runs
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.mode is not None:
        kw["modes"] = (args.mode,)
    if args.links is not None:
        kw["n_links"] = args.links
    if args.link_km is not None:
        kw["link_km"] = args.link_km
    if args.z is not None:
        kw["z"] = args.z
    try:
        return SweepSpec(**kw)
    except TypeError as exc:
        raise ConfigError(f"bad sweep spec: {exc}") from exc


def _run_specs(specs, args, fit: bool = False) -> int:
    rows = []
    for spec in specs:
        part = run_sweep(spec, jobs=args.jobs, progress=lambda r: print(_row_line(r), flush=True))
        rows.extend(part)
        if fit:
            try:
                f = slope_from_rows(part)
                print(f"{spec.sweep_var}: slope={f.slope:.3f} R2={f.r2:.4f} "
                      f"points={len(f.points)}")
            except SlopeFitError as exc:
                print(f"{spec.sweep_var}: no slope fit ({exc})")
    if args.out is not None:
        emit_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    spec = _spec_from_file(args.spec, args)
    return _run_specs([spec], args, fit=spec.kind == "single_param")


def cmd_threshold(args) -> int:
    specs = threshold_specs(args.runs or 20000, args.seed or 0, n_links=args.links or 2,
                            link_km=args.link_km or 20.0)
    return _run_specs(specs, args, fit=True)


def cmd_zsweep(args) -> int:
    links = (args.links,) if args.links else (1, 2, 5)
    specs = zsweep_specs(args.runs or 10000, args.seed or 0, links, args.link_km or 20.0)
    if args.mode:
        specs = [replace(s, modes=(args.mode,)) for s in specs]
    return _run_specs(specs, args)


def cmd_scale(args) -> int:
    z = 0.9 if args.z is None else args.z
    specs = scale_specs(args.runs or 2000, args.seed or 0, z)
    if args.mode:
        specs = [replace(s, modes=(args.mode,)) for s in specs]
    return _run_specs(specs, args)


def cmd_validate(args) -> int:
    from .validation import run_all

    ok = True
    for name, passed, detail in run_all(seed=args.seed):
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}", flush=True)
        ok &= passed
    return 0 if ok else 1


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "threshold": cmd_threshold,
            "zsweep": cmd_zsweep, "scale": cmd_scale, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, SweepError, NoiseParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
