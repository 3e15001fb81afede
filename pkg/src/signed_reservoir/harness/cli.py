"""Command-line entry point.

Exit codes: 0 success, 2 invalid spec or arguments, 3 unrecoverable numeric
failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..errors import (CapacityError, ConstructionError, DivergenceError, NormalizationError,
                      ReservoirInstabilityError, SpecError)
from ..network import SignedNetwork, make_base_network
from ..symmetry import count_automorphisms
from . import sweeps
from .pipeline import Job, prepare_signals, run_realization
from .plots import PLOT_KINDS, emit_plots
from .records import read_records, write_records
from .spec import ExperimentSpec

EXIT_SPEC = 2
EXIT_NUMERIC = 3

log = logging.getLogger("signed_reservoir")


def _load_spec(args, **forced) -> ExperimentSpec:
    spec = ExperimentSpec.load(args.spec) if args.spec else ExperimentSpec(**forced)
    changes = dict(forced) if args.spec else {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    return replace(spec, **changes) if changes else spec


def _prepare_out(args, spec: ExperimentSpec, name: str) -> Path:
    out = Path(args.out or f"runs/{name}-{spec.base_seed}")
    (out / "plots").mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "log.txt", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    logging.getLogger("signed_reservoir").addHandler(handler)
    (out / "spec.json").write_text(json.dumps(spec.materialize(), indent=2, sort_keys=True) + "\n")
    return out


def _finish(out: Path, records, summary: dict, fmt: str, plot_kinds: list[str], grid=None) -> None:
    write_records(records, out / "records.csv", "csv")
    if fmt == "json":
        write_records(records, out / "records.json", "json")
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    for kind in plot_kinds:
        try:
            emit_plots(records, kind, out / "plots", grid=grid)
        except Exception as exc:  # plotting must never take the CSV down with it
            log.error("plot %s failed: %s", kind, exc)
    print(json.dumps({"out": str(out), "records": len(records), "summary": summary}, default=str, indent=1))


def cmd_gen_network(args) -> int:
    net = make_base_network(args.M, args.edges, args.seed or 0, core=args.core)
    if args.out:
        net.save(args.out)
    else:
        sys.stdout.write(f"{net.M} {net.n_positive} {net.n_negative}\n")
        for row in net.entries:
            sys.stdout.write(" ".join(str(int(v)) for v in row) + "\n")
    return 0


def cmd_symmetries(args) -> int:
    net = SignedNetwork.load(args.network)
    rep = count_automorphisms(net)
    print(rep.group_order)
    print(json.dumps(rep.orbit_partition))
    return 0


def cmd_run(args) -> int:
    spec = _load_spec(args)
    base = sweeps.base_network(spec)
    if args.flips is not None:
        n_flip = args.flips
    else:
        n_flip = int(round(args.fraction * base.n_nonzero))
    cfg = spec.reservoir_config()
    job = Job(key=(0, 0), seed=spec.base_seed, case=f"{spec.task}:{spec.node_kind}", base=base.entries,
              n_flip=n_flip, cfg=cfg, target=spec.target, mode=spec.normalization_mode,
              input_kind=spec.input_kind, signals=prepare_signals(spec, cfg), ridge_k=spec.ridge_k,
              k_max=spec.k_max, count_symmetries=spec.count_symmetries, memory=spec.task == "memory")
    rec = run_realization(job)
    print(json.dumps(rec.row()) if args.format == "json" else ",".join(rec.row().values()))
    return 0 if rec.ok else EXIT_NUMERIC


def cmd_sweep_flips(args) -> int:
    spec = _load_spec(args)
    out = _prepare_out(args, spec, "flips")
    records = sweeps.run_flip_sweep(spec, args.workers)
    _finish(out, records, sweeps.flip_summary(records), args.format, ["scatter", "rank"])
    return 0


def cmd_sweep_symmetry(args) -> int:
    spec = _load_spec(args)
    out = _prepare_out(args, spec, "symmetry")
    found = sweeps.find_symmetric_base(spec)
    found.network.save(out / "base_network.txt")
    records = sweeps.run_symmetry_sweep(spec, args.workers, base=found)
    summary = sweeps.symmetry_summary(records)
    summary["base"] = {"group_order": str(found.report.group_order), "attempts": found.attempts,
                       "accepted": found.accepted}
    _finish(out, records, summary, args.format, ["symmetry", "scatter"])
    return 0


def cmd_sweep_contour(args) -> int:
    spec = _load_spec(args)
    out = _prepare_out(args, spec, "contour")
    records, grid = sweeps.run_contour(spec, args.workers)
    (out / "contour.csv").write_text(grid.to_csv())
    _finish(out, records, {"grid": grid.rows()}, args.format, ["contour"], grid=grid)
    return 0


def cmd_compare_inputs(args) -> int:
    spec = _load_spec(args)
    if spec.task != "input_vector_comparison":
        spec = replace(spec, task="input_vector_comparison")
    out = _prepare_out(args, spec, "inputs")
    records = sweeps.run_input_vector_comparison(spec, args.workers)
    _finish(out, records, sweeps.flip_summary(records), args.format, ["scatter"])
    return 0


def cmd_memory(args) -> int:
    spec = _load_spec(args)
    if spec.task != "memory":
        spec = replace(spec, task="memory")
    out = _prepare_out(args, spec, "memory")
    kinds = args.node_kinds.split(",") if args.node_kinds else None
    records = sweeps.run_memory_sweep(spec, args.workers, kinds)
    _finish(out, records, sweeps.memory_summary(records), args.format, ["memory"])
    return 0


def cmd_plot(args) -> int:
    records = read_records(args.records)
    files = emit_plots(records, args.kind, args.out or Path(args.records).parent / "plots")
    for f in files:
        print(f)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="signed-reservoir", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--spec", help="TOML or JSON experiment spec")
        sp.add_argument("--seed", type=int, help="override base_seed")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        return sp

    g = sub.add_parser("gen-network", help="write a random connected {0,+1} base network")
    g.add_argument("--M", type=int, default=100)
    g.add_argument("--edges", type=int, default=9800)
    g.add_argument("--core", type=int, help="confine zeros to this many nodes")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_network)

    s = sub.add_parser("symmetries", help="automorphism group order of a network file")
    s.add_argument("network")
    s.set_defaults(func=cmd_symmetries)

    r = common(sub.add_parser("run", help="one realization"))
    grp = r.add_mutually_exclusive_group()
    grp.add_argument("--flips", type=int)
    grp.add_argument("--fraction", type=float, default=0.0)
    r.set_defaults(func=cmd_run)

    common(sub.add_parser("sweep-flips", help="testing error and rank vs flip fraction")).set_defaults(
        func=cmd_sweep_flips)
    common(sub.add_parser("sweep-symmetry", help="testing error vs number of symmetries")).set_defaults(
        func=cmd_sweep_symmetry)
    common(sub.add_parser("sweep-contour", help="sparsity x flip fraction grid")).set_defaults(
        func=cmd_sweep_contour)
    common(sub.add_parser("compare-inputs", help="input-vector comparison cases")).set_defaults(
        func=cmd_compare_inputs)
    m = common(sub.add_parser("memory", help="memory capacity vs flip fraction"))
    m.add_argument("--node-kinds", help="comma separated, e.g. polynomial,leaky_tanh")
    m.set_defaults(func=cmd_memory)

    pl = sub.add_parser("plot", help="re-draw figures from a records file")
    pl.add_argument("records")
    pl.add_argument("--kind", choices=[k for k in PLOT_KINDS if k != "contour"], default="scatter")
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SPEC if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("signed_reservoir").setLevel(logging.INFO)
    try:
        return args.func(args)
    except (SpecError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (DivergenceError, NormalizationError, ConstructionError, ReservoirInstabilityError,
            ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
