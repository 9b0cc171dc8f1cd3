import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from app.data.dataset import load_experiment_specs
from app.errors import DeadlockError, SimulatorError, UsageError
from app.experiments import parse_experiment, replay, run_experiment, sweep, validate
from app.experiments.validate import SUITES

EXIT_FAILED = 1
EXIT_USAGE = 2


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=["mlp", "lstm", "cnn"], required=True)
    parser.add_argument("--case", type=int, default=None, help="MLP / LSTM mapping case (1-4)")
    parser.add_argument("--variant", choices=["F", "M", "S"], default=None, help="CNN variant")
    parser.add_argument("--nh", type=int, default=None, help="LSTM hidden size")
    parser.add_argument("--n", type=int, default=None, help="MLP layer width")
    parser.add_argument("--mapping", choices=["analog", "digital"], default="analog")
    parser.add_argument("--profile", choices=["low_power", "high_power"], default="high_power")
    parser.add_argument("--coupling", choices=["tight", "loose"], default="tight")
    parser.add_argument("--inferences", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tile-latency-ns", type=float, default=None, help="override the CM_PROCESS latency")
    parser.add_argument("--trace", action="store_true", help="write the CM_* instruction trace")


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None, help="JSON file with system / energy / aimc sections")
    parser.add_argument("--out", type=str, default="results")
    parser.add_argument("--emit-plotdata", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alpine-sim",
        description="Simulate multi-core systems with tightly coupled analog in-memory compute tiles",
    )
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one experiment")
    _add_experiment_flags(run_p)
    _add_output_flags(run_p)

    sweep_p = sub.add_parser("sweep", help="simulate every experiment of a JSON spec file")
    sweep_p.add_argument("specs", type=str)
    _add_output_flags(sweep_p)
    sweep_p.add_argument("--max-workers", type=int, default=None, help="defaults to $ALPINE_SIM_THREADS or 4")

    val_p = sub.add_parser("validate", help="run the anchored self-checks")
    val_p.add_argument("what", nargs="?", default="all", choices=[*SUITES, "all"])

    replay_p = sub.add_parser("replay", help="re-execute a recorded CM_* trace")
    replay_p.add_argument("trace", type=str)
    replay_p.add_argument("--config", type=str, default=None)
    return parser


def cmd_run(args: argparse.Namespace) -> int:
    spec = parse_experiment(
        model=args.model, case=args.case, variant=args.variant, n=args.n, n_h=args.nh,
        mapping=args.mapping, profile=args.profile, coupling=args.coupling,
        n_inferences=args.inferences, seed=args.seed, tile_latency_ns=args.tile_latency_ns,
    )
    print(f"Running {spec.run_id}...")
    report, path = run_experiment(spec, args.out, args.config, args.emit_plotdata, args.trace)
    stats = report.stats
    print(f"Results saved to: {path}")
    print(f"  -> time: {stats.wall_time:.6e} s | energy: {report.energy.total:.6e} J | LLCMPI: {report.llcmpi:.6e}")
    for tag, seconds in stats.subroi_times.items():
        print(f"     {tag:<20} {seconds:.6e} s")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    specs_path = Path(args.specs)
    if not specs_path.exists():
        raise UsageError(f"spec file not found: {specs_path}")
    specs = load_experiment_specs(specs_path)
    print(f"Sweeping {len(specs)} experiments from {specs_path}...")
    results, ratios = sweep(specs, args.out, args.config, args.max_workers, args.emit_plotdata)
    failed = [r for r in results if r["error"] is not None]
    for r in failed:
        print(f"  FAILED {r['spec'].run_id}: {r['error']}")
    for row in ratios.itertuples(index=False):
        print(f"  {row.run_id:<48} speedup {row.speedup:7.2f}x | energy {row.energy_ratio:7.2f}x")
    print(f"\nSweep complete: {len(results) - len(failed)} ok, {len(failed)} failed. Check {args.out} for details.")
    return EXIT_FAILED if failed else 0


def cmd_validate(args: argparse.Namespace) -> int:
    checks = validate(args.what)
    for c in checks:
        status = "PASS" if c.ok else "FAIL"
        print(f"[{status}] {c.suite}: {c.name}: expected {c.expected}, got {c.actual}")
    failed = sum(1 for c in checks if not c.ok)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_FAILED if failed else 0


def cmd_replay(args: argparse.Namespace) -> int:
    result = replay(args.trace, args.config)
    print(f"Replayed {result.records} instructions of {result.run_id}")
    print(f"  -> stream matches rebuild: {result.regenerated_match} | faults: {result.faults} | "
          f"tile state matches: {result.tiles_match} | stats match: {result.stats_match}")
    return 0 if result.ok else EXIT_FAILED


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "validate": cmd_validate, "replay": cmd_replay}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValidationError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DeadlockError as e:
        print(f"Error: {e}", file=sys.stderr)
        for core, channel in sorted(e.blocked.items()):
            print(f"  core {core} blocked on {channel}", file=sys.stderr)
        return EXIT_FAILED
    except SimulatorError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
