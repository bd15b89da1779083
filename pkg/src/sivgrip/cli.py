"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 runtime fault.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigurationError, SivGripError
from .experiment import (
    ExperimentSpec,
    compute_metrics,
    export,
    load_records_csv,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load_spec(path: str | None) -> ExperimentSpec:
    if path is None:
        spec = ExperimentSpec()
        spec.validate()
        return spec
    data = json.loads(Path(path).read_text())
    return ExperimentSpec.from_dict(data)


def cmd_run(args) -> int:
    spec = _load_spec(args.spec)
    if args.no_shuffle:
        spec = replace(spec, blind_shuffle=False)
    out = Path(args.out)
    seeds = args.seeds
    if seeds <= 1:
        result = run_experiment(spec, parallel=args.parallel)
        export(result.records, result.metrics, out)
        print(f"wrote {len(result.records)} episode records to {out}")
        return EXIT_OK

    sweep = []
    for offset in range(seeds):
        seeded = replace(spec, master_seed=spec.master_seed + offset)
        result = run_experiment(seeded, parallel=args.parallel)
        seed_dir = out / f"seed_{seeded.master_seed:04d}"
        export(result.records, result.metrics, seed_dir)
        sweep.append({
            "master_seed": seeded.master_seed,
            "per_variant": list(result.metrics.per_variant),
        })
    (out / "sweep_summary.json").write_text(json.dumps({"seeds": sweep}, indent=2) + "\n")
    print(f"wrote {seeds} seeded runs to {out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    from .replay import replay_session_log

    report = replay_session_log(args.log)
    print(f"replayed {report.ticks} ticks over {report.episodes} episode(s)")
    if report.ok:
        print("trajectory and final weights match the recording")
        return EXIT_OK
    for line in report.divergences:
        print(f"divergence: {line}", file=sys.stderr)
    return EXIT_RUNTIME


def cmd_export_plots(args) -> int:
    records = load_records_csv(args.records)
    if not records:
        print("records file has no rows", file=sys.stderr)
        return EXIT_CONFIG
    variants = list(dict.fromkeys(r.variant for r in records))
    metrics = compute_metrics(records, variants)
    export(records, metrics, args.out)
    print(f"wrote plot data for {len(records)} records to {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .session import serve

    serve(host=args.host, port=args.port, log_dir=args.log_dir)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sivgrip")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the three-agent comparison headlessly")
    run.add_argument("--spec", help="experiment spec JSON (defaults when omitted)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seeds", type=int, default=1, help="consecutive master seeds to sweep")
    run.add_argument("--no-shuffle", action="store_true", help="disable the blind execution shuffle")
    run.add_argument("--parallel", type=int, default=1, help="worker processes for (variant, run) cells")
    run.set_defaults(fn=cmd_run)

    rep = sub.add_parser("replay", help="re-execute a recorded session log and verify it")
    rep.add_argument("--log", required=True, help="session log (.ndjson)")
    rep.set_defaults(fn=cmd_replay)

    plots = sub.add_parser("export-plots", help="rebuild metric panels from a records CSV")
    plots.add_argument("--records", required=True, help="records.csv from a previous run")
    plots.add_argument("--out", required=True, help="output directory")
    plots.set_defaults(fn=cmd_export_plots)

    srv = sub.add_parser("serve", help="run the live session service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8736)
    srv.add_argument("--log-dir", default="sessions", help="directory for session logs")
    srv.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as err:
        for violation in err.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as err:
        print(f"config error: invalid JSON ({err})", file=sys.stderr)
        return EXIT_CONFIG
    except SivGripError as err:
        print(f"runtime fault: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as err:
        print(f"runtime fault: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
