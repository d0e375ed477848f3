"""Command-line front end.

Subcommands: run, sweep, baseline, gen-synthetic, inspect-crossbar, serve.
Each experiment command executes in process by default; with ``--server``
it becomes a thin client posting the same payload to a running service.
Option precedence: command line > config file (YAML) > defaults.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import urllib.error
import urllib.request

import yaml

from . import data
from .crossbar import load_crossbar
from .experiments import (
    ConfigError,
    DataError,
    ExperimentConfig,
    SWEEP_AXES,
    metrics_json,
    run_baseline_onelayer,
    run_experiment,
    run_sweep,
    write_energy_csv,
    write_metrics,
    write_sweep_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML config file (flags override it)")
    for name, f in _CONFIG_FIELDS.items():
        flag = "--" + name.replace("_", "-")
        if name == "technologies":
            parser.add_argument(flag, default=None,
                                help="comma-separated technology names")
        elif f.type in ("int", int):
            parser.add_argument(flag, type=int, default=None)
        elif f.type in ("float", float):
            parser.add_argument(flag, type=float, default=None)
        else:
            parser.add_argument(flag, default=None)


def build_config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must be a YAML mapping")
        unknown = set(loaded) - set(_CONFIG_FIELDS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for name in _CONFIG_FIELDS:
        arg = getattr(args, name, None)
        if arg is not None:
            values[name] = arg
    if isinstance(values.get("technologies"), str):
        values["technologies"] = tuple(t.strip() for t in values["technologies"].split(","))
    elif isinstance(values.get("technologies"), list):
        values["technologies"] = tuple(values["technologies"])
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _post(server: str, endpoint: str, payload: dict) -> dict:
    body = json.dumps(payload).encode()
    req = urllib.request.Request(server.rstrip("/") + endpoint, data=body,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode(errors="replace")
        if exc.code == 404:
            raise DataError(detail) from exc
        if exc.code == 422:
            raise ConfigError(detail) from exc
        raise RuntimeError(f"server error {exc.code}: {detail}") from exc


def _config_payload(config: ExperimentConfig) -> dict:
    payload = dataclasses.asdict(config)
    payload["technologies"] = list(payload["technologies"])
    return payload


def cmd_run(args) -> int:
    config = build_config(args)
    if args.server:
        record = _post(args.server, "/experiments/run", _config_payload(config))
    else:
        record = run_experiment(config)
    _emit_record(record, args)
    return EXIT_OK


def cmd_baseline(args) -> int:
    config = build_config(args)
    if args.server:
        record = _post(args.server, "/experiments/baseline", _config_payload(config))
    else:
        record = run_baseline_onelayer(config)
    _emit_record(record, args)
    return EXIT_OK


def _emit_record(record: dict, args) -> None:
    if args.output:
        write_metrics(record, args.output)
    if getattr(args, "energy_csv", None):
        write_energy_csv(record, args.energy_csv)
    res = record["results"]
    print(f"final test accuracy: {res['final_test_accuracy']:.4f}  "
          f"pulses: {res['total_pulses']}")
    if not args.output:
        print(metrics_json(record), end="")


def cmd_sweep(args) -> int:
    config = build_config(args)
    values = [float(v) for v in args.values.split(",")]
    if args.axis == "hidden_size":
        values = [int(v) for v in values]
    if args.server:
        payload = {"base": _config_payload(config), "axis": args.axis,
                   "values": values, "repetitions": args.repetitions}
        rows = _post(args.server, "/experiments/sweep", payload)["rows"]
    else:
        rows = run_sweep(config, args.axis, values, args.repetitions)
    write_sweep_csv(rows, args.output, list(config.technologies))
    failed = [r for r in rows if r["error"]]
    for row in rows:
        acc = "failed" if row["error"] else f"{row['accuracy']:.4f}"
        print(f"{args.axis}={row['value']} rep={row['repetition']}: {acc}")
    if failed:
        print(f"{len(failed)} of {len(rows)} runs failed; see {args.output}",
              file=sys.stderr)
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    if args.server:
        resp = _post(args.server, "/datasets/synthetic",
                     {"output_path": args.output, "n_samples": args.n_samples,
                      "n_classes": args.n_classes, "seed": args.seed})
        print(f"wrote {resp['n_samples']} samples "
              f"({resp['n_channels']} channels) to {resp['path']}")
        return EXIT_OK
    samples = data.generate_synthetic_cochleagrams(args.n_samples, args.n_classes, args.seed)
    data.write_cochleagrams(args.output, samples)
    print(f"wrote {len(samples)} samples ({samples[0].n_channels} channels) "
          f"to {args.output}")
    return EXIT_OK


def cmd_inspect_crossbar(args) -> int:
    from .service import crossbar_summary
    if args.server:
        summary = _post(args.server, "/crossbars/inspect", {"path": args.snapshot})
    else:
        try:
            xbar = load_crossbar(args.snapshot)
        except FileNotFoundError as exc:
            raise DataError(str(exc)) from exc
        except ValueError as exc:
            raise DataError(str(exc)) from exc
        summary = crossbar_summary(xbar)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nanosyn",
                                     description="Two-crossbar nanosynaptic "
                                                 "learning system simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_config_flags(p_run)
    p_run.add_argument("--output", help="metrics JSON path")
    p_run.add_argument("--energy-csv", help="energy table CSV path")
    p_run.add_argument("--server", help="service URL (thin-client mode)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one axis")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated axis values")
    p_sweep.add_argument("--repetitions", type=int, default=3)
    p_sweep.add_argument("--output", required=True, help="sweep CSV path")
    p_sweep.add_argument("--server", help="service URL (thin-client mode)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_base = sub.add_parser("baseline", help="one-layer baseline run")
    _add_config_flags(p_base)
    p_base.add_argument("--output", help="metrics JSON path")
    p_base.add_argument("--energy-csv", help="energy table CSV path")
    p_base.add_argument("--server", help="service URL (thin-client mode)")
    p_base.set_defaults(func=cmd_baseline)

    p_gen = sub.add_parser("gen-synthetic", help="generate a synthetic "
                                                 "cochleagram container")
    p_gen.add_argument("--output", required=True)
    p_gen.add_argument("--n-samples", type=int, default=500)
    p_gen.add_argument("--n-classes", type=int, default=10)
    p_gen.add_argument("--seed", type=int, default=42)
    p_gen.add_argument("--server", help="service URL (thin-client mode)")
    p_gen.set_defaults(func=cmd_gen_synthetic)

    p_ins = sub.add_parser("inspect-crossbar", help="summarize a crossbar "
                                                    "snapshot")
    p_ins.add_argument("snapshot", help="crossbar CSV snapshot path")
    p_ins.add_argument("--server", help="service URL (thin-client mode)")
    p_ins.set_defaults(func=cmd_inspect_crossbar)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
