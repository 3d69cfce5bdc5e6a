"""Command line driver.

    probrep run --experiment NAME [--param key=value ...] --out PATH [--format csv|json]
    probrep run --config PATH [--param key=value ...] [--out PATH]
    probrep validate ...            (same arguments as run, nothing is computed)
    probrep list

Exit codes: 0 success, 2 invalid configuration, 3 runtime or output failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

from probrep import __version__
from probrep.experiments import PARAMETER_KEYS, REGISTRY, resolve_parameters

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3
FORMATS = ("csv", "json")


class ConfigError(Exception):
    """The configuration would be rejected; carries every problem found."""

    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


class OutputError(Exception):
    pass


@dataclasses.dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = dataclasses.field(default_factory=dict)
    output_path: str | None = None
    format: str = "csv"

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "parameters": dict(sorted(self.parameters.items())),
                "output_path": self.output_path, "format": self.format}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if "metadata" in data and isinstance(data["metadata"], dict):
            data = data["metadata"].get("config", {})
        unknown = set(data) - {"experiment", "parameters", "output_path", "format"}
        if unknown:
            raise ConfigError([f"unknown config field {k!r}" for k in sorted(unknown)])
        if "experiment" not in data:
            raise ConfigError(["config has no experiment"])
        return cls(data["experiment"], dict(data.get("parameters") or {}), data.get("output_path"),
                   data.get("format", "csv"))


@dataclasses.dataclass
class ResultTable:
    columns: list  # [(name, type)]
    rows: list
    metadata: dict

    def __post_init__(self):
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ValueError(f"row {row!r} does not have {width} cells")

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow([name for name, _ in self.columns])
        for row in self.rows:
            writer.writerow([format_cell(v, t) for v, (_, t) in zip(row, self.columns)])
        return out.getvalue()

    def to_json(self) -> str:
        payload = {
            "metadata": self.metadata,
            "columns": [{"name": n, "type": t} for n, t in self.columns],
            "rows": [[json_cell(v, t) for v, (_, t) in zip(row, self.columns)] for row in self.rows],
        }
        return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def format_cell(value, kind: str) -> str:
    if value is None:
        return ""
    if kind == "rational":
        value = Fraction(value)
        return f"{value.numerator}/{value.denominator}"
    if kind == "bool":
        return "true" if value else "false"
    if kind == "int":
        return str(int(value))
    return repr(float(value))


def json_cell(value, kind: str):
    if value is None:
        return None
    if kind == "rational":
        return format_cell(value, kind)
    if kind == "bool":
        return bool(value)
    if kind == "int":
        return int(value)
    return float(value)


def validate(config: ExperimentConfig) -> list[str]:
    """Every reason ``run`` would reject ``config``; empty when it is acceptable."""
    _, problems = resolve_parameters(config.experiment, config.parameters)
    if config.format not in FORMATS:
        problems.append(f"format must be one of {FORMATS}, got {config.format!r}")
    return problems


def _check_writable(path: Path) -> None:
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise OutputError(f"output directory {parent} does not exist")
    if not os.access(parent, os.W_OK):
        raise OutputError(f"output directory {parent} is not writable")
    if path.is_dir():
        raise OutputError(f"output path {path} is a directory")


def atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(config: ExperimentConfig) -> ResultTable:
    """Run the experiment and write its output if ``output_path`` is set.

    The files carry the table and the config echo but not the wall time, so a
    rerun with the same config produces identical bytes.
    """
    problems = validate(config)
    if problems:
        raise ConfigError(problems)
    params, _ = resolve_parameters(config.experiment, config.parameters)
    path = Path(config.output_path) if config.output_path else None
    if path is not None:
        _check_writable(path)
    columns, rows = REGISTRY[config.experiment].runner(params)
    metadata = {
        "version": f"probrep {__version__}",
        "config": config.to_dict(),
        "resolved_parameters": dict(sorted(params.items())),
        "seed": params.get("seed"),
    }
    table = ResultTable(columns, rows, metadata)
    if path is not None:
        try:
            if config.format == "json":
                atomic_write(path, table.to_json())
            else:
                atomic_write(path, table.to_csv())
                atomic_write(path.with_name(path.name + ".meta.json"),
                             json.dumps(metadata, indent=2, ensure_ascii=False) + "\n")
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from exc
    return table


def _parse_param(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"cannot read config {args.config}: {exc}"]) from exc
        if not isinstance(data, dict):
            raise ConfigError(["config file must hold a JSON object"])
        config = ExperimentConfig.from_dict(data)
    else:
        if not args.experiment:
            raise ConfigError(["either --experiment or --config is required"])
        config = ExperimentConfig(args.experiment)
    if args.experiment:
        config.experiment = args.experiment
    for key, value in args.param or []:
        config.parameters[key] = value
    if args.out:
        config.output_path = args.out
    if args.format:
        config.format = args.format
    return config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probrep", description="Probability-representation experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "run an experiment"), ("validate", "check a config without running it")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--experiment", help="registry name (see `probrep list`)")
        p.add_argument("--param", action="append", type=_parse_param, metavar="KEY=VALUE",
                       help=f"experiment parameter; keys: {', '.join(PARAMETER_KEYS)}")
        p.add_argument("--config", help="JSON file with experiment, parameters, output_path, format")
        p.add_argument("--out", help="output file")
        p.add_argument("--format", choices=FORMATS)
    sub.add_parser("list", help="print the experiment registry")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.command == "list":
        for exp in REGISTRY.values():
            print(f"{exp.name:<11} {exp.summary}")
        return EXIT_OK
    try:
        config = _config_from_args(args)
        if args.command == "validate":
            problems = validate(config)
            for problem in problems:
                print(f"invalid: {problem}", file=sys.stderr)
            if not problems:
                print("ok")
            return EXIT_INVALID if problems else EXIT_OK
        start = time.perf_counter()
        table = run(config)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"invalid: {problem}", file=sys.stderr)
        return EXIT_INVALID
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # any failure inside an experiment
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    elapsed = time.perf_counter() - start
    if config.output_path is None:
        sys.stdout.write(table.to_json() if config.format == "json" else table.to_csv())
    print(f"{config.experiment}: {len(table.rows)} rows in {elapsed:.2f}s", file=sys.stderr)
    return EXIT_OK
