"""Command line front end.

Two commands:

``bohm-measure run <experiment> [--key value ...] [--config FILE]
[--out DIR] [--seed N] [--samples N] [--format csv|tsv]``
    Resolve the configuration (flag > config file > default), run the
    experiment, and write one delimited table per data series, a check
    summary table, and ``manifest.json`` into the output directory.

``bohm-measure list``
    Print the experiment catalog.

Exit codes: 0 all required checks passed, 1 a scientific check failed,
2 configuration error.  Reruns with the same configuration and seed
produce byte-identical data files; only the manifest carries the
creation stamp and wall time.
"""

import argparse
import difflib
import json
import sys
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np

from .experiments import EXPERIMENTS, ProjectiveLimitError


class ConfigError(ValueError):
    """Any problem that makes the requested run ill-defined."""


class UnknownKeyError(ConfigError):
    def __init__(self, key, valid):
        self.key = key
        hint = difflib.get_close_matches(key, valid, n=1)
        msg = f"unknown key {key!r}"
        if hint:
            msg += f"; did you mean {hint[0]!r}?"
        super().__init__(msg)


class TypeMismatchError(ConfigError):
    def __init__(self, key, kind, text):
        self.key = key
        super().__init__(
            f"key {key!r} expects {kind.__name__}, got {text!r}")


class MissingExperimentError(ConfigError):
    def __init__(self, name=None):
        known = ", ".join(EXPERIMENTS)
        if name is None:
            msg = f"no experiment named; choose from: {known}"
        else:
            hint = difflib.get_close_matches(name, EXPERIMENTS, n=1)
            msg = f"unknown experiment {name!r}"
            if hint:
                msg += f"; did you mean {hint[0]!r}?"
            msg += f" (choose from: {known})"
        super().__init__(msg)


@dataclass
class RunConfig:
    experiment: str
    overrides: dict = dataclass_field(default_factory=dict)
    seed: int | None = None
    out_dir: Path = Path("runs")
    output_format: str = "csv"

    def resolved(self) -> dict:
        """Full key -> value map after applying precedence."""
        info = EXPERIMENTS[self.experiment]
        values = {p.key: p.default for p in info.params}
        values.update(self.overrides)
        if self.seed is not None:
            values["seed"] = self.seed
        return values


def _convert(key, text, kind):
    if kind is str:
        return text
    try:
        if kind is int:
            return int(text, 10)
        return float(text)
    except ValueError:
        raise TypeMismatchError(key, kind, text) from None


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    entries = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', "
                              f"got {raw.strip()!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def _pair_up(extra) -> dict:
    """Turn leftover ``--key value`` tokens into a raw string map."""
    out = {}
    k = 0
    while k < len(extra):
        token = extra[k]
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}")
        if k + 1 >= len(extra) or extra[k + 1].startswith("--"):
            raise ConfigError(f"flag {token!r} needs a value")
        out[token[2:]] = extra[k + 1]
        k += 2
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bohm-measure",
        description="guided-trajectory measurement experiments",
        allow_abbrev=False)
    sub = parser.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment", nargs="?", default=None)
    run.add_argument("--config", default=None, metavar="FILE")
    run.add_argument("--out", default=None, metavar="DIR")
    run.add_argument("--seed", default=None, metavar="N")
    run.add_argument("--samples", default=None, metavar="N")
    run.add_argument("--format", default="csv", choices=("csv", "tsv"))
    sub.add_parser("list", help="print the experiment catalog")
    return parser


def parse_config(argv) -> RunConfig:
    """Resolve a ``run`` invocation into a RunConfig.

    Precedence: command-line flag > config-file entry > built-in
    default.  Unknown keys and untypeable values are rejected here,
    before anything runs.
    """
    ns, extra = build_parser().parse_known_args(argv)
    if ns.command != "run":
        raise ConfigError(f"parse_config handles 'run', got {ns.command!r}")
    if ns.experiment is None:
        raise MissingExperimentError()
    if ns.experiment not in EXPERIMENTS:
        raise MissingExperimentError(ns.experiment)
    info = EXPERIMENTS[ns.experiment]
    params = info.param_map()

    raw = {}
    if ns.config is not None:
        raw.update(read_config_file(ns.config))
    raw.update(_pair_up(extra))
    if ns.samples is not None:
        raw["samples"] = ns.samples
    if ns.seed is not None:
        raw["seed"] = ns.seed

    overrides = {}
    for key, text in raw.items():
        if key not in params:
            raise UnknownKeyError(key, list(params))
        overrides[key] = _convert(key, text, params[key].kind)

    out_dir = Path(ns.out) if ns.out else Path("runs") / ns.experiment
    return RunConfig(experiment=ns.experiment, overrides=overrides,
                     out_dir=out_dir, output_format=ns.format)


# ------------------------------------------------------------ output


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_table(path: Path, columns: dict, delimiter: str):
    """One delimited table: header row, then aligned typed columns."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    lengths = {len(a) for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"ragged columns in {path.name}: {lengths}")
    lines = [delimiter.join(names)]
    for row in range(lengths.pop() if lengths else 0):
        lines.append(delimiter.join(
            _format_cell(a[row]) for a in arrays))
    path.write_text("\n".join(lines) + "\n")


def read_table(path: Path, delimiter: str = ",") -> dict:
    """Inverse of write_table; numeric columns come back as float/int."""
    lines = Path(path).read_text().splitlines()
    names = lines[0].split(delimiter)
    cells = [line.split(delimiter) for line in lines[1:]]
    out = {}
    for k, name in enumerate(names):
        column = [row[k] for row in cells]
        try:
            out[name] = np.array([int(c) for c in column], dtype=np.int64)
        except ValueError:
            try:
                out[name] = np.array([float(c) for c in column])
            except ValueError:
                out[name] = np.array(column)
    return out


def _checks_table(checks) -> dict:
    return {
        "name": np.array([c.name for c in checks]),
        "passed": np.array([c.passed for c in checks]),
        "value": np.array([c.value for c in checks]),
        "op": np.array([c.op for c in checks]),
        "threshold": np.array([c.threshold for c in checks]),
        "required": np.array([c.required for c in checks]),
    }


def run_experiment(cfg: RunConfig) -> int:
    """Execute, write the output directory, report, return exit code."""
    info = EXPERIMENTS[cfg.experiment]
    values = cfg.resolved()
    kwargs = {}
    for p in info.params:
        if values[p.key] is not None:
            kwargs[p.kwarg] = values[p.key]
    result = info.func(**kwargs)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    delimiter = "\t" if cfg.output_format == "tsv" else ","
    ext = cfg.output_format
    written = []
    for name, columns in result.series.items():
        path = cfg.out_dir / f"{name}.{ext}"
        write_table(path, columns, delimiter)
        written.append(path.name)
    checks_path = cfg.out_dir / f"checks.{ext}"
    write_table(checks_path, _checks_table(result.checks), delimiter)
    written.append(checks_path.name)

    manifest = dict(result.manifest)
    manifest["output_format"] = cfg.output_format
    manifest["files"] = sorted(written)
    (cfg.out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        if c.op == "info":
            status = "INFO"
        print(f"{status}  {c.name}: {c.value:.6g} {c.op} {c.threshold:.6g}")
    print(f"wrote {len(written) + 1} files to {cfg.out_dir}")
    return 0 if result.passed else 1


def list_experiments() -> str:
    width = max(len(name) for name in EXPERIMENTS)
    fig_width = max(len(info.figure) for info in EXPERIMENTS.values())
    lines = []
    for name, info in EXPERIMENTS.items():
        lines.append(f"{name:<{width}}  {info.figure:<{fig_width}}  "
                     f"{info.description}")
    return "\n".join(lines)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns, _ = build_parser().parse_known_args(argv)
        if ns.command == "list":
            print(list_experiments())
            return 0
        if ns.command != "run":
            raise ConfigError("expected a command: run or list")
        return run_experiment(parse_config(argv))
    except ProjectiveLimitError as err:
        v = err.validity
        print(f"error: {err}\nvalidity report: ratio={v.ratio:.6g} "
              f"limit={v.limit:.6g} valid={v.valid}", file=sys.stderr)
        return 2
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
