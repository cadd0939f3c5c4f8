"""Command-line scenario runner.

Subcommands ``simulate``, ``sweep``, ``fit`` and ``validate`` each take a
scenario file (``--config``) and write a ``#``-headed tab-separated table
plus a JSON metadata file into ``--out``.

Exit codes: 0 success, 1 validation thresholds not met, 2 invalid
configuration or input, 3 integrator or solver failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from . import __version__
from .config import ConfigError, Scenario, load_scenario
from .dynamics import IntegrationError, SteadyStateError
from .runner import UNITS, Table, fit_parameters, simulate, sweep, validate
from .spectra import FitError, SpectrumParseError

logger = logging.getLogger("antenna_sps")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

WORKERS_ENV = "ANTENNA_SPS_WORKERS"


def _unit(name: str) -> str:
    for suffix in ("_full", "_eff", "_deviation"):
        if name.endswith(suffix):
            return "1" if suffix == "_deviation" else UNITS.get(name[: -len(suffix)], "1")
    return UNITS.get(name, "1")


def format_table(table: Table, scenario: Scenario, command: str) -> str:
    names = table.names()
    lines = [
        f"# antenna_sps {__version__} {command} {scenario.name}",
        "# " + "\t".join(f"{n}[{_unit(n)}]" for n in names),
    ]
    data = table.as_array()
    lines += ["\t".join(f"{x:.12e}" for x in row) for row in data]
    return "\n".join(lines) + "\n"


def _plain(value):
    """JSON-safe conversion of numpy scalars and arrays."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def metadata(table: Optional[Table], scenario: Scenario, command: str, **extra) -> str:
    doc = {
        "tool": "antenna_sps",
        "version": __version__,
        "command": command,
        "scenario": scenario.resolved(),
    }
    if table is not None:
        doc["columns"] = [{"name": n, "unit": _unit(n)} for n in table.names()]
        doc["diagnostics"] = table.diagnostics
        doc["summary"] = table.summary
    doc.update(extra)
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_outputs(out: Path, scenario: Scenario, table: Table, command: str, **extra) -> None:
    _write(out / scenario.table_name, format_table(table, scenario, command))
    _write(out / scenario.metadata_name, metadata(table, scenario, command, **extra))


def run_dynamics(scenario: Scenario, out: Path) -> int:
    table = simulate(scenario)
    _write_outputs(out, scenario, table, "simulate")
    for key, value in table.summary.items():
        print(f"{scenario.name}: {key} = {value:.6g}")
    return EXIT_OK


def run_sweep(scenario: Scenario, out: Path, workers: int = 1) -> int:
    if "sweep" not in scenario.raw:
        raise ConfigError(f"{scenario.name}: sweep section required")
    table = sweep(scenario, workers=workers)
    _write_outputs(out, scenario, table, "sweep")
    print(f"{scenario.name}: {table.diagnostics['points']} grid points written")
    return EXIT_OK


def run_fit(scenario: Scenario, out: Path) -> int:
    if "fit" not in scenario.raw:
        raise ConfigError(f"{scenario.name}: fit section required")
    fragment = fit_parameters(scenario)
    name = scenario.raw.get("output", {}).get("table", f"{scenario.name}.params.yaml")
    _write(out / name, yaml.safe_dump(_plain(fragment), sort_keys=True))
    _write(out / scenario.metadata_name, metadata(None, scenario, "fit", result=fragment))
    for key, value in sorted(fragment["params"].items()):
        print(f"{scenario.name}: {key} = {value:.6g}")
    return EXIT_OK


def run_validate(scenario: Scenario, out: Path) -> int:
    report = validate(scenario)
    bounds = {"min_deviation": report.min_deviation, "max_deviation": report.max_deviation}
    _write_outputs(out, scenario, report.table, "validate", bounds=bounds, passed=report.passed)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{scenario.name}: max relative rho_ee deviation {report.rho_ee_deviation:.4f} "
          f"(bounds {report.min_deviation}, {report.max_deviation}) {verdict}")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV}={raw!r} is not an integer")
    if value < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="antenna-sps", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "time evolution of one scenario"),
        ("sweep", "steady states over a parameter grid"),
        ("fit", "loss rates and couplings from spectra"),
        ("validate", "full versus effective model comparison"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="scenario YAML file")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
        p.add_argument("--tolerance-override", action="append", default=[], metavar="KEY=VAL",
                       help="override integrator.* or validate.* entries; repeatable")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "sweep":
            p.add_argument("--workers", type=int, default=None,
                           help=f"parallel grid workers (default: ${WORKERS_ENV} or 1)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scenario = load_scenario(args.config, overrides=args.tolerance_override)
        if args.command == "simulate":
            return run_dynamics(scenario, args.out)
        if args.command == "sweep":
            workers = args.workers if args.workers is not None else default_workers()
            if workers < 1:
                raise ConfigError("--workers must be >= 1")
            return run_sweep(scenario, args.out, workers)
        if args.command == "fit":
            return run_fit(scenario, args.out)
        return run_validate(scenario, args.out)
    except (ConfigError, SpectrumParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, SteadyStateError, FitError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
