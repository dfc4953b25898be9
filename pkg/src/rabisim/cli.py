"""Command-line runner.

Usage::

    rabisim run CONFIG [--out DIR] [--rtol R] [--atol A]
    rabisim preset NAME [NAME ...] [--out DIR] [--rtol R] [--atol A] [--jobs N]
    rabisim list-presets

Exit codes: 0 success, 2 invalid configuration, 3 solver failure,
4 Fock-window overflow.  ``RABISIM_OUTPUT_DIR`` overrides the default output
directory (``./rabisim-out``); ``--out`` overrides both.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import yaml

from .errors import IntegrationError, WindowOverflowError
from .scenario import ConfigError, load_config, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_WINDOW = 4
OUTPUT_ENV = "RABISIM_OUTPUT_DIR"
DEFAULT_OUTPUT = "rabisim-out"

log = logging.getLogger("rabisim")


def preset_names() -> list[str]:
    root = resources.files("rabisim") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def preset_text(name: str) -> str:
    path = resources.files("rabisim") / "presets" / f"{name}.yaml"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; see `rabisim list-presets`")
    return path.read_text()


def list_presets() -> str:
    """One line per bundled preset: its name and what it mirrors."""
    lines = []
    for name in preset_names():
        description = yaml.safe_load(preset_text(name)).get("description", "")
        lines.append(f"{name:18s} {description}")
    return "\n".join(lines)


def _output_dir(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT))


def run_text(text: str, out_dir: Path, rtol=None, atol=None, label: str = "config") -> int:
    """Run every scenario of one config text; returns an exit code."""
    try:
        _, scenarios = load_config(text, rtol, atol)
    except ConfigError as exc:
        print(f"{label}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for scenario in scenarios:
        try:
            manifest = run_scenario(scenario, out_dir, text)
        except WindowOverflowError as exc:
            print(f"{label}/{scenario.name}: window overflow: {exc}", file=sys.stderr)
            if exc.suggested is not None:
                print(f"suggested window: [{exc.suggested.n1}, {exc.suggested.n2}]", file=sys.stderr)
            return EXIT_WINDOW
        except IntegrationError as exc:
            print(f"{label}/{scenario.name}: solver failure: {exc}", file=sys.stderr)
            if exc.stats is not None:
                print(json.dumps(exc.stats.as_dict(), indent=2), file=sys.stderr)
            return EXIT_SOLVER
        except ConfigError as exc:
            print(f"{label}/{scenario.name}: configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        log.info("%s/%s done: %s", label, scenario.name, ", ".join(sorted(manifest["files"])))
    return EXIT_OK


def _run_preset(name: str, out_dir: str, rtol, atol) -> int:
    try:
        text = preset_text(name)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    return run_text(text, Path(out_dir) / name, rtol, atol, label=name)


def build_parser() -> argparse.ArgumentParser:
    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--rtol", type=float, help="relative tolerance override")
    tol.add_argument("--atol", type=float, help="absolute tolerance override")
    tol.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")

    parser = argparse.ArgumentParser(prog="rabisim", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[tol], help="run a scenario file")
    p_run.add_argument("config", help="YAML scenario file")

    p_preset = sub.add_parser("preset", parents=[tol], help="run bundled figure presets")
    p_preset.add_argument("names", nargs="+", metavar="NAME")
    p_preset.add_argument("--jobs", type=int, default=1, help="presets run concurrently (processes)")

    sub.add_parser("list-presets", help="list bundled presets")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "list-presets":
        print(list_presets())
        return EXIT_OK

    for name in ("rtol", "atol"):
        value = getattr(args, name)
        if value is not None and not value > 0:
            print(f"--{name} must be positive", file=sys.stderr)
            return EXIT_CONFIG
    out_dir = _output_dir(args.out)

    if args.command == "run":
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            print(f"cannot read {args.config}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return run_text(text, out_dir, args.rtol, args.atol, label=Path(args.config).name)

    if args.jobs < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs == 1 or len(args.names) == 1:
        codes = [_run_preset(n, str(out_dir), args.rtol, args.atol) for n in args.names]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_preset, args.names, [str(out_dir)] * len(args.names),
                                  [args.rtol] * len(args.names), [args.atol] * len(args.names)))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
