"""Command-line driver.

    reparam-qm run --config <path> [--out <dir>] [--seed <int>] [--set key=value ...]
    reparam-qm presets list
    reparam-qm presets run <name> [--out <dir>]

Exit status: 0 on success, 1 on a validation error, 2 on scenario failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import uuid
from importlib import resources
from pathlib import Path
from typing import List, Optional

from .config import ConfigError, ExperimentConfig, parse_config
from .runner import run

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2

log = logging.getLogger("reparam_qm")


def preset_names() -> List[str]:
    files = resources.files("reparam_qm").joinpath("presets").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".toml"))


def preset_text(name: str) -> str:
    path = resources.files("reparam_qm").joinpath("presets", f"{name}.toml")
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return path.read_text(encoding="utf-8")


def _description(text: str) -> str:
    first = text.lstrip().splitlines()[0] if text.strip() else ""
    return first.lstrip("# ").strip() if first.startswith("#") else ""


def _check_writable(directory: Path) -> None:
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = directory / f".write-probe-{uuid.uuid4().hex}"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output.directory {str(directory)!r} is not writable: {exc}") from exc


def _execute(cfg: ExperimentConfig, out: Optional[str]) -> int:
    directory = Path(out if out is not None else cfg.output.directory)
    _check_writable(directory)
    manifest = run(cfg, directory)
    if manifest.ok:
        for key, value in manifest.metrics.items():
            print(f"{key} = {value!r}")
        print(f"wrote {directory / 'manifest.json'}")
        return EXIT_OK
    print(f"scenario failed: {manifest.error}", file=sys.stderr)
    return EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reparam-qm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    p_pre = sub.add_parser("presets", help="list or run bundled presets")
    pre_sub = p_pre.add_subparsers(dest="action", required=True)
    pre_sub.add_parser("list")
    p_pre_run = pre_sub.add_parser("run")
    p_pre_run.add_argument("name")
    p_pre_run.add_argument("--out")
    p_pre_run.add_argument("--seed", type=int)
    p_pre_run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "presets" and args.action == "list":
            for name in preset_names():
                print(f"{name:20s} {_description(preset_text(name))}")
            return EXIT_OK
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        source = args.config if args.command == "run" else preset_text(args.name)
        cfg = parse_config(source, overrides)
        return _execute(cfg, args.out)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
