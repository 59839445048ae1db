"""``levelset-lab <subcommand> --config <file> [--seed N] [--out DIR]``.

Exit codes: 0 when every gate passes, 1 on a gate failure, 2 on a usage or config error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import MODULE_VERSIONS, __version__
from .experiments import EXPERIMENTS, ConfigError, Report, run_experiment, worker_count, _jsonable
from .simulate import write_path_csv, write_paths_binary

log = logging.getLogger("levelset_lab")

EXIT_OK, EXIT_GATE, EXIT_USAGE = 0, 1, 2

COMMON_KEYS = {"experiment", "seed", "tolerance", "workers", "description"}
KEYS = {
    "symbol-report": {"model", "profile", "grid"},
    "indices": {"model", "profile", "grid", "sets"},
    "classify": {"model", "profile", "grid", "measure", "gamma", "n", "d", "expect"},
    "subordinator-validate": {"gammas", "samples", "scaling_gamma"},
    "zero-level-dim": {"alpha", "paths", "steps", "c_eps"},
    "collision-times-dim": {"alpha", "paths", "steps", "c_eps"},
    "collision-set-dim": {"alpha", "beta", "paths", "steps", "c_eps", "monotone_alphas"},
    "level-set-bounds": {"alpha", "target", "d", "paths", "steps", "c_eps"},
    "simulate": {"scheme", "params", "paths", "steps", "horizon", "format"},
    "dim": {"set", "method", "expected", "k_range", "M"},
}


def _line_of(text: str, key: Optional[str]) -> Optional[int]:
    if not key:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_config(path: Path, experiment: str) -> dict:
    """Parse and validate a JSON config; errors carry the offending line."""
    text = path.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}:1: top level must be a JSON object")
    named = cfg.get("experiment", experiment)
    if named != experiment:
        raise ConfigError(f"{path}:{_line_of(text, 'experiment')}: config is for {named!r}, not {experiment!r}")
    unknown = sorted(set(cfg) - COMMON_KEYS - KEYS[experiment])
    if unknown:
        raise ConfigError(f"{path}:{_line_of(text, unknown[0])}: unknown key {unknown[0]!r} for {experiment}")
    return cfg


def config_hash(cfg: dict, seed: int) -> str:
    canon = json.dumps({**cfg, "seed": seed}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def write_report(rep: Report, cfg: dict, seed: int, out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, table in rep.tables.items():
        p = out / f"{name}.csv"
        with open(p, "w", newline="") as fh:
            fh.write(",".join(table.header) + "\n")
            for row in table.rows:
                fh.write(",".join(row) + "\n")
        files.append(p.name)
    if rep.samples:
        fmt = cfg.get("format", "csv")
        if fmt in ("binary", "both"):
            write_paths_binary(out / "paths.bin", rep.samples)
            files.append("paths.bin")
        if fmt in ("csv", "both"):
            for s in rep.samples:
                p = out / f"path_{s.index:04d}.csv"
                write_path_csv(p, s)
                files.append(p.name)
    summary = {
        "experiment": rep.experiment,
        "config_hash": config_hash(cfg, seed),
        "seed": seed,
        "versions": {"package": __version__, **MODULE_VERSIONS},
        "passed": rep.passed,
        "gates": rep.gates,
        "summary": _jsonable(rep.summary),
        "files": files,
    }
    p = out / "summary.json"
    p.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levelset-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"levelset-lab {__version__}")
    sub = ap.add_subparsers(dest="experiment", metavar="subcommand", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path, help="JSON experiment config")
        sp.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
        sp.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config, args.experiment)
        seed = args.seed if args.seed is not None else cfg.get("seed")
        if not isinstance(seed, int):
            raise ConfigError(f"{args.config}: a master seed is required (config 'seed' or --seed)")
        body = {k: v for k, v in cfg.items() if k not in ("experiment", "seed")}
        rep = run_experiment(args.experiment, body, seed, cfg.get("workers"))
    except ConfigError as exc:
        msg = str(exc)
        if exc.key and not msg.startswith(str(args.config)):
            line = _line_of(args.config.read_text(), exc.key)
            msg = f"{args.config}:{line if line else '?'}: {msg}"
        print(f"config error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    path = write_report(rep, body, seed, args.out / args.experiment)
    for g in rep.gates:
        log.info("%-28s %s  value=%s", g["name"], "PASS" if g["passed"] else "FAIL", g["value"])
    log.info("report: %s (workers=%d)", path, worker_count(cfg.get("workers")))
    return EXIT_OK if rep.passed else EXIT_GATE


if __name__ == "__main__":
    sys.exit(main())
