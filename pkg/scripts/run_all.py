"""Run every experiment config in scripts/configs and print a gate summary.

Usage: python scripts/run_all.py [--out DIR] [--only NAME ...]
"""
import argparse
import json
import sys
import time
from pathlib import Path

from levelset_lab.cli import main as cli_main

CONFIGS = Path(__file__).resolve().parent / "configs"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--only", nargs="*", help="config stems to run, e.g. zero_level_dim")
    args = ap.parse_args(argv)

    worst = 0
    for cfg in sorted(CONFIGS.glob("*.json")):
        if args.only and cfg.stem not in args.only:
            continue
        experiment = json.loads(cfg.read_text())["experiment"]
        t0 = time.perf_counter()
        code = cli_main([experiment, "--config", str(cfg), "--out", str(args.out / cfg.stem)])
        status = {0: "PASS", 1: "GATE FAIL", 2: "CONFIG ERROR"}.get(code, f"exit {code}")
        print(f"{cfg.stem:24s} {status:12s} {time.perf_counter() - t0:7.1f} s", flush=True)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
