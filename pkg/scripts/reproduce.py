#!/usr/bin/env python3
"""Run the experiment presets through the CLI and compare every bound table.

Usage::

    python scripts/reproduce.py                 # exact-diagonalisation presets only
    python scripts/reproduce.py --tebd          # add the chain and Schwinger TEBD presets
    python scripts/reproduce.py --tebd --chi 40 --no-converge   # cheaper desk run

Outputs land in ``--output-dir`` (default ``./lgtrunc_output``), one folder
per preset, plus ``verdicts/<preset>_<stem>.csv`` for each bound comparison.
"""
import argparse
import json
import sys
import time
from pathlib import Path

from lgtrunc.cli import main as cli

EXACT = ["fig1", "fig2", "fig3", "eigenscan", "fig8"]
TEBD = ["fig4", "fig5", "fig6_7"]


def run(preset: str, out: Path, extra: list[str]) -> int:
    start = time.time()
    code = cli(["run", preset, "--output-dir", str(out), *extra])
    print(f"[{preset}] exit {code} in {time.time() - start:.1f} s", file=sys.stderr)
    return code


def compare_all(folder: Path, verdicts: Path) -> dict:
    verdicts.mkdir(parents=True, exist_ok=True)
    codes = {}
    for bound in sorted(folder.glob("*_bound.csv")):
        stem = bound.name[: -len("_bound.csv")]
        measured = folder / f"{stem}_measured.csv"
        if measured.exists():
            codes[stem] = cli(["compare", str(bound), str(measured),
                               "--output", str(verdicts / f"{folder.name}_{stem}.csv")])
    return codes


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--output-dir", default="lgtrunc_output")
    p.add_argument("--tebd", action="store_true", help="include the TEBD presets (long)")
    p.add_argument("--chi", type=int, help="starting bond dimension for TEBD presets")
    p.add_argument("--no-converge", action="store_true", help="single run per truncation, no chi growth")
    p.add_argument("--only", nargs="*", help="restrict to these presets")
    args = p.parse_args()

    out = Path(args.output_dir)
    presets = EXACT + (TEBD if args.tebd else [])
    if args.only:
        presets = [x for x in presets if x in args.only]
    status = {}
    for preset in presets:
        extra = []
        if preset in TEBD:
            if args.chi:
                extra += ["--chi", str(args.chi)]
            if args.no_converge:
                extra += ["--set", "tebd.converge=false"]
        code = run(preset, out, extra)
        status[preset] = {"exit": code}
        if code == 0:
            status[preset]["compare"] = compare_all(out / preset, out / "verdicts")
    print(json.dumps(status, indent=1))
    return 0 if all(s["exit"] == 0 for s in status.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
