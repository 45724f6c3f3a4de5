#!/usr/bin/env python3
"""Run every preset BER sweep and collect the CSVs in one directory.

Each preset is one curve bundle (single curves over a wide SNR grid,
scheme comparisons, the coded comparison, the barrier-period study, and
the turbulent-channel comparison).  At the default packet budget the
full set takes tens of minutes on one core; pass a smaller ``--packets``
for a quick look.
"""
from __future__ import annotations

import argparse
import pathlib
import sys
import time

from dpimsim.cli import main as cli_main

PRESETS = tuple(f"fig{n}" for n in range(4, 12))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results",
                        help="directory for <preset>.csv files")
    parser.add_argument("--only", nargs="+", choices=PRESETS, metavar="PRESET",
                        help="run a subset of presets (default: all)")
    parser.add_argument("--packets", type=int, default=None,
                        help="override packets per grid point")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    failures = []
    for preset in args.only or PRESETS:
        out = out_dir / f"{preset}.csv"
        cmd = ["sweep", "--preset", preset, "--out", str(out),
               "--seed", str(args.seed), "--workers", str(args.workers)]
        if args.packets is not None:
            cmd += ["--packets", str(args.packets)]
        start = time.perf_counter()
        code = cli_main(cmd)
        elapsed = time.perf_counter() - start
        status = "ok" if code == 0 else f"exit {code}"
        print(f"[{preset}] {status} in {elapsed:.0f} s -> {out}")
        if code != 0:
            failures.append(preset)
    if failures:
        print(f"failed presets: {', '.join(failures)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
