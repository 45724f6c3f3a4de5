#!/usr/bin/env python3
"""Plot BER-vs-SNR curves from one or more sweep CSVs.

Each (scheme, detector, coded) group in the input becomes one simulated
curve; exact bounds, where present, are drawn dashed in the matching
color.  Matplotlib is imported lazily so the simulation package itself
never depends on it.
"""
from __future__ import annotations

import argparse
import csv
import math
from collections import defaultdict


def _load(paths: list[str]) -> dict[tuple, dict[str, list[float]]]:
    curves: dict[tuple, dict[str, list[float]]] = defaultdict(
        lambda: {"snr": [], "ber": [], "bound": []})
    for path in paths:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                key = (row["scheme"], row["detector"], row["coded"])
                curve = curves[key]
                snr = float(row["snr_db"])
                if row["ber_sim"]:
                    curve["snr"].append(snr)
                    curve["ber"].append(float(row["ber_sim"]))
                if row["ber_bound_exact"]:
                    curve["bound"].append((snr, float(row["ber_bound_exact"])))
    return curves


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", nargs="+", help="sweep CSV files")
    parser.add_argument("--out", default="ber_curves.png")
    parser.add_argument("--ber-floor", type=float, default=1e-6,
                        help="clip the y axis at this BER")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    curves = _load(args.csv)
    if not curves:
        parser.error("no rows found in the given files")

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for (scheme, detector, coded), curve in sorted(curves.items()):
        label = f"{scheme}/{detector}" + (" coded" if coded == "1" else "")
        pts = [(s, b) for s, b in zip(curve["snr"], curve["ber"])
               if b >= args.ber_floor]
        line = None
        if pts:
            line, = ax.semilogy(*zip(*pts), marker="o", markersize=3.5,
                                label=label)
        if curve["bound"]:
            bound = [(s, min(b, 1.0)) for s, b in sorted(set(curve["bound"]))
                     if b >= args.ber_floor]
            if bound:
                color = line.get_color() if line else None
                ax.semilogy(*zip(*bound), linestyle="--", color=color,
                            alpha=0.8, label=f"{label} bound")
    ax.set_xlabel("electrical SNR (dB)")
    ax.set_ylabel("bit error rate")
    ax.set_ylim(bottom=args.ber_floor)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if args.title:
        ax.set_title(args.title)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out} ({len(curves)} curve groups)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
