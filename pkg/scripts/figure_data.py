"""Emit the CSV/JSON data behind the three Chern-Simons figures.

    python scripts/figure_data.py [--out results/figures]
"""

import argparse
import sys

from domainwall.cli import main as cli


def run(out: str) -> int:
    jobs = [
        ["cs-wall", "--kappa", str(1 / 3), "--phi0", "0.5", "--x0", "0", "--L", "3", "--n", "1201",
         "--prefix", "fig1-wall"],
        ["cs-lump", "--kappa", "1", "--phi0", "0.5", "--form", "exact", "--L", "6", "--n", "1201",
         "--prefix", "fig2-lump-exact"],
        ["cs-lump", "--kappa", "1", "--phi0", "0.5", "--form", "printed", "--L", "6", "--n", "1201",
         "--prefix", "fig2-lump-printed"],
        ["cs-energy-curve", "--kappa", "1", "--kappa", "2", "--kappa", "4", "--prefix", "fig3-energy"],
        ["cs-energy-curve", "--kappa", "1", "--kappa", "2", "--kappa", "4", "--form", "printed",
         "--prefix", "fig3-energy-printed"],
    ]
    code = 0
    for j in jobs:
        rc = cli(j + ["--out", out])
        print(f"{j[0]:16s} -> {out}/{j[j.index('--prefix') + 1]}.csv  exit {rc}")
        code = max(code, rc)
    return code


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/figures")
    sys.exit(run(ap.parse_args().out))
