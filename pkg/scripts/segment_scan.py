"""Scan the universal functional along a segment between two random
interior 1RDMs and write the values to CSV.

Quick visual check of convexity: the second differences of the f_value
column should never dip below solver noise.

    python scripts/segment_scan.py --nb 4 --n 2 --beta 2.0 --out scan.csv
"""

import argparse
from pathlib import Path

import numpy as np

from rdmft.ensemble import EnsembleParams, OneRdm
from rdmft.fock import Statistics
from rdmft.functional import universal_functional
from rdmft.models import ModelSpec, build_system
from rdmft.representability import random_rdm
from rdmft.serialize import write_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nb", type=int, default=4, help="orbitals")
    parser.add_argument("--n", type=int, default=2, help="particles")
    parser.add_argument("--statistics", choices=["fermion", "boson"], default="fermion")
    parser.add_argument("--beta", type=float, default=1.0)
    parser.add_argument("--points", type=int, default=21)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="segment_scan.csv")
    args = parser.parse_args()

    statistics = Statistics(args.statistics)
    system = build_system(
        ModelSpec(kind="random_full", nb=args.nb, n=args.n, statistics=statistics, seed=args.seed)
    )
    params = EnsembleParams(args.beta)
    rng = np.random.default_rng(args.seed)
    start = random_rdm(args.nb, args.n, statistics, interior=True, seed=rng)
    stop = random_rdm(args.nb, args.n, statistics, interior=True, seed=rng)

    rows = []
    for lam in np.linspace(0.0, 1.0, args.points):
        gamma = OneRdm((1 - lam) * start.matrix + lam * stop.matrix)
        f_value, gradient = universal_functional(gamma, system, params)
        rows.append((float(lam), f_value, float(np.linalg.norm(gradient.matrix))))

    path = write_csv(
        Path(args.out),
        ["lambda", "f_value", "gradient_norm"],
        rows,
        {"command": "segment_scan", "beta": args.beta, "seed": args.seed},
    )
    values = np.array([row[1] for row in rows])
    curvature = float(np.diff(values, 2).min()) if args.points >= 3 else float("nan")
    print(f"{args.points} points -> {path}; min second difference {curvature:.3e}")


if __name__ == "__main__":
    main()
