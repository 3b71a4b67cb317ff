#!/usr/bin/env python3
"""Error-probability curves for the optimized displacement receivers.

Writes one CSV per receiver (cyclic, bayes, nulling) plus the reference
bounds, over a logarithmic power grid, ready for plotting.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from pskrx.bench import helstrom_mpsk, sql_heterodyne
from pskrx.core import PskAlphabet
from pskrx.mc import IDEAL, estimate_error
from pskrx.optimize import optimize_beta_analytic, optimize_beta_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--points", type=int, default=15)
    ap.add_argument("--max-power", type=float, default=3.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("out"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    powers = np.geomspace(0.05, args.max_power, args.points)
    rows = {"cyclic": [], "bayes": [], "nulling": []}
    for a2 in powers:
        alphabet = PskAlphabet.from_power(args.m, a2)
        beta_c = optimize_beta_analytic(alphabet).beta_opt
        beta_b = optimize_beta_mc(alphabet, "bayes", IDEAL, 50_000, args.seed + 1).beta_opt
        sql = sql_heterodyne(alphabet.alpha, args.m)
        hel = helstrom_mpsk(alphabet.alpha, args.m)
        for name, strategy, beta in (
            ("cyclic", "cyclic", beta_c),
            ("bayes", "bayes", beta_b),
            ("nulling", "cyclic", 0.0),
        ):
            est = estimate_error(alphabet, beta, strategy, IDEAL, args.trials, args.seed)
            rows[name].append((a2, beta**2, est.p_err, est.std_err, sql, hel))
        print(f"power {a2:6.3f} done", file=sys.stderr)

    header = "alpha_sq,beta_sq,p_err,std_err,sql,helstrom\n"
    for name, data in rows.items():
        path = args.out / f"curve_{args.m}psk_{name}.csv"
        with open(path, "w") as fh:
            fh.write(header)
            for row in data:
                fh.write(",".join(f"{x:.10g}" for x in row) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
