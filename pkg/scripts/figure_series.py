"""Second-order curves with envelopes for a two-class point set, as CSV series.

For classes A and B writes ``L_A-A.csv``, ``L_B-B.csv``, ``L_A-B.csv`` (each as
L(t) - t with a CSR or RL envelope), ``g_A-A.csv``, ``g_B-B.csv``, ``g_A-B.csv``
and ``D.csv`` (Diggle's D with +/- 2 relabeling SE) into ``--outdir``.
Defaults to the bundled segregation sample.
"""

import argparse
import csv
from importlib import resources
from pathlib import Path

import numpy as np

from segnn.io import read_points
from segnn.second_order import (
    csr_generator,
    default_bandwidth,
    diggle_d,
    envelope,
    pair_correlation,
    ripley_k_biv,
    ripley_k_uni,
    rl_generator,
)


def write_series(path, grid, values, lo, hi):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "estimate", "lower", "upper"])
        for row in zip(grid, values, lo, hi):
            w.writerow([f"{v:.6g}" for v in row])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", default=str(resources.files("segnn.fixtures").joinpath("seg_sample.csv")))
    ap.add_argument("--outdir", default="figure_series")
    ap.add_argument("--null", choices=("csr", "rl"), default="csr", help="envelope null for L and g")
    ap.add_argument("--nsim", type=int, default=99)
    ap.add_argument("--nt", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    ps = read_points(args.input)
    if ps.q != 2:
        raise SystemExit("figure_series expects exactly two classes")
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    names = [str(c) for c in ps.class_names]
    tmax = 0.25 * min(ps.region.width, ps.region.height)
    grid = np.linspace(tmax / args.nt, tmax, args.nt)
    gen = rl_generator(ps) if args.null == "rl" else csr_generator(ps)

    def save(name, curve, t):
        lo, hi, _ = envelope(gen, curve, args.nsim, 0.95, args.seed)
        write_series(out / f"{name}.csv", t, curve(ps), lo, hi)
        print(f"wrote {out / name}.csv")

    for i, j in ((0, 0), (1, 1), (0, 1)):
        label = f"{names[i]}-{names[j]}"
        if i == j:
            save(f"L_{label}", lambda p, i=i: ripley_k_uni(p, grid, i).info["L"] - grid, grid)
        else:
            save(f"L_{label}", lambda p: ripley_k_biv(p, 0, 1, grid).info["L"] - grid, grid)
        h = default_bandwidth(ps, (i, j))
        tg = grid[(grid >= h) & (grid + h <= 2 * tmax)]
        save(f"g_{label}", lambda p, i=i, j=j, h=h, tg=tg: pair_correlation(p, tg, h, (i, j)).values, tg)
    d = diggle_d(ps, 0, 1, grid, args.nsim, args.seed)
    write_series(out / "D.csv", grid, d.values, d.lower, d.upper)
    print(f"wrote {out / 'D.csv'}")


if __name__ == "__main__":
    main()
