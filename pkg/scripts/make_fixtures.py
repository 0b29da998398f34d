"""Regenerate the bundled sample point sets (pinned seeds)."""

import argparse
from pathlib import Path

from segnn.io import write_points
from segnn.sim import PatternSpec, generate

SAMPLES = {
    "seg_sample.csv": PatternSpec("seg", 60, 60, 1 / 3, seed=20070101),
    "assoc_sample.csv": PatternSpec("assoc", 60, 60, 0.1, seed=20070102),
    "csr_sample.csv": PatternSpec("csr_independence", 100, 100, seed=20070103),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dest", default=Path(__file__).resolve().parents[1] / "src" / "segnn" / "fixtures")
    args = ap.parse_args()
    for name, spec in SAMPLES.items():
        path = Path(args.dest) / name
        write_points(path, generate(spec))
        print(f"wrote {path} ({spec.kind}, n=({spec.n1},{spec.n2}), seed={spec.seed})")


if __name__ == "__main__":
    main()
