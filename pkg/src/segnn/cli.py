"""Command-line front end: ``segnn {nn-stats,test,kfunc,simulate,fit-correction}``.

Exit status: 0 success, 2 invalid or degenerate data, 3 unsupported
request, 64 usage error.  JSON reports echo the full configuration
(including the seed) and the class-label mapping.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import DegenerateTableError, InvalidInputError, SegnnError
from .geometry import EUCLIDEAN, Metric, PointSet, Rectangle, buffer_filter
from .io import load_nnct, nnct_only_mode, read_points, write_csv, write_json
from .knn_tests import case_control, ce_all
from .moments import expected_counts
from .nnct import build_nnct, build_nngraph
from .nnct_tests import OVERALL_METHODS, PAPER_CORRECTION, analyze, dixon_cell, fit_mc_correction
from .numerics import format_p
from .relabel import EXACT
from .second_order import (
    csr_generator,
    default_bandwidth,
    diggle_d,
    envelope,
    pair_correlation,
    ripley_k_biv,
    ripley_k_uni,
    rl_generator,
)
from .sim import PatternSpec, pielou_samples, simulate

EXIT_OK, EXIT_DATA, EXIT_UNSUPPORTED, EXIT_USAGE = 0, 2, 3, 64
METHOD_CHOICES = ("pielou", "pielou-mc", "dixon", "v1", "v2", "v3", "cells", "ce", "all")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- argument helpers ---------------------------------------------------------


def _int_list(text: str) -> list[int]:
    """``1..5``, ``1-5`` or ``1,2,4``."""
    text = text.strip()
    for sep in ("..", "-"):
        if sep in text:
            a, b = text.split(sep, 1)
            return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def _nperm(text: str):
    return EXACT if text == EXACT else int(text)


def _region(text: str | None) -> Rectangle | None:
    if not text:
        return None
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 4:
        raise UsageError("--region needs xmin,ymin,xmax,ymax")
    return Rectangle(*vals)


def _metric(args, ps: PointSet) -> Metric:
    return EUCLIDEAN if args.metric == "euclidean" else Metric("toroidal", ps.region)


def _class_id(ps: PointSet, name: str) -> int:
    names = [str(c) for c in ps.class_names]
    if name in names:
        return names.index(name)
    raise UsageError(f"unknown class {name!r}; classes are {names}")


def _base_mask(args, ps: PointSet):
    if not args.buffer or args.buffer == "none":
        return None
    mode, _, width = args.buffer.partition(":")
    return buffer_filter(ps, float(width) if width else None, mode)


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _mapping(ps: PointSet) -> dict:
    return {str(c): i for i, c in enumerate(ps.class_names)}


RESULT_COLUMNS = ("method", "statistic", "df", "p_asymptotic", "p_permutation", "null_model")


def _emit(args, report: dict, text_lines: list[str]):
    if args.format == "json":
        write_json(args.out, report)
    elif args.format == "csv":
        rows = report.get("results", []) + report.get("cell_tests", [])
        rows += report.get("cuzick_edwards", {}).get("results", [])
        write_csv(args.out, rows, RESULT_COLUMNS)
    else:
        out = "\n".join(text_lines)
        if args.out and args.out != "-":
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(out + "\n")
        else:
            print(out)


def _result_line(r) -> str:
    df = "" if r.df is None else f" df={r.df}"
    perm = "" if r.p_permutation is None else f"  p_perm={format_p(r.p_permutation)}"
    p = "" if r.p_asymptotic is None else f"  p={format_p(r.p_asymptotic)}"
    return f"  {r.method:<14s} {r.statistic:10.4f}{df}{p}{perm}"


def _small_cell_note(row_sums) -> str | None:
    if np.any(expected_counts(row_sums) <= 5):
        return ("note: some expected cell counts are <= 5; asymptotic p-values may be unreliable, "
                "prefer --nperm for permutation p-values")
    return None


# --- subcommands --------------------------------------------------------------


def cmd_nn_stats(args) -> int:
    ps = read_points(args.input, _region(args.region))
    g = build_nngraph(ps, _metric(args, ps))
    t = build_nnct(ps, g, _base_mask(args, ps))
    report = {
        "command": "nn-stats",
        "config": _config(args),
        "label_mapping": _mapping(ps),
        "n": ps.n,
        "class_sizes": ps.class_sizes.tolist(),
        "nnct": t.to_dict(),
        "Q": g.Q,
        "R": g.R,
        "Qk": g.Qk,
        "mean_nn_distance": float(np.mean(g.nn_dist)),
        "sd_nn_distance": float(np.std(g.nn_dist, ddof=1)),
    }
    lines = [f"n={ps.n} classes={_mapping(ps)}", f"Q={g.Q} R={g.R} Qk={g.Qk}",
             f"NN distance mean={report['mean_nn_distance']:.6g} sd={report['sd_nn_distance']:.6g}",
             "NNCT (rows base, columns NN):"]
    lines += ["  " + " ".join(f"{v:6d}" for v in row) for row in t.counts]
    _emit(args, report, lines)
    return EXIT_OK


def _methods(args) -> tuple[list, bool, bool]:
    chosen = []
    for item in args.method or ["all"]:
        chosen += [m.strip() for m in item.split(",") if m.strip()]
    for m in chosen:
        if m not in METHOD_CHOICES:
            raise UsageError(f"unknown method {m!r}; choose from {', '.join(METHOD_CHOICES)}")
    overall = [m.replace("-", "_") for m in chosen if m in ("pielou", "pielou-mc", "dixon", "v1", "v2", "v3")]
    if "all" in chosen:
        overall = list(OVERALL_METHODS)
    return list(dict.fromkeys(overall)), "cells" in chosen or "all" in chosen, "ce" in chosen


def cmd_test(args) -> int:
    if bool(args.input) == bool(args.nnct):
        raise UsageError("give exactly one of --input or --nnct")
    overall, cells, ce = _methods(args)
    if ce and args.case_class is None:
        raise UsageError("--method ce needs --case-class")
    start = time.perf_counter()
    report = {"command": "test", "config": _config(args), "version": __version__}
    lines = []
    null = args.null

    if args.nnct:
        if ce:
            raise UsageError("Cuzick-Edwards tests need coordinates (--input)")
        data = load_nnct(args.nnct)
        results, refused = nnct_only_mode(data["counts"], data["Q"], data["R"], overall, null, strict=False)
        report.update(label_mapping={str(c): i for i, c in enumerate(data["classes"])},
                      nnct=data["counts"].tolist(), Q=data["Q"], R=data["R"],
                      results=[r.to_dict() for r in results.values()], refused=refused,
                      p_permutation="unavailable without coordinates")
        lines.append(f"NNCT-only mode ({data.get('name', args.nnct)}): Q={data['Q']} R={data['R']}")
        lines += [_result_line(r) for r in results.values()]
        lines += [f"  {k:<14s} refused: {msg}" for k, msg in refused.items()]
        note = _small_cell_note(data["counts"].sum(axis=1))
    else:
        ps = read_points(args.input, _region(args.region))
        metric = _metric(args, ps)
        report["label_mapping"] = _mapping(ps)
        note = None
        results = {}
        if overall or cells:
            t, g, cm, results = analyze(ps, overall, null, args.nperm, args.seed, metric, _base_mask(args, ps),
                                        args.cov_nperm, args.threads)
            report.update(nnct=t.to_dict(), Q=g.Q, R=g.R, moments=cm.source)
            lines.append(f"n={ps.n} Q={g.Q} R={g.R} classes={_mapping(ps)}")
            lines += [_result_line(r) for r in results.values()]
            if cells:
                cell_res = [dixon_cell(t, cm, i, j, null_model=null) for i in range(t.q) for j in range(t.q)]
                report["cell_tests"] = [r.to_dict() for r in cell_res]
                lines += [_result_line(r) for r in cell_res]
            note = _small_cell_note(t.row_sums)
        report["results"] = [r.to_dict() for r in results.values()]
        if ce:
            case = _class_id(ps, args.case_class)
            control = None if args.control_class is None else _class_id(ps, args.control_class)
            view = case_control(ps, case, control)
            ks = _int_list(args.k)
            combos = [_int_list(c) for c in args.combine or []]
            nperm = args.nperm or 999
            ce_res = ce_all(view, ks, combos, metric, nperm, args.seed, "rl", args.threads)
            report["cuzick_edwards"] = {"case": args.case_class, "control": args.control_class or "all others",
                                        "results": [r.to_dict() for r in ce_res]}
            lines.append(f"Cuzick-Edwards, cases={args.case_class}:")
            lines += [_result_line(r) for r in ce_res]
    if note:
        report["note"] = note
        lines.append(note)
    report["wall_time_s"] = time.perf_counter() - start
    if args.alpha is not None:
        report["alpha"] = args.alpha
    _emit(args, report, lines)
    return EXIT_OK


def cmd_kfunc(args) -> int:
    ps = read_points(args.input, _region(args.region))
    classes = [_class_id(ps, c) for c in args.classes.split(",")] if args.classes else []
    r = ps.region
    tmax = args.tmax if args.tmax else 0.25 * min(r.width, r.height)
    grid = np.linspace(tmax / args.nt, tmax, args.nt)
    which = args.which
    if which in ("Lij", "D") and len(classes) != 2:
        raise UsageError(f"--which {which} needs --classes A,B")
    gen = rl_generator(ps) if args.null == "rl" else csr_generator(ps)
    start = time.perf_counter()
    if which == "D":
        est = diggle_d(ps, classes[0], classes[1], grid, args.nsim, args.seed)
        rows = est.rows()
    else:
        if which == "Lii":
            cls = classes[0] if classes else None

            def curve(p):
                return ripley_k_uni(p, grid, cls).info["L"]

        elif which == "Lij":

            def curve(p):
                return ripley_k_biv(p, classes[0], classes[1], grid).info["L"]

        else:
            pc = tuple(classes) if classes else None
            h = default_bandwidth(ps, pc) if args.bandwidth is None else args.bandwidth
            grid = grid[grid >= h]
            grid = grid[grid + h <= 0.5 * min(r.width, r.height)]
            if grid.size == 0:
                raise InvalidInputError("no grid points satisfy bandwidth <= t <= half side - bandwidth")

            def curve(p):
                return pair_correlation(p, grid, h, pc).values

        values = curve(ps)
        lo, hi, _ = envelope(gen, curve, args.nsim, args.band, args.seed) if args.nsim else (None, None, None)
        rows = ((float(t), float(v), None if lo is None else float(lo[i]), None if hi is None else float(hi[i]))
                for i, (t, v) in enumerate(zip(grid, values)))
    rows = [dict(zip(("t", "estimate", "lower", "upper"), row)) for row in rows]
    write_csv(args.out, rows, ("t", "estimate", "lower", "upper"))
    if args.report:
        write_json(args.report, {"command": "kfunc", "config": _config(args), "label_mapping": _mapping(ps),
                                 "wall_time_s": time.perf_counter() - start})
    return EXIT_OK


def _spec(args) -> PatternSpec:
    sizes = _int_list(args.sizes)
    if len(sizes) != 2:
        raise UsageError("--sizes needs n1,n2")
    return PatternSpec.parse(args.null or args.alt, sizes[0], sizes[1], args.seed)


def cmd_simulate(args) -> int:
    spec = _spec(args)
    tests = [t.strip().replace("-", "_") for t in args.tests.split(",")] if args.tests else list(OVERALL_METHODS)
    rep = simulate(spec, tests, args.nmc, args.alpha, args.seed, args.threads)
    report = {"command": "simulate", "config": _config(args), "version": __version__, **rep.to_dict()}
    if args.out and args.out.endswith(".csv"):
        write_csv(args.out, rep.rows(), ("test", "rate", "se", "flag"))
    else:
        write_json(args.out, report)
    return EXIT_OK


def cmd_fit_correction(args) -> int:
    start = time.perf_counter()
    if args.samples:
        x = np.loadtxt(args.samples, dtype=float, ndmin=1)
        source = {"samples": args.samples}
    else:
        spec = _spec(args)
        x = pielou_samples(spec, args.nmc, args.seed, args.threads)
        source = {"spec": spec.__dict__}
    degenerate = int(np.count_nonzero(~np.isfinite(x)))
    x = x[np.isfinite(x)]
    corr = fit_mc_correction(x)
    report = {
        "command": "fit-correction",
        "config": _config(args),
        "source": source,
        "n_samples": int(x.size),
        "degenerate_replicates": degenerate,
        "mean": float(x.mean()),
        "variance": float(x.var(ddof=1)),
        "delta": corr.delta,
        "gamma": corr.gamma,
        "reference": {"delta": PAPER_CORRECTION.delta, "gamma": PAPER_CORRECTION.gamma},
        "wall_time_s": time.perf_counter() - start,
    }
    write_json(args.out, report)
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    threads_default = None if "SEGNN_THREADS" not in os.environ else int(os.environ["SEGNN_THREADS"])
    p = _Parser(prog="segnn", description="Nearest-neighbor segregation and association tests for labeled point patterns.")
    p.add_argument("--version", action="version", version=f"segnn {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, points=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=threads_default,
                        help="worker threads (default: SEGNN_THREADS or 1)")
        if points:
            sp.add_argument("--region", help="xmin,ymin,xmax,ymax (default: # region line or bounding box)")
            sp.add_argument("--metric", choices=("euclidean", "toroidal"), default="euclidean")

    sp = sub.add_parser("nn-stats", help="NN graph summary: NNCT, Q, R")
    sp.add_argument("--input", required=True)
    sp.add_argument("--buffer", help="none | inner[:width] | outer[:width]")
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_nn_stats)

    sp = sub.add_parser("test", help="NNCT and Cuzick-Edwards tests")
    sp.add_argument("--input", help="points CSV (x,y,label)")
    sp.add_argument("--nnct", help="summary fixture name (pielou, leukemia, swamp) or JSON path")
    sp.add_argument("--method", action="append", help=f"comma list from {', '.join(METHOD_CHOICES)}")
    sp.add_argument("--null", choices=("rl", "csr"), default="rl")
    sp.add_argument("--nperm", type=_nperm, default=None, help="relabelings for permutation p-values, or 'exact'")
    sp.add_argument("--cov-nperm", type=int, default=2000, help="relabelings for the q > 2 covariance")
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--case-class")
    sp.add_argument("--control-class")
    sp.add_argument("--k", default="1..5")
    sp.add_argument("--combine", action="append", help="k set for a combined test, e.g. 1-5")
    sp.add_argument("--buffer", help="none | inner[:width] | outer[:width]")
    sp.add_argument("--format", choices=("json", "csv", "text"), default="text")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("kfunc", help="L, g or D curves with envelopes (CSV: t,estimate,lower,upper)")
    sp.add_argument("--input", required=True)
    sp.add_argument("--which", choices=("Lii", "Lij", "g", "D"), required=True)
    sp.add_argument("--classes", help="A or A,B")
    sp.add_argument("--tmax", type=float)
    sp.add_argument("--nt", type=int, default=50)
    sp.add_argument("--nsim", type=int, default=99)
    sp.add_argument("--band", type=float, default=0.95)
    sp.add_argument("--null", choices=("csr", "rl"), default="csr", help="envelope null for Lii, Lij, g")
    sp.add_argument("--bandwidth", type=float)
    sp.add_argument("--out", default="-")
    sp.add_argument("--report", help="optional JSON run record")
    common(sp)
    sp.set_defaults(func=cmd_kfunc)

    for name, func, helptext in (("simulate", cmd_simulate, "empirical size or power"),
                                 ("fit-correction", cmd_fit_correction, "refit the Pielou location/scale correction")):
        sp = sub.add_parser(name, help=helptext)
        if name == "simulate":
            g = sp.add_mutually_exclusive_group(required=True)
            g.add_argument("--null", choices=("csr", "rl1", "rl2", "rl3"))
            g.add_argument("--alt", help="seg:s or assoc:r")
            sp.add_argument("--sizes", default="50,50")
            sp.add_argument("--tests", help="comma list of NNCT tests, or ce:k")
            sp.add_argument("--nmc", type=int, default=2000)
            sp.add_argument("--alpha", type=float, default=0.05)
        else:
            sp.add_argument("--null", choices=("csr", "rl1", "rl2", "rl3"), default="csr")
            sp.add_argument("--alt", default=None, help=argparse.SUPPRESS)
            sp.add_argument("--sizes", default="100,100")
            sp.add_argument("--nmc", type=int, default=10000)
            sp.add_argument("--samples", help="file of Pielou statistics, one per line (skips simulation)")
        sp.add_argument("--out", default="-")
        common(sp, points=False)
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"segnn: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidInputError, DegenerateTableError) as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return EXIT_DATA
    except SegnnError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
