"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line; the lines are echoed in the
pytest terminal summary under "acceptance criteria".  Run on its own with
``pytest tests/test_acceptance.py -s`` to also see them inline.
"""

import itertools
import json
import time
from fractions import Fraction

import numpy as np
import pytest
from conftest import UNIT, brute_knn, labelings, table_from_nn

from segnn.cli import main
from segnn.geometry import PointSet
from segnn.knn_tests import case_control, ce_tk
from segnn.moments import analytic_moments, column_sum_cov, diag_cell_covariance, full_cov_2class
from segnn.nnct import build_nnct, build_nngraph
from segnn.nnct_tests import OVERALL_METHODS, delta_c, dixon_overall, dixon_r_form, overall_statistic, summary_tests
from segnn.second_order import csr_generator, envelope, pair_correlation, ripley_k_uni, diggle_d
from segnn.sim import PatternSpec, empirical_power, empirical_size

ORDER = ("pielou", "dixon", "v1", "v2", "v3", "pielou_mc")


def _published(counts, Q, R, stats, pvals, p_tol):
    start = time.perf_counter()
    res = summary_tests(np.array(counts), Q, R)
    elapsed = time.perf_counter() - start
    bad = []
    for m, s in zip(ORDER, stats):
        if abs(res[m].statistic - s) > 0.01:
            bad.append(f"{m} stat {res[m].statistic:.4f} vs {s}")
    for m, p in pvals.items():
        got = res[m].p_asymptotic
        ok = f"{got:.4f}".lstrip("0") == p if p_tol is None else abs(got - float(p)) <= p_tol
        if not ok:
            bad.append(f"{m} p {got:.5f} vs {p}")
    shown = " ".join(f"{m}={res[m].statistic:.2f}" for m in ORDER)
    return bad, elapsed, shown


def test_criterion_01_pielou_data(acceptance):
    bad, elapsed, shown = _published(
        [[137, 23], [38, 30]], 162, 134, (23.66, 19.67, 12.73, 19.29, 13.09, 14.41),
        {"dixon": ".0001", "v1": ".0004", "v2": ".0001", "v3": ".0003", "pielou_mc": ".0001"}, None)
    acceptance(1, not bad and elapsed < 1, f"Pielou data: {shown}; {elapsed:.3f}s {'; '.join(bad)}")


def test_criterion_02_leukemia(acceptance):
    bad, elapsed, shown = _published(
        [[25, 41], [39, 113]], 152, 142, (3.31, 2.25, 1.98, 2.10, 2.13, 2.02),
        dict(zip(ORDER, (".0687", ".3249", ".1599", ".3505", ".1449", ".1547"))), 0.003)
    acceptance(2, not bad and elapsed < 1, f"leukemia: {shown}; {elapsed:.3f}s {'; '.join(bad)}")


def test_criterion_03_swamp(acceptance):
    res = summary_tests(np.array([[134, 47, 34], [47, 128, 31], [34, 27, 96]]), 472, 454, ["pielou"], "csr")
    r = res["pielou"]
    acceptance(3, abs(r.statistic - 212.20) <= 0.05 and r.df == 4, f"swamp: X2_P={r.statistic:.3f} df={r.df}")


def test_criterion_04_moment_oracle(acceptance):
    start = time.perf_counter()
    worst = 0.0
    count = 0
    for sizes in ((4, 4), (5, 3)):
        rng = np.random.default_rng(400 + sizes[0])
        for _ in range(20):
            g = build_nngraph(PointSet(rng.uniform(size=(8, 2)), np.zeros(8, int)))
            nn = g.nn_id.tolist()
            tables = np.array([table_from_nn(lab, nn, 2).ravel() for lab in labelings(sizes)], float)
            cols = tables.reshape(-1, 2, 2).sum(axis=1)
            dn, dc = tables - tables.mean(axis=0), cols - cols.mean(axis=0)
            cov = dn.T @ dn / len(tables)
            cm = analytic_moments(sizes, g.Q, g.R)
            nc, cc = column_sum_cov(cm)
            diffs = [
                cm.expected.ravel() - tables.mean(axis=0),
                cm.var.ravel() - np.diag(cov),
                [diag_cell_covariance(sizes, g.Q, g.R, 0, 1) - cov[0, 3]],
                (full_cov_2class(sizes, g.Q, g.R) - cov).ravel(),
                (nc - dn.T @ dc / len(tables)).ravel(),
                (cc - dc.T @ dc / len(tables)).ravel(),
            ]
            worst = max(worst, max(np.max(np.abs(d)) for d in diffs))
            count += 1
    elapsed = time.perf_counter() - start
    acceptance(4, worst <= 1e-10 and elapsed < 10,
               f"n=8 enumeration, {count} configs: max |analytic - enumerated| = {worst:.1e}; {elapsed:.2f}s")


def test_criterion_05_size(acceptance):
    start = time.perf_counter()
    rep = empirical_size(PatternSpec("csr_independence", 50, 50), OVERALL_METHODS, nmc=2000, seed=1)
    elapsed = time.perf_counter() - start
    bands = {"pielou": (0.12, 0.16), "dixon": (0.038, 0.064)}
    rates = rep.rates
    ok = all(bands.get(m, (0.037, 0.063))[0] <= rates[m] <= bands.get(m, (0.037, 0.063))[1] for m in rates)
    shown = " ".join(f"{m}={rates[m]:.4f}" for m in ORDER)
    acceptance(5, ok and elapsed < 300, f"size CSR (50,50) nmc=2000: {shown}; {elapsed:.1f}s")


def test_criterion_06_power(acceptance):
    start = time.perf_counter()
    seg = empirical_power(PatternSpec("seg", 30, 30, 1 / 3), ["dixon", "v3"], nmc=1000, seed=2)
    assoc = empirical_power(PatternSpec("assoc", 30, 30, 0.1), ["v1", "pielou_mc"], nmc=1000, seed=3)
    elapsed = time.perf_counter() - start
    s, a = seg.rates, assoc.rates
    ok = (s["dixon"] >= 0.985 and s["v3"] >= 0.990 and 0.74 <= a["v1"] <= 0.84
          and 0.75 <= a["pielou_mc"] <= 0.85 and elapsed < 600)
    acceptance(6, ok, f"power (30,30) nmc=1000: seg s=1/3 dixon={s['dixon']:.3f} v3={s['v3']:.3f}; "
                      f"assoc r=.1 v1={a['v1']:.3f} pielou_mc={a['pielou_mc']:.3f}; {elapsed:.1f}s")


def test_criterion_07_fit_correction(acceptance, tmp_path, capsys):
    out = tmp_path / "fit.json"
    code = main(["fit-correction", "--null", "csr", "--sizes", "100,100", "--nmc", "10000", "--seed", "7",
                 "--out", str(out)])
    capsys.readouterr()
    rep = json.loads(out.read_text())
    m, v, d, g = rep["mean"], rep["variance"], rep["delta"], rep["gamma"]
    ok = (code == 0 and abs(m - 1.646) <= 0.05 and abs(v - 5.304) <= 0.5
          and abs(d - 1.643) <= 0.04 and abs(g + 0.013) <= 0.05)
    acceptance(7, ok, f"fit-correction (100,100) x10000: M={m:.4f} V={v:.4f} delta={d:.4f} gamma={g:.4f}")


def _tk_brute(xy, case, k):
    knn = brute_knn(xy, k)
    return sum(1 for i in range(len(xy)) if case[i] for j in knn[i] if case[j])


def test_criterion_08_cuzick_edwards_oracle(acceptance):
    rng = np.random.default_rng(800)
    mismatches = 0
    checked = 0
    for _ in range(20):
        xy = rng.uniform(size=(8, 2))
        labels = rng.permutation(np.r_[np.zeros(4, int), np.ones(4, int)])
        view = case_control(PointSet(xy, labels, UNIT), 0)
        pts = xy.tolist()
        for k in (1, 2, 3):
            all_t = []
            for chosen in itertools.combinations(range(8), 4):
                case = [i in chosen for i in range(8)]
                all_t.append(_tk_brute(pts, case, k))
            obs = _tk_brute(pts, (labels == 0).tolist(), k)
            p_oracle = sum(t >= obs for t in all_t) / len(all_t)
            res = ce_tk(view, k, nperm="exact")
            mean_exact = Fraction(sum(all_t), len(all_t))
            analytic = Fraction(res.diagnostics["expected_analytic_exact"])
            same = (res.statistic == obs and res.p_permutation == p_oracle
                    and analytic == mean_exact == Fraction(k * 4 * 3, 7))
            mismatches += not same
            checked += 1
    acceptance(8, mismatches == 0, f"T_k n=8 n0=4: {checked - mismatches}/{checked} (config, k) exact matches")


def test_criterion_08_optional_leukemia_tk():
    pytest.skip("optional: leukemia T_k needs the published coordinate data, which is not bundled")


def test_criterion_09_second_order(acceptance):
    start = time.perf_counter()
    t_l = np.linspace(0.01, 0.25, 25)
    cover_l, cover_g = [], []
    for seed in range(50):
        r = np.random.default_rng(900 + seed)
        ps = PointSet(r.uniform(size=(200, 2)), r.integers(0, 2, 200), UNIT)
        h = 0.15 / np.sqrt(200)
        t_g = np.linspace(h, 0.25, 25)

        def lcurve(p):
            return ripley_k_uni(p, t_l).info["L"] - t_l

        def gcurve(p):
            return pair_correlation(p, t_g, h).values

        lo, hi, _ = envelope(csr_generator(ps), lcurve, 99, 0.95, seed)
        obs = lcurve(ps)
        cover_l.append(np.mean((obs >= lo) & (obs <= hi)))
        lo, hi, _ = envelope(csr_generator(ps), gcurve, 99, 0.95, seed)
        cover_g.append(np.mean((lo <= 1) & (hi >= 1)))
    xy = np.random.default_rng(999).uniform(size=(60, 2))
    twin = PointSet(np.vstack([xy, xy]), np.r_[np.zeros(60, int), np.ones(60, int)], UNIT)
    d_zero = np.all(diggle_d(twin, 0, 1, t_l, nsim=20, seed=0).values == 0)
    elapsed = time.perf_counter() - start
    cl, cg = float(np.mean(cover_l)), float(np.mean(cover_g))
    ok = cl >= 0.9 and cg >= 0.9 and d_zero and elapsed < 300
    acceptance(9, ok, f"50 CSR runs n=200: L-t in envelope {cl:.3f}, g envelope contains 1 {cg:.3f}, "
                      f"D==0 for twin classes {bool(d_zero)}; {elapsed:.1f}s")


def test_criterion_10_identities(acceptance):
    rng = np.random.default_rng(1000)
    worst_delta = worst_dixon = worst_swap = 0.0
    done = 0
    while done < 1000:
        n = int(rng.integers(10, 120))
        labels = rng.integers(0, 2, n)
        ps = PointSet(rng.uniform(size=(n, 2)), labels, UNIT)
        g = build_nngraph(ps)
        counts = build_nnct(ps, g).counts if np.all(np.bincount(labels, minlength=2) >= 2) else None
        if counts is None or np.any(counts.sum(axis=0) == 0):
            continue
        cm = analytic_moments(counts.sum(axis=1), g.Q, g.R)
        x2p = overall_statistic("pielou", counts, cm)
        x2i = overall_statistic("v1", counts, cm)
        worst_delta = max(worst_delta, abs(x2i - x2p - delta_c(counts, cm)) / max(1.0, abs(x2i)))
        cd = dixon_overall(counts, cm).statistic
        worst_dixon = max(worst_dixon, abs(cd - dixon_r_form(counts, cm)) / max(1.0, abs(cd)))
        swapped = counts[::-1, ::-1]
        cm2 = analytic_moments(swapped.sum(axis=1), g.Q, g.R)
        for m in OVERALL_METHODS:
            a, b = overall_statistic(m, counts, cm), overall_statistic(m, swapped, cm2)
            worst_swap = max(worst_swap, abs(a - b) / max(1.0, abs(a)))
        done += 1
    ok = worst_delta <= 1e-9 and worst_dixon <= 1e-10 and worst_swap <= 1e-10
    acceptance(10, ok, f"1000 NNCTs from random configurations: max drift X2_I-X2_P-Delta_c {worst_delta:.1e}, "
                       f"C_D matrix vs r-form {worst_dixon:.1e}, class swap {worst_swap:.1e}")
