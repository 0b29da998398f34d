"""Null and alternative pattern generators and the empirical size/power harness.

Every pattern kind has two classes: class 0 ("X", ``n1`` points) and class 1
("Y", ``n2`` points).  Replicate ``r`` of a run with seed ``s`` is drawn from
``rng_stream(s, (606, r))``; aggregation only counts rejections, so results
are independent of thread scheduling.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import DegenerateTableError, InvalidInputError
from .geometry import PointSet, Rectangle
from .knn_tests import case_control, ce_tk
from .moments import analytic_moments
from .nnct import build_nnct, build_nngraph
from .nnct_tests import OVERALL_METHODS, _method, overall_statistic, run_overall
from .numerics import rng_stream
from .relabel import default_threads

__all__ = [
    "NULL_KINDS",
    "ALT_KINDS",
    "PatternSpec",
    "generate",
    "SizePowerReport",
    "rejection_bounds",
    "simulate",
    "empirical_size",
    "empirical_power",
    "pielou_samples",
]

NULL_KINDS = ("csr_independence", "rl_case1", "rl_case2", "rl_case3")
ALT_KINDS = ("seg", "assoc")
_SHORT = {"csr": "csr_independence", "rl1": "rl_case1", "rl2": "rl_case2", "rl3": "rl_case3"}
UNIT = Rectangle(0.0, 0.0, 1.0, 1.0)
SIM_TAG = 606


@dataclass(frozen=True)
class PatternSpec:
    """A two-class pattern model.  ``param`` is s for ``seg`` and r for ``assoc``."""

    kind: str
    n1: int
    n2: int
    param: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NULL_KINDS + ALT_KINDS:
            raise InvalidInputError(f"unknown pattern kind {self.kind!r}")
        if self.n1 < 1 or self.n2 < 1:
            raise InvalidInputError("class sizes must be at least 1")
        if self.kind in ALT_KINDS:
            if self.param is None or not 0 < self.param < 1:
                raise InvalidInputError(f"{self.kind} needs a parameter in (0, 1), got {self.param}")

    @property
    def is_null(self) -> bool:
        return self.kind in NULL_KINDS

    @property
    def null_model(self) -> str:
        # alternatives are built from independent uniform draws, like CSR
        return "rl" if self.kind.startswith("rl_") else "csr"

    @property
    def region(self) -> Rectangle:
        return Rectangle(0.0, 0.0, 3.0, 1.0) if self.kind == "rl_case3" else UNIT

    @classmethod
    def parse(cls, text: str, n1: int, n2: int, seed: int = 0) -> "PatternSpec":
        """``csr``, ``rl1``..``rl3``, ``seg:1/3`` or ``assoc:0.1``."""
        name, _, arg = text.partition(":")
        kind = _SHORT.get(name, name)
        try:
            param = float(Fraction(arg)) if arg else None
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"bad pattern parameter in {text!r}") from exc
        return cls(kind, int(n1), int(n2), param, seed)


def _uniform(rng, n, x0, x1, y0, y1) -> np.ndarray:
    return np.column_stack([rng.uniform(x0, x1, n), rng.uniform(y0, y1, n)])


def _assoc_offsets(rng, parents: np.ndarray, r: float) -> np.ndarray:
    out = np.empty_like(parents)
    todo = np.arange(parents.shape[0])
    while todo.size:
        rad = rng.uniform(0.0, r, todo.size)
        ang = rng.uniform(0.0, 2 * np.pi, todo.size)
        cand = parents[todo] + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        ok = np.all((cand > 0) & (cand < 1), axis=1)
        out[todo[ok]] = cand[ok]
        todo = todo[~ok]
    return out


def generate(spec: PatternSpec, rng: np.random.Generator | None = None) -> PointSet:
    """Draw one pattern; without ``rng`` the stream is fixed by ``spec.seed``."""
    rng = rng_stream(spec.seed, (SIM_TAG,)) if rng is None else rng
    n1, n2, kind = spec.n1, spec.n2, spec.kind
    labels = np.r_[np.zeros(n1, np.int64), np.ones(n2, np.int64)]
    if kind in ("csr_independence", "rl_case1"):
        xy = _uniform(rng, n1 + n2, 0, 1, 0, 1)
    elif kind == "rl_case2":
        xy = np.vstack([_uniform(rng, n1, 0, 2 / 3, 0, 2 / 3), _uniform(rng, n2, 1 / 3, 1, 1 / 3, 1)])
    elif kind == "rl_case3":
        xy = np.vstack([_uniform(rng, n1, 0, 1, 0, 1), _uniform(rng, n2, 2, 3, 0, 1)])
    elif kind == "seg":
        s = spec.param
        xy = np.vstack([_uniform(rng, n1, 0, 1 - s, 0, 1 - s), _uniform(rng, n2, s, 1, s, 1)])
    else:
        x = _uniform(rng, n1, 0, 1, 0, 1)
        parents = x[rng.integers(0, n1, n2)]
        xy = np.vstack([x, _assoc_offsets(rng, parents, spec.param)])
    if kind.startswith("rl_"):
        labels = rng.permutation(labels)
    return PointSet(xy, labels, spec.region, ("X", "Y"))


def rejection_bounds(nmc: int, alpha: float, level: float = 0.05) -> tuple[float, float]:
    """Rates outside these bounds differ significantly from ``alpha`` (one-sided
    tests at ``level`` each, normal approximation to the binomial).  At
    nmc=10000 and alpha=.05 this gives (.0464, .0536)."""
    half = norm.ppf(1 - level) * math.sqrt(alpha * (1 - alpha) / nmc)
    return alpha - half, alpha + half


@dataclass
class SizePowerReport:
    spec: PatternSpec
    tests: list
    nmc: int
    alpha: float
    seed: int
    rejections: dict
    degenerate: int
    bounds: tuple
    wall_time: float = 0.0
    pielou_samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def rates(self) -> dict:
        return {t: self.rejections[t] / self.nmc for t in self.tests}

    @property
    def se(self) -> dict:
        return {t: math.sqrt(p * (1 - p) / self.nmc) for t, p in self.rates.items()}

    @property
    def flags(self) -> dict:
        lo, hi = self.bounds
        out = {}
        for t, p in self.rates.items():
            out[t] = "conservative" if p < lo else "liberal" if p > hi else ""
        return out

    def to_dict(self) -> dict:
        return {
            "spec": asdict(self.spec),
            "nmc": self.nmc,
            "alpha": self.alpha,
            "seed": self.seed,
            "rates": self.rates,
            "se": self.se,
            "flags": self.flags if self.spec.is_null else {},
            "bounds": list(self.bounds),
            "rejections": dict(self.rejections),
            "degenerate_replicates": self.degenerate,
            "wall_time_s": self.wall_time,
        }

    def rows(self):
        flags = self.flags
        for t in self.tests:
            yield {"test": t, "rate": self.rates[t], "se": self.se[t], "flag": flags[t] if self.spec.is_null else ""}


def _test_names(tests) -> list:
    names = []
    for t in tests:
        if callable(t):
            names.append(getattr(t, "__name__", repr(t)))
        elif str(t).startswith("ce"):
            names.append(str(t) if ":" in str(t) else "ce:1")
        else:
            names.append(_method(str(t)))
    return names


def _one(spec, tests, names, r, seed, alpha, ce_nperm, collect):
    """Rejection indicators (None for a degenerate table) and the Pielou statistic."""
    ps = generate(spec, rng_stream(seed, (SIM_TAG, r)))
    hits = []
    chi = np.nan
    g = t = cm = None
    for test, name in zip(tests, names):
        if callable(test):
            hits.append(test(ps) <= alpha)
            continue
        if name.startswith("ce:"):
            k = int(name.split(":")[1])
            res = ce_tk(case_control(ps, 0), k, nperm=ce_nperm, seed=seed * 1_000_003 + r)
            hits.append(res.p_permutation <= alpha)
            continue
        if g is None:
            g = build_nngraph(ps)
            t = build_nnct(ps, g)
        try:
            t.require_nondegenerate()
            if name not in ("pielou", "pielou_mc") and cm is None:
                cm = analytic_moments(t.row_sums, g.Q, g.R)
            hits.append(run_overall(name, t, cm, spec.null_model).p_asymptotic <= alpha)
        except DegenerateTableError:
            hits.append(None)
    if collect:
        if g is None:
            g = build_nngraph(ps)
            t = build_nnct(ps, g)
        try:
            t.require_nondegenerate()
            chi = overall_statistic("pielou", t.counts)
        except DegenerateTableError:
            pass
    return hits, chi


def simulate(spec: PatternSpec, tests=OVERALL_METHODS, nmc: int = 2000, alpha: float = 0.05, seed: int = 0,
             threads: int | None = None, collect_pielou: bool = False, ce_nperm: int = 199) -> SizePowerReport:
    """Monte Carlo rejection rates of ``tests`` at level ``alpha``.

    ``tests`` holds overall NNCT test names, ``"ce:k"`` for the Cuzick-Edwards
    ``T_k`` with class 0 as cases (relabeling p-value), or callables mapping
    a PointSet to a p-value.  A degenerate table counts as no rejection.
    """
    if nmc < 1 or not 0 < alpha < 1:
        raise InvalidInputError("need nmc >= 1 and 0 < alpha < 1")
    tests = list(tests)
    names = _test_names(tests)
    threads = default_threads() if threads is None else max(1, int(threads))
    start = time.perf_counter()

    def chunk(ab):
        return [_one(spec, tests, names, r, seed, alpha, ce_nperm, collect_pielou) for r in range(*ab)]

    if threads == 1:
        out = chunk((0, nmc))
    else:
        bounds = np.linspace(0, nmc, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            out = [x for part in pool.map(chunk, zip(bounds[:-1], bounds[1:])) for x in part]
    rej = {n: 0 for n in names}
    degenerate = 0
    for hits, _ in out:
        if any(h is None for h in hits):
            degenerate += 1
        for n, h in zip(names, hits):
            rej[n] += bool(h)
    samples = np.array([c for _, c in out]) if collect_pielou else None
    return SizePowerReport(spec, names, nmc, alpha, seed, rej, degenerate, rejection_bounds(nmc, alpha),
                           time.perf_counter() - start, samples)


def empirical_size(spec: PatternSpec, tests=OVERALL_METHODS, nmc: int = 2000, alpha: float = 0.05, seed: int = 0,
                   threads: int | None = None, **kw) -> SizePowerReport:
    if not spec.is_null:
        raise InvalidInputError(f"{spec.kind} is not a null pattern")
    if nmc < 100:
        raise InvalidInputError("empirical size needs nmc >= 100")
    return simulate(spec, tests, nmc, alpha, seed, threads, **kw)


def empirical_power(spec: PatternSpec, tests=OVERALL_METHODS, nmc: int = 1000, alpha: float = 0.05, seed: int = 0,
                    threads: int | None = None, **kw) -> SizePowerReport:
    if spec.is_null:
        raise InvalidInputError(f"{spec.kind} is a null pattern; use empirical_size")
    if nmc < 100:
        raise InvalidInputError("empirical power needs nmc >= 100")
    return simulate(spec, tests, nmc, alpha, seed, threads, **kw)


def pielou_samples(spec: PatternSpec, nmc: int, seed: int = 0, threads: int | None = None) -> np.ndarray:
    """Pielou statistics of ``nmc`` simulated patterns (NaN for degenerate tables)."""
    return simulate(spec, [], nmc, 0.05, seed, threads, collect_pielou=True).pielou_samples
