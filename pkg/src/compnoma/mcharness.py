"""Monte Carlo estimates of association frequencies, coverage and ergodic rates.

Every estimator reads one cached per-realization table, so all schemes and
thresholds share the same realizations (common random numbers).  Worker
processes only change how the table is filled, never its contents: blocks
of realization indices are computed independently and concatenated in
index order.  The worker count comes from ``COMPNOMA_WORKERS`` (default 1).
"""

from __future__ import annotations

import functools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .assoc import ClassKind
from .netmodel import NetworkConfig
from .pointfield import sample_realization
from .sirlab import Scheme, evaluate_all

WORKERS_ENV = "COMPNOMA_WORKERS"
_Z95 = stats.norm.ppf(0.975)


def worker_count():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        w = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(w, 1)


def _block(cfg, seed, lo, hi):
    m = hi - lo
    kt = np.empty(m, dtype=np.int8)
    k1 = np.empty(m, dtype=np.int8)
    sir = np.empty((m, 4))
    tn = np.empty(m)
    to = np.empty(m)
    for j, i in enumerate(range(lo, hi)):
        kt[j], k1[j], sir[j], tn[j], to[j] = evaluate_all(sample_realization(cfg, seed, i), cfg)
    return kt, k1, sir, tn, to


@dataclass(frozen=True)
class SampleTable:
    kind_theta: np.ndarray    # class code at cfg.theta, -1 for an empty window
    kind_one: np.ndarray      # class code at theta = 1
    sir_au: np.ndarray        # (n, 4), columns in Scheme order
    sir_tu_noma: np.ndarray
    sir_tu_oma: np.ndarray

    @property
    def n(self):
        return len(self.kind_theta)

    def kinds(self, scheme: Scheme):
        return self.kind_theta if scheme.cooperative else self.kind_one

    def au(self, scheme: Scheme):
        return self.sir_au[:, list(Scheme).index(scheme)]

    def tu(self, scheme: Scheme):
        return self.sir_tu_noma if scheme.is_noma else self.sir_tu_oma


def _build_table(cfg, n, master_seed, workers):
    nblk = max(1, min(workers * 4, n // 250 or 1))
    edges = np.linspace(0, n, nblk + 1).astype(int)
    spans = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    if workers <= 1:
        parts = [_block(cfg, master_seed, a, b) for a, b in spans]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_block, cfg, master_seed, a, b) for a, b in spans]
            parts = [f.result() for f in futs]
    cols = [np.concatenate(c) for c in zip(*parts)]
    for c in cols:
        c.setflags(write=False)
    return SampleTable(*cols)


@functools.lru_cache(maxsize=16)
def _cached_table(cfg, n, master_seed):
    return _build_table(cfg, n, master_seed, worker_count())


def sample_table(cfg: NetworkConfig, n: int, master_seed: int, cache: bool = True) -> SampleTable:
    if n < 1:
        raise ValueError("need at least one realization")
    if cache:
        return _cached_table(cfg, int(n), int(master_seed))
    return _build_table(cfg, int(n), int(master_seed), worker_count())


def wilson(k, n, z=_Z95):
    """Wilson score interval (low, high) for k successes out of n."""
    k = np.asarray(k, dtype=float)
    n = np.asarray(n, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = k / n
        den = 1 + z * z / n
        mid = (p + z * z / (2 * n)) / den
        half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return mid - half, mid + half


@dataclass
class CoverageResult:
    scheme: Scheme
    thresholds: np.ndarray
    cond: dict                 # ClassKind -> coverage per threshold (nan if class unseen)
    cond_ci: dict              # ClassKind -> (low, high)
    freq: dict                 # ClassKind -> association frequency
    overall: np.ndarray
    overall_ci: tuple
    tu: np.ndarray
    tu_ci: tuple
    iterations: int
    n_empty: int = 0

    @property
    def overall_halfwidth(self):
        return (self.overall_ci[1] - self.overall_ci[0]) / 2

    def recombined(self):
        """Sum of frequency x conditional coverage; equals ``overall``."""
        tot = np.zeros_like(self.overall)
        for k, f in self.freq.items():
            if f > 0:
                tot += f * self.cond[k]
        return tot


@dataclass
class RateResult:
    scheme: Scheme
    R_u_noncomp: float
    R_u_comp: float
    R_t: float
    ci: dict = field(default_factory=dict)   # name -> CI half-width
    iterations: int = 0
    n_excluded: int = 0                      # samples with infinite SIR (no interferer)

    @property
    def R_u_total(self):
        return self.R_u_noncomp + self.R_u_comp

    @property
    def R_total(self):
        return self.R_u_noncomp + self.R_u_comp + self.R_t


def estimate_coverage(cfg: NetworkConfig, scheme: Scheme, thresholds, n: int, master_seed: int) -> CoverageResult:
    T = np.asarray(thresholds, dtype=float)
    if T.ndim != 1 or np.any(np.diff(T) < 0):
        raise ValueError("thresholds must be a sorted 1-D sequence")
    tab = sample_table(cfg, n, master_seed)
    kinds = tab.kinds(scheme)
    ok = kinds >= 0
    nv = int(ok.sum())
    sir = tab.au(scheme)[ok]
    kinds = kinds[ok]
    hit = sir[:, None] > T[None, :]

    cond, cond_ci, freq = {}, {}, {}
    for code, kind in enumerate(ClassKind):
        sel = kinds == code
        m = int(sel.sum())
        freq[kind] = m / nv
        k = hit[sel].sum(axis=0)
        cond[kind] = k / m if m else np.full(len(T), np.nan)
        cond_ci[kind] = wilson(k, m) if m else (cond[kind], cond[kind])

    k_all = hit.sum(axis=0)
    tu = tab.tu(scheme)[ok]
    k_tu = (tu[:, None] > T[None, :]).sum(axis=0)
    return CoverageResult(scheme, T, cond, cond_ci, freq, k_all / nv, wilson(k_all, nv),
                          k_tu / nv, wilson(k_tu, nv), nv, n - nv)


def _mean_ci(x):
    return float(np.mean(x)), float(_Z95 * np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else float("nan")


def estimate_rate(cfg: NetworkConfig, scheme: Scheme, n: int, master_seed: int) -> RateResult:
    tab = sample_table(cfg, n, master_seed)
    kinds = tab.kinds(scheme)
    sir, tu = tab.au(scheme), tab.tu(scheme)
    ok = (kinds >= 0) & np.isfinite(sir) & np.isfinite(tu)
    frac = scheme.resource_fraction
    rate_au = frac * np.log2(1 + sir[ok])
    comp = np.isin(kinds[ok], [i for i, k in enumerate(ClassKind) if k.is_comp])
    r_nc, h_nc = _mean_ci(np.where(comp, 0.0, rate_au))
    r_c, h_c = _mean_ci(np.where(comp, rate_au, 0.0))
    r_t, h_t = _mean_ci(frac * np.log2(1 + tu[ok]))
    r_tot, h_tot = _mean_ci(rate_au + frac * np.log2(1 + tu[ok]))
    return RateResult(scheme, r_nc, r_c, r_t,
                      {"R_u_noncomp": h_nc, "R_u_comp": h_c, "R_t": h_t, "R_total": h_tot,
                       "R_u_total": _mean_ci(rate_au)[1]},
                      int(ok.sum()), int((kinds >= 0).sum() - ok.sum()))


def estimate_assoc_freq(cfg: NetworkConfig, n: int, master_seed: int) -> dict:
    kinds = sample_table(cfg, n, master_seed).kind_theta
    kinds = kinds[kinds >= 0]
    counts = np.bincount(kinds, minlength=len(ClassKind))
    return {k: counts[i] / len(kinds) for i, k in enumerate(ClassKind)}
