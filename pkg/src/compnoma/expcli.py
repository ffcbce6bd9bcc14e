"""Experiment configuration, sweep orchestration and CSV export.

Config files are flat ``key = value`` text (INI syntax; section headers are
optional and only group keys, names must be unique across sections).  Any
key ending in ``_dB`` is converted to linear scale and stored under the name
without the suffix.  Run ``compnoma defaults`` for the full schema with the
reference values.

CSV columns (fixed order, one row per scheme/path/sweep value/metric/case):

    scheme, path, sweep_axis, sweep_value, threshold_dB, threshold_linear,
    metric, case, value, ci_low, ci_high, quadrature_error

``metric`` is one of assoc_prob, coverage_au, coverage_tu, rate.  For
coverage_au the case is ``overall`` or an AU class; for rate it is one of
R_u_NC, R_u_C, R_t, R.  Association rows depend only on the cooperation
threshold and carry an empty ``scheme``.  Unused cells are empty.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from .analytic import QuadratureError, assoc_prob, coverage_breakdown, coverage_tu, rate_totals
from .assoc import ClassKind
from .mcharness import estimate_assoc_freq, estimate_coverage, estimate_rate, wilson
from .netmodel import ConfigError, NetworkConfig, db_to_linear, linear_to_db
from .sirlab import Scheme

log = logging.getLogger("compnoma")

COLUMNS = ("scheme", "path", "sweep_axis", "sweep_value", "threshold_dB", "threshold_linear",
           "metric", "case", "value", "ci_low", "ci_high", "quadrature_error")
SWEEP_AXES = ("threshold_dB", "lambda_b", "h_u", "theta_dB", "rho_u")
METRICS = ("assoc", "coverage", "rate")
PATHS = ("mc", "analytic", "both")

EXIT_USAGE = 2
EXIT_NUMERIC = 3

# config key -> (NetworkConfig field, divisor applied to the linear value)
_NET_KEYS = {
    "lambda_b": ("lambda_b", 1e6),        # BS per km^2
    "lambda_t": ("lambda_t", 1e6),
    "lambda_u": ("lambda_u", 1e6),
    "h_b": ("h_b", 1.0), "h_t": ("h_t", 1.0), "h_u": ("h_u", 1.0),
    "B_slope": ("B_slope", 1.0), "C_offset": ("C_offset", 1.0),
    "alpha_L": ("alpha_L", 1.0), "alpha_N": ("alpha_N", 1.0), "alpha_t": ("alpha_t", 1.0),
    "eta_L": ("eta_L", 1.0), "eta_N": ("eta_N", 1.0), "eta_t": ("eta_t", 1.0),
    "m_L": ("m_L", 1.0), "m_N": ("m_N", 1.0),
    "p_tx": ("p_tx", 1.0),
    "rho_u": ("rho_u", 1.0),
    "theta": ("theta", 1.0),
    "sim_radius": ("sim_radius", 1.0),
}
_INT_KEYS = ("m_L", "m_N")
_EXP_KEYS = ("sweep_axis", "sweep_values", "thresholds_dB", "schemes", "paths", "metrics",
             "master_seed", "iterations", "out")

DEFAULT_THRESHOLDS_DB = (-10.0, -5.0, 0.0, 5.0, 10.0)


@dataclass(frozen=True)
class ExperimentSpec:
    base: NetworkConfig
    sweep_axis: str = "threshold_dB"
    sweep_values: tuple = DEFAULT_THRESHOLDS_DB
    thresholds_dB: tuple = DEFAULT_THRESHOLDS_DB
    schemes: tuple = tuple(Scheme)
    paths: str = "both"
    metrics: tuple = METRICS
    out: str = "results.csv"
    master_seed: int = 1
    iterations: int = 10_000

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {', '.join(SWEEP_AXES)}, got {self.sweep_axis!r}")
        if not self.sweep_values:
            raise ConfigError("sweep_values is empty")
        if not all(math.isfinite(v) for v in self.sweep_values):
            raise ConfigError("sweep_values must be finite")
        if not self.schemes:
            raise ConfigError("schemes is empty")
        if self.paths not in PATHS:
            raise ConfigError(f"paths must be one of {', '.join(PATHS)}, got {self.paths!r}")
        if not self.metrics or any(m not in METRICS for m in self.metrics):
            raise ConfigError(f"metrics must be a non-empty subset of {', '.join(METRICS)}")
        if not self.thresholds_dB or not all(math.isfinite(t) for t in self.thresholds_dB):
            raise ConfigError("thresholds_dB must be a non-empty list of finite values")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be positive, got {self.iterations}")
        for v in self.sweep_values:
            try:
                self.config_at(v)
            except ConfigError as e:
                raise ConfigError(f"sweep value {self.sweep_axis}={v}: {e}") from None

    def config_at(self, v) -> NetworkConfig:
        ax = self.sweep_axis
        if ax == "threshold_dB":
            return self.base
        if ax == "lambda_b":
            return replace(self.base, lambda_b=v / 1e6)
        if ax == "h_u":
            return replace(self.base, h_u=v)
        if ax == "theta_dB":
            return replace(self.base, theta=db_to_linear(v))
        if not 0.5 < v < 1:
            raise ConfigError(f"rho_u must lie in (0.5, 1), got {v}")
        return self.base.with_rho_u(v)

    def thresholds_at(self, v):
        return (v,) if self.sweep_axis == "threshold_dB" else tuple(self.thresholds_dB)

    @property
    def run_mc(self):
        return self.paths in ("mc", "both")

    @property
    def run_analytic(self):
        return self.paths in ("analytic", "both")


def _floats(raw, key):
    try:
        return tuple(float(x) for x in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{key}: expected a list of numbers, got {raw!r}") from None


def _scheme(name):
    for s in Scheme:
        if s.value.lower() == name.lower() or s.name.lower() == name.lower():
            return s
    raise ConfigError(f"unknown scheme {name!r} (choose from {', '.join(s.value for s in Scheme)})")


def _read_pairs(text):
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=("#",), strict=True)
    cp.optionxform = str       # keys are case sensitive (alpha_L vs alpha_l)
    try:
        cp.read_string("[__top__]\n" + text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    pairs = {}
    for sec in cp.sections():
        for k, v in cp.items(sec):
            if k in pairs:
                raise ConfigError(f"key {k!r} given more than once")
            pairs[k] = v.strip()
    return pairs


def parse_config(text: str) -> ExperimentSpec:
    """Build a validated ExperimentSpec from config text; missing keys take the defaults."""
    pairs = _read_pairs(text)
    net, exp = {}, {}
    for key, raw in pairs.items():
        if key in _EXP_KEYS:
            exp[key] = raw
            continue
        name, db = (key[:-3], True) if key.endswith("_dB") else (key, False)
        if name not in _NET_KEYS:
            raise ConfigError(f"unknown key {key!r}")
        if name in net:
            raise ConfigError(f"{name!r} given both in linear and dB form")
        try:
            x = float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
        if not math.isfinite(x):
            raise ConfigError(f"{key}: value must be finite")
        net[name] = db_to_linear(x) if db else x

    kw = {}
    for name, x in net.items():
        field, scale = _NET_KEYS[name]
        if name in _INT_KEYS:
            if x != int(x):
                raise ConfigError(f"{name} must be an integer, got {x}")
            kw[field] = int(x)
        else:
            kw[field] = x / scale
    rho_u = kw.pop("rho_u", None)
    base = NetworkConfig(**kw)
    if rho_u is not None:
        if not 0.5 < rho_u < 1:
            raise ConfigError(f"rho_u must lie in (0.5, 1) so that rho_u > rho_t, got {rho_u}")
        base = base.with_rho_u(rho_u)

    spec = {}
    if "sweep_axis" in exp:
        spec["sweep_axis"] = exp["sweep_axis"]
    if "sweep_values" in exp:
        spec["sweep_values"] = _floats(exp["sweep_values"], "sweep_values")
    elif spec.get("sweep_axis", "threshold_dB") != "threshold_dB":
        raise ConfigError("sweep_values is required when sweeping anything but threshold_dB")
    if "thresholds_dB" in exp:
        spec["thresholds_dB"] = _floats(exp["thresholds_dB"], "thresholds_dB")
    if "schemes" in exp:
        spec["schemes"] = tuple(_scheme(x) for x in exp["schemes"].replace(",", " ").split())
    if "metrics" in exp:
        spec["metrics"] = tuple(exp["metrics"].replace(",", " ").split())
    if "paths" in exp:
        spec["paths"] = exp["paths"]
    if "out" in exp:
        spec["out"] = exp["out"]
    for k in ("master_seed", "iterations"):
        if k in exp:
            try:
                spec[k] = int(exp[k])
            except ValueError:
                raise ConfigError(f"{k}: expected an integer, got {exp[k]!r}") from None
    return ExperimentSpec(base, **spec)


def defaults_text() -> str:
    c = NetworkConfig()
    s = ExperimentSpec(c)
    lines = [
        "# compnoma experiment config (flat key = value; keys ending in _dB are converted to linear)",
        "[network]",
        f"lambda_b = {c.lambda_b * 1e6:g}        # BS per km^2",
        f"lambda_t = {c.lambda_t * 1e6:g}      # TU per km^2 (not used by the metrics)",
        f"lambda_u = {c.lambda_u * 1e6:g}       # AU per km^2 (not used by the metrics)",
        f"h_b = {c.h_b:g}", f"h_t = {c.h_t:g}", f"h_u = {c.h_u:g}",
        f"B_slope = {c.B_slope:g}", f"C_offset = {c.C_offset:g}",
        f"alpha_L = {c.alpha_L:g}", f"alpha_N = {c.alpha_N:g}", f"alpha_t = {c.alpha_t:g}",
        f"eta_L_dB = {linear_to_db(c.eta_L):.6g}",
        f"eta_N_dB = {linear_to_db(c.eta_N):.6g}",
        f"eta_t_dB = {linear_to_db(c.eta_t):.6g}",
        f"m_L = {c.m_L}", f"m_N = {c.m_N}",
        f"p_tx_dB = {linear_to_db(c.p_tx):.6g}    # cancels out of every SIR",
        f"rho_u = {c.rho_u:g}               # rho_t = 1 - rho_u",
        f"theta_dB = {linear_to_db(c.theta):.6g}",
        f"sim_radius = {c.sim_radius:g}        # MC window radius, m",
        "",
        "[experiment]",
        f"sweep_axis = {s.sweep_axis}       # one of {', '.join(SWEEP_AXES)}",
        "sweep_values = " + ", ".join(f"{v:g}" for v in s.sweep_values),
        "thresholds_dB = " + ", ".join(f"{v:g}" for v in s.thresholds_dB) + "   # used when the axis is not threshold_dB",
        "schemes = " + ", ".join(x.value for x in s.schemes),
        f"paths = {s.paths}                  # mc, analytic or both",
        "metrics = " + ", ".join(s.metrics),
        f"master_seed = {s.master_seed}",
        f"iterations = {s.iterations}",
        f"out = {s.out}",
    ]
    return "\n".join(lines) + "\n"


# -- running ----------------------------------------------------------------

def _fmt(x):
    if x is None:
        return ""
    x = float(x)
    return "" if math.isnan(x) else repr(x)


class _Rows:
    def __init__(self, spec, v, memo):
        self.rows = []
        self.base = {"sweep_axis": spec.sweep_axis, "sweep_value": _fmt(v)}
        self.memo = memo

    def once(self, fn, *args, **kw):
        # threshold-independent results are shared across a threshold sweep
        key = (fn.__name__,) + args + tuple(sorted(kw.items()))
        if key not in self.memo:
            self.memo[key] = fn(*args, **kw)
        return self.memo[key]

    def add(self, scheme, path, metric, case, value, ci=(None, None), qerr=None, t_db=None):
        self.rows.append({**self.base, "scheme": scheme.value if scheme else "", "path": path,
                          "threshold_dB": _fmt(t_db),
                          "threshold_linear": _fmt(db_to_linear(t_db)) if t_db is not None else "",
                          "metric": metric, "case": case, "value": _fmt(value),
                          "ci_low": _fmt(ci[0]), "ci_high": _fmt(ci[1]), "quadrature_error": _fmt(qerr)})


def _assoc_rows(out, cfg, spec):
    if spec.run_analytic:
        for k in ClassKind:
            val, err = out.once(assoc_prob, k, cfg, with_error=True)
            out.add(None, "analytic", "assoc_prob", k.value, val, qerr=err)
    if spec.run_mc:
        f = estimate_assoc_freq(cfg, spec.iterations, spec.master_seed)
        for k in ClassKind:
            lo, hi = wilson(round(f[k] * spec.iterations), spec.iterations)
            out.add(None, "mc", "assoc_prob", k.value, f[k], (lo, hi))


def _coverage_rows(out, cfg, spec, scheme, t_db):
    T = db_to_linear(np.asarray(t_db))
    if spec.run_analytic:
        overall, parts, err = coverage_breakdown(T, cfg, scheme)
        tu = np.atleast_1d(coverage_tu(T, cfg, scheme))
        for i, t in enumerate(t_db):
            out.add(scheme, "analytic", "coverage_au", "overall", overall[i], qerr=err, t_db=t)
            for k in ClassKind:
                w, cov = parts[k]
                if w > 0:
                    out.add(scheme, "analytic", "coverage_au", k.value, cov[i], qerr=err, t_db=t)
            out.add(scheme, "analytic", "coverage_tu", "", tu[i], t_db=t)
    if spec.run_mc:
        order = np.argsort(T)
        r = estimate_coverage(cfg, scheme, T[order], spec.iterations, spec.master_seed)
        back = np.argsort(order)
        for i, t in enumerate(t_db):
            j = back[i]
            out.add(scheme, "mc", "coverage_au", "overall", r.overall[j],
                    (r.overall_ci[0][j], r.overall_ci[1][j]), t_db=t)
            for k in ClassKind:
                if r.freq[k] > 0:
                    out.add(scheme, "mc", "coverage_au", k.value, r.cond[k][j],
                            (r.cond_ci[k][0][j], r.cond_ci[k][1][j]), t_db=t)
            out.add(scheme, "mc", "coverage_tu", "", r.tu[j], (r.tu_ci[0][j], r.tu_ci[1][j]), t_db=t)


def _rate_rows(out, cfg, spec, scheme):
    if spec.run_analytic:
        r = out.once(rate_totals, cfg, scheme)
        for name in ("R_u_NC", "R_u_C", "R_t", "R"):
            out.add(scheme, "analytic", "rate", name, r[name], qerr=r["quadrature_error"])
    if spec.run_mc:
        r = estimate_rate(cfg, scheme, spec.iterations, spec.master_seed)
        for name, val, key in (("R_u_NC", r.R_u_noncomp, "R_u_noncomp"), ("R_u_C", r.R_u_comp, "R_u_comp"),
                               ("R_t", r.R_t, "R_t"), ("R", r.R_total, "R_total")):
            h = r.ci[key]
            out.add(scheme, "mc", "rate", name, val, (val - h, val + h))


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """Evaluate the sweep; rows are ordered by sweep value, then metric, scheme and path."""
    rows, memo = [], {}
    for v in spec.sweep_values:
        cfg = spec.config_at(v)
        out = _Rows(spec, v, memo)
        log.info("%s = %g", spec.sweep_axis, v)
        if "assoc" in spec.metrics:
            _assoc_rows(out, cfg, spec)
        for scheme in spec.schemes:
            if "coverage" in spec.metrics:
                _coverage_rows(out, cfg, spec, scheme, list(spec.thresholds_at(v)))
            if "rate" in spec.metrics:
                _rate_rows(out, cfg, spec, scheme)
        rows += out.rows
    return rows


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\r\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def write_atomic(path, text):
    """Write ``text`` next to ``path`` and rename it into place."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".compnoma-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- command line -----------------------------------------------------------

def _load(path, args) -> ExperimentSpec:
    with open(path) as f:
        spec = parse_config(f.read())
    over = {}
    if getattr(args, "seed", None) is not None:
        over["master_seed"] = args.seed
    if getattr(args, "iterations", None) is not None:
        over["iterations"] = args.iterations
    if getattr(args, "out", None) is not None:
        over["out"] = args.out
    if getattr(args, "path", None) is not None:
        over["paths"] = args.path
    return replace(spec, **over) if over else spec


def build_parser():
    p = argparse.ArgumentParser(prog="compnoma",
                                description="Coverage and rate sweeps for CoMP-NOMA aerial/terrestrial networks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="cmd", required=True)
    for name, hlp in (("run", "evaluate a config and write the CSV"), ("validate", "check a config and print it")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("config")
        s.add_argument("--seed", type=int, help="master seed (overrides the config)")
        s.add_argument("--iterations", type=int, help="MC realizations per configuration")
        s.add_argument("--out", help="output CSV path")
        s.add_argument("--path", choices=PATHS, help="computation path(s)")
    sub.add_parser("defaults", help="print the reference config")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.cmd == "defaults":
        sys.stdout.write(defaults_text())
        return 0
    try:
        spec = _load(args.config, args)
    except OSError as e:
        print(f"compnoma: cannot read config: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"compnoma: invalid config: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.cmd == "validate":
        n = len(spec.sweep_values)
        print(f"ok: {spec.sweep_axis} x {n} values, schemes {', '.join(s.value for s in spec.schemes)}, "
              f"paths {spec.paths}, metrics {', '.join(spec.metrics)}, "
              f"{spec.iterations} iterations, seed {spec.master_seed}, out {spec.out}")
        return 0
    try:
        rows = run_experiment(spec)
    except QuadratureError as e:
        print(f"compnoma: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"compnoma: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    write_atomic(spec.out, to_csv(rows))
    log.info("wrote %d rows to %s", len(rows), spec.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
