"""Benchmark sweeps: MSE per method over matrix sizes, and log-log slopes."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import RowNNConfig, rownn_impute, rownn_tune, usvt_impute
from .estimator import EstimatorConfig, awnn_fit, oracle_awnn_fit
from .matrix import DenseMatrix
from .synthetic import SyntheticSpec, generate

SCHEMA_VERSION = 1
METHODS = ("awnn", "o-awnn", "rownn", "usvt")
CSV_FIELDS = ("method", "n", "lambda", "snr", "p", "replicate", "mse", "sigma2_hat",
              "converged", "non_imputable", "wall_ms")
GROUP_KEYS = ("method", "lambda", "snr", "p")


@dataclass(frozen=True)
class BenchSpec:
    n_values: tuple = (64, 128, 256, 512)
    lambdas: tuple = (0.5, 0.75, 1.0)
    snrs: tuple = (1.0, 2.0, 10.0)
    p_values: tuple = (1.0, 0.65)
    replicates: int = 10
    methods: tuple = METHODS
    base_seed: int = 0
    d: int = 2
    delta: float = 0.05

    def __post_init__(self):
        for name in ("n_values", "lambdas", "snrs", "p_values", "methods"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        ns = self.n_values
        if len(set(ns)) < 2 or list(ns) != sorted(ns):
            raise ValueError("n_values must be ascending with at least 2 distinct values")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods: {sorted(bad)}")

    @classmethod
    def from_dict(cls, cfg: dict) -> "BenchSpec":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(cfg) - known
        if bad:
            raise KeyError(f"unknown config key(s): {', '.join(sorted(bad))}")
        return cls(**cfg)


@dataclass
class Record:
    method: str
    n: int
    lam: float
    snr: float
    p: float
    replicate: int
    mse: float
    sigma2_hat: float = float("nan")
    converged: bool = True
    non_imputable: int = 0
    wall_ms: float = 0.0
    error: str = ""

    def key(self):
        return (self.method, self.lam, self.snr, self.p, self.n, self.replicate)


@dataclass
class ExperimentResult:
    records: list
    spec: BenchSpec | None = None
    aggregates: list = field(default_factory=list)
    slopes: list = field(default_factory=list)


def mse(theta_hat, theta, exclude=None) -> tuple[float, int]:
    """Mean squared error over the included cells, and the number excluded.

    NaN cells of ``theta_hat`` are always excluded.
    """
    a = theta_hat.values if isinstance(theta_hat, DenseMatrix) else np.asarray(theta_hat)
    b = theta.values if isinstance(theta, DenseMatrix) else np.asarray(theta)
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    drop = np.isnan(a)
    if exclude is not None:
        drop = drop | np.asarray(exclude, dtype=bool)
    if drop.all():
        raise ValueError("all cells excluded")
    r = a[~drop] - b[~drop]
    return float(np.mean(r * r)), int(np.count_nonzero(drop))


def fit_slope(points) -> float:
    """OLS slope of ``log(mse)`` on ``log(n)``."""
    pts = [(float(n), float(e)) for n, e in points]
    if any(not e > 0 for _, e in pts):
        raise ValueError("mse values must be positive")
    if len({n for n, _ in pts}) < 2:
        raise ValueError("need at least 2 distinct n")
    x = np.log([n for n, _ in pts])
    y = np.log([e for _, e in pts])
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def replicate_seed(base_seed: int, cell: tuple, replicate: int) -> int:
    """64-bit seed from ``SeedSequence`` hashing of (base_seed, cell indices, replicate)."""
    ss = np.random.SeedSequence([int(base_seed), *map(int, cell), int(replicate)])
    return int(ss.generate_state(1, np.uint64)[0])


def _run_methods(spec: BenchSpec, lam, snr, p, n, seed, replicate):
    inst = generate(SyntheticSpec(n, n, spec.d, lam, snr, p, seed))
    cfg = EstimatorConfig(delta=spec.delta)
    out = []
    awnn_sigma2 = None
    for method in spec.methods:
        rec = Record(method, n, lam, snr, p, replicate, float("nan"))
        t0 = time.perf_counter()
        try:
            if method == "awnn":
                fit = awnn_fit(inst.data, cfg)
                awnn_sigma2 = fit.sigma2_hat
                theta_hat, rec.sigma2_hat, rec.converged = fit.theta_hat, fit.sigma2_hat, fit.converged
            elif method == "o-awnn":
                fit = oracle_awnn_fit(inst.data, inst.sigma_eps2, cfg)
                theta_hat, rec.sigma2_hat = fit.theta_hat, fit.sigma2_hat
            elif method == "rownn":
                rcfg = RowNNConfig(seed=seed % (2**32))
                sigma2 = awnn_sigma2 if awnn_sigma2 is not None else awnn_fit(inst.data, cfg).sigma2_hat
                eta2 = rownn_tune(inst.data, rcfg, sigma2=sigma2)
                theta_hat = rownn_impute(inst.data, sigma2, eta2, rcfg)
                rec.sigma2_hat = sigma2
            else:
                theta_hat = usvt_impute(inst.data)
            rec.mse, rec.non_imputable = mse(theta_hat, inst.theta)
        except Exception as exc:  # recorded, never aborts the sweep
            rec.error = f"{type(exc).__name__}: {exc}"
            rec.converged = False
        rec.wall_ms = (time.perf_counter() - t0) * 1e3
        out.append(rec)
    return out


def run_bench(spec: BenchSpec, n_jobs: int = 1, progress=None) -> ExperimentResult:
    """Run every method on every (lambda, snr, p, n, replicate) instance.

    All methods share the instance of a given cell and replicate. Records
    come back sorted by key, so the output does not depend on ``n_jobs``.
    """
    tasks = []
    for a, lam in enumerate(spec.lambdas):
        for b, snr in enumerate(spec.snrs):
            for c, p in enumerate(spec.p_values):
                for e, n in enumerate(spec.n_values):
                    for r in range(spec.replicates):
                        seed = replicate_seed(spec.base_seed, (a, b, c, e), r)
                        tasks.append((lam, snr, p, n, seed, r))

    if n_jobs == 1:
        chunks = []
        for k, t in enumerate(tasks):
            chunks.append(_run_methods(spec, *t))
            if progress:
                progress(k + 1, len(tasks))
    else:
        from joblib import Parallel, delayed
        chunks = Parallel(n_jobs=n_jobs)(delayed(_run_methods)(spec, *t) for t in tasks)

    records = sorted((r for ch in chunks for r in ch), key=Record.key)
    aggregates, slopes = aggregate(records)
    return ExperimentResult(records, spec, aggregates, slopes)


def aggregate(records):
    """Mean/sd of MSE per (method, lambda, snr, p, n) and a slope per group.

    ``sd`` uses divisor ``R - 1`` and is ``None`` for a single replicate.
    Slopes are fitted to the per-``n`` mean MSE over successful records.
    """
    cells = defaultdict(list)
    for r in records:
        if r.error or not math.isfinite(r.mse):
            continue
        cells[(r.method, r.lam, r.snr, r.p, r.n)].append(r.mse)
    aggregates = []
    groups = defaultdict(list)
    for key in sorted(cells):
        v = np.array(cells[key])
        sd = float(np.std(v, ddof=1)) if len(v) > 1 else None
        method, lam, snr, p, n = key
        aggregates.append({"method": method, "lambda": lam, "snr": snr, "p": p, "n": n,
                           "count": len(v), "mean_mse": float(v.mean()), "sd_mse": sd})
        groups[(method, lam, snr, p)].append((n, float(v.mean())))
    slopes = []
    for (method, lam, snr, p), pts in sorted(groups.items()):
        try:
            s = fit_slope(pts)
        except ValueError:
            s = None
        slopes.append({"method": method, "lambda": lam, "snr": snr, "p": p, "slope": s})
    return aggregates, slopes


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def records_to_csv(records, include_timing: bool = True) -> str:
    """Serialize records; ``include_timing=False`` leaves ``wall_ms`` blank."""
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow([r.method, r.n, _fmt(r.lam), _fmt(r.snr), _fmt(r.p), r.replicate,
                    _fmt(r.mse), _fmt(r.sigma2_hat), _fmt(r.converged), r.non_imputable,
                    f"{r.wall_ms:.3f}" if include_timing else ""])
    return buf.getvalue()


def write_results_csv(records, path, include_timing: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records, include_timing))


def read_results_csv(path) -> list:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows:
        raise ValueError("empty results file")
    missing = set(CSV_FIELDS) - set(rows[0])
    if missing:
        raise ValueError(f"results file missing columns: {sorted(missing)}")
    out = []
    for row in rows:
        out.append(Record(row["method"], int(row["n"]), float(row["lambda"]), float(row["snr"]),
                          float(row["p"]), int(row["replicate"]), float(row["mse"]),
                          float(row["sigma2_hat"]), row["converged"] == "true",
                          int(row["non_imputable"]),
                          float(row["wall_ms"]) if row["wall_ms"] else 0.0))
    return out


def write_aggregate_json(result: ExperimentResult, path) -> None:
    doc = {"schema_version": SCHEMA_VERSION,
           "spec": asdict(result.spec) if result.spec else None,
           "aggregates": result.aggregates,
           "slopes": result.slopes}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def slope_table(records, group_by=GROUP_KEYS):
    """Fitted slope of mean MSE vs ``n`` for each group of ``group_by`` keys."""
    attr = {"method": "method", "lambda": "lam", "snr": "snr", "p": "p"}
    bad = set(group_by) - set(attr)
    if bad:
        raise ValueError(f"cannot group by {sorted(bad)}")
    cells = defaultdict(list)
    for r in records:
        if r.error or not math.isfinite(r.mse):
            continue
        cells[(tuple(getattr(r, attr[k]) for k in group_by), r.n)].append(r.mse)
    groups = defaultdict(list)
    for (g, n), v in sorted(cells.items()):
        groups[g].append((n, float(np.mean(v))))
    return [(g, fit_slope(pts) if len({n for n, _ in pts}) > 1 else None)
            for g, pts in sorted(groups.items())]
