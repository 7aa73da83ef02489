"""Monte Carlo replication over rare-event scenarios.

Replicate ``i`` of a run draws all of its data from ``make_rng(seed, i)``,
so any single (scenario, replicate) pair can be re-run in isolation and
aggregation does not depend on the order in which replicates finish.
"""
from __future__ import annotations

import csv
import itertools
import json
import logging
import os
import platform
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__
from .em import RARE, EmConfig, Weights, fit_fsc_ns, fit_fsc_srs
from .errors import DegenerateFitError
from .metrics import MetricsReport, score_classification, summarize_estimates
from .mixture import ComponentParams, MixtureParams, RareEventParams, log_improper_likelihood, log_ns_likelihood
from .sampling import RankingModel, draw_ns_max, generate_dataset, make_rng

log = logging.getLogger(__name__)

METHODS = ("FSC-NS", "FSC-SRS")
_FITTERS = {"FSC-NS": fit_fsc_ns, "FSC-SRS": fit_fsc_srs}
PARAM_NAMES = ("epsilon", "delta", "tau")
UNDEFINED_TRACKED = ("sensitivity", "specificity", "precision", "f1", "auc")


@dataclass(frozen=True)
class Scenario:
    """One cell of the rare-event design.  ``n1`` is background, ``n2`` rare."""

    epsilon: float
    delta: float
    tau: float
    k: int
    rho: float = 1.0
    n1: int = 20
    n2: int = 10
    n3: int = 200
    w3: float = 3.0
    w1: float = 1.0
    w2: float = 1.0

    @property
    def params(self):
        return RareEventParams(self.epsilon, self.delta, self.tau)

    @property
    def weights(self):
        return Weights(self.w1, self.w2, self.w3)


@dataclass
class SimConfig:
    epsilon: tuple = (0.02, 0.05, 0.10)
    delta: tuple = (3.0, 4.0, 5.0)
    tau: tuple = (1.0, 1.5, 2.0)
    k: tuple = (2, 3, 5, 8)
    rho: tuple = (1.0, 0.85, 0.60)
    w3: tuple = (3.0,)
    n3: tuple = (200,)
    n1: int = 20
    n2: int = 10
    B: int = 50
    seed: int = 2025
    methods: tuple = METHODS

    GRID_FIELDS = ("epsilon", "delta", "tau", "k", "rho", "w3", "n3")

    def __post_init__(self):
        for name in self.GRID_FIELDS:
            value = getattr(self, name)
            if np.isscalar(value):
                value = (value,)
            if len(value) == 0:
                raise ValueError(f"grid axis {name!r} is empty")
            setattr(self, name, tuple(value))
        if self.B < 1:
            raise ValueError("B must be at least 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")

    def scenarios(self):
        return [
            Scenario(e, d, t, int(k), rho, self.n1, self.n2, int(n3), w3)
            for e, d, t, k, rho, w3, n3 in itertools.product(
                self.epsilon, self.delta, self.tau, self.k, self.rho, self.w3, self.n3)
        ]


@dataclass
class ReplicateOutcome:
    scenario: Scenario
    index: int
    method: str
    aborted: bool
    converged: bool = False
    iterations: int = 0
    metrics: Optional[MetricsReport] = None
    estimates: Optional[dict] = None
    error: Optional[str] = None


def run_replicate(scenario: Scenario, index, seed=2025, methods=METHODS, config=None):
    """Simulate one dataset and fit every method on it with identical settings."""
    rng = make_rng(seed, index)
    data = generate_dataset(scenario.params, scenario.k, scenario.n1, scenario.n2, scenario.n3,
                            RankingModel(scenario.rho), rng)
    config = config or EmConfig()
    out = []
    for method in methods:
        try:
            fit = _FITTERS[method](data, scenario.weights, config, model=RARE)
        except DegenerateFitError as exc:
            out.append(ReplicateOutcome(scenario, index, method, aborted=True, error=str(exc)))
            continue
        report = score_classification(data.truth, fit.scores, config.threshold, positive=2)
        est = dict(zip(PARAM_NAMES, fit.psi_hat.as_tuple()))
        out.append(ReplicateOutcome(scenario, index, method, False, fit.converged,
                                    fit.iterations, report, est))
    return out


@dataclass
class GridRow:
    scenario: Scenario
    method: str
    B: int
    n_ok: int
    n_aborted: int
    n_nonconverged: int
    mean_iterations: float
    means: dict
    undefined_counts: dict
    bias: dict
    rmse: dict

    def as_record(self):
        rec = asdict(self.scenario)
        rec.update(method=self.method, B=self.B, n_ok=self.n_ok, n_aborted=self.n_aborted,
                   n_nonconverged=self.n_nonconverged, mean_iterations=self.mean_iterations)
        rec.update(self.means)
        for name in PARAM_NAMES:
            rec[f"bias_{name}"] = self.bias.get(name, float("nan"))
            rec[f"rmse_{name}"] = self.rmse.get(name, float("nan"))
        for name in UNDEFINED_TRACKED:
            rec[f"n_undefined_{name}"] = self.undefined_counts.get(name, 0)
        return rec


def aggregate(scenario: Scenario, method, outcomes) -> GridRow:
    """Fold replicate outcomes into one row; aborted replicates are only counted."""
    outcomes = sorted(outcomes, key=lambda o: o.index)
    ok = [o for o in outcomes if not o.aborted]
    nan = float("nan")
    means = {name: (float(np.mean([getattr(o.metrics, name) for o in ok])) if ok else nan)
             for name in MetricsReport.FIELDS}
    undefined = {name: sum(name in o.metrics.undefined for o in ok) for name in UNDEFINED_TRACKED}
    bias, rmse = {}, {}
    if ok:
        truth = dict(zip(PARAM_NAMES, scenario.params.as_tuple()))
        summary = summarize_estimates({p: [o.estimates[p] for o in ok] for p in PARAM_NAMES}, truth)
        bias, rmse = summary.bias, summary.rmse
    return GridRow(
        scenario, method, len(outcomes), len(ok), len(outcomes) - len(ok),
        sum(not o.converged for o in ok),
        float(np.mean([o.iterations for o in ok])) if ok else nan,
        means, undefined, bias, rmse,
    )


def _replicate_task(args):
    scenario, index, seed, methods = args
    return run_replicate(scenario, index, seed, methods)


def run_grid(config: SimConfig, jobs=1, progress=None):
    """Full cartesian sweep; returns one :class:`GridRow` per scenario and method."""
    scenarios = config.scenarios()
    tasks = [(s, i, config.seed, tuple(config.methods)) for s in scenarios for i in range(config.B)]
    if jobs is None or jobs <= 1:
        results = []
        for n, task in enumerate(tasks, 1):
            results.append(_replicate_task(task))
            if progress:
                progress(n, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_replicate_task, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    by_cell = {}
    for outcomes in results:
        for o in outcomes:
            by_cell.setdefault((o.scenario, o.method), []).append(o)
    return [aggregate(s, m, by_cell[(s, m)]) for s in scenarios for m in config.methods]


def format_number(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_csv(records, path):
    """Write a list of flat dicts; numbers get 17 significant digits."""
    if not records:
        raise ValueError("nothing to write")
    header = list(records[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in records:
            writer.writerow([format_number(rec[h]) for h in header])


def write_grid_csv(rows, path):
    write_csv([r.as_record() for r in rows], path)


def build_id():
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=here,
                             capture_output=True, text=True, timeout=10)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (tuple, set, frozenset)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_jsonable(x) for x in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return _jsonable(asdict(obj))
    return obj


def write_manifest(path, command, config, seed, started, finished, aborts=None, extra=None):
    """JSON run manifest next to a CSV output."""
    manifest = {
        "command": command,
        "config": _jsonable(config),
        "seed": seed,
        "build": build_id(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "started": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "finished": datetime.fromtimestamp(finished, timezone.utc).isoformat(),
        "wall_seconds": round(finished - started, 3),
        "aborts": _jsonable(aborts or {}),
    }
    if extra:
        manifest.update(_jsonable(extra))
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# ---------------------------------------------------------------------------
# Correct vs single-indicator objective curves


@dataclass
class LemmaCurves:
    data: np.ndarray
    pi_grid: np.ndarray
    correct: np.ndarray
    improper: np.ndarray
    argmax_correct: float
    argmax_improper: float
    surfaces: dict = field(default_factory=dict)

    def records(self):
        return [{"pi": p, "loglik_correct": c, "loglik_improper": w}
                for p, c, w in zip(self.pi_grid, self.correct, self.improper)]


def _shift(values):
    values = np.asarray(values, dtype=float)
    return values - np.max(values)


def lemma_demo(psi0: MixtureParams, k, n, seed=2025, surfaces=False,
               mu_grid=None, sigma_grid=None) -> LemmaCurves:
    """Profile the correct and single-indicator objectives over ``pi``.

    Both curves are shifted to have maximum 0.  With ``surfaces=True`` the
    two objectives are also evaluated on a (mu2, sigma2) grid at the true
    ``pi``, each shifted the same way, with their argmaxes.
    """
    if n < 2:
        raise ValueError("need at least two observations")
    x, _ = draw_ns_max(psi0, k, make_rng(seed, 0), size=n)
    pi_grid = np.round(np.arange(1, 100) / 100.0, 2)
    lc, lw = [], []
    for p in pi_grid:
        psi = MixtureParams(float(p), psi0.comp1, psi0.comp2)
        lc.append(log_ns_likelihood(x, psi, k))
        lw.append(log_improper_likelihood(x, psi, k))
    lc, lw = _shift(lc), _shift(lw)
    out = LemmaCurves(x, pi_grid, lc, lw, float(pi_grid[np.argmax(lc)]), float(pi_grid[np.argmax(lw)]))
    if surfaces:
        mu_grid = (np.linspace(psi0.comp2.mu - 1.5, psi0.comp2.mu + 1.5, 61)
                   if mu_grid is None else np.asarray(mu_grid, dtype=float))
        sigma_grid = (np.linspace(0.5 * psi0.comp2.sigma, 2.0 * psi0.comp2.sigma, 61)
                      if sigma_grid is None else np.asarray(sigma_grid, dtype=float))
        sc = np.empty((mu_grid.size, sigma_grid.size))
        sw = np.empty_like(sc)
        for i, m in enumerate(mu_grid):
            for j, s in enumerate(sigma_grid):
                psi = MixtureParams(psi0.pi, psi0.comp1, ComponentParams(float(m), float(s)))
                sc[i, j] = log_ns_likelihood(x, psi, k)
                sw[i, j] = log_improper_likelihood(x, psi, k)
        sc, sw = _shift(sc), _shift(sw)
        ic = np.unravel_index(np.argmax(sc), sc.shape)
        iw = np.unravel_index(np.argmax(sw), sw.shape)
        out.surfaces = {
            "mu_grid": mu_grid, "sigma_grid": sigma_grid,
            "correct": sc, "improper": sw,
            "argmax_correct": (float(mu_grid[ic[0]]), float(sigma_grid[ic[1]])),
            "argmax_improper": (float(mu_grid[iw[0]]), float(sigma_grid[iw[1]])),
        }
    return out
