"""Ranking metrics and the repeated-scenario experiment harness.

AUC is computed directly from the suspicion ranks: with fraud set F and
benign set B,

    AUC = (sum of fraud ranks - |F|(|F|+1)/2) / (|F| * |B|)

which equals the Mann-Whitney statistic (ties carry average ranks).  MAP@N
walks the N most suspicious consumers: if thieves sit at positions
k_1 < ... < k_r among the top N, it returns mean_i(i / k_i), and 0 when no
thief makes the cut.  Random guessing calibrates to AUC 0.5 and MAP at the
fraud ratio.

An experiment repeats a full scenario -> detect -> score cycle over freshly
randomized tamper scenarios (the synthetic consumer population itself is
generated once per experiment), reporting per-method means and population
standard deviations.  Trials derive their seeds from (master_seed, trial
index), so they can run in any order or in parallel without changing the
report.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import densepeaks
from .errors import MetricError, ParameterError
from .fdi import MIX, build_scenario
from .meterdata import DEFAULT_INTERVALS, synth_ground_truth
from .pipeline import KNOWN_METHODS, SuspicionRanking, detect

DEFAULT_MAP_N = 20


@dataclass
class LabeledRanking:
    """A suspicion ranking plus the ground-truth fraud set."""

    ranking: SuspicionRanking
    fraud_ids: frozenset

    def __post_init__(self):
        self.fraud_ids = frozenset(self.fraud_ids)

    @property
    def fraud_mask(self) -> np.ndarray:
        return np.array([cid in self.fraud_ids for cid in self.ranking.consumer_ids])


def auc(labeled: LabeledRanking) -> float:
    """Area under the ROC curve, straight from the rank formula."""
    mask = labeled.fraud_mask
    nf = int(mask.sum())
    nb = mask.size - nf
    if nf == 0 or nb == 0:
        raise MetricError("AUC needs at least one fraudulent and one benign consumer")
    rank_sum = float(labeled.ranking.ranks[mask].sum())
    return (rank_sum - nf * (nf + 1) / 2.0) / (nf * nb)


def map_at_n(labeled: LabeledRanking, n: int = DEFAULT_MAP_N) -> float:
    """Mean precision at each thief's position within the top n suspects.

    Only thieves actually ranked in the top n enter the mean; an empty top-n
    yields 0.  Rank ties are broken by consumer order, deterministically.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    ranks = labeled.ranking.ranks
    order = np.lexsort((np.arange(ranks.size), -ranks))  # most suspicious first
    mask = labeled.fraud_mask
    hits = 0
    total = 0.0
    for pos, idx in enumerate(order[:n], start=1):
        if mask[idx]:
            hits += 1
            total += hits / pos
    return total / hits if hits else 0.0


# ---------------------------------------------------------------------------
# experiment harness

@dataclass
class ExperimentConfig:
    n_consumers: int = 391
    m_days: int = 30
    intervals: int = DEFAULT_INTERVALS
    gen_seed: int = 1
    noise_sigma: float = 0.35
    n_areas: int = 10
    thieves_per_area: int = 5
    fdi_mix: object = MIX  # FdiType, mapping of weights, or "mix"
    tampered_day_fraction: float = 0.5
    methods: tuple = ("mic", "cfsfdp", "arith", "geo", "pcc")
    kernel: str = "cutoff"
    dc_fraction: float = densepeaks.DEFAULT_NEIGHBOR_FRACTION
    bound_exponent: float = 0.6
    map_n: int = DEFAULT_MAP_N
    trials: int = 100
    master_seed: int = 7
    threads: int | None = None  # None: THEFTSENTRY_THREADS, else cpu count
    label: str | None = None


@dataclass
class MethodStats:
    auc_mean: float
    auc_std: float
    map_mean: float
    map_std: float
    trials: int
    runtime_s: float


@dataclass
class ExperimentReport:
    label: str
    trials: int
    map_n: int
    master_seed: int
    methods: dict[str, MethodStats]
    per_trial: dict[str, list[tuple[float, float]]] = field(default_factory=dict)


def resolve_threads(requested: int | None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("THEFTSENTRY_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def trial_seed(master_seed: int, trial: int) -> int:
    """Scenario seed for one trial, derived so trial order never matters."""
    ss = np.random.SeedSequence(entropy=(int(master_seed), int(trial)))
    return int(ss.generate_state(1, np.uint64)[0])


_WORKER_STATE: dict = {}


def _init_worker(cfg: ExperimentConfig, ground, limit_blas: bool = True) -> None:
    _WORKER_STATE["cfg"] = cfg
    _WORKER_STATE["ground"] = ground
    if not limit_blas:
        return
    try:  # avoid BLAS oversubscription across worker processes
        from threadpoolctl import threadpool_limits

        _WORKER_STATE["blas_limit"] = threadpool_limits(limits=1)
    except Exception:
        pass


def _run_trial(trial: int) -> tuple[dict[str, tuple[float, float]], dict[str, float]]:
    cfg: ExperimentConfig = _WORKER_STATE["cfg"]
    ground = _WORKER_STATE["ground"]
    areas, scenario = build_scenario(
        ground,
        cfg.n_areas,
        cfg.thieves_per_area,
        cfg.fdi_mix,
        seed=trial_seed(cfg.master_seed, trial),
        tampered_day_fraction=cfg.tampered_day_fraction,
    )
    det = detect(
        areas,
        cfg.methods,
        kernel=cfg.kernel,
        dc_fraction=cfg.dc_fraction,
        bound_exponent=cfg.bound_exponent,
    )
    out: dict[str, tuple[float, float]] = {}
    for method in cfg.methods:
        labeled = LabeledRanking(det.rankings[method], scenario.fraud_set)
        out[method] = (auc(labeled), map_at_n(labeled, cfg.map_n))
    return out, det.timings


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Repeat scenario generation + detection + scoring for cfg.trials trials."""
    if cfg.trials < 1:
        raise ParameterError("trials must be >= 1")
    unknown = set(cfg.methods) - set(KNOWN_METHODS)
    if unknown:
        raise ParameterError(f"unknown methods: {sorted(unknown)}")

    ground = synth_ground_truth(
        cfg.n_consumers, cfg.m_days, cfg.intervals, cfg.gen_seed, cfg.noise_sigma
    )
    threads = resolve_threads(cfg.threads)

    results: list[dict[str, tuple[float, float]]] = []
    runtimes: dict[str, float] = {m: 0.0 for m in cfg.methods}
    if threads == 1 or cfg.trials == 1:
        _init_worker(cfg, ground, limit_blas=False)  # in-process: keep BLAS free
        for t in range(cfg.trials):
            metrics, timings = _run_trial(t)
            results.append(metrics)
            for m, dt in timings.items():
                runtimes[m] = runtimes.get(m, 0.0) + dt
    else:
        with ProcessPoolExecutor(
            max_workers=min(threads, cfg.trials),
            initializer=_init_worker,
            initargs=(cfg, ground),
        ) as pool:
            for metrics, timings in pool.map(_run_trial, range(cfg.trials)):
                results.append(metrics)
                for m, dt in timings.items():
                    runtimes[m] = runtimes.get(m, 0.0) + dt

    per_trial = {
        m: [results[t][m] for t in range(cfg.trials)] for m in cfg.methods
    }
    stats = {}
    for m in cfg.methods:
        aucs = np.array([v[0] for v in per_trial[m]])
        maps = np.array([v[1] for v in per_trial[m]])
        stats[m] = MethodStats(
            auc_mean=float(aucs.mean()),
            auc_std=float(aucs.std()),  # population sigma over the trial sample
            map_mean=float(maps.mean()),
            map_std=float(maps.std()),
            trials=cfg.trials,
            runtime_s=runtimes.get(m, 0.0),
        )
    label = cfg.label or (cfg.fdi_mix if isinstance(cfg.fdi_mix, str) else str(cfg.fdi_mix))
    return ExperimentReport(
        label=label,
        trials=cfg.trials,
        map_n=cfg.map_n,
        master_seed=cfg.master_seed,
        methods=stats,
        per_trial=per_trial,
    )


# ---------------------------------------------------------------------------
# report output

def write_report_json(report: ExperimentReport, path) -> None:
    doc = {
        "label": report.label,
        "trials": report.trials,
        "map_n": report.map_n,
        "master_seed": report.master_seed,
        "methods": {m: asdict(s) for m, s in report.methods.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)


def write_report_csv(report: ExperimentReport, path) -> None:
    """One row per FDI label; method columns hold mean AUC and mean MAP@N."""
    methods = list(report.methods)
    header = ["fdi"]
    header += [f"auc_{m}" for m in methods]
    header += [f"map{report.map_n}_{m}" for m in methods]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        row = [report.label]
        row += [repr(report.methods[m].auc_mean) for m in methods]
        row += [repr(report.methods[m].map_mean) for m in methods]
        writer.writerow(row)


def write_curves_csv(report: ExperimentReport, path) -> None:
    """Per-trial AUC/MAP values for external plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "method", "auc", f"map{report.map_n}"])
        for method, values in report.per_trial.items():
            for t, (a, m) in enumerate(values):
                writer.writerow([t, method, repr(a), repr(m)])
