"""Detection pipeline: score matrices, day-group split, suspicion ranking.

Per area, every consumer-day gets a MIC score against that day's NTL vector
(and optionally a Pearson score); pooled across areas, every normalized
consumer-day profile gets a density-abnormality score.  A consumer's m
per-day scores are split into two groups by the exact one-dimensional
2-means optimum, and the mean of the higher group is the consumer's
suspicion degree.  Degrees are ranked ascending (most suspicious = highest
rank) with average ranks on ties, and the MIC and density rankings can be
combined by the arithmetic or geometric mean of the two rank vectors.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from . import correlate, densepeaks
from .errors import DegenerateDataError, ParameterError, ShapeError
from .meterdata import AreaDataset, compute_ntl, normalize_matrix

KNOWN_METHODS = ("mic", "cfsfdp", "pcc", "arith", "geo")


@dataclass
class ScoreMatrix:
    """Per-(consumer, day) scores of one kind, with a degenerate-day mask."""

    scores: np.ndarray  # (n, m)
    kind: str  # "mic" | "zeta" | "pcc"
    consumer_ids: list[str]
    degenerate: np.ndarray  # (n, m) bool; masked entries never enter the split

    def __post_init__(self):
        if self.scores.shape != self.degenerate.shape:
            raise ShapeError("scores and degenerate mask shapes differ")
        if self.scores.shape[0] != len(self.consumer_ids):
            raise ShapeError("one score row per consumer required")


@dataclass
class SuspicionRanking:
    """Per-consumer suspicion degrees and their ascending average ranks."""

    consumer_ids: list[str]
    degrees: np.ndarray
    ranks: np.ndarray  # in [1, n]; highest degree -> rank n; ties averaged


def _as_area_list(areas) -> list[AreaDataset]:
    if isinstance(areas, AreaDataset):
        return [areas]
    areas = list(areas)
    if not areas:
        raise ParameterError("no areas given")
    return areas


def _normalized_days(area: AreaDataset) -> tuple[np.ndarray, np.ndarray]:
    """Peak-normalize every recorded consumer-day; returns (n, m, T) + mask."""
    return normalize_matrix(area.recorded_tensor())


def score_mic(
    areas,
    *,
    bound_exponent: float = correlate.DEFAULT_BOUND_EXPONENT,
) -> ScoreMatrix:
    """MIC between each normalized consumer-day profile and its day's NTL.

    Days whose profile is all-zero, or whose area NTL vector is constant
    (clean areas in particular), are masked with score 0.
    """
    areas = _as_area_list(areas)
    rows, ids, masks = [], [], []
    for area in areas:
        ntl = area.ntl if area.ntl is not None else compute_ntl(area)
        U, day_degenerate = _normalized_days(area)
        n, m, _ = U.shape
        scores = np.zeros((n, m))
        degenerate = np.zeros((n, m), dtype=bool)
        for j in range(m):
            vals, degen = correlate.mic_many(U[:, j, :], ntl[j], bound_exponent)
            scores[:, j] = vals
            degenerate[:, j] = degen | day_degenerate[:, j]
        rows.append(scores)
        masks.append(degenerate)
        ids.extend(area.consumer_ids)
    return ScoreMatrix(np.vstack(rows), "mic", ids, np.vstack(masks))


def score_pcc(areas) -> ScoreMatrix:
    """Pearson correlation between each normalized day and its day's NTL."""
    areas = _as_area_list(areas)
    rows, ids, masks = [], [], []
    for area in areas:
        ntl = area.ntl if area.ntl is not None else compute_ntl(area)
        U, day_degenerate = _normalized_days(area)
        n, m, _ = U.shape
        scores = np.zeros((n, m))
        degenerate = day_degenerate.copy()
        for j in range(m):
            e = ntl[j]
            ec = e - e.mean()
            ess = ec @ ec
            if ess == 0.0:
                degenerate[:, j] = True
                continue
            uc = U[:, j, :] - U[:, j, :].mean(axis=1, keepdims=True)
            uss = (uc * uc).sum(axis=1)
            flat = uss == 0.0
            denom = np.sqrt(np.where(flat, 1.0, uss) * ess)
            col = (uc @ ec) / denom
            col[flat] = 0.0
            degenerate[:, j] |= flat
            scores[:, j] = np.where(degenerate[:, j], 0.0, col)
        rows.append(scores)
        masks.append(degenerate)
        ids.extend(area.consumer_ids)
    return ScoreMatrix(np.vstack(rows), "pcc", ids, np.vstack(masks))


def score_zeta(
    areas,
    *,
    dc_fraction: float = densepeaks.DEFAULT_NEIGHBOR_FRACTION,
    kernel: str = "cutoff",
    per_area: bool = False,
    block_size: int = densepeaks.DEFAULT_BLOCK_SIZE,
    dc_seed: int = 0,
) -> ScoreMatrix:
    """Density abnormality of every normalized consumer-day profile.

    Profiles are pooled across all areas by default, which is what makes a
    strangely shaped day stand out among the full population.  Degenerate
    all-zero days are excluded from the density pass and scored 0.
    """
    areas = _as_area_list(areas)
    groups = [[a] for a in areas] if per_area else [areas]

    all_scores, all_masks, ids = [], [], []
    for group in groups:
        stacks, masks = [], []
        for area in group:
            U, day_degenerate = _normalized_days(area)
            stacks.append(U.reshape(-1, U.shape[-1]))
            masks.append(day_degenerate)
            ids.extend(area.consumer_ids)
        pool = np.vstack(stacks)
        mask = np.concatenate([m.ravel() for m in masks])
        live = pool[~mask]
        if live.shape[0] < 2:
            raise DegenerateDataError("fewer than 2 non-degenerate profiles to cluster")
        d_c = densepeaks.select_dc(live, dc_fraction, seed=dc_seed)
        rho = densepeaks.local_density(live, d_c, kernel, block_size=block_size)
        delta, _ = densepeaks.separation(live, rho, block_size=block_size)
        zeta_live = densepeaks.abnormality(rho, delta)
        zeta = np.zeros(pool.shape[0])
        zeta[~mask] = zeta_live
        n_rows = sum(m.shape[0] for m in masks)
        m_days = masks[0].shape[1]
        all_scores.append(zeta.reshape(n_rows, m_days))
        all_masks.append(np.vstack(masks))
    return ScoreMatrix(np.vstack(all_scores), "zeta", ids, np.vstack(all_masks))


# ---------------------------------------------------------------------------
# day-group split and ranking

def _split_cut(sorted_values: np.ndarray) -> int:
    """Index c minimizing within-cluster SSE of sorted[:c] vs sorted[c:].

    This is the exact 1-D 2-means optimum: clusters of an optimal 2-means
    solution are intervals of the sorted order, so scanning the m-1 cuts
    with prefix sums finds it directly.
    """
    v = sorted_values
    m = v.size
    s1 = np.cumsum(v)
    s2 = np.cumsum(v * v)
    c = np.arange(1, m)
    left = s2[c - 1] - s1[c - 1] ** 2 / c
    right = (s2[-1] - s2[c - 1]) - (s1[-1] - s1[c - 1]) ** 2 / (m - c)
    return int(c[np.argmin(left + right)])


def split_two_groups(values) -> tuple[np.ndarray, np.ndarray]:
    """Exact 2-means split of 1-D scores into (suspicious, normal) values.

    The cluster with the larger mean is suspicious.  An all-equal input has
    no second cluster: everything is returned as suspicious.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise ParameterError("need at least two values to split")
    if np.all(v == v[0]):
        return v.copy(), np.empty(0)
    mask = _suspicious_mask(v)
    return v[mask], v[~mask]


def _suspicious_mask(v: np.ndarray) -> np.ndarray:
    order = np.argsort(v, kind="stable")
    cut = _split_cut(v[order])
    mask = np.zeros(v.size, dtype=bool)
    mask[order[cut:]] = True  # the upper interval has the larger mean
    return mask


def suspicion_degree(scores, degenerate=None) -> float:
    """Mean of the suspicious day group, masked entries excluded first."""
    v = np.asarray(scores, dtype=float).ravel()
    if degenerate is not None:
        v = v[~np.asarray(degenerate, dtype=bool).ravel()]
    if v.size == 0:
        return 0.0
    if v.size == 1:
        return float(v[0])
    if np.all(v == v[0]):
        return float(v[0])
    mask = _suspicious_mask(v)
    return float(v[mask].mean())


def rank_consumers(degrees, consumer_ids=None) -> SuspicionRanking:
    """Ascending average ranks: the highest degree gets rank n."""
    degrees = np.asarray(degrees, dtype=float).ravel()
    if degrees.size < 1:
        raise ParameterError("no degrees to rank")
    ids = list(consumer_ids) if consumer_ids is not None else [str(i) for i in range(degrees.size)]
    if len(ids) != degrees.size:
        raise ShapeError("consumer_ids and degrees lengths differ")
    return SuspicionRanking(ids, degrees, rankdata(degrees, method="average"))


def ranking_from_scores(matrix: ScoreMatrix) -> SuspicionRanking:
    degrees = np.array(
        [
            suspicion_degree(matrix.scores[i], matrix.degenerate[i])
            for i in range(matrix.scores.shape[0])
        ]
    )
    return rank_consumers(degrees, matrix.consumer_ids)


def combine_ranks(r1: SuspicionRanking, r2: SuspicionRanking, mode: str = "arith") -> SuspicionRanking:
    """Merge two rank vectors by their arithmetic or geometric mean, re-ranked."""
    if r1.consumer_ids != r2.consumer_ids:
        raise ParameterError("rankings cover different consumer sets")
    if mode == "arith":
        combined = (r1.ranks + r2.ranks) / 2.0
    elif mode == "geo":
        combined = np.sqrt(r1.ranks * r2.ranks)
    else:
        raise ParameterError(f"unknown combination mode {mode!r}")
    return SuspicionRanking(r1.consumer_ids, combined, rankdata(combined, method="average"))


# ---------------------------------------------------------------------------
# end-to-end detection

@dataclass
class DetectionResult:
    consumer_ids: list[str]
    rankings: dict[str, SuspicionRanking]
    scores: dict[str, ScoreMatrix] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def to_csv(self, path) -> None:
        """ranking.csv: one row per consumer, columns driven by the methods run."""
        cols: list[tuple[str, np.ndarray]] = []
        if "mic" in self.rankings:
            cols.append(("mic_degree", self.rankings["mic"].degrees))
            cols.append(("mic_rank", self.rankings["mic"].ranks))
        if "cfsfdp" in self.rankings:
            cols.append(("zeta_degree", self.rankings["cfsfdp"].degrees))
            cols.append(("zeta_rank", self.rankings["cfsfdp"].ranks))
        if "pcc" in self.rankings:
            cols.append(("pcc_degree", self.rankings["pcc"].degrees))
            cols.append(("pcc_rank", self.rankings["pcc"].ranks))
        if "arith" in self.rankings:
            cols.append(("combined_arith", self.rankings["arith"].ranks))
        if "geo" in self.rankings:
            cols.append(("combined_geo", self.rankings["geo"].ranks))
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["consumer_id"] + [name for name, _ in cols])
            for i, cid in enumerate(self.consumer_ids):
                writer.writerow([cid] + [repr(float(col[i])) for _, col in cols])


def detect(
    areas,
    methods=("mic", "cfsfdp", "arith", "geo"),
    *,
    kernel: str = "cutoff",
    dc_fraction: float = densepeaks.DEFAULT_NEIGHBOR_FRACTION,
    bound_exponent: float = correlate.DEFAULT_BOUND_EXPONENT,
    per_area_zeta: bool = False,
    block_size: int = densepeaks.DEFAULT_BLOCK_SIZE,
    keep_scores: bool = False,
) -> DetectionResult:
    """Run the requested detection methods over one or more areas.

    ``arith``/``geo`` are combinations of the MIC and density rankings and
    pull both in automatically.
    """
    areas = _as_area_list(areas)
    methods = list(methods)
    unknown = set(methods) - set(KNOWN_METHODS)
    if unknown:
        raise ParameterError(f"unknown methods: {sorted(unknown)}")
    need_mic = bool({"mic", "arith", "geo"} & set(methods))
    need_zeta = bool({"cfsfdp", "arith", "geo"} & set(methods))

    rankings: dict[str, SuspicionRanking] = {}
    scores: dict[str, ScoreMatrix] = {}
    timings: dict[str, float] = {}

    if need_mic:
        t0 = time.perf_counter()
        sm = score_mic(areas, bound_exponent=bound_exponent)
        rankings["mic"] = ranking_from_scores(sm)
        timings["mic"] = time.perf_counter() - t0
        scores["mic"] = sm
    if need_zeta:
        t0 = time.perf_counter()
        sz = score_zeta(
            areas,
            dc_fraction=dc_fraction,
            kernel=kernel,
            per_area=per_area_zeta,
            block_size=block_size,
        )
        rankings["cfsfdp"] = ranking_from_scores(sz)
        timings["cfsfdp"] = time.perf_counter() - t0
        scores["cfsfdp"] = sz
    if "pcc" in methods:
        t0 = time.perf_counter()
        sp = score_pcc(areas)
        rankings["pcc"] = ranking_from_scores(sp)
        timings["pcc"] = time.perf_counter() - t0
        scores["pcc"] = sp
    for mode in ("arith", "geo"):
        if mode in methods:
            t0 = time.perf_counter()
            rankings[mode] = combine_ranks(rankings["mic"], rankings["cfsfdp"], mode)
            timings[mode] = (
                time.perf_counter() - t0 + timings.get("mic", 0.0) + timings.get("cfsfdp", 0.0)
            )

    consumer_ids = [cid for a in areas for cid in a.consumer_ids]
    wanted = {m: rankings[m] for m in methods if m in rankings}
    return DetectionResult(
        consumer_ids,
        wanted,
        scores if keep_scores else {},
        timings={m: timings[m] for m in methods if m in timings},
    )
