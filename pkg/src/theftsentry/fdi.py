"""False-data-injection attack models and labeled tamper scenarios.

Six tampering transformations are supported, all reducing billed energy:

    FDI1  x~_t = alpha * x_t                  alpha ~ U(0.2, 0.8), fixed per meter
    FDI2  x~_t = min(x_t, gamma)              gamma below the day peak, fixed per meter
    FDI3  x~_t = max(x_t - gamma, 0)          gamma below the day peak, fixed per meter
    FDI4  x~_t = 0 for t in [t1, t2), else x_t    window longer than 4 hours
    FDI5  x~_t = alpha_t * x_t                alpha_t ~ U(0.2, 0.8) i.i.d. per interval
    FDI6  x~_t = alpha_t * day_mean(x)        alpha_t ~ U(0.2, 0.8) i.i.d. per interval

FDI1-FDI4 keep the recorded curve's ups and downs tied to the true curve;
FDI5 adds heavy per-interval distortion and FDI6 replaces the shape with
scaled noise around the day's mean consumption.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParameterError
from .meterdata import AreaDataset, ConsumerSeries, DayProfile, observer_from_truth


class FdiType(Enum):
    FDI1 = "FDI1"
    FDI2 = "FDI2"
    FDI3 = "FDI3"
    FDI4 = "FDI4"
    FDI5 = "FDI5"
    FDI6 = "FDI6"


ALPHA_LOW, ALPHA_HIGH = 0.2, 0.8


def min_window_intervals(T: int) -> int:
    """Smallest FDI4 window strictly longer than 4 hours at T intervals/day."""
    four_hours = T * 4 // 24  # intervals spanning exactly 4h (T=48 -> 8)
    return four_hours + 1


@dataclass
class FdiParams:
    """Sampled parameters for one tampered day; only the fields for fdi_type are set."""

    fdi_type: FdiType
    alpha: float | None = None
    gamma: float | None = None
    window: tuple[int, int] | None = None  # [t1, t2) zeroed interval range
    alpha_t: np.ndarray | None = None
    day_mean: float | None = None

    def to_jsonable(self) -> dict:
        rec: dict = {"type": self.fdi_type.value}
        if self.alpha is not None:
            rec["alpha"] = self.alpha
        if self.gamma is not None:
            rec["gamma"] = self.gamma
        if self.window is not None:
            rec["window"] = list(self.window)
        if self.alpha_t is not None:
            rec["alpha_t"] = [float(a) for a in self.alpha_t]
        if self.day_mean is not None:
            rec["day_mean"] = self.day_mean
        return rec

    @classmethod
    def from_jsonable(cls, rec: dict) -> "FdiParams":
        return cls(
            fdi_type=FdiType(rec["type"]),
            alpha=rec.get("alpha"),
            gamma=rec.get("gamma"),
            window=tuple(rec["window"]) if "window" in rec else None,
            alpha_t=np.array(rec["alpha_t"]) if "alpha_t" in rec else None,
            day_mean=rec.get("day_mean"),
        )


def apply_fdi(day: DayProfile, params: FdiParams) -> DayProfile:
    """Apply one tampering transformation; the input day is left unmodified."""
    x = day.values
    kind = params.fdi_type

    if kind == FdiType.FDI1:
        if params.alpha is None:
            raise ParameterError("FDI1 needs alpha")
        return DayProfile(params.alpha * x)

    if kind in (FdiType.FDI2, FdiType.FDI3):
        if params.gamma is None:
            raise ParameterError(f"{kind.value} needs gamma")
        if params.gamma >= x.max():
            raise ParameterError(
                f"{kind.value}: gamma {params.gamma:g} must be below the day peak {x.max():g}"
            )
        if kind == FdiType.FDI2:
            return DayProfile(np.minimum(x, params.gamma))
        return DayProfile(np.maximum(x - params.gamma, 0.0))

    if kind == FdiType.FDI4:
        if params.window is None:
            raise ParameterError("FDI4 needs a window")
        t1, t2 = params.window
        if not (0 <= t1 < t2 <= x.size) or (t2 - t1) < min_window_intervals(x.size):
            raise ParameterError(
                f"FDI4 window [{t1}, {t2}) must span more than 4 hours "
                f"(>= {min_window_intervals(x.size)} of {x.size} intervals)"
            )
        out = x.copy()
        out[t1:t2] = 0.0
        return DayProfile(out)

    if kind == FdiType.FDI5:
        if params.alpha_t is None or params.alpha_t.size != x.size:
            raise ParameterError("FDI5 needs alpha_t matching the day length")
        return DayProfile(params.alpha_t * x)

    if kind == FdiType.FDI6:
        if params.alpha_t is None or params.alpha_t.size != x.size:
            raise ParameterError("FDI6 needs alpha_t matching the day length")
        if params.day_mean is None:
            raise ParameterError("FDI6 needs day_mean")
        return DayProfile(params.alpha_t * params.day_mean)

    raise ParameterError(f"unknown FDI type {kind!r}")


def _sample_window(T: int, rng: np.random.Generator) -> tuple[int, int]:
    """Uniform draw over all [t1, t2) windows of length >= min_window_intervals(T)."""
    lmin = min_window_intervals(T)
    if lmin > T:
        raise ParameterError(f"day too short for an FDI4 window (> 4h needs {lmin} intervals)")
    n_lengths = T - lmin + 1  # window of length lmin+k has T-lmin-k+1 start slots
    total = n_lengths * (n_lengths + 1) // 2
    pick = int(rng.integers(total))
    for length in range(lmin, T + 1):
        slots = T - length + 1
        if pick < slots:
            return pick, pick + length
        pick -= slots
    raise AssertionError("window decode out of range")


def sample_params(fdi_type: FdiType, day: DayProfile, rng: np.random.Generator) -> FdiParams:
    """Draw fresh tampering parameters valid for this day."""
    peak = day.values.max()
    if peak == 0.0:
        raise ParameterError("cannot sample FDI parameters for an all-zero day")

    if fdi_type == FdiType.FDI1:
        return FdiParams(fdi_type, alpha=float(rng.uniform(ALPHA_LOW, ALPHA_HIGH)))
    if fdi_type in (FdiType.FDI2, FdiType.FDI3):
        return FdiParams(fdi_type, gamma=float(rng.uniform(ALPHA_LOW * peak, ALPHA_HIGH * peak)))
    if fdi_type == FdiType.FDI4:
        return FdiParams(fdi_type, window=_sample_window(day.T, rng))
    if fdi_type == FdiType.FDI5:
        return FdiParams(fdi_type, alpha_t=rng.uniform(ALPHA_LOW, ALPHA_HIGH, size=day.T))
    if fdi_type == FdiType.FDI6:
        return FdiParams(
            fdi_type,
            alpha_t=rng.uniform(ALPHA_LOW, ALPHA_HIGH, size=day.T),
            day_mean=float(day.values.mean()),
        )
    raise ParameterError(f"unknown FDI type {fdi_type!r}")


# ---------------------------------------------------------------------------
# Scenario construction

MIX = "mix"  # each thief draws one of the six types uniformly


@dataclass
class TamperScenario:
    """Ground-truth labels for one generated attack: who, when, and how."""

    seed: int
    areas: list[list[str]]  # consumer ids per area
    fraud_ids: list[list[str]]  # per area, subset of areas[k]
    fdi_types: dict[str, FdiType] = field(default_factory=dict)
    tampered_days: dict[str, list[int]] = field(default_factory=dict)
    records: dict[str, dict[int, FdiParams]] = field(default_factory=dict)

    @property
    def fraud_set(self) -> set[str]:
        return {cid for per_area in self.fraud_ids for cid in per_area}

    @property
    def all_ids(self) -> list[str]:
        return [cid for per_area in self.areas for cid in per_area]

    def to_json(self, path) -> None:
        doc = {
            "seed": self.seed,
            "areas": self.areas,
            "fraud_ids": self.fraud_ids,
            "fdi_types": {cid: t.value for cid, t in self.fdi_types.items()},
            "tampered_days": self.tampered_days,
            "records": {
                cid: {str(day): p.to_jsonable() for day, p in per_day.items()}
                for cid, per_day in self.records.items()
            },
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, path) -> "TamperScenario":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            seed=doc["seed"],
            areas=doc["areas"],
            fraud_ids=doc["fraud_ids"],
            fdi_types={cid: FdiType(t) for cid, t in doc["fdi_types"].items()},
            tampered_days={cid: list(days) for cid, days in doc["tampered_days"].items()},
            records={
                cid: {int(day): FdiParams.from_jsonable(p) for day, p in per_day.items()}
                for cid, per_day in doc["records"].items()
            },
        )


def _normalize_mix(fdi_mix) -> tuple[list[FdiType], np.ndarray]:
    if fdi_mix is None or fdi_mix == MIX:
        types = list(FdiType)
        return types, np.full(len(types), 1.0 / len(types))
    if isinstance(fdi_mix, FdiType):
        return [fdi_mix], np.array([1.0])
    if isinstance(fdi_mix, str):
        return [FdiType(fdi_mix)], np.array([1.0])
    types, weights = zip(*[(FdiType(t) if not isinstance(t, FdiType) else t, w)
                           for t, w in dict(fdi_mix).items()])
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or w.sum() <= 0:
        raise ParameterError("fdi_mix weights must be nonnegative and sum to > 0")
    return list(types), w / w.sum()


def build_scenario(
    ground_truth: list[ConsumerSeries],
    n_areas: int,
    thieves_per_area: int,
    fdi_mix=MIX,
    seed: int = 0,
    tampered_day_fraction: float = 0.5,
) -> tuple[list[AreaDataset], TamperScenario]:
    """Partition consumers into areas, pick thieves, and tamper their meters.

    Consumers are shuffled and split as evenly as possible (sizes differ by
    at most one).  Each thief draws one FDI type from ``fdi_mix`` and a
    uniform floor(m * tampered_day_fraction)-day subset to tamper.  FDI1's
    alpha and FDI2/3's gamma model a fixed meter modification and are drawn
    once per thief; FDI4 windows and FDI5/6 alpha_t are redrawn per day.
    Gamma is drawn below the smallest tampered-day peak so it is valid on
    every tampered day.

    Observer totals are the exact per-interval sums of ground truth, so the
    area NTL equals the energy removed by the thieves.
    """
    n = len(ground_truth)
    if n_areas < 1 or n < n_areas:
        raise ParameterError(f"cannot split {n} consumers into {n_areas} areas")
    if thieves_per_area < 0 or thieves_per_area >= n // n_areas:
        # smallest area holds floor(n / n_areas) consumers; thieves must be fewer
        raise ParameterError(
            f"{thieves_per_area} thieves per area does not fit areas of ~{n // n_areas} consumers"
        )
    m = ground_truth[0].m
    n_tampered = int(m * tampered_day_fraction)
    if thieves_per_area > 0 and n_tampered < 1:
        raise ParameterError("tampered_day_fraction leaves no day to tamper")

    scenario_rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    order = scenario_rng.permutation(n)
    sizes = np.full(n_areas, n // n_areas)
    sizes[: n % n_areas] += 1

    scenario = TamperScenario(seed=seed, areas=[], fraud_ids=[])
    areas: list[AreaDataset] = []
    types, weights = _normalize_mix(fdi_mix)

    index_of = {c.consumer_id: i for i, c in enumerate(ground_truth)}
    start = 0
    for _k, size in enumerate(sizes):
        member_idx = order[start : start + size]
        start += size
        members = [ground_truth[i] for i in member_idx]
        ids = [c.consumer_id for c in members]
        if thieves_per_area > size:
            raise ParameterError(
                f"{thieves_per_area} thieves requested but the area has {size} consumers"
            )
        thief_pos = scenario_rng.choice(size, size=thieves_per_area, replace=False)
        thief_ids = {ids[p] for p in sorted(thief_pos)}

        tampered_consumers = []
        for c in members:
            truth_days = c.days if c.ground_truth is None else c.ground_truth
            if c.consumer_id not in thief_ids:
                tampered_consumers.append(
                    ConsumerSeries(c.consumer_id, list(truth_days), ground_truth=list(truth_days))
                )
                continue

            ci = index_of[c.consumer_id]
            fdi_type = types[int(scenario_rng.choice(len(types), p=weights))]
            days_sel = sorted(scenario_rng.choice(m, size=n_tampered, replace=False).tolist())

            consumer_rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(1, ci))
            )
            fixed_alpha = fixed_gamma = None
            if fdi_type == FdiType.FDI1:
                fixed_alpha = float(consumer_rng.uniform(ALPHA_LOW, ALPHA_HIGH))
            elif fdi_type in (FdiType.FDI2, FdiType.FDI3):
                floor_peak = min(truth_days[j].max() for j in days_sel)
                if floor_peak == 0.0:
                    raise ParameterError(
                        f"consumer {c.consumer_id!r} has an all-zero tampered day"
                    )
                fixed_gamma = float(
                    consumer_rng.uniform(ALPHA_LOW * floor_peak, ALPHA_HIGH * floor_peak)
                )

            recorded = list(truth_days)
            per_day: dict[int, FdiParams] = {}
            for j in days_sel:
                day_rng = np.random.default_rng(
                    np.random.SeedSequence(entropy=seed, spawn_key=(2, ci, j))
                )
                if fdi_type == FdiType.FDI1:
                    params = FdiParams(fdi_type, alpha=fixed_alpha)
                elif fdi_type in (FdiType.FDI2, FdiType.FDI3):
                    params = FdiParams(fdi_type, gamma=fixed_gamma)
                else:
                    params = sample_params(fdi_type, truth_days[j], day_rng)
                recorded[j] = apply_fdi(truth_days[j], params)
                per_day[j] = params

            scenario.fdi_types[c.consumer_id] = fdi_type
            scenario.tampered_days[c.consumer_id] = days_sel
            scenario.records[c.consumer_id] = per_day
            tampered_consumers.append(
                ConsumerSeries(c.consumer_id, recorded, ground_truth=list(truth_days))
            )

        observer = observer_from_truth(tampered_consumers, which="truth")
        areas.append(AreaDataset(tampered_consumers, observer))
        scenario.areas.append(ids)
        scenario.fraud_ids.append(sorted(thief_ids))

    return areas, scenario
