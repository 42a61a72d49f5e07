"""Smart-meter data model: load profiles, areas, NTL and normalization.

An area holds n consumers with m days of T-interval readings plus a
tamper-proof observer meter recording the area total E_t.  The area's
non-technical loss is

    e_t = E_t - sum_i recorded_i_t

computed per interval of every day.  For a benign, noise-free area whose
observer is the exact sum of ground truth, e_t == 0 everywhere.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError, ParseError, ShapeError

DEFAULT_INTERVALS = 48  # half-hour readings per day


def _as_day_values(values, T: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ShapeError(f"a day profile needs at least 2 intervals, got shape {arr.shape}")
    if T is not None and arr.size != T:
        raise ShapeError(f"expected {T} intervals, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("day profile contains non-finite readings")
    if np.any(arr < 0):
        raise DomainError("day profile contains negative readings")
    return arr


@dataclass
class DayProfile:
    """One day of nonnegative energy readings (kWh per interval)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = _as_day_values(self.values)

    @property
    def T(self) -> int:
        return self.values.size

    def max(self) -> float:
        return float(self.values.max())


@dataclass
class ConsumerSeries:
    """One consumer's per-day profiles: recorded (possibly tampered) and optional ground truth."""

    consumer_id: str
    days: list[DayProfile]
    ground_truth: list[DayProfile] | None = None

    def __post_init__(self):
        if not self.days:
            raise ShapeError(f"consumer {self.consumer_id!r} has no days")
        T = self.days[0].T
        for j, d in enumerate(self.days):
            if d.T != T:
                raise ShapeError(
                    f"consumer {self.consumer_id!r}: day {j} has {d.T} intervals, expected {T}"
                )
        if self.ground_truth is not None:
            if len(self.ground_truth) != len(self.days):
                raise ShapeError(
                    f"consumer {self.consumer_id!r}: ground truth has "
                    f"{len(self.ground_truth)} days, recorded has {len(self.days)}"
                )
            for j, d in enumerate(self.ground_truth):
                if d.T != T:
                    raise ShapeError(
                        f"consumer {self.consumer_id!r}: ground-truth day {j} has "
                        f"{d.T} intervals, expected {T}"
                    )

    @property
    def m(self) -> int:
        return len(self.days)

    @property
    def T(self) -> int:
        return self.days[0].T

    def recorded_matrix(self) -> np.ndarray:
        """Recorded readings as an (m, T) array."""
        return np.stack([d.values for d in self.days])

    def truth_matrix(self) -> np.ndarray:
        if self.ground_truth is None:
            raise ShapeError(f"consumer {self.consumer_id!r} has no ground truth")
        return np.stack([d.values for d in self.ground_truth])


@dataclass
class AreaDataset:
    """All consumers behind one observer meter, plus the derived NTL series."""

    consumers: list[ConsumerSeries]
    observer: list[DayProfile]
    ntl: np.ndarray | None = field(default=None)  # (m, T), set by compute_ntl

    def __post_init__(self):
        if not self.consumers:
            raise ShapeError("an area needs at least one consumer")
        m, T = self.consumers[0].m, self.consumers[0].T
        for c in self.consumers:
            if c.m != m or c.T != T:
                raise ShapeError(
                    f"consumer {c.consumer_id!r} has shape ({c.m}, {c.T}), "
                    f"area expects ({m}, {T})"
                )
        if len(self.observer) != m or any(d.T != T for d in self.observer):
            raise ShapeError(f"observer shape does not match area shape ({m}, {T})")

    @property
    def n(self) -> int:
        return len(self.consumers)

    @property
    def m(self) -> int:
        return self.consumers[0].m

    @property
    def T(self) -> int:
        return self.consumers[0].T

    @property
    def consumer_ids(self) -> list[str]:
        return [c.consumer_id for c in self.consumers]

    def observer_matrix(self) -> np.ndarray:
        return np.stack([d.values for d in self.observer])

    def recorded_tensor(self) -> np.ndarray:
        """All recorded readings as an (n, m, T) array."""
        return np.stack([c.recorded_matrix() for c in self.consumers])


@dataclass
class NormalizedProfile:
    """A day profile divided by its own maximum; all-zero days are flagged degenerate."""

    values: np.ndarray
    source: tuple[int, int] | None = None  # (consumer index, day index)
    degenerate: bool = False


def normalize_profile(day: DayProfile, source: tuple[int, int] | None = None) -> NormalizedProfile:
    """Divide a day's readings by the day maximum.

    An all-zero day cannot be scaled to peak 1; it is returned as all zeros
    with ``degenerate=True`` so downstream scoring can neutralize it.
    """
    peak = day.values.max()
    if peak == 0.0:
        return NormalizedProfile(np.zeros_like(day.values), source=source, degenerate=True)
    return NormalizedProfile(day.values / peak, source=source, degenerate=False)


def normalize_matrix(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise peak normalization for a stack of profiles.

    Returns ``(normalized, degenerate_mask)`` where all-zero rows come back
    as zeros and are flagged in the mask.
    """
    X = np.asarray(X, dtype=float)
    peaks = X.max(axis=-1)
    degenerate = peaks == 0.0
    safe = np.where(degenerate, 1.0, peaks)
    return X / safe[..., None], degenerate


def compute_ntl(area: AreaDataset) -> np.ndarray:
    """Per-interval non-technical loss: observer total minus the recorded sum.

    The (m, T) result is also stored on ``area.ntl``.  NTL is kept signed;
    negative values can occur with noisy observers and are left to scoring.
    """
    E = area.observer_matrix()
    recorded = area.recorded_tensor().sum(axis=0)
    if E.shape != recorded.shape:
        raise ShapeError(f"observer shape {E.shape} != consumer-sum shape {recorded.shape}")
    area.ntl = E - recorded
    return area.ntl


# ---------------------------------------------------------------------------
# CSV ingestion

@dataclass
class ColumnSpec:
    """How consumer CSV rows are laid out.

    ``wide``: one row per consumer-day, header ``consumer_id,day,v1,...,vT``.
    ``long``: one row per reading, header ``consumer_id,day,t,value``.
    """

    layout: str = "wide"
    intervals: int | None = None  # expected T; None = infer from the file

    def __post_init__(self):
        if self.layout not in ("wide", "long"):
            raise ParameterError(f"unknown CSV layout {self.layout!r}")


def _parse_int(text: str, what: str, path: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what} {text!r} is not an integer", path=str(path), line=line) from None


def _parse_reading(text: str, path: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"reading {text!r} is not a number", path=str(path), line=line) from None
    if not np.isfinite(v):
        raise DomainError(f"{path}:{line}: non-finite reading {text!r}")
    if v < 0:
        raise DomainError(f"{path}:{line}: negative reading {v}")
    return v


def load_consumers_csv(path, schema: ColumnSpec | None = None) -> list[ConsumerSeries]:
    """Read consumer day profiles from CSV, validating shape strictly.

    Consumers come back in first-appearance order with days sorted by day
    index.  Missing cells are an error, never imputed: every consumer must
    cover a contiguous 0..m-1 day range at a uniform T.
    """
    schema = schema or ColumnSpec()
    rows: dict[str, dict[int, np.ndarray]] = {}
    T_seen: int | None = schema.intervals

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            warnings.warn(f"{path}: empty consumer CSV, no consumers loaded", stacklevel=2)
            return []

        if schema.layout == "wide":
            if len(header) < 3 or header[0] != "consumer_id" or header[1] != "day":
                raise ParseError(
                    "expected wide header consumer_id,day,v1,...,vT", path=str(path), line=1
                )
            header_T = len(header) - 2
            if T_seen is not None and header_T != T_seen:
                raise ShapeError(f"{path}: header has {header_T} intervals, expected {T_seen}")
            T_seen = header_T
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != T_seen + 2:
                    who = f"consumer {row[0]!r} day {row[1]}" if len(row) >= 2 else "row"
                    raise ShapeError(
                        f"{path}:{lineno}: {who} has {len(row) - 2} readings, expected {T_seen}"
                    )
                cid = row[0]
                day = _parse_int(row[1], "day index", path, lineno)
                values = np.array([_parse_reading(v, path, lineno) for v in row[2:]])
                days = rows.setdefault(cid, {})
                if day in days:
                    raise ParseError(
                        f"duplicate day {day} for consumer {cid!r}", path=str(path), line=lineno
                    )
                days[day] = values
        else:  # long
            if header[:4] != ["consumer_id", "day", "t", "value"]:
                raise ParseError(
                    "expected long header consumer_id,day,t,value", path=str(path), line=1
                )
            cells: dict[str, dict[int, dict[int, float]]] = {}
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 4:
                    raise ParseError("expected 4 columns", path=str(path), line=lineno)
                cid = row[0]
                day = _parse_int(row[1], "day index", path, lineno)
                t = _parse_int(row[2], "interval index", path, lineno)
                cells.setdefault(cid, {}).setdefault(day, {})[t] = _parse_reading(
                    row[3], path, lineno
                )
            if T_seen is None and cells:
                T_seen = 1 + max(
                    t
                    for per_day in cells.values()
                    for readings in per_day.values()
                    for t in readings
                )
            for cid, per_day in cells.items():
                for day, readings in per_day.items():
                    missing = sorted(set(range(T_seen)) - set(readings))
                    if missing:
                        raise ShapeError(
                            f"{path}: consumer {cid!r} day {day} is missing "
                            f"intervals {missing[:5]}"
                        )
                    rows.setdefault(cid, {})[day] = np.array(
                        [readings[t] for t in range(T_seen)]
                    )

    consumers = []
    for cid, days in rows.items():
        expected = set(range(len(days)))
        if set(days) != expected:
            missing = sorted(expected - set(days))
            raise ShapeError(
                f"{path}: consumer {cid!r} has a gap in its day range (missing {missing[:5]})"
            )
        consumers.append(
            ConsumerSeries(cid, [DayProfile(days[j]) for j in range(len(days))])
        )
    if not consumers:
        warnings.warn(f"{path}: consumer CSV has a header but no rows", stacklevel=2)
    return consumers


def load_observer_csv(path, intervals: int | None = None) -> list[DayProfile]:
    """Read one observer meter's day profiles (header ``day,v1,...,vT``)."""
    days: dict[int, np.ndarray] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty observer CSV", path=str(path), line=1) from None
        if len(header) < 2 or header[0] != "day":
            raise ParseError("expected observer header day,v1,...,vT", path=str(path), line=1)
        T = len(header) - 1
        if intervals is not None and T != intervals:
            raise ShapeError(f"{path}: observer header has {T} intervals, expected {intervals}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != T + 1:
                raise ShapeError(f"{path}:{lineno}: row has {len(row) - 1} readings, expected {T}")
            day = _parse_int(row[0], "day index", path, lineno)
            if day in days:
                raise ParseError(f"duplicate observer day {day}", path=str(path), line=lineno)
            days[day] = np.array([_parse_reading(v, path, lineno) for v in row[1:]])
    if set(days) != set(range(len(days))):
        raise ShapeError(f"{path}: observer day range has gaps")
    return [DayProfile(days[j]) for j in range(len(days))]


def write_consumers_csv(path, consumers: list[ConsumerSeries], which: str = "recorded") -> None:
    """Write consumers in the wide layout; ``which`` selects recorded or truth values."""
    if not consumers:
        raise ParameterError("nothing to write: empty consumer list")
    T = consumers[0].T
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["consumer_id", "day"] + [f"v{t + 1}" for t in range(T)])
        for c in consumers:
            days = c.days if which == "recorded" else c.ground_truth
            if days is None:
                raise ParameterError(f"consumer {c.consumer_id!r} has no ground truth to write")
            for j, d in enumerate(days):
                writer.writerow([c.consumer_id, j] + [repr(float(v)) for v in d.values])


def write_observer_csv(path, observer: list[DayProfile]) -> None:
    T = observer[0].T
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day"] + [f"v{t + 1}" for t in range(T)])
        for j, d in enumerate(observer):
            writer.writerow([j] + [repr(float(v)) for v in d.values])


# ---------------------------------------------------------------------------
# Synthetic ground truth

def synth_ground_truth(
    n_consumers: int,
    m_days: int,
    T: int = DEFAULT_INTERVALS,
    seed: int = 0,
    noise_sigma: float = 0.35,
) -> list[ConsumerSeries]:
    """Generate strictly positive daily load shapes for n consumers over m days.

    The population mixes two archetypes: peaky households (morning/evening
    Gaussian bumps with an occasional midday hump) and business premises
    with a flat-top plateau over their opening hours.  Every parameter --
    peak centers, widths, weights, opening hours, base load, overall scale
    -- is drawn once per consumer.  Each day then re-centers the shape
    slightly, occasionally drops to a low-activity day, applies a day-level
    scale jitter and per-interval multiplicative lognormal noise of width
    ``noise_sigma``, so a consumer's days form a cloud rather than copies
    of one curve.  Deterministic for a given seed.
    """
    if n_consumers < 1 or m_days < 1:
        raise ParameterError("n_consumers and m_days must be >= 1")
    if T < 2:
        raise ParameterError("T must be >= 2")

    hours = (np.arange(T) + 0.5) * (24.0 / T)
    consumers = []
    for i in range(n_consumers):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0, i)))
        base_load = rng.uniform(0.05, 0.45)
        scale = float(np.exp(rng.normal(np.log(0.8), 0.5)))  # kWh per interval, roughly
        plateau = rng.random() < 0.35
        if plateau:
            open_h = rng.uniform(6.0, 10.5)
            close_h = rng.uniform(15.5, 21.5)
            edge = rng.uniform(0.3, 1.3)
            w_p = rng.uniform(0.6, 1.7)
            w_m = rng.uniform(0.0, 0.35)
            w_e = rng.uniform(0.0, 0.35)
        else:
            w_m = rng.uniform(0.1, 1.4)
            w_e = rng.uniform(0.15, 1.5)
        morning_c = rng.uniform(5.5, 11.0)
        evening_c = rng.uniform(16.5, 22.5)
        midday_c = rng.uniform(11.0, 15.0)
        morning_w = rng.uniform(0.7, 2.8)
        evening_w = rng.uniform(1.0, 3.2)
        midday_w = rng.uniform(1.5, 3.5)
        w_d = 0.0 if plateau else rng.uniform(0.0, 0.9)
        off_day_rate = rng.uniform(0.0, 0.3)

        days = []
        for _ in range(m_days):
            shift = rng.normal(0.0, 0.6, size=3)
            activity = (
                w_m * np.exp(-0.5 * ((hours - morning_c - shift[0]) / morning_w) ** 2)
                + w_e * np.exp(-0.5 * ((hours - evening_c - shift[1]) / evening_w) ** 2)
                + w_d * np.exp(-0.5 * ((hours - midday_c - shift[2]) / midday_w) ** 2)
            )
            if plateau:
                lo = 1.0 / (1.0 + np.exp(-(hours - open_h - shift[0]) / edge))
                hi = 1.0 / (1.0 + np.exp(-(close_h + shift[1] - hours) / edge))
                activity = activity + w_p * lo * hi
            if rng.random() < off_day_rate:  # closed / away: activity collapses
                activity = activity * rng.uniform(0.15, 0.5)
            day_jitter = np.exp(rng.normal(0.0, 0.15))
            interval_noise = np.exp(rng.normal(0.0, noise_sigma, size=T))
            days.append(DayProfile(scale * day_jitter * (base_load + activity) * interval_noise))
        consumers.append(ConsumerSeries(f"c{i:04d}", days, ground_truth=None))
    return consumers


def observer_from_truth(
    consumers: list[ConsumerSeries],
    noise_sigma: float = 0.0,
    seed: int = 0,
    which: str = "recorded",
) -> list[DayProfile]:
    """Observer totals as the per-interval sum over consumers.

    ``noise_sigma`` > 0 adds zero-mean Gaussian measurement noise per interval
    (clipped at zero so readings stay valid).  The default is the exact sum,
    which keeps e_t == 0 testable for benign areas.
    """
    total = np.zeros((consumers[0].m, consumers[0].T))
    for c in consumers:
        total += c.recorded_matrix() if which == "recorded" else c.truth_matrix()
    if noise_sigma > 0:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(9,)))
        total = np.clip(total + rng.normal(0.0, noise_sigma, size=total.shape), 0.0, None)
    return [DayProfile(total[j]) for j in range(total.shape[0])]
