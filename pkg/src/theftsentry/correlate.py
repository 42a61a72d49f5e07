"""Dependence measures between paired samples: MIC and Pearson correlation.

For a sample of n (x, y) pairs, an a-by-b grid partitions the plane into
a columns and b rows.  Writing I(G) for the mutual information (in bits) of
the empirical cell distribution induced by the sample on grid G,

    I*(a, b)  = max over all a-by-b grids of I(G)
    M[a, b]   = I*(a, b) / log2(min(a, b))
    mic       = max of M[a, b] over all shapes with a, b >= 2 and a*b < n**0.6

All grid search is rank-based: only the orderings and tie patterns of the
two coordinates matter, so mic is exactly invariant under strictly
increasing transforms of either coordinate.

Maximization strategy, per shape:

* 2x2 grids are always maximized exactly by a full sweep over every
  (x-cut, y-cut) pair, which is O(n^2) with cumulative count tables.
* other shapes on small samples (n <= 16) are maximized exactly: enumerate
  every y-axis cut placement over the gaps between distinct y values, and
  for each run the exact x-axis dynamic program over clump boundaries.
* other shapes on larger samples use the standard approximation: one axis
  is rank-equipartitioned, the other is optimized by the same dynamic
  program over clump boundaries (coarsened to at most 15 superclumps per
  requested column); both orientations are evaluated and the larger wins.

The dynamic program is exact for its axis given the fixed opposite-axis
partition: an optimal column boundary never falls inside a maximal run of
consecutive same-row points, so searching clump boundaries is sufficient.

Scoring a whole area runs the same computation for many x-vectors against
one shared y-vector; ``mic_many`` vectorizes that case across rows (the
scalar path is the one-row special case of it, so both agree bitwise).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegeneratePartitionError, InternalError, ParameterError

DEFAULT_BOUND_EXPONENT = 0.6
_EXACT_MAX_N = 16  # exhaustive joint search is affordable below this
_CLUMP_FACTOR = 15  # superclumps kept per requested column


# ---------------------------------------------------------------------------
# small shared helpers

def _as_pair(x, y, min_len: int = 2) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ParameterError(f"coordinate lengths differ: {x.size} vs {y.size}")
    if x.size < min_len:
        raise ParameterError(f"need at least {min_len} pairs, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ParameterError("pair sample contains non-finite values")
    return x, y


def _dense_ranks(v: np.ndarray) -> tuple[np.ndarray, int]:
    """Map each value to the index of its run among sorted distinct values."""
    order = np.argsort(v, kind="stable")
    sv = v[order]
    is_new = np.empty(sv.size, dtype=bool)
    is_new[0] = True
    is_new[1:] = sv[1:] != sv[:-1]
    run_sorted = np.cumsum(is_new) - 1
    ranks = np.empty(v.size, dtype=np.int64)
    ranks[order] = run_sorted
    return ranks, int(run_sorted[-1]) + 1


@lru_cache(maxsize=64)
def _phi_table(n: int) -> np.ndarray:
    """phi[c] = (c/n) * log2(c/n) with phi[0] = 0, for integer counts c."""
    c = np.arange(n + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (c / n) * np.log2(c / n)
    out[0] = 0.0
    return out


@lru_cache(maxsize=64)
def _lower_mask(k: int) -> np.ndarray:
    """Boolean (k, k) mask of the lower triangle including the diagonal."""
    return np.tril(np.ones((k, k), dtype=bool))


def _partition_boundaries(counts: np.ndarray, k: int) -> list[int]:
    """Pick k-1 cut positions over value runs, balancing bin populations.

    ``counts[r]`` is the population of the r-th run in sorted order; a cut at
    r splits after run r.  Each of the k bins receives at least one run; for
    all-distinct values the bin sizes differ by at most one.  |cum - target|
    is unimodal in the cut position, so the balanced greedy choice is the
    unconstrained nearest position clamped into the feasible window.
    """
    counts = np.asarray(counts)
    R = counts.size
    if k > R:
        raise DegeneratePartitionError(f"cannot split {R} distinct value runs into {k} bins")
    if k == R:
        return list(range(k - 1))
    cum = np.cumsum(counts)
    n = int(cum[-1])
    targets = n * np.arange(1, k) / k
    pos = np.searchsorted(cum, targets)
    lo = np.minimum(pos, R - 1)
    below = np.maximum(lo - 1, 0)
    pick = np.where(np.abs(cum[below] - targets) <= np.abs(cum[lo] - targets), below, lo)
    chosen: list[int] = []
    prev = -1
    for j in range(1, k):
        c = int(np.clip(pick[j - 1], prev + 1, R - 1 - (k - 1 - j)))
        chosen.append(c)
        prev = c
    return chosen


# ---------------------------------------------------------------------------
# public axis partition and plain grid MI

def equipartition(values, k: int) -> np.ndarray:
    """Rank-based split of ``values`` into k bins; returns the k-1 cut values.

    Cuts fall midway between adjacent distinct values, so equal values always
    share a bin; with all-distinct input the bin sizes differ by at most one.
    Raises :class:`DegeneratePartitionError` when there are fewer than k
    distinct values.
    """
    values = np.asarray(values, dtype=float).ravel()
    if k < 2:
        raise ParameterError("k must be >= 2")
    if k > values.size:
        raise ParameterError(f"k={k} exceeds the sample size {values.size}")
    order = np.argsort(values, kind="stable")
    sv = values[order]
    is_new = np.empty(sv.size, dtype=bool)
    is_new[0] = True
    is_new[1:] = sv[1:] != sv[:-1]
    starts = np.flatnonzero(is_new)
    distinct = sv[starts]
    run_counts = np.diff(np.append(starts, sv.size))
    cut_runs = _partition_boundaries(run_counts, k)
    return np.array([(distinct[r] + distinct[r + 1]) / 2.0 for r in cut_runs])


def _mi_bits_from_counts(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = p * np.log2(p / (px * py))
    return float(np.nansum(terms))  # 0 log 0 := 0


def grid_mutual_information(x, y, x_edges, y_edges) -> float:
    """Mutual information (bits) of the sample on a fixed grid.

    ``x_edges``/``y_edges`` are the interior cut values; a point equal to a
    cut falls into the upper cell.
    """
    x, y = _as_pair(x, y)
    x_edges = np.atleast_1d(np.asarray(x_edges, dtype=float))
    y_edges = np.atleast_1d(np.asarray(y_edges, dtype=float))
    if x_edges.size < 1 or y_edges.size < 1:
        raise ParameterError("a grid needs at least one interior cut per axis")
    a, b = x_edges.size + 1, y_edges.size + 1
    xb = np.digitize(x, x_edges)
    yb = np.digitize(y, y_edges)
    counts = np.bincount(xb * b + yb, minlength=a * b).reshape(a, b).astype(float)
    return _mi_bits_from_counts(counts)


# ---------------------------------------------------------------------------
# scalar grid maximization

def _row_labels(z: np.ndarray, bins: int) -> tuple[np.ndarray | None, int]:
    """Equipartition z into min(bins, distinct-runs) rows; per-point labels."""
    ranks, n_runs = _dense_ranks(z)
    if n_runs < 2:
        return None, 1
    b_eff = min(bins, n_runs)
    counts = np.bincount(ranks)
    cuts = np.asarray(_partition_boundaries(counts, b_eff))
    return np.searchsorted(cuts, ranks, side="left"), b_eff


def _clump_cells(w: np.ndarray, rows: np.ndarray, n_rows: int) -> np.ndarray | None:
    """Per-clump row counts along the w axis, or None when w is constant.

    A clump is a maximal run of consecutive points (in w order) lying in one
    row; points sharing a w value can never be separated, so an atom of tied
    w values spanning several rows forms its own clump.
    """
    order = np.argsort(w, kind="stable")
    ws = w[order]
    rs = rows[order]
    new_atom = np.empty(ws.size, dtype=bool)
    new_atom[0] = True
    new_atom[1:] = ws[1:] != ws[:-1]
    starts = np.flatnonzero(new_atom)
    if starts.size < 2:
        return None
    row_min = np.minimum.reduceat(rs, starts)
    row_max = np.maximum.reduceat(rs, starts)
    single = row_min == row_max
    merge = single[:-1] & single[1:] & (row_min[:-1] == row_min[1:])
    clump_of_atom = np.zeros(starts.size, dtype=np.int64)
    clump_of_atom[1:] = np.cumsum(~merge)
    atom_id = np.cumsum(new_atom) - 1
    clump_per_point = clump_of_atom[atom_id]
    k = int(clump_of_atom[-1]) + 1
    return np.bincount(clump_per_point * n_rows + rs, minlength=k * n_rows).reshape(k, n_rows)


def _coarsen_cells(cell: np.ndarray, limit: int) -> np.ndarray:
    """Merge adjacent clumps into at most ``limit`` superclumps of balanced size."""
    k = cell.shape[0]
    if k <= limit:
        return cell
    cuts = np.asarray(_partition_boundaries(cell.sum(axis=1), limit))
    group = np.searchsorted(cuts, np.arange(k), side="left")
    out = np.zeros((limit, cell.shape[1]), dtype=cell.dtype)
    np.add.at(out, group, cell)
    return out


def _dp_best_columns(cell: np.ndarray, budget: int, n: int) -> np.ndarray:
    """Best MI (bits) over column partitions drawn from clump boundaries.

    Returns ``best[l-1]`` = maximal I using at most l columns, l = 1..budget,
    for the fixed row partition encoded in ``cell``.  The objective is
    additive per column, so a max-plus dynamic program over boundary
    prefixes is exact.
    """
    phi = _phi_table(n)
    k = cell.shape[0]
    R = np.zeros((k + 1, cell.shape[1]), dtype=np.int64)
    np.cumsum(cell, axis=0, out=R[1:])
    C = R.sum(axis=1)
    F = np.take(phi, R[None, :, :] - R[:, None, :], mode="clip").sum(axis=-1)
    F -= np.take(phi, C[None, :] - C[:, None], mode="clip")
    F[_lower_mask(k + 1)] = -np.inf  # only s < t is a valid column
    h_rows = -np.take(phi, R[k]).sum()

    best = np.full(budget, -np.inf)
    G = F[0].copy()  # exactly one column over the first t clumps
    best[0] = G[k]
    for l in range(2, budget + 1):
        G = (G[:, None] + F).max(axis=0)
        best[l - 1] = G[k]
    return np.maximum.accumulate(h_rows + best)


def _approx_pass(
    w: np.ndarray, z: np.ndarray, budget: int, bins: int, limit: int | None = None
) -> np.ndarray:
    """Equipartition z into ``bins`` rows, optimize w columns up to ``budget``."""
    rows, b_eff = _row_labels(z, bins)
    if rows is None:
        return np.zeros(budget)
    cell = _clump_cells(w, rows, b_eff)
    if cell is None:
        return np.zeros(budget)
    cell = _coarsen_cells(cell, limit if limit is not None else _CLUMP_FACTOR * budget)
    return _dp_best_columns(cell, budget, w.size)


def _exact_shape(w: np.ndarray, z: np.ndarray, a: int, b: int) -> float:
    """Exact I*(a, b): enumerate z-axis cut placements, exact DP on the w axis."""
    z_ranks, nz = _dense_ranks(z)
    _, nw = _dense_ranks(w)
    if nz < 2 or nw < 2:
        return 0.0
    b_eff = min(b, nz)
    best = 0.0
    for cuts in itertools.combinations(range(nz - 1), b_eff - 1):
        rows = np.searchsorted(np.asarray(cuts, dtype=np.int64), z_ranks, side="left")
        cell = _clump_cells(w, rows, b_eff)
        vals = _dp_best_columns(cell, a, w.size)
        best = max(best, float(vals[a - 1]))
    return best


def _exact_2x2(x: np.ndarray, y: np.ndarray) -> float:
    """Exact I*(2, 2) by sweeping every (x-cut, y-cut) pair over value gaps."""
    rx, nx = _dense_ranks(x)
    ry, ny = _dense_ranks(y)
    if nx < 2 or ny < 2:
        return 0.0
    n = x.size
    phi = _phi_table(n)
    cell = np.bincount(rx * ny + ry, minlength=nx * ny).reshape(nx, ny)
    P = np.zeros((nx + 1, ny + 1), dtype=np.int64)
    np.cumsum(np.cumsum(cell, axis=0), axis=1, out=P[1:, 1:])
    n11 = P[1:nx, 1:ny]  # points left of the x-cut and below the y-cut
    left = P[1:nx, ny : ny + 1]
    bottom = P[nx : nx + 1, 1:ny]
    n12 = left - n11
    n21 = bottom - n11
    n22 = n - left - bottom + n11
    joint = phi[n11] + phi[n12] + phi[n21] + phi[n22]
    margins = phi[left] + phi[n - left] + phi[bottom] + phi[n - bottom]
    return float((joint - margins).max())


def _is_constant(v: np.ndarray) -> bool:
    return bool(np.all(v == v[0]))


def _shape_values(
    x: np.ndarray,
    y: np.ndarray,
    shapes: list[tuple[int, int]],
    limit: int | None = None,
) -> dict:
    """I*(a, b) for every requested shape, exact where affordable.

    Each shape takes the max over both orientations, which also makes the
    result exactly symmetric in (x, y) for a symmetric shape set.
    """
    n = x.size
    values: dict[tuple[int, int], float] = {}
    rest = []
    for shape in shapes:
        if shape == (2, 2):
            values[shape] = _exact_2x2(x, y)
        else:
            rest.append(shape)
    if not rest:
        return values

    if n <= _EXACT_MAX_N:
        for a, b in rest:
            values[(a, b)] = max(_exact_shape(x, y, a, b), _exact_shape(y, x, b, a))
        return values

    budget_by_rows_x: dict[int, int] = {}
    budget_by_rows_y: dict[int, int] = {}
    for a, b in rest:
        budget_by_rows_x[b] = max(budget_by_rows_x.get(b, 0), a)
        budget_by_rows_y[a] = max(budget_by_rows_y.get(a, 0), b)
    pass_x = {b: _approx_pass(x, y, budget, b, limit) for b, budget in budget_by_rows_x.items()}
    pass_y = {a: _approx_pass(y, x, budget, a, limit) for a, budget in budget_by_rows_y.items()}
    for a, b in rest:
        values[(a, b)] = max(float(pass_x[b][a - 1]), float(pass_y[a][b - 1]))
    return values


# ---------------------------------------------------------------------------
# batched engine: many x rows against one shared y

def _inverse_permutations(order: np.ndarray) -> np.ndarray:
    inv = np.empty_like(order)
    rows = np.arange(order.shape[0])[:, None]
    inv[rows, order] = np.arange(order.shape[1])[None, :]
    return inv


def _batched_2x2(ranks_x: np.ndarray, ry: np.ndarray, ny: int, n: int) -> np.ndarray:
    """Exact I*(2,2) per row for all-distinct x rows against shared y ranks."""
    nb, T = ranks_x.shape
    phi = _phi_table(n)
    flat = (np.arange(nb)[:, None] * T + ranks_x) * ny + ry[None, :]
    cell = np.bincount(flat.ravel(), minlength=nb * T * ny).reshape(nb, T, ny)
    P = np.zeros((nb, T + 1, ny + 1), dtype=np.int64)
    np.cumsum(np.cumsum(cell, axis=1), axis=2, out=P[:, 1:, 1:])
    n11 = P[:, 1:T, 1:ny]
    left = P[:, 1:T, ny : ny + 1]
    bottom = P[:, T : T + 1, 1:ny]
    n12 = left - n11
    n21 = bottom - n11
    n22 = n - left - bottom + n11
    joint = phi[n11] + phi[n12] + phi[n21] + phi[n22]
    margins = phi[left] + phi[n - left] + phi[bottom] + phi[n - bottom]
    return (joint - margins).max(axis=(1, 2))


def _batched_pass(rows_w: np.ndarray, b_eff: int, budget: int, n: int) -> np.ndarray:
    """DP over clump boundaries for many rows at once.

    ``rows_w[i]`` holds row labels of sample i's points in ascending w order,
    where every w is distinct (each point is its own atom).  Rows are padded
    to the widest clump count; padding adds zero-population clumps, which
    contribute nothing and change no optimum.  Returns (nb, budget) best-I
    values for at most 1..budget columns.
    """
    nb, T = rows_w.shape
    phi = _phi_table(n)
    merge = rows_w[:, 1:] == rows_w[:, :-1]
    clump = np.zeros((nb, T), dtype=np.int64)
    np.cumsum(~merge, axis=1, out=clump[:, 1:])
    kmax = int(clump[:, -1].max()) + 1

    flat = (np.arange(nb)[:, None] * kmax + clump) * b_eff + rows_w
    cell = np.bincount(flat.ravel(), minlength=nb * kmax * b_eff).reshape(nb, kmax, b_eff)
    R = np.zeros((nb, kmax + 1, b_eff), dtype=np.int64)
    np.cumsum(cell, axis=1, out=R[:, 1:])
    C = R.sum(axis=2)
    h_rows = -np.take(phi, R[:, -1, :]).sum(axis=-1)

    if budget == 2:
        # a 2-column split at s scores F[0, s] + F[s, end]; no need for the
        # full boundary-pair matrix (s = 0 or s = end degenerate to 1 column)
        pref = np.take(phi, R).sum(axis=-1) - np.take(phi, C)
        suff = np.take(phi, R[:, -1:, :] - R, mode="clip").sum(axis=-1)
        suff -= np.take(phi, C[:, -1:] - C, mode="clip")
        best1 = pref[:, -1]
        best2 = (pref + suff).max(axis=1)
        out = np.empty((nb, 2))
        out[:, 0] = h_rows + best1
        out[:, 1] = h_rows + np.maximum(best1, best2)
        return out

    F = np.take(phi, R[:, None, :, :] - R[:, :, None, :], mode="clip").sum(axis=-1)
    F -= np.take(phi, C[:, None, :] - C[:, :, None], mode="clip")
    F[:, _lower_mask(kmax + 1)] = -np.inf

    best = np.full((nb, budget), -np.inf)
    G = F[:, 0, :].copy()
    best[:, 0] = G[:, -1]
    for l in range(2, budget + 1):
        G = (G[:, :, None] + F).max(axis=1)
        best[:, l - 1] = G[:, -1]
    return np.maximum.accumulate(h_rows[:, None] + best, axis=1)


def mic_many(
    X, y, bound_exponent: float = DEFAULT_BOUND_EXPONENT
) -> tuple[np.ndarray, np.ndarray]:
    """MIC of each row of X against the shared vector y.

    Returns ``(values, degenerate)``; a row is degenerate when it or y is
    constant, and scores 0.  Bitwise identical to calling :func:`mic` per
    row: rows with tied values (or a tied y) fall back to the scalar path,
    and the batched path reproduces the scalar arithmetic exactly.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    nb, T = X.shape
    if y.size != T:
        raise ParameterError(f"y has length {y.size}, rows have {T}")
    if T < 4:
        raise ParameterError(f"need at least 4 pairs, got {T}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ParameterError("pair sample contains non-finite values")

    values = np.zeros(nb)
    degenerate = np.zeros(nb, dtype=bool)
    if _is_constant(y):
        degenerate[:] = True
        return values, degenerate

    shapes = admissible_shapes(T, bound_exponent)
    small = not shapes
    if small:
        warnings.warn(
            f"sample of {T} pairs admits no grid under the n**{bound_exponent:g} "
            "bound; scoring the 2x2 grid only",
            stacklevel=2,
        )
        shapes = [(2, 2)]
    budgets = [s[0] for s in shapes] + [s[1] for s in shapes]
    limit = _CLUMP_FACTOR * max(budgets)

    const_rows = np.all(X == X[:, :1], axis=1)
    degenerate[const_rows] = True

    order_x = np.argsort(X, axis=1, kind="stable")
    sorted_x = np.take_along_axis(X, order_x, axis=1)
    distinct_rows = np.all(sorted_x[:, 1:] != sorted_x[:, :-1], axis=1)
    ry, ny = _dense_ranks(y)

    batch_ok = (
        T > _EXACT_MAX_N
        and ny == T
        and not small
        and T <= limit  # wider samples would need coarsening; scalar handles it
    )
    batch_idx = np.flatnonzero(distinct_rows & ~const_rows) if batch_ok else np.array([], int)
    scalar_idx = np.flatnonzero(~const_rows)
    if batch_idx.size:
        scalar_idx = np.setdiff1d(scalar_idx, batch_idx)

    if batch_idx.size:
        sub_order = order_x[batch_idx]
        ranks_x = _inverse_permutations(sub_order)
        per_shape: dict[tuple[int, int], np.ndarray] = {
            (2, 2): _batched_2x2(ranks_x, ry, ny, T)
        }
        rest = [s for s in shapes if s != (2, 2)]
        if rest:
            budget_by_rows_x: dict[int, int] = {}
            budget_by_rows_y: dict[int, int] = {}
            for a, b in rest:
                budget_by_rows_x[b] = max(budget_by_rows_x.get(b, 0), a)
                budget_by_rows_y[a] = max(budget_by_rows_y.get(a, 0), b)
            order_y = np.argsort(y, kind="stable")
            pass_x = {}
            for b, budget in budget_by_rows_x.items():
                y_rows, _ = _row_labels(y, b)
                rows_w = y_rows[sub_order]  # row labels in each sample's x order
                pass_x[b] = _batched_pass(rows_w, min(b, ny), budget, T)
            pass_y = {}
            for a, budget in budget_by_rows_y.items():
                cuts = np.asarray(_partition_boundaries(np.ones(T, dtype=np.int64), a))
                x_rows = np.searchsorted(cuts, ranks_x, side="left")
                rows_w = x_rows[:, order_y]  # x-derived labels in shared y order
                pass_y[a] = _batched_pass(rows_w, a, budget, T)
            for a, b in rest:
                per_shape[(a, b)] = np.maximum(
                    pass_x[b][:, a - 1], pass_y[a][:, b - 1]
                )
        stacked = np.stack(
            [per_shape[s] / np.log2(min(s)) for s in shapes], axis=0
        ).max(axis=0)
        values[batch_idx] = np.minimum(np.maximum(stacked, 0.0), 1.0)
        if np.any(stacked > 1.0 + 1e-9):
            raise InternalError("normalized grid MI escaped [0, 1]")

    for i in scalar_idx:
        raw = _shape_values(X[i], y, shapes, limit)
        value = max(raw[s] / np.log2(min(s)) for s in shapes)
        if value > 1.0 + 1e-9 or value < -1e-9:
            raise InternalError(f"normalized grid MI {value} escaped [0, 1]")
        values[i] = min(max(value, 0.0), 1.0)
    return values, degenerate


# ---------------------------------------------------------------------------
# public statistics

def max_mi(x, y, a: int, b: int) -> float:
    """Best achievable MI (bits) over a-by-b grids for this sample.

    Exact for 2x2 grids and for samples of at most 16 points; approximate
    (never above the true maximum) otherwise.  A constant coordinate carries
    no grid information and yields 0.
    """
    x, y = _as_pair(x, y)
    if a < 2 or b < 2:
        raise ParameterError("grid shapes start at 2x2")
    if _is_constant(x) or _is_constant(y):
        return 0.0
    return _shape_values(x, y, [(a, b)])[(a, b)]


def admissible_shapes(n: int, bound_exponent: float = DEFAULT_BOUND_EXPONENT) -> list[tuple[int, int]]:
    """Grid shapes (a, b) with a, b >= 2 and a*b < n**bound_exponent."""
    bound = float(n) ** bound_exponent
    shapes = []
    a = 2
    while a * 2 < bound:
        b = 2
        while a * b < bound:
            shapes.append((a, b))
            b += 1
        a += 1
    return shapes


@dataclass
class MicResult:
    value: float
    degenerate: bool = False  # a coordinate was constant; no dependence measurable
    small_sample: bool = False  # bound admitted no shape; fell back to 2x2


@dataclass
class CharacteristicMatrix:
    """Normalized best-MI per admissible grid shape."""

    entries: dict[tuple[int, int], float]
    bound: float


def characteristic_matrix(x, y, bound_exponent: float = DEFAULT_BOUND_EXPONENT) -> CharacteristicMatrix:
    x, y = _as_pair(x, y, min_len=4)
    bound = float(x.size) ** bound_exponent
    shapes = admissible_shapes(x.size, bound_exponent)
    if _is_constant(x) or _is_constant(y):
        return CharacteristicMatrix({s: 0.0 for s in shapes}, bound)
    budgets = [s[0] for s in shapes] + [s[1] for s in shapes]
    limit = _CLUMP_FACTOR * max(budgets) if budgets else None
    raw = _shape_values(x, y, shapes, limit)
    entries = {s: min(max(raw[s] / np.log2(min(s)), 0.0), 1.0) for s in shapes}
    return CharacteristicMatrix(entries, bound)


def mic_detail(x, y, bound_exponent: float = DEFAULT_BOUND_EXPONENT) -> MicResult:
    """MIC with degenerate/small-sample flags; see module docstring."""
    x, y = _as_pair(x, y, min_len=4)
    if _is_constant(x) or _is_constant(y):
        return MicResult(0.0, degenerate=True)
    small = not admissible_shapes(x.size, bound_exponent)
    values, _ = mic_many(x[None, :], y, bound_exponent)
    return MicResult(float(values[0]), small_sample=small)


def mic(x, y, bound_exponent: float = DEFAULT_BOUND_EXPONENT) -> float:
    """Maximal information coefficient of the pair sample, in [0, 1]."""
    return mic_detail(x, y, bound_exponent).value


def pcc(x, y) -> float:
    """Pearson product-moment correlation; 0 when a coordinate is constant."""
    x, y = _as_pair(x, y)
    if _is_constant(x) or _is_constant(y):
        return 0.0
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc @ xc) * (yc @ yc))
    if denom == 0.0:
        return 0.0
    return float((xc @ yc) / denom)
