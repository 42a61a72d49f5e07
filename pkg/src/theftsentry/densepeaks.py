"""Density-peak outlier geometry over normalized load profiles.

For N profiles with pairwise Euclidean distances d(p, q) and a cut-off
distance d_c, each profile gets:

    rho_p   local density: the number of neighbors with d < d_c (cut-off
            kernel), or sum(exp(-(d/d_c)^2)) over q != p (Gaussian kernel)
    delta_p distance to the nearest profile of higher density; the single
            densest profile instead takes its distance to the farthest one
    zeta_p  abnormality: delta_p / (rho_p + 1)

Isolated, strangely shaped profiles land at low rho and high delta, so they
top the zeta ranking.  Density ties are broken by profile index (lower index
counts as denser), which makes the "denser than" relation a strict total
order with exactly one maximum.

The implementation never materializes the N x N distance matrix: each pass
streams over row blocks in O(block * N) memory.  Within a block, squared
distances come from a BLAS Gram product; any pair whose Gram-form distance
lands within a tiny error margin of a decision threshold (the d_c cut, a
running minimum or maximum) is recomputed with the canonical elementwise
formula sum((u - v)**2), so every count and every extremum is bit-identical
to a naive full-matrix evaluation of that formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, ParameterError, ShapeError

DEFAULT_NEIGHBOR_FRACTION = 0.02
DEFAULT_BLOCK_SIZE = 512
_EXACT_PAIR_LIMIT = 10_000_000  # above this many pairs, select_dc samples
_SAMPLE_PAIRS = 1_000_000
_MARGIN = 1e-11  # relative band width for Gram-vs-canonical disagreement


def _as_matrix(profiles) -> np.ndarray:
    if isinstance(profiles, np.ndarray):
        X = np.asarray(profiles, dtype=float)
    else:
        rows = [getattr(p, "values", p) for p in profiles]
        X = np.asarray(rows, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ShapeError(f"expected a (N, T) profile matrix, got shape {X.shape}")
    return X


def profile_distance(u, v) -> float:
    """Euclidean distance between two profiles of equal length."""
    uv = np.asarray(getattr(u, "values", u), dtype=float)
    vv = np.asarray(getattr(v, "values", v), dtype=float)
    if uv.shape != vv.shape:
        raise ShapeError(f"profile shapes differ: {uv.shape} vs {vv.shape}")
    return float(np.sqrt(((uv - vv) ** 2).sum()))


def _sq_dists_exact(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Canonical squared distances between row sets; the reference arithmetic."""
    return ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=-1)


def select_dc(
    profiles,
    target_fraction: float = DEFAULT_NEIGHBOR_FRACTION,
    *,
    exact_pair_limit: int = _EXACT_PAIR_LIMIT,
    sample_pairs: int = _SAMPLE_PAIRS,
    seed: int = 0,
) -> float:
    """Cut-off distance at the given quantile of pairwise distances.

    Takes the value at 1-based position ceil(target_fraction * P) of the
    ascending sorted distances over all P = N(N-1)/2 pairs, so the average
    neighborhood size is roughly ``target_fraction * N``.  When P exceeds
    ``exact_pair_limit`` the quantile is estimated from ``sample_pairs``
    uniformly sampled pairs (deterministic for a given ``seed``).

    Coincident profiles can push the quantile to zero, which is no usable
    cut-off; the position is then advanced to the smallest positive
    distance.  Only a dataset with all profiles identical fails.
    """
    X = _as_matrix(profiles)
    N = X.shape[0]
    if N < 2:
        raise ParameterError("need at least two profiles to pick a cut-off distance")
    if not (0.0 < target_fraction < 1.0):
        raise ParameterError("target_fraction must be in (0, 1)")

    n_pairs = N * (N - 1) // 2
    if n_pairs <= exact_pair_limit:
        chunks = []
        for i in range(N - 1):
            chunks.append(((X[i] - X[i + 1 :]) ** 2).sum(axis=-1))
        d2 = np.concatenate(chunks)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(7,)))
        samples = []
        remaining = sample_pairs
        while remaining > 0:
            take = min(remaining, 500_000)
            i = rng.integers(0, N, size=take)
            j = rng.integers(0, N, size=take)
            keep = i != j
            i, j = i[keep], j[keep]
            samples.append(((X[i] - X[j]) ** 2).sum(axis=-1))
            remaining -= i.size
        d2 = np.concatenate(samples)

    pos = int(np.ceil(target_fraction * d2.size))
    d2.partition(pos - 1)
    d2_at = d2[pos - 1]
    if d2_at == 0.0:
        positive = d2[d2 > 0.0]
        if positive.size == 0:
            raise DegenerateDataError("all pairwise distances are zero")
        d2_at = positive.min()
    return float(np.sqrt(d2_at))


def _block_rows(N: int, block_size: int):
    for start in range(0, N, block_size):
        yield start, min(start + block_size, N)


def _gram_sq_dists(Xb: np.ndarray, X: np.ndarray, nb: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Fast |u-v|^2 via the Gram product, accurate to ~_MARGIN relative."""
    d2 = Xb @ X.T
    d2 *= -2.0
    d2 += nb[:, None]
    d2 += n[None, :]
    return d2


def local_density(
    profiles,
    d_c: float,
    kernel: str = "cutoff",
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> np.ndarray:
    """Local density rho per profile; integer neighbor counts for the cut-off kernel."""
    X = _as_matrix(profiles)
    if d_c <= 0:
        raise ParameterError("d_c must be positive")
    if kernel not in ("cutoff", "gaussian"):
        raise ParameterError(f"unknown kernel {kernel!r}")
    N = X.shape[0]
    dc2 = d_c * d_c
    norms = (X * X).sum(axis=1)
    max_norm = norms.max()

    if kernel == "gaussian":
        rho = np.empty(N)
        for s, e in _block_rows(N, block_size):
            d2 = _gram_sq_dists(X[s:e], X, norms[s:e], norms)
            np.maximum(d2, 0.0, out=d2)
            d2 /= -dc2
            np.exp(d2, out=d2)
            rho[s:e] = d2.sum(axis=1) - 1.0  # drop the self term
        return rho

    rho = np.empty(N, dtype=np.int64)
    for s, e in _block_rows(N, block_size):
        d2 = _gram_sq_dists(X[s:e], X, norms[s:e], norms)
        margin = _MARGIN * (norms[s:e] + max_norm)  # bounds |gram - exact| per row
        lo = (dc2 - margin)[:, None]
        sure = d2 < lo
        counts = sure.sum(axis=1)
        np.less(d2, (dc2 + margin)[:, None], out=sure)
        wide = sure.sum(axis=1)
        for r in np.flatnonzero(wide != counts):  # rows with pairs near the cut
            jj = np.flatnonzero(sure[r] & (d2[r] >= lo[r]))
            d2x = ((X[s + r] - X[jj]) ** 2).sum(axis=-1)
            counts[r] += int((d2x < dc2).sum())
        rho[s:e] = counts - 1  # the self pair always counts; remove it
    return rho


def separation(
    profiles,
    rho,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> tuple[np.ndarray, np.ndarray]:
    """Distance to the nearest denser profile, and that profile's index.

    Returns ``(delta, nearest_denser)``; the single densest profile gets the
    distance to its farthest profile and nearest index -1.  Among equally
    near denser profiles the lowest index wins.

    Profiles are processed in density order (rho descending, index ascending
    on ties), so "denser than row i" is exactly "sorted position < i" and
    each block only needs distances to the profiles before it.
    """
    X = _as_matrix(profiles)
    rho = np.asarray(rho)
    N = X.shape[0]
    if rho.shape != (N,):
        raise ShapeError(f"rho has shape {rho.shape}, expected ({N},)")
    if N == 1:
        return np.zeros(1), np.array([-1], dtype=np.int64)

    order = np.lexsort((np.arange(N), -rho))  # strict density order
    Xs = X[order]
    norms = (Xs * Xs).sum(axis=1)
    max_norm = norms.max()
    delta2 = np.empty(N)
    nearest = np.full(N, -1, dtype=np.int64)  # in original indices

    for s, e in _block_rows(N, block_size):
        if s == 0:
            s = 1  # the density maximum is handled separately below
            if e <= 1:
                continue
        d2 = _gram_sq_dists(Xs[s:e], Xs[:e], norms[s:e], norms[:e])
        # profiles at sorted position >= the row's own are not denser
        local = np.arange(e - s)
        tail = d2[:, s:e]
        tail[local[:, None] <= local[None, :]] = np.inf
        jmin = d2.argmin(axis=1)
        dmin = d2[local, jmin]
        band = 2.0 * _MARGIN * (norms[s:e] + max_norm)
        in_band = (d2 <= (dmin + band)[:, None]).sum(axis=1)
        d2x = ((Xs[s:e] - Xs[jmin]) ** 2).sum(axis=-1)
        delta2[s:e] = d2x
        nearest[s:e] = order[jmin]
        for r in np.flatnonzero(in_band > 1):  # near-ties: resolve exactly
            jj = np.flatnonzero(d2[r] <= dmin[r] + band[r])
            ex = ((Xs[s + r] - Xs[jj]) ** 2).sum(axis=-1)
            orig = order[jj]
            best = np.lexsort((orig, ex))[0]
            delta2[s + r] = ex[best]
            nearest[s + r] = orig[best]

    # the density maximum has no denser profile; use its farthest distance
    d2row = _gram_sq_dists(Xs[:1], Xs, norms[:1], norms)[0]
    band = 2.0 * _MARGIN * (norms[0] + max_norm)
    cand = np.flatnonzero(d2row >= d2row.max() - band)
    delta2[0] = (((Xs[0] - Xs[cand]) ** 2).sum(axis=-1)).max()

    delta = np.empty(N)
    nearest_out = np.empty(N, dtype=np.int64)
    delta[order] = np.sqrt(delta2)
    nearest_out[order] = nearest
    return delta, nearest_out


def abnormality(rho, delta) -> np.ndarray:
    """zeta = delta / (rho + 1): high for isolated low-density profiles."""
    rho = np.asarray(rho, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if rho.shape != delta.shape:
        raise ShapeError(f"rho shape {rho.shape} != delta shape {delta.shape}")
    return delta / (rho + 1.0)


@dataclass
class DensityRecord:
    """One profile's density geometry."""

    index: int
    rho: float
    delta: float
    nearest_denser: int | None
    zeta: float


def density_records(
    profiles,
    *,
    target_fraction: float = DEFAULT_NEIGHBOR_FRACTION,
    kernel: str = "cutoff",
    d_c: float | None = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
    dc_seed: int = 0,
) -> list[DensityRecord]:
    """Full rho/delta/zeta pass over a profile set."""
    X = _as_matrix(profiles)
    if d_c is None:
        d_c = select_dc(X, target_fraction, seed=dc_seed)
    rho = local_density(X, d_c, kernel, block_size=block_size)
    delta, nearest = separation(X, rho, block_size=block_size)
    zeta = abnormality(rho, delta)
    return [
        DensityRecord(
            index=p,
            rho=float(rho[p]),
            delta=float(delta[p]),
            nearest_denser=None if nearest[p] < 0 else int(nearest[p]),
            zeta=float(zeta[p]),
        )
        for p in range(X.shape[0])
    ]
