"""Monte Carlo oracle for minor moments.

Estimates are produced by a fixed chunk plan: reps draws are split into
consecutive chunks of chunk_size, chunk k is generated from rng.child(k), and
per-chunk partial sums are reduced in chunk order.  The estimate therefore
depends only on (seed, stream, reps, chunk_size), never on thread count or
scheduling, and a run can be reproduced chunk by chunk.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .indexing import IndexSeq, as_index_seq
from .sampling import (
    RngStream,
    WishartSpec,
    sample_gaussian_square_batch,
    sample_general_batch,
)
from .standard_moments import MinorPair

DEFAULT_CHUNK_SIZE = 65536
MIN_REPS = 100

Pair = tuple[IndexSeq, IndexSeq]


@dataclass(frozen=True)
class OracleEstimate:
    """One Monte Carlo estimate with its standard error.

    std_error is the sample standard deviation over reps divided by
    sqrt(reps) (for mean-type estimates) or the delta-method equivalent for
    variance and covariance estimates.
    """

    estimate: float
    std_error: float
    reps: int
    seed: int
    stream: int
    kind: str
    target: str

    def __post_init__(self) -> None:
        if self.reps < 2:
            raise ValueError("an estimate needs at least 2 reps")
        if not math.isfinite(self.std_error) or self.std_error < 0.0:
            raise ValueError(f"invalid std_error {self.std_error}")

    def within(self, value: float, n_std_errors: float = 4.0) -> bool:
        """Whether value lies inside estimate +/- n_std_errors * std_error."""
        return abs(value - self.estimate) <= n_std_errors * self.std_error


def _resolve_threads(threads: int | None) -> int:
    cap_text = os.environ.get("MINOR_MOMENTS_THREADS", "").strip()
    requested = 1 if threads is None else int(threads)
    if cap_text:
        requested = min(requested, max(1, int(cap_text)))
    return max(1, requested)


def _chunk_plan(reps: int, chunk_size: int) -> list[tuple[int, int]]:
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    n_chunks = -(-reps // chunk_size)
    return [
        (k, min(chunk_size, reps - k * chunk_size)) for k in range(n_chunks)
    ]


def _reduce_chunks(
    plan: Sequence[tuple[int, int]],
    worker: Callable[[int, int], np.ndarray],
    threads: int,
) -> np.ndarray:
    """Run worker over the plan and sum partials in chunk order."""
    if threads <= 1 or len(plan) <= 1:
        parts = [worker(index, count) for index, count in plan]
    else:
        with ThreadPoolExecutor(max_workers=min(threads, len(plan))) as pool:
            parts = list(pool.map(lambda item: worker(*item), plan))
    total = parts[0].copy()
    for part in parts[1:]:
        total += part
    return total


def _det_stack(sub: np.ndarray) -> np.ndarray:
    """Determinants of a (..., m, m) stack, with direct small-m formulas."""
    m = sub.shape[-1]
    if m == 1:
        return sub[..., 0, 0].copy()
    if m == 2:
        return sub[..., 0, 0] * sub[..., 1, 1] - sub[..., 0, 1] * sub[..., 1, 0]
    if m == 3:
        a, b, c = sub[..., 0, 0], sub[..., 0, 1], sub[..., 0, 2]
        d, e, f = sub[..., 1, 0], sub[..., 1, 1], sub[..., 1, 2]
        g, h, i = sub[..., 2, 0], sub[..., 2, 1], sub[..., 2, 2]
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    return np.linalg.det(sub)


def _minor_columns(draws: np.ndarray, pairs: Sequence[Pair]) -> np.ndarray:
    """Minor determinants per draw: (count, len(pairs)), orderings respected."""
    out = np.empty((draws.shape[0], len(pairs)))
    by_order: dict[int, list[int]] = {}
    for i, (rows, _) in enumerate(pairs):
        by_order.setdefault(len(rows), []).append(i)
    for positions in by_order.values():
        rows = np.array([pairs[i][0].entries for i in positions], dtype=int) - 1
        cols = np.array([pairs[i][1].entries for i in positions], dtype=int) - 1
        sub = draws[:, rows[:, :, None], cols[:, None, :]]
        out[:, positions] = _det_stack(sub)
    return out


def _coerce_spec(spec: WishartSpec) -> WishartSpec:
    if not isinstance(spec, WishartSpec):
        raise TypeError("spec must be a WishartSpec")
    if spec.df < spec.dim:
        raise ValueError(
            f"Monte Carlo needs df >= dim, got df={spec.df}, dim={spec.dim}"
        )
    return spec


def _check_reps(reps: int) -> int:
    reps = int(reps)
    if reps < MIN_REPS:
        raise ValueError(f"reps must be at least {MIN_REPS}, got {reps}")
    return reps


def _pair_of(rows, cols, r: int) -> Pair:
    iR = as_index_seq(rows, r)
    iC = as_index_seq(cols, r)
    if len(iR) != len(iC):
        raise ValueError("rows and cols must have equal length")
    if len(iR) < 1:
        raise ValueError("a minor needs at least one row")
    return (iR, iC)


def _normalize_target(item, r: int) -> tuple[Pair, ...]:
    """item -> one pair (mean target) or two pairs (product-moment target)."""
    if isinstance(item, MinorPair):
        return (_pair_of(item.rows, item.cols, r),)
    seq = tuple(item)
    if len(seq) == 2 and all(isinstance(x, MinorPair) for x in seq):
        return tuple(_pair_of(p.rows, p.cols, r) for p in seq)
    if len(seq) == 2:
        return (_pair_of(seq[0], seq[1], r),)
    if len(seq) == 4:
        return (
            _pair_of(seq[0], seq[1], r),
            _pair_of(seq[2], seq[3], r),
        )
    raise ValueError(
        "a target is a MinorPair, (rows, cols), (MinorPair, MinorPair), "
        "or (rows1, cols1, rows2, cols2)"
    )


def _pair_label(pair: Pair) -> str:
    return f"{pair[0]}|{pair[1]}"


def _mean_and_se(s1: float, s2: float, reps: int) -> tuple[float, float]:
    mean = s1 / reps
    var = max(s2 - s1 * s1 / reps, 0.0) / (reps - 1)
    return mean, math.sqrt(var / reps)


def mc_minor_moments(
    spec: WishartSpec,
    targets: Sequence,
    reps: int,
    rng: RngStream,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int | None = None,
) -> list[OracleEstimate]:
    """Estimate E[det minor] and E[product of two minors] under spec.

    Each target is (rows, cols) for a first moment or
    (rows1, cols1, rows2, cols2) for the expectation of the product of the
    two minors evaluated on the same draw.  Row and column orderings are
    respected, so sign conventions can be checked.
    """
    spec = _coerce_spec(spec)
    reps = _check_reps(reps)
    normalized = [_normalize_target(t, spec.dim) for t in targets]
    if not normalized:
        raise ValueError("at least one target is required")

    pair_index: dict[tuple, int] = {}
    pairs: list[Pair] = []
    target_cols: list[tuple[int, ...]] = []
    for parts in normalized:
        cols = []
        for pair in parts:
            key = (pair[0].entries, pair[1].entries)
            if key not in pair_index:
                pair_index[key] = len(pairs)
                pairs.append(pair)
            cols.append(pair_index[key])
        target_cols.append(tuple(cols))

    def worker(index: int, count: int) -> np.ndarray:
        draws = sample_general_batch(spec, count, rng.child(index))
        values = _minor_columns(draws, pairs)
        stats = np.empty((len(target_cols), 2))
        for t, cols in enumerate(target_cols):
            v = values[:, cols[0]]
            if len(cols) == 2:
                v = v * values[:, cols[1]]
            stats[t, 0] = v.sum()
            stats[t, 1] = (v * v).sum()
        return stats

    totals = _reduce_chunks(
        _chunk_plan(reps, chunk_size), worker, _resolve_threads(threads)
    )

    estimates = []
    for parts, (s1, s2) in zip(normalized, totals):
        mean, se = _mean_and_se(float(s1), float(s2), reps)
        estimates.append(
            OracleEstimate(
                estimate=mean,
                std_error=se,
                reps=reps,
                seed=rng.seed,
                stream=rng.stream,
                kind="mean" if len(parts) == 1 else "product_moment",
                target=";".join(_pair_label(p) for p in parts),
            )
        )
    return estimates


def _moment_sums(values: np.ndarray, powers: int) -> np.ndarray:
    out = np.empty(powers)
    acc = values
    for p in range(powers):
        out[p] = acc.sum()
        if p + 1 < powers:
            acc = acc * values
    return out


def mc_minor_variance(
    spec: WishartSpec,
    rows,
    cols,
    reps: int,
    rng: RngStream,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int | None = None,
) -> OracleEstimate:
    """Estimate Var[det minor]; std_error comes from the delta method."""
    spec = _coerce_spec(spec)
    reps = _check_reps(reps)
    pair = _pair_of(rows, cols, spec.dim)

    def worker(index: int, count: int) -> np.ndarray:
        draws = sample_general_batch(spec, count, rng.child(index))
        return _moment_sums(_minor_columns(draws, [pair])[:, 0], 4)

    s1, s2, s3, s4 = (
        float(x)
        for x in _reduce_chunks(
            _chunk_plan(reps, chunk_size), worker, _resolve_threads(threads)
        )
    )
    mean = s1 / reps
    m2 = max(s2 / reps - mean**2, 0.0)
    m4 = max(
        s4 / reps - 4 * mean * s3 / reps + 6 * mean**2 * s2 / reps - 3 * mean**4,
        0.0,
    )
    variance = max(s2 - s1 * s1 / reps, 0.0) / (reps - 1)
    se = math.sqrt(max(m4 - m2 * m2, 0.0) / reps)
    return OracleEstimate(
        estimate=variance,
        std_error=se,
        reps=reps,
        seed=rng.seed,
        stream=rng.stream,
        kind="variance",
        target=_pair_label(pair),
    )


def mc_minor_covariance(
    spec: WishartSpec,
    rows1,
    cols1,
    rows2,
    cols2,
    reps: int,
    rng: RngStream,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int | None = None,
) -> OracleEstimate:
    """Estimate Cov[det minor1, det minor2]; delta-method std_error."""
    spec = _coerce_spec(spec)
    reps = _check_reps(reps)
    pairs = [_pair_of(rows1, cols1, spec.dim), _pair_of(rows2, cols2, spec.dim)]

    def worker(index: int, count: int) -> np.ndarray:
        draws = sample_general_batch(spec, count, rng.child(index))
        values = _minor_columns(draws, pairs)
        x, y = values[:, 0], values[:, 1]
        xy = x * y
        return np.array(
            [
                x.sum(),
                y.sum(),
                (x * x).sum(),
                (y * y).sum(),
                xy.sum(),
                (x * xy).sum(),
                (y * xy).sum(),
                (xy * xy).sum(),
            ]
        )

    sums = _reduce_chunks(
        _chunk_plan(reps, chunk_size), worker, _resolve_threads(threads)
    )
    sx, sy, sxx, syy, sxy, sxxy, sxyy, sxxyy = (float(v) for v in sums)
    mx, my = sx / reps, sy / reps
    covariance = (sxy - sx * sy / reps) / (reps - 1)
    cov_plug = sxy / reps - mx * my
    mu22 = (
        sxxyy / reps
        - 2 * my * sxxy / reps
        - 2 * mx * sxyy / reps
        + my**2 * sxx / reps
        + mx**2 * syy / reps
        + 4 * mx * my * sxy / reps
        - 3 * mx**2 * my**2
    )
    se = math.sqrt(max(mu22 - cov_plug * cov_plug, 0.0) / reps)
    return OracleEstimate(
        estimate=covariance,
        std_error=se,
        reps=reps,
        seed=rng.seed,
        stream=rng.stream,
        kind="covariance",
        target=";".join(_pair_label(p) for p in pairs),
    )


def mc_noncentral_det(
    mean: np.ndarray,
    reps: int,
    rng: RngStream,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int | None = None,
) -> tuple[OracleEstimate, OracleEstimate]:
    """Estimate E[det(A + Z)] and E[det(A + Z)^2] for iid standard normal Z.

    Returns the (mean, second moment) estimates as a pair.
    """
    arr = np.asarray(mean, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("mean must be a square matrix")
    reps = _check_reps(reps)

    def worker(index: int, count: int) -> np.ndarray:
        draws = sample_gaussian_square_batch(arr, count, rng.child(index))
        return _moment_sums(_det_stack(draws), 4)

    s1, s2, s3, s4 = (
        float(x)
        for x in _reduce_chunks(
            _chunk_plan(reps, chunk_size), worker, _resolve_threads(threads)
        )
    )
    label = f"noncentral:{arr.shape[0]}x{arr.shape[1]}"
    first_est, first_se = _mean_and_se(s1, s2, reps)
    second_est, second_se = _mean_and_se(s2, s4, reps)
    first = OracleEstimate(
        estimate=first_est,
        std_error=first_se,
        reps=reps,
        seed=rng.seed,
        stream=rng.stream,
        kind="mean",
        target=label,
    )
    second = OracleEstimate(
        estimate=second_est,
        std_error=second_se,
        reps=reps,
        seed=rng.seed,
        stream=rng.stream,
        kind="second_moment",
        target=label,
    )
    return first, second
