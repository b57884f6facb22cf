"""Seeded Wishart sampling via the triangular (Bartlett) factorization.

Reproducibility contract: a stream is identified by (seed, stream), both
64-bit integers, and feeds a PCG64 generator built from
SeedSequence([seed, stream]).  Diagonal factor entries are sqrt of chi-square
draws taken as 2 * standard_gamma(df/2) (Marsaglia-Tsang rejection inside
numpy); off-diagonals are ziggurat standard normals.  The single-draw fill
order is row-major over the lower triangle, (1,1), (2,1), (2,2), (3,1), ...
Child streams for chunked evaluation are derived by a splitmix64-style mix of
the parent stream id and the chunk index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotPositiveDefiniteError
from .linalg import SymPDMatrix, ensure_spd, sym_sqrt

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def derive_stream(stream: int, index: int) -> int:
    """Deterministic 64-bit child stream id for chunk `index` of `stream`."""
    if index < 0:
        raise ValueError("chunk index must be nonnegative")
    return _splitmix64(((stream & _MASK64) ^ _splitmix64(index)) & _MASK64)


class RngStream:
    """Single-owner random stream identified by (seed, stream).

    The identity is immutable; the generator state advances as draws are taken.
    Two streams constructed with the same identity produce identical sequences.
    """

    def __init__(self, seed: int, stream: int = 0) -> None:
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self._gen: np.random.Generator | None = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence([self.seed, self.stream])
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, derive_stream(self.stream, index))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream={self.stream})"


@dataclass(frozen=True)
class WishartSpec:
    """Degrees of freedom and scale matrix of a Wishart distribution."""

    df: int
    scale: SymPDMatrix

    def __post_init__(self) -> None:
        if int(self.df) != self.df or self.df < 1:
            raise ValueError(f"degrees of freedom must be a positive integer, got {self.df}")
        object.__setattr__(self, "df", int(self.df))
        object.__setattr__(self, "scale", ensure_spd(self.scale))

    @property
    def dim(self) -> int:
        return self.scale.dim

    @classmethod
    def standard(cls, df: int, dim: int) -> "WishartSpec":
        return cls(df, SymPDMatrix.from_array(np.eye(dim)))


@dataclass(frozen=True)
class CholeskiFactor:
    """Lower-triangular factor with strictly positive diagonal."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("factor must be square")
        if np.any(np.triu(arr, 1) != 0.0):
            raise ValueError("factor must be lower triangular")
        if np.any(np.diag(arr) <= 0.0):
            raise ValueError("factor diagonal must be strictly positive")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def outer(self) -> np.ndarray:
        w = self.values @ self.values.T
        return (w + w.T) / 2.0


def _require_df(df: int, dim: int) -> None:
    if df < dim:
        raise ValueError(
            f"sampling requires df >= dimension; got df={df}, dimension={dim}"
        )


def sample_bartlett(df: int, dim: int, rng: RngStream) -> CholeskiFactor:
    """One triangular factor T with T T' ~ Wishart(df, identity).

    t_ii = sqrt(chi-square with df - i + 1 degrees of freedom), t_ij ~ N(0,1)
    below the diagonal, filled row-major over the lower triangle.
    """
    _require_df(df, dim)
    gen = rng.generator
    t = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(i + 1):
            if i == j:
                chi2 = 2.0 * gen.standard_gamma((df - i) / 2.0)
                t[i, i] = np.sqrt(chi2)
            else:
                t[i, j] = gen.standard_normal()
    return CholeskiFactor(t)


def sample_standard(df: int, dim: int, rng: RngStream) -> SymPDMatrix:
    """One draw from Wishart(df, identity_dim)."""
    factor = sample_bartlett(df, dim, rng)
    try:
        return SymPDMatrix.from_array(factor.outer())
    except NotPositiveDefiniteError as exc:  # pragma: no cover - probability zero
        raise NotPositiveDefiniteError(f"degenerate Wishart draw: {exc}") from exc


def sample_general(spec: WishartSpec, rng: RngStream) -> SymPDMatrix:
    """One draw from Wishart(df, scale), as scale^{1/2} W scale^{1/2}.

    With the identity scale this returns exactly the standard draw for the
    same stream state.
    """
    w = sample_standard(spec.df, spec.dim, rng)
    if np.array_equal(spec.scale.values, np.eye(spec.dim)):
        return w
    root = sym_sqrt(spec.scale).values
    s = root @ w.values @ root
    return SymPDMatrix.from_array((s + s.T) / 2.0)


def sample_gaussian_square(mean: np.ndarray, rng: RngStream) -> np.ndarray:
    """mean + Z with Z a square matrix of iid standard normals (row-major fill)."""
    arr = np.asarray(mean, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("mean must be a square matrix")
    z = rng.generator.standard_normal(arr.shape)
    return arr + z


def sample_gaussian_square_batch(mean: np.ndarray, count: int, rng: RngStream) -> np.ndarray:
    """count draws of mean + Z, shape (count, dim, dim), one C-order normal block."""
    arr = np.asarray(mean, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("mean must be a square matrix")
    if count < 1:
        raise ValueError("count must be positive")
    z = rng.generator.standard_normal((count,) + arr.shape)
    return arr + z


def sample_bartlett_batch(df: int, dim: int, count: int, rng: RngStream) -> np.ndarray:
    """count triangular factors, shape (count, dim, dim), batched draw order.

    Variate order (the documented chunk plan for the Monte Carlo oracle):
    all count diagonal chi-squares for i = 1, then i = 2, ..., then the
    off-diagonal normals one lower-triangle position at a time, row-major.
    Distribution matches sample_bartlett; the stream order differs and is
    fixed here.
    """
    _require_df(df, dim)
    if count < 1:
        raise ValueError("count must be positive")
    gen = rng.generator
    t = np.zeros((count, dim, dim))
    for i in range(dim):
        chi2 = 2.0 * gen.standard_gamma((df - i) / 2.0, size=count)
        t[:, i, i] = np.sqrt(chi2)
    for i in range(dim):
        for j in range(i):
            t[:, i, j] = gen.standard_normal(count)
    return t


def sample_standard_batch(df: int, dim: int, count: int, rng: RngStream) -> np.ndarray:
    """count standard Wishart draws, shape (count, dim, dim)."""
    t = sample_bartlett_batch(df, dim, count, rng)
    w = t @ np.transpose(t, (0, 2, 1))
    return (w + np.transpose(w, (0, 2, 1))) / 2.0


def sample_general_batch(spec: WishartSpec, count: int, rng: RngStream) -> np.ndarray:
    """count draws from Wishart(df, scale), shape (count, dim, dim)."""
    w = sample_standard_batch(spec.df, spec.dim, count, rng)
    if np.array_equal(spec.scale.values, np.eye(spec.dim)):
        return w
    root = sym_sqrt(spec.scale).values
    return root @ w @ root
