"""Closed-form moments of minors of standard Wishart matrices (identity scale).

For W ~ Wishart(df, I_r), the minor with rows I and columns J (|I| = |J| = m)
has expectation 0 unless I = J as sets, and the second-order structure depends
on the index sets only through a handful of cardinalities.  All values here are
polynomials in df, computed in exact integer arithmetic and converted to float
at the end.

Sign convention: row and column sequences are honored as ordered; swapping two
entries in any sequence flips the sign of the corresponding minor and hence of
every odd-degree moment in it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import FormulaExtrapolationWarning
from .indexing import IndexSeq, SubsetEnumeration, as_index_seq, canonical_relabeling
from .linalg import CompoundMatrix

MOMENT_KINDS = ("mean", "second_moment", "variance", "covariance", "cross_moment")


@dataclass(frozen=True)
class MomentValue:
    """A moment tagged with what it is; nonnegative when the kind demands it."""

    value: float
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in MOMENT_KINDS:
            raise ValueError(f"unknown moment kind {self.kind!r}")
        if self.kind in ("second_moment", "variance") and self.value < 0.0:
            raise ValueError(f"{self.kind} must be nonnegative, got {self.value}")


@dataclass(frozen=True)
class MinorPair:
    """Row and column index sequences of one minor."""

    rows: IndexSeq
    cols: IndexSeq

    def __post_init__(self) -> None:
        rows = as_index_seq(self.rows)
        cols = as_index_seq(self.cols)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        if len(rows) != len(cols):
            raise ValueError("rows and cols must have equal length")
        if len(rows) < 1:
            raise ValueError("a minor needs at least one row")

    @property
    def order(self) -> int:
        return len(self.rows)


def _falling_int(n: int, m: int) -> int:
    """n (n-1) ... (n-m+1) as an exact integer."""
    if int(n) != n or int(m) != m:
        raise ValueError("falling product expects integers")
    n, m = int(n), int(m)
    if m < 0 or m > n:
        raise ValueError(f"need 0 <= m <= n, got n={n}, m={m}")
    return math.prod(range(n, n - m, -1))


def falling_product(n: int, m: int) -> float:
    """The falling product n (n-1) ... (n-m+1), exact then converted to float."""
    return float(_falling_int(n, m))


def _warn_extrapolated(df: int, ambient: int) -> None:
    if 0 < df < ambient:
        warnings.warn(
            f"df={df} below ambient dimension {ambient}: value is "
            "formula-extrapolated (no Wishart sampling model exists)",
            FormulaExtrapolationWarning,
            stacklevel=3,
        )


def e_minor_std(
    df: int,
    rows: IndexSeq | Sequence[int],
    cols: IndexSeq | Sequence[int],
) -> float:
    """E[minor(W, rows, cols)] for W ~ Wishart(df, I).

    Zero unless rows and cols coincide as sets; otherwise the falling product
    of df of length m, signed by the relative ordering of rows and cols.
    """
    iR, iC = as_index_seq(rows), as_index_seq(cols)
    if len(iR) != len(iC):
        raise ValueError("rows and cols must have equal length")
    m = len(iR)
    _warn_extrapolated(df, max(iR.r, iC.r))
    if iR.as_set != iC.as_set:
        _falling_int(df, m)
        return 0.0
    return float(iR.sort_parity() * iC.sort_parity() * _falling_int(df, m))


def second_moment_std(df: int, m: int, c: int) -> float:
    """E[minor^2] for an m x m minor whose row and column sets share c indices."""
    if not 0 <= c <= m:
        raise ValueError(f"need 0 <= c <= m, got c={c}, m={m}")
    return float(_falling_int(df, m) * _falling_int(df + 2, c) * math.factorial(m - c))


def var_minor_std(df: int, m: int, c: int) -> float:
    """Var[minor] for an m x m minor with c shared row/column indices.

    For c = m (a principal minor) the squared mean is subtracted; otherwise the
    mean is zero and the variance equals the second moment.
    """
    if not 0 <= c <= m:
        raise ValueError(f"need 0 <= c <= m, got c={c}, m={m}")
    if c == m:
        fm = _falling_int(df, m)
        return float(fm * (_falling_int(df + 2, m) - fm))
    return second_moment_std(df, m, c)


def cross_moment_std(
    df: int,
    rows1: IndexSeq | Sequence[int],
    cols1: IndexSeq | Sequence[int],
    rows2: IndexSeq | Sequence[int],
    cols2: IndexSeq | Sequence[int],
) -> float:
    """E[minor(W, rows1, cols1) * minor(W, rows2, cols2)] for W ~ Wishart(df, I).

    Zero when the symmetric differences of the two index pairs differ.
    Otherwise, writing c4 for the size of the four-way intersection, d for
    |rows1 cap cols1 minus the second pair's intersection|, and p, q for the
    overlaps of the stripped row set with the second pair's stripped row and
    column sets, the magnitude is

        falling(df, m) * falling(df+2, c4) * (df-m+1)...(df-m+d) * p! * q!

    and the sign comes from the canonical relabeling of the four sequences.
    """
    I = as_index_seq(rows1)
    J = as_index_seq(cols1)
    K = as_index_seq(rows2)
    L = as_index_seq(cols2)
    if not (len(I) == len(J) == len(K) == len(L)):
        raise ValueError("all four index sequences must have the same length")
    m = len(I)
    _warn_extrapolated(df, max(I.r, J.r, K.r, L.r))
    _falling_int(df, m)
    si, sj, sk, sl = I.as_set, J.as_set, K.as_set, L.as_set
    if si ^ sj != sk ^ sl:
        return 0.0
    rel = canonical_relabeling(I, J, K, L)
    ij, kl = si & sj, sk & sl
    ibar, kbar, lbar = si - ij, sk - kl, sl - kl
    c4 = len(ij & kl)
    d = len(ij - kl)
    p = len(ibar & kbar)
    q = len(ibar & lbar)
    magnitude = (
        _falling_int(df, m)
        * _falling_int(df + 2, c4)
        * math.prod(range(df - m + 1, df - m + d + 1))
        * math.factorial(p)
        * math.factorial(q)
    )
    return float(rel.sign * magnitude)


def e_compound_std(df: int, r: int, m: int) -> CompoundMatrix:
    """E[compound(W, m)] = falling(df, m) * identity, for W ~ Wishart(df, I_r)."""
    _warn_extrapolated(df, r)
    size = math.comb(r, m)
    values = falling_product(df, m) * np.eye(size)
    return CompoundMatrix(r, m, values)


class CompoundCovariance:
    """Covariance structure of all m x m minors of W ~ Wishart(df, I_r).

    Entries are Cov[minor(W, I, J), minor(W, K, L)], nonzero only when the
    symmetric differences I sym J and K sym L agree.  Nothing is materialized
    at construction; entries come from the closed form, and the dense views
    (pair_table, kron) are assembled on demand and intended for r up to ~7.
    """

    def __init__(self, df: int, r: int, m: int) -> None:
        if not 1 <= m <= r:
            raise ValueError(f"need 1 <= m <= r, got m={m}, r={r}")
        _falling_int(df, m)
        self.df = df
        self.source_dim = r
        self.order = m
        self.enumeration = SubsetEnumeration(r, m)
        _warn_extrapolated(df, r)

    def entry(
        self,
        rows1: IndexSeq | Sequence[int],
        cols1: IndexSeq | Sequence[int],
        rows2: IndexSeq | Sequence[int],
        cols2: IndexSeq | Sequence[int],
    ) -> float:
        """Cov of two minors, honoring the given orderings."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FormulaExtrapolationWarning)
            cross = cross_moment_std(self.df, rows1, cols1, rows2, cols2)
            e1 = e_minor_std(self.df, rows1, cols1)
            e2 = e_minor_std(self.df, rows2, cols2)
        return cross - e1 * e2

    def pair_labels(self) -> list[str]:
        """Labels "I|J" in lexicographic pair order, matching pair_table."""
        subs = self.enumeration.subsets
        return [
            ",".join(map(str, a)) + "|" + ",".join(map(str, b))
            for a in subs
            for b in subs
        ]

    def pair_index(self, rows: Sequence[int], cols: Sequence[int]) -> int:
        enum = self.enumeration
        return enum.rank(tuple(rows)) * len(enum) + enum.rank(tuple(cols))

    def _matched_groups(self) -> Iterator[list[tuple[int, int]]]:
        subs = self.enumeration.subsets
        groups: dict[frozenset[int], list[tuple[int, int]]] = {}
        for a_rank, a in enumerate(subs):
            for b_rank, b in enumerate(subs):
                groups.setdefault(frozenset(a) ^ frozenset(b), []).append((a_rank, b_rank))
        yield from groups.values()

    def pair_table(self) -> np.ndarray:
        """Dense covariance table; row index = rank(I) * size + rank(J)."""
        subs = self.enumeration.subsets
        n = len(subs)
        table = np.zeros((n * n, n * n))
        for group in self._matched_groups():
            for ar, br in group:
                row = ar * n + br
                for cr, dr in group:
                    table[row, cr * n + dr] = self.entry(
                        subs[ar], subs[br], subs[cr], subs[dr]
                    )
        return table

    def kron(self) -> np.ndarray:
        """The same covariance in Kronecker layout: entry [(I,K), (J,L)].

        This is the layout in which Cov[compound(S)] for a general scale is the
        two-sided product with compound(scale^{1/2}) kron itself.
        """
        n = len(self.enumeration)
        table = self.pair_table()
        return (
            table.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
        )


def cov_compound_std(df: int, r: int, m: int) -> CompoundCovariance:
    """Covariance of the m-th compound of W ~ Wishart(df, I_r)."""
    return CompoundCovariance(df, r, m)
