"""Moments of minors of Wishart matrices with an arbitrary positive definite scale.

First moments carry over from the identity-scale case through the compound of
the scale matrix.  Second moments of a single minor decompose by conditioning:
the variance of minor(S, I, J) splits into a part proportional to the squared
population minor (which vanishes under a det = 0 null) and a nonnegative
remainder.  Overlapping I and J reduce to the disjoint case through the Schur
complement of the shared block, using the independence of a principal minor
and its complementary conditional minor.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import FormulaExtrapolationWarning
from .indexing import IndexSeq, SubsetEnumeration, as_index_seq
from .linalg import (
    CompoundMatrix,
    SymPDMatrix,
    as_matrix,
    compound,
    ensure_spd,
    minor_det,
    partitioned_inverse_block,
    schur_complement,
    sym_sqrt,
    trace_compound,
)
from .standard_moments import (
    _falling_int,
    _warn_extrapolated,
    cov_compound_std,
    falling_product,
)


@dataclass(frozen=True)
class VarianceBreakdown:
    """Variance of one minor split into the null-droppable part and the rest.

    conditional_mean_part is the term proportional to the squared population
    minor (it is the variance of the conditional mean in the disjoint case);
    conditional_var_part is the remainder and is nonnegative.  total is their
    sum.  formula names the route that produced the numbers.
    """

    total: float
    conditional_mean_part: float
    conditional_var_part: float
    formula: str = "disjoint"

    def __post_init__(self) -> None:
        scale = max(abs(self.total), abs(self.conditional_mean_part), 1.0)
        if self.conditional_var_part < -1e-9 * scale:
            raise ValueError(
                f"conditional variance part is negative: {self.conditional_var_part}"
            )
        if abs(self.conditional_mean_part + self.conditional_var_part - self.total) > 1e-9 * scale:
            raise ValueError("parts do not sum to the total")


class DetMoments(NamedTuple):
    """Moments of det(A + Z) for a square Gaussian perturbation Z."""

    mean: float
    second_moment: float
    variance: float


def e_compound_general(df: int, sigma: "SymPDMatrix | np.ndarray", m: int) -> CompoundMatrix:
    """E[compound(S, m)] = falling(df, m) * compound(scale, m)."""
    spd = ensure_spd(sigma)
    _warn_extrapolated(df, spd.dim)
    base = compound(spd.values, m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FormulaExtrapolationWarning)
        scale = falling_product(df, m)
    return CompoundMatrix(base.source_dim, base.order, scale * base.values)


def e_minor_general(
    df: int,
    sigma: "SymPDMatrix | np.ndarray",
    rows: IndexSeq | Sequence[int],
    cols: IndexSeq | Sequence[int],
) -> float:
    """E[minor(S, rows, cols)] = falling(df, m) * minor(scale, rows, cols)."""
    spd = ensure_spd(sigma)
    iR = as_index_seq(rows, spd.dim)
    iC = as_index_seq(cols, spd.dim)
    if len(iR) != len(iC):
        raise ValueError("rows and cols must have equal length")
    _warn_extrapolated(df, spd.dim)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FormulaExtrapolationWarning)
        fall = falling_product(df, len(iR))
    return fall * minor_det(spd.values, iR, iC)


@functools.lru_cache(maxsize=64)
def _std_cov_kron(df: int, r: int, m: int) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FormulaExtrapolationWarning)
        out = cov_compound_std(df, r, m).kron()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CovarianceTable:
    """Dense covariance of all m x m minors, in pair layout.

    table[rank(I) * size + rank(J), rank(K) * size + rank(L)] is
    Cov[minor(S, I, J), minor(S, K, L)] with ascending index sets.
    """

    source_dim: int
    order: int
    table: np.ndarray

    @property
    def enumeration(self) -> SubsetEnumeration:
        return SubsetEnumeration(self.source_dim, self.order)

    def pair_labels(self) -> list[str]:
        subs = self.enumeration.subsets
        return [
            ",".join(map(str, a)) + "|" + ",".join(map(str, b))
            for a in subs
            for b in subs
        ]

    def pair_index(self, rows: Sequence[int], cols: Sequence[int]) -> int:
        enum = self.enumeration
        return enum.rank(tuple(rows)) * len(enum) + enum.rank(tuple(cols))

    def entry(
        self,
        rows1: IndexSeq | Sequence[int],
        cols1: IndexSeq | Sequence[int],
        rows2: IndexSeq | Sequence[int],
        cols2: IndexSeq | Sequence[int],
    ) -> float:
        seqs = [as_index_seq(s) for s in (rows1, cols1, rows2, cols2)]
        sign = math.prod(s.sort_parity() for s in seqs)
        i, j, k, l = (tuple(sorted(s.entries)) for s in seqs)
        return sign * float(self.table[self.pair_index(i, j), self.pair_index(k, l)])

    def kron(self) -> np.ndarray:
        n = len(self.enumeration)
        return (
            self.table.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
        )


def cov_compound_general(
    df: int, sigma: "SymPDMatrix | np.ndarray", m: int
) -> CovarianceTable:
    """Covariance of the m-th compound of S ~ Wishart(df, scale).

    Computed as the two-sided product of the identity-scale covariance (in
    Kronecker layout) with compound(scale^{1/2}, m) kron itself.
    """
    spd = ensure_spd(sigma)
    r = spd.dim
    _warn_extrapolated(df, r)
    q = compound(sym_sqrt(spd).values, m).values
    qq = np.kron(q, q)
    kron_general = qq @ _std_cov_kron(df, r, m) @ qq
    n = q.shape[0]
    table = kron_general.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
    return CovarianceTable(r, m, table)


def cross_moment_general(
    df: int,
    sigma: "SymPDMatrix | np.ndarray",
    rows1: IndexSeq | Sequence[int],
    cols1: IndexSeq | Sequence[int],
    rows2: IndexSeq | Sequence[int],
    cols2: IndexSeq | Sequence[int],
) -> float:
    """E[minor(S, rows1, cols1) * minor(S, rows2, cols2)] for a general scale."""
    spd = ensure_spd(sigma)
    r = spd.dim
    seqs = [as_index_seq(s, r) for s in (rows1, cols1, rows2, cols2)]
    m = len(seqs[0])
    if any(len(s) != m for s in seqs):
        raise ValueError("all four index sequences must have the same length")
    _warn_extrapolated(df, r)
    sign = math.prod(s.sort_parity() for s in seqs)
    q = compound(sym_sqrt(spd).values, m).values
    n = q.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FormulaExtrapolationWarning)
        fall = falling_product(df, m)
    cross_kron = _std_cov_kron(df, r, m) + fall * fall * np.eye(n * n)
    enum = SubsetEnumeration(r, m)
    ri, rj, rk, rl = (enum.rank(tuple(sorted(s.entries))) for s in seqs)
    left = np.kron(q[ri], q[rk])
    right = np.kron(q[rj], q[rl])
    return sign * float(left @ cross_kron @ right)


def var_principal_minor(
    df: int, sigma: "SymPDMatrix | np.ndarray", rows: IndexSeq | Sequence[int]
) -> float:
    """Var[minor(S, rows, rows)] = fall(df,m) [fall(df+2,m) - fall(df,m)] det(scale_II)^2."""
    spd = ensure_spd(sigma)
    iR = as_index_seq(rows, spd.dim)
    m = len(iR)
    _warn_extrapolated(df, spd.dim)
    det_ii = minor_det(spd.values, iR, iR)
    fm = _falling_int(df, m)
    return float(fm * (_falling_int(df + 2, m) - fm)) * det_ii * det_ii


def var_offdiag_minor(
    df: int,
    sigma: "SymPDMatrix | np.ndarray",
    rows: IndexSeq | Sequence[int],
    cols: IndexSeq | Sequence[int],
) -> VarianceBreakdown:
    """Variance of a minor with disjoint row and column sets, decomposed.

    The first part is fall(df,m) [fall(df+2,m) - fall(df,m)] det(scale_IJ)^2,
    the variance of the conditional mean given the column block; the second is
    the expected conditional variance

        fall(df,m) det(scale_{IJ x IJ}) *
            sum_{k=0}^{m-1} (m-k)! fall(df+2,k) (-1)^k tr(compound_k(B))

    with B = scale_JI times the (I,J) block of the inverse of the IJ principal
    submatrix.
    """
    spd = ensure_spd(sigma)
    iR = as_index_seq(rows, spd.dim)
    iC = as_index_seq(cols, spd.dim)
    if len(iR) != len(iC):
        raise ValueError("rows and cols must have equal length")
    if iR.as_set & iC.as_set:
        raise ValueError("rows and cols must be disjoint; use var_minor_general")
    m = len(iR)
    _warn_extrapolated(df, spd.dim)
    fm = _falling_int(df, m)
    det_ij = minor_det(spd.values, iR, iC)
    mean_part = float(fm * (_falling_int(df + 2, m) - fm)) * det_ij * det_ij

    both = tuple(iR.entries) + tuple(iC.entries)
    det_block = minor_det(spd.values, both, both)
    inv_block = partitioned_inverse_block(spd, iR, iC)
    b = spd.values[np.ix_([e - 1 for e in iC.entries], [e - 1 for e in iR.entries])] @ inv_block
    acc = 0.0
    for k in range(m):
        acc += (
            math.factorial(m - k)
            * float(_falling_int(df + 2, k))
            * ((-1) ** k)
            * trace_compound(b, k)
        )
    var_part = float(fm) * det_block * acc
    if var_part < 0.0:  # roundoff guard; the exact value is nonnegative
        var_part = max(var_part, -1e-12 * max(abs(mean_part), 1.0))
        var_part = max(var_part, 0.0)
    return VarianceBreakdown(mean_part + var_part, mean_part, var_part, "disjoint")


def var_minor_general(
    df: int,
    sigma: "SymPDMatrix | np.ndarray",
    rows: IndexSeq | Sequence[int],
    cols: IndexSeq | Sequence[int],
) -> float:
    """Var[minor(S, rows, cols)] for any row/column sets of equal size.

    Overlapping sets reduce to the disjoint case: with C the shared indices,
    minor(S, I, J) factors into the C-principal minor times the corresponding
    minor of the Schur-complement Wishart, and the factors are independent.
    """
    spd = ensure_spd(sigma)
    iR = as_index_seq(rows, spd.dim)
    iC = as_index_seq(cols, spd.dim)
    if len(iR) != len(iC):
        raise ValueError("rows and cols must have equal length")
    m = len(iR)
    core = sorted(iR.as_set & iC.as_set)
    c = len(core)
    if c == 0:
        return var_offdiag_minor(df, spd, iR, iC).total
    if c == m:
        return var_principal_minor(df, spd, iR)

    _warn_extrapolated(df, spd.dim)
    reduced = schur_complement(spd, core)
    keep = [i for i in range(1, spd.dim + 1) if i not in set(core)]
    new_label = {old: pos + 1 for pos, old in enumerate(keep)}
    rb = tuple(new_label[e] for e in sorted(iR.as_set - set(core)))
    cb = tuple(new_label[e] for e in sorted(iC.as_set - set(core)))

    det_cc = minor_det(spd.values, core, core)
    x_second = float(_falling_int(df, c) * _falling_int(df + 2, c)) * det_cc * det_cc
    x_mean_sq = float(_falling_int(df, c)) ** 2 * det_cc * det_cc

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FormulaExtrapolationWarning)
        inner = var_offdiag_minor(df - c, reduced, rb, cb)
        y_mean = falling_product(df - c, m - c) * minor_det(reduced.values, rb, cb)
    y_second = inner.total + y_mean * y_mean
    return x_second * y_second - x_mean_sq * y_mean * y_mean


def variance_breakdown(
    df: int,
    sigma: "SymPDMatrix | np.ndarray",
    rows: IndexSeq | Sequence[int],
    cols: IndexSeq | Sequence[int],
) -> VarianceBreakdown:
    """Variance of a minor with the null-droppable part split out.

    The droppable part is always fall(df,m) [fall(df+2,m) - fall(df,m)] times
    the squared population minor; it equals the total for principal minors and
    the conditional-mean variance for disjoint ones.
    """
    spd = ensure_spd(sigma)
    iR = as_index_seq(rows, spd.dim)
    iC = as_index_seq(cols, spd.dim)
    shared = len(iR.as_set & iC.as_set)
    m = len(iR)
    if shared == 0:
        return var_offdiag_minor(df, spd, iR, iC)
    if shared == m:
        total = var_principal_minor(df, spd, iR)
        return VarianceBreakdown(total, total, 0.0, "principal")
    total = var_minor_general(df, spd, iR, iC)
    fm = _falling_int(df, m)
    det_ij = minor_det(spd.values, iR, iC)
    mean_part = float(fm * (_falling_int(df + 2, m) - fm)) * det_ij * det_ij
    return VarianceBreakdown(total, mean_part, total - mean_part, "partial-overlap")


def tetrad_variance(
    df: int,
    sigma: "SymPDMatrix | np.ndarray",
    rows: IndexSeq | Sequence[int],
    cols: IndexSeq | Sequence[int],
) -> float:
    """Variance of a 2 x 2 minor with disjoint rows and columns, in closed form:

    df (df-1) [ (df+2) det(scale_II) det(scale_JJ)
                - df det(scale_{IJ x IJ}) + 3 df det(scale_IJ)^2 ].
    """
    spd = ensure_spd(sigma)
    iR = as_index_seq(rows, spd.dim)
    iC = as_index_seq(cols, spd.dim)
    if len(iR) != 2 or len(iC) != 2:
        raise ValueError("tetrad variance is defined for 2 x 2 minors")
    if iR.as_set & iC.as_set:
        raise ValueError("rows and cols must be disjoint")
    _warn_extrapolated(df, spd.dim)
    _falling_int(df, 2)
    det_ii = minor_det(spd.values, iR, iR)
    det_jj = minor_det(spd.values, iC, iC)
    det_ij = minor_det(spd.values, iR, iC)
    both = tuple(iR.entries) + tuple(iC.entries)
    det_block = minor_det(spd.values, both, both)
    n = float(df)
    return n * (n - 1.0) * (
        (n + 2.0) * det_ii * det_jj - n * det_block + 3.0 * n * det_ij * det_ij
    )


def noncentral_det_moments(mean: np.ndarray) -> DetMoments:
    """Moments of det(A + Z), Z a square matrix of iid standard normals.

    E[det] = det(A); E[det^2] = sum_{k=0}^m (m-k)! tr(compound_k(A A')); the
    variance drops the k = m term.
    """
    arr = as_matrix(np.asarray(mean, float), "mean")
    if arr.shape[0] != arr.shape[1]:
        raise ValueError("mean must be square")
    m = arr.shape[0]
    gram = arr @ arr.T
    mean_det = float(np.linalg.det(arr)) if m else 1.0
    variance = 0.0
    for k in range(m):
        variance += math.factorial(m - k) * trace_compound(gram, k)
    second = variance + mean_det * mean_det
    return DetMoments(mean_det, second, variance)
