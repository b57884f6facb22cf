"""Conditional independence as vanishing minors, and covariance models with them.

For jointly Gaussian coordinates, X_I independent of X_J given X_K is
equivalent to the vanishing of every minor of the covariance matrix with rows
from I union K, columns from J union K, and size |K| + 1.  This module turns
CI statements into those minor constraints, provides the cardinality predicate
for when a single off-diagonal minor constraint is implied by a CI statement,
and samples covariance matrices from a hidden-factor family whose top-right
m x m corner minor vanishes identically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .indexing import IndexSeq, as_index_seq
from .linalg import SymPDMatrix
from .sampling import RngStream


@dataclass(frozen=True)
class CIStatement:
    """X_rows independent of X_cols given X_given; the three sets are disjoint."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    given: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        rows = tuple(sorted(as_index_seq(self.rows).as_set))
        cols = tuple(sorted(as_index_seq(self.cols).as_set))
        given = tuple(sorted(as_index_seq(self.given).as_set))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "given", given)
        if not rows or not cols:
            raise ValueError("rows and cols must be nonempty")
        sets = (set(rows), set(cols), set(given))
        if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
            raise ValueError("rows, cols, and given must be pairwise disjoint")


def ci_to_minors(
    stmt: CIStatement, r: int
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All (rows, cols) minor constraints equivalent to the CI statement.

    Every subset G of rows union given and H of cols union given with
    |G| = |H| = |given| + 1 yields the constraint det(Sigma_{G x H}) = 0.
    Returned in lexicographic order of (G, H).
    """
    for e in (*stmt.rows, *stmt.cols, *stmt.given):
        if not 1 <= e <= r:
            raise ValueError(f"index {e} outside 1..{r}")
    k = len(stmt.given)
    row_pool = sorted(set(stmt.rows) | set(stmt.given))
    col_pool = sorted(set(stmt.cols) | set(stmt.given))
    out = [
        (g, h)
        for g in itertools.combinations(row_pool, k + 1)
        for h in itertools.combinations(col_pool, k + 1)
    ]
    out.sort()
    return out


def offdiag_minor_implied(
    rows_main: Sequence[int],
    rows_rest: Sequence[int],
    cols_main: Sequence[int],
    cols_rest: Sequence[int],
    given: Sequence[int],
    given_indep: Sequence[int],
    r: int,
) -> bool:
    """Cardinality predicate for when stated CIs force an off-diagonal minor to 0.

    The minor has rows I = rows_main + rows_rest and columns
    J = cols_main + cols_rest (each a disjoint partition, main parts nonempty,
    I and J disjoint).  given (= K) and given_indep (= K1 subset of K) live
    outside I and J.  Assuming X_{rows_main} independent of X_{cols_main} given
    X_{K + rows_rest + cols_rest}, and X_I independent of X_{K1}, the minor
    vanishes whenever

        |K| + |rows_rest| + |cols_rest| <= |K1| + m - 1.

    This is arithmetic only; it does not verify that the CIs hold.
    """
    i1 = as_index_seq(rows_main).as_set
    i2 = as_index_seq(rows_rest).as_set
    j1 = as_index_seq(cols_main).as_set
    j2 = as_index_seq(cols_rest).as_set
    kk = as_index_seq(given).as_set
    k1 = as_index_seq(given_indep).as_set
    if not i1 or not j1:
        raise ValueError("the main row and column parts must be nonempty")
    if i1 & i2 or j1 & j2:
        raise ValueError("partition parts must be disjoint")
    rows_all, cols_all = i1 | i2, j1 | j2
    m = len(rows_all)
    if len(cols_all) != m:
        raise ValueError("row and column sets must have equal size")
    if rows_all & cols_all:
        raise ValueError("the minor must be off-diagonal (disjoint rows and cols)")
    if not k1 <= kk:
        raise ValueError("given_indep must be a subset of given")
    if kk & (rows_all | cols_all):
        raise ValueError("the conditioning set must avoid the minor's rows and cols")
    for e in i1 | i2 | j1 | j2 | kk:
        if not 1 <= e <= r:
            raise ValueError(f"index {e} outside 1..{r}")
    return len(kk) + len(i2) + len(j2) <= len(k1) + m - 1


@dataclass(frozen=True)
class HiddenFactorCov:
    """A 2m x 2m covariance from m - 1 shared factors plus block-diagonal noise.

    sigma = omega + loadings loadings', with loadings 2m x (m-1) and omega
    positive definite block diagonal over {1..m} and {m+1..2m}.  The corner
    block sigma[{1..m} x {m+1..2m}] then has rank at most m - 1, so its minor
    vanishes.
    """

    m: int
    loadings: np.ndarray
    omega: np.ndarray
    sigma: SymPDMatrix

    @property
    def vanishing_rows(self) -> tuple[int, ...]:
        return tuple(range(1, self.m + 1))

    @property
    def vanishing_cols(self) -> tuple[int, ...]:
        return tuple(range(self.m + 1, 2 * self.m + 1))


def sample_cm_cov(
    m: int,
    rng: RngStream,
    lambda_spread: float = 1.0,
    omega_spread: float = 1.0,
) -> HiddenFactorCov:
    """Draw one hidden-factor covariance with a vanishing top-right m x m minor.

    Loadings are iid N(0, lambda_spread^2); each m x m noise block is
    I + G G' / m with G iid N(0, omega_spread^2).  Draw order: loadings
    row-major, then the first block's G, then the second's.
    """
    if m < 2:
        raise ValueError("m must be at least 2 (the family needs m - 1 >= 1 factors)")
    if lambda_spread < 0 or omega_spread < 0:
        raise ValueError("spreads must be nonnegative")
    gen = rng.generator
    loadings = lambda_spread * gen.standard_normal((2 * m, m - 1))
    omega = np.zeros((2 * m, 2 * m))
    for b in range(2):
        g = omega_spread * gen.standard_normal((m, m))
        block = np.eye(m) + (g @ g.T) / m
        omega[b * m : (b + 1) * m, b * m : (b + 1) * m] = block
    sigma = omega + loadings @ loadings.T
    return HiddenFactorCov(m, loadings, omega, SymPDMatrix.from_array(sigma))
