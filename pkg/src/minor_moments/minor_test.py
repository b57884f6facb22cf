"""Standardized-minor goodness-of-fit test.

Given a sample covariance (or correlation) built from N observations, the test
statistic for the null "the population minor with rows I and columns J is 0"
is the sample minor rescaled to Wishart scale and divided by its plug-in
standard deviation:

    z = df^m * det(S_IJ) / sqrt(Var-hat[det(W_IJ)]),

where the variance plugs the sample matrix into the closed-form variance of a
Wishart minor, dropping the term proportional to the squared population minor
(which is 0 under the null).  z is compared to the standard normal, two sided.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .errors import NumericalError
from .general_moments import variance_breakdown
from .indexing import IndexSeq, as_index_seq
from .linalg import SymPDMatrix, ensure_spd, minor_det

CORRELATION_DIAG_TOL = 1e-9


@dataclass(frozen=True)
class SampleInput:
    """A sample covariance or correlation matrix with its sample size.

    df defaults to sample_size - 1 (covariance about the estimated mean).
    """

    matrix: SymPDMatrix
    sample_size: int
    df: int | None = None
    is_correlation: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", ensure_spd(self.matrix))
        if self.sample_size < 2:
            raise ValueError("sample_size must be at least 2")
        df = self.sample_size - 1 if self.df is None else int(self.df)
        if df < 1:
            raise ValueError(f"df must be at least 1, got {df}")
        object.__setattr__(self, "df", df)
        if self.is_correlation:
            diag = self.matrix.values.diagonal()
            if max(abs(d - 1.0) for d in diag) > CORRELATION_DIAG_TOL:
                raise ValueError("correlation matrix must have unit diagonal")


@dataclass(frozen=True)
class TestReport:
    """One standardized-minor test result."""

    rows: IndexSeq
    cols: IndexSeq
    minor_value: float
    variance_estimate: float
    z: float
    p_two_sided: float
    df: int
    drop_null_term: bool
    formula: str
    error: str | None = field(default=None)

    def __post_init__(self) -> None:
        if self.error is None and not 0.0 <= self.p_two_sided <= 1.0:
            raise ValueError(f"p-value {self.p_two_sided} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "rows": list(self.rows.entries),
            "cols": list(self.cols.entries),
            "minor_value": self.minor_value,
            "variance_estimate": self.variance_estimate,
            "z": self.z,
            "p_two_sided": self.p_two_sided,
            "df": self.df,
            "drop_null_term": self.drop_null_term,
            "formula": self.formula,
            "error": self.error,
        }


def normal_p_two_sided(z: float) -> float:
    """Two-sided standard normal tail probability, accurate to machine precision."""
    return math.erfc(abs(z) / math.sqrt(2.0))


def standardized_minor_test(
    sample: SampleInput,
    rows: IndexSeq | Sequence[int],
    cols: IndexSeq | Sequence[int],
    drop_null_term: bool = True,
    allow_overlap: bool = False,
) -> TestReport:
    """Test whether the population minor with the given rows and columns is 0.

    Rows and columns must be disjoint (the off-diagonal case, where the null is
    natural) unless allow_overlap is set, in which case the full variance is
    used with no term dropped and a warning is issued.
    """
    spd = sample.matrix
    iR = as_index_seq(rows, spd.dim)
    iC = as_index_seq(cols, spd.dim)
    if len(iR) != len(iC):
        raise ValueError("rows and cols must have equal length")
    m = len(iR)
    if m < 1:
        raise ValueError("the minor needs at least one row")
    df = sample.df
    if df < m:
        raise ValueError(f"df={df} is below the minor size {m}")

    overlap = bool(iR.as_set & iC.as_set)
    if overlap and not allow_overlap:
        raise ValueError(
            "rows and cols overlap; the minor = 0 null is only natural "
            "off-diagonal. Pass allow_overlap=True to test anyway."
        )

    breakdown = variance_breakdown(df, spd, iR, iC)
    if overlap:
        warnings.warn(
            "overlapping rows and cols: using the full variance with no term dropped",
            UserWarning,
            stacklevel=2,
        )
        dropped = False
        variance = breakdown.total
    elif drop_null_term:
        dropped = True
        variance = breakdown.conditional_var_part
    else:
        dropped = False
        variance = breakdown.total
    if not variance > 0.0:
        raise NumericalError(
            f"variance estimate {variance} is not positive; the minor cannot be standardized"
        )

    minor = minor_det(spd.values, iR, iC)
    z = float(df) ** m * minor / math.sqrt(variance)
    return TestReport(
        rows=iR,
        cols=iC,
        minor_value=minor,
        variance_estimate=variance,
        z=z,
        p_two_sided=normal_p_two_sided(z),
        df=df,
        drop_null_term=dropped,
        formula=breakdown.formula,
    )


def batch_test(
    sample: SampleInput,
    constraints: Sequence[tuple[Sequence[int], Sequence[int]]],
    drop_null_term: bool = True,
) -> list[TestReport]:
    """Run standardized_minor_test over a list of (rows, cols) constraints.

    Per-constraint failures are recorded in the report's error field instead of
    aborting the batch.  Overlapping constraints (as produced by conditioning
    sets) are allowed and use the full variance.  P-values are raw; no
    multiplicity correction is applied.
    """
    dim = sample.matrix.dim
    pairs = [(as_index_seq(r, dim), as_index_seq(c, dim)) for r, c in constraints]
    reports: list[TestReport] = []
    for rows, cols in pairs:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                reports.append(
                    standardized_minor_test(
                        sample, rows, cols, drop_null_term, allow_overlap=True
                    )
                )
        except (ValueError, NumericalError) as exc:
            reports.append(
                TestReport(
                    rows=rows,
                    cols=cols,
                    minor_value=float("nan"),
                    variance_estimate=float("nan"),
                    z=float("nan"),
                    p_two_sided=float("nan"),
                    df=sample.df,
                    drop_null_term=drop_null_term,
                    formula="error",
                    error=str(exc),
                )
            )
    return reports
