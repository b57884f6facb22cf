"""Dense matrix kernel: minors, compound matrices, and block decompositions.

Everything is desk scale (dimensions <= a few dozen), so the implementation
favors clarity and exact contracts over asymptotics.  Determinants go through
LAPACK's LU with partial pivoting (numpy.linalg.det).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NotPositiveDefiniteError, SingularMatrixError
from .indexing import IndexSeq, SubsetEnumeration, as_index_seq

# Positive definiteness is judged against the matrix's own scale: smallest
# eigenvalue must exceed PD_TOL_FACTOR times the largest diagonal entry.
PD_TOL_FACTOR = 1e-12
SYM_TOL_FACTOR = 1e-9


def as_matrix(a: "np.ndarray | Sequence[Sequence[float]]", name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def pd_tolerance(a: np.ndarray) -> float:
    """Eigenvalue floor below which a symmetric matrix is treated as not PD."""
    if a.size == 0:
        return 0.0
    return PD_TOL_FACTOR * max(float(np.max(np.diag(a))), 0.0)


@dataclass(frozen=True)
class SymPDMatrix:
    """A validated symmetric positive definite matrix.

    Construct with from_array, which checks symmetry within a relative
    tolerance, symmetrizes exactly, and requires all eigenvalues to exceed
    pd_tolerance(a).  The stored array is read-only.
    """

    values: np.ndarray

    @classmethod
    def from_array(cls, a: "np.ndarray | Sequence[Sequence[float]]") -> "SymPDMatrix":
        arr = as_matrix(a)
        n, m = arr.shape
        if n != m:
            raise ValueError(f"matrix must be square, got shape {arr.shape}")
        scale = float(np.max(np.abs(arr))) if arr.size else 0.0
        if arr.size and float(np.max(np.abs(arr - arr.T))) > SYM_TOL_FACTOR * max(scale, 1e-300):
            raise ValueError("matrix is not symmetric within tolerance")
        sym = (arr + arr.T) / 2.0
        if sym.size:
            w = np.linalg.eigvalsh(sym)
            if float(w[0]) <= pd_tolerance(sym):
                raise NotPositiveDefiniteError(
                    f"smallest eigenvalue {w[0]:.3e} below tolerance {pd_tolerance(sym):.3e}"
                )
        sym.setflags(write=False)
        return cls(sym)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self.values, dtype=dtype)


def ensure_spd(sigma: "SymPDMatrix | np.ndarray | Sequence[Sequence[float]]") -> SymPDMatrix:
    if isinstance(sigma, SymPDMatrix):
        return sigma
    return SymPDMatrix.from_array(sigma)


def minor_det(
    a: "np.ndarray | SymPDMatrix",
    rows: IndexSeq | Sequence[int],
    cols: IndexSeq | Sequence[int],
) -> float:
    """Determinant of the submatrix with the given ordered rows and columns.

    Rows and columns are 1-based.  The empty minor has determinant 1.
    """
    arr = as_matrix(np.asarray(a, dtype=float))
    iR, iC = as_index_seq(rows), as_index_seq(cols)
    if len(iR) != len(iC):
        raise ValueError(f"need |rows| = |cols|, got {len(iR)} and {len(iC)}")
    if max(iR.entries, default=0) > arr.shape[0] or max(iC.entries, default=0) > arr.shape[1]:
        raise ValueError("index outside matrix")
    if len(iR) == 0:
        return 1.0
    sub = arr[np.ix_([e - 1 for e in iR.entries], [e - 1 for e in iC.entries])]
    return float(np.linalg.det(sub))


@dataclass(frozen=True)
class CompoundMatrix:
    """All size-m minors of a source matrix, indexed by lexicographic m-subsets.

    values[i, j] is the minor with rows enumeration.unrank(i) and columns
    enumeration.unrank(j), both ascending.
    """

    source_dim: int
    order: int
    values: np.ndarray

    @property
    def enumeration(self) -> SubsetEnumeration:
        return SubsetEnumeration(self.source_dim, self.order)

    def entry(self, rows: Sequence[int], cols: Sequence[int]) -> float:
        enum = self.enumeration
        return float(self.values[enum.rank(tuple(rows)), enum.rank(tuple(cols))])

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self.values, dtype=dtype)


def compound(a: "np.ndarray | SymPDMatrix", m: int) -> CompoundMatrix:
    """The m-th compound: the matrix of all m x m minors in lexicographic order.

    compound(a, 0) is the 1 x 1 matrix [1]; compound(a, r) is [det(a)].
    Multiplicativity compound(ab, m) = compound(a, m) @ compound(b, m) holds for
    square a, b.
    """
    arr = as_matrix(np.asarray(a, dtype=float))
    n, p = arr.shape
    if n != p:
        raise ValueError(f"compound requires a square matrix, got shape {arr.shape}")
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= {n}, got {m}")
    enum = SubsetEnumeration(n, m)
    size = len(enum)
    if m == 0:
        return CompoundMatrix(n, 0, np.ones((1, 1)))
    cols_idx = np.array(enum.subsets, dtype=int) - 1  # (size, m)
    out = np.empty((size, size))
    for i, rows in enumerate(enum.subsets):
        block = arr[[e - 1 for e in rows]][:, cols_idx.reshape(-1)]
        stacked = block.reshape(m, size, m).transpose(1, 0, 2)
        out[i] = np.linalg.det(stacked)
    return CompoundMatrix(n, m, out)


def kronecker(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the standard block convention."""
    return np.kron(as_matrix(np.asarray(a, float), "a"), as_matrix(np.asarray(b, float), "b"))


def sym_sqrt(sigma: "SymPDMatrix | np.ndarray") -> SymPDMatrix:
    """Symmetric positive definite square root via eigendecomposition."""
    spd = ensure_spd(sigma)
    w, v = np.linalg.eigh(spd.values)
    root = (v * np.sqrt(w)) @ v.T
    return SymPDMatrix.from_array((root + root.T) / 2.0)


def schur_complement(
    sigma: "SymPDMatrix | np.ndarray",
    core: IndexSeq | Sequence[int],
) -> SymPDMatrix:
    """Schur complement of the block indexed by core, over its complement.

    For sigma partitioned by C = core and D = complement (ascending), returns
    sigma_DD - sigma_DC sigma_CC^{-1} sigma_CD, indexed by D in ascending order.
    """
    spd = ensure_spd(sigma)
    r = spd.dim
    c = as_index_seq(core, r)
    cset = sorted(c.as_set)
    dset = [i for i in range(1, r + 1) if i not in c.as_set]
    arr = spd.values
    ci = [i - 1 for i in cset]
    di = [i - 1 for i in dset]
    if not ci:
        return spd
    a_cc = arr[np.ix_(ci, ci)]
    a_dc = arr[np.ix_(di, ci)]
    a_dd = arr[np.ix_(di, di)]
    try:
        solved = np.linalg.solve(a_cc, a_dc.T)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"core block is singular: {exc}") from exc
    comp = a_dd - a_dc @ solved
    return SymPDMatrix.from_array((comp + comp.T) / 2.0)


def partitioned_inverse_block(
    sigma: "SymPDMatrix | np.ndarray",
    rows: IndexSeq | Sequence[int],
    cols: IndexSeq | Sequence[int],
) -> np.ndarray:
    """The rows x cols block of the inverse of the (rows+cols) principal submatrix.

    rows and cols must be disjoint.  With the principal submatrix arranged as
    [rows, cols], this is the upper-right block of its inverse.
    """
    spd = ensure_spd(sigma)
    iR = as_index_seq(rows, spd.dim)
    iC = as_index_seq(cols, spd.dim)
    if iR.as_set & iC.as_set:
        raise ValueError("rows and cols must be disjoint")
    order = [e - 1 for e in iR.entries] + [e - 1 for e in iC.entries]
    sub = spd.values[np.ix_(order, order)]
    try:
        inv = np.linalg.inv(sub)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"principal submatrix is singular: {exc}") from exc
    k = len(iR)
    return inv[:k, k:].copy()


def trace_compound(m_mat: np.ndarray, k: int) -> float:
    """Trace of the k-th compound: the sum of all principal k x k minors.

    Uses elementary symmetric functions of the eigenvalues when the input is
    symmetric, otherwise sums principal minors directly.
    """
    arr = as_matrix(np.asarray(m_mat, float))
    n = arr.shape[0]
    if arr.shape[0] != arr.shape[1]:
        raise ValueError("trace_compound requires a square matrix")
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= {n}, got {k}")
    if k == 0:
        return 1.0
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    if scale == 0.0:
        return 0.0
    if float(np.max(np.abs(arr - arr.T))) <= 1e-12 * scale:
        w = np.linalg.eigvalsh((arr + arr.T) / 2.0)
        # e_k via the Newton-free recurrence on the polynomial coefficients.
        coeffs = np.ones(1)
        for root in w:
            coeffs = np.convolve(coeffs, np.array([1.0, root]))
        return float(coeffs[k])
    total = 0.0
    for rows in itertools.combinations(range(n), k):
        total += float(np.linalg.det(arr[np.ix_(rows, rows)]))
    return total


def load_matrix_csv(path: str) -> np.ndarray:
    """Read a square numeric CSV matrix.

    Comma separator, '.' decimal point, optional single header row which is
    auto-detected by a non-numeric first row.
    """
    with open(path, "r", encoding="utf-8-sig") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")

    def parse_row(line: str) -> list[float] | None:
        cells = [c.strip() for c in line.split(",")]
        try:
            return [float(c) for c in cells]
        except ValueError:
            return None

    first = parse_row(lines[0])
    body = lines if first is not None else lines[1:]
    rows = []
    for idx, line in enumerate(body):
        row = parse_row(line)
        if row is None:
            raise ValueError(f"{path}: non-numeric cell in row {idx + 1}")
        rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no numeric rows")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValueError(f"{path}: ragged rows")
    arr = np.array(rows, dtype=float)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{path}: matrix must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{path}: non-finite entries")
    return arr


def format_matrix_csv(
    a: np.ndarray,
    row_labels: Sequence[str] | None = None,
    col_labels: Sequence[str] | None = None,
) -> str:
    """Render a matrix as CSV text with 17 significant digits per cell."""
    arr = as_matrix(np.asarray(a, float))
    lines = []
    if col_labels is not None:
        head = [""] if row_labels is not None else []
        lines.append(",".join(head + list(col_labels)))
    for i in range(arr.shape[0]):
        cells = [f"{x:.17g}" for x in arr[i]]
        if row_labels is not None:
            cells = [row_labels[i]] + cells
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def dump_matrix_csv(
    path: str,
    a: np.ndarray,
    row_labels: Sequence[str] | None = None,
    col_labels: Sequence[str] | None = None,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix_csv(a, row_labels, col_labels))
