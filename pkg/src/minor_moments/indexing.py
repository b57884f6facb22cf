"""Index sequences, subset enumeration, and the relabeling used for product moments.

Row and column sets of minors are carried as ordered sequences of distinct
1-based indices.  Order matters: swapping two entries of a row or column
sequence flips the sign of the corresponding minor, so every operation here
either preserves the user's ordering or reports the parity it discarded.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


@dataclass(frozen=True)
class IndexSeq:
    """An ordered sequence of distinct indices from {1, ..., r}.

    Parameters
    ----------
    entries : tuple of int
        The indices, in user order, 1-based, pairwise distinct.
    r : int
        Ambient dimension.  Every entry must lie in 1..r.
    """

    entries: tuple[int, ...]
    r: int

    def __post_init__(self) -> None:
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.r < 0:
            raise ValueError(f"ambient dimension must be nonnegative, got {self.r}")
        if len(set(entries)) != len(entries):
            raise ValueError(f"indices must be pairwise distinct, got {entries}")
        for e in entries:
            if not 1 <= e <= self.r:
                raise ValueError(f"index {e} outside 1..{self.r}")

    @classmethod
    def parse(cls, text: str, r: int | None = None) -> "IndexSeq":
        """Parse a comma-separated list such as "1,2,3". Empty string is the empty sequence."""
        text = text.strip()
        entries = tuple(int(t) for t in text.split(",")) if text else ()
        if r is None:
            r = max(entries, default=0)
        return cls(entries, r)

    def __str__(self) -> str:
        return ",".join(str(e) for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    @property
    def as_set(self) -> frozenset[int]:
        return frozenset(self.entries)

    def sorted(self) -> "IndexSeq":
        return IndexSeq(tuple(sorted(self.entries)), self.r)

    def sort_parity(self) -> int:
        """Parity (+1 or -1) of the permutation that sorts the entries ascending."""
        return perm_parity(self.entries)

    def with_ambient(self, r: int) -> "IndexSeq":
        return IndexSeq(self.entries, r)


def as_index_seq(x: IndexSeq | Sequence[int] | str, r: int | None = None) -> IndexSeq:
    """Coerce a sequence, comma string, or IndexSeq to an IndexSeq.

    When r is given it overrides (and checks) the ambient dimension; when it is
    None the ambient dimension defaults to the largest entry.
    """
    if isinstance(x, IndexSeq):
        if r is not None and x.r != r:
            if x.r > r:
                raise ValueError(f"index sequence ambient {x.r} exceeds required {r}")
            return IndexSeq(x.entries, r)
        return x
    if isinstance(x, str):
        return IndexSeq.parse(x, r)
    entries = tuple(int(e) for e in x)
    if r is None:
        r = max(entries, default=0)
    return IndexSeq(entries, r)


def perm_parity(seq: Sequence[int]) -> int:
    """Parity of the permutation taking seq to its ascending sort, +1 or -1."""
    inversions = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inversions += 1
    return -1 if inversions % 2 else 1


def _common_ambient(*seqs: IndexSeq) -> int:
    return max(s.r for s in seqs) if seqs else 0


def sym_diff(a: IndexSeq | Sequence[int], b: IndexSeq | Sequence[int]) -> IndexSeq:
    """Symmetric difference of two index sequences, returned sorted ascending."""
    sa, sb = as_index_seq(a), as_index_seq(b)
    r = _common_ambient(sa, sb)
    return IndexSeq(tuple(sorted(sa.as_set ^ sb.as_set)), r)


class SubsetEnumeration:
    """All m-element subsets of {1, ..., r} in lexicographic order of sorted tuples.

    Rank 0 is (1, ..., m).  Desk scale: the full list is materialized, which is
    cheap for r <= 12.
    """

    def __init__(self, r: int, m: int) -> None:
        if not 0 <= m <= r:
            raise ValueError(f"need 0 <= m <= r, got m={m}, r={r}")
        self.r = r
        self.m = m
        self.subsets: tuple[tuple[int, ...], ...] = tuple(
            itertools.combinations(range(1, r + 1), m)
        )
        self._rank = {s: i for i, s in enumerate(self.subsets)}

    def __len__(self) -> int:
        return len(self.subsets)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.subsets)

    def rank(self, subset: Iterable[int]) -> int:
        """Position of a sorted m-subset in the enumeration."""
        key = tuple(subset)
        if isinstance(key[0] if key else 0, IndexSeq):  # pragma: no cover - defensive
            raise TypeError("rank expects a flat index collection")
        if tuple(sorted(key)) != key:
            raise ValueError(f"subset must be sorted ascending, got {key}")
        try:
            return self._rank[key]
        except KeyError:
            raise ValueError(f"{key} is not an {self.m}-subset of 1..{self.r}") from None

    def unrank(self, i: int) -> tuple[int, ...]:
        """Inverse of rank."""
        if not 0 <= i < len(self.subsets):
            raise ValueError(f"rank {i} outside 0..{len(self.subsets) - 1}")
        return self.subsets[i]


def subset_rank(subset: Iterable[int], enumeration: SubsetEnumeration) -> int:
    return enumeration.rank(subset)


def subset_unrank(i: int, enumeration: SubsetEnumeration) -> tuple[int, ...]:
    return enumeration.unrank(i)


@dataclass(frozen=True)
class CanonicalRelabeling:
    """Result of canonical_relabeling.

    sigma maps old labels to new ones: sigma[i - 1] is the new label of i.
    The four canonical sequences are the relabeled inputs sorted ascending, and
    sign is the product over the four inputs of the parity of the permutation
    taking the relabeled user ordering to ascending order.
    """

    sigma: tuple[int, ...]
    rows1: IndexSeq
    cols1: IndexSeq
    rows2: IndexSeq
    cols2: IndexSeq
    sign: int = field(default=1)

    def apply(self, seq: IndexSeq | Sequence[int]) -> tuple[int, ...]:
        s = as_index_seq(seq, len(self.sigma))
        return tuple(self.sigma[e - 1] for e in s.entries)


def canonical_relabeling(
    rows1: IndexSeq | Sequence[int],
    cols1: IndexSeq | Sequence[int],
    rows2: IndexSeq | Sequence[int],
    cols2: IndexSeq | Sequence[int],
    r: int | None = None,
) -> CanonicalRelabeling:
    """Relabel {1..r} so two minor index pairs sit in the block order required
    by the closed-form product moment, tracking the sign.

    Writing I, J for the first pair and K, L for the second, with
    Ibar = I minus (I cap J) etc., the new labels are assigned consecutively to
    the blocks

        (I cap J) minus (K cap L),  Ibar cap Kbar,  Ibar cap Lbar,
        Jbar cap Kbar,  Jbar cap Lbar,  (K cap L) minus (I cap J),
        I cap J cap K cap L,  remainder of {1..r},

    each block taken ascending.  Requires |I| = |J| = |K| = |L| and equal
    symmetric differences I sym J = K sym L, which is exactly when the product
    moment can be nonzero.
    """
    I = as_index_seq(rows1, r)
    J = as_index_seq(cols1, r)
    K = as_index_seq(rows2, r)
    L = as_index_seq(cols2, r)
    rr = r if r is not None else _common_ambient(I, J, K, L)
    I, J, K, L = (s.with_ambient(rr) for s in (I, J, K, L))

    if not (len(I) == len(J) == len(K) == len(L)):
        raise ValueError("all four index sequences must have the same length")
    si, sj, sk, sl = I.as_set, J.as_set, K.as_set, L.as_set
    if si ^ sj != sk ^ sl:
        raise ValueError(
            "symmetric differences differ; the product moment is 0 and no "
            "canonical relabeling is defined"
        )

    ij, kl = si & sj, sk & sl
    ibar, jbar = si - ij, sj - ij
    kbar, lbar = sk - kl, sl - kl
    core = ij & kl
    blocks = [
        ij - kl,
        ibar & kbar,
        ibar & lbar,
        jbar & kbar,
        jbar & lbar,
        kl - ij,
        core,
        frozenset(range(1, rr + 1)) - (si | sj | sk | sl),
    ]
    sigma = [0] * rr
    label = 1
    for block in blocks:
        for old in sorted(block):
            sigma[old - 1] = label
            label += 1

    sig = tuple(sigma)
    sign = 1
    relabeled = []
    for s in (I, J, K, L):
        image = tuple(sig[e - 1] for e in s.entries)
        sign *= perm_parity(image)
        relabeled.append(IndexSeq(tuple(sorted(image)), rr))
    return CanonicalRelabeling(sig, *relabeled, sign=sign)


def is_canonical_order(
    rows1: IndexSeq | Sequence[int],
    cols1: IndexSeq | Sequence[int],
    rows2: IndexSeq | Sequence[int],
    cols2: IndexSeq | Sequence[int],
) -> bool:
    """Check the block order conditions the product-moment formula assumes:
    (I cap J)-only < Ibar < Jbar < (K cap L)-only, with Ibar cap Kbar before
    Ibar cap Lbar and Jbar cap Kbar before Jbar cap Lbar, under the usual <.
    """
    I, J, K, L = (as_index_seq(s) for s in (rows1, cols1, rows2, cols2))
    si, sj, sk, sl = I.as_set, J.as_set, K.as_set, L.as_set
    ij, kl = si & sj, sk & sl
    ibar, jbar = si - ij, sj - ij
    kbar, lbar = sk - kl, sl - kl

    def before(a: frozenset[int], b: frozenset[int]) -> bool:
        return not a or not b or max(a) < min(b)

    def chain(*sets: frozenset[int]) -> bool:
        nonempty = [s for s in sets if s]
        return all(before(a, b) for a, b in zip(nonempty, nonempty[1:]))

    return (
        chain(ij - kl, ibar, jbar, kl - ij)
        and before(ibar & kbar, ibar & lbar)
        and before(jbar & kbar, jbar & lbar)
    )
