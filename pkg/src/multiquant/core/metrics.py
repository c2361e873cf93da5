"""Partition similarity: adjusted Rand index and adjusted mutual information."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
from scipy.special import gammaln

from multiquant.core.model import Partition
from multiquant.utils.exceptions import InvalidParameter, LengthMismatch

# Denominators at or below this are treated as degenerate
DEGENERATE_EPS = 1e-15

PartitionLike = Union[Partition, Any]


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Counts n_ij of samples labelled i in p and j in q."""

    counts: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    total: int

    def is_matching(self) -> bool:
        """True when the two partitions agree up to relabeling."""
        nonzero = self.counts > 0
        return bool(np.all(nonzero.sum(axis=1) == 1) and np.all(nonzero.sum(axis=0) == 1))


def _labels(p: PartitionLike) -> np.ndarray:
    if isinstance(p, Partition):
        return p.labels
    return Partition(np.asarray(p)).labels


def contingency(p: PartitionLike, q: PartitionLike) -> ContingencyTable:
    """Contingency table over the labels actually used by p and q."""
    a = _labels(p)
    b = _labels(q)
    if a.shape[0] != b.shape[0]:
        raise LengthMismatch(f"partitions have lengths {a.shape[0]} and {b.shape[0]}")
    rows, row_idx = np.unique(a, return_inverse=True)
    cols, col_idx = np.unique(b, return_inverse=True)
    counts = np.zeros((rows.size, cols.size), dtype=np.int64)
    np.add.at(counts, (row_idx, col_idx), 1)
    return ContingencyTable(
        counts=counts,
        row_sums=counts.sum(axis=1),
        col_sums=counts.sum(axis=0),
        total=int(a.shape[0]),
    )


def _pairs(x: np.ndarray) -> int:
    x = x.astype(np.int64)
    return int(np.sum(x * (x - 1) // 2))


def ari(p: PartitionLike, q: PartitionLike) -> float:
    """Adjusted Rand index via pair counting on the contingency table.

    When both partitions are trivial the denominator vanishes; the result is
    then 1 for matching partitions and 0 otherwise.
    """
    table = contingency(p, q)
    if table.total < 2:
        raise InvalidParameter("the adjusted Rand index needs at least two samples")
    index = _pairs(table.counts)
    sum_rows = _pairs(table.row_sums)
    sum_cols = _pairs(table.col_sums)
    total_pairs = table.total * (table.total - 1) // 2
    expected = sum_rows * sum_cols / total_pairs
    maximum = (sum_rows + sum_cols) / 2.0
    denominator = maximum - expected
    if denominator == 0:
        return 1.0 if table.is_matching() else 0.0
    return float((index - expected) / denominator)


def entropy(sizes: np.ndarray) -> float:
    """Natural-log entropy of a partition given its cluster sizes."""
    sizes = sizes[sizes > 0].astype(float)
    probs = sizes / sizes.sum()
    return float(-np.sum(probs * np.log(probs)))


def mutual_information(table: ContingencyTable) -> float:
    """Mutual information (natural log) of the two partitions."""
    rows, cols = np.nonzero(table.counts)
    nij = table.counts[rows, cols].astype(float)
    n = float(table.total)
    outer = table.row_sums[rows].astype(float) * table.col_sums[cols].astype(float)
    # fsum keeps the result independent of term order (exact symmetry)
    return math.fsum(nij / n * (np.log(n * nij) - np.log(outer)))


def expected_mutual_information(table: ContingencyTable) -> float:
    """E[MI] under the hypergeometric model with the table's margins fixed.

    Sums exactly over every feasible n_ij for each (row, column) pair.
    """
    a = table.row_sums.astype(np.int64)
    b = table.col_sums.astype(np.int64)
    n = int(table.total)
    gln_n = gammaln(n + 1)
    terms: list[float] = []
    for ai in a:
        for bj in b:
            start = max(1, int(ai + bj - n))
            end = int(min(ai, bj))
            if start > end:
                continue
            nij = np.arange(start, end + 1, dtype=float)
            # Each pair of row/column terms is grouped so swapping p and q is exact
            term = nij / n * (np.log(n) + np.log(nij) - (np.log(ai) + np.log(bj)))
            log_prob = (
                (gammaln(ai + 1) + gammaln(bj + 1))
                + (gammaln(n - ai + 1) + gammaln(n - bj + 1))
                - gln_n
                - gammaln(nij + 1)
                - (gammaln(ai - nij + 1) + gammaln(bj - nij + 1))
                - gammaln(n - ai - bj + nij + 1)
            )
            terms.extend((term * np.exp(log_prob)).tolist())
    return math.fsum(terms)


def ami(p: PartitionLike, q: PartitionLike) -> float:
    """Adjusted mutual information, arithmetic-mean normalization.

    (MI - E[MI]) / (mean(H(p), H(q)) - E[MI]); exactly 1 for partitions that
    agree up to relabeling. Other degenerate denominators give 0.
    """
    table = contingency(p, q)
    if table.total < 1:
        raise InvalidParameter("the adjusted mutual information needs at least one sample")
    if table.is_matching():
        return 1.0
    mi = mutual_information(table)
    emi = expected_mutual_information(table)
    normalizer = 0.5 * (entropy(table.row_sums) + entropy(table.col_sums))
    denominator = normalizer - emi
    if abs(denominator) <= DEGENERATE_EPS:
        return 0.0
    return float((mi - emi) / denominator)
