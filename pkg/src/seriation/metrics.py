"""Complexity functionals of a matrix and the row-gap / loss diagnostics.

Three scalars summarize how hard a monotone matrix is to recover from noise:

* ``K``: total number of distinct values over the columns (adaptive
  complexity; small K means nearly piecewise-constant columns),
* ``V``: a 2/3-power mean of the per-column variations raised back to the
  3/2 (global complexity; the odd exponent is what makes the vector and
  matrix rates line up),
* ``R``: the average of the n largest per-row-pair scores
  ``min(||u||^2/||u||_inf^2, m ||u||^2/||u||_1^2)`` over pairs of distinct
  rows; it sits in [1, sqrt(m)] and is 1 when every row difference is either
  1-sparse or fully dense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EPS, Permutation, check_matrix, frobenius_sq_dist, permute_rows
from .shape import has_monotone_columns


@dataclass(frozen=True)
class ComplexityReport:
    """K, V and R of one matrix plus the per-column breakdowns.

    ``r_value`` is None when the matrix is not column-increasing (R is only
    defined there). ``r_degenerate`` flags the case where all rows are
    identical: the defining sum is empty, and the reported value is the
    floor 1 rather than something computed.
    """

    k_total: int
    per_column_k: np.ndarray
    v_total: float
    per_column_v: np.ndarray
    r_value: float | None
    r_degenerate: bool

    def to_json_dict(self) -> dict:
        return {
            "K": self.k_total,
            "V": self.v_total,
            "R": self.r_value,
            "per_column_k": [int(k) for k in self.per_column_k],
            "per_column_v": [float(v) for v in self.per_column_v],
            "r_degenerate": self.r_degenerate,
        }


def count_levels(a, quantize: float | None = None) -> tuple[int, np.ndarray]:
    """Number of distinct values in each column and their total K.

    Distinctness is exact equality of floats: inputs are constructed
    matrices, where ties are exact by construction. For externally loaded
    noisy data, ``quantize`` snaps values to multiples of the given width
    before counting.
    """
    a = check_matrix(a)
    if quantize is not None:
        if quantize <= 0:
            raise ValueError("quantize width must be positive")
        a = np.round(a / quantize)
    per_column = np.array(
        [np.unique(a[:, j]).size for j in range(a.shape[1])], dtype=np.int64
    )
    return int(per_column.sum()), per_column


def variation(a) -> tuple[float, np.ndarray]:
    """Per-column max-minus-min and the matrix variation
    ``((1/m) sum v_j^(2/3))^(3/2)``."""
    a = check_matrix(a)
    per_column = a.max(axis=0) - a.min(axis=0)
    v = float(np.mean(per_column ** (2.0 / 3.0)) ** 1.5)
    return v, per_column


def pair_score(u, m: int) -> float:
    """Sparsity/density score of one row difference: small when ``u`` is
    nearly 1-sparse or nearly constant, at most sqrt(m)."""
    u = np.asarray(u, dtype=np.float64)
    sq = float(np.dot(u, u))
    if sq == 0.0:
        return 0.0
    linf = float(np.max(np.abs(u)))
    l1 = float(np.sum(np.abs(u)))
    return min(sq / linf**2, m * sq / l1**2)


def r_statistic(a) -> float:
    """Average of the ``n`` largest pair scores over ordered pairs of
    non-identical rows of a column-increasing matrix.

    Guaranteed to land in [1, sqrt(m)] whenever some pair of rows differs;
    returns 0.0 when all rows are identical (the defining sum is empty --
    callers wanting the reported floor should go through
    :func:`complexity_report`).
    """
    a = check_matrix(a)
    if not has_monotone_columns(a):
        raise ValueError("r_statistic requires column-increasing input")
    n, m = a.shape
    top = np.empty(0)
    for i in range(n):
        u = a - a[i]
        sq = np.einsum("ij,ij->i", u, u)
        linf = np.max(np.abs(u), axis=1)
        distinct = linf > 0.0
        if not distinct.any():
            continue
        l1 = np.sum(np.abs(u), axis=1)
        s2, si, s1 = sq[distinct], linf[distinct], l1[distinct]
        scores = np.minimum(s2 / si**2, m * s2 / s1**2)
        top = np.concatenate([top, scores])
        if top.size > n:
            top = np.partition(top, top.size - n)[-n:]
    if top.size == 0:
        return 0.0
    r = float(np.sum(top)) / n
    if not (1.0 - EPS <= r <= np.sqrt(m) + EPS):
        raise RuntimeError(f"pair-score statistic {r} escaped [1, sqrt(m)]")
    return r


def complexity_report(a, quantize: float | None = None) -> ComplexityReport:
    """All three functionals at once; R is omitted for non-monotone input."""
    a = check_matrix(a)
    k_total, per_k = count_levels(a, quantize=quantize)
    v_total, per_v = variation(a)
    if has_monotone_columns(a):
        raw = r_statistic(a)
        degenerate = raw == 0.0
        r_value = 1.0 if degenerate else raw
    else:
        r_value = None
        degenerate = False
    return ComplexityReport(
        k_total=k_total,
        per_column_k=per_k,
        v_total=v_total,
        per_column_v=per_v,
        r_value=r_value,
        r_degenerate=degenerate,
    )


GAP_SCALES = ("raw", "sigma-sqrt-m")


def gap(a, i: int, i2: int, scale: str = "raw", sigma: float | None = None) -> float:
    """Row gap from row ``i`` up to row ``i2`` (0-based):

        max_j (a[i2, j] - a[i, j])  v  (1/sqrt(m)) sum_j (a[i2, j] - a[i, j])

    With ``scale="sigma-sqrt-m"`` the value is divided by ``sigma*sqrt(m)``
    to express it in noise units; ``sigma`` is required then.
    """
    a = check_matrix(a)
    n, m = a.shape
    if not (0 <= i < n and 0 <= i2 < n):
        raise ValueError(f"row index out of range for {n} rows: {i}, {i2}")
    d = a[i2] - a[i]
    value = max(float(np.max(d)), float(np.sum(d)) / np.sqrt(m))
    if scale == "raw":
        return value
    if scale == "sigma-sqrt-m":
        if sigma is None or sigma <= 0:
            raise ValueError("sigma must be positive for scale='sigma-sqrt-m'")
        return value / (sigma * np.sqrt(m))
    raise ValueError(f"unknown scale {scale!r}; expected one of {GAP_SCALES}")


def pairwise_gaps(a) -> np.ndarray:
    """All row gaps at once: ``out[l, i] = gap(a, l, i)``.

    O(n^2 m) time and O(n^2) memory: the columnwise max is accumulated one
    column at a time into a reused (n, n) buffer, which keeps the working
    set small at desk scale (n up to a few thousand).
    """
    a = check_matrix(a)
    n, m = a.shape
    rowsum = a.sum(axis=1) / np.sqrt(m)
    out = np.subtract(rowsum[None, :], rowsum[:, None])  # start from the sum branch
    diff = np.empty((n, n))
    for j in range(m):
        col = a[:, j]
        np.subtract(col[None, :], col[:, None], out=diff)
        np.maximum(out, diff, out=out)
    return out


def min_adjacent_row_gap(a) -> float:
    """Smallest gap between consecutive rows. For a column-increasing matrix
    this equals the smallest gap over all ordered pairs, and it is positive
    exactly when all rows are distinct."""
    a = check_matrix(a)
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least two rows")
    return min(gap(a, i, i + 1) for i in range(n - 1))


@dataclass(frozen=True)
class RearrangementCheck:
    """The three squared-distance terms of the monotone rearrangement
    inequalities and whether both inequalities hold (with EPS slack):

        matrix_term <= total_term      and      perm_term <= 4 * total_term
    """

    matrix_term: float
    perm_term: float
    total_term: float
    ok: bool


def rearrangement_check(
    a_true, a_alt, p_true: Permutation, p_alt: Permutation
) -> RearrangementCheck:
    """Evaluate the rearrangement inequalities for two column-increasing
    matrices and two permutations.

    ``matrix_term = ||a_alt - a_true||_F^2`` must be dominated by
    ``total_term = ||p_alt a_alt - p_true a_true||_F^2``, and
    ``perm_term = ||p_alt a_true - p_true a_true||_F^2`` by four times it.
    Both matrices must be column-increasing or the claim is simply false.
    """
    a_true = check_matrix(a_true, "a_true")
    a_alt = check_matrix(a_alt, "a_alt")
    if a_true.shape != a_alt.shape:
        raise ValueError(f"shape mismatch: {a_true.shape} vs {a_alt.shape}")
    if not has_monotone_columns(a_true) or not has_monotone_columns(a_alt):
        raise ValueError("both matrices must have increasing columns")
    target = permute_rows(p_true, a_true)
    matrix_term = frobenius_sq_dist(a_alt, a_true)
    perm_term = frobenius_sq_dist(permute_rows(p_alt, a_true), target)
    total_term = frobenius_sq_dist(permute_rows(p_alt, a_alt), target)
    slack = EPS * (1.0 + total_term)
    ok = matrix_term <= total_term + slack and perm_term <= 4.0 * total_term + slack
    return RearrangementCheck(
        matrix_term=matrix_term, perm_term=perm_term, total_term=total_term, ok=ok
    )
