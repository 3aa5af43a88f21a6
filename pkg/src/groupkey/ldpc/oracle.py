"""Reference encoder by Gaussian elimination, and brute-force code enumeration.

These are independent of the stopping-set encoder and exist to check it.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .codeword import Codeword
from .matrix import ParityCheckMatrix


class RankError(ValueError):
    def __init__(self, message: str, dependent_rows: Sequence[int] = ()):
        super().__init__(message)
        self.dependent_rows = tuple(dependent_rows)


def rref(h: ParityCheckMatrix) -> tuple[np.ndarray, list[int], np.ndarray]:
    """Reduced row echelon form over GF(2).

    Returns ``(R, pivot_columns, T)`` with ``R == T @ H mod 2``; row ``i`` of
    ``T`` records which original rows were summed into row ``i`` of ``R``.
    """
    m, n = h.entries.shape
    a = np.concatenate([h.entries.copy(), np.eye(m, dtype=np.uint8)], axis=1)
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        hits = np.flatnonzero(a[r:, c])
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        a[[r, p]] = a[[p, r]]
        rows = np.flatnonzero(a[:, c])
        rows = rows[rows != r]
        a[rows] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:, :n], pivots, a[:, n:]


def check_full_rank(h: ParityCheckMatrix) -> list[int]:
    """Pivot columns of ``H``; raises :class:`RankError` naming dependent rows."""
    _, pivots, t = rref(h)
    if len(pivots) < h.rows:
        combo = t[len(pivots)]
        dependent = np.flatnonzero(combo).tolist()
        raise RankError(
            f"rank {len(pivots)} < {h.rows}: rows {[i + 1 for i in dependent]} sum to zero",
            dependent,
        )
    return pivots


def _solve_gf2(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Solve square ``a x = b`` over GF(2); None if singular."""
    k = a.shape[0]
    aug = np.concatenate([a % 2, (b % 2).reshape(-1, 1)], axis=1).astype(np.uint8)
    for c in range(k):
        hits = np.flatnonzero(aug[c:, c])
        if hits.size == 0:
            return None
        p = c + int(hits[0])
        aug[[c, p]] = aug[[p, c]]
        rows = np.flatnonzero(aug[:, c])
        rows = rows[rows != c]
        aug[rows] ^= aug[c]
    return aug[:, k]


def oracle_encode(
    h: ParityCheckMatrix,
    info: Sequence[int],
    info_positions: Sequence[int] | None = None,
) -> Codeword:
    """Systematic encoding by elimination.

    Without ``info_positions`` the non-pivot columns of the RREF carry the
    information bits.  With them, the complementary columns must be
    invertible; the parity part is solved directly.
    """
    pivots = check_full_rank(h)
    k = h.cols - h.rows
    if len(info) != k:
        raise ValueError(f"expected {k} information bits, got {len(info)}")
    if info_positions is None:
        info_positions = [j for j in range(h.cols) if j not in pivots]
    info_positions = list(info_positions)
    if len(info_positions) != k or len(set(info_positions)) != k:
        raise ValueError("info_positions must name k distinct columns")
    parity_positions = [j for j in range(h.cols) if j not in set(info_positions)]
    x = np.zeros(h.cols, dtype=np.uint8)
    x[info_positions] = np.asarray(info, dtype=np.uint8)
    rhs = (h.entries[:, info_positions].astype(np.int64) @ x[info_positions]) % 2
    sol = _solve_gf2(h.entries[:, parity_positions], rhs)
    if sol is None:
        raise RankError(f"columns {[j + 1 for j in parity_positions]} are not invertible")
    x[parity_positions] = sol
    return Codeword(tuple(int(b) for b in x), tuple(info_positions + parity_positions))


def all_codewords(h: ParityCheckMatrix) -> list[tuple[int, ...]]:
    """Every codeword, by enumerating the information part (small codes only)."""
    k = h.cols - h.rows
    return [oracle_encode(h, bits).bits for bits in itertools.product((0, 1), repeat=k)]


def minimum_distance(h: ParityCheckMatrix) -> int:
    return min(sum(c) for c in all_codewords(h) if any(c))


def nearest_codewords(h: ParityCheckMatrix, word: Sequence[int]) -> tuple[int, list[tuple[int, ...]]]:
    """Minimum Hamming distance from ``word`` to the code, and all codewords at it."""
    best, hits = None, []
    w = tuple(word)
    for c in all_codewords(h):
        d = sum(a != b for a, b in zip(c, w))
        if best is None or d < best:
            best, hits = d, [c]
        elif d == best:
            hits.append(c)
    return best, hits
