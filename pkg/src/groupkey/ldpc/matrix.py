"""Parity-check matrices over GF(2), their Tanner graphs, and file readers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np


class MatrixFormatError(ValueError):
    def __init__(self, line: int, message: str, source: str = "<matrix>"):
        super().__init__(f"{source}:{line}: {message}")
        self.line = line
        self.source = source


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    """An ``m x n`` binary matrix; row ``i`` is check ``C(i+1)``, column ``j`` is bit ``X(j+1)``."""

    entries: np.ndarray
    # optional preferred declaration order (info bits, then reevaluation candidates)
    layout: tuple[int, ...] | None = None

    def __post_init__(self):
        h = np.array(self.entries, dtype=np.uint8)
        if h.ndim != 2 or h.size == 0:
            raise ValueError("parity-check matrix must be a non-empty 2-D array")
        if np.any(h > 1):
            raise ValueError("parity-check matrix entries must be 0 or 1")
        if not h.any(axis=1).all():
            raise ValueError(f"zero row(s): {np.flatnonzero(~h.any(axis=1)).tolist()}")
        if not h.any(axis=0).all():
            raise ValueError(f"zero column(s): {np.flatnonzero(~h.any(axis=0)).tolist()}")
        if h.shape[0] >= h.shape[1]:
            raise ValueError(f"need fewer checks than bits, got {h.shape[0]}x{h.shape[1]}")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)
        if self.layout is not None:
            layout = tuple(int(j) for j in self.layout)
            if len(set(layout)) != len(layout) or not all(0 <= j < h.shape[1] for j in layout):
                raise ValueError(f"layout {layout} is not a list of distinct column indices")
            object.__setattr__(self, "layout", layout)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @cached_property
    def row_support(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(np.flatnonzero(r).tolist()) for r in self.entries)

    @cached_property
    def col_support(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(np.flatnonzero(c).tolist()) for c in self.entries.T)

    def __eq__(self, other):
        return isinstance(other, ParityCheckMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.entries.shape, self.entries.tobytes()))

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        lines += [" ".join(str(int(b)) for b in row) for row in self.entries]
        if self.layout:
            lines.append("# layout: " + " ".join(f"X{j + 1}" for j in self.layout))
        return "\n".join(lines) + "\n"


def _parse_layout(no: int, toks: list[str], source: str) -> tuple[int, ...]:
    out = []
    for t in toks:
        label = t[1:] if t[:1] in ("X", "x") else t
        if not label.isdigit() or int(label) < 1:
            raise MatrixFormatError(no, f"bad bit label {t!r} in layout", source)
        out.append(int(label) - 1)
    return tuple(out)


def parse_matrix(text: str, source: str = "<matrix>") -> ParityCheckMatrix:
    """Dense format: ``m n`` on the first line, then ``m`` rows of ``n`` 0/1 tokens.

    Lines starting with ``#`` are comments, except ``# layout: X5 X6 ...``
    which records a preferred declaration order for schedule construction.
    """
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    layout = None
    for no, toks in lines:
        if toks[:2] == ["#", "layout:"]:
            layout = _parse_layout(no, toks[2:], source)
    lines = [(no, toks) for no, toks in lines if toks and not toks[0].startswith("#")]
    if not lines:
        raise MatrixFormatError(1, "empty matrix file", source)
    no, header = lines[0]
    if len(header) != 2 or not all(t.isdigit() for t in header):
        raise MatrixFormatError(no, "header must be 'm n'", source)
    m, n = int(header[0]), int(header[1])
    body = lines[1:]
    if len(body) != m:
        last = body[-1][0] if body else no
        raise MatrixFormatError(last, f"expected {m} rows, found {len(body)}", source)
    rows = []
    for no, toks in body:
        if len(toks) != n:
            raise MatrixFormatError(no, f"expected {n} entries, found {len(toks)}", source)
        bad = [t for t in toks if t not in ("0", "1")]
        if bad:
            raise MatrixFormatError(no, f"non-binary symbol {bad[0]!r}", source)
        if "1" not in toks:
            raise MatrixFormatError(no, "row has no nonzero entry", source)
        rows.append([int(t) for t in toks])
    h = np.array(rows, dtype=np.uint8)
    empty = np.flatnonzero(~h.any(axis=0))
    if empty.size:
        raise MatrixFormatError(body[0][0], f"column {int(empty[0]) + 1} has no nonzero entry", source)
    try:
        return ParityCheckMatrix(h, layout)
    except ValueError as exc:
        raise MatrixFormatError(no, str(exc), source) from None


def load_matrix(source: str | Path) -> ParityCheckMatrix:
    path = Path(source)
    return parse_matrix(path.read_text(), str(path))


def parse_alist(text: str, source: str = "<alist>") -> ParityCheckMatrix:
    """Read MacKay's alist format (1-based indices, zero padding allowed)."""
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    try:
        n, m = map(int, lines[0][1])
        # line 2 holds max degrees, lines 3-4 the per-column / per-row degrees
        col_deg = list(map(int, lines[2][1]))
        start = 4
        h = np.zeros((m, n), dtype=np.uint8)
        for j in range(n):
            no, toks = lines[start + j]
            idx = [int(t) for t in toks if t != "0"]
            if len(idx) != col_deg[j]:
                raise MatrixFormatError(no, f"column {j + 1} lists {len(idx)} entries, degree {col_deg[j]}", source)
            for i in idx:
                if not 1 <= i <= m:
                    raise MatrixFormatError(no, f"row index {i} out of range", source)
                h[i - 1, j] = 1
    except (IndexError, ValueError) as exc:
        if isinstance(exc, MatrixFormatError):
            raise
        raise MatrixFormatError(len(lines), f"malformed alist: {exc}", source) from None
    return ParityCheckMatrix(h)


def load_alist(source: str | Path) -> ParityCheckMatrix:
    path = Path(source)
    return parse_alist(path.read_text(), str(path))


def to_alist(h: ParityCheckMatrix) -> str:
    cols, rows = h.col_support, h.row_support
    dc, dr = max(map(len, cols)), max(map(len, rows))
    out = [f"{h.cols} {h.rows}", f"{dc} {dr}", " ".join(str(len(c)) for c in cols), " ".join(str(len(r)) for r in rows)]
    out += [" ".join(str(i + 1) for i in c) for c in cols]
    out += [" ".join(str(j + 1) for j in r) for r in rows]
    return "\n".join(out) + "\n"


def bundled_matrix() -> ParityCheckMatrix:
    """The (8, 16) code shipped with the package."""
    text = resources.files("groupkey").joinpath("data/h_8x16.txt").read_text()
    return parse_matrix(text, "h_8x16.txt")


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """Bipartite view: bit node ``j`` touches check ``i`` iff ``H[i, j] == 1``."""

    matrix: ParityCheckMatrix

    @property
    def bit_nodes(self) -> int:
        return self.matrix.cols

    @property
    def check_nodes(self) -> int:
        return self.matrix.rows

    def bit_neighbors(self, j: int) -> tuple[int, ...]:
        return self.matrix.col_support[j]

    def check_neighbors(self, i: int) -> tuple[int, ...]:
        return self.matrix.row_support[i]

    def bit_degree(self, j: int) -> int:
        return len(self.matrix.col_support[j])

    def check_degree(self, i: int) -> int:
        return len(self.matrix.row_support[i])

    @property
    def edges(self) -> list[tuple[int, int]]:
        """``(bit, check)`` pairs."""
        return [(j, i) for i, row in enumerate(self.matrix.row_support) for j in row]


def syndrome(h: ParityCheckMatrix, word: Sequence[int]) -> tuple[int, ...]:
    """``H . word^T`` over GF(2); all zeros iff ``word`` is a codeword."""
    w = np.asarray(word, dtype=np.uint8)
    if w.shape != (h.cols,):
        raise ValueError(f"word length {w.size} does not match {h.cols} columns")
    return tuple(int(b) for b in (h.entries.astype(np.int64) @ w) % 2)


def gf2_rank(a: np.ndarray) -> int:
    m = np.array(a, dtype=np.uint8) % 2
    r = 0
    for c in range(m.shape[1]):
        piv = np.flatnonzero(m[r:, c])
        if piv.size == 0:
            continue
        p = r + piv[0]
        m[[r, p]] = m[[p, r]]
        others = np.flatnonzero(m[:, c])
        others = others[others != r]
        m[others] ^= m[r]
        r += 1
        if r == m.shape[0]:
            break
    return r
