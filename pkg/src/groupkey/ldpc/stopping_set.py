"""Pseudo-tree encoding schedules ("encoding stopping sets").

Declared bits (information bits plus reevaluated bits) sit at level 0.  Each
parity bit is the XOR of the other bits of one check node, evaluated once all
of those are known; its level is one more than its deepest input.  Check nodes
never used to derive a parity bit become key check nodes, and the reevaluated
bits are solved from them so the whole word satisfies ``H c = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .matrix import ParityCheckMatrix, TannerGraph, gf2_rank
from .oracle import check_full_rank

DEFAULT_MAX_BIT_DEGREE = 3


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class ParityStep:
    bit: int
    check: int
    inputs: tuple[int, ...]
    level: int


def _gf2_inverse(a: np.ndarray) -> np.ndarray | None:
    k = a.shape[0]
    aug = np.concatenate([a % 2, np.eye(k, dtype=np.uint8)], axis=1).astype(np.uint8)
    for c in range(k):
        hits = np.flatnonzero(aug[c:, c])
        if hits.size == 0:
            return None
        p = c + int(hits[0])
        aug[[c, p]] = aug[[p, c]]
        rows = np.flatnonzero(aug[:, c])
        rows = rows[rows != c]
        aug[rows] ^= aug[c]
    return aug[:, k:]


@dataclass(frozen=True, eq=False)
class EncodingStoppingSet:
    matrix: ParityCheckMatrix
    levels: tuple[tuple[ParityStep, ...], ...]
    info_bits: tuple[int, ...]
    reevaluated_bits: tuple[int, ...]
    key_check_nodes: tuple[int, ...]
    max_bit_degree: int = DEFAULT_MAX_BIT_DEGREE

    @cached_property
    def steps(self) -> tuple[ParityStep, ...]:
        return tuple(s for level in self.levels for s in level)

    @property
    def parity_bits(self) -> tuple[int, ...]:
        return tuple(s.bit for s in self.steps)

    @property
    def transmit_order(self) -> tuple[int, ...]:
        return self.info_bits + self.reevaluated_bits + self.parity_bits

    @property
    def k(self) -> int:
        return len(self.info_bits)

    @property
    def r(self) -> int:
        return len(self.reevaluated_bits)

    @property
    def n(self) -> int:
        return self.matrix.cols

    @cached_property
    def reevaluation_matrix(self) -> np.ndarray:
        """``E[c, j]``: how reevaluated bit ``j`` alone moves key check ``c`` after pass 1."""
        e = np.zeros((self.r, self.r), dtype=np.uint8)
        for j, bit in enumerate(self.reevaluated_bits):
            word = [0] * self.n
            word[bit] = 1
            self.propagate(word)
            e[:, j] = self.key_check_values(word)
        return e

    @cached_property
    def reevaluation_inverse(self) -> np.ndarray | None:
        return _gf2_inverse(self.reevaluation_matrix)

    @property
    def solvable(self) -> bool:
        return self.reevaluation_inverse is not None

    def propagate(self, word: list[int]) -> list[int]:
        """Fill every parity bit of ``word`` in place from the declared bits."""
        for step in self.steps:
            v = 0
            for j in step.inputs:
                v ^= word[j]
            word[step.bit] = v
        return word

    def key_check_values(self, word: Sequence[int]) -> tuple[int, ...]:
        rows = self.matrix.row_support
        out = []
        for c in self.key_check_nodes:
            v = 0
            for j in rows[c]:
                v ^= word[j]
            out.append(v)
        return tuple(out)

    def validate(self) -> None:
        """Raise :class:`ConstructionError` unless every schedule invariant holds."""
        n, h = self.n, self.matrix
        declared = set(self.info_bits) | set(self.reevaluated_bits)
        if len(declared) != self.k + self.r:
            raise ConstructionError("declared bits repeat")
        if sorted(self.transmit_order) != list(range(n)):
            raise ConstructionError("schedule does not cover every bit exactly once")
        if self.k != h.cols - h.rows:
            raise ConstructionError(f"{self.k} information bits, expected {h.cols - h.rows}")
        if len(self.key_check_nodes) != self.r:
            raise ConstructionError("reevaluated bits and key check nodes differ in number")
        used = {s.check for s in self.steps}
        if used & set(self.key_check_nodes) or len(used) != len(self.steps):
            raise ConstructionError("a check node is used twice")
        known = {b: 0 for b in declared}
        for level in self.levels:
            for s in level:
                if set(s.inputs) | {s.bit} != set(h.row_support[s.check]):
                    raise ConstructionError(f"step for bit {s.bit} does not match check {s.check}")
                missing = [j for j in s.inputs if j not in known or known[j] >= s.level]
                if missing:
                    raise ConstructionError(f"bit {s.bit} needs {missing} before level {s.level}")
            for s in level:
                known[s.bit] = s.level
        for b in self.reevaluated_bits + self.parity_bits:
            if len(h.col_support[b]) > self.max_bit_degree:
                raise ConstructionError(f"bit {b} has degree above {self.max_bit_degree}")
        if not self.solvable:
            raise ConstructionError("reevaluation system is singular over GF(2)")


def _peel(
    h: ParityCheckMatrix,
    declared: Iterable[int],
    max_bit_degree: int,
) -> tuple[list[ParityStep], set[int]]:
    """Wavefront peeling: each round, every check with one unknown bit resolves it."""
    rows = h.row_support
    degree = [len(c) for c in h.col_support]
    level = {b: 0 for b in declared}
    used: set[int] = set()
    steps: list[ParityStep] = []
    while True:
        ready: dict[int, int] = {}
        for i, row in enumerate(rows):
            if i in used:
                continue
            unknown = [j for j in row if j not in level]
            if len(unknown) == 1 and degree[unknown[0]] <= max_bit_degree and unknown[0] not in ready:
                ready[unknown[0]] = i
        if not ready:
            return steps, used
        for bit, i in sorted(ready.items(), key=lambda t: t[1]):
            inputs = tuple(j for j in rows[i] if j != bit)
            steps.append(ParityStep(bit, i, inputs, 1 + max((level[j] for j in inputs), default=0)))
            used.add(i)
        for s in steps[-len(ready):]:
            level[s.bit] = s.level


def _group_levels(steps: list[ParityStep]) -> tuple[tuple[ParityStep, ...], ...]:
    depth = max((s.level for s in steps), default=0)
    return tuple(tuple(s for s in steps if s.level == lv) for lv in range(1, depth + 1))


def stopping_set_from_declared(
    matrix: ParityCheckMatrix,
    info_bits: Sequence[int],
    reevaluated_bits: Sequence[int],
    max_bit_degree: int = DEFAULT_MAX_BIT_DEGREE,
    *,
    require_solvable: bool = True,
) -> EncodingStoppingSet:
    """Schedule obtained by peeling with the given bits declared.

    With ``require_solvable=False`` a schedule whose reevaluation system is
    singular is still returned, which is enough to run a first encoding pass.
    """
    declared = list(info_bits) + list(reevaluated_bits)
    steps, used = _peel(matrix, declared, max_bit_degree)
    resolved = set(declared) | {s.bit for s in steps}
    if len(resolved) != matrix.cols:
        missing = sorted(set(range(matrix.cols)) - resolved)
        raise ConstructionError(f"peeling stalls with bits {missing} undetermined")
    keys = tuple(i for i in range(matrix.rows) if i not in used)
    ess = EncodingStoppingSet(
        matrix, _group_levels(steps), tuple(info_bits), tuple(reevaluated_bits), keys, max_bit_degree
    )
    if require_solvable:
        ess.validate()
    return ess


def _choose_declaration(
    h: ParityCheckMatrix, known: set[int], used: set[int], max_bit_degree: int
) -> int:
    degree = [len(c) for c in h.col_support]
    gain = {j: 0 for j in range(h.cols) if j not in known}
    for i, row in enumerate(h.row_support):
        if i in used:
            continue
        unknown = [j for j in row if j not in known]
        if len(unknown) == 2:
            a, b = unknown
            if degree[b] <= max_bit_degree:
                gain[a] += 1
            if degree[a] <= max_bit_degree:
                gain[b] += 1
    # most checks unlocked first; then the heavier bit, since it makes a worse parity bit
    return max(gain, key=lambda j: (gain[j], degree[j], -j))


def build_stopping_set(
    graph: TannerGraph | ParityCheckMatrix,
    max_bit_degree: int = DEFAULT_MAX_BIT_DEGREE,
    *,
    declare: Sequence[int] | None = None,
) -> EncodingStoppingSet:
    """Greedy schedule construction.

    Bits in ``declare`` (default: the matrix's ``layout``, if any) are
    declared up front, in order.  Then peel while some check has a single
    undetermined bit; when stuck, declare the bit that unlocks the most
    checks.  Among the declared bits, the most recently declared independent
    ones become reevaluated bits, as many as there are unused (key) checks.
    """
    h = graph.matrix if isinstance(graph, TannerGraph) else graph
    check_full_rank(h)
    if declare is None:
        declare = h.layout or ()
    seeded = bool(declare)
    degree = [len(c) for c in h.col_support]
    declared = list(dict.fromkeys(int(j) for j in declare))
    if not all(0 <= j < h.cols for j in declared):
        raise ConstructionError(f"declared bits {declared} out of range")
    declared += [j for j in range(h.cols) if degree[j] > max_bit_degree and j not in declared]
    while True:
        steps, used = _peel(h, declared, max_bit_degree)
        known = set(declared) | {s.bit for s in steps}
        if len(known) == h.cols:
            break
        declared.append(_choose_declaration(h, known, used, max_bit_degree))

    keys = [i for i in range(h.rows) if i not in used]
    probe = EncodingStoppingSet(h, _group_levels(steps), tuple(declared), (), tuple(keys), max_bit_degree)
    chosen: list[int] = []
    effects: list[tuple[int, ...]] = []
    for b in reversed(declared):
        if len(chosen) == len(keys):
            break
        if degree[b] > max_bit_degree:
            continue
        word = [0] * h.cols
        word[b] = 1
        eff = probe.key_check_values(probe.propagate(word))
        if gf2_rank(np.array(effects + [eff], dtype=np.uint8).reshape(-1, len(keys))) > len(effects):
            chosen.append(b)
            effects.append(eff)
    if len(chosen) < len(keys):
        raise ConstructionError(
            f"only {len(chosen)} independent reevaluated bits for {len(keys)} key checks "
            f"under degree bound {max_bit_degree}"
        )
    if seeded:
        # keep the caller's ordering on the wire
        info = [b for b in declared if b not in chosen]
        reeval = [b for b in declared if b in chosen]
    else:
        info, reeval = sorted(set(declared) - set(chosen)), sorted(chosen)
    return stopping_set_from_declared(h, info, reeval, max_bit_degree)
