"""Two-pass encoder over an encoding stopping set, and the trial-search decoder."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .codeword import Codeword
from .matrix import syndrome
from .stopping_set import EncodingStoppingSet


class DecodeFailure(Exception):
    """No candidate assignment re-encodes to a codeword consistent with the received word."""

    def __init__(self, syndrome: tuple[int, ...], trials: int):
        super().__init__(f"unrecoverable word (syndrome {''.join(map(str, syndrome))}, {trials} trials)")
        self.syndrome = syndrome
        self.trials = trials


@dataclass(frozen=True)
class FirstPass:
    word: tuple[int, ...]
    key_checks: tuple[int, ...]


def _check_info(schedule: EncodingStoppingSet, info: Sequence[int]) -> list[int]:
    bits = [int(b) for b in info]
    if len(bits) != schedule.k:
        raise ValueError(f"expected {schedule.k} information bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("information bits must be 0 or 1")
    return bits


def first_pass(
    schedule: EncodingStoppingSet,
    info: Sequence[int],
    reevaluated: Sequence[int] | None = None,
) -> FirstPass:
    """Propagate parity bits with the reevaluated bits held at ``reevaluated`` (zeros by default)."""
    word = [0] * schedule.n
    for b, v in zip(schedule.info_bits, _check_info(schedule, info)):
        word[b] = v
    for b, v in zip(schedule.reevaluated_bits, reevaluated or [0] * schedule.r):
        word[b] = int(v)
    schedule.propagate(word)
    return FirstPass(tuple(word), schedule.key_check_values(word))


def encode(schedule: EncodingStoppingSet, info: Sequence[int]) -> Codeword:
    p1 = first_pass(schedule, info)
    inv = schedule.reevaluation_inverse
    if inv is None:
        raise ValueError("schedule has a singular reevaluation system")
    fix = (inv.astype(np.int64) @ np.array(p1.key_checks, dtype=np.int64)) % 2
    word = list(p1.word)
    for b, v in zip(schedule.reevaluated_bits, fix):
        word[b] = int(v)
    schedule.propagate(word)
    return Codeword(tuple(word), schedule.transmit_order)


def info_of(schedule: EncodingStoppingSet, word: Codeword | Sequence[int]) -> tuple[int, ...]:
    bits = word.bits if isinstance(word, Codeword) else tuple(word)
    return tuple(bits[b] for b in schedule.info_bits)


@dataclass(frozen=True)
class DecodeOutcome:
    corrected: Codeword
    info: tuple[int, ...]
    trials: int
    # "clean", "parity" (one parity bit absorbed), "reevaluated", or "information"
    case: str
    flipped: tuple[int, ...]

    @property
    def correction_trials(self) -> int:
        return self.trials - 1


def candidates(k: int, r: int, max_info_flips: int | None = None) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Flip hypotheses ``(info positions, reevaluated positions)`` in decode order."""
    e = k if max_info_flips is None else min(max_info_flips, k)
    masks = [tuple(j for j in range(r) if m >> j & 1) for m in range(1 << r)]
    yield (), ()
    for rm in masks[1:]:
        yield (), rm
    for size in range(1, e + 1):
        # reevaluated bits as received first, so a lone info error is found
        # before any heavier hypothesis of the same info size
        for rm in masks:
            for combo in itertools.combinations(range(k), size):
                yield combo, rm


def decode(
    schedule: EncodingStoppingSet,
    received: Codeword | Sequence[int],
    *,
    max_info_flips: int | None = None,
) -> DecodeOutcome:
    """Search flip hypotheses on the declared bits until one re-encodes consistently.

    A hypothesis is accepted when pass-1 propagation of its declared bits
    leaves every key check at zero (so the whole word is a codeword) and the
    recomputed parity bits agree with the received ones.  The unflipped
    hypothesis may disagree in one parity bit, which is then taken as the
    error.  ``received`` is either a :class:`Codeword` or wire-order bits.
    """
    if isinstance(received, Codeword):
        bits = list(received.bits)
    else:
        wire = [int(b) for b in received]
        bits = list(Codeword.from_wire(wire, schedule.transmit_order).bits)
    if len(bits) != schedule.n:
        raise ValueError(f"expected {schedule.n} bits, got {len(bits)}")
    info_pos, re_pos, parity = schedule.info_bits, schedule.reevaluated_bits, schedule.parity_bits

    trials = 0
    for info_flips, re_flips in candidates(schedule.k, schedule.r, max_info_flips):
        trials += 1
        word = bits.copy()
        flipped = tuple(info_pos[i] for i in info_flips) + tuple(re_pos[j] for j in re_flips)
        for b in flipped:
            word[b] ^= 1
        schedule.propagate(word)
        if any(schedule.key_check_values(word)):
            continue
        mismatched = tuple(b for b in parity if word[b] != bits[b])
        if flipped and mismatched:
            continue
        if len(mismatched) > 1:
            continue
        if not flipped:
            case = "parity" if mismatched else "clean"
        else:
            case = "information" if info_flips else "reevaluated"
        corrected = Codeword(tuple(word), schedule.transmit_order)
        return DecodeOutcome(corrected, info_of(schedule, word), trials, case, flipped + mismatched)
    raise DecodeFailure(syndrome(schedule.matrix, bits), trials)


@dataclass(frozen=True)
class TrialBound:
    enumeration: int
    closed_form: int | None


def trial_bound(k: int, r: int, e: int) -> TrialBound:
    """Candidates tested before every ``e``-info-bit hypothesis is exhausted.

    ``closed_form`` is the quadratic ``k^2 - k + 2``, reported only for ``e == k``.
    """
    if not 0 <= e <= k or r < 0:
        raise ValueError(f"need 0 <= e <= k and r >= 0, got k={k} r={r} e={e}")
    total = 1 + (2**r - 1) + sum(comb(k, i) for i in range(1, e + 1)) * 2**r
    return TrialBound(total, k * k - k + 2 if e == k else None)
