"""Seeded bit-flip channel.

Flip decisions come from Python's ``random.Random`` (MT19937).  For the
binary symmetric channel each wire bit draws ``getrandbits(53)`` and flips
when ``draw * den < num * 2**53`` for ``p = num/den``, so a given seed and
probability give the same flip set in any implementation of MT19937.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

from .ldpc.codeword import Codeword

PRNG_ALGORITHM = "mt19937/getrandbits53-threshold"

Mode = Literal["bsc", "explicit", "single"]
MODES: tuple[Mode, ...] = ("bsc", "explicit", "single")


class ChannelError(ValueError):
    pass


def _probability(p: str | int | float | Fraction) -> Fraction:
    if isinstance(p, float):
        # go through the shortest decimal repr, not the binary expansion
        p = repr(p)
    try:
        q = Fraction(p)
    except (ValueError, ZeroDivisionError) as exc:
        raise ChannelError(f"bad flip probability {p!r}") from exc
    if not 0 <= q <= 1:
        raise ChannelError(f"flip probability {q} outside [0, 1]")
    return q


@dataclass(frozen=True)
class ChannelModel:
    """``bsc`` flips each bit independently; ``explicit`` flips ``positions``
    (wire order) of every word; ``single`` flips one uniformly chosen bit in
    every ``block``-bit block."""

    mode: Mode = "bsc"
    flip_probability: Fraction = Fraction(0)
    seed: int = 0
    positions: tuple[int, ...] = ()
    block: int = 16

    def __post_init__(self):
        if self.mode not in MODES:
            raise ChannelError(f"unknown channel mode {self.mode!r}")
        object.__setattr__(self, "flip_probability", _probability(self.flip_probability))
        object.__setattr__(self, "positions", tuple(sorted(set(int(j) for j in self.positions))))
        if any(j < 0 for j in self.positions):
            raise ChannelError("negative flip position")
        if self.block < 1:
            raise ChannelError("block length must be positive")

    @classmethod
    def noiseless(cls) -> "ChannelModel":
        return cls("bsc", Fraction(0))

    def to_dict(self) -> dict:
        out: dict[str, object] = {"mode": self.mode, "seed": self.seed, "algorithm": PRNG_ALGORITHM}
        if self.mode == "bsc":
            out["probability"] = str(self.flip_probability)
        elif self.mode == "explicit":
            out["positions"] = list(self.positions)
        else:
            out["block"] = self.block
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ChannelModel":
        mode = doc.get("mode", "bsc")
        return cls(
            mode,
            _probability(doc.get("probability", "0")),
            int(doc.get("seed", 0)),
            tuple(doc.get("positions", ())),
            int(doc.get("block", 16)),
        )


def flip_positions(n: int, model: ChannelModel, index: int = 0) -> tuple[int, ...]:
    """Wire positions flipped in an ``n``-bit transmission numbered ``index``."""
    if model.mode == "explicit":
        bad = [j for j in model.positions if j >= n]
        if bad:
            raise ChannelError(f"flip position {bad[0]} outside a {n}-bit word")
        return model.positions
    rng = random.Random(model.seed ^ index)
    if model.mode == "single":
        return tuple(start + rng.randrange(min(model.block, n - start)) for start in range(0, n, model.block))
    p = model.flip_probability
    if p == 0:
        return ()
    num, den = p.numerator << 53, p.denominator
    return tuple(j for j in range(n) if rng.getrandbits(53) * den < num)


def transmit_bits(
    bits: Sequence[int], model: ChannelModel, index: int = 0
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    flips = flip_positions(len(bits), model, index)
    out = [int(b) for b in bits]
    for j in flips:
        out[j] ^= 1
    return tuple(out), flips


def transmit(word: Codeword, model: ChannelModel, index: int = 0) -> tuple[Codeword, tuple[int, ...]]:
    """Send ``word`` over the channel; returns the received word and the flipped wire positions."""
    wire, flips = transmit_bits(word.wire_bits, model, index)
    return word.with_wire(wire), flips
