from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


def bits_from_string(s: str) -> tuple[int, ...]:
    s = s.strip()
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"expected a non-empty 0/1 string, got {s!r}")
    return tuple(int(c) for c in s)


def bits_to_string(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


@dataclass(frozen=True)
class Codeword:
    """An ``n``-bit word indexed by bit label, plus the order it goes on the wire.

    ``wire_bits[t] == bits[transmit_order[t]]``.
    """

    bits: tuple[int, ...]
    transmit_order: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.transmit_order) != list(range(len(self.bits))):
            raise ValueError("transmit_order must be a permutation of the bit labels")

    @property
    def wire_bits(self) -> tuple[int, ...]:
        return tuple(self.bits[j] for j in self.transmit_order)

    @classmethod
    def from_wire(cls, wire: Sequence[int], transmit_order: Sequence[int]) -> "Codeword":
        if len(wire) != len(transmit_order):
            raise ValueError(f"expected {len(transmit_order)} wire bits, got {len(wire)}")
        bits = [0] * len(wire)
        for t, j in enumerate(transmit_order):
            bits[j] = int(wire[t])
        return cls(tuple(bits), tuple(transmit_order))

    def with_wire(self, wire: Sequence[int]) -> "Codeword":
        return Codeword.from_wire(wire, self.transmit_order)

    def __str__(self) -> str:
        return bits_to_string(self.wire_bits)
