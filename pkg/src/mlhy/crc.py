"""Cyclic redundancy checks over bit sequences (MSB first, no reflection)."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CrcSpec:
    """Generator polynomial without its leading ``x^width`` term.

    ``poly=0x09`` with ``width=7`` is ``x^7 + x^3 + 1``.
    """

    width: int
    poly: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("CRC width must be positive")
        if not 0 <= self.poly < (1 << self.width):
            raise ValueError("polynomial does not fit the CRC width")

    @property
    def name(self) -> str:
        return f"CRC-{self.width}(0x{self.poly:X})"

    def to_dict(self) -> dict:
        return {"width": self.width, "poly": self.poly}


CRC7 = CrcSpec(7, 0x09)
CRC4 = CrcSpec(4, 0x3)


def crc_compute(data, spec: CrcSpec) -> np.ndarray:
    """Remainder of ``data(x) * x^width`` modulo the generator polynomial.

    Zero initial register, no final XOR. The first bit of ``data`` is the
    highest-order coefficient; the result is returned the same way.
    """
    bits = np.asarray(data, dtype=np.int64).ravel()
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ValueError("data must be binary")
    top = 1 << (spec.width - 1)
    mask = (1 << spec.width) - 1
    reg = 0
    for b in bits:
        fb = ((reg & top) != 0) ^ int(b)
        reg = (reg << 1) & mask
        if fb:
            reg ^= spec.poly
    return np.array([(reg >> k) & 1 for k in range(spec.width - 1, -1, -1)], dtype=np.uint8)


def crc_check(word, spec: CrcSpec) -> bool:
    """True if the trailing ``spec.width`` bits of ``word`` are the CRC of the rest."""
    word = np.asarray(word, dtype=np.uint8).ravel()
    if word.size < spec.width:
        return False
    return bool(np.array_equal(crc_compute(word[: -spec.width], spec), word[-spec.width:]))
