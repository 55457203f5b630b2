import numpy as np
import pytest

from mlhy.crc import CRC4, CRC7, CrcSpec, crc_check, crc_compute


def long_division(bits, width, poly):
    """Remainder of bits(x) * x^width mod (x^width + poly(x)) by integer division."""
    g = (1 << width) | poly
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    v <<= width
    while v.bit_length() > width:
        v ^= g << (v.bit_length() - g.bit_length())
    return [(v >> k) & 1 for k in range(width - 1, -1, -1)]


def test_zero_data():
    assert crc_compute(np.zeros(20, dtype=np.uint8), CRC7).sum() == 0


def test_single_one_is_x7_mod_poly():
    # x^7 mod (x^7 + x^3 + 1) = x^3 + 1
    assert crc_compute([1], CRC7).tolist() == [0, 0, 0, 1, 0, 0, 1]
    assert crc_compute([1], CRC4).tolist() == [0, 0, 1, 1]


@pytest.mark.parametrize("spec", [CRC4, CRC7, CrcSpec(16, 0x1021)])
def test_matches_long_division(spec):
    rng = np.random.default_rng(spec.width)
    for n in (1, 5, 17, 105):
        data = rng.integers(0, 2, n)
        assert crc_compute(data, spec).tolist() == long_division(data, spec.width, spec.poly)


@pytest.mark.parametrize("spec", [CRC4, CRC7])
def test_roundtrip_and_linearity(spec):
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = rng.integers(0, 2, 64).astype(np.uint8)
        b = rng.integers(0, 2, 64).astype(np.uint8)
        assert crc_check(np.concatenate([a, crc_compute(a, spec)]), spec)
        assert np.array_equal(crc_compute(a ^ b, spec), crc_compute(a, spec) ^ crc_compute(b, spec))


def test_detects_single_errors():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 2, 50).astype(np.uint8)
    word = np.concatenate([a, crc_compute(a, CRC7)])
    for k in range(word.size):
        bad = word.copy()
        bad[k] ^= 1
        assert not crc_check(bad, CRC7)


def test_spec_validation():
    with pytest.raises(ValueError):
        CrcSpec(0, 1)
    with pytest.raises(ValueError):
        CrcSpec(4, 0x13)
    with pytest.raises(ValueError):
        crc_compute([0, 2], CRC4)
    assert CRC7.name == "CRC-7(0x9)"
    assert not crc_check([1, 0], CRC7)
