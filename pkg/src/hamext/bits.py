"""Finite 0/1 words.

A bit string is a 1-D numpy array of uint8 values in {0, 1}; index 0 is
the first position. Helpers here coerce text/python sequences to that
form and read/write the two on-disk formats:

* text: ASCII '0'/'1', one string per line;
* packed: an 8-byte little-endian bit count, then the bits packed
  little-endian within each byte.

Both formats round-trip bit-exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, DomainError


def as_bits(x) -> np.ndarray:
    """Coerce a str / iterable / ndarray to a uint8 array of 0s and 1s."""
    if isinstance(x, np.ndarray) and x.dtype == np.uint8:
        bits = x
    elif isinstance(x, str):
        if x.strip("01"):
            raise DomainError(f"bit string may contain only 0/1, got {x!r}")
        bits = np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        bits = np.asarray(list(x), dtype=np.uint8)
    if bits.ndim != 1:
        raise DomainError("bit strings are one-dimensional")
    if bits.size and bits.max() > 1:
        raise DomainError("bit values must be 0 or 1")
    return bits


def to_text(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in bits)


def bits_to_mask(bits: np.ndarray) -> int:
    """Pack bits into a python int, position i at bit i (LSB first)."""
    mask = 0
    for i in np.flatnonzero(bits):
        mask |= 1 << int(i)
    return mask


def mask_to_bits(mask: int, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.uint8)
    i = 0
    while mask:
        if mask & 1:
            out[i] = 1
        mask >>= 1
        i += 1
    if i > length:
        raise DimensionError(f"mask needs {i} positions, only {length} given")
    return out


def hamming_weight(bits: np.ndarray) -> int:
    return int(np.count_nonzero(bits))


def write_text_bits(path, strings) -> None:
    """Write bit strings as ASCII lines (one string per line)."""
    with open(path, "w", encoding="ascii") as fh:
        for s in strings:
            fh.write(to_text(as_bits(s)))
            fh.write("\n")


def read_text_bits(path) -> list[np.ndarray]:
    out = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(as_bits(line))
    return out


_HEADER_BYTES = 8


def write_packed_bits(path, bits) -> None:
    """Write a single bit string: 8-byte LE length header + packed bits."""
    bits = as_bits(bits)
    with open(path, "wb") as fh:
        fh.write(len(bits).to_bytes(_HEADER_BYTES, "little"))
        fh.write(np.packbits(bits, bitorder="little").tobytes())


def read_packed_bits(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER_BYTES)
        if len(header) != _HEADER_BYTES:
            raise DomainError(f"{path}: truncated packed-bit header")
        length = int.from_bytes(header, "little")
        payload = fh.read()
    need = (length + 7) // 8
    if len(payload) < need:
        raise DomainError(f"{path}: expected {need} payload bytes, got {len(payload)}")
    raw = np.frombuffer(payload[:need], dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length].astype(np.uint8)
