"""Bit-level and varint plumbing shared by the entropy coders and the container.

Bitstreams are MSB-first within each byte and zero-padded to a byte
boundary when flushed.
"""

from __future__ import annotations

from .errors import CorruptStreamError


class BitWriter:
    """Accumulates (value, nbits) fields MSB-first and packs them to bytes."""

    def __init__(self):
        self._parts: list[str] = []
        self._nbits = 0

    def write(self, value: int, nbits: int) -> None:
        if value >> nbits:
            raise ValueError("value does not fit in %d bits" % nbits)
        if nbits:
            self._parts.append(format(value, "0%db" % nbits))
            self._nbits += nbits

    def write_bits_str(self, bits: str) -> None:
        self._parts.append(bits)
        self._nbits += len(bits)

    @property
    def bit_length(self) -> int:
        return self._nbits

    def getvalue(self) -> bytes:
        """Zero-pad to a byte boundary and return the packed bytes."""
        if self._nbits == 0:
            return b""
        bits = "".join(self._parts)
        pad = -len(bits) % 8
        if pad:
            bits += "0" * pad
        n = len(bits) // 8
        return int(bits, 2).to_bytes(n, "big")


class BitReader:
    """MSB-first bit reader over a bytes-like payload."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0          # next byte to pull into the buffer
        self._buf = 0
        self._nbuf = 0         # bits currently in _buf
        self.total_bits = 8 * len(data)

    def _fill(self, need: int) -> None:
        data, pos = self._data, self._pos
        buf, nbuf = self._buf, self._nbuf
        while nbuf < need:
            if pos >= len(data):
                raise CorruptStreamError("corrupt stream: truncated bitstream")
            buf = (buf << 8) | data[pos]
            pos += 1
            nbuf += 8
        self._buf, self._nbuf, self._pos = buf, nbuf, pos

    def read(self, nbits: int) -> int:
        if nbits == 0:
            return 0
        if self._nbuf < nbits:
            self._fill(nbits)
        self._nbuf -= nbits
        out = self._buf >> self._nbuf
        self._buf &= (1 << self._nbuf) - 1
        return out

    def bits_consumed(self) -> int:
        return 8 * self._pos - self._nbuf


def write_uvarint(out: bytearray, value: int) -> None:
    """LEB128 unsigned varint."""
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def read_uvarint(data: bytes, pos: int) -> tuple[int, int]:
    """Returns (value, next_pos); raises on truncation or over-long fields."""
    value = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise CorruptStreamError("corrupt stream: truncated varint")
        b = data[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if not b & 0x80:
            return value, pos
        shift += 7
        if shift > 28:
            raise CorruptStreamError("corrupt stream: varint too long")
