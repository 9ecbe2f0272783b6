"""Little helpers for the canonical little-endian wire encodings."""

from __future__ import annotations

import struct


class DecodeError(ValueError):
    """Bytes that do not parse as the structure they claim to be."""


class ByteReader:
    """Sequential reader that treats truncation as DecodeError."""

    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def read(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise DecodeError(f"need {n} bytes at offset {self.pos}, have {len(self.raw) - self.pos}")
        out = self.raw[self.pos : self.pos + n]
        self.pos += n
        return out

    def u16(self) -> int:
        return struct.unpack("<H", self.read(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.read(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.read(8))[0]

    def remaining(self) -> int:
        return len(self.raw) - self.pos

    def expect_end(self) -> None:
        if self.pos != len(self.raw):
            raise DecodeError(f"{len(self.raw) - self.pos} trailing bytes")


def u16(n: int) -> bytes:
    return struct.pack("<H", n)


def u32(n: int) -> bytes:
    return struct.pack("<I", n)


def u64(n: int) -> bytes:
    return struct.pack("<Q", n)
