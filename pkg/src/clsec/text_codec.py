"""Byte/bit/token plumbing shared by the whole pipeline.

Payloads are raw bytes end to end; nothing here ever decodes text, so a
corrupted byte cannot fail mid-pipeline.  Bit order is MSB-first within each
byte, globally (same convention as the frame packer).  A "bit sequence" is a
numpy uint8 array of 0/1 values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DELIMITER = 0x20


@dataclass(frozen=True)
class TokenSpan:
    """A token's raw bytes plus its byte offsets into the payload."""

    data: bytes
    start: int  # inclusive
    end: int  # exclusive


def tokenize(payload: bytes) -> tuple[list[TokenSpan], int]:
    """Split on single 0x20 delimiters.

    Zero-length segments (consecutive delimiters, leading/trailing delimiter)
    are never emitted as spans; they are counted and returned as the second
    element.  Tokens plus the delimiter gaps between them reconstruct the
    payload byte for byte.
    """
    spans: list[TokenSpan] = []
    skipped = 0
    if not payload:
        return spans, skipped
    start = 0
    n = len(payload)
    for i in range(n + 1):
        if i == n or payload[i] == DELIMITER:
            if i > start:
                spans.append(TokenSpan(payload[start:i], start, i))
            else:
                skipped += 1
            start = i + 1
    return spans, skipped


def bytes_to_bits(payload: bytes) -> np.ndarray:
    """MSB-first bit expansion: bit i = bit (7 - i % 8) of byte i // 8."""
    return np.unpackbits(np.frombuffer(payload, dtype=np.uint8))


def bits_to_bytes(bits: np.ndarray) -> bytes:
    """Inverse of :func:`bytes_to_bits`; length must be a multiple of 8."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8 != 0:
        raise ValueError(f"bit count {bits.size} is not a multiple of 8")
    return np.packbits(bits).tobytes()
