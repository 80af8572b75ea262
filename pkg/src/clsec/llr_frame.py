"""Wire codec for the extended stream unit: payload bytes plus one quantized
20-bit LLR per payload bit.

Frame layout (multi-byte integers little-endian):

    magic        4 bytes   ASCII "CLSF"
    version      1 byte    0x01
    flags        1 byte    bit 0 = LLR block present
    payload_len  2 bytes
    payload      payload_len bytes
    llr block    8*payload_len values of 20 bits each, packed MSB-first
                 into one contiguous bitstring, zero-padded to a byte
                 boundary (present only when flags bit 0 is set)
    crc          4 bytes   CRC-32 (IEEE, reflected 0xEDB88320, init/xorout
                 0xFFFFFFFF) over all preceding bytes

The CRC is an extension beyond a bare soft-value stream: a parser needs a
corruption signal.  LLR values are fixed-point with 7 fractional bits
(LSB = 2^-7), saturating two's complement in [-2^19, 2^19 - 1].
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"CLSF"
VERSION = 0x01
FLAG_LLRS = 0x01

LLR_BITS = 20
LLR_FRAC_BITS = 7
Q_SCALE = 1 << LLR_FRAC_BITS
Q_MIN = -(1 << (LLR_BITS - 1))
Q_MAX = (1 << (LLR_BITS - 1)) - 1
HEADER_LEN = 8
MAX_PAYLOAD = 0xFFFF


class FrameError(Exception):
    """Base class for frame codec failures."""


class BadMagicError(FrameError):
    pass


class UnsupportedVersionError(FrameError):
    pass


class TruncatedStreamError(FrameError):
    pass


class CrcMismatchError(FrameError):
    pass


class NonzeroPaddingError(FrameError):
    pass


class TrailingDataError(FrameError):
    pass


class FrameSizeError(FrameError):
    pass


class LlrDomainError(FrameError):
    pass


@dataclass(frozen=True)
class Frame:
    payload: bytes
    llrs_q: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int32))
    flags: int = FLAG_LLRS

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self.payload == other.payload
            and self.flags == other.flags
            and np.array_equal(self.llrs_q, other.llrs_q)
        )


def quantize_llr(x: float) -> int:
    """round(x * 2^7), ties to even, saturated to the 20-bit range."""
    if not math.isfinite(x):
        raise LlrDomainError(f"LLR must be finite, got {x}")
    q = round(x * Q_SCALE)
    return min(max(q, Q_MIN), Q_MAX)


def dequantize_llr(q: int) -> float:
    if not Q_MIN <= q <= Q_MAX:
        raise LlrDomainError(f"quantized LLR {q} outside [{Q_MIN}, {Q_MAX}]")
    return q / Q_SCALE


def quantize_llrs(llrs: np.ndarray) -> np.ndarray:
    llrs = np.asarray(llrs, dtype=np.float64)
    if not np.all(np.isfinite(llrs)):
        raise LlrDomainError("LLRs must be finite")
    q = np.rint(llrs * Q_SCALE)
    return np.clip(q, Q_MIN, Q_MAX).astype(np.int32)


def dequantize_llrs(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q)
    if q.size and (q.min() < Q_MIN or q.max() > Q_MAX):
        raise LlrDomainError("quantized LLR outside the 20-bit range")
    return q.astype(np.float64) / Q_SCALE


def pack_values(values: np.ndarray) -> bytes:
    """Pack 20-bit two's-complement values MSB-first, zero-padded to a byte."""
    values = np.asarray(values, dtype=np.int64)
    # Shift the 20 significant bits to the top of each big-endian 32-bit
    # word, then keep the first 20 bits of every word.
    shifted = ((values & ((1 << LLR_BITS) - 1)) << (32 - LLR_BITS)).astype(">u4")
    bits = np.unpackbits(shifted.view(np.uint8)).reshape(-1, 32)[:, :LLR_BITS]
    return np.packbits(bits.reshape(-1)).tobytes()


def unpack_values(data: bytes, count: int) -> np.ndarray:
    """Inverse of :func:`pack_values`; trailing pad bits must be zero."""
    need = (count * LLR_BITS + 7) // 8
    if len(data) != need:
        raise TruncatedStreamError(f"LLR block is {len(data)} bytes, expected {need}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    used = count * LLR_BITS
    if np.any(bits[used:]):
        raise NonzeroPaddingError("nonzero pad bits after the LLR block")
    words = np.zeros((count, 32), dtype=np.uint8)
    words[:, :LLR_BITS] = bits[:used].reshape(count, LLR_BITS)
    unsigned = np.packbits(words.reshape(-1)).view(">u4").astype(np.int64)
    unsigned >>= 32 - LLR_BITS
    return np.where(unsigned >= 1 << (LLR_BITS - 1), unsigned - (1 << LLR_BITS), unsigned).astype(np.int32)


def encode_frame(frame: Frame) -> bytes:
    if len(frame.payload) > MAX_PAYLOAD:
        raise FrameSizeError(f"payload of {len(frame.payload)} bytes exceeds {MAX_PAYLOAD}")
    has_llrs = bool(frame.flags & FLAG_LLRS)
    expected = 8 * len(frame.payload) if has_llrs else 0
    if len(frame.llrs_q) != expected:
        raise FrameSizeError(
            f"frame with flags {frame.flags:#04x} needs {expected} LLR values, got {len(frame.llrs_q)}"
        )
    out = bytearray()
    out += MAGIC
    out.append(VERSION)
    out.append(frame.flags & 0xFF)
    out += len(frame.payload).to_bytes(2, "little")
    out += frame.payload
    if has_llrs:
        if len(frame.llrs_q) and (frame.llrs_q.min() < Q_MIN or frame.llrs_q.max() > Q_MAX):
            raise LlrDomainError("quantized LLR outside the 20-bit range")
        out += pack_values(frame.llrs_q)
    out += (zlib.crc32(bytes(out)) & 0xFFFFFFFF).to_bytes(4, "little")
    return bytes(out)


def frame_size(payload_len: int, has_llrs: bool = True) -> int:
    """Total encoded size: 12 + payload_len + ceil(160 * payload_len / 8)."""
    body = (160 * payload_len + 7) // 8 if has_llrs else 0
    return HEADER_LEN + payload_len + body + 4


def _decode_at(data: bytes, offset: int) -> tuple[Frame, int]:
    view = data[offset:]
    if len(view) < HEADER_LEN:
        raise TruncatedStreamError(f"{len(view)} bytes is too short for a frame header")
    if view[:4] != MAGIC:
        raise BadMagicError(f"bad magic {view[:4]!r}")
    if view[4] != VERSION:
        raise UnsupportedVersionError(f"unsupported version {view[4]:#04x}")
    flags = view[5]
    payload_len = int.from_bytes(view[6:8], "little")
    total = frame_size(payload_len, bool(flags & FLAG_LLRS))
    if len(view) < total:
        raise TruncatedStreamError(f"frame needs {total} bytes, stream has {len(view)}")
    body = view[:total]
    crc_stored = int.from_bytes(body[-4:], "little")
    crc_actual = zlib.crc32(body[:-4]) & 0xFFFFFFFF
    if crc_stored != crc_actual:
        raise CrcMismatchError(f"CRC mismatch: stored {crc_stored:#010x}, computed {crc_actual:#010x}")
    payload = body[HEADER_LEN : HEADER_LEN + payload_len]
    if flags & FLAG_LLRS:
        llrs_q = unpack_values(body[HEADER_LEN + payload_len : -4], 8 * payload_len)
    else:
        llrs_q = np.zeros(0, dtype=np.int32)
    return Frame(payload=payload, llrs_q=llrs_q, flags=flags), offset + total


def decode_frame(data: bytes) -> Frame:
    """Decode exactly one frame; extra bytes after it are an error."""
    frame, end = _decode_at(data, 0)
    if end != len(data):
        raise TrailingDataError(f"{len(data) - end} unexpected bytes after the frame")
    return frame


def decode_stream(data: bytes) -> list[Frame]:
    """Decode a concatenation of frames (the `.clsf` file format)."""
    frames = []
    offset = 0
    while offset < len(data):
        frame, offset = _decode_at(data, offset)
        frames.append(frame)
    return frames
