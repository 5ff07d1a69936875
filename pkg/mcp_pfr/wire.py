"""Bit-exact framing for queries, answers and errors.

Frame:   u32 payload length | u8 type | payload          (little-endian)
QUERY:   u8 version, u8 p, u8 m, u16 K, u32 L, u32 S, u32 count,
         per request u16 terms, per term u32 layer + K x u16 element
ANSWER:  u32 count, then count x S x u16 element
ERROR:   u16 code, u16 length, UTF-8 message
"""

from __future__ import annotations

import struct

import galois
import numpy as np

from mcp_pfr.config import DEFAULT_SETTINGS
from mcp_pfr.errors import ValidationError, WireError
from mcp_pfr.messages import Answer, Query, Request

VERSION = 1
QUERY = 0x01
ANSWER = 0x02
ERROR = 0x03
MESSAGE_TYPES = (QUERY, ANSWER, ERROR)

FRAME_HEADER = struct.Struct("<IB")
_QUERY_HEADER = struct.Struct("<BBBHIII")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_ERROR_HEADER = struct.Struct("<HH")


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

def encode_frame(msg_type: int, payload: bytes) -> bytes:
    return FRAME_HEADER.pack(len(payload), msg_type) + payload


def decode_frame(data: bytes, max_frame: int | None = None) -> tuple[int, bytes]:
    """Split one complete frame into (type, payload)."""
    max_frame = DEFAULT_SETTINGS.max_frame if max_frame is None else max_frame
    if len(data) < FRAME_HEADER.size:
        raise WireError(WireError.TRUNCATED, "frame shorter than its header")
    length, msg_type = FRAME_HEADER.unpack_from(data)
    if msg_type not in MESSAGE_TYPES:
        raise WireError(WireError.BAD_MAGIC, f"unknown message type 0x{msg_type:02x}")
    if length > max_frame:
        raise WireError(WireError.OVERSIZED, f"payload of {length} bytes exceeds {max_frame}")
    end = FRAME_HEADER.size + length
    if len(data) < end:
        raise WireError(WireError.TRUNCATED, f"frame declares {length} payload bytes, has {len(data) - FRAME_HEADER.size}")
    if len(data) > end:
        raise WireError(WireError.TRAILING_BYTES, f"{len(data) - end} bytes after the frame")
    return msg_type, bytes(data[FRAME_HEADER.size:end])


def _expect(data: bytes, msg_type: int) -> bytes:
    got, payload = decode_frame(data)
    if got == ERROR and msg_type != ERROR:
        code, message = decode_error(data)
        raise WireError(code, f"peer reported error {code}: {message}")
    if got != msg_type:
        raise WireError(WireError.BAD_MAGIC, f"expected message type 0x{msg_type:02x}, got 0x{got:02x}")
    return payload


class _Reader:
    def __init__(self, payload: bytes):
        self.buf = memoryview(payload)
        self.pos = 0

    def take(self, fmt: struct.Struct) -> tuple:
        if self.pos + fmt.size > len(self.buf):
            raise WireError(WireError.TRUNCATED, f"payload ends at byte {len(self.buf)}, need {self.pos + fmt.size}")
        values = fmt.unpack_from(self.buf, self.pos)
        self.pos += fmt.size
        return values

    def elements(self, count: int, q: int) -> np.ndarray:
        if count == 0:
            return np.zeros(0, dtype=np.int64)
        size = 2 * count
        if self.pos + size > len(self.buf):
            raise WireError(WireError.TRUNCATED, f"payload ends at byte {len(self.buf)}, need {self.pos + size}")
        arr = np.frombuffer(self.buf, dtype="<u2", count=count, offset=self.pos).astype(np.int64)
        self.pos += size
        if arr.size and arr.max() >= q:
            raise WireError(WireError.ELEMENT_OUT_OF_FIELD, f"element {int(arr.max())} out of field GF({q})")
        return arr

    def finish(self) -> None:
        if self.pos != len(self.buf):
            raise WireError(WireError.TRAILING_BYTES, f"{len(self.buf) - self.pos} unread payload bytes")


# ---------------------------------------------------------------------------
# QUERY
# ---------------------------------------------------------------------------

def encode_query(query: Query) -> bytes:
    if query.p > 0xFF or query.m > 0xFF or query.K > 0xFFFF:
        raise ValidationError(f"GF({query.p}^{query.m}) with K={query.K} does not fit the query header")
    parts = [_QUERY_HEADER.pack(VERSION, query.p, query.m, query.K, query.L, query.S, len(query.requests))]
    for r in query.requests:
        parts.append(_U16.pack(len(r.layers)))
        for layer, coeff in r.terms:
            parts.append(_U32.pack(layer))
            parts.append(np.asarray(coeff, dtype="<u2").tobytes())
    return encode_frame(QUERY, b"".join(parts))


def decode_query(data: bytes, server_id: int = 0) -> Query:
    reader = _Reader(_expect(data, QUERY))
    version, p, m, K, L, S, count = reader.take(_QUERY_HEADER)
    if version != VERSION:
        raise WireError(WireError.BAD_VERSION, f"unsupported query version {version}")
    if p < 2 or m < 1 or p**m > 2**16 or not galois.is_prime(p):
        raise WireError(WireError.BAD_HEADER, f"invalid field parameters p={p} m={m}")
    q = p**m
    requests = []
    for _ in range(count):
        (terms,) = reader.take(_U16)
        if terms == 0:
            raise WireError(WireError.BAD_HEADER, "request with zero terms")
        layers, coeffs = [], []
        for _ in range(terms):
            (layer,) = reader.take(_U32)
            layers.append(layer)
            coeffs.append(tuple(int(x) for x in reader.elements(K, q)))
        requests.append(Request(tuple(layers), tuple(coeffs)))
    reader.finish()
    return Query(server_id, p, m, K, L, tuple(requests), S)


# ---------------------------------------------------------------------------
# ANSWER
# ---------------------------------------------------------------------------

def encode_answer(answer: Answer) -> bytes:
    body = np.ascontiguousarray(answer.values, dtype="<u2").tobytes()
    return encode_frame(ANSWER, _U32.pack(answer.count) + body)


def decode_answer(data: bytes, q: int = 2**16, S: int | None = None) -> Answer:
    """Decode an ANSWER frame; S is inferred from the payload size when not given."""
    payload = _expect(data, ANSWER)
    reader = _Reader(payload)
    (count,) = reader.take(_U32)
    remaining = len(payload) - reader.pos
    if S is None:
        if count == 0:
            S = 0
        elif remaining % (2 * count):
            raise WireError(WireError.TRUNCATED, f"{remaining} bytes do not split into {count} records")
        else:
            S = remaining // (2 * count)
    values = reader.elements(count * S, q).reshape(count, S)
    reader.finish()
    return Answer(values)


# ---------------------------------------------------------------------------
# ERROR
# ---------------------------------------------------------------------------

def encode_error(code: int, message: str) -> bytes:
    text = message.encode("utf-8")[:0xFFFF].decode("utf-8", "ignore").encode("utf-8")
    return encode_frame(ERROR, _ERROR_HEADER.pack(code, len(text)) + text)


def decode_error(data: bytes) -> tuple[int, str]:
    got, payload = decode_frame(data)
    if got != ERROR:
        raise WireError(WireError.BAD_MAGIC, f"expected an ERROR frame, got 0x{got:02x}")
    reader = _Reader(payload)
    code, length = reader.take(_ERROR_HEADER)
    if reader.pos + length > len(payload):
        raise WireError(WireError.TRUNCATED, "error message runs past the payload")
    raw = bytes(payload[reader.pos:reader.pos + length])
    reader.pos += length
    reader.finish()
    try:
        return code, raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise WireError(WireError.BAD_HEADER, f"error message is not UTF-8: {e}") from None


def decode_any(data: bytes) -> Query | Answer | tuple[int, str]:
    """Decode whatever frame this is; used by the fuzz contract."""
    msg_type, _ = decode_frame(data)
    if msg_type == QUERY:
        return decode_query(data)
    if msg_type == ANSWER:
        return decode_answer(data)
    return decode_error(data)
