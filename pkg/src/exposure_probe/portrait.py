"""Strided Bloom-filter portraits of a text corpus.

A portrait stores, for every document, the w-token windows that start at
every s-token interval of the canonical character stream (tokens are
characters; spaces and newlines are not tokens). Membership queries for
sufficiently long snippets are then sound: no false negatives, and false
positives bounded by the filter's sizing.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

_M64 = (1 << 64) - 1
_M256 = (1 << 256) - 1
_FNV_PRIME = 0x100000001B3
_FNV_BASIS = 0xCBF29CE484222325
_SEED_TWEAK = 0x9E3779B97F4A7C15  # distinguishes the second hash evaluation

_MAGIC = b"XPDP"
_FORMAT_VERSION = 1
_HEADER = struct.Struct("<IIdQQIQ")  # width, stride, fpr, seed, m, k, element_count

#: Characters that are not tokens: space, line feed, carriage return.
REMOVED_CHARS = frozenset(" \n\r")


class PortraitFormatError(ValueError):
    """Portrait file is not parseable as the expected container format."""


class PortraitVersionError(PortraitFormatError):
    """Portrait file uses an unsupported format version."""


class PortraitChecksumError(PortraitFormatError):
    """Portrait file bytes fail integrity verification."""


class CorpusFormatError(ValueError):
    """Corpus input file is malformed."""


def _mix(x: int) -> int:
    """64-bit avalanche finalizer (splitmix64-style)."""
    x &= _M64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _M64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def hash64(data: bytes, seed: int) -> int:
    """Stable, seedable 64-bit non-cryptographic hash of ``data``.

    FNV-style multiply/xor over 8-byte little-endian words with a strong
    finalizer. Identical output on every platform and Python version.
    """
    h = _mix((seed & _M64) ^ _FNV_BASIS ^ len(data))
    if len(data) % 8:
        data = data + b"\0" * (8 - len(data) % 8)
    for i in range(0, len(data), 8):
        h = ((h ^ int.from_bytes(data[i : i + 8], "little")) * _FNV_PRIME) & _M64
    return _mix(h)


@dataclass(frozen=True)
class PortraitParams:
    """Build parameters of a portrait.

    ``bit_count`` and ``hash_count`` come from the standard optimal Bloom
    sizing for ``target_fpr`` at a declared expected element count; use
    :meth:`sized` rather than filling them in by hand.
    """

    width: int = 50
    stride: int = 50
    target_fpr: float = 0.001
    hash_seed: int = 0
    bit_count: int = 0
    hash_count: int = 0

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if not (0.0 < self.target_fpr < 1.0):
            raise ValueError(f"target_fpr must be in (0,1), got {self.target_fpr}")
        if self.bit_count < 1:
            raise ValueError(f"bit_count must be >= 1, got {self.bit_count}")
        if self.hash_count < 1:
            raise ValueError(f"hash_count must be >= 1, got {self.hash_count}")
        object.__setattr__(self, "hash_seed", self.hash_seed & _M64)

    @classmethod
    def sized(
        cls,
        expected_elements: int,
        width: int = 50,
        stride: int = 50,
        target_fpr: float = 0.001,
        hash_seed: int = 0,
    ) -> "PortraitParams":
        """Compute m = ceil(-n ln p / (ln 2)^2) and k = ceil((m/n) ln 2)."""
        if expected_elements < 1:
            expected_elements = 1
        m = math.ceil(-expected_elements * math.log(target_fpr) / math.log(2) ** 2)
        k = math.ceil(m / expected_elements * math.log(2))
        return cls(
            width=width,
            stride=stride,
            target_fpr=target_fpr,
            hash_seed=hash_seed,
            bit_count=m,
            hash_count=k,
        )

    @property
    def expected_capacity(self) -> int:
        """Element count the sizing assumes (inverts the m formula)."""
        return max(1, round(self.bit_count * math.log(2) ** 2 / -math.log(self.target_fpr)))


@dataclass(frozen=True)
class CanonicalStream:
    """A document reduced to its token characters.

    ``chars`` holds every input character except spaces and newlines, in
    order; ``offsets[i]`` is the byte offset of ``chars[i]`` in the
    original UTF-8 text.
    """

    chars: str
    offsets: Sequence[int]

    def __len__(self) -> int:
        return len(self.chars)


def _utf8_len(ch: str) -> int:
    o = ord(ch)
    if o < 0x80:
        return 1
    if o < 0x800:
        return 2
    if o < 0x10000:
        return 3
    return 4


def canonicalize(text: str) -> CanonicalStream:
    """Drop spaces (U+0020) and newlines (U+000A, U+000D) from ``text``.

    All other characters, including tabs and other Unicode whitespace,
    are kept as tokens.
    """
    kept: list[str] = []
    offsets: list[int] = []
    byte_pos = 0
    for ch in text:
        if ch not in REMOVED_CHARS:
            kept.append(ch)
            offsets.append(byte_pos)
        byte_pos += _utf8_len(ch)
    return CanonicalStream("".join(kept), offsets)


def window_starts(length: int, params: PortraitParams) -> range:
    """Stride-aligned start positions p with p + width <= length."""
    if length < params.width:
        return range(0)
    last = (length - params.width) // params.stride
    return range(0, (last + 1) * params.stride, params.stride)


def strided_windows(
    stream: CanonicalStream, params: PortraitParams
) -> Iterator[tuple[str, int]]:
    """Yield (window_text, start_position) for every stored window.

    Windows start at canonical positions 0, s, 2s, ...; a trailing
    fragment shorter than the width is not emitted.
    """
    w = params.width
    text = stream.chars
    for p in window_starts(len(text), params):
        yield text[p : p + w], p


@dataclass
class Portrait:
    """Bloom filter over the strided windows of a corpus.

    A finished portrait is immutable by convention and safe for
    unlimited concurrent readers.
    """

    params: PortraitParams
    bits: bytearray = field(repr=False, default_factory=bytearray)
    element_count: int = 0
    corpus_digest: int = 0

    def __post_init__(self) -> None:
        nbytes = (self.params.bit_count + 7) // 8
        if not self.bits:
            self.bits = bytearray(nbytes)
        elif len(self.bits) != nbytes:
            raise ValueError(
                f"bit array is {len(self.bits)} bytes, expected {nbytes}"
            )

    @property
    def fpr_degraded(self) -> bool:
        """True when inserts exceeded the sizing assumption by more than 2x."""
        return self.element_count > 2 * self.params.expected_capacity

    def _indices(self, window_text: str) -> list[int]:
        data = window_text.encode("utf-8")
        seed = self.params.hash_seed
        h1 = hash64(data, seed)
        h2 = hash64(data, seed ^ _SEED_TWEAK)
        m = self.params.bit_count
        return [(h1 + i * h2) % m for i in range(self.params.hash_count)]

    def _check_window(self, window_text: str) -> None:
        if len(window_text) != self.params.width:
            raise ValueError(
                f"window must be exactly {self.params.width} tokens, "
                f"got {len(window_text)}"
            )

    def insert(self, window_text: str) -> None:
        self._check_window(window_text)
        bits = self.bits
        for idx in self._indices(window_text):
            bits[idx >> 3] |= 1 << (idx & 7)
        self.element_count += 1

    def contains(self, window_text: str) -> bool:
        self._check_window(window_text)
        bits = self.bits
        for idx in self._indices(window_text):
            if not (bits[idx >> 3] >> (idx & 7)) & 1:
                return False
        return True


def bloom_insert(portrait: Portrait, window_text: str) -> Portrait:
    """Insert one width-sized window; returns the (mutated) portrait."""
    portrait.insert(window_text)
    return portrait


def bloom_contains(portrait: Portrait, window_text: str) -> bool:
    """Membership test; true for every inserted window, false positives
    at roughly the sizing target for everything else."""
    return portrait.contains(window_text)


def document_digest(doc_id: str, text: str) -> int:
    """Per-document digest; portrait digests are sums of these mod 2^256,
    so corpus identity is independent of document order."""
    ident = doc_id.encode("utf-8")
    payload = len(ident).to_bytes(4, "big") + ident + text.encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest(), "big")


def _ingest(portrait: Portrait, doc_id: str, text: str) -> None:
    stream = canonicalize(text)
    for window_text, _pos in strided_windows(stream, portrait.params):
        portrait.insert(window_text)
    portrait.corpus_digest = (portrait.corpus_digest + document_digest(doc_id, text)) & _M256


def _build_partition(args: tuple[PortraitParams, list[tuple[str, str]]]) -> Portrait:
    params, docs = args
    part = Portrait(params)
    for doc_id, text in docs:
        _ingest(part, doc_id, text)
    return part


def build_portrait(
    documents: Iterable[tuple[str, str]],
    params: PortraitParams,
    jobs: int = 1,
) -> Portrait:
    """Insert every strided window of every document.

    Deterministic for a fixed hash seed and independent of document
    order. With ``jobs`` > 1, documents are partitioned across worker
    processes and the partial bit arrays are OR-merged.
    """
    if jobs > 1:
        doc_list = list(documents)
        chunks = [doc_list[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_build_partition, [(params, c) for c in chunks if c]))
        portrait = merge_portraits(parts) if parts else Portrait(params)
    else:
        portrait = Portrait(params)
        for doc_id, text in documents:
            _ingest(portrait, doc_id, text)
    if portrait.fpr_degraded:
        warnings.warn(
            f"portrait holds {portrait.element_count} windows, more than 2x the "
            f"sizing assumption of {portrait.params.expected_capacity}; the "
            f"false-positive target no longer holds",
            RuntimeWarning,
            stacklevel=2,
        )
    return portrait


def merge_portraits(parts: Sequence[Portrait]) -> Portrait:
    """OR-combine partial portraits built over disjoint document sets."""
    if not parts:
        raise ValueError("nothing to merge")
    params = parts[0].params
    for part in parts[1:]:
        if part.params != params:
            raise ValueError("cannot merge portraits with different params")
    merged = Portrait(params)
    combined = int.from_bytes(merged.bits, "little")
    for part in parts:
        combined |= int.from_bytes(part.bits, "little")
        merged.element_count += part.element_count
        merged.corpus_digest = (merged.corpus_digest + part.corpus_digest) & _M256
    merged.bits = bytearray(combined.to_bytes(len(merged.bits), "little"))
    return merged


def serialize_portrait(portrait: Portrait) -> bytes:
    """Versioned binary container with an integrity checksum trailer."""
    p = portrait.params
    header = _HEADER.pack(
        p.width,
        p.stride,
        p.target_fpr,
        p.hash_seed,
        p.bit_count,
        p.hash_count,
        portrait.element_count,
    )
    body = (
        _MAGIC
        + _FORMAT_VERSION.to_bytes(2, "little")
        + header
        + portrait.corpus_digest.to_bytes(32, "big")
        + bytes(portrait.bits)
    )
    return body + hashlib.sha256(body).digest()


def load_portrait(data: bytes) -> Portrait:
    """Inverse of :func:`serialize_portrait`; verifies magic, version and
    checksum before reconstructing the filter."""
    if len(data) < 4 or data[:4] != _MAGIC:
        raise PortraitFormatError("not a portrait file (bad magic bytes)")
    if len(data) < 6 + _HEADER.size + 32 + 32:
        raise PortraitChecksumError("portrait file truncated")
    body, checksum = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != checksum:
        raise PortraitChecksumError("portrait checksum mismatch")
    version = int.from_bytes(data[4:6], "little")
    if version != _FORMAT_VERSION:
        raise PortraitVersionError(
            f"unsupported portrait format version {version} "
            f"(expected {_FORMAT_VERSION})"
        )
    offset = 6
    width, stride, fpr, seed, m, k, element_count = _HEADER.unpack_from(body, offset)
    offset += _HEADER.size
    digest = int.from_bytes(body[offset : offset + 32], "big")
    offset += 32
    bits = bytearray(body[offset:])
    params = PortraitParams(
        width=width,
        stride=stride,
        target_fpr=fpr,
        hash_seed=seed,
        bit_count=m,
        hash_count=k,
    )
    expected_bytes = (m + 7) // 8
    if len(bits) != expected_bytes:
        raise PortraitFormatError(
            f"bit array is {len(bits)} bytes, header implies {expected_bytes}"
        )
    return Portrait(params=params, bits=bits, element_count=element_count, corpus_digest=digest)


def save_portrait(portrait: Portrait, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(serialize_portrait(portrait))


def read_portrait(path: str | Path) -> Portrait:
    return load_portrait(Path(path).read_bytes())


def iter_corpus(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield (doc_id, text) from a corpus input.

    The input is either a directory tree of source files (doc_id is the
    relative path) or a JSON-lines file of {"id": ..., "content": ...}
    records.
    """
    path = Path(path)
    if path.is_dir():
        for file in sorted(p for p in path.rglob("*") if p.is_file()):
            yield file.relative_to(path).as_posix(), file.read_text(
                encoding="utf-8", errors="replace"
            )
        return
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict) or "id" not in record or "content" not in record:
                raise CorpusFormatError(
                    f'line {lineno}: corpus records need "id" and "content" fields'
                )
            yield str(record["id"]), str(record["content"])


def count_windows(documents: Iterable[tuple[str, str]], params: PortraitParams) -> int:
    """Counting pre-pass used to size a filter when the element count is
    not supplied up front."""
    total = 0
    for _doc_id, text in documents:
        total += len(window_starts(len(canonicalize(text)), params))
    return total
