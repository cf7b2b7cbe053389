"""Bit-packed binary activation patterns and the per-class pattern store.

A pattern is the binary signature of one ReLU layer for one predicted box:
bit i is set when unit i was strictly positive (optionally after zeroing the
lowest-magnitude fraction ``p`` of units).  Patterns are packed LSB-first
into 64-bit little-endian words, so Hamming distance is XOR plus popcount
over at most ``ceil(length / 64)`` words.

The store keeps one pattern list per predicted class.  It is built once
(single writer), frozen, and then queried read-only; ``min_distance`` is the
uncertainty score of a test pattern, ``avg_distance`` the mean-distance
variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    EmptyClassError,
    InputError,
    StateError,
)

WORD_BITS = 64


def words_for_length(length: int) -> int:
    """Number of 64-bit words needed to hold ``length`` bits."""
    return (length + WORD_BITS - 1) // WORD_BITS


class BinaryPattern:
    """A fixed-length bit vector packed LSB-first into 64-bit words.

    Bit ``i`` lives at bit ``i % 64`` of word ``i // 64``.  Bits past
    ``length`` in the last word are zero (canonical padding), so two
    patterns are equal exactly when lengths and word arrays are equal.
    """

    __slots__ = ("words", "length")

    def __init__(self, words, length: int):
        arr = np.ascontiguousarray(words, dtype=np.uint64)
        length = int(length)
        if length < 1:
            raise InputError(f"pattern length must be >= 1, got {length}")
        if arr.ndim != 1 or arr.size != words_for_length(length):
            raise DimensionError(
                f"expected {words_for_length(length)} words for {length} bits, "
                f"got array of shape {arr.shape}"
            )
        tail = length % WORD_BITS
        if tail and (arr[-1] >> np.uint64(tail)) != 0:
            raise InputError("padding bits beyond the pattern length must be zero")
        self.words = arr
        self.length = length

    @classmethod
    def from_bits(cls, bits) -> "BinaryPattern":
        """Pack a 1-D boolean (or 0/1) sequence into a pattern."""
        arr = np.asarray(bits)
        if arr.ndim != 1 or arr.size == 0:
            raise InputError("bits must be a nonempty 1-D sequence")
        packed = np.packbits(arr.astype(bool), bitorder="little")
        buf = np.zeros(words_for_length(arr.size) * 8, dtype=np.uint8)
        buf[: packed.size] = packed
        return cls(buf.view(np.dtype("<u8")), arr.size)

    def to_bits(self) -> np.ndarray:
        """Unpack to a boolean array of ``length`` entries."""
        raw = np.unpackbits(
            self.words.view(np.uint8), count=self.length, bitorder="little"
        )
        return raw.astype(bool)

    def complement(self) -> "BinaryPattern":
        """Pattern with every valid bit flipped."""
        return BinaryPattern.from_bits(~self.to_bits())

    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum(dtype=np.int64))

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryPattern):
            return NotImplemented
        return self.length == other.length and bool(
            np.array_equal(self.words, other.words)
        )

    def __hash__(self) -> int:
        return hash((self.length, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryPattern(length={self.length}, ones={self.popcount()})"


def as_activation_vector(values) -> np.ndarray:
    """Validate and return a 1-D float64 activation vector.

    Raises InputError when the input is empty, not 1-D, or has non-finite
    entries.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError("activation vector must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise InputError("activation vector contains non-finite values")
    return arr


def binarize(values, percentile: float = 0.0) -> BinaryPattern:
    """Turn activations into a binary pattern.

    The ``k = floor(percentile * n)`` smallest values are treated as zero
    (ties resolved by zeroing the lower index first), then bit i is set iff
    the remaining value at i is strictly positive.  ``percentile = 0`` is
    the plain sign rule.
    """
    arr = as_activation_vector(values)
    if not 0.0 <= percentile <= 1.0:
        raise ConfigError(f"percentile must lie in [0, 1], got {percentile}")
    # Guard against float artifacts like 0.7 * 10 == 6.999...96.
    k = int(math.floor(percentile * arr.size + 1e-9))
    bits = arr > 0.0
    if k > 0:
        order = np.argsort(arr, kind="stable")
        bits[order[:k]] = False
    return BinaryPattern.from_bits(bits)


def hamming(a: BinaryPattern, b: BinaryPattern) -> int:
    """Number of bit positions where two equal-length patterns differ."""
    if a.length != b.length:
        raise DimensionError(
            f"pattern lengths differ: {a.length} vs {b.length}"
        )
    return int(np.bitwise_count(a.words ^ b.words).sum(dtype=np.int64))


@dataclass(frozen=True)
class StoreConfig:
    """Build-time parameters echoed by a pattern store.

    ``percentile`` is reused verbatim when binarizing test activations, so
    train and test can never disagree on the binarization rule.
    """

    layer_index: int = 0
    percentile: float = 0.0
    train_iou: float = 0.5
    softmax_threshold: float = 0.0


class PatternStore:
    """Per-class collections of known binary patterns.

    Build phase is single-writer (``ensure_class`` / ``insert``); after
    ``freeze`` the contents are immutable, per-class word matrices are
    cached, and distance queries are safe to run concurrently.
    """

    def __init__(self, pattern_length: int | None = None,
                 config: StoreConfig | None = None):
        self.pattern_length = pattern_length
        self.config = config if config is not None else StoreConfig()
        self._patterns: dict[int, list[BinaryPattern]] = {}
        self._matrices: dict[int, np.ndarray] = {}
        self._frozen = False

    @property
    def frozen(self) -> bool:
        return self._frozen

    def class_ids(self) -> list[int]:
        return sorted(self._patterns)

    def count(self, class_id: int) -> int:
        return len(self._patterns.get(class_id, ()))

    def counts(self) -> dict[int, int]:
        return {c: len(p) for c, p in sorted(self._patterns.items())}

    def total(self) -> int:
        return sum(len(p) for p in self._patterns.values())

    def patterns(self, class_id: int) -> tuple[BinaryPattern, ...]:
        return tuple(self._patterns.get(class_id, ()))

    def ensure_class(self, class_id: int) -> None:
        """Register a class id, possibly with no patterns yet."""
        if self._frozen:
            raise StateError("store is frozen")
        self._patterns.setdefault(int(class_id), [])

    def insert(self, class_id: int, pattern: BinaryPattern) -> None:
        """Append a pattern to a class list.  Duplicates are kept."""
        if self._frozen:
            raise StateError("store is frozen")
        if self.pattern_length is None:
            self.pattern_length = pattern.length
        elif pattern.length != self.pattern_length:
            raise DimensionError(
                f"pattern length {pattern.length} does not match store "
                f"length {self.pattern_length}"
            )
        self._patterns.setdefault(int(class_id), []).append(pattern)

    def freeze(self) -> "PatternStore":
        """Seal the store and cache per-class word matrices."""
        if not self._frozen:
            self._frozen = True
            width = words_for_length(self.pattern_length or 1)
            for class_id, pats in self._patterns.items():
                if pats:
                    self._matrices[class_id] = np.vstack([p.words for p in pats])
                else:
                    self._matrices[class_id] = np.empty((0, width), dtype=np.uint64)
        return self

    def _distances(self, class_id: int, query: BinaryPattern) -> np.ndarray:
        pats = self._patterns.get(class_id)
        if not pats:
            raise EmptyClassError(
                f"no stored patterns for class {class_id}; "
                "uncertainty is undefined for this label"
            )
        if self.pattern_length is not None and query.length != self.pattern_length:
            raise DimensionError(
                f"query length {query.length} does not match store "
                f"length {self.pattern_length}"
            )
        matrix = self._matrices.get(class_id)
        if matrix is None:
            matrix = np.vstack([p.words for p in pats])
        xor = matrix ^ query.words[np.newaxis, :]
        return np.bitwise_count(xor).sum(axis=1, dtype=np.int64)

    def min_distance(self, class_id: int, query: BinaryPattern) -> int:
        """Hamming distance to the nearest stored pattern of the class."""
        return int(self._distances(class_id, query).min())

    def avg_distance(self, class_id: int, query: BinaryPattern) -> float:
        """Mean Hamming distance over the class's stored patterns."""
        return float(self._distances(class_id, query).mean())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PatternStore):
            return NotImplemented
        if (self.pattern_length != other.pattern_length
                or self.config != other.config
                or self.class_ids() != other.class_ids()):
            return False
        return all(
            self.patterns(c) == other.patterns(c) for c in self.class_ids()
        )

    def __repr__(self) -> str:
        return (
            f"PatternStore(length={self.pattern_length}, "
            f"classes={len(self._patterns)}, patterns={self.total()}, "
            f"frozen={self._frozen})"
        )
