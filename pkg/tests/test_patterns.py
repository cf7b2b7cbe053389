import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from naptron import BinaryPattern, PatternStore, binarize, hamming
from naptron.errors import (
    ConfigError,
    DimensionError,
    EmptyClassError,
    InputError,
    StateError,
)


def naive_hamming(a_bits, b_bits) -> int:
    """Independent per-bit comparison oracle."""
    a = np.asarray(a_bits, dtype=bool)
    b = np.asarray(b_bits, dtype=bool)
    assert a.shape == b.shape
    return int(np.count_nonzero(a != b))


def random_pattern(rng, length):
    return BinaryPattern.from_bits(rng.integers(0, 2, size=length, dtype=np.uint8))


finite_floats = st.floats(allow_nan=False, allow_infinity=False,
                          min_value=-1e6, max_value=1e6)


# ---------------------------------------------------------------------------
# binarize


def test_binarize_sign_rule():
    pattern = binarize([0.5, -0.2, 0.0, 1.3], 0.0)
    assert pattern.to_bits().tolist() == [True, False, False, True]


def test_binarize_zeroes_lowest_fraction():
    # k = floor(0.45 * 4) = 1, so only the smallest value is dropped
    pattern = binarize([0.1, 0.2, 0.3, 0.4], 0.45)
    assert pattern.to_bits().tolist() == [False, True, True, True]


def test_binarize_everything_zeroed():
    assert binarize([1.0, 1.0], 1.0).to_bits().tolist() == [False, False]


def test_binarize_ties_zero_lower_index_first():
    pattern = binarize([0.5, 0.5, 0.5, 0.5], 0.5)
    assert pattern.to_bits().tolist() == [False, False, True, True]


def test_binarize_decimal_fraction_count():
    # 0.7 * 10 rounds down to 6.999...96 in float64; the intended k is 7
    pattern = binarize(np.arange(1.0, 11.0), 0.7)
    assert pattern.to_bits().tolist() == [False] * 7 + [True] * 3


def test_binarize_rejects_bad_inputs():
    with pytest.raises(InputError):
        binarize([1.0, np.nan], 0.0)
    with pytest.raises(InputError):
        binarize([], 0.0)
    with pytest.raises(ConfigError):
        binarize([1.0], 1.5)
    with pytest.raises(ConfigError):
        binarize([1.0], -0.1)


@given(st.lists(finite_floats, min_size=1, max_size=64))
def test_binarize_zero_percentile_is_sign_rule(values):
    pattern = binarize(values, 0.0)
    expected = [v > 0 for v in values]
    assert pattern.to_bits().tolist() == expected


@given(
    st.lists(finite_floats, min_size=1, max_size=64),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_binarize_monotone_in_percentile(values, p_a, p_b):
    lo, hi = sorted((p_a, p_b))
    ones_lo = set(np.flatnonzero(binarize(values, lo).to_bits()))
    ones_hi = set(np.flatnonzero(binarize(values, hi).to_bits()))
    assert ones_hi <= ones_lo


# ---------------------------------------------------------------------------
# patterns and hamming


def test_pattern_round_trip_and_equality(rng):
    for length in (1, 63, 64, 65, 127, 128, 300):
        bits = rng.integers(0, 2, size=length, dtype=np.uint8).astype(bool)
        pattern = BinaryPattern.from_bits(bits)
        assert len(pattern) == length
        assert np.array_equal(pattern.to_bits(), bits)
        assert pattern == BinaryPattern.from_bits(bits)
        assert hash(pattern) == hash(BinaryPattern.from_bits(bits))


def test_pattern_rejects_dirty_padding():
    # length 4 leaves 60 padding bits that must stay zero
    with pytest.raises(InputError):
        BinaryPattern(np.array([0xFF], dtype=np.uint64), 4)
    with pytest.raises(DimensionError):
        BinaryPattern(np.array([0, 0], dtype=np.uint64), 64)


def test_hamming_identity_and_complement(rng):
    pattern = random_pattern(rng, 64)
    assert hamming(pattern, pattern) == 0
    assert hamming(pattern, pattern.complement()) == 64


def test_hamming_symmetry(rng):
    for _ in range(50):
        a = random_pattern(rng, 129)
        b = random_pattern(rng, 129)
        assert hamming(a, b) == hamming(b, a)


def test_hamming_matches_naive_oracle(rng):
    for _ in range(1000):
        bits_a = rng.integers(0, 2, size=300, dtype=np.uint8)
        bits_b = rng.integers(0, 2, size=300, dtype=np.uint8)
        packed = hamming(BinaryPattern.from_bits(bits_a),
                         BinaryPattern.from_bits(bits_b))
        assert packed == naive_hamming(bits_a, bits_b)


def test_hamming_triangle_inequality(rng):
    for _ in range(200):
        length = int(rng.integers(1, 200))
        a, b, c = (random_pattern(rng, length) for _ in range(3))
        assert hamming(a, c) <= hamming(a, b) + hamming(b, c)


def test_hamming_length_mismatch():
    with pytest.raises(DimensionError):
        hamming(BinaryPattern.from_bits([1, 0]), BinaryPattern.from_bits([1, 0, 1]))


# ---------------------------------------------------------------------------
# pattern store


def test_store_insert_and_counts(rng):
    store = PatternStore()
    store.insert(3, random_pattern(rng, 32))
    assert store.counts() == {3: 1}


def test_store_keeps_duplicates(rng):
    store = PatternStore()
    pattern = random_pattern(rng, 32)
    store.insert(1, pattern)
    store.insert(1, pattern)
    assert store.count(1) == 2


def test_store_rejects_length_mismatch(rng):
    store = PatternStore()
    store.insert(0, random_pattern(rng, 256))
    with pytest.raises(DimensionError):
        store.insert(0, random_pattern(rng, 128))


def test_store_frozen_is_immutable(rng):
    store = PatternStore()
    store.insert(0, random_pattern(rng, 16))
    store.freeze()
    with pytest.raises(StateError):
        store.insert(0, random_pattern(rng, 16))
    with pytest.raises(StateError):
        store.ensure_class(1)


def test_store_empty_class_query_is_an_error(rng):
    store = PatternStore()
    store.ensure_class(5)
    store.insert(0, random_pattern(rng, 16))
    store.freeze()
    query = random_pattern(rng, 16)
    with pytest.raises(EmptyClassError):
        store.min_distance(5, query)
    with pytest.raises(EmptyClassError):
        store.avg_distance(7, query)  # absent class


def test_store_distance_examples():
    store = PatternStore()
    store.insert(2, BinaryPattern.from_bits([0, 0, 0, 0]))
    store.insert(2, BinaryPattern.from_bits([1, 1, 1, 1]))
    store.freeze()
    query = BinaryPattern.from_bits([0, 0, 1, 1])
    assert store.min_distance(2, query) == 2
    assert store.avg_distance(2, query) == 2.0


def test_store_self_distance_zero(rng):
    store = PatternStore()
    pattern = random_pattern(rng, 80)
    store.insert(0, pattern)
    store.freeze()
    assert store.min_distance(0, pattern) == 0
    assert store.avg_distance(0, pattern) == 0.0


def test_store_membership_equivalence(rng):
    store = PatternStore()
    stored = [random_pattern(rng, 48) for _ in range(20)]
    for pattern in stored:
        store.insert(0, pattern)
    store.freeze()
    for pattern in stored:
        assert store.min_distance(0, pattern) == 0
    for _ in range(50):
        query = random_pattern(rng, 48)
        expected_zero = any(query == p for p in stored)
        assert (store.min_distance(0, query) == 0) == expected_zero


def test_store_min_and_avg_match_brute_force(rng):
    store = PatternStore()
    stored_bits = []
    for _ in range(300):
        bits = rng.integers(0, 2, size=100, dtype=np.uint8)
        stored_bits.append(bits)
        store.insert(4, BinaryPattern.from_bits(bits))
    store.freeze()
    for _ in range(50):
        q_bits = rng.integers(0, 2, size=100, dtype=np.uint8)
        query = BinaryPattern.from_bits(q_bits)
        brute = [naive_hamming(q_bits, s) for s in stored_bits]
        assert store.min_distance(4, query) == min(brute)
        assert store.avg_distance(4, query) == pytest.approx(
            float(np.mean(brute)), abs=1e-12)
        assert store.min_distance(4, query) <= store.avg_distance(4, query)


def test_store_query_length_mismatch(rng):
    store = PatternStore()
    store.insert(0, random_pattern(rng, 64))
    store.freeze()
    with pytest.raises(DimensionError):
        store.min_distance(0, random_pattern(rng, 65))


def test_store_large_scan_matches_brute_force(rng):
    # 1e4 stored patterns, 100 queries, exact agreement with a linear scan
    length = 96
    stored = rng.integers(0, 2, size=(10_000, length), dtype=np.uint8)
    store = PatternStore()
    for row in stored:
        store.insert(0, BinaryPattern.from_bits(row))
    store.freeze()
    for _ in range(100):
        q_bits = rng.integers(0, 2, size=length, dtype=np.uint8)
        query = BinaryPattern.from_bits(q_bits)
        brute = np.count_nonzero(stored != q_bits[np.newaxis, :], axis=1)
        assert store.min_distance(0, query) == int(brute.min())
        assert store.avg_distance(0, query) == pytest.approx(
            float(brute.mean()), abs=1e-12)
