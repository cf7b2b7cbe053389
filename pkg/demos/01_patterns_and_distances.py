"""Binary activation patterns, Hamming distance, and the per-class store.

A ReLU layer's activations for one predicted box become a binary pattern:
bit i is set when unit i is strictly positive.  Patterns harvested from
training true positives go into a per-class store; a test pattern's
uncertainty is its Hamming distance to the nearest stored pattern of its
predicted class.
"""

import numpy as np

from naptron import BinaryPattern, PatternStore, binarize, hamming

rng = np.random.default_rng(0)

# --- binarization ----------------------------------------------------------
activations = np.array([0.7, -0.3, 0.0, 2.1, 0.05, -1.2])
pattern = binarize(activations)
print("activations:", activations)
print("sign pattern:", pattern.to_bits().astype(int))

# Zeroing the lowest 70% of values first (k = floor(0.7 * 6) = 4) reaches
# past the negatives and knocks out the weakest positive unit (0.05) too:
trimmed = binarize(activations, percentile=0.7)
print("p=0.7 pattern:", trimmed.to_bits().astype(int))

# --- Hamming distance ------------------------------------------------------
a = BinaryPattern.from_bits(rng.integers(0, 2, size=256, dtype=np.uint8))
b = BinaryPattern.from_bits(rng.integers(0, 2, size=256, dtype=np.uint8))
print("\nrandom 256-bit patterns differ in", hamming(a, b), "positions")
print("self distance:", hamming(a, a))
print("complement distance:", hamming(a, a.complement()))

# --- the per-class store ---------------------------------------------------
store = PatternStore()
prototype = rng.normal(size=128)
for _ in range(50):
    # fifty noisy copies of one prototype, stored under class 3
    noisy = prototype * np.where(rng.random(128) < 0.05, -1.0, 1.0)
    store.insert(3, binarize(noisy))
store.freeze()
print("\nstore:", store)

nearby = prototype * np.where(rng.random(128) < 0.05, -1.0, 1.0)
faraway = prototype * np.where(rng.random(128) < 0.45, -1.0, 1.0)
for name, values in [("nearby", nearby), ("faraway", faraway)]:
    query = binarize(values)
    print(f"{name}: min={store.min_distance(3, query)}, "
          f"avg={store.avg_distance(3, query):.1f}")
