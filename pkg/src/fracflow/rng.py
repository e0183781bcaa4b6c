"""Counter-based random streams.

Every Gaussian draw in the package comes from a Philox4x64 generator keyed
by ``(seed, path_index, dimension, purpose)``.  Streams are independent of
draw order, so Monte Carlo batches can be generated in any order (or in
parallel) and still be bit-identical.
"""

from __future__ import annotations

import numpy as np

PURPOSES = {"noise": 0, "subgrid": 1, "exact": 2, "gamma": 3, "derive": 4}
_MASK64 = (1 << 64) - 1


def stream(seed: int, path_index: int = 0, dimension: int = 0, purpose: str = "noise") -> np.random.Generator:
    key = np.random.SeedSequence([int(seed) & _MASK64, int(path_index), int(dimension), PURPOSES[purpose]])
    return np.random.Generator(np.random.Philox(key))


def derive_seed(seed: int, index: int) -> int:
    """64-bit child seed, e.g. one per Monte Carlo noise realisation."""
    ss = np.random.SeedSequence([int(seed) & _MASK64, int(index), PURPOSES["derive"]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def standard_normals(seed: int, n_paths: int, d: int, size: int, purpose: str) -> np.ndarray:
    """Array ``(n_paths, d, size)``; row ``(i, k)`` is stream ``(seed, i, k, purpose)``."""
    out = np.empty((n_paths, d, size))
    for i in range(n_paths):
        for k in range(d):
            out[i, k] = stream(seed, i, k, purpose).standard_normal(size)
    return out
