"""Level-2 and level-3 iterated integrals of piecewise-linear paths.

With ``convention="reversed"`` (the default)

    X2[i, j] = int_a^b dX_i(t) (X_j(t) - X_j(a)),
    X3[i, j, k] = int_a^b dX_i(t) X2_{a t}[j, k],

for which Chen's relation reads ``X2_ab - X2_ac - X2_cb = (X_b - X_c) x (X_c - X_a)``.
``convention="conventional"`` returns the transposed tensors
(``X2[i, j] = int (X_i - X_i(a)) dX_j`` and so on), whose Chen cross term
is ``(X_c - X_a) x (X_b - X_c)``.

The ``skorohod`` flavour is the projection of the ``strat`` tensor on the
top Wiener chaos: the Wick-ordered iterated integral, computed exactly
from the increment covariance of fBm on the path grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FracflowError
from .kernels import HurstParams, covariance_closed
from .synthesis import FbmPath

CONVENTIONS = ("reversed", "conventional")


@dataclass
class Level2Tensor:
    """``values`` has shape ``(..., d, d)``."""

    a: float
    b: float
    values: np.ndarray
    flavor: str = "strat"
    convention: str = "reversed"

    @property
    def levy_area(self) -> np.ndarray:
        """Antisymmetric part ``(X2 - X2^T) / 2``."""
        return 0.5 * (self.values - np.swapaxes(self.values, -1, -2))


@dataclass
class Level3Tensor:
    """``values`` has shape ``(..., d, d, d)``."""

    a: float
    b: float
    values: np.ndarray
    flavor: str = "strat"
    convention: str = "reversed"


def _segment(path: FbmPath, a: float, b: float):
    if b < a:
        raise FracflowError("ORDERING", "need a <= b")
    try:
        ia, ib = path.index_of([a, b], "interval end")
    except FracflowError as exc:
        raise FracflowError("NODE_MISMATCH", "a and b must be path grid nodes") from exc
    x = path.values[..., ia:ib + 1]
    return path.times[ia:ib + 1], x - x[..., :1]


def _check_convention(convention: str):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")


def _level2_cells(y: np.ndarray) -> np.ndarray:
    """Per-cell contributions ``D_i Y_j + D_i D_j / 2``, shape ``(..., n, d, d)``."""
    dx = np.diff(y, axis=-1)
    y0 = y[..., :-1]
    return np.einsum("...in,...jn->...nij", dx, y0) + 0.5 * np.einsum("...in,...jn->...nij", dx, dx)


def level2(path: FbmPath, a: float, b: float, convention: str = "reversed") -> Level2Tensor:
    """Exact level-2 iterated integral of the linear interpolant on ``[a, b]``."""
    _check_convention(convention)
    _, y = _segment(path, a, b)
    vals = _level2_cells(y).sum(axis=-3)
    if convention == "conventional":
        vals = np.swapaxes(vals, -1, -2)
    return Level2Tensor(a, b, vals, "strat", convention)


def level2_skorohod(path: FbmPath, a: float, b: float, p: HurstParams, convention: str = "reversed") -> Level2Tensor:
    """Skorohod flavour: the diagonal loses ``K(2 alpha) (b - a)**2H``.

    That is the mean of ``(X_b - X_a)**2 / 2``; off-diagonal entries are
    already centred because the coordinates are independent.
    """
    if a < 0:
        raise FracflowError("NEGATIVE_TIME_DOMAIN", "the Skorohod flavour is defined here for a >= 0")
    t2 = level2(path, a, b, convention)
    d = t2.values.shape[-1]
    vals = t2.values - p.k_2alpha * (b - a) ** (2.0 * p.H) * np.eye(d)
    return Level2Tensor(a, b, vals, "skorohod", convention)


def level3(path: FbmPath, a: float, b: float, flavor: str = "strat",
           p: HurstParams | None = None, convention: str = "reversed") -> Level3Tensor:
    """Exact level-3 iterated integral of the linear interpolant.

    On the cell with increment ``D`` that starts at ``Y = X - X_a`` with
    running level-2 value ``A``, the contribution is
    ``D_i (A_jk + D_j Y_k / 2 + D_j D_k / 6)``.
    """
    _check_convention(convention)
    if flavor not in ("strat", "skorohod"):
        raise ValueError("flavor must be 'strat' or 'skorohod'")
    times, y = _segment(path, a, b)
    d = y.shape[-2]
    if len(times) < 2:
        return Level3Tensor(a, b, np.zeros(y.shape[:-2] + (d, d, d)), flavor, convention)
    dx = np.diff(y, axis=-1)
    cells = _level2_cells(y)
    running = np.cumsum(cells, axis=-3) - cells  # A at each cell start
    vals = (np.einsum("...in,...njk->...ijk", dx, running)
            + 0.5 * np.einsum("...in,...jn,...kn->...ijk", dx, dx, y[..., :-1])
            + np.einsum("...in,...jn,...kn->...ijk", dx, dx, dx) / 6.0)
    if flavor == "skorohod":
        if p is None:
            raise ValueError("the Skorohod flavour needs HurstParams")
        if a < 0:
            raise FracflowError("NEGATIVE_TIME_DOMAIN", "the Skorohod flavour is defined here for a >= 0")
        vals = vals - _level3_contractions(times, dx, p)
    if convention == "conventional":
        vals = np.swapaxes(vals, -1, -3)
    return Level3Tensor(a, b, vals, flavor, convention)


def increment_covariance(times: np.ndarray, p: HurstParams) -> np.ndarray:
    """``Cov(X_{t_{m+1}} - X_{t_m}, X_{t_{l+1}} - X_{t_l})`` for one coordinate."""
    t = np.asarray(times, dtype=float)
    C = covariance_closed(t[:, None], t[None, :], p)
    return C[1:, 1:] - C[1:, :-1] - C[:-1, 1:] + C[:-1, :-1]


def contraction_weights(G: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectors ``v1, v2, v3`` with ``v_r(m) = sum c(m1, m2, m3) G(., .)``.

    ``c`` is the level-3 cell weight (1 for ``m1 > m2 > m3``, 1/2 when two
    indices tie, 1/6 when all three tie); ``v1`` contracts ``(m1, m2)`` and
    is indexed by ``m3``, ``v2`` contracts ``(m1, m3)``, ``v3`` contracts
    ``(m2, m3)``.
    """
    n = len(G)
    diag = np.diag(G)
    low = np.tril(G, -1)
    col_low = low.sum(axis=0)  # sum_{m1 > m} G(m1, m)
    row_low = low.sum(axis=1)  # sum_{m3 < m} G(m, m3)

    def suffix_excl(v):  # sum_{k > m} v[k]
        s = np.cumsum(v[::-1])[::-1]
        return np.append(s[1:], 0.0)

    def prefix_excl(v):  # sum_{k < m} v[k]
        return np.concatenate([[0.0], np.cumsum(v)[:-1]])

    v1 = suffix_excl(col_low) + 0.5 * suffix_excl(diag) + 0.5 * col_low + diag / 6.0
    # block[m] = sum_{m1 > m} sum_{m3 < m} G(m1, m3)
    rows_below = np.cumsum(G[::-1], axis=0)[::-1]  # rows_below[r, c] = sum_{m1 >= r} G(m1, c)
    corner = np.cumsum(rows_below, axis=1)
    block = np.zeros(n)
    m = np.arange(1, n - 1)
    block[m] = corner[m + 1, m - 1]
    v2 = block + 0.5 * row_low + 0.5 * col_low + diag / 6.0
    v3 = prefix_excl(row_low) + 0.5 * row_low + 0.5 * prefix_excl(diag) + diag / 6.0
    return v1, v2, v3


def _level3_contractions(times: np.ndarray, dx: np.ndarray, p: HurstParams) -> np.ndarray:
    """Single-contraction part of the strat level-3 tensor (its first chaos)."""
    v1, v2, v3 = contraction_weights(increment_covariance(times, p))
    d = dx.shape[-2]
    eye = np.eye(d)
    l1 = dx @ v1  # (..., d), index k
    l2 = dx @ v2  # index j
    l3 = dx @ v3  # index i
    return (np.einsum("ij,...k->...ijk", eye, l1)
            + np.einsum("ik,...j->...ijk", eye, l2)
            + np.einsum("jk,...i->...ijk", eye, l3))


def chen_check(path: FbmPath, a: float, c: float, b: float, flavor: str = "strat",
               p: HurstParams | None = None, convention: str = "reversed") -> np.ndarray:
    """``X2_ab - X2_ac - X2_cb`` minus the Chen cross term for ``convention``.

    Zero to rounding for the ``strat`` flavour; for ``skorohod`` only the
    off-diagonal entries vanish.
    """
    if not a <= c <= b:
        raise FracflowError("ORDERING", "need a <= c <= b")
    if flavor == "strat":
        get = lambda s, e: level2(path, s, e, convention).values
    elif flavor == "skorohod":
        get = lambda s, e: level2_skorohod(path, s, e, p, convention).values
    else:
        raise ValueError("flavor must be 'strat' or 'skorohod'")
    xa, xc, xb = (path.at([t])[..., 0] for t in (a, c, b))
    if convention == "reversed":
        cross = np.einsum("...i,...j->...ij", xb - xc, xc - xa)
    else:
        cross = np.einsum("...i,...j->...ij", xc - xa, xb - xc)
    return get(a, b) - get(a, c) - get(c, b) - cross


def scaling_fit(lengths, mean_sq_norms) -> float:
    """Least-squares slope of ``log E||X||^2`` against ``log |b - a|``."""
    slope, _ = np.polyfit(np.log(np.asarray(lengths, float)), np.log(np.asarray(mean_sq_norms, float)), 1)
    return float(slope)


def scaling_report(path: FbmPath, lengths, level: int = 2, a: float = 0.0) -> dict:
    """Monte Carlo ``E||X^{(level)}_{a, a+l}||^2`` over a path batch and its
    fitted slope (expected ``4H`` for level 2 and ``6H`` for level 3)."""
    if not path.batched:
        raise FracflowError("SHAPE", "scaling needs a batch of paths")
    norms = []
    for ell in lengths:
        if level == 2:
            v = level2(path, a, a + ell).values
        else:
            v = level3(path, a, a + ell).values
        norms.append(float(np.mean(np.sum(v ** 2, axis=tuple(range(1, v.ndim))))))
    slope = scaling_fit(lengths, norms)
    target = (2 if level == 2 else 3) * 2.0 * path.params.H
    return {"level": level, "lengths": list(map(float, lengths)), "mean_sq_norms": norms,
            "slope": slope, "target": target}
