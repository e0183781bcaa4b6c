"""Recovering the driving Brownian motion from an fBm path.

The conjugate kernel ``S^{2-alpha}_t`` inverts the fBm map:
``T^alpha * S^{2-alpha}_t = -1_[0,t]``, hence
``B_t = -int S^{2-alpha}_t(u) dX_u`` (truncated to ``[-R, R]``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, signal

from .errors import FracflowError
from .kernels import (HurstParams, _kernel_T_unchecked, kernel_St, s_shifted,
                      st_cell_integrals)
from .synthesis import FbmPath, NoiseField, kernel_weights, synth_kernel


@dataclass(frozen=True)
class InverseKernelSpec:
    """Window ``[-R, R]`` and target time ``t`` for the conjugate kernel."""

    p: HurstParams
    R: float
    t: float

    def __post_init__(self):
        if not self.R > 0:
            raise FracflowError("DOMAIN_TOO_SMALL", "R must be positive")

    @property
    def conjugate_alpha(self) -> float:
        return 2.0 - self.p.alpha

    @property
    def conjugate(self) -> HurstParams:
        return self.p.conjugate()


def inverse_kernel(u, t: float, spec: InverseKernelSpec):
    """``phi_R(u) = [S^{2-alpha}(u) - S^{2-alpha}(u - t)] 1_{[-R, R]}(u)``."""
    u_arr = np.asarray(u, dtype=float)
    inside = np.abs(u_arr) <= spec.R
    out = np.zeros_like(u_arr)
    if t == 0.0:
        return out if u_arr.ndim else 0.0
    if np.any(inside):
        out[inside] = kernel_St(t, u_arr[inside], spec.conjugate)
    return out if u_arr.ndim else float(out)


def convolution_identity_check(t: float, p: HurstParams, h: float = 2.0 ** -10, L: float = 8.0,
                               exclusion: float = 5.0, tail: bool = True, probe: float = 0.2) -> dict:
    """Discrete check of ``T^alpha * S^{2-alpha}_t = -1_[0,t]``.

    ``S^{2-alpha}_t`` is replaced by its cell averages on the grid
    ``v_k = k h``, ``|v_k| <= L``; the convolution with ``T^alpha`` is then
    exact cell by cell (``int_cell T = difference of S``) and evaluated for
    all ``v_k`` at once by FFT.  With ``tail=True`` the part of the kernel
    outside the grid is added by adaptive quadrature, so only the
    discretisation error remains.

    Returns
    -------
    dict with ``max_error`` over grid points of ``[-2|t|, 2|t|]`` farther
    than ``exclusion * h`` from ``{0, t}``, and ``probe_error``, the max
    error at distance ``> probe`` (a fixed, h-independent zone).
    """
    if t == 0.0:
        return {"max_error": 0.0, "probe_error": 0.0, "h": h, "L": L}
    if L < 2.0 * abs(t) or h > abs(t) / 20.0:
        raise FracflowError("GRID_TOO_COARSE", "need L >= 2|t| and h <= |t|/20")
    q = p.conjugate()
    n = int(round(L / h))
    v = np.arange(-n, n + 1) * h
    edges = np.append(v - 0.5 * h, v[-1] + 0.5 * h)
    phi_bar = st_cell_integrals(t, edges, q) / h
    m = np.arange(-2 * n, 2 * n + 1)
    t_cells = s_shifted((m + 0.5) * h, p) - s_shifted((m - 0.5) * h, p)
    conv = signal.fftconvolve(phi_bar, t_cells)[2 * n:4 * n + 1]
    dist = np.minimum(np.abs(v), np.abs(v - t))
    keep = (np.abs(v) <= 2.0 * abs(t)) & (dist > exclusion * h)
    vk = v[keep]
    result = conv[keep]
    if tail:
        result = result + _outside_grid(vk, t, p, q, L + 0.5 * h)
    target = -((vk >= min(0.0, t)) & (vk <= max(0.0, t))).astype(float)
    if t < 0:
        target = -target
    err = np.abs(result - target)
    far = dist[keep] > probe
    return {"max_error": float(err.max()), "probe_error": float(err[far].max()) if far.any() else 0.0,
            "h": h, "L": L}


def _outside_grid(v: np.ndarray, t: float, p: HurstParams, q: HurstParams, edge: float) -> np.ndarray:
    f = lambda u: _kernel_T_unchecked(v - u, p) * (s_shifted(u, q) - s_shifted(u - t, q))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        right = integrate.quad_vec(f, edge, np.inf, epsrel=1e-10)[0]
        left = integrate.quad_vec(f, -np.inf, -edge, epsrel=1e-10)[0]
    return right + left


def recovery_weights(path_times: np.ndarray, t, p: HurstParams, R: float) -> np.ndarray:
    """Matrix ``(len(t), cells)``: minus the cell averages of ``phi_R``
    over the path cells inside ``[-R, R]`` (exact, by the closed-form
    primitive with the conjugate exponent)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lo, hi = np.searchsorted(path_times, [-R, R])
    edges = path_times[lo:hi + 1]
    W = np.zeros((len(t), len(path_times) - 1))
    if len(edges) > 1:
        W[:, lo:lo + len(edges) - 1] = -st_cell_integrals(t, edges, p.conjugate()) / np.diff(edges)
    return W


def recover_bm(path: FbmPath, t, p: HurstParams, R: float | None = None) -> np.ndarray:
    """``B_t ~ -sum_j avg_j(phi_R) (X_{u_{j+1}} - X_{u_j})``.

    ``R`` defaults to the largest window the path grid covers.  Returns
    shape ``(..., d, len(t))``.
    """
    times = path.times
    if R is None:
        R = float(min(-times[0], times[-1]))
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if not R > 0 or times[0] > -R + 1e-12 * R or times[-1] < R - 1e-12 * R:
        raise FracflowError("DOMAIN_TOO_SMALL", "path grid must cover [-R, R]")
    if np.any(np.abs(t_arr) > 0.25 * R):
        raise FracflowError("DOMAIN_TOO_SMALL", "targets must lie within [-R/4, R/4]")
    path.index_of([-R, R], "window end")
    W = recovery_weights(times, t_arr, p, R)
    dx = np.diff(path.values, axis=-1)
    out = dx @ W.T
    out[..., t_arr == 0.0] = 0.0
    return out


def round_trip_fbm(noise, p: HurstParams, t_grid, R: float, h: float) -> dict:
    """``B -> X -> B_hat -> X_hat`` over a batch of noise fields.

    ``X`` is the grid-resolved kernel path (``subgrid="omit"``, so it is a
    function of ``B`` alone) on the step-``h`` grid of ``[-R, R]``;
    ``B_hat`` is recovered on the same grid inside ``[-R/4, R/4]``;
    ``X_hat`` re-applies the forward kernel to ``B_hat`` increments there.

    Returns per-time relative L2 errors ``||B_hat - B|| / ||B||`` and
    ``||X_hat - X|| / ||X||`` (0 at ``t = 0``).
    """
    fields = [noise] if isinstance(noise, NoiseField) else list(noise)
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    k = int(round(R / h))
    grid = h * np.arange(-k, k + 1)
    x = synth_kernel(grid, p, fields, subgrid="omit")  # (N, d, n)
    inner = grid[np.abs(grid) <= 0.25 * R + 1e-12]
    b_hat = recover_bm(x, inner, p, R)
    b_true = np.stack([f.brownian(inner) for f in fields])
    x_true = x.values[..., x.index_of(t_grid)]
    r_in = float(inner[-1])
    w_fwd = kernel_weights(t_grid, p, r_in, h)
    x_hat = np.diff(b_hat, axis=-1) @ w_fwd.T
    idx = np.searchsorted(inner, t_grid)
    if np.any(np.abs(inner[np.clip(idx, 0, len(inner) - 1)] - t_grid) > 1e-9):
        raise FracflowError("MISSING_SAMPLE", "t_grid must be grid nodes inside [-R/4, R/4]")
    b_at = b_hat[..., idx]
    b_true_at = b_true[..., idx]

    def rel(est, ref):
        num = np.sqrt(np.mean((est - ref) ** 2, axis=(0, 1)))
        den = np.sqrt(np.mean(ref ** 2, axis=(0, 1)))
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)

    return {"t": t_grid.tolist(), "bm_error": rel(b_at, b_true_at).tolist(),
            "fbm_error": rel(x_hat, x_true).tolist(), "R": R, "h": h, "n": len(fields)}
