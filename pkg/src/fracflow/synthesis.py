"""Sampling fBm paths: covariance factorisation, white-noise convolution and
the regularised families (mollified, Poisson/harmonic, Gamma kernel).

All samplers return an :class:`FbmPath` whose ``values`` have shape
``(d, n)`` for a single draw or ``(n_paths, d, n)`` for a batch.  Every
method pins the value at ``t = 0`` to exactly zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, signal, special

from .errors import FracflowError
from .kernels import (HurstParams, covariance_closed, covariance_matrix,
                      s_primitive, s_shifted, st_cell_integrals)
from .rng import derive_seed, standard_normals, stream

JITTER_LADDER = (0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)
DENSE_LIMIT = 50_000_000


def grid_index(times: np.ndarray, t, what: str = "time") -> np.ndarray:
    """Indices of ``t`` in the sorted grid ``times`` (tolerance 1e-9 relative)."""
    t = np.asarray(t, dtype=float)
    idx = np.clip(np.searchsorted(times, t), 0, len(times) - 1)
    lower = np.clip(idx - 1, 0, len(times) - 1)
    closer = np.abs(times[lower] - t) < np.abs(times[idx] - t)
    idx = np.where(closer, lower, idx)
    scale = max(1.0, float(np.max(np.abs(times))))
    if np.any(np.abs(times[idx] - t) > 1e-9 * scale):
        raise FracflowError("MISSING_SAMPLE", f"{what} not on the sample grid")
    return idx


@dataclass
class FbmPath:
    """Sampled fBm values on a time grid.

    ``values`` is ``(d, n)`` or ``(n_paths, d, n)``; ``method`` is a short
    tag such as ``"exact"`` or ``"kernel(R=100,h=0.0625)"``.
    """

    times: np.ndarray
    values: np.ndarray
    params: HurstParams
    method: str
    noise_seed: int | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise FracflowError("NOT_INCREASING", "path times must be strictly increasing")
        if self.values.ndim < 2 or self.values.shape[-1] != len(self.times):
            raise FracflowError("SHAPE", "values must be (..., d, len(times))")

    @property
    def d(self) -> int:
        return self.values.shape[-2]

    @property
    def batched(self) -> bool:
        return self.values.ndim == 3

    def index_of(self, t, what: str = "time") -> np.ndarray:
        """Grid indices of ``t``; raises ``MISSING_SAMPLE`` if any is off-grid."""
        return grid_index(self.times, t, what)

    def at(self, t) -> np.ndarray:
        """Values at grid times ``t``: shape ``(..., d, len(t))``."""
        return self.values[..., self.index_of(t)]

    def select(self, i: int) -> "FbmPath":
        """Single draw ``i`` of a batch."""
        return FbmPath(self.times, self.values[i], self.params, self.method, self.noise_seed)


# --------------------------------------------------------------------------
# white noise on a uniform grid


@dataclass(eq=False)
class NoiseField:
    """Brownian increments on the uniform grid ``-R = u_0 < ... < u_M = R``.

    ``increments`` has shape ``(d, M)`` with i.i.d. ``N(0, h)`` entries drawn
    from the stream ``(seed, 0, k, "noise")`` for dimension ``k``.
    """

    seed: int
    R: float
    h: float
    increments: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.increments = np.asarray(self.increments, dtype=float)
        _check_grid(self.R, self.h)
        if self.increments.ndim != 2 or self.increments.shape[1] != n_cells(self.R, self.h):
            raise FracflowError("GRID_MISMATCH", "increments do not match the (R, h) grid")

    @classmethod
    def generate(cls, seed: int, R: float, h: float, d: int = 1) -> "NoiseField":
        m = n_cells(R, h)
        inc = math.sqrt(h) * np.stack([stream(seed, 0, k, "noise").standard_normal(m) for k in range(d)])
        return cls(int(seed), float(R), float(h), inc)

    @property
    def d(self) -> int:
        return self.increments.shape[0]

    @property
    def edges(self) -> np.ndarray:
        return grid_edges(self.R, self.h)

    def brownian(self, t) -> np.ndarray:
        """``B_t`` (with ``B_0 = 0``), linear between grid nodes; shape ``(d, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        cum = np.concatenate([np.zeros((self.d, 1)), np.cumsum(self.increments, axis=1)], axis=1)
        k0 = int(round(self.R / self.h))
        cum = cum - cum[:, k0:k0 + 1]
        return np.stack([np.interp(t, self.edges, cum[k]) for k in range(self.d)])


def n_cells(R: float, h: float) -> int:
    return int(round(2.0 * R / h))


def grid_edges(R: float, h: float) -> np.ndarray:
    return -R + h * np.arange(n_cells(R, h) + 1)


def _check_grid(R: float, h: float):
    if not (R > 0 and h > 0):
        raise FracflowError("GRID_MISMATCH", "R and h must be positive")
    k = R / h
    if abs(k - round(k)) > 1e-9 * max(1.0, k):
        raise FracflowError("GRID_MISMATCH", "R must be an integer multiple of h (0 must be a node)")


def noise_batch(seed: int, n: int, R: float, h: float, d: int = 1, start: int = 0) -> list[NoiseField]:
    """Noise fields ``start .. start+n-1`` with seeds ``derive_seed(seed, i)``."""
    return [NoiseField.generate(derive_seed(seed, i), R, h, d) for i in range(start, start + n)]


def _stack_noise(noise) -> tuple[np.ndarray, NoiseField, bool]:
    single = isinstance(noise, NoiseField)
    fields = [noise] if single else list(noise)
    if not fields:
        raise FracflowError("GRID_MISMATCH", "empty noise batch")
    ref = fields[0]
    for f in fields[1:]:
        if f.R != ref.R or f.h != ref.h or f.d != ref.d:
            raise FracflowError("GRID_MISMATCH", "noise fields in a batch must share R, h and d")
    return np.stack([f.increments for f in fields]), ref, single


def _check_times_in_window(times: np.ndarray, R: float):
    if np.max(np.abs(times)) > 0.5 * R:
        raise FracflowError("TRUNCATION_TOO_SMALL", "all times must lie within [-R/2, R/2]")


def _validate_times(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.ndim != 1 or np.any(np.diff(times) <= 0):
        raise FracflowError("NOT_INCREASING", "times must be strictly increasing")
    return times


# --------------------------------------------------------------------------
# covariance factorisation

_FACTOR_CACHE: dict = {}


def factor_covariance(C: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, escalating diagonal jitter up to ``1e-8 * trace``."""
    C = 0.5 * (C + C.T)
    tr = float(np.trace(C))
    eye = np.eye(len(C))
    for rel in JITTER_LADDER:
        try:
            return np.linalg.cholesky(C + rel * tr * eye)
        except np.linalg.LinAlgError:
            continue
    raise FracflowError("FACTORIZATION_FAILURE", "covariance not positive definite after max jitter")


def _cached_factor(key, build):
    if key not in _FACTOR_CACHE:
        if len(_FACTOR_CACHE) >= 16:
            _FACTOR_CACHE.pop(next(iter(_FACTOR_CACHE)))
        _FACTOR_CACHE[key] = factor_covariance(build())
    return _FACTOR_CACHE[key]


def _gaussian_from_factor(L: np.ndarray, seed: int, n_paths: int, d: int, purpose: str) -> np.ndarray:
    z = standard_normals(seed, n_paths, d, L.shape[0], purpose)
    return (z.reshape(-1, L.shape[0]) @ L.T).reshape(z.shape)


def _finish(times, values, p, method, seed, n_paths):
    if n_paths is None:
        values = values[0]
    return FbmPath(times, values, p, method, seed)


def synth_exact(times, p: HurstParams, d: int = 1, seed: int = 0, n_paths: int | None = None) -> FbmPath:
    """Gaussian vector with covariance ``covariance_closed`` per coordinate.

    Draw ``i``, coordinate ``k`` uses stream ``(seed, i, k, "exact")``.
    """
    times = _validate_times(times)
    nz = times != 0.0
    values = np.zeros((n_paths or 1, d, len(times)))
    if np.any(nz):
        t_nz = times[nz]
        L = _cached_factor(("exact", p.H, t_nz.tobytes()), lambda: covariance_matrix(t_nz, p))
        values[..., nz] = _gaussian_from_factor(L, seed, n_paths or 1, d, "exact")
    return _finish(times, values, p, "exact", seed, n_paths)


# --------------------------------------------------------------------------
# white-noise convolution


def kernel_weights(times, p: HurstParams, R: float, h: float) -> np.ndarray:
    """Cell averages ``w_j(t) = (1/h) int_{cell j} S_t(u) du``, shape ``(n, M)``."""
    return st_cell_integrals(np.asarray(times, dtype=float), grid_edges(R, h), p) / h


def truncation_tail(t: float, p: HurstParams, R: float) -> float:
    """``int_{|u|>R} S_t(u)**2 du``, the variance lost to the window ``[-R, R]``."""
    f = lambda u: float((s_shifted(u, p) - s_shifted(t - u, p)) ** 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        right = integrate.quad(f, R, np.inf, epsabs=0.0, epsrel=1e-8, limit=200)[0]
        left = integrate.quad(f, -np.inf, -R, epsabs=0.0, epsrel=1e-8, limit=200)[0]
    return right + left


def calibrate_noise_step(times, p: HurstParams, R: float | None = None, target: float = 0.005,
                         h_start: float = 0.125, h_min: float = 1.0 / 256):
    """Halve ``h`` until the grid-resolved variance at the largest ``|t|``
    is within ``target`` (relative) of the variance inside ``[-R, R]``, or
    ``h_min`` is hit.

    The truncation tail is reported separately: at ``H = 0.7`` and
    ``R = 50 max|t|`` it alone is about 4%, which no step size can fix.

    Returns
    -------
    dict with ``R``, ``h``, ``grid_deficit`` and ``tail_deficit`` (both
    relative to ``2 K(2 alpha) |t|**2H``).
    """
    times = _validate_times(times)
    t_max = float(np.max(np.abs(times)))
    if R is None:
        R = 50.0 * max(t_max, 1.0)
    var = covariance_closed(t_max, t_max, p)
    h = h_start
    while True:
        R_eff = h * math.ceil(R / h)
        tail = truncation_tail(t_max, p, R_eff) / var
        w = kernel_weights([t_max], p, R_eff, h)[0]
        deficit = 1.0 - h * float(w @ w) / var - tail
        if deficit <= target or h / 2 < h_min:
            return {"R": R_eff, "h": h, "grid_deficit": deficit, "tail_deficit": tail}
        h /= 2


def synth_kernel(times, p: HurstParams, noise, subgrid: str = "sample") -> FbmPath:
    """Discretised white-noise integral ``X_t = sum_j w_j(t) dB_j``.

    The weights are exact cell averages of ``S_t``, so the grid part is the
    L2 projection of the kernel onto the noise grid.  With
    ``subgrid="sample"`` the part the grid cannot resolve (sub-cell detail
    and the tail outside ``[-R, R]``) is added as an independent Gaussian
    with covariance ``covariance_closed - h W W^T`` from the
    ``(seed, 0, k, "subgrid")`` streams, which makes the marginal law exact.
    ``subgrid="omit"`` returns the grid part alone; grid-aligned times then
    go through an FFT convolution instead of a dense weight matrix.
    """
    times = _validate_times(times)
    inc, ref, single = _stack_noise(noise)
    _check_times_in_window(times, ref.R)
    if subgrid not in ("sample", "omit"):
        raise ValueError("subgrid must be 'sample' or 'omit'")
    n, m = len(times), inc.shape[-1]
    on_grid = np.allclose((times + ref.R) / ref.h, np.round((times + ref.R) / ref.h), atol=1e-9, rtol=0)
    if subgrid == "omit" and on_grid and n * m > 4_000_000:
        values = _kernel_fft(times, p, inc, ref)
    else:
        if n * m > DENSE_LIMIT:
            raise FracflowError("TOO_LARGE", "dense weights too large; use subgrid='omit' on grid-aligned times")
        W = kernel_weights(times, p, ref.R, ref.h)
        values = (inc.reshape(-1, m) @ W.T).reshape(inc.shape[:2] + (n,))
        if subgrid == "sample":
            nz = times != 0.0
            C = covariance_matrix(times[nz], p) - ref.h * W[nz] @ W[nz].T
            L = factor_covariance(C)
            seeds = [ref.seed] if single else [f.seed for f in noise]
            for i, s in enumerate(seeds):
                z = np.stack([stream(s, 0, k, "subgrid").standard_normal(L.shape[0]) for k in range(ref.d)])
                values[i][:, nz] += z @ L.T
    values[..., times == 0.0] = 0.0
    tag = f"kernel(R={ref.R:g},h={ref.h:g})"
    if single:
        return FbmPath(times, values[0], p, tag, ref.seed)
    return FbmPath(times, values, p, tag, None)


def _kernel_fft(times, p, inc, ref) -> np.ndarray:
    h, m = ref.h, inc.shape[-1]
    # g[k] = (1/h) * int_{kh}^{(k+1)h} s(v) dv for k = -M .. M-1
    ks = np.arange(-m, m + 1) * h
    prim = s_primitive(ks, p)
    g = np.diff(prim) / h
    conv = signal.fftconvolve(inc, g[None, None, :], axes=-1)
    k_nodes = np.rint((times + ref.R) / h).astype(int)
    k0 = int(round(ref.R / h))
    # X at node k: c[k0] - c[k], c[k] = conv[k - 1 + M]
    return conv[..., k0 - 1 + m][..., None] - conv[..., k_nodes - 1 + m]


# --------------------------------------------------------------------------
# mollified and Poisson-smoothed kernels


@dataclass(frozen=True)
class Mollifier:
    """Unit-mass smoothing kernel: ``triangle`` (half-width ``width``) or
    ``gaussian`` (standard deviation ``width``)."""

    kind: str
    width: float

    def __post_init__(self):
        if self.kind not in ("triangle", "gaussian"):
            raise ValueError("mollifier kind must be 'triangle' or 'gaussian'")
        if not self.width > 0:
            raise ValueError("mollifier width must be positive")

    def nodes(self, order: int = 32) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes and weights for ``int rho(v) g(v) dv``."""
        if self.kind == "gaussian":
            x, w = np.polynomial.hermite_e.hermegauss(2 * order)
            return self.width * x, w / math.sqrt(2.0 * math.pi)
        x, w = np.polynomial.legendre.leggauss(order)
        v = 0.5 * (x + 1.0) * self.width  # [0, w]
        wt = 0.5 * w * self.width * (self.width - v) / self.width ** 2
        return np.concatenate([-v, v]), np.concatenate([wt, wt])

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-0.5 * (v / self.width) ** 2) / (self.width * math.sqrt(2.0 * math.pi))
        return np.clip(self.width - np.abs(v), 0.0, None) / self.width ** 2


def mollified_weights(times, p: HurstParams, R: float, h: float, rho: Mollifier) -> np.ndarray:
    """Cell averages of ``S_t * rho``."""
    edges = grid_edges(R, h)
    vs, ws = rho.nodes()
    W = np.zeros((len(times), len(edges) - 1))
    for v, w in zip(vs, ws):
        W += w * st_cell_integrals(np.asarray(times, dtype=float), edges - v, p)
    return W / h


def synth_mollified(times, p: HurstParams, noise, rho: Mollifier) -> FbmPath:
    """Grid-resolved white-noise integral of ``S_t * rho``."""
    times = _validate_times(times)
    inc, ref, single = _stack_noise(noise)
    _check_times_in_window(times, ref.R)
    W = mollified_weights(times, p, ref.R, ref.h, rho)
    values = (inc.reshape(-1, inc.shape[-1]) @ W.T).reshape(inc.shape[:2] + (len(times),))
    values[..., times == 0.0] = 0.0
    tag = f"mollified({rho.kind},{rho.width:g})"
    if single:
        return FbmPath(times, values[0], p, tag, ref.seed)
    return FbmPath(times, values, p, tag, None)


def _poisson_parts(x, y, p: HurstParams):
    """Shared pieces of the harmonic extension of the shifted kernel."""
    x = np.asarray(x, dtype=float)
    beta = p.alpha - 1.0
    a = 0.5 * np.log(x * x + y * y)
    b = np.arctan2(-x, y)
    if abs(beta) < 1e-9:
        return x, a, b, a, b, 0.0, 1.0
    re_e = (np.expm1(beta * a) * np.cos(beta * b) - 2.0 * np.sin(0.5 * beta * b) ** 2) / beta
    im_e = np.exp(beta * a) * np.sin(beta * b) / beta
    theta = 0.5 * math.pi * beta
    return x, a, b, re_e, im_e, 2.0 * math.sin(0.5 * theta) ** 2 / beta, math.cos(theta)


def poisson_s_shifted(x, y: float, p: HurstParams) -> np.ndarray:
    """``(rho_y * s)(x)`` with the Cauchy kernel ``rho_y(v) = y / (pi (v^2 + y^2))``.

    Closed form: ``K (Re[(y - i x)**(alpha-1)] / cos(pi (alpha-1) / 2) - 1)``,
    harmonic in ``(x, y)``.
    """
    x, a, b, re_e, im_e, one_minus_cos, cos_t = _poisson_parts(x, y, p)
    return p.t_coef * (re_e + one_minus_cos) / cos_t


def poisson_s_primitive(x, y: float, p: HurstParams) -> np.ndarray:
    """Odd primitive in ``x`` of :func:`poisson_s_shifted`."""
    x, a, b, re_e, im_e, one_minus_cos, cos_t = _poisson_parts(x, y, p)
    scale = p.t_coef / (p.alpha * cos_t)
    return scale * (x * (one_minus_cos - cos_t) + x * re_e - y * im_e)


def poisson_weights(times, p: HurstParams, R: float, h: float, y: float) -> np.ndarray:
    edges = grid_edges(R, h)
    t = np.asarray(times, dtype=float)[:, None]
    q = poisson_s_primitive(edges[None, :], y, p) + poisson_s_primitive(t - edges[None, :], y, p)
    return np.diff(q, axis=-1) / h


def synth_poisson(times, p: HurstParams, noise, y: float) -> FbmPath:
    """Harmonic (Poisson-kernel) regularisation, one-dimensional noise only."""
    if not y > 0:
        raise FracflowError("NONPOSITIVE_Y", "the Poisson parameter y must be positive")
    times = _validate_times(times)
    inc, ref, single = _stack_noise(noise)
    if ref.d != 1:
        raise FracflowError("DIMENSION", "Poisson regularisation is defined for d = 1")
    _check_times_in_window(times, ref.R)
    W = poisson_weights(times, p, ref.R, ref.h, y)
    values = (inc.reshape(-1, inc.shape[-1]) @ W.T).reshape(inc.shape[:2] + (len(times),))
    values[..., times == 0.0] = 0.0
    tag = f"poisson({y:g})"
    if single:
        return FbmPath(times, values[0], p, tag, ref.seed)
    return FbmPath(times, values, p, tag, None)


def coupled_l2_error(times, p: HurstParams, R: float, h: float, other_weights: np.ndarray) -> np.ndarray:
    """``E[(X'_t - X_t)^2]`` for two grid-resolved paths driven by the same
    noise: ``h * sum_j (w'_j(t) - w_j(t))^2``."""
    W = kernel_weights(times, p, R, h)
    return h * np.sum((other_weights - W) ** 2, axis=1)


# --------------------------------------------------------------------------
# Gamma-kernel family


def gamma_kernel_cov(lag, p: HurstParams, lam: float, method: str = "fourier"):
    """Stationary covariance ``Cov(Y_t, Y_{t+lag}) = G^{2 alpha}_lambda(lag)``.

    ``"fourier"``: ``2^-alpha / (2 pi) int cos(lag xi) (lam + xi^2/2)^-alpha dxi``
    by QUADPACK's Fourier-integral rule on the half line;
    ``"mixture"``: the defining Gamma mixture of heat kernels;
    ``"bessel"``: the Matérn closed form.
    """
    if not lam > 0:
        raise FracflowError("NONPOSITIVE_LAMBDA", "lambda must be positive")
    lag = abs(float(lag))
    al = p.alpha
    if method == "fourier":
        f = lambda xi: (lam + 0.5 * xi * xi) ** (-al)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            if lag == 0.0:
                val = integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)[0]
            else:
                val = integrate.quad(f, 0.0, np.inf, weight="cos", wvar=lag, epsabs=1e-13, limlst=200)[0]
        return 2.0 ** (-al) / math.pi * val
    if method == "mixture":
        c = 2.0 ** (-al) / math.gamma(al)
        if lag == 0.0:
            g = lambda u: u ** (al - 1.5) * math.exp(-lam * u) / math.sqrt(2.0 * math.pi)
        else:
            g = lambda u: u ** (al - 1.0) * math.exp(-lam * u - lag * lag / (2.0 * u)) / math.sqrt(2.0 * math.pi * u)
        scale = 1.0 / lam
        parts = [(0.0, scale), (scale, np.inf)]
        return c * sum(integrate.quad(g, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)[0] for lo, hi in parts)
    if method == "bessel":
        a = math.sqrt(2.0 * lam)
        if lag == 0.0:
            return math.gamma(p.H) * a ** (-2.0 * p.H) / (2.0 * math.sqrt(math.pi) * math.gamma(al))
        return (lag / (2.0 * a)) ** p.H * special.kv(p.H, a * lag) / (math.sqrt(math.pi) * math.gamma(al))
    raise ValueError(f"unknown method {method!r}")


def gamma_covariance_matrix(times, p: HurstParams, lam: float, method: str = "fourier") -> np.ndarray:
    """``E(X_t X_s)`` for ``X_t = Y_t - Y_0``: ``C(t-s) - C(t) - C(s) + C(0)``."""
    times = np.asarray(times, dtype=float)
    lags = np.unique(np.abs(np.concatenate([times, (times[:, None] - times[None, :]).ravel(), [0.0]])))
    table = {float(l): gamma_kernel_cov(l, p, lam, method) for l in lags}
    c = np.vectorize(lambda l: table[float(abs(l))])
    return c(times[:, None] - times[None, :]) - c(times)[:, None] - c(times)[None, :] + table[0.0]


def synth_gamma(times, p: HurstParams, lam: float, seed: int = 0, d: int = 1,
                n_paths: int | None = None, method: str = "fourier") -> FbmPath:
    """``X^lambda_t = Y^lambda_t - Y^lambda_0`` by covariance factorisation."""
    if not lam > 0:
        raise FracflowError("NONPOSITIVE_LAMBDA", "lambda must be positive")
    times = _validate_times(times)
    nz = times != 0.0
    values = np.zeros((n_paths or 1, d, len(times)))
    if np.any(nz):
        t_nz = times[nz]
        L = _cached_factor(("gamma", p.H, lam, method, t_nz.tobytes()),
                           lambda: gamma_covariance_matrix(t_nz, p, lam, method))
        values[..., nz] = _gaussian_from_factor(L, seed, n_paths or 1, d, "gamma")
    return _finish(times, values, p, f"gamma({lam:g})", seed, n_paths)


# --------------------------------------------------------------------------
# piecewise-linear interpolation


def piecewise_linear(path: FbmPath, partition) -> FbmPath:
    """Linear interpolant through the partition nodes, sampled on the path
    times inside ``[a, b]``."""
    try:
        idx = path.index_of(partition.nodes, "partition node")
    except FracflowError as exc:
        raise FracflowError("NODE_MISMATCH", "partition nodes must be path times") from exc
    lo, hi = idx[0], idx[-1]
    t = path.times[lo:hi + 1]
    nodes = path.times[idx]
    v = path.values[..., idx]
    flat = v.reshape(-1, len(nodes))
    out = np.stack([np.interp(t, nodes, row) for row in flat]).reshape(v.shape[:-1] + (len(t),))
    return FbmPath(t, out, path.params, f"pl[{path.method}]", path.noise_seed)
