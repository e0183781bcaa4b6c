"""Singular convolution kernels of fractional Brownian motion.

The fBm of Hurst index ``H`` is the white-noise integral of

    S_t(u) = S(u) - S(t - u),   S(u) = K(alpha) |u|**(alpha - 1),

with ``alpha = H + 1/2`` and ``K(alpha) = 1 / (2 Gamma(alpha) cos(pi alpha / 2))``.
``K`` has a pole at ``alpha = 1`` while ``S_t`` stays finite (it becomes
``log|1 - t/u| / pi``), so every routine below works with the shifted kernel

    s(x) = S(x) - K(alpha) = c_T * expm1((alpha - 1) log|x|) / (alpha - 1),

where ``c_T = (alpha - 1) K(alpha)`` is the coefficient of ``T = S'``.  Its
primitive ``P`` (``P' = s``) is likewise finite at ``alpha = 1``.  Shifting by
a constant never changes ``S_t``, cell integrals of ``S_t`` or the
principal-value convolution with ``T``, and it makes all of them analytic
across ``alpha = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import FracflowError
from .quadrature import integrate_real_line, integrate_singular

ALPHA_ONE_TOL = 1e-9
EXACT_SEMINORM_MAX = 4096


@dataclass(frozen=True)
class HurstParams:
    """Hurst index and the normalising constants derived from it.

    ``k_alpha`` is ``None`` on the logarithmic branch ``|alpha - 1| < 1e-9``.
    """

    H: float
    alpha: float = field(init=False)
    k_alpha: float | None = field(init=False)
    k_2alpha: float = field(init=False)
    t_coef: float = field(init=False)

    def __post_init__(self):
        H = float(self.H)
        if not 0.0 < H < 1.0:
            raise FracflowError("INVALID_HURST", f"H must lie in (0, 1), got {H}")
        alpha = H + 0.5
        eps = alpha - 1.0
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "k_2alpha", 1.0 / (2.0 * math.gamma(2.0 * H + 1.0) * math.sin(math.pi * H)))
        if abs(eps) < ALPHA_ONE_TOL:
            object.__setattr__(self, "k_alpha", None)
            object.__setattr__(self, "t_coef", -1.0 / math.pi)
        else:
            # cos(pi alpha / 2) = -sin(pi (alpha - 1) / 2), exact near alpha = 1
            cos_half = -math.sin(0.5 * math.pi * eps)
            object.__setattr__(self, "k_alpha", 1.0 / (2.0 * math.gamma(alpha) * cos_half))
            object.__setattr__(self, "t_coef", float(special.rgamma(eps)) / (2.0 * cos_half))

    @property
    def log_branch(self) -> bool:
        return self.k_alpha is None

    @property
    def variance_scale(self) -> float:
        """``Var X_t = variance_scale * |t|**(2H)``."""
        return 2.0 * self.k_2alpha

    def conjugate(self) -> "HurstParams":
        """Parameters of the conjugate exponent ``2 - alpha`` (``H -> 1 - H``)."""
        return HurstParams(1.0 - self.H)


def _expm1_ratio(eps: float, log_abs: np.ndarray) -> np.ndarray:
    """``expm1(eps * L) / eps`` with the ``eps -> 0`` limit ``L``."""
    if abs(eps) < ALPHA_ONE_TOL:
        return log_abs
    return np.expm1(eps * log_abs) / eps


def s_shifted(x, p: HurstParams) -> np.ndarray:
    """``S(x) - K(alpha)``; ``+inf`` at 0 when ``alpha <= 1``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return p.t_coef * _expm1_ratio(p.alpha - 1.0, np.log(np.abs(x)))


def s_primitive(x, p: HurstParams) -> np.ndarray:
    """Odd primitive of :func:`s_shifted`, zero at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        e = _expm1_ratio(p.alpha - 1.0, np.log(np.abs(x)))
        out = p.t_coef * x * (e - 1.0) / p.alpha
    return np.where(x == 0.0, 0.0, out)


def st_primitive(t: float, x, p: HurstParams) -> np.ndarray:
    """Primitive in ``u`` of ``S_t(u)``: ``P(u) + P(t - u)``."""
    x = np.asarray(x, dtype=float)
    return s_primitive(x, p) + s_primitive(t - x, p)


def st_cell_integrals(t, edges, p: HurstParams) -> np.ndarray:
    """Exact integrals of ``S_t`` over the cells ``[edges[j], edges[j+1]]``.

    ``t`` may be an array; the result then has shape ``(len(t), len(edges) - 1)``.
    """
    edges = np.asarray(edges, dtype=float)
    t = np.asarray(t, dtype=float)
    q = st_primitive(t[..., None], edges, p)
    return np.diff(q, axis=-1)


def kernel_S(t, p: HurstParams):
    """``S(t) = K(alpha) |t|**(alpha - 1)``."""
    if p.log_branch:
        raise FracflowError("UNDEFINED_AT_ALPHA_ONE",
                            "S has a pole at alpha = 1; use kernel_St (logarithmic branch)")
    t = np.asarray(t, dtype=float)
    if p.alpha < 1.0 and np.any(t == 0.0):
        raise FracflowError("SINGULARITY", "S(0) is infinite for alpha < 1")
    out = p.k_alpha * np.abs(t) ** (p.alpha - 1.0)
    return out if out.ndim else float(out)


def kernel_St(t, u, p: HurstParams):
    """``S_t(u) = S(u) - S(t - u)``; ``log|1 - t/u| / pi`` at ``alpha = 1``."""
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(u == 0.0) or np.any(u == t):
        raise FracflowError("SINGULARITY", "S_t(u) is evaluated only for u not in {0, t}")
    out = s_shifted(u, p) - s_shifted(t - u, p)
    return out if out.ndim else float(out)


def kernel_T(t, p: HurstParams):
    """``T(t) = |t|**(alpha - 2) sign(t) / (2 Gamma(alpha - 1) cos(pi alpha / 2))``."""
    t = np.asarray(t, dtype=float)
    if np.any(t == 0.0):
        raise FracflowError("SINGULARITY", "T is singular at 0")
    out = p.t_coef * np.abs(t) ** (p.alpha - 2.0) * np.sign(t)
    return out if out.ndim else float(out)


def _kernel_T_unchecked(t, p: HurstParams) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return p.t_coef * np.abs(t) ** (p.alpha - 2.0) * np.sign(t)


def covariance_closed(t, s, p: HurstParams):
    """``K(2 alpha) (|t|**2H + |s|**2H - |t - s|**2H)``."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    h2 = 2.0 * p.H
    out = p.k_2alpha * (np.abs(t) ** h2 + np.abs(s) ** h2 - np.abs(t - s) ** h2)
    return out if out.ndim else float(out)


def covariance_matrix(times, p: HurstParams) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    return covariance_closed(times[:, None], times[None, :], p)


def st_fourier(xi, t, p: HurstParams):
    """``(1 - exp(i t xi)) / |xi|**alpha``, the transform of ``S_t``."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi == 0.0):
        raise FracflowError("SINGULARITY", "the transform of S_t is singular at xi = 0")
    out = (1.0 - np.exp(1j * t * xi)) / np.abs(xi) ** p.alpha
    return out if out.ndim else complex(out)


def covariance_quadrature(t: float, s: float, p: HurstParams, tol: float = 1e-4):
    """``int S_t(u) S_s(u) du`` over the real line by graded quadrature.

    Independent of :func:`covariance_closed`; used as its oracle.
    """
    def integrand(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (s_shifted(u, p) - s_shifted(t - u, p)) * (s_shifted(u, p) - s_shifted(s - u, p))

    if t == 0.0 or s == 0.0:
        return 0.0, {"radius": 0.0, "tail_estimate": 0.0}
    # |S_t(u)| ~ |c_T| |t| |u|**(alpha - 2) for |u| >> |t|
    tail_coef = p.t_coef ** 2 * abs(t * s) * 4.0
    return integrate_real_line(integrand, [0.0, t, s], tail_coef, 2.0 * p.alpha - 4.0, tol=tol)


# --------------------------------------------------------------------------
# Hölder functions and the principal-value convolution


@dataclass
class HolderFunction:
    """A sampled Hölder-continuous function on ``[a, b]``.

    ``values`` has shape ``(n,)`` or ``(n, m)`` for vector-valued functions.
    Between samples the function is read as its linear interpolant unless an
    exact ``func`` is supplied.
    """

    times: np.ndarray
    values: np.ndarray
    holder_exponent: float
    seminorm_estimate: float | None = None
    func: Callable | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or len(self.times) < 2:
            raise FracflowError("INSUFFICIENT_SAMPLES", "need at least two sample times")
        if np.any(np.diff(self.times) <= 0):
            raise FracflowError("NOT_INCREASING", "sample times must be strictly increasing")
        if self.values.shape[0] != len(self.times):
            raise FracflowError("SHAPE", "values must have one row per sample time")
        if not 0.0 < self.holder_exponent <= 1.0:
            raise FracflowError("INVALID_EXPONENT", "Hölder exponent must lie in (0, 1]")
        if self.seminorm_estimate is None:
            self.seminorm_estimate = holder_seminorm(self.times, self.values, self.holder_exponent)

    @classmethod
    def from_callable(cls, func, a: float, b: float, holder_exponent: float,
                      n_samples: int = 513, seminorm: float | None = None):
        times = np.linspace(a, b, n_samples)
        values = np.asarray(func(times), dtype=float)
        if values.ndim == 2 and values.shape[0] != n_samples:
            values = values.T
        return cls(times, values, holder_exponent, seminorm, func)

    @property
    def a(self) -> float:
        return float(self.times[0])

    @property
    def b(self) -> float:
        return float(self.times[-1])

    @property
    def sup_norm(self) -> float:
        v = self.values.reshape(len(self.times), -1)
        return float(np.max(np.linalg.norm(v, axis=1)))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.func is not None:
            out = np.asarray(self.func(t), dtype=float)
            if out.ndim == t.ndim + 1 and out.shape[0] != t.shape[0] and self.values.ndim == 2:
                out = np.moveaxis(out, 0, -1)
            return out
        if self.values.ndim == 1:
            return np.interp(t, self.times, self.values)
        return np.stack([np.interp(t, self.times, self.values[:, k])
                         for k in range(self.values.shape[1])], axis=-1)


def holder_seminorm(times, values, hprime: float, exact: bool | None = None) -> float:
    """Discrete ``sup |phi(t) - phi(s)| / |t - s|**hprime`` over sampled pairs.

    Exact O(n^2) scan up to 4096 samples.  Above that (or with
    ``exact=False``) only adjacent pairs are scanned, which is a lower bound
    of the exact value.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float).reshape(len(times), -1)
    n = len(times)
    if n < 2:
        raise FracflowError("INSUFFICIENT_SAMPLES", "need at least two samples")
    if not 0.0 < hprime <= 1.0:
        raise FracflowError("INVALID_EXPONENT", "hprime must lie in (0, 1]")
    if exact is None:
        exact = n <= EXACT_SEMINORM_MAX
    if not exact:
        num = np.linalg.norm(np.diff(values, axis=0), axis=1)
        return float(np.max(num / np.diff(times) ** hprime))
    best = 0.0
    block = max(1, 2_000_000 // n)
    for i0 in range(0, n - 1, block):
        i1 = min(n - 1, i0 + block)
        dt = times[None, :] - times[i0:i1, None]
        dv = np.linalg.norm(values[None, :, :] - values[i0:i1, None, :], axis=2)
        mask = dt > 0
        if np.any(mask):
            best = max(best, float(np.max(dv[mask] / dt[mask] ** hprime)))
    return best


def _check_pv_args(phi: HolderFunction, u: np.ndarray, p: HurstParams):
    if p.H + phi.holder_exponent <= 0.5:
        raise FracflowError("EXPONENT_GATE", "need H + H' > 1/2")
    if np.any(u == phi.a) or np.any(u == phi.b):
        raise FracflowError("ENDPOINT", "the convolution is undefined at the interval endpoints")


def pv_convolve(phi: HolderFunction, u, p: HurstParams, method: str = "auto", chunk: int = 2048):
    """Principal-value convolution ``f(u) = p.v. int_a^b phi(t) T(u - t) dt``.

    ``method="closed"`` integrates the piecewise-linear interpolant of the
    samples exactly (integration by parts against ``S`` and its primitive).
    ``method="quadrature"`` evaluates ``phi`` itself: plain graded quadrature
    for ``u`` outside ``[a, b]`` and the compensated form

        phi(u) [S(u - a) - S(u - b)] + int_a^b [phi(t) - phi(u)] T(u - t) dt

    inside.  ``"auto"`` picks ``closed`` unless an exact ``func`` is attached.
    Vector-valued ``phi`` is handled componentwise; the output has shape
    ``u.shape + value_shape``.
    """
    u = np.asarray(u, dtype=float)
    _check_pv_args(phi, u, p)
    if method == "auto":
        method = "quadrature" if phi.func is not None else "closed"
    if method == "closed":
        return _pv_closed(phi, u, p, chunk)
    if method == "quadrature":
        flat = u.ravel()
        out = np.stack([_pv_quadrature(phi, float(x), p) for x in flat])
        return out.reshape(u.shape + phi.values.shape[1:])
    raise ValueError(f"unknown method {method!r}")


def _pv_closed(phi: HolderFunction, u: np.ndarray, p: HurstParams, chunk: int) -> np.ndarray:
    t = phi.times
    v = phi.values.reshape(len(t), -1)
    slopes = np.diff(v, axis=0) / np.diff(t)[:, None]
    # summation by parts: node k carries the slope jump m_k - m_{k-1}
    zero = np.zeros((1, v.shape[1]))
    jumps = np.vstack([slopes, zero]) - np.vstack([zero, slopes])
    flat = u.ravel()
    out = np.empty((flat.size, v.shape[1]))
    for i0 in range(0, flat.size, chunk):
        uu = flat[i0:i0 + chunk]
        prim = s_primitive(uu[:, None] - t[None, :], p)
        out[i0:i0 + chunk] = (np.outer(s_shifted(uu - t[0], p), v[0])
                              - np.outer(s_shifted(uu - t[-1], p), v[-1])
                              + prim @ jumps)
    shape = u.shape + phi.values.shape[1:]
    return out.reshape(shape)


def _pv_quadrature(phi: HolderFunction, u: float, p: HurstParams) -> np.ndarray:
    a, b = phi.a, phi.b
    kinks = phi.times[1:-1] if phi.func is None and len(phi.times) <= 1025 else ()

    def vals(t):
        return np.asarray(phi(t), dtype=float).reshape(len(t), -1).T

    if u < a or u > b:
        near = [a] if u < a else [b]
        return integrate_singular(lambda t: vals(t) * _kernel_T_unchecked(u - t, p),
                                  a, b, near, breakpoints=kinks)
    phi_u = vals(np.array([u]))[:, 0]
    head = phi_u * (s_shifted(u - a, p) - s_shifted(u - b, p))
    tail = integrate_singular(lambda t: (vals(t) - phi_u[:, None]) * _kernel_T_unchecked(u - t, p),
                              a, b, [a, u, b], breakpoints=kinks)
    return head + tail


def pv_l2_bound(phi: HolderFunction, p: HurstParams) -> float:
    """Explicit bound on ``||f||_{L^2}`` for ``f = p.v. phi * T`` on ``[a, b]``.

    ``sqrt(2 K(2 alpha)) ||phi||_inf L**H + C ||phi||_{H'} L**(alpha + H' - 1/2)``
    with ``L = b - a`` and ``C = 2 |c_T| / (alpha + H' - 1)``, ``c_T`` the
    coefficient of ``T`` (``C = 2 / (pi H')`` at ``alpha = 1``).
    """
    L = phi.b - phi.a
    hp = phi.holder_exponent
    gamma = p.alpha + hp - 1.0
    c = 2.0 * abs(p.t_coef) / gamma
    return (math.sqrt(2.0 * p.k_2alpha) * phi.sup_norm * L ** p.H
            + c * phi.seminorm_estimate * L ** (gamma + 0.5))


def pv_l2_norm(phi: HolderFunction, p: HurstParams, tol: float = 1e-4) -> float:
    """``(int f(u)**2 du)**(1/2)`` over the real line for ``f = p.v. phi * T``."""
    a, b = phi.a, phi.b

    def integrand(u):
        f = pv_convolve(phi, u, p, method="closed")
        return np.sum(np.asarray(f).reshape(len(u), -1) ** 2, axis=1)

    v = phi.values.reshape(len(phi.times), -1)
    mass = integrate.trapezoid(v, phi.times, axis=0)
    tail_coef = p.t_coef ** 2 * float(np.sum(mass ** 2) + 1e-300) * 4.0
    val, _ = integrate_real_line(integrand, [a, b], tail_coef, 2.0 * p.alpha - 4.0,
                                 radius=50.0 * max(abs(a), abs(b), b - a, 1.0), tol=tol)
    return math.sqrt(val)


def weierstrass(hprime: float, levels: int = 12, ratio: float = math.e, seed: int = 0):
    """Random-phase Weierstrass function ``sum_k ratio**(-k H') cos(2 pi ratio**k t + theta_k)``.

    H'-Hölder down to the scale ``ratio**-levels``; the irrational default
    ratio avoids resonance with dyadic partitions.
    """
    phases = np.random.default_rng(seed).uniform(0.0, 2.0 * math.pi, levels)
    amp = ratio ** (-hprime * np.arange(levels))
    freq = 2.0 * math.pi * ratio ** np.arange(levels)

    def phi(t):
        t = np.asarray(t, dtype=float)
        return np.tensordot(np.cos(np.multiply.outer(t, freq) + phases), amp, axes=([-1], [0]))

    return phi
