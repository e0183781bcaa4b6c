"""Riemann sums, piecewise-linear (Young) integrals and the Skorohod and
Stratonovich integrals of polynomial integrands against fBm paths.

Shapes: a path carries values ``(..., d, n)``.  For a polynomial
``F: R^d -> R^m`` every integral returns ``(..., m, d)``, entry ``(i, j)``
being ``int F_i(X) dX_j`` (the outer product convention).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FracflowError
from .kernels import HolderFunction, HurstParams
from .quadrature import gauss_legendre
from .synthesis import FbmPath, grid_index

RULES = ("left", "midpoint", "right", "custom")


@dataclass(frozen=True, eq=False)
class PartitionSpec:
    """Partition ``a = t_0 < ... < t_n = b`` with evaluation points ``tau_i``.

    ``rule="custom"`` takes explicit ``offsets`` (absolute times
    ``tau_i`` in ``[t_i, t_{i+1}]``).
    """

    nodes: np.ndarray
    rule: str = "midpoint"
    offsets: np.ndarray | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or len(nodes) < 2 or np.any(np.diff(nodes) <= 0):
            raise FracflowError("NOT_INCREASING", "partition nodes must be strictly increasing")
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}")
        if self.rule == "custom":
            tau = np.asarray(self.offsets, dtype=float)
            if tau.shape != (len(nodes) - 1,) or np.any(tau < nodes[:-1]) or np.any(tau > nodes[1:]):
                raise FracflowError("BAD_OFFSETS", "custom tau_i must lie in [t_i, t_{i+1}]")
            object.__setattr__(self, "offsets", tau)

    @classmethod
    def uniform(cls, a: float, b: float, n: int, rule: str = "midpoint") -> "PartitionSpec":
        return cls(np.linspace(a, b, n + 1), rule)

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_cells(self) -> int:
        return len(self.nodes) - 1

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    def taus(self) -> np.ndarray:
        if self.rule == "left":
            return self.nodes[:-1].copy()
        if self.rule == "right":
            return self.nodes[1:].copy()
        if self.rule == "midpoint":
            return 0.5 * (self.nodes[:-1] + self.nodes[1:])
        return self.offsets.copy()

    def to_dict(self) -> dict:
        out = {"nodes": self.nodes.tolist(), "rule": self.rule}
        if self.rule == "custom":
            out["offsets"] = self.offsets.tolist()
        return out


@dataclass(frozen=True, eq=False)
class Polynomial:
    """``F(x) = sum_k c[:, k] * prod_j x_j ** e[k, j]``.

    ``exponents`` is ``(terms, d)`` of non-negative integers and
    ``coefficients`` is ``(m, terms)``.
    """

    exponents: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        e = np.atleast_2d(np.asarray(self.exponents, dtype=int))
        c = np.atleast_2d(np.asarray(self.coefficients, dtype=float))
        if np.any(e < 0) or c.shape[1] != e.shape[0]:
            raise ValueError("exponents must be (terms, d) >= 0 and coefficients (m, terms)")
        object.__setattr__(self, "exponents", e)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def univariate(cls, coefs) -> "Polynomial":
        """``F(x) = sum_k coefs[k] x**k`` for ``d = m = 1``."""
        coefs = np.asarray(coefs, dtype=float)
        return cls(np.arange(len(coefs))[:, None], coefs[None, :])

    @classmethod
    def identity(cls, d: int) -> "Polynomial":
        """``F(x) = x`` on ``R^d``."""
        return cls(np.eye(d, dtype=int), np.eye(d))

    @classmethod
    def from_dict(cls, spec: dict) -> "Polynomial":
        if "univariate" in spec:
            return cls.univariate(spec["univariate"])
        try:
            return cls(spec["exponents"], spec["coefficients"])
        except KeyError as exc:
            raise FracflowError("CONFIG_INVALID", "polynomial needs 'univariate' or 'exponents'+'coefficients'") from exc

    def to_dict(self) -> dict:
        return {"exponents": self.exponents.tolist(), "coefficients": self.coefficients.tolist()}

    @property
    def d(self) -> int:
        return self.exponents.shape[1]

    @property
    def m(self) -> int:
        return self.coefficients.shape[0]

    @property
    def degree(self) -> int:
        return int(self.exponents.sum(axis=1).max(initial=0))

    def _monomials(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise FracflowError("DIMENSION", f"polynomial expects d={self.d} inputs")
        return np.prod(x[..., None, :] ** self.exponents, axis=-1)

    def __call__(self, x) -> np.ndarray:
        """``x``: ``(..., d)`` -> ``(..., m)``."""
        return self._monomials(x) @ self.coefficients.T

    def partial(self, j: int) -> "Polynomial":
        e = self.exponents.copy()
        c = self.coefficients * e[:, j]
        e[:, j] = np.maximum(e[:, j] - 1, 0)
        return Polynomial(e, c)

    def jacobian(self, x) -> np.ndarray:
        """``x``: ``(..., d)`` -> ``(..., m, d)`` with entry ``dF_i / dx_j``."""
        return np.stack([self.partial(j)(x) for j in range(self.d)], axis=-1)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.vstack([self.exponents, other.exponents]),
                          np.hstack([self.coefficients, other.coefficients]))

    def __mul__(self, scalar: float) -> "Polynomial":
        return Polynomial(self.exponents, self.coefficients * float(scalar))

    __rmul__ = __mul__


@dataclass
class IntegralResult:
    """``value`` has shape ``(..., m, d)``; ``correction_value`` matches it
    for Skorohod results and is 0 otherwise."""

    value: np.ndarray
    estimator_kind: str
    partition: PartitionSpec
    correction_value: np.ndarray | float = 0.0
    metadata: dict = field(default_factory=dict)


def _points(path: FbmPath, t) -> np.ndarray:
    """Path values at times ``t`` moved to ``(..., len(t), d)``."""
    return np.moveaxis(path.at(t), -2, -1)


def _increments(path: FbmPath, part: PartitionSpec) -> np.ndarray:
    v = path.at(part.nodes)
    return np.diff(v, axis=-1)


def riemann_sum(phi, path: FbmPath, part: PartitionSpec) -> np.ndarray:
    """``sum_i phi(tau_i) (X_{t_{i+1}} - X_{t_i})``.

    ``phi`` is a :class:`HolderFunction` (sampled at every ``tau_i``) or an
    :class:`FbmPath` (e.g. the path itself).  Scalar ``phi`` gives shape
    ``(..., d)``; vector-valued ``phi`` gives ``(..., m, d)``.
    """
    tau = part.taus()
    dx = _increments(path, part)
    if isinstance(phi, FbmPath):
        f = phi.at(tau)
        return np.einsum("...mn,...dn->...md", f, dx)
    if isinstance(phi, HolderFunction):
        f = phi.values[grid_index(phi.times, tau, "tau_i")]
        if f.ndim == 1:
            return dx @ f
        return np.einsum("nm,...dn->...md", f, dx)
    raise TypeError("phi must be a HolderFunction or an FbmPath")


def _integrand_sum(F: Polynomial, path: FbmPath, part: PartitionSpec) -> np.ndarray:
    fx = F(_points(path, part.taus()))
    return np.einsum("...nm,...dn->...md", fx, _increments(path, part))


def young_pl_integral(F: Polynomial, path: FbmPath, part: PartitionSpec) -> IntegralResult:
    """``int F(X_n) dX_n`` for the interpolant ``X_n`` through the partition nodes.

    On each cell ``X_n = X_i + s D_i`` with ``s`` in ``[0, 1]``; a Gauss rule
    with ``deg(F)//2 + 1`` nodes integrates ``F(X_i + s D_i)`` exactly.
    """
    x = _points(path, part.nodes)
    x0, dx = x[..., :-1, :], np.diff(x, axis=-2)
    gx, gw = gauss_legendre(F.degree // 2 + 1)
    avg = sum(w * F(x0 + s * dx) for s, w in zip(gx, gw))
    value = np.einsum("...nm,...nd->...md", avg, dx)
    return IntegralResult(value, "young_pl", part)


def _power_moment_weights(t: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell weights ``(w0, w1)`` with ``int_{t_k}^{t_{k+1}} g(t) t**beta dt``
    exact for ``g`` linear on the cell: ``w0 * g(t_k) + w1 * g(t_{k+1})``."""
    t0, t1 = t[:-1], t[1:]
    m0 = (t1 ** (beta + 1) - t0 ** (beta + 1)) / (beta + 1)
    m1 = (t1 ** (beta + 2) - t0 ** (beta + 2)) / (beta + 2)
    dt = t1 - t0
    return (t1 * m0 - m1) / dt, (m1 - t0 * m0) / dt


def trace_correction(F: Polynomial, path: FbmPath, p: HurstParams, a: float, b: float) -> np.ndarray:
    """``2 H K(2 alpha) int_a^b JF(X_t) t**(2H-1) dt``, shape ``(..., m, d)``.

    ``JF(X_t)`` is interpolated linearly between path samples and integrated
    against ``t**(2H-1)`` with exact per-cell moments, so the singularity at
    ``t = 0`` costs nothing.
    """
    if a < 0:
        raise FracflowError("NEGATIVE_TIME_DOMAIN", "the correction integral is defined here for a >= 0 only")
    if b < a:
        raise FracflowError("ORDERING", "need a <= b")
    ia, ib = path.index_of([a, b], "interval end")
    if ia == ib:
        return np.zeros(path.values.shape[:-2] + (F.m, F.d))
    t = path.times[ia:ib + 1]
    jac = F.jacobian(np.moveaxis(path.values[..., ia:ib + 1], -2, -1))  # (..., k, m, d)
    w0, w1 = _power_moment_weights(t, 2.0 * p.H - 1.0)
    w = np.zeros(len(t))
    w[:-1] += w0
    w[1:] += w1
    return 2.0 * p.H * p.k_2alpha * np.einsum("k,...kmd->...md", w, jac)


def correction_discrete(F: Polynomial, path: FbmPath, part: PartitionSpec, p: HurstParams) -> np.ndarray:
    """``K(2 alpha) sum_i JF(X_{tau_i}) [|t_{i+1}|^{2H} - |t_i|^{2H} - |t_{i+1}-tau_i|^{2H} + |t_i-tau_i|^{2H}]``.

    The bracket is ``E[X_{tau_i} (X_{t_{i+1}} - X_{t_i})] / K(2 alpha)``, valid
    for any sign of the times.
    """
    t0, t1, tau = part.nodes[:-1], part.nodes[1:], part.taus()
    h2 = 2.0 * p.H
    bracket = np.abs(t1) ** h2 - np.abs(t0) ** h2 - np.abs(t1 - tau) ** h2 + np.abs(t0 - tau) ** h2
    jac = F.jacobian(_points(path, tau))
    return p.k_2alpha * np.einsum("n,...nmd->...md", bracket, jac)


def _require_midpoint(part: PartitionSpec):
    if part.rule != "midpoint":
        raise FracflowError("RULE", "the Skorohod and Stratonovich limits use the midpoint rule")


def stratonovich_integral(F: Polynomial, path: FbmPath, part: PartitionSpec, p: HurstParams | None = None) -> IntegralResult:
    """Midpoint Riemann sum ``sum_i F(X_{tau_i}) (X_{t_{i+1}} - X_{t_i})``."""
    _require_midpoint(part)
    return IntegralResult(_integrand_sum(F, path, part), "stratonovich", part)


def skorohod_integral(F: Polynomial, path: FbmPath, part: PartitionSpec, p: HurstParams) -> IntegralResult:
    """Midpoint sum minus :func:`trace_correction` over ``[a, b]``."""
    _require_midpoint(part)
    corr = trace_correction(F, path, p, part.a, part.b)
    return IntegralResult(_integrand_sum(F, path, part) - corr, "skorohod", part, corr)


def riemann_kernel_discrepancy(phi, part: PartitionSpec, p: HurstParams, fine_cells: int = 2 ** 16) -> float:
    """``N2(D) = ||J - phi_ab * T||_{L2(du)}`` for a deterministic ``phi``.

    ``J`` is the kernel of the Riemann sum ``sum_i phi(tau_i) dX_i`` and
    ``phi_ab * T`` that of ``int_a^b phi dX``.  By the isometry
    ``||f||^2_{L2(du)} = E[(int f dB)^2]`` this is the L2(dω) norm of the
    difference of the two integrals; the limit is replaced by the midpoint
    sum on ``fine_cells`` uniform cells and the variance is a Toeplitz
    quadratic form in the fractional Gaussian noise covariance.

    ``phi`` is a vectorised callable; partition nodes must be fine-grid nodes.
    """
    from scipy.linalg import matmul_toeplitz

    a, b = part.a, part.b
    df = (b - a) / fine_cells
    pos = (part.nodes - a) / df
    if np.any(np.abs(pos - np.round(pos)) > 1e-6):
        raise FracflowError("NODE_MISMATCH", "partition nodes must lie on the fine grid")
    owner = np.repeat(np.arange(part.n_cells), np.diff(np.round(pos).astype(int)))
    mid = a + df * (np.arange(fine_cells) + 0.5)
    c = np.asarray(phi(part.taus()), dtype=float)[owner] - np.asarray(phi(mid), dtype=float)
    k = np.arange(fine_cells, dtype=float)
    h2 = 2.0 * p.H
    gamma = p.k_2alpha * df ** h2 * (np.abs(k + 1) ** h2 + np.abs(k - 1) ** h2 - 2.0 * k ** h2)
    return float(np.sqrt(max(c @ matmul_toeplitz(gamma, c), 0.0)))
