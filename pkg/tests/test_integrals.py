import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracflow.errors import FracflowError
from fracflow.integrals import (PartitionSpec, Polynomial, correction_discrete, riemann_kernel_discrepancy,
                                riemann_sum, skorohod_integral, stratonovich_integral, trace_correction,
                                young_pl_integral)
from fracflow.kernels import HolderFunction, HurstParams, pv_convolve, s_shifted
from fracflow.quadrature import integrate_real_line
from fracflow.synthesis import FbmPath, synth_exact
from fracflow.verify import strat_self_integral_error, strat_self_integral_rms

X = Polynomial.univariate([0, 1])
X2 = Polynomial.univariate([0, 0, 1])
ONE = Polynomial.univariate([1])


def _path(H=0.6, cells=256, d=1, seed=0, n=None, a=0.0, b=1.0):
    return synth_exact(np.linspace(a, b, cells + 1), HurstParams(H), d=d, seed=seed, n_paths=n)


def test_partition_validation():
    with pytest.raises(FracflowError, match="NOT_INCREASING"):
        PartitionSpec(np.array([0.0, 0.5, 0.5]))
    with pytest.raises(FracflowError, match="BAD_OFFSETS"):
        PartitionSpec(np.array([0.0, 0.5, 1.0]), "custom", np.array([0.1, 0.4]))
    part = PartitionSpec.uniform(0, 1, 4, "left")
    assert np.allclose(part.taus(), [0, 0.25, 0.5, 0.75])
    assert part.mesh == 0.25 and part.n_cells == 4


def test_polynomial_eval_and_jacobian():
    # F(x, y) = (x^2 y, 3 + y)
    F = Polynomial(np.array([[2, 1], [0, 0], [0, 1]]), np.array([[1.0, 0, 0], [0, 3.0, 1.0]]))
    x = np.array([[2.0, 5.0]])
    assert np.allclose(F(x), [[20.0, 8.0]])
    assert np.allclose(F.jacobian(x), [[[20.0, 4.0], [0.0, 1.0]]])
    assert np.allclose((F + F * 2.0)(x), 3 * F(x))
    assert Polynomial.from_dict(F.to_dict()).to_dict() == F.to_dict()


def test_polynomial_bad_dict():
    with pytest.raises(FracflowError, match="CONFIG_INVALID"):
        Polynomial.from_dict({"coefs": [1]})


def test_riemann_constant_and_zero():
    path = _path()
    t = path.times
    part = PartitionSpec.uniform(0, 1, 128)
    one = HolderFunction(t, np.ones_like(t), 1.0)
    zero = HolderFunction(t, np.zeros_like(t), 1.0)
    assert riemann_sum(one, path, part)[0] == pytest.approx(path.values[0, -1] - path.values[0, 0], abs=1e-13)
    assert riemann_sum(zero, path, part)[0] == 0.0


def test_riemann_missing_tau():
    path = _path(cells=8)
    phi = HolderFunction(path.times, np.ones(9), 1.0)
    with pytest.raises(FracflowError, match="MISSING_SAMPLE"):
        riemann_sum(phi, path, PartitionSpec.uniform(0, 1, 8))


@given(st.integers(0, 1000), st.floats(-3, 3), st.floats(-3, 3))
def test_integral_linear_in_F(seed, c1, c2):
    path = _path(cells=64, d=2, seed=seed)
    part = PartitionSpec.uniform(0, 1, 32)
    F, G = Polynomial.identity(2), Polynomial(np.array([[1, 1], [0, 2]]), np.array([[1.0, 0.5], [0.0, 1.0]]))
    lhs = stratonovich_integral(F * c1 + G * c2, path, part).value
    rhs = c1 * stratonovich_integral(F, path, part).value + c2 * stratonovich_integral(G, path, part).value
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_young_pl_examples():
    path = _path(cells=64, seed=3)
    part = PartitionSpec.uniform(0, 1, 16)
    xa, xb = path.values[0, 0], path.values[0, -1]
    assert young_pl_integral(ONE, path, part).value[0, 0] == pytest.approx(xb - xa)
    assert young_pl_integral(X, path, part).value[0, 0] == pytest.approx((xb ** 2 - xa ** 2) / 2, abs=1e-12)
    cube = Polynomial.univariate([0, 0, 0, 1])
    assert young_pl_integral(cube, path, part).value[0, 0] == pytest.approx((xb ** 4 - xa ** 4) / 4, abs=1e-12)


def test_trace_correction_examples():
    p = HurstParams(0.5)
    path = _path(0.5, seed=2)
    assert np.all(trace_correction(ONE, path, p, 0, 1) == 0.0)
    assert trace_correction(X, path, p, 0.0, 1.0)[0, 0] == pytest.approx(0.5, abs=1e-14)
    q = HurstParams(0.3)
    path_q = _path(0.3, seed=2)
    assert trace_correction(X, path_q, q, 0.0, 1.0)[0, 0] == pytest.approx(q.k_2alpha, rel=1e-12)


def test_trace_correction_quadratic_oracle():
    # H = 1/2, F = x^2: correction = int_0^1 X_t dt, fine trapezoid oracle
    p = HurstParams(0.5)
    path = _path(0.5, cells=4096, seed=5)
    expected = np.trapezoid(path.values[0], path.times) if hasattr(np, "trapezoid") else np.trapz(path.values[0], path.times)
    assert trace_correction(X2, path, p, 0.0, 1.0)[0, 0] == pytest.approx(expected, rel=1e-3)


def test_trace_correction_errors():
    p = HurstParams(0.6)
    path = _path(0.6, a=-1.0)
    with pytest.raises(FracflowError, match="NEGATIVE_TIME_DOMAIN"):
        trace_correction(X, path, p, -1.0, 1.0)
    with pytest.raises(FracflowError, match="ORDERING"):
        trace_correction(X, path, p, 0.5, 0.25)


def test_correction_discrete_midpoint_bracket_vanishes():
    # with F = x the bracket sum telescopes to b^2H - a^2H
    p = HurstParams(0.6)
    path = _path(0.6)
    part = PartitionSpec.uniform(0.0, 1.0, 128)
    assert correction_discrete(X, path, part, p)[0, 0] == pytest.approx(p.k_2alpha, rel=1e-12)
    assert correction_discrete(ONE, path, part, p)[0, 0] == 0.0


def test_correction_discrete_left_rule_converges():
    p = HurstParams(0.6)
    path = _path(0.6, cells=4096)
    target = p.k_2alpha  # 2 H K int_0^1 t^{2H-1} dt
    gaps = []
    for n in (64, 256, 1024):
        part = PartitionSpec.uniform(0.0, 1.0, n, "left")
        val = correction_discrete(X, path, part, p)[0, 0]
        gaps.append(abs(val - target))
        assert val == pytest.approx(target - p.k_2alpha * n * (1 / n) ** 1.2, rel=1e-10)
    assert gaps[0] > gaps[1] > gaps[2]


def test_skorohod_constant():
    p = HurstParams(0.6)
    path = _path(0.6, seed=8)
    res = skorohod_integral(ONE * 2.5, path, PartitionSpec.uniform(0, 1, 128), p)
    assert res.value[0, 0] == pytest.approx(2.5 * (path.values[0, -1] - path.values[0, 0]))
    assert np.all(res.correction_value == 0)


@given(st.integers(0, 1000), st.sampled_from([0.3, 0.5, 0.7]))
def test_strat_minus_skorohod_is_trace(seed, H):
    p = HurstParams(H)
    path = _path(H, cells=128, seed=seed)
    part = PartitionSpec.uniform(0, 1, 64)
    strat = stratonovich_integral(X2, path, part).value
    sko = skorohod_integral(X2, path, part, p)
    assert np.allclose(strat - sko.value, trace_correction(X2, path, p, 0, 1), atol=1e-12)


def test_midpoint_required():
    path = _path()
    with pytest.raises(FracflowError, match="RULE"):
        stratonovich_integral(X, path, PartitionSpec.uniform(0, 1, 16, "left"))


def test_output_shapes():
    path = _path(d=3, n=4, cells=32)
    part = PartitionSpec.uniform(0, 1, 16)
    F = Polynomial.identity(3)
    assert stratonovich_integral(F, path, part).value.shape == (4, 3, 3)
    assert trace_correction(F, path, HurstParams(0.6), 0, 1).shape == (4, 3, 3)


def test_ito_at_half():
    p = HurstParams(0.5)
    path = _path(0.5, cells=8192, n=300, seed=11)
    res = skorohod_integral(X, path, PartitionSpec.uniform(0, 1, 4096), p).value[:, 0, 0]
    ito = path.values[:, 0, -1] ** 2 / 2 - 0.5
    assert math.sqrt(np.mean((res - ito) ** 2)) < 0.05


def test_strat_self_error_closed_form_matches_mc():
    H, n = 0.4, 16
    path = _path(H, cells=2 * n, n=4000, seed=12)
    res = stratonovich_integral(X, path, PartitionSpec.uniform(0, 1, n)).value[:, 0, 0]
    exact = path.values[:, 0, -1] ** 2 / 2
    rms = math.sqrt(np.mean((res - exact) ** 2))
    assert rms == pytest.approx(strat_self_integral_rms(H, n), rel=0.06)
    # H = 1/2: independent half-cell increments, error variance 1/(4n)
    assert strat_self_integral_rms(0.5, n) == pytest.approx(math.sqrt(1 / (4 * n)), rel=1e-12)


def test_strat_self_error_decreasing():
    errs = [strat_self_integral_error(0.4, n) for n in (256, 1024, 4096)]
    assert errs[0] > errs[1] > errs[2]


def test_discrepancy_node_mismatch():
    with pytest.raises(FracflowError, match="NODE_MISMATCH"):
        riemann_kernel_discrepancy(np.sin, PartitionSpec(np.array([0.0, 1 / 3, 1.0])), HurstParams(0.6), fine_cells=64)


@pytest.mark.parametrize("H", [0.6, 0.4])
def test_discrepancy_matches_kernel_quadrature(H):
    # cross-check the isometry route against int (J(u) - (phi * T)(u))^2 du
    p = HurstParams(H)
    phi = lambda t: np.sin(3 * t) + t ** 2
    part = PartitionSpec.uniform(0.0, 1.0, 4)
    fine = np.linspace(0.0, 1.0, 8193)
    hf = HolderFunction(fine, phi(fine), 1.0)
    w = phi(part.taus())

    def integrand(u):
        J = sum(wi * (s_shifted(t0 - u, p) - s_shifted(t1 - u, p))
                for wi, t0, t1 in zip(w, part.nodes[:-1], part.nodes[1:]))
        return (J - pv_convolve(hf, u, p, method="closed")) ** 2

    # far away both kernels behave like (mass) * T(u); the masses differ by
    # the midpoint error of int phi, which sets the tail coefficient
    mass_gap = abs(w.sum() * part.mesh - ((1 - math.cos(3.0)) / 3 + 1 / 3))
    val, _ = integrate_real_line(integrand, list(part.nodes), 4 * (p.t_coef * mass_gap) ** 2,
                                 2 * p.alpha - 4, tol=1e-4)
    assert riemann_kernel_discrepancy(phi, part, p) == pytest.approx(math.sqrt(val), rel=2e-3)
