import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fracflow.errors import FracflowError
from fracflow.kernels import (HolderFunction, HurstParams, covariance_closed, covariance_matrix,
                              covariance_quadrature, holder_seminorm, kernel_S, kernel_St, kernel_T,
                              pv_convolve, pv_l2_bound, pv_l2_norm, s_primitive, s_shifted,
                              st_cell_integrals, st_fourier, weierstrass)

hurst = st.floats(0.05, 0.95).filter(lambda h: abs(h - 0.5) > 1e-6)
times = st.floats(-5.0, 5.0).filter(lambda t: abs(t) > 1e-3)


def test_invalid_hurst():
    for H in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(FracflowError, match="INVALID_HURST"):
            HurstParams(H)


def test_constants_brownian_case():
    p = HurstParams(0.5)
    assert p.log_branch and p.k_alpha is None
    assert p.k_2alpha == pytest.approx(0.5, abs=1e-15)
    assert p.t_coef == pytest.approx(-1.0 / math.pi)


def test_kernel_S_value_alpha_three_halves():
    # H close to 1 approaches alpha = 3/2: S(t) = |t|^{1/2} / (2 Gamma(3/2) cos(3 pi/4))
    p = HurstParams(1.0 - 1e-12)
    expected = 4.0 ** 0.5 / (2.0 * math.gamma(1.5) * math.cos(0.75 * math.pi))
    assert kernel_S(4.0, p) == pytest.approx(expected, rel=1e-9)
    assert kernel_S(4.0, p) < 0


def test_kernel_S_alpha_one_undefined():
    with pytest.raises(FracflowError, match="UNDEFINED_AT_ALPHA_ONE"):
        kernel_S(1.0, HurstParams(0.5))


def test_kernel_S_singular_at_zero_below_one():
    with pytest.raises(FracflowError, match="SINGULARITY"):
        kernel_S(0.0, HurstParams(0.3))


@given(hurst, times)
def test_kernel_S_even(H, t):
    p = HurstParams(H)
    assert kernel_S(t, p) == pytest.approx(kernel_S(-t, p), rel=1e-14)


@given(hurst, times)
def test_kernel_T_odd(H, t):
    p = HurstParams(H)
    assert kernel_T(-t, p) == pytest.approx(-kernel_T(t, p), rel=1e-14)


def test_kernel_St_log_branch_value():
    assert kernel_St(1.0, -1.0, HurstParams(0.5)) == pytest.approx(math.log(2.0) / math.pi, rel=1e-14)


@given(st.floats(0.05, 0.95), times)
def test_kernel_St_zero_time(H, u):
    assert kernel_St(0.0, u, HurstParams(H)) == 0.0


def test_kernel_St_singular_points():
    p = HurstParams(0.3)
    with pytest.raises(FracflowError, match="SINGULARITY"):
        kernel_St(1.0, 1.0, p)
    with pytest.raises(FracflowError, match="SINGULARITY"):
        kernel_St(1.0, 0.0, p)


@pytest.mark.parametrize("H", [0.3, 0.5, 0.7])
def test_kernel_St_square_integral(H):
    p = HurstParams(H)
    val, _ = covariance_quadrature(1.0, 1.0, p, tol=1e-6)
    assert val == pytest.approx(2.0 * p.k_2alpha, rel=1e-4)


@pytest.mark.parametrize("H", [0.3, 0.7, 0.9])
def test_T_is_derivative_of_S(H):
    # int_a^b T(u - t) dt = S(u - a) - S(u - b) for u outside [a, b]
    p = HurstParams(H)
    a, b = 0.2, 1.1
    for u in (-0.7, 1.6, 3.0):
        val, _ = integrate.quad(lambda t: kernel_T(u - t, p), a, b, epsabs=1e-12, epsrel=1e-12)
        assert val == pytest.approx(s_shifted(u - a, p) - s_shifted(u - b, p), abs=1e-6)


@given(st.floats(0.05, 0.95), st.floats(-3, 3), st.floats(-3, 3))
def test_primitive_is_antiderivative(H, x0, x1):
    p = HurstParams(H)
    if abs(x1 - x0) < 1e-3 or x0 * x1 <= 0:
        return
    val, _ = integrate.quad(lambda x: s_shifted(x, p), x0, x1, epsabs=1e-11, epsrel=1e-11)
    assert s_primitive(x1, p) - s_primitive(x0, p) == pytest.approx(val, abs=1e-8)


def test_cell_integrals_sum_to_window_integral():
    p = HurstParams(0.7)
    edges = np.linspace(-3.0, 3.0, 61)
    cells = st_cell_integrals(1.0, edges, p)
    whole = st_cell_integrals(1.0, np.array([-3.0, 3.0]), p)
    assert cells.sum() == pytest.approx(float(np.ravel(whole)[0]), rel=1e-12)


def test_covariance_closed_examples():
    p = HurstParams(0.5)
    assert covariance_closed(1.0, 2.0, p) == pytest.approx(1.0, abs=1e-15)
    q = HurstParams(0.7)
    assert covariance_closed(1.0, 1.0, q) == pytest.approx(1.0 / (math.gamma(2.4) * math.sin(0.7 * math.pi)))
    for t in (-2.0, 0.3, 5.0):
        assert covariance_closed(t, 0.0, q) == 0.0


@given(hurst, times, times)
def test_covariance_symmetric(H, t, s):
    p = HurstParams(H)
    assert covariance_closed(t, s, p) == pytest.approx(covariance_closed(s, t, p), rel=1e-14)


@pytest.mark.parametrize("H", [0.3, 0.5, 0.75])
def test_covariance_quadrature_grid(H):
    p = HurstParams(H)
    for t in (0.5, 1.0, 2.0):
        for s in (0.5, 1.0, 2.0):
            val, _ = covariance_quadrature(t, s, p)
            assert val == pytest.approx(covariance_closed(t, s, p), rel=1e-3)


def test_covariance_matrix_psd():
    C = covariance_matrix(np.linspace(0.1, 2.0, 8), HurstParams(0.3))
    assert np.linalg.eigvalsh(C).min() > 0


def test_st_fourier_examples():
    p = HurstParams(0.5)
    assert st_fourier(math.pi, 1.0, p) == pytest.approx(2.0 / math.pi)
    assert st_fourier(2.0, 0.0, p) == 0
    with pytest.raises(FracflowError, match="SINGULARITY"):
        st_fourier(0.0, 1.0, p)


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_plancherel(H):
    p = HurstParams(H)
    t = 1.3
    head = integrate.quad(lambda xi: abs(st_fourier(xi, t, p)) ** 2, 0.0, 1.0, limit=200)[0]
    # |1 - e^{i t xi}|^2 = 2 - 2 cos(t xi); oscillatory tail by the Fourier rule
    e = 2.0 * p.alpha
    tail = 2.0 / (e - 1.0) - 2.0 * integrate.quad(lambda xi: xi ** -e, 1.0, np.inf, weight="cos", wvar=t)[0]
    # (1 / 2 pi) over the real line = (1 / pi) over the half line
    assert (head + tail) / math.pi == pytest.approx(covariance_closed(t, t, p), rel=1e-3)


def test_holder_seminorm_examples():
    t = np.linspace(0.0, 1.0, 201)
    assert holder_seminorm(t, t, 1.0) == pytest.approx(1.0)
    assert holder_seminorm(t, np.full_like(t, 3.0), 0.5) == 0.0
    assert holder_seminorm(t, np.sqrt(t), 0.5) == pytest.approx(1.0)


@given(st.integers(0, 10_000), st.floats(0.2, 1.0))
def test_holder_seminorm_adjacent_is_lower_bound(seed, hp):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, 1, 40))
    t = t[np.concatenate([[True], np.diff(t) > 1e-9])]
    v = rng.standard_normal(len(t))
    assert holder_seminorm(t, v, hp, exact=False) <= holder_seminorm(t, v, hp, exact=True) + 1e-12


def test_holder_function_validation():
    with pytest.raises(FracflowError, match="NOT_INCREASING"):
        HolderFunction(np.array([0.0, 0.0, 1.0]), np.zeros(3), 0.5)
    with pytest.raises(FracflowError, match="INVALID_EXPONENT"):
        HolderFunction(np.array([0.0, 1.0]), np.zeros(2), 1.5)


def test_pv_convolve_constant():
    p = HurstParams(0.7)
    phi = HolderFunction(np.linspace(0, 1, 11), np.ones(11), 1.0)
    u = np.array([-0.5, 0.25, 0.5, 1.7])
    assert np.allclose(pv_convolve(phi, u, p), s_shifted(u, p) - s_shifted(u - 1.0, p), atol=1e-12)
    vec = HolderFunction(np.linspace(0, 1, 11), np.outer(np.ones(11), [2.0, -1.0]), 1.0)
    out = pv_convolve(vec, u, p)
    base = s_shifted(u, p) - s_shifted(u - 1.0, p)
    assert np.allclose(out, np.outer(base, [2.0, -1.0]), atol=1e-12)


def test_pv_convolve_gates():
    phi = HolderFunction(np.linspace(0, 1, 11), np.ones(11), 0.1)
    with pytest.raises(FracflowError, match="EXPONENT_GATE"):
        pv_convolve(phi, 0.5, HurstParams(0.3))
    with pytest.raises(FracflowError, match="ENDPOINT"):
        pv_convolve(phi, 1.0, HurstParams(0.7))


@pytest.mark.parametrize("H", [0.3, 0.5, 0.8])
def test_pv_closed_matches_quadrature(H):
    p = HurstParams(H)
    f = lambda t: np.sin(3 * t) + t ** 2
    phi_q = HolderFunction.from_callable(f, 0.0, 1.0, 1.0)
    phi_c = HolderFunction(np.linspace(0, 1, 4097), f(np.linspace(0, 1, 4097)), 1.0)
    u = np.array([-0.4, 0.3, 0.77, 1.5])
    assert np.allclose(pv_convolve(phi_c, u, p), pv_convolve(phi_q, u, p), atol=2e-4)


@given(st.floats(0.25, 0.9), st.integers(0, 1000))
def test_pv_l2_bound_holds(H, seed):
    p = HurstParams(H)
    hp = 0.6
    t = np.linspace(0.0, 1.0, 257)
    phi = HolderFunction(t, weierstrass(hp, levels=6, seed=seed)(t), hp)
    assert pv_l2_norm(phi, p, tol=1e-3) <= pv_l2_bound(phi, p)


def test_weierstrass_vectorised():
    phi = weierstrass(0.4)
    t = np.linspace(0, 1, 7)
    assert phi(t).shape == (7,)
    assert phi(t)[3] == pytest.approx(float(phi(t[3])))
