"""Shell window kernels, calibration constants, and Gaussian test profiles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from cornerlab import (
    GaussianFamily,
    SmoothWindow,
    UndersampledShellError,
    WindowKernel,
    c1,
    eta_floor,
    gaussian_derivative_profile_1d,
    gaussian_profile_1d,
    thin_shell_surrogate,
)
from cornerlab.kernels import dilate


# ------------------------------------------------------------- smooth window

def test_window_has_unit_integral():
    w = SmoothWindow()
    mass, err = quad(w, -2.0, 2.0)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_window_even_and_compactly_supported():
    w = SmoothWindow(bump_halfwidth=1.5)
    assert w(0.7) == w(-0.7)
    assert w(0.0) > 0.0
    assert w(1.5) == 0.0
    assert w(2.3) == 0.0
    with pytest.raises(ValueError):
        SmoothWindow(bump_halfwidth=0.0)


def test_window_positive_at_one():
    # the reference kernel below evaluates the window at 1 when s = 0;
    # positivity there is what makes the calibration constant well defined
    assert SmoothWindow()(1.0) > 0.0


# ------------------------------------------------------------- window kernels

def test_kernel_radial_support_formula():
    k = WindowKernel(lam=4.0, eps=0.25, p=2.0, d=1)
    w = 0.25 * 2.0
    lo, hi = k.radial_support()
    assert lo == pytest.approx(4.0 * (1 - w) ** 0.5)
    assert hi == pytest.approx(4.0 * (1 + w) ** 0.5)
    assert k.radial_width() == pytest.approx(hi - lo)


def test_kernel_support_clips_at_zero():
    k = WindowKernel(lam=4.0, eps=0.5, p=2.0, d=1)
    assert k.radial_support()[0] == 0.0


@given(
    lam=st.floats(min_value=0.5, max_value=16.0),
    eps=st.floats(min_value=0.05, max_value=0.9),
    r=st.floats(min_value=-20.0, max_value=20.0),
)
@settings(max_examples=150)
def test_kernel_dilation_scaling_law(lam, eps, r):
    """omega_lam(s) = lam^-d omega_1(s / lam)."""
    klam = WindowKernel(lam=lam, eps=eps, p=2.0, d=1)
    k1 = WindowKernel(lam=1.0, eps=eps, p=2.0, d=1)
    s = np.array([r])
    assert klam(s) == pytest.approx(k1(s / lam) / lam, rel=1e-12, abs=1e-300)


def test_reference_kernel_positive_at_origin():
    k = WindowKernel(lam=4.0, eps=1.0, p=2.0, d=2)
    assert k(np.zeros(2)) > 0.0


def test_radial_eval_matches_pointwise_call():
    k = WindowKernel(lam=3.0, eps=0.4, p=3.0, d=2)
    r = np.linspace(0.0, 6.0, 40)
    pts = np.stack([r, np.zeros_like(r)], axis=-1)  # |(r, 0)|_p = r
    assert np.allclose(k.radial_eval(r), k(pts), rtol=1e-13)


def test_kernel_validates_inputs():
    with pytest.raises(ValueError):
        WindowKernel(lam=0.0, eps=0.5)
    with pytest.raises(ValueError):
        WindowKernel(lam=1.0, eps=0.0)
    k = WindowKernel(lam=4.0, eps=0.5, p=2.0, d=1)
    with pytest.raises(ValueError):
        k(np.zeros((3, 2)))


# ------------------------------------------------------- calibration constant

def test_c1_is_one_at_reference_width():
    assert c1(1.0, 2.0, 1) == 1.0
    assert c1(1.0, 3.0, 2) == 1.0


def test_c1_against_direct_riemann_quotient():
    """c1 is the mass ratio of the eps-kernel to the reference kernel."""
    lam = 4.0
    num_k = WindowKernel(lam=lam, eps=0.25, p=2.0, d=1)
    den_k = WindowKernel(lam=lam, eps=1.0, p=2.0, d=1)
    s = np.linspace(-8.0, 8.0, 400001)[:, None]
    ratio = num_k(s).sum() / den_k(s).sum()
    assert c1(0.25, 2.0, 1) == pytest.approx(ratio, abs=1e-6)


def test_c1_positive_and_dimension_capped():
    # not bounded by 1 in general: the radial weight favors the outer shell
    assert c1(0.3, 2.0, 2) > 0.0
    assert 0.0 < c1(0.3, 2.0, 1) < 1.0
    with pytest.raises(ValueError):
        c1(0.5, 2.0, 4)


# ------------------------------------------------------------- shell surrogate

def test_eta_floor_formula():
    assert eta_floor(0.25, 2.0, 4.0) == pytest.approx(4 * 0.25 * 2.0 / 4.0)
    assert eta_floor(0.1, 3.0, 8.0) == pytest.approx(4 * 0.1 * 3.0 / 8.0)


def test_surrogate_rejects_width_below_floor():
    with pytest.raises(UndersampledShellError):
        thin_shell_surrogate(4.0, 2.0, 1, 0.2, grid_spacing=0.25)
    k = thin_shell_surrogate(4.0, 2.0, 1, 1.0, grid_spacing=0.25)
    assert isinstance(k, WindowKernel)
    assert k.eps == 1.0
    # with no grid stated there is no floor to enforce
    assert thin_shell_surrogate(4.0, 2.0, 1, 0.01).eps == 0.01


# ------------------------------------------------------------ gaussian family

def test_gaussian_normalized_and_self_dual():
    fam = GaussianFamily(1)
    mass, _ = quad(lambda x: fam.g(np.array([x])), -8, 8)
    assert mass == pytest.approx(1.0, abs=1e-10)
    # direct cosine transform at a few frequencies
    for xi in (0.0, 0.6, 1.3):
        num, _ = quad(lambda x: fam.g(np.array([x])) * np.cos(2 * np.pi * x * xi), -8, 8)
        assert num == pytest.approx(fam.g_hat(np.array([xi])), abs=1e-10)


def test_gaussian_partial_is_derivative():
    fam = GaussianFamily(2)
    x = np.array([0.4, -0.2])
    eps = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = eps
        fd = (fam.g(x + e) - fam.g(x - e)) / (2 * eps)
        assert fam.h(i, x) == pytest.approx(fd, rel=1e-8)


def test_gaussian_hat_factor_relation():
    fam = GaussianFamily(2)
    xi = np.array([0.3, 0.1])
    assert fam.h_hat_factor(0, xi) == pytest.approx(-fam.h(0, xi), rel=1e-14)
    with pytest.raises(ValueError):
        fam.h(2, xi)
    with pytest.raises(ValueError):
        GaussianFamily(0)


# ------------------------------------------------------------ scaled profiles

def test_gaussian_profile_keeps_unit_mass_under_scaling():
    p = gaussian_profile_1d(1.0)
    for t in (0.5, 1.0, 1.7):
        mass, _ = quad(lambda z: p(t, z), -p.radius(t), p.radius(t))
        assert mass == pytest.approx(1.0, abs=1e-8)
    assert p.nonneg


def test_derivative_profile_has_zero_mean():
    dp = gaussian_derivative_profile_1d(1.0)
    mass, _ = quad(lambda z: dp(1.3, z), -dp.radius(1.3), dp.radius(1.3))
    assert mass == pytest.approx(0.0, abs=1e-10)
    assert not dp.nonneg


def test_profile_dilation_rule():
    p = gaussian_profile_1d(1.0)
    z = np.array([0.7])
    assert p(2.0, z) == pytest.approx(p(1.0, z / 2.0) / 2.0, rel=1e-14)
    assert p.radius(3.0) == pytest.approx(3.0 * p.base_radius)


def test_dilate_callable_and_grid():
    gauss = lambda x: np.exp(-np.asarray(x) ** 2)
    dc = dilate(gauss, 2.0, d=1)
    assert dc(1.0) == pytest.approx(0.5 * gauss(0.5), rel=1e-14)
    from cornerlab import GridFunction

    g = GridFunction(np.exp(-np.linspace(-3, 3, 61) ** 2), 0.1)
    gd = dilate(g, 2.0)
    assert gd.spacing == pytest.approx(0.2)
    assert gd.integral() == pytest.approx(g.integral(), rel=1e-12)
