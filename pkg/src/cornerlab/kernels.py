"""Smooth window profiles, shell kernels, and Gaussian building blocks.

The shell kernel omega concentrates unit mass (in the bump variable) on the
set where ||s/lambda||_p^p is within ~eps of 1; eps=1 is the fat reference
kernel, small eps the thin shell, and their calibrated difference is the
mean-zero kernel driving the error forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .grids import GridFunction, UndersampledShellError
from .lp_patterns import LpExponent, as_lp_exponent, lp_power_sum


def _bump(u: np.ndarray) -> np.ndarray:
    """exp(-1/(1-u^2)) on |u| < 1, zero outside; smooth and compactly supported."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    w = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - w * w))
    return out


@lru_cache(maxsize=None)
def _bump_mass(halfwidth: float) -> float:
    # integral of the unnormalized bump over (-halfwidth, halfwidth)
    val, err = quad(lambda r: math.exp(-1.0 / (1.0 - r * r)), -1.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    if err > 1e-11:
        raise RuntimeError(f"bump normalization quadrature did not converge: err={err}")
    return halfwidth * val


@dataclass(frozen=True)
class SmoothWindow:
    """Even smooth bump on (-halfwidth, halfwidth), normalized to unit integral."""

    bump_halfwidth: float = 2.0

    def __post_init__(self):
        if not (0 < self.bump_halfwidth < math.inf):
            raise ValueError("bump_halfwidth must be positive and finite")

    @property
    def normalization(self) -> float:
        return 1.0 / _bump_mass(self.bump_halfwidth)

    def __call__(self, xi) -> np.ndarray | float:
        out = self.normalization * _bump(np.asarray(xi, dtype=float) / self.bump_halfwidth)
        return float(out) if np.ndim(out) == 0 else out


def smooth_window_eval(window: SmoothWindow, xi):
    return window(xi)


DEFAULT_WINDOW = SmoothWindow()


@dataclass(frozen=True)
class WindowKernel:
    """Shell kernel omega(s) = lam^-d eps^-1 window((1 - ||s/lam||_p^p)/eps)."""

    lam: float
    eps: float
    p: LpExponent | float = 2.0
    d: int = 1
    window: SmoothWindow = field(default_factory=SmoothWindow)

    def __post_init__(self):
        if self.lam <= 0 or not math.isfinite(self.lam):
            raise ValueError("lam must be positive and finite")
        if self.eps <= 0 or not math.isfinite(self.eps):
            raise ValueError("eps must be positive and finite")
        pe = as_lp_exponent(self.p)
        if pe.infinite:
            raise ValueError("shell kernels need a finite exponent p")
        object.__setattr__(self, "p", pe)
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def p_value(self) -> float:
        return self.p.value

    def radial_support(self) -> tuple[float, float]:
        """Support of omega in the lp norm of s: the shell (or ball, for fat eps)."""
        w = self.eps * self.window.bump_halfwidth
        lo = max(0.0, 1.0 - w) ** (1.0 / self.p_value)
        hi = (1.0 + w) ** (1.0 / self.p_value)
        return self.lam * lo, self.lam * hi

    def radial_width(self) -> float:
        lo, hi = self.radial_support()
        return hi - lo

    def radial_eval(self, r) -> np.ndarray | float:
        """omega as a function of the lp norm r = ||s||_p >= 0."""
        r = np.asarray(r, dtype=float)
        arg = (1.0 - (r / self.lam) ** self.p_value) / self.eps
        out = self.lam ** (-self.d) / self.eps * self.window(arg)
        return float(out) if np.ndim(out) == 0 else out

    def __call__(self, s) -> np.ndarray | float:
        """omega at points s of shape (..., d)."""
        s = np.asarray(s, dtype=float)
        if s.shape[-1] != self.d:
            raise ValueError(f"points have dimension {s.shape[-1]}, kernel expects {self.d}")
        pw = lp_power_sum(s, self.p_value)
        arg = (1.0 - pw / self.lam ** self.p_value) / self.eps
        out = self.lam ** (-self.d) / self.eps * self.window(arg)
        return float(out) if np.ndim(out) == 0 else out


def omega_eval(kernel: WindowKernel, s):
    return kernel(s)


def c1(eps: float, p, d: int, window: SmoothWindow = DEFAULT_WINDOW) -> float:
    """Calibration ratio int omega_lam^eps / int omega_lam^1 (lambda-independent).

    Both integrals reduce to 1-D radial quadrature against r**(d-1); the lp
    sphere-area constant cancels in the ratio. For eps below ~1/(100 d) the
    ratio is within a percent of its small-eps limit.
    """
    pe = as_lp_exponent(p)
    if pe.infinite:
        raise ValueError("c1 requires a finite exponent")
    if not 1 <= d <= 3:
        raise ValueError("radial reduction is supported for d <= 3")
    if eps <= 0:
        raise ValueError("eps must be positive")

    def radial_integral(e: float) -> float:
        ker = WindowKernel(lam=1.0, eps=e, p=pe, d=d, window=window)
        lo, hi = ker.radial_support()
        val, err = quad(lambda r: ker.radial_eval(r) * r ** (d - 1), lo, hi,
                        epsabs=1e-12, epsrel=1e-12, limit=200)
        if err > 1e-10:
            raise RuntimeError(f"radial quadrature error {err} above tolerance")
        return val

    return radial_integral(eps) / radial_integral(1.0)


def eta_floor(grid_spacing: float, p, lam: float) -> float:
    """Smallest admissible surrogate width on a lattice: 4 h p lam^(p-1) / lam^p."""
    pv = as_lp_exponent(p).value
    return 4.0 * grid_spacing * pv * lam ** (pv - 1) / lam ** pv


def thin_shell_surrogate(lam: float, p, d: int, eta: float,
                         grid_spacing: float | None = None,
                         window: SmoothWindow = DEFAULT_WINDOW) -> WindowKernel:
    """Window kernel standing in for the singular shell measure at width eta.

    When a grid spacing is supplied, eta below the resolution floor is
    rejected rather than silently aliasing the bump.
    """
    if grid_spacing is not None:
        floor = eta_floor(grid_spacing, p, lam)
        if eta < floor:
            raise UndersampledShellError(
                f"surrogate width eta={eta:g} is below the lattice floor {floor:g} "
                f"(spacing {grid_spacing:g}, lam {lam:g})")
    return WindowKernel(lam=lam, eps=eta, p=p, d=d, window=window)


@dataclass(frozen=True)
class GaussianFamily:
    """Standard Gaussian g = exp(-pi ||x||^2) and its first partials on R^d."""

    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    def g(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise ValueError(f"points have dimension {x.shape[-1]}, expected {self.d}")
        out = np.exp(-np.pi * (x * x).sum(axis=-1))
        return float(out) if np.ndim(out) == 0 else out

    def h(self, i: int, x) -> np.ndarray | float:
        """i-th partial derivative of g: -2 pi x_i g(x)."""
        if not 0 <= i < self.d:
            raise ValueError(f"partial index {i} out of range for d={self.d}")
        x = np.asarray(x, dtype=float)
        out = -2.0 * np.pi * x[..., i] * np.exp(-np.pi * (x * x).sum(axis=-1))
        return float(out) if np.ndim(out) == 0 else out

    def g_hat(self, xi) -> np.ndarray | float:
        """Fourier transform of g (self-dual)."""
        return self.g(xi)

    def h_hat_factor(self, i: int, xi) -> np.ndarray | float:
        """Fourier transform of h^i is i*(2 pi xi_i) ghat; returns the real factor 2 pi xi_i ghat."""
        if not 0 <= i < self.d:
            raise ValueError(f"partial index {i} out of range for d={self.d}")
        xi = np.asarray(xi, dtype=float)
        out = 2.0 * np.pi * xi[..., i] * np.exp(-np.pi * (xi * xi).sum(axis=-1))
        return float(out) if np.ndim(out) == 0 else out


def gaussian_eval(x, d: int | None = None):
    x = np.asarray(x, dtype=float)
    dim = d if d is not None else x.shape[-1]
    return GaussianFamily(dim).g(x)


def gaussian_partial(i: int, x, d: int | None = None):
    x = np.asarray(x, dtype=float)
    dim = d if d is not None else x.shape[-1]
    return GaussianFamily(dim).h(i, x)


def dilate(f, t: float, d: int | None = None):
    """L^1-normalized dilation f_t(x) = t^-d f(x/t).

    GridFunction -> exact dilation on the scaled lattice; callable -> wrapped
    callable (d required).
    """
    if t <= 0 or not math.isfinite(t):
        raise ValueError("dilation parameter must be positive and finite")
    if isinstance(f, GridFunction):
        return f.dilate(t)
    if d is None:
        raise ValueError("dilating a callable requires the dimension d")

    def dilated(pts):
        pts = np.asarray(pts, dtype=float)
        return t ** (-d) * np.asarray(f(pts / t), dtype=float)
    return dilated


@dataclass(frozen=True)
class ScaledKernel1D:
    """1-D profile with L^1 dilation semantics and a known decay radius.

    kernel(t, z) = profile(z/t)/t; radius(t) bounds where values exceed ~1e-20,
    so lattice sums can truncate without visible error.
    """

    profile: object
    base_radius: float
    nonneg: bool
    label: str = ""

    def __call__(self, t: float, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.asarray(self.profile(z / t), dtype=float) / t

    def radius(self, t: float) -> float:
        return self.base_radius * t


def gaussian_profile_1d(scale: float = 1.0) -> ScaledKernel1D:
    """g_scale as a dilatable 1-D profile (nonnegative slot of the two-kernel forms)."""
    if scale <= 0:
        raise ValueError("scale must be positive")

    def prof(z):
        z = np.asarray(z, dtype=float)
        return np.exp(-np.pi * (z / scale) ** 2) / scale
    return ScaledKernel1D(profile=prof, base_radius=3.8 * scale, nonneg=True,
                          label=f"gauss[{scale:g}]")


def gaussian_derivative_profile_1d(scale: float = 1.0) -> ScaledKernel1D:
    """dg/dx at dilation `scale`: the mean-zero slot of the two-kernel forms."""
    if scale <= 0:
        raise ValueError("scale must be positive")

    def prof(z):
        z = np.asarray(z, dtype=float)
        w = z / scale
        return (-2.0 * np.pi * w) * np.exp(-np.pi * w * w) / scale
    return ScaledKernel1D(profile=prof, base_radius=4.2 * scale, nonneg=False,
                          label=f"dgauss[{scale:g}]")
