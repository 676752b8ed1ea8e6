"""Gowers uniformity norms on grid functions, the dilation scaling law, and
the generalized von Neumann ratio for corner counts.

The continuum norms are approximated on a periodized lattice (period = 4x the
sampled box per axis, which keeps zero-extension wrap-around out of every
difference correlation up to k = 3) with Riemann normalization h^{d(k+1)}.
U^2 has two independent computational routes, direct shift convolution and
the fourth-power Fourier-coefficient sum, kept separate on purpose so they
can cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counting_forms import corner_form_M, tuple_budget
from .grids import CostRefusalError, GridFunction
from .kernels import DEFAULT_WINDOW, SmoothWindow, WindowKernel

PERIODIZATION_FACTOR = 4


@dataclass(frozen=True)
class UniformityNormResult:
    """Degree-k uniformity norm with its Riemann-sum convention record."""

    k: int
    value: float
    power_sum: float  # value ** 2^k, the normalized correlation sum
    normalization: dict

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("uniformity norms are nonnegative")
        back = self.value ** (2 ** self.k)
        scale = max(abs(self.power_sum), 1.0)
        if abs(back - self.power_sum) > 1e-9 * scale:
            raise ValueError("value is not the 2^k-th root of the correlation sum")


def _periodized(f: GridFunction) -> np.ndarray:
    shape = tuple(PERIODIZATION_FACTOR * n for n in f.shape)
    out = np.zeros(shape)
    out[tuple(slice(0, n) for n in f.shape)] = f.values
    return out


def _u2_power_fourier(vals: np.ndarray) -> float:
    # sum_{x,h1,h2} f(x)f(x+h1)f(x+h2)f(x+h1+h2) = (1/M^d) sum |fhat|^4, circularly
    fhat = np.fft.fftn(vals)
    return float((np.abs(fhat) ** 4).sum()) / vals.size


def _u2_power_direct(vals: np.ndarray) -> float:
    # independent route: A(w) = sum_x f(x) f(x+w) by explicit rolls, then sum A^2
    total = 0.0
    axes = tuple(range(vals.ndim))
    for shift in np.ndindex(*vals.shape):
        a = float((vals * np.roll(vals, shift, axis=axes)).sum())
        total += a * a
    return total


def _u3_power_fourier(vals: np.ndarray) -> float:
    # sum over h3 of the U^2 power sum of x -> f(x) f(x+h3)
    total = 0.0
    axes = tuple(range(vals.ndim))
    for shift in np.ndindex(*vals.shape):
        g = vals * np.roll(vals, shift, axis=axes)
        total += _u2_power_fourier(g)
    return total


def gowers_norm(f: GridFunction, k: int, method: str = "fourier",
                budget: int | None = None) -> UniformityNormResult:
    """Degree-k Gowers norm of the zero-extended grid function.

    value^{2^k} = h^{d(k+1)} * (circular correlation sum on the 4x periodized
    lattice). method "direct" is the shift-convolution route, only wired for
    k = 2 where it serves as the independent cross-check of the FFT path.
    """
    if k not in (2, 3):
        raise ValueError("degree k must be 2 or 3")
    if method not in ("fourier", "direct"):
        raise ValueError(f"unknown method {method!r}")
    if method == "direct" and k != 2:
        raise ValueError("the direct route is only wired for k = 2")
    vals = _periodized(f)
    m_tot = vals.size
    cost = m_tot * m_tot if (k == 3 or method == "direct") else m_tot
    cap = tuple_budget(budget)
    if cost > cap:
        raise CostRefusalError(
            f"U^{k} evaluation would touch {cost:.3e} cell pairs, over the budget {cap:.3e}")
    if k == 2:
        s_pow = _u2_power_direct(vals) if method == "direct" else _u2_power_fourier(vals)
    else:
        s_pow = _u3_power_fourier(vals)
    d = f.d_total
    power = f.spacing ** (d * (k + 1)) * s_pow
    value = power ** (1.0 / 2 ** k)
    return UniformityNormResult(
        k=k, value=value, power_sum=power,
        normalization={
            "spacing": f.spacing,
            "periodization_factor": PERIODIZATION_FACTOR,
            "period_points": list(vals.shape),
            "convention": f"riemann h^(d(k+1)), d={d}",
            "method": method,
        })


def monotonicity_check(f: GridFunction, budget: int | None = None) -> dict:
    """U^2 <= U^3 on the periodized lattice, in expectation normalization.

    The Riemann values carry different box powers, so the comparison is made
    with counting-measure averages: u_k = (S_k / M^{d(k+1)})^{1/2^k}. Returns
    both averages and a flag; violations are reported, never raised.
    """
    r2 = gowers_norm(f, 2, budget=budget)
    r3 = gowers_norm(f, 3, budget=budget)
    d = f.d_total
    m_per_axis = PERIODIZATION_FACTOR ** d * float(np.prod(f.shape))
    h = f.spacing
    u2_bar = (r2.power_sum / h ** (3 * d) / m_per_axis ** 3) ** 0.25
    u3_bar = (r3.power_sum / h ** (4 * d) / m_per_axis ** 4) ** 0.125
    tol = 1e-9 * max(u3_bar, 1e-30)
    return {
        "u2_mean_normalized": u2_bar,
        "u3_mean_normalized": u3_bar,
        "holds": bool(u2_bar <= u3_bar + tol),
        "slack": u3_bar - u2_bar,
    }


def _support_span(vals: np.ndarray) -> tuple[int, int]:
    idx = np.nonzero(np.abs(vals) > 1e-12 * np.abs(vals).max())[0]
    if idx.size == 0:
        return 0, 0
    return int(idx[0]), int(idx[-1])


def scaling_check(f: GridFunction, t: float, k: int, budget: int | None = None) -> dict:
    """Measured vs predicted dilation exponent for f_t(x) = t^{-d} f(x/t).

    d = 1 only. f_t is resampled onto f's own grid by linear interpolation
    (zero outside), so the prediction t^{-d(1-(k+1)/2^k)} is met up to
    interpolation and support-clipping error, reported as rel_deviation.
    """
    if f.d_total != 1:
        raise ValueError("scaling check is wired for d = 1")
    if t <= 0 or not math.isfinite(t):
        raise ValueError("dilation parameter must be positive and finite")
    lo, hi = _support_span(f.values)
    span_cells = hi - lo + 1
    if t * span_cells < 8.0:
        raise ValueError("resampling underflow: dilated support spans fewer than 8 cells")
    x = f.axis_points(0)
    resampled = np.interp(x / t, x, f.values, left=0.0, right=0.0) / t
    # L^1 dilation preserves the integral, so a sum mismatch means clipping
    lost = abs(float(f.values.sum()) - float(resampled.sum()))
    if lost > 1e-6 * max(float(np.abs(f.values).sum()), 1e-30):
        raise ValueError("dilated support does not fit the sampled box")
    f_t = GridFunction(values=resampled, spacing=f.spacing, origin=f.origin)
    base = gowers_norm(f, k, budget=budget).value
    if base == 0.0:
        raise ValueError("scaling ratio undefined for the zero function")
    measured = gowers_norm(f_t, k, budget=budget).value / base
    exponent = -(1.0 - (k + 1) / 2 ** k)  # d = 1
    predicted = t ** exponent
    return {
        "t": t,
        "k": k,
        "measured_ratio": measured,
        "predicted_ratio": predicted,
        "exponent": exponent,
        "rel_deviation": abs(measured - predicted) / predicted,
    }


class SupportedKernel:
    """Adapter giving a raw callable the corner-form kernel protocol.

    fn takes points shaped (..., d); support_radius bounds the max-norm
    support. radial_width is reported as +inf: a generic test kernel is not a
    thin shell, so the undersampling gate does not apply.
    """

    def __init__(self, fn, lam: float, support_radius: float, d: int = 1):
        if lam <= 0 or support_radius <= 0:
            raise ValueError("lam and support_radius must be positive")
        self.fn = fn
        self.lam = float(lam)
        self.support_radius = float(support_radius)
        self.d = int(d)

    def radial_support(self) -> tuple[float, float]:
        return 0.0, self.support_radius

    def radial_width(self) -> float:
        return math.inf

    def __call__(self, s):
        return self.fn(s)


def _as_corner_kernel(g, lam: float) -> tuple:
    """Accept either a kernel-protocol object or (callable, support_radius)."""
    if hasattr(g, "radial_support") and hasattr(g, "d"):
        return g, g.d
    raise ValueError("g must expose the kernel protocol; wrap callables in SupportedKernel")


def sample_kernel_1d(g, spacing: float) -> GridFunction:
    """Sample a 1-D kernel on its support lattice, for U^k evaluation."""
    _, hi = g.radial_support()
    j_max = int(math.floor(hi / spacing)) + 1
    pts = spacing * np.arange(-j_max, j_max + 1)
    vals = np.asarray(g(pts.reshape(-1, 1)), dtype=float)
    return GridFunction(values=vals, spacing=spacing, origin=(float(pts[0]),))


def von_neumann_check(f: GridFunction, g, lam: float, budget: int | None = None) -> dict:
    """Corner-form value against the N^{2d} lambda^{d/2} ||g||_{U^3} envelope.

    f lives on (R^d)^2 with |f| <= 1; g is a compactly supported kernel on
    R^d (kernel protocol). The U^3 norm of g is taken on the same lattice
    spacing as f. A zero denominator with a nonzero form value is flagged as
    a violation; zero over zero is vacuous.
    """
    if np.abs(f.values).max() > 1.0 + 1e-12:
        raise ValueError("f must be bounded by 1 in absolute value")
    kernel, d = _as_corner_kernel(g, lam)
    if d != 1:
        raise CostRefusalError("von Neumann check is wired for pattern dimension 1")
    form = corner_form_M(f, kernel, budget=budget)
    g_grid = sample_kernel_1d(kernel, f.spacing)
    u3 = gowers_norm(g_grid, 3, budget=budget).value
    n_side = max(f.box_sides)
    denom = n_side ** (2 * d) * lam ** (d / 2.0) * u3
    numer = abs(form.value)
    if denom == 0.0 and numer == 0.0:
        status, ratio = "vacuous", math.nan
    elif denom == 0.0:
        status, ratio = "violation", math.inf
    else:
        status, ratio = "ok", numer / denom
    return {
        "form_value": form.value,
        "u3_norm": u3,
        "envelope": denom,
        "ratio": ratio,
        "status": status,
        "lam": lam,
        "box_side": n_side,
    }


def shell_u3_distance(lam: float, eps: float, spacing: float, etas=None,
                      p=2.0, window: SmoothWindow = DEFAULT_WINDOW,
                      budget: int | None = None) -> dict:
    """U^3 distance from the eps-window to thin-shell surrogates at shrinking eta.

    Computes ||omega^eta - omega^eps||_{U^3} on a 1-D lattice for a ladder of
    eta values and reports successive differences: the ladder should be Cauchy
    (differences shrinking) as eta decreases toward the vague limit. The
    smallest eta is still resolution-floored at 4 cells across the shell.
    """
    if etas is None:
        etas = [eps / 2, eps / 4, eps / 8]
    etas = sorted(float(e) for e in etas)[::-1]
    if any(e <= 0 or e >= eps for e in etas):
        raise ValueError("eta ladder must sit strictly inside (0, eps)")
    base = WindowKernel(lam=lam, eps=eps, p=p, d=1, window=window)
    values = []
    for eta in etas:
        shell = WindowKernel(lam=lam, eps=eta, p=p, d=1, window=window)
        if shell.radial_width() < 4.0 * spacing:
            raise ValueError(
                f"eta={eta:g} gives a shell thinner than 4 cells at spacing {spacing:g}")
        diff = SupportedKernel(
            lambda s, a=shell, b=base: a(s) - b(s), lam=lam,
            support_radius=max(shell.radial_support()[1], base.radial_support()[1]))
        g_grid = sample_kernel_1d(diff, spacing)
        values.append(gowers_norm(g_grid, 3, budget=budget).value)
    diffs = [abs(b - a) for a, b in zip(values, values[1:])]
    cauchy = all(b <= a + 1e-12 for a, b in zip(diffs, diffs[1:])) if len(diffs) >= 2 else True
    return {
        "etas": list(etas),
        "u3_values": values,
        "successive_diffs": diffs,
        "cauchy": bool(cauchy),
    }
