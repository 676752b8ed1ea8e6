"""Smoothed corner-counting forms, calibrated error forms, lacunary energies,
and the square-function / quadrilinear machinery that bounds them.

All forms are Riemann sums sharing the carrier's lattice: x, y, and the side
variable s run over the same spacing h, functions are zero-extended outside
their sampled box, and values scale like the continuum integrals they
approximate.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import _fastpaths as fp
from .grids import CostRefusalError, GridFunction, UndersampledShellError
from .kernels import (DEFAULT_WINDOW, ScaledKernel1D, SmoothWindow, WindowKernel, c1,
                      thin_shell_surrogate)
from .lp_patterns import as_lp_exponent

DEFAULT_TUPLE_BUDGET = 1_000_000_000


def tuple_budget(explicit: int | None = None) -> int:
    """Refusal threshold for elementary-tuple counts; env CORNERLAB_BUDGET_TUPLES overrides."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get("CORNERLAB_BUDGET_TUPLES")
    if env is not None:
        val = int(env)
        if val <= 0:
            raise ValueError("CORNERLAB_BUDGET_TUPLES must be positive")
        return val
    return DEFAULT_TUPLE_BUDGET


def worker_count() -> int:
    """Worker count for parallel method tags; env CORNERLAB_THREADS overrides (default all cores)."""
    env = os.environ.get("CORNERLAB_THREADS")
    if env is not None:
        val = int(env)
        if val <= 0:
            raise ValueError("CORNERLAB_THREADS must be positive")
        return val
    return os.cpu_count() or 1


_METHODS = ("direct", "blocked", "parallel")


@dataclass(frozen=True)
class FormReport:
    """Value of one form evaluation plus enough context to reproduce it."""

    value: float
    normalization: float
    method: str
    elapsed_seconds: float
    grid: dict
    params: dict
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.normalization > 0 and math.isfinite(self.normalization)):
            raise ValueError("normalization must be positive and finite")
        if not math.isfinite(self.value):
            raise ValueError("form value must be finite")

    @property
    def ratio(self) -> float:
        return self.value / self.normalization

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "normalization": self.normalization,
            "ratio": self.ratio,
            "method": self.method,
            "elapsed_seconds": self.elapsed_seconds,
            "grid": self.grid,
            "params": self.params,
            "notes": self.notes,
        }


@dataclass(frozen=True)
class LacunaryScales:
    """Ascending scale list with consecutive ratios >= 2."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1 or any(v <= 0 for v in vals):
            raise ValueError("scales must be a nonempty list of positive reals")
        for a, b in zip(vals, vals[1:]):
            if b / a < 2.0 - 1e-12:
                raise ValueError(f"scale ratio {b/a:g} below the lacunarity floor 2")
        object.__setattr__(self, "values", vals)

    @classmethod
    def dyadic(cls, count: int, lam_min: float = 2.0) -> "LacunaryScales":
        return cls(tuple(lam_min * 2.0 ** j for j in range(count)))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class DifferenceKernel:
    """Calibrated mean-zero shell kernel omega^eps - c1(eps) omega^1."""

    shell: WindowKernel
    reference: WindowKernel
    calibration: float

    @classmethod
    def build(cls, lam: float, eps: float, p=2.0, d: int = 1,
              window: SmoothWindow = DEFAULT_WINDOW) -> "DifferenceKernel":
        return cls(
            shell=WindowKernel(lam=lam, eps=eps, p=p, d=d, window=window),
            reference=WindowKernel(lam=lam, eps=1.0, p=p, d=d, window=window),
            calibration=c1(eps, p, d, window),
        )

    @property
    def d(self) -> int:
        return self.shell.d

    @property
    def lam(self) -> float:
        return self.shell.lam

    def radial_support(self) -> tuple[float, float]:
        lo_s, hi_s = self.shell.radial_support()
        lo_r, hi_r = self.reference.radial_support()
        return min(lo_s, lo_r), max(hi_s, hi_r)

    def radial_width(self) -> float:
        # resolution is governed by the thin shell piece
        return self.shell.radial_width()

    def radial_eval(self, r) -> np.ndarray | float:
        return self.shell.radial_eval(r) - self.calibration * self.reference.radial_eval(r)

    def __call__(self, s):
        return self.shell(s) - self.calibration * self.reference(s)


def _grid_meta(f: GridFunction) -> dict:
    return {"shape": list(f.shape), "spacing": f.spacing, "origin": list(f.origin)}


def _box_volume(f: GridFunction) -> float:
    return float(np.prod(f.box_sides))


def _pattern_dim(f: GridFunction) -> int:
    if f.d_total % 2 != 0:
        raise ValueError("corner forms need a grid on R^d x R^d (even total dimension)")
    return f.d_total // 2


def _check_shell_resolution(width: float, spacing: float, what: str):
    if width < 4.0 * spacing:
        raise UndersampledShellError(
            f"{what}: radial support width {width:g} spans fewer than 4 cells "
            f"at spacing {spacing:g}")


def _lattice_shifts(kernel, f: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero-weight lattice shift vectors in the kernel's radial support, with weights.

    Returns (ks, ws): ks integer shifts (M, d) in lexicographic order, ws the
    kernel values at s = spacing * k.
    """
    d = kernel.d
    h = f.spacing
    lo, hi = kernel.radial_support()
    kmax = int(math.floor(hi / h)) + 1
    limit = max(f.shape) - 1
    kmax = min(kmax, limit)
    if kmax < 0 or hi <= 0:
        return np.zeros((0, d), dtype=np.int64), np.zeros(0)
    axes = [np.arange(-kmax, kmax + 1)] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    ks = np.stack([m.ravel() for m in mesh], axis=-1).astype(np.int64)
    ws = np.asarray(kernel(ks * h), dtype=float)
    # s = 0 is excluded: patterns require s != 0, and the zero-shift sample
    # evaluates degenerate products (f^3 = f on indicators), misrepresenting
    # a cell whose continuum integrand is degenerate only on a null set
    sel = (ws != 0.0) & (ks != 0).any(axis=1)
    ks, ws = ks[sel], ws[sel]
    order = np.lexsort(ks.T[::-1])
    return ks[order], ws[order]


def _triple_reduce_numpy(values: np.ndarray, ks: np.ndarray, ws: np.ndarray, d: int) -> float:
    """Generic-dimension weighted triple-shift reduction with zero extension."""
    shape = values.shape
    total = 0.0
    zero = (0,) * d
    for k, w in zip(ks, ws):
        x_shift = tuple(int(c) for c in k) + zero
        y_shift = zero + tuple(int(c) for c in k)
        base = []
        for n, kx, ky in zip(shape, x_shift, y_shift):
            lo = max(0, -kx, -ky)
            hi = n - max(0, kx, ky)
            if hi <= lo:
                base = None
                break
            base.append(slice(lo, hi))
        if base is None:
            continue
        base = tuple(base)
        off_x = tuple(slice(sl.start + kk, sl.stop + kk) for sl, kk in zip(base, x_shift))
        off_y = tuple(slice(sl.start + kk, sl.stop + kk) for sl, kk in zip(base, y_shift))
        total += w * float((values[base] * values[off_x] * values[off_y]).sum())
    return total


def _overlap_tuple_count(shape, ks, d: int) -> int:
    total = 0
    for k in ks:
        cells = 1
        for n, kk in zip(shape[:d], k):
            cells *= max(0, n - abs(int(kk)))
        othr = 1
        for n, kk in zip(shape[d:], k):
            othr *= max(0, n - abs(int(kk)))
        total += cells * othr
    return total


def corner_form_M(f: GridFunction, kernel, method: str = "direct",
                  budget: int | None = None) -> FormReport:
    """Smoothed corner count h^{3d} sum_{x,y,s} f(x,y) f(x+s,y) f(x,y+s) kernel(s).

    kernel is a WindowKernel or DifferenceKernel on R^d with f on R^d x R^d;
    s runs over the lattice shifts inside the kernel's radial support (both
    signs). Undersampled shells (support thinner than 4 cells) are rejected.
    """
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}")
    d = kernel.d
    if _pattern_dim(f) != d:
        raise ValueError(f"grid is on R^{f.d_total}, kernel side lives on R^{d}")
    _check_shell_resolution(kernel.radial_width(), f.spacing, "corner form kernel")
    t0 = time.perf_counter()
    ks, ws = _lattice_shifts(kernel, f)
    h = f.spacing
    if d == 1:
        vals = np.ascontiguousarray(f.values, dtype=np.float64)
        k1 = np.ascontiguousarray(ks[:, 0])
        if method == "direct":
            raw = fp.triple_corner_reduce(vals, k1, ws)
        elif method == "parallel":
            raw = fp.triple_corner_reduce_parallel(vals, k1, ws)
        else:
            raw = _triple_reduce_numpy(vals, ks, ws, d)
    else:
        est = _overlap_tuple_count(f.shape, ks, d)
        cap = tuple_budget(budget)
        if est > cap:
            raise CostRefusalError(
                f"corner form would visit {est:.3e} tuples, over the budget {cap:.3e}")
        raw = _triple_reduce_numpy(f.values, ks, ws, d)
    value = h ** (3 * d) * raw
    params = {"lam": kernel.lam, "shifts": int(len(ks))}
    if isinstance(kernel, WindowKernel):
        params.update({"eps": kernel.eps, "p": kernel.p_value})
    elif isinstance(kernel, DifferenceKernel):
        params.update({"eps": kernel.shell.eps, "p": kernel.shell.p_value,
                       "c1": kernel.calibration})
    return FormReport(value=value, normalization=_box_volume(f), method=method,
                      elapsed_seconds=time.perf_counter() - t0,
                      grid=_grid_meta(f), params=params)


def corner_form_N(f: GridFunction, lam: float, p=2.0, eta: float = 0.05,
                  method: str = "direct", window: SmoothWindow = DEFAULT_WINDOW) -> FormReport:
    """Corner count against the thin-shell surrogate at width eta (floor-checked)."""
    d = _pattern_dim(f)
    surrogate = thin_shell_surrogate(lam, p, d, eta, grid_spacing=f.spacing, window=window)
    rep = corner_form_M(f, surrogate, method=method)
    rep.params["eta"] = eta
    rep.notes["surrogate"] = True
    return rep


def error_form_E(f: GridFunction, lam: float, eps: float, p=2.0, method: str = "direct",
                 window: SmoothWindow = DEFAULT_WINDOW) -> FormReport:
    """Calibrated error M^eps - c1(eps) M^1, evaluated against the difference kernel."""
    d = _pattern_dim(f)
    kernel = DifferenceKernel.build(lam, eps, p, d, window)
    _check_shell_resolution(kernel.radial_width(), f.spacing, "error form shell")
    rep = corner_form_M(f, kernel, method=method)
    rep.notes["difference_kernel"] = True
    return rep


def _pair_map(values: np.ndarray, ks: np.ndarray, ws: np.ndarray, method: str) -> np.ndarray:
    """B(x,y) = sum_k w_k f(x+s,y) f(x,y+s) on the full grid (d=1 fast path)."""
    out = np.zeros_like(values)
    k1 = np.ascontiguousarray(ks[:, 0])
    if method == "parallel":
        fp.pair_shift_map_parallel(values, k1, ws, out)
    elif method == "direct":
        fp.pair_shift_map(values, k1, ws, out)
    else:  # blocked: numpy slice accumulation, one shift at a time
        n0, n1 = values.shape
        for k, w in zip(k1, ws):
            k = int(k)
            i0, i1 = max(0, -k), n0 - max(0, k)
            j0, j1 = max(0, -k), n1 - max(0, k)
            out[i0:i1, j0:j1] += w * (values[i0 + k:i1 + k, j0:j1] * values[i0:i1, j0 + k:j1 + k])
    return out


def lacunary_energy(f: GridFunction, scales: LacunaryScales, eps: float, p=2.0,
                    method: str = "direct", window: SmoothWindow = DEFAULT_WINDOW) -> FormReport:
    """sum_j |E_{lam_j}^eps(f)|^2 with the Cauchy-Schwarz chain bound alongside.

    Per scale, the bilinear map B_j(x,y) = sum_s k_j(s) f(x+s,y) f(x,y+s) gives
    both E_j = h^{3d} sum f B_j and the square-function mass h^{4d} sum B_j^2;
    the report carries per-scale values, prefix sums, and the chain bound
    energy <= ||f||_2^2 * quadrilinear(f, f, sum_j k_j x k_j), which is exact
    modulo rounding at the discrete level.
    """
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}")
    d = _pattern_dim(f)
    if d != 1:
        raise CostRefusalError("lacunary energy maps are implemented for d = 1 carriers")
    n_min_side = min(f.box_sides)
    if max(scales.values) > n_min_side + 1e-9:
        raise ValueError(f"largest scale {max(scales.values):g} exceeds the box side {n_min_side:g}")
    t0 = time.perf_counter()
    h = f.spacing
    vals = np.ascontiguousarray(f.values, dtype=np.float64)
    f_l2_sq = h ** (2 * d) * float(np.einsum("ij,ij->", vals, vals))
    per_scale = []
    energy = 0.0
    b2_total = 0.0
    cal = None
    for lam in scales.values:
        kernel = DifferenceKernel.build(lam, eps, p, d, window)
        cal = kernel.calibration
        _check_shell_resolution(kernel.radial_width(), h, f"error shell at lam={lam:g}")
        ks, ws = _lattice_shifts(kernel, f)
        bmap = _pair_map(vals, ks, ws, method)
        e_j = h ** (3 * d) * float(np.einsum("ij,ij->", vals, bmap))
        b2_j = h ** (4 * d) * float(np.einsum("ij,ij->", bmap, bmap))
        energy += e_j * e_j
        b2_total += b2_j
        per_scale.append({"lam": lam, "error": e_j, "square_mass": b2_j})
    chain_rhs = f_l2_sq * b2_total
    prefix = []
    cum_e, cum_b = 0.0, 0.0
    for row in per_scale:
        cum_e += row["error"] ** 2
        cum_b += row["square_mass"]
        prefix.append({"scale_count": len(prefix) + 1, "energy": cum_e,
                       "chain_rhs": f_l2_sq * cum_b})
    norm = _box_volume(f) ** 2  # N^{4d}
    return FormReport(
        value=energy, normalization=norm, method=method,
        elapsed_seconds=time.perf_counter() - t0, grid=_grid_meta(f),
        params={"eps": eps, "p": float(as_lp_exponent(p).value),
                "scales": list(scales.values), "c1": cal},
        notes={"per_scale": per_scale, "prefix": prefix,
               "chain": {"f_l2_sq": f_l2_sq, "rhs": chain_rhs,
                         "holds": energy <= chain_rhs * (1 + 1e-12) + 1e-300}})


@dataclass(frozen=True)
class RankOneSum:
    """K(u, v) = sum_j k_j(u) k_j(v) for a list of side kernels on R^d."""

    components: tuple

    def __post_init__(self):
        if not self.components:
            raise ValueError("need at least one component kernel")
        dims = {k.d for k in self.components}
        if len(dims) != 1:
            raise ValueError("component kernels must share a dimension")

    @property
    def d(self) -> int:
        return self.components[0].d

    def radial_support(self) -> tuple[float, float]:
        los, his = zip(*(k.radial_support() for k in self.components))
        return min(los), max(his)

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        total = None
        for k in self.components:
            term = np.asarray(k(u)) * np.asarray(k(v))
            total = term if total is None else total + term
        return total


def build_K(scales: LacunaryScales, eps: float, p=2.0, d: int = 1,
            window: SmoothWindow = DEFAULT_WINDOW) -> RankOneSum:
    """Rank-one sum of calibrated difference kernels over the scale list."""
    comps = tuple(DifferenceKernel.build(lam, eps, p, d, window) for lam in scales.values)
    return RankOneSum(components=comps)


def quadrilinear_form(F: GridFunction, G: GridFunction, K, method: str = "direct",
                      budget: int | None = None) -> FormReport:
    """h^{4d} sum_{u,v,x,y} F(x+u,y) G(x,y+u) F(x+v,y) G(x,y+v) K(u,v).

    method="direct" runs the genuine double-shift sum (cost gated by the tuple
    budget); for rank-one K, method="rank-one" uses the exact square-function
    factorization sum_j h^{2d} sum_xy (h^d B_j)^2, which is algebraically the
    same value. Normalization is ||F||_4^2 ||G||_4^2 (the boundedness
    comparator).
    """
    if F.shape != G.shape or abs(F.spacing - G.spacing) > 1e-15:
        raise ValueError("F and G must share one grid")
    d = _pattern_dim(F)
    if d != 1:
        raise CostRefusalError("quadrilinear evaluation is implemented for d = 1 carriers")
    if method not in ("direct", "rank-one"):
        raise ValueError(f"unknown method {method!r}")
    if method == "rank-one" and not isinstance(K, RankOneSum):
        raise ValueError("rank-one evaluation needs a RankOneSum kernel")
    t0 = time.perf_counter()
    h = F.spacing
    n4 = F.lp_integral_norm(4) ** 2 * G.lp_integral_norm(4) ** 2
    norm = n4 if n4 > 0 else 1.0
    Fv = np.ascontiguousarray(F.values, dtype=np.float64)
    Gv = np.ascontiguousarray(G.values, dtype=np.float64)
    notes: dict = {}
    if method == "rank-one":
        total = 0.0
        for kern in K.components:
            ks, ws = _lattice_shifts(kern, F)
            bmap = np.zeros_like(Fv)
            n0, n1 = Fv.shape
            k1 = np.ascontiguousarray(ks[:, 0])
            for k, w in zip(k1, ws):
                k = int(k)
                i0, i1 = max(0, -k), n0 - max(0, k)
                j0, j1 = max(0, -k), n1 - max(0, k)
                bmap[i0:i1, j0:j1] += w * (Fv[i0 + k:i1 + k, j0:j1] * Gv[i0:i1, j0 + k:j1 + k])
            total += float(np.einsum("ij,ij->", bmap, bmap))
        value = h ** (4 * d) * total
        notes["components"] = len(K.components)
    else:
        if isinstance(K, RankOneSum):
            lo, hi = K.radial_support()
            kmax = min(int(math.floor(hi / h)) + 1, max(F.shape) - 1)
            kvals = np.arange(-kmax, kmax + 1, dtype=np.int64)
            weight_rows = np.stack([np.asarray(kern((kvals * h)[:, None]), dtype=float)
                                    for kern in K.components])
            kmat = weight_rows.T @ weight_rows  # K on the shift lattice
        else:
            kmax = max(F.shape) - 1
            kvals = np.arange(-kmax, kmax + 1, dtype=np.int64)
            uu = (kvals * h)[:, None]
            kmat = np.asarray(K(uu[:, None, :].repeat(len(kvals), 1),
                                uu[None, :, :].repeat(len(kvals), 0)), dtype=float)
        # zero side shifts are excluded, matching the corner-form convention
        kmat[kvals == 0, :] = 0.0
        kmat[:, kvals == 0] = 0.0
        nz = np.argwhere(kmat != 0.0)
        ku = np.ascontiguousarray(kvals[nz[:, 0]])
        kv = np.ascontiguousarray(kvals[nz[:, 1]])
        kw = np.ascontiguousarray(kmat[nz[:, 0], nz[:, 1]])
        est = int(fp.quad_form_tuple_count(Fv.shape[0], Fv.shape[1], ku, kv, kw))
        cap = tuple_budget(budget)
        if est > cap:
            raise CostRefusalError(
                f"quadrilinear form would visit {est:.3e} tuples, over the budget {cap:.3e}")
        value = h ** (4 * d) * float(fp.quad_form_direct(Fv, Gv, ku, kv, kw))
        notes["tuples"] = est
        notes["shift_pairs"] = int(len(ku))
    if n4 == 0:
        notes["normalization_fallback"] = "unit (zero fourth norms)"
    return FormReport(value=value, normalization=norm, method=method,
                      elapsed_seconds=time.perf_counter() - t0, grid=_grid_meta(F),
                      params={"kernel": type(K).__name__}, notes=notes)


def _phi_lattice_correlation(weight: ScaledKernel1D, t: float, h: float, origin: float,
                             n: int) -> np.ndarray:
    """C(delta) = h * sum_m phi_t(x' - p_m) phi_t(y' - p_m) as a function of x'-y'.

    The p-lattice is h*Z; with x' = origin + h*a the sum depends only on the
    index difference delta = a - b. Returns C indexed by delta in
    [-(n-1), n-1] (length 2n-1), zero where the kernels no longer overlap.
    """
    R = weight.radius(t)
    rlo = int(math.floor((-R - origin) / h)) - 1
    rhi = int(math.ceil((R - origin) / h)) + 1
    r = np.arange(rlo, rhi + 1)
    a = np.asarray(weight(t, origin + h * r), dtype=float)
    full = h * np.correlate(a, a, mode="full")  # index m-1+delta holds sum_r a[r] a[r+delta]
    m = len(a)
    out = np.zeros(2 * n - 1)
    deltas = np.arange(-(n - 1), n)
    ok = np.abs(deltas) <= m - 1
    out[ok] = full[m - 1 + deltas[ok]]
    return out


def _theta_single_factorization(values: np.ndarray, spacing: float, origins: tuple[float, float],
                                inner: ScaledKernel1D, weight: ScaledKernel1D,
                                t_grid: np.ndarray, du: float) -> float:
    """Squared-inner-integral evaluation of the two-kernel form.

    For each t: I(q; x', y') = h sum_x F(x,x') F(x,y') inner_t(x - q), then
    h^3 sum_{q,x',y'} I^2 * C_t(x'-y') with C_t the weight-kernel lattice
    autocorrelation; the t-integral uses midpoint log-spacing with weight du.
    """
    h = spacing
    n0, n1 = values.shape
    o0, o1 = origins
    x = o0 + h * np.arange(n0)
    pair = values[:, :, None] * values[:, None, :]  # [x, x', y']
    P = pair.reshape(n0, n1 * n1)
    total = 0.0
    for t in t_grid:
        R = inner.radius(t)
        qlo = int(math.floor((x[0] - R) / h))
        qhi = int(math.ceil((x[-1] + R) / h))
        q = h * np.arange(qlo, qhi + 1)
        psi_mat = np.asarray(inner(t, x[None, :] - q[:, None]), dtype=float)
        I = h * (psi_mat @ P)  # [q, (x', y')]
        corr = _phi_lattice_correlation(weight, t, h, o1, n1)
        idx = np.subtract.outer(np.arange(n1), np.arange(n1)) + (n1 - 1)
        wmat = corr[idx]
        ss = np.einsum("qp,qp->p", I, I)
        total += du * h ** 3 * float(ss @ wmat.ravel())
    return total


def theta_form(F: GridFunction, psi: ScaledKernel1D, phi: ScaledKernel1D, *,
               t_min: float | None = None, t_max: float | None = None,
               points_per_octave: int = 16, factorization: str = "auto") -> FormReport:
    """Two-kernel multiscale form over dilations t, via squared inner integrals.

    Integrates, in dt/t over a geometric grid, the six-variable lattice sum
    F(x,x')F(x,y')F(y,x')F(y,y') psi_t(x-q) psi_t(y-q) phi_t(x'-p) phi_t(y'-p).
    The (x,y)|q square makes every t-slice a sum of squares against
    phi-autocorrelation weights, so the value is manifestly >= 0 whenever the
    weight slot is nonnegative (the reported certificate). factorization "x"
    squares the psi integral (phi weights); "xprime" squares the phi integral
    (psi weights); "auto" picks whichever slot carries a nonnegative kernel.
    """
    if F.d_total != 2:
        raise ValueError("theta form is implemented for grids on R x R")
    if points_per_octave < 8:
        raise ValueError("t-grid too coarse: need at least 8 points per octave")
    h = F.spacing
    L = max(F.box_sides)
    lo = h / 2.0 if t_min is None else float(t_min)
    hi = 8.0 * L if t_max is None else float(t_max)
    if not 0 < lo < hi:
        raise ValueError("need 0 < t_min < t_max")
    if factorization == "auto":
        factorization = "x" if phi.nonneg else ("xprime" if psi.nonneg else "x")
    if factorization not in ("x", "xprime"):
        raise ValueError(f"unknown factorization {factorization!r}")
    octaves = math.log(hi / lo) / math.log(2.0)
    n_t = int(math.ceil(octaves * points_per_octave))
    du = math.log(hi / lo) / n_t
    t_grid = lo * np.exp(du * (np.arange(n_t) + 0.5))
    t0 = time.perf_counter()
    if factorization == "x":
        value = _theta_single_factorization(F.values, h, (F.origin[0], F.origin[1]),
                                            psi, phi, t_grid, du)
        certificate = bool(phi.nonneg)
    else:
        value = _theta_single_factorization(np.ascontiguousarray(F.values.T), h,
                                            (F.origin[1], F.origin[0]), phi, psi, t_grid, du)
        certificate = bool(psi.nonneg)
    n4 = F.lp_integral_norm(4) ** 4
    norm = n4 if n4 > 0 else _box_volume(F)
    return FormReport(
        value=value, normalization=norm, method="direct",
        elapsed_seconds=time.perf_counter() - t0, grid=_grid_meta(F),
        params={"psi": psi.label, "phi": phi.label, "t_min": lo, "t_max": hi,
                "points_per_octave": points_per_octave, "n_t": n_t},
        notes={"factorization": factorization, "nonneg_certificate": certificate,
               "nonneg_held": (value >= -1e-12 * max(norm, 1.0)) if certificate else None})
