"""lp geometry, shell counterexample sets, and exhaustive pattern searches.

The sets here are unions of thin lp shells around integer radii (in the p-th
power of the norm). Their defining feature: an exact finite-difference
identity pins the p-th power of any progression's side length near rational
values, so progressions whose side norm falls in certain open gaps cannot
occur at all. The searches in this module are the brute-force oracles for
that claim on bounded lattices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grids import CostRefusalError, GridFunction, counter_rng

_MASK_CELL_GUARD = 500_000_000  # refuse searches whose product-lattice mask would exceed this


@dataclass(frozen=True)
class LpExponent:
    """Exponent for lp norms; infinity carried as a distinguished flag, not a float."""

    value: float = 2.0
    infinite: bool = False

    def __post_init__(self):
        if self.infinite:
            object.__setattr__(self, "value", math.inf)
        else:
            if not math.isfinite(self.value) or self.value < 1.0:
                raise ValueError(f"finite exponent must satisfy p >= 1, got {self.value}")

    @classmethod
    def sup(cls) -> "LpExponent":
        return cls(value=math.inf, infinite=True)

    def __float__(self) -> float:
        return math.inf if self.infinite else float(self.value)


def as_lp_exponent(p) -> LpExponent:
    if isinstance(p, LpExponent):
        return p
    p = float(p)
    if math.isinf(p):
        return LpExponent.sup()
    return LpExponent(p)


def lp_norm(v, p, axis: int = -1) -> np.ndarray | float:
    """lp norm along `axis`; supports finite p >= 1 and the sup norm."""
    pe = as_lp_exponent(p)
    a = np.abs(np.asarray(v, dtype=float))
    if pe.infinite:
        out = a.max(axis=axis)
    else:
        out = (a ** pe.value).sum(axis=axis) ** (1.0 / pe.value)
    return float(out) if np.ndim(out) == 0 else out


def lp_power_sum(v, p: float, axis: int = -1):
    """sum |v_i|^p along `axis` (the quantity the shells are built from)."""
    a = np.abs(np.asarray(v, dtype=float))
    out = (a ** float(p)).sum(axis=axis)
    return float(out) if np.ndim(out) == 0 else out


def bourgain_forbidden_intervals(n_max: int, power: bool = False) -> list[tuple[float, float]]:
    """Open gaps in the possible side norms of 3-progressions in the annulus set.

    Interval n is (sqrt((5n-3)/10), sqrt((5n-2)/10)); with power=True the
    bounds are returned in the squared norm, where they are exact rationals.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    out = []
    for n in range(1, n_max + 1):
        lo, hi = (5 * n - 3) / 10.0, (5 * n - 2) / 10.0
        out.append((lo, hi) if power else (math.sqrt(lo), math.sqrt(hi)))
    return out


def general_forbidden_intervals(p: int, n_max: int, power: bool = False) -> list[tuple[float, float]]:
    """Open gaps for (p+1)-progressions in the lp shell set on the positive cone.

    Interval n is (((4n-3)/(4 p!))^(1/p), ((4n-1)/(4 p!))^(1/p)); power=True
    returns the exact rational bounds on the p-th power of the norm.
    """
    if not isinstance(p, int) or p < 1:
        raise ValueError("p must be an integer >= 1")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    fact4 = 4 * math.factorial(p)
    out = []
    for n in range(1, n_max + 1):
        lo, hi = (4 * n - 3) / fact4, (4 * n - 1) / fact4
        out.append((lo, hi) if power else (lo ** (1.0 / p), hi ** (1.0 / p)))
    return out


@dataclass(frozen=True)
class ShellSet:
    """Union of thin lp shells: points with sum |x_i|^p within half_width of some n in [1, n_max].

    positivity=True restricts the domain to the closed positive cone (the
    general construction); positivity=False is the plain annulus family.
    """

    p: int
    d: int
    half_width: float | None = None
    positivity: bool = True
    n_max: int = 10 ** 6

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 1:
            raise ValueError("shell exponent p must be an integer >= 1")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        hw = self.half_width if self.half_width is not None else 2.0 ** (-self.p - 2)
        if not 0 < hw < 0.5:
            raise ValueError(f"half_width must lie in (0, 1/2), got {hw}")
        object.__setattr__(self, "half_width", hw)
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @classmethod
    def for_window(cls, p: int, d: int, window_side: float, **kw) -> "ShellSet":
        # largest shell index reachable inside a window of the given side
        n_max = math.ceil((window_side * d ** (1.0 / p)) ** p) + 1
        return cls(p=p, d=d, n_max=n_max, **kw)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return shell_membership(pts, self)


def shell_membership(x, shell: ShellSet) -> np.ndarray | bool:
    """Vectorized membership in a ShellSet; x has shape (..., d)."""
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != shell.d:
        raise ValueError(f"points have dimension {pts.shape[-1]}, shell expects {shell.d}")
    r = lp_power_sum(pts, shell.p)
    r = np.asarray(r, dtype=float)
    m = np.clip(np.rint(r), 1, shell.n_max)
    member = np.abs(r - m) <= shell.half_width
    if shell.positivity:
        member &= (pts >= 0).all(axis=-1)
    return bool(member) if member.ndim == 0 else member


def _exact_power_sum(v, p: int) -> Fraction:
    total = Fraction(0)
    for c in v:
        total += abs(Fraction(c)) ** p
    return total


def binomial_difference(x, s, p: int, exact: bool = False):
    """Alternating binomial combination sum_j (-1)**(p-j) C(p,j) ||x + j s||_p^p.

    Requires x + j s coordinatewise nonnegative for every j in 0..p (the
    combination lives on the positive cone, where |.|^p is a polynomial).
    There the p-th finite difference collapses coordinatewise: the value is
    exactly p! * sum_i s_i^p, which equals p! * ||s||_p^p whenever s is
    itself in the positive cone or p is even. exact=True runs in rational
    arithmetic.
    """
    if not isinstance(p, int) or p < 1:
        raise ValueError("p must be an integer >= 1")
    x = list(x)
    s = list(s)
    if len(x) != len(s):
        raise ValueError("x and s must have the same dimension")
    for j in range(p + 1):
        if any((Fraction(xi) if exact else float(xi)) + j * (Fraction(si) if exact else float(si)) < 0
               for xi, si in zip(x, s)):
            raise ValueError(f"x + {j}*s leaves the positive cone; identity does not apply")
    if exact:
        total = Fraction(0)
        for j in range(p + 1):
            shifted = [Fraction(xi) + j * Fraction(si) for xi, si in zip(x, s)]
            total += (-1) ** (p - j) * math.comb(p, j) * _exact_power_sum(shifted, p)
        return total
    xa, sa = np.asarray(x, dtype=float), np.asarray(s, dtype=float)
    total = 0.0
    for j in range(p + 1):
        total += (-1) ** (p - j) * math.comb(p, j) * lp_power_sum(xa + j * sa, p)
    return total


def scalar_finite_difference(alpha, beta, p: int, l: int, exact: bool = False):
    """sum_j (-1)**(p-j) C(p,j) (alpha + j beta)^l: zero for l < p, p! beta^p at l = p."""
    if not isinstance(p, int) or p < 1:
        raise ValueError("p must be an integer >= 1")
    if not isinstance(l, int) or l < 0:
        raise ValueError("l must be a nonnegative integer")
    if l > p:
        raise ValueError(f"order l={l} exceeds difference order p={p}; identity does not apply")
    if exact:
        a, b = Fraction(alpha), Fraction(beta)
        return sum((-1) ** (p - j) * math.comb(p, j) * (a + j * b) ** l for j in range(p + 1))
    a, b = float(alpha), float(beta)
    return float(sum((-1) ** (p - j) * math.comb(p, j) * (a + j * b) ** l for j in range(p + 1)))


@dataclass(frozen=True)
class Lattice:
    """Uniform sampling lattice in R^d: points origin + spacing * index."""

    origin: tuple[float, ...]
    spacing: float
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if len(self.origin) != len(self.counts) or not self.counts:
            raise ValueError("origin and counts must be same nonzero length")
        if any(c < 1 for c in self.counts):
            raise ValueError("counts must be positive")

    @property
    def d(self) -> int:
        return len(self.counts)

    @classmethod
    def for_window(cls, window, spacing: float) -> "Lattice":
        """Lattice covering [lo, hi] per axis; window = ((lo, hi), ...)."""
        origin, counts = [], []
        for lo, hi in window:
            if hi <= lo:
                raise ValueError("window must have positive extent")
            origin.append(float(lo))
            counts.append(int(math.floor((hi - lo) / spacing + 1e-9)) + 1)
        return cls(origin=tuple(origin), spacing=float(spacing), counts=tuple(counts))

    def axis_points(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing * np.arange(self.counts[axis])

    def default_tolerance(self) -> float:
        return self.spacing * self.d


def default_search_lattice(window, lam: float) -> Lattice:
    """Search lattice at the default spacing lambda/32."""
    return Lattice.for_window(window, spacing=lam / 32.0)


@dataclass(frozen=True)
class CornerHit:
    """One corner (x, y), (x+s, y), (x, y+s); s is signed (orientation preserved)."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    s: tuple[float, ...]
    side_norm: float


@dataclass(frozen=True)
class ApHit:
    """One k-term progression x, x+s, ..., x+(k-1)s with signed difference s."""

    x: tuple[float, ...]
    s: tuple[float, ...]
    length: int
    side_norm: float


def _norm_window(lam, tol, norm_window, p, lattice):
    """Resolve the side-norm acceptance test into power-of-norm bounds + openness."""
    pe = as_lp_exponent(p)
    if pe.infinite:
        raise ValueError("pattern searches require a finite exponent")
    if (lam is None) == (norm_window is None):
        raise ValueError("provide exactly one of lam or norm_window")
    if lam is not None:
        if lam <= 0:
            raise ValueError("lam must be positive")
        t = lattice.default_tolerance() if tol is None else float(tol)
        lo, hi = max(lam - t, 0.0) ** pe.value, (lam + t) ** pe.value
        return lo, hi, False, pe.value
    lo, hi = norm_window
    if not 0 <= lo < hi:
        raise ValueError("norm_window must satisfy 0 <= lo < hi")
    return float(lo) ** pe.value, float(hi) ** pe.value, True, pe.value


def _candidate_shifts(lattice: Lattice, lo_pow, hi_pow, open_interval, p_val):
    """Nonzero integer shift vectors k with ||spacing*k||_p^p inside the window, both signs."""
    h, d = lattice.spacing, lattice.d
    kmax = int(math.floor(hi_pow ** (1.0 / p_val) / h)) + 1
    axes = [np.arange(-min(kmax, c - 1), min(kmax, c - 1) + 1) for c in lattice.counts]
    mesh = np.meshgrid(*axes, indexing="ij")
    ks = np.stack([m.ravel() for m in mesh], axis=-1)
    pw = ((np.abs(ks) * h) ** p_val).sum(axis=-1)
    if open_interval:
        sel = (pw > lo_pow) & (pw < hi_pow)
    else:
        sel = (pw >= lo_pow) & (pw <= hi_pow)
    sel &= (ks != 0).any(axis=-1)
    ks, pw = ks[sel], pw[sel]
    order = np.lexsort(ks.T[::-1])  # lexicographic in k
    return ks[order], pw[order]


def _base_and_shifted(shape, shift):
    """Slices so that base[sl0] aligns with base shifted by `shift` (zero extension)."""
    sl0, sl1 = [], []
    for n, k in zip(shape, shift):
        k = int(k)
        sl0.append(slice(max(0, -k), n - max(0, k)))
        sl1.append(slice(max(0, k), n + min(0, k)))
    return tuple(sl0), tuple(sl1)


def _membership_mask(membership, lattice: Lattice, copies: int):
    """Boolean mask of membership over the `copies`-fold product of the lattice."""
    cells = int(np.prod([float(c) for c in lattice.counts])) ** copies
    if cells > _MASK_CELL_GUARD:
        raise CostRefusalError(f"product lattice has {cells:.2e} cells, over the search guard")
    axes = [lattice.axis_points(a) for a in range(lattice.d)] * copies
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1)
    mask = np.asarray(membership(pts), dtype=bool)
    if mask.shape != tuple(lattice.counts) * copies:
        raise ValueError("membership predicate returned a mask of the wrong shape")
    return mask


def find_corners(membership, lattice: Lattice, *, p=2.0, lam: float | None = None,
                 tol: float | None = None, norm_window=None) -> list[CornerHit]:
    """Exhaustive corner search over a bounded product lattice.

    membership is a predicate on R^d x R^d (arrays of shape (..., 2d));
    x and y each range over `lattice`, s over nonzero lattice vectors of either
    sign whose lp norm passes the side test (|norm - lam| <= tol, or an open
    norm_window = (lo, hi)). Hits are lexicographically ordered by (s, x, y).
    """
    lo, hi, open_iv, p_val = _norm_window(lam, tol, norm_window, p, lattice)
    mask = _membership_mask(membership, lattice, copies=2)
    ks, pws = _candidate_shifts(lattice, lo, hi, open_iv, p_val)
    d, h = lattice.d, lattice.spacing
    hits: list[CornerHit] = []
    for k, pw in zip(ks, pws):
        x_shift = tuple(k) + (0,) * d
        y_shift = (0,) * d + tuple(k)
        b0, s0 = _base_and_shifted(mask.shape, x_shift)
        b1, s1 = _base_and_shifted(mask.shape, y_shift)
        # intersect both base windows
        base = tuple(slice(max(a.start, b.start), min(a.stop, b.stop)) for a, b in zip(b0, b1))
        if any(sl.start >= sl.stop for sl in base):
            continue
        off_x = tuple(slice(sl.start + int(ki), sl.stop + int(ki)) for sl, ki in zip(base, x_shift))
        off_y = tuple(slice(sl.start + int(ki), sl.stop + int(ki)) for sl, ki in zip(base, y_shift))
        good = mask[base] & mask[off_x] & mask[off_y]
        if not good.any():
            continue
        s_vec = tuple(h * float(ki) for ki in k)
        nrm = pw ** (1.0 / p_val)
        for idx in np.argwhere(good):
            full = tuple(int(i) + sl.start for i, sl in zip(idx, base))
            x = tuple(lattice.origin[a] + h * full[a] for a in range(d))
            y = tuple(lattice.origin[a] + h * full[d + a] for a in range(d))
            hits.append(CornerHit(x=x, y=y, s=s_vec, side_norm=float(nrm)))
    return hits


def find_aps(membership, lattice: Lattice, k: int, *, p=2.0, lam: float | None = None,
             tol: float | None = None, norm_window=None) -> list[ApHit]:
    """Exhaustive k-term progression search on a bounded lattice (k >= 3).

    Same side-norm conventions as find_corners; membership is a predicate on
    R^d (arrays of shape (..., d)).
    """
    if k < 3:
        raise ValueError("progressions need k >= 3")
    lo, hi, open_iv, p_val = _norm_window(lam, tol, norm_window, p, lattice)
    mask = _membership_mask(membership, lattice, copies=1)
    ks, pws = _candidate_shifts(lattice, lo, hi, open_iv, p_val)
    d, h = lattice.d, lattice.spacing
    hits: list[ApHit] = []
    for kv, pw in zip(ks, pws):
        base = tuple(slice(0, n) for n in mask.shape)
        ok = True
        for j in range(k):
            shift = tuple(int(j * ki) for ki in kv)
            b, _ = _base_and_shifted(mask.shape, shift)
            base = tuple(slice(max(a.start, c.start), min(a.stop, c.stop)) for a, c in zip(base, b))
            if any(sl.start >= sl.stop for sl in base):
                ok = False
                break
        if not ok:
            continue
        good = np.ones([sl.stop - sl.start for sl in base], dtype=bool)
        for j in range(k):
            sl = tuple(slice(b.start + int(j * ki), b.stop + int(j * ki)) for b, ki in zip(base, kv))
            good &= mask[sl]
            if not good.any():
                break
        if not good.any():
            continue
        s_vec = tuple(h * float(ki) for ki in kv)
        nrm = pw ** (1.0 / p_val)
        for idx in np.argwhere(good):
            x = tuple(lattice.origin[a] + h * (int(idx[a]) + base[a].start) for a in range(d))
            hits.append(ApHit(x=x, s=s_vec, length=k, side_norm=float(nrm)))
    return hits


def lift_ap_set_to_corners(membership, d: int, variant="pair"):
    """Lift a set A in R^d to the configuration space where corners project to progressions.

    variant="pair": predicate on R^d x R^d true iff y - x in A (corners in the
    pair set project to 3-progressions under (x, y) -> y - x).
    variant=k (int >= 3): predicate on (R^d)^(k-1) true iff sum_j j*x_j in A.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if variant == "pair":
        def pair_pred(pts):
            pts = np.asarray(pts, dtype=float)
            if pts.shape[-1] != 2 * d:
                raise ValueError(f"expected points in R^{2*d}")
            return membership(pts[..., d:] - pts[..., :d])
        return pair_pred
    k = int(variant)
    if k < 3:
        raise ValueError("generalized lift needs k >= 3")

    def gen_pred(pts):
        pts = np.asarray(pts, dtype=float)
        if pts.shape[-1] != (k - 1) * d:
            raise ValueError(f"expected points in R^{(k - 1) * d}")
        acc = np.zeros(pts.shape[:-1] + (d,), dtype=float)
        for j in range(1, k):
            acc += j * pts[..., (j - 1) * d: j * d]
        return membership(acc)
    return gen_pred


def max_corner_free(n: int) -> int:
    """Largest subset of {0..n-1}^2 with no corner (i,j),(i+k,j),(i,j+k), k != 0 (either sign).

    Exhaustive over all 2**(n*n) subsets; hard-capped at n <= 4.
    """
    if not 1 <= n <= 4:
        raise ValueError("exhaustive corner-free search is capped at n <= 4")
    cells = [(i, j) for i in range(n) for j in range(n)]
    index = {c: t for t, c in enumerate(cells)}
    masks = set()
    for (i, j) in cells:
        for k in range(-(n - 1), n):
            if k == 0 or not (0 <= i + k < n and 0 <= j + k < n):
                continue
            masks.add((1 << index[(i, j)]) | (1 << index[(i + k, j)]) | (1 << index[(i, j + k)]))
    subsets = np.arange(1 << (n * n), dtype=np.uint32)
    ok = np.ones(subsets.shape, dtype=bool)
    for m in sorted(masks):
        ok &= (subsets & np.uint32(m)) != np.uint32(m)
    return int(np.bitwise_count(subsets[ok]).max())


def varnavides_corner_density(set_grid: GridFunction, n: int, epsilon: float,
                              samples: int = 2000, seed: int = 0) -> float:
    """Monte Carlo measure of rescaled-grid triples (t, u, v) whose n x n sub-grid is dense.

    set_grid is a 0/1 indicator on [0,1]^(2d). A triple with t in (0, eps/n]^d
    and u, v in [0, 1-eps]^d counts when the sub-grid {(u+it, v+jt)} has
    average membership >= delta/8, delta the indicator's density. Abundance of
    such triples is the quantitative step from one found pattern to many.
    """
    if n < 2:
        raise ValueError("sub-grid size n must be >= 2")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if samples < 1:
        raise ValueError("samples must be positive")
    vals = set_grid.values
    if set_grid.d_total % 2 != 0:
        raise ValueError("set must live on a product space R^d x R^d")
    d = set_grid.d_total // 2
    for side in set_grid.box_sides:
        if abs(side - 1.0) > 0.05:
            raise ValueError("set grid must cover the unit box")
    delta = float(vals.mean())
    if delta == 0.0:
        return 0.0  # empty set: no triple is good, threshold degenerates
    thresh = delta / 8.0
    rng = counter_rng(seed, stream=2)
    h = set_grid.spacing
    shape = np.asarray(set_grid.shape)
    ij = np.arange(n)
    hits = 0
    for _ in range(samples):
        t = (1.0 - rng.random(d)) * (epsilon / n)  # in (0, eps/n]
        u = rng.random(d) * (1.0 - epsilon)
        v = rng.random(d) * (1.0 - epsilon)
        # coordinates of the sub-grid along each axis of the product space
        axes = [u[a] + ij * t[a] for a in range(d)] + [v[a] + ij * t[a] for a in range(d)]
        idx = np.meshgrid(*[np.clip(np.rint(ax / h).astype(int), 0, shape[a] - 1)
                            for a, ax in enumerate(axes)], indexing="ij")
        if vals[tuple(idx)].mean() >= thresh:
            hits += 1
    return hits / samples
