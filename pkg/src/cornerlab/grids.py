"""Uniform-grid function carrier and deterministic random inputs.

Every counting form in this package consumes a GridFunction: samples of a
compactly supported function on a uniform lattice, spacing h, with Riemann
normalization h**ndim and zero extension outside the sampled box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class CostRefusalError(RuntimeError):
    """Raised instead of silently truncating when a computation exceeds its tuple budget."""


class UndersampledShellError(ValueError):
    """Raised when a shell kernel is too thin for the lattice it is evaluated on."""


@dataclass(frozen=True)
class GridFunction:
    """Real-valued samples on a uniform lattice.

    values[i_1, ..., i_D] is the sample at origin + spacing * (i_1, ..., i_D).
    The function is treated as zero outside the sampled box; shifted
    evaluations in the counting forms use zero extension.
    """

    values: np.ndarray
    spacing: float
    origin: tuple[float, ...] = field(default=())

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if self.spacing <= 0 or not math.isfinite(self.spacing):
            raise ValueError(f"spacing must be positive and finite, got {self.spacing}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        origin = tuple(self.origin) if self.origin else (0.0,) * vals.ndim
        if len(origin) != vals.ndim:
            raise ValueError(f"origin has length {len(origin)}, values have ndim {vals.ndim}")
        object.__setattr__(self, "origin", origin)

    @property
    def d_total(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def box_sides(self) -> tuple[float, ...]:
        return tuple(self.spacing * n for n in self.shape)

    def axis_points(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing * np.arange(self.shape[axis])

    def integral(self) -> float:
        return self.spacing ** self.d_total * float(self.values.sum())

    def lp_integral_norm(self, q: float) -> float:
        """Riemann L^q norm (h**D * sum |f|^q) ** (1/q)."""
        if q <= 0:
            raise ValueError("q must be positive")
        return float((self.spacing ** self.d_total * np.abs(self.values) ** q).sum() ** (1.0 / q))

    def dilate(self, t: float) -> "GridFunction":
        """Exact L^1 dilation f_t(x) = t**-D f(x/t), carried on the t-scaled lattice."""
        if t <= 0 or not math.isfinite(t):
            raise ValueError(f"dilation parameter must be positive and finite, got {t}")
        return GridFunction(
            values=self.values * t ** (-self.d_total),
            spacing=self.spacing * t,
            origin=tuple(t * o for o in self.origin),
        )

    def meshgrid(self) -> list[np.ndarray]:
        axes = [self.axis_points(a) for a in range(self.d_total)]
        return np.meshgrid(*axes, indexing="ij")

    @classmethod
    def sample(cls, func, shape, spacing, origin=None) -> "GridFunction":
        """Sample func(points) on the lattice; func takes an (..., D) array."""
        shape = tuple(shape)
        origin = tuple(origin) if origin is not None else (0.0,) * len(shape)
        axes = [origin[a] + spacing * np.arange(shape[a]) for a in range(len(shape))]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack(mesh, axis=-1)
        return cls(values=np.asarray(func(pts), dtype=float), spacing=spacing, origin=origin)


def counter_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator (Philox); same (seed, stream) always replays the same draws."""
    if not (0 <= int(seed) < 2 ** 64):
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream)]))


def bernoulli_indicator(shape, spacing, density, seed, origin=None, stream=0) -> GridFunction:
    """0/1 indicator of a random dense set; one Bernoulli(density) draw per cell.

    Draws are consumed in lexicographic (C) cell order so the realized set is
    reproducible across runs and implementations from (seed, stream) alone.
    """
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    rng = counter_rng(seed, stream)
    u = rng.random(size=tuple(shape))  # C order == lexicographic cell order
    return GridFunction(values=(u < density).astype(float), spacing=spacing, origin=origin)


def sign_field(shape, spacing, seed, origin=None, stream=0) -> GridFunction:
    """Random +-1 per cell, fair coin; the mean-zero counterpart of bernoulli_indicator."""
    rng = counter_rng(seed, stream)
    u = rng.random(size=tuple(shape))
    return GridFunction(values=np.where(u < 0.5, -1.0, 1.0), spacing=spacing, origin=origin)


class SmoothRandomField:
    """Band-limited random field on a box, evaluable at any resolution.

    A fixed draw of low-frequency cosine modes multiplied by a smooth sin^2
    envelope vanishing on the boundary. Because the field is an analytic
    function of position, refining the sampling grid resamples the same
    continuum function, which is what refinement studies of the integral
    identities require.
    """

    def __init__(self, seed: int, box_sides, modes: int = 12, max_freq: float = 2.0, stream: int = 1):
        self.box_sides = tuple(float(s) for s in box_sides)
        self.d_total = len(self.box_sides)
        rng = counter_rng(seed, stream)
        self.amps = rng.normal(size=modes)
        self.freqs = rng.uniform(0.0, max_freq, size=(modes, self.d_total))
        self.phases = rng.uniform(0.0, 2.0 * np.pi, size=modes)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        sides = np.asarray(self.box_sides)
        rel = pts / sides  # relative coordinates in [0, 1]
        env = np.prod(np.sin(np.pi * np.clip(rel, 0.0, 1.0)) ** 2, axis=-1)
        phase = 2.0 * np.pi * np.tensordot(rel, self.freqs.T, axes=1) + self.phases
        out = np.tensordot(np.cos(phase), self.amps, axes=1)
        return out * env

    def sample(self, points_per_axis: int) -> GridFunction:
        n = int(points_per_axis)
        spacing = self.box_sides[0] / n
        if any(abs(s - self.box_sides[0]) > 1e-12 for s in self.box_sides):
            raise ValueError("sample() assumes a cubical box")
        return GridFunction.sample(self, (n,) * self.d_total, spacing)
