"""Regular-grid samples of u, g or the phase variable."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, OutOfDomain


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Node values ``values[j, i]`` located at ``origin + h * (i, j)``.

    ``mask`` flags nodes whose values must not enter a difference stencil
    (nodes inside a crack band or cut off by K); stencils near them are
    taken one-sidedly from unmasked nodes.
    """

    origin: np.ndarray
    h: float
    values: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(2))
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("field values must be a 2D array")
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "h", float(self.h))
        if self.mask is not None:
            m = np.asarray(self.mask, dtype=bool)
            if m.shape != vals.shape:
                raise GridMismatch("mask and values differ in shape")
            object.__setattr__(self, "mask", m)

    @classmethod
    def from_function(cls, f, origin, h, shape, **kw) -> "ScalarField":
        ny, nx = shape
        origin = np.asarray(origin, dtype=float)
        X, Y = np.meshgrid(origin[0] + h * np.arange(nx), origin[1] + h * np.arange(ny))
        vals = f(np.stack([X.ravel(), Y.ravel()], axis=1)).reshape(ny, nx)
        return cls(origin, h, vals, **kw)

    @property
    def shape(self):
        return self.values.shape

    @property
    def extent(self):
        ny, nx = self.shape
        x0, y0 = self.origin
        return x0, x0 + (nx - 1) * self.h, y0, y0 + (ny - 1) * self.h

    def nodes(self) -> np.ndarray:
        ny, nx = self.shape
        X, Y = np.meshgrid(self.origin[0] + self.h * np.arange(nx), self.origin[1] + self.h * np.arange(ny))
        return np.stack([X, Y], axis=-1)

    def contains_disk(self, center, radius, margin=0.0) -> bool:
        x0, x1, y0, y1 = self.extent
        cx, cy = center
        m = radius + margin
        return x0 <= cx - m and cx + m <= x1 and y0 <= cy - m and cy + m <= y1

    def require_disk(self, center, radius):
        if not self.contains_disk(center, radius):
            raise OutOfDomain(f"disk at {tuple(np.round(center, 6))} radius {radius} leaves the grid")

    def with_values(self, values, mask=None) -> "ScalarField":
        return ScalarField(self.origin, self.h, values, self.mask if mask is None else mask)

    def same_grid(self, other: "ScalarField") -> bool:
        return (self.shape == other.shape and np.isclose(self.h, other.h)
                and np.allclose(self.origin, other.origin))

    def _cell(self, p):
        p = np.atleast_2d(np.asarray(p, dtype=float))
        s = (p - self.origin) / self.h
        ny, nx = self.shape
        i = np.clip(np.floor(s[:, 0]).astype(int), 0, nx - 2)
        j = np.clip(np.floor(s[:, 1]).astype(int), 0, ny - 2)
        fx = s[:, 0] - i
        fy = s[:, 1] - j
        return i, j, fx, fy

    def interpolate(self, p) -> np.ndarray:
        i, j, fx, fy = self._cell(p)
        v = self.values
        return ((1 - fx) * (1 - fy) * v[j, i] + fx * (1 - fy) * v[j, i + 1]
                + (1 - fx) * fy * v[j + 1, i] + fx * fy * v[j + 1, i + 1])

    def interpolate_gradient(self, p) -> np.ndarray:
        i, j, fx, fy = self._cell(p)
        v = self.values
        gx = ((1 - fy) * (v[j, i + 1] - v[j, i]) + fy * (v[j + 1, i + 1] - v[j + 1, i])) / self.h
        gy = ((1 - fx) * (v[j + 1, i] - v[j, i]) + fx * (v[j + 1, i + 1] - v[j, i + 1])) / self.h
        return np.stack([gx, gy], axis=-1)

    def cell_is_clean(self, p) -> np.ndarray:
        """True where the bilinear cell containing p has no masked node."""
        i, j, _, _ = self._cell(p)
        if self.mask is None:
            return np.ones(len(i), dtype=bool)
        m = self.mask
        return ~(m[j, i] | m[j, i + 1] | m[j + 1, i] | m[j + 1, i + 1])
