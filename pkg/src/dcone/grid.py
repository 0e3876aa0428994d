"""Uniform periodic grids on [0, 2pi) with finite-difference calculus.

Everything downstream lives on the circle: profiles, multipliers, curvature
fields.  Derivatives are 4th-order centered stencils (5-point for orders 1-2,
7-point for orders 3-4) applied with wrap-around, and integration is the
trapezoid rule, which on a uniform periodic grid collapses to ``spacing *
sum(values)`` and is exact for trigonometric polynomials of degree < n/2.

Spectral differentiation is deliberately avoided: the minimizers we resolve
are only C^{2,1}, so spectral accuracy is unattainable and 4th-order stencils
lose nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# 4th-order centered stencils, offsets -2..2 (orders 1, 2) and -3..3 (orders 3, 4)
_STENCILS = {
    1: (np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0, 2),
    2: (np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0, 2),
    3: (np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0, 3),
    4: (np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]) / 6.0, 3),
}


class GridError(ValueError):
    """Invalid grid construction (odd or too-small node count)."""


@dataclass(frozen=True)
class PeriodicGrid:
    """n equispaced nodes t_j = 2*pi*j/n, j = 0..n-1."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 16:
            raise GridError(f"need n >= 16, got n={self.n}")
        if self.n % 2 != 0:
            raise GridError(f"need even n, got n={self.n}")

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing


@dataclass(frozen=True)
class PeriodicField:
    """Real samples on a PeriodicGrid.  Treated as an immutable value."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("field contains NaN/Inf")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def _check_compatible(self, other: "PeriodicField") -> None:
        if other.grid.n != self.grid.n:
            raise ValueError(f"incompatible grids: n={self.grid.n} vs n={other.grid.n}")

    def __add__(self, other):
        if isinstance(other, PeriodicField):
            self._check_compatible(other)
            return PeriodicField(self.grid, self.values + other.values)
        return PeriodicField(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PeriodicField):
            self._check_compatible(other)
            return PeriodicField(self.grid, self.values - other.values)
        return PeriodicField(self.grid, self.values - other)

    def __rsub__(self, other):
        return PeriodicField(self.grid, other - self.values)

    def __mul__(self, other):
        if isinstance(other, PeriodicField):
            self._check_compatible(other)
            return PeriodicField(self.grid, self.values * other.values)
        return PeriodicField(self.grid, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return PeriodicField(self.grid, -self.values)

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


def make_grid(n: int) -> PeriodicGrid:
    """Grid with n nodes; rejects odd n and n < 16."""
    return PeriodicGrid(int(n))


def field_from_function(grid: PeriodicGrid, f) -> PeriodicField:
    return PeriodicField(grid, f(grid.nodes))


def field_from_values(grid: PeriodicGrid, values) -> PeriodicField:
    return PeriodicField(grid, np.asarray(values, dtype=float))


def _delta2(v: np.ndarray) -> np.ndarray:
    """Second central difference f_{j+1} - 2 f_j + f_{j-1}."""
    return (np.roll(v, -1) - v) - (v - np.roll(v, 1))


def _sigma(v: np.ndarray) -> np.ndarray:
    """Centered first difference (f_{j+1} - f_{j-1}) / 2."""
    return 0.5 * (np.roll(v, -1) - np.roll(v, 1))


def deriv_values(values: np.ndarray, spacing: float, order: int) -> np.ndarray:
    """Periodic 4th-order finite difference of raw samples.

    The classical centered stencils (5-point for orders 1-2, 7-point for
    orders 3-4) are evaluated through nested central differences: for the
    higher orders this cancels the O(1) sample values before the 1/h^order
    amplification, keeping the rounding floor at eps * |f^(order)| instead
    of eps / h^order.
    """
    if order not in _STENCILS:
        raise ValueError(f"derivative order must be 1..4, got {order}")
    d2 = _delta2(values)
    if order == 1:
        return _sigma(values - d2 / 6.0) / spacing
    if order == 2:
        return (d2 - _delta2(d2) / 12.0) / spacing**2
    d4 = _delta2(d2)
    if order == 3:
        return _sigma(d2 - d4 / 4.0) / spacing**3
    return (d4 - _delta2(d4) / 6.0) / spacing**4


def deriv(f: PeriodicField, order: int) -> PeriodicField:
    """Periodic centered finite-difference derivative, 4th-order accurate."""
    return PeriodicField(f.grid, deriv_values(f.values, f.grid.spacing, order))


def integrate(f: PeriodicField) -> float:
    """Trapezoid rule; equals the rectangle sum on a uniform periodic grid.

    Summation is exactly rounded (math.fsum), so the value is independent of
    sample order and integer rotations of a field integrate identically.
    """
    return float(f.grid.spacing * math.fsum(f.values))


def inner(f: PeriodicField, g: PeriodicField) -> float:
    """Quadrature-weighted L2 inner product, exactly-rounded summation."""
    f._check_compatible(g)
    return float(f.grid.spacing * math.fsum(f.values * g.values))


def norm(f: PeriodicField) -> float:
    return float(np.sqrt(max(inner(f, f), 0.0)))


def shift(f: PeriodicField, m: int) -> PeriodicField:
    """Rotate samples by m nodes: shift(f, m)(t_j) = f(t_{j-m})."""
    return PeriodicField(f.grid, np.roll(f.values, m))
