"""Sampled space curves on [0, 2pi], their derivatives, curvature, and the
bending energy integral |gamma'' + gamma|^2.

Curves carry n+1 samples on the uniform partition including both endpoints
and are not assumed closed: the recovery construction produces curves whose
endpoint gap is the quantity of interest.  Finite differences are 4th-order
with centered stencils in the interior and shifted (one-sided) stencils of
the same order near the ends of open curves; closed curves use periodic
stencils on the n unique samples.  Stencil weights come from Fornberg's
recurrence.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import PeriodicField, PeriodicGrid, deriv_values

TWO_PI = 2.0 * np.pi

CLOSED_TOL = 1e-9


def fornberg_weights(offsets: np.ndarray, m: int) -> np.ndarray:
    """Weights of the m-th derivative at 0 from nodes at the given offsets."""
    x = np.asarray(offsets, dtype=float)
    N = x.size
    c1, c4 = 1.0, x[0]
    C = np.zeros((N, m + 1))
    C[0, 0] = 1.0
    for i in range(1, N):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    C[i, k] = c1 * (k * C[i - 1, k - 1] - c5 * C[i - 1, k]) / c2
                C[i, 0] = -c1 * c5 * C[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                C[j, k] = (c4 * C[j, k] - k * C[j, k - 1]) / c3
            C[j, 0] = c4 * C[j, 0] / c3
        c1 = c2
    return C[:, m]


@lru_cache(maxsize=None)
def _open_stencil(m: int, position: int, size: int) -> np.ndarray:
    """Stencil for node `position` within a window of `size` nodes."""
    offsets = np.arange(size) - position
    return fornberg_weights(offsets, m)


def fd_open(values: np.ndarray, spacing: float, m: int) -> np.ndarray:
    """4th-order m-th derivative of samples on a non-periodic uniform grid."""
    npts = values.shape[0]
    size = m + 4 if (m + 4) % 2 == 1 else m + 5
    if npts < size:
        raise ValueError(f"need at least {size} samples for order-{m} derivatives")
    out = np.empty_like(values, dtype=float)
    half = size // 2
    # interior: one centered stencil applied by correlation
    center = _open_stencil(m, half, size)
    interior = np.arange(half, npts - half)
    if interior.size:
        acc = np.zeros(interior.size)
        for j, c in enumerate(center):
            if c != 0.0:
                acc += c * values[interior + (j - half)]
        out[interior] = acc
    # ends: shifted stencils
    for i in range(half):
        out[i] = _open_stencil(m, i, size) @ values[:size]
    for i in range(npts - half, npts):
        pos = i - (npts - size)
        out[i] = _open_stencil(m, pos, size) @ values[npts - size:]
    return out / spacing**m


@dataclass(frozen=True)
class Curve3:
    """A sampled curve [0, 2pi] -> R^3 with both endpoints stored.

    d1 carries derivative samples where the construction produced them
    (analytic reparametrization, frame integration); h is the indentation
    scale the curve was built for, 0.0 for synthetic test curves.
    """

    samples: np.ndarray           # (n+1, 3)
    h: float = 0.0
    d1: np.ndarray | None = None  # (n+1, 3) or None

    def __post_init__(self):
        smp = np.asarray(self.samples, dtype=float)
        if smp.ndim != 2 or smp.shape[1] != 3 or smp.shape[0] < 9:
            raise ValueError(f"bad sample array shape {smp.shape}")
        object.__setattr__(self, "samples", smp)
        if self.d1 is not None:
            d1 = np.asarray(self.d1, dtype=float)
            if d1.shape != smp.shape:
                raise ValueError("d1 shape must match samples")
            object.__setattr__(self, "d1", d1)

    @property
    def n(self) -> int:
        return self.samples.shape[0] - 1

    @property
    def params(self) -> np.ndarray:
        return np.linspace(0.0, TWO_PI, self.n + 1)

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    def endpoint_gap(self) -> float:
        return float(np.linalg.norm(self.samples[-1] - self.samples[0]))

    def endpoint_tangent_gap(self) -> float:
        d1 = self.d1 if self.d1 is not None else self.derivative(1)
        return float(np.linalg.norm(d1[-1] - d1[0]))

    def is_closed(self, tol: float = CLOSED_TOL) -> bool:
        return self.endpoint_gap() <= tol

    def derivative(self, order: int) -> np.ndarray:
        """4th-order finite-difference derivative samples, (n+1, 3)."""
        if self.is_closed():
            vals = self.samples[:-1]
            out = np.stack(
                [deriv_values(vals[:, i], self.spacing, order) for i in range(3)], axis=1
            )
            return np.vstack([out, out[:1]])
        return np.stack(
            [fd_open(self.samples[:, i], self.spacing, order) for i in range(3)], axis=1
        )

    def sphere_defect(self) -> float:
        return float(np.abs(np.linalg.norm(self.samples, axis=1) - 1.0).max())

    def speed_defect(self) -> float:
        d1 = self.d1 if self.d1 is not None else self.derivative(1)
        return float(np.abs(np.linalg.norm(d1, axis=1) - 1.0).max())


def curvature(curve: Curve3) -> PeriodicField:
    """Geodesic curvature samples kappa = gamma'' . (gamma' ^ gamma).

    Both derivatives come from 4th-order finite differences of the samples;
    for a unit-speed spherical curve this is the normal projection of the
    acceleration through the frame normal N = T ^ U.  The returned field
    drops the duplicate endpoint sample.
    """
    g = curve.samples
    d1 = curve.derivative(1)
    d2 = curve.derivative(2)
    kap = np.einsum("ij,ij->i", d2, np.cross(d1, g))
    return PeriodicField(PeriodicGrid(curve.n), kap[:-1])


@dataclass(frozen=True)
class BendingReport:
    energy: float
    sphere_defect: float
    speed_defect: float


def bending_energy(curve: Curve3) -> BendingReport:
    """Quadrature of |gamma'' + gamma|^2 with unit-modulus/speed defects.

    Defects are reported, not enforced: the functional only represents the
    physical bending energy on unit-speed spherical curves.
    """
    g = curve.samples
    d2 = curve.derivative(2)
    integrand = np.sum((d2 + g) ** 2, axis=1)
    if curve.is_closed():
        val = float(curve.spacing * integrand[:-1].sum())
    else:
        val = float(np.trapezoid(integrand, dx=curve.spacing))
    return BendingReport(
        energy=val,
        sphere_defect=curve.sphere_defect(),
        speed_defect=curve.speed_defect(),
    )
