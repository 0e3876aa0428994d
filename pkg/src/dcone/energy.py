"""The limit energy, its scalar side constraint, and their discrete gradients.

Energy of a profile w on the circle:

    E(w) = integral (w'' + w)^2,

with the side condition

    C(w) = integral (w^2 - w'^2) = 0,

which is what makes the tangential displacement single-valued.  The obstacle
w >= 1 is *not* enforced here; feasibility is reported separately so that
infeasible iterates remain usable inside the optimizer.

Discretely we take r = D2 w + w and set E = <r, r>.  The constraint uses the
integrated-by-parts form C = <w, w + D2 w> (D2 is symmetric, so this is the
same quadratic form as sum(w^2 - (D1 w)^2) up to the stencils' 4th-order
truncation).  With these definitions the gradients

    grad E = 2 (D2 + I)^2 w,      grad C = 2 (w + D2 w)

are the *exact* discrete gradients of the quadratic forms, so directional
finite differences of E and C match them to rounding, and the pointwise
Euler-Lagrange residual

    w'''' + (2 + lam) w'' + (1 + lam) w   with w'''' := D2(D2 w)

is identically  (grad E + lam * grad C) / 2.  That identity is what lets the
obstacle solver's stationarity check and this residual agree near the contact
points, where the minimizer is only C^{2,1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import PeriodicField, deriv, inner, integrate


@dataclass(frozen=True)
class EnergyReport:
    """Energy, constraint value, and obstacle violation of one profile."""

    energy: float
    constraint: float
    obstacle_violation: float


def energy(w: PeriodicField) -> float:
    """Quadrature of (w'' + w)^2; zero iff w'' + w vanishes discretely."""
    r = deriv(w, 2) + w
    return inner(r, r)


def constraint(w: PeriodicField) -> float:
    """Discrete integral of w^2 - w'^2 in the form <w, w + w''>."""
    return inner(w, w + deriv(w, 2))


def report(w: PeriodicField) -> EnergyReport:
    return EnergyReport(
        energy=energy(w),
        constraint=constraint(w),
        obstacle_violation=max(0.0, 1.0 - w.min()),
    )


def gradients(w: PeriodicField) -> tuple[PeriodicField, PeriodicField]:
    """(grad E, grad C) w.r.t. the quadrature-weighted inner product."""
    r = deriv(w, 2) + w
    grad_e = 2.0 * (deriv(r, 2) + r)
    grad_c = 2.0 * (w + deriv(w, 2))
    return grad_e, grad_c


def el_residual(w: PeriodicField, lam: float) -> PeriodicField:
    """Pointwise residual w'''' + (2+lam) w'' + (1+lam) w.

    The fourth derivative is the composed stencil D2(D2 w), which keeps the
    residual exactly equal to (grad E + lam grad C)/2.
    """
    w2 = deriv(w, 2)
    w4 = deriv(w2, 2)
    return w4 + (2.0 + lam) * w2 + (1.0 + lam) * w


def eq1_split(u: PeriodicField, v: PeriodicField, w: PeriodicField) -> tuple[float, float, float]:
    """The three squared terms of the bending-energy decomposition.

    For a curve written in the rotating frame as (1+u) e_r + v e_phi + w e_z,
    |gamma'' + gamma|^2 splits exactly into (u'' - 2v')^2 + (2u' + v'')^2 +
    (w'' + w)^2; this returns the three integrals.
    """
    t1 = deriv(u, 2) - 2.0 * deriv(v, 1)
    t2 = 2.0 * deriv(u, 1) + deriv(v, 2)
    t3 = deriv(w, 2) + w
    return integrate(t1 * t1), integrate(t2 * t2), integrate(t3 * t3)
