"""Closed-form fold machinery: the transcendental level functions, their root
sets, lift-off profiles, piecewise-analytic candidates, and the single-fold
solve.

A fold is a maximal interval (t_i - z_i, t_i + z_i) where the profile leaves
the obstacle.  On a fold the profile solves the fourth-order boundary value
problem

    w'''' + (2 + lam) w'' + (1 + lam) w = 0,   w(+-z) = 1,  w'(+-z) = 0,

whose even solution is a two-frequency combination of cos(alpha t) and cos(t)
(trigonometric regime, lam >= -1, alpha = sqrt(1 + lam)) or cosh(alpha t) and
cos(t) (hyperbolic regime, lam < -1, alpha = sqrt(-(1 + lam))).  The boundary
curvature of the profile as a function of the half-width,

    g_alpha(z)       (trig)      gtilde_alpha(z)   (hyperbolic),

is the level function whose root sets select admissible half-widths: a
candidate with boundary curvature k must have every z_i in g^{-1}(k).

Energies and constraint integrals of the profiles are evaluated in closed
form (two-frequency product integrals), so the single-fold solve can drive
the residuals to ~1e-12 independent of any grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .grid import PeriodicGrid, PeriodicField

TWO_PI = 2.0 * np.pi

TRIG = "trig"
HYPERBOLIC = "hyperbolic"

# |den| below POLE_RTOL * (scale of numerator terms) classifies as a pole
POLE_RTOL = 1e-14
# hyperbolic evaluations factor out exp(alpha*z) beyond this
_HYP_SCALED_THRESHOLD = 30.0


class FoldError(ValueError):
    pass


class AlphaExcluded(FoldError):
    """alpha in {0, 1} on the trig branch: the level function degenerates."""


class DegenerateDenominator(FoldError):
    """Profile denominator vanishes for this (lambda, z) pair."""


class Overlap(FoldError):
    """Fold intervals overlap on the circle."""


class ObstacleViolated(FoldError):
    """Profile dips below the obstacle: the (lambda, z) pair is inadmissible."""


class NoRoot(FoldError):
    """Single-fold solve exhausted its search branch."""


def wrap_angle(d):
    """Wrap to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(d, dtype=float), TWO_PI)


def _sin_ratio(x: float, z: float) -> float:
    """sin(x z)/x, continuous through x = 0."""
    return z * float(np.sinc(x * z / np.pi))


# --------------------------------------------------------------------------
# level functions

def g_alpha_parts(alpha: float, z):
    """(numerator, denominator, term scale) of g_alpha at z."""
    z = np.asarray(z, dtype=float)
    t1 = alpha * alpha * np.sin(z) * np.cos(alpha * z)
    t2 = alpha * np.sin(alpha * z) * np.cos(z)
    num = -(t1 - t2)
    den = np.sin(z) * np.cos(alpha * z) - alpha * np.sin(alpha * z) * np.cos(z)
    scale = np.abs(t1) + np.abs(t2)
    return num, den, scale


def g_tilde_parts(alpha: float, z):
    """As g_alpha_parts for the hyperbolic level function, overflow safe.

    For alpha*z beyond ~30 the hyperbolic functions are replaced by
    cosh, sinh scaled by exp(-alpha z); the common factor cancels in the
    quotient, so num and den here are the scaled versions.
    """
    z = np.asarray(z, dtype=float)
    az = alpha * z
    big = az > _HYP_SCALED_THRESHOLD
    ch = np.where(big, 0.5 * (1.0 + np.exp(-2.0 * az)), np.cosh(np.where(big, 0.0, az)))
    sh = np.where(big, 0.5 * (1.0 - np.exp(-2.0 * az)), np.sinh(np.where(big, 0.0, az)))
    t1 = alpha * alpha * np.sin(z) * ch
    t2 = alpha * sh * np.cos(z)
    num = t1 - t2
    den = np.sin(z) * ch + alpha * sh * np.cos(z)
    scale = np.abs(t1) + np.abs(t2)
    return num, den, scale


def _ratio_or_inf(num, den, scale):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    scale = np.asarray(scale, dtype=float)
    pole = np.abs(den) <= POLE_RTOL * np.maximum(scale, 1e-300)
    safe = np.where(pole, 1.0, den)
    sgn = np.where(num < 0, -1.0, 1.0) * np.where(den < 0, -1.0, 1.0)
    out = np.where(pole, sgn * np.inf, num / safe)
    return out, pole


def g_alpha(alpha: float, z):
    """Trig-branch boundary curvature of the fold of half-width z.

    Returns signed infinity at poles of the quotient.  At z = pi with
    sin(alpha pi) ~ 0 (integer alpha) the raw quotient is 0/0; the value is
    then taken as a one-sided Richardson limit, which is numerically
    delicate but only arises on that measure-zero set.
    """
    if alpha <= 0.0:
        raise AlphaExcluded(f"alpha must be positive, got {alpha}")
    scalar = np.isscalar(z) or np.asarray(z).ndim == 0
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if (zz <= 0.0).any() or (zz > np.pi + 1e-12).any():
        raise ValueError("half-width z must lie in (0, pi]")
    num, den, scale = g_alpha_parts(alpha, zz)
    out, pole = _ratio_or_inf(num, den, scale)
    # 0/0 at z ~ pi for near-integer alpha: one-sided Richardson limit
    both = pole & (np.abs(num) <= POLE_RTOL * np.maximum(scale, 1e-300)) & (np.abs(zz - np.pi) < 1e-8)
    for i in np.where(both)[0]:
        out[i] = _richardson_limit_at_pi(alpha)
    return float(out[0]) if scalar else out


def _richardson_limit_at_pi(alpha: float) -> float:
    # g(pi - d) sampled at d, d/2, d/4; the limit is quadratic in d
    d = 1e-3
    vals = []
    for dd in (d, d / 2.0, d / 4.0):
        num, den, scale = g_alpha_parts(alpha, np.pi - dd)
        vals.append(float(num / den))
    v1, v2, v3 = vals
    r2 = v2 + (v2 - v1) / 3.0
    r3 = v3 + (v3 - v2) / 3.0
    return r3 + (r3 - r2) / 15.0


def g_tilde_alpha(alpha: float, z):
    """Hyperbolic-branch boundary curvature; overflow-safe for alpha*z > 30."""
    if alpha <= 0.0:
        raise AlphaExcluded(f"alpha must be positive, got {alpha}")
    scalar = np.isscalar(z) or np.asarray(z).ndim == 0
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if (zz <= 0.0).any() or (zz > np.pi + 1e-12).any():
        raise ValueError("half-width z must lie in (0, pi]")
    num, den, scale = g_tilde_parts(alpha, zz)
    out, _ = _ratio_or_inf(num, den, scale)
    return float(out[0]) if scalar else out


def level_function(branch: str):
    if branch == TRIG:
        return g_alpha, g_alpha_parts
    if branch == HYPERBOLIC:
        return g_tilde_alpha, g_tilde_parts
    raise FoldError(f"unknown branch {branch!r}")


# --------------------------------------------------------------------------
# root inversion

def invert_g(alpha: float, k: float, branch: str = TRIG, grid_points: int = 100_000) -> list[float]:
    """All z in (0, pi] with g(z) = k, sorted ascending.

    Bracketing runs on F(z) = num(z) - k den(z), which has the same zeros as
    g - k away from poles but no poles of its own; each bracket is polished
    by Brent's method and accepted only if the quotient itself evaluates
    back to k within 1e-12 (this rejects the 0/0 double points where num and
    den vanish together).
    """
    if branch == TRIG and (abs(alpha) < 1e-12 or abs(alpha - 1.0) < 1e-12):
        raise AlphaExcluded(f"trig branch requires alpha outside {{0, 1}}, got {alpha}")
    if k < 0.0:
        warnings.warn("k < 0: minimizers have k >= 0; roots returned for diagnostics only")
    gfun, parts = level_function(branch)

    # stay away from the degenerate corners: both num and den vanish to
    # third/first order as z -> 0, and for near-integer alpha also at
    # z = pi, where the quotient is 0/0 and rounding noise in sin(alpha z)
    # (of size ~alpha^2 eps) swamps the genuine (pi - z)^3 numerator out to
    # |pi - z| of a few 1e-6; that neighborhood is handled by the endpoint
    # limit below
    z_floor = 1e-6
    zs = np.linspace(z_floor, np.pi - 1e-5, grid_points)
    num, den, scale = parts(alpha, zs)
    F = num - k * den

    roots: list[float] = []

    def polish(a: float, b: float):
        def f(z):
            n, d, _ = parts(alpha, z)
            return float(n) - k * float(d)
        try:
            r = brentq(f, a, b, xtol=1e-15, rtol=8.9e-16)
        except ValueError:
            return
        gval = gfun(alpha, r)
        if np.isfinite(gval) and abs(gval - k) <= 1e-12 * (1.0 + abs(k)):
            roots.append(float(r))

    sgn = np.sign(F)
    flips = np.where(sgn[:-1] * sgn[1:] < 0)[0]
    for i in flips:
        polish(zs[i], zs[i + 1])

    # endpoint z = pi (no sign change available there); integer-alpha values
    # come from the Richardson limit inside g_alpha
    gpi = gfun(alpha, np.pi)
    if np.isfinite(gpi) and abs(gpi - k) <= 1e-12 * (1.0 + abs(k)):
        roots.append(np.pi)

    roots = sorted(roots)
    merged: list[float] = []
    for r in roots:
        if not merged or abs(r - merged[-1]) > 1e-6:
            merged.append(r)
    return merged


# --------------------------------------------------------------------------
# profiles

def alpha_of(lam: float) -> float:
    return float(np.sqrt(abs(1.0 + lam)))


def branch_of(lam: float) -> str:
    return TRIG if lam >= -1.0 else HYPERBOLIC


def profile_values(lam: float, z: float, t):
    """Closed-form fold profile at offsets t from the fold center.

    Trig regime: [sin(z) cos(alpha t) - alpha sin(alpha z) cos(t)] / D,
    hyperbolic: [sin(z) cosh(alpha t) + alpha sinh(alpha z) cos(t)] / D;
    both have value 1 and slope 0 at t = +-z.
    """
    if abs(lam) < 1e-12 or abs(lam + 1.0) < 1e-12:
        raise DegenerateDenominator(f"lambda = {lam} excluded (no profile)")
    t = np.asarray(t, dtype=float)
    a = alpha_of(lam)
    S = np.sin(z)
    if lam >= -1.0:
        A = a * np.sin(a * z)
        D = S * np.cos(a * z) - A * np.cos(z)
        if abs(D) < 1e-12 * (abs(S) + abs(A)):
            raise DegenerateDenominator(f"profile denominator ~ 0 at lambda={lam}, z={z}")
        return (S * np.cos(a * t) - A * np.cos(t)) / D
    az = a * z
    if az > _HYP_SCALED_THRESHOLD:
        # scale by exp(-alpha z); exponents below are all <= 0 for |t| <= z
        sh = 0.5 * (1.0 - np.exp(-2.0 * az))
        Ds = S * 0.5 * (1.0 + np.exp(-2.0 * az)) + a * sh * np.cos(z)
        cht = 0.5 * (np.exp(a * (np.abs(t) - z)) + np.exp(-a * (np.abs(t) + z)))
        if abs(Ds) < 1e-12:
            raise DegenerateDenominator(f"profile denominator ~ 0 at lambda={lam}, z={z}")
        return (S * cht + a * sh * np.cos(t)) / Ds
    A = a * np.sinh(az)
    D = S * np.cosh(az) + A * np.cos(z)
    if abs(D) < 1e-12 * (abs(S) + abs(A)):
        raise DegenerateDenominator(f"profile denominator ~ 0 at lambda={lam}, z={z}")
    return (S * np.cosh(a * t) + A * np.cos(t)) / D


def profile_boundary_curvature(lam: float, z: float) -> float:
    """w'' of the profile at its endpoints; equals the level function at z."""
    a = alpha_of(lam)
    return float(g_alpha(a, z)) if lam >= -1.0 else float(g_tilde_alpha(a, z))


def fold_profile(lam: float, center: float, half_width: float, grid: PeriodicGrid):
    """Sample the profile on grid nodes inside the fold.

    Returns (mask, values): mask selects nodes with wrapped distance to the
    center strictly below the half-width, values are full-length with 1
    outside the fold.
    """
    d = wrap_angle(grid.nodes - center)
    mask = np.abs(d) < half_width
    vals = np.ones(grid.n)
    vals[mask] = profile_values(lam, half_width, d[mask])
    return mask, vals


def profile_min(lam: float, z: float, samples: int = 2001) -> float:
    t = np.linspace(-z, z, samples)
    return float(profile_values(lam, z, t).min())


# --------------------------------------------------------------------------
# closed-form fold integrals

def _Icc(a: float, b: float, z: float) -> float:
    """integral_{-z}^{z} cos(a t) cos(b t) dt."""
    return _sin_ratio(a - b, z) + _sin_ratio(a + b, z)


def _Iss(a: float, b: float, z: float) -> float:
    """integral_{-z}^{z} sin(a t) sin(b t) dt."""
    return _sin_ratio(a - b, z) - _sin_ratio(a + b, z)


def fold_integrals(lam: float, z: float) -> tuple[float, float]:
    """(integral of w^2 - w'^2, integral of (w'' + w)^2) over one fold."""
    a = alpha_of(lam)
    S = np.sin(z)
    if lam >= -1.0:
        A = a * np.sin(a * z)
        D = S * np.cos(a * z) - A * np.cos(z)
        w2 = S * S * _Icc(a, a, z) - 2 * S * A * _Icc(a, 1.0, z) + A * A * _Icc(1.0, 1.0, z)
        wp2 = a * a * S * S * _Iss(a, a, z) - 2 * a * S * A * _Iss(a, 1.0, z) + A * A * _Iss(1.0, 1.0, z)
        eng = lam * lam * S * S * _Icc(a, a, z)
        return (w2 - wp2) / D**2, eng / D**2
    az = a * z
    ch, sh = np.cosh(az), np.sinh(az)
    A = a * sh
    D = S * ch + A * np.cos(z)
    Ihh = z + np.sinh(2 * az) / (2 * a)          # cosh^2
    Ish = np.sinh(2 * az) / (2 * a) - z          # sinh^2
    Ihc = 2 * (a * sh * np.cos(z) + ch * np.sin(z)) / (a * a + 1)   # cosh(at) cos t
    Ihs = 2 * (a * ch * np.sin(z) - sh * np.cos(z)) / (a * a + 1)   # sinh(at) sin t
    w2 = S * S * Ihh + 2 * S * A * Ihc + A * A * _Icc(1.0, 1.0, z)
    wp2 = a * a * S * S * Ish - 2 * a * S * A * Ihs + A * A * _Iss(1.0, 1.0, z)
    eng = lam * lam * S * S * Ihh
    return (w2 - wp2) / D**2, eng / D**2


# --------------------------------------------------------------------------
# candidates

@dataclass(frozen=True)
class FoldSpec:
    """A multiplier plus a set of disjoint folds (center, half-width)."""

    lam: float
    folds: tuple[tuple[float, float], ...]
    k: float = 0.0

    @property
    def alpha(self) -> float:
        return alpha_of(self.lam)

    @property
    def branch(self) -> str:
        return branch_of(self.lam)

    def validate(self) -> None:
        if abs(self.lam) < 1e-12 or abs(self.lam + 1.0) < 1e-12:
            raise FoldError("lambda in {0, -1} excluded")
        if self.k < 0.0:
            raise FoldError(f"boundary curvature k must be >= 0, got {self.k}")
        for _, z in self.folds:
            if not (0.0 < z <= np.pi):
                raise FoldError(f"half-width {z} outside (0, pi]")
        for i in range(len(self.folds)):
            for j in range(i + 1, len(self.folds)):
                ti, zi = self.folds[i]
                tj, zj = self.folds[j]
                if abs(wrap_angle(ti - tj)) < zi + zj:
                    raise Overlap(f"folds {i} and {j} overlap")


@dataclass(frozen=True)
class FoldCandidate:
    """Piecewise-analytic profile: closed-form folds, 1 on the contact set."""

    spec: FoldSpec
    w: PeriodicField
    energy: float
    constraint_residual: float
    c2_jumps: tuple[float, ...]
    w_min: float

    @property
    def feasible(self) -> bool:
        return self.w_min >= 1.0 - 1e-9 and abs(self.constraint_residual) <= 1e-8


def assemble_candidate(spec: FoldSpec, grid: PeriodicGrid, check_obstacle: bool = True) -> FoldCandidate:
    """Build the candidate field and its analytic diagnostics.

    Energy includes the contact-set contribution (w = 1 there, so the
    integrand is 1): E = sum of fold energies + (2 pi - sum 2 z_i).  The
    constraint residual is likewise sum of fold integrals + (2 pi - sum 2
    z_i).  Both come from the closed forms, not grid quadrature, so the
    residual of a solved candidate survives at ~1e-12.
    """
    spec.validate()
    vals = np.ones(grid.n)
    total_width = 0.0
    cres = 0.0
    eng = 0.0
    jumps = []
    wmin = 1.0
    for (tc, z) in spec.folds:
        mask, fv = fold_profile(spec.lam, tc, z, grid)
        vals[mask] = fv[mask]
        total_width += 2 * z
        ci, ei = fold_integrals(spec.lam, z)
        cres += ci
        eng += ei
        jump = abs(profile_boundary_curvature(spec.lam, z) - spec.k)
        jumps.extend([jump, jump])
        pm = profile_min(spec.lam, z)
        wmin = min(wmin, pm)
        if check_obstacle and pm < 1.0 - 1e-9:
            raise ObstacleViolated(
                f"profile at lambda={spec.lam}, z={z} dips to {pm:.6f} < 1"
            )
    cres += TWO_PI - total_width
    eng += TWO_PI - total_width
    w = PeriodicField(grid, vals)
    return FoldCandidate(spec=spec, w=w, energy=eng,
                         constraint_residual=cres, c2_jumps=tuple(jumps), w_min=wmin)


# --------------------------------------------------------------------------
# single-fold solve

def _numerator_roots(alpha: float, parts, scan_points: int = 4001) -> list[float]:
    zs = np.linspace(1e-6, np.pi - 1e-9, scan_points)
    num, _, _ = parts(alpha, zs)
    flips = np.where(np.sign(num[:-1]) * np.sign(num[1:]) < 0)[0]
    roots = []
    for i in flips:
        r = brentq(lambda z: float(parts(alpha, z)[0]), zs[i], zs[i + 1],
                   xtol=1e-15, rtol=8.9e-16)
        roots.append(float(r))
    return roots


def _single_fold_residual(lam: float, z: float) -> float:
    cres, _ = fold_integrals(lam, z)
    return cres + TWO_PI - 2.0 * z


def _root_near(lam: float, z_guess: float, branch: str, window: float = 0.25):
    _, parts = level_function(branch)
    a = alpha_of(lam)
    lo = max(1e-6, z_guess - window)
    hi = min(np.pi - 1e-9, z_guess + window)
    zs = np.linspace(lo, hi, 2001)
    num, _, _ = parts(a, zs)
    flips = np.where(np.sign(num[:-1]) * np.sign(num[1:]) < 0)[0]
    best = None
    for i in flips:
        r = brentq(lambda z: float(parts(a, z)[0]), zs[i], zs[i + 1],
                   xtol=1e-15, rtol=8.9e-16)
        if best is None or abs(r - z_guess) < abs(best - z_guess):
            best = float(r)
    return best


@dataclass(frozen=True)
class SingleFoldSolution:
    lam: float
    z: float
    candidate: FoldCandidate

    @property
    def opening_deg(self) -> float:
        return float(np.degrees(2.0 * self.z))


# Reference single-fold solution: the lowest-energy constraint-zero crossing
# on the trig branch, solved by solve_single_fold with the multiplier
# bisected to 1e-13.  The opening angle is the lift-off arc of the relaxed
# cone, about 139 degrees; energy includes the contact-arc contribution.
REFERENCE_SINGLE_FOLD = {
    "lambda": 13.474292446210168,
    "alpha": 3.8045094882534025,
    "half_width": 1.2128740801159925,
    "opening_deg": 138.9851317429169,
    "energy": 133.22956578394465,
}


def solve_single_fold(grid: PeriodicGrid | None = None,
                      lam_range: tuple[float, float] = (0.05, 150.0),
                      lam_samples: int = 1200,
                      center: float = np.pi,
                      branch: str = TRIG,
                      return_all: bool = False):
    """Find single-fold candidates: g(z) = 0 and the closure constraint = 0.

    The contact set of a single fold has interior, so the boundary curvature
    is k = 0 and the half-width must be a root of the level function's
    numerator.  For each multiplier in a geometric scan the numerator roots
    are tracked by value continuity; sign changes of the scalar constraint
    residual along a tracked root are refined by bisection in lambda.  All
    admissible (w >= 1) solutions are collected; the one of least energy is
    returned (lowest-lambda physical fold first when return_all).

    Falls back to the hyperbolic branch only if the trig scan is empty.
    """
    if grid is None:
        grid = PeriodicGrid(2048)
    _, parts = level_function(branch)

    lams = np.geomspace(lam_range[0], lam_range[1], lam_samples)
    if branch == HYPERBOLIC:
        lams = -1.0 - lams

    crossings: list[tuple[float, float, float]] = []  # (lam_lo, lam_hi, z_guess)
    prev: list[tuple[float, float]] = []
    prev_lam = None
    for lam in lams:
        a = alpha_of(lam)
        if branch == TRIG and abs(a - 1.0) < 1e-9:
            continue
        roots = _numerator_roots(a, parts)
        cur = [(z, _single_fold_residual(lam, z)) for z in roots]
        if prev_lam is not None:
            for (z0, r0) in prev:
                match = None
                for (z1, r1) in cur:
                    if abs(z1 - z0) < 0.15 and (match is None or abs(z1 - z0) < abs(match[0] - z0)):
                        match = (z1, r1)
                if match and r0 * match[1] < 0:
                    crossings.append((prev_lam, lam, 0.5 * (z0 + match[0])))
        prev, prev_lam = cur, lam

    solutions: list[SingleFoldSolution] = []
    for (l0, l1, zg) in crossings:
        def f(lam):
            z = _root_near(lam, zg, branch)
            if z is None:
                return np.nan
            return _single_fold_residual(lam, z)
        try:
            lam_star = brentq(f, l0, l1, xtol=1e-13, rtol=8.9e-16)
        except ValueError:
            continue
        z_star = _root_near(lam_star, zg, branch)
        if z_star is None:
            continue
        if profile_min(lam_star, z_star) < 1.0 - 1e-9:
            continue
        spec = FoldSpec(lam=lam_star, folds=((center, z_star),), k=0.0)
        cand = assemble_candidate(spec, grid)
        solutions.append(SingleFoldSolution(lam=lam_star, z=z_star, candidate=cand))

    if not solutions and branch == TRIG:
        return solve_single_fold(grid, lam_range, lam_samples, center,
                                 branch=HYPERBOLIC, return_all=return_all)
    if not solutions:
        raise NoRoot("no admissible single-fold solution on either branch")
    solutions.sort(key=lambda s: s.candidate.energy)
    if return_all:
        return solutions
    return solutions[0]


# --------------------------------------------------------------------------
# sweeps and plot tables

def plot_g_table(alpha: float, branch: str = TRIG, points: int = 2000) -> list[tuple[float, float, int]]:
    """(z, g(z), is_pole) rows over (0, pi] for the level-function plots."""
    gfun, parts = level_function(branch)
    zs = np.linspace(np.pi / points, np.pi, points)
    num, den, scale = parts(alpha, zs)
    pole = np.abs(den) <= POLE_RTOL * np.maximum(scale, 1e-300)
    # mark near-pole samples too: the quotient is meaningless next to a sign
    # change of the denominator
    near = np.zeros_like(pole)
    ds = np.sign(den)
    near[:-1] |= ds[:-1] * ds[1:] < 0
    near[1:] |= ds[:-1] * ds[1:] < 0
    vals = gfun(alpha, zs)
    rows = []
    for z, v, p in zip(zs, np.atleast_1d(vals), pole | near):
        rows.append((float(z), float(v), int(bool(p))))
    return rows


def sweep(alphas, ks, branch: str = TRIG, grid: PeriodicGrid | None = None) -> list[dict]:
    """Single-fold candidate table over an (alpha, k) range.

    Rows carry alpha, k, branch, root_index, z, energy, feasible; energies
    are full limit-functional values (fold part plus contact arc) of the
    single fold placed at pi.  A row with root_index = -1 and NaN entries
    flags an excluded alpha (trig branch, alpha in {0, 1}).
    """
    if grid is None:
        grid = PeriodicGrid(2048)
    rows = []
    for a in np.atleast_1d(alphas):
        a = float(a)
        lam = a * a - 1.0 if branch == TRIG else -1.0 - a * a
        for k in np.atleast_1d(ks):
            k = float(k)
            try:
                roots = invert_g(a, k, branch)
            except AlphaExcluded:
                rows.append(dict(alpha=a, k=k, branch=branch, root_index=-1,
                                 z=np.nan, energy=np.nan, feasible=False,
                                 excluded=True))
                continue
            for idx, z in enumerate(roots):
                try:
                    cres, eng = fold_integrals(lam, z)
                    eng_total = eng + TWO_PI - 2 * z
                    feas = profile_min(lam, z) >= 1.0 - 1e-9
                except (DegenerateDenominator, FoldError):
                    eng_total, feas = np.nan, False
                rows.append(dict(alpha=a, k=k, branch=branch, root_index=idx,
                                 z=float(z), energy=float(eng_total),
                                 feasible=bool(feas), excluded=False))
    return rows
