import numpy as np
import pytest
from scipy.integrate import quad

from dcone import folds
from dcone.folds import (HYPERBOLIC, TRIG, AlphaExcluded, FoldSpec,
                         ObstacleViolated, Overlap, assemble_candidate,
                         fold_integrals, fold_profile, g_alpha, g_alpha_parts,
                         g_tilde_alpha, g_tilde_parts, invert_g,
                         profile_values, solve_single_fold, sweep,
                         plot_g_table, REFERENCE_SINGLE_FOLD)
from dcone.grid import PeriodicGrid


# --------------------------------------------------------------------------
# level functions

def test_level_functions_at_pi():
    assert g_alpha(2.5, np.pi) == pytest.approx(-1.0, abs=1e-12)
    assert g_tilde_alpha(2.5, np.pi) == pytest.approx(-1.0, abs=1e-12)


def test_small_z_expansion():
    # leading behavior -alpha^2 z^2 / 3, plus a numeric limit check
    val = g_alpha(7.0, 0.01)
    assert val == pytest.approx(-49.0 * 1e-4 / 3.0, rel=1e-2)
    seq = [g_alpha(7.0, z) / z**2 for z in (1e-2, 5e-3, 2.5e-3)]
    assert seq[-1] == pytest.approx(-49.0 / 3.0, rel=1e-3)


def test_first_root_solves_tangent_equation():
    roots = invert_g(7.0, 0.0, TRIG)
    z = roots[0]
    assert abs(7.0 * np.tan(z) - np.tan(7.0 * z)) <= 1e-10


def test_hyperbolic_against_mpmath():
    import mpmath
    mpmath.mp.dps = 50
    a, z = 7.0, np.pi / 2
    za = mpmath.mpf(z)
    num = a * a * mpmath.sin(za) * mpmath.cosh(a * za) - a * mpmath.sinh(a * za) * mpmath.cos(za)
    den = mpmath.sin(za) * mpmath.cosh(a * za) + a * mpmath.sinh(a * za) * mpmath.cos(za)
    assert g_tilde_alpha(a, z) == pytest.approx(float(num / den), rel=1e-10)


def test_domain_rejected():
    with pytest.raises(ValueError):
        g_tilde_alpha(7.0, 5.0)
    with pytest.raises(ValueError):
        g_alpha(7.0, -0.1)


def test_overflow_safe_hyperbolic():
    # alpha z ~ 90: naive cosh overflows float64 around 710, but accuracy
    # loss starts much earlier; the scaled form stays finite and smooth
    val = g_tilde_alpha(30.0, 3.0)
    assert np.isfinite(val)
    near = g_tilde_alpha(30.0, 3.0 + 1e-6)
    assert val == pytest.approx(near, rel=1e-4)


def test_integer_alpha_limit_at_pi():
    # sin(alpha pi) = 0 collapses both parts; the one-sided limit is
    # -alpha^2 (pi - z)^2 / 3 -> 0
    assert abs(g_alpha(7.0, np.pi)) <= 1e-10


# --------------------------------------------------------------------------
# root inversion

def brute_force_roots(alpha, k, branch, points=10_000_001):
    """Dense-scan oracle: sign changes of g - k away from denominator flips."""
    parts = g_alpha_parts if branch == TRIG else g_tilde_parts
    roots = []
    chunk = 1_000_000
    zs_all = np.linspace(1e-4, np.pi - 1e-5, points)
    prev_tail = None
    for lo in range(0, points, chunk):
        zs = zs_all[lo:lo + chunk + 1]
        if zs.size < 2:
            break
        num, den, scale = parts(alpha, zs)
        g = num / den
        ok = np.abs(den) > 1e-10 * np.maximum(scale, 1.0)
        f = g - k
        sgn = np.sign(f)
        flip = (sgn[:-1] * sgn[1:] < 0) & ok[:-1] & ok[1:] & (np.sign(den[:-1]) == np.sign(den[1:]))
        for i in np.where(flip)[0]:
            roots.append(0.5 * (zs[i] + zs[i + 1]))
    return roots


@pytest.mark.parametrize("alpha,k,branch", [
    (7.0, 0.0, TRIG),
    (2.5, -1.0, TRIG),
    (0.5, 0.0, HYPERBOLIC),
    (4.0, 1.5, HYPERBOLIC),
])
def test_invert_matches_dense_scan(alpha, k, branch):
    got = invert_g(alpha, k, branch)
    oracle = brute_force_roots(alpha, k, branch)
    interior = [z for z in got if z < np.pi - 1e-5]
    assert len(interior) == len(oracle)
    for z, zo in zip(interior, sorted(oracle)):
        assert z == pytest.approx(zo, abs=1e-6)
    gfun = g_alpha if branch == TRIG else g_tilde_alpha
    for z in got:
        assert abs(gfun(alpha, z) - k) <= 1e-10 * (1 + abs(k))


def test_invert_endpoint_root():
    roots = invert_g(2.5, -1.0, TRIG)
    assert any(abs(z - np.pi) < 1e-9 for z in roots)


def test_invert_hyperbolic_small_alpha_empty():
    assert invert_g(0.5, 0.0, HYPERBOLIC) == []


def test_root_count_stable_under_refinement():
    for alpha, k in ((7.0, 0.0), (6.3, 0.7), (3.8, 0.0)):
        a = invert_g(alpha, k, TRIG, grid_points=100_000)
        b = invert_g(alpha, k, TRIG, grid_points=200_000)
        assert len(a) == len(b)
        assert np.allclose(a, b, atol=1e-8)


def test_alpha_excluded():
    with pytest.raises(AlphaExcluded):
        invert_g(1.0, 0.0, TRIG)


def test_negative_k_warns():
    with pytest.warns(UserWarning):
        invert_g(2.5, -1.0, TRIG)


# --------------------------------------------------------------------------
# profiles

def test_profile_boundary_values():
    for lam in (13.474292446210168, 39.8332545467, -2.7, -14.0):
        z = 1.1
        vals = profile_values(lam, z, np.array([-z, 0.0, z]))
        assert vals[0] == pytest.approx(1.0, abs=1e-12)
        assert vals[2] == pytest.approx(1.0, abs=1e-12)


def test_profile_endpoint_slope_vanishes():
    lam, z = 13.474292446210168, 1.2128740801159925
    d = 1e-6
    slope = (profile_values(lam, z, z - d) - profile_values(lam, z, z - 3 * d)) / (2 * d)
    assert abs(slope) <= 1e-4


def test_profile_matches_symbolic_derivative():
    # symbolic oracle: differentiate the closed form twice and compare the
    # endpoint curvature with the level function
    import sympy as sp

    lam_v, z_v = 13.474292446210168, 0.9
    a_v = np.sqrt(1 + lam_v)
    t, a, z = sp.symbols("t a z")
    w = (sp.sin(z) * sp.cos(a * t) - a * sp.sin(a * z) * sp.cos(t)) / \
        (sp.sin(z) * sp.cos(a * z) - a * sp.sin(a * z) * sp.cos(z))
    w2 = sp.diff(w, t, 2)
    val = float(w2.subs({t: z_v, a: a_v, z: z_v}))
    assert val == pytest.approx(g_alpha(a_v, z_v), rel=1e-10)
    # and the discrete second derivative of the sampled profile agrees
    grid = PeriodicGrid(4096)
    from dcone.grid import PeriodicField, deriv
    mask, vals = fold_profile(lam_v, np.pi, z_v, grid)
    wf = PeriodicField(grid, vals)
    w2d = deriv(wf, 2).values
    inside = np.where(mask)[0]
    # sample a node four cells inside the left endpoint, where the stencil
    # is clean, and compare with the symbolic second derivative there
    j = inside[4]
    off = grid.nodes[j] - np.pi
    ref = float(w2.subs({t: off, a: a_v, z: z_v}))
    assert w2d[j] == pytest.approx(ref, abs=1e-4)


def test_profile_even_symmetry():
    lam, z = 13.474292446210168, 1.2128740801159925
    ts = np.linspace(0, z, 100)
    assert np.abs(profile_values(lam, z, ts) - profile_values(lam, z, -ts)).max() <= 1e-12


def test_branch_consistency_through_degenerate_multiplier():
    z = 0.9
    eps = 1e-4
    t = np.linspace(-z, z, 501)
    trig = profile_values(-1.0 + eps, z, t)
    hyp = profile_values(-1.0 - eps, z, t)
    assert np.abs(trig - hyp).max() <= 1e-3


def test_fold_integrals_match_quadrature_oracle():
    for lam, z in ((13.474292446210168, 1.2128740801159925),
                   (39.8332545467, 1.2201397785),
                   (5.0, 0.8),
                   (-3.5, 0.7),
                   (-17.0, 1.4)):
        cres, eng = fold_integrals(lam, z)
        wf = lambda t: profile_values(lam, z, t)

        def wp(t, d=1e-6):
            return (wf(t + d) - wf(t - d)) / (2 * d)

        def wpp(t, d=1e-5):
            return (wf(t + d) - 2 * wf(t) + wf(t - d)) / d**2

        c_quad, _ = quad(lambda t: wf(t) ** 2 - wp(t) ** 2, -z, z, limit=300)
        assert cres == pytest.approx(c_quad, rel=1e-6, abs=1e-6)
        e_quad, _ = quad(lambda t: (wpp(t) + wf(t)) ** 2, -z, z, limit=300)
        assert eng == pytest.approx(e_quad, rel=1e-4)


# --------------------------------------------------------------------------
# candidates

def test_assemble_empty_fold_list(grid2048):
    cand = assemble_candidate(FoldSpec(lam=13.5, folds=()), grid2048)
    assert np.all(cand.w.values == 1.0)
    assert cand.constraint_residual == pytest.approx(2 * np.pi, rel=1e-14)
    assert not cand.feasible


def test_assemble_single_fold(fold2048):
    cand = fold2048.candidate
    assert abs(cand.constraint_residual) <= 1e-8
    assert max(cand.c2_jumps) <= 1e-6
    assert cand.w_min >= 1.0 - 1e-12
    assert cand.feasible


def test_assemble_two_copies_residual_arithmetic(fold2048, grid2048):
    sol = fold2048
    cres1, _ = fold_integrals(sol.lam, sol.z)
    spec = FoldSpec(lam=sol.lam, folds=((np.pi / 2, sol.z), (3 * np.pi / 2, sol.z)))
    cand = assemble_candidate(spec, grid2048)
    expected = 2 * cres1 + 2 * np.pi - 4 * sol.z
    assert cand.constraint_residual == pytest.approx(expected, abs=1e-10)
    assert abs(cand.constraint_residual) > 1e-3  # reported, not hidden


def test_assemble_overlap_rejected(grid2048):
    spec = FoldSpec(lam=13.5, folds=((np.pi, 1.2), (np.pi + 1.0, 1.2)))
    with pytest.raises(Overlap):
        spec.validate()


def test_assemble_obstacle_violation(grid2048):
    # a half-width that is not a level-function root generally dips below 1
    with pytest.raises(ObstacleViolated):
        assemble_candidate(FoldSpec(lam=25.0, folds=((np.pi, 2.2),)), grid2048)


# --------------------------------------------------------------------------
# single-fold solve

def test_single_fold_reference_constants(fold2048):
    sol = fold2048
    assert sol.lam == pytest.approx(REFERENCE_SINGLE_FOLD["lambda"], abs=1e-9)
    assert sol.z == pytest.approx(REFERENCE_SINGLE_FOLD["half_width"], abs=1e-9)
    assert sol.candidate.energy == pytest.approx(REFERENCE_SINGLE_FOLD["energy"], rel=1e-10)
    assert abs(sol.candidate.constraint_residual) <= 1e-10


def test_single_fold_family_ladder(grid1024):
    sols = solve_single_fold(grid1024, return_all=True)
    assert len(sols) >= 3
    energies = [s.candidate.energy for s in sols]
    assert energies == sorted(energies)
    # the next families sit markedly higher
    assert energies[1] == pytest.approx(380.1895448, rel=1e-6)
    for s in sols[:3]:
        assert 130.0 <= s.opening_deg <= 150.0


def test_single_fold_self_consistency(fold2048):
    from dcone.solver import check_necessary_conditions, report_from_profile
    rep = report_from_profile(fold2048.candidate.w, lam=fold2048.lam)
    cr = check_necessary_conditions(rep)
    assert cr.max_profile_gap() <= 1e-10
    assert cr.max_root_distance() <= 1e-3


# --------------------------------------------------------------------------
# tables

def test_plot_table_counts_stable():
    for branch in (TRIG, HYPERBOLIC):
        rows1 = plot_g_table(7.0, branch, points=2000)
        rows2 = plot_g_table(7.0, branch, points=4000)

        def n_pole_groups(rows):
            flags = [r[2] for r in rows]
            return sum(1 for i, f in enumerate(flags) if f and (i == 0 or not flags[i - 1]))

        assert n_pole_groups(rows1) == n_pole_groups(rows2)
        vals1 = np.array([r[1] for r in rows1])
        assert np.isfinite(vals1[np.array([not r[2] for r in rows1])]).all()


def test_sweep_columns_and_exclusion(grid1024):
    rows = sweep([1.0, 7.0], [0.0], branch=TRIG, grid=grid1024)
    excluded = [r for r in rows if r["excluded"]]
    assert len(excluded) == 1 and excluded[0]["alpha"] == 1.0
    good = [r for r in rows if not r["excluded"]]
    assert all(set(r) >= {"alpha", "k", "branch", "root_index", "z", "energy", "feasible"}
               for r in good)
    feas = [r for r in good if r["feasible"]]
    assert feas, "alpha=7, k=0 has admissible single-fold candidates"
