import numpy as np
import pytest

from dcone.energy import constraint, energy
from dcone.folds import FoldSpec, assemble_candidate
from dcone.grid import PeriodicField, PeriodicGrid, shift
from dcone.solver import (EmptyActiveSet, SolverConfig, _Discretization,
                          _inner_minimize, check_necessary_conditions,
                          extract_structure, minimize, minimize_restarts,
                          preset_bump, report_from_profile)

TWO_PI = 2 * np.pi


def test_bump_preset_scaled_to_feasibility():
    disc = _Discretization(1024)
    w = preset_bump(disc)
    assert abs(disc.constraint(w)) <= 1e-10
    assert w.min() == 1.0


def test_bump_converges_to_single_fold(bump_report_1024, fold1024):
    rep = bump_report_1024
    assert len(rep.intervals) == 1
    rel = abs(rep.energy - fold1024.candidate.energy) / fold1024.candidate.energy
    assert rel <= 1e-3
    assert rep.w.min() >= 1.0 - 1e-10
    assert abs(rep.constraint) <= 1e-8 * TWO_PI
    assert not rep.lambda_degenerate


def test_analytic_init_is_fixed_point(fold1024):
    rep = minimize(SolverConfig(n=1024, seed=0), init=fold1024.candidate.w)
    assert rep.outer_iters <= 3
    assert np.abs(rep.w.values - fold1024.candidate.w.values).max() <= 1e-4


def test_flat_start_escapes_obstacle_trap():
    g = PeriodicGrid(1024)
    rep = minimize(SolverConfig(n=1024, seed=7), init=PeriodicField(g, np.ones(1024)))
    assert abs(rep.constraint) <= 1e-8 * TWO_PI
    assert rep.energy > 2 * np.pi + 1.0  # genuinely left w == 1


def test_inner_iterates_never_increase_augmented_lagrangian():
    disc = _Discretization(256)
    w = preset_bump(disc)
    trace = []
    _inner_minimize(disc, w, lam=5.0, rho=100.0, tol=1e-8, max_iter=80, trace=trace)
    assert len(trace) >= 2
    diffs = np.diff(np.array(trace))
    assert (diffs <= 0).all()


def test_projection_keeps_obstacle_exact(bump_report_1024):
    assert bump_report_1024.w.min() >= 1.0


def test_stationarity_residuals(bump_report_1024):
    res = bump_report_1024.residuals
    tol = 1e-4 * res["stationarity_scale"]
    assert res["stationarity_inactive"] <= tol
    assert res["stationarity_active"] <= tol
    assert res["complementarity"] <= 1e-6


def test_shift_degeneracy(fold1024):
    m = 100
    rep0 = minimize(SolverConfig(n=1024, seed=0), init=fold1024.candidate.w)
    rep1 = minimize(SolverConfig(n=1024, seed=0), init=shift(fold1024.candidate.w, m))
    assert abs(rep0.energy - rep1.energy) <= 1e-8
    assert np.abs(np.roll(rep0.w.values, m) - rep1.w.values).max() <= 1e-6


def test_mesh_stability_of_minimum():
    energies = {}
    for n in (256, 512, 1024):
        rep = minimize(SolverConfig(n=n, seed=0), init="bump")
        energies[n] = rep.energy
    diffs = [abs(energies[256] - energies[512]), abs(energies[512] - energies[1024])]
    slope = -np.polyfit(np.log([256, 512]), np.log(diffs), 1)[0]
    assert slope >= 1.5


def test_extract_structure_single_interval(bump_report_1024, fold1024):
    ivs = extract_structure(bump_report_1024)
    assert len(ivs) == 1
    assert abs(ivs[0].k) <= 1e-3
    assert ivs[0].half_width == pytest.approx(fold1024.z, abs=2 * TWO_PI / 1024)


def test_extract_structure_two_folds(fold2048, grid2048):
    sol = fold2048
    spec = FoldSpec(lam=sol.lam, folds=((np.pi / 2, sol.z), (3 * np.pi / 2, sol.z)))
    cand = assemble_candidate(spec, grid2048)
    rep = report_from_profile(cand.w, lam=sol.lam)
    ivs = rep.intervals
    assert len(ivs) == 2
    assert ivs[0].half_width == pytest.approx(ivs[1].half_width, abs=grid2048.spacing)


def test_extract_structure_flat_profile(grid1024):
    rep = report_from_profile(PeriodicField(grid1024, np.ones(1024)))
    assert rep.intervals == []
    assert rep.k == pytest.approx(0.0, abs=1e-10)


def test_extract_structure_no_contact_raises(grid1024):
    hover = PeriodicField(grid1024, 1.5 + 0.2 * np.cos(grid1024.nodes))
    rep = report_from_profile(hover)
    with pytest.raises(EmptyActiveSet):
        extract_structure(rep)


def test_necessary_conditions_on_numeric_minimizer(bump_report_2048):
    cr = check_necessary_conditions(bump_report_2048)
    assert cr.branch == "trig"
    assert cr.max_root_distance() <= 1e-3
    assert cr.max_profile_gap() <= 1e-3


def test_necessary_conditions_reject_infeasible(grid1024):
    w = PeriodicField(grid1024, 1.0 + np.cos(2 * grid1024.nodes))
    rep = report_from_profile(w)
    from dcone.solver import SolverError
    with pytest.raises(SolverError):
        check_necessary_conditions(rep)


def test_restart_reports_sorted_and_deterministic():
    cfg = SolverConfig(n=256, seed=3)
    reps1 = minimize_restarts(cfg, restarts=2)
    reps2 = minimize_restarts(cfg, restarts=2)
    es1 = [r.energy for r in reps1]
    es2 = [r.energy for r in reps2]
    assert es1 == sorted(es1)
    assert es1 == es2


def test_report_serializes(bump_report_1024):
    d = bump_report_1024.as_dict()
    for key in ("w", "lambda", "k", "intervals", "energy", "residuals"):
        assert key in d
    assert len(d["w"]) == 1024


def test_degenerate_lambda_flagged(grid1024):
    # a profile whose least-squares multiplier lands near zero
    t = grid1024.nodes
    w = PeriodicField(grid1024, 1.0 + 0.5 * (1 + np.cos(t)) ** 2)
    rep = report_from_profile(w, lam=1e-9)
    assert rep.lambda_degenerate
