"""Ground-state flow: exact cases, invariants, continuation, error paths."""

import numpy as np
import pytest

from rotcollapse import field as fld
from rotcollapse import townes
from rotcollapse.field import Field, Grid2D
from rotcollapse.minimizer import (DomainInadequate, NonConvergence,
                                   SolverConfig)


@pytest.fixture(scope="module")
def grid():
    return Grid2D(128, 8.0)


def test_harmonic_ground_state(solver, grid):
    res = solver.minimize(grid, 0.0, 0.0, fld.gaussian_field(grid, sigma=1.4),
                          SolverConfig(grad_tol=1e-8))
    assert res.converged
    assert abs(res.breakdown.total - 2.0) < 1e-6
    # the minimizer is the unit Gaussian
    exact = fld.gaussian_field(grid).values
    assert np.max(np.abs(np.abs(res.field.values) - np.abs(exact))) < 1e-6


def test_landau_ground_state_any_init(solver, grid):
    res = solver.minimize(grid, 1.0, 0.0, fld.random_smooth_field(grid, 21),
                          SolverConfig(grad_tol=1e-7))
    assert abs(res.breakdown.total - 2.0) < 1e-6


def test_energy_below_trial_bound(solver, constants):
    grid = Grid2D(256, 8.0)
    a = 0.9 * constants.a_star
    res = solver.minimize(grid, 0.5, a, None, SolverConfig(grad_tol=1e-4))
    bound = townes.trial_energy_bound(a, constants)
    assert res.breakdown.total <= bound * 1.01


def test_mass_conservation_and_monotonicity(solver, grid, constants):
    res = solver.minimize(grid, 0.0, 0.6 * constants.a_star, None,
                          SolverConfig(grad_tol=1e-6))
    assert abs(res.field.mass() - 1.0) < 1e-12
    diffs = np.diff(res.energies)
    slack = 1e-10 * max(1.0, abs(res.energies[0]))
    assert np.all(diffs <= slack)


def test_gauge_convergence_independence(solver, grid, constants):
    a = 0.5 * constants.a_star
    cfg = SolverConfig(grad_tol=1e-7)
    init = fld.gaussian_field(grid)
    rotated = Field(grid, init.values * np.exp(1j * 1.2))
    r1 = solver.minimize(grid, 0.0, a, init, cfg)
    r2 = solver.minimize(grid, 0.0, a, rotated, cfg)
    assert abs(r1.breakdown.total - r2.breakdown.total) < cfg.grad_tol
    assert np.max(np.abs(np.abs(r1.field.values)
                         - np.abs(r2.field.values))) < 1e-6


def test_variational_consistency(solver, grid, constants):
    a = 0.7 * constants.a_star
    res = solver.minimize(grid, 0.5, a, None, SolverConfig(grad_tol=1e-8))
    mu_model = solver.energy_model.lagrange_multiplier(res.field, 0.5, a)
    assert abs(res.mu - mu_model) <= 1e-8 * max(1.0, abs(mu_model))
    # mu = E - (a/2) ||phi||_4^4 at a converged minimizer
    mu_energy = res.breakdown.total - res.breakdown.interaction
    assert abs(res.mu - mu_energy) <= 1e-7 * max(1.0, abs(mu_energy))


def test_warm_start_schedule(solver, constants):
    grid = Grid2D(256, 8.0)
    cfg = SolverConfig(grad_tol=1e-4)
    a_list = [0.9 * constants.a_star, 0.96 * constants.a_star]
    warm = solver.warm_start_schedule(grid, 1.0, a_list, cfg)
    assert all(r.converged for r in warm)
    cold = solver.minimize(grid, 1.0, a_list[1], None, cfg)
    # continuation reaches the second point in fewer iterations than a
    # cold start and does not end above the cold-start energy
    assert warm[1].iters < cold.iters
    assert warm[1].breakdown.total <= cold.breakdown.total + cfg.grad_tol


def test_warm_start_singleton_matches_minimize(solver, grid, constants):
    cfg = SolverConfig(grad_tol=1e-6)
    a = 0.5 * constants.a_star
    single = solver.warm_start_schedule(grid, 0.0, [a], cfg)[0]
    direct = solver.minimize(grid, 0.0, a, None, cfg)
    assert single.breakdown.total == direct.breakdown.total
    assert np.array_equal(single.field.values, direct.field.values)


def test_warm_start_validation(solver, grid, constants):
    with pytest.raises(ValueError):
        solver.warm_start_schedule(grid, 0.0, [1.0, 0.5])
    with pytest.raises(ValueError):
        solver.warm_start_schedule(grid, 0.0, [constants.a_star])


def test_omega_one_needs_degeneracy_guard(solver, grid):
    with pytest.raises(ValueError):
        solver.minimize(grid, 1.0, 0.0, None,
                        SolverConfig(recenter=False, pin_strength=0.0))


def test_pinned_flow(solver, grid):
    cfg = SolverConfig(recenter=False, pin_strength=0.05, grad_tol=0.1)
    res = solver.minimize(grid, 1.0, 0.0, None, cfg)
    assert res.converged
    assert abs(res.breakdown.total - 2.0) < 1e-2


def test_nonconvergence_carries_best_iterate(solver, grid, constants):
    with pytest.raises(NonConvergence) as exc_info:
        solver.minimize(grid, 0.0, 0.5 * constants.a_star, None,
                        SolverConfig(grad_tol=1e-14, max_iters=5))
    res = exc_info.value.result
    assert not res.converged
    assert res.iters == 5
    assert abs(res.field.mass() - 1.0) < 1e-9


def test_domain_inadequate(solver):
    grid = Grid2D(64, 4.0)
    init = fld.gaussian_field(grid, sigma=2.0)
    with pytest.raises(DomainInadequate):
        solver.minimize(grid, 0.0, 0.0, init, SolverConfig(grad_tol=1e-8))


def test_result_energy_not_above_init(solver, grid, constants):
    init = fld.random_smooth_field(grid, 5)
    a = 0.4 * constants.a_star
    e_init = solver.energy_model.energy(init, 0.0, a).total
    res = solver.minimize(grid, 0.0, a, init, SolverConfig(grad_tol=1e-6))
    assert res.breakdown.total <= e_init + 1e-12


def test_default_init_selection(solver, grid, constants):
    low = solver.default_init(grid, 0.1 * constants.a_star)
    assert abs(fld.blowup_length(low) - 1.0) < 0.05  # Gaussian width
    high = solver.default_init(grid, 0.95 * constants.a_star)
    eps_hat = townes.predicted_blowup_length(0.95 * constants.a_star,
                                             constants)
    assert abs(fld.blowup_length(high) - eps_hat) < 0.05 * eps_hat
    rand = solver.default_init(grid, 0.0, seed=3)
    assert abs(rand.mass() - 1.0) < 1e-12
