"""Radial profile solver: independent oracles, identities, error contracts."""

import numpy as np
import pytest
from scipy.integrate import simpson, solve_ivp
from scipy.optimize import brentq

from rotcollapse import field as fld
from rotcollapse import townes
from rotcollapse.townes import (BracketFailure, DecayFailure,
                                QuadratureDivergence, RadialProfile)

# Frozen reference values, produced by the independent integrator below
# (solve_ivp RK45 at rtol 1e-12 + brentq on the r = 10 sign change, moments
# by Simpson quadrature) and cross-checked against the shooting solver.
Q0_CENTER_AMPLITUDE = 2.2062
A_STAR = 11.7009
X_MOMENT = 1.08973


def _ivp_amplitude_oracle():
    """Critical central amplitude via an integrator independent of the
    production RK4 kernel."""

    def rhs(r, y):
        q, p = y
        return [p, q - q ** 3 - p / r]

    def endpoint(s):
        sol = solve_ivp(rhs, (1e-6, 10.0), [s, 0.0], rtol=1e-12, atol=1e-14,
                        dense_output=False)
        return sol.y[0, -1]

    return brentq(endpoint, 2.0, 2.4, xtol=1e-9), rhs


def test_shooting_matches_independent_integrator(profile):
    s_oracle, _ = _ivp_amplitude_oracle()
    assert abs(profile.values[0] - s_oracle) < 1e-6
    assert abs(profile.values[0] - Q0_CENTER_AMPLITUDE) < 1e-3


def test_critical_mass_against_independent_quadrature(profile, constants):
    s_oracle, rhs = _ivp_amplitude_oracle()
    r_grid = np.linspace(1e-6, 12.0, 4001)
    sol = solve_ivp(rhs, (1e-6, 12.0), [s_oracle, 0.0], rtol=1e-12,
                    atol=1e-14, t_eval=r_grid)
    a_star_oracle = simpson(2 * np.pi * r_grid * sol.y[0] ** 2, x=r_grid)
    assert abs(constants.a_star - a_star_oracle) < 1e-4
    assert abs(constants.a_star - A_STAR) < 1e-3
    xmom_oracle = np.sqrt(
        simpson(2 * np.pi * r_grid ** 3 * sol.y[0] ** 2, x=r_grid)
        / a_star_oracle)
    assert abs(constants.x_moment - xmom_oracle) < 1e-4
    assert abs(constants.x_moment - X_MOMENT) < 1e-3


def test_ode_residual_below_contract(profile):
    r, q, h = profile.radii, profile.values, profile.spacing
    i = np.arange(1, len(r) - 1)
    i = i[r[i] <= 0.8 * profile.r_max]
    d2 = (q[i + 1] - 2 * q[i] + q[i - 1]) / h ** 2
    d1 = (q[i + 1] - q[i - 1]) / (2 * h)
    res = d2 + d1 / r[i] - q[i] + q[i] ** 3
    assert np.abs(res).max() < 1e-6


def test_profile_invariants(profile):
    profile.validate()
    assert np.all(profile.values[:-1] > 0)  # strictly positive on [0, r_max)
    assert profile.radii[0] == 0.0 and profile.radii[-1] == profile.r_max
    assert profile.values[-1] < 1e-8 * profile.values[0]


def test_shooting_deterministic():
    p1 = townes.solve_townes(1e-10, 18.0, 5e-4)
    p2 = townes.solve_townes(1e-10, 18.0, 5e-4)
    assert np.array_equal(p1.values, p2.values)


def test_refinement_consistency(profile, constants):
    fine = townes.compute_constants(
        townes.solve_townes(1e-12, profile.r_max, profile.spacing / 2))
    assert abs(fine.a_star - constants.a_star) / constants.a_star < 1e-6
    assert abs(fine.x_moment - constants.x_moment) / constants.x_moment < 1e-5


def test_pohozaev_identities(constants):
    assert abs(constants.grad_norm2 - 1.0) < 1e-5
    assert abs(constants.l4_norm4 * constants.a_star / 2.0 - 1.0) < 1e-5
    assert abs(constants.q0_center
               - Q0_CENTER_AMPLITUDE / np.sqrt(A_STAR)) < 1e-3


def test_pohozaev_triple_identity(profile):
    # ||grad Q||^2 = 0.5 ||Q||_4^4 = ||Q||^2 within 1e-5 relative
    r, q = profile.radii, profile.values
    dq = np.gradient(q, profile.spacing)
    mass = np.trapezoid(2 * np.pi * r * q * q, r)
    grad2 = np.trapezoid(2 * np.pi * r * dq * dq, r)
    l4 = np.trapezoid(2 * np.pi * r * q ** 4, r)
    assert abs(grad2 / mass - 1.0) < 1e-5
    assert abs(0.5 * l4 / mass - 1.0) < 1e-5


def test_far_field_decay(profile):
    r, q = profile.radii, profile.values
    m = (r >= 0.5 * profile.r_max) & (r <= 0.8 * profile.r_max) & (q > 0)
    g = np.log(q[m]) + r[m] + 0.5 * np.log(r[m])
    slope = np.polyfit(r[m], g, 1)[0]
    assert abs(slope) < 1e-2


def test_preconditions_rejected():
    with pytest.raises(ValueError):
        townes.solve_townes(shoot_tol=1e-5)
    with pytest.raises(ValueError):
        townes.solve_townes(r_max=10.0)
    with pytest.raises(ValueError):
        townes.solve_townes(spacing=5e-3)


def test_decay_failure_at_short_range():
    with pytest.raises(DecayFailure):
        townes.solve_townes(1e-12, 15.0, 5e-4)


def test_bracket_failure():
    with pytest.raises(BracketFailure):
        townes.solve_townes(1e-10, 18.0, 5e-4, bracket=(0.1, 0.5))


def test_quadrature_divergence_on_fat_tail():
    r = np.arange(0, 20.0 + 1e-3, 1e-3)
    q = np.exp(-3 * r) + 1e-3 * np.exp(-((r - 19.0) ** 2))
    prof = RadialProfile(radii=r, values=q, spacing=1e-3, r_max=20.0)
    with pytest.raises(QuadratureDivergence):
        townes.compute_constants(prof)


def test_sample_q0_unit_mass(profile):
    grid = fld.Grid2D(128, 8.0)
    f = townes.sample_q0_on_grid(profile, grid, (0.0, 0.0), 1.0)
    assert abs(f.mass() - 1.0) < 1e-10


@pytest.mark.parametrize("lam", [1.0, 2.0, 4.0])
def test_sample_q0_gradient_scaling(profile, lam):
    # ||grad(lam Q0(lam x))||^2 = lam^2 since ||grad Q0|| = 1
    grid = fld.Grid2D(512, 8.0)
    f = townes.sample_q0_on_grid(profile, grid, (0.0, 0.0), lam)
    kinetic = fld.observables(f).kinetic
    assert abs(kinetic - lam ** 2) < 0.01 * lam ** 2


def test_sample_q0_angular_zero(profile):
    grid = fld.Grid2D(128, 8.0)
    f = townes.sample_q0_on_grid(profile, grid, (0.2, -0.3), 1.5)
    assert abs(fld.angular_momentum_expectation(f)) < 1e-10


def test_scaling_helpers(constants):
    beta = townes.beta_limit(constants)
    assert abs(beta - constants.a_star ** -0.25
               * constants.x_moment ** -0.5) < 1e-15
    ratio = townes.energy_ratio_limit(constants)
    assert abs(ratio - 2 * constants.x_moment
               / np.sqrt(constants.a_star)) < 1e-15
    a = 0.99 * constants.a_star
    assert abs(townes.predicted_blowup_length(a, constants)
               - beta * (constants.a_star - a) ** 0.25) < 1e-15
    with pytest.raises(ValueError):
        townes.predicted_blowup_length(constants.a_star, constants)
    assert townes.trial_energy_bound(0.0, constants) == pytest.approx(
        2 * constants.x_moment)
