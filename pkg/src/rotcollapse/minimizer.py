"""Ground states by normalized gradient flow on the unit L2 sphere.

One flow step treats the Laplacian implicitly in Fourier space (backward
Euler), every other term of the energy gradient explicitly, shifts by the
current Rayleigh quotient mu = <grad E, phi> and projects back onto the
sphere:

    phi_hat <- ((1 + tau*mu) phi_hat - tau * N_hat(phi)) / (1 + tau |k|^2),
    phi     <- phi / ||phi||,
    N(phi)  =  |x|^2 phi + 2*Omega*L phi - a |phi|^2 phi.

The mu shift makes Euler-Lagrange eigenfunctions exact fixed points of the
projected update at any step size (without it the fixed point carries an
O(tau) bias and the residual plateaus).

The nominal step tau is fixed and halved whenever a trial step raises the
energy, which makes the energy non-increasing across accepted iterations.
Convergence is declared on the Euler-Lagrange residual ||grad E - mu phi||,
not on energy stall.

At the critical rotation Omega = 1 the energy is magnetic-translation
invariant, so the flow has a neutral translation mode; it is removed either
by periodically recentering the density centroid with a magnetic
translation (exact isometry of that energy) or by a weak pinning potential
pin_strength * |x|^2 added to the flow operator only.
"""

import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy import fft as sfft

from . import _kernels
from . import field as fld
from .field import Field, Grid2D
from .functional import EnergyBreakdown, NlsEnergy
from .townes import (RadialProfile, TownesConstants, predicted_blowup_length,
                     sample_q0_on_grid)

_MIN_STEP = 1e-13


class DomainInadequate(Exception):
    """Boundary guard failed during the flow; the caller must regrid."""


class NonConvergence(Exception):
    """Residual tolerance not reached within max_iters; carries the best iterate."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass
class SolverConfig:
    step: float | None = None      # None: stability-limited default
    max_iters: int = 20000
    grad_tol: float = 1e-6
    energy_tol: float = 1e-12      # relative slack when accepting a step
    recenter: bool = True
    pin_strength: float = 0.0
    seed: int = 0
    check_every: int = 10          # residual/guard cadence, in accepted steps
    recenter_every: int = 20
    rescale_accel: bool = True     # periodic optimal-dilation move
    rescale_every: int = 40

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if self.grad_tol <= 0 or self.pin_strength < 0:
            raise ValueError("grad_tol must be positive, "
                             "pin_strength nonnegative")


@dataclass
class SolveResult:
    field: Field
    breakdown: EnergyBreakdown
    mu: float
    residual: float
    iters: int
    converged: bool
    energies: np.ndarray = dataclass_field(default_factory=lambda: np.empty(0))
    elapsed: float = 0.0


class _FlowState:
    """Current iterate with its transform, derivatives and observables."""

    __slots__ = ("v", "phat", "dpx", "dpy", "obs", "energy")

    def __init__(self, v, phat, dpx, dpy, obs, energy):
        self.v = v
        self.phat = phat
        self.dpx = dpx
        self.dpy = dpy
        self.obs = obs          # (mass, kinetic, trap, angular, quartic)
        self.energy = energy


class GroundStateSolver:
    """Minimizer of the rotating NLS energy tied to one Townes solution."""

    def __init__(self, profile: RadialProfile, constants: TownesConstants):
        self.profile = profile
        self.constants = constants
        self.energy_model = NlsEnergy(constants.a_star)

    # -- initial states ----------------------------------------------------

    def default_init(self, grid: Grid2D, a: float, seed=None) -> Field:
        """Q0 sampled at the predicted blow-up scale for a >= a_star/2,
        a Gaussian otherwise; a seeded random smooth field when seed given.

        The profile init is used only when the grid holds its exponential
        tail within the boundary guard (extent >= 15 predicted lengths);
        below that the Gaussian is safe on any adequate grid.
        """
        if seed is not None:
            return fld.random_smooth_field(grid, seed)
        if a >= 0.5 * self.constants.a_star:
            eps = predicted_blowup_length(a, self.constants)
            if grid.extent >= 15.0 * eps:
                return sample_q0_on_grid(self.profile, grid, (0.0, 0.0),
                                         1.0 / eps)
        return fld.gaussian_field(grid)

    def suggested_step(self, grid: Grid2D, a: float) -> float:
        """Largest step for which the explicit trap and interaction terms
        stay stable: tau <~ 1/max|x|^2 and tau <~ 0.2*eps^2 near collapse."""
        tau = min(0.05, 1.0 / (2.0 * grid.extent ** 2))
        if a >= 0.5 * self.constants.a_star:
            eps = predicted_blowup_length(a, self.constants)
            tau = min(tau, 0.2 * eps ** 2)
        return tau

    # -- flow --------------------------------------------------------------

    def minimize(self, grid: Grid2D, omega: float, a: float,
                 init: Field | None = None,
                 config: SolverConfig | None = None) -> SolveResult:
        """Run the projected semi-implicit flow from init down to the
        residual tolerance.

        Raises NonConvergence (carrying the best iterate) after max_iters
        and DomainInadequate when the boundary guard fails along the flow.
        """
        config = config or SolverConfig()
        self.energy_model._check_params(omega, a)
        if omega == 1.0 and not config.recenter and config.pin_strength == 0.0:
            raise ValueError("at omega = 1 enable recenter or set "
                             "pin_strength > 0 (translation degeneracy)")
        if init is None:
            init = self.default_init(grid, a)
        if init.grid != grid:
            raise ValueError("init lives on a different grid")

        t0 = time.perf_counter()
        g = grid
        w = g.spacing ** 2
        x = g.x
        workers = fld.fft_workers()
        rotating = omega != 0.0
        two_omega = 2.0 * omega
        trap_coef = 1.0 + config.pin_strength
        pin = config.pin_strength

        n_buf = np.empty((g.n, g.n), dtype=np.complex128)
        step_buf = np.empty((g.n, g.n), dtype=np.complex128)

        def build_state(v, phat):
            if rotating:
                dpx = sfft.ifft2(1j * g.KX * phat, workers=workers)
                dpy = sfft.ifft2(1j * g.KY * phat, workers=workers)
                mass, kin, trap, ang, quart = _kernels.observables_rot(
                    v, dpx, dpy, x, x)
            else:
                dpx = dpy = None
                mass, trap, quart = _kernels.observables_norot(v, x, x)
                kin = float(np.sum(g.K2 * (phat.real ** 2 + phat.imag ** 2))
                            ) / g.n ** 2
                ang = 0.0
            obs = (mass * w, kin * w, trap * w, ang * w, quart * w)
            energy = obs[1] + obs[2] + two_omega * obs[3] - 0.5 * a * obs[4]
            return _FlowState(v, phat, dpx, dpy, obs, energy)

        def normalized_state(v, phat):
            m = float(np.sum(v.real ** 2 + v.imag ** 2)) * w
            s = np.sqrt(m)
            return build_state(v / s, phat / s)

        v0 = init.values / np.sqrt(init.mass())
        state = build_state(v0, sfft.fft2(v0, workers=workers))
        energies = [state.energy]

        def explicit_terms(st):
            if rotating:
                return _kernels.explicit_terms_rot(
                    st.v, st.dpx, st.dpy, x, x, trap_coef, two_omega, a, n_buf)
            return _kernels.explicit_terms_norot(st.v, x, x, trap_coef, a, n_buf)

        def residual_and_mu(st, n_arr):
            gradv = sfft.ifft2(g.K2 * st.phat, workers=workers) + n_arr
            if pin > 0.0:
                gradv = gradv - pin * g.R2 * st.v
            mu = float(np.sum(gradv.real * st.v.real
                              + gradv.imag * st.v.imag)) * w
            diff = gradv - mu * st.v
            res = np.sqrt(float(np.sum(diff.real ** 2 + diff.imag ** 2)) * w)
            return res, mu

        def recenter_state(st):
            dens = st.v.real ** 2 + st.v.imag ** 2
            m = np.sum(dens)
            c1 = float(np.sum(g.X * dens) / m)
            c2 = float(np.sum(g.Y * dens) / m)
            if np.hypot(c1, c2) < 0.05 * g.spacing:
                return st
            shifted = sfft.ifft2(st.phat * np.exp(1j * (g.KX * c1 + g.KY * c2)),
                                 workers=workers)
            shifted *= np.exp(1j * (-c2 * g.X + c1 * g.Y))
            return normalized_state(shifted, sfft.fft2(shifted, workers=workers))

        def rescale_state(st):
            # The dilation family lam*phi(lam x) has closed-form energy
            # lam^2*(kin - a/2 quartic) + lam^-2*trap + angular, so the
            # near-degenerate scaling mode can be relaxed in one move.
            kin_eff = st.obs[1] - 0.5 * a * st.obs[4]
            if kin_eff <= 0:
                return st
            lam = (st.obs[2] / kin_eff) ** 0.25
            if abs(lam - 1.0) < 1e-4:
                return st
            vals = lam * fld.resample_affine(Field(g, st.v), g, lam,
                                             (0.0, 0.0), out_of_domain="zero")
            cand = normalized_state(vals, sfft.fft2(vals, workers=workers))
            improves = cand.energy <= st.energy + config.energy_tol * max(
                1.0, abs(st.energy))
            if improves and _boundary_ratio(cand.v) <= fld.BOUNDARY_GUARD:
                return cand
            return st

        tau = config.step if config.step is not None \
            else self.suggested_step(grid, a)
        pinned = lambda st: st.energy + pin * st.obs[2]
        iters = 0
        converged = False
        residual = np.inf
        mu = 0.0

        for sweep_it in range(config.max_iters + 1):
            if (config.recenter and omega == 1.0 and iters > 0
                    and iters % config.recenter_every == 0):
                state = recenter_state(state)
            if (config.rescale_accel and iters > 0
                    and iters % config.rescale_every == 0):
                state = rescale_state(state)
            n_arr = explicit_terms(state)
            if iters % config.check_every == 0 or sweep_it == config.max_iters:
                residual, mu = residual_and_mu(state, n_arr)
                ratio = _boundary_ratio(state.v)
                if ratio > fld.BOUNDARY_GUARD:
                    raise DomainInadequate(
                        f"boundary ratio {ratio:.3e} exceeds "
                        f"{fld.BOUNDARY_GUARD:g} at iteration {iters}")
                if residual <= config.grad_tol:
                    converged = True
                    break
            if sweep_it == config.max_iters:
                break

            nhat = sfft.fft2(n_arr, workers=workers)
            e_ref = pinned(state)
            slack = config.energy_tol * max(1.0, abs(e_ref))
            obs = state.obs
            mu_shift = obs[1] + (trap_coef * obs[2]
                                 + two_omega * obs[3]) - a * obs[4]
            while True:
                phat_t = _kernels.spectral_step(state.phat, nhat, g.K2, tau,
                                                mu_shift, step_buf)
                v_t = sfft.ifft2(phat_t, workers=workers)
                trial = normalized_state(v_t, phat_t)
                if pinned(trial) <= e_ref + slack:
                    break
                tau *= 0.5
                if tau < _MIN_STEP:
                    trial = state  # flat to machine precision: keep iterate
                    break
            state = trial
            iters += 1
            energies.append(state.energy)

        breakdown = self.energy_model.energy_from_observables(
            fld.Observables(*state.obs), omega, a)
        result = SolveResult(field=Field(g, state.v), breakdown=breakdown,
                             mu=mu, residual=residual, iters=iters,
                             converged=converged,
                             energies=np.asarray(energies),
                             elapsed=time.perf_counter() - t0)
        if not converged:
            raise NonConvergence(
                f"residual {residual:.3e} > {config.grad_tol:g} after "
                f"{iters} iterations", result)
        return result

    # -- continuation ------------------------------------------------------

    def rescaled_init(self, previous: SolveResult, a_next: float,
                      grid: Grid2D) -> Field:
        """Warm start: dilate the previous minimizer by the predicted
        blow-up ratio onto the (possibly different) target grid."""
        eps_prev = fld.blowup_length(previous.field)
        eps_next = predicted_blowup_length(a_next, self.constants)
        lam = eps_prev / eps_next
        return fld.dilate(previous.field, lam, grid).normalized()

    def warm_start_schedule(self, grid: Grid2D, omega: float, a_list,
                            config: SolverConfig | None = None):
        """Continuation in the interaction strength along ascending a."""
        a_list = list(a_list)
        if any(a2 <= a1 for a1, a2 in zip(a_list, a_list[1:])):
            raise ValueError("a_list must be strictly increasing")
        if a_list and a_list[-1] >= self.constants.a_star:
            raise ValueError("all a must be below a_star")
        results = []
        init = None
        for a in a_list:
            if results:
                init = self.rescaled_init(results[-1], a, grid)
            res = self.minimize(grid, omega, a, init, config)
            results.append(res)
        return results


def _boundary_ratio(v: np.ndarray) -> float:
    av = np.abs(v)
    ring = max(av[0, :].max(), av[-1, :].max(), av[:, 0].max(), av[:, -1].max())
    peak = av.max()
    return float(ring / peak) if peak > 0 else 0.0
