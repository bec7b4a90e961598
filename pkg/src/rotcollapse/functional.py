"""The trapped rotating NLS energy, its gradient and inequality deficits.

For a unit-mass field phi and parameters 0 <= Omega <= 1, 0 <= a < a_star,

    E(phi) = ||grad phi||^2 + ||x phi||^2 + 2*Omega*<L phi, phi>
             - (a/2) ||phi||_{L4}^4,

equivalently ||(-i grad + Omega x_perp) phi||^2 + (1 - Omega^2) ||x phi||^2
- (a/2) ||phi||_{L4}^4.  The unconstrained L2 gradient is

    grad E = -Delta phi + |x|^2 phi + 2*Omega*L phi - a |phi|^2 phi

and the multiplier of the constrained problem is mu = <grad E, phi>.

The critical strength a_star entering the interpolation-inequality deficits
is injected at construction; its single source of truth is the radial
shooting solver.  Discretized fields may undershoot the continuum
inequalities by quadrature error, so deficit checks allow a -1e-6 slack.
"""

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from . import field as fld
from .field import Field

DEFICIT_SLACK = -1e-6


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    trap: float
    angular_term: float     # 2*Omega*<L phi, phi>
    interaction: float      # (a/2) ||phi||_{L4}^4, stored positive
    total: float
    omega: float
    a: float


class NlsEnergy:
    """Energy evaluator bound to a fixed critical strength a_star."""

    def __init__(self, a_star: float):
        if a_star <= 0:
            raise ValueError("a_star must be positive")
        self.a_star = float(a_star)

    def _check_params(self, omega: float, a: float):
        if not 0.0 <= omega <= 1.0:
            raise ValueError("omega must lie in [0, 1]")
        if not 0.0 <= a < self.a_star:
            raise ValueError("a must lie in [0, a_star)")

    def energy(self, state: Field, omega: float, a: float) -> EnergyBreakdown:
        self._check_params(omega, a)
        obs = fld.observables(state)
        return self.energy_from_observables(obs, omega, a)

    def energy_from_observables(self, obs, omega: float, a: float) -> EnergyBreakdown:
        angular_term = 2.0 * omega * obs.angular
        interaction = 0.5 * a * obs.quartic
        total = obs.kinetic + obs.trap + angular_term - interaction
        return EnergyBreakdown(kinetic=obs.kinetic, trap=obs.trap,
                               angular_term=angular_term,
                               interaction=interaction, total=total,
                               omega=omega, a=a)

    def energy_gradient(self, state: Field, omega: float, a: float) -> Field:
        """Unconstrained L2 gradient -Delta phi + |x|^2 phi + 2 Omega L phi
        - a |phi|^2 phi."""
        self._check_params(omega, a)
        g = state.grid
        v = state.values
        phat = sfft.fft2(v, workers=fld.fft_workers())
        neg_lap = sfft.ifft2(g.K2 * phat, workers=fld.fft_workers())
        dpx = sfft.ifft2(1j * g.KX * phat, workers=fld.fft_workers())
        dpy = sfft.ifft2(1j * g.KY * phat, workers=fld.fft_workers())
        lphi = 1j * (g.Y * dpx - g.X * dpy)
        dens = v.real ** 2 + v.imag ** 2
        out = neg_lap + g.R2 * v + (2.0 * omega) * lphi - a * dens * v
        return Field(g, out)

    def lagrange_multiplier(self, state: Field, omega: float, a: float) -> float:
        """mu = <grad E(phi), phi> for unit-mass phi.

        Evaluated through the quadratic forms: kinetic + trap + 2 Omega
        angular - a ||phi||_{L4}^4; for a converged minimizer this equals
        E(phi) - (a/2)||phi||_{L4}^4.
        """
        self._check_params(omega, a)
        obs = fld.observables(state)
        return (obs.kinetic + obs.trap + 2.0 * omega * obs.angular
                - a * obs.quartic)

    def gn_deficit(self, state: Field) -> float:
        """||grad phi||^2 ||phi||^2 - (a_star/2) ||phi||_{L4}^4  (>= 0)."""
        obs = fld.observables(state)
        return obs.kinetic * obs.mass - 0.5 * self.a_star * obs.quartic

    def magnetic_gn_deficit(self, state: Field) -> float:
        """Same deficit with the Omega = 1 magnetic kinetic energy."""
        obs = fld.observables(state)
        mag = fld.magnetic_kinetic(state, 1.0)
        return mag * obs.mass - 0.5 * self.a_star * obs.quartic

    def diamagnetic_gap(self, state: Field) -> float:
        """||(-i grad + x_perp) phi|| - ||grad |phi| ||  (>= 0)."""
        mag = np.sqrt(fld.magnetic_kinetic(state, 1.0))
        grad_mod = 1.0 / fld.blowup_length(state)
        return float(mag - grad_mod)
