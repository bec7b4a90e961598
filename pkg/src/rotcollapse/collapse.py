"""Blow-up diagnostics: rescaling, alignment and asymptotic quantities.

A converged minimizer phi at strength a close to a_star concentrates at the
blow-up length eps = 1/||grad |phi| ||.  It is compared against the
normalized radial profile Q0 after undoing the concentration:

    psi(x) = eps * phi(eps x + c) * exp(i eps c_perp . x),

with c the density centroid (the magnetic phase makes the map an isometry
of the critical-rotation energy), followed by the global phase theta that
minimizes ||e^{i theta} psi - Q0||_{L2}; the minimizer is closed-form,
theta = -arg <psi, Q0>, which also enforces the orthogonality
integral Q0 * Im(aligned) dx = 0.

The report collects the quantities whose limits the collapse asymptotics
pin down: eps^2 * mu -> -1, beta = eps/(a_star - a)^{1/4} ->
a_star^{-1/4} ||xQ0||^{-1/2}, E/(a_star - a)^{1/2} -> 2||xQ0||/a_star^{1/2},
the H1 size of the imaginary part (O(eps^2)), the exponentially weighted
decay integral of W = |psi|^2, and the rescaled angular momentum.
"""

from dataclasses import dataclass

import numpy as np

from . import field as fld
from .field import Field, ResampleOutOfDomain  # noqa: F401 (re-export)
from .functional import NlsEnergy
from .townes import TownesConstants


@dataclass(frozen=True)
class AlignedProfile:
    """Rescaled, magnetically translated, phase-fixed profile."""

    field: Field
    eps: float
    center: tuple
    theta: float


@dataclass(frozen=True)
class CollapseReport:
    omega: float
    a: float
    energy: float
    eps: float
    mu: float
    eps2_mu: float
    beta: float
    center_x: float
    center_y: float
    theta: float
    l2_dist_q0: float
    h1_dist_q0: float
    linf_dist_q0: float
    imag_h1: float
    imag_ratio: float
    energy_ratio: float
    decay_integral: float
    angular_rescaled: float
    mass: float

    CSV_COLUMNS = ("omega", "a", "energy", "eps", "mu", "eps2_mu", "beta",
                   "center_x", "center_y", "theta", "l2_dist_q0",
                   "h1_dist_q0", "linf_dist_q0", "imag_h1", "imag_ratio",
                   "energy_ratio", "decay_integral", "angular_rescaled",
                   "mass")


def rescale_and_align(state: Field, omega: float, a: float, q0_ref: Field,
                      constants: TownesConstants) -> AlignedProfile:
    """Map a minimizer onto the reference grid of q0_ref and align it.

    Raises ResampleOutOfDomain when the eps-window around the centroid does
    not fit inside the source grid.
    """
    eps = fld.blowup_length(state)
    c = fld.centroid(state)
    ref = q0_ref.grid
    vals = eps * fld.resample_affine(state, ref, eps, c, out_of_domain="raise")
    vals *= np.exp(1j * eps * (-c[1] * ref.X + c[0] * ref.Y))
    psi = Field(ref, vals).normalized()

    ip = complex(np.sum(psi.values * q0_ref.values.real) * ref.spacing ** 2)
    theta = float(-np.angle(ip)) % (2.0 * np.pi)
    if theta >= 2.0 * np.pi:  # roundoff wrap of arguments just below 0
        theta = 0.0
    aligned = Field(ref, psi.values * np.exp(1j * theta))
    return AlignedProfile(field=aligned, eps=eps,
                          center=(float(c[0]), float(c[1])), theta=theta)


def h1_norm(state: Field) -> float:
    """||u||_{H1} = sqrt(||u||^2 + ||grad u||^2), gradient spectral."""
    gx, gy = fld.gradient(state)
    w = state.grid.spacing ** 2
    tot = np.sum(state.values.real ** 2 + state.values.imag ** 2)
    tot += np.sum(gx.values.real ** 2 + gx.values.imag ** 2)
    tot += np.sum(gy.values.real ** 2 + gy.values.imag ** 2)
    return float(np.sqrt(tot * w))


def imaginary_part_check(aligned: AlignedProfile):
    """H1 norm of the imaginary part and its ratio to eps^2."""
    r = Field(aligned.field.grid,
              aligned.field.values.imag.astype(np.complex128))
    imag_h1 = h1_norm(r)
    return imag_h1, imag_h1 / aligned.eps ** 2


def decay_profile(aligned: AlignedProfile, alpha: float) -> float:
    """Integral of W^2 e^{alpha |x|} with W = |field|^2 on the rescaled grid.

    The weight is truncated where W < 1e-14 so the exponential cannot
    amplify roundoff in the far tail.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    g = aligned.field.grid
    w2 = (aligned.field.values.real ** 2 + aligned.field.values.imag ** 2) ** 2
    weight = np.exp(alpha * np.sqrt(g.R2))
    w2 = np.where(w2 < (1e-14) ** 2, 0.0, w2)
    return float(np.sum(w2 * weight) * g.spacing ** 2)


def diagnostics(aligned: AlignedProfile, state: Field, omega: float, a: float,
                q0_ref: Field, model: NlsEnergy,
                constants: TownesConstants) -> CollapseReport:
    """Fill the per-point report from the source field and its alignment."""
    energy = model.energy(state, omega, a).total
    mu = model.lagrange_multiplier(state, omega, a)
    eps = aligned.eps
    gap = constants.a_star - a
    diff = Field(aligned.field.grid, aligned.field.values - q0_ref.values)
    l2 = np.sqrt(float(np.sum(diff.values.real ** 2 + diff.values.imag ** 2))
                 * diff.grid.spacing ** 2)
    imag_h1, imag_ratio = imaginary_part_check(aligned)
    return CollapseReport(
        omega=omega, a=a, energy=energy, eps=eps, mu=mu,
        eps2_mu=eps ** 2 * mu,
        beta=eps / gap ** 0.25,
        center_x=aligned.center[0], center_y=aligned.center[1],
        theta=aligned.theta,
        l2_dist_q0=float(l2),
        h1_dist_q0=h1_norm(diff),
        linf_dist_q0=float(np.max(np.abs(diff.values))),
        imag_h1=imag_h1, imag_ratio=imag_ratio,
        energy_ratio=float(energy / np.sqrt(gap)),
        decay_integral=decay_profile(aligned, 1.0),
        angular_rescaled=fld.angular_momentum_expectation(aligned.field),
        mass=state.mass(),
    )
