"""Radial ground-state profile of -Delta Q + Q - Q^3 = 0 and derived constants.

The positive decaying solution is found by bisection shooting on the central
amplitude Q(0): amplitudes that are too small produce trajectories that turn
back upward, amplitudes that are too large cross zero.  The integrated
profile is matched to the decaying far-field solution C*K0(r) (modified
Bessel) once Q is small enough that the cubic term is negligible, which
keeps the tail clean out to r_max where raw shooting would be destroyed by
the exponentially growing error mode.

All constants consumed by the blow-up asymptotics are computed here from the
profile by composite trapezoid quadrature with the 2*pi*r radial weight:

* ``a_star``    = ||Q||_{L2}^2, the critical interaction strength,
* ``x_moment``  = ||x Q0||_{L2} with Q0 = Q/||Q||,
* ``l4_norm4``  = ||Q0||_{L4}^4  (equals 2/a_star),
* ``grad_norm2``= ||grad Q0||_{L2}^2  (equals 1),

together with the scaling helpers ``beta_limit``, ``energy_ratio_limit`` and
``predicted_blowup_length`` used by the solver schedules and diagnostics.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import k0

from . import _kernels
from .field import Field, Grid2D

# Amplitude window over which the shot profile is least-squares matched and
# blended into the K0 tail.  Inside it the cubic term is O(1e-10) relative
# and the accumulated shooting error is still far below the local amplitude.
_MATCH_HI = 1e-5
_MATCH_LO = 1e-6
_TAIL_ZERO = 1e-10


class BracketFailure(Exception):
    """The bisection endpoints do not bracket the decaying solution."""


class DecayFailure(Exception):
    """The profile has not decayed below threshold at r_max."""


class QuadratureDivergence(Exception):
    """Radial quadrature tail beyond 0.9*r_max is not negligible."""


@dataclass(frozen=True)
class RadialProfile:
    """Q sampled on the uniform radial grid radii = [0, spacing, ..., r_max]."""

    radii: np.ndarray
    values: np.ndarray
    spacing: float
    r_max: float

    def validate(self):
        """Check the structural invariants; raises AssertionError on violation."""
        r, q = self.radii, self.values
        assert r[0] == 0.0 and np.all(np.diff(r) > 0) and r[-1] == self.r_max
        assert q[0] > 0.0
        assert np.all(np.diff(q) <= 0.0), "profile must decrease monotonically"
        assert q[-1] < 1e-8 * q[0], "profile tail has not decayed"
        # even reflection: one-sided 2nd-order slope at r = 0 vanishes
        slope0 = (4.0 * q[1] - 3.0 * q[0] - q[2]) / (2.0 * self.spacing)
        assert abs(slope0) < 1e-6 * q[0]

    def interpolator(self) -> CubicSpline:
        """Cubic spline of Q(r), clamped to Q'(0) = 0, zero beyond r_max."""
        return CubicSpline(self.radii, self.values,
                           bc_type=((1, 0.0), (1, 0.0)), extrapolate=False)


@dataclass(frozen=True)
class TownesConstants:
    a_star: float
    q0_center: float
    x_moment: float
    l4_norm4: float
    grad_norm2: float


def _classify(s: float, spacing: float, n_steps: int):
    return _kernels.shoot_classify(s, spacing, n_steps)


def _matching_window(radii, shot):
    """Indices of the amplitude window where the far-field match is valid.

    Candidates have amplitudes in [MATCH_LO/4, MATCH_HI]; they are kept
    only while the local logarithmic decay slope agrees with the far-field
    asymptote -(1 + 1/(2r)) to 5%, which cuts the window short once the
    exponentially growing shooting-error mode contaminates the tail
    (relevant for loose shoot_tol).
    """
    cand = np.nonzero((shot <= _MATCH_HI) & (shot >= 0.25 * _MATCH_LO))[0]
    if cand.size < 2:
        return cand
    slope = np.diff(np.log(shot[cand])) / np.diff(radii[cand])
    expected = -(1.0 + 1.0 / (2.0 * radii[cand[:-1]]))
    bad = np.nonzero(np.abs(slope - expected) > 0.05 * np.abs(expected))[0]
    stop = bad[0] if bad.size else slope.size
    return cand[:stop + 1]


def solve_townes(shoot_tol: float = 1e-12, r_max: float = 20.0,
                 spacing: float = 1e-4,
                 bracket: tuple = (1.5, 3.0)) -> RadialProfile:
    """Bisection shooting for the positive decaying radial profile.

    Parameters
    ----------
    shoot_tol : bisection width on the central amplitude (must be < 1e-6)
    r_max     : outer radius of the stored grid (>= 15)
    spacing   : radial step, also the RK4 step (<= 1e-3)
    bracket   : initial (low, high) amplitudes; low must produce a
                turning trajectory and high a zero-crossing one

    Raises BracketFailure if the bracket endpoints misclassify, and
    DecayFailure if the matched tail has not fallen below 1e-8 of the
    central value by r_max.
    """
    if not shoot_tol < 1e-6:
        raise ValueError("shoot_tol must be below 1e-6")
    if r_max < 15.0:
        raise ValueError("r_max must be at least 15")
    if spacing > 1e-3:
        raise ValueError("spacing must be at most 1e-3")

    n_steps = int(round(r_max / spacing))
    r_max = n_steps * spacing

    s_lo, s_hi = float(bracket[0]), float(bracket[1])
    code_lo, _ = _classify(s_lo, spacing, n_steps)
    code_hi, _ = _classify(s_hi, spacing, n_steps)
    if code_lo != _kernels.SHOT_TURNED or code_hi != _kernels.SHOT_CROSSED:
        raise BracketFailure(
            f"bracket ({s_lo}, {s_hi}) classified as ({code_lo}, {code_hi}); "
            "need (turned, crossed)")

    while s_hi - s_lo > shoot_tol:
        s_mid = 0.5 * (s_lo + s_hi)
        if s_mid == s_lo or s_mid == s_hi:
            break  # bisection hit floating-point resolution
        code, _ = _classify(s_mid, spacing, n_steps)
        if code == _kernels.SHOT_TURNED:
            s_lo = s_mid
        elif code == _kernels.SHOT_CROSSED:
            s_hi = s_mid
        else:
            s_lo = s_hi = s_mid  # clean decay all the way out
    s = 0.5 * (s_lo + s_hi)

    radii = np.arange(n_steps + 1) * spacing
    values = np.zeros(n_steps + 1)
    code, i_last = _kernels.shoot_profile(s, spacing, n_steps + 1,
                                          0.5 * _MATCH_LO, values)

    idx = _matching_window(radii, values[:i_last + 1])
    if idx.size < 8:
        raise DecayFailure(
            "integration left the tail-matching window too early "
            f"(classified {code}); decrease shoot_tol or spacing")
    rw = radii[idx]
    bessel = k0(rw)
    coeff = float(np.dot(values[idx], bessel) / np.dot(bessel, bessel))

    # smootherstep blend from the shot profile into coeff*K0 across the window
    t = np.clip((radii - rw[0]) / (rw[-1] - rw[0]), 0.0, 1.0)
    w_tail = t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    tail = coeff * k0(np.maximum(radii, spacing))
    merged = np.where(radii <= rw[-1],
                      (1.0 - w_tail) * values + w_tail * tail,
                      tail)
    merged[:idx[0]] = values[:idx[0]]
    merged[merged < _TAIL_ZERO] = 0.0

    if merged[-1] >= 1e-8 * merged[0]:
        raise DecayFailure(
            f"Q(r_max)/Q(0) = {merged[-1] / merged[0]:.3e} >= 1e-8; "
            "increase r_max")
    return RadialProfile(radii=radii, values=merged, spacing=spacing,
                         r_max=r_max)


def compute_constants(profile: RadialProfile) -> TownesConstants:
    """Quadrature of the profile moments with the 2*pi*r weight.

    The derivative entering ||grad Q0||^2 is taken by centered differences
    on the radial grid.  Raises QuadratureDivergence when the contribution
    of radii beyond 0.9*r_max to the mass or x-moment integrals exceeds
    1e-8 of the total.
    """
    r, q = profile.radii, profile.values
    mass_den = 2.0 * np.pi * r * q * q
    xmom_den = mass_den * r * r
    mass = float(np.trapezoid(mass_den, r))
    xmom2 = float(np.trapezoid(xmom_den, r))

    cut = r >= 0.9 * profile.r_max
    for den, total, name in ((mass_den, mass, "mass"),
                             (xmom_den, xmom2, "x-moment")):
        tail = float(np.trapezoid(den[cut], r[cut]))
        if tail > 1e-8 * total:
            raise QuadratureDivergence(
                f"{name} integral tail fraction {tail / total:.3e} beyond "
                "0.9*r_max exceeds 1e-8")

    a_star = mass
    dq = np.gradient(q, profile.spacing)
    grad2 = float(np.trapezoid(2.0 * np.pi * r * dq * dq, r)) / a_star
    l4 = float(np.trapezoid(2.0 * np.pi * r * q ** 4, r)) / a_star ** 2
    return TownesConstants(
        a_star=a_star,
        q0_center=float(q[0]) / np.sqrt(a_star),
        x_moment=float(np.sqrt(xmom2 / a_star)),
        l4_norm4=l4,
        grad_norm2=grad2,
    )


def sample_q0_on_grid(profile: RadialProfile, grid: Grid2D, center=(0.0, 0.0),
                      scale: float = 1.0) -> Field:
    """Sample scale*Q0(scale*|x - center|) on the grid, unit-mass normalized.

    Q0 = Q/||Q|| so the continuum mass of the scaled family is exactly 1;
    the grid renormalization only absorbs quadrature error.  Radii beyond
    the profile support evaluate to zero.
    """
    r, q = profile.radii, profile.values
    norm = np.sqrt(float(np.trapezoid(2.0 * np.pi * r * q * q, r)))
    spline = profile.interpolator()
    rr = scale * np.hypot(grid.X - center[0], grid.Y - center[1])
    vals = spline(rr)
    vals = np.where(np.isnan(vals), 0.0, vals) * (scale / norm)
    field = Field(grid, vals.astype(np.complex128))
    return field.normalized()


def beta_limit(constants: TownesConstants) -> float:
    """Limit of eps/(a_star - a)^{1/4}: a_star^{-1/4} ||xQ0||^{-1/2}."""
    return constants.a_star ** -0.25 * constants.x_moment ** -0.5


def energy_ratio_limit(constants: TownesConstants) -> float:
    """Limit of E/(a_star - a)^{1/2}: 2 ||xQ0|| / a_star^{1/2}."""
    return 2.0 * constants.x_moment / np.sqrt(constants.a_star)


def predicted_blowup_length(a: float, constants: TownesConstants) -> float:
    """Leading-order blow-up length beta * (a_star - a)^{1/4} at strength a."""
    if a >= constants.a_star:
        raise ValueError("a must be below a_star")
    return beta_limit(constants) * (constants.a_star - a) ** 0.25


def trial_energy_bound(a: float, constants: TownesConstants) -> float:
    """Scaled-profile variational bound 2 ||xQ0|| sqrt((a_star - a)/a_star)."""
    return 2.0 * constants.x_moment * np.sqrt(
        max(constants.a_star - a, 0.0) / constants.a_star)
