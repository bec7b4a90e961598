"""Hot numeric kernels with numba and pure-NumPy twins.

Two families live here:

* the radial shooting integrator (a long sequential scalar loop, where the
  compiled path is worth ~100x), and
* the fused pointwise kernels of the 2D gradient flow (explicit operator
  terms, grid observables, the semi-implicit spectral update).

Public names (``shoot_classify``, ``shoot_profile``, ``explicit_terms_rot``,
``explicit_terms_norot``, ``observables_rot``, ``observables_norot``,
``spectral_step``) are bound to one backend at import time; see ``_accel``.
All reductions use a fixed sequential/pairwise order, so results are
deterministic for a given backend.
"""

import numpy as np

from ._accel import NUMBA_ENABLED, jit_kernel

# Shooting classification codes.
SHOT_DECAYING = 0   # still positive and decreasing at the last node
SHOT_TURNED = 1     # turned upward while positive: amplitude too small
SHOT_CROSSED = 2    # crossed zero: amplitude too large


def _shoot_classify_loop(s, h, n_steps):
    """Integrate q'' + q'/r - q + q^3 = 0 outward from q(0)=s, q'(0)=0.

    Fixed-step RK4 on the (q, q') system with nodes at r = i*h,
    i = 0..n_steps.  The first node off the origin is seeded with the
    even-series expansion q(r) = s + c2 r^2 + c4 r^4 (regularity at r=0).
    Returns (code, i_stop) where code is one of the SHOT_* constants and
    i_stop the node index at which the trajectory was classified.
    """
    c2 = 0.25 * (s - s * s * s)
    c4 = (1.0 - 3.0 * s * s) * c2 / 16.0
    q = s + c2 * h * h + c4 * h * h * h * h
    p = 2.0 * c2 * h + 4.0 * c4 * h * h * h
    if q <= 0.0:
        return SHOT_CROSSED, 1
    for i in range(1, n_steps):
        r = i * h
        rm = r + 0.5 * h
        r1 = r + h
        k1q = p
        k1p = q - q * q * q - p / r
        q2 = q + 0.5 * h * k1q
        p2 = p + 0.5 * h * k1p
        k2q = p2
        k2p = q2 - q2 * q2 * q2 - p2 / rm
        q3 = q + 0.5 * h * k2q
        p3 = p + 0.5 * h * k2p
        k3q = p3
        k3p = q3 - q3 * q3 * q3 - p3 / rm
        q4 = q + h * k3q
        p4 = p + h * k3p
        k4q = p4
        k4p = q4 - q4 * q4 * q4 - p4 / r1
        q = q + h * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
        p = p + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        if q <= 0.0:
            return SHOT_CROSSED, i + 1
        if p >= 0.0:
            return SHOT_TURNED, i + 1
    return SHOT_DECAYING, n_steps


def _shoot_profile_loop(s, h, n_nodes, stop_q, q_out):
    """Same integration as _shoot_classify_loop but recording every node.

    Writes q into q_out[0:n_nodes] and stops early once q < stop_q (tail is
    handled analytically by the caller).  Returns (code, i_last) with i_last
    the last node written.
    """
    c2 = 0.25 * (s - s * s * s)
    c4 = (1.0 - 3.0 * s * s) * c2 / 16.0
    q = s + c2 * h * h + c4 * h * h * h * h
    p = 2.0 * c2 * h + 4.0 * c4 * h * h * h
    q_out[0] = s
    q_out[1] = q
    for i in range(1, n_nodes - 1):
        r = i * h
        rm = r + 0.5 * h
        r1 = r + h
        k1q = p
        k1p = q - q * q * q - p / r
        q2 = q + 0.5 * h * k1q
        p2 = p + 0.5 * h * k1p
        k2q = p2
        k2p = q2 - q2 * q2 * q2 - p2 / rm
        q3 = q + 0.5 * h * k2q
        p3 = p + 0.5 * h * k2p
        k3q = p3
        k3p = q3 - q3 * q3 * q3 - p3 / rm
        q4 = q + h * k3q
        p4 = p + h * k3p
        k4q = p4
        k4p = q4 - q4 * q4 * q4 - p4 / r1
        q = q + h * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
        p = p + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        q_out[i + 1] = q
        if q <= 0.0:
            return SHOT_CROSSED, i + 1
        if p >= 0.0:
            return SHOT_TURNED, i + 1
        if q < stop_q:
            return SHOT_DECAYING, i + 1
    return SHOT_DECAYING, n_nodes - 1


def _explicit_terms_rot_loop(phi, dpx, dpy, x, y, trap_coef, two_omega, a, out):
    """out = trap_coef*|x|^2*phi + two_omega*L(phi) - a*|phi|^2*phi.

    L(phi) = i*(x2 d1 - x1 d2) phi, assembled from the precomputed spectral
    derivatives dpx = d1 phi, dpy = d2 phi.
    """
    n0 = phi.shape[0]
    n1 = phi.shape[1]
    for i in range(n0):
        xi = x[i]
        for j in range(n1):
            yj = y[j]
            ph = phi[i, j]
            dens = ph.real * ph.real + ph.imag * ph.imag
            lphi = 1j * (yj * dpx[i, j] - xi * dpy[i, j])
            out[i, j] = (trap_coef * (xi * xi + yj * yj) - a * dens) * ph \
                + two_omega * lphi
    return out


def _explicit_terms_rot_numpy(phi, dpx, dpy, x, y, trap_coef, two_omega, a, out):
    r2 = x[:, None] ** 2 + y[None, :] ** 2
    dens = phi.real ** 2 + phi.imag ** 2
    np.multiply(trap_coef * r2 - a * dens, phi, out=out)
    out += (1j * two_omega) * (y[None, :] * dpx - x[:, None] * dpy)
    return out


def _explicit_terms_norot_loop(phi, x, y, trap_coef, a, out):
    """out = trap_coef*|x|^2*phi - a*|phi|^2*phi (Omega = 0 path)."""
    n0 = phi.shape[0]
    n1 = phi.shape[1]
    for i in range(n0):
        xi = x[i]
        for j in range(n1):
            yj = y[j]
            ph = phi[i, j]
            dens = ph.real * ph.real + ph.imag * ph.imag
            out[i, j] = (trap_coef * (xi * xi + yj * yj) - a * dens) * ph
    return out


def _explicit_terms_norot_numpy(phi, x, y, trap_coef, a, out):
    r2 = x[:, None] ** 2 + y[None, :] ** 2
    dens = phi.real ** 2 + phi.imag ** 2
    np.multiply(trap_coef * r2 - a * dens, phi, out=out)
    return out


def _observables_rot_loop(phi, dpx, dpy, x, y):
    """Raw grid sums (mass, kinetic, trap, angular, quartic), no dx^2 weight.

    angular is the current-form expectation sum over x_perp . Im(conj(phi) grad phi),
    with x_perp = (-x2, x1).
    """
    n0 = phi.shape[0]
    n1 = phi.shape[1]
    mass = 0.0
    kin = 0.0
    trap = 0.0
    ang = 0.0
    quart = 0.0
    for i in range(n0):
        xi = x[i]
        for j in range(n1):
            yj = y[j]
            ph = phi[i, j]
            gx = dpx[i, j]
            gy = dpy[i, j]
            dens = ph.real * ph.real + ph.imag * ph.imag
            mass += dens
            kin += gx.real * gx.real + gx.imag * gx.imag \
                + gy.real * gy.real + gy.imag * gy.imag
            trap += (xi * xi + yj * yj) * dens
            imx = ph.real * gx.imag - ph.imag * gx.real
            imy = ph.real * gy.imag - ph.imag * gy.real
            ang += -yj * imx + xi * imy
            quart += dens * dens
    return mass, kin, trap, ang, quart


def _observables_rot_numpy(phi, dpx, dpy, x, y):
    dens = phi.real ** 2 + phi.imag ** 2
    mass = float(np.sum(dens))
    kin = float(np.sum(dpx.real ** 2 + dpx.imag ** 2 + dpy.real ** 2 + dpy.imag ** 2))
    r2 = x[:, None] ** 2 + y[None, :] ** 2
    trap = float(np.sum(r2 * dens))
    imx = phi.real * dpx.imag - phi.imag * dpx.real
    imy = phi.real * dpy.imag - phi.imag * dpy.real
    ang = float(np.sum(-y[None, :] * imx + x[:, None] * imy))
    quart = float(np.sum(dens ** 2))
    return mass, kin, trap, ang, quart


def _observables_norot_loop(phi, x, y):
    """Raw grid sums (mass, trap, quartic) for the Omega = 0 path."""
    n0 = phi.shape[0]
    n1 = phi.shape[1]
    mass = 0.0
    trap = 0.0
    quart = 0.0
    for i in range(n0):
        xi = x[i]
        for j in range(n1):
            yj = y[j]
            ph = phi[i, j]
            dens = ph.real * ph.real + ph.imag * ph.imag
            mass += dens
            trap += (xi * xi + yj * yj) * dens
            quart += dens * dens
    return mass, trap, quart


def _observables_norot_numpy(phi, x, y):
    dens = phi.real ** 2 + phi.imag ** 2
    mass = float(np.sum(dens))
    r2 = x[:, None] ** 2 + y[None, :] ** 2
    trap = float(np.sum(r2 * dens))
    quart = float(np.sum(dens ** 2))
    return mass, trap, quart


def _spectral_step_loop(phat, nhat, k2, tau, mu, out):
    """out = ((1 + tau*mu)*phat - tau*nhat) / (1 + tau*k2).

    Backward-Euler step on the Laplacian with the multiplier shift mu, so
    that Euler-Lagrange eigenfunctions are exact fixed points of the
    projected update for any step size.
    """
    n0 = phat.shape[0]
    n1 = phat.shape[1]
    c = 1.0 + tau * mu
    for i in range(n0):
        for j in range(n1):
            out[i, j] = (c * phat[i, j] - tau * nhat[i, j]) \
                / (1.0 + tau * k2[i, j])
    return out


def _spectral_step_numpy(phat, nhat, k2, tau, mu, out):
    np.subtract((1.0 + tau * mu) * phat, tau * nhat, out=out)
    out /= 1.0 + tau * k2
    return out


if NUMBA_ENABLED:
    shoot_classify = jit_kernel(_shoot_classify_loop)
    shoot_profile = jit_kernel(_shoot_profile_loop)
    explicit_terms_rot = jit_kernel(_explicit_terms_rot_loop)
    explicit_terms_norot = jit_kernel(_explicit_terms_norot_loop)
    observables_rot = jit_kernel(_observables_rot_loop)
    observables_norot = jit_kernel(_observables_norot_loop)
    spectral_step = jit_kernel(_spectral_step_loop)
else:
    shoot_classify = _shoot_classify_loop
    shoot_profile = _shoot_profile_loop
    explicit_terms_rot = _explicit_terms_rot_numpy
    explicit_terms_norot = _explicit_terms_norot_numpy
    observables_rot = _observables_rot_numpy
    observables_norot = _observables_norot_numpy
    spectral_step = _spectral_step_numpy
