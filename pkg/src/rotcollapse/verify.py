"""Built-in verification battery behind the `verify` subcommand.

Each check recomputes a quantity with a known target and tolerance:
Pohozaev identities of the radial profile, spectral-calculus exactness,
the critical-rotation Gaussian identities, interpolation-inequality
deficits on randomized fields, functional-form agreement, the convex
Omega-split, finite-difference gradient consistency, magnetic translation
invariance, and (in the full battery) a short ground-state solve.

The rows print as a fixed-width table; the battery fails on the first
check whose value misses its target beyond tolerance.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import field as fld
from . import townes as tw
from .functional import NlsEnergy
from .minimizer import GroundStateSolver, SolverConfig


@dataclass
class CheckRow:
    name: str
    value: float
    target: float
    tol: float
    ok: bool


def _row(name, value, target, tol, mode="abs"):
    if mode == "abs":
        ok = abs(value - target) <= tol
    else:  # lower bound
        ok = value >= target - tol
    return CheckRow(name=name, value=float(value), target=float(target),
                    tol=float(tol), ok=bool(ok))


def run_verification(profile=None, constants=None, quick=False):
    """Run the battery; returns (exit_code, rows, elapsed_seconds)."""
    t_start = time.perf_counter()
    rows = []

    if profile is None:
        if quick:
            profile = tw.solve_townes(1e-10, 18.0, 5e-4)
        else:
            profile = tw.solve_townes()
    if constants is None:
        constants = tw.compute_constants(profile)
    model = NlsEnergy(constants.a_star)

    # Pohozaev identities recomputed against the injected a_star
    r, q = profile.radii, profile.values
    dq = np.gradient(q, profile.spacing)
    grad2 = float(np.trapezoid(2 * np.pi * r * dq * dq, r)) / constants.a_star
    l4 = float(np.trapezoid(2 * np.pi * r * q ** 4, r)) / constants.a_star ** 2
    rows.append(_row("pohozaev_grad", grad2, 1.0, 1e-5))
    rows.append(_row("pohozaev_l4", l4 * constants.a_star / 2.0, 1.0, 1e-5))

    if not quick:
        fine = tw.compute_constants(
            tw.solve_townes(1e-12, profile.r_max, profile.spacing / 2.0))
        rows.append(_row("a_star_refinement",
                         abs(fine.a_star - constants.a_star) / constants.a_star,
                         0.0, 1e-6))

    grid = fld.Grid2D(128, 8.0)

    # spectral calculus: plane-wave eigenrelation and Parseval
    kx, ky = grid.k[3], grid.k[-5]
    wave = fld.Field(grid, np.exp(1j * (kx * grid.X + ky * grid.Y)))
    gx, gy = fld.gradient(wave)
    err = max(np.max(np.abs(gx.values - 1j * kx * wave.values)),
              np.max(np.abs(gy.values - 1j * ky * wave.values)))
    rows.append(_row("plane_wave_gradient", err, 0.0, 1e-10))
    test = fld.random_smooth_field(grid, 11)
    rows.append(_row("parseval",
                     abs(fld.l2_norm_spectral(test) - np.sqrt(test.mass())),
                     0.0, 1e-12))

    gauss = fld.gaussian_field(grid)
    rows.append(_row("landau_gaussian_energy",
                     model.energy(gauss, 1.0, 0.0).total, 2.0, 1e-6))

    n_fields = 10 if quick else 40
    deficits = {"gn_deficit": [], "magnetic_gn_deficit": [], "diamagnetic_gap": []}
    form_err = 0.0
    split_err = 0.0
    for seed in range(n_fields):
        f = fld.random_smooth_field(grid, 1000 + seed)
        deficits["gn_deficit"].append(model.gn_deficit(f))
        deficits["magnetic_gn_deficit"].append(model.magnetic_gn_deficit(f))
        deficits["diamagnetic_gap"].append(model.diamagnetic_gap(f))
        for omega in (0.0, 0.5, 1.0):
            bd = model.energy(f, omega, 0.7 * constants.a_star)
            alt = (fld.magnetic_kinetic(f, omega)
                   + (1.0 - omega ** 2) * bd.trap - bd.interaction)
            form_err = max(form_err, abs(alt - bd.total) / abs(bd.total))
        e_mid = model.energy(f, 0.37, 0.7 * constants.a_star).total
        e_one = model.energy(f, 1.0, 0.7 * constants.a_star).total
        e_zer = model.energy(f, 0.0, 0.7 * constants.a_star).total
        split = 0.37 * e_one + 0.63 * e_zer
        split_err = max(split_err, abs(split - e_mid) / abs(e_mid))
    for name, vals in deficits.items():
        rows.append(_row(f"{name}_min", min(vals), 0.0, 1e-6, mode="lower"))
    rows.append(_row("form_agreement_rel", form_err, 0.0, 1e-9))
    rows.append(_row("convex_split_rel", split_err, 0.0, 1e-10))

    # directional finite differences against the analytic gradient
    base = fld.random_smooth_field(grid, 77)
    fd_err = 0.0
    for seed in range(3 if quick else 6):
        h = fld.random_smooth_field(grid, 500 + seed)
        g = model.energy_gradient(base, 0.6, 0.5 * constants.a_star)
        ip = 2.0 * float(np.sum(g.values.real * h.values.real
                                + g.values.imag * h.values.imag)
                         ) * grid.spacing ** 2
        delta = 1e-5
        ep = model.energy(fld.Field(grid, base.values + delta * h.values),
                          0.6, 0.5 * constants.a_star).total
        em = model.energy(fld.Field(grid, base.values - delta * h.values),
                          0.6, 0.5 * constants.a_star).total
        fd = (ep - em) / (2.0 * delta)
        fd_err = max(fd_err, abs(fd - ip) / max(abs(ip), 1e-30))
    rows.append(_row("gradient_fd_rel", fd_err, 0.0, 1e-5))

    shifted = fld.magnetic_translate(gauss, (0.8, -0.5))
    e0 = model.energy(gauss, 1.0, 0.6 * constants.a_star).total
    e1 = model.energy(shifted, 1.0, 0.6 * constants.a_star).total
    rows.append(_row("magnetic_translation_rel", abs(e1 - e0) / abs(e0),
                     0.0, 1e-8))

    if not quick:
        solver = GroundStateSolver(profile, constants)
        grid256 = fld.Grid2D(256, 8.0)
        res = solver.minimize(grid256, 1.0, 0.0,
                              fld.random_smooth_field(grid256, 5),
                              SolverConfig(grad_tol=1e-6, max_iters=6000))
        rows.append(_row("landau_ground_state", res.breakdown.total, 2.0, 1e-4))

    elapsed = time.perf_counter() - t_start
    code = 0 if all(r.ok for r in rows) else 1
    return code, rows, elapsed


def format_table(rows) -> str:
    lines = [f"{'check':<28} {'value':>14} {'target':>10} {'tol':>9}  status"]
    for r in rows:
        lines.append(f"{r.name:<28} {r.value:>14.6e} {r.target:>10.3g} "
                     f"{r.tol:>9.1e}  {'ok' if r.ok else 'FAIL'}")
    return "\n".join(lines)


def first_failure(rows):
    for r in rows:
        if not r.ok:
            return r.name
    return None
