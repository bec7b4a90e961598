"""Orchestration of the limiting experiments over (Omega, a) schedules.

A plan is a single warm-start chain: points are solved in schedule order,
each initialized from the previous minimizer dilated by the predicted
blow-up ratio.  Grids follow the predicted length scale
eps_hat = beta * (a_star - a)^{1/4}; a point that fails its solve is
retried once on the next grid level (doubled n) and flagged if it fails
again.  The sweep aborts only when more than 20% of its points fail.

Three canonical schedules reproduce the collapse phenomenology: Omega = 1
fixed with a increasing toward a_star, the Omega = 0 reference, and the
joint schedule Omega_n = 1 - c (a_star - a_n)^kappa approaching the
critical rotation together with the critical strength.

Artifacts (when out_dir is given): ``reports.csv`` with one row per point
in the documented column order, ``fits.json`` with the log-log rate fits,
log-log SVG plots of energy_ratio, eps and |eps^2 mu| against a_star - a,
and optional per-point F2D1 snapshots.
"""

import dataclasses
import json
import os
from dataclasses import dataclass

import numpy as np

from . import field as fld
from .collapse import CollapseReport, diagnostics, rescale_and_align
from .field import Grid2D
from .minimizer import (DomainInadequate, GroundStateSolver, NonConvergence,
                        SolverConfig)
from .townes import (RadialProfile, TownesConstants, predicted_blowup_length,
                     sample_q0_on_grid)

REFERENCE_GRID_N = 256
REFERENCE_GRID_EXTENT = 8.0

CSV_COLUMNS = CollapseReport.CSV_COLUMNS + ("converged", "n", "extent",
                                            "iters", "error")


class InsufficientPoints(Exception):
    """Rate fitting needs >= 4 converged points spanning >= 1.5 decades."""


class SweepFailed(Exception):
    """More than 20% of the sweep points failed to converge."""


@dataclass(frozen=True)
class SweepPlan:
    """Schedules are broadcast: equal length, or one of them a singleton."""

    omega_schedule: tuple
    a_schedule: tuple
    grid_policy: tuple | None = None   # ((eps_min, n, extent), ...) or None
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "omega_schedule",
                           tuple(float(w) for w in self.omega_schedule))
        object.__setattr__(self, "a_schedule",
                           tuple(float(a) for a in self.a_schedule))
        n_o, n_a = len(self.omega_schedule), len(self.a_schedule)
        if n_o != n_a and 1 not in (n_o, n_a):
            raise ValueError("schedules must have equal length or broadcast")
        if any(not 0.0 <= w <= 1.0 for w in self.omega_schedule):
            raise ValueError("omega values must lie in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def points(self):
        n = max(len(self.omega_schedule), len(self.a_schedule))
        om = self.omega_schedule * n if len(self.omega_schedule) == 1 \
            else self.omega_schedule
        aa = self.a_schedule * n if len(self.a_schedule) == 1 \
            else self.a_schedule
        return list(zip(om, aa))


@dataclass(frozen=True)
class RateFit:
    quantity: str
    exponent: float
    prefactor: float
    r_squared: float


@dataclass
class SweepRecord:
    """Per-point outcome: diagnostics plus solver bookkeeping."""

    omega: float
    a: float
    report: CollapseReport | None
    converged: bool
    n: int
    extent: float
    iters: int
    error: str = ""


def default_grid_for(eps: float):
    """Grid level for a predicted blow-up length: spacing <= eps/8 and an
    extent holding both the trap scale and the scaled profile tail."""
    extent = max(6.0, 15.0 * eps)
    n = 64
    while 2.0 * extent / n > eps / 8.0 and n < 4096:
        n *= 2
    return n, extent


def _grid_for(plan: SweepPlan, eps: float):
    if plan.grid_policy is None:
        return default_grid_for(eps)
    levels = sorted(plan.grid_policy, key=lambda lv: -lv[0])
    for eps_min, n, extent in levels:
        if eps >= eps_min:
            return int(n), float(extent)
    raise ValueError(f"grid policy does not cover predicted eps {eps:.4g}")


def joint_omega_schedule(a_schedule, constants: TownesConstants,
                         c: float = 1.0, kappa: float = 0.5):
    """Omega_n = 1 - c (a_star - a_n)^kappa, clipped into [0, 1]."""
    return tuple(min(1.0, max(0.0, 1.0 - c * (constants.a_star - a) ** kappa))
                 for a in a_schedule)


def run_sweep(plan: SweepPlan, profile: RadialProfile,
              constants: TownesConstants, out_dir=None,
              base_config: SolverConfig | None = None,
              save_snapshots: bool = False):
    """Solve every point of the plan and return the list of SweepRecords."""
    plan.points()  # validates broadcast early
    for a in plan.a_schedule:
        if not 0.0 <= a < constants.a_star:
            raise ValueError("a_schedule must lie in [0, a_star)")

    solver = GroundStateSolver(profile, constants)
    base = base_config or SolverConfig()
    ref_grid = Grid2D(REFERENCE_GRID_N, REFERENCE_GRID_EXTENT)
    q0_ref = sample_q0_on_grid(profile, ref_grid, (0.0, 0.0), 1.0)

    fld.set_fft_cap(plan.workers if plan.workers > 0 else None)
    records = []
    prev = None
    try:
        for omega, a in plan.points():
            eps_hat = predicted_blowup_length(a, constants)
            n, extent = _grid_for(plan, eps_hat)
            record, result = _solve_point(solver, omega, a, n, extent,
                                          eps_hat, base, prev, q0_ref,
                                          constants)
            records.append(record)
            if result is not None:
                prev = result
            if save_snapshots and out_dir and result is not None:
                os.makedirs(out_dir, exist_ok=True)
                fld.write_f2d1(result.field, os.path.join(
                    out_dir, f"point_{len(records) - 1:03d}.f2d1"))
    finally:
        fld.set_fft_cap(None)

    n_fail = sum(not r.converged for r in records)
    if n_fail > 0.2 * len(records):
        raise SweepFailed(f"{n_fail}/{len(records)} points failed")

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_reports_csv(records, os.path.join(out_dir, "reports.csv"))
        _write_fits_json(records, constants, os.path.join(out_dir, "fits.json"))
        write_plots(records, constants, out_dir)
    return records


def _solve_point(solver, omega, a, n, extent, eps_hat, base, prev, q0_ref,
                 constants):
    """One point with a single automatic retry on the next grid level."""
    last_error = ""
    for attempt, n_try in enumerate((n, 2 * n)):
        grid = Grid2D(n_try, extent)
        init = solver.rescaled_init(prev, a, grid) if prev is not None else None
        config = dataclasses.replace(
            base, grad_tol=base.grad_tol * max(1.0, eps_hat ** -2))
        try:
            result = solver.minimize(grid, omega, a, init, config)
            converged = True
        except NonConvergence as exc:
            result = exc.result
            converged = False
            last_error = str(exc)
        except DomainInadequate as exc:
            last_error = str(exc)
            if attempt == 0:
                continue
            return SweepRecord(omega=omega, a=a, report=None, converged=False,
                               n=n_try, extent=extent, iters=0,
                               error=last_error), None
        aligned = rescale_and_align(result.field, omega, a, q0_ref, constants)
        report = diagnostics(aligned, result.field, omega, a, q0_ref,
                             solver.energy_model, constants)
        record = SweepRecord(omega=omega, a=a, report=report,
                             converged=converged, n=n_try, extent=extent,
                             iters=result.iters, error=last_error)
        return record, (result if converged else None)
    raise AssertionError("unreachable")


def fit_rate(records, quantity: str, constants: TownesConstants) -> RateFit:
    """Least-squares fit of log |quantity| against log(a_star - a)."""
    reports = []
    for rec in records:
        if isinstance(rec, CollapseReport):
            reports.append(rec)
        elif rec.converged and rec.report is not None:
            reports.append(rec.report)
    xs = np.array([constants.a_star - rep.a for rep in reports])
    ys = np.array([abs(getattr(rep, quantity)) for rep in reports])
    if len(xs) < 4:
        raise InsufficientPoints(f"{len(xs)} converged points, need >= 4")
    span = np.log10(xs.max() / xs.min())
    if span < 1.5:
        raise InsufficientPoints(
            f"a_star - a spans {span:.2f} decades, need >= 1.5")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-30 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(quantity=quantity, exponent=float(slope),
                   prefactor=float(np.exp(intercept)), r_squared=r2)


def upper_bound_curve(a_schedule, constants: TownesConstants):
    """Variational bound 2 ||xQ0|| a_star^{-1/2} (a_star - a)^{1/2}."""
    aa = np.asarray(a_schedule, dtype=float)
    return (2.0 * constants.x_moment / np.sqrt(constants.a_star)
            * np.sqrt(np.maximum(constants.a_star - aa, 0.0)))


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def records_to_csv(records) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        row = []
        for col in CollapseReport.CSV_COLUMNS:
            row.append(_format(getattr(rec.report, col)) if rec.report
                       else "nan")
        row += [_format(rec.converged), str(rec.n), _format(rec.extent),
                str(rec.iters), rec.error.replace(",", ";")]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_reports_csv(records, path):
    with open(path, "w") as fh:
        fh.write(records_to_csv(records))


def _write_fits_json(records, constants, path):
    fits = {}
    for quantity in ("energy", "eps"):
        try:
            fit = fit_rate(records, quantity, constants)
            fits[quantity] = dataclasses.asdict(fit)
        except InsufficientPoints as exc:
            fits[quantity] = {"error": str(exc)}
    with open(path, "w") as fh:
        json.dump(fits, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_plots(records, constants: TownesConstants, out_dir):
    """Self-contained SVG log-log plots against a_star - a."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    good = [r for r in records if r.converged and r.report]
    if not good:
        return
    gaps = [constants.a_star - r.a for r in good]
    series = (("energy_ratio", lambda rep: rep.energy_ratio),
              ("eps", lambda rep: rep.eps),
              ("eps2_mu", lambda rep: abs(rep.eps2_mu)))
    for name, pick in series:
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(gaps, [pick(r.report) for r in good], "o-")
        ax.set_xlabel("a_star - a")
        ax.set_ylabel("|%s|" % name if name == "eps2_mu" else name)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(os.path.join(out_dir, f"{name}.svg"))
        plt.close(fig)
