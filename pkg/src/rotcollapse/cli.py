"""rotc: command-line driver.

Subcommands: ``townes`` (radial profile and constants), ``minimize`` (one
ground state), ``diagnose`` (collapse report of a stored field), ``sweep``
(a schedule of points with CSV/fits/plots), ``verify`` (the built-in check
battery).

Configuration is a flat JSON file of dotted keys scoped by subcommand,
e.g. ``{"minimize.omega": 1.0, "minimize.a_frac": 0.9}``; command-line
flags override file values, unknown keys are rejected.  Exit codes:
0 ok, 1 verification failure, 2 usage, 3 numerical failure.
"""

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import field as fld
from . import townes as tw
from . import verify as ver
from .collapse import diagnostics, rescale_and_align
from .field import Grid2D, ResampleOutOfDomain, SupportClipped
from .functional import NlsEnergy
from .minimizer import (DomainInadequate, GroundStateSolver, NonConvergence,
                        SolverConfig)
from .sweep import (REFERENCE_GRID_EXTENT, REFERENCE_GRID_N, SweepFailed,
                    SweepPlan, joint_omega_schedule, run_sweep)

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


CONFIG_KEYS = {
    "townes": {"shoot_tol": float, "r_max": float, "spacing": float,
               "json": str, "profile_csv": str},
    "minimize": {"omega": float, "a_frac": float, "n": int, "extent": float,
                 "tol": float, "max_iters": int, "out": str, "report": str,
                 "seed": int, "step": float},
    "diagnose": {"field": str, "omega": float, "a_frac": float, "json": str},
    "sweep": {"plan": str, "out": str, "snapshots": bool},
    "verify": {"quick": bool},
}

_TOWNES_DEFAULTS = {"shoot_tol": 1e-12, "r_max": 20.0, "spacing": 1e-4}


def parse_config(subcommand: str, cli_values: dict, config_path=None) -> dict:
    """Merge file values (keys ``<subcommand>.<name>``) with CLI overrides."""
    known = CONFIG_KEYS[subcommand]
    merged = {}
    if config_path:
        with open(config_path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a flat JSON object")
        for key, value in raw.items():
            scope, _, name = key.partition(".")
            name = name.replace("-", "_")
            if scope not in CONFIG_KEYS or not name:
                raise UsageError(f"unknown config key: {key}")
            if name not in CONFIG_KEYS[scope]:
                raise UsageError(f"unknown config key: {key}")
            if scope == subcommand:
                merged[name] = CONFIG_KEYS[scope][name](value)
    for name, value in cli_values.items():
        if value is not None:
            merged[name] = known[name](value)
    return merged


def serialize_config(subcommand: str, values: dict) -> dict:
    """Inverse of parse_config: flat dotted-key object."""
    return {f"{subcommand}.{name}": value for name, value in values.items()}


def _validate_point(cfg):
    omega = cfg.get("omega", 0.0)
    a_frac = cfg.get("a_frac", 0.0)
    if not 0.0 <= omega <= 1.0:
        raise UsageError(f"omega = {omega}: must lie in [0, 1] "
                         "(no ground states above the critical rotation)")
    if not 0.0 <= a_frac < 1.0:
        raise UsageError(f"a-frac = {a_frac}: a must be below a*")
    return omega, a_frac


def _townes_setup(cfg=None):
    cfg = {**_TOWNES_DEFAULTS, **(cfg or {})}
    profile = tw.solve_townes(cfg["shoot_tol"], cfg["r_max"], cfg["spacing"])
    return profile, tw.compute_constants(profile)


def cmd_townes(cfg) -> int:
    profile, constants = _townes_setup(cfg)
    payload = dict(dataclasses.asdict(constants),
                   r_max=profile.r_max, spacing=profile.spacing)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if cfg.get("json"):
        with open(cfg["json"], "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if cfg.get("profile_csv"):
        np.savetxt(cfg["profile_csv"],
                   np.column_stack([profile.radii, profile.values]),
                   delimiter=",", header="r,Q", comments="")
    return EXIT_OK


def cmd_minimize(cfg) -> int:
    omega, a_frac = _validate_point(cfg)
    try:
        grid = Grid2D(int(cfg.get("n", 256)), float(cfg.get("extent", 8.0)))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    profile, constants = _townes_setup()
    a = a_frac * constants.a_star
    solver = GroundStateSolver(profile, constants)
    config = SolverConfig(grad_tol=float(cfg.get("tol", 1e-6)),
                          max_iters=int(cfg.get("max_iters", 20000)),
                          step=cfg.get("step"))
    init = solver.default_init(grid, a, seed=cfg.get("seed"))
    converged = True
    try:
        result = solver.minimize(grid, omega, a, init, config)
    except NonConvergence as exc:
        result = exc.result
        converged = False
        print(f"warning: {exc}", file=sys.stderr)
    except (DomainInadequate, SupportClipped) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if cfg.get("out"):
        fld.write_f2d1(result.field, cfg["out"])
    report = {
        "omega": omega, "a": a, "a_frac": a_frac,
        "n": grid.n, "extent": grid.extent,
        "energy": dataclasses.asdict(result.breakdown),
        "mu": result.mu, "residual": result.residual,
        "iters": result.iters, "converged": result.converged,
        "eps": fld.blowup_length(result.field),
        "elapsed": result.elapsed,
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if cfg.get("report"):
        with open(cfg["report"], "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if converged else EXIT_NUMERICAL


def cmd_diagnose(cfg) -> int:
    omega, a_frac = _validate_point(cfg)
    if not cfg.get("field"):
        raise UsageError("diagnose requires --field")
    state = fld.read_f2d1(cfg["field"])
    profile, constants = _townes_setup()
    a = a_frac * constants.a_star
    ref = Grid2D(REFERENCE_GRID_N, REFERENCE_GRID_EXTENT)
    q0_ref = tw.sample_q0_on_grid(profile, ref, (0.0, 0.0), 1.0)
    try:
        aligned = rescale_and_align(state, omega, a, q0_ref, constants)
    except ResampleOutOfDomain as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    report = diagnostics(aligned, state, omega, a, q0_ref,
                         NlsEnergy(constants.a_star), constants)
    text = json.dumps(dataclasses.asdict(report), indent=2, sort_keys=True)
    if cfg.get("json"):
        with open(cfg["json"], "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _plan_from_json(path, constants) -> tuple:
    with open(path) as fh:
        raw = json.load(fh)
    known = {"omega_schedule", "a_frac_schedule", "a_schedule", "joint",
             "joint_c", "joint_kappa", "grid_policy", "workers", "seed",
             "grad_tol", "max_iters"}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"unknown plan keys: {sorted(unknown)}")

    if "a_schedule" in raw:
        a_schedule = tuple(float(a) for a in raw["a_schedule"])
    elif "a_frac_schedule" in raw:
        fracs = raw["a_frac_schedule"]
        if any(not 0.0 <= f < 1.0 for f in fracs):
            raise UsageError("a must be below a*")
        a_schedule = tuple(f * constants.a_star for f in fracs)
    else:
        raise UsageError("plan needs a_schedule or a_frac_schedule")

    if raw.get("joint"):
        omega_schedule = joint_omega_schedule(
            a_schedule, constants, c=float(raw.get("joint_c", 1.0)),
            kappa=float(raw.get("joint_kappa", 0.5)))
    else:
        om = raw.get("omega_schedule", 0.0)
        omega_schedule = tuple(float(w) for w in om) \
            if isinstance(om, (list, tuple)) else (float(om),)
    if any(not 0.0 <= w <= 1.0 for w in omega_schedule):
        raise UsageError("omega values must lie in [0, 1] "
                         "(no ground states above the critical rotation)")

    grid_policy = raw.get("grid_policy")
    if grid_policy is not None:
        grid_policy = tuple((float(e), int(n), float(x))
                            for e, n, x in grid_policy)
    plan = SweepPlan(omega_schedule=omega_schedule, a_schedule=a_schedule,
                     grid_policy=grid_policy,
                     workers=int(raw.get("workers", 1)),
                     seed=int(raw.get("seed", 0)))
    config = SolverConfig(grad_tol=float(raw.get("grad_tol", 1e-5)),
                          max_iters=int(raw.get("max_iters", 20000)))
    return plan, config


def cmd_sweep(cfg) -> int:
    if not cfg.get("plan") or not cfg.get("out"):
        raise UsageError("sweep requires --plan and --out")
    profile, constants = _townes_setup()
    plan, config = _plan_from_json(cfg["plan"], constants)
    try:
        records = run_sweep(plan, profile, constants, out_dir=cfg["out"],
                            base_config=config,
                            save_snapshots=bool(cfg.get("snapshots")))
    except SweepFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    n_ok = sum(r.converged for r in records)
    print(f"sweep complete: {n_ok}/{len(records)} points converged, "
          f"artifacts in {cfg['out']}")
    return EXIT_OK


def cmd_verify(cfg) -> int:
    code, rows, elapsed = ver.run_verification(quick=bool(cfg.get("quick")))
    print(ver.format_table(rows))
    print(f"elapsed: {elapsed:.1f}s")
    if code != 0:
        print(f"FAILED: {ver.first_failure(rows)}")
        return EXIT_CHECK_FAILURE
    print("all checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotc",
        description="Ground states and collapse diagnostics of the "
                    "2D attractive NLS energy with trap and rotation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("townes", help="radial profile and derived constants")
    p.add_argument("--shoot-tol", type=float, dest="shoot_tol")
    p.add_argument("--r-max", type=float, dest="r_max")
    p.add_argument("--spacing", type=float)
    p.add_argument("--json", help="write the constants JSON here")
    p.add_argument("--profile-csv", dest="profile_csv",
                   help="write the (r, Q) profile CSV here")

    p = sub.add_parser("minimize", help="compute one ground state")
    p.add_argument("--omega", type=float)
    p.add_argument("--a-frac", type=float, dest="a_frac")
    p.add_argument("--n", type=int)
    p.add_argument("--extent", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--step", type=float)
    p.add_argument("--seed", type=int, help="random smooth initial state")
    p.add_argument("--out", help="write the minimizer as F2D1 here")
    p.add_argument("--report", help="write the JSON report here")

    p = sub.add_parser("diagnose", help="collapse report for a stored field")
    p.add_argument("--field", help="input F2D1 snapshot")
    p.add_argument("--omega", type=float)
    p.add_argument("--a-frac", type=float, dest="a_frac")
    p.add_argument("--json", help="write the report here")

    p = sub.add_parser("sweep", help="run a schedule of (omega, a) points")
    p.add_argument("--plan", help="plan JSON")
    p.add_argument("--out", help="artifact directory")
    p.add_argument("--snapshots", action="store_true", default=None)

    p = sub.add_parser("verify", help="run the verification battery")
    p.add_argument("--quick", action="store_true", default=None)

    for p in sub.choices.values():
        p.add_argument("--config", help="flat JSON config with dotted keys")
    return parser


_HANDLERS = {"townes": cmd_townes, "minimize": cmd_minimize,
             "diagnose": cmd_diagnose, "sweep": cmd_sweep,
             "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    try:
        cfg = parse_config(command, args, config_path)
        return _HANDLERS[command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (tw.BracketFailure, tw.DecayFailure, tw.QuadratureDivergence,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
