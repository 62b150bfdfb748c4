"""Command line driver.

Subcommands cover the full workflow over declarative JSON inputs:

  calibrate    coupon measurements -> moment-intensity slope
  forward      recipe -> displacement grid + predicted measured height
  inverse      target displacements -> machine-realizable intensity map
  montecarlo   recipe + uncertainty ranges -> prediction distribution
  anova        uniform-peen table -> row/column F tests
  convergence  recipe -> center displacement vs basis size
  temperature  recipe with alpha -> equivalent linear temperature slopes

Every command writes its artifacts into the --out directory and is
deterministic given its inputs (and seed where applicable); rerunning
produces byte-identical files. Exit codes: 0 success, 2 bad input or
schema violation, 3 numerical failure.
"""

import argparse
import os
import sys

import numpy as np

from . import io
from .assembly import forward_solve
from .calibration import fit_slope, linear_temperature_slope, record_from_measurement
from .errors import InputError, NumericalError
from .inverse import (
    assemble_regularization,
    assemble_response_map,
    recover_intensity,
    solve_inverse,
)
from .model import (
    TensorBasis,
    eval_displacement,
    eval_displacement_grid,
    project_moment,
)
from .uq import anova_two_way_no_replication, run_monte_carlo


def _parse_grid(text):
    try:
        m, n = text.lower().split("x")
        dims = int(m), int(n)
    except ValueError as exc:
        raise InputError(f'grid must look like "41x41", got "{text}"') from exc
    if dims[0] < 2 or dims[1] < 2:
        raise InputError("grid must be at least 2x2")
    return dims


def _grid_axes(plate, dims):
    return np.linspace(0.0, plate.L1, dims[0]), np.linspace(0.0, plate.L2, dims[1])


def _require_calibration(model, path):
    if model is None:
        raise InputError(f"{path}: recipe carries no calibration block")
    return model


def cmd_calibrate(args):
    doc = io.load_document(args.measurements, "measurements", strict=args.strict)
    coupon = io.plate_from(doc["coupon"])
    records = [
        record_from_measurement(m["intensity"], m["measured_height"], coupon)
        for m in doc["measurements"]
    ]
    model = fit_slope(records, coupon)
    out = io.calibration_document(model, io.units_of(doc))
    io.write_json(os.path.join(args.out, "calibration.json"), out)
    print(f"slope_K = {model.slope_K:.6e} from {len(records)} record(s)")
    return 0


def cmd_forward(args):
    recipe, model, doc = io.load_recipe(args.recipe, strict=args.strict)
    model = _require_calibration(model, args.recipe)
    plate = recipe.plate
    basis = TensorBasis(plate, recipe.basis_n)
    field = project_moment(basis, recipe.intensity, model)
    solution = forward_solve(basis, field)
    x1, x2 = _grid_axes(plate, _parse_grid(args.grid))
    values = eval_displacement_grid(basis, solution.a, x1, x2)
    center = eval_displacement(basis, solution.a, (plate.L1 / 2.0, plate.L2 / 2.0))
    corners = {
        "u_0_0": eval_displacement(basis, solution.a, (0.0, 0.0)),
        "u_L1_0": eval_displacement(basis, solution.a, (plate.L1, 0.0)),
        "u_0_L2": eval_displacement(basis, solution.a, (0.0, plate.L2)),
        "u_L1_L2": eval_displacement(basis, solution.a, (plate.L1, plate.L2)),
    }
    units = io.units_of(doc)
    summary = {
        "schema": io.SCHEMA_TAG,
        "kind": "forward_summary",
        "units": units,
        "basis_n": recipe.basis_n,
        "center_displacement": center,
        "predicted_measured_height": center + plate.h,
        "corners": {k: float(v) for k, v in corners.items()},
    }
    io.write_grid_csv(
        os.path.join(args.out, "grid.csv"), x1, x2, values,
        "u3_" + units["length"], units["length"])
    io.write_json(os.path.join(args.out, "summary.json"), summary)
    print(f"center displacement {center:.6f}, predicted measured height {center + plate.h:.6f}")
    return 0


def cmd_inverse(args):
    plate, basis_n, model, constraints, doc = io.load_constraints(
        args.constraints, strict=args.strict)
    basis = TensorBasis(plate, basis_n)
    reg = assemble_regularization(basis)
    response = assemble_response_map(basis, constraints)
    field = solve_inverse(reg, response)
    x1, x2 = _grid_axes(plate, _parse_grid(args.grid))
    grid = recover_intensity(field, model, x1, x2)
    # Spread reported over the central 80% span; edge samples ride the
    # projection's Gibbs wiggles.
    i1 = (x1 >= 0.1 * plate.L1) & (x1 <= 0.9 * plate.L1)
    i2 = (x2 >= 0.1 * plate.L2) & (x2 <= 0.9 * plate.L2)
    interior = grid.values[np.ix_(i1, i2)]
    mean = float(interior.mean())
    solution = forward_solve(basis, field)
    residuals = [
        float(eval_displacement(basis, solution.a, c.point) - c.value)
        for c in constraints
    ]
    units = io.units_of(doc)
    summary = {
        "schema": io.SCHEMA_TAG,
        "kind": "inverse_summary",
        "units": units,
        "basis_n": basis_n,
        "interior_mean_intensity": mean,
        "interior_spread": float((interior.max() - interior.min()) / abs(mean))
        if mean != 0.0 else 0.0,
        "has_negative_intensity": grid.has_negative,
        "constraint_residuals": residuals,
    }
    io.write_grid_csv(
        os.path.join(args.out, "intensity.csv"), x1, x2, grid.values,
        "intensity_A", units["length"])
    io.write_json(os.path.join(args.out, "moments.json"), {
        "schema": io.SCHEMA_TAG,
        "kind": "moment_coefficients",
        "units": units,
        "basis_n": basis_n,
        "coefficients": [float(v) for v in field.t],
    })
    io.write_json(os.path.join(args.out, "summary.json"), summary)
    print(f"interior mean intensity {mean:.6e}, "
          f"spread {summary['interior_spread']:.3%}, "
          f"negative values: {grid.has_negative}")
    return 0


def cmd_montecarlo(args):
    recipe, _, recipe_doc = io.load_recipe(args.recipe, strict=args.strict)
    spec, unc_doc = io.load_uncertainty(
        args.uncertainty, strict=args.strict, trials=args.trials, seed=args.seed)
    io.check_units(recipe_doc, unc_doc)
    summary = run_monte_carlo(spec, recipe)
    units = io.units_of(recipe_doc)
    io.write_csv(
        os.path.join(args.out, "samples.csv"),
        [f"predicted_measured_height_{units['length']}"],
        [[repr(float(s))] for s in summary.samples])
    io.write_json(os.path.join(args.out, "summary.json"), {
        "schema": io.SCHEMA_TAG,
        "kind": "mc_summary",
        "units": units,
        "trial_count": spec.trial_count,
        "seed": spec.seed,
        "mean": summary.mean,
        "std": summary.std,
        "histogram": {
            "bin_edges": [float(e) for e in summary.bin_edges],
            "counts": [int(c) for c in summary.counts],
        },
    })
    print(f"{spec.trial_count} trials: mean {summary.mean:.6f}, std {summary.std:.6f}")
    return 0


def cmd_anova(args):
    table = io.read_table_csv(args.table)
    result = anova_two_way_no_replication(table, args.level)
    io.write_json(os.path.join(args.out, "anova.json"), {
        "schema": io.SCHEMA_TAG,
        "kind": "anova",
        "alpha_level": result.alpha_level,
        "df": list(result.df),
        "F_rows": result.F_rows,
        "F_cols": result.F_cols,
        "p_rows": result.p_rows,
        "p_cols": result.p_cols,
        "significant_rows": result.significant_rows,
        "significant_cols": result.significant_cols,
    })
    print(f"F_rows = {result.F_rows:.3f} (p = {result.p_rows:.4f}), "
          f"F_cols = {result.F_cols:.3f} (p = {result.p_cols:.4f}) "
          f"at level {result.alpha_level}")
    return 0


def cmd_convergence(args):
    if not 2 <= args.n_min < args.n_max <= 13:
        raise InputError("need 2 <= n-min < n-max <= 13")
    recipe, model, _ = io.load_recipe(args.recipe, strict=args.strict)
    model = _require_calibration(model, args.recipe)
    plate = recipe.plate
    x1 = np.linspace(0.0, plate.L1, 41)
    x2 = np.linspace(0.0, plate.L2, 41)
    rows = []
    previous = None
    for n in range(args.n_min, args.n_max + 1):
        basis = TensorBasis(plate, n)
        field = project_moment(basis, recipe.intensity, model)
        solution = forward_solve(basis, field)
        values = eval_displacement_grid(basis, solution.a, x1, x2)
        center = eval_displacement(basis, solution.a, (plate.L1 / 2.0, plate.L2 / 2.0))
        if previous is None:
            rows.append([n, repr(center), "", ""])
        else:
            diff = values - previous
            rows.append([
                n, repr(center),
                repr(float(np.abs(diff).max())),
                repr(float(np.sqrt(np.mean(diff**2)))),
            ])
        previous = values
    io.write_csv(
        os.path.join(args.out, "convergence.csv"),
        ["N", "center_displacement", "max_abs_change", "l2_change"], rows)
    for row in rows:
        print("  ".join(str(c) for c in row))
    return 0


def cmd_temperature(args):
    recipe, model, doc = io.load_recipe(args.recipe, strict=args.strict)
    model = _require_calibration(model, args.recipe)
    plate = recipe.plate
    if plate.alpha is None:
        raise InputError(
            f"{args.recipe}: temperature export needs plate.alpha "
            "(thermal expansion coefficient)")
    x1, x2 = _grid_axes(plate, _parse_grid(args.grid))
    intensity = recipe.intensity.intensity_at(x1[:, None], x2[None, :])
    tau = recipe.intensity.sign * model.slope_K * intensity
    slopes = linear_temperature_slope(1.0, plate.alpha, plate.h) * tau
    units = io.units_of(doc)
    io.write_grid_csv(
        os.path.join(args.out, "temperature.csv"), x1, x2, slopes,
        "T0_slope", units["length"])
    print(f"temperature slope range [{slopes.min():.6e}, {slopes.max():.6e}]")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="peenform",
        description="Thermoelastic plate model of shot peen forming.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--strict", action="store_true",
                       help="reject unknown fields in input documents")
        return p

    p = add("calibrate", cmd_calibrate, "fit the moment-intensity slope")
    p.add_argument("measurements", help="measurements JSON (coupon + height readings)")

    p = add("forward", cmd_forward, "predict bending for a recipe")
    p.add_argument("--recipe", required=True, help="recipe JSON")
    p.add_argument("--grid", default="41x41", metavar="MxN", help="output grid dims")

    p = add("inverse", cmd_inverse, "design an intensity map from target displacements")
    p.add_argument("constraints", help="inverse JSON (plate + calibration + targets)")
    p.add_argument("--grid", default="41x41", metavar="MxN", help="output grid dims")

    p = add("montecarlo", cmd_montecarlo, "propagate input uncertainty")
    p.add_argument("--recipe", required=True, help="recipe JSON")
    p.add_argument("uncertainty", help="uncertainty JSON (ranges + trials + seed)")
    p.add_argument("--trials", type=int, default=None, help="override trial count")
    p.add_argument("--seed", type=int, default=None, help="override master seed")

    p = add("anova", cmd_anova, "two-way no-replication ANOVA on a CSV table")
    p.add_argument("table", help="numeric CSV, runs in rows and positions in columns")
    p.add_argument("--level", type=float, default=0.10, help="significance level")

    p = add("convergence", cmd_convergence, "center displacement vs basis size")
    p.add_argument("--recipe", required=True, help="recipe JSON")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=13)

    p = add("temperature", cmd_temperature, "equivalent linear temperature slopes")
    p.add_argument("--recipe", required=True, help="recipe JSON (plate must carry alpha)")
    p.add_argument("--grid", default="41x41", metavar="MxN", help="output grid dims")

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
