"""Document schemas and file I/O for the command line tools.

Structured inputs and outputs are JSON tagged "schema": "peenform/v1";
grids and sample lists are CSV (comma separated, '.' decimal, LF line
endings, one header row). Writers are atomic: content goes to a temporary
file in the target directory and is renamed into place, so a failure never
leaves a partial output behind.

Documents may carry a "units" object; the solver is unit agnostic but
refuses to combine documents whose units disagree. The default matches the
shipped examples: inches and psi.
"""

import csv
import json
import os
import tempfile

import jsonschema

from .calibration import CalibrationModel, CalibrationRecord
from .errors import InputError
from .inverse import DisplacementConstraint
from .model import IntensityMap, MaskRect, PlateSpec, Recipe
from .uq import UncertaintySpec

SCHEMA_TAG = "peenform/v1"
DEFAULT_UNITS = {"length": "in", "pressure": "psi"}

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NUMBER = {"type": "number"}
_RANGE = {
    "type": "array",
    "items": _NUMBER,
    "minItems": 2,
    "maxItems": 2,
}

_UNITS_SCHEMA = {
    "type": "object",
    "properties": {"length": {"type": "string"}, "pressure": {"type": "string"}},
}

_PLATE_SCHEMA = {
    "type": "object",
    "required": ["L1", "L2", "h", "E", "v"],
    "properties": {
        "L1": _POSITIVE,
        "L2": _POSITIVE,
        "h": _POSITIVE,
        "E": _POSITIVE,
        "v": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
        "alpha": _POSITIVE,
    },
}

_MASK_SCHEMA = {
    "type": "object",
    "required": ["x1_min", "x1_max", "x2_min", "x2_max"],
    "properties": {
        "x1_min": _NUMBER,
        "x1_max": _NUMBER,
        "x2_min": _NUMBER,
        "x2_max": _NUMBER,
    },
}

_CALIBRATION_BODY = {
    "type": "object",
    "required": ["slope_K"],
    "properties": {
        "slope_K": _POSITIVE,
        "coupon": _PLATE_SCHEMA,
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["intensity", "u_max", "tau"],
                "properties": {
                    "intensity": _POSITIVE,
                    "u_max": _NUMBER,
                    "tau": _NUMBER,
                },
            },
        },
    },
}

_CALIBRATION_REF = {
    "oneOf": [
        _CALIBRATION_BODY,
        {
            "type": "object",
            "required": ["path"],
            "properties": {"path": {"type": "string"}},
        },
    ]
}

_BASE_PROPS = {
    "schema": {"const": SCHEMA_TAG},
    "kind": {"type": "string"},
    "units": _UNITS_SCHEMA,
    "description": {"type": "string"},
}

RECIPE_SCHEMA = {
    "type": "object",
    "required": ["schema", "kind", "plate", "basis_n", "intensity"],
    "properties": {
        **_BASE_PROPS,
        "kind": {"const": "recipe"},
        "plate": _PLATE_SCHEMA,
        "basis_n": {"type": "integer", "minimum": 2, "maximum": 13},
        "intensity": {
            "type": "object",
            "required": ["base"],
            "properties": {
                "base": {"type": "number", "minimum": 0},
                "sign": {"enum": [1, -1]},
                "masks": {"type": "array", "items": _MASK_SCHEMA},
            },
        },
        "calibration": _CALIBRATION_REF,
    },
}

CALIBRATION_SCHEMA = {
    "type": "object",
    "required": ["schema", "kind", "slope_K"],
    "properties": {
        **_BASE_PROPS,
        "kind": {"const": "calibration"},
        **_CALIBRATION_BODY["properties"],
    },
}

MEASUREMENTS_SCHEMA = {
    "type": "object",
    "required": ["schema", "kind", "coupon", "measurements"],
    "properties": {
        **_BASE_PROPS,
        "kind": {"const": "measurements"},
        "coupon": _PLATE_SCHEMA,
        "measurements": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["intensity", "measured_height"],
                "properties": {
                    "intensity": _POSITIVE,
                    "measured_height": _POSITIVE,
                },
            },
        },
    },
}

CONSTRAINTS_SCHEMA = {
    "type": "object",
    "required": ["schema", "kind", "plate", "basis_n", "calibration", "constraints"],
    "properties": {
        **_BASE_PROPS,
        "kind": {"const": "inverse"},
        "plate": _PLATE_SCHEMA,
        "basis_n": {"type": "integer", "minimum": 2, "maximum": 13},
        "calibration": _CALIBRATION_REF,
        "constraints": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["x1", "x2", "u3"],
                "properties": {"x1": _NUMBER, "x2": _NUMBER, "u3": _NUMBER},
            },
        },
    },
}

UNCERTAINTY_SCHEMA = {
    "type": "object",
    "required": ["schema", "kind", "ranges", "trials", "seed"],
    "properties": {
        **_BASE_PROPS,
        "kind": {"const": "uncertainty"},
        "ranges": {
            "type": "object",
            "required": ["L1", "L2", "h", "mask_offset", "measurement_noise", "M"],
            "properties": {
                "L1": _RANGE,
                "L2": _RANGE,
                "h": _RANGE,
                "mask_offset": _RANGE,
                "measurement_noise": _RANGE,
                "M": _RANGE,
            },
        },
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
    },
}

_SCHEMAS = {
    "recipe": RECIPE_SCHEMA,
    "calibration": CALIBRATION_SCHEMA,
    "measurements": MEASUREMENTS_SCHEMA,
    "inverse": CONSTRAINTS_SCHEMA,
    "uncertainty": UNCERTAINTY_SCHEMA,
}


def _unknown_fields(schema, doc, path=""):
    """Paths of document fields the schema does not declare (strict mode)."""
    unknown = []
    if isinstance(doc, dict) and "properties" in schema:
        props = schema["properties"]
        for key, value in doc.items():
            here = f"{path}.{key}" if path else key
            if key not in props:
                unknown.append(here)
            else:
                unknown.extend(_unknown_fields(_resolve(props[key], value), value, here))
    elif isinstance(doc, list) and "items" in schema:
        for i, item in enumerate(doc):
            unknown.extend(_unknown_fields(_resolve(schema["items"], item), item, f"{path}[{i}]"))
    return unknown


def _resolve(schema, doc):
    # oneOf branches: pick the first alternative that validates.
    for branch in schema.get("oneOf", []):
        try:
            jsonschema.validate(doc, branch)
            return branch
        except jsonschema.ValidationError:
            continue
    return schema


def load_document(path, kind, strict=False):
    """Read, tag-check and schema-validate one JSON document."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: file not found") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA_TAG:
        raise InputError(f'{path}: missing or wrong "schema" tag (expected "{SCHEMA_TAG}")')
    if doc.get("kind") != kind:
        raise InputError(f'{path}: expected kind "{kind}", got "{doc.get("kind")}"')
    schema = _SCHEMAS[kind]
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "document root"
        raise InputError(f"{path}: schema violation at {where}: {exc.message}") from exc
    if strict:
        unknown = _unknown_fields(schema, doc)
        if unknown:
            raise InputError(f"{path}: unknown fields (strict mode): {', '.join(unknown)}")
    return doc


def units_of(doc):
    return {**DEFAULT_UNITS, **doc.get("units", {})}


def check_units(*docs):
    """Refuse to combine documents whose declared units differ."""
    units = [units_of(d) for d in docs if d is not None]
    for other in units[1:]:
        if other != units[0]:
            raise InputError(f"mixed units between input documents: {units[0]} vs {other}")
    return units[0] if units else dict(DEFAULT_UNITS)


def plate_from(doc):
    return PlateSpec(
        L1=doc["L1"], L2=doc["L2"], h=doc["h"], E=doc["E"], v=doc["v"],
        alpha=doc.get("alpha"))


def intensity_from(doc):
    masks = tuple(
        MaskRect(m["x1_min"], m["x1_max"], m["x2_min"], m["x2_max"])
        for m in doc.get("masks", ()))
    return IntensityMap(doc["base"], masks, doc.get("sign", 1))


def calibration_from(doc, base_dir=".", strict=False):
    """Inline calibration object, or a {"path": ...} reference to one."""
    if "path" in doc and "slope_K" not in doc:
        ref = os.path.join(base_dir, doc["path"])
        loaded = load_document(ref, "calibration", strict=strict)
        model, _ = calibration_from(loaded)
        return model, loaded
    records = tuple(
        CalibrationRecord(r["intensity"], r["u_max"], r["tau"])
        for r in doc.get("records", ()))
    coupon = plate_from(doc["coupon"]) if "coupon" in doc else None
    return CalibrationModel(records, doc["slope_K"], coupon), None


def load_recipe(path, strict=False):
    """Recipe document -> (Recipe, CalibrationModel or None, raw docs)."""
    doc = load_document(path, "recipe", strict=strict)
    recipe = Recipe(plate_from(doc["plate"]), doc["basis_n"], intensity_from(doc["intensity"]))
    model = None
    cal_doc = None
    if "calibration" in doc:
        model, cal_doc = calibration_from(
            doc["calibration"], os.path.dirname(path) or ".", strict=strict)
    check_units(doc, cal_doc)
    return recipe, model, doc


def load_constraints(path, strict=False):
    """Inverse document -> (plate, basis_n, CalibrationModel, constraints, doc)."""
    doc = load_document(path, "inverse", strict=strict)
    model, cal_doc = calibration_from(
        doc["calibration"], os.path.dirname(path) or ".", strict=strict)
    check_units(doc, cal_doc)
    constraints = tuple(
        DisplacementConstraint((c["x1"], c["x2"]), c["u3"]) for c in doc["constraints"])
    return plate_from(doc["plate"]), doc["basis_n"], model, constraints, doc


def load_uncertainty(path, strict=False, trials=None, seed=None):
    """Uncertainty document -> (UncertaintySpec, doc); CLI overrides applied."""
    doc = load_document(path, "uncertainty", strict=strict)
    ranges = doc["ranges"]
    spec = UncertaintySpec(
        L1_range=tuple(ranges["L1"]),
        L2_range=tuple(ranges["L2"]),
        h_range=tuple(ranges["h"]),
        mask_offset_range=tuple(ranges["mask_offset"]),
        measurement_noise_range=tuple(ranges["measurement_noise"]),
        M_range=tuple(ranges["M"]),
        trial_count=trials if trials is not None else doc["trials"],
        seed=seed if seed is not None else doc["seed"],
    )
    return spec, doc


def calibration_document(model, units=None):
    doc = {
        "schema": SCHEMA_TAG,
        "kind": "calibration",
        "units": units or dict(DEFAULT_UNITS),
        "slope_K": float(model.slope_K),
        "records": [
            {"intensity": float(r.intensity), "u_max": float(r.u_max), "tau": float(r.tau)}
            for r in model.records
        ],
    }
    if model.coupon is not None:
        coupon = {
            "L1": model.coupon.L1, "L2": model.coupon.L2, "h": model.coupon.h,
            "E": model.coupon.E, "v": model.coupon.v,
        }
        if model.coupon.alpha is not None:
            coupon["alpha"] = model.coupon.alpha
        doc["coupon"] = coupon
    return doc


def _atomic_write(path, write_body):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            write_body(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    _atomic_write(path, lambda fh: (json.dump(obj, fh, indent=2, sort_keys=True), fh.write("\n")))


def write_csv(path, header, rows):
    def body(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)

    _atomic_write(path, body)


def write_grid_csv(path, x1, x2, values, quantity, length_unit):
    """Long-format grid: one (x1, x2, value) row per sample, x1 varying slowest."""
    header = [f"x1_{length_unit}", f"x2_{length_unit}", quantity]
    rows = [
        [repr(float(a)), repr(float(b)), repr(float(values[i, j]))]
        for i, a in enumerate(x1)
        for j, b in enumerate(x2)
    ]
    write_csv(path, header, rows)


def read_table_csv(path):
    """Numeric CSV (no header detection: every cell must parse) -> 2-D list."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except FileNotFoundError as exc:
        raise InputError(f"{path}: file not found") from exc
    if not rows:
        raise InputError(f"{path}: empty table")
    table = []
    for i, row in enumerate(rows):
        try:
            table.append([float(c) for c in row])
        except ValueError as exc:
            raise InputError(f"{path}: row {i + 1} is not numeric: {row}") from exc
        if len(table[-1]) != len(table[0]):
            raise InputError(f"{path}: ragged rows")
    return table
