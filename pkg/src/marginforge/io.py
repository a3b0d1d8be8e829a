"""Plant files, result documents and controller files (JSON).

A plant file holds exactly one plant representation::

    {"num": [0.1, -1.0], "den": [1.0, 2.0]}                  # descending powers
    {"gain": 2.0, "zeros": [[1.0, 0.0]], "poles": [[0.5, 0], [-1, 2], [-1, -2]]}

plus optional ``"order": "ascending"``, ``"shift"`` (number, ``[re, im]`` or
``{"num", "den"}``) and ``"margin"`` (``{"mode", "gain", "phase"}``).
Complex numbers are ``[re, im]`` pairs.
"""

import json
import math
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np

from .errors import ParseError
from .rational import Polynomial, RationalFunction, classify_plant
from .weights import MODES

__all__ = [
    "PlantFile",
    "load_plant_file",
    "parse_plant_document",
    "parse_shift",
    "to_jsonable",
    "dump_json",
    "tool_version",
    "rational_to_dict",
    "report_document",
    "controller_document",
]


def tool_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        from . import __version__

        return __version__


@dataclass
class PlantFile:
    plant: object
    shift: RationalFunction | None = None
    margin: dict = field(default_factory=dict)
    source: str = "<document>"
    raw: dict = field(default_factory=dict)


def _fail(source, path, msg):
    raise ParseError(f"{source}: field '{path}': {msg}")


def _number(x, source, path, allow_complex=False):
    if isinstance(x, bool):
        _fail(source, path, "expected a number, got a boolean")
    if isinstance(x, (int, float)):
        if not math.isfinite(x):
            _fail(source, path, "number must be finite")
        return float(x)
    if allow_complex and isinstance(x, list):
        if len(x) != 2:
            _fail(source, path, "complex numbers are [re, im] pairs")
        re = _number(x[0], source, f"{path}[0]")
        im = _number(x[1], source, f"{path}[1]")
        return complex(re, im)
    kind = "a number or [re, im] pair" if allow_complex else "a number"
    _fail(source, path, f"expected {kind}, got {type(x).__name__}")


def _number_list(x, source, path, allow_complex=False):
    if not isinstance(x, list) or not x:
        _fail(source, path, "expected a non-empty list")
    return [_number(v, source, f"{path}[{i}]", allow_complex) for i, v in enumerate(x)]


def _poly(coeffs, order):
    c = np.asarray(coeffs)
    return Polynomial(c[::-1] if order == "descending" else c)


def _ratio(doc, source, prefix, order):
    num = _number_list(doc.get("num"), source, f"{prefix}num")
    den = _number_list(doc.get("den"), source, f"{prefix}den")
    if all(v == 0 for v in den):
        _fail(source, f"{prefix}den", "denominator is identically zero")
    return RationalFunction(_poly(num, order), _poly(den, order))


def parse_shift(value, source="<shift>", order="descending"):
    """``T0`` from a number, ``[re, im]`` pair or ``{"num", "den"}`` mapping."""
    if isinstance(value, dict):
        extra = set(value) - {"num", "den"}
        if extra:
            _fail(source, "shift", f"unknown keys {sorted(extra)}")
        return _ratio(value, source, "shift.", order)
    c = _number(value, source, "shift", allow_complex=True)
    return RationalFunction.constant(c)


def _margin(doc, source):
    if not isinstance(doc, dict):
        _fail(source, "margin", "expected an object")
    extra = set(doc) - {"mode", "gain", "phase"}
    if extra:
        _fail(source, "margin", f"unknown keys {sorted(extra)}")
    out = {}
    if "mode" in doc:
        if doc["mode"] not in MODES:
            _fail(source, "margin.mode", f"must be one of {list(MODES)}")
        out["mode"] = doc["mode"]
    if "gain" in doc:
        k = _number(doc["gain"], source, "margin.gain")
        if k < 1:
            _fail(source, "margin.gain", "gain margin must be >= 1")
        out["gain_k"] = k
    if "phase" in doc:
        ph = _number(doc["phase"], source, "margin.phase")
        if not 0 <= ph < 2 * math.pi:
            _fail(source, "margin.phase", "phase margin must lie in [0, 2 pi)")
        out["phase_phi"] = ph
    return out


_KEYS = {"num", "den", "gain", "zeros", "poles", "order", "shift", "margin", "name", "comment"}


def parse_plant_document(doc, source="<document>"):
    """Validate a decoded plant document and build the plant.

    Raises
    ------
    ParseError
        With the offending field path in the message.
    """
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    extra = set(doc) - _KEYS
    if extra:
        _fail(source, sorted(extra)[0], "unknown key")
    order = doc.get("order", "descending")
    if order not in ("descending", "ascending"):
        _fail(source, "order", "must be 'descending' or 'ascending'")
    has_tf = "num" in doc or "den" in doc
    has_zpk = any(k in doc for k in ("gain", "zeros", "poles"))
    if has_tf == has_zpk:
        raise ParseError(f"{source}: exactly one of {{num, den}} or {{gain, zeros, poles}} is required")
    if has_tf:
        tf = _ratio(doc, source, "", order)
    else:
        gain = _number(doc.get("gain", 1.0), source, "gain")
        zeros = doc.get("zeros", [])
        if not isinstance(zeros, list):
            _fail(source, "zeros", "expected a list")
        zeros = [_number(v, source, f"zeros[{i}]", True) for i, v in enumerate(zeros)]
        poles = _number_list(doc.get("poles"), source, "poles", allow_complex=True)
        tf = RationalFunction.from_zpk(zeros, poles, gain)
        if not tf.is_real:
            _fail(source, "zeros/poles", "complex roots must come in conjugate pairs")
        tf = RationalFunction(tf.num.real_part(1e-9), tf.den.real_part(1e-9))
    plant = classify_plant(tf)
    shift = parse_shift(doc["shift"], source, order) if "shift" in doc else None
    margin = _margin(doc["margin"], source) if "margin" in doc else {}
    return PlantFile(plant=plant, shift=shift, margin=margin, source=source, raw=doc)


def load_plant_file(path):
    """Read and parse a plant file; JSON syntax errors report line and column."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_plant_document(doc, str(path))


def to_jsonable(x):
    """Recursively convert numpy scalars/arrays and complex numbers for JSON."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_finite(x.real), _finite(x.imag)]
    if isinstance(x, (float, np.floating)):
        return _finite(float(x))
    if isinstance(x, Polynomial):
        return to_jsonable(x.descending())
    if isinstance(x, RationalFunction):
        return rational_to_dict(x)
    return x


def _finite(v):
    v = float(v)
    if math.isfinite(v):
        return v
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


def dump_json(doc, path=None):
    text = json.dumps(to_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def rational_to_dict(f):
    """``{"num", "den"}`` in descending powers, real when the coefficients are."""
    num = f.num.descending()
    den = f.den.descending()
    if f.is_real:
        num, den = np.real(num), np.real(den)
    return {"num": to_jsonable(num), "den": to_jsonable(den), "order": "descending"}


def _steps(trace):
    return [{"tau": s.tau, "feasible": s.feasible, "min_eig": s.min_eig, "note": s.note} for s in trace]


def report_document(command, inputs, report, **sections):
    """Result document for a :class:`MarginReport` and extra sections."""
    doc = {
        "tool": "marginforge",
        "version": tool_version(),
        "command": command,
        "input": inputs,
        "bound": {
            "tau": report.tau_bound,
            "tau_upper": report.tau_upper,
            "mode": report.spec.mode,
            "gain_k": report.spec.gain_k,
            "phase_phi": report.spec.phase_phi,
            "monotone": report.monotone,
        },
        "bisection": _steps(report.iterations),
        "shift": rational_to_dict(report.shift_used),
        "warnings": list(report.warnings),
    }
    if report.interpolant is not None:
        doc["interpolant"] = rational_to_dict(report.interpolant)
    steps = report.extra.get("steps")
    if steps:
        doc["homotopy"] = steps
    doc.update(sections)
    return doc


def controller_document(real, verification=None):
    doc = {
        "controller": rational_to_dict(real.K),
        "T": rational_to_dict(real.T),
        "certified": {"gain_k": real.certified[0], "phase_phi": real.certified[1], "tau": real.certified[2]},
        "weight_fit": {"eps_star": real.W_approx.eps_star, "n_b": real.W_approx.b.degree,
                       "n_a": real.W_approx.a.degree},
        "loop_residual": real.loop_residual,
        "closed_loop_roots_max_real": float(np.max(np.real(real.char_poly.roots()))),
        "notes": list(real.notes),
    }
    if verification is not None:
        v = verification
        doc["verification"] = {
            "min_distance": v.min_distance, "argmin_omega": v.argmin_omega, "passed": v.passed,
            "threshold": v.threshold, "interp_residual": v.interp_residual,
            "distance_at_infinity": v.distance_at_infinity,
        }
    return doc
