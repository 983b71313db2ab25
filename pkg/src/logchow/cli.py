"""Command-line front end: ``logchow <verb> inputs... [options]``.

Every verb prints one JSON report with sorted keys:
``{"verb", "input_digest", "options", "result", "complete", "timing_seconds"}``.
Only ``timing_seconds`` depends on the run.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import jsonio
from .cone_complex import ComplexError, ConeComplex
from .exact_algebra import DimensionError
from .piecewise_poly import PPSection, SectionError, pp_basis, sym_to_pp
from .subdivision import (
    RESOLVE,
    SMOOTH_ONLY,
    ALLOW_SINGULAR,
    Subdivision,
    SubdivisionError,
    barycentric,
    common_refine,
    stellar,
)
from .toric_chow import (
    ChowError,
    CompleteFan,
    FanError,
    chow_ring,
    class_from_graded,
    pushforward_chow,
    refined_ring,
)
from .tropical_curve import CurveError, PLFunction, TropicalCurve, contract, extend_pl
from .twist_dr import (
    TwistError,
    TwistProblem,
    eta_correction,
    ext_fan,
    find_twist,
    gl_invariance_report,
    tuple_ext_fan,
)

VERBS = (
    "pp-basis",
    "global-gen",
    "barycentric",
    "stellar",
    "refine",
    "chow",
    "phi",
    "pushforward",
    "ext-fan",
    "twist",
    "extend-pl",
    "eta",
    "invariance",
    "validate",
)


class UsageError(ValueError):
    pass


def _read(path: str) -> tuple[str, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return text, json.loads(text)
    except json.JSONDecodeError as exc:
        raise jsonio.SchemaError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc


def _json_arg(value: str, flag: str):
    """Parse a flag given inline as JSON or as a path to a JSON file."""
    if value is None:
        raise UsageError(f"{flag} is required for this verb")
    if os.path.exists(value):
        return _read(value)[1]
    try:
        return json.loads(value)
    except json.JSONDecodeError as exc:
        raise jsonio.SchemaError(f"{flag}: invalid JSON ({exc.msg})") from exc


def _divisors(raw) -> list[list[int]]:
    if isinstance(raw, list) and raw and all(isinstance(x, list) for x in raw):
        return [list(jsonio.int_vector(x)) for x in raw]
    return [list(jsonio.int_vector(raw))]


def _need(args, n: int) -> list[str]:
    if len(args.inputs) != n:
        raise UsageError(f"{args.verb} expects {n} input file(s), got {len(args.inputs)}")
    return args.inputs


# ---------------------------------------------------------------------------
# verbs


def _complex(path: str) -> ConeComplex:
    doc = _read(path)[1]
    if isinstance(doc, dict) and "rays" in doc and "maximal_cones" in doc:
        return CompleteFan.from_dict(doc).as_complex()
    return ConeComplex.from_dict(doc)


def _curve(path: str) -> TropicalCurve:
    return TropicalCurve.from_dict(_read(path)[1])


def _fan(path: str) -> CompleteFan:
    return CompleteFan.from_dict(_read(path)[1])


def v_pp_basis(args):
    (path,) = _need(args, 1)
    basis = pp_basis(_complex(path), args.degree)
    return {"rank": len(basis), "basis": [b.to_dict() for b in basis]}, True


def v_global_gen(args):
    (path,) = _need(args, 1)
    return sym_to_pp(_complex(path), args.degree).to_dict(), True


def _subdivision_result(sub: Subdivision) -> dict:
    ok, witness = sub.refined.is_simple()
    return {"subdivision": sub.to_dict(), "refined_is_simple": ok, "simple_witness": witness}


def v_barycentric(args):
    (path,) = _need(args, 1)
    return _subdivision_result(barycentric(_complex(path))), True


def v_stellar(args):
    (path,) = _need(args, 1)
    if args.cone is None:
        raise UsageError("stellar needs --cone")
    ray = jsonio.int_vector(_json_arg(args.ray, "--ray"))
    sub = stellar(_complex(path), args.cone, ray, args.policy)
    if not sub.is_smooth:
        return {"fans": {k: [[list(r) for r in c] for c in v] for k, v in sub.fans.items()}, "smooth": False}, True
    return _subdivision_result(sub), True


def v_refine(args):
    a, b = _need(args, 2)
    sa = Subdivision.from_dict(_read(a)[1])
    sb = Subdivision.from_dict(_read(b)[1])
    return _subdivision_result(common_refine(sa, sb)), True


def v_chow(args):
    (path,) = _need(args, 1)
    ring = chow_ring(_fan(path))
    return {
        "graded_dimensions": list(ring.graded_dimensions),
        "basis": ring.basis_representatives(),
        "multiplication": ring.multiplication_table(),
    }, True


def v_phi(args):
    fan_path, section_path = _need(args, 2)
    ring = chow_ring(_fan(fan_path))
    s = PPSection.from_dict(ring.complex, _read(section_path)[1])
    return {"class": ring.phi(s).graded()}, True


def v_pushforward(args):
    fan = _fan(_need(args, 1)[0]) if len(args.inputs) == 1 else None
    if fan is None:
        fan_path, sub_path = _need(args, 2)
        fan = _fan(fan_path)
        sub = Subdivision.from_dict(_read(sub_path)[1])
    else:
        if args.blowup is None:
            raise UsageError("pushforward needs a subdivision file or --blowup")
        idx = jsonio.int_vector(_json_arg(args.blowup, "--blowup"))
        cx = fan.as_complex()
        sub = stellar(cx, fan.cone_id(idx), (1,) * len(idx))
    base = chow_ring(fan)
    fine = refined_ring(base, sub)
    x = class_from_graded(fine, _json_arg(args.cls, "--class"))
    return {
        "refined_graded_dimensions": list(fine.graded_dimensions),
        "class": pushforward_chow(x, base, sub).graded(),
    }, True


def _problem(args, curve: TropicalCurve) -> TwistProblem:
    ds = _divisors(_json_arg(args.divisor, "--divisor"))
    return TwistProblem(curve, tuple(ds), args.bound, args.certified)


def v_ext_fan(args):
    (path,) = _need(args, 1)
    curve = _curve(path)
    p = _problem(args, curve)
    fan = ext_fan(p, height=args.height)
    return fan.to_dict(), fan.complete


def v_twist(args):
    (path,) = _need(args, 1)
    curve = _curve(path)
    p = _problem(args, curve)
    cone = _json_arg(args.cone, "--cone") if args.cone is not None else None
    certs = [find_twist(p, cone, i) for i in range(len(p.divisors))]
    found = all(c is not None for c in certs)
    return {
        "found": found,
        "certificates": [c.to_dict() if c else None for c in certs],
        "bounds": [p.bound(i) for i in range(len(p.divisors))],
    }, all(p.is_complete(i) for i in range(len(p.divisors)))


def v_extend_pl(args):
    (path,) = _need(args, 1)
    curve = _curve(path)
    raw = _json_arg(args.inputs_json, "--pl-inputs")
    if not isinstance(raw, dict):
        raise jsonio.SchemaError("--pl-inputs must map ray indices to vertex values")
    inputs = {}
    for key, values in raw.items():
        try:
            ray = int(key)
        except ValueError as exc:
            raise jsonio.SchemaError(f"--pl-inputs: ray key {key!r} is not an integer") from exc
        small, _ = contract(curve, (ray,))
        vals = {int(v): (int(x),) for v, x in values.items()}
        inputs[ray] = PLFunction(small, vals)
    return extend_pl(curve, inputs).to_dict(), True


def v_eta(args):
    (path,) = _need(args, 1)
    curve = _curve(path)
    fan = ext_fan(_problem(args, curve), height=args.height)
    return {"ext_fan": fan.to_dict(), "eta": eta_correction(curve, fan).to_dict()}, fan.complete


def v_invariance(args):
    (path,) = _need(args, 1)
    curve = _curve(path)
    ds = _divisors(_json_arg(args.divisor, "--divisor"))
    matrix = [list(jsonio.int_vector(r)) for r in _json_arg(args.matrix, "--matrix")]
    report = gl_invariance_report(curve, ds, matrix, args.bound)
    fans = [tuple_ext_fan(curve, ds, args.bound)]
    return report, all(f.complete for f in fans)


def _kind(doc) -> str:
    if isinstance(doc, dict):
        if "base" in doc and "containment" in doc:
            return "subdivision"
        if "cones" in doc:
            return "complex"
        if "vertices" in doc:
            return "curve"
        if "rays" in doc and "maximal_cones" in doc:
            return "fan"
    raise jsonio.SchemaError("cannot tell what kind of document this is")


def v_validate(args):
    (path,) = _need(args, 1)
    text, doc = _read(path)
    kind = args.kind or _kind(doc)
    loaders = {
        "complex": ConeComplex.from_dict,
        "curve": TropicalCurve.from_dict,
        "fan": CompleteFan.from_dict,
        "subdivision": Subdivision.from_dict,
    }
    obj = loaders[kind](doc)
    out = {"kind": kind, "valid": True, "canonical": obj.to_json() == text}
    if kind == "complex":
        ok, witness = obj.is_simple()
        out.update({"cones": len(obj.cones), "simple": ok, "simple_witness": witness})
    return out, True


HANDLERS = {
    "pp-basis": v_pp_basis,
    "global-gen": v_global_gen,
    "barycentric": v_barycentric,
    "stellar": v_stellar,
    "refine": v_refine,
    "chow": v_chow,
    "phi": v_phi,
    "pushforward": v_pushforward,
    "ext-fan": v_ext_fan,
    "twist": v_twist,
    "extend-pl": v_extend_pl,
    "eta": v_eta,
    "invariance": v_invariance,
    "validate": v_validate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logchow", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=VERBS)
    p.add_argument("inputs", nargs="*", help="input JSON files")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--divisor", help="divisor vector, or a list of them, as JSON")
    p.add_argument("--bound", type=int, default=None, help="slope bound B")
    p.add_argument("--height", type=int, default=None, help="integer point height H")
    p.add_argument("--matrix", help="integer matrix as JSON")
    p.add_argument("--cone", help="cone id (stellar) or generator list as JSON (twist)")
    p.add_argument("--ray", help="ray as JSON (stellar)")
    p.add_argument("--policy", choices=(SMOOTH_ONLY, ALLOW_SINGULAR, RESOLVE), default=SMOOTH_ONLY)
    p.add_argument("--blowup", help="ray indices of the fan cone to blow up (pushforward)")
    p.add_argument("--class", dest="cls", help="graded class coefficients as JSON (pushforward)")
    p.add_argument("--pl-inputs", dest="inputs_json", help="ray -> vertex values as JSON (extend-pl)")
    p.add_argument("--certified", action="store_true", help="treat the slope bound as exhaustive")
    p.add_argument("--kind", choices=("complex", "curve", "fan", "subdivision"), help="document kind (validate)")
    p.add_argument("--out", help="write the report here instead of standard output")
    return p


def _digest(args) -> str:
    h = hashlib.sha256()
    for path in args.inputs:
        try:
            h.update(Path(path).read_bytes())
        except OSError:
            h.update(path.encode())
    return h.hexdigest()


def _options(args) -> dict:
    keys = ("degree", "divisor", "bound", "height", "matrix", "cone", "ray", "policy", "blowup", "cls", "inputs_json", "certified", "kind")
    return {k: getattr(args, k) for k in keys if getattr(args, k) not in (None, False)}


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    report = {"verb": args.verb, "input_digest": _digest(args), "options": _options(args)}
    try:
        result, complete = HANDLERS[args.verb](args)
    except (jsonio.SchemaError, UsageError) as exc:
        report.update({"error": str(exc), "error_kind": "parse"})
        return 2, report
    except (
        ComplexError,
        SectionError,
        SubdivisionError,
        FanError,
        ChowError,
        CurveError,
        TwistError,
        DimensionError,
    ) as exc:
        report.update({"error": str(exc), "error_kind": "precondition"})
        return 1, report
    report.update({"result": result, "complete": bool(complete), "timing_seconds": round(time.perf_counter() - start, 6)})
    return 0, report


def main(argv: list[str] | None = None) -> int:
    code, report = run(argv)
    text = jsonio.dumps(report)
    out = build_parser().parse_args(argv).out
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if code:
        sys.stderr.write(f"logchow: {report['error']}\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
