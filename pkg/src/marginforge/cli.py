"""Command line front end.

Commands: ``bound``, ``homotopy``, ``synthesize``, ``plotdata`` and
``cases``.  A plant argument is a plant file or a built-in case id
(``EX1`` ... ``EX5``).  Exit codes: 0 ok, 2 parse/usage, 3 stable plant,
4 shift invalid, 5 infeasible, 6 numerical failure.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .approx import approx_weight
from .cases import builtin_cases, get_case
from .errors import MarginForgeError, ParseError, RangeError
from .margin import MarginQuery, bound_bisection, bound_multi_margin, homotopy_bound
from .rational import RationalFunction
from .synthesis import synthesize, verify_margins
from .weights import DEFAULT_FLOOR, MODES, WeightFunction, WeightSpec

log = logging.getLogger("marginforge")


# ---------------------------------------------------------------- inputs


def _load_plant(arg):
    """Plant file or built-in case id -> (PlantFile, echo, case spec)."""
    p = Path(arg)
    if p.is_file():
        pf = io.load_plant_file(p)
        return pf, {"file": str(p), "document": pf.raw}, {}
    try:
        case = get_case(arg)
    except KeyError:
        raise ParseError(f"{arg}: no such file or built-in case") from None
    pf = io.PlantFile(plant=case.plant, source=case.id)
    return pf, {"case": case.id}, dict(case.spec)


def _shift(arg, pf):
    if arg is None:
        return pf.shift
    p = Path(arg)
    if p.is_file():
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{p}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        return io.parse_shift(doc.get("shift", doc) if isinstance(doc, dict) else doc, str(p))
    try:
        return RationalFunction.constant(float(arg))
    except ValueError:
        try:
            return RationalFunction.constant(complex(arg.replace("i", "j")))
        except ValueError:
            raise ParseError(f"--shift: {arg!r} is neither a number nor a file") from None


def _spec(args, pf, case_spec):
    margin = {**{k: case_spec[k] for k in ("mode", "gain_k", "phase_phi") if k in case_spec}, **pf.margin}
    if args.mode is not None:
        margin["mode"] = args.mode
    if args.gain is not None:
        margin["gain_k"] = args.gain
    if args.phase is not None:
        margin["phase_phi"] = args.phase
    shift = _shift(args.shift, pf)
    return WeightSpec(shift=shift, floor_eps=args.eps, **margin)


def _query(args, plant, spec):
    return MarginQuery(plant, spec, bisection_tol=args.tol, tau_upper_init=args.tau_max)


def _echo(args, plant_echo):
    skip = {"func", "report", "out", "controller", "verbose"}
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {"plant": plant_echo, "flags": flags}


def _bound(q):
    if q.spec_template.mode == "delay":
        return bound_bisection(q)
    return bound_multi_margin(q)


def _write(doc, args):
    text = io.dump_json(doc, args.out)
    if args.out is None and args.json:
        sys.stdout.write(text)


def _report_dir(args):
    if args.report is None:
        return None
    d = Path(args.report)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _emit(table, d, stem, kind, overlay=None):
    from .plotting import plot_table, write_csv

    write_csv(table, d / f"{stem}.csv")
    plot_table(table, d / f"{stem}.png", kind, overlay=overlay)


# ---------------------------------------------------------------- commands


def _sweep_values(text):
    try:
        name, rng = text.split("=", 1)
        a, b, step = (float(v) for v in rng.split(":"))
    except ValueError:
        raise ParseError(f"--sweep: expected name=start:stop:step, got {text!r}") from None
    if name != "shift":
        raise ParseError(f"--sweep: only 'shift' can be swept, got {name!r}")
    if step <= 0 or b < a:
        raise RangeError("--sweep: need start <= stop and step > 0")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return np.round(a + step * np.arange(n), 12)


def _sweep_one(payload):
    q, value = payload
    spec = replace(q.spec_template, shift=RationalFunction.constant(float(value)))
    try:
        rep = _bound(replace(q, spec_template=spec))
        return {"shift": float(value), "tau": rep.tau_bound, "error": None}
    except MarginForgeError as exc:
        return {"shift": float(value), "tau": float("nan"), "error": f"{type(exc).__name__}: {exc}"}


def _threads(n):
    cap = os.environ.get("MARGINFORGE_THREADS")
    try:
        cap = int(cap) if cap else os.cpu_count() or 1
    except ValueError:
        raise ParseError("MARGINFORGE_THREADS must be an integer") from None
    return max(1, min(cap, n))


def cmd_bound(args):
    pf, echo, case_spec = _load_plant(args.plant)
    spec = _spec(args, pf, case_spec)
    q = _query(args, pf.plant, spec)
    if args.sweep:
        vals = _sweep_values(args.sweep)
        workers = _threads(len(vals))
        if workers == 1:
            rows = [_sweep_one((q, v)) for v in vals]
        else:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                rows = list(ex.map(_sweep_one, [(q, v) for v in vals]))
        for r in rows:
            print(f"shift={r['shift']:g}  tau={r['tau']:.6g}" + (f"  ({r['error']})" if r["error"] else ""))
        doc = {"tool": "marginforge", "version": io.tool_version(), "command": "bound",
               "input": _echo(args, echo), "sweep": rows}
        d = _report_dir(args)
        if d is not None:
            from .plotting import Table

            tab = Table(["shift", "tau"], [[r["shift"], r["tau"]] for r in rows], title="bound vs constant shift")
            _emit_sweep(tab, d)
        _write(doc, args)
        return 0
    rep = _bound(q)
    print(f"certified delay margin: {rep.tau_bound:.6g}  (mode {spec.mode}, upper {rep.tau_upper:.6g})")
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    doc = io.report_document("bound", _echo(args, echo), rep)
    d = _report_dir(args)
    if d is not None:
        _bound_figures(rep, d, args)
    _write(doc, args)
    return 0


def _emit_sweep(tab, d):
    from .plotting import write_csv

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    write_csv(tab, d / "sweep.csv")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(tab.column("shift"), tab.column("tau"), "o-", ms=3)
    ax.set_xlabel("constant shift $T_0$")
    ax.set_ylabel(r"certified $\bar\tau$")
    ax.grid(True, lw=0.3)
    fig.tight_layout()
    fig.savefig(d / "sweep.png", dpi=120)
    plt.close(fig)


def _bound_figures(rep, d, args):
    from .plotting import interpolant_table, weight_table

    wr = tuple(args.omega_range)
    if rep.tau_bound > 0:
        _emit(weight_table(WeightFunction(rep.spec), omega_range=wr, points=args.points), d, "weight", "weight")
    if rep.interpolant is not None:
        tab = interpolant_table(rep.interpolant, omega_range=wr, points=args.points)
        tab.title = "interpolant"
        _emit(tab, d, "interpolant", "interpolant")


def cmd_homotopy(args):
    if not 0 < args.gamma <= 1:
        raise RangeError("--gamma must lie in (0, 1]")
    if args.steps < 1:
        raise RangeError("--steps must be >= 1")
    pf, echo, case_spec = _load_plant(args.plant)
    spec = _spec(args, pf, case_spec)
    q = _query(args, pf.plant, spec)
    nb, na = args.deg_weight
    rep = homotopy_bound(q, N=args.steps, n_T=args.deg_T, n_b=nb, n_a=na, gamma=args.gamma)
    for s in rep.extra["steps"]:
        print(f"step {s['k']}: alpha={s['alpha']:.4g}  tau={s['tau']:.6g}"
              + (f"  reduction residual {s['reduction_residual']:.3g}" if "reduction_residual" in s else ""))
    print(f"certified delay margin: {rep.tau_bound:.6g}  (homotopy, {args.steps} steps)")
    doc = io.report_document("homotopy", _echo(args, echo), rep,
                             final_shift=io.rational_to_dict(rep.extra["T0_final"]))
    d = _report_dir(args)
    if d is not None:
        _bound_figures(rep, d, args)
    _write(doc, args)
    return 0


def cmd_synthesize(args):
    if not 0 < args.at_fraction < 1:
        raise RangeError("--at-fraction must lie in (0, 1)")
    if not 0 < args.verify_fraction <= 1:
        raise RangeError("--verify-fraction must lie in (0, 1]")
    pf, echo, case_spec = _load_plant(args.plant)
    spec = _spec(args, pf, case_spec)
    q = _query(args, pf.plant, spec)
    rolloff = args.improper_rolloff if args.improper_rolloff is not None else case_spec.get("improper_rolloff")
    if args.deg_weight is not None:
        nb, na = args.deg_weight
    else:
        na = 10
        nb = na + (rolloff or 0)
    rep = _bound(q)
    print(f"certified delay margin: {rep.tau_bound:.6g}")
    real = synthesize(pf.plant, rep, fraction=args.at_fraction, n_b=nb, n_a=na, improper_rolloff=rolloff)
    tau_c = real.certified[2]
    vspec = spec.with_tau(args.verify_fraction * tau_c)
    ver = verify_margins(real.T, vspec, plant=pf.plant)
    verdict = "passed" if ver.passed else "FAILED"
    print(f"controller certified for tau <= {tau_c:.6g}; verification at {vspec.tau_bar:.6g}: {verdict} "
          f"(min distance {ver.min_distance:.3g} at omega {ver.argmin_omega:.4g})")
    cdoc = io.controller_document(real, ver)
    doc = io.report_document("synthesize", _echo(args, echo), rep, synthesis=cdoc)
    if args.controller:
        io.dump_json({"version": io.tool_version(), **cdoc}, args.controller)
    d = _report_dir(args)
    if d is not None:
        _synth_figures(pf.plant, real, vspec, ver, d, args)
    _write(doc, args)
    return 0 if ver.passed else 6


def _synth_figures(plant, real, vspec, ver, d, args):
    from .plotting import interpolant_table, nyquist_table, region_table, weight_table

    wr = tuple(args.omega_range)
    L = plant.transfer * real.K
    overlay = None
    if np.isfinite(ver.argmin_omega):
        overlay = region_table(vspec, ver.argmin_omega)
    _emit(nyquist_table(L, wr, args.points), d, "nyquist", "nyquist")
    _emit(interpolant_table(real.T, wr, args.points, spec=vspec), d, "interpolant", "interpolant", overlay)
    ws = WeightFunction(replace(vspec.with_tau(real.certified[2]), shift=real.shift))
    _emit(weight_table(ws, real.W_approx, wr, args.points), d, "weight", "weight")


def _check_range(args):
    a, b = args.omega_range
    if not (0 < a < b) or not np.isfinite(b):
        raise RangeError("--omega-range needs 0 < A < B")
    if args.points < 2:
        raise RangeError("--points must be >= 2")


def cmd_plotdata(args):
    from .plotting import interpolant_table, nyquist_table, plot_table, region_table, weight_table, write_csv

    _check_range(args)
    wr = tuple(args.omega_range)
    result = _maybe_result(args.input)
    if result is not None:
        src = result["input"]["plant"]
        pf, _, case_spec = (_load_plant(src["case"]) if "case" in src
                            else (io.parse_plant_document(src["document"], src["file"]), None, {}))
        flags = result["input"]["flags"]
        for k in ("mode", "gain", "phase", "shift", "eps"):
            if getattr(args, k) is None or (k == "eps" and args.eps == DEFAULT_FLOOR):
                setattr(args, k, flags.get(k))
        if args.eps is None:
            args.eps = DEFAULT_FLOOR
        tau = args.tau if args.tau is not None else result["bound"]["tau"]
    else:
        pf, _, case_spec = _load_plant(args.input)
        tau = args.tau
    spec = _spec(args, pf, case_spec)
    overlay = None
    if args.what == "nyquist":
        K = _rational(result, ("synthesis", "controller"))
        L = pf.plant.transfer * K if K is not None else pf.plant.transfer
        table = nyquist_table(L, wr, args.points)
    elif args.what == "interpolant":
        # the closed-loop T of a synthesis, else the bounded interpolant T~
        T = _rational(result, ("synthesis", "T"))
        vspec = spec.with_tau(tau) if T is not None and tau else None
        if T is None:
            T = _rational(result, ("interpolant",))
        if T is None:
            raise ParseError(f"{args.input}: no interpolant or T in the input; run bound or synthesize first")
        table = interpolant_table(T, wr, args.points, spec=vspec)
        table.title = "closed-loop T" if vspec is not None else "interpolant"
        if vspec is not None and args.at_omega is not None:
            overlay = region_table(vspec, args.at_omega)
    elif args.what == "weight":
        if not tau:
            raise RangeError("weight export needs --tau or a result document with a positive bound")
        w = WeightFunction(spec.with_tau(tau))
        fit = None
        if args.fit:
            nb, na = args.deg_weight
            fit = approx_weight(w, nb, na, omega_scale=1.0 / tau)
        table = weight_table(w, fit, wr, args.points)
    else:
        if args.at_omega is None:
            raise RangeError("regions export needs --at-omega")
        if not tau:
            raise RangeError("regions export needs --tau or a result document with a positive bound")
        table = region_table(spec.with_tau(tau), args.at_omega, points=args.points)
    out = Path(args.out) if args.out else Path(f"{args.what}.csv")
    write_csv(table, out)
    print(f"wrote {out} ({len(table)} rows)")
    if args.png:
        png = out.with_suffix(".png")
        plot_table(table, png, args.what, overlay=overlay)
        print(f"wrote {png}")
    return 0


def _maybe_result(arg):
    p = Path(arg)
    if not p.is_file():
        return None
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return None
    return doc if isinstance(doc, dict) and doc.get("tool") == "marginforge" else None


def _rational(doc, path):
    if doc is None:
        return None
    for k in path:
        doc = doc.get(k) if isinstance(doc, dict) else None
        if doc is None:
            return None
    return io.parse_shift({"num": doc["num"], "den": doc["den"]}, "<result>")


def _fmt_root(r):
    r = complex(r)
    return f"{r.real:.4g}" if r.imag == 0 else f"{r.real:.4g}{r.imag:+.4g}i"


def cmd_cases(args):
    for c in builtin_cases():
        P = c.plant
        poles = ", ".join(_fmt_root(p) for p in P.unstable_poles)
        zeros = ", ".join(_fmt_root(z) for z in P.nmp_zeros) or "-"
        print(f"{c.id:5s} {c.description}")
        print(f"      unstable poles: {poles}; nonminimum-phase zeros: {zeros}")
        for name, (val, tol, tag) in c.reference.items():
            print(f"      {name} = {val:.6g} ({tag})")
    return 0


# ---------------------------------------------------------------- parser


def _margin_flags(p):
    p.add_argument("--shift", help="constant T0 or a JSON file holding {num, den}")
    p.add_argument("--mode", choices=MODES, help="margin type (default: delay)")
    p.add_argument("--gain", type=float, help="guaranteed gain margin k >= 1")
    p.add_argument("--phase", type=float, help="guaranteed phase margin in radians")
    p.add_argument("--tol", type=float, default=1e-3, help="bisection tolerance on tau (default 1e-3)")
    p.add_argument("--eps", type=float, default=DEFAULT_FLOOR, help="weight floor (default 1e-4)")
    p.add_argument("--tau-max", type=float, default=None, help="bisection upper start (default 2 pi / max|p|)")


def _output_flags(p):
    p.add_argument("--out", "-o", help="write the result document (JSON) here")
    p.add_argument("--json", action="store_true", help="print the result document to stdout")
    p.add_argument("--report", metavar="DIR", help="write CSV data and PNG figures to DIR")
    p.add_argument("--omega-range", nargs=2, type=float, default=[1e-3, 1e3], metavar=("A", "B"))
    p.add_argument("--points", type=int, default=1000)


def build_parser():
    ap = argparse.ArgumentParser(prog="marginforge", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="certified lower bound on the delay margin")
    p.add_argument("plant")
    _margin_flags(p)
    p.add_argument("--sweep", help="sweep a constant shift: shift=START:STOP:STEP")
    _output_flags(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("homotopy", help="bound with an iteratively chosen shift")
    p.add_argument("plant")
    _margin_flags(p)
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--deg-T", type=int, default=None, help="degree of the reduced T (default nodes + 2)")
    p.add_argument("--deg-weight", nargs=2, type=int, default=[10, 10], metavar=("NB", "NA"))
    p.add_argument("--gamma", type=float, default=0.95, help="damping in (0, 1]")
    _output_flags(p)
    p.set_defaults(func=cmd_homotopy)

    p = sub.add_parser("synthesize", help="controller achieving the certified margins")
    p.add_argument("plant")
    _margin_flags(p)
    p.add_argument("--at-fraction", type=float, default=0.98, help="synthesis tau as a fraction of the bound")
    p.add_argument("--verify-fraction", type=float, default=0.99,
                   help="verification tau as a fraction of the certified tau")
    p.add_argument("--deg-weight", nargs=2, type=int, default=None, metavar=("NB", "NA"))
    p.add_argument("--improper-rolloff", type=int, default=None,
                   help="weight relative degree NB - NA (makes T strictly proper)")
    p.add_argument("--controller", help="write the controller JSON here")
    _output_flags(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("plotdata", help="export plot data as CSV (and optionally PNG)")
    p.add_argument("input", help="plant file, case id or result document")
    _margin_flags(p)
    p.add_argument("--what", choices=["nyquist", "interpolant", "weight", "regions"], required=True)
    p.add_argument("--omega-range", nargs=2, type=float, default=[1e-3, 1e3], metavar=("A", "B"))
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--tau", type=float, default=None, help="delay range (default: bound from a result)")
    p.add_argument("--at-omega", type=float, default=None, help="frequency for region boundaries")
    p.add_argument("--fit", action="store_true", help="also export the rational weight fit")
    p.add_argument("--deg-weight", nargs=2, type=int, default=[10, 10], metavar=("NB", "NA"))
    p.add_argument("--out", "-o", help="CSV path (default WHAT.csv)")
    p.add_argument("--png", action="store_true", help="also render a PNG next to the CSV")
    p.set_defaults(func=cmd_plotdata)

    p = sub.add_parser("cases", help="list the built-in benchmark cases")
    p.set_defaults(func=cmd_cases)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except MarginForgeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
