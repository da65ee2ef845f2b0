"""Command-line interface: ``weylkt {check-ernst, analyze, lemma8, geodesic}``.

Every report embeds the tool version, seed and sample count, is written with
sorted keys and contains no wall-clock data unless ``--timings`` is given, so
identical arguments give byte-identical output.

Exit codes: 0 conclusive, 1 error (including a rejected model), 2 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


def _add_common(p: argparse.ArgumentParser, model: bool = True, required: bool = True) -> None:
    if model:
        src = p.add_mutually_exclusive_group(required=required)
        src.add_argument("--zv", action="store_true", help="built-in Zipoy-Voorhees model (needs --delta)")
        src.add_argument("--model", type=Path, help="TOML model file (type = \"zv\" or \"weyl\")")
        p.add_argument("--delta", help="ZV parameter as p/q, or 'delta' for the symbolic family")
        p.add_argument("--convention", default="inverse_metric",
                       choices=["inverse_metric", "omega_literal", "metric"],
                       help="ZV Hamiltonian convention (default: inverse_metric)")
    p.add_argument("--samples", type=int, default=200, help="zero-test samples (default 200)")
    p.add_argument("--precision", type=int, default=40, help="working digits (default 40)")
    p.add_argument("--seed", default="0", help="sampling seed (default 0)")
    p.add_argument("--tol", default=None, help="relative zero threshold (default 1e-(precision-10))")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--json", action="store_true", help="emit the JSON report (default: short text summary)")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte-identity)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weylkt", description="Killing tensors of valence 3 in static axisymmetric "
                                                           "vacuum models: verification tools.")
    ap.add_argument("--version", action="version", version=f"weylkt {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-ernst", help="validate a Weyl model (Ernst residual and gamma gradient)")
    _add_common(p)

    p = sub.add_parser("analyze", help="rank, necessary criterion, conclusion and quadratic checks")
    _add_common(p)
    p.add_argument("--no-quadratic", action="store_true", help="skip the ZV quadratic family check")

    p = sub.add_parser("lemma8", help="jet-space elimination chain and branch ledger")
    _add_common(p, model=False)
    p.add_argument("--order", type=int, default=4, help="jet order cap (default 4)")

    p = sub.add_parser("geodesic", help="integrate a reduced geodesic and report invariant drift")
    _add_common(p, required=False)
    p.add_argument("--preset", choices=["zv1", "zv2"], help="bound orbit preset (sets model and initial data)")
    p.add_argument("--ic", help="x,y,px,py (px may be 'shell' to solve H = --shell)")
    p.add_argument("--pphi", type=float)
    p.add_argument("--pt", type=float)
    p.add_argument("--shell", type=float, default=-1.0, help="H value used when px = shell (default -1)")
    p.add_argument("--tmax", type=float, default=100.0)
    p.add_argument("--gtol", type=float, default=1e-12, help="integrator rtol = atol (default 1e-12)")
    p.add_argument("--candidate", action="append", default=[],
                   help="extra invariant: 'carter', 'pphi', or a momenta polynomial text")
    p.add_argument("--param", action="append", default=[], help="numeric parameter name=value")
    p.add_argument("--csv", type=Path, help="trajectory CSV output path")
    return ap


def _load_model(args, **kwargs):
    from .models import load_model_file, zipoy_voorhees

    if getattr(args, "zv", False):
        if not args.delta:
            raise SystemExit("--zv needs --delta")
        return zipoy_voorhees(args.delta, args.convention)
    return load_model_file(args.model, **kwargs)


def _tol(args):
    return Fraction(args.tol) if args.tol is not None else None


def _seed(args):
    try:
        return int(args.seed)
    except ValueError:
        return args.seed


def _header(args, command: str) -> dict:
    return {"tool": {"name": "weylkt", "version": __version__}, "command": command, "seed": _seed(args),
            "samples": args.samples, "precision": args.precision}


def _emit(args, report: dict, text: str) -> None:
    if args.json or args.out:
        data = json.dumps(report, sort_keys=True, indent=2, default=str) + "\n"
    else:
        data = text + "\n"
    if args.out:
        args.out.write_text(data, encoding="utf-8")
        if not args.json:
            sys.stdout.write(text + "\n")
    else:
        sys.stdout.write(data)


def cmd_check_ernst(args) -> int:
    from .models import ModelRejected, WeylModel

    rep = _header(args, "check-ernst")
    if args.zv:
        rep["notice"] = "ZV models live in the prolate spheroidal chart; the Ernst check applies to Weyl models"
        rep["status"] = "skipped"
        _emit(args, rep, rep["notice"])
        return EXIT_OK
    try:
        m = _load_model(args, n_samples=args.samples, precision=args.precision, seed=_seed(args))
    except ModelRejected as exc:
        rep["status"] = "rejected"
        rep["message"] = str(exc)
        rep["verdict"] = exc.verdict.to_json() if exc.verdict is not None else None
        _emit(args, rep, f"rejected: {exc}")
        return EXIT_ERROR
    if not isinstance(m, WeylModel):
        rep["status"] = "skipped"
        rep["notice"] = "not a Weyl model"
        _emit(args, rep, rep["notice"])
        return EXIT_OK
    rep["model"] = m.describe()
    rep["ernst"] = m.ernst_verdict.to_json() if m.ernst_verdict else None
    rep["gamma"] = [v.to_json() for v in m.gamma_verdicts]
    verdicts = [m.ernst_verdict, *m.gamma_verdicts]
    inconclusive = any(v is not None and v.status == "Inconclusive" for v in verdicts)
    rep["status"] = "inconclusive" if inconclusive else "accepted"
    _emit(args, rep, f"{m.name}: {rep['status']}")
    return EXIT_INCONCLUSIVE if inconclusive else EXIT_OK


def cmd_analyze(args) -> int:
    from .analysis import reducibility_report

    t0 = time.perf_counter()
    m = _load_model(args, n_samples=args.samples, precision=args.precision, seed=_seed(args))
    rep = reducibility_report(m, args.samples, precision=args.precision, seed=_seed(args), tol=_tol(args),
                              quadratic=not args.no_quadratic)
    rep["command"] = "analyze"
    if args.timings:
        rep["timings"] = {"total_seconds": round(time.perf_counter() - t0, 3)}
    text = f"{m.name}: {rep['conclusion']} ({rep['summary']})"
    _emit(args, rep, text)
    return EXIT_INCONCLUSIVE if rep["incomplete"] else EXIT_OK


def cmd_lemma8(args) -> int:
    from .jet import lemma8_pipeline

    res = lemma8_pipeline(args.order, n_samples=max(30, args.samples // 2), seed=_seed(args))
    rep = _header(args, "lemma8")
    rep.update(res.to_json())
    if not args.timings:
        for step in rep["lemma8_trace"]:
            step.pop("seconds", None)
        rep["timings"] = None
    else:
        rep["timings"] = {"total_seconds": round(res.seconds, 3)}
    ok = res.final_comparison.ok
    _emit(args, rep, f"final identity {'reproduced' if ok else 'NOT reproduced'}; "
                     f"{len(res.branches)} branches; {len(res.trace)} eliminations")
    return EXIT_OK if ok else EXIT_ERROR


def _candidate(model, text: str):
    from .analysis import carter_candidate
    from .momenta import MomentaPoly, parse_momenta

    if text == "carter":
        return "carter", carter_candidate(model)
    if text in ("pphi", "pt", "px", "py"):
        return text, MomentaPoly.momentum(model.field, text)
    return text, parse_momenta(text, model.field)


def cmd_geodesic(args) -> int:
    from .geodesic import PRESETS, integrate, momentum_from_shell
    from .models import zipoy_voorhees

    if args.preset:
        pr = PRESETS[args.preset]
        model = zipoy_voorhees(pr["delta"], args.convention)
        x, y, py, pphi, pt = pr["x"], pr["y"], pr["py"], pr["pphi"], pr["pt"]
        px = "shell"
    else:
        if not (args.zv or args.model):
            raise SystemExit("geodesic needs --zv/--model or --preset")
        model = _load_model(args)
        if args.ic is None or args.pphi is None or args.pt is None:
            raise SystemExit("geodesic needs --ic, --pphi and --pt (or --preset)")
        x, y, px, py = [s.strip() for s in args.ic.split(",")]
        x, y, py = float(x), float(y), float(py)
        pphi, pt = args.pphi, args.pt
    params = {k: float(Fraction(v)) for k, v in (p.split("=", 1) for p in args.param)}
    if px == "shell":
        px = momentum_from_shell(model, x, y, py, pphi, pt, args.shell, params)
    px = float(px)
    cands = dict(_candidate(model, c) for c in args.candidate)
    tr = integrate(model, [x, y, px, py], pphi, pt, args.tmax, args.gtol, cands, params=params)
    rep = _header(args, "geodesic")
    rep.update({"model": model.describe(), "initial": {"x": x, "y": y, "px": px, "py": py, "pphi": pphi, "pt": pt},
                "tmax": args.tmax, "integrator": {"method": "DOP853", "rtol": args.gtol, "atol": args.gtol},
                "trajectory": tr.summary(), "drift_floor": 1e-30, "timings": None})
    if args.csv:
        args.csv.write_text(tr.to_csv(), encoding="utf-8")
        rep["csv"] = str(args.csv)
    drift = ", ".join(f"{k}: {v:.3e}" for k, v in tr.summary()["max_drift"].items())
    _emit(args, rep, f"{model.name}: {tr.status}; max drift {drift}")
    return EXIT_OK if tr.status == "ok" else EXIT_INCONCLUSIVE


COMMANDS = {"check-ernst": cmd_check_ernst, "analyze": cmd_analyze, "lemma8": cmd_lemma8,
            "geodesic": cmd_geodesic}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SystemExit:
        raise
    except Exception as exc:  # reported, not swallowed: exit 1 carries the message
        sys.stderr.write(f"weylkt {args.command}: error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
