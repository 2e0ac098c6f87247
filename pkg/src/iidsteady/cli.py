"""Command-line front end.

Subcommands: check, steady, evolve, correlate, spectrum, demo. Models come
from a JSON file or from the built-in catalog (--example ID --param k=v).
Exit codes: 0 ok / verdict reported, 1 --expect mismatch, 2 input error,
3 size cap exceeded. Structured reports are JSON, time series are CSV with
17-significant-digit floats; identical inputs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import checker, dynamics, steady
from .errors import CapExceeded, ConditionViolation, IIDSteadyError, ModelFormatError
from .models import ExampleSpec, build_example
from .modelio import dump_canonical, load_model
from .steady import LocalState

THEOREM_CHOICES = ("1", "2", "3", "5", "5p", "8", "all")


def _fmt(x):
    return f"{float(x):.17g}"


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_json(path, obj):
    text = json.dumps(obj, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _matrix_out(m):
    return [[float(z.real), float(z.imag)] for z in np.asarray(m, dtype=complex).reshape(-1)]


def _add_model_args(p):
    p.add_argument("model", nargs="?", help="model JSON file")
    p.add_argument("--example", type=int, help="built-in model id (1..6)")
    p.add_argument("--param", action="append", default=[], metavar="K=V",
                   help="parameter override for --example")
    p.add_argument("--n", type=int, help="site count override")
    p.add_argument("--pairs", help="interacting pairs, e.g. '0-1,1-2' (default all)")
    p.add_argument("--dump-canonical", metavar="PATH",
                   help="write the resolved model back as canonical JSON")
    p.add_argument("--tol", type=float, default=None,
                   help="structural tolerance override")


def _parse_pairs(text):
    pairs = []
    for chunk in text.split(","):
        try:
            i, j = chunk.split("-")
            pairs.append((int(i), int(j)))
        except ValueError as exc:
            raise ModelFormatError("--pairs", f"expected i-j, got {chunk!r}") from exc
    return tuple(pairs)


def _resolve_model(args):
    if args.model and args.example is not None:
        raise ModelFormatError("model", "give either a file or --example, not both")
    if args.model:
        model = load_model(args.model)
        if args.n is not None and args.n != model.n:
            raise ModelFormatError("--n", "site override conflicts with the model file")
    elif args.example is not None:
        params = {}
        for item in args.param:
            if "=" not in item:
                raise ModelFormatError("--param", f"expected K=V, got {item!r}")
            key, val = item.split("=", 1)
            try:
                params[key] = float(val)
            except ValueError as exc:
                raise ModelFormatError("--param", f"{key}: not a number") from exc
        pairs = _parse_pairs(args.pairs) if args.pairs else None
        spec = ExampleSpec(id=args.example, n=args.n if args.n else 3,
                           params=params, pairs=pairs)
        model = build_example(spec)
    else:
        raise ModelFormatError("model", "give a model file or --example")
    if args.dump_canonical:
        dump_canonical(model, args.dump_canonical)
    return model


def _load_state(spec, model):
    if spec == "meanfield":
        family = steady.meanfield_steady_state(model)
        if family is None:
            return None
        return family.representative()
    try:
        with open(spec) as fh:
            doc = json.load(fh)
        entries = doc["matrix"] if isinstance(doc, dict) else doc
        d = model.space.dim
        flat = np.array([complex(re, im) for re, im in entries])
        return LocalState.from_matrix(flat.reshape(d, d), space=model.space)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError("--state", str(exc)) from exc


def cmd_check(args):
    model = _resolve_model(args)
    tol = args.tol if args.tol else checker.STRUCTURAL_TOL
    state = _load_state(args.state, model) if args.state else None
    names = THEOREM_CHOICES[:-1] if args.theorem == "all" else (args.theorem,)
    if args.theorem == "all":
        names = tuple(n for n in names if n != "3" or model.space.dim == 2)
    elif args.theorem == "3" and model.space.dim != 2:
        raise ModelFormatError("--theorem", "check 3 applies to local dimension 2")
    reports = [checker.CHECKS[name](model, state, tol) for name in names]
    overall = all(r.overall for r in reports)
    out = {"model": model.name or args.model or f"example:{args.example}",
           "overall": overall,
           "checks": [r.to_dict() for r in reports]}
    _write_json(args.json, out)
    if args.expect is not None:
        expected = args.expect == "yes"
        return 0 if overall == expected else 1
    return 0


def cmd_steady(args):
    model = _resolve_model(args)
    rank_tol = args.tol if args.tol else None
    family = (steady.meanfield_steady_state(model, rank_tol=rank_tol)
              if rank_tol else steady.meanfield_steady_state(model))
    out = {"model": model.name, "sites": model.n}
    if family is None:
        out["meanfield"] = None
    else:
        out["meanfield"] = {
            "null_dim": family.null_dim,
            "residual": family.residual,
            "commuting_family": family.commuting,
            "states": [_matrix_out(st.rho) for st in family.states],
        }
    if args.oracle:
        result = steady.full_steady_states(model)
        oracle = {"null_dim": result.null_dim}
        if family is not None:
            oracle["iid_projection_residuals"] = [
                result.projection_residual(st.iid(model.n)) for st in family.states]
            oracle["iid_residuals"] = [
                steady.verify_iid(model, st.rho) for st in family.states]
        out["oracle"] = oracle
    _write_json(args.json, out)
    return 0


def _initial_state(args, model):
    if args.rho0 == "iid-meanfield":
        family = steady.meanfield_steady_state(model)
        if family is None:
            raise ConditionViolation("no mean-field state to build rho0 from")
        return family.representative().iid(model.n)
    if args.rho0 == "first-basis-state":
        rho = np.zeros((model.dim, model.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    try:
        with open(args.rho0) as fh:
            doc = json.load(fh)
        entries = doc["matrix"] if isinstance(doc, dict) else doc
        flat = np.array([complex(re, im) for re, im in entries])
        return flat.reshape(model.dim, model.dim)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError("--rho0", str(exc)) from exc


def cmd_evolve(args):
    model = _resolve_model(args)
    times = np.linspace(args.t0, args.tmax, args.steps)
    rho0 = _initial_state(args, model)
    states = dynamics.evolve_full(model, rho0, times)
    basis = dynamics.lie_basis(model.space)
    ops = dynamics.total_basis_operators(model, basis)
    header = ["t"] + [f"X_{lab}" for lab in basis.labels] + ["trace", "iid_distance"]
    rows = []
    for t, rho in zip(times, states):
        row = [t] + [np.trace(op @ rho).real for op in ops]
        row.append(np.trace(rho).real)
        row.append(dynamics.iid_distance(rho, model.n, model.space.dim))
        rows.append(row)
    _write_csv(args.out, header, rows)
    return 0


def _series_csv(path, series):
    labels = series.basis_labels
    k = series.values.shape[1]
    header = ["tau"]
    pairs = [(a, b) for b in range(k) for a in range(k)]   # column-major
    for (a, b) in pairs:
        header += [f"C_re_{labels[a]}{labels[b]}", f"C_im_{labels[a]}{labels[b]}"]
    rows = []
    for idx, tau in enumerate(series.times):
        row = [tau]
        for (a, b) in pairs:
            z = series.values[idx, a, b]
            row += [z.real, z.imag]
        rows.append(row)
    _write_csv(path, header, rows)


def cmd_correlate(args):
    model = _resolve_model(args)
    taus = np.linspace(0.0, args.tmax, args.steps)
    family = steady.meanfield_steady_state(model)
    if family is None:
        raise ConditionViolation("correlations start from the mean-field steady state")
    rho_loc = family.representative().rho
    series = dynamics.correlate_analytic(model, rho_loc, taus,
                                         connected=args.connected)
    _series_csv(f"{args.out}_analytic.csv", series)
    if args.oracle:
        basis = dynamics.lie_basis(model.space)
        ops = dynamics.total_basis_operators(model, basis)
        rho0 = family.representative().iid(model.n)
        brute = dynamics.correlate_bruteforce(model, rho0, ops, ops, taus,
                                              labels=basis.labels,
                                              connected=args.connected)
        _series_csv(f"{args.out}_bruteforce.csv", brute)
        dev = float(np.abs(series.values - brute.values).max())
        _write_json("-", {"max_deviation": dev})
    return 0


def cmd_spectrum(args):
    model = _resolve_model(args)
    report = (dynamics.spectrum(model, zero_tol=args.tol) if args.tol
              else dynamics.spectrum(model))
    order = np.lexsort((report.eigenvalues.imag, report.eigenvalues.real))[::-1]
    out = {
        "model": model.name,
        "sites": model.n,
        "eigenvalues": [[float(z.real), float(z.imag)]
                        for z in report.eigenvalues[order]],
        "spectral_gap": report.spectral_gap,
        "zero_multiplicity": report.zero_multiplicity,
        "purely_imaginary": report.purely_imaginary_flag,
        "defective": report.defective_flag,
    }
    _write_json(args.json, out)
    return 0


def cmd_demo(args):
    import os

    from .figures import (save_correlation_figure, save_evolution_figure,
                          save_spectrum_figure)

    default_n = 2 if args.id == 5 else 3       # d=4 spectra get big fast
    spec = ExampleSpec(id=args.id, n=args.n if args.n else default_n,
                       params=_demo_params(args))
    model = build_example(spec)
    os.makedirs(args.outdir, exist_ok=True)
    path = lambda name: os.path.join(args.outdir, name)
    dump_canonical(model, path("model.json"))

    state = None
    family = steady.meanfield_steady_state(model)
    reports = []
    for name in ("1", "2", "3", "5", "5p", "8"):
        if name == "3" and model.space.dim != 2:
            continue
        reports.append(checker.CHECKS[name](model, state))
    _write_json(path("check_report.json"),
                {"model": model.name,
                 "overall": all(r.overall for r in reports),
                 "checks": [r.to_dict() for r in reports]})

    steady_out = {"meanfield": None}
    if family is not None:
        steady_out["meanfield"] = {
            "null_dim": family.null_dim,
            "residual": family.residual,
            "states": [_matrix_out(st.rho) for st in family.states]}
        result = steady.full_steady_states(model)
        steady_out["oracle"] = {
            "null_dim": result.null_dim,
            "iid_projection_residual": result.projection_residual(
                family.representative().iid(model.n))}
    _write_json(path("steady.json"), steady_out)

    spec_report = dynamics.spectrum(model)
    order = np.lexsort((spec_report.eigenvalues.imag, spec_report.eigenvalues.real))[::-1]
    _write_json(path("spectrum.json"), {
        "eigenvalues": [[float(z.real), float(z.imag)]
                        for z in spec_report.eigenvalues[order]],
        "spectral_gap": spec_report.spectral_gap,
        "zero_multiplicity": spec_report.zero_multiplicity,
        "purely_imaginary": spec_report.purely_imaginary_flag,
        "defective": spec_report.defective_flag})
    save_spectrum_figure(spec_report, path("spectrum.png"))

    times = np.linspace(0.0, args.tmax, args.steps)
    rho0 = np.zeros((model.dim, model.dim), dtype=complex)
    rho0[0, 0] = 1.0
    states = dynamics.evolve_full(model, rho0, times)
    basis = dynamics.lie_basis(model.space)
    ops = dynamics.total_basis_operators(model, basis)
    cols = [[np.trace(op @ rho).real for rho in states] for op in ops]
    witness = [dynamics.iid_distance(rho, model.n, model.space.dim) for rho in states]
    header = ["t"] + [f"X_{lab}" for lab in basis.labels] + ["trace", "iid_distance"]
    rows = [[t] + [c[k] for c in cols] + [np.trace(states[k]).real, witness[k]]
            for k, t in enumerate(times)]
    _write_csv(path("evolve.csv"), header, rows)
    save_evolution_figure(times, cols, [f"X_{lab}" for lab in basis.labels],
                          path("evolution.png"), witness=witness)

    if family is not None:
        stability = checker.check_product_stability(model)
        if stability.overall:
            taus = np.linspace(0.0, args.tmax, args.steps)
            rho_loc = family.representative().rho
            series = dynamics.correlate_analytic(model, rho_loc, taus, connected=True)
            _series_csv(path("correlate_analytic.csv"), series)
            brute = dynamics.correlate_bruteforce(
                model, family.representative().iid(model.n), ops, ops, taus,
                labels=basis.labels, connected=True)
            _series_csv(path("correlate_bruteforce.csv"), brute)
            save_correlation_figure(series, path("correlations.png"))
    print(f"demo artifacts written to {args.outdir}")
    return 0


def _demo_params(args):
    params = {}
    for item in args.param:
        key, val = item.split("=", 1)
        params[key] = float(val)
    return params


def build_parser():
    parser = argparse.ArgumentParser(
        prog="iidsteady",
        description="product-form steady states of driven-dissipative lattice "
                    "models: verdicts, solvers, dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run condition checks")
    _add_model_args(p)
    p.add_argument("--theorem", choices=THEOREM_CHOICES, default="all")
    p.add_argument("--state", default=None,
                   help="'meanfield' or a JSON file with a local state")
    p.add_argument("--json", default=None, help="report file (default stdout)")
    p.add_argument("--expect", choices=("yes", "no"), default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("steady", help="mean-field and oracle steady states")
    _add_model_args(p)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("evolve", help="full evolution, CSV observables")
    _add_model_args(p)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--rho0", default="first-basis-state",
                   help="'iid-meanfield', 'first-basis-state', or a JSON matrix file")
    p.add_argument("--out", default="-", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("correlate", help="two-time correlations, CSV")
    _add_model_args(p)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--oracle", action="store_true",
                   help="also write the brute-force series and print the deviation")
    p.add_argument("--connected", action="store_true")
    p.add_argument("--out", default="correlate", help="output file prefix")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("spectrum", help="generator spectrum, JSON")
    _add_model_args(p)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("demo", help="full report with figures for a built-in model")
    p.add_argument("id", type=int, help="built-in model id (1..6)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--param", action="append", default=[], metavar="K=V")
    p.add_argument("--outdir", default="demo_out")
    p.add_argument("--tmax", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=200)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except CapExceeded as exc:
        print(f"size cap exceeded: {exc} (limiting dimension {exc.dim})",
              file=sys.stderr)
        return 3
    except ConditionViolation as exc:
        print(f"request invalid for this model: {exc}", file=sys.stderr)
        return 2
    except IIDSteadyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
