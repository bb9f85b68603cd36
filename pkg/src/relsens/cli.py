"""Command-line driver.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
64 command-line usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import report
from .config import load_config
from .errors import ConfigError, NumericalFailure, ReliabilityError, StudyError
from .form import form_search
from .harness import StudyConfig, run_study
from .sampling import Method, SamplingPlan, export_samples_csv, run
from .sensitivity import reliability_sensitivities

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integer(s), got {text!r}") from None
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("sample counts must be positive")
    return vals


def _float_list(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected number(s), got {text!r}") from None
    if any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError("variance steps must be positive")
    return vals


def build_parser():
    parser = _Parser(prog="relsens", description="Reliability analysis with variance-based sensitivity indices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, helptext in [
        ("form", "first order reliability method"),
        ("mcs", "plain Monte Carlo simulation"),
        ("is", "importance sampling around a center (default: the FORM design point)"),
        ("study", "repeated runs with mean/std summaries"),
        ("validate", "check a configuration file"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="analysis configuration (JSON)")
        if name == "validate":
            continue
        p.add_argument("--output", help="write results to this file instead of standard output")
        p.add_argument("--format", choices=report.FORMATS, default="text")
        if name == "form":
            continue
        p.add_argument("--samples", type=_int_list, help="sample count(s), comma separated")
        p.add_argument("--seed", type=int, help="random seed (base seed for studies)")
        p.add_argument("--delta-var", type=_float_list, help="variance step(s), comma separated")
        p.add_argument("--runs", type=int, help="number of repeated runs (study)")
        if name in ("mcs", "is"):
            p.add_argument("--export-samples", metavar="CSV", help="write (u, g, weight) per sample")
    return parser


def _apply_overrides(cfg, args):
    a = cfg.analysis
    if getattr(args, "samples", None):
        a.n_samples = args.samples
    if getattr(args, "seed", None) is not None:
        a.seed = args.seed
    if getattr(args, "delta_var", None):
        a.delta_vars = args.delta_var
    if getattr(args, "runs", None) is not None:
        if args.runs < 1:
            raise UsageError("--runs must be positive")
        a.runs = args.runs


def _is_center(cfg):
    a = cfg.analysis
    t = cfg.model.transform
    if isinstance(a.is_center, str):
        fr = form_search(cfg.model.limit_state, t)
        return t.u_to_z(fr.u_star)
    return a.is_center


def _emit(text, args):
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _numerical(exc):
    cause = exc.cause if isinstance(exc, StudyError) else exc
    msg = {"error": type(cause).__name__, "message": str(cause)}
    if isinstance(exc, StudyError):
        msg["run"] = exc.run
    if hasattr(cause, "index"):
        msg["sample"] = cause.index
    print(json.dumps(msg), file=sys.stderr)
    return EXIT_NUMERICAL


def cmd_form(cfg, args):
    model = cfg.model
    fr = form_search(model.limit_state, model.transform)
    idx = fr.indices
    if args.format == "json-lines":
        rec = dict(method="form", names=list(model.names), beta=fr.beta, pf=fr.pf,
                   alpha=fr.alpha.tolist(), u_star=fr.u_star.tolist(), indices=idx.tolist(),
                   iterations=fr.iterations, converged=fr.converged)
        return report.records_to_jsonl([rec])
    rows = [dict(method="form", N=None, delta_var=None, run=None, beta_hat=fr.beta, pf_hat=fr.pf, S=list(idx))]
    if args.format == "csv":
        return report.format_csv(rows, len(idx))
    title = f"FORM: converged in {fr.iterations} iterations ({fr.g_evaluations} limit-state calls)"
    return report.format_text(rows, model.names, title)


def cmd_sample(cfg, args, method):
    model = cfg.model
    a = cfg.analysis
    center = _is_center(cfg) if method is Method.IMPORTANCE_SAMPLING else None
    rows, records, notes = [], [], []
    status = EXIT_OK
    for n in a.n_samples:
        plan = SamplingPlan(method, n, a.seed, center)
        batch, est = run(model.limit_state, model.transform, plan)
        if args.export_samples:
            path = args.export_samples if len(a.n_samples) == 1 else f"{args.export_samples}.{n}"
            export_samples_csv(batch, path, model.names)
        for dv in a.delta_vars:
            sens = reliability_sensitivities(batch, dv)
            if sens.all_safe:
                status = EXIT_NUMERICAL
                notes.append(f"warning: no failures in {n} samples; indices undefined")
            elif sens.negative:
                notes.append(f"warning: negative derivative estimate at N={n}, delta_var={dv}")
            rows.append(dict(method=method.value, N=n, delta_var=dv, run=0,
                             beta_hat=est.beta_hat, pf_hat=est.pf_hat, S=list(sens.indices)))
            records.append(dict(method=method.value, names=list(model.names), N=n, seed=a.seed,
                                delta_var=dv, pf_hat=est.pf_hat, beta_hat=est.beta_hat,
                                n_failures=est.n_failures, std_error=est.std_error,
                                dpf_dvar=sens.dpf_dvar.tolist(), indices=sens.indices.tolist(),
                                all_safe=sens.all_safe, negative=sens.negative))
    if args.format == "json-lines":
        text = report.records_to_jsonl(records)
    elif args.format == "csv":
        text = report.format_csv(rows, model.dim)
    else:
        title = f"{'Monte Carlo' if method is Method.MONTE_CARLO else 'Importance sampling'} (seed {a.seed})"
        text = report.format_text(rows, model.names, title)
    if status != EXIT_OK:
        print(json.dumps({"error": "AllSafe", "message": "no failure samples; sensitivity indices undefined"}),
              file=sys.stderr)
    for note in notes:
        print(note, file=sys.stderr)
    return text, status


def cmd_study(cfg, args):
    model = cfg.model
    a = cfg.analysis
    plans = []
    for method in a.methods:
        center = _is_center(cfg) if method is Method.IMPORTANCE_SAMPLING else None
        plans.extend(SamplingPlan(method, n, 0, center) for n in a.n_samples)
    summary = run_study(StudyConfig(model, plans, a.delta_vars, a.runs, a.seed))
    if args.format == "json-lines":
        return report.summary_to_jsonl(summary)
    rows = report.summary_rows(summary)
    if args.format == "csv":
        return report.format_csv(rows, model.dim)
    title = f"Study: {a.runs} runs, seeds {a.seed}..{a.seed + a.runs - 1}, {summary.wall_time:.1f} s"
    return report.format_text(rows, model.names, title)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"relsens: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"relsens: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "validate":
            print(f"{args.config}: OK ({cfg.model.dim} variables: {', '.join(cfg.model.names)})")
            return EXIT_OK
        if args.command == "form":
            _emit(cmd_form(cfg, args), args)
            return EXIT_OK
        if args.command in ("mcs", "is"):
            text, status = cmd_sample(cfg, args, Method.parse(args.command))
            _emit(text, args)
            return status
        _emit(cmd_study(cfg, args), args)
        return EXIT_OK
    except (NumericalFailure, StudyError) as exc:
        if isinstance(exc, StudyError) and not isinstance(exc.cause, NumericalFailure):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        return _numerical(exc)
    except ReliabilityError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
