"""Command-line front end: classify structures, detect solitons, run
flows, and sweep family parameters.

Input is either a named catalog entry (with --param overrides) or a JSON
structure document (--input).  Output goes to stdout or --out as a
human-readable table, JSON, or CSV; flow, bracket-flow, and sweep can
additionally render a figure next to the data with --plot.

Exit codes: 0 on success (a flow that hits a singularity is still a
success, with the record flagged), 2 on validation errors, 3 on
numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import catalog, serialize
from .flow import bracket_flow_abc, laplacian_flow
from .forms import FormError, form_inner
from .g2core import (NonPositiveFormError, NotClosedError, classify,
                     functional_F, torsion)
from .liecoframe import JacobiError, derivations
from .soliton import detect

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_NUMERICAL_ERRORS = (NotClosedError, NonPositiveFormError, FormError,
                     ZeroDivisionError, FloatingPointError,
                     np.linalg.LinAlgError)

SWEEP_COLUMNS = ("F", "kind", "c", "lambda", "residual", "algebraic",
                 "tau_norm2", "scalar", "eigenvalue", "quadratic_ratio",
                 "closed", "torsion_free", "eigenform", "quadratic",
                 "admissible", "erp", "derivation_dim")


class CliError(Exception):
    """A user-facing error carrying its exit code."""

    def __init__(self, message, code=EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


# ----------------------------------------------------------------- parsing

def build_parser():
    parser = argparse.ArgumentParser(
        prog="g2calc",
        description="Computational calculus of closed G2-structures on "
                    "7-dimensional Lie algebras: classification, soliton "
                    "detection, and geometric flows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p):
        p.add_argument("--catalog", metavar="NAME",
                       help="catalog entry to build")
        p.add_argument("--param", action="append", metavar="NAME=VALUE",
                       help="parameter override; sweeps accept "
                            "name=start:end:step (inclusive)")
        p.add_argument("--input", metavar="PATH",
                       help="JSON structure document to load")

    def add_output(p, formats=("table", "json", "csv"), plot=False):
        p.add_argument("--format", choices=formats, default="table",
                       help="output format (default: table)")
        p.add_argument("--out", metavar="PATH",
                       help="write output to a file instead of stdout")
        if plot:
            p.add_argument("--plot", action="store_true",
                           help="also render a figure next to the output")

    def add_tol(p):
        p.add_argument("--tol", type=float, default=1e-8,
                       help="tolerance for classification and soliton "
                            "detection (default: 1e-8)")

    p = sub.add_parser("inspect", help="structural facts about a structure")
    add_input(p)
    add_output(p)
    add_tol(p)

    p = sub.add_parser("classify",
                       help="torsion-based classification report")
    add_input(p)
    add_output(p)
    add_tol(p)

    p = sub.add_parser("soliton", help="Laplacian-soliton certificate")
    add_input(p)
    add_output(p)
    add_tol(p)

    p = sub.add_parser("flow", help="integrate the Laplacian flow")
    add_input(p)
    add_output(p, plot=True)
    p.add_argument("--t-end", type=float, default=0.1,
                   help="integration time (default: 0.1)")
    p.add_argument("--dt", type=float, default=1e-3,
                   help="RK4 step size (default: 1e-3)")
    p.add_argument("--sample-every", type=int, default=1,
                   help="record every n-th step (default: 1)")

    p = sub.add_parser("bracket-flow",
                       help="integrate the two-step bracket flow in "
                            "(a, b, c) coordinates")
    p.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="initial coordinates a=..., b=..., c=...")
    add_output(p, plot=True)
    p.add_argument("--t-end", type=float, default=10.0,
                   help="integration time (default: 10)")
    p.add_argument("--dt", type=float, default=1e-3,
                   help="RK4 step size (default: 1e-3)")

    p = sub.add_parser("sweep",
                       help="evaluate a catalog family over a parameter "
                            "range")
    add_input(p)
    add_output(p, plot=True)
    add_tol(p)
    p.add_argument("--emit", default="F,kind,c",
                   help="comma-separated output columns (default: "
                        "F,kind,c); choices: " + ", ".join(SWEEP_COLUMNS))
    p.add_argument("--jobs", type=int, default=1,
                   help="evaluate sweep points in parallel (default: 1)")

    p = sub.add_parser("catalog", help="list or dump catalog entries")
    p.add_argument("action", choices=("list", "dump"))
    p.add_argument("name", nargs="?", help="entry name (for dump)")
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    add_output(p, formats=("table", "json"))

    return parser


def parse_params(pairs, allow_ranges=False):
    """Split --param values into fixed assignments and range specs."""
    fixed, ranges = {}, {}
    for text in pairs or []:
        name, sep, value = text.partition("=")
        name = name.strip()
        if not sep or not name:
            raise CliError(f"bad --param {text!r}: expected name=value "
                           "or name=start:end:step")
        try:
            if ":" in value:
                parts = value.split(":")
                if len(parts) != 3:
                    raise CliError(f"bad --param {text!r}: ranges take "
                                   "exactly start:end:step")
                start, end, step = (float(p) for p in parts)
                if step <= 0 or end < start:
                    raise CliError(f"bad --param {text!r}: need "
                                   "end >= start and step > 0")
                ranges[name] = (start, end, step)
            else:
                fixed[name] = float(value)
        except ValueError:
            raise CliError(f"bad --param {text!r}: values must be numbers")
    if ranges and not allow_ranges:
        raise CliError("parameter ranges (start:end:step) are only valid "
                       "for the sweep command")
    return fixed, ranges


def expand_range(start, end, step):
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return [start + k * step for k in range(count)]


def load_record(args, allow_ranges=False):
    """Build the structure record named by --catalog or --input."""
    if bool(args.catalog) == bool(args.input):
        raise CliError("exactly one input source is required: "
                       "--catalog NAME or --input PATH")
    if args.catalog:
        fixed, ranges = parse_params(args.param, allow_ranges)
        record = catalog.build(args.catalog, **fixed)
        return record, ranges
    parse_params(args.param)  # reject stray assignments early
    if args.param:
        raise CliError("--param only applies to --catalog inputs")
    path = Path(args.input)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON in {path}: line {exc.lineno} "
                       f"column {exc.colno}: {exc.msg}")
    structure, lie, name, parameters = serialize.structure_from_dict(
        document)
    record = catalog.ExampleRecord(name=name or path.stem,
                                   structure=structure, lie=lie,
                                   parameters=parameters)
    return record, {}


# ------------------------------------------------------------------ output

def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return "nan"
        return format(float(value), ".12g")
    return str(value)


def render_pairs(pairs):
    width = max(len(key) for key, _ in pairs)
    return "".join(f"{key:<{width}}  {_fmt(value)}\n" for key, value in pairs)


def render_columns(header, rows):
    cells = [header] + [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(r[m]) for r in cells) for m in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
             for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "".join(line + "\n" for line in lines)


def write_output(args, text):
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)


def maybe_plot(args, make_figure):
    if not getattr(args, "plot", False):
        return
    from . import plots

    if args.out:
        path = str(Path(args.out).with_suffix(".png"))
    else:
        path = f"g2calc-{args.command}.png"
    plots.save_figure(make_figure(), path)
    stream = sys.stdout if args.out else sys.stderr
    print(f"figure written to {path}", file=stream)


def _flatten_report(document):
    """One header/row pair from a nested report document (for CSV)."""
    header, row = [], []
    for key, value in document.items():
        if key == "residuals":
            for sub, subval in value.items():
                header.append(f"residual_{sub}")
                row.append(subval)
        elif key == "ricci_eigenvalues":
            for m, ev in enumerate(value, start=1):
                header.append(f"ricci_eig_{m}")
                row.append(ev)
        elif key == "D":
            continue
        elif isinstance(value, dict):
            for sub, subval in value.items():
                header.append(f"{key}_{sub}")
                row.append(subval)
        else:
            header.append(key)
            row.append(value)
    return header, row


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "null" if not math.isfinite(value) else format(
            float(value), ".17g")
    return str(value)


def report_output(args, document, table_pairs):
    if args.format == "json":
        return serialize.dumps_json(document)
    if args.format == "csv":
        header, row = _flatten_report(document)
        import io

        buf = io.StringIO()
        serialize.write_csv(buf, header, [[_csv_cell(v) for v in row]])
        return buf.getvalue()
    return render_pairs(table_pairs)


# ---------------------------------------------------------------- commands

def cmd_inspect(args):
    record, _ = load_record(args)
    structure = record.structure
    closed_residual = structure.closed_residual
    closed = closed_residual < args.tol
    document = {}
    if record.name:
        document["name"] = record.name
    if record.parameters:
        document["parameters"] = {k: float(v)
                                  for k, v in record.parameters.items()}
    document.update({
        "closed": bool(closed),
        "closed_residual": float(closed_residual),
        "d_squared_residual": float(structure.coframe.check_d_squared()),
        "metric_diagonal": np.diag(structure.metric.matrix).tolist(),
        "orientation_sign": int(structure.metric.orientation_sign),
        "phi_norm2": float(form_inner(structure.phi, structure.phi,
                                      structure.metric)),
    })
    if record.lie is not None:
        document["jacobi_residual"] = float(record.lie.jacobi_residual())
        document["derivation_dim"] = int(derivations(record.lie).shape[0])
    if closed:
        package = torsion(structure)
        document["tau_norm2"] = float(package.tau_norm2)
        document["scalar_curvature"] = float(package.scalar)
        document["ricci_eigenvalues"] = serialize.ricci_eigenvalues(
            package, structure.metric).tolist()
    pairs = [(key, value) for key, value in document.items()
             if key not in ("metric_diagonal", "ricci_eigenvalues",
                            "parameters")]
    if "parameters" in document:
        pairs[1:1] = [(f"param {k}", v)
                      for k, v in document["parameters"].items()]
    pairs.append(("metric_diagonal",
                  " ".join(_fmt(v) for v in document["metric_diagonal"])))
    if "ricci_eigenvalues" in document:
        pairs.append(("ricci_eigenvalues",
                      " ".join(_fmt(v)
                               for v in document["ricci_eigenvalues"])))
    write_output(args, report_output(args, document, pairs))
    return EXIT_OK


def _classification_document(record, tol):
    structure = record.structure
    package = torsion(structure, tol=max(tol, 1e-9))
    report = classify(structure, package, tol=tol)
    document = serialize.classification_to_dict(
        report, package, structure.metric,
        name=record.name, parameters=record.parameters)
    try:
        document["F"] = functional_F(package)
    except ZeroDivisionError:
        document["F"] = None
    if record.lie is not None:
        cert = detect(structure, record.lie, package, tol=tol)
        document["soliton"] = serialize.certificate_to_dict(cert)
    return document


def cmd_classify(args):
    record, _ = load_record(args)
    document = _classification_document(record, args.tol)
    pairs = []
    for key, value in document.items():
        if key == "residuals":
            pairs.extend((f"residual_{k}", v) for k, v in value.items())
        elif key == "ricci_eigenvalues":
            pairs.append((key, " ".join(_fmt(v) for v in value)))
        elif key == "parameters":
            pairs.extend((f"param {k}", v) for k, v in value.items())
        elif key == "soliton":
            pairs.extend([("soliton_kind", value["kind"]),
                          ("soliton_c", value["c"]),
                          ("soliton_lambda", value["lambda"]),
                          ("soliton_residual", value["residual"]),
                          ("soliton_algebraic", value["algebraic"])])
        else:
            pairs.append((key, value))
    write_output(args, report_output(args, document, pairs))
    return EXIT_OK


def cmd_soliton(args):
    record, _ = load_record(args)
    if record.lie is None:
        raise CliError("soliton detection needs Lie brackets; this input "
                       "carries only coframe derivative rules")
    package = torsion(record.structure)
    cert = detect(record.structure, record.lie, package, tol=args.tol)
    document = serialize.certificate_to_dict(cert)
    if record.name:
        document = {"name": record.name, **document}
    pairs = [(k, v) for k, v in document.items() if k != "D"]
    matrix = np.asarray(cert.D)
    pairs.append(("D_diagonal", " ".join(_fmt(v) for v in np.diag(matrix))))
    pairs.append(("D_off_diagonal_max",
                  float(np.max(np.abs(matrix - np.diag(np.diag(matrix)))))))
    write_output(args, report_output(args, document, pairs))
    return EXIT_OK


def cmd_flow(args):
    if args.dt <= 0 or args.t_end <= 0:
        raise CliError("flow needs --dt > 0 and --t-end > 0")
    record, _ = load_record(args)
    trajectory = laplacian_flow(record.structure, t_end=args.t_end,
                                dt=args.dt,
                                sample_every=args.sample_every)
    if args.format == "csv":
        import io

        buf = io.StringIO()
        trailer = None
        if trajectory.singular:
            trailer = "# singular_at=" + format(trajectory.t_singular,
                                                ".17g")
        serialize.write_csv(buf, serialize.trajectory_header(),
                            serialize.trajectory_rows(trajectory), trailer)
        text = buf.getvalue()
    elif args.format == "json":
        diag = trajectory.diagnostics()
        text = serialize.dumps_json({
            "singular": trajectory.singular,
            "t_singular": trajectory.t_singular,
            "times": trajectory.times.tolist(),
            "phi": trajectory.coeffs.tolist(),
            "tau_norm2": diag["tau_norm2"].tolist(),
            "scalar": diag["scalar"].tolist(),
            "F": diag["F"].tolist(),
            "closed_residual": diag["closed_residual"].tolist(),
        })
    else:
        diag = trajectory.diagnostics()
        pairs = [
            ("samples", len(trajectory)),
            ("t_final", trajectory.times[-1]),
            ("singular", trajectory.singular),
        ]
        if trajectory.singular:
            pairs.append(("singular_at", trajectory.t_singular))
        pairs.extend([
            ("tau_norm2_start", diag["tau_norm2"][0]),
            ("tau_norm2_final", diag["tau_norm2"][-1]),
            ("scalar_final", diag["scalar"][-1]),
            ("F_final", diag["F"][-1]),
            ("max_closed_residual", diag["closed_residual"].max()),
        ])
        text = render_pairs(pairs)
    write_output(args, text)

    def _figure():
        from . import plots

        return plots.flow_figure(
            trajectory, title=f"Laplacian flow: {record.name or 'input'}")

    maybe_plot(args, _figure)
    return EXIT_OK


def cmd_bracket_flow(args):
    if args.dt <= 0 or args.t_end <= 0:
        raise CliError("bracket-flow needs --dt > 0 and --t-end > 0")
    fixed, _ = parse_params(args.param)
    unknown = set(fixed) - {"a", "b", "c"}
    if unknown:
        raise CliError("bracket-flow takes exactly the coordinates "
                       f"a, b, c; got {sorted(unknown)}")
    point = (fixed.get("a", 1.0), fixed.get("b", 1.0), fixed.get("c", 1.0))
    trajectory = bracket_flow_abc(point, t_end=args.t_end, dt=args.dt)
    if args.format == "csv":
        import io

        buf = io.StringIO()
        serialize.write_csv(buf, serialize.bracket_header(),
                            serialize.bracket_rows(trajectory))
        text = buf.getvalue()
    elif args.format == "json":
        text = serialize.dumps_json({
            "times": trajectory.times.tolist(),
            "points": trajectory.points.tolist(),
            "f": trajectory.f.tolist(),
            "funcG": trajectory.funcG.tolist(),
            "H": trajectory.H.tolist(),
            "F": trajectory.F.tolist(),
        })
    else:
        pairs = [
            ("samples", len(trajectory)),
            ("t_final", trajectory.times[-1]),
            ("start", " ".join(_fmt(v) for v in trajectory.points[0])),
            ("final", " ".join(_fmt(v) for v in trajectory.points[-1])),
            ("F_start", trajectory.F[0]),
            ("F_final", trajectory.F[-1]),
        ]
        text = render_pairs(pairs)
    write_output(args, text)

    def _figure():
        from . import plots

        return plots.bracket_figure(trajectory)

    maybe_plot(args, _figure)
    return EXIT_OK


def _sweep_point(name, parameters, emit, tol):
    """Evaluate one sweep point; returns a plain dict (pickle-friendly)."""
    record = catalog.build(name, **parameters)
    package = torsion(record.structure, tol=max(tol, 1e-9))
    values = {}
    report = None
    cert = None
    report_keys = {"eigenvalue", "quadratic_ratio", "closed",
                   "torsion_free", "eigenform", "quadratic", "admissible",
                   "erp"}
    cert_keys = {"kind", "c", "lambda", "residual", "algebraic"}
    if report_keys & set(emit):
        report = classify(record.structure, package, tol=tol)
    if cert_keys & set(emit) and record.lie is not None:
        cert = detect(record.structure, record.lie, package, tol=tol)
    for key in emit:
        if key == "F":
            try:
                values[key] = functional_F(package)
            except ZeroDivisionError:
                values[key] = None
        elif key == "tau_norm2":
            values[key] = float(package.tau_norm2)
        elif key == "scalar":
            values[key] = float(package.scalar)
        elif key == "derivation_dim":
            values[key] = (None if record.lie is None
                           else int(derivations(record.lie).shape[0]))
        elif key in report_keys:
            attr = ("extremally_ricci_pinched" if key == "erp" else key)
            values[key] = getattr(report, attr)
        elif key in cert_keys:
            if cert is None:
                values[key] = None
            elif key == "lambda":
                values[key] = float(cert.lam)
            else:
                values[key] = getattr(cert, key)
        else:
            raise CliError(f"unknown --emit column {key!r}; choices: "
                           + ", ".join(SWEEP_COLUMNS))
    return values


def cmd_sweep(args):
    if args.input:
        raise CliError("sweep works on catalog families; use --catalog")
    if not args.catalog:
        raise CliError("sweep needs --catalog NAME")
    fixed, ranges = parse_params(args.param, allow_ranges=True)
    if len(ranges) != 1:
        raise CliError("sweep needs exactly one ranged parameter "
                       "(name=start:end:step)")
    emit = tuple(key.strip() for key in args.emit.split(",") if key.strip())
    if not emit:
        raise CliError("--emit must name at least one column")
    for key in emit:
        if key not in SWEEP_COLUMNS:
            raise CliError(f"unknown --emit column {key!r}; choices: "
                           + ", ".join(SWEEP_COLUMNS))
    param_name, bounds = next(iter(ranges.items()))
    grid = expand_range(*bounds)
    jobs = max(1, args.jobs)
    tasks = [(args.catalog, {**fixed, param_name: value}, emit, args.tol)
             for value in grid]
    if jobs == 1:
        results = [_sweep_point(*task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point,
                                    *zip(*tasks)))
    header = [param_name, *emit]
    rows = [[value, *(point[key] for key in emit)]
            for value, point in zip(grid, results)]
    if args.format == "csv":
        import io

        buf = io.StringIO()
        serialize.write_csv(buf, header,
                            [[_csv_cell(v) for v in row] for row in rows])
        text = buf.getvalue()
    elif args.format == "json":
        text = serialize.dumps_json([
            {param_name: value, **point}
            for value, point in zip(grid, results)
        ])
    else:
        text = render_columns(header, rows)
    write_output(args, text)

    def _figure():
        from . import plots

        columns = {key: [point[key] for point in results] for key in emit}
        return plots.sweep_figure(
            param_name, grid, columns,
            title=f"{args.catalog}: sweep over {param_name}")

    maybe_plot(args, _figure)
    return EXIT_OK


def cmd_catalog(args):
    if args.action == "list":
        rows = []
        for name in catalog.names():
            defaults = catalog.parameter_names(name)
            described = ", ".join(f"{k}={_fmt(v)}"
                                  for k, v in defaults.items()) or "-"
            rows.append((name, described))
        if args.format == "json":
            text = serialize.dumps_json([
                {"name": name,
                 "parameters": catalog.parameter_names(name)}
                for name in catalog.names()
            ])
        else:
            text = render_columns(["name", "parameters"], rows)
        write_output(args, text)
        return EXIT_OK
    if not args.name:
        raise CliError("catalog dump needs an entry name")
    fixed, _ = parse_params(args.param)
    record = catalog.build(args.name, **fixed)
    document = serialize.structure_to_dict(record.structure, record.lie,
                                           record.name, record.parameters)
    write_output(args, serialize.dumps_json(document))
    return EXIT_OK


_COMMANDS = {
    "inspect": cmd_inspect,
    "classify": cmd_classify,
    "soliton": cmd_soliton,
    "flow": cmd_flow,
    "bracket-flow": cmd_bracket_flow,
    "sweep": cmd_sweep,
    "catalog": cmd_catalog,
}


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except JacobiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, KeyError, TypeError, OSError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return EXIT_VALIDATION


def main(argv=None):
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
