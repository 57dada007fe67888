"""Command line interface.

Channel files are UTF-8 JSON::

    {"input_cardinalities": [2, 2], "output_cardinality": 2,
     "input_distribution": [0.25, 0.25, 0.25, 0.25],
     "kernel": [[1, 0], [0, 1], [0, 1], [1, 0]]}

with kernel rows in mixed-radix input order (``x_1`` most significant).
``input_distribution`` may be omitted for a uniform input.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 64 usage error.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import _accel
from .ci import (
    BracketError,
    InfeasibleStartError,
    compare,
    default_beta_grid,
    heatmap,
    sweep_lower_bound,
)
from .core import CONSTRUCT_TOL, OPERATION_TOL, Channel, ChannelSpace, InputDistribution, ValidationError
from .corpus import EXAMPLE_NAMES, example
from .decomposition import DecompositionError, decompose, synergy
from .projection import ConvergenceError, ProjectionInvariantError, SolverConfig

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2
EXIT_USAGE = 64

SWEEP_HEADER = ["beta", "alpha", "marginal_residual", "mutual_information_bits", "lower_bound_bits"]
HEATMAP_HEADER = ["alpha", "beta", "mi_bits"]
TRACE_HEADER = ["alpha0", "beta0", "beta", "alpha", "marginal_residual"]


class ChannelFileError(ValueError):
    pass


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# channel files


def _probabilities(values, where):
    if not isinstance(values, list) or not values:
        raise ChannelFileError(f"{where}: expected a non-empty list of numbers")
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ChannelFileError(f"{where}[{i}]: expected a number, got {v!r}")
        if not math.isfinite(v):
            raise ChannelFileError(f"{where}[{i}]: not finite")
        if v < 0:
            raise ChannelFileError(f"{where}[{i}] is negative ({v!r})")
        out.append(float(v))
    arr = np.array(out)
    total = arr.sum()
    if abs(total - 1.0) > OPERATION_TOL:
        raise ChannelFileError(f"{where} sums to {total!r}, not 1")
    if abs(total - 1.0) > CONSTRUCT_TOL:
        arr = arr / total
    return arr


def _cardinality(v, where):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ChannelFileError(f"{where}: expected a positive integer, got {v!r}")
    return v


def load_channel_document(doc, source="<document>"):
    """Validate a parsed channel document and build ``(p, k)``."""
    if not isinstance(doc, dict):
        raise ChannelFileError(f"{source}: top level must be an object")
    for key in ("input_cardinalities", "output_cardinality", "kernel"):
        if key not in doc:
            raise ChannelFileError(f"{source}: missing field '{key}'")
    cards = doc["input_cardinalities"]
    if not isinstance(cards, list) or not cards:
        raise ChannelFileError(f"{source}: input_cardinalities must be a non-empty list")
    cards = [_cardinality(c, f"input_cardinalities[{i}]") for i, c in enumerate(cards)]
    m = _cardinality(doc["output_cardinality"], "output_cardinality")
    space = ChannelSpace(tuple(cards), m)
    kernel = doc["kernel"]
    if not isinstance(kernel, list) or len(kernel) != space.input_size:
        got = len(kernel) if isinstance(kernel, list) else type(kernel).__name__
        raise ChannelFileError(f"{source}: kernel must have {space.input_size} rows, got {got}")
    rows = []
    for r, row in enumerate(kernel):
        if not isinstance(row, list) or len(row) != m:
            raise ChannelFileError(f"{source}: kernel[{r}] must have {m} entries")
        rows.append(_probabilities(row, f"kernel[{r}]"))
    if doc.get("input_distribution") is None:
        p = InputDistribution.uniform(space)
    else:
        table = _probabilities(doc["input_distribution"], "input_distribution")
        if table.size != space.input_size:
            raise ChannelFileError(f"{source}: input_distribution must have {space.input_size} entries")
        p = InputDistribution(space, table)
    return p, Channel(space, np.array(rows))


def parse_channel_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ChannelFileError(f"{path}: {exc.strerror}") from exc
    return load_channel_document(doc, str(path))


def channel_document(p, k):
    return {
        "input_cardinalities": list(p.space.input_cardinalities),
        "output_cardinality": p.space.output_cardinality,
        "input_distribution": p.table.tolist(),
        "kernel": k.rows.tolist(),
    }


def write_channel_file(path, p, k):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_document(p, k), fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _add_solver_flags(sp):
    sp.add_argument("--tol", type=float, default=1e-10, help="marginal residual tolerance (default 1e-10)")
    sp.add_argument("--max-cycles", type=int, default=100_000, help="iterative scaling cycle cap")
    sp.add_argument(
        "--no-reduce-support", action="store_true", help="plain iterative scaling, no support pre-pass"
    )


def _add_source(sp):
    sp.add_argument("file", nargs="?", help="channel file (JSON)")
    sp.add_argument("--example", choices=EXAMPLE_NAMES, help="use a built-in example instead of a file")


def _add_output(sp, default_format):
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--json", dest="format", action="store_const", const="json")
    g.add_argument("--csv", dest="format", action="store_const", const="csv")
    sp.set_defaults(format=default_format)
    sp.add_argument("-o", "--output", help="write to this path instead of stdout")


def build_parser():
    parser = _Parser(prog="syndeco", description="Decompose channel mutual information by interaction order.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("decompose", help="d_1..d_N of a channel")
    _add_source(sp)
    _add_solver_flags(sp)
    sp.add_argument("--base", type=float, default=2.0)
    _add_output(sp, "json")

    sp = sub.add_parser("ci", help="CI versus d_2 for a two-input channel")
    _add_source(sp)
    _add_solver_flags(sp)
    sp.add_argument("--base", type=float, default=2.0)
    sp.add_argument("--seed", type=int, default=0, help="seed for the random starts")
    _add_output(sp, "json")

    sp = sub.add_parser("sweep", help="CI lower bound along beta with matched alpha")
    sp.add_argument("--alpha0", type=float, default=1.0)
    sp.add_argument("--beta0", type=float, default=0.7)
    sp.add_argument("--beta-min", type=float, default=0.7)
    sp.add_argument("--beta-max", type=float, default=3.0)
    sp.add_argument("--steps", type=int, default=50)
    sp.add_argument("--embedding", choices=("spin", "binary"), default="spin")
    _add_output(sp, "csv")

    sp = sub.add_parser("heatmap", help="I(p_alpha k_beta) on a grid plus fixed-marginal traces")
    sp.add_argument("--alpha-min", type=float, default=0.0)
    sp.add_argument("--alpha-max", type=float, default=3.0)
    sp.add_argument("--alpha-steps", type=int, default=31)
    sp.add_argument("--beta-min", type=float, default=0.0)
    sp.add_argument("--beta-max", type=float, default=3.0)
    sp.add_argument("--beta-steps", type=int, default=31)
    sp.add_argument("--embedding", choices=("spin", "binary"), default="spin")
    sp.add_argument("--traces", help="also write the fixed-marginal traces as CSV to this path")
    _add_output(sp, "csv")

    sp = sub.add_parser("examples", help="list the built-in examples")
    _add_output(sp, "json")

    sp = sub.add_parser("export", help="write a built-in example as a channel file")
    sp.add_argument("--example", choices=EXAMPLE_NAMES, required=True)
    sp.add_argument("-o", "--output", help="write to this path instead of stdout")
    return parser


# ---------------------------------------------------------------------------
# commands


def _source(args):
    if args.example and args.file:
        raise UsageError("give either a channel file or --example, not both")
    if args.example:
        e = example(args.example)
        return e.p, e.k, f"example:{args.example}"
    if not args.file:
        raise UsageError("a channel file or --example is required")
    p, k = parse_channel_file(args.file)
    return p, k, args.file


def _config(args):
    return SolverConfig(tolerance=args.tol, max_cycles=args.max_cycles, reduce_support=not args.no_reduce_support)


def _config_dict(cfg):
    return {
        "tolerance": cfg.tolerance,
        "max_cycles": cfg.max_cycles,
        "reduce_support": cfg.reduce_support,
        "epsilon": cfg.epsilon,
        "backend": _accel.backend_name(),
    }


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cmd_decompose(args):
    p, k, source = _source(args)
    cfg = _config(args)
    prof = decompose(p, k, cfg, base=args.base)
    if args.format == "csv":
        rows = [[r.order, "" if r.order == 0 else repr(prof.d[r.order - 1]), repr(r.residual), r.iterations]
                for r in prof.per_level]
        return _csv_text(["order", "d", "residual", "iterations"], rows)
    doc = {"source": source, **prof.as_dict(), "config": _config_dict(cfg)}
    return json.dumps(doc, indent=2) + "\n"


def _cmd_ci(args):
    p, k, source = _source(args)
    cfg = _config(args)
    cmp_ = compare(p, k, base=args.base, seed=args.seed)
    doc = {
        "source": source,
        "base": args.base,
        "mutual_information": cmp_.mutual_information,
        "ci": cmp_.ci,
        "d2": synergy(p, k, cfg, base=args.base),
        "d2_polytope": cmp_.d2,
        "wedge_minimum": cmp_.wedge_minimum,
        "triangle_minimum": cmp_.triangle_minimum,
        "config": _config_dict(cfg),
    }
    if args.format == "csv":
        keys = ["mutual_information", "ci", "d2", "d2_polytope", "wedge_minimum", "triangle_minimum"]
        return _csv_text(keys, [[repr(doc[key]) for key in keys]])
    return json.dumps(doc, indent=2) + "\n"


def _cmd_sweep(args):
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    grid = default_beta_grid(args.steps, args.beta_min, args.beta_max)
    points = sweep_lower_bound(args.alpha0, args.beta0, grid, embedding=args.embedding)
    if args.format == "json":
        return json.dumps([pt.__dict__ for pt in points], indent=2) + "\n"
    rows = [[repr(pt.beta), repr(pt.alpha), repr(pt.marginal_residual), repr(pt.mutual_information),
             repr(pt.lower_bound)] for pt in points]
    return _csv_text(SWEEP_HEADER, rows)


def _cmd_heatmap(args):
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.alpha_steps)
    betas = np.linspace(args.beta_min, args.beta_max, args.beta_steps)
    hm = heatmap(alphas, betas, embedding=args.embedding)
    trace_rows = [[repr(t.reference[0]), repr(t.reference[1]), repr(b), repr(a), repr(r)]
                  for t in hm.traces for (b, a, r) in t.points]
    if args.traces:
        with open(args.traces, "w", encoding="utf-8") as fh:
            fh.write(_csv_text(TRACE_HEADER, trace_rows))
    if args.format == "json":
        doc = {
            "alpha": alphas.tolist(),
            "beta": betas.tolist(),
            "mi_bits": hm.mi.tolist(),
            "traces": [{"reference": list(t.reference), "points": [list(pt) for pt in t.points],
                        "flagged_betas": list(t.flagged)} for t in hm.traces],
            "residual_cap": hm.residual_cap,
        }
        return json.dumps(doc, indent=2) + "\n"
    rows = [[repr(float(a)), repr(float(b)), repr(float(hm.mi[i, j]))]
            for i, a in enumerate(alphas) for j, b in enumerate(betas)]
    return _csv_text(HEATMAP_HEADER, rows)


def _cmd_examples(args):
    items = []
    for name in EXAMPLE_NAMES:
        e = example(name)
        items.append({
            "name": name,
            "description": e.description,
            "inputs": list(e.p.space.input_cardinalities),
            "outputs": e.p.space.output_cardinality,
            "expected_d": [v.value for v in e.expected] or None,
            "qualitative": e.predicate_note or None,
            "boundary": e.boundary,
        })
    if args.format == "csv":
        return _csv_text(["name", "description"], [[i["name"], i["description"]] for i in items])
    return json.dumps(items, indent=2) + "\n"


def _cmd_export(args):
    e = example(args.example)
    return json.dumps(channel_document(e.p, e.k), indent=1) + "\n"


_COMMANDS = {
    "decompose": _cmd_decompose,
    "ci": _cmd_ci,
    "sweep": _cmd_sweep,
    "heatmap": _cmd_heatmap,
    "examples": _cmd_examples,
    "export": _cmd_export,
}


def run(argv=None, stdout=None, stderr=None):
    """Run the CLI and return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = _COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return exc.code or EXIT_OK
    except (ChannelFileError, ValidationError, InfeasibleStartError, BracketError, ValueError) as exc:
        print(f"syndeco: invalid input: {exc}", file=stderr)
        return EXIT_INVALID
    except (ConvergenceError, DecompositionError, ProjectionInvariantError) as exc:
        print(f"syndeco: solver failure: {exc}", file=stderr)
        return EXIT_SOLVER
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main():  # pragma: no cover
    sys.exit(run())
