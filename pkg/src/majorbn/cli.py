"""Command-line front end: ``majorbn <subcommand> [flags]``.

Exit status is 0 on success, 2 for usage errors, and otherwise the
``exit_code`` of the library error that stopped the command (see
:mod:`majorbn.errors`).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import errors
from .inference import ALGORITHMS, DEFAULT_EPSILON, map_state, posterior
from .netfile import import_xdsl_subset, read_network, serialize_network
from .reference import TARGET, load_reference
from .survey import (
    ScoreBinning,
    dataset_to_csv,
    evaluation_csv,
    evaluation_table,
    factor_report,
    generate_synthetic,
    learn_cpts,
    load_responses,
    run_evaluation,
)

REFERENCE = "reference"


def _network(path: str):
    if path == REFERENCE:
        return load_reference()
    return read_network(path)


def _evidence(pairs: list[str] | None) -> dict[str, str]:
    evidence = {}
    for pair in pairs or []:
        name, sep, state = pair.partition("=")
        if not sep or not name or not state:
            raise errors.InvalidArgument(f"evidence must look like name=state, got {pair!r}")
        if name in evidence:
            raise errors.InvalidArgument(f"variable {name!r} observed twice")
        evidence[name] = state
    return evidence


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    net = _network(args.network)
    rows = sum(c.table.shape[0] for c in net.cpts.values())
    if args.format == "csv":
        print("nodes,edges,cpt_rows")
        print(f"{len(net.variables)},{len(net.edges)},{rows}")
    else:
        print(f"{net.name}: {len(net.variables)} nodes, {len(net.edges)} edges, {rows} CPT rows")
    return 0


def _posterior_report(args, query: str) -> int:
    net = _network(args.network)
    evidence = _evidence(args.evidence)
    post, report = posterior(net, evidence, query, args.algorithm, args.samples, args.seed, args.epsilon)
    best = map_state(post)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["variable", "state", "probability", "is_map"])
        for state, p in post.as_dict().items():
            writer.writerow([query, state, repr(p), int(state == best)])
        text = buf.getvalue()
    else:
        width = max(len(s) for s in post.variable.states)
        lines = [f"P({query} | evidence) via {args.algorithm}:"]
        for state, p in post.as_dict().items():
            lines.append(f"  {state.ljust(width)}  {p:.6f}")
        if report is not None:
            lines.append(
                f"samples: {report.requested_samples} requested, {report.accepted_samples} accepted, "
                f"effective {report.effective_sample_size:.1f}, seed {report.seed}"
            )
        label = "predicted major" if query == TARGET else "most probable state"
        lines.append(f"{label}: {best}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return 0


def cmd_predict(args) -> int:
    return _posterior_report(args, TARGET)


def cmd_infer(args) -> int:
    return _posterior_report(args, args.query)


def cmd_evaluate(args) -> int:
    net = _network(args.network)
    data = load_responses(args.data, net)
    algorithms = args.algorithm or ["likelihood", "logic", "epis", "exact"]
    results = run_evaluation(
        net,
        data,
        runs=args.runs,
        algorithms=algorithms,
        samples_per_query=args.samples,
        seed=args.seed,
        test_fraction=args.test_fraction,
        alpha=args.alpha,
        epsilon=args.epsilon,
        learn=not args.no_learn,
        split_seed=args.split_seed,
    )
    machine = evaluation_csv(results)
    if args.output:
        Path(args.output).write_text(machine, encoding="utf-8")
    sys.stdout.write(machine if args.format == "csv" else evaluation_table(results))
    return 0


def cmd_stats(args) -> int:
    net = _network(args.network)
    binning = ScoreBinning.parse(args.binning) if args.binning else None
    stats = factor_report(load_responses(args.data, net, binning))
    buf = io.StringIO()
    if args.format == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["factor", "very_low", "low", "much", "very_much", "average_effect"])
        for s in stats:
            writer.writerow([s.factor, *(f"{f:.4f}" for f in s.frequencies), f"{s.average_effect:.4f}"])
    else:
        width = max(len(s.factor) for s in stats)
        buf.write(f"{'factor'.ljust(width)}  very_low    low   much  very_much  avg_effect\n")
        for s in stats:
            f = s.frequencies
            buf.write(
                f"{s.factor.ljust(width)}  {f[0]:7.1f}% {f[1]:5.1f}% {f[2]:5.1f}% {f[3]:9.1f}%  {s.average_effect:10.3f}\n"
            )
    _emit(buf.getvalue(), args.output)
    return 0


def cmd_learn(args) -> int:
    structure = _network(args.network)
    data = load_responses(args.data, structure)
    learned = learn_cpts(structure, data, args.alpha)
    _emit(serialize_network(learned), args.output)
    return 0


def cmd_generate(args) -> int:
    net = _network(args.network)
    _emit(dataset_to_csv(generate_synthetic(net, args.rows, args.seed)), args.output)
    return 0


def cmd_import_xdsl(args) -> int:
    try:
        text = Path(args.network).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise errors.InputFileError(f"cannot read {args.network}: {exc}") from None
    _emit(serialize_network(import_xdsl_subset(text)), args.output)
    return 0


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("must be in [0, 2**64)")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="majorbn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, network_default=REFERENCE):
        p.add_argument("--network", default=network_default,
                       help="network file (.bn or .xdsl); 'reference' selects the shipped model")
        p.add_argument("--format", choices=("text", "csv"), default="text")
        p.add_argument("--output", help="write the report/file here instead of stdout")

    def engine(p):
        p.add_argument("--algorithm", choices=ALGORITHMS, default="exact")
        p.add_argument("--samples", type=_positive_int, default=50000)
        p.add_argument("--seed", type=_seed, default=1)
        p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
        p.add_argument("--evidence", action="append", metavar="NAME=STATE",
                       help="observed value; repeat for several variables")

    p = sub.add_parser("validate", help="check a network file and summarize it")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("predict", help="posterior over the academic major")
    common(p)
    engine(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("infer", help="posterior over any variable")
    common(p)
    engine(p)
    p.add_argument("--query", required=True)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("evaluate", help="repeated train/test accuracy comparison")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--algorithm", action="append", choices=ALGORITHMS,
                   help="engine to compare; repeat for several (default: all)")
    p.add_argument("--samples", type=_positive_int, default=50000)
    p.add_argument("--seed", type=_seed, default=1)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--runs", type=_positive_int, default=9)
    p.add_argument("--split-seed", type=_seed, help="use one fixed train/test split for every run")
    p.add_argument("--no-learn", action="store_true",
                   help="evaluate the network as given instead of re-learning CPTs on each training part")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="answer frequencies and average effect per factor")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--binning", help="score bin edges, e.g. 0,10,14,17,20; discretizes numeric cells")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("learn", help="estimate CPTs for a structure from data")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("generate", help="forward-sample synthetic students to CSV")
    common(p)
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--seed", type=_seed, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("import-xdsl", help="convert a GeNIe XDSL model to the native format")
    common(p, network_default=None)
    p.set_defaults(func=cmd_import_xdsl)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "import-xdsl" and not args.network:
        parser.error("import-xdsl requires --network")
    try:
        return args.func(args)
    except errors.BayesNetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
