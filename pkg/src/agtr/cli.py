"""Command-line interface.

Exit codes: 0 success / consistent, 1 usage or input error,
2 litmus test flagged a suspect result, 3 shuffle correlation test failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from agtr import io as agtr_io
from agtr.bounds import agtr_bounds, bounds_table, compare_bounds, default_epsilon_hat, litmus_test
from agtr.core import AgtrError, clustering_from_labels
from agtr.metrics import accuracy, precision_recall
from agtr.pehash import PeParseError, build_agtr, scan
from agtr.shuffle import DegenerateSeries, correlation_test, shuffle_run

log = logging.getLogger("agtr")

EXIT_OK, EXIT_ERROR, EXIT_SUSPECT, EXIT_CORRELATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is reserved for litmus failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _emit(data: bytes, out) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _load_predicted(path, labels: bool):
    if labels:
        return clustering_from_labels(agtr_io.load_labels(path))
    return agtr_io.load_clustering(path)


def _epsilon(args, m: int) -> int:
    if args.epsilon_hat is not None:
        if args.epsilon_hat < 0:
            raise AgtrError("--epsilon-hat must be non-negative")
        return args.epsilon_hat
    return default_epsilon_hat(m, args.epsilon_rate)


def cmd_metrics(args) -> int:
    if args.accuracy and not args.labels:
        raise AgtrError("--accuracy needs label files (--labels)")
    if args.labels:
        pred_labels = agtr_io.load_labels(args.predicted)
        ref_labels = agtr_io.load_labels(args.reference)
        c, d = clustering_from_labels(pred_labels), clustering_from_labels(ref_labels)
    else:
        c, d = agtr_io.load_clustering(args.predicted), agtr_io.load_clustering(args.reference)
    prec, rec = precision_recall(c, d)
    out = {"m": c.m, "precision": prec.to_dict(), "recall": rec.to_dict()}
    if args.accuracy:
        acc = accuracy(pred_labels, ref_labels)
        out["accuracy"] = {**acc.to_dict(), "warnings": list(acc.warnings)}
    _emit(agtr_io.dumps(out), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    c = _load_predicted(args.predicted, args.labels)
    r_hat = agtr_io.load_clustering(args.agtr)
    report = agtr_bounds(c, r_hat, _epsilon(args, c.m))
    _emit(agtr_io.write_bound_report(report), args.out)
    return EXIT_OK


def cmd_litmus(args) -> int:
    c = _load_predicted(args.predicted, args.labels)
    r_hat = agtr_io.load_clustering(args.agtr)
    report = agtr_bounds(c, r_hat, _epsilon(args, c.m))
    verdicts = [litmus_test(rep, report) for rep in agtr_io.load_reported(args.reported)]
    _emit(agtr_io.write_bound_report(report, verdicts), args.out)
    return EXIT_SUSPECT if any(v.suspect for v in verdicts) else EXIT_OK


def cmd_shuffle(args) -> int:
    c = _load_predicted(args.predicted, args.labels)
    r_hat = agtr_io.load_clustering(args.agtr)
    eps = _epsilon(args, c.m)
    records = shuffle_run(c, r_hat, eps, args.interval, args.seed)
    if args.records:
        agtr_io.write_records(records, args.records)
    try:
        rep = correlation_test(records, args.threshold)
    except DegenerateSeries as exc:
        print(f"correlation test failed: {exc}", file=sys.stderr)
        return EXIT_CORRELATION
    if args.plot:
        from agtr.plotting import plot_shuffle

        plot_shuffle(records, args.plot, rep)
    out = {"epsilon_hat": eps, "interval": args.interval, "seed": args.seed, **agtr_io.correlation_to_dict(rep)}
    _emit(agtr_io.dumps(out), args.out)
    return EXIT_OK if rep.passed else EXIT_CORRELATION


def cmd_compare(args) -> int:
    r_hat = agtr_io.load_clustering(args.agtr)
    eps = _epsilon(args, r_hat.m)
    candidates = []
    for spec in args.candidates:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise AgtrError(f"candidate {spec!r} must look like name=path.csv")
        candidates.append((name, _load_predicted(path, args.labels)))
    reports = compare_bounds(candidates, r_hat, eps)
    out = {
        "m": r_hat.m,
        "epsilon_hat": eps,
        "candidates": [{"name": n, "report": agtr_io.bound_report_to_dict(r)} for n, r in reports],
        "table": bounds_table(reports),
    }
    if args.plot:
        from agtr.plotting import plot_bounds

        plot_bounds(reports, args.plot)
    _emit(agtr_io.dumps(out), args.out)
    return EXIT_OK


def cmd_pehash_scan(args) -> int:
    rows = scan(args.paths, jobs=args.jobs, id_mode=args.id_mode)
    agtr_io.write_digests(rows, args.out)
    failed = sum(1 for _, _, status in rows if status != "ok")
    log.info("scanned %d files, %d failed to parse", len(rows), failed)
    return EXIT_OK


def cmd_pehash_build(args) -> int:
    rows = agtr_io.load_digests(args.digests)
    agtr = build_agtr((sid, digest) for sid, digest, _ in rows)
    agtr_io.write_clustering(agtr, args.out)
    log.info("%d samples in %d clusters", agtr.m, agtr.n_clusters)
    return EXIT_OK


def _add_epsilon(p) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--epsilon-hat", type=int, help="error allowance for the AGTR (samples)")
    g.add_argument("--epsilon-rate", type=float, default=0.01,
                   help="epsilon-hat as a fraction of m, rounded up (default 0.01)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="agtr", description="Label-free clustering/classifier evaluation with AGTR bounds.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("metrics", help="precision/recall (and accuracy) against a reference")
    p.add_argument("--predicted", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--labels", action="store_true", help="inputs are sample_id,label files")
    p.add_argument("--accuracy", action="store_true", help="also compute accuracy (needs --labels)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bounds", help="precision lower / recall upper bound from an AGTR")
    p.add_argument("--predicted", required=True)
    p.add_argument("--agtr", required=True)
    p.add_argument("--labels", action="store_true", help="predicted file is sample_id,label")
    _add_epsilon(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("litmus", help="test reported metrics against AGTR bounds")
    p.add_argument("--predicted", required=True)
    p.add_argument("--agtr", required=True)
    p.add_argument("--reported", required=True, help="JSON object or list with precision/recall/accuracy")
    p.add_argument("--labels", action="store_true")
    _add_epsilon(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_litmus)

    p = sub.add_parser("shuffle-test", help="incremental shuffle + correlation test")
    p.add_argument("--predicted", required=True)
    p.add_argument("--agtr", required=True)
    p.add_argument("--interval", type=float, default=0.01)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threshold", type=float, default=-0.9)
    p.add_argument("--labels", action="store_true")
    _add_epsilon(p)
    p.add_argument("--plot", help="write a figure (format from extension, e.g. .svg/.png)")
    p.add_argument("--records", help="write per-interval bounds as CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_shuffle)

    p = sub.add_parser("compare", help="bound table for several candidate clusterings")
    p.add_argument("--agtr", required=True)
    p.add_argument("--labels", action="store_true")
    _add_epsilon(p)
    p.add_argument("--plot")
    p.add_argument("--out")
    p.add_argument("candidates", nargs="+", metavar="name=P.csv")
    p.set_defaults(func=cmd_compare)

    pe = sub.add_parser("pehash", help="PE metadata digests and digest-based AGTRs")
    pesub = pe.add_subparsers(dest="pehash_command", required=True, parser_class=_Parser)
    p = pesub.add_parser("scan", help="digest PE files")
    p.add_argument("paths", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--id-mode", choices=["path", "sha256"], default="path")
    p.set_defaults(func=cmd_pehash_scan)
    p = pesub.add_parser("build-agtr", help="group samples by digest")
    p.add_argument("--digests", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pehash_build)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (AgtrError, PeParseError, OSError) as exc:
        print(f"agtr: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
