"""Command-line interface: ``hopse <command> ...``.

Exit codes: 0 success, 1 total failure, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import routes
from .aggregate import HopseEncoder, save_bundle
from .complex import format_complex, read_complex
from .exceptions import FormatError, HopseError, UnknownSet
from .io import write_encoding, write_hasse_graph
from .lifting import lift, read_edge_list
from .model import grad_check_suite, save_checkpoint
from .neighborhoods import hasse_graph, parse_neighborhoods
from .pipeline import ConfigError, PipelineConfig, bench_scaling, run_pipeline, train_demo
from .pse import encode, parse_pse_list

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _add_lift_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["clique", "cycle"], default="clique")
    p.add_argument("--max-rank", type=int, default=2)
    p.add_argument("--max-cycle-len", type=int, default=6)


def _load_complex(path: str, args):
    if getattr(args, "complex", False):
        return read_complex(path)
    return lift(read_edge_list(path), args.mode, args.max_rank, args.max_cycle_len)


def cmd_lift(args) -> int:
    cc = lift(read_edge_list(args.graph), args.mode, args.max_rank, args.max_cycle_len)
    text = format_complex(cc)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_expand(args) -> int:
    nfs = parse_neighborhoods(args.nbhd)
    cc = _load_complex(args.input, args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for nf in nfs:
        h = hasse_graph(cc, nf, args.include_self)
        write_hasse_graph(h, cc, out / nf.slug)
        print(f"{nf.label}\tnodes={h.n_nodes}\tarcs={len(h.arcs)}\ttargets={len(h.target_cells)}")
    return EXIT_OK


def cmd_encode(args) -> int:
    try:
        parse_neighborhoods(args.taxonomy)
        parse_pse_list(args.pse)
    except (UnknownSet, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if len(args.inputs) == 1 and args.out and not args.complex:
        encoder = HopseEncoder(
            lifting=args.mode,
            max_rank=args.max_rank,
            max_cycle_len=args.max_cycle_len,
            neighborhoods=args.taxonomy,
            pse=args.pse,
            include_self=args.include_self,
        ).fit()
        cc = _load_complex(args.inputs[0], args)
        save_bundle(encoder.transform_one(cc), args.out)
        if args.emit_encodings:
            _emit_encodings(cc, encoder, args)
        return EXIT_OK
    if args.complex:
        # complexes bypass the graph pipeline
        encoder = HopseEncoder(neighborhoods=args.taxonomy, pse=args.pse, include_self=args.include_self).fit()
        out = Path(args.out_dir or ".")
        out.mkdir(parents=True, exist_ok=True)
        for path in args.inputs:
            cc = read_complex(path)
            save_bundle(encoder.transform_one(cc), args.out or out / f"{Path(path).stem}.hb")
            if args.emit_encodings:
                _emit_encodings(cc, encoder, args)
        return EXIT_OK
    cfg = PipelineConfig(
        lifting=args.mode,
        max_rank=args.max_rank,
        max_cycle_len=args.max_cycle_len,
        neighborhoods=args.taxonomy,
        pse=args.pse,
        include_self=args.include_self,
        out_dir=args.out_dir or "hopse_out",
    )
    result = run_pipeline(cfg, args.inputs)
    n = len(result.bundles)
    print(f"{n - result.n_failed}/{n} graphs encoded into {cfg.out_dir}")
    return EXIT_FAIL if result.n_failed == n else EXIT_OK


def _emit_encodings(cc, encoder: HopseEncoder, args) -> None:
    out = Path(args.emit_encodings)
    out.mkdir(parents=True, exist_ok=True)
    suffix = ".tsv" if args.format == "text" else ".bin"
    for nf in encoder.neighborhoods_:
        h = hasse_graph(cc, nf, args.include_self)
        if h.n_nodes == 0:
            continue
        for kind in encoder.kinds_:
            enc = encode(h, kind)
            write_encoding(enc, cc.content_hash(), out / f"{nf.slug}.{kind.tag}{suffix}", args.format)


def cmd_count_routes(args) -> int:
    R = args.max_rank
    try:
        rows = [
            ("neighborhoods", routes.count_neighborhoods(R, args.width)),
            ("minimal_routes", routes.count_minimal_routes(R, args.width)),
            ("extended_routes", routes.count_extended_routes(R, args.width)),
        ]
    except OverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"R\t{R}")
    for name, value in rows:
        print(f"{name}\t{value}")
    if args.enumerate:
        for route in routes.enumerate_minimal_routes(R):
            print(route)
    return EXIT_OK


def cmd_train_demo(args) -> int:
    if args.task != "synth-2cell":
        print(f"error: unknown task {args.task!r}", file=sys.stderr)
        return EXIT_CONFIG
    clf, bundles, labels = train_demo(
        n_samples=args.samples, epochs=args.epochs, seed=args.seed, lr=args.lr, hidden=args.hidden
    )
    acc = float(np.mean(clf.predict(bundles) == labels))
    trace = clf.loss_curve_
    print(f"samples\t{len(labels)}")
    print(f"epochs\t{args.epochs}")
    if trace:
        print(f"loss_first\t{trace[0]:.6f}")
        print(f"loss_last\t{trace[-1]:.6f}")
    print(f"train_accuracy\t{acc:.4f}")
    if args.checkpoint:
        save_checkpoint(clf.model_, args.checkpoint)
    return EXIT_OK


def cmd_verify(args) -> int:
    if not args.grad_check:
        print("nothing to verify; pass --grad-check", file=sys.stderr)
        return EXIT_CONFIG
    worst = 0.0
    for seed, n_params, err in grad_check_suite(range(args.seed, args.seed + 3)):
        print(f"seed={seed}\tparams={n_params}\tmax_rel_err={err:.3e}")
        worst = max(worst, err)
    ok = worst < 1e-4
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    report = bench_scaling(sizes, args.reps, neighborhoods=args.taxonomy, pse=args.pse)
    for s, c, m in zip(report.sizes, report.cells, report.medians):
        print(f"size={s}\tcells={c}\tmedian_s={m:.6f}")
    print(f"slope\t{'undefined' if report.slope is None else f'{report.slope:.3f}'}")
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopse", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lift", help="lift an edge-list graph to a complex")
    p.add_argument("graph")
    p.add_argument("-o", "--output")
    _add_lift_args(p)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("expand", help="write one Hasse graph per neighborhood")
    p.add_argument("input", help="edge-list graph (lifted with --mode) or complex file with --complex")
    p.add_argument("--complex", action="store_true")
    p.add_argument("--nbhd", required=True, help="taxonomy name or e.g. 'A_0,1;I_1->2'")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--include-self", action="store_true")
    _add_lift_args(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("encode", help="precompute feature bundles")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--complex", action="store_true")
    p.add_argument("--taxonomy", default="Inc-1")
    p.add_argument("--pse", default="rwse:K=16")
    p.add_argument("--out", help="bundle path (single input)")
    p.add_argument("--out-dir", help="bundle directory with manifest (many inputs)")
    p.add_argument("--include-self", action="store_true")
    p.add_argument("--emit-encodings", metavar="DIR", help="also write per-neighborhood encoding files")
    p.add_argument("--format", choices=["text", "binary"], default="text")
    _add_lift_args(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("count-routes", help="neighborhood and route counts")
    p.add_argument("--max-rank", type=int, required=True)
    p.add_argument("--enumerate", action="store_true")
    p.add_argument("--width", type=int, default=None, help="fail if counts exceed this many bits")
    p.set_defaults(func=cmd_count_routes)

    p = sub.add_parser("train-demo", help="train on the synthetic 2-cell task")
    p.add_argument("--task", default="synth-2cell")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--samples", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--checkpoint")
    p.set_defaults(func=cmd_train_demo)

    p = sub.add_parser("verify", help="numerical self-checks")
    p.add_argument("--grad-check", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="preprocessing + forward scaling benchmark")
    p.add_argument("--sizes", default="10,20,40,80,160,320")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--taxonomy", default="Mix-1")
    p.add_argument("--pse", default="rwse:K=8")
    p.add_argument("--json")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UnknownSet) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except HopseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
