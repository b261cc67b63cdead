"""Command line: featexport export --data <extxyz> --checkpoint <ref> --layer <k> --out <dir>"""

from __future__ import annotations

import argparse
import sys

from .errors import ExportError
from .export import export_features


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="featexport")
    sub = parser.add_subparsers(dest="command", metavar="command")
    p = sub.add_parser("export", help="write a FEAT1 bundle of per-atom features")
    p.add_argument("--data", required=True, help="extended-XYZ input")
    p.add_argument("--checkpoint", required=True, help="checkpoint reference (e.g. mock-onehot)")
    p.add_argument("--layer", type=int, required=True, help="1-based representation layer")
    p.add_argument("--out", required=True, help="output bundle directory")
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    if args.command != "export":
        parser.print_usage(sys.stderr)
        return 1
    try:
        n = export_features(args.data, args.checkpoint, args.layer, args.out)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"exported {n} frames to {args.out}", file=sys.stderr)
    return 0


def main() -> None:
    sys.exit(run_cli())
