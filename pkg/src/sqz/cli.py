"""Command line front end.

Exit codes: 0 success, 2 usage (including bad parameters), 3 I/O, 4 corrupt input.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import adaptive, bounded, container, online_sorter, text_stats
from .bitio import BitSink
from .comparison_sorter import sort_online
from .errors import CorruptStreamError, ParameterError
from .harness import run_one_pass

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_CORRUPT = 0, 2, 3, 4


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write(path, data: bytes):
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def _symbols(data: bytes, fmt: str) -> list:
    if fmt == "tokens":
        return data.split()
    return list(data)


def _check_sigma(data: bytes, sigma: int):
    if not 2 <= sigma <= 256:
        raise ParameterError("--sigma must lie in [2, 256] for byte input")
    if data and max(data) >= sigma:
        raise ParameterError(f"input byte {max(data)} is outside the alphabet of size {sigma}")


def cmd_encode(args) -> int:
    data = _read(args.input)
    _check_sigma(data, args.sigma)
    dumps = {} if (args.dump_bwt or args.dump_mtf) else None
    blob = container.encode(data, args.codec, args.sigma, args.lam, args.k, args.mu, dumps=dumps)
    if dumps:
        if args.dump_bwt and "bwt" in dumps:
            Path(args.dump_bwt).write_text(" ".join("$" if x == args.sigma else str(int(x)) for x in dumps["bwt"]) + "\n")
        if args.dump_mtf and "mtf" in dumps:
            Path(args.dump_mtf).write_text(" ".join(map(str, dumps["mtf"])) + "\n")
    _write(args.output, blob)
    return EXIT_OK


def cmd_decode(args) -> int:
    _, out = container.decode(_read(args.input))
    _write(args.output, bytes(out))
    return EXIT_OK


def cmd_analyze(args) -> int:
    data = _read(args.input)
    _check_sigma(data, args.sigma)
    s = list(data)
    report = {"n": len(s), "sigma": args.sigma, "distinct": len(set(s))}
    for k in range(args.kmax + 1):
        if k < len(s):
            report[f"H{k}"] = text_stats.hk(s, k)
    if args.heavy is not None:
        report["heavy"] = sorted(bounded.heavy_hitters(s, args.heavy))
    print(json.dumps(report))
    return EXIT_OK


def cmd_sortperm(args) -> int:
    s = _symbols(_read(args.input), args.format)
    gs = online_sorter.GapListSet().extend(s)
    pi = gs.finalize()
    if args.raw:
        if args.format != "bytes":
            raise ParameterError("--raw needs byte input")
        sink = BitSink()
        online_sorter.write_gaplists(sink, gs, 256)
        blob = container.Container(container.GAPLISTS, 256, len(s), b"", sink.getbits().data).pack()
        _write(args.output, blob)
    else:
        _write(args.output, "".join(f"{j}\n" for j in pi).encode())
    return EXIT_OK


def cmd_sortcmp(args) -> int:
    s = _symbols(_read(args.input), args.format)
    pi, comparisons = sort_online(s)
    print(" ".join(map(str, pi)))
    print(f"comparisons {comparisons}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "debruijn":
        if args.k is None:
            raise ParameterError("gen debruijn needs --k")
        out = bytes(48 + b for b in text_stats.gen_debruijn(args.k))
    else:
        if args.period_file is None or args.length is None:
            raise ParameterError("gen periodic needs --period-file and --length")
        period = _read(args.period_file)
        out = bytes(text_stats.gen_periodic(period, args.length))
    _write(args.output, out)
    return EXIT_OK


def cmd_audit(args) -> int:
    data = _read(args.input)
    _check_sigma(data, args.sigma)
    s = list(data)
    n = len(s)
    if args.codec == "adaptive":
        proc = adaptive.AdaptiveEncoder(args.sigma, n)
    elif args.codec == "bounded":
        proc = bounded.OnePassEncoder(bounded.OnePassParams(args.sigma, args.lam, args.k, args.mu))
    elif args.codec == "gaplists":
        proc = online_sorter.GapListSet()
    else:
        raise ParameterError(f"codec {args.codec} has no one-pass processor")
    out, acct = run_one_pass(proc, s, n)
    out_bits = len(out) if args.codec != "gaplists" else proc.encoding_size_bits()
    print(acct.to_json(codec=args.codec, output_bits=out_bits))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sqz", description="Sequential-access compression toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def codec_flags(p, choices):
        p.add_argument("--codec", choices=choices, default="adaptive")
        p.add_argument("--sigma", type=int, default=256, help="alphabet size; input bytes must be below it")
        p.add_argument("--lambda", dest="lam", type=float, default=1.0)
        p.add_argument("--k", type=int, default=0, help="context order for the bounded codec")
        p.add_argument("--mu", type=float, default=1.0)

    p = sub.add_parser("encode", help="compress a file into a container")
    codec_flags(p, sorted(container.CODECS))
    p.add_argument("--dump-bwt", metavar="FILE")
    p.add_argument("--dump-mtf", metavar="FILE")
    p.add_argument("input")
    p.add_argument("output", nargs="?")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="restore a file from a container")
    p.add_argument("input")
    p.add_argument("output", nargs="?")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("analyze", help="report n, sigma and empirical entropies")
    p.add_argument("--sigma", type=int, default=256)
    p.add_argument("--kmax", type=int, default=2)
    p.add_argument("--heavy", type=float, metavar="THETA", help="also list symbols with frequency >= THETA*n")
    p.add_argument("input")
    p.set_defaults(func=cmd_analyze)

    for name, func, helptext in (
        ("sortperm", cmd_sortperm, "stable-sort permutation via gap lists"),
        ("sortcmp", cmd_sortcmp, "stable sort with a comparison count"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--format", choices=("bytes", "tokens"), default="bytes")
        if name == "sortperm":
            p.add_argument("--raw", action="store_true", help="write the gap lists as a container")
        p.add_argument("input")
        if name == "sortperm":
            p.add_argument("output", nargs="?")
        p.set_defaults(func=func)

    p = sub.add_parser("gen", help="emit De Bruijn or periodic fixtures")
    p.add_argument("kind", choices=("debruijn", "periodic"))
    p.add_argument("--k", type=int)
    p.add_argument("--period-file")
    p.add_argument("--length", type=int)
    p.add_argument("-o", "--output", help="write here instead of standard output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("audit", help="run a one-pass codec and print its stream account as JSON")
    codec_flags(p, ["adaptive", "bounded", "gaplists"])
    p.add_argument("input")
    p.set_defaults(func=cmd_audit)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except CorruptStreamError as exc:
        print(f"sqz: corrupt input: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except (ParameterError, ValueError) as exc:
        print(f"sqz: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sqz: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
