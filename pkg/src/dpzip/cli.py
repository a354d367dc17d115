"""Command-line entry point: compress, decompress, bench, entropy, gen, ftl.

Exit codes: 0 success, 1 usage error, 2 corrupt data, 3 I/O error.
Diagnostics go to stderr; data and reports go to stdout or the -o file.
Output files are written atomically (temp file + rename), so a failing
run never leaves a partial output behind.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys

from . import bench as bench_mod
from . import format as fmt
from . import ftl as ftl_mod
from .errors import ContainerError, CorruptStreamError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CORRUPT = 2
EXIT_IO = 3

_MODES = {"raw": fmt.Mode.RAW, "huf": fmt.Mode.LZ_HUF,
          "fse": fmt.Mode.LZ_FSE, "lz": fmt.Mode.LZ_ONLY}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print("%s: error: %s" % (self.prog, message), file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@contextlib.contextmanager
def _open_input(path: str):
    if path == "-":
        yield sys.stdin.buffer
    else:
        with open(path, "rb") as f:
            yield f


@contextlib.contextmanager
def _atomic_output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout.buffer
        sys.stdout.buffer.flush()
        return
    tmp = "%s.tmp.%d" % (path, os.getpid())
    f = open(tmp, "wb")
    try:
        yield f
    except BaseException:
        f.close()
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise
    f.close()
    os.replace(tmp, path)


def _build_parser() -> _Parser:
    p = _Parser(prog="dpzip", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    def add_codec_flags(sp):
        sp.add_argument("--mode", choices=sorted(_MODES), default="huf")
        sp.add_argument("--chunk-log", type=int, default=fmt.PAGE_LOG,
                        choices=range(fmt.MIN_CHUNK_LOG, fmt.MAX_CHUNK_LOG + 1),
                        metavar="{12..16}")

    sp = sub.add_parser("compress", help="compress FILE (or - for stdin) to a container")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", default=None)
    add_codec_flags(sp)
    sp.add_argument("--crc", action="store_true", help="append per-chunk CRC32")
    sp.add_argument("--jobs", type=int, default=1, metavar="N")

    sp = sub.add_parser("decompress", help="decompress a container")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("bench", help="chunked compression benchmark over a corpus")
    sp.add_argument("corpus", nargs="?", default=None,
                    help="corpus file/dir (default: built-in mini corpus)")
    add_codec_flags(sp)
    sp.add_argument("--jobs", type=int, default=1, metavar="N")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("entropy", help="empirical Shannon entropy of FILE")
    sp.add_argument("input")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("gen", help="synthetic data with a target compression ratio")
    sp.add_argument("--ratio", type=float, required=True, metavar="0..1")
    sp.add_argument("--size", type=int, required=True, metavar="BYTES")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("ftl", help="run a trace through the FTL simulator")
    sp.add_argument("--trace", required=True, help="trace file (W/R/GC lines) or -")
    sp.add_argument("--mode", choices=sorted(_MODES), default="huf")
    sp.add_argument("--blocks", type=int, default=64)
    sp.add_argument("--pages-per-block", type=int, default=64)
    sp.add_argument("--page-size", type=int, default=4096)
    sp.add_argument("--op", type=float, default=0.10, help="over-provisioning fraction")
    sp.add_argument("--capacity-factor", type=float, default=1.0)
    sp.add_argument("--zero-fill-unmapped", action="store_true")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("-o", "--output", default=None)
    return p


def _emit_text(text: str, output: str | None) -> None:
    with _atomic_output(output) as f:
        f.write(text.encode())


def _cmd_compress(args) -> int:
    with _open_input(args.input) as fin, _atomic_output(args.output) as fout:
        info = fmt.compress_stream(fin, fout, _MODES[args.mode],
                                   args.chunk_log, crc=args.crc, jobs=args.jobs)
    if info["ratio"] is not None:
        print("%d chunks, %d -> %d bytes, ratio %.4f"
              % (info["chunks"], info["orig_bytes"], info["comp_bytes"], info["ratio"]),
              file=sys.stderr)
    return EXIT_OK


def _cmd_decompress(args) -> int:
    with _open_input(args.input) as fin, _atomic_output(args.output) as fout:
        fmt.decompress_stream(fin, fout)
    return EXIT_OK


def _cmd_bench(args) -> int:
    corpus = args.corpus
    tmpdir = None
    if corpus is None:
        import tempfile
        tmpdir = tempfile.TemporaryDirectory(prefix="dpzip-mini-")
        bench_mod.build_mini_corpus(tmpdir.name)
        corpus = tmpdir.name
    try:
        report = bench_mod.bench_run(corpus, _MODES[args.mode], args.chunk_log,
                                     jobs=args.jobs)
    finally:
        if tmpdir is not None:
            tmpdir.cleanup()
    text = json.dumps(report, indent=2) if args.json else bench_mod.format_report(report)
    _emit_text(text + "\n", args.output)
    return EXIT_OK


def _cmd_entropy(args) -> int:
    with _open_input(args.input) as f:
        data = f.read()
    rep = bench_mod.shannon_entropy(data)
    if args.json:
        text = json.dumps({"file": args.input, "bytes": len(data),
                           "entropy_bits": rep.h_bits})
    else:
        text = "%.4f" % rep.h_bits
    _emit_text(text + "\n", args.output)
    return EXIT_OK


def _cmd_gen(args) -> int:
    data = bench_mod.gen_data(args.ratio, args.size, args.seed)
    with _atomic_output(args.output) as f:
        f.write(data)
    return EXIT_OK


def _cmd_ftl(args) -> int:
    geo = ftl_mod.NandGeometry(page_size=args.page_size,
                               pages_per_block=args.pages_per_block,
                               block_count=args.blocks,
                               op_fraction=args.op)
    sim = ftl_mod.FtlSimulator(geo, _MODES[args.mode],
                               capacity_factor=args.capacity_factor,
                               zero_fill_unmapped=args.zero_fill_unmapped)
    if args.trace == "-":
        metrics = ftl_mod.run_trace(sim, sys.stdin)
    else:
        with open(args.trace) as f:
            metrics = ftl_mod.run_trace(sim, f)
    metrics["state_hash"] = sim.state_hash()
    if args.json:
        text = json.dumps(metrics, indent=2)
    else:
        text = "\n".join("%-24s %s" % (k, v) for k, v in metrics.items())
    _emit_text(text + "\n", args.output)
    return EXIT_OK


_COMMANDS = {
    "compress": _cmd_compress,
    "decompress": _cmd_decompress,
    "bench": _cmd_bench,
    "entropy": _cmd_entropy,
    "gen": _cmd_gen,
    "ftl": _cmd_ftl,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.cmd](args)
    except (CorruptStreamError, ContainerError) as e:
        print("dpzip: %s" % e, file=sys.stderr)
        return EXIT_CORRUPT
    except (ftl_mod.NoSpaceError, ftl_mod.GcFutileError, ftl_mod.UnmappedReadError) as e:
        print("dpzip: %s" % e, file=sys.stderr)
        return EXIT_CORRUPT
    except ValueError as e:
        print("dpzip: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print("dpzip: %s" % e, file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
