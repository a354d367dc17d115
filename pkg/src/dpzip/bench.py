"""Corpus tooling: entropy analysis, synthetic data with a compressibility
dial, chunked ratio statistics, and the benchmark runner.

``gen_data`` solves for the mix of repeated-motif filler and seeded random
bytes that makes the real pipeline hit a requested compression ratio, by
bisection against the actual compressor.  Reports carry both wall-clock
rates (software, no acceptance meaning) and modeled hardware columns from
the cycle model, kept clearly apart.

The built-in mini corpus is a deterministic ~1MB stand-in for the Silesia
corpus so the benchmark paths stay testable offline; fetch the real
corpus for meaningful ratio comparisons (see README).
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import cycles
from .format import Mode, PAGE_LOG, compress_chunk

PAGE = 4096


@dataclass(frozen=True)
class EntropyReport:
    h_bits: float                  # empirical bits/symbol, 0..8
    probabilities: tuple[float, ...]

    def __format__(self, spec: str) -> str:
        return format(self.h_bits, spec)


def shannon_entropy(data: bytes) -> EntropyReport:
    """Exact empirical entropy of the byte distribution."""
    if not data:
        raise ValueError("empty input")
    counts = np.bincount(np.frombuffer(data, dtype=np.uint8), minlength=256)
    p = counts / len(data)
    nz = p[p > 0]
    h = max(0.0, float(-(nz * np.log2(nz)).sum()))   # clamp away -0.0
    return EntropyReport(h, tuple(p.tolist()))


@dataclass(frozen=True)
class RatioStats:
    count: int
    mean: float
    p5: float
    p25: float
    p50: float
    p75: float
    p95: float


def ratio_stats(ratios: list[float]) -> RatioStats:
    if not ratios:
        raise ValueError("no ratios")
    arr = np.asarray(ratios, dtype=np.float64)
    p5, p25, p50, p75, p95 = np.percentile(arr, [5, 25, 50, 75, 95])
    return RatioStats(len(ratios), float(arr.mean()),
                      float(p5), float(p25), float(p50), float(p75), float(p95))


# -- synthetic data ----------------------------------------------------------


def _motif(rng: np.random.Generator) -> bytes:
    return rng.bytes(16)


def _build_pages(n_pages: int, fill_fraction: float, seed: int) -> bytes:
    """Each page: a repeated-motif prefix and a unique random tail.

    The random tails depend only on (seed, page); the prefix length is the
    dial, so measured ratio is smooth in fill_fraction.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    motif = _motif(rng)
    filler = (motif * (PAGE // len(motif) + 1))[:PAGE]
    noise = rng.bytes(n_pages * PAGE)
    k = int(round(fill_fraction * PAGE))
    pages = []
    for i in range(n_pages):
        pages.append(filler[:k] + noise[i * PAGE + k:(i + 1) * PAGE])
    return b"".join(pages)


def _measure_ratio(data: bytes, mode: Mode) -> float:
    ratios = []
    for at in range(0, len(data), PAGE):
        rec = compress_chunk(data[at:at + PAGE], mode)
        ratios.append(rec.ratio())
    return float(np.mean(ratios))


def gen_data(target_ratio: float, length: int, seed: int = 0,
             mode: Mode = Mode.LZ_HUF) -> bytes:
    """Deterministic bytes whose pipeline compression ratio tracks the target.

    The motif/noise mixing fraction is solved by bisection against the
    actual compressor on a small probe, then applied to the full length.
    """
    if not 0.0 <= target_ratio <= 1.0:
        raise ValueError("target_ratio out of [0, 1]")
    if length < 1:
        raise ValueError("length must be >= 1")

    probe_pages = 6
    if target_ratio >= 0.995:
        frac = 0.0
    elif target_ratio <= 0.01:
        frac = 1.0
    else:
        lo, hi = 0.0, 1.0          # ratio decreases as fill fraction grows
        for _ in range(18):
            mid = (lo + hi) / 2
            got = _measure_ratio(_build_pages(probe_pages, mid, seed), mode)
            if got > target_ratio:
                lo = mid
            else:
                hi = mid
        frac = (lo + hi) / 2

    n_pages = -(-length // PAGE)
    return _build_pages(n_pages, frac, seed)[:length]


# -- corpus handling -----------------------------------------------------------


def corpus_files(path: str) -> list[str]:
    """Sorted regular files under path (or the single file itself)."""
    if os.path.isfile(path):
        return [path]
    if not os.path.isdir(path):
        raise FileNotFoundError(path)
    out = []
    for root, _dirs, files in os.walk(path):
        for name in files:
            out.append(os.path.join(root, name))
    return sorted(out)


def chunk_corpus(path: str, chunk_log: int = PAGE_LOG) -> Iterator[tuple[str, bytes]]:
    """Per-file fixed-size chunks with a short tail chunk; yields
    (file path, chunk bytes)."""
    chunk_size = 1 << chunk_log
    for name in corpus_files(path):
        with open(name, "rb") as f:
            while True:
                chunk = f.read(chunk_size)
                if not chunk:
                    break
                yield name, chunk


def bench_file(path: str, mode: Mode = Mode.LZ_HUF,
               chunk_log: int = PAGE_LOG) -> tuple[dict, list[float]]:
    """Compress one file chunk-wise; returns (report row, per-chunk ratios)."""
    ratios = []
    entropies = []
    n_bytes = 0
    t0 = time.perf_counter()
    with open(path, "rb") as f:
        chunk_size = 1 << chunk_log
        while True:
            chunk = f.read(chunk_size)
            if not chunk:
                break
            rec = compress_chunk(chunk, mode, chunk_log)
            ratios.append(rec.ratio(chunk_log))
            entropies.append(shannon_entropy(chunk).h_bits)
            n_bytes += len(chunk)
    wall = time.perf_counter() - t0
    stats = ratio_stats(ratios)
    est = cycles.estimate(PAGE)
    row = {
        "file": os.path.basename(path),
        "bytes": n_bytes,
        "chunks": stats.count,
        "ratio_median": stats.p50,
        "ratio_p25": stats.p25,
        "ratio_p75": stats.p75,
        "ratio_mean": stats.mean,
        "entropy_mean": float(np.mean(entropies)),
        "wall_mbps": (n_bytes / wall / 1e6) if wall > 0 else None,
        "modeled_latency_us": est.latency_us,
        "modeled_gbps": est.device_throughput_gbps,
    }
    return row, ratios


def _bench_file_args(args: tuple[str, int, int]) -> tuple[dict, list[float]]:
    name, mode, chunk_log = args
    return bench_file(name, Mode(mode), chunk_log)


def bench_run(corpus_path: str, mode: Mode = Mode.LZ_HUF,
              chunk_log: int = PAGE_LOG, jobs: int = 1) -> dict:
    """Benchmark every corpus file; returns {rows, aggregate}.

    With jobs > 1, files fan out across worker processes; rows stay in
    corpus order and the aggregate is order-independent anyway.
    """
    names = corpus_files(corpus_path)
    rows = []
    all_ratios: list[float] = []
    if jobs > 1 and len(names) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_bench_file_args,
                               [(n, int(mode), chunk_log) for n in names])
            for row, ratios in results:
                rows.append(row)
                all_ratios.extend(ratios)
    else:
        for name in names:
            row, ratios = bench_file(name, mode, chunk_log)
            rows.append(row)
            all_ratios.extend(ratios)
    if not rows:
        raise FileNotFoundError("no corpus files under %r" % corpus_path)
    agg = ratio_stats(all_ratios)
    return {
        "mode": mode.name,
        "chunk_log": chunk_log,
        "rows": rows,
        "aggregate": {
            "files": len(rows),
            "chunks": agg.count,
            "ratio_median": agg.p50,
            "ratio_p5": agg.p5,
            "ratio_p25": agg.p25,
            "ratio_p75": agg.p75,
            "ratio_p95": agg.p95,
            "ratio_mean": agg.mean,
        },
    }


def format_report(report: dict) -> str:
    """Aligned text table for a bench_run report."""
    cols = ["file", "bytes", "chunks", "ratio_median", "ratio_p25", "ratio_p75",
            "entropy_mean", "wall_mbps", "modeled_latency_us", "modeled_gbps"]
    lines = ["  ".join("%-18s" % c for c in cols)]
    for row in report["rows"]:
        cells = []
        for c in cols:
            v = row[c]
            if isinstance(v, float):
                cells.append("%-18.4f" % v)
            else:
                cells.append("%-18s" % v)
        lines.append("  ".join(cells))
    agg = report["aggregate"]
    lines.append("aggregate: %d files, %d chunks, median %.4f (p25 %.4f / p75 %.4f), mean %.4f"
                 % (agg["files"], agg["chunks"], agg["ratio_median"],
                    agg["ratio_p25"], agg["ratio_p75"], agg["ratio_mean"]))
    return "\n".join(lines)


# -- built-in mini corpus -------------------------------------------------------

_WORDS = (
    "the of and to in is was for that with storage page block device flash "
    "write read data table cache queue stream byte offset length mapping "
    "compress ratio entropy symbol match buffer engine pipeline latency "
    "throughput controller firmware logical physical segment record header "
    "system memory channel update commit erase allocate garbage collect "
    "valid invalid clean dirty sequential random workload pattern trace"
).split()

_PHRASES = (
    "the write pointer advances", "pages are committed in order",
    "the mapping table is updated", "compressed segments are packed",
    "read amplification stays low", "the block is marked for erase",
    "data is staged in the buffer", "the controller schedules the queue",
)


def _gen_text(rng: np.random.Generator, n: int) -> bytes:
    # prose-like filler: Zipf word sampling interleaved with stock phrases,
    # so both short and medium matches occur
    ranks = np.arange(1, len(_WORDS) + 1, dtype=np.float64)
    p = (1.0 / ranks) / (1.0 / ranks).sum()
    parts = []
    size = 0
    while size < n:
        if rng.random() < 0.35:
            frag = _PHRASES[int(rng.integers(0, len(_PHRASES)))]
        else:
            k = int(rng.integers(3, 9))
            frag = " ".join(_WORDS[int(w)] for w in rng.choice(len(_WORDS), size=k, p=p))
        frag += ".\n" if rng.random() < 0.2 else " "
        parts.append(frag)
        size += len(frag)
    return "".join(parts).encode()[:n]


def _gen_records(rng: np.random.Generator, n: int, noise_bytes: int = 4) -> bytes:
    # fixed-layout 32-byte records: counter + tag + padding + noise field;
    # the noise width dials the chunk ratio
    recs = []
    count = n // 32 + 1
    noise = rng.bytes(count * noise_bytes)
    for i in range(count):
        recs.append(i.to_bytes(8, "little") + b"RECORDv1" +
                    bytes(16 - noise_bytes) +
                    noise[i * noise_bytes:(i + 1) * noise_bytes])
    return b"".join(recs)[:n]


def _gen_runs(rng: np.random.Generator, n: int) -> bytes:
    out = bytearray()
    while len(out) < n:
        kind = int(rng.integers(0, 3))
        run = int(rng.integers(200, 3000))
        if kind == 0:
            out += bytes(run)
        elif kind == 1:
            out += bytes([int(rng.integers(0, 256))]) * run
        else:
            out += bytes(range(256)) * (run // 256 + 1)
    return bytes(out[:n])


def _gen_kv_log(rng: np.random.Generator, n: int) -> bytes:
    # log lines: monotonically increasing timestamp, repeated keys, hex noise
    out = []
    size = 0
    ts = 1_700_000_000_000
    levels = ("INFO", "WARN", "DEBUG", "ERROR")
    while size < n:
        ts += int(rng.integers(1, 2000))
        noise = rng.bytes(6).hex()
        line = ("ts=%d level=%s module=ftl event=map_update lpn=%d crc=%s\n"
                % (ts, levels[int(rng.integers(0, 4))], int(rng.integers(0, 65536)), noise))
        out.append(line)
        size += len(line)
    return "".join(out).encode()[:n]


def build_mini_corpus(dest_dir: str, seed: int = 20240601) -> list[str]:
    """Write the deterministic ~1MB mixed corpus used for offline benches."""
    os.makedirs(dest_dir, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(seed))
    sections = {
        "text.txt": _gen_text(rng, 200_000),
        "records8.bin": _gen_records(rng, 130_000, noise_bytes=8),
        "records4.bin": _gen_records(rng, 140_000, noise_bytes=4),
        "app.log": _gen_kv_log(rng, 180_000),
        "runs.bin": _gen_runs(rng, 90_000),
        "random.bin": rng.bytes(170_000),
        "mixed.bin": gen_data(0.46, 170_000, seed=seed),
    }
    paths = []
    for name, blob in sections.items():
        path = os.path.join(dest_dir, name)
        with open(path, "wb") as f:
            f.write(blob)
        paths.append(path)
    return paths
