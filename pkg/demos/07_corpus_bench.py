"""Benchmark tooling: the built-in mini corpus, ratio percentiles, the
granularity comparison, and the compressibility dial.

Run: python demos/07_corpus_bench.py
"""

import tempfile

from dpzip import bench
from dpzip.format import Mode

with tempfile.TemporaryDirectory(prefix="dpzip-demo-") as d:
    bench.build_mini_corpus(d)

    print("=== 4KB-chunk benchmark over the mini corpus ===")
    report = bench.bench_run(d, Mode.LZ_HUF, chunk_log=12)
    print(bench.format_report(report))

    agg4 = report["aggregate"]
    agg64 = bench.bench_run(d, Mode.LZ_HUF, chunk_log=16)["aggregate"]
    print("\n=== granularity: 64KB chunks are still compressed as 4KB pages ===")
    print("4KB-chunk median ratio: %.4f" % agg4["ratio_median"])
    print("64KB-chunk median ratio: %.4f (stable by construction)"
          % agg64["ratio_median"])

print("\n=== compressibility dial ===")
print("target  achieved  entropy(bits/byte)")
for t in (0.0, 0.25, 0.5, 0.75, 1.0):
    data = bench.gen_data(t, 8 * 4096, seed=1)
    got = bench._measure_ratio(data, Mode.LZ_HUF)
    print(f"  {t:.2f}   {got:.4f}    {bench.shannon_entropy(data).h_bits:.3f}")

print("\nper-chunk percentiles use the same machinery:")
stats = bench.ratio_stats([0.02, 0.31, 0.44, 0.47, 0.52, 0.58, 1.0])
print("  p5 %.3f  p25 %.3f  p50 %.3f  p75 %.3f  p95 %.3f"
      % (stats.p5, stats.p25, stats.p50, stats.p75, stats.p95))
