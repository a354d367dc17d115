"""The analytical hardware cost model: cycles, latency, and throughput for
block compression at the modeled 1 GHz clock.

Run: python demos/05_cycle_model.py
"""

from dpzip import cycles
from dpzip.huffman import WORST_CASE_TRACE

print("block bytes | pipeline | huffman | overhead | total | latency | block GB/s")
for n in (8, 64, 512, 2048, 4096):
    e = cycles.estimate(n, WORST_CASE_TRACE)
    print(f"{n:11d} | {e.pipeline_cycles:8d} | {e.huffman_cycles:7d} |"
          f" {e.overhead_cycles:8d} | {e.total_cycles:5d} | {e.latency_us:5.2f}us |"
          f" {e.block_throughput_gbps:6.3f}")

e = cycles.estimate(4096, WORST_CASE_TRACE)
print("\n4KB block, worst-case canonization schedule:")
print("  total cycles:", e.total_cycles, "-> latency", e.latency_us, "us")
print("  per-engine steady throughput:", e.steady_throughput_gbps, "GB/s",
      "(8 bytes x 1 GHz)")
print("  device model (%d engines): %.1f GB/s" % (e.engines, e.device_throughput_gbps))
print("\nmodeled columns only; wall-clock software rates live in bench reports")
