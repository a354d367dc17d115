"""Inline compression inside a log-structured FTL: packing, page splits,
overwrites, garbage collection, and effective capacity.

Run: python demos/06_ftl_simulation.py
"""

import random

from dpzip import ftl
from dpzip.ftl import FtlSimulator, NandGeometry

geo = NandGeometry(page_size=4096, pages_per_block=16, block_count=32, op_fraction=0.1)
sim = FtlSimulator(geo)
print("geometry: %d blocks x %d pages, %d reserved for GC, %d host-visible 4KB lpns"
      % (geo.block_count, geo.pages_per_block, geo.reserved_blocks, geo.user_pages))

print("\n=== variable-length packing ===")
sim.host_write(0, bytes(4096))
print("zero page  -> segments", [(s.page_id, s.offset, s.length)
                                 for s in sim.mapping[0].segments])
rnd = random.Random(1)
half = rnd.randbytes(2100) + bytes(1996)
sim.host_write(1, half)
sim.host_write(2, half)
print("2KB record -> segments", [(s.page_id, s.offset, s.length)
                                 for s in sim.mapping[2].segments],
      "(split continues on the next page)")
sim.host_write(3, rnd.randbytes(4096))
print("random     -> RAW, page-aligned:", [(s.page_id, s.offset, s.length)
                                           for s in sim.mapping[3].segments])

print("\n=== overwrite churn and greedy GC ===")
for round_ in range(6):
    for lpn in range(60):
        sim.host_write(lpn, ftl.pattern_bytes("ratio:0.4:%d" % (round_ * 100 + lpn)))
m = sim.metrics_dict()
print("after %d writes: WAF %.2f, GC runs %d, utilization %.2f"
      % (m["host_writes"], m["waf"], m["gc_runs"], m["space_utilization"]))
try:
    freed = sim.gc_step()
    print("manual gc_step freed", freed, "pages")
except ftl.GcFutileError:
    print("manual gc_step: futile (nothing reclaimable right now)")
sim.check_invariants()
print("structural invariants hold (exclusive mappings, adjacent continuations)")

print("\n=== effective capacity: exposing 2x with compressible data ===")
sim2 = FtlSimulator(geo, capacity_factor=2.0)
print("exposed lpns:", sim2.exposed_lpns, "(2x the physical user pages)")
data = ftl.pattern_bytes("ratio:0.45:9")
ok = 0
try:
    for lpn in range(sim2.exposed_lpns):
        sim2.host_write(lpn, ftl.pattern_bytes("ratio:0.45:%d" % lpn)
                        if lpn % 64 == 0 else data)
        ok += 1
    print("filled all", ok, "logical pages with ~45%-compressible data")
except ftl.NoSpaceError:
    print("no space after", ok, "pages")

sim3 = FtlSimulator(geo, capacity_factor=2.0)
blob = random.Random(2).randbytes(4096)
ok = 0
try:
    for lpn in range(sim3.exposed_lpns):
        sim3.host_write(lpn, blob)
        ok += 1
except ftl.NoSpaceError:
    print("incompressible data: honest 'no space' at %.0f%% of the logical space"
          % (100 * ok / sim3.exposed_lpns))
