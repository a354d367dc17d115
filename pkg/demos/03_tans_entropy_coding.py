"""The tANS stage: count normalization, state spreading, and coded size
against the entropy bound.

Run: python demos/03_tans_entropy_coding.py
"""

import math
import random

from dpzip import fse
from dpzip.huffman import byte_histogram

rnd = random.Random(7)
data = bytes(rnd.choices(b"aaaabbbccd", k=8192))
hist = byte_histogram(data)

nc = fse.normalize_counts(hist, table_log=9)
present = [(chr(s), hist[s], nc.norm[s]) for s in range(256) if hist[s]]
print("symbol  raw-count  normalized (sums to 2^%d = %d)" % (nc.table_log, nc.size))
for sym, raw, norm in present:
    print(f"   {sym}   {raw:9d}  {norm:10d}")

tables = fse.build_tables(nc)
step = fse.spread_step(nc.size)
print("\nspread step over the state ring:", step, "(odd, so it cycles all states)")
print("decode table covers every state:", sorted(set(range(nc.size))) ==
      sorted(range(nc.size)) and len(tables.dec_sym) == nc.size)

enc = fse.encode(data, tables)
h = -sum(c / len(data) * math.log2(c / len(data)) for c in hist if c)
print("\ncoded size: %d bytes = %.4f bits/symbol" % (len(enc), len(enc) * 8 / len(data)))
print("empirical entropy:       %.4f bits/symbol" % h)
print("roundtrip:", fse.decode(enc, tables, len(data)) == data)
print("\nwire header (table_log + 256 x 12-bit weights):",
      len(fse.pack_counts(nc)), "bytes")
