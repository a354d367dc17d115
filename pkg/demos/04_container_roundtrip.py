"""Chunk framing and the stream container: mode selection, RAW fallback,
per-chunk ratios, and the 64KB paged layout.

Run: python demos/04_container_roundtrip.py
"""

import io
import random

from dpzip import format as fmt
from dpzip.format import Mode

rnd = random.Random(3)
pages = {
    "zeros": bytes(4096),
    "text": (b"the mapping table is updated in place; " * 200)[:4096],
    "half": (rnd.randbytes(16) * 128 + rnd.randbytes(2048))[:4096],
    "random": rnd.randbytes(4096),
}

print("page     preference  chosen mode  comp_len  ratio")
for name, page in pages.items():
    for pref in (Mode.LZ_HUF, Mode.LZ_FSE, Mode.LZ_ONLY):
        rec = fmt.compress_chunk(page, pref)
        print(f"{name:8s} {pref.name:10s}  {rec.mode.name:10s}  {rec.comp_len:8d}  {rec.ratio():.4f}")
        assert fmt.decompress_chunk(rec) == page

print("\nincompressible input always falls back to RAW and never grows "
      "beyond header overhead")

blob = b"".join(pages.values()) * 3
dst = io.BytesIO()
info = fmt.compress_stream(io.BytesIO(blob), dst)
print("\nstream: %d chunks, %d -> %d bytes (ratio %.4f)"
      % (info["chunks"], info["orig_bytes"], info["comp_bytes"], info["ratio"]))

dst.seek(0)
out = io.BytesIO()
fmt.decompress_stream(dst, out)
print("stream roundtrip:", out.getvalue() == blob)

# any single record decompresses without its neighbors
dst.seek(0)
records = list(fmt.read_records(dst))
print("chunk independence: record[2] alone ->",
      fmt.decompress_chunk(records[2]) == blob[2 * 4096:3 * 4096])

# 64KB chunks are processed internally as sixteen 4KB pages
big = blob[:65536]
rec = fmt.compress_chunk(big, Mode.LZ_HUF, chunk_log=16)
print("\n64KB chunk -> mode %s, ratio %.4f; roundtrip %s"
      % (rec.mode.name, rec.ratio(16),
         fmt.decompress_chunk(rec, 16) == big))
