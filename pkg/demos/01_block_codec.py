"""Walk through the block-level LZ77 codec: tokens, the bounded match
table, and the decoder's recent-data window.

Run: python demos/01_block_codec.py
"""

from dpzip import lz77

print("=== tokens for a tiny repetitive block ===")
block = b"abcdabcdabcdXYabcdabcd"
tokens = lz77.encode(block)
for t in tokens:
    print(f"  literals={t.literals!r:28} match_len={t.match_len:3d} offset={t.offset}")
print("decoded ok:", lz77.decode(tokens, len(block)) == block)

print("\n=== a zero page collapses to one short match chain ===")
tokens = lz77.encode(bytes(4096))
print("  token count:", len(tokens))
print("  first token:", tokens[0].literal_len, "literals, then match_len",
      tokens[0].match_len, "offset", tokens[0].offset)

print("\n=== the hash pair drives a 256-bucket, 4-slot table ===")
word = int.from_bytes(b"page", "little")
print("  hash_pair('page') ->", lz77.hash_pair(word))
table = lz77.MatchTable()
for pos in range(0, 24, 4):
    table.insert(17, pos)
print("  bucket 17 after 6 inserts (FIFO, oldest first):", table.candidates(17))
print("  occupancy never exceeds", lz77.HASH_BUCKETS * lz77.BUCKET_SLOTS, "positions")

print("\n=== short offsets ride the modeled recent-data window ===")
data = (b"0123456789abcdef" * 64) + bytes(range(256)) * 2
tokens = lz77.encode(data[:4096])
buf = lz77.DecoderBuffers()
out = lz77.decode(tokens, len(data[:4096]), use_recent_buffer=True, buffers=buf)
print("  copies via recent window:", buf.recent_copies,
      "| via history buffer:", buf.history_copies)
print("  recent window mirrors history tail:",
      buf.recent == bytes(buf.history[-lz77.RECENT_BYTES:]))
print("  roundtrip:", out == data[:4096])
