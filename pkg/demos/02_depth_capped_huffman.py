"""Show the three-stage depth cap reshaping an over-deep Huffman tree,
with its cycle trace, and canonical code assignment.

Run: python demos/02_depth_capped_huffman.py
"""

from dpzip import huffman as H

# Fibonacci frequencies force a maximally skewed tree
fib = [1, 1]
while len(fib) < 24:
    fib.append(fib[-1] + fib[-2])
counts = fib + [0] * (256 - len(fib))

lengths = H.build_lengths(counts)
print("uncapped optimal depths:", sorted({l for l in lengths if l}, reverse=True))

capped, trace = H.cap_lengths(lengths)
print("capped depths:          ", sorted({l for l in capped if l}, reverse=True))
print("kraft slots at 11 bits: ", sum(1 << (11 - l) for l in capped if l),
      "(complete code =", H.KRAFT_SLOTS, ")")
print("trace: leaves=%d deficit=%d cycles(scan, redistribute, repair)=%s total=%d"
      % (trace.n_leaves, trace.deficit, trace.stage_cycles, trace.total))
print("hard schedule bound: 256 + 10 + 8 = 274 cycles\n")

table = H.canonicalize(capped)
print("canonical codes for the five most frequent symbols:")
order = sorted((l, s) for s, l in enumerate(capped) if l)[:5]
for l, s in order:
    print(f"  symbol {s:3d}  len {l:2d}  code {format(table.codes[s], '0%db' % l)}")

data = bytes(s for s, c in enumerate(counts) for _ in range(c))
enc = H.encode(data, table)
print("\n%d source bytes -> %d coded bytes; decode ok: %s"
      % (len(data), len(enc), H.decode(enc, capped, len(data)) == data))
print("length header is always 128 bytes:", len(H.pack_lengths(capped)))
