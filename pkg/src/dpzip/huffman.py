"""Canonical Huffman coding over the 256-symbol byte alphabet, capped at 11 bits.

Code construction runs in two parts.  ``build_lengths`` is a standard
two-queue Huffman pass and may produce lengths deeper than the cap.
``cap_lengths`` then reshapes the lengths the way the modeled hardware
does, in three fixed-latency stages:

1. scan & cap: one pass over all 256 symbol slots clips lengths to the
   ceiling and tallies the leaf count and the Kraft over-subscription
   (the deficit, in units of 2^-11 slots);
2. redistribution: walk levels 10 -> 1, demoting just enough leaves per
   level (each demotion at level L recovers 2^(10-L) slots) to absorb
   the deficit;
3. hole repair: any overshoot (under-subscription) is repaired by
   promoting one leaf per iteration, consuming the largest power-of-two
   slot gain available, so the residual at least halves per iteration.

The per-stage cycle counts are recorded in a ``CanonizationTrace``; the
worst case is 256 + 10 + 8 = 274 cycles.  Capped codes are valid and
complete (Kraft equality at 11 bits) but not necessarily optimal; the
single-symbol degenerate histogram gets a 1-bit code and is the one case
where Kraft equality is waived.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import CorruptStreamError

ALPHABET = 256
MAX_BITS = 11
KRAFT_SLOTS = 1 << MAX_BITS       # a complete code fills exactly this many slots


@dataclass(frozen=True)
class CanonizationTrace:
    """Modeled cycle accounting for one cap_lengths run."""

    n_leaves: int
    deficit: int                   # slot over-subscription right after clipping
    stage_cycles: tuple[int, int, int]   # (scan, redistribute, repair)

    @property
    def total(self) -> int:
        return sum(self.stage_cycles)


# schedule bound used by the cycle model when no concrete trace is at hand
WORST_CASE_TRACE = CanonizationTrace(ALPHABET, 0, (ALPHABET, 10, 8))


def byte_histogram(data: bytes) -> list[int]:
    """256-entry symbol frequency table."""
    return np.bincount(np.frombuffer(data, dtype=np.uint8), minlength=ALPHABET).tolist()


def build_lengths(counts: list[int]) -> list[int]:
    """Optimal (uncapped) Huffman code lengths via the two-queue method.

    Returns 256 entries, 0 for unused symbols.  A single-symbol histogram
    yields length 1 for that symbol.  Deterministic: leaves are sorted by
    (count, symbol) and ties between the queues prefer the leaf queue.
    """
    leaves = sorted((c, s) for s, c in enumerate(counts) if c > 0)
    if not leaves:
        raise ValueError("empty histogram")
    lengths = [0] * ALPHABET
    if len(leaves) == 1:
        lengths[leaves[0][1]] = 1
        return lengths

    # nodes: (weight, [symbols...]); merging concatenates symbol sets and
    # bumps each contained symbol's depth by one
    q1: deque = deque((w, [s]) for w, s in leaves)
    q2: deque = deque()

    def pop_min():
        if q1 and (not q2 or q1[0][0] <= q2[0][0]):
            return q1.popleft()
        return q2.popleft()

    while len(q1) + len(q2) > 1:
        wa, sa = pop_min()
        wb, sb = pop_min()
        for s in sa:
            lengths[s] += 1
        for s in sb:
            lengths[s] += 1
        sa.extend(sb)
        q2.append((wa + wb, sa))
    return lengths


def _kraft_slots(lengths: list[int], max_bits: int) -> int:
    return sum(1 << (max_bits - l) for l in lengths if l > 0)


def cap_lengths(lengths: list[int], max_bits: int = MAX_BITS) -> tuple[list[int], CanonizationTrace]:
    """Clip code lengths to ``max_bits`` and restore Kraft equality.

    Input must be a complete code (Kraft equality at its own depth).  The
    used/unused status of every symbol is preserved.  Returns the capped
    lengths and the stage cycle trace.
    """
    used = [s for s, l in enumerate(lengths) if l > 0]
    if len(used) > (1 << max_bits):
        raise ValueError("cap infeasible")

    # stage 1: scan & cap (one cycle per alphabet slot)
    out = list(lengths)
    n_leaves = len(used)
    for s in used:
        if out[s] > max_bits:
            out[s] = max_bits
    scan_cycles = ALPHABET

    if n_leaves == 1:
        # degenerate 1-bit code; Kraft equality is waived here
        return out, CanonizationTrace(1, 0, (scan_cycles, 0, 0))

    deficit = _kraft_slots(out, max_bits) - (1 << max_bits)
    by_len: list[list[int]] = [[] for _ in range(max_bits + 1)]
    for s in used:
        by_len[out[s]].append(s)          # ascending symbol order per level

    # stage 2: walk levels max_bits-1 -> 1, demoting just enough leaves
    k = deficit
    redistribute_cycles = 0
    for level in range(max_bits - 1, 0, -1):
        if k <= 0:
            break
        redistribute_cycles += 1
        gain = 1 << (max_bits - 1 - level)      # slots recovered per demotion
        avail = by_len[level]
        if not avail:
            continue
        d = min(len(avail), -(-k // gain))
        for s in avail[:d]:
            out[s] = level + 1
        by_len[level + 1] = sorted(by_len[level + 1] + avail[:d])
        del avail[:d]
        k -= d * gain
    if k > 0:
        raise ValueError("cap infeasible")

    # stage 3: repair holes by promoting leaves, largest usable gain first
    holes = -k
    repair_cycles = 0
    while holes > 0:
        repair_cycles += 1
        level = max(2, max_bits - holes.bit_length() + 1)
        while level <= max_bits and not by_len[level]:
            level += 1
        if level > max_bits:
            raise ValueError("cap infeasible")
        s = by_len[level].pop(0)
        out[s] = level - 1
        by_len[level - 1] = sorted(by_len[level - 1] + [s])
        holes -= 1 << (max_bits - level)

    trace = CanonizationTrace(n_leaves, deficit, (scan_cycles, redistribute_cycles, repair_cycles))
    return out, trace


class CanonicalCodeTable:
    """Per-symbol (length, code) pairs in canonical order.

    Codes of equal length are consecutive integers ordered by symbol
    value, so the whole table is reconstructible from the lengths alone.
    """

    def __init__(self, lengths: list[int]):
        _validate_lengths(lengths)
        self.lengths = list(lengths)
        self.codes = [0] * ALPHABET
        count_at = [0] * (MAX_BITS + 1)
        for l in lengths:
            if l:
                count_at[l] += 1
        next_code = [0] * (MAX_BITS + 2)
        code = 0
        for l in range(1, MAX_BITS + 1):
            code = (code + count_at[l - 1]) << 1
            next_code[l] = code
        bits: list[str | None] = [None] * ALPHABET
        for s, l in enumerate(lengths):
            if l:
                self.codes[s] = next_code[l]
                next_code[l] += 1
                bits[s] = format(self.codes[s], "0%db" % l)
        self._bitstrings = bits

    def bit_length_of(self, data: bytes) -> int:
        lengths = self.lengths
        return sum(lengths[b] for b in data)


def _validate_lengths(lengths: list[int]) -> None:
    if len(lengths) != ALPHABET:
        raise ValueError("invalid lengths")
    used = [l for l in lengths if l > 0]
    if not used:
        raise ValueError("invalid lengths")
    if max(used) > MAX_BITS or min(used) < 1:
        raise ValueError("invalid lengths")
    if len(used) == 1:
        if used[0] != 1:
            raise ValueError("invalid lengths")
        return
    if _kraft_slots(lengths, MAX_BITS) != KRAFT_SLOTS:
        raise ValueError("invalid lengths")


def canonicalize(lengths: list[int]) -> CanonicalCodeTable:
    """Assign canonical codes to a valid (capped) length set."""
    return CanonicalCodeTable(lengths)


def make_table(counts: list[int]) -> tuple[CanonicalCodeTable, CanonizationTrace]:
    """Histogram -> capped canonical code table, with the cycle trace."""
    capped, trace = cap_lengths(build_lengths(counts))
    return canonicalize(capped), trace


def encode(data: bytes, table: CanonicalCodeTable) -> bytes:
    """MSB-first bitstream, zero-padded to a byte boundary."""
    if not data:
        return b""
    try:
        bits = "".join(map(table._bitstrings.__getitem__, data))
    except TypeError:
        raise ValueError("symbol not in code") from None
    pad = -len(bits) % 8
    if pad:
        bits += "0" * pad
    return int(bits, 2).to_bytes(len(bits) // 8, "big")


def decode(payload: bytes, lengths: list[int], n: int) -> bytes:
    """Decode ``n`` symbols using a flat 2^11-entry window lookup table."""
    if n == 0:
        return b""
    _validate_lengths(lengths)
    table = CanonicalCodeTable(lengths)
    lut = [0] * KRAFT_SLOTS                  # (length << 8) | symbol, 0 = hole
    for s, l in enumerate(lengths):
        if l:
            start = table.codes[s] << (MAX_BITS - l)
            lut[start:start + (1 << (MAX_BITS - l))] = [(l << 8) | s] * (1 << (MAX_BITS - l))

    out = bytearray(n)
    buf = 0
    nbuf = 0
    bytepos = 0
    blen = len(payload)
    for i in range(n):
        while nbuf < MAX_BITS and bytepos < blen:
            buf = (buf << 8) | payload[bytepos]
            bytepos += 1
            nbuf += 8
        if nbuf >= MAX_BITS:
            window = (buf >> (nbuf - MAX_BITS)) & (KRAFT_SLOTS - 1)
        else:
            window = (buf << (MAX_BITS - nbuf)) & (KRAFT_SLOTS - 1)
        entry = lut[window]
        length = entry >> 8
        if length == 0:
            raise CorruptStreamError("corrupt stream: invalid code")
        if length > nbuf:
            raise CorruptStreamError("corrupt stream: truncated bitstream")
        out[i] = entry & 0xFF
        nbuf -= length
        buf &= (1 << nbuf) - 1
    return bytes(out)


def pack_lengths(lengths: list[int]) -> bytes:
    """256 lengths as 4-bit nibbles: a fixed 128-byte header."""
    out = bytearray(ALPHABET // 2)
    for i in range(ALPHABET // 2):
        out[i] = (lengths[2 * i] << 4) | lengths[2 * i + 1]
    return bytes(out)


def unpack_lengths(data: bytes) -> list[int]:
    if len(data) != ALPHABET // 2:
        raise CorruptStreamError("invalid length header")
    lengths = [0] * ALPHABET
    for i, b in enumerate(data):
        hi, lo = b >> 4, b & 0xF
        if hi > MAX_BITS or lo > MAX_BITS:
            raise CorruptStreamError("invalid length header")
        lengths[2 * i] = hi
        lengths[2 * i + 1] = lo
    return lengths
