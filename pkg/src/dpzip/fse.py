"""Table-based asymmetric-numeral-system (tANS) coder for byte literals.

Self-consistent implementation: the encoder and decoder here round-trip
each other and sit near the entropy bound, but bit-exact compatibility
with external tANS bitstreams is not a goal.

State layout: the decoder walks states in [0, 2^table_log); symbols are
spread over the state ring with the classic odd step
``(size >> 1) + (size >> 3) + 3``.  The encoder runs the inverse
transitions over the reversed input, starting from state 0, so the
decoder can verify it lands back on state 0 after the last symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitio import BitReader, BitWriter
from .errors import CorruptStreamError

ALPHABET = 256
DEFAULT_TABLE_LOG = 11
MIN_TABLE_LOG = 4
MAX_TABLE_LOG = 12


@dataclass(frozen=True)
class NormalizedCounts:
    """Symbol weights scaled to sum to 2^table_log.

    Every symbol present in the source keeps a nonzero weight; rare
    symbols floored up to weight 1 are flagged in ``low_prob``.
    """

    table_log: int
    norm: tuple[int, ...]
    low_prob: tuple[bool, ...]

    @property
    def size(self) -> int:
        return 1 << self.table_log


def normalize_counts(counts: list[int], table_log: int = DEFAULT_TABLE_LOG) -> NormalizedCounts:
    """Largest-remainder scaling with the correction charged to the most
    frequent symbol."""
    if not MIN_TABLE_LOG <= table_log <= MAX_TABLE_LOG:
        raise ValueError("table_log out of range")
    total = sum(counts)
    present = [s for s, c in enumerate(counts) if c > 0]
    if len(present) < 2:
        raise ValueError("use RLE/raw path")
    size = 1 << table_log

    norm = [0] * ALPHABET
    low = [False] * ALPHABET
    rems = []
    for s in present:
        share = counts[s] * size
        base, rem = divmod(share, total)
        if base == 0:
            norm[s] = 1          # must-keep rare symbol
            low[s] = True
        else:
            norm[s] = base
            rems.append((-rem, s))

    assigned = sum(norm)
    if assigned < size:
        rems.sort()
        for _, s in rems[: size - assigned]:
            norm[s] += 1
        assigned = sum(norm)
    if assigned != size:
        # flooring over-allocated; take the excess back from the heaviest
        for s in sorted(present, key=lambda s: (-counts[s], s)):
            give = min(assigned - size, norm[s] - 1)
            norm[s] -= give
            assigned -= give
            if assigned == size:
                break
    if assigned != size:
        raise ValueError("table too small for alphabet")
    return NormalizedCounts(table_log, tuple(norm), tuple(low))


@dataclass
class FseTables:
    """Mutually inverse encode/decode state-transition tables."""

    table_log: int
    norm: tuple[int, ...]
    dec_sym: list[int]       # per decoder state: emitted symbol
    dec_nb: list[int]        # per decoder state: bits to read
    dec_base: list[int]      # per decoder state: next-state base
    dec_packed: list[int]    # per decoder state: (nb << 20) | (sym << 12) | base
    enc_states: list[int]    # flat [cumstart[s] + (x - norm[s])] -> state
    enc_offset: list[int]    # per symbol: enc_states offset minus norm[s]
    nb_hi: list[int]         # per symbol: max bits emitted per step
    nb_threshold: list[int]  # per symbol: v >= threshold selects nb_hi

    @property
    def size(self) -> int:
        return 1 << self.table_log


def spread_step(size: int) -> int:
    return (size >> 1) + (size >> 3) + 3


def build_tables(nc: NormalizedCounts) -> FseTables:
    """Spread symbols over the state ring and derive both transition tables."""
    size = nc.size
    tl = nc.table_log
    norm = np.array(nc.norm, dtype=np.int64)
    syms = np.nonzero(norm)[0]
    freqs = norm[syms]

    positions = (np.arange(size, dtype=np.int64) * spread_step(size)) & (size - 1)
    seq_sym = np.repeat(syms, freqs)
    starts = np.concatenate(([0], np.cumsum(freqs)))[:-1]
    f_rep = np.repeat(freqs, freqs)
    x = np.arange(size, dtype=np.int64) - np.repeat(starts, freqs) + f_rep

    nbits = tl - (np.frexp(x.astype(np.float64))[1] - 1)
    base = (x << nbits) - size

    dec_sym = np.empty(size, dtype=np.int64)
    dec_nb = np.empty(size, dtype=np.int64)
    dec_base = np.empty(size, dtype=np.int64)
    dec_sym[positions] = seq_sym
    dec_nb[positions] = nbits
    dec_base[positions] = base

    enc_offset = np.zeros(ALPHABET, dtype=np.int64)
    enc_offset[syms] = starts - freqs

    nb_hi = np.zeros(ALPHABET, dtype=np.int64)
    nb_threshold = np.zeros(ALPHABET, dtype=np.int64)
    fbits = np.frexp(freqs.astype(np.float64))[1]           # bit_length of each freq
    nb_hi_s = tl + 1 - fbits
    nb_hi[syms] = nb_hi_s
    nb_threshold[syms] = freqs << nb_hi_s

    return FseTables(
        table_log=tl,
        norm=nc.norm,
        dec_sym=dec_sym.tolist(),
        dec_nb=dec_nb.tolist(),
        dec_base=dec_base.tolist(),
        dec_packed=((dec_nb << 20) | (dec_sym << 12) | dec_base).tolist(),
        enc_states=positions.tolist(),
        enc_offset=enc_offset.tolist(),
        nb_hi=nb_hi.tolist(),
        nb_threshold=nb_threshold.tolist(),
    )


_BITFMT = [""] + ["0%db" % i for i in range(1, 25)]


def encode(data: bytes, tables: FseTables) -> bytes:
    """Encode to a bitstream carrying the initial decoder state up front."""
    size = tables.size
    tl = tables.table_log
    enc_states = tables.enc_states
    enc_off = tables.enc_offset
    nb_hi = tables.nb_hi
    nb_th = tables.nb_threshold
    fmt = _BITFMT
    fmt_fn = format

    st = 0
    parts: list[str] = []
    append = parts.append
    for b in data[::-1]:
        nbh = nb_hi[b]
        if nbh == 0:
            raise ValueError("symbol not in table")
        v = st + size
        nb = nbh - (v < nb_th[b])
        if nb:                    # high-probability symbols may emit 0 bits
            append(fmt_fn(v & ((1 << nb) - 1), fmt[nb]))
        st = enc_states[enc_off[b] + (v >> nb)]

    parts.append(fmt_fn(st, fmt[tl]))
    parts.reverse()
    bits = "".join(parts)
    pad = -len(bits) % 8
    if pad:
        bits += "0" * pad
    return int(bits, 2).to_bytes(len(bits) // 8, "big")


def decode(payload: bytes, tables: FseTables, n: int) -> bytes:
    """Decode n symbols; the stream must land back on state 0."""
    if n == 0:
        return b""
    dec = tables.dec_packed
    tl = tables.table_log
    out = bytearray(n)
    buf = 0
    nbuf = 0
    bytepos = 0
    blen = len(payload)

    if blen * 8 < tl:
        raise CorruptStreamError("corrupt stream: truncated bitstream")
    while nbuf < tl:
        buf = (buf << 8) | payload[bytepos]
        bytepos += 1
        nbuf += 8
    nbuf -= tl
    state = buf >> nbuf
    buf &= (1 << nbuf) - 1

    for i in range(n):
        e = dec[state]
        out[i] = (e >> 12) & 0xFF
        nb = e >> 20
        while nbuf < nb:
            if bytepos >= blen:
                raise CorruptStreamError("corrupt stream: truncated bitstream")
            buf = (buf << 8) | payload[bytepos]
            bytepos += 1
            nbuf += 8
        nbuf -= nb
        state = (e & 0xFFF) + (buf >> nbuf)
        buf &= (1 << nbuf) - 1
    if state != 0:
        raise CorruptStreamError("corrupt stream: bad final state")
    return bytes(out)


def pack_counts(nc: NormalizedCounts) -> bytes:
    """Wire form: table_log byte + 256 weights packed as 12-bit fields."""
    w = BitWriter()
    for v in nc.norm:
        w.write(v, 12)
    return bytes([nc.table_log]) + w.getvalue()


HEADER_BYTES = 1 + (ALPHABET * 12) // 8      # 385


def unpack_counts(data: bytes) -> NormalizedCounts:
    if len(data) != HEADER_BYTES:
        raise CorruptStreamError("invalid counts header")
    tl = data[0]
    if not MIN_TABLE_LOG <= tl <= MAX_TABLE_LOG:
        raise CorruptStreamError("invalid counts header")
    r = BitReader(data[1:])
    norm = tuple(r.read(12) for _ in range(ALPHABET))
    if sum(norm) != (1 << tl):
        raise CorruptStreamError("invalid counts header")
    return NormalizedCounts(tl, norm, tuple(False for _ in range(ALPHABET)))
