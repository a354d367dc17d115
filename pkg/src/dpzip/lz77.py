"""Hardware-model LZ77 codec for independent blocks of at most 4KB.

The encoder mirrors a pipelined ASIC match unit: it walks the block in
4-byte groups, indexes a tiny two-hash table (256 buckets x 4 slots,
circular FIFO eviction), verifies candidates byte-wise, and accepts the
first candidate reaching the minimum match length (first-fit, no
backtracking).  On a miss it skips ahead 4 bytes, emitting the group as
literals.  Compression ratio is traded away deliberately: table state is
bounded at 256 x 4 positions no matter the input.

The decoder models the dual-buffer design: copies with offsets up to
``RECENT_BYTES`` are served from a register-backed recent-data window,
longer offsets from the history buffer.  Both paths produce identical
bytes; the split only shows up in the hit counters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptStreamError

BLOCK_MAX = 4096          # blocks are self-contained; offsets never cross them
MIN_MATCH = 4             # matches shorter than one hash word are undetectable
HASH_BUCKETS = 256
BUCKET_SLOTS = 4
RECENT_BYTES = 256        # modeled register-backed window in the decoder

_HASH_MUL = 2654435761    # Knuth multiplicative constant, 32-bit
_VECTOR_MIN = 64          # below this, scalar word/hash setup is cheaper


@dataclass(slots=True)
class Token:
    """One LZ77 sequence: pending literals plus an optional back-reference.

    ``match_len == 0`` is only legal for the trailing token of a stream.
    """

    literals: bytes
    match_len: int
    offset: int

    @property
    def literal_len(self) -> int:
        return len(self.literals)


class MatchTable:
    """256-bucket position table, 4 slots per bucket, FIFO eviction.

    Models a fixed SRAM array with a per-bucket write cursor: inserting
    into a full bucket overwrites the oldest entry, so state never exceeds
    HASH_BUCKETS x BUCKET_SLOTS positions.
    """

    def __init__(self):
        self.buckets: list[list[int]] = [[] for _ in range(HASH_BUCKETS)]

    def insert(self, bucket: int, pos: int) -> None:
        b = self.buckets[bucket]
        b.append(pos)
        if len(b) > BUCKET_SLOTS:
            del b[0]

    def candidates(self, bucket: int) -> list[int]:
        """Stored positions, oldest first."""
        return list(self.buckets[bucket])

    def occupancy(self) -> int:
        return sum(len(b) for b in self.buckets)


def hash_pair(word: int) -> tuple[int, int]:
    """Two cheap 1-byte hashes of a 4-byte word (as a little-endian int).

    h0 is the top byte of a 32-bit multiplicative hash; h1 is the xor-fold
    of the four bytes.  Both depend on all input bytes.
    """
    h0 = ((word * _HASH_MUL) & 0xFFFFFFFF) >> 24
    h1 = (word ^ (word >> 8) ^ (word >> 16) ^ (word >> 24)) & 0xFF
    return h0, h1


def _word_hash_lists(data: bytes, n: int) -> tuple[list[int], list[int], list[int]]:
    """Per-position 4-byte words (little-endian) and both hash values."""
    if n >= _VECTOR_MIN:
        a = np.frombuffer(data, dtype=np.uint8)
        w = (a[: n - 3].astype(np.uint32)
             | (a[1: n - 2].astype(np.uint32) << np.uint32(8))
             | (a[2: n - 1].astype(np.uint32) << np.uint32(16))
             | (a[3: n].astype(np.uint32) << np.uint32(24)))
        h0 = (w * np.uint32(_HASH_MUL)) >> np.uint32(24)
        h1 = a[: n - 3] ^ a[1: n - 2] ^ a[2: n - 1] ^ a[3: n]
        return w.tolist(), h0.tolist(), h1.tolist()
    words, h0s, h1s = [], [], []
    for i in range(n - 3):
        word = data[i] | (data[i + 1] << 8) | (data[i + 2] << 16) | (data[i + 3] << 24)
        h0, h1 = hash_pair(word)
        words.append(word)
        h0s.append(h0)
        h1s.append(h1)
    return words, h0s, h1s


def encode(block: bytes) -> list[Token]:
    """Encode one block (1..4096 bytes) into a token stream.

    Deterministic first-fit matching: both hash buckets are probed, oldest
    candidates first (h0 bucket before h1), and the first candidate whose
    4-byte word matches is taken at its full forward extension.  The table
    is updated once per examined group start.
    """
    n = len(block)
    if n == 0:
        raise ValueError("empty input")
    if n > BLOCK_MAX:
        raise ValueError("block exceeds %d bytes" % BLOCK_MAX)
    if n < MIN_MATCH:
        return [Token(block, 0, 0)]

    data = block
    words, h0s, h1s = _word_hash_lists(data, n)
    buckets: list[list[int]] = [[] for _ in range(HASH_BUCKETS)]
    tokens: list[Token] = []
    pos = 0
    lit_start = 0
    last = n - 4

    while pos <= last:
        w = words[pos]
        h0 = h0s[pos]
        h1 = h1s[pos]

        match_at = -1
        b0 = buckets[h0]
        for c in b0:
            if words[c] == w:
                match_at = c
                break
        if match_at < 0 and h1 != h0:
            for c in buckets[h1]:
                if words[c] == w:
                    match_at = c
                    break

        # insert after probing so stored positions stay < the cursor
        b0.append(pos)
        if len(b0) > BUCKET_SLOTS:
            del b0[0]
        if h1 != h0:
            b1 = buckets[h1]
            b1.append(pos)
            if len(b1) > BUCKET_SLOTS:
                del b1[0]

        if match_at < 0:
            pos += 4
            continue

        # word equality guarantees >= MIN_MATCH; extend to full length
        c = match_at
        length = 4
        limit = n - pos
        while length + 32 <= limit and data[c + length:c + length + 32] == data[pos + length:pos + length + 32]:
            length += 32
        while length < limit and data[c + length] == data[pos + length]:
            length += 1

        tokens.append(Token(data[lit_start:pos], length, pos - c))
        pos += length
        lit_start = pos

    if lit_start < n or not tokens:
        tokens.append(Token(data[lit_start:], 0, 0))
    return tokens


@dataclass
class DecoderBuffers:
    """Decoded history plus the modeled recent-data window and hit counters."""

    history: bytearray = field(default_factory=bytearray)
    recent_copies: int = 0
    history_copies: int = 0

    @property
    def recent(self) -> bytes:
        """Last min(RECENT_BYTES, len(history)) decoded bytes."""
        return bytes(self.history[-RECENT_BYTES:])


def decode(tokens: list[Token], expected_len: int, use_recent_buffer: bool = True,
           buffers: DecoderBuffers | None = None) -> bytes:
    """Expand a token stream; output must be exactly ``expected_len`` bytes.

    Copies are byte-sequential, so ``offset < match_len`` repeats the
    pattern.  ``use_recent_buffer`` selects whether short-offset copies go
    through the modeled recent-data window; output is identical either way.
    """
    buf = buffers if buffers is not None else DecoderBuffers()
    out = buf.history
    last = len(tokens) - 1
    for i, tok in enumerate(tokens):
        out += tok.literals
        ml = tok.match_len
        if ml == 0:
            if i != last:
                raise CorruptStreamError("corrupt stream: zero match before final token")
            continue
        if ml < MIN_MATCH:
            raise CorruptStreamError("corrupt stream: match length below minimum")
        off = tok.offset
        if off < 1 or off > len(out):
            raise CorruptStreamError("corrupt stream: offset out of range")
        if use_recent_buffer and off <= RECENT_BYTES:
            buf.recent_copies += 1
            window = out[-off:]      # served from the recent-data window
        else:
            buf.history_copies += 1
            window = out[len(out) - off:]
        if off >= ml:
            out += window[:ml]
        else:
            reps = -(-ml // off)
            out += (bytes(window) * reps)[:ml]
    if len(out) != expected_len:
        raise CorruptStreamError("corrupt stream: length mismatch")
    return bytes(out)
