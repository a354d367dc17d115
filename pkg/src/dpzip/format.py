"""Chunk framing, mode selection, and the stream container.

This is the on-disk contract (documented bit-exactly in FORMAT.md) and
the one place compression ratio is defined: ratio = framed compressed
bytes / original bytes, headers included, lower is better.

A chunk holds up to 2^chunk_log bytes of input.  At the default
chunk_log 12 a chunk is one 4KB page and is compressed in a single pass;
larger chunks (up to 64KB) are processed internally as independent 4KB
pages, each with its own mini record, so the ratio is insensitive to the
IO size.  Whenever a compressed encoding does not beat storing the bytes
verbatim, the framer falls back to RAW: incompressible input costs its
own size plus the record header, never more.
"""

from __future__ import annotations

import enum
import zlib
from dataclasses import dataclass
from typing import BinaryIO, Iterator

from . import fse, huffman, lz77
from .bitio import read_uvarint, write_uvarint
from .errors import ContainerError, CorruptStreamError

MAGIC = b"DPZ1"
VERSION = 1
FLAG_CRC = 0x10                 # high nibble of the version byte
PAGE_SIZE = 4096
PAGE_LOG = 12
MIN_CHUNK_LOG = 12
MAX_CHUNK_LOG = 16
PAGE_HEADER = 5                 # mode u8 + orig u16le + comp u16le
WIDE_HEADER = 7                 # mode u8 + orig u24le + comp u24le


class Mode(enum.IntEnum):
    RAW = 0
    LZ_HUF = 1
    LZ_FSE = 2
    LZ_ONLY = 3


@dataclass
class ChunkRecord:
    """One framed compressed unit; RAW implies comp_len == orig_len."""

    mode: Mode
    orig_len: int
    comp_len: int
    payload: bytes

    def header_bytes(self, chunk_log: int = PAGE_LOG, crc: bool = False) -> int:
        base = PAGE_HEADER if chunk_log == PAGE_LOG else WIDE_HEADER
        return base + (4 if crc else 0)

    def framed_size(self, chunk_log: int = PAGE_LOG, crc: bool = False) -> int:
        return self.header_bytes(chunk_log, crc) + self.comp_len

    def ratio(self, chunk_log: int = PAGE_LOG, crc: bool = False) -> float:
        return self.framed_size(chunk_log, crc) / self.orig_len


def _encode_sequences(tokens: list[lz77.Token]) -> tuple[bytes, bytes]:
    """Varint-coded token fields plus the concatenated literal bytes."""
    seq = bytearray()
    write_uvarint(seq, len(tokens))
    lits = bytearray()
    for t in tokens:
        write_uvarint(seq, len(t.literals))
        write_uvarint(seq, t.match_len)
        write_uvarint(seq, t.offset)
        lits += t.literals
    return bytes(seq), bytes(lits)


def _decode_sequences(payload: bytes, pos: int) -> tuple[list[tuple[int, int, int]], int, int]:
    """Returns (fields, n_literals, next_pos)."""
    n_tokens, pos = read_uvarint(payload, pos)
    if n_tokens > PAGE_SIZE:
        raise CorruptStreamError("corrupt stream: token count out of range")
    fields = []
    n_literals = 0
    for _ in range(n_tokens):
        ll, pos = read_uvarint(payload, pos)
        ml, pos = read_uvarint(payload, pos)
        off, pos = read_uvarint(payload, pos)
        fields.append((ll, ml, off))
        n_literals += ll
    if n_literals > PAGE_SIZE:
        raise CorruptStreamError("corrupt stream: literal count out of range")
    return fields, n_literals, pos


def _rebuild_tokens(fields: list[tuple[int, int, int]], lits: bytes) -> list[lz77.Token]:
    tokens = []
    at = 0
    for ll, ml, off in fields:
        tokens.append(lz77.Token(lits[at:at + ll], ml, off))
        at += ll
    return tokens


def _encode_page(data: bytes, preference: Mode) -> tuple[Mode, bytes]:
    """Compress one page; falls back to RAW unless strictly smaller.

    The entropy stage must pay for its own table header: when the plain
    token encoding (LZ_ONLY) is at least as small, it wins.
    """
    if preference == Mode.RAW:
        return Mode.RAW, data

    tokens = lz77.encode(data)
    seq, lits = _encode_sequences(tokens)

    mode = Mode.LZ_ONLY
    payload = seq + lits
    if preference == Mode.LZ_HUF:
        table, _trace = huffman.make_table(huffman.byte_histogram(lits))
        cand = huffman.pack_lengths(table.lengths) + seq + huffman.encode(lits, table)
        if len(cand) < len(payload):
            mode, payload = Mode.LZ_HUF, cand
    elif preference == Mode.LZ_FSE:
        try:
            nc = fse.normalize_counts(huffman.byte_histogram(lits))
        except ValueError:
            pass                         # literal alphabet too small for tANS
        else:
            cand = fse.pack_counts(nc) + seq + fse.encode(lits, fse.build_tables(nc))
            if len(cand) < len(payload):
                mode, payload = Mode.LZ_FSE, cand

    if len(payload) >= len(data):
        return Mode.RAW, data
    return mode, payload


def _decode_page(mode: Mode, payload: bytes, orig_len: int) -> bytes:
    if mode == Mode.RAW:
        if len(payload) != orig_len:
            raise CorruptStreamError("corrupt stream: raw length mismatch")
        return payload

    pos = 0
    if mode == Mode.LZ_HUF:
        if len(payload) < huffman.ALPHABET // 2:
            raise CorruptStreamError("corrupt stream: truncated payload")
        lengths = huffman.unpack_lengths(payload[:huffman.ALPHABET // 2])
        pos = huffman.ALPHABET // 2
        fields, n_literals, pos = _decode_sequences(payload, pos)
        lits = huffman.decode(payload[pos:], lengths, n_literals)
    elif mode == Mode.LZ_FSE:
        if len(payload) < fse.HEADER_BYTES:
            raise CorruptStreamError("corrupt stream: truncated payload")
        nc = fse.unpack_counts(payload[:fse.HEADER_BYTES])
        pos = fse.HEADER_BYTES
        fields, n_literals, pos = _decode_sequences(payload, pos)
        lits = fse.decode(payload[pos:], fse.build_tables(nc), n_literals)
    elif mode == Mode.LZ_ONLY:
        fields, n_literals, pos = _decode_sequences(payload, pos)
        lits = payload[pos:]
        if len(lits) != n_literals:
            raise CorruptStreamError("corrupt stream: literal length mismatch")
    else:
        raise CorruptStreamError("corrupt stream: bad mode")

    return lz77.decode(_rebuild_tokens(fields, lits), orig_len)


def compress_chunk(data: bytes, preference: Mode = Mode.LZ_HUF,
                   chunk_log: int = PAGE_LOG) -> ChunkRecord:
    """Compress up to 2^chunk_log bytes into one self-contained record."""
    chunk_size = 1 << chunk_log
    if not data:
        raise ValueError("empty input")
    if len(data) > chunk_size:
        raise ValueError("chunk exceeds %d bytes" % chunk_size)

    if chunk_log == PAGE_LOG:
        mode, payload = _encode_page(data, preference)
    elif preference == Mode.RAW:
        mode, payload = Mode.RAW, data
    else:
        parts = []
        for at in range(0, len(data), PAGE_SIZE):
            piece = data[at:at + PAGE_SIZE]
            pmode, ppayload = _encode_page(piece, preference)
            unit = bytearray([pmode])
            unit += len(piece).to_bytes(2, "little")
            unit += len(ppayload).to_bytes(2, "little")
            unit += ppayload
            parts.append(bytes(unit))
        payload = b"".join(parts)
        mode = preference
        if len(payload) >= len(data):
            mode, payload = Mode.RAW, data

    return ChunkRecord(mode, len(data), len(payload), payload)


def decompress_chunk(rec: ChunkRecord, chunk_log: int = PAGE_LOG) -> bytes:
    """Inverse of compress_chunk; validates structure as it parses."""
    if rec.mode == Mode.RAW or chunk_log == PAGE_LOG:
        out = _decode_page(rec.mode, rec.payload, rec.orig_len)
        if len(out) != rec.orig_len:
            raise CorruptStreamError("corrupt stream: length mismatch")
        return out

    # paged chunk: a run of page units, each with its own 5-byte header
    payload = rec.payload
    pos = 0
    parts = []
    total = 0
    while pos < len(payload):
        if pos + PAGE_HEADER > len(payload):
            raise CorruptStreamError("corrupt stream: truncated payload")
        pmode = payload[pos]
        if pmode > max(Mode):
            raise CorruptStreamError("corrupt stream: bad mode")
        olen = int.from_bytes(payload[pos + 1:pos + 3], "little")
        clen = int.from_bytes(payload[pos + 3:pos + 5], "little")
        pos += PAGE_HEADER
        if olen < 1 or olen > PAGE_SIZE:
            raise CorruptStreamError("corrupt stream: bad page length")
        if pos + clen > len(payload):
            raise CorruptStreamError("corrupt stream: truncated payload")
        parts.append(_decode_page(Mode(pmode), payload[pos:pos + clen], olen))
        pos += clen
        total += olen
        if total > rec.orig_len:
            raise CorruptStreamError("corrupt stream: length mismatch")
    out = b"".join(parts)
    if len(out) != rec.orig_len:
        raise CorruptStreamError("corrupt stream: length mismatch")
    return out


def _pack_record(rec: ChunkRecord, chunk_log: int, crc: bool) -> bytes:
    wide = chunk_log > PAGE_LOG
    n = 3 if wide else 2
    out = bytearray([rec.mode])
    out += rec.orig_len.to_bytes(n, "little")
    out += rec.comp_len.to_bytes(n, "little")
    out += rec.payload
    if crc:
        out += (zlib.crc32(rec.payload) & 0xFFFFFFFF).to_bytes(4, "little")
    return bytes(out)


def _read_exact(f: BinaryIO, n: int) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise CorruptStreamError("corrupt stream: truncated container")
    return buf


def write_header(fout: BinaryIO, chunk_log: int, crc: bool = False) -> None:
    if not MIN_CHUNK_LOG <= chunk_log <= MAX_CHUNK_LOG:
        raise ValueError("chunk_log out of range")
    flags = FLAG_CRC if crc else 0
    fout.write(MAGIC + bytes([VERSION | flags, chunk_log]))


def read_header(fin: BinaryIO) -> tuple[int, bool]:
    """Returns (chunk_log, crc_enabled)."""
    head = fin.read(6)
    if len(head) != 6 or head[:4] != MAGIC:
        raise ContainerError("unsupported container")
    version = head[4] & 0x0F
    crc = bool(head[4] & FLAG_CRC)
    chunk_log = head[5]
    if version != VERSION or not MIN_CHUNK_LOG <= chunk_log <= MAX_CHUNK_LOG:
        raise ContainerError("unsupported container")
    return chunk_log, crc


def _chunk_reader(fin: BinaryIO, chunk_size: int) -> Iterator[bytes]:
    while True:
        chunk = fin.read(chunk_size)
        if not chunk:
            return
        yield chunk


def _compress_one(args: tuple[bytes, int, int, bool]) -> tuple[bytes, int, int]:
    data, pref, chunk_log, crc = args
    rec = compress_chunk(data, Mode(pref), chunk_log)
    return _pack_record(rec, chunk_log, crc), rec.orig_len, rec.framed_size(chunk_log, crc)


def compress_stream(fin: BinaryIO, fout: BinaryIO, preference: Mode = Mode.LZ_HUF,
                    chunk_log: int = PAGE_LOG, crc: bool = False,
                    jobs: int = 1) -> dict:
    """Container header + one record per chunk; returns size totals."""
    write_header(fout, chunk_log, crc)
    chunk_size = 1 << chunk_log
    n_chunks = 0
    orig_total = 0
    comp_total = 0

    work = ((chunk, int(preference), chunk_log, crc) for chunk in _chunk_reader(fin, chunk_size))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_compress_one, work, chunksize=8)
            for packed, olen, fsize in results:
                fout.write(packed)
                n_chunks += 1
                orig_total += olen
                comp_total += fsize
    else:
        for args in work:
            packed, olen, fsize = _compress_one(args)
            fout.write(packed)
            n_chunks += 1
            orig_total += olen
            comp_total += fsize

    return {"chunks": n_chunks, "orig_bytes": orig_total,
            "comp_bytes": comp_total + 6,      # include the container header
            "ratio": None if orig_total == 0 else (comp_total + 6) / orig_total}


def read_records(fin: BinaryIO) -> Iterator[ChunkRecord]:
    """Read the container header, then iterate its records."""
    chunk_log, crc = read_header(fin)
    yield from _record_iter(fin, chunk_log, crc)


def _record_iter(fin: BinaryIO, chunk_log: int, crc: bool) -> Iterator[ChunkRecord]:
    wide = chunk_log > PAGE_LOG
    hdr_len = WIDE_HEADER if wide else PAGE_HEADER
    n = 3 if wide else 2
    chunk_size = 1 << chunk_log
    while True:
        head = fin.read(hdr_len)
        if not head:
            return
        if len(head) != hdr_len:
            raise CorruptStreamError("corrupt stream: truncated container")
        mode = head[0]
        if mode > max(Mode):
            raise CorruptStreamError("corrupt stream: bad mode")
        orig_len = int.from_bytes(head[1:1 + n], "little")
        comp_len = int.from_bytes(head[1 + n:1 + 2 * n], "little")
        if orig_len < 1 or orig_len > chunk_size or comp_len > chunk_size:
            raise CorruptStreamError("corrupt stream: bad record header")
        payload = _read_exact(fin, comp_len)
        if crc:
            want = int.from_bytes(_read_exact(fin, 4), "little")
            if (zlib.crc32(payload) & 0xFFFFFFFF) != want:
                raise CorruptStreamError("corrupt stream: checksum mismatch")
        yield ChunkRecord(Mode(mode), orig_len, comp_len, payload)


def decompress_stream(fin: BinaryIO, fout: BinaryIO) -> dict:
    """Inverse of compress_stream."""
    chunk_log, crc = read_header(fin)
    n_chunks = 0
    out_total = 0
    for rec in _record_iter(fin, chunk_log, crc):
        data = decompress_chunk(rec, chunk_log)
        fout.write(data)
        n_chunks += 1
        out_total += len(data)
    return {"chunks": n_chunks, "orig_bytes": out_total}
