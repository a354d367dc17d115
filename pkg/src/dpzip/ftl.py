"""Log-structured FTL simulator with inline compression.

Host pages (4KB logical units) are compressed on the write path and the
variable-length records are packed back-to-back into NAND pages.  A
record that does not fit the remaining bytes of the current page
continues on the next page of the same block (consecutive page ids); a
record is never split across blocks.  Incompressible pages are stored
RAW and page-aligned, with mode and lengths kept out-of-band in the
mapping entry, so they cost exactly one NAND page and one page read.

The simulator is a single-threaded deterministic event machine: the same
operation sequence always produces the same state hash.  Mapping state
lives in simulator memory (mirroring an in-DRAM L2P table); persistence,
ECC and wear leveling are out of scope.

Space accounting: pages are charged to ``nand_bytes_programmed`` when
they are committed (filled or force-closed).  A configurable fraction of
blocks is reserved as garbage-collection headroom; writes of fresh
logical pages fail with NoSpaceError once GC cannot keep a block above
that reserve, which with an over-exposed logical capacity is the honest
failure mode.  Overwrites of already-mapped pages do not grow live data,
so they are allowed to dip into the reserve and at-capacity churn keeps
running.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import format as fmt
from .errors import DpzipError

HOST_PAGE = 4096          # logical mapping unit


class NoSpaceError(DpzipError):
    pass


class GcFutileError(DpzipError):
    pass


class UnmappedReadError(DpzipError):
    pass


@dataclass(frozen=True)
class NandGeometry:
    page_size: int = 4096
    pages_per_block: int = 64
    block_count: int = 64
    op_fraction: float = 0.10      # blocks reserved as GC headroom

    def __post_init__(self):
        if self.page_size < 512 or self.page_size > 4096 or self.page_size & (self.page_size - 1):
            raise ValueError("page_size must be a power of two in [512, 4096]")
        if self.pages_per_block < 4 or self.block_count < 8:
            raise ValueError("geometry too small")
        if self.pages_per_block * self.page_size < HOST_PAGE:
            raise ValueError("block must hold at least one raw host page")
        if not 0.05 <= self.op_fraction <= 0.5:
            raise ValueError("op_fraction out of [0.05, 0.5]")

    @property
    def block_bytes(self) -> int:
        return self.page_size * self.pages_per_block

    @property
    def total_pages(self) -> int:
        return self.pages_per_block * self.block_count

    @property
    def reserved_blocks(self) -> int:
        # >= 2 so a fully-packed device always retains a GC destination
        return max(2, round(self.op_fraction * self.block_count))

    @property
    def user_blocks(self) -> int:
        return self.block_count - self.reserved_blocks

    @property
    def user_pages(self) -> int:
        """Host-visible physical capacity, in 4KB logical units."""
        return self.user_blocks * self.block_bytes // HOST_PAGE


@dataclass(frozen=True)
class PhysicalSegment:
    page_id: int
    offset: int
    length: int
    continuation: bool = False


@dataclass
class MappingEntry:
    mode: fmt.Mode
    orig_len: int
    comp_len: int
    segments: tuple[PhysicalSegment, ...]


@dataclass
class Metrics:
    host_bytes_written: int = 0
    host_bytes_read: int = 0
    nand_bytes_programmed: int = 0
    nand_pages_read: int = 0
    host_writes: int = 0
    host_reads: int = 0
    gc_runs: int = 0
    gc_relocated_bytes: int = 0
    multi_page_records: int = 0    # records spanning more than 2 pages

    @property
    def waf(self) -> float | None:
        if self.host_bytes_written == 0:
            return None
        return self.nand_bytes_programmed / self.host_bytes_written

    @property
    def raf(self) -> float | None:
        if self.host_reads == 0:
            return None
        return self.nand_pages_read / self.host_reads


# block states
_FREE, _OPEN, _CLOSED = 0, 1, 2


class FtlSimulator:
    def __init__(self, geometry: NandGeometry = NandGeometry(),
                 mode: fmt.Mode = fmt.Mode.LZ_HUF,
                 capacity_factor: float = 1.0,
                 zero_fill_unmapped: bool = False):
        self.geom = geometry
        self.mode = mode
        self.zero_fill_unmapped = zero_fill_unmapped
        g = geometry
        self._pages: list[bytearray] = [bytearray(g.page_size) for _ in range(g.total_pages)]
        self._block_state = [_FREE] * g.block_count
        self._valid_bytes = [0] * g.block_count
        self._block_lpns: list[set[int]] = [set() for _ in range(g.block_count)]
        self._free_blocks: list[int] = list(range(g.block_count))
        self._open_block: int | None = None
        self._open_page_idx = 0
        self._open_off = 0
        self.mapping: dict[int, MappingEntry] = {}
        self.m = Metrics()
        self.exposed_lpns = g.user_pages
        self.configure_capacity(capacity_factor)

    # -- capacity ---------------------------------------------------------

    def configure_capacity(self, factor: float) -> int:
        """Expose factor x the physical user capacity as logical pages."""
        if not 1.0 <= factor <= 4.0:
            raise ValueError("capacity factor out of [1.0, 4.0]")
        exposed = int(self.geom.user_pages * factor)
        if self.mapping and max(self.mapping) >= exposed:
            raise ValueError("mapped pages beyond new capacity")
        self.exposed_lpns = exposed
        return exposed

    # -- block/page plumbing ----------------------------------------------

    def _program_page(self) -> None:
        self.m.nand_bytes_programmed += self.geom.page_size
        self._open_page_idx += 1
        self._open_off = 0
        if self._open_page_idx == self.geom.pages_per_block:
            self._block_state[self._open_block] = _CLOSED
            self._open_block = None

    def _close_partial_page(self) -> None:
        if self._open_block is not None and self._open_off > 0:
            self._program_page()

    def _close_block(self) -> None:
        if self._open_block is None:
            return
        self._close_partial_page()
        if self._open_block is not None:      # partial close may have sealed it
            self._block_state[self._open_block] = _CLOSED
            self._open_block = None

    def _ensure_open_block(self, reserve: int) -> None:
        """Open a fresh block, running GC as needed.  GC relocations may
        themselves open a block; the loop re-checks instead of clobbering it."""
        while self._open_block is None:
            if len(self._free_blocks) > reserve:
                blk = self._free_blocks.pop(0)
                self._block_state[blk] = _OPEN
                self._open_block = blk
                self._open_page_idx = 0
                self._open_off = 0
                return
            if not self._collect_once():
                raise NoSpaceError("no space")

    def _remaining_in_block(self) -> int:
        if self._open_block is None:
            return 0
        g = self.geom
        return (g.pages_per_block - self._open_page_idx) * g.page_size - self._open_off

    def _append_record(self, payload: bytes, page_aligned: bool,
                       reserve: int) -> tuple[PhysicalSegment, ...]:
        g = self.geom
        size = len(payload)
        if page_aligned:
            self._close_partial_page()
        while self._open_block is None or size > self._remaining_in_block():
            self._close_block()          # wastes the tail rather than splitting
            self._ensure_open_block(reserve)

        segments = []
        placed = 0
        while placed < size:
            page_id = self._open_block * g.pages_per_block + self._open_page_idx
            space = g.page_size - self._open_off
            take = min(space, size - placed)
            self._pages[page_id][self._open_off:self._open_off + take] = \
                payload[placed:placed + take]
            segments.append(PhysicalSegment(page_id, self._open_off, take,
                                            continuation=placed > 0))
            placed += take
            self._open_off += take
            if self._open_off == g.page_size:
                self._program_page()
        if len(segments) > 2:
            self.m.multi_page_records += 1
        return tuple(segments)

    def _block_of(self, entry: MappingEntry) -> int:
        return entry.segments[0].page_id // self.geom.pages_per_block

    def _invalidate(self, lpn: int, entry: MappingEntry) -> None:
        blk = self._block_of(entry)
        self._valid_bytes[blk] -= entry.comp_len
        self._block_lpns[blk].discard(lpn)

    def _install(self, lpn: int, entry: MappingEntry) -> None:
        blk = self._block_of(entry)
        self._valid_bytes[blk] += entry.comp_len
        self._block_lpns[blk].add(lpn)
        self.mapping[lpn] = entry

    # -- host operations ----------------------------------------------------

    def host_write(self, lpn: int, data: bytes) -> None:
        if not 0 <= lpn < self.exposed_lpns:
            raise ValueError("lpn out of range")
        if len(data) != HOST_PAGE:
            raise ValueError("host writes are %d-byte pages" % HOST_PAGE)
        rec = fmt.compress_chunk(data, self.mode)
        # growing live data (a fresh lpn) must leave the OP reserve intact;
        # an overwrite is net-zero growth, may dip into the reserve, and so
        # never deadlocks at full occupancy
        reserve = self.geom.reserved_blocks if lpn not in self.mapping else 0
        segments = self._append_record(rec.payload,
                                       page_aligned=(rec.mode == fmt.Mode.RAW),
                                       reserve=reserve)
        old = self.mapping.get(lpn)
        # atomic from the host's view: invalidate + install in one step
        if old is not None:
            self._invalidate(lpn, old)
        self._install(lpn, MappingEntry(rec.mode, rec.orig_len, rec.comp_len, segments))
        self.m.host_writes += 1
        self.m.host_bytes_written += HOST_PAGE

    def host_read(self, lpn: int) -> bytes:
        entry = self.mapping.get(lpn)
        if entry is None:
            if self.zero_fill_unmapped:
                return bytes(HOST_PAGE)
            raise UnmappedReadError("unmapped read")
        payload = self._gather(entry)
        data = fmt.decompress_chunk(
            fmt.ChunkRecord(entry.mode, entry.orig_len, entry.comp_len, payload))
        self.m.host_reads += 1
        self.m.host_bytes_read += HOST_PAGE
        self.m.nand_pages_read += len({s.page_id for s in entry.segments})
        return data

    def _gather(self, entry: MappingEntry) -> bytes:
        parts = [bytes(self._pages[s.page_id][s.offset:s.offset + s.length])
                 for s in entry.segments]
        return b"".join(parts)

    # -- garbage collection ---------------------------------------------------

    def _pick_victim(self) -> int | None:
        g = self.geom
        best = None
        best_valid = g.block_bytes
        for blk in range(g.block_count):
            if self._block_state[blk] != _CLOSED:
                continue
            v = self._valid_bytes[blk]
            if v < best_valid:
                best, best_valid = blk, v
        return best

    def _collect_once(self) -> bool:
        victim = self._pick_victim()
        if victim is None:
            return False
        self.m.gc_runs += 1
        # stage the victim's live records in controller memory, erase, then
        # replay the appends: the freed victim guarantees a destination, so
        # collection can never pick or erase a block twice while it is
        # being moved (power-loss consistency is out of scope)
        lpns = sorted(self._block_lpns[victim],
                      key=lambda l: (self.mapping[l].segments[0].page_id,
                                     self.mapping[l].segments[0].offset))
        staged = []
        for lpn in lpns:
            entry = self.mapping[lpn]
            staged.append((lpn, entry, self._gather(entry)))
            self._invalidate(lpn, entry)
            del self.mapping[lpn]
        g = self.geom
        base = victim * g.pages_per_block
        for p in range(base, base + g.pages_per_block):
            self._pages[p] = bytearray(g.page_size)
        self._block_state[victim] = _FREE
        self._valid_bytes[victim] = 0
        self._block_lpns[victim] = set()
        self._free_blocks.append(victim)
        for lpn, entry, payload in staged:
            segments = self._append_record(payload,
                                           page_aligned=(entry.mode == fmt.Mode.RAW),
                                           reserve=0)
            self._install(lpn, MappingEntry(entry.mode, entry.orig_len,
                                            entry.comp_len, segments))
            self.m.gc_relocated_bytes += len(payload)
        return True

    def gc_step(self) -> int:
        """One greedy collection; returns pages erased."""
        if not self._collect_once():
            raise GcFutileError("gc futile")
        return self.geom.pages_per_block

    # -- introspection ---------------------------------------------------------

    def metrics(self) -> Metrics:
        return self.m

    def metrics_dict(self) -> dict:
        g = self.geom
        live = sum(self._valid_bytes)
        m = self.m
        return {
            "host_bytes_written": m.host_bytes_written,
            "host_bytes_read": m.host_bytes_read,
            "nand_bytes_programmed": m.nand_bytes_programmed,
            "nand_pages_read": m.nand_pages_read,
            "host_writes": m.host_writes,
            "host_reads": m.host_reads,
            "gc_runs": m.gc_runs,
            "gc_relocated_bytes": m.gc_relocated_bytes,
            "multi_page_records": m.multi_page_records,
            "waf": m.waf,
            "raf": m.raf,
            "mapped_lpns": len(self.mapping),
            "exposed_lpns": self.exposed_lpns,
            "live_bytes": live,
            "space_utilization": live / (g.block_count * g.block_bytes),
            "valid_bytes_per_block": list(self._valid_bytes),
        }

    def state_hash(self) -> str:
        h = hashlib.sha256()
        for lpn in sorted(self.mapping):
            e = self.mapping[lpn]
            h.update(str((lpn, int(e.mode), e.orig_len, e.comp_len,
                          [(s.page_id, s.offset, s.length, s.continuation)
                           for s in e.segments])).encode())
        h.update(str(self._free_blocks).encode())
        h.update(str((self._open_block, self._open_page_idx, self._open_off)).encode())
        h.update(str(sorted(self.metrics_dict().items())).encode())
        return h.hexdigest()

    def check_invariants(self) -> None:
        """Raise AssertionError if any structural invariant is violated."""
        g = self.geom
        per_page: dict[int, list[tuple[int, int]]] = {}
        valid = [0] * g.block_count
        for lpn, e in self.mapping.items():
            assert e.comp_len == sum(s.length for s in e.segments), lpn
            max_span = -(-e.comp_len // g.page_size) + 1
            assert len(e.segments) <= max_span, lpn
            prev = None
            for s in e.segments:
                assert s.offset + s.length <= g.page_size
                blk = s.page_id // g.pages_per_block
                assert self._block_state[blk] != _FREE, "segment on erased block"
                if prev is not None:
                    assert s.page_id == prev + 1, "continuation not adjacent"
                    assert s.continuation
                prev = s.page_id
                per_page.setdefault(s.page_id, []).append((s.offset, s.offset + s.length))
            valid[self._block_of(e)] += e.comp_len
        for page, ranges in per_page.items():
            ranges.sort()
            for (a0, a1), (b0, b1) in zip(ranges, ranges[1:]):
                assert a1 <= b0, "overlapping mapped ranges on page %d" % page
        assert valid == self._valid_bytes, "valid byte accounting drift"


# -- trace interface -------------------------------------------------------


def pattern_bytes(pattern: str) -> bytes:
    """Materialize a 4KB host page from a trace pattern.

    Forms: ``zero``, ``const:<byte>``, ``rand:<seed>``, ``ratio:<t>:<seed>``.
    """
    if pattern == "zero":
        return bytes(HOST_PAGE)
    kind, _, rest = pattern.partition(":")
    if kind == "const":
        return bytes([int(rest) & 0xFF]) * HOST_PAGE
    if kind == "rand":
        return np.random.Generator(np.random.PCG64(int(rest))).bytes(HOST_PAGE)
    if kind == "ratio":
        t, _, seed = rest.partition(":")
        from .bench import gen_data
        return gen_data(float(t), HOST_PAGE, int(seed))
    raise ValueError("bad trace pattern: %r" % pattern)


def run_trace(sim: FtlSimulator, lines) -> dict:
    """Apply ``W <lpn> <pattern>`` / ``R <lpn>`` / ``GC`` lines; returns metrics."""
    for ln, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        op = parts[0].upper()
        try:
            if op == "W":
                sim.host_write(int(parts[1]), pattern_bytes(parts[2]))
            elif op == "R":
                sim.host_read(int(parts[1]))
            elif op == "GC":
                sim.gc_step()
            else:
                raise ValueError("unknown trace op %r" % op)
        except (GcFutileError, UnmappedReadError):
            pass        # trace-level GC/read misses are non-fatal
    return sim.metrics_dict()
