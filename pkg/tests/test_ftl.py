import random

import pytest

from dpzip import ftl
from dpzip.format import Mode
from dpzip.ftl import (FtlSimulator, GcFutileError, NandGeometry, NoSpaceError,
                       UnmappedReadError, pattern_bytes, run_trace)

GEO = NandGeometry(page_size=4096, pages_per_block=16, block_count=32, op_fraction=0.1)


def page_of(rnd, kind):
    if kind == 0:
        return bytes(4096)
    if kind == 1:
        return rnd.randbytes(4096)
    if kind == 2:
        return bytes([rnd.randrange(256)]) * 4096
    return (rnd.randbytes(32) * 128)[:4096]


class TestGeometry:
    def test_defaults_valid(self):
        g = NandGeometry()
        assert g.user_pages > 0
        assert g.reserved_blocks >= 1

    def test_op_fraction_range(self):
        with pytest.raises(ValueError):
            NandGeometry(op_fraction=0.01)
        with pytest.raises(ValueError):
            NandGeometry(op_fraction=0.6)

    def test_block_must_hold_raw_page(self):
        with pytest.raises(ValueError):
            NandGeometry(page_size=512, pages_per_block=4, block_count=16)


class TestWrites:
    def test_zero_page_single_tiny_segment(self):
        sim = FtlSimulator(GEO)
        sim.host_write(0, bytes(4096))
        e = sim.mapping[0]
        assert len(e.segments) == 1
        assert sim._open_off < 128

    def test_random_page_raw_one_aligned_page(self):
        sim = FtlSimulator(GEO)
        sim.host_write(0, bytes(4096))                       # partial open page
        sim.host_write(1, random.Random(0).randbytes(4096))  # raw must align
        e = sim.mapping[1]
        assert e.mode == Mode.RAW
        assert len(e.segments) == 1
        assert e.segments[0].offset == 0
        assert e.segments[0].length == 4096

    def test_split_record_consecutive_pages(self):
        sim = FtlSimulator(GEO)
        rnd = random.Random(1)
        data = rnd.randbytes(2300) + bytes(1796)    # ~2.3KB compressed
        sim.host_write(0, data)
        sim.host_write(1, data)
        e = sim.mapping[1]
        assert len(e.segments) == 2
        assert e.segments[1].page_id == e.segments[0].page_id + 1
        assert not e.segments[0].continuation
        assert e.segments[1].continuation

    def test_out_of_range_lpn(self):
        sim = FtlSimulator(GEO)
        with pytest.raises(ValueError, match="lpn out of range"):
            sim.host_write(sim.exposed_lpns, bytes(4096))

    def test_wrong_size_rejected(self):
        sim = FtlSimulator(GEO)
        with pytest.raises(ValueError):
            sim.host_write(0, bytes(100))

    def test_overwrite_invalidates_old(self):
        sim = FtlSimulator(GEO)
        sim.host_write(0, bytes(4096))
        first = sim.mapping[0]
        blk = first.segments[0].page_id // GEO.pages_per_block
        before = sim._valid_bytes[blk]
        sim.host_write(0, bytes([7]) * 4096)
        assert sim.host_read(0) == bytes([7]) * 4096
        total_valid = sum(sim._valid_bytes)
        assert total_valid == sim.mapping[0].comp_len
        assert before >= first.comp_len
        sim.check_invariants()


class TestReads:
    def test_read_after_write(self):
        sim = FtlSimulator(GEO)
        data = (b"abc123" * 700)[:4096]
        sim.host_write(3, data)
        assert sim.host_read(3) == data

    def test_two_segment_read_counts_two_pages(self):
        sim = FtlSimulator(GEO)
        rnd = random.Random(2)
        data = rnd.randbytes(2300) + bytes(1796)
        sim.host_write(0, data)
        sim.host_write(1, data)
        before = sim.m.nand_pages_read
        sim.host_read(1)
        assert sim.m.nand_pages_read - before == 2

    def test_raw_read_is_single_page(self):
        sim = FtlSimulator(GEO)
        sim.host_write(0, random.Random(3).randbytes(4096))
        sim.host_read(0)
        assert sim.m.raf == 1.0

    def test_unmapped_read_errors(self):
        sim = FtlSimulator(GEO)
        with pytest.raises(UnmappedReadError, match="unmapped read"):
            sim.host_read(5)

    def test_unmapped_read_zero_fill_flag(self):
        sim = FtlSimulator(GEO, zero_fill_unmapped=True)
        assert sim.host_read(5) == bytes(4096)


class TestGc:
    def test_fully_invalid_block_erased_without_relocation(self):
        sim = FtlSimulator(GEO)
        # fill one block with raw pages, then overwrite them all
        raw = random.Random(4).randbytes(4096)
        for lpn in range(GEO.pages_per_block):
            sim.host_write(lpn, raw)
        for lpn in range(GEO.pages_per_block):
            sim.host_write(lpn, raw)
        before = sim.m.gc_relocated_bytes
        freed = sim.gc_step()
        assert freed == GEO.pages_per_block
        assert sim.m.gc_relocated_bytes == before
        sim.check_invariants()

    def test_futile_when_nothing_closed(self):
        sim = FtlSimulator(GEO)
        sim.host_write(0, bytes(4096))
        with pytest.raises(GcFutileError, match="gc futile"):
            sim.gc_step()

    def test_futile_when_all_valid(self):
        sim = FtlSimulator(GEO)
        raw = random.Random(5).randbytes(4096)
        for lpn in range(GEO.pages_per_block):      # exactly one closed block
            sim.host_write(lpn, raw)
        with pytest.raises(GcFutileError):
            sim.gc_step()

    def test_relocation_preserves_data(self):
        sim = FtlSimulator(GEO)
        rnd = random.Random(6)
        pages = {lpn: page_of(rnd, lpn % 4) for lpn in range(40)}
        for lpn, data in pages.items():
            sim.host_write(lpn, data)
        for lpn in list(pages)[:20]:                # invalidate some
            pages[lpn] = page_of(rnd, 1)
            sim.host_write(lpn, pages[lpn])
        while True:
            try:
                sim.gc_step()
            except GcFutileError:
                break
        for lpn, data in pages.items():
            assert sim.host_read(lpn) == data
        sim.check_invariants()


class TestCapacity:
    def test_factor_one_exposes_user_pages(self):
        sim = FtlSimulator(GEO, capacity_factor=1.0)
        assert sim.exposed_lpns == GEO.user_pages

    def test_factor_out_of_range(self):
        sim = FtlSimulator(GEO)
        with pytest.raises(ValueError):
            sim.configure_capacity(0.5)
        with pytest.raises(ValueError):
            sim.configure_capacity(4.5)

    def test_incompressible_overexposure_hits_no_space(self):
        sim = FtlSimulator(GEO, capacity_factor=2.0)
        rnd = random.Random(7)
        written = 0
        with pytest.raises(NoSpaceError, match="no space"):
            for lpn in range(sim.exposed_lpns):
                sim.host_write(lpn, rnd.randbytes(4096))
                written += 1
        fill = written / sim.exposed_lpns
        assert 0.40 <= fill <= 0.60
        sim.check_invariants()


class TestDurabilityFuzz:
    def test_shadow_map_with_gc(self):
        sim = FtlSimulator(GEO)
        rnd = random.Random(8)
        shadow = {}
        for i in range(3000):
            r = rnd.random()
            lpn = rnd.randrange(GEO.user_pages)
            if r < 0.55:
                data = page_of(rnd, rnd.randrange(4))
                sim.host_write(lpn, data)
                shadow[lpn] = data
            elif r < 0.9:
                if lpn in shadow:
                    assert sim.host_read(lpn) == shadow[lpn]
            else:
                try:
                    sim.gc_step()
                except GcFutileError:
                    pass
            if i % 500 == 0:
                sim.check_invariants()
        for lpn, data in shadow.items():
            assert sim.host_read(lpn) == data
        sim.check_invariants()
        md = sim.metrics_dict()
        assert md["waf"] >= 1.0 or md["waf"] is None


class TestSteadyState:
    def test_waf_band_uniform_overwrites_20pct_op(self):
        # long-run greedy-GC WAF for uniform random incompressible
        # overwrites at 20% OP; band frozen from 4000-write reference runs
        # across seeds (2.51..2.58), with slack for trace variation
        geo = NandGeometry(page_size=4096, pages_per_block=8,
                           block_count=20, op_fraction=0.2)
        sim = FtlSimulator(geo)
        rnd = random.Random(5)
        pages = [rnd.randbytes(4096) for _ in range(8)]
        shadow = {}
        for _ in range(2500):
            lpn = rnd.randrange(geo.user_pages)
            data = pages[rnd.randrange(8)]
            sim.host_write(lpn, data)
            shadow[lpn] = data
        assert 2.0 <= sim.m.waf <= 3.2, sim.m.waf
        for lpn, data in shadow.items():
            assert sim.host_read(lpn) == data
        sim.check_invariants()

    def test_at_capacity_overwrite_churn_never_jams(self):
        # live data == user capacity, then pure overwrites: every write
        # must succeed because no live growth is requested
        geo = NandGeometry(page_size=4096, pages_per_block=8,
                           block_count=16, op_fraction=0.25)
        sim = FtlSimulator(geo)
        raw = random.Random(6).randbytes(4096)
        for lpn in range(geo.user_pages):
            sim.host_write(lpn, raw)
        rnd = random.Random(7)
        for _ in range(300):
            sim.host_write(rnd.randrange(geo.user_pages), raw)
        sim.check_invariants()


class TestMetrics:
    def test_fresh_device_waf_none(self):
        sim = FtlSimulator(GEO)
        assert sim.m.waf is None
        assert sim.metrics_dict()["waf"] is None

    def test_sequential_incompressible_waf_one(self):
        sim = FtlSimulator(GEO)
        rnd = random.Random(9)
        for lpn in range(GEO.pages_per_block * 4):
            sim.host_write(lpn, rnd.randbytes(4096))
        assert sim.m.waf == pytest.approx(1.0)

    def test_multi_page_record_flag_on_tiny_pages(self):
        geo = NandGeometry(page_size=512, pages_per_block=32, block_count=16)
        sim = FtlSimulator(geo)
        sim.host_write(0, random.Random(10).randbytes(4096))   # raw: 8 pages
        assert sim.m.multi_page_records == 1
        assert sim.host_read(0) == sim._gather(sim.mapping[0])


class TestDeterminism:
    def test_same_trace_same_hash(self):
        def run():
            sim = FtlSimulator(GEO)
            rnd = random.Random(11)
            for i in range(400):
                lpn = rnd.randrange(60)
                sim.host_write(lpn, page_of(rnd, i % 4))
                if i % 7 == 0 and lpn in sim.mapping:
                    sim.host_read(lpn)
            return sim.state_hash()
        assert run() == run()


class TestTrace:
    def test_pattern_specs(self):
        assert pattern_bytes("zero") == bytes(4096)
        assert pattern_bytes("const:7") == bytes([7]) * 4096
        assert pattern_bytes("rand:3") == pattern_bytes("rand:3")
        assert len(pattern_bytes("ratio:0.5:1")) == 4096
        with pytest.raises(ValueError):
            pattern_bytes("nope:1")

    def test_run_trace(self):
        sim = FtlSimulator(GEO)
        lines = [
            "# comment",
            "W 0 zero",
            "W 1 rand:5",
            "W 2 const:9",
            "R 0",
            "R 1",
            "GC",            # futile here, swallowed
            "",
        ]
        metrics = run_trace(sim, lines)
        assert metrics["host_writes"] == 3
        assert metrics["host_reads"] == 2
        assert sim.host_read(2) == bytes([9]) * 4096
