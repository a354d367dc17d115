import io
import random

import pytest

from dpzip import format as fmt
from dpzip.errors import ContainerError, CorruptStreamError
from dpzip.format import Mode


def mixed_data(rnd, n, kind):
    if kind == 0:
        return rnd.randbytes(n)
    if kind == 1:
        return bytes(n)
    if kind == 2:
        return ((b"structured log line: key=value id=%06d\n" % 42) * (n // 40 + 1))[:n]
    if kind == 3:
        return bytes(rnd.choice(b"ACGT") for _ in range(n))
    return (rnd.randbytes(23) * (n // 23 + 2))[:n]


class TestCompressChunk:
    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty input"):
            fmt.compress_chunk(b"")

    def test_oversize_rejected(self):
        with pytest.raises(ValueError):
            fmt.compress_chunk(bytes(4097), chunk_log=12)

    def test_zero_page_far_below_two_percent(self):
        rec = fmt.compress_chunk(bytes(4096))
        assert rec.mode != Mode.RAW
        assert rec.ratio() < 0.02
        assert fmt.decompress_chunk(rec) == bytes(4096)

    def test_random_page_raw_fallback(self):
        data = random.Random(0).randbytes(4096)
        rec = fmt.compress_chunk(data)
        assert rec.mode == Mode.RAW
        assert rec.comp_len == rec.orig_len == 4096
        assert rec.ratio() == (4096 + 5) / 4096

    def test_compressed_strictly_smaller_invariant(self):
        rnd = random.Random(1)
        for i in range(60):
            data = mixed_data(rnd, rnd.randint(1, 4096), i % 5)
            rec = fmt.compress_chunk(data)
            if rec.mode == Mode.RAW:
                assert rec.comp_len == rec.orig_len
            else:
                assert rec.comp_len < rec.orig_len

    def test_ratio_bounded_by_header_overhead(self):
        rnd = random.Random(2)
        for i in range(40):
            data = mixed_data(rnd, rnd.randint(1, 4096), i % 5)
            rec = fmt.compress_chunk(data)
            assert rec.ratio() <= 1.0 + rec.header_bytes() / rec.orig_len + 1e-12

    @pytest.mark.parametrize("pref", [Mode.LZ_HUF, Mode.LZ_FSE, Mode.LZ_ONLY, Mode.RAW])
    def test_roundtrip_all_preferences(self, pref):
        rnd = random.Random(3)
        for i in range(80):
            data = mixed_data(rnd, rnd.randint(1, 4096), i % 5)
            rec = fmt.compress_chunk(data, pref)
            assert fmt.decompress_chunk(rec) == data

    @pytest.mark.parametrize("chunk_log", [13, 14, 16])
    def test_paged_chunks_roundtrip(self, chunk_log):
        rnd = random.Random(4)
        size = 1 << chunk_log
        for i in range(12):
            data = mixed_data(rnd, rnd.randint(1, size), i % 5)
            rec = fmt.compress_chunk(data, Mode.LZ_HUF, chunk_log)
            assert fmt.decompress_chunk(rec, chunk_log) == data

    def test_paged_ratio_matches_page_ratio(self):
        # 64KB chunking compresses as sixteen independent 4KB pages
        rnd = random.Random(5)
        data = (rnd.randbytes(64) * 1300)[:65536]
        rec64 = fmt.compress_chunk(data, Mode.LZ_HUF, 16)
        page_total = sum(
            fmt.compress_chunk(data[a:a + 4096]).framed_size()
            for a in range(0, 65536, 4096))
        assert abs(rec64.comp_len - page_total) <= 16 * 5


class TestDecompressChunk:
    def test_raw_verbatim(self):
        rec = fmt.ChunkRecord(Mode.RAW, 5, 5, b"hello")
        assert fmt.decompress_chunk(rec) == b"hello"

    def test_bad_mode_value(self):
        with pytest.raises(CorruptStreamError, match="bad mode"):
            fmt._decode_page(7, b"xx", 2)

    def test_corrupt_offset_detected(self):
        data = b"abcdabcdabcdabcd"
        rec = fmt.compress_chunk(data, Mode.LZ_ONLY)
        assert rec.mode == Mode.LZ_ONLY
        # token fields: count, then (ll, ml, off); bump the offset varint
        payload = bytearray(rec.payload)
        payload[3] = 0x50        # offset 4 -> 80, beyond decoded history
        bad = fmt.ChunkRecord(rec.mode, rec.orig_len, rec.comp_len, bytes(payload))
        with pytest.raises(CorruptStreamError, match="offset out of range"):
            fmt.decompress_chunk(bad)

    def test_truncated_payload(self):
        rec = fmt.compress_chunk(bytes(4096))
        bad = fmt.ChunkRecord(rec.mode, rec.orig_len, rec.comp_len, rec.payload[:2])
        with pytest.raises(CorruptStreamError):
            fmt.decompress_chunk(bad)

    def test_mutation_fuzz_never_silent_growth(self):
        # flipped bytes must either raise CorruptStreamError or change output
        rnd = random.Random(6)
        data = mixed_data(rnd, 4096, 2)[:4096]
        rec = fmt.compress_chunk(data)
        for _ in range(60):
            payload = bytearray(rec.payload)
            payload[rnd.randrange(len(payload))] ^= 1 << rnd.randrange(8)
            bad = fmt.ChunkRecord(rec.mode, rec.orig_len, rec.comp_len, bytes(payload))
            try:
                out = fmt.decompress_chunk(bad)
            except CorruptStreamError:
                continue
            assert len(out) == rec.orig_len


class TestStream:
    def roundtrip(self, data, **kw):
        dst = io.BytesIO()
        info = fmt.compress_stream(io.BytesIO(data), dst, **kw)
        dst.seek(0)
        out = io.BytesIO()
        fmt.decompress_stream(dst, out)
        assert out.getvalue() == data
        return info, dst.getvalue()

    def test_empty_file(self):
        info, blob = self.roundtrip(b"")
        assert info["chunks"] == 0
        assert len(blob) == 6

    def test_three_chunk_arithmetic(self):
        data = random.Random(7).randbytes(10_000)
        info, blob = self.roundtrip(data)
        assert info["chunks"] == 3
        recs = list(fmt.read_records(io.BytesIO(blob)))
        assert [r.orig_len for r in recs] == [4096, 4096, 1808]

    def test_chunk_independence(self):
        data = (b"independent pages! " * 4000)[:3 * 4096]
        dst = io.BytesIO()
        fmt.compress_stream(io.BytesIO(data), dst)
        recs = list(fmt.read_records(io.BytesIO(dst.getvalue())))
        middle = fmt.decompress_chunk(recs[1])
        assert middle == data[4096:8192]

    @pytest.mark.parametrize("pref", list(Mode))
    def test_fuzz_roundtrip_modes(self, pref):
        rnd = random.Random(int(pref) + 10)
        for i in range(25):
            data = mixed_data(rnd, rnd.randint(0, 40_000), i % 5)
            self.roundtrip(data, preference=pref)

    def test_crc_roundtrip_and_detection(self):
        data = random.Random(8).randbytes(9_000)
        info, blob = self.roundtrip(data, crc=True)
        corrupted = bytearray(blob)
        corrupted[30] ^= 0xFF
        with pytest.raises(CorruptStreamError, match="checksum mismatch"):
            fmt.decompress_stream(io.BytesIO(bytes(corrupted)), io.BytesIO())

    def test_wide_chunks_roundtrip(self):
        rnd = random.Random(9)
        data = (rnd.randbytes(512) * 400)[:150_000]
        self.roundtrip(data, chunk_log=16)

    def test_bad_magic(self):
        with pytest.raises(ContainerError, match="unsupported container"):
            fmt.decompress_stream(io.BytesIO(b"ZIPX\x01\x0c"), io.BytesIO())

    def test_bad_version(self):
        with pytest.raises(ContainerError):
            fmt.decompress_stream(io.BytesIO(b"DPZ1\x0f\x0c"), io.BytesIO())

    def test_bad_chunk_log(self):
        with pytest.raises(ContainerError):
            fmt.decompress_stream(io.BytesIO(b"DPZ1\x01\x20"), io.BytesIO())

    def test_truncated_container(self):
        data = random.Random(10).randbytes(5000)
        dst = io.BytesIO()
        fmt.compress_stream(io.BytesIO(data), dst)
        blob = dst.getvalue()
        with pytest.raises(CorruptStreamError):
            fmt.decompress_stream(io.BytesIO(blob[:-3]), io.BytesIO())

    def test_jobs_output_identical(self):
        rnd = random.Random(11)
        data = b"".join(mixed_data(rnd, 4096, i % 5) for i in range(12))
        one = io.BytesIO()
        fmt.compress_stream(io.BytesIO(data), one, jobs=1)
        four = io.BytesIO()
        fmt.compress_stream(io.BytesIO(data), four, jobs=4)
        assert one.getvalue() == four.getvalue()
