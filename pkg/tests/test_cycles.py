import pytest

from dpzip import cycles
from dpzip.huffman import WORST_CASE_TRACE, CanonizationTrace


class TestEstimate:
    def test_4kb_worst_case_two_microseconds(self):
        est = cycles.estimate(4096, WORST_CASE_TRACE)
        assert est.pipeline_cycles == 512
        assert est.huffman_cycles == 274
        assert est.total_cycles == 2000
        assert est.latency_us == pytest.approx(2.0)

    def test_eight_bytes_one_cycle(self):
        assert cycles.estimate(8).pipeline_cycles == 1
        assert cycles.estimate(1).pipeline_cycles == 1
        assert cycles.estimate(9).pipeline_cycles == 2

    def test_monotone_in_bytes(self):
        prev = 0
        for n in (1, 7, 8, 64, 512, 4095, 4096):
            total = cycles.estimate(n).total_cycles
            assert total >= prev
            prev = total

    def test_latency_identity(self):
        est = cycles.estimate(2048)
        assert est.latency_us == pytest.approx(est.total_cycles / est.clock_hz * 1e6)
        assert est.block_throughput_gbps == pytest.approx(
            est.n_bytes / (est.latency_us * 1e-6) / 1e9)

    def test_steady_state_bound(self):
        est = cycles.estimate(4096)
        assert est.steady_throughput_gbps == pytest.approx(8.0)
        assert est.block_throughput_gbps <= 8.0
        # large streaming blocks approach the steady rate
        big = cycles.estimate(1 << 30)
        assert big.block_throughput_gbps == pytest.approx(8.0, rel=1e-4)

    def test_two_engines_model_device_rate(self):
        assert cycles.estimate(4096).device_throughput_gbps == pytest.approx(16.0)

    def test_concrete_trace_used(self):
        t = CanonizationTrace(10, 0, (256, 0, 0))
        est = cycles.estimate(4096, t)
        assert est.huffman_cycles == 256
        assert est.total_cycles == 512 + 256 + cycles.OVERHEAD_CYCLES

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            cycles.estimate(0)
