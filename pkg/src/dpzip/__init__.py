"""Software model of a page-granular hardware compression engine and the
compression-aware flash translation layer built around it.

Core layers:

- ``lz77``: block-local dictionary codec with a bounded two-hash table
- ``huffman``: canonical Huffman with an 11-bit depth cap and cycle trace
- ``fse``: tANS entropy coder alternative
- ``format``: chunk framing, RAW fallback, and the stream container
- ``cycles``: analytical latency/throughput model
- ``ftl``: log-structured FTL simulator with inline compression
- ``bench``: entropy tooling, synthetic data dial, corpus benchmarks
"""

from . import bench, bitio, cycles, format, fse, ftl, huffman, lz77
from .errors import ContainerError, CorruptStreamError, DpzipError

__version__ = "0.1.0"

__all__ = [
    "bench", "bitio", "cycles", "format", "fse", "ftl", "huffman", "lz77",
    "ContainerError", "CorruptStreamError", "DpzipError", "__version__",
]
