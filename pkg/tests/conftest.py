import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from dpzip import bench


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("mini-corpus")
    bench.build_mini_corpus(str(d))
    return str(d)


def silesia_dir() -> str | None:
    """Path to a local Silesia corpus, if the user fetched one."""
    for cand in (os.environ.get("SILESIA_DIR"), "silesia", "/root/silesia"):
        if cand and os.path.isdir(cand) and os.listdir(cand):
            return cand
    return None
