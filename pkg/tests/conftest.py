import os
import sys

import numpy as np
import pytest

from harpipe.frameio import Frame

sys.path.insert(0, os.path.dirname(__file__))


def make_frame(pixels, index=0):
    arr = np.asarray(pixels, dtype=np.uint8)
    return Frame(arr.shape[1], arr.shape[0], index, arr)


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory):
    """Full-size synthetic corpus shared by the end-to-end acceptance tests."""
    from harpipe import cli

    out = tmp_path_factory.mktemp("corpus")
    assert cli.main(["synth", str(out)]) == 0
    return out
