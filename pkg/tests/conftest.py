import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from facadekit import default_palette, synth_palette  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def palette():
    return default_palette()


@pytest.fixture
def spalette():
    return synth_palette()


def random_blob_map(rng, width=48, height=48, classes=(0, 2, 3), wall=1, blobs=8):
    """Wall background scattered with small rectangles and ellipses; blobs
    may overlap and merge. Components stay small enough for O(n^3) oracles."""
    out = np.full((height, width), wall, dtype=np.int64)
    for _ in range(blobs):
        cls = int(rng.choice(classes))
        x = int(rng.integers(0, width - 3))
        y = int(rng.integers(0, height - 3))
        w = int(rng.integers(2, 9))
        h = int(rng.integers(2, 9))
        if rng.random() < 0.5:
            out[y : min(y + h, height), x : min(x + w, width)] = cls
        else:
            yy, xx = np.ogrid[:height, :width]
            mask = ((xx - x) / max(w / 2, 1)) ** 2 + ((yy - y) / max(h / 2, 1)) ** 2 <= 1
            out[mask] = cls
    return out
