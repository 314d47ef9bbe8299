import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from pagesort.pixelio import ColorImage, RasterImage
from pagesort.preprocess import BinaryImage


def gray(array) -> RasterImage:
    return RasterImage(np.asarray(array, dtype=np.uint8))


def rgb(array) -> ColorImage:
    return ColorImage(np.asarray(array, dtype=np.uint8))


def mask(array, threshold=128) -> BinaryImage:
    return BinaryImage(np.asarray(array, dtype=bool), threshold)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
