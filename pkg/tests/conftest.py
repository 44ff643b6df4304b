import numpy as np
import pytest

from uwenh import ImageBuffer
from uwenh.corpus import synthetic_corpus, textured_base


@pytest.fixture(scope="session")
def corpus():
    return synthetic_corpus()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def textured_rgb():
    """Deterministic textured colour image, 64x64."""
    return ImageBuffer.from_array(
        np.stack([textured_base(1), textured_base(2), textured_base(3)], axis=2)
    )


def random_buffer(rng, h=16, w=16, channels=3):
    return ImageBuffer.from_array(rng.uniform(0.0, 1.0, size=(h, w, channels)))
