import numpy as np
import pytest

from voxray import (
    FilterKind,
    PhantomSpec,
    Shape,
    Volume,
    build_histogram,
    generate_phantom,
)

ALL_KINDS = list(FilterKind)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def random_volume_9():
    rs = np.random.default_rng(99)
    data = rs.integers(0, 256, 9 * 9 * 9, dtype=np.uint8)
    return Volume(dims=(9, 9, 9), data=data)


@pytest.fixture(scope="session")
def spot_volume():
    """255 spike at the center of a zero 9^3 volume."""
    data = np.zeros((9, 9, 9), dtype=np.uint8)
    data[4, 4, 4] = 255
    return Volume(dims=(9, 9, 9), data=data)


@pytest.fixture(scope="session")
def constant_volume():
    return Volume(dims=(9, 9, 9), data=np.full(9**3, 77, dtype=np.uint8))


@pytest.fixture(scope="session")
def small_sphere_volume():
    spec = PhantomSpec(
        dims=(48, 48, 48),
        shapes=(Shape(kind="sphere", center=(23.5, 23.5, 23.5), radius=14, intensity=200),),
        noise_sigma=8.0,
        rng_seed=17,
    )
    return generate_phantom(spec)


@pytest.fixture(scope="session")
def small_sphere_histogram(small_sphere_volume):
    return build_histogram(small_sphere_volume)

