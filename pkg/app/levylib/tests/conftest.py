import numpy as np
import pytest

from app.levylib.basis import TensorBasisOrdering, build_ortho_polys
from app.levylib.levy_measure import LevyMeasure
from app.levylib.sheet_sim import Domain


@pytest.fixture
def two_point():
    """ν = ½δ₋₁ + ½δ₁, so M = m₂ = 1."""
    return LevyMeasure.from_atoms([[-1.0, 0.5], [1.0, 0.5]], name='two-point')


@pytest.fixture
def asymmetric():
    return LevyMeasure.from_atoms([[-0.5, 2.0], [1.5, 1.0]], name='asymmetric')


@pytest.fixture
def uniform_density():
    return LevyMeasure.from_density('uniform', 0.5, 2.0)


@pytest.fixture
def system(two_point):
    return build_ortho_polys(two_point)


@pytest.fixture
def ordering():
    return TensorBasisOrdering(1, 10)


@pytest.fixture
def unit_domain():
    return Domain.from_extents([1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
