import numpy as np
import pytest

from neukol.measure import build_space


@pytest.fixture(scope="session")
def space_1d():
    return build_space([0.5], box_radius=8.0, cells_per_axis=200)


@pytest.fixture(scope="session")
def space_1d_fine():
    return build_space([0.5], box_radius=8.0, cells_per_axis=400)


@pytest.fixture(scope="session")
def space_2d():
    return build_space([0.5, 0.25], box_radius=6.0, cells_per_axis=100)


def ones(space):
    return np.ones(space.grid.shape if space.grid.is_tensor
                   else (len(space.grid.qmc_nodes),))
