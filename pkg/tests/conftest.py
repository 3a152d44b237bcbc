import math

import pytest

from vmsiac.mesh import AxisSpec, build_mesh


@pytest.fixture
def landau_mesh():
    def make(nx=16, nv=16):
        return build_mesh([AxisSpec(0.0, 4 * math.pi, nx, periodic=True)],
                          [AxisSpec(-6 * math.pi, 6 * math.pi, nv)])
    return make


@pytest.fixture
def weibel_mesh():
    def make(n=6):
        v = AxisSpec(-1.8, 1.8, n)
        return build_mesh([AxisSpec(0.0, 2 * math.pi / 0.2, n, periodic=True)], [v, v])
    return make
