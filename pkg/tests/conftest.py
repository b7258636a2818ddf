import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from toric.fan import (  # noqa: E402
    blow_up_fixed_point, build_fan, construct_product, construct_proj_split, construct_projective_space,
)

THREEFOLD_RAYS = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, 0, 1], [-2, -1, -1]]
THREEFOLD_CONES = [[1, 3, 4], [1, 3, 5], [1, 4, 5], [2, 3, 4], [2, 3, 5], [2, 4, 5]]

JOBS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "jobs")


@pytest.fixture(scope="session")
def p1():
    return construct_projective_space(1)


@pytest.fixture(scope="session")
def p2():
    return construct_projective_space(2)


@pytest.fixture(scope="session")
def p3():
    return construct_projective_space(3)


@pytest.fixture(scope="session")
def p1xp1(p1):
    return construct_product(p1, p1)


@pytest.fixture(scope="session")
def blowup_p3(p3):
    return blow_up_fixed_point(p3, 0)


@pytest.fixture(scope="session")
def threefold():
    """The threefold with rays e1, -e1, e2, e3, (-2,-1,-1)"""
    return build_fan(3, THREEFOLD_RAYS, [[i - 1 for i in cone] for cone in THREEFOLD_CONES])


@pytest.fixture(scope="session")
def fourfold():
    """P(O + O(1)) over P^3"""
    return construct_proj_split(3, 1)


@pytest.fixture
def job_path():
    def resolve(name: str) -> str:
        return os.path.join(JOBS_DIR, name)
    return resolve
