import pytest

from toric.fan import (
    build_fan, construct_product, construct_proj_split, construct_projective_space, dual_covector,
    edge_characters, walls,
)
from utils.errors import (
    DanglingFacet, DisconnectedFan, DuplicateRay, MalformedFan, NonPrimitiveRay, NonSmoothCone, NotAdjacent,
    RayNotInCone,
)

P2_RAYS = [(1, 0), (0, 1), (-1, -1)]


def test_projective_plane_shape(p2):
    assert p2.r == 3
    assert p2.cone_count == 3
    assert p2.max_cones == ((0, 1), (0, 2), (1, 2))
    assert len(walls(p2)) == 3
    for cone in range(3):
        assert len(p2.neighbors(cone)) == 2


def test_cone_order_is_canonical():
    shuffled = build_fan(2, P2_RAYS, [[2, 1], [0, 2], [1, 0]])
    assert shuffled.max_cones == construct_projective_space(2).max_cones


def test_every_cone_has_n_neighbors(threefold, fourfold, blowup_p3):
    for fan in (threefold, fourfold, blowup_p3):
        for cone in range(fan.cone_count):
            assert len(fan.neighbors(cone)) == fan.n


def test_neighbor_across_and_errors(p2):
    # (0,1) and (0,2) share the facet spanned by ray 0
    assert p2.neighbor_across(0, 1) == 1
    assert p2.wall_between(0, 1).facet_rays == (0,)
    with pytest.raises(RayNotInCone):
        p2.neighbor_across(0, 2)
    fan = construct_product(construct_projective_space(1), construct_projective_space(1))
    opposite = [k for k in range(fan.cone_count) if not fan.is_adjacent(0, k) and k != 0]
    with pytest.raises(NotAdjacent):
        fan.wall_between(0, opposite[0])


def test_dual_covector(p2):
    assert dual_covector(p2, 0, 0) == (1, 0)
    assert dual_covector(p2, 0, 1) == (0, 1)
    u = dual_covector(p2, 2, 2)
    assert sum(a * b for a, b in zip(P2_RAYS[1], u)) == 0
    assert sum(a * b for a, b in zip(P2_RAYS[2], u)) == 1
    with pytest.raises(RayNotInCone):
        dual_covector(p2, 0, 2)


def test_edge_characters_are_antisymmetric_on_the_edge(threefold):
    table = edge_characters(threefold)
    for (s1, s2), chars in table.items():
        wall = threefold.wall_between(s1, s2)
        assert chars[wall.opposite(s1)] == 1
        for j in wall.facet_rays:
            assert chars[j] == 0
        assert chars[wall.opposite(s2)] == -1


def test_constructors():
    hirzebruch = construct_proj_split(1, 2)
    assert (hirzebruch.n, hirzebruch.r, hirzebruch.cone_count) == (2, 4, 4)
    assert (construct_proj_split(3, 1).r, construct_proj_split(3, 1).cone_count) == (6, 8)
    p1xp1 = construct_product(construct_projective_space(1), construct_projective_space(1))
    assert (p1xp1.n, p1xp1.r, p1xp1.cone_count) == (2, 4, 4)


def test_blow_up_adds_one_ray(blowup_p3):
    assert blowup_p3.r == 5
    assert blowup_p3.rays[-1] == (1, 1, 1)
    assert blowup_p3.cone_count == 6


@pytest.mark.parametrize("rays, cones, error", [
    ([(1, 0), (1, 2), (-1, -1)], [[0, 1], [1, 2], [0, 2]], NonSmoothCone),
    ([(2, 0), (0, 1), (-1, -1)], [[0, 1], [1, 2], [0, 2]], NonPrimitiveRay),
    ([(1, 0), (1, 0), (-1, -1)], [[0, 1], [1, 2], [0, 2]], DuplicateRay),
    ([(1, 0), (0, 1), (-1, -1)], [[0, 1], [1, 2]], DanglingFacet),
    ([(1, 0), (0, 1, 0), (-1, -1)], [[0, 1]], MalformedFan),
    ([(1, 0), (0, 1)], [[0, 1]], MalformedFan),
])
def test_invalid_fans_are_rejected(rays, cones, error):
    with pytest.raises(error):
        build_fan(2, rays, cones)


def test_disconnected_cones_are_rejected():
    # two fans of P^2 laid on top of each other: every facet is shared, the cones are not connected
    rays = [(1, 0), (0, 1), (-1, -1), (-1, 0), (0, -1), (1, 1)]
    cones = [[0, 1], [1, 2], [0, 2], [3, 4], [4, 5], [3, 5]]
    with pytest.raises(DisconnectedFan):
        build_fan(2, rays, cones)
