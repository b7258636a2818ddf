"""Fan data model, validation and standard constructors for smooth complete toric varieties"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import gcd
from typing import Dict, Iterable, List, Sequence, Tuple

import networkx as nx
import sympy as sp

from utils.errors import (
    DanglingFacet, DisconnectedFan, DuplicateRay, MalformedFan,
    NonPrimitiveRay, NonSmoothCone, NotAdjacent, RayNotInCone,
)

logger = logging.getLogger(__name__)

Ray = Tuple[int, ...]
Cone = Tuple[int, ...]

# per-fan tables are cached for this many distinct fans
FAN_CACHE_SIZE = 32


@dataclass(frozen=True)
class Wall:
    """A facet shared by two maximal cones, i.e. a torus-invariant curve"""

    cone_a: int
    cone_b: int
    facet_rays: Tuple[int, ...]
    opposite_a: int
    opposite_b: int

    def opposite(self, cone: int) -> int:
        """Ray of `cone` outside the shared facet"""
        if cone == self.cone_a:
            return self.opposite_a
        if cone == self.cone_b:
            return self.opposite_b
        raise NotAdjacent(f"cone {cone} is not an endpoint of wall {self.cone_a}-{self.cone_b}")

    def other(self, cone: int) -> int:
        return self.cone_b if cone == self.cone_a else self.cone_a


@dataclass(frozen=True)
class Fan:
    """
    A validated smooth complete fan

    Rays keep their input order. Each maximal cone is a sorted tuple of
    0-based ray indices and the cone list itself is sorted, so cone
    indices (and moment-graph addresses) are reproducible.
    """

    n: int
    rays: Tuple[Ray, ...]
    max_cones: Tuple[Cone, ...]
    wall_list: Tuple[Wall, ...] = field(default=(), compare=False, repr=False)
    adjacency: Dict[Tuple[int, int], int] = field(default_factory=dict, compare=False, repr=False)
    across: Dict[Tuple[int, int], int] = field(default_factory=dict, compare=False, repr=False)

    @property
    def r(self) -> int:
        return len(self.rays)

    @property
    def cone_count(self) -> int:
        return len(self.max_cones)

    def wall_between(self, cone_a: int, cone_b: int) -> Wall:
        key = (min(cone_a, cone_b), max(cone_a, cone_b))
        if key not in self.adjacency:
            raise NotAdjacent(f"maximal cones {cone_a} and {cone_b} do not share a facet")
        return self.wall_list[self.adjacency[key]]

    def is_adjacent(self, cone_a: int, cone_b: int) -> bool:
        return (min(cone_a, cone_b), max(cone_a, cone_b)) in self.adjacency

    def neighbors(self, cone: int) -> Tuple[int, ...]:
        """Maximal cones sharing a facet with `cone` (the set σ*)"""
        return tuple(sorted(w.other(cone) for w in self.wall_list if cone in (w.cone_a, w.cone_b)))

    def neighbor_across(self, cone: int, ray: int) -> int:
        """The maximal cone across the facet of `cone` opposite `ray`"""
        if (cone, ray) not in self.across:
            raise RayNotInCone(f"ray {ray} is not a ray of maximal cone {cone}")
        return self.across[(cone, ray)]


def _determinant(vectors: Sequence[Ray]) -> int:
    return int(sp.Matrix(vectors).det(method="bareiss"))


def build_fan(n: int, rays: Iterable[Sequence[int]], max_cones: Iterable[Iterable[int]]) -> Fan:
    """
    Validate raw fan data and precompute walls and adjacency

    Args:
        n: Lattice rank
        rays: Primitive integer n-vectors
        max_cones: Maximal cones as collections of 0-based ray indices

    Returns:
        A validated Fan

    Raises:
        MalformedFan, DuplicateRay, NonPrimitiveRay, NonSmoothCone,
        DanglingFacet, DisconnectedFan: the first violated invariant
    """
    if n < 1:
        raise MalformedFan(f"lattice rank must be >= 1, got {n}")

    ray_tuple = tuple(tuple(int(x) for x in ray) for ray in rays)
    for j, ray in enumerate(ray_tuple):
        if len(ray) != n:
            raise MalformedFan(f"ray {j} has length {len(ray)}, expected {n}")
    if len(set(ray_tuple)) != len(ray_tuple):
        raise DuplicateRay("ray list contains duplicates")
    for j, ray in enumerate(ray_tuple):
        if gcd(*ray) != 1:
            raise NonPrimitiveRay(f"ray {j} = {ray} is not primitive")
    if len(ray_tuple) < n + 1:
        raise MalformedFan(f"a complete fan in rank {n} needs at least {n + 1} rays")

    cones = []
    for cone in max_cones:
        indices = tuple(sorted(int(i) for i in cone))
        if len(set(indices)) != n:
            raise MalformedFan(f"maximal cone {list(cone)} must have {n} distinct rays")
        if indices[0] < 0 or indices[-1] >= len(ray_tuple):
            raise MalformedFan(f"maximal cone {list(cone)} refers to a missing ray")
        cones.append(indices)
    if not cones:
        raise MalformedFan("fan has no maximal cones")
    if len(set(cones)) != len(cones):
        raise MalformedFan("maximal cone list contains duplicates")
    cones.sort()

    for i, cone in enumerate(cones):
        det = _determinant([ray_tuple[j] for j in cone])
        if abs(det) != 1:
            raise NonSmoothCone(f"maximal cone {i} has |det| = {abs(det)}")

    owners: Dict[Tuple[int, ...], List[Tuple[int, int]]] = {}
    for i, cone in enumerate(cones):
        for ray in cone:
            facet = tuple(j for j in cone if j != ray)
            owners.setdefault(facet, []).append((i, ray))

    walls = []
    for facet, pair in owners.items():
        if len(pair) != 2:
            raise DanglingFacet(f"facet {list(facet)} lies in {len(pair)} maximal cone(s)")
        (a, opp_a), (b, opp_b) = sorted(pair)
        walls.append(Wall(a, b, facet, opp_a, opp_b))
    walls.sort(key=lambda w: (w.cone_a, w.cone_b))

    adjacency_graph = nx.Graph()
    adjacency_graph.add_nodes_from(range(len(cones)))
    adjacency_graph.add_edges_from((w.cone_a, w.cone_b) for w in walls)
    if not nx.is_connected(adjacency_graph):
        raise DisconnectedFan("maximal cones do not form a connected adjacency graph")

    adjacency = {(w.cone_a, w.cone_b): k for k, w in enumerate(walls)}
    across = {}
    for w in walls:
        across[(w.cone_a, w.opposite_a)] = w.cone_b
        across[(w.cone_b, w.opposite_b)] = w.cone_a

    logger.info("Built fan: n=%d, %d rays, %d maximal cones, %d walls", n, len(ray_tuple), len(cones), len(walls))
    return Fan(n, ray_tuple, tuple(cones), tuple(walls), adjacency, across)


def walls(fan: Fan) -> List[Wall]:
    """One Wall per shared facet, ordered by (cone_a, cone_b)"""
    return list(fan.wall_list)


def dual_covector(fan: Fan, cone_index: int, distinguished_ray: int) -> Tuple[int, ...]:
    """
    Integer u with <rho, u> = 0 on the facet rays of the cone and <rho', u> = 1

    Raises:
        RayNotInCone: If distinguished_ray is not a ray of the cone
    """
    cone = fan.max_cones[cone_index]
    if distinguished_ray not in cone:
        raise RayNotInCone(f"ray {distinguished_ray} is not a ray of maximal cone {cone_index}")

    facet = [j for j in cone if j != distinguished_ray]
    basis = sp.Matrix([fan.rays[j] for j in facet] + [fan.rays[distinguished_ray]])
    target = sp.zeros(fan.n, 1)
    target[fan.n - 1, 0] = 1
    solution = basis.inv() * target

    if any(not entry.is_integer for entry in solution):
        raise NonSmoothCone(f"maximal cone {cone_index} has no integral dual basis")
    u = tuple(int(entry) for entry in solution)

    # re-check the defining pairings
    if any(sum(a * b for a, b in zip(fan.rays[j], u)) for j in facet) \
            or sum(a * b for a, b in zip(fan.rays[distinguished_ray], u)) != 1:
        raise NonSmoothCone(f"maximal cone {cone_index} has no dual covector for ray {distinguished_ray}")
    return u


@lru_cache(maxsize=FAN_CACHE_SIZE)
def edge_characters(fan: Fan) -> Dict[Tuple[int, int], Tuple[int, ...]]:
    """
    For each ordered adjacent pair (s1, s2) the integer vector <rho_j, u>
    over all rays, u being the dual covector of s1 at the ray outside s2
    """
    table = {}
    for w in fan.wall_list:
        for s1 in (w.cone_a, w.cone_b):
            u = dual_covector(fan, s1, w.opposite(s1))
            table[(s1, w.other(s1))] = tuple(sum(a * b for a, b in zip(ray, u)) for ray in fan.rays)
    return table


def construct_projective_space(n: int) -> Fan:
    """P^n: rays e_1..e_n, e_0 = -sum e_i, cones all n-subsets"""
    if n < 1:
        raise MalformedFan(f"projective space needs n >= 1, got {n}")
    rays = [tuple(1 if i == k else 0 for i in range(n)) for k in range(n)]
    rays.append(tuple(-1 for _ in range(n)))
    return build_fan(n, rays, combinations(range(n + 1), n))


def construct_proj_split(n: int, m: int) -> Fan:
    """P(O + O(m)) over P^n; n = 1 gives the Hirzebruch surface F_m"""
    if n < 1 or m < 0:
        raise MalformedFan(f"proj_split needs n >= 1 and m >= 0, got n={n}, m={m}")
    dim = n + 1

    def unit(k: int, sign: int = 1) -> Ray:
        return tuple(sign if i == k else 0 for i in range(dim))

    rays = [unit(k) for k in range(n)]
    rays.append(unit(n))
    rays.append(unit(n, -1))
    rays.append(tuple([-1] * n + [-m]))

    base = list(range(n)) + [n + 2]
    cones = [tuple(subset) + (vertical,) for vertical in (n, n + 1) for subset in combinations(base, n)]
    return build_fan(dim, rays, cones)


def construct_product(first: Fan, second: Fan) -> Fan:
    """Product fan: block-embedded rays, cones are unions of one cone from each"""
    rays = [ray + (0,) * second.n for ray in first.rays]
    rays += [(0,) * first.n + ray for ray in second.rays]
    shift = first.r
    cones = [a + tuple(j + shift for j in b) for a in first.max_cones for b in second.max_cones]
    return build_fan(first.n + second.n, rays, cones)


def blow_up_fixed_point(fan: Fan, cone_index: int) -> Fan:
    """Star subdivision of a maximal cone, i.e. the blow-up of its fixed point"""
    if not 0 <= cone_index < fan.cone_count:
        raise MalformedFan(f"no maximal cone with index {cone_index}")
    sigma = fan.max_cones[cone_index]
    new_ray = tuple(sum(fan.rays[j][i] for j in sigma) for i in range(fan.n))
    new_index = fan.r

    cones = [cone for k, cone in enumerate(fan.max_cones) if k != cone_index]
    cones += [tuple(j for j in sigma if j != replaced) + (new_index,) for replaced in sigma]
    return build_fan(fan.n, list(fan.rays) + [new_ray], cones)
