"""
Exact evaluation of the localized classes at one decorated graph

Torus weights are specialized to distinct random integers and every
quantity is a Fraction. A vanishing denominator raises DegenerateWeights,
which the integrator answers by resampling the weights.
"""

import logging
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, List, Sequence, Tuple

from localization.graphs import DecoratedGraph
from toric.cycles import CohomExpr, DivisorClass, pair, wall_classes
from toric.fan import Fan, Wall, edge_characters
from utils.errors import (
    DegenerateWeights, GammaNotNeighbor, MarkOutOfRange, NegativeEdgeDegree, NotAdjacent,
)

logger = logging.getLogger(__name__)

WEIGHT_RANGE = 2 ** 32


class EdgeOrientation(Enum):
    """Which endpoint of an edge plays sigma_1 in Delta(e) and push_ev"""

    LOWER_FIRST = "lower"
    HIGHER_FIRST = "higher"


@dataclass(frozen=True)
class WeightAssignment:
    """One exact weight per ray"""

    omegas: Tuple[Fraction, ...]


def sample_weights(r: int, seed: int, upper: int = WEIGHT_RANGE) -> WeightAssignment:
    """r pairwise distinct integers drawn from [0, upper), reproducible from seed"""
    rng = random.Random(seed)
    return WeightAssignment(tuple(Fraction(v) for v in rng.sample(range(upper), r)))


def _power(base: Fraction, exponent: int) -> Fraction:
    if exponent < 0 and base == 0:
        raise DegenerateWeights("zero base raised to a negative power")
    return base ** exponent


@lru_cache(maxsize=64)
def _omega_table(fan: Fan, weights: WeightAssignment) -> Dict[Tuple[int, int], Fraction]:
    return {
        key: sum((c * w for c, w in zip(vector, weights.omegas)), Fraction(0))
        for key, vector in edge_characters(fan).items()
    }


def omega_edge(fan: Fan, sigma1: int, sigma2: int, weights: WeightAssignment) -> Fraction:
    """Weight of the invariant curve V(sigma1 & sigma2) at the fixed point of sigma1"""
    table = _omega_table(fan, weights)
    if (sigma1, sigma2) not in table:
        raise NotAdjacent(f"maximal cones {sigma1} and {sigma2} are not adjacent")
    return table[(sigma1, sigma2)]


def lambda_edge_degree(fan: Fan, wall: Wall, d: int, gamma: int, sigma1: int = None) -> int:
    """
    d times the degree of the ray divisor of sigma1 outside gamma on the wall curve

    sigma1 defaults to wall.cone_a.
    """
    sigma1 = wall.cone_a if sigma1 is None else sigma1
    if not fan.is_adjacent(sigma1, gamma):
        raise GammaNotNeighbor(f"cone {gamma} is not adjacent to cone {sigma1}")
    rho = fan.wall_between(sigma1, gamma).opposite(sigma1)
    curve = wall_classes(fan)[fan.adjacency[(wall.cone_a, wall.cone_b)]]
    return d * curve.pairing[rho]


def lambda_eval(fan: Fan, sigma: int, rho: int, k: int, weights: WeightAssignment) -> Fraction:
    """Restriction of [V(rho)]^k to the fixed point of sigma"""
    if rho not in fan.max_cones[sigma]:
        return Fraction(1) if k == 0 else Fraction(0)
    gamma = fan.neighbor_across(sigma, rho)
    return omega_edge(fan, sigma, gamma, weights) ** k


@lru_cache(maxsize=4096)
def Lambda(fan: Fan, sigma: int, z: CohomExpr, weights: WeightAssignment) -> Fraction:
    """Restriction of a cohomology class to the fixed point of sigma, extended by linearity"""
    total = Fraction(0)
    for exponents, coeff in z.terms.items():
        term = coeff
        for rho, k in enumerate(exponents):
            if k:
                term *= lambda_eval(fan, sigma, rho, k, weights)
                if not term:
                    break
        total += term
    return total


class _ZeroTracked:
    """Product that keeps exact zero factors apart so they can cancel"""

    def __init__(self):
        self.value = Fraction(1)
        self.zeros = 0

    def multiply(self, factor: Fraction, exponent: int = 1) -> None:
        if factor == 0:
            self.zeros += exponent
        else:
            self.value *= factor ** exponent

    def result(self) -> Fraction:
        if self.zeros > 0:
            return Fraction(0)
        if self.zeros < 0:
            raise DegenerateWeights("push-forward factor has a pole at the sampled weights")
        return self.value


class FlagData:
    """Per-graph data shared by Delta, Xi, Psi, the Euler inverse and the ev/push factors"""

    def __init__(self, fan: Fan, graph: DecoratedGraph, weights: WeightAssignment,
                 orientation: EdgeOrientation = EdgeOrientation.LOWER_FIRST, push_sign: int = 1):
        self.fan = fan
        self.graph = graph
        self.weights = weights
        self.orientation = orientation
        self.push_sign = push_sign

        tree = graph.tree
        self.flags: List[List[Tuple[int, int]]] = [[] for _ in range(tree.vertex_count)]
        for e, (a, b) in enumerate(tree.edges):
            self.flags[a].append((e, b))
            self.flags[b].append((e, a))
        self.marks: List[List[int]] = [graph.marks_at(v) for v in range(tree.vertex_count)]

        self.flag_weights: List[List[Fraction]] = []
        for v, flags in enumerate(self.flags):
            color = graph.coloring[v]
            self.flag_weights.append([
                omega_edge(fan, color, graph.coloring[other], weights) / graph.weights[e]
                for e, other in flags
            ])
        self._inverse_sums: Dict[int, Fraction] = {}
        self._cache: Dict[Tuple, Fraction] = {}

    def valence(self, v: int) -> int:
        """n(v) = |F_v| + |S_v|"""
        return len(self.flags[v]) + len(self.marks[v])

    def flag_inverse_sum(self, v: int) -> Fraction:
        """Sum over the flags at v of 1 / omega_F"""
        if v not in self._inverse_sums:
            total = Fraction(0)
            for omega in self.flag_weights[v]:
                if omega == 0:
                    raise DegenerateWeights("a flag weight vanishes")
                total += 1 / omega
            self._inverse_sums[v] = total
        return self._inverse_sums[v]

    def oriented(self, e: int) -> Tuple[int, int]:
        """Endpoints (v, v') of edge e with v colored by sigma_1"""
        a, b = self.graph.tree.edges[e]
        ca, cb = self.graph.coloring[a], self.graph.coloring[b]
        lower_first = (a, b) if ca < cb else (b, a)
        if self.orientation is EdgeOrientation.LOWER_FIRST:
            return lower_first
        return lower_first[1], lower_first[0]

    def cached(self, key: Tuple, compute) -> Fraction:
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]


def delta_edge(fd: FlagData, e: int) -> Fraction:
    """Contribution of edge e to the normal bundle (Delta(e))"""
    fan, weights = fd.fan, fd.weights
    v, v2 = fd.oriented(e)
    s1, s2 = fd.graph.coloring[v], fd.graph.coloring[v2]
    d = fd.graph.weights[e]

    t = omega_edge(fan, s1, s2, weights)
    if t == 0:
        raise DegenerateWeights(f"edge weight between cones {s1} and {s2} vanishes")
    value = Fraction((-1) ** d * d ** (2 * d), factorial(d) ** 2) / t ** (2 * d)

    wall = fan.wall_between(s1, s2)
    for gamma in fan.neighbors(s1):
        if gamma == s2:
            continue
        lam = lambda_edge_degree(fan, wall, d, gamma, sigma1=s1)
        omega_gamma = omega_edge(fan, s1, gamma, weights)
        if lam >= 0:
            for i in range(lam + 1):
                base = omega_gamma - Fraction(i, d) * t
                if base == 0:
                    raise DegenerateWeights("normal-direction weight vanishes")
                value /= base
        elif lam <= -2:
            for i in range(lam + 1, 0):
                value *= omega_gamma - Fraction(i, d) * t
    return value


def xi(fd: FlagData) -> Fraction:
    """Xi(Gamma): vertex tangent products raised to |F_v| - 1, times every Delta(e)"""
    fan, weights, coloring = fd.fan, fd.weights, fd.graph.coloring
    value = Fraction(1)
    for v, flags in enumerate(fd.flags):
        exponent = len(flags) - 1
        if exponent:
            tangent = Fraction(1)
            for gamma in fan.neighbors(coloring[v]):
                tangent *= omega_edge(fan, coloring[v], gamma, weights)
            value *= _power(tangent, exponent)
    for e in range(fd.graph.tree.edge_count):
        value *= delta_edge(fd, e)
    return value


def _multinomial(total: int, parts: Sequence[int]) -> int:
    result = factorial(total)
    for part in parts:
        result //= factorial(part)
    return result


def psi_factor(fd: FlagData, exponents: Sequence[int]) -> Fraction:
    """Psi(Gamma) for psi exponents (a_1..a_m)"""
    if len(exponents) != fd.graph.m:
        raise MarkOutOfRange(f"Psi takes {fd.graph.m} exponents, got {len(exponents)}")
    value = Fraction(1)
    for v in range(fd.graph.tree.vertex_count):
        marks = fd.marks[v]
        s_bar = sum(exponents[i - 1] for i in marks)
        if s_bar == 0:
            continue
        n_v = fd.valence(v)
        if n_v == 2 and len(marks) == 1:
            value *= (-1) ** s_bar * _power(fd.flag_inverse_sum(v), -s_bar)
        elif s_bar > n_v - 3:
            return Fraction(0)
        else:
            parts = [n_v - 3 - s_bar] + [exponents[i - 1] for i in marks]
            value *= _multinomial(n_v - 3, parts) * _power(fd.flag_inverse_sum(v), -s_bar)
    return value


def euler_inverse(fd: FlagData) -> Fraction:
    """Inverse equivariant Euler class of the normal bundle (no psi classes)"""
    value = xi(fd)
    for v in range(fd.graph.tree.vertex_count):
        for omega in fd.flag_weights[v]:
            if omega == 0:
                raise DegenerateWeights("a flag weight vanishes")
            value /= omega
        value *= _power(fd.flag_inverse_sum(v), fd.valence(v) - 3)
    return value


def ev_factor(fd: FlagData, mark: int, z: CohomExpr) -> Fraction:
    """Restriction of ev_mark^*(z): z at the cone coloring the marked vertex"""
    if not 1 <= mark <= fd.graph.m:
        raise MarkOutOfRange(f"mark {mark} is outside 1..{fd.graph.m}")
    sigma = fd.graph.coloring[fd.graph.marking[mark - 1]]
    return Lambda(fd.fan, sigma, z, fd.weights)


def push_ev_factor(fd: FlagData, divisor: DivisorClass) -> Fraction:
    """
    Top Chern class of the bundle of sections of M along the curve

    Each edge of degree M_e > 0 contributes the M_e + 1 weights interpolating
    Lambda(c(v), M) and Lambda(c(v'), M); an edge of degree 0 carries a single
    section of weight Lambda(c(v), M). Vertices with |F_v| >= 2 divide out the
    weights counted twice at the nodes.
    """
    fan, graph = fd.fan, fd.graph
    z = divisor.as_cohom()
    restricted = [Lambda(fan, c, z, fd.weights) for c in graph.coloring]
    classes = wall_classes(fan)

    product = _ZeroTracked()
    for v, flags in enumerate(fd.flags):
        if len(flags) != 1:
            product.multiply(restricted[v], 1 - len(flags))

    for e in range(graph.tree.edge_count):
        v, v2 = fd.oriented(e)
        curve = classes[fan.adjacency[tuple(sorted((graph.coloring[v], graph.coloring[v2])))]]
        degree = graph.weights[e] * pair(divisor, curve)
        if degree < 0:
            raise NegativeEdgeDegree(f"M has degree {degree} on edge {e}")
        if degree == 0:
            product.multiply(restricted[v])
            continue
        for alpha in range(degree + 1):
            product.multiply((alpha * restricted[v] + fd.push_sign * (degree - alpha) * restricted[v2]) / degree)
    return product.result()
