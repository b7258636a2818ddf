"""Toric intersection theory: curve and divisor classes, Mori and nef cones, moment graph"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd, lcm
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import sympy as sp

from toric.fan import FAN_CACHE_SIZE, Fan, Wall
from utils.errors import (
    InhomogeneousSum, MalformedFan, MismatchedFan, NonSmoothCone, NotAdjacent,
    NotEffective, NotProjective, UngradedClass, ZeroClass,
)

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class CurveClass:
    """A 1-cycle stored as its intersection numbers with every ray divisor"""

    pairing: Tuple[int, ...]

    def __add__(self, other: "CurveClass") -> "CurveClass":
        _check_lengths(self.pairing, other.pairing)
        return CurveClass(tuple(a + b for a, b in zip(self.pairing, other.pairing)))

    def __sub__(self, other: "CurveClass") -> "CurveClass":
        return self + (-other)

    def __neg__(self) -> "CurveClass":
        return CurveClass(tuple(-a for a in self.pairing))

    def __rmul__(self, k: int) -> "CurveClass":
        return CurveClass(tuple(k * a for a in self.pairing))

    def is_zero(self) -> bool:
        return not any(self.pairing)

    @classmethod
    def zero(cls, r: int) -> "CurveClass":
        return cls((0,) * r)


@dataclass(frozen=True)
class DivisorClass:
    """Integer combination of the ray divisors [V(rho_j)]"""

    coeffs: Tuple[int, ...]

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        _check_lengths(self.coeffs, other.coeffs)
        return DivisorClass(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __rmul__(self, k: int) -> "DivisorClass":
        return DivisorClass(tuple(k * a for a in self.coeffs))

    def as_cohom(self) -> "CohomExpr":
        r = len(self.coeffs)
        return CohomExpr(r, {_unit(r, j): c for j, c in enumerate(self.coeffs) if c})


def _unit(r: int, j: int) -> Tuple[int, ...]:
    return tuple(1 if i == j else 0 for i in range(r))


def _check_lengths(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise MismatchedFan(f"classes belong to fans with {len(a)} and {len(b)} rays")


class CohomExpr:
    """
    Homogeneous rational polynomial in the ray divisor classes

    Terms map exponent vectors (k_1..k_r) to nonzero Fractions. Adding two
    nonzero classes of different codimension raises InhomogeneousSum.
    """

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: Optional[Mapping[Tuple[int, ...], Scalar]] = None):
        cleaned: Dict[Tuple[int, ...], Fraction] = {}
        for exponents, coeff in (terms or {}).items():
            exponents = tuple(int(k) for k in exponents)
            if len(exponents) != rank or min(exponents, default=0) < 0:
                raise MismatchedFan(f"exponent vector {exponents} does not fit {rank} rays")
            cleaned[exponents] = cleaned.get(exponents, Fraction(0)) + Fraction(coeff)
        cleaned = {e: c for e, c in cleaned.items() if c}
        if len({sum(e) for e in cleaned}) > 1:
            raise InhomogeneousSum("cohomology class mixes codimensions")
        self.rank = rank
        self.terms = cleaned

    @classmethod
    def scalar(cls, rank: int, value: Scalar) -> "CohomExpr":
        return cls(rank, {(0,) * rank: value})

    @classmethod
    def ray_divisor(cls, rank: int, j: int) -> "CohomExpr":
        return cls(rank, {_unit(rank, j): 1})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def codim(self) -> int:
        if not self.terms:
            raise UngradedClass("the zero class has no codimension")
        return sum(next(iter(self.terms)))

    def _coerce(self, other) -> "CohomExpr":
        if isinstance(other, CohomExpr):
            if other.rank != self.rank:
                raise MismatchedFan(f"classes belong to fans with {self.rank} and {other.rank} rays")
            return other
        if isinstance(other, (int, Fraction)):
            return CohomExpr.scalar(self.rank, other)
        return NotImplemented

    def __add__(self, other) -> "CohomExpr":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        merged = dict(self.terms)
        for e, c in other.terms.items():
            merged[e] = merged.get(e, Fraction(0)) + c
        return CohomExpr(self.rank, merged)

    __radd__ = __add__

    def __neg__(self) -> "CohomExpr":
        return CohomExpr(self.rank, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "CohomExpr":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __mul__(self, other) -> "CohomExpr":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        product: Dict[Tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                product[e] = product.get(e, Fraction(0)) + c1 * c2
        return CohomExpr(self.rank, product)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "CohomExpr":
        if k < 0:
            raise ValueError("cohomology classes only take non-negative powers")
        result = CohomExpr.scalar(self.rank, 1)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, CohomExpr) and self.rank == other.rank and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.rank, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exponents, coeff in sorted(self.terms.items(), reverse=True):
            factors = [f"D{j + 1}" + (f"^{k}" if k > 1 else "") for j, k in enumerate(exponents) if k]
            head = str(coeff) if (coeff != 1 or not factors) else ""
            parts.append("*".join(([head] if head else []) + factors))
        return " + ".join(parts)

    def as_divisor(self) -> DivisorClass:
        """The divisor with these coefficients; the class must be linear and integral"""
        if self.terms and self.codim != 1:
            raise UngradedClass(f"expected a divisor class, got codimension {self.codim}")
        coeffs = [Fraction(0)] * self.rank
        for exponents, coeff in self.terms.items():
            coeffs[exponents.index(1)] = coeff
        if any(c.denominator != 1 for c in coeffs):
            raise UngradedClass("divisor classes must have integer coefficients")
        return DivisorClass(tuple(int(c) for c in coeffs))


def ray_divisor(fan: Fan, j: int) -> CohomExpr:
    """[V(rho_j)] for a 0-based ray index"""
    return CohomExpr.ray_divisor(fan.r, j)


def wall_curve_class(fan: Fan, wall: Wall) -> CurveClass:
    """
    Class of the invariant curve of a wall

    Solves rho_a + rho_b + sum c_k rho_k = 0 over the facet rays: the pairing
    is 1 at rho_a and rho_b, c_k at facet ray rho_k and 0 elsewhere.
    """
    basis_rays = list(wall.facet_rays) + [wall.opposite_a]
    basis = sp.Matrix([fan.rays[j] for j in basis_rays]).T
    coords = basis.inv() * sp.Matrix(fan.rays[wall.opposite_b])
    if coords[-1] != -1:
        raise NonSmoothCone(f"wall {wall.facet_rays} has no unimodular relation between its opposite rays")

    pairing = [0] * fan.r
    pairing[wall.opposite_a] = 1
    pairing[wall.opposite_b] = 1
    for j, x in zip(wall.facet_rays, coords):
        pairing[j] = int(-x)

    relation = [fan.rays[wall.opposite_a][i] + fan.rays[wall.opposite_b][i]
                + sum(pairing[j] * fan.rays[j][i] for j in wall.facet_rays) for i in range(fan.n)]
    if any(relation):
        raise MalformedFan(f"wall {wall.facet_rays} relation does not close up")
    return CurveClass(tuple(pairing))


@lru_cache(maxsize=FAN_CACHE_SIZE)
def wall_classes(fan: Fan) -> Tuple[CurveClass, ...]:
    """Curve classes aligned with fan.wall_list"""
    return tuple(wall_curve_class(fan, w) for w in fan.wall_list)


def pair(divisor: DivisorClass, curve: CurveClass) -> int:
    """Intersection number D . C"""
    _check_lengths(divisor.coeffs, curve.pairing)
    return sum(a * b for a, b in zip(divisor.coeffs, curve.pairing))


def _primitive(vector: Sequence[int]) -> Tuple[int, ...]:
    divisor = gcd(*vector)
    return tuple(x // divisor for x in vector) if divisor else tuple(vector)


def mori_generators(fan: Fan) -> List[CurveClass]:
    """Deduplicated primitive wall classes, in first-seen wall order"""
    seen = []
    for c in wall_classes(fan):
        primitive = CurveClass(_primitive(c.pairing))
        if primitive not in seen:
            seen.append(primitive)
    return seen


@lru_cache(maxsize=FAN_CACHE_SIZE)
def _nef_generators(fan: Fan) -> Tuple[DivisorClass, ...]:
    mori = mori_generators(fan)
    # the rays outside the first maximal cone give a basis of the Picard group
    free = [j for j in range(fan.r) if j not in fan.max_cones[0]]
    rank = len(free)
    rows = [[c.pairing[j] for j in free] for c in mori]
    if sp.Matrix(rows).rank() < rank:
        raise NotProjective("wall classes do not span the curve space")

    directions = []
    if rank == 1:
        directions.append([1])
    else:
        for subset in combinations(range(len(rows)), rank - 1):
            tight = sp.Matrix([rows[i] for i in subset])
            if tight.rank() != rank - 1:
                continue
            for vec in tight.nullspace():
                scale = lcm(*[int(sp.fraction(x)[1]) for x in vec])
                directions.append([int(x * scale) for x in vec])

    extremal = set()
    for vec in directions:
        vec = _primitive(vec)
        values = [sum(a * b for a, b in zip(row, vec)) for row in rows]
        if all(v >= 0 for v in values):
            extremal.add(vec)
        elif all(v <= 0 for v in values):
            extremal.add(tuple(-x for x in vec))

    generators = sorted(extremal)
    if not generators or sp.Matrix(generators).rank() < rank:
        raise NotProjective(f"nef cone has dimension < {rank}; the variety is not projective")

    result = []
    for vec in generators:
        coeffs = [0] * fan.r
        for j, x in zip(free, vec):
            coeffs[j] = x
        result.append(DivisorClass(tuple(coeffs)))
    logger.info("Nef cone: %d extremal generators in Picard rank %d", len(result), rank)
    return tuple(result)


def nef_generators(fan: Fan) -> List[DivisorClass]:
    """
    One primitive divisor per extremal ray of the nef cone

    Raises:
        NotProjective: If the nef cone is not full-dimensional
    """
    return list(_nef_generators(fan))


def is_effective(fan: Fan, beta: CurveClass, nef: Optional[Sequence[DivisorClass]] = None) -> bool:
    """True iff beta pairs non-negatively with every nef generator"""
    nef = nef_generators(fan) if nef is None else nef
    return all(pair(m, beta) >= 0 for m in nef)


def max_edges(fan: Fan, beta: CurveClass, nef: Optional[Sequence[DivisorClass]] = None) -> int:
    """Upper bound p = beta . (M_1 + ... + M_k) on the number of edges of a graph"""
    nef = nef_generators(fan) if nef is None else nef
    if beta.is_zero():
        raise ZeroClass("curve class is zero")
    if not is_effective(fan, beta, nef):
        raise NotEffective(f"curve class {list(beta.pairing)} pairs negatively with a nef generator")
    return sum(pair(m, beta) for m in nef)


@dataclass(frozen=True)
class MomentGraph:
    """Vertices are maximal cones, edges are walls labelled by their curve classes"""

    fan: Fan
    entries: Dict[Tuple[int, int], Tuple[Wall, CurveClass]] = field(compare=False)

    def __getitem__(self, key: Tuple[int, int]) -> Tuple[Wall, CurveClass]:
        i, j = key
        entry = self.entries.get((min(i, j), max(i, j)))
        if entry is None:
            raise NotAdjacent(f"maximal cones {i} and {j} are not joined in the moment graph")
        return entry

    def curve(self, i: int, j: int) -> CurveClass:
        return self[i, j][1]

    def vertices(self) -> range:
        return range(self.fan.cone_count)

    def edges(self) -> Iterator[Tuple[int, int]]:
        return iter(sorted(self.entries))


@lru_cache(maxsize=FAN_CACHE_SIZE)
def moment_graph(fan: Fan) -> MomentGraph:
    classes = wall_classes(fan)
    entries = {(w.cone_a, w.cone_b): (w, c) for w, c in zip(fan.wall_list, classes)}
    return MomentGraph(fan, entries)


def anticanonical_divisor(fan: Fan) -> DivisorClass:
    """-K_X = sum of all ray divisors"""
    return DivisorClass((1,) * fan.r)


def point_class(fan: Fan, cone_index: int = 0) -> CohomExpr:
    """Product of the ray divisors of one maximal cone (the first by default)"""
    cone = fan.max_cones[cone_index]
    return CohomExpr(fan.r, {tuple(1 if j in cone else 0 for j in range(fan.r)): 1})


def virtual_dimension(fan: Fan, beta: CurveClass, m: int) -> int:
    """n + (-K).beta + m - 3"""
    return fan.n + pair(anticanonical_divisor(fan), beta) + m - 3


def linear_relations(fan: Fan) -> List[DivisorClass]:
    """sum_j <rho_j, e_i> D_j for each coordinate i; these are linearly equivalent to zero"""
    return [DivisorClass(tuple(ray[i] for ray in fan.rays)) for i in range(fan.n)]
