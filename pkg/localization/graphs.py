"""Decorated-graph enumeration: trees, colorings by maximal cones, edge weights, markings"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from toric.cycles import CurveClass, DivisorClass, MomentGraph, max_edges, moment_graph, nef_generators, pair
from toric.fan import Fan

logger = logging.getLogger(__name__)

# (tree, coloring) -> per-mark tuple of allowed vertices, or None for no restriction
MarkSupport = Callable[["Tree", Tuple[int, ...]], Optional[List[Tuple[int, ...]]]]


@dataclass(frozen=True)
class Tree:
    """An unlabelled tree with a fixed vertex labelling 0..v-1"""

    vertex_count: int
    edges: Tuple[Tuple[int, int], ...]
    token: str
    automorphisms: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False, repr=False)
    order: Tuple[int, ...] = field(default=(), compare=False, repr=False)
    parent: Tuple[int, ...] = field(default=(), compare=False, repr=False)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def incident(self, vertex: int) -> List[int]:
        """Indices of the edges at `vertex` (its flags)"""
        return [k for k, e in enumerate(self.edges) if vertex in e]


def _rooted_code(graph: nx.Graph, root: int, parent: Optional[int]) -> str:
    children = sorted(_rooted_code(graph, c, root) for c in graph.neighbors(root) if c != parent)
    return "(" + "".join(children) + ")"


def canonical_token(graph: nx.Graph) -> str:
    """Isomorphism invariant of a tree: smallest rooted code over its centers"""
    return min(_rooted_code(graph, c, None) for c in nx.center(graph))


def _make_tree(graph: nx.Graph) -> Tree:
    graph = nx.convert_node_labels_to_integers(graph, ordering="sorted")
    edges = tuple(sorted((min(a, b), max(a, b)) for a, b in graph.edges()))
    automorphisms = tuple(sorted(
        tuple(phi[v] for v in range(graph.number_of_nodes()))
        for phi in GraphMatcher(graph, graph).isomorphisms_iter()
    ))
    order = [0]
    parent = [-1] * graph.number_of_nodes()
    for a, b in nx.bfs_edges(graph, 0):
        order.append(b)
        parent[b] = a
    return Tree(graph.number_of_nodes(), edges, canonical_token(graph), automorphisms, tuple(order), tuple(parent))


@lru_cache(maxsize=None)
def _trees_with_vertices(count: int) -> Tuple[Tree, ...]:
    if count == 2:
        return (_make_tree(nx.path_graph(2)),)

    found: Dict[str, nx.Graph] = {}
    for smaller in _trees_with_vertices(count - 1):
        graph = nx.Graph(list(smaller.edges))
        # one leaf per vertex type is enough
        seen_types = set()
        for v in range(smaller.vertex_count):
            vertex_type = _rooted_code(graph, v, None)
            if vertex_type in seen_types:
                continue
            seen_types.add(vertex_type)
            extended = graph.copy()
            extended.add_edge(v, smaller.vertex_count)
            found.setdefault(canonical_token(extended), extended)
    return tuple(_make_tree(found[token]) for token in sorted(found))


def free_trees(max_edges_count: int) -> Iterator[Tree]:
    """One tree per isomorphism class with 1..max_edges_count edges, by size then token"""
    for count in range(2, max_edges_count + 2):
        yield from _trees_with_vertices(count)


def colorings(tree: Tree, graph: MomentGraph) -> Iterator[Tuple[Tuple[int, ...], int]]:
    """
    One coloring per Aut(tree)-orbit with its stabilizer order aut_c

    Vertices are colored in BFS order so every new vertex only has to be
    adjacent (in the moment graph) to its already-colored parent. The
    emitted representative is the lexicographically smallest in its orbit.
    """
    fan = graph.fan
    neighbor_table = {c: fan.neighbors(c) for c in range(fan.cone_count)}
    coloring = [-1] * tree.vertex_count

    def extend(position: int) -> Iterator[Tuple[int, ...]]:
        if position == tree.vertex_count:
            yield tuple(coloring)
            return
        vertex = tree.order[position]
        parent = tree.parent[vertex]
        choices = range(fan.cone_count) if parent < 0 else neighbor_table[coloring[parent]]
        for cone in choices:
            coloring[vertex] = cone
            yield from extend(position + 1)
        coloring[vertex] = -1

    for candidate in extend(0):
        images = [tuple(candidate[phi[v]] for v in range(tree.vertex_count)) for phi in tree.automorphisms]
        if min(images) == candidate:
            yield candidate, sum(1 for image in images if image == candidate)


def edge_classes(tree: Tree, coloring: Sequence[int], graph: MomentGraph) -> List[CurveClass]:
    return [graph.curve(coloring[a], coloring[b]) for a, b in tree.edges]


def edge_weightings(tree: Tree, coloring: Sequence[int], beta: CurveClass,
                    nef: Sequence[DivisorClass], graph: MomentGraph) -> Iterator[Tuple[int, ...]]:
    """All weight vectors with 1 <= w(e) <= b_e and sum w(e) C_e = beta"""
    classes = edge_classes(tree, coloring, graph)
    edge_pairings = [[pair(m, c) for c in classes] for m in nef]
    beta_pairings = [pair(m, beta) for m in nef]

    bounds = []
    for e in range(len(classes)):
        bound = None
        for row, total in zip(edge_pairings, beta_pairings):
            rest = total - sum(row) + row[e]
            if rest < 0:
                return
            if row[e] > 0:
                bound = rest // row[e] if bound is None else min(bound, rest // row[e])
        if bound is None or bound < 1:
            return
        bounds.append(bound)

    for weights in product(*(range(1, b + 1) for b in bounds)):
        total = CurveClass.zero(len(beta.pairing))
        for w, c in zip(weights, classes):
            total = total + w * c
        if total == beta:
            yield weights


def markings(tree: Tree, m: int, support: Optional[List[Tuple[int, ...]]] = None) -> Iterator[Tuple[int, ...]]:
    """Every function from marks 1..m to vertices; marking[i-1] is the vertex of mark i"""
    if support is None:
        support = [tuple(range(tree.vertex_count))] * m
    return product(*support)


@dataclass(frozen=True)
class DecoratedGraph:
    """One torus-fixed stratum: tree, coloring, edge weights, marking and aut_c"""

    tree: Tree
    coloring: Tuple[int, ...]
    weights: Tuple[int, ...]
    marking: Tuple[int, ...]
    aut_c: int

    @property
    def m(self) -> int:
        return len(self.marking)

    def marks_at(self, vertex: int) -> List[int]:
        """1-based marks sitting on `vertex` (the set S_v)"""
        return [i + 1 for i, v in enumerate(self.marking) if v == vertex]

    def describe(self) -> str:
        return (f"edges={list(self.tree.edges)} coloring={list(self.coloring)} "
                f"weights={list(self.weights)} marking={list(self.marking)} aut_c={self.aut_c}")


def colored_trees(fan: Fan, beta: CurveClass, nef: Optional[Sequence[DivisorClass]] = None
                  ) -> Iterator[Tuple[Tree, Tuple[int, ...], int]]:
    """The (tree, coloring, aut_c) stream that parallel integration partitions"""
    nef = nef_generators(fan) if nef is None else list(nef)
    p = max_edges(fan, beta, nef)
    graph = moment_graph(fan)
    beta_pairings = [pair(m, beta) for m in nef]
    for tree in free_trees(p):
        for coloring, aut_c in colorings(tree, graph):
            classes = edge_classes(tree, coloring, graph)
            # all weights 1 already overshoots beta on some nef generator
            if any(sum(pair(m, c) for c in classes) > total for m, total in zip(nef, beta_pairings)):
                continue
            yield tree, coloring, aut_c


def expand_coloring(fan: Fan, tree: Tree, coloring: Tuple[int, ...], aut_c: int, beta: CurveClass, m: int,
                    nef: Sequence[DivisorClass], mark_support: Optional[MarkSupport] = None
                    ) -> Iterator[DecoratedGraph]:
    graph = moment_graph(fan)
    support = mark_support(tree, coloring) if mark_support is not None else None
    for weights in edge_weightings(tree, coloring, beta, nef, graph):
        for marking in markings(tree, m, support):
            yield DecoratedGraph(tree, coloring, weights, marking, aut_c)


def decorated_graphs(fan: Fan, beta: CurveClass, m: int, nef: Optional[Sequence[DivisorClass]] = None,
                     mark_support: Optional[MarkSupport] = None) -> Iterator[DecoratedGraph]:
    """
    All decorated graphs for (X, beta, m)

    Raises:
        NotEffective: If beta pairs negatively with a nef generator
        ZeroClass: If beta is zero
    """
    nef = nef_generators(fan) if nef is None else list(nef)
    for tree, coloring, aut_c in colored_trees(fan, beta, nef):
        yield from expand_coloring(fan, tree, coloring, aut_c, beta, m, nef, mark_support)


def count_decorated_graphs(fan: Fan, beta: CurveClass, m: int) -> int:
    return sum(1 for _ in decorated_graphs(fan, beta, m))
