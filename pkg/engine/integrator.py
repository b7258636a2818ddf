"""Atiyah-Bott localization sum over decorated graphs, with resampling and a process pool"""

import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt
from tqdm import tqdm

from localization.class_expr import IntegrandExpr, codimension, evaluate, render, top_level_ev_factors
from localization.equivariant import (
    EdgeOrientation, FlagData, Lambda, WeightAssignment, euler_inverse, sample_weights,
)
from localization.graphs import Tree, colored_trees, expand_coloring
from toric.cycles import CurveClass, DivisorClass, max_edges, nef_generators, virtual_dimension
from toric.fan import Fan
from utils.errors import DegenerateWeights, DimensionMismatchWarning, VerifyMismatch, WeightExhaustion

logger = logging.getLogger(__name__)


@dataclass
class IntegrationResult:
    """Exact value of one integrand plus run bookkeeping"""

    value: Fraction
    graph_count: int
    retries: int
    elapsed: float
    seed: Union[int, str]
    integrand: str = ""
    warnings: List[str] = field(default_factory=list)

    def formatted(self) -> str:
        return f"RESULT {self.value.numerator}/{self.value.denominator}"


@dataclass(frozen=True)
class _Task:
    fan: Fan
    beta: CurveClass
    m: int
    exprs: Tuple[IntegrandExpr, ...]
    nef: Tuple[DivisorClass, ...]
    weights: WeightAssignment
    orientation: EdgeOrientation
    push_sign: int
    chunk: Tuple[Tuple[Tree, Tuple[int, ...], int], ...]
    progress: bool = False


def _mark_support(task: _Task) -> Optional[Callable]:
    """Restrict each mark to vertices where its top-level ev factors do not vanish"""
    per_expr: List[Dict[int, list]] = []
    for expr in task.exprs:
        factors: Dict[int, list] = {}
        for ev in top_level_ev_factors(expr):
            factors.setdefault(ev.mark, []).append(ev.cls)
        per_expr.append(factors)
    if task.m == 0 or not all(per_expr):
        return None

    def support(tree: Tree, coloring: Tuple[int, ...]) -> List[Tuple[int, ...]]:
        allowed = []
        for mark in range(1, task.m + 1):
            vertices = set()
            for factors in per_expr:
                classes = factors.get(mark)
                if not classes:
                    vertices = set(range(tree.vertex_count))
                    break
                vertices.update(
                    v for v in range(tree.vertex_count)
                    if all(Lambda(task.fan, coloring[v], z, task.weights) != 0 for z in classes)
                )
            allowed.append(tuple(sorted(vertices)))
        return allowed

    return support


def _partial_sum(task: _Task) -> Tuple[List[Fraction], int]:
    """Exact partial sums of every integrand over one share of the (tree, coloring) stream"""
    sums = [Fraction(0)] * len(task.exprs)
    count = 0
    support = _mark_support(task)
    for tree, coloring, aut_c in tqdm(task.chunk, desc="colored trees", disable=not task.progress):
        for graph in expand_coloring(task.fan, tree, coloring, aut_c, task.beta, task.m, task.nef, support):
            count += 1
            fd = FlagData(task.fan, graph, task.weights, task.orientation, task.push_sign)
            values = [evaluate(expr, fd) for expr in task.exprs]
            if not any(values):
                continue
            weight = euler_inverse(fd) / (graph.aut_c * prod(graph.weights))
            for i, value in enumerate(values):
                sums[i] += value * weight
    return sums, count


def _localization_sum(fan: Fan, beta: CurveClass, m: int, exprs: Sequence[IntegrandExpr],
                      nef: Sequence[DivisorClass], weights: WeightAssignment, workers: int,
                      orientation: EdgeOrientation, push_sign: int, progress: bool) -> Tuple[List[Fraction], int]:
    items = tuple(colored_trees(fan, beta, nef))
    logger.info("Localization over %d colored trees with %d worker(s)", len(items), workers)

    def task(chunk, show) -> _Task:
        return _Task(fan, beta, m, tuple(exprs), tuple(nef), weights, orientation, push_sign, chunk, show)

    if workers <= 1 or len(items) <= 1:
        return _partial_sum(task(items, progress))

    chunks = [items[k::workers] for k in range(workers)]
    totals = [Fraction(0)] * len(exprs)
    count = 0
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_partial_sum, task(chunk, False)) for chunk in chunks if chunk]
        for future in tqdm(as_completed(futures), total=len(futures), desc="workers", disable=not progress):
            sums, partial_count = future.result()
            logger.debug("Worker partial sums: %s over %d graphs", sums, partial_count)
            totals = [a + b for a, b in zip(totals, sums)]
            count += partial_count
    return totals, count


def _attempt_seed(seed: int, attempt: int) -> Union[int, str]:
    return seed if attempt == 1 else f"{seed}:{attempt}"


def integrate_many(fan: Fan, beta: CurveClass, m: int, exprs: Sequence[IntegrandExpr], seed: int = 0,
                   workers: int = 1, orientation: EdgeOrientation = EdgeOrientation.LOWER_FIRST,
                   push_sign: int = 1, max_attempts: int = 5, progress: bool = False) -> List[IntegrationResult]:
    """
    Integrate several integrands over M_{0,m}(X, beta) on one shared graph stream

    Integrands whose codimension differs from the virtual dimension give 0
    and a DimensionMismatchWarning.

    Raises:
        NotProjective, NotEffective, ZeroClass, WeightExhaustion
    """
    start = time.perf_counter()
    nef = nef_generators(fan)
    p = max_edges(fan, beta, nef)
    vdim = virtual_dimension(fan, beta, m)
    logger.info("beta=%s, m=%d: virtual dimension %d, at most %d edges", list(beta.pairing), m, vdim, p)

    results: List[Optional[IntegrationResult]] = [None] * len(exprs)
    active = []
    for i, expr in enumerate(exprs):
        codim = codimension(expr, fan, beta)
        if codim != vdim:
            message = f"integrand {render(expr)} has codimension {codim}, virtual dimension is {vdim}"
            warnings.warn(message, DimensionMismatchWarning)
            logger.warning("Dimension mismatch: %s", message)
            results[i] = IntegrationResult(Fraction(0), 0, 0, 0.0, seed, render(expr), [message])
        else:
            active.append(i)

    if active:
        attempt_number = 0
        try:
            for attempt in Retrying(stop=stop_after_attempt(max_attempts),
                                    retry=retry_if_exception_type(DegenerateWeights)):
                with attempt:
                    attempt_number = attempt.retry_state.attempt_number
                    weights = sample_weights(fan.r, _attempt_seed(seed, attempt_number))
                    logger.debug("Attempt %d with weights %s", attempt_number, weights.omegas)
                    sums, count = _localization_sum(fan, beta, m, [exprs[i] for i in active], nef, weights,
                                                    workers, orientation, push_sign, progress)
        except RetryError as e:
            raise WeightExhaustion(f"{max_attempts} weight samples were all degenerate") from e

        elapsed = time.perf_counter() - start
        for i, value in zip(active, sums):
            results[i] = IntegrationResult(value, count, attempt_number - 1, elapsed, seed, render(exprs[i]))
            logger.info("Integrated %s = %s over %d graphs (%d retries, %.2fs)",
                        render(exprs[i]), value, count, attempt_number - 1, elapsed)
    return results


def integrate_ab(fan: Fan, beta: CurveClass, m: int, expr: IntegrandExpr, seed: int = 0,
                 **options) -> IntegrationResult:
    """Sum of evaluate * euler_inverse / (aut_c * prod w) over all decorated graphs"""
    return integrate_many(fan, beta, m, [expr], seed, **options)[0]


def verify_integration(fan: Fan, beta: CurveClass, m: int, exprs: Sequence[IntegrandExpr], seed: int = 0,
                       **options) -> List[IntegrationResult]:
    """
    Integrate with two independent seeds and require identical values

    Raises:
        VerifyMismatch: If the two runs disagree
    """
    first = integrate_many(fan, beta, m, exprs, seed, **options)
    second = integrate_many(fan, beta, m, exprs, seed + 1, **options)
    for a, b in zip(first, second):
        if a.value != b.value:
            raise VerifyMismatch(f"{a.integrand}: seed {seed} gave {a.value}, seed {seed + 1} gave {b.value}")
    return first
