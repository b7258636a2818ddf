# utils/display.py
"""Plain-text rendering for moment graphs, nef tables and integration results"""

from typing import Any, Dict, List, Sequence

import click


def _table(headers: Sequence[str], rows: List[Sequence[Any]]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def format_moment_graph(data: Dict[str, Any]) -> str:
    """
    Render the rays, cones and wall classes of a moment graph

    Args:
        data: Output of ToricTools.get_moment_graph

    Returns:
        Text with a ray table, a cone table and the mg[i,j] entries
    """
    rays = _table(["ray", "vector"], [(f"D{k + 1}", ray) for k, ray in enumerate(data["rays"])])
    cones = _table(["cone", "rays"], [(k + 1, cone) for k, cone in enumerate(data["cones"])])
    entries = _table(
        ["entry", "facet", "pairing with D1..Dr"],
        [(f"mg[{e['i']},{e['j']}]", e["facet"], e["pairing"]) for e in data["entries"]],
    )
    return "\n\n".join([click.style("Rays", bold=True), rays, click.style("Maximal cones", bold=True), cones,
                        click.style("Moment graph", bold=True), entries])


def format_nef(data: Dict[str, Any]) -> str:
    """Nef generators as rows, Mori generators as columns"""
    headers = ["nef generator"] + [f"C{k + 1}" for k in range(len(data["mori"]))]
    rows = [[coeffs] + pairings for coeffs, pairings in zip(data["nef"], data["pairings"])]
    legend = "\n".join(f"C{k + 1} = {c}" for k, c in enumerate(data["mori"]))
    return _table(headers, rows) + "\n\n" + legend


def format_results(results: Sequence[Any], verbose: bool = False) -> str:
    lines = []
    for result in results:
        lines.append(result.formatted())
        if verbose:
            lines.append(f"  {result.integrand}: {result.graph_count} graphs, {result.retries} retries, "
                         f"{result.elapsed:.2f}s, seed {result.seed}")
    return "\n".join(lines)
