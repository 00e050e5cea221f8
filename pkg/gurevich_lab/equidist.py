"""Equidistribution and large deviations of trivial-holonomy loops.

Loops of a fixed length ``n`` with trivial holonomy are averaged through
their empirical edge measures and compared with the equilibrium state of
``f + <xi, psi_ab>``. Nothing here enumerates loops: rotating a loop keeps
its holonomy trivial, so the averaged measure of an edge ``(i, j)`` is the
share of loops whose first edge is ``(i, j)``, which the reverse DP layers
of the extension count directly.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from gurevich_lab.abelian import (
    AbelianData,
    CriticalPoint,
    minimize_beta,
    tilted_potential,
)
from gurevich_lab.exceptions import BallTooLarge, InputError, NoOrbits
from gurevich_lab.extension import Count, SkewSystem, edge_weights, holonomy_layers
from gurevich_lab.groups import DEFAULT_BALL_CAP
from gurevich_lab.sft import Edge, Loop
from gurevich_lab.thermo import EdgePotential, MarkovMeasure, equilibrium_measure

logger = logging.getLogger(__name__)

QUANTUM = 1e-3
DEVIATION_SLACK = 1e-12


@dataclass(frozen=True)
class EmpiricalEdgeMeasure:
    """Probability vector on the allowed edges."""

    weights: Mapping[Edge, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(value < 0 for value in self.weights.values()):
            raise InputError("weights", "edge weights must be nonnegative")
        if self.weights and abs(math.fsum(self.weights.values()) - 1.0) > 1e-9:
            raise InputError("weights", "edge weights must sum to one")

    def integrate(self, F: EdgePotential) -> float:
        return math.fsum(
            weight * F.values[edge] for edge, weight in sorted(self.weights.items())
        )


def orbit_empirical(loop: Loop) -> EmpiricalEdgeMeasure:
    """Edge visit frequencies along a loop, wrap-around included."""
    weights: Dict[Edge, float] = {}
    for edge in loop.edges():
        weights[edge] = weights.get(edge, 0.0) + 1.0
    return EmpiricalEdgeMeasure({edge: count / loop.length for edge, count in weights.items()})


def total_variation(
    p: Mapping[Edge, float], q: Mapping[Edge, float]
) -> float:
    """Half the l1 distance between two edge vectors."""
    edges = sorted(set(p) | set(q))
    return 0.5 * math.fsum(abs(p.get(edge, 0.0) - q.get(edge, 0.0)) for edge in edges)


def _start_first_edges(
    skew: SkewSystem,
    start: int,
    n: int,
    weights: Optional[Mapping[Edge, float]],
    cap: int,
) -> Tuple[Dict[Edge, Count], List[Count]]:
    """Trivial loops at ``start`` by first edge, plus totals for every ``m <= n``."""
    group = skew.group
    layers = holonomy_layers(skew, start, n - 1, weights, True, cap)
    exits = [
        (j, group._inv(skew.labels[(start, j)]), weights[(start, j)] if weights else 1)
        for j in skew.base.successors(start)
    ]
    totals: List[Count] = []
    for m in range(1, n + 1):
        layer = layers[m - 1]
        totals.append(sum(layer.get((j, g), 0) * w for j, g, w in exits))
    by_edge = {
        (start, j): layers[n - 1].get((j, g), 0) * w for j, g, w in exits
    }
    return by_edge, totals


def _first_edge_table(
    skew: SkewSystem,
    n: int,
    f: Optional[EdgePotential],
    threads: int,
    cap: int,
) -> Tuple[Dict[Edge, Count], List[Count]]:
    if n < 1:
        raise InputError("n", "loop length must be positive")
    weights = edge_weights(f)
    starts = range(skew.base.alphabet_size)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda v: _start_first_edges(skew, v, n, weights, cap), starts)
            )
    else:
        results = [_start_first_edges(skew, v, n, weights, cap) for v in starts]
    by_edge: Dict[Edge, Count] = {}
    for part, _ in results:
        by_edge.update(part)
    totals = [
        math.fsum(result[1][m] for result in results)
        if weights is not None
        else sum(result[1][m] for result in results)
        for m in range(n)
    ]
    return by_edge, totals


def _residue(n: int, totals: List[Count]) -> str:
    period = 0
    for m, total in enumerate(totals, start=1):
        if total:
            period = math.gcd(period, m)
    if period == 0:
        return f"no trivial-holonomy loop of length <= {n}"
    return f"n = {n % period} mod {period}"


def averaged_edge_measure(
    skew: SkewSystem,
    n: int,
    f: Optional[EdgePotential] = None,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> EmpiricalEdgeMeasure:
    """Average of the empirical measures of all trivial-holonomy ``n``-loops.

    Loops are weighted by ``exp(f^n)`` (plain counts when ``f`` is omitted).

    Raises:
        NoOrbits: When no such loop exists; the error names the residue class
            of ``n`` that is empty.
    """
    by_edge, totals = _first_edge_table(skew, n, f, threads, cap)
    total = totals[-1]
    if not total:
        raise NoOrbits(n, _residue(n, totals))
    return EmpiricalEdgeMeasure(
        {edge: _ratio(value, total) for edge, value in sorted(by_edge.items())}
    )


def _ratio(part: Count, whole: Count) -> float:
    # int / int stays exact until the final rounding, even for huge counts
    return float(part / whole)


def equilibrium_at_minimum(
    data: AbelianData, point: Optional[CriticalPoint] = None
) -> MarkovMeasure:
    """Equilibrium state of ``f + <xi, psi_ab>`` at the minimizer ``xi`` of beta."""
    point = point if point is not None else minimize_beta(data)
    return equilibrium_measure(data.skew_ab.base, tilted_potential(data, point.xi))


def equidistribution_distance(
    skew: SkewSystem,
    n: int,
    data: AbelianData,
    point: Optional[CriticalPoint] = None,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> float:
    """Edge total variation between averaged loops and the tilted equilibrium.

    Raises:
        NoOrbits: When ``n`` lies in an empty residue class.
        NotFull: When ``beta`` has no minimum.
    """
    averaged = averaged_edge_measure(skew, n, data.f, threads, cap)
    marginal = equilibrium_at_minimum(data, point).edge_marginal()
    expected = {(i, j): float(marginal[i, j]) for i, j in skew.base.edges}
    distance = total_variation(averaged.weights, expected)
    logger.debug("n=%d: edge TV distance %.6g", n, distance)
    return distance


def _quantized(F: EdgePotential) -> Dict[Edge, int]:
    return {edge: int(round(value / QUANTUM)) for edge, value in F.values.items()}


def _start_deviations(
    skew: SkewSystem,
    start: int,
    n: int,
    steps: Mapping[Edge, int],
    target: float,
    delta: float,
    cap: int,
) -> Tuple[int, int]:
    group = skew.group
    e = group.identity()
    moves = [
        [(j, skew.labels[(i, j)], steps[(i, j)]) for j in skew.base.successors(i)]
        for i in range(skew.base.alphabet_size)
    ]
    layer: Dict[Tuple[int, object, int], int] = {(start, e, 0): 1}
    for level in range(1, n + 1):
        following: Dict[Tuple[int, object, int], int] = {}
        for (vertex, g, total), value in layer.items():
            for other, label, step in moves[vertex]:
                key = (other, group._mul(g, label), total + step)
                following[key] = following.get(key, 0) + value
        if len(following) > cap:
            raise BallTooLarge(level, len(following), cap)
        layer = following
    closed = 0
    deviating = 0
    for (vertex, g, total), value in layer.items():
        if vertex != start or g != e:
            continue
        closed += value
        if abs(total * QUANTUM / n - target) >= delta - DEVIATION_SLACK:
            deviating += value
    return deviating, closed


def deviation_fraction(
    skew: SkewSystem,
    n: int,
    data: AbelianData,
    F: EdgePotential,
    delta: float,
    point: Optional[CriticalPoint] = None,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> float:
    """Share of trivial ``n``-loops whose average of ``F`` is ``delta``-far from ``int F d mu_xi``.

    ``F`` is snapped to a ``1e-3`` grid so the DP over
    ``(vertex, holonomy, sum of F)`` stays finite.

    Raises:
        NoOrbits: When no trivial-holonomy loop of length ``n`` exists.
    """
    if delta <= 0:
        raise InputError("delta", "delta must be positive")
    F.check_on(skew.base)
    mm = equilibrium_at_minimum(data, point)
    marginal = mm.edge_marginal()
    target = math.fsum(
        float(marginal[i, j]) * F.values[(i, j)] for i, j in skew.base.edges
    )
    steps = _quantized(F)
    starts = range(skew.base.alphabet_size)

    def run(start: int) -> Tuple[int, int]:
        return _start_deviations(skew, start, n, steps, target, delta, cap)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(start) for start in starts]
    deviating = sum(result[0] for result in results)
    closed = sum(result[1] for result in results)
    if not closed:
        _, totals = _first_edge_table(skew, n, None, 1, cap)
        raise NoOrbits(n, _residue(n, totals))
    logger.debug("n=%d: %d of %d loops deviate by >= %g", n, deviating, closed, delta)
    return _ratio(deviating, closed)


def ld_ratio(
    skew: SkewSystem,
    n: int,
    data: AbelianData,
    F: EdgePotential,
    delta: float,
    point: Optional[CriticalPoint] = None,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> float:
    """``log(deviation_fraction) / n``; ``-inf`` when nothing deviates."""
    fraction = deviation_fraction(skew, n, data, F, delta, point, threads, cap)
    if fraction == 0.0:
        return -math.inf
    return math.log(fraction) / n
