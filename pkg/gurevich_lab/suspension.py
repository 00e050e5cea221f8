"""Suspension flows over shifts of finite type with an edge-constant roof.

A loop ``x0 .. x(n-1)`` gives a closed flow orbit of period ``r^n(x)``, the
roof summed along the loop. Orbits are counted up to rotation, i.e. as
prime periodic orbits of the flow.
"""
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from gurevich_lab.abelian import AbelianData, minimize_beta
from gurevich_lab.exceptions import BracketFailure, DepthTooLarge, InputError
from gurevich_lab.extension import (
    GrowthEstimate,
    SkewSystem,
    check_transitivity,
    counts_with_method,
    fit_counts,
)
from gurevich_lab.groups import DEFAULT_BALL_CAP, FiniteTable
from gurevich_lab.helpers import divisors, mobius
from gurevich_lab.sft import Sft, count_periodic, count_prime_orbits, enumerate_loops
from gurevich_lab.thermo import EdgePotential, pressure_root, root_bracket
from scipy.optimize import bisect

logger = logging.getLogger(__name__)

DEFAULT_DEPTH_CAP = 64
PERIOD_SLACK = 1e-9

# (roof class multiplicities) -> number of based loops
Spectrum = Dict[Tuple[int, ...], int]


@dataclass(frozen=True)
class Suspension:
    """Flow under the roof ``r`` over ``base``; ``r`` must be strictly positive."""

    base: Sft
    roof: EdgePotential

    def __post_init__(self) -> None:
        self.roof.check_on(self.base)
        if not self.roof.is_roof():
            raise InputError("roof", "roof function must be strictly positive")

    def max_length(self, T: float) -> int:
        """Longest loop that can close up with period at most ``T``."""
        return int(math.floor(T / self.roof.minimum() + PERIOD_SLACK))


@dataclass(frozen=True)
class FlowOrbitRow:
    """Cumulative flow orbit counts with period at most ``T``.

    Attributes:
        T: Period bound.
        count_all: Periodic points of the base (based loops).
        prime_count: Prime flow orbits.
        count_trivial_class: Prime flow orbits with trivial holonomy.
    """

    T: float
    count_all: int
    prime_count: int
    count_trivial_class: int


@dataclass(frozen=True)
class _OrbitSpectrum:
    """Counts per orbit period, keyed by the rounded period."""

    based: Dict[float, int]
    prime: Dict[float, int]
    trivial: Dict[float, int]

    def cumulative(self, T: float) -> FlowOrbitRow:
        def upto(table: Dict[float, int]) -> int:
            return sum(count for period, count in table.items() if period <= T + PERIOD_SLACK)

        return FlowOrbitRow(T, upto(self.based), upto(self.prime), upto(self.trivial))


def _period_key(value: float) -> float:
    return round(value, 9)


def _roof_classes(roof: EdgePotential) -> Tuple[List[float], Dict[Tuple[int, int], int]]:
    levels = sorted(set(roof.values.values()))
    return levels, {edge: levels.index(value) for edge, value in roof.values.items()}


def _class_period(levels: Sequence[float], multiplicities: Tuple[int, ...]) -> float:
    return math.fsum(level * count for level, count in zip(levels, multiplicities))


def _mobius_prime(
    based: Dict[int, Spectrum], n: int, multiplicities: Tuple[int, ...]
) -> int:
    """Points of least period ``n`` with the given roof multiplicities."""
    total = 0
    for d in divisors(n):
        k = n // d
        if any(count % k for count in multiplicities):
            continue
        total += mobius(k) * based.get(d, {}).get(
            tuple(count // k for count in multiplicities), 0
        )
    return total


def _start_spectrum(
    susp: Suspension,
    skew: Optional[SkewSystem],
    start: int,
    n_max: int,
    T: float,
    levels: Sequence[float],
    classes: Dict[Tuple[int, int], int],
) -> Tuple[Dict[int, Spectrum], Dict[int, Spectrum]]:
    """Based loops at ``start`` by length and roof multiplicities (all, trivial)."""
    group = skew.group if skew is not None else None
    e = group.identity() if group is not None else None
    moves = [
        [(j, classes[(i, j)], skew.labels[(i, j)] if skew is not None else None)
         for j in susp.base.successors(i)]
        for i in range(susp.base.alphabet_size)
    ]
    zero = (0,) * len(levels)
    layer: Dict[Tuple[int, object, Tuple[int, ...]], int] = {(start, e, zero): 1}
    based_all: Dict[int, Spectrum] = {}
    based_trivial: Dict[int, Spectrum] = {}
    for n in range(1, n_max + 1):
        following: Dict[Tuple[int, object, Tuple[int, ...]], int] = {}
        for (vertex, g, counts), value in layer.items():
            for other, level, label in moves[vertex]:
                raised = counts[:level] + (counts[level] + 1,) + counts[level + 1:]
                if _class_period(levels, raised) > T + PERIOD_SLACK:
                    continue
                h = group._mul(g, label) if group is not None else None
                key = (other, h, raised)
                following[key] = following.get(key, 0) + value
        layer = following
        for (vertex, g, counts), value in layer.items():
            if vertex != start:
                continue
            row = based_all.setdefault(n, {})
            row[counts] = row.get(counts, 0) + value
            if g == e:
                trivial_row = based_trivial.setdefault(n, {})
                trivial_row[counts] = trivial_row.get(counts, 0) + value
    return based_all, based_trivial


def _merge(parts: Sequence[Dict[int, Spectrum]]) -> Dict[int, Spectrum]:
    merged: Dict[int, Spectrum] = {}
    for part in parts:
        for n, row in part.items():
            target = merged.setdefault(n, {})
            for counts, value in row.items():
                target[counts] = target.get(counts, 0) + value
    return merged


def _dp_spectrum(
    susp: Suspension, skew: Optional[SkewSystem], T: float, n_max: int, threads: int
) -> _OrbitSpectrum:
    levels, classes = _roof_classes(susp.roof)
    starts = range(susp.base.alphabet_size)

    def run(start: int) -> Tuple[Dict[int, Spectrum], Dict[int, Spectrum]]:
        return _start_spectrum(susp, skew, start, n_max, T, levels, classes)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(start) for start in starts]
    based_all = _merge([result[0] for result in results])
    based_trivial = _merge([result[1] for result in results])
    if skew is None:
        based_trivial = based_all
    spectrum = _OrbitSpectrum(Counter(), Counter(), Counter())
    for n, row in based_all.items():
        for counts, value in row.items():
            period = _period_key(_class_period(levels, counts))
            spectrum.based[period] += value
            spectrum.prime[period] += _mobius_prime(based_all, n, counts) // n
    for n, row in based_trivial.items():
        for counts in row:
            period = _period_key(_class_period(levels, counts))
            spectrum.trivial[period] += _mobius_prime(based_trivial, n, counts) // n
    return spectrum


def _constant_spectrum(
    susp: Suspension,
    skew: Optional[SkewSystem],
    n_max: int,
    threads: int,
    cap: int,
) -> _OrbitSpectrum:
    """Constant roof: discrete counts scaled by the roof value."""
    height = susp.roof.minimum()
    spectrum = _OrbitSpectrum(Counter(), Counter(), Counter())
    if n_max < 1:
        return spectrum
    trivial_counts: List[int]
    if skew is None:
        trivial_counts = [count_periodic(susp.base, n) for n in range(1, n_max + 1)]
    else:
        counts, _, _ = counts_with_method(skew, n_max, None, "auto", threads, cap)
        trivial_counts = [int(count) for count in counts]
    for n in range(1, n_max + 1):
        period = _period_key(n * height)
        spectrum.based[period] += count_periodic(susp.base, n)
        spectrum.prime[period] += count_prime_orbits(susp.base, n)
        primes = sum(mobius(n // d) * trivial_counts[d - 1] for d in divisors(n))
        spectrum.trivial[period] += primes // n
    return spectrum


def _enumerated_spectrum(
    susp: Suspension, skew: SkewSystem, T: float, n_max: int
) -> _OrbitSpectrum:
    """Exact enumeration; needed when holonomies have torsion."""
    spectrum = _OrbitSpectrum(Counter(), Counter(), Counter())
    e = skew.group.identity()
    prime_loops: Counter = Counter()
    trivial_loops: Counter = Counter()
    for n in range(1, n_max + 1):
        for loop in enumerate_loops(susp.base, n):
            period_value = math.fsum(susp.roof.values[edge] for edge in loop.edges())
            if period_value > T + PERIOD_SLACK:
                continue
            period = _period_key(period_value)
            spectrum.based[period] += 1
            if loop.is_prime():
                prime_loops[(n, period)] += 1
                if skew.holonomy(loop) == e:
                    trivial_loops[(n, period)] += 1
    # a prime orbit of length n is met once per rotation
    for (n, period), count in prime_loops.items():
        spectrum.prime[period] += count // n
    for (n, period), count in trivial_loops.items():
        spectrum.trivial[period] += count // n
    return spectrum


def _spectrum(
    susp: Suspension,
    T: float,
    skew: Optional[SkewSystem],
    threads: int,
    depth_cap: int,
    cap: int,
) -> _OrbitSpectrum:
    n_max = susp.max_length(T)
    if n_max > depth_cap:
        raise DepthTooLarge(n_max, depth_cap)
    if skew is not None and skew.base != susp.base:
        raise InputError("class_filter", "extension lives over a different base shift")
    if skew is not None and isinstance(skew.group, FiniteTable):
        return _enumerated_spectrum(susp, skew, T, n_max)
    if susp.roof.is_constant():
        return _constant_spectrum(susp, skew, n_max, threads, cap)
    return _dp_spectrum(susp, skew, T, n_max, threads)


def count_flow_orbits(
    susp: Suspension,
    T: float,
    class_filter: Optional[SkewSystem] = None,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> int:
    """Number of prime flow orbits with period at most ``T``.

    With ``class_filter`` only orbits of trivial holonomy are counted.

    Raises:
        DepthTooLarge: When ``T / min r`` exceeds ``depth_cap``.
    """
    if T <= 0:
        raise InputError("T", "period bound must be positive")
    row = _spectrum(susp, T, class_filter, threads, depth_cap, cap).cumulative(T)
    return row.count_trivial_class if class_filter is not None else row.prime_count


def flow_orbit_table(
    susp: Suspension,
    T_max: int,
    skew: Optional[SkewSystem] = None,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> List[FlowOrbitRow]:
    """Cumulative counts for ``T = 1, 2, .., T_max`` from a single pass.

    Without ``skew`` every orbit belongs to the trivial class.
    """
    if T_max < 1:
        raise InputError("T_max", "T_max must be at least 1")
    spectrum = _spectrum(susp, float(T_max), skew, threads, depth_cap, cap)
    return [spectrum.cumulative(float(T)) for T in range(1, T_max + 1)]


def flow_entropy(susp: Suspension) -> float:
    """Topological entropy of the flow: the zero of ``s -> P(-s r)``.

    Raises:
        NotAperiodic: When the base shift is not mixing.
    """
    return pressure_root(susp.base, susp.roof)


def cover_entropy_abelian(
    susp: Suspension, data: AbelianData, tol: float = 1e-10
) -> float:
    """Entropy of the flow lifted to the ``Z^a`` cover.

    The unique ``s`` with ``inf_w P(-s r + f + <w, psi_ab>) = 0``; the outer
    function is strictly decreasing in ``s`` and is bisected on the same
    bracket as the flow entropy.

    Raises:
        NotFull: When the holonomies lie in a closed half-space.
    """
    if data.skew_ab.base != susp.base:
        raise InputError("data", "abelian data lives over a different base shift")
    offset = data.f if data.f is not None else EdgePotential.zero(susp.base)

    def tilted_minimum(s: float) -> float:
        return minimize_beta(data.with_potential(susp.roof * -s + offset)).value

    bound = root_bracket(susp.base, susp.roof, data.f)
    low, high = tilted_minimum(-bound), tilted_minimum(bound)
    if not (low > 0 > high):
        raise BracketFailure(
            f"no sign change of the cover pressure on [{-bound}, {bound}]: {low}, {high}"
        )
    root = float(bisect(tilted_minimum, -bound, bound, xtol=tol, maxiter=500))
    logger.debug("cover entropy %.12g", root)
    return root


def cover_entropy_counting(
    susp: Suspension,
    skew: SkewSystem,
    T_max: int,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
    depth: int = 6,
) -> GrowthEstimate:
    """Growth rate of trivial-class orbits counted up to ``T = 1 .. T_max``.

    The fit uses the upper half of the grid, as for discrete counts.
    Extensions that are not known to be transitive are still counted; the
    status found at ``depth`` is kept in ``transitivity``.
    """
    status = check_transitivity(skew, depth)
    if not status.transitive:
        logger.warning("counting flow orbits of a %s extension", status.status.value)
    table = flow_orbit_table(susp, T_max, skew, depth_cap, threads, cap)
    estimate = fit_counts([row.count_trivial_class for row in table], method="flow")
    estimate = replace(estimate, transitivity=status.status.value)
    logger.info("flow cover entropy estimate %.6f up to T=%d", estimate.rate, T_max)
    return estimate
