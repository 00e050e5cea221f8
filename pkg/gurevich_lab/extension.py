import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import (
    Any,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import networkx as nx
import numpy as np
from gurevich_lab.exceptions import (
    AllZeroCounts,
    BallTooLarge,
    ExtraLabel,
    MissingLabel,
    NotIrreducible,
    UnsupportedShape,
)
from gurevich_lab.groups import (
    DEFAULT_BALL_CAP,
    FiniteTable,
    Free,
    Group,
    GroupElement,
    Lattice,
    ball,
)
from gurevich_lab.helpers import fit_growth, log_count, spectral_radius, upper_half
from gurevich_lab.sft import Edge, Loop, Sft, enumerate_loops, irreducibility
from gurevich_lab.thermo import EdgePotential, pressure
from scipy import sparse
from scipy.optimize import linprog

logger = logging.getLogger(__name__)

Count = Union[int, float]
State = Tuple[int, Any]
Layer = Dict[State, Count]

FIT_WINDOW = "[n_max // 2, n_max], nonzero counts only"


@dataclass(frozen=True)
class SkewSystem:
    """Skew-product extension ``T(x, g) = (sigma x, g psi(x0, x1))``.

    Build instances with [make_skew][gurevich_lab.extension.make_skew], which
    validates the labels and attaches the abelianized system.
    """

    base: Sft
    group: Group
    labels: Mapping[Edge, GroupElement]
    abelian: Optional["SkewSystem"] = field(default=None, compare=False, repr=False)

    def abelianized(self) -> "SkewSystem":
        """The extension by ``Z^a`` obtained by abelianizing every label."""
        if self.abelian is None:
            return self
        return self.abelian

    def holonomy(self, loop: Loop) -> GroupElement:
        """Ordered product of the labels along a loop, wrap-around included."""
        result = self.group.identity()
        for edge in loop.edges():
            result = self.group._mul(result, self.labels[edge])
        return result

    def describe(self) -> Dict[str, Any]:
        """Canonical JSON-compatible description used for content hashing."""
        return {
            "alphabet_size": self.base.alphabet_size,
            "edges": [list(edge) for edge in self.base.edges],
            "group": self.group.describe(),
            "labels": [
                [i, j, list(g) if isinstance(g, tuple) else g]
                for (i, j), g in sorted(self.labels.items())
            ],
        }


class TransitivityStatus(str, enum.Enum):
    TRANSITIVE = "transitive"
    INTRANSITIVE = "intransitive"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Transitivity:
    status: TransitivityStatus
    witness: Optional[Dict[str, Any]] = None
    depth: Optional[int] = None

    @property
    def transitive(self) -> bool:
        return self.status is TransitivityStatus.TRANSITIVE


@dataclass(frozen=True)
class GrowthEstimate:
    """Fit of ``log Z_n = rate n - poly_exponent log n + c``.

    Attributes:
        rate: Fitted exponential growth rate.
        poly_exponent: Fitted polynomial correction ``kappa``.
        n_range: Fitting window (inclusive).
        residual: Root mean square error of the fit.
        counts: Raw counts ``Z_1 .. Z_n_max``.
        layer_sizes: DP states in the widest layer used for each ``n``.
        method: ``dp``, ``radial`` or ``flow``.
        window: Description of the fitting window policy.
        transitivity: Transitivity status the counts were taken under, when
            it was checked.
    """

    rate: float
    poly_exponent: float
    n_range: Tuple[int, int]
    residual: float
    counts: Tuple[Count, ...]
    layer_sizes: Tuple[int, ...] = ()
    method: str = "dp"
    window: str = FIT_WINDOW
    transitivity: Optional[str] = None


def make_skew(
    sft: Sft, group: Group, labels: Mapping[Edge, GroupElement]
) -> SkewSystem:
    """Validate edge labels and build the extension with its abelianization.

    Raises:
        MissingLabel: When an allowed transition has no label.
        ExtraLabel: When a label sits on a forbidden transition.
        KindMismatch: When a label is not an element of ``group``.
    """
    allowed = set(sft.edges)
    extra = sorted(edge for edge in labels if edge not in allowed)
    if extra:
        raise ExtraLabel("labels", f"labels on forbidden transitions {extra}")
    missing = sorted(edge for edge in allowed if edge not in labels)
    if missing:
        raise MissingLabel("labels", f"no label on transitions {missing}")
    for g in labels.values():
        group._check(g)
    frozen = dict(sorted(labels.items()))
    abelian = None
    if not isinstance(group, Lattice):
        abelian = SkewSystem(
            sft,
            Lattice(group.abelian_rank),
            {edge: group.abelianize(g) for edge, g in frozen.items()},
        )
    return SkewSystem(sft, group, frozen, abelian)


def labels_by_source(sft: Sft, letters: Sequence[GroupElement]) -> Dict[Edge, GroupElement]:
    """Labels depending on the first symbol only: ``psi(i, j) = letters[i]``."""
    return {(i, j): letters[i] for i, j in sft.edges}


def _transitions(
    skew: SkewSystem, weights: Optional[Mapping[Edge, float]], reverse: bool
) -> List[List[Tuple[int, GroupElement, Count]]]:
    base = skew.base
    table: List[List[Tuple[int, GroupElement, Count]]] = [
        [] for _ in range(base.alphabet_size)
    ]
    for i, j in base.edges:
        weight: Count = weights[(i, j)] if weights is not None else 1
        if reverse:
            table[j].append((i, skew.labels[(i, j)], weight))
        else:
            table[i].append((j, skew.labels[(i, j)], weight))
    return table


def holonomy_layers(
    skew: SkewSystem,
    start: int,
    depth: int,
    weights: Optional[Mapping[Edge, float]],
    reverse: bool,
    cap: int,
) -> List[Layer]:
    """Path weights by (endpoint, holonomy), one dictionary per length.

    Forward layers hold paths ``start -> w`` with holonomy ``g``; reverse
    layers hold paths ``w -> start`` with holonomy ``g``.
    """
    group = skew.group
    mul = group._mul
    moves = _transitions(skew, weights, reverse)
    layers: List[Layer] = [{(start, group.identity()): 1 if weights is None else 1.0}]
    for level in range(1, depth + 1):
        current: Layer = {}
        for (vertex, g), value in layers[-1].items():
            for other, label, weight in moves[vertex]:
                key = (other, mul(label, g) if reverse else mul(g, label))
                current[key] = current.get(key, 0) + value * weight
        if len(current) > cap:
            raise BallTooLarge(level, len(current), cap)
        logger.debug("start %d level %d: %d states", start, level, len(current))
        layers.append(current)
    return layers


def _pair(
    group: Group, forward: Layer, backward: Layer, exact: bool
) -> Count:
    inv = group._inv
    if exact:
        total = 0
        for (vertex, g), value in forward.items():
            other = backward.get((vertex, inv(g)))
            if other:
                total += value * other
        return total
    terms = []
    for key in sorted(forward, key=_sort_key):
        other = backward.get((key[0], inv(key[1])))
        if other:
            terms.append(forward[key] * other)
    return math.fsum(terms)


def _sort_key(state: State) -> Tuple[int, str]:
    return state[0], repr(state[1])


def _start_counts(
    skew: SkewSystem,
    start: int,
    lengths: Sequence[int],
    weights: Optional[Mapping[Edge, float]],
    cap: int,
) -> Tuple[List[Count], List[int]]:
    top = max(lengths)
    forward = holonomy_layers(skew, start, (top + 1) // 2, weights, False, cap)
    backward = holonomy_layers(skew, start, top // 2, weights, True, cap)
    exact = weights is None
    counts = []
    sizes = []
    for n in lengths:
        a, b = (n + 1) // 2, n // 2
        counts.append(_pair(skew.group, forward[a], backward[b], exact))
        sizes.append(len(forward[a]))
    return counts, sizes


def edge_weights(f: Optional[EdgePotential]) -> Optional[Dict[Edge, float]]:
    if f is None:
        return None
    return {edge: math.exp(value) for edge, value in f.values.items()}


def count_trivial_table(
    skew: SkewSystem,
    lengths: Sequence[int],
    f: Optional[EdgePotential] = None,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> Tuple[List[Count], List[int]]:
    """Trivial-holonomy periodic sums for each requested length.

    Meet-in-the-middle DP: for every start vertex ``v`` the forward layers
    from ``(v, e)`` of length ``ceil(n / 2)`` are paired with the reverse
    layers into ``(v, e)`` of length ``floor(n / 2)``. Every path of length
    ``m`` has holonomy in ``ball(m)``, so no truncation happens. Start
    vertices run in a thread pool and are folded in vertex order.

    Returns:
        Tuple ``(counts, layer_sizes)`` aligned with ``lengths``.
    """
    if not lengths or min(lengths) < 1:
        raise ValueError("lengths must be positive")
    if f is not None:
        f.check_on(skew.base)
    weights = edge_weights(f)
    starts = range(skew.base.alphabet_size)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(
                    lambda v: _start_counts(skew, v, lengths, weights, cap), starts
                )
            )
    else:
        results = [_start_counts(skew, v, lengths, weights, cap) for v in starts]
    counts: List[Count] = []
    sizes: List[int] = []
    for index in range(len(lengths)):
        column = [result[0][index] for result in results]
        counts.append(sum(column) if weights is None else math.fsum(column))
        sizes.append(sum(result[1][index] for result in results))
    return counts, sizes


def count_trivial(
    skew: SkewSystem,
    n: int,
    f: Optional[EdgePotential] = None,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> Count:
    """``Z_n``: sum of ``exp(f^n)`` over period-``n`` points with trivial holonomy.

    Exact integer when ``f`` is omitted.

    Raises:
        BallTooLarge: When a DP layer exceeds ``cap`` states.
    """
    return count_trivial_table(skew, [n], f, threads, cap)[0][0]


def count_trivial_sequence(
    skew: SkewSystem,
    n_max: int,
    f: Optional[EdgePotential] = None,
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> List[Count]:
    """``[Z_1, ..., Z_n_max]`` from one set of DP layers."""
    return count_trivial_table(skew, list(range(1, n_max + 1)), f, threads, cap)[0]


def count_trivial_bruteforce(
    skew: SkewSystem, n: int, f: Optional[EdgePotential] = None
) -> Count:
    """Oracle: enumerate every ``n``-loop and test its holonomy directly."""
    e = skew.group.identity()
    if f is None:
        return sum(1 for loop in enumerate_loops(skew.base, n) if skew.holonomy(loop) == e)
    return math.fsum(
        math.exp(sum(f.values[edge] for edge in loop.edges()))
        for loop in enumerate_loops(skew.base, n)
        if skew.holonomy(loop) == e
    )


def radial_free_rank(skew: SkewSystem) -> int:
    """Rank ``k`` when the system is a free-group walk on the full ``2k``-shift.

    Raises:
        UnsupportedShape: Unless the group is free of rank ``k``, the base is
            the full ``2k``-shift and the labels are single letters depending
            bijectively on the first (or on the second) symbol.
    """
    group, base = skew.group, skew.base
    if not isinstance(group, Free):
        raise UnsupportedShape("group", "radial counting needs a free group")
    k = group.rank
    if base.alphabet_size != 2 * k or len(base.edges) != 4 * k * k:
        raise UnsupportedShape("base", f"radial counting needs the full {2 * k}-shift")
    letters = set(range(1, k + 1)) | set(range(-k, 0))
    for index in (0, 1):
        per_symbol: Dict[int, Set[GroupElement]] = {}
        for edge, g in skew.labels.items():
            per_symbol.setdefault(edge[index], set()).add(g)
        if all(len(values) == 1 for values in per_symbol.values()):
            chosen = [next(iter(per_symbol[i])) for i in range(2 * k)]
            if all(
                isinstance(g, tuple) and len(g) == 1 for g in chosen
            ) and {g[0] for g in chosen} == letters:  # type: ignore[index]
                return k
    raise UnsupportedShape(
        "labels", "labels must be a bijection from symbols onto letters and inverses"
    )


def radial_free_table(skew: SkewSystem, n_max: int) -> Tuple[List[int], List[int]]:
    """Birth–death DP over distance from the identity in the ``2k``-regular tree.

    Returns:
        Tuple ``(counts, layer_sizes)``: closed walks of each length and the
        number of distances carrying walks after each step.
    """
    k = radial_free_rank(skew)
    up_from_root, up, down = 2 * k, 2 * k - 1, 1
    distribution = [1] + [0] * n_max
    counts: List[int] = []
    sizes: List[int] = []
    for step in range(1, n_max + 1):
        following = [0] * (n_max + 1)
        for distance in range(step):
            value = distribution[distance]
            if not value:
                continue
            if distance == 0:
                following[1] += value * up_from_root
            else:
                following[distance + 1] += value * up
                following[distance - 1] += value * down
        distribution = following
        counts.append(distribution[0])
        sizes.append(sum(1 for value in distribution if value))
    return counts, sizes


def count_trivial_radial_free_sequence(skew: SkewSystem, n_max: int) -> List[int]:
    return radial_free_table(skew, n_max)[0]


def count_trivial_radial_free(skew: SkewSystem, n: int) -> int:
    """Same value as count_trivial for free-group walks, in ``O(n^2)`` time."""
    return count_trivial_radial_free_sequence(skew, n)[-1]


def counts_with_method(
    skew: SkewSystem,
    n_max: int,
    f: Optional[EdgePotential] = None,
    method: str = "auto",
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> Tuple[List[Count], List[int], str]:
    """Count sequence by the requested method (``auto`` prefers ``radial``)."""
    if method in ("auto", "radial") and f is None:
        try:
            counts, sizes = radial_free_table(skew, n_max)
            return counts, sizes, "radial"
        except UnsupportedShape:
            if method == "radial":
                raise
    counts, sizes = count_trivial_table(
        skew, list(range(1, n_max + 1)), f, threads, cap
    )
    return counts, sizes, "dp"


def fit_counts(
    counts: Sequence[Count],
    layer_sizes: Sequence[int] = (),
    method: str = "dp",
) -> GrowthEstimate:
    """Fit the growth of ``Z_n`` over ``[n_max // 2, n_max]`` on nonzero ``n``.

    Raises:
        AllZeroCounts: When no count in the window is positive.
    """
    n_max = len(counts)
    window = [n for n in upper_half(range(1, n_max + 1), n_max) if counts[n - 1] > 0]
    if not window:
        raise AllZeroCounts(
            f"all counts vanish on [{n_max // 2}, {n_max}] "
            "(intransitive extension or parity obstruction)"
        )
    rate, kappa, _, residual = fit_growth(
        window, [log_count(counts[n - 1]) for n in window]
    )
    return GrowthEstimate(
        rate=rate,
        poly_exponent=kappa,
        n_range=(n_max // 2, n_max),
        residual=residual,
        counts=tuple(counts),
        layer_sizes=tuple(layer_sizes),
        method=method,
    )


def estimate_gurevich(
    skew: SkewSystem,
    n_max: int,
    f: Optional[EdgePotential] = None,
    method: str = "auto",
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
) -> GrowthEstimate:
    """Estimate the Gurevič pressure (entropy when ``f`` is omitted).

    Counts ``Z_1 .. Z_n_max`` exactly and fits
    ``log Z_n = n rate - kappa log n + c`` by least squares on the nonzero
    counts of the window ``[n_max // 2, n_max]``.
    """
    counts, sizes, used = counts_with_method(skew, n_max, f, method, threads, cap)
    estimate = fit_counts(counts, sizes, used)
    logger.info(
        "gurevich estimate %.6f (kappa %.3f) via %s up to n=%d",
        estimate.rate,
        estimate.poly_exponent,
        used,
        n_max,
    )
    return estimate


def gurevich_pressure_bound(skew: SkewSystem, f: Optional[EdgePotential] = None) -> float:
    """Base pressure, an upper bound for the Gurevič pressure of the extension."""
    return pressure(skew.base, f)


def cycle_holonomies(skew: SkewSystem) -> List[Tuple[int, ...]]:
    """Abelianized holonomies of all simple cycles of the base graph.

    Every closed walk decomposes into simple cycles, so these vectors generate
    the same semigroup as all loop holonomies.
    """
    ab = skew.abelianized()
    vectors = []
    for cycle in nx.simple_cycles(skew.base.digraph()):
        total = [0] * ab.group.abelian_rank
        for t, i in enumerate(cycle):
            label = ab.labels[(i, cycle[(t + 1) % len(cycle)])]
            for axis, value in enumerate(label):  # type: ignore[arg-type]
                total[axis] += value
        vectors.append(tuple(total))
    return sorted(set(vectors))


def not_in_half_space(vectors: Sequence[Sequence[int]], rank: int) -> bool:
    """Whether the vectors lie in no closed half-space of ``R^rank``.

    Equivalent to: they span ``R^rank`` and admit a relation
    ``sum c_i v_i = 0`` with every ``c_i >= 1`` (checked by a linear program).
    """
    if rank == 0:
        return True
    if not vectors:
        return False
    matrix = np.array(vectors, dtype=float)
    if np.linalg.matrix_rank(matrix) < rank:
        return False
    result = linprog(
        c=np.zeros(len(vectors)),
        A_eq=matrix.T,
        b_eq=np.zeros(rank),
        bounds=[(1, None)] * len(vectors),
        method="highs",
    )
    return bool(result.status == 0)


def lattice_index(vectors: Sequence[Sequence[int]], rank: int) -> int:
    """Index of the subgroup of ``Z^rank`` generated by ``vectors`` (0 if infinite)."""
    rows = [list(v) for v in vectors if any(v)]
    determinant = 1
    for column in range(rank):
        pivot_rows = [r for r in rows if r[column] != 0]
        others = [r for r in rows if r[column] == 0]
        while len(pivot_rows) > 1:
            pivot_rows.sort(key=lambda r: abs(r[column]))
            smallest = pivot_rows[0]
            reduced = [smallest]
            for r in pivot_rows[1:]:
                q = r[column] // smallest[column]
                remainder = [a - q * b for a, b in zip(r, smallest)]
                if remainder[column] != 0:
                    reduced.append(remainder)
                elif any(remainder):
                    others.append(remainder)
            pivot_rows = reduced
        if not pivot_rows:
            return 0
        determinant *= abs(pivot_rows[0][column])
        rows = others
    return determinant


def check_transitivity(skew: SkewSystem, depth: int = 6) -> Transitivity:
    """Decide (or semi-decide) transitivity of the extension.

    Lattice groups are decided exactly from the cycle holonomies: the
    extension is transitive iff they generate ``Z^a`` and lie in no closed
    half-space. Finite groups are decided by exhaustive search. Other groups
    are intransitive when their abelianization is, or when the search from
    ``(0, e)`` closes up inside ``ball(depth)``; they are transitive when every
    ``(vertex, element of ball(depth // 2))`` is reached and unknown otherwise.

    Raises:
        NotIrreducible: When the base shift is not irreducible.
    """
    if not irreducibility(skew.base).irreducible:
        raise NotIrreducible("base shift of the extension is not irreducible")
    if isinstance(skew.group, Lattice):
        return _lattice_transitivity(skew)
    if isinstance(skew.group, FiniteTable):
        return _finite_transitivity(skew)
    abelian = _lattice_transitivity(skew.abelianized())
    if abelian.status is TransitivityStatus.INTRANSITIVE:
        witness = {"reason": "abelianization", "abelian": abelian.witness}
        return Transitivity(TransitivityStatus.INTRANSITIVE, witness, depth)
    return _search_transitivity(skew, depth)


def _lattice_transitivity(skew: SkewSystem) -> Transitivity:
    rank = skew.abelianized().group.abelian_rank
    vectors = cycle_holonomies(skew)
    if not not_in_half_space(vectors, rank):
        return Transitivity(
            TransitivityStatus.INTRANSITIVE,
            {"reason": "half-space", "holonomies": [list(v) for v in vectors]},
        )
    index = lattice_index(vectors, rank) if rank else 1
    if index != 1:
        return Transitivity(
            TransitivityStatus.INTRANSITIVE, {"reason": "index", "index": index}
        )
    return Transitivity(TransitivityStatus.TRANSITIVE)


def _reachable(
    skew: SkewSystem, allowed: Optional[Set[GroupElement]]
) -> Tuple[Set[State], bool]:
    """Search from ``(0, e)``; also reports whether a move left ``allowed``."""
    group = skew.group
    moves = _transitions(skew, None, False)
    start = (0, group.identity())
    seen = {start}
    stack = [start]
    escaped = False
    while stack:
        vertex, g = stack.pop()
        for other, label, _ in moves[vertex]:
            h = group._mul(g, label)
            if allowed is not None and h not in allowed:
                escaped = True
                continue
            state = (other, h)
            if state not in seen:
                seen.add(state)
                stack.append(state)
    return seen, escaped


def _finite_transitivity(skew: SkewSystem) -> Transitivity:
    group = skew.group
    assert isinstance(group, FiniteTable)
    seen, _ = _reachable(skew, None)
    for vertex in range(skew.base.alphabet_size):
        for g in range(group.order):
            if (vertex, g) not in seen:
                return Transitivity(
                    TransitivityStatus.INTRANSITIVE,
                    {"reason": "unreachable", "state": [vertex, g]},
                )
    return Transitivity(TransitivityStatus.TRANSITIVE)


def _search_transitivity(skew: SkewSystem, depth: int) -> Transitivity:
    elements = ball(skew.group, depth)
    seen, escaped = _reachable(skew, set(elements))
    if not escaped:
        missing = next(
            (
                (vertex, g)
                for g in elements
                for vertex in range(skew.base.alphabet_size)
                if (vertex, g) not in seen
            ),
            None,
        )
        witness: Dict[str, Any] = {"reason": "closed"}
        if missing is not None:
            witness["state"] = [missing[0], _jsonable(missing[1])]
        return Transitivity(TransitivityStatus.INTRANSITIVE, witness, depth)
    inner = ball(skew.group, depth // 2)
    if all(
        (vertex, g) in seen
        for g in inner
        for vertex in range(skew.base.alphabet_size)
    ):
        return Transitivity(TransitivityStatus.TRANSITIVE, None, depth)
    return Transitivity(TransitivityStatus.UNKNOWN, None, depth)


def _jsonable(g: GroupElement) -> Any:
    return list(g) if isinstance(g, tuple) else g


def truncated_transfer_spr(
    skew: SkewSystem,
    f: Optional[EdgePotential] = None,
    radius: int = 4,
    cap: int = DEFAULT_BALL_CAP,
) -> float:
    """Log spectral radius of the transfer operator truncated to ``ball(radius)``.

    States are ``(vertex, g)`` with ``g`` in the ball; transitions leaving the
    ball are deleted. Principal submatrices grow with the radius, so the value
    is nondecreasing in ``radius`` and bounded by the base pressure.

    Raises:
        BallTooLarge: When the state space exceeds ``cap``.
    """
    group, base = skew.group, skew.base
    elements = ball(group, radius, cap)
    size = len(elements) * base.alphabet_size
    if size > cap:
        raise BallTooLarge(radius, size, cap)
    index = {g: position for position, g in enumerate(elements)}
    top = f.maximum() if f is not None else 0.0
    rows, cols, data = [], [], []
    for position, g in enumerate(elements):
        for i, j in base.edges:
            h = group._mul(g, skew.labels[(i, j)])
            target = index.get(h)
            if target is None:
                continue
            rows.append(position * base.alphabet_size + i)
            cols.append(target * base.alphabet_size + j)
            data.append(math.exp(f.values[(i, j)] - top) if f is not None else 1.0)
    matrix = sparse.csr_matrix((data, (rows, cols)), shape=(size, size))
    radius_value = spectral_radius(matrix)
    logger.debug("truncated operator on %d states: spr %.12g", size, radius_value)
    if radius_value <= 0.0:
        return -math.inf
    return math.log(radius_value) + top
