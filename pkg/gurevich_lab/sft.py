import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, List, Sequence, Tuple

import networkx as nx
import numpy as np
from gurevich_lab.exceptions import (
    CountOverflow,
    EmptyRowOrColumn,
    NonSquare,
    NotAperiodic,
    NotIrreducible,
)
from gurevich_lab.helpers import divisors, mobius, perron_data

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]

INT64_LIMIT = 2**63 - 1


@dataclass(frozen=True)
class Irreducibility:
    irreducible: bool
    period: int


@dataclass(frozen=True)
class Loop:
    """A based periodic point ``x0 x1 ... x(n-1)`` of the shift.

    Rotations of the same cycle are distinct loops, matching the count of
    points with ``sigma^n x = x``.
    """

    vertices: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices)

    def edges(self) -> List[Edge]:
        """Transitions along the cycle, wrap-around included."""
        n = len(self.vertices)
        return [(self.vertices[t], self.vertices[(t + 1) % n]) for t in range(n)]

    def is_prime(self) -> bool:
        """Whether the least period of the point equals its length."""
        n = len(self.vertices)
        return all(
            self.vertices[d:] + self.vertices[:d] != self.vertices
            for d in divisors(n)
            if d < n
        )


@dataclass(frozen=True)
class Sft:
    """Subshift of finite type given by a 0/1 transition matrix.

    Use [new_sft][gurevich_lab.sft.new_sft] to build validated instances.
    """

    alphabet_size: int
    transitions: Tuple[Tuple[int, ...], ...]

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.transitions, dtype=float)

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        """Allowed transitions in lexicographic order."""
        return tuple(
            (i, j)
            for i in range(self.alphabet_size)
            for j in range(self.alphabet_size)
            if self.transitions[i][j]
        )

    def allows(self, i: int, j: int) -> bool:
        return (
            0 <= i < self.alphabet_size
            and 0 <= j < self.alphabet_size
            and bool(self.transitions[i][j])
        )

    def successors(self, i: int) -> Tuple[int, ...]:
        return tuple(j for j in range(self.alphabet_size) if self.transitions[i][j])

    def predecessors(self, j: int) -> Tuple[int, ...]:
        return tuple(i for i in range(self.alphabet_size) if self.transitions[i][j])

    def digraph(self) -> "nx.DiGraph":
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.alphabet_size))
        graph.add_edges_from(self.edges)
        return graph

    def permuted(self, order: Sequence[int]) -> "Sft":
        """The same shift with symbols relabelled so that new ``i`` is old ``order[i]``."""
        return new_sft(
            self.alphabet_size,
            [[self.transitions[a][b] for b in order] for a in order],
        )


def new_sft(alphabet_size: int, transitions: Sequence[Sequence[int]]) -> Sft:
    """Validate and build an [Sft][gurevich_lab.sft.Sft].

    Raises:
        NonSquare: When the matrix is not ``alphabet_size`` x ``alphabet_size``.
        EmptyRowOrColumn: When a symbol has no successor or no predecessor,
            or an entry is outside ``{0, 1}``.
    """
    if alphabet_size < 1:
        raise NonSquare("alphabet_size", "alphabet must contain at least one symbol")
    if len(transitions) != alphabet_size or any(
        len(row) != alphabet_size for row in transitions
    ):
        raise NonSquare(
            "transitions", f"expected a {alphabet_size}x{alphabet_size} matrix"
        )
    rows = tuple(tuple(int(entry) for entry in row) for row in transitions)
    if any(entry not in (0, 1) for row in rows for entry in row):
        raise EmptyRowOrColumn("transitions", "entries must be zero or one")
    for i in range(alphabet_size):
        if not any(rows[i]):
            raise EmptyRowOrColumn("transitions", f"symbol {i} has no successor")
        if not any(row[i] for row in rows):
            raise EmptyRowOrColumn("transitions", f"symbol {i} has no predecessor")
    return Sft(alphabet_size, rows)


def sft_from_edges(alphabet_size: int, edges: Sequence[Edge]) -> Sft:
    rows = [[0] * alphabet_size for _ in range(alphabet_size)]
    for i, j in edges:
        if not (0 <= i < alphabet_size and 0 <= j < alphabet_size):
            raise NonSquare("edges", f"edge ({i}, {j}) is outside the alphabet")
        rows[i][j] = 1
    return new_sft(alphabet_size, rows)


def full_shift(k: int) -> Sft:
    return new_sft(k, [[1] * k for _ in range(k)])


def golden_mean_shift() -> Sft:
    return new_sft(2, [[1, 1], [1, 0]])


def irreducibility(sft: Sft) -> Irreducibility:
    """Strong connectivity of the transition graph and, if so, its period.

    The period is the gcd of ``depth(i) + 1 - depth(j)`` over edges ``(i, j)``
    for breadth-first depths from symbol 0, which equals the gcd of cycle
    lengths. Non-irreducible shifts report period 1.
    """
    graph = sft.digraph()
    if not nx.is_strongly_connected(graph):
        return Irreducibility(False, 1)
    depth = nx.single_source_shortest_path_length(graph, 0)
    period = 0
    for i, j in sft.edges:
        period = math.gcd(period, depth[i] + 1 - depth[j])
    return Irreducibility(True, abs(period))


def require_aperiodic(sft: Sft) -> None:
    """Raises NotIrreducible / NotAperiodic unless the shift is mixing."""
    status = irreducibility(sft)
    if not status.irreducible:
        raise NotIrreducible("transition matrix is not irreducible")
    if status.period != 1:
        raise NotAperiodic(f"transition matrix has period {status.period}")


def count_periodic(sft: Sft, n: int, big_int: bool = True) -> int:
    """Number of points with ``sigma^n x = x``, i.e. ``trace(A^n)``.

    Exact Python integers are used by default. With ``big_int=False`` the
    product is taken in 64-bit integers and CountOverflow is raised as soon
    as an entry could exceed that width.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if big_int:
        power = _int_matrix_power(sft.transitions, n)
        return sum(power[i][i] for i in range(sft.alphabet_size))
    base = np.array(sft.transitions, dtype=np.int64)
    result = np.eye(sft.alphabet_size, dtype=np.int64)
    for _ in range(n):
        bound = float(np.max(result)) * float(np.max(base.sum(axis=0)))
        if bound > INT64_LIMIT:
            raise CountOverflow(
                f"periodic point count for n={n} exceeds 64-bit integers"
            )
        result = result @ base
    return int(np.trace(result))


def _int_matrix_power(
    matrix: Sequence[Sequence[int]], n: int
) -> List[List[int]]:
    size = len(matrix)
    result = [[int(i == j) for j in range(size)] for i in range(size)]
    base = [list(row) for row in matrix]
    while n:
        if n & 1:
            result = _int_matmul(result, base)
        base = _int_matmul(base, base)
        n >>= 1
    return result


def _int_matmul(
    left: Sequence[Sequence[int]], right: Sequence[Sequence[int]]
) -> List[List[int]]:
    size = len(left)
    return [
        [sum(left[i][m] * right[m][j] for m in range(size)) for j in range(size)]
        for i in range(size)
    ]


def count_prime_periodic(sft: Sft, n: int) -> int:
    """Number of points of least period ``n`` (Möbius inversion)."""
    return sum(mobius(n // d) * count_periodic(sft, d) for d in divisors(n))


def count_prime_orbits(sft: Sft, n: int) -> int:
    """Number of periodic orbits of least period ``n``."""
    return count_prime_periodic(sft, n) // n


def enumerate_loops(sft: Sft, n: int) -> Iterator[Loop]:
    """Yield every periodic point of period ``n`` in lexicographic order."""
    if n < 1:
        raise ValueError("n must be at least 1")
    successors = [sft.successors(i) for i in range(sft.alphabet_size)]
    path: List[int] = []

    def extend(last: int) -> Iterator[Loop]:
        if len(path) == n:
            if sft.transitions[last][path[0]]:
                yield Loop(tuple(path))
            return
        for nxt in successors[last]:
            path.append(nxt)
            yield from extend(nxt)
            path.pop()

    for start in range(sft.alphabet_size):
        path.append(start)
        yield from extend(start)
        path.pop()


def topological_entropy(sft: Sft) -> float:
    """Log of the Perron eigenvalue of the transition matrix.

    Raises:
        NotIrreducible: When the transition graph is not strongly connected.
        NotAperiodic: When the shift is irreducible but periodic.
    """
    require_aperiodic(sft)
    eigenvalue, _, _ = perron_data(sft.matrix)
    return math.log(eigenvalue)
