"""Finitely generated groups used as coefficient systems of skew products.

Elements are plain hashable payloads so that dynamic programs can key
dictionaries on them directly:

| **Kind**      | **Payload**                                   |
|---------------|-----------------------------------------------|
| `Lattice(a)`  | tuple of `a` integers                         |
| `FiniteTable` | integer index into the multiplication table   |
| `Free(k)`     | reduced word, tuple of signed letters ±1..±k  |
| `Heisenberg`  | integer triple `(a, b, c)`                    |

The public functions validate payloads and raise KindMismatch on foreign
elements; the `_mul`/`_inv` methods skip validation for inner loops.
"""
import logging
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple

from gurevich_lab.exceptions import (
    BallTooLarge,
    IndexOutOfRange,
    InputError,
    KindMismatch,
)

logger = logging.getLogger(__name__)

GroupElement = Hashable
Word = Sequence[int]

DEFAULT_BALL_CAP = 10**8


class Group(ABC):
    """Interface implemented by every group kind.

    Attributes:
        kind: Kind tag used in configs (``lattice``, ``finite``, ``free``,
            ``heisenberg``).
        amenable: Known amenability label of the kind.
        generators: Distinguished elements used for words and balls.
    """

    kind: str = ""
    amenable: bool = True

    def __init__(self, generators: Optional[Sequence[GroupElement]] = None) -> None:
        basis = self.basis()
        self.generators: Tuple[GroupElement, ...] = (
            tuple(generators) if generators is not None else tuple(basis)
        )
        for g in self.generators:
            self._check(g)

    @abstractmethod
    def identity(self) -> GroupElement:  # pragma: no cover
        """The neutral element."""

    @abstractmethod
    def basis(self) -> List[GroupElement]:  # pragma: no cover
        """Fixed basis in which config words are written."""

    @abstractmethod
    def contains(self, g: Any) -> bool:  # pragma: no cover
        """Whether ``g`` is a valid payload of this group."""

    @abstractmethod
    def _mul(self, g: Any, h: Any) -> Any:  # pragma: no cover
        ...

    @abstractmethod
    def _inv(self, g: Any) -> Any:  # pragma: no cover
        ...

    @abstractmethod
    def abelianize(self, g: Any) -> Tuple[int, ...]:  # pragma: no cover
        """Image in the free part ``Z^a`` of the abelianization."""

    @property
    @abstractmethod
    def abelian_rank(self) -> int:  # pragma: no cover
        ...

    @abstractmethod
    def params(self) -> Dict[str, Any]:  # pragma: no cover
        ...

    def describe(self) -> Dict[str, Any]:
        """Canonical JSON-compatible description (kind, parameters, generators)."""
        return {
            "kind": self.kind,
            **self.params(),
            "generators": [_jsonable(g) for g in self.generators],
        }

    def _check(self, g: Any) -> None:
        if not self.contains(g):
            raise KindMismatch(
                "element", f"{g!r} is not an element of {self.kind} group"
            )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.params()})"


class Lattice(Group):
    kind = "lattice"

    def __init__(
        self, rank: int, generators: Optional[Sequence[GroupElement]] = None
    ) -> None:
        if rank < 0:
            raise InputError("rank", "lattice rank must be nonnegative")
        self.rank = rank
        super().__init__(generators)

    def identity(self) -> Tuple[int, ...]:
        return (0,) * self.rank

    def basis(self) -> List[GroupElement]:
        return [
            tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)
        ]

    def contains(self, g: Any) -> bool:
        return (
            isinstance(g, tuple)
            and len(g) == self.rank
            and all(isinstance(x, int) for x in g)
        )

    def _mul(self, g: Tuple[int, ...], h: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(a + b for a, b in zip(g, h))

    def _inv(self, g: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(-a for a in g)

    def abelianize(self, g: Tuple[int, ...]) -> Tuple[int, ...]:
        return g

    @property
    def abelian_rank(self) -> int:
        return self.rank

    def params(self) -> Dict[str, Any]:
        return {"rank": self.rank}


class FiniteTable(Group):
    """Finite group given by its multiplication table.

    The table is checked against the group axioms at construction, which is
    cubic in the order of the group.
    """

    kind = "finite"

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        identity: int = 0,
        generators: Optional[Sequence[GroupElement]] = None,
    ) -> None:
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        self.order = len(self.table)
        self._identity = identity
        self._validate()
        self._inverses = tuple(
            next(h for h in range(self.order) if self.table[g][h] == identity)
            for g in range(self.order)
        )
        super().__init__(generators)

    def _validate(self) -> None:
        n = self.order
        if n == 0 or any(len(row) != n for row in self.table):
            raise InputError("table", "multiplication table must be square")
        if not 0 <= self._identity < n:
            raise InputError("identity", "identity index out of range")
        if any(not 0 <= x < n for row in self.table for x in row):
            raise InputError("table", "table entries must be element indices")
        e = self._identity
        for g in range(n):
            if self.table[e][g] != g or self.table[g][e] != g:
                raise InputError("table", f"element {e} is not an identity")
            if all(self.table[g][h] != e for h in range(n)):
                raise InputError("table", f"element {g} has no inverse")
        for a in range(n):
            for b in range(n):
                ab = self.table[a][b]
                for c in range(n):
                    if self.table[ab][c] != self.table[a][self.table[b][c]]:
                        raise InputError(
                            "table", f"associativity fails on ({a}, {b}, {c})"
                        )

    @classmethod
    def cyclic(cls, n: int) -> "FiniteTable":
        return cls([[(a + b) % n for b in range(n)] for a in range(n)])

    def identity(self) -> int:
        return self._identity

    def basis(self) -> List[GroupElement]:
        return [g for g in range(self.order) if g != self._identity]

    def contains(self, g: Any) -> bool:
        return isinstance(g, int) and not isinstance(g, bool) and 0 <= g < self.order

    def _mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    def _inv(self, g: int) -> int:
        return self._inverses[g]

    def abelianize(self, g: int) -> Tuple[int, ...]:
        return ()

    @property
    def abelian_rank(self) -> int:
        return 0

    def params(self) -> Dict[str, Any]:
        return {"table": [list(row) for row in self.table], "identity": self._identity}


class Free(Group):
    """Free group on ``k`` letters; elements are freely reduced words."""

    kind = "free"
    amenable = False

    def __init__(
        self, rank: int, generators: Optional[Sequence[GroupElement]] = None
    ) -> None:
        if rank < 1:
            raise InputError("rank", "free group rank must be positive")
        self.rank = rank
        super().__init__(generators)

    def identity(self) -> Tuple[int, ...]:
        return ()

    def basis(self) -> List[GroupElement]:
        return [(i,) for i in range(1, self.rank + 1)]

    def contains(self, g: Any) -> bool:
        if not isinstance(g, tuple):
            return False
        if any(not isinstance(x, int) or x == 0 or abs(x) > self.rank for x in g):
            return False
        return all(g[t] != -g[t + 1] for t in range(len(g) - 1))

    def _mul(self, g: Tuple[int, ...], h: Tuple[int, ...]) -> Tuple[int, ...]:
        cancel = 0
        limit = min(len(g), len(h))
        while cancel < limit and g[len(g) - 1 - cancel] == -h[cancel]:
            cancel += 1
        return g[: len(g) - cancel] + h[cancel:]

    def _inv(self, g: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(-x for x in reversed(g))

    def abelianize(self, g: Tuple[int, ...]) -> Tuple[int, ...]:
        counts = [0] * self.rank
        for x in g:
            counts[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(counts)

    @property
    def abelian_rank(self) -> int:
        return self.rank

    def params(self) -> Dict[str, Any]:
        return {"rank": self.rank}


class Heisenberg(Group):
    """Discrete Heisenberg group of upper unitriangular integer matrices.

    ``(a, b, c) * (a', b', c') = (a + a', b + b', c + c' + a b')``.
    """

    kind = "heisenberg"

    def identity(self) -> Tuple[int, int, int]:
        return (0, 0, 0)

    def basis(self) -> List[GroupElement]:
        return [(1, 0, 0), (0, 1, 0)]

    def contains(self, g: Any) -> bool:
        return (
            isinstance(g, tuple) and len(g) == 3 and all(isinstance(x, int) for x in g)
        )

    def _mul(
        self, g: Tuple[int, int, int], h: Tuple[int, int, int]
    ) -> Tuple[int, int, int]:
        return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])

    def _inv(self, g: Tuple[int, int, int]) -> Tuple[int, int, int]:
        return (-g[0], -g[1], -g[2] + g[0] * g[1])

    def abelianize(self, g: Tuple[int, int, int]) -> Tuple[int, ...]:
        return (g[0], g[1])

    @property
    def abelian_rank(self) -> int:
        return 2

    def params(self) -> Dict[str, Any]:
        return {}


def multiply(group: Group, g: GroupElement, h: GroupElement) -> GroupElement:
    """The product ``g h`` (free words come back reduced).

    Raises:
        KindMismatch: When ``g`` or ``h`` is not an element of ``group``.
    """
    group._check(g)
    group._check(h)
    return group._mul(g, h)


def inverse(group: Group, g: GroupElement) -> GroupElement:
    group._check(g)
    return group._inv(g)


def identity(group: Group) -> GroupElement:
    return group.identity()


def evaluate_word(
    group: Group, word: Word, letters: Optional[Sequence[GroupElement]] = None
) -> GroupElement:
    """Left-to-right product of signed 1-based generator indices.

    ``+i`` stands for ``generators[i - 1]`` and ``-i`` for its inverse; pass
    ``letters`` to evaluate over another alphabet (e.g. the group basis).

    Raises:
        IndexOutOfRange: When an index is zero or exceeds the alphabet.
    """
    alphabet = tuple(letters) if letters is not None else group.generators
    result = group.identity()
    for position, letter in enumerate(word):
        if letter == 0 or abs(letter) > len(alphabet):
            raise IndexOutOfRange(
                f"word[{position}]",
                f"letter {letter} outside 1..{len(alphabet)} (signed)",
            )
        g = alphabet[abs(letter) - 1]
        result = group._mul(result, g if letter > 0 else group._inv(g))
    return result


@dataclass(frozen=True)
class Abelianization:
    """Homomorphism onto the free part ``Z^a`` of ``G / [G, G]``."""

    group: Group

    @property
    def rank(self) -> int:
        return self.group.abelian_rank

    def __call__(self, g: GroupElement) -> Tuple[int, ...]:
        self.group._check(g)
        return self.group.abelianize(g)


def abelianization(group: Group) -> Abelianization:
    """Torsion is dropped: finite groups map onto ``Lattice(0)``."""
    return Abelianization(group)


def symmetric_generators(group: Group) -> List[GroupElement]:
    """Generators followed by their inverses, duplicates removed, order kept."""
    seen: Dict[GroupElement, None] = {}
    for g in group.generators:
        seen.setdefault(g, None)
    for g in group.generators:
        seen.setdefault(group._inv(g), None)
    return list(seen)


def ball(
    group: Group, radius: int, cap: int = DEFAULT_BALL_CAP
) -> List[GroupElement]:
    """All products of at most ``radius`` generators and inverses.

    Elements come back in breadth-first order (stable across runs).

    Raises:
        BallTooLarge: When the ball has more than ``cap`` elements.
    """
    if radius < 0:
        raise InputError("radius", "radius must be nonnegative")
    if not group.generators:
        return [group.identity()]
    steps = symmetric_generators(group)
    seen: Dict[GroupElement, int] = {group.identity(): 0}
    frontier = deque([group.identity()])
    while frontier:
        g = frontier.popleft()
        depth = seen[g]
        if depth == radius:
            continue
        for s in steps:
            h = group._mul(g, s)
            if h not in seen:
                seen[h] = depth + 1
                if len(seen) > cap:
                    raise BallTooLarge(depth + 1, len(seen), cap)
                frontier.append(h)
    logger.debug("ball of radius %d in %s has %d elements", radius, group, len(seen))
    return list(seen)


def word_length(group: Group, g: GroupElement) -> int:
    """Word length for kinds where it is explicit (free: reduced length, lattice: l1)."""
    group._check(g)
    if isinstance(group, Free):
        return len(g)  # type: ignore[arg-type]
    if isinstance(group, Lattice) and all(
        sum(abs(x) for x in s) == 1 for s in group.generators  # type: ignore[union-attr]
    ):
        return sum(abs(x) for x in g)  # type: ignore[union-attr]
    raise InputError("group", f"word length is not explicit for {group.kind} groups")


def build_group(
    kind: str,
    rank: int = 0,
    table: Optional[Sequence[Sequence[int]]] = None,
    identity_index: int = 0,
    generator_words: Optional[Sequence[Word]] = None,
) -> Group:
    """Construct a group from its config description.

    Generator words are written in the kind's fixed basis.
    """
    group: Group
    if kind == "lattice":
        group = Lattice(rank)
    elif kind == "free":
        group = Free(rank)
    elif kind == "heisenberg":
        group = Heisenberg()
    elif kind == "finite":
        if table is None:
            raise InputError("table", "finite groups need a multiplication table")
        group = FiniteTable(table, identity_index)
    else:
        raise InputError("kind", f"unknown group kind {kind!r}")
    if generator_words is not None:
        basis = group.basis()
        group.generators = tuple(
            evaluate_word(group, word, letters=basis) for word in generator_words
        )
    return group


def _jsonable(g: GroupElement) -> Any:
    if isinstance(g, tuple):
        return list(g)
    return g
