import math
import os
from typing import List, Sequence

from gurevich_lab.extension import SkewSystem, labels_by_source, make_skew
from gurevich_lab.groups import (
    FiniteTable,
    Free,
    Group,
    GroupElement,
    Heisenberg,
    Lattice,
)
from gurevich_lab.sft import Sft, full_shift
from gurevich_lab.storage import local_container
from libcloud.storage.base import Container
from libcloud.storage.drivers.dummy import DummyStorageDriver
from sqlalchemy import create_engine
from sqlalchemy.engine import Engine


def get_test_engine() -> Engine:
    return create_engine(
        os.environ.get("ENGINE", "sqlite:///:memory:?check_same_thread=False")
    )


def get_dummy_container(name: str) -> Container:
    driver = DummyStorageDriver("xxx", "xxx")
    return driver.create_container(name)


def get_test_container(directory: str) -> Container:
    return local_container(directory)


def skew_by_source(sft: Sft, group: Group, letters: Sequence[GroupElement]) -> SkewSystem:
    return make_skew(sft, group, labels_by_source(sft, letters))


def z_example_skew() -> SkewSystem:
    """Full 3-shift over Z with labels +1, +1, -1 on the first symbol."""
    return skew_by_source(full_shift(3), Lattice(1), [(1,), (1,), (-1,)])


def free_skew() -> SkewSystem:
    """Full 4-shift walking on F2 by a, a^-1, b, b^-1."""
    return skew_by_source(full_shift(4), Free(2), [(1,), (-1,), (2,), (-2,)])


def heisenberg_skew() -> SkewSystem:
    letters = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
    return skew_by_source(full_shift(4), Heisenberg(), letters)


def lattice2_skew() -> SkewSystem:
    """Symmetric nearest-neighbour walk on Z^2 over the full 4-shift."""
    return skew_by_source(full_shift(4), Lattice(2), [(1, 0), (-1, 0), (0, 1), (0, -1)])


def trivial_skew(sft: Sft) -> SkewSystem:
    return make_skew(sft, FiniteTable.cyclic(1), {edge: 0 for edge in sft.edges})


def z_example_counts(n_max: int) -> List[int]:
    """Closed form ``C(n, n/2) 2^(n/2)`` for even ``n``, zero for odd ``n``."""
    return [
        math.comb(n, n // 2) * 2 ** (n // 2) if n % 2 == 0 else 0
        for n in range(1, n_max + 1)
    ]


def lattice2_counts(n_max: int) -> List[int]:
    return [
        math.comb(n, n // 2) ** 2 if n % 2 == 0 else 0 for n in range(1, n_max + 1)
    ]
