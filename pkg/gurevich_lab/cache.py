"""Memo cache for trivial-holonomy count tables.

Tables live in a SQLite database inside the directory named by
``GUREVICH_LAB_CACHE`` and are keyed by a content hash of the system, the
group, the labels, the potential, ``n_max`` and the counting method. Without
the variable every lookup misses and nothing is written.
"""
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

from gurevich_lab.extension import (
    Count,
    SkewSystem,
    counts_with_method,
)
from gurevich_lab.groups import DEFAULT_BALL_CAP
from gurevich_lab.helpers import content_hash
from gurevich_lab.thermo import EdgePotential
from gurevich_lab.types import CountTableField
from sqlalchemy import Column, Integer, String, create_engine, select
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base

logger = logging.getLogger(__name__)

CACHE_ENV = "GUREVICH_LAB_CACHE"
DATABASE_NAME = "count_tables.sqlite"

Base = declarative_base()


class CountTable(Base):  # type: ignore
    __tablename__ = "count_table"

    key = Column(String(64), primary_key=True)
    method = Column(String(16), nullable=False)
    n_max = Column(Integer, nullable=False)
    counts = Column(CountTableField, nullable=False)
    layer_sizes = Column(CountTableField, nullable=False)

    def __repr__(self) -> str:
        return f"<CountTable: key={self.key[:12]}, method={self.method}, n_max={self.n_max}>"  # type: ignore


class CountCache:
    """Read-through cache of count tables backed by an SQLAlchemy engine."""

    def __init__(self, engine: Engine) -> None:
        self.engine = engine
        Base.metadata.create_all(engine)

    @classmethod
    def from_directory(cls, directory: str) -> "CountCache":
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(os.path.abspath(directory), DATABASE_NAME)
        return cls(create_engine(f"sqlite:///{path}"))

    @classmethod
    def from_env(cls) -> Optional["CountCache"]:
        directory = os.environ.get(CACHE_ENV)
        if not directory:
            return None
        return cls.from_directory(directory)

    def get(self, key: str) -> Optional[Tuple[List[Count], List[int], str]]:
        with Session(self.engine) as session:
            row = session.execute(
                select(CountTable).where(CountTable.key == key)
            ).scalar_one_or_none()
            if row is None:
                return None
            return list(row.counts), [int(x) for x in row.layer_sizes], str(row.method)

    def put(
        self, key: str, counts: List[Count], layer_sizes: List[int], method: str
    ) -> None:
        with Session(self.engine) as session:
            session.merge(
                CountTable(
                    key=key,
                    method=method,
                    n_max=len(counts),
                    counts=list(counts),
                    layer_sizes=list(layer_sizes),
                )
            )
            session.commit()


def count_key(
    skew: SkewSystem, n_max: int, f: Optional[EdgePotential], method: str
) -> str:
    payload: Dict[str, Any] = {
        "system": skew.describe(),
        "potential": (
            [[i, j, repr(value)] for (i, j), value in sorted(f.values.items())]
            if f is not None
            else None
        ),
        "n_max": n_max,
        "method": method,
    }
    return content_hash(payload)


def cached_counts(
    skew: SkewSystem,
    n_max: int,
    f: Optional[EdgePotential] = None,
    method: str = "auto",
    threads: int = 1,
    cap: int = DEFAULT_BALL_CAP,
    cache: Optional[CountCache] = None,
) -> Tuple[List[Count], List[int], str]:
    """[counts_with_method][gurevich_lab.extension.counts_with_method] through the cache."""
    if cache is None:
        return counts_with_method(skew, n_max, f, method, threads, cap)
    key = count_key(skew, n_max, f, method)
    hit = cache.get(key)
    if hit is not None:
        logger.info("count table %s served from cache", key[:12])
        return hit
    counts, sizes, used = counts_with_method(skew, n_max, f, method, threads, cap)
    cache.put(key, counts, sizes, used)
    return counts, sizes, used
