from typing import Any, List, Optional, Sequence, Type, Union

from sqlalchemy import types
from sqlalchemy.engine import Dialect

Count = Union[int, float]


class CountTableField(types.TypeDecorator):  # type: ignore
    """Stores a sequence of exact counts in a JSON column.

    Exact integers may exceed every native integer width, so they are written
    as decimal strings; floats are kept as JSON numbers, whose text form
    round-trips in Python. Reading returns a list of ``int`` and ``float``.
    """

    impl = types.JSON
    cache_ok = True

    @property
    def python_type(self) -> Type[List[Count]]:
        return list

    def process_bind_param(
        self, value: Optional[Sequence[Count]], dialect: Dialect
    ) -> Optional[List[Union[str, float]]]:
        if value is None:
            return None
        encoded: List[Union[str, float]] = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ValueError(f"Expected int or float counts, received: {type(item)}")
            encoded.append(str(item) if isinstance(item, int) else float(item))
        return encoded

    def process_result_value(
        self, value: Any, dialect: Dialect
    ) -> Optional[List[Count]]:
        if value is None:
            return None
        return [int(item) if isinstance(item, str) else float(item) for item in value]
