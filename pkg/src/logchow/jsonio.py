"""Canonical JSON encoding shared by every serializable object."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any


class SchemaError(ValueError):
    """Raised when a JSON document does not match the expected layout."""


def dumps(obj: Any) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> Any:
    return json.loads(text)


def encode_rational(q) -> int | str:
    q = Fraction(q)
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def decode_rational(x) -> Fraction:
    if isinstance(x, bool):
        raise SchemaError(f"expected a rational number, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError as exc:
            raise SchemaError(f"bad rational {x!r}") from exc
    raise SchemaError(f"expected a rational number, got {x!r}")


def require(obj: Any, key: str, kind: type | tuple[type, ...] | None = None) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing field {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"field {key!r} has type {type(val).__name__}")
    return val


def int_vector(x, length: int | None = None) -> tuple[int, ...]:
    if not isinstance(x, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in x):
        raise SchemaError(f"expected a list of integers, got {x!r}")
    if length is not None and len(x) != length:
        raise SchemaError(f"expected {length} entries, got {len(x)}")
    return tuple(x)
