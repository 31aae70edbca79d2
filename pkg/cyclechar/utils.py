import math
import os
from fractions import Fraction
from typing import Any, Iterator, Tuple


def ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def parse_rational(value: Any) -> Fraction:
    """Accepts ints, "3/7", "0.25", Fractions and decimal floats (read from their repr)."""
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float) and math.isfinite(value):
        return Fraction(repr(value))
    raise ValueError(f"not a rational literal: {value!r}")


def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All tuples of `parts` non-negative ints summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def sign_of(exponent: int) -> int:
    return -1 if exponent % 2 else 1
