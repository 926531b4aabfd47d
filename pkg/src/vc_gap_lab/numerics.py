"""Small numeric helpers shared by the solution and metric modules."""

from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
from scipy import linalg

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

type Number = Fraction | float

PSD_RELATIVE_TOLERANCE = 1e-8


def min_eigenvalue(matrix: ArrayLike) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    array = np.asarray(matrix, dtype=float)
    if array.size == 0:
        return 0.0
    return float(linalg.eigvalsh(array)[0])


def is_psd(matrix: ArrayLike, relative_tolerance: float = PSD_RELATIVE_TOLERANCE) -> bool:
    """PSD test accepting a smallest eigenvalue down to -relative_tolerance * |trace|."""
    array = np.asarray(matrix, dtype=float)
    return min_eigenvalue(array) >= -relative_tolerance * abs(float(np.trace(array)))


def to_fraction(value: int | float | str | Fraction) -> Fraction:
    """Exact conversion; strings may be 'p/q', integers or decimals."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value.strip())


def format_number(value: Number | int) -> str:
    """Render an exact value as 'p/q' and a float with full precision."""
    if isinstance(value, Fraction | int):
        return str(Fraction(value))
    return format(value, ".17g")
