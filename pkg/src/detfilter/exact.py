"""Exact integer determinant signs — the fallback stage of the filters.

Grid inputs are integer multiples of the grid pitch, so after rescaling the
determinants are plain integer determinants; Python's unbounded ints make
the exact stage straightforward.  Fraction-free (Bareiss) elimination keeps
intermediate growth polynomial; a textbook cofactor expansion is kept both
as the small-dimension fast path and as an independent cross-check.
"""

from __future__ import annotations

from enum import IntEnum

__all__ = [
    "Sign",
    "det_bareiss",
    "det_cofactor",
    "exact_det_value",
    "exact_det_sign",
    "lift_insphere",
]


class Sign(IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1

    @classmethod
    def of(cls, x) -> "Sign":
        if x > 0:
            return cls.POSITIVE
        if x < 0:
            return cls.NEGATIVE
        return cls.ZERO


def _check_square(matrix) -> list[list]:
    rows = [list(r) for r in matrix]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ValueError("matrix must be square and non-empty")
    return rows


def det_cofactor(matrix):
    """Recursive cofactor expansion; generic over exact number types."""
    rows = _check_square(matrix)
    return _det_cofactor(rows)


def _det_cofactor(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = rows[0][0] - rows[0][0]  # zero of the element type
    for j, top in enumerate(rows[0]):
        if not top:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = top * _det_cofactor(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def det_bareiss(matrix) -> int:
    """Integer determinant by fraction-free elimination (exact divisions)."""
    m = _check_square(matrix)
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0  # the whole pivot column vanished
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def exact_det_value(matrix) -> int:
    """Exact integer determinant (cofactor for n <= 3, Bareiss beyond)."""
    rows = _check_square(matrix)
    for r in rows:
        for v in r:
            if not isinstance(v, int):
                raise TypeError(f"integer matrix required, got {type(v).__name__}")
    if len(rows) <= 3:
        return _det_cofactor(rows)
    return det_bareiss(rows)


def exact_det_sign(matrix) -> Sign:
    """Sign of the exact integer determinant."""
    return Sign.of(exact_det_value(matrix))


def lift_insphere(points, scale: int):
    """Integer lifted matrix for the sphere-membership test.

    `points` are d+1 rows of d integer coordinates each (grid indices; the
    true coordinate is index/scale).  Rows of the returned (d+1) x (d+1)
    matrix are the coordinates followed by their sum of squares; the matrix
    is already reduced against the origin, and its determinant sign at any
    positive scale equals the sign of the real-coordinate lifted determinant
    because the column rescalings all use positive factors.  The index range
    is deliberately not restricted to [-scale, scale]: the sign identity
    needs only scale > 0.
    """
    pts = [tuple(p) for p in points]
    if not pts:
        raise ValueError("no points given")
    d = len(pts[0])
    if d < 1 or len(pts) != d + 1:
        raise ValueError(
            f"need exactly d+1 points of d coordinates, got {len(pts)} "
            f"points of {d}")
    if not isinstance(scale, int) or scale < 1:
        raise ValueError(f"scale must be a positive integer, got {scale!r}")
    rows = []
    for p in pts:
        if len(p) != d:
            raise ValueError("points have inconsistent dimensions")
        for c in p:
            if not isinstance(c, int):
                raise TypeError("integer coordinates required")
        rows.append(list(p) + [sum(c * c for c in p)])
    return rows
