"""Exact rational quadratic spaces.

Gram matrices are stored as tuples of :class:`fractions.Fraction`; every
operation here is exact.  Floating mirrors live in the dynamics modules.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class QuadlatError(ValueError):
    pass


class InvalidDimensionError(QuadlatError):
    pass


class ShapeError(QuadlatError):
    pass


class DegeneracyError(QuadlatError):
    """Raised when a form has a kernel; ``kernel_vector`` names one."""

    def __init__(self, msg, kernel_vector):
        super().__init__(msg)
        self.kernel_vector = kernel_vector


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # floats are accepted only when they are exact binary rationals the
        # caller meant literally (0.5, 2.0, ...)
        return Fraction(x)
    return Fraction(x)


def as_gram(matrix: Iterable[Iterable]) -> tuple[tuple[Fraction, ...], ...]:
    rows = tuple(tuple(to_fraction(x) for x in row) for row in matrix)
    m = len(rows)
    if m == 0 or any(len(r) != m for r in rows):
        raise ShapeError("gram matrix must be square and non-empty")
    for i in range(m):
        for j in range(i + 1, m):
            if rows[i][j] != rows[j][i]:
                raise ShapeError(f"gram matrix not symmetric at ({i},{j})")
    return rows


def inner(gram, u: Sequence, v: Sequence):
    """Bilinear form I(u, v) = u^T G v."""
    m = len(gram)
    if len(u) != m or len(v) != m:
        raise ShapeError("vector length does not match the space dimension")
    total = 0
    for i in range(m):
        if u[i] == 0:
            continue
        row = gram[i]
        s = 0
        for j in range(m):
            if v[j] != 0 and row[j] != 0:
                s += row[j] * v[j]
        total += u[i] * s
    return total


def _diagonalize(gram):
    """Congruence-diagonalize a symmetric rational matrix.

    Returns (diag, basis) where basis[k] are row vectors with
    I(basis[a], basis[b]) = 0 for a != b and I(basis[k], basis[k]) = diag[k].
    Pivots follow the rule used by :func:`orthogonalize`; kernel vectors show
    up as zero diagonal entries instead of raising.
    """
    m = len(gram)
    work = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    diag: list[Fraction] = []
    basis: list[list[Fraction]] = []
    while work:
        w0 = work[0]
        n0 = inner(gram, w0, w0)
        if n0 == 0:
            pivot = None
            for j in range(1, len(work)):
                cand = [a + b for a, b in zip(w0, work[j])]
                if inner(gram, cand, cand) != 0:
                    pivot = cand
                    break
            if pivot is None:
                # w0 + w_j isotropic for all j; any w_j pairing with w0 has
                # I(w_j, w_j) = -2 I(w0, w_j) != 0, so it is a valid pivot
                for j in range(1, len(work)):
                    if inner(gram, w0, work[j]) != 0:
                        work[0], work[j] = work[j], work[0]
                        pivot = work[0]
                        break
            if pivot is None:
                # w0 is orthogonal to everything: a kernel vector
                diag.append(Fraction(0))
                basis.append(w0)
                work.pop(0)
                continue
            work[0] = pivot
            w0 = pivot
            n0 = inner(gram, w0, w0)
        diag.append(n0)
        basis.append(w0)
        rest = []
        for w in work[1:]:
            c = inner(gram, w, w0) / n0
            rest.append([a - c * b for a, b in zip(w, w0)] if c else w)
        work = rest
    return diag, basis


def signature(gram) -> tuple[int, int, int]:
    """(positive, negative, zero) counts by exact congruence diagonalization."""
    g = as_gram(gram)
    diag, _ = _diagonalize(g)
    return (sum(1 for d in diag if d > 0), sum(1 for d in diag if d < 0),
            sum(1 for d in diag if d == 0))


def determinant(gram) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    a = [list(map(to_fraction, row)) for row in gram]
    m = len(a)
    det = Fraction(1)
    for c in range(m):
        p = next((r for r in range(c, m) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, m):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def solve(matrix, rhs) -> list[Fraction]:
    """Solve A x = b exactly; A square and invertible."""
    m = len(matrix)
    a = [list(map(to_fraction, row)) + [to_fraction(b)] for row, b in zip(matrix, rhs)]
    for c in range(m):
        p = next((r for r in range(c, m) if a[r][c] != 0), None)
        if p is None:
            raise QuadlatError("singular system")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(m):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[r][m] for r in range(m)]


@dataclass(frozen=True)
class QuadraticSpace:
    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "gram", as_gram(self.gram))

    @property
    def dim(self) -> int:
        return len(self.gram)

    @property
    def signature(self) -> tuple[int, int, int]:
        return signature(self.gram)

    def inner(self, u, v):
        return inner(self.gram, u, v)

    def norm(self, v):
        return inner(self.gram, v, v)

    def vector(self, coords) -> tuple[Fraction, ...]:
        v = tuple(to_fraction(c) for c in coords)
        if len(v) != self.dim:
            raise ShapeError(f"expected {self.dim} coordinates, got {len(v)}")
        return v

    def basis_vector(self, i: int) -> tuple[Fraction, ...]:
        return tuple(Fraction(int(i == j)) for j in range(self.dim))

    def is_diagonal(self) -> bool:
        return all(self.gram[i][j] == 0 for i in range(self.dim)
                   for j in range(self.dim) if i != j)

    def to_json(self) -> str:
        return gram_to_json(self.gram)

    @classmethod
    def from_json(cls, text: str) -> "QuadraticSpace":
        return cls(gram_from_json(text))


def standard_k3_space(n: int) -> QuadraticSpace:
    """diag(+1, +1, -1, ..., -1) of dimension n + 2."""
    if not isinstance(n, int) or n < 1:
        raise InvalidDimensionError(f"n must be a positive integer, got {n!r}")
    m = n + 2
    return QuadraticSpace(tuple(
        tuple(Fraction((1 if i < 2 else -1) if i == j else 0) for j in range(m))
        for i in range(m)))


def orthogonalize(space: QuadraticSpace) -> list[tuple[Fraction, ...]]:
    """Orthogonal basis b_1..b_dim with all I(b_i, b_i) != 0.

    Isotropic pivots are replaced by adding the first later working vector
    that gives a nonzero norm.
    """
    diag, basis = _diagonalize(space.gram)
    for d, b in zip(diag, basis):
        if d == 0:
            raise DegeneracyError(
                f"degenerate form: kernel vector {format_vector(b)}", tuple(b))
    return [tuple(b) for b in basis]


def format_scalar(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_vector(v) -> str:
    return "(" + ", ".join(format_scalar(x) for x in v) + ")"


def gram_to_json(gram) -> str:
    return json.dumps([[format_scalar(x) for x in row] for row in gram])


def gram_from_json(text: str):
    data = json.loads(text) if isinstance(text, str) else text
    return as_gram(data)
