"""Clifford algebra of a quadratic space and the Kuga-Satake machinery.

Blades are bitmasks over an orthogonal basis of the space (bit k is the k-th
orthogonal basis vector, printed ``e{k+1}``).  Vectors passed in by callers
are coordinates in the space's *original* basis; :class:`CliffordAlgebra`
converts them.  Coefficients live in one of four scalar fields:

* ``"rational"``  -- :class:`fractions.Fraction`
* ``"gaussian"``  -- :class:`GaussianRational`
* ``"real"``      -- ``float``
* ``"complex"``   -- ``complex``

Mixing fields in a product raises; use :meth:`CliffordElement.astype`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .quadlat import (QuadraticSpace, format_scalar, inner, orthogonalize,
                      standard_k3_space, to_fraction)

FIELDS = ("rational", "gaussian", "real", "complex")
EXACT_FIELDS = ("rational", "gaussian")


class CliffordError(ValueError):
    pass


class IncompatibleError(CliffordError):
    pass


class FrameError(CliffordError):
    pass


class PolarizationVectorError(CliffordError):
    pass


class InconsistencyError(CliffordError):
    pass


class NotInCliffordGroupError(CliffordError):
    pass


class FormViolationError(CliffordError):
    pass


class IsotropyError(CliffordError):
    pass


class GaussianRational:
    """a + b i with a, b rational."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = to_fraction(re)
        self.im = to_fraction(im)

    @staticmethod
    def coerce(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return GaussianRational(Fraction(x.real), Fraction(x.imag))
        return GaussianRational(x, 0)

    def __add__(self, o):
        if isinstance(o, (GaussianRational, int, Fraction)):
            o = GaussianRational.coerce(o)
            return GaussianRational(self.re + o.re, self.im + o.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, o):
        if isinstance(o, (GaussianRational, int, Fraction)):
            o = GaussianRational.coerce(o)
            return GaussianRational(self.re - o.re, self.im - o.im)
        return NotImplemented

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return GaussianRational(self.re * o, self.im * o)
        if isinstance(o, GaussianRational):
            return GaussianRational(self.re * o.re - self.im * o.im,
                                    self.re * o.im + self.im * o.re)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, (int, Fraction)):
            return GaussianRational(self.re / o, self.im / o)
        if isinstance(o, GaussianRational):
            d = o.re * o.re + o.im * o.im
            return self * o.conjugate() / d
        return NotImplemented

    def __rtruediv__(self, o):
        return GaussianRational.coerce(o) / self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, o):
        if isinstance(o, (int, Fraction, GaussianRational)):
            o = GaussianRational.coerce(o)
            return self.re == o.re and self.im == o.im
        if isinstance(o, complex):
            return complex(self) == o
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im)) if self.im else hash(self.re)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({format_scalar(self.re)}, {format_scalar(self.im)})"

    def __str__(self):
        if not self.im:
            return format_scalar(self.re)
        if not self.re:
            return f"{format_scalar(self.im)}i"
        sign = "+" if self.im > 0 else "-"
        return f"{format_scalar(self.re)}{sign}{format_scalar(abs(self.im))}i"

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        t = text.replace(" ", "")
        if not t.endswith("i"):
            return cls(Fraction(t), 0)
        # split at the last +/- that is not a leading sign or part of an exponent
        m = re.match(r"^([+-]?[^+-]+)?([+-][^+-]*)i$", t)
        if m is None:
            body = t[:-1]
            return cls(0, Fraction(body if body not in ("", "+", "-") else body + "1"))
        re_part, im_part = m.group(1), m.group(2)
        if im_part in ("+", "-"):
            im_part += "1"
        return cls(Fraction(re_part) if re_part else 0, Fraction(im_part))


I = GaussianRational(0, 1)


def _field_of_scalar(x) -> str:
    if isinstance(x, GaussianRational):
        return "gaussian"
    if isinstance(x, complex):
        return "complex"
    if isinstance(x, (float, np.floating)):
        return "real"
    return "rational"


def _convert(x, field_: str):
    if field_ == "rational":
        if isinstance(x, GaussianRational):
            if x.im:
                raise IncompatibleError("cannot convert a non-real scalar to rational")
            return x.re
        if isinstance(x, (float, complex)):
            raise IncompatibleError("refusing silent float -> rational conversion")
        return Fraction(x)
    if field_ == "gaussian":
        if isinstance(x, (float, complex)):
            raise IncompatibleError("refusing silent float -> gaussian conversion")
        return GaussianRational.coerce(x)
    if field_ == "real":
        if isinstance(x, GaussianRational):
            if x.im:
                raise IncompatibleError("cannot convert a non-real scalar to real")
            return float(x.re)
        if isinstance(x, complex):
            raise IncompatibleError("cannot convert complex to real")
        return float(x)
    if field_ == "complex":
        return complex(x)
    raise IncompatibleError(f"unknown scalar field {field_!r}")


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _reorder_sign(a: int, b: int) -> int:
    """Sign from moving the generators of blade b past those of blade a."""
    a >>= 1
    s = 0
    while a:
        s += _popcount(a & b)
        a >>= 1
    return -1 if s & 1 else 1


def blade_name(blade: int) -> str:
    if blade == 0:
        return "1"
    return "".join(f"e{k + 1}" for k in range(blade.bit_length()) if blade >> k & 1)


def parse_blade(name: str) -> int:
    if name == "1":
        return 0
    blade = 0
    for k in re.findall(r"e(\d+)", name):
        bit = 1 << (int(k) - 1)
        if blade & bit:
            raise CliffordError(f"repeated generator in blade {name!r}")
        blade |= bit
    return blade


class CliffordAlgebra:
    """Cl(H) over an orthogonal basis of the quadratic space H."""

    def __init__(self, space: QuadraticSpace | int):
        if isinstance(space, int):
            space = standard_k3_space(space)
        self.space = space
        self.dim = space.dim
        if space.is_diagonal():
            self.basis = [space.basis_vector(i) for i in range(self.dim)]
        else:
            self.basis = orthogonalize(space)
        self.norms = [space.norm(b) for b in self.basis]
        if any(n == 0 for n in self.norms):
            raise CliffordError("degenerate quadratic space")
        self._table: dict[tuple[int, int], tuple[Fraction, int]] = {}
        self._fnorms = [float(n) for n in self.norms]

    def __repr__(self):
        return f"CliffordAlgebra(dim={self.dim}, signature={self.space.signature})"

    # -- blade arithmetic --------------------------------------------------
    def blade_product(self, a: int, b: int) -> tuple[Fraction, int]:
        key = (a, b)
        hit = self._table.get(key)
        if hit is None:
            c = Fraction(_reorder_sign(a, b))
            common = a & b
            k = 0
            while common:
                if common & 1:
                    c *= self.norms[k]
                common >>= 1
                k += 1
            hit = (c, a ^ b)
            self._table[key] = hit
        return hit

    def blade_square(self, a: int) -> Fraction:
        return self.blade_product(a, a)[0]

    @cached_property
    def even_blades(self) -> list[int]:
        return [b for b in range(1 << self.dim) if _popcount(b) % 2 == 0]

    @cached_property
    def odd_blades(self) -> list[int]:
        return [b for b in range(1 << self.dim) if _popcount(b) % 2 == 1]

    # -- constructors ------------------------------------------------------
    def scalar(self, c, field_: str | None = None) -> "CliffordElement":
        field_ = field_ or _field_of_scalar(c)
        return CliffordElement(self, {0: c}, field_)

    def one(self, field_: str = "rational") -> "CliffordElement":
        return self.scalar(_convert(1, field_), field_)

    def zero(self, field_: str = "rational") -> "CliffordElement":
        return CliffordElement(self, {}, field_)

    def blade(self, blade: int | str, coeff=1, field_: str = "rational"):
        if isinstance(blade, str):
            blade = parse_blade(blade)
        return CliffordElement(self, {blade: _convert(coeff, field_)}, field_)

    def gen(self, k: int, field_: str = "rational") -> "CliffordElement":
        """k-th orthogonal basis vector (0-based)."""
        return self.blade(1 << k, 1, field_)

    def algebra_coords(self, v: Sequence) -> list:
        """Coefficients of v (original coordinates) along the orthogonal basis."""
        if len(v) != self.dim:
            raise CliffordError(f"vector has length {len(v)}, expected {self.dim}")
        f = _vector_field(v)
        if f in ("real", "complex"):
            out = []
            for b, n in zip(self.basis, self._fnorms):
                Gb = self._float_gram_times(b)
                out.append(sum(v[i] * Gb[i] for i in range(self.dim)) / n)
            return out
        return [inner(self.space.gram, v, b) / n for b, n in zip(self.basis, self.norms)]

    def _float_gram_times(self, b) -> list[float]:
        key = tuple(b)
        cache = self.__dict__.setdefault("_gb_cache", {})
        hit = cache.get(key)
        if hit is None:
            g = self.space.gram
            hit = [float(sum(g[i][j] * b[j] for j in range(self.dim))) for i in range(self.dim)]
            cache[key] = hit
        return hit

    def vector(self, v: Sequence, field_: str | None = None) -> "CliffordElement":
        field_ = field_ or _vector_field(v)
        if field_ in EXACT_FIELDS:
            v = [to_fraction(x) if not isinstance(x, GaussianRational) else x for x in v]
        c = self.algebra_coords(v)
        return CliffordElement(self, {1 << k: _convert(x, field_) for k, x in enumerate(c)},
                               field_)

    def coords(self, elem: "CliffordElement") -> list:
        """Original-basis coordinates of a grade-1 element."""
        out = [_convert(0, elem.field)] * self.dim
        for blade, c in elem.terms.items():
            if _popcount(blade) != 1:
                raise CliffordError("element is not a vector")
            k = blade.bit_length() - 1
            b = self.basis[k]
            for i in range(self.dim):
                if b[i]:
                    out[i] = out[i] + c * (_convert(b[i], elem.field))
        return out

    def random_vector(self, rng, low=-2, high=2, nonisotropic=True):
        while True:
            v = tuple(Fraction(int(x)) for x in rng.integers(low, high + 1, self.dim))
            if any(v) and (not nonisotropic or self.space.norm(v) != 0):
                return v

    def from_json(self, text) -> "CliffordElement":
        data = json.loads(text) if isinstance(text, str) else text
        field_ = data["field"]
        parse = {"rational": Fraction, "gaussian": GaussianRational.parse,
                 "real": float, "complex": complex}[field_]
        terms = {parse_blade(k): parse(v) for k, v in data["terms"].items()}
        return CliffordElement(self, terms, field_)


def _vector_field(v) -> str:
    fields = {_field_of_scalar(x) for x in v}
    for f in ("complex", "real", "gaussian"):
        if f in fields:
            if f == "gaussian" and fields & {"real", "complex"}:
                return "complex"
            return f
    return "rational"


class CliffordElement:
    """Sparse multivector: blade bitmask -> coefficient in a fixed field."""

    __slots__ = ("alg", "terms", "field")

    def __init__(self, alg: CliffordAlgebra, terms: dict, field_: str):
        if field_ not in FIELDS:
            raise IncompatibleError(f"unknown scalar field {field_!r}")
        self.alg = alg
        self.field = field_
        self.terms = {b: c for b, c in terms.items() if c != 0}

    # -- basic protocol ----------------------------------------------------
    def _check(self, other: "CliffordElement"):
        if other.alg is not self.alg:
            raise IncompatibleError("elements belong to different algebras")
        if other.field != self.field:
            raise IncompatibleError(
                f"scalar fields differ ({self.field} vs {other.field}); convert explicitly")

    def __add__(self, other):
        if not isinstance(other, CliffordElement):
            other = self.alg.scalar(_convert(other, self.field), self.field)
        self._check(other)
        t = dict(self.terms)
        for b, c in other.terms.items():
            t[b] = t.get(b, 0) + c
        return CliffordElement(self.alg, t, self.field)

    __radd__ = __add__

    def __neg__(self):
        return CliffordElement(self.alg, {b: -c for b, c in self.terms.items()}, self.field)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CliffordElement):
            return multiply(self, other)
        s = _convert(other, self.field)
        return CliffordElement(self.alg, {b: c * s for b, c in self.terms.items()}, self.field)

    def __rmul__(self, other):
        s = _convert(other, self.field)
        return CliffordElement(self.alg, {b: s * c for b, c in self.terms.items()}, self.field)

    def __truediv__(self, other):
        s = _convert(other, self.field)
        return CliffordElement(self.alg, {b: c / s for b, c in self.terms.items()}, self.field)

    def __eq__(self, other):
        if isinstance(other, CliffordElement):
            return self.alg is other.alg and self.terms == other.terms
        return self == self.alg.scalar(_convert(other, self.field), self.field)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for b in sorted(self.terms, key=lambda x: (_popcount(x), x)):
            c = self.terms[b]
            name = blade_name(b)
            parts.append(f"({c})" if name == "1" else f"({c}){name}")
        return " + ".join(parts)

    # -- structure ---------------------------------------------------------
    def is_zero(self, tol: float = 0.0) -> bool:
        if tol and self.field in ("real", "complex"):
            return all(abs(c) <= tol for c in self.terms.values())
        return not self.terms

    def scalar_part(self):
        return self.terms.get(0, _convert(0, self.field))

    def grade(self, k: int) -> "CliffordElement":
        return CliffordElement(self.alg, {b: c for b, c in self.terms.items()
                                          if _popcount(b) == k}, self.field)

    def grades(self) -> set[int]:
        return {_popcount(b) for b in self.terms}

    @property
    def parity(self) -> int | None:
        """0 even, 1 odd, None when mixed (zero counts as even)."""
        ps = {_popcount(b) % 2 for b in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def even_part(self):
        return even_part(self)

    def odd_part(self):
        return odd_part(self)

    def transpose(self):
        return transpose(self)

    def conjugate(self) -> "CliffordElement":
        """Complex conjugation of coefficients (blades are real)."""
        if self.field in ("rational", "real"):
            return self
        return CliffordElement(self.alg, {b: c.conjugate() for b, c in self.terms.items()},
                               self.field)

    def astype(self, field_: str) -> "CliffordElement":
        return CliffordElement(self.alg, {b: _convert(c, field_) for b, c in self.terms.items()},
                               field_)

    def norm_scalar(self, tol: float = 1e-9):
        """x * x^t when it is a scalar; raises otherwise."""
        n = self * self.transpose()
        rest = CliffordElement(self.alg, {b: c for b, c in n.terms.items() if b}, n.field)
        scale = max([abs(c) for c in n.terms.values()] + [1.0]) if self.field in ("real", "complex") else 0
        if not rest.is_zero(tol * scale if scale else 0.0):
            raise NotInCliffordGroupError("x x^t is not a scalar")
        return n.scalar_part()

    def inverse(self) -> "CliffordElement":
        """Inverse of a versor-like element via x^{-1} = x^t / (x x^t)."""
        n = self.norm_scalar()
        if n == 0:
            raise NotInCliffordGroupError("element has zero norm")
        return self.transpose() / n

    def to_json(self) -> str:
        fmt = format_scalar if self.field == "rational" else str
        if self.field == "real":
            fmt = repr
        return json.dumps({"field": self.field,
                           "terms": {blade_name(b): fmt(c) for b, c in
                                     sorted(self.terms.items(), key=lambda kv: (_popcount(kv[0]), kv[0]))}})


def multiply(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    a._check(b)
    alg = a.alg
    real_norms = a.field in ("real", "complex")
    out: dict[int, object] = {}
    for ba, ca in a.terms.items():
        for bb, cb in b.terms.items():
            s, blade = alg.blade_product(ba, bb)
            if real_norms:
                s = float(s)
            v = ca * cb * s
            out[blade] = out.get(blade, 0) + v
    return CliffordElement(alg, out, a.field)


def transpose(a: CliffordElement) -> CliffordElement:
    """Reversion: a grade-k blade picks up (-1)^(k(k-1)/2)."""
    out = {}
    for b, c in a.terms.items():
        k = _popcount(b)
        out[b] = -c if (k * (k - 1) // 2) % 2 else c
    return CliffordElement(a.alg, out, a.field)


def even_part(a: CliffordElement) -> CliffordElement:
    return CliffordElement(a.alg, {b: c for b, c in a.terms.items() if _popcount(b) % 2 == 0},
                           a.field)


def odd_part(a: CliffordElement) -> CliffordElement:
    return CliffordElement(a.alg, {b: c for b, c in a.terms.items() if _popcount(b) % 2 == 1},
                           a.field)


def left_mult_matrix(a: CliffordElement, blades: Sequence[int] | None = None):
    """Matrix of x -> a x on the span of ``blades`` (default: all of Cl)."""
    alg = a.alg
    if blades is None:
        blades = list(range(1 << alg.dim))
    index = {b: i for i, b in enumerate(blades)}
    exact = a.field in EXACT_FIELDS
    size = len(blades)
    zero = _convert(0, a.field)
    mat = np.empty((size, size), dtype=object) if exact else np.zeros(
        (size, size), dtype=complex if a.field == "complex" else float)
    if exact:
        mat[:] = zero
    for j, bj in enumerate(blades):
        col = multiply(a, CliffordElement(alg, {bj: _convert(1, a.field)}, a.field))
        for b, c in col.terms.items():
            if b not in index:
                raise CliffordError("left multiplication leaves the chosen subspace")
            mat[index[b], j] = c
    return mat


def trace_left_mult(a: CliffordElement):
    """Trace of x -> a x on the whole 2^dim-dimensional algebra.

    Only the scalar blade has nonzero diagonal entries, so the trace is
    2^dim times the scalar part.
    """
    return (1 << a.alg.dim) * a.scalar_part()


def scalar_of_product(a: CliffordElement, b: CliffordElement):
    """Scalar part of a*b without forming the product."""
    a._check(b)
    alg = a.alg
    total = _convert(0, a.field)
    real = a.field in ("real", "complex")
    small, big = (a, b) if len(a.terms) <= len(b.terms) else (b, a)
    for blade, c in small.terms.items():
        d = big.terms.get(blade)
        if d is None:
            continue
        s = alg.blade_square(blade)
        total = total + c * d * (float(s) if real else s)
    return total


# -- Kuga-Satake structures ---------------------------------------------------

@dataclass
class HodgePlaneFrame:
    """Orthonormal positive frame (e1, e2) of the period plane P."""

    alg: CliffordAlgebra
    e1: tuple
    e2: tuple

    def __post_init__(self):
        sp = self.alg.space
        self.e1 = sp.vector(self.e1)
        self.e2 = sp.vector(self.e2)
        if sp.norm(self.e1) != 1 or sp.norm(self.e2) != 1 or sp.inner(self.e1, self.e2) != 0:
            raise FrameError("frame must be orthonormal with I(e1,e1)=I(e2,e2)=1, I(e1,e2)=0")

    @classmethod
    def standard(cls, n_or_alg) -> "HodgePlaneFrame":
        alg = n_or_alg if isinstance(n_or_alg, CliffordAlgebra) else CliffordAlgebra(n_or_alg)
        return cls(alg, alg.space.basis_vector(0), alg.space.basis_vector(1))

    @property
    def J(self) -> CliffordElement:
        return self.alg.vector(self.e1) * self.alg.vector(self.e2)

    @property
    def omega(self) -> CliffordElement:
        return (self.alg.vector(self.e1).astype("gaussian")
                + I * self.alg.vector(self.e2).astype("gaussian"))

    @property
    def omega_bar(self) -> CliffordElement:
        return self.omega.conjugate()


@dataclass
class CliffordGroupElement:
    value: CliffordElement
    factorization: list = field(default_factory=list)
    norm: object = None

    def __post_init__(self):
        if self.value.parity != 0:
            raise NotInCliffordGroupError("Clifford group elements must be even")
        if self.norm is None:
            self.norm = self.value.norm_scalar()
        if self.norm == 0:
            raise NotInCliffordGroupError("norm must be nonzero")

    @classmethod
    def from_vectors(cls, alg: CliffordAlgebra, vectors, field_: str | None = None):
        vectors = list(vectors)
        if len(vectors) % 2:
            raise NotInCliffordGroupError("need an even number of vectors")
        g = alg.one(field_ or (_vector_field(vectors[0]) if vectors else "rational"))
        for v in vectors:
            g = g * alg.vector(v, g.field)
        return cls(g, vectors)

    def __mul__(self, other: "CliffordGroupElement") -> "CliffordGroupElement":
        return CliffordGroupElement(self.value * other.value,
                                    self.factorization + other.factorization,
                                    self.norm * other.norm)


def weil_element(frame: HodgePlaneFrame) -> CliffordElement:
    """J_P = e1 e2; squares to -1."""
    return frame.J


def verify_k3_identities(frame: HodgePlaneFrame, omega: CliffordElement | None = None) -> dict:
    """Exact checks of J w = i w, w w = 0, w wbar = 2(1 - i J).

    ``omega`` defaults to e1 + i e2; pass a reference generator of H^{2,0}
    to detect a frame whose orientation disagrees with it.
    """
    J = weil_element(frame).astype("gaussian")
    w = frame.omega if omega is None else omega.astype("gaussian")
    wb = w.conjugate()
    one = frame.alg.one("gaussian")
    Jw = J * w
    if Jw == I * w:
        orientation = 1
    elif Jw == -(I * w):
        orientation = -1
    else:
        orientation = 0
    checks = {
        "J_squared_minus_one": J * J == -one,
        "J_omega_i_omega": Jw == I * w,
        "omega_squared_zero": (w * w).is_zero(),
        "omega_omegabar": w * wb == 2 * (one - I * J),
    }
    return {"checks": checks, "orientation": orientation, "passed": all(checks.values())}


def projector_10(frame: HodgePlaneFrame, a: CliffordElement) -> CliffordElement:
    """(1,0)-component (1/4) w wbar a."""
    w = frame.omega
    if a.field != "gaussian":
        a = a.astype("gaussian")
    return (w * frame.omega_bar * a) * Fraction(1, 4)


class _SparseRowReducer:
    """Incremental exact row reduction of sparse vectors {key: coeff}."""

    def __init__(self):
        self.pivots: dict[int, dict] = {}

    def reduce(self, vec: dict) -> dict:
        v = dict(vec)
        changed = True
        while changed:
            changed = False
            for key in sorted(v):
                if key in self.pivots and v.get(key):
                    row = self.pivots[key]
                    f = v[key]
                    for k2, c2 in row.items():
                        nv = v.get(k2, 0) - f * c2
                        if nv == 0:
                            v.pop(k2, None)
                        else:
                            v[k2] = nv
                    changed = True
                    break
        return v

    def add(self, vec: dict) -> bool:
        v = self.reduce(vec)
        if not v:
            return False
        key = min(v)
        p = v[key]
        row = {k: c / p for k, c in v.items()}
        # keep existing pivots reduced against the new one
        for pk, prow in self.pivots.items():
            if key in prow:
                f = prow[key]
                for k2, c2 in row.items():
                    nv = prow.get(k2, 0) - f * c2
                    if nv == 0:
                        prow.pop(k2, None)
                    else:
                        prow[k2] = nv
        self.pivots[key] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def exact_rank(elements: Sequence[CliffordElement]) -> int:
    red = _SparseRowReducer()
    for e in elements:
        red.add(e.terms)
    return red.rank


def cl10_even_basis(frame: HodgePlaneFrame) -> list[CliffordElement]:
    """Basis of Cl^{1,0} n Cl_+ built from the multiples w * b, b odd blades."""
    alg = frame.alg
    w = frame.omega
    red = _SparseRowReducer()
    basis = []
    target = 1 << (alg.dim - 2)
    for b in alg.odd_blades:
        cand = w * alg.blade(b, 1, "gaussian")
        if red.add(cand.terms):
            basis.append(cand)
            if len(basis) == target:
                break
    return basis


def cl10_even_rank(frame: HodgePlaneFrame) -> int:
    """Exact rank of the span of all w * b, b odd blades (no early stop)."""
    w = frame.omega
    return exact_rank([w * frame.alg.blade(b, 1, "gaussian") for b in frame.alg.odd_blades])


def is_cl10(frame: HodgePlaneFrame, x: CliffordElement) -> bool:
    """J x = i x."""
    x = x.astype("gaussian")
    return frame.J.astype("gaussian") * x == I * x


def _check_polarization_vectors(alg, f1, f2):
    sp = alg.space
    f1, f2 = sp.vector(f1), sp.vector(f2)
    if sp.norm(f1) <= 0 or sp.norm(f2) <= 0 or sp.inner(f1, f2) != 0:
        raise PolarizationVectorError("f1, f2 must be orthogonal with positive norms")
    return f1, f2


def ks_polarization(f1, f2, x: CliffordElement, y: CliffordElement, sign: int = 1):
    """I_KS(x, y) = sign * tr(f1 f2 x^t y)."""
    alg = x.alg
    f1, f2 = _check_polarization_vectors(alg, f1, f2)
    if sign not in (1, -1):
        raise CliffordError("sign must be +1 or -1")
    F = (alg.vector(f1) * alg.vector(f2)).astype(x.field) if x.field != "rational" else \
        alg.vector(f1) * alg.vector(f2)
    return sign * (1 << alg.dim) * scalar_of_product(F * transpose(x), y)


def ks_hermitian_gram(frame: HodgePlaneFrame, f1, f2, basis=None, sign: int = 1):
    """Matrix Q(b_i, b_j) = I_KS(J b_i, conj(b_j)) on the Cl^{1,0} basis."""
    alg = frame.alg
    f1, f2 = _check_polarization_vectors(alg, f1, f2)
    basis = cl10_even_basis(frame) if basis is None else basis
    J = weil_element(frame).astype("gaussian")
    F = (alg.vector(f1) * alg.vector(f2)).astype("gaussian")
    left = [F * transpose(J * b) for b in basis]
    right = [b.conjugate() for b in basis]
    scale = sign * (1 << alg.dim)
    return [[scale * scalar_of_product(l, r) for r in right] for l in left]


def hermitian_definiteness(gram) -> int:
    """+1 positive-definite, -1 negative-definite, 0 otherwise (exact)."""
    n = len(gram)
    a = [[GaussianRational.coerce(x) for x in row] for row in gram]
    for i in range(n):
        for j in range(n):
            if a[i][j] != a[j][i].conjugate():
                return 0
    signs = set()
    for c in range(n):
        p = a[c][c]
        if p == 0 or p.im:
            return 0
        signs.add(1 if p.re > 0 else -1)
        if len(signs) > 1:
            return 0
        for r in range(c + 1, n):
            if a[r][c]:
                f = a[r][c] / p
                rowc = a[c]
                rowr = a[r]
                for k in range(c, n):
                    if rowc[k]:
                        rowr[k] = rowr[k] - f * rowc[k]
    return signs.pop() if signs else 0


def resolve_ks_sign(frame: HodgePlaneFrame, f1, f2) -> int:
    """Sign making Q positive-definite on the Cl^{1,0} basis."""
    d = hermitian_definiteness(ks_hermitian_gram(frame, f1, f2))
    if d == 0:
        raise InconsistencyError("Q is not definite for either sign")
    return d


def conjugation_matrix(g, tol: float = 1e-9):
    """Matrix of v -> g v g^{-1} in the space's original basis."""
    if isinstance(g, CliffordGroupElement):
        g = g.value
    alg = g.alg
    ginv = g.inverse()
    exact = g.field in EXACT_FIELDS
    m = alg.dim
    cols = []
    for j in range(m):
        e = alg.space.basis_vector(j)
        v = alg.vector(e, g.field)
        w = g * v * ginv
        rest = CliffordElement(alg, {b: c for b, c in w.terms.items() if _popcount(b) != 1},
                               w.field)
        scale = max([abs(c) for c in w.terms.values()] + [1.0]) if not exact else 0
        if not rest.is_zero(tol * scale if not exact else 0.0):
            raise NotInCliffordGroupError("conjugation leaves the grade-1 span")
        cols.append(alg.coords(w.grade(1)))
    if exact:
        mat = np.empty((m, m), dtype=object)
        for j in range(m):
            for i in range(m):
                mat[i, j] = cols[j][i]
        return mat
    return np.array(cols, dtype=complex if g.field == "complex" else float).T


def spin_matrix(g):
    """Matrix of x -> g x on Cl_+ in the even-blade basis (increasing bitmask)."""
    if isinstance(g, CliffordGroupElement):
        g = g.value
    if g.parity != 0:
        raise NotInCliffordGroupError("spin action needs an even element")
    return left_mult_matrix(g, g.alg.even_blades)


def _matrix_field(M) -> str:
    vals = [x for row in M for x in row]
    if all(isinstance(x, (int, Fraction, np.integer)) for x in vals):
        return "rational"
    return "real"


def _check_orthogonal(M, gram, exact, tol):
    m = len(gram)
    if exact:
        G = [[gram[i][j] for j in range(m)] for i in range(m)]
        for i in range(m):
            for j in range(m):
                s = sum(M[k][i] * G[k][l] * M[l][j] for k in range(m) for l in range(m)
                        if M[k][i] and M[l][j])
                if s != G[i][j]:
                    return False
        return True
    Mf = np.asarray(M, dtype=float)
    Gf = np.asarray([[float(x) for x in row] for row in gram])
    err = np.max(np.abs(Mf.T @ Gf @ Mf - Gf))
    return err <= tol * max(1.0, np.max(np.abs(Mf)) ** 2)


def reflection_lift(M, space_or_alg, tol: float = 1e-9) -> CliffordGroupElement:
    """Cartan-Dieudonne lift of M in SO(I) to an even Clifford group element.

    Reflections are taken in x - Mx for the candidate x maximizing
    |I(x - Mx, x - Mx)|; candidates are the basis vectors followed by their
    pairwise sums and differences.  Vectors already fixed stay fixed because
    each reflection vector is orthogonal to the fixed space.
    """
    alg = space_or_alg if isinstance(space_or_alg, CliffordAlgebra) else CliffordAlgebra(space_or_alg)
    gram = alg.space.gram
    m = alg.dim
    M = [list(row) for row in (M.tolist() if isinstance(M, np.ndarray) else M)]
    if len(M) != m or any(len(r) != m for r in M):
        raise FormViolationError("matrix shape does not match the space")
    field_ = _matrix_field(M)
    exact = field_ == "rational"
    if exact:
        M = [[Fraction(x) for x in row] for row in M]
        gram_ = gram
    else:
        M = [[float(x) for x in row] for row in M]
        gram_ = [[float(x) for x in row] for row in gram]
    if not _check_orthogonal(M, gram, exact, tol):
        raise FormViolationError("matrix does not preserve the quadratic form")
    scale = max(1.0, max(abs(float(x)) for row in M for x in row))

    def ip(u, v):
        return inner(gram_, u, v)

    def apply(A, x):
        return [sum(A[i][j] * x[j] for j in range(m)) for i in range(m)]

    def is_zero_vec(v):
        return all(x == 0 for x in v) if exact else max(abs(x) for x in v) <= tol * scale

    def is_isotropic(n, v):
        if exact:
            return n == 0
        return abs(n) <= tol * max(1.0, max(abs(x) for x in v) ** 2)

    def reflect_matrix(v, A):
        # returns R_v A where R_v(y) = y - 2 I(y,v)/I(v,v) v
        nv = ip(v, v)
        Gv = apply(gram_, v)
        out = [row[:] for row in A]
        for j in range(m):
            col = [A[i][j] for i in range(m)]
            c = 2 * sum(col[i] * Gv[i] for i in range(m)) / nv
            if c:
                for i in range(m):
                    out[i][j] = col[i] - c * v[i]
        return out

    unit = [[(1 if i == j else 0) for j in range(m)] for i in range(m)]
    if exact:
        unit = [[Fraction(x) for x in row] for row in unit]
    else:
        unit = [[float(x) for x in row] for row in unit]
    candidates = list(unit)
    for i in range(m):
        for j in range(i + 1, m):
            candidates.append([a + b for a, b in zip(unit[i], unit[j])])
            candidates.append([a - b for a, b in zip(unit[i], unit[j])])

    vectors: list = []
    A = M
    for _ in range(4 * m + 4):
        diffs = []
        for x in candidates:
            d = [a - b for a, b in zip(x, apply(A, x))]
            if not is_zero_vec(d):
                diffs.append((abs(ip(d, d)), d, x))
        if not diffs:
            break
        best = max(diffs, key=lambda t: t[0])
        if not is_isotropic(ip(best[1], best[1]), best[1]):
            v = best[1]
        else:
            # all differences isotropic: reflect in the candidate of largest |norm|
            v = max((x for _, _, x in diffs), key=lambda x: abs(ip(x, x)))
            if is_isotropic(ip(v, v), v):
                raise CliffordError("reflection_lift: no non-isotropic pivot found")
        vectors.append(v)
        A = reflect_matrix(v, A)
    else:
        raise CliffordError("reflection_lift did not terminate")
    # A = R_{v_k} ... R_{v_1} M = 1  =>  M = R_{v_1} ... R_{v_k}
    if len(vectors) % 2:
        raise CliffordError("odd number of reflections for an orientation-preserving map")
    value = alg.one(field_)
    for v in vectors:
        value = value * alg.vector(v, field_)
    # canonical sign: first nonzero coefficient (increasing bitmask) positive
    first = min(value.terms)
    c = value.terms[first]
    if (c < 0):
        value = -value
    return CliffordGroupElement(value, [tuple(v) for v in vectors])


def isogeny_right_mult(v, a: CliffordElement) -> CliffordElement:
    """a * v for a non-isotropic vector v."""
    alg = a.alg
    vv = alg.vector(v, a.field if a.field != "gaussian" else None)
    if alg.space.norm(alg.space.vector(v)) == 0:
        raise IsotropyError("isogeny vector must be non-isotropic")
    return a * vv.astype(a.field)
