"""Weights of the standard and spin representations of so(2, n).

n = 2k - 1 gives type B_k, n = 2k - 2 gives type D_k.  Both restrict to the
rank-two system spanned by f1, f2 through e1 -> f1, e2 -> f2, e_j -> 0.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

HALF = Fraction(1, 2)

# fundamental weights, documentation only
FUNDAMENTAL_WEIGHTS = {
    "B": "w_i = e1 + ... + e_i (i < k), w_k = (e1 + ... + e_k) / 2",
    "D": "w_i = e1 + ... + e_i (i <= k - 2), w_{k-1} = (e1 + ... + e_{k-1} - e_k) / 2, "
         "w_k = (e1 + ... + e_{k-1} + e_k) / 2",
}

REPS = ("standard", "spin", "half_spin_minus", "half_spin_plus")


class RankError(ValueError):
    pass


class UnsupportedError(ValueError):
    pass


WeightVector = tuple  # tuple[Fraction, ...] of length k
RestrictedWeight = tuple  # (c1, c2)


@dataclass(frozen=True, order=True)
class LyapunovVector:
    lam1: float
    lam2: float

    def __post_init__(self):
        if not (self.lam1 >= self.lam2 >= 0):
            raise ValueError("Lyapunov vector must satisfy lam1 >= lam2 >= 0")


def _check(type_: str, k: int):
    if type_ not in ("B", "D"):
        raise UnsupportedError(f"type must be 'B' or 'D', got {type_!r}")
    if k < 2:
        raise RankError(f"rank must be >= 2, got {k}")


def so_type(n: int) -> tuple[str, int]:
    """Cartan type and rank of so(n + 2)."""
    return ("B", (n + 1) // 2) if n % 2 else ("D", (n + 2) // 2)


def standard_weights(type_: str, k: int) -> list[WeightVector]:
    _check(type_, k)
    unit = [tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k)]
    neg = [tuple(-x for x in u) for u in reversed(unit)]
    zero = [tuple(Fraction(0) for _ in range(k))] if type_ == "B" else []
    return unit + zero + neg


def spin_weights(type_: str, k: int):
    """B: one list of all 2^k weights (+-e1 +- ... +- ek)/2.

    D: (odd, even) split by the number of minus signs; the odd list is
    V(w_{k-1}), the even list V(w_k).
    """
    _check(type_, k)
    allw = [tuple(HALF * s for s in signs)
            for signs in itertools.product((1, -1), repeat=k)]
    if type_ == "B":
        return allw
    odd = [w for w in allw if sum(1 for x in w if x < 0) % 2 == 1]
    even = [w for w in allw if sum(1 for x in w if x < 0) % 2 == 0]
    return odd, even


def restrict(type_: str, k: int, w: WeightVector) -> RestrictedWeight:
    _check(type_, k)
    w = tuple(Fraction(x) for x in w)
    return (w[0] if len(w) > 0 else Fraction(0), w[1] if len(w) > 1 else Fraction(0))


def restricted_multiset(rep: str, type_: str, k: int) -> dict[RestrictedWeight, int]:
    _check(type_, k)
    if rep == "standard":
        weights = standard_weights(type_, k)
    elif rep == "spin":
        sw = spin_weights(type_, k)
        weights = sw if type_ == "B" else sw[0] + sw[1]
    elif rep in ("half_spin_minus", "half_spin_plus"):
        if type_ != "D":
            raise UnsupportedError("half-spin representations exist only in type D")
        odd, even = spin_weights(type_, k)
        weights = odd if rep == "half_spin_minus" else even
    else:
        raise UnsupportedError(f"unknown representation {rep!r}")
    return dict(Counter(restrict(type_, k, w) for w in weights))


def evaluate_exponents(m: dict, lyap: LyapunovVector | tuple) -> list[tuple[float, int]]:
    """Exponent c1*lam1 + c2*lam2 per restricted weight, descending.

    Equal exponents from different weights are merged.  Ties in value are
    ordered by multiplicity, then by weight.
    """
    if not isinstance(lyap, LyapunovVector):
        lyap = LyapunovVector(*lyap)
    rows = sorted(((float(c1) * lyap.lam1 + float(c2) * lyap.lam2, mult, (c1, c2))
                   for (c1, c2), mult in m.items()),
                  key=lambda r: (-r[0], -r[1], tuple(-x for x in r[2])))
    out: list[tuple[float, int]] = []
    for value, mult, _ in rows:
        if out and out[-1][0] == value:
            out[-1] = (value, out[-1][1] + mult)
        else:
            out.append((value, mult))
    return out


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _sorted_items(m: dict):
    return sorted(m.items(), key=lambda kv: (-kv[0][0], -kv[0][1]))


def multiset_to_json(m: dict) -> list[dict]:
    return [{"weight": [_fmt(c1), _fmt(c2)], "multiplicity": mult}
            for (c1, c2), mult in _sorted_items(m)]


def weight_table(type_: str, k: int) -> dict:
    """All restricted multisets for one (type, rank), JSON-ready."""
    _check(type_, k)
    n = 2 * k - 1 if type_ == "B" else 2 * k - 2
    reps = ["standard", "spin"] + (["half_spin_minus", "half_spin_plus"] if type_ == "D" else [])
    return {"type": type_, "rank": k, "n": n, "dim_standard": n + 2,
            "tables": {r: multiset_to_json(restricted_multiset(r, type_, k)) for r in reps}}


def format_table(type_: str, k: int) -> str:
    tab = weight_table(type_, k)
    lines = [f"so(2,{tab['n']})  type {type_}{k}"]
    for rep, rows in tab["tables"].items():
        lines.append(f"  {rep}:")
        for r in rows:
            c1, c2 = r["weight"]
            lines.append(f"    ({c1:>4}, {c2:>4})  x {r['multiplicity']}")
    return "\n".join(lines)


def table_json(type_: str, k: int) -> str:
    return json.dumps(weight_table(type_, k), indent=2)
