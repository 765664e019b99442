"""Hyperbolic plane (curvature -1), Fuchsian presets and the geodesic flow.

Frames are elements g of SL(2, R): the base point is g.i and the direction
is the image of the upward vertical at i.  The unit-speed geodesic flow is
right multiplication by diag(e^{t/2}, e^{-t/2}).

Fundamental domains are Ford domains: a vertical strip |Re z| <= w/2 cut by
the isometric circles |c z + d| >= 1 of a list of side-pairing elements.
Reduction translates into the strip and applies the pairing whose isometric
circle contains the point (this strictly increases Im z) until the point is
inside the domain.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

TOL = 1e-12
MAX_REDUCTIONS = 10**6


class HypflowError(ValueError):
    pass


class CatalogError(HypflowError):
    pass


class DomainReductionError(HypflowError):
    pass


class NonHyperbolicError(HypflowError):
    pass


# -- closed forms ---------------------------------------------------------------

@dataclass(frozen=True)
class CircleGeometry:
    t: float
    r: float           # Euclidean radius in the disk model
    length: float      # hyperbolic circumference l_t
    volume: float      # hyperbolic area Vol_t
    ratio: float       # Vol_t / l_t
    length_uhp: float  # 2 pi sinh t
    volume_uhp: float  # 2 pi (cosh t - 1)


def circle_geometry(t: float) -> CircleGeometry:
    """Circle of hyperbolic radius t in the disk with ds = 2|dz|/(1-|z|^2)."""
    if not t > 0:
        raise ValueError("radius must be positive")
    r = math.tanh(t / 2)
    # 1 - r^2 written as sech^2(t/2) to avoid cancellation at large t
    one_minus_r2 = 1.0 / math.cosh(t / 2) ** 2
    length = 4 * math.pi * r / one_minus_r2
    volume = 4 * math.pi * r * r / one_minus_r2
    return CircleGeometry(t, r, length, volume, volume / length,
                          2 * math.pi * math.sinh(t), 2 * math.pi * (math.cosh(t) - 1))


def euler_characteristic(genus: int, cusps: int, cone_orders=()) -> Fraction:
    """-chi = 2g - 2 + k + sum(1 - 1/m)."""
    return (2 * genus - 2 + cusps + sum(1 - Fraction(1, m) for m in cone_orders))


def orbifold_area_over_pi(genus: int, cusps: int, cone_orders=()) -> Fraction:
    chi = euler_characteristic(genus, cusps, cone_orders)
    if chi <= 0:
        raise NonHyperbolicError(f"orbifold data (g={genus}, k={cusps}, {tuple(cone_orders)}) "
                                 "is not hyperbolic")
    return 2 * chi


def orbifold_area(genus: int, cusps: int, cone_orders=()) -> float:
    """Gauss-Bonnet area 2 pi (2g - 2 + k + sum(1 - 1/m))."""
    return math.pi * float(orbifold_area_over_pi(genus, cusps, cone_orders))


def hyperbolic_distance(z: complex, w: complex) -> float:
    return math.acosh(1 + abs(z - w) ** 2 / (2 * z.imag * w.imag))


def mobius(g, z: complex) -> complex:
    a, b, c, d = g[0][0], g[0][1], g[1][0], g[1][1]
    return (a * z + b) / (c * z + d)


# -- presentations ----------------------------------------------------------------

Word = list  # list of (label, power)


@dataclass
class FuchsianPresentation:
    name: str
    generators: dict            # label -> 2x2 ndarray (det 1)
    width: float                # translation length of the cusp at infinity
    translation: str            # label of z -> z + width
    pairings: list              # [(label, power)] whose isometric circles bound the domain
    relations: list             # words evaluating to +-identity
    genus: int
    cusps: int
    cone_orders: tuple
    vertices: list = field(default_factory=list)   # complex or "inf"
    sides: list = field(default_factory=list)      # (side name, (label, power))
    y_floor: float | None = None                   # lowest height reached by the domain
    cover_of: "FuchsianPresentation | None" = None  # parent used for sampling
    coset_reps: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.generators = {k: np.array(v, dtype=float) for k, v in self.generators.items()}
        for label, g in self.generators.items():
            if abs(np.linalg.det(g) - 1) > 1e-12:
                raise HypflowError(f"generator {label} does not have determinant 1")
        self._circles = []
        for label, p in self.pairings:
            g = self.element(label, p)
            self._circles.append((label, p, float(g[1, 0]), float(g[1, 1]), g))
        self._power_cache = {}

    # group elements
    def element(self, label: str, power: int = 1) -> np.ndarray:
        g = self.generators[label]
        if power < 0:
            g = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
            power = -power
        return np.linalg.matrix_power(g, power)

    def word_matrix(self, word) -> np.ndarray:
        """Product of a word; later letters act on the left."""
        out = np.eye(2)
        for label, p in word:
            out = self.element(label, p) @ out
        return out

    @property
    def area(self) -> float:
        return orbifold_area(self.genus, self.cusps, self.cone_orders)

    @property
    def area_over_pi(self) -> Fraction:
        return orbifold_area_over_pi(self.genus, self.cusps, self.cone_orders)

    def contains(self, z: complex, tol: float = TOL) -> bool:
        if z.imag <= 0 or abs(z.real) > self.width / 2 + tol:
            return False
        return all(abs(c * z + d) >= 1 - tol for _, _, c, d, _ in self._circles)

    def check_relations(self, tol: float = 1e-8) -> list[int]:
        """Sign (+1/-1) of each relation; raises if one is not +-identity."""
        signs = []
        for rel in self.relations:
            m = self.word_matrix(rel)
            if np.allclose(m, np.eye(2), atol=tol):
                signs.append(1)
            elif np.allclose(m, -np.eye(2), atol=tol):
                signs.append(-1)
            else:
                raise HypflowError(f"relation {rel} does not hold")
        return signs

    # reduction
    def reduce(self, frame, max_reductions: int = MAX_REDUCTIONS):
        """Bring the base point into the domain; returns (frame, letters)."""
        a, b, c, d = frame
        letters = []
        w = self.width
        half = w / 2
        T = self.translation
        count = 0
        while True:
            if count > max_reductions:
                raise DomainReductionError(
                    f"{self.name}: base point did not re-enter the domain after "
                    f"{max_reductions} reductions")
            den = c * c + d * d
            x = (a * c + b * d) / den
            y = 1.0 / den
            if abs(x) > half + TOL:
                k = math.floor(x / w + 0.5)
                if k:
                    a -= k * w * c
                    b -= k * w * d
                    letters.append((T, -k))
                    count += 1
                    continue
            moved = False
            for label, p, cc, dd, g in self._circles:
                # |cc z + dd|^2 with z = x + i y
                re_ = cc * x + dd
                im_ = cc * y
                if re_ * re_ + im_ * im_ < 1 - TOL:
                    a, b, c, d = (g[0, 0] * a + g[0, 1] * c, g[0, 0] * b + g[0, 1] * d,
                                  g[1, 0] * a + g[1, 1] * c, g[1, 0] * b + g[1, 1] * d)
                    letters.append((label, p))
                    moved = True
                    break
            if not moved:
                return (a, b, c, d), letters
            count += 1

    # serialization
    def to_dict(self) -> dict:
        def vtx(v):
            return "inf" if v == "inf" else [float(v.real), float(v.imag)]
        return {
            "name": self.name,
            "generators": {k: v.tolist() for k, v in self.generators.items()},
            "width": self.width,
            "translation": self.translation,
            "pairings": [[l, p] for l, p in self.pairings],
            "relations": [[[l, p] for l, p in r] for r in self.relations],
            "orbifold": {"genus": self.genus, "cusps": self.cusps,
                         "cone_orders": list(self.cone_orders)},
            "vertices": [vtx(v) for v in self.vertices],
            "sides": [[s, [l, p]] for s, (l, p) in self.sides],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "FuchsianPresentation":
        def vtx(v):
            return "inf" if v == "inf" else complex(v[0], v[1])
        orb = data["orbifold"]
        return cls(name=data["name"], generators=data["generators"], width=data["width"],
                   translation=data["translation"],
                   pairings=[tuple(x) for x in data["pairings"]],
                   relations=[[tuple(x) for x in r] for r in data["relations"]],
                   genus=orb["genus"], cusps=orb["cusps"],
                   cone_orders=tuple(orb["cone_orders"]),
                   vertices=[vtx(v) for v in data.get("vertices", [])],
                   sides=[(s, tuple(lp)) for s, lp in data.get("sides", [])])


def _hecke(q: int, name: str) -> FuchsianPresentation:
    lam = 2 * math.cos(math.pi / q)
    S = [[0.0, -1.0], [1.0, 0.0]]
    T = [[1.0, lam], [0.0, 1.0]]
    corner = complex(lam / 2, math.sin(math.pi / q))
    return FuchsianPresentation(
        name=name, generators={"S": S, "T": T}, width=lam, translation="T",
        pairings=[("S", 1)],
        relations=[[("S", 2)], [("T", 1), ("S", 1)] * q],
        genus=0, cusps=1, cone_orders=(2, q),
        vertices=[complex(-corner.real, corner.imag), corner, "inf"],
        sides=[("left", ("T", 1)), ("right", ("T", -1)), ("arc", ("S", 1))],
        y_floor=math.sin(math.pi / q),
        extra={"triangle": (2, q, math.inf),
               "reflection_triangle_area": math.pi - math.pi / 2 - math.pi / q},
    )


def _gamma2() -> FuchsianPresentation:
    parent = _hecke(3, "modular")
    reps = [np.array(m, dtype=float) for m in (
        [[1, 0], [0, 1]], [[1, 1], [0, 1]], [[0, -1], [1, 0]],
        [[1, -1], [1, 0]], [[0, -1], [1, 1]], [[1, 0], [1, 1]])]
    return FuchsianPresentation(
        name="gamma2", generators={"A": [[1, 2], [0, 1]], "B": [[1, 0], [2, 1]]},
        width=2.0, translation="A", pairings=[("B", 1), ("B", -1)],
        relations=[],
        genus=0, cusps=3, cone_orders=(),
        vertices=[complex(-1, 0), complex(0, 0), complex(1, 0), "inf"],
        sides=[("left", ("A", 1)), ("right", ("A", -1)),
               ("left arc", ("B", 1)), ("right arc", ("B", -1))],
        cover_of=parent, coset_reps=reps,
    )


def _parse_triangle(name: str):
    m = re.fullmatch(r"triangle[\(\-_]?\s*(\d+)\s*[,\-_]\s*(\d+)\s*(?:[,\-_]\s*(inf|oo|∞))?\)?",
                     name.strip())
    if not m:
        return None
    return int(m.group(1)), int(m.group(2))


def preset(name) -> FuchsianPresentation:
    """modular | gamma2 | triangle(2,q,inf) for q >= 3."""
    if isinstance(name, tuple):
        p, q = name[0], name[1]
    else:
        key = str(name).strip().lower()
        if key in ("modular", "psl2z", "sl2z"):
            return _hecke(3, "modular")
        if key in ("gamma2", "gamma(2)"):
            return _gamma2()
        pq = _parse_triangle(key)
        if pq is None:
            raise CatalogError(f"unknown preset {name!r}")
        p, q = pq
    if p == 2 and q >= 3:
        return _hecke(q, "modular" if q == 3 else f"triangle(2,{q},inf)")
    if q == 2 and p >= 3:
        return _hecke(p, "modular" if p == 3 else f"triangle(2,{p},inf)")
    raise CatalogError(f"triangle({p},{q},inf) is not in the catalog (one angle must be pi/2)")


# -- flow -------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowState:
    frame: tuple          # (a, b, c, d)
    word: tuple = ()      # accumulated (label, power) letters
    time: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        a, b, c, d = self.frame
        return np.array([[a, b], [c, d]])

    @property
    def base_point(self) -> complex:
        a, b, c, d = self.frame
        return (a * 1j + b) / (c * 1j + d)

    @property
    def direction(self) -> float:
        """Angle of the unit tangent vector, measured from the positive real axis."""
        a, b, c, d = self.frame
        return float(np.angle(1j / (c * 1j + d) ** 2))


def geodesic_advance(frame, dt: float):
    a, b, c, d = frame
    e = math.exp(dt / 2)
    return (a * e, b / e, c * e, d / e)


def _renormalize(frame):
    a, b, c, d = frame
    det = a * d - b * c
    if abs(det - 1) > 1e-14:
        s = 1 / math.sqrt(det)
        return (a * s, b * s, c * s, d * s)
    return frame


def flow_step(state: FlowState, dt: float, presentation: FuchsianPresentation,
              max_step: float = 20.0, max_reductions: int = MAX_REDUCTIONS) -> FlowState:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt > max_step:
        raise ValueError(f"dt={dt} exceeds the maximum step {max_step}")
    if dt == 0:
        return state
    frame = geodesic_advance(state.frame, dt)
    frame, letters = presentation.reduce(frame, max_reductions)
    return FlowState(_renormalize(frame), state.word + tuple(letters), state.time + dt)


def frame_from_point(z: complex, theta: float):
    """Frame at z whose tangent vector makes angle theta with the upward vertical."""
    x, y = z.real, z.imag
    s = math.sqrt(y)
    phi = -theta / 2
    co, si = math.cos(phi), math.sin(phi)
    # n(x) a(y) k(phi)
    a, b, c, d = s, x / s, 0.0, 1 / s
    return (a * co + b * si, -a * si + b * co, c * co + d * si, -c * si + d * co)


def _sample_strip_point(presentation: FuchsianPresentation, rng) -> complex:
    """Rejection sample of dx dy / y^2 on a domain with its only cusp at infinity."""
    half = presentation.width / 2
    y0 = presentation.y_floor
    while True:
        u = rng.random()
        y = y0 / (1.0 - u)          # density prop. to 1/y^2 on [y0, inf)
        x = (2 * rng.random() - 1) * half
        z = complex(x, y)
        if presentation.contains(z, tol=0.0):
            return z


def random_frame(presentation: FuchsianPresentation, rng):
    if presentation.cover_of is not None:
        parent = presentation.cover_of
        frame = random_frame(parent, rng)
        r = presentation.coset_reps[int(rng.integers(len(presentation.coset_reps)))]
        a, b, c, d = frame
        frame = (r[0, 0] * a + r[0, 1] * c, r[0, 0] * b + r[0, 1] * d,
                 r[1, 0] * a + r[1, 1] * c, r[1, 0] * b + r[1, 1] * d)
        frame, _ = presentation.reduce(frame)
        return _renormalize(frame)
    if presentation.y_floor is None:
        raise HypflowError(f"{presentation.name}: no sampler available")
    z = _sample_strip_point(presentation, rng)
    theta = 2 * math.pi * rng.random()
    return frame_from_point(z, theta)


def random_state(presentation: FuchsianPresentation, seed) -> FlowState:
    """Liouville-distributed unit tangent vector in the fundamental domain."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return FlowState(random_frame(presentation, rng))


def spawn_seeds(master_seed: int, count: int) -> list:
    return np.random.SeedSequence(master_seed).spawn(count)


def write_trajectory_csv(presentation: FuchsianPresentation, state: FlowState, dt: float,
                         steps: int, fh) -> FlowState:
    """Stream (time, label, power) rows for every emitted letter; returns the final state."""
    fh.write("time,label,power\n")
    frame, t = state.frame, state.time
    for _ in range(steps):
        frame = geodesic_advance(frame, dt)
        frame, letters = presentation.reduce(frame)
        frame = _renormalize(frame)
        t += dt
        for label, p in letters:
            fh.write(f"{t!r},{label},{p}\n")
    return FlowState(frame, (), t)
