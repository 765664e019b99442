"""Lyapunov spectra of matrix cocycles over the geodesic flow and over i.i.d. products.

Raw convention: unit-speed geodesic flow in curvature -1, exponent
lim (1/T) log |rho(g_T) v|.  The tautological rank-two cocycle of a Fuchsian
group measures 1/2 in this convention; the "halved" column halves every value
so that weight-one summands carry 1/4 and the maximal K3 case carries 1/2.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import clifford, hypflow
from .quadlat import QuadlatError, QuadraticSpace, signature

HALVED_FACTOR = 0.5


class LyapunovError(ValueError):
    pass


class SingularCocycleError(LyapunovError):
    pass


class RenormPeriodError(LyapunovError):
    def __init__(self, msg, suggested_period):
        super().__init__(msg)
        self.suggested_period = suggested_period


class RelationError(LyapunovError):
    pass


class LiftError(LyapunovError):
    pass


class IsotropyError(LyapunovError):
    pass


# -- cocycles -----------------------------------------------------------------------

@dataclass
class Cocycle:
    assignment: dict                       # label -> (m, m) float array
    presentation: hypflow.FuchsianPresentation | None = None
    preserved_form: np.ndarray | None = None
    provenance: str = "base"
    probabilities: list | None = None      # i.i.d. base: weights in label order
    notes: list = field(default_factory=list)
    relation_signs: list | None = None
    relations: list | None = None          # overrides the presentation's relations

    def __post_init__(self):
        self.assignment = {k: np.array(v, dtype=float) for k, v in self.assignment.items()}
        dims = {v.shape for v in self.assignment.values()}
        if len(dims) != 1 or any(len(s) != 2 or s[0] != s[1] for s in dims):
            raise LyapunovError("generator matrices must be square and of equal size")
        if self.preserved_form is not None:
            self.preserved_form = np.array(self.preserved_form, dtype=float)
        self._cache = {}

    @property
    def dim(self) -> int:
        return next(iter(self.assignment.values())).shape[0]

    def matrix(self, label: str, power: int = 1) -> np.ndarray:
        key = (label, power)
        m = self._cache.get(key)
        if m is not None:
            return m
        g = self.assignment[label]
        if power < 0:
            g = np.linalg.inv(g)
        m = np.linalg.matrix_power(g, abs(power))
        if abs(power) <= 64:
            self._cache[key] = m
        return m

    def word_matrix(self, word) -> np.ndarray:
        out = np.eye(self.dim)
        for label, p in word:
            out = self.matrix(label, p) @ out
        return out

    def validate(self, tol: float = 1e-8) -> list[int]:
        """Check invertibility, form preservation and relations; returns relation signs."""
        for label, g in self.assignment.items():
            if abs(np.linalg.det(g)) < 1e-12:
                raise SingularCocycleError(f"generator {label} is not invertible")
            if self.preserved_form is not None:
                B = self.preserved_form
                err = np.max(np.abs(g.T @ B @ g - B))
                if err > tol * max(1.0, np.max(np.abs(g))) ** 2:
                    raise LyapunovError(f"generator {label} does not preserve the form "
                                        f"(residual {err:.3g})")
        signs = []
        if self.presentation is not None:
            missing = set(self.presentation.generators) - set(self.assignment)
            if missing:
                raise LyapunovError(f"no matrix assigned to {sorted(missing)}")
        eye = np.eye(self.dim)
        for rel in self.all_relations:
            m = self.word_matrix(rel)
            scale = max(1.0, float(np.max(np.abs(m))))
            if np.max(np.abs(m - eye)) <= tol * scale:
                signs.append(1)
            elif np.max(np.abs(m + eye)) <= tol * scale:
                signs.append(-1)
            else:
                raise RelationError(f"relation {rel} is not mapped to +-identity")
        self.relation_signs = signs
        return signs

    @property
    def all_relations(self) -> list:
        if self.relations is not None:
            return self.relations
        return [] if self.presentation is None else self.presentation.relations

    def to_dict(self) -> dict:
        out = {"provenance": self.provenance,
               "generators": {k: v.tolist() for k, v in self.assignment.items()},
               "form": None if self.preserved_form is None else self.preserved_form.tolist(),
               "relations": [[[l, p] for l, p in r] for r in self.all_relations],
               "notes": list(self.notes)}
        if self.relation_signs is not None:
            out["relation_signs"] = list(self.relation_signs)
        return out


SYMPLECTIC_2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def standard_cocycle(presentation: hypflow.FuchsianPresentation) -> Cocycle:
    """The tautological SL(2, R) cocycle, preserving the symplectic form."""
    return Cocycle(dict(presentation.generators), presentation, SYMPLECTIC_2, "base")


def identity_cocycle(presentation: hypflow.FuchsianPresentation, dim: int = 2) -> Cocycle:
    return Cocycle({k: np.eye(dim) for k in presentation.generators}, presentation,
                   np.eye(dim), "base")


# -- derived representations -----------------------------------------------------------

def _sym_embedding(m: int) -> np.ndarray:
    cols = []
    for i in range(m):
        for j in range(i, m):
            v = np.zeros(m * m)
            v[i * m + j] += 0.5
            v[j * m + i] += 0.5
            cols.append(v)
    return np.array(cols).T


def _alt_embedding(m: int) -> np.ndarray:
    cols = []
    for i in range(m):
        for j in range(i + 1, m):
            v = np.zeros(m * m)
            v[i * m + j] = 0.5
            v[j * m + i] = -0.5
            cols.append(v)
    return np.array(cols).T


def _induced(c: Cocycle, S: np.ndarray, provenance: str) -> Cocycle:
    P = np.linalg.solve(S.T @ S, S.T)
    assignment = {k: P @ np.kron(g, g) @ S for k, g in c.assignment.items()}
    form = None
    if c.preserved_form is not None:
        B = c.preserved_form
        form = S.T @ np.kron(B, B) @ S
        form = (form + form.T) / 2
        ev = np.linalg.eigvalsh(form)
        p, q = int(np.sum(ev > 1e-12)), int(np.sum(ev < -1e-12))
        # orient toward the K3-type signature (2, n)
        if q == 2 and p != 2:
            form = -form
        form[np.abs(form) < 1e-15] = 0.0
    return Cocycle(assignment, c.presentation, form, provenance,
                   c.probabilities, list(c.notes), relations=c.relations)


def sym2(c: Cocycle) -> Cocycle:
    return _induced(c, _sym_embedding(c.dim), "sym2")


def wedge2(c: Cocycle) -> Cocycle:
    return _induced(c, _alt_embedding(c.dim), "wedge2")


def tensor(c: Cocycle, other: Cocycle) -> Cocycle:
    form = None
    if c.preserved_form is not None and other.preserved_form is not None:
        form = np.kron(c.preserved_form, other.preserved_form)
    return Cocycle({k: np.kron(g, other.assignment[k]) for k, g in c.assignment.items()},
                   c.presentation, form, "tensor", c.probabilities, list(c.notes),
                   relations=c.relations)


def direct_sum(c: Cocycle, other: Cocycle) -> Cocycle:
    def block(a, b):
        m, n = a.shape[0], b.shape[0]
        out = np.zeros((m + n, m + n))
        out[:m, :m] = a
        out[m:, m:] = b
        return out
    form = None
    if c.preserved_form is not None and other.preserved_form is not None:
        form = block(c.preserved_form, other.preserved_form)
    return Cocycle({k: block(g, other.assignment[k]) for k, g in c.assignment.items()},
                   c.presentation, form, "sum", c.probabilities, list(c.notes),
                   relations=c.relations)


def _rational_gram(form: np.ndarray) -> QuadraticSpace:
    return QuadraticSpace([[Fraction(float(x)).limit_denominator(10**6) for x in row]
                           for row in form])


def lift_matrix(M: np.ndarray, alg: clifford.CliffordAlgebra, tol: float = 1e-9):
    """Normalized spin matrix of one orthogonal matrix; returns (matrix, lift, residual)."""
    g = clifford.reflection_lift(M, alg, tol=tol)
    back = clifford.conjugation_matrix(g, tol=1e-7)
    residual = float(np.max(np.abs(np.asarray(back, dtype=float) - np.asarray(M, dtype=float))))
    S = np.asarray(clifford.spin_matrix(g), dtype=float)
    return S / math.sqrt(abs(float(g.norm))), g, residual


def spin_lift(c: Cocycle, space: QuadraticSpace | None = None, tol: float = 1e-9) -> Cocycle:
    """Generator-wise Cartan-Dieudonne lift, acting on the even Clifford algebra."""
    if space is None:
        if c.preserved_form is None:
            raise LiftError("spin_lift needs a preserved (2, n) form")
        try:
            space = _rational_gram(c.preserved_form)
        except QuadlatError as exc:
            raise LiftError(f"preserved form is not a quadratic form: {exc}") from exc
    p, q, z = signature(space.gram)
    if z or p != 2:
        raise LiftError(f"form has signature ({p},{q},{z}); expected (2, n)")
    alg = clifford.CliffordAlgebra(space)
    assignment, residuals = {}, {}
    for label, M in c.assignment.items():
        if abs(np.linalg.det(M) - 1) > 1e-6:
            raise LiftError(f"generator {label} does not have determinant +1")
        try:
            S, _, res = lift_matrix(M, alg, tol)
        except clifford.FormViolationError as exc:
            raise LiftError(f"generator {label}: {exc}") from exc
        assignment[label] = S
        residuals[label] = res
    out = Cocycle(assignment, c.presentation, None, "spin_lift", c.probabilities,
                  list(c.notes), relations=c.relations)
    out.lift_residuals = residuals
    signs = out.validate()
    if any(s < 0 for s in signs):
        out.notes.append("index-2 cover required: a relation lifts to -identity")
    return out


def derived_rep(c: Cocycle, functor: str, arg=None) -> Cocycle:
    """sym2 | wedge2 | tensor(other) | sum(other) | spin_lift(space)."""
    if functor == "sym2":
        return sym2(c)
    if functor in ("wedge2", "lambda2"):
        return wedge2(c)
    if functor == "tensor":
        return tensor(c, arg)
    if functor == "sum":
        return direct_sum(c, arg)
    if functor == "spin_lift":
        return spin_lift(c, arg)
    raise LyapunovError(f"unknown functor {functor!r}")


# -- estimator -------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimatorConfig:
    dt: float = 1.0
    renorm: float = 4.0
    burn_in: float = 1000.0
    total_time: float = 10000.0
    trajectories: int = 4
    seed: int = 0
    cluster_tol: float = 1e-3
    batches: int = 10            # batches per trajectory for the error estimate

    def __post_init__(self):
        if not self.dt > 0:
            raise LyapunovError("dt must be positive")
        if self.renorm < self.dt:
            raise LyapunovError("renorm period must be at least dt")
        if not self.total_time > self.burn_in:
            raise LyapunovError("total time must exceed the burn-in")
        if self.trajectories < 1 or self.batches < 1:
            raise LyapunovError("need at least one trajectory and one batch")

    @property
    def measured_time(self) -> float:
        return self.total_time - self.burn_in

    def fingerprint(self) -> str:
        return hashlib.sha256(json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class OseledetsEstimate:
    values: list                 # all exponents with multiplicity, descending (raw)
    stderrs: list
    total_time: float
    renorm_interval: float
    trajectory_count: int
    seed: int
    cluster_tol: float = 1e-3
    config: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def exponents(self) -> list[dict]:
        return cluster(self.values, self.stderrs, self.cluster_tol)

    @property
    def halved_values(self) -> list:
        return [HALVED_FACTOR * v for v in self.values]

    @property
    def top(self) -> float:
        return self.values[0]

    def to_dict(self) -> dict:
        def col(factor):
            return [{"value": factor * e["value"], "multiplicity": e["multiplicity"],
                     "stderr": factor * e["stderr"]} for e in self.exponents]
        cfg = dict(self.config)
        return {
            "exponents": col(1.0),
            "raw_convention": {"description": "unit-speed geodesic flow, curvature -1",
                               "values": list(self.values), "stderrs": list(self.stderrs)},
            "halved_convention": {"description": "raw / 2", "exponents": col(HALVED_FACTOR),
                                 "values": self.halved_values},
            "total_time": self.total_time,
            "renorm_interval": self.renorm_interval,
            "trajectory_count": self.trajectory_count,
            "seed": self.seed,
            "config": cfg,
            "config_fingerprint": hashlib.sha256(
                json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16],
            "notes": list(self.notes),
        }


def cluster(values, stderrs, min_tol: float = 1e-3) -> list[dict]:
    """Merge adjacent exponents closer than max(3 stderr, min_tol)."""
    groups: list[list[int]] = []
    for i in range(len(values)):
        if groups:
            j = groups[-1][-1]
            tol = max(3 * max(stderrs[i], stderrs[j]), min_tol)
            if abs(values[i] - values[j]) <= tol:
                groups[-1].append(i)
                continue
        groups.append([i])
    return [{"value": float(np.mean([values[i] for i in g])), "multiplicity": len(g),
             "stderr": float(max(stderrs[i] for i in g))} for g in groups]


def _qr_positive(A: np.ndarray):
    Q, R = np.linalg.qr(A)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s, (R.T * s).T


def _renorm(Q, period):
    if not np.all(np.isfinite(Q)):
        raise RenormPeriodError(f"overflow between renormalizations; try renorm={period / 10:g}",
                                period / 10)
    Qn, R = _qr_positive(Q)
    d = np.diag(R)
    if np.min(d) <= 1e-300:
        raise SingularCocycleError("frame collapsed: the cocycle looks singular")
    return Qn, np.log(d)


def _flow_trajectory(cocycle: Cocycle, cfg: EstimatorConfig, seed_seq, vector=None):
    """Per-batch log sums for one trajectory.

    With ``vector`` given, a single vector is evolved and the returned rows
    have length one.
    """
    P = cocycle.presentation
    rng = np.random.default_rng(seed_seq)
    frame = hypflow.random_frame(P, rng)
    m = cocycle.dim
    Q = np.eye(m) if vector is None else np.array(vector, dtype=float).reshape(m, 1)
    if vector is not None:
        Q = Q / np.linalg.norm(Q)
    nb = cfg.batches
    sums = np.zeros((nb, Q.shape[1]))
    batch_len = cfg.measured_time / nb
    t = 0.0
    since = 0.0
    mat = cocycle.matrix
    while t < cfg.total_time - 1e-9:
        step = min(cfg.dt, cfg.total_time - t)
        frame = hypflow.geodesic_advance(frame, step)
        frame, letters = P.reduce(frame)
        frame = hypflow._renormalize(frame)
        for label, p in letters:
            Q = mat(label, p) @ Q
        t += step
        since += step
        if since >= cfg.renorm - 1e-9 or t >= cfg.total_time - 1e-9:
            since = 0.0
            if vector is None:
                Q, logs = _renorm(Q, cfg.renorm)
            else:
                nrm = np.linalg.norm(Q)
                if not np.isfinite(nrm):
                    raise RenormPeriodError("overflow between renormalizations",
                                            cfg.renorm / 10)
                if nrm == 0:
                    raise SingularCocycleError("vector collapsed to zero")
                Q = Q / nrm
                logs = np.array([math.log(nrm)])
            if t > cfg.burn_in + 1e-9:
                b = min(int((t - cfg.burn_in - 1e-9) // batch_len), nb - 1)
                sums[b] += logs
    return sums


def _iid_trajectory(cocycle: Cocycle, cfg: EstimatorConfig, seed_seq, vector=None):
    rng = np.random.default_rng(seed_seq)
    labels = list(cocycle.assignment)
    probs = np.asarray(cocycle.probabilities, dtype=float)
    mats = [cocycle.assignment[k] for k in labels]
    m = cocycle.dim
    Q = np.eye(m)
    nsteps = int(round(cfg.total_time))
    burn = int(round(cfg.burn_in))
    period = max(1, int(round(cfg.renorm)))
    choices = rng.choice(len(mats), size=nsteps, p=probs)
    nb = cfg.batches
    sums = np.zeros((nb, m))
    batch_len = (nsteps - burn) / nb
    for s in range(nsteps):
        Q = mats[choices[s]] @ Q
        if (s + 1) % period == 0 or s + 1 == nsteps:
            Q, logs = _renorm(Q, period)
            if s + 1 > burn:
                b = min(int((s - burn) // batch_len), nb - 1)
                sums[b] += logs
    return sums


def workers_cap() -> int:
    env = os.environ.get("K3LYAP_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return n


def _run(job):
    kind, cocycle, cfg, seed_seq, vector = job
    fn = _flow_trajectory if kind == "flow" else _iid_trajectory
    # overflow is detected explicitly at each renormalization
    with np.errstate(over="ignore", invalid="ignore"):
        return fn(cocycle, cfg, seed_seq, vector)


def _collect(kind, cocycle, cfg, vector=None, workers=None, progress=None):
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.trajectories)
    jobs = [(kind, cocycle, cfg, s, vector) for s in seeds]
    workers = min(workers or workers_cap(), len(jobs))
    results = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            # map yields in index order whatever the completion order
            for i, r in enumerate(ex.map(_run, jobs)):
                results.append(r)
                if progress:
                    progress(i, r)
    else:
        for i, j in enumerate(jobs):
            results.append(_run(j))
            if progress:
                progress(i, results[-1])
    return np.concatenate(results, axis=0)


def _summarize(sums, batch_len, cfg, notes) -> OseledetsEstimate:
    rates = sums / batch_len
    values = rates.mean(axis=0)
    nb = rates.shape[0]
    if nb > 1:
        se = rates.std(axis=0, ddof=1) / math.sqrt(nb)
    else:
        se = np.zeros_like(values)
    order = np.argsort(-values, kind="stable")
    return OseledetsEstimate([float(values[i]) for i in order], [float(se[i]) for i in order],
                             cfg.total_time, cfg.renorm, cfg.trajectories, cfg.seed,
                             cfg.cluster_tol, asdict(cfg), notes)


def estimate_spectrum(cocycle: Cocycle, cfg: EstimatorConfig, workers=None,
                      progress=None) -> OseledetsEstimate:
    """Full spectrum by QR re-orthonormalization along geodesic trajectories.

    ``progress(i, batch_sums)`` is called after trajectory i finishes.
    """
    if cocycle.presentation is None:
        raise LyapunovError("estimate_spectrum needs a presentation; use iid_spectrum")
    cocycle.validate()
    sums = _collect("flow", cocycle, cfg, workers=workers, progress=progress)
    return _summarize(sums, cfg.measured_time / cfg.batches, cfg, list(cocycle.notes))


def estimate_top_isotropic(cocycle: Cocycle, v, cfg: EstimatorConfig, workers=None):
    """Growth rate of one isotropic vector, averaged over Liouville-random starts.

    Returns (value, stderr).
    """
    if cocycle.preserved_form is None:
        raise LyapunovError("need a preserved form to speak of isotropic vectors")
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise IsotropyError("vector must be nonzero")
    if abs(v @ cocycle.preserved_form @ v) > 1e-9 * max(1.0, v @ v):
        raise IsotropyError("vector is not isotropic")
    cocycle.validate()
    sums = _collect("flow", cocycle, cfg, vector=v, workers=workers)
    est = _summarize(sums, cfg.measured_time / cfg.batches, cfg, [])
    return est.values[0], est.stderrs[0]


def iid_spectrum(matrices, probabilities, cfg: EstimatorConfig, workers=None) -> OseledetsEstimate:
    """Spectrum of a Bernoulli product; one matrix per unit of time."""
    probs = np.asarray(probabilities, dtype=float)
    if len(probs) != len(matrices) or np.any(probs <= 0) or abs(probs.sum() - 1) > 1e-12:
        raise LyapunovError("probabilities must be positive and sum to 1")
    mats = [np.asarray(M, dtype=float) for M in matrices]
    for M in mats:
        if abs(np.linalg.det(M)) < 1e-12:
            raise SingularCocycleError("matrix is not invertible")
    c = Cocycle({f"m{i}": M for i, M in enumerate(mats)}, probabilities=list(probs))
    sums = _collect("iid", c, cfg, workers=workers)
    nsteps = int(round(cfg.total_time)) - int(round(cfg.burn_in))
    return _summarize(sums, nsteps / cfg.batches, cfg, [])


# -- reports ---------------------------------------------------------------------------

def spectrum_report_checks(est: OseledetsEstimate, n: int, tol: float = 0.02,
                           reducible: bool = False) -> dict:
    """Negation symmetry, zero cluster and top gap for a (2, n)-orthogonal cocycle."""
    vals = est.values
    ses = est.stderrs
    m = len(vals)
    defect = max(abs(vals[i] + vals[m - 1 - i]) for i in range(m))
    zero_tol = [max(3 * s, est.cluster_tol) for s in ses]
    zero_count = sum(1 for v, t in zip(vals, zero_tol) if abs(v) <= t)
    expected_zero = n - 2 if n >= 2 else 1
    gap = vals[0] - vals[1] if m > 1 else float("nan")
    gap_se = math.hypot(ses[0], ses[1]) if m > 1 else float("nan")
    notes = []
    if n == 1:
        notes.append("n = 1: spectrum is lam1 > 0 > -lam1, the zero coming from the "
                     "standard B-type weight")
    if reducible:
        notes.append("reducible cocycle: extra zero exponents from trivial summands")
    return {
        "n": n,
        "antisymmetry_defect": defect,
        "antisymmetric": defect <= tol,
        "zero_cluster": zero_count,
        "expected_zero_multiplicity": expected_zero,
        "zero_cluster_ok": zero_count >= expected_zero if reducible else zero_count == expected_zero,
        "top_gap": gap,
        "top_gap_sigma": gap / gap_se if gap_se > 0 else float("inf"),
        "notes": notes,
    }


def spin_relation_prediction(lam1: float, lam2: float, n: int) -> list[float]:
    """Sorted {+-(lam1 +- lam2)/2}, each with multiplicity 2^(n-1)."""
    base = [(lam1 + lam2) / 2, (lam1 - lam2) / 2, -(lam1 - lam2) / 2, -(lam1 + lam2) / 2]
    mult = 2 ** (n - 1)
    return sorted([x for x in base for _ in range(mult)], reverse=True)
