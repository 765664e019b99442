import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from k3lyap import clifford as cl
from k3lyap.clifford import (CliffordAlgebra, CliffordGroupElement, GaussianRational,
                             HodgePlaneFrame, I)
from k3lyap.quadlat import QuadraticSpace, standard_k3_space

fracs = st.fractions(min_value=-5, max_value=5, max_denominator=6)
gauss = st.builds(GaussianRational, fracs, fracs)


# -- Gaussian rationals ----------------------------------------------------------

@given(gauss, gauss)
def test_gaussian_field_matches_complex(a, b):
    for exact, approx in [(a + b, complex(a) + complex(b)), (a - b, complex(a) - complex(b)),
                          (a * b, complex(a) * complex(b))]:
        assert abs(complex(exact) - approx) < 1e-9
    if b:
        assert (a / b) * b == a


@given(gauss)
def test_gaussian_parse_round_trip(a):
    assert GaussianRational.parse(str(a)) == a


def test_i_squared():
    assert I * I == -1
    assert str(GaussianRational(Fraction(1, 2), Fraction(3, 4))) == "1/2+3/4i"


# -- blade algebra -----------------------------------------------------------------

def random_element(alg, rng, field="rational", density=0.5):
    terms = {}
    for b in range(1 << alg.dim):
        if rng.random() < density:
            terms[b] = Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))
    return cl.CliffordElement(alg, terms, field)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_generators_anticommute_and_square_to_norm(n):
    alg = CliffordAlgebra(n)
    for i in range(alg.dim):
        ei = alg.gen(i)
        assert ei * ei == alg.scalar(alg.norms[i])
        for j in range(i + 1, alg.dim):
            ej = alg.gen(j)
            assert ei * ej == -(ej * ei)


def test_quaternions_from_negative_definite_plane():
    alg = CliffordAlgebra(QuadraticSpace([[-1, 0], [0, -1]]))
    i, j = alg.gen(0), alg.gen(1)
    k = i * j
    one = alg.one()
    assert i * i == -one and j * j == -one and k * k == -one
    assert i * j * k == -one


@given(st.integers(0, 10**6), st.integers(1, 3))
def test_left_multiplication_is_a_homomorphism(seed, n):
    rng = np.random.default_rng(seed)
    alg = CliffordAlgebra(n)
    a, b = random_element(alg, rng), random_element(alg, rng)
    La, Lb, Lab = (cl.left_mult_matrix(x) for x in (a, b, a * b))
    assert (La.dot(Lb) == Lab).all()
    assert sum(Lab[i, i] for i in range(Lab.shape[0])) == cl.trace_left_mult(a * b)


@given(st.integers(0, 10**6))
def test_associativity_and_transpose_antiautomorphism(seed):
    rng = np.random.default_rng(seed)
    alg = CliffordAlgebra(2)
    a, b, c = (random_element(alg, rng, density=0.3) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert cl.transpose(a * b) == cl.transpose(b) * cl.transpose(a)
    assert cl.scalar_of_product(a, b) == (a * b).scalar_part()


def test_nondiagonal_space_vectors_square_to_norm():
    sp = QuadraticSpace([[0, 1, 0], [1, 0, 0], [0, 0, -2]])
    alg = CliffordAlgebra(sp)
    rng = np.random.default_rng(3)
    for _ in range(10):
        v = alg.random_vector(rng, nonisotropic=False)
        x = alg.vector(v)
        assert x * x == alg.scalar(sp.norm(v))
        assert tuple(alg.coords(x)) == v


def test_float_requires_explicit_field():
    alg = CliffordAlgebra(1)
    with pytest.raises(cl.CliffordError):
        alg.blade(1, 0.5, "rational")


def test_json_round_trip():
    alg = CliffordAlgebra(2)
    x = alg.blade("e1e3", Fraction(2, 3)) + alg.one()
    assert alg.from_json(x.to_json()) == x
    frame = HodgePlaneFrame.standard(alg)
    y = frame.omega
    assert alg.from_json(y.to_json()) == y


# -- Kuga-Satake identities -------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 7))
def test_k3_identities(n):
    frame = HodgePlaneFrame.standard(n)
    rep = cl.verify_k3_identities(frame)
    assert rep["passed"] and rep["orientation"] == 1
    assert cl.cl10_even_rank(frame) == 2 ** n
    basis = cl.cl10_even_basis(frame)
    assert len(basis) == 2 ** n
    assert all(cl.is_cl10(frame, b) and b.parity == 0 for b in basis)


def test_projector_is_idempotent_onto_cl10():
    frame = HodgePlaneFrame.standard(2)
    rng = np.random.default_rng(5)
    a = random_element(frame.alg, rng).astype("gaussian")
    p = cl.projector_10(frame, a)
    assert cl.is_cl10(frame, p)
    assert cl.projector_10(frame, p) == p


def test_orientation_flip_detected():
    frame = HodgePlaneFrame.standard(2)
    swapped = HodgePlaneFrame(frame.alg, frame.e2, frame.e1)
    rep = cl.verify_k3_identities(swapped, frame.omega)
    assert rep["orientation"] == -1 and not rep["passed"]


def test_frame_must_be_orthonormal():
    alg = CliffordAlgebra(2)
    with pytest.raises(cl.FrameError):
        HodgePlaneFrame(alg, (1, 1, 0, 0), (0, 1, 0, 0))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_ks_sign_resolution(n):
    frame = HodgePlaneFrame.standard(n)
    e1 = frame.e1
    neg = tuple(-x for x in e1)
    assert cl.resolve_ks_sign(frame, e1, frame.e2) == 1
    assert cl.resolve_ks_sign(frame, neg, frame.e2) == -1
    Q = cl.ks_hermitian_gram(frame, e1, frame.e2)
    # oracle: numpy eigenvalues of the Hermitian matrix
    ev = np.linalg.eigvalsh(np.array([[complex(x) for x in row] for row in Q]))
    assert ev.min() > 0


def test_polarization_vector_errors():
    frame = HodgePlaneFrame.standard(2)
    with pytest.raises(cl.PolarizationVectorError):
        cl.resolve_ks_sign(frame, frame.e1, frame.e1)
    with pytest.raises(cl.PolarizationVectorError):
        cl.resolve_ks_sign(frame, frame.e1, (0, 0, 1, 0))


def test_isogeny_rejects_isotropic():
    alg = CliffordAlgebra(2)
    a = alg.one()
    with pytest.raises(cl.IsotropyError):
        cl.isogeny_right_mult((1, 0, 1, 0), a)
    assert cl.isogeny_right_mult((1, 0, 0, 0), a) == alg.gen(0)


# -- Clifford group and lifts --------------------------------------------------------

@given(st.integers(0, 10**6), st.sampled_from([1, 2, 3]), st.sampled_from([2, 4]))
def test_reflection_lift_round_trip_exact(seed, n, k):
    rng = np.random.default_rng(seed)
    alg = CliffordAlgebra(n)
    h = CliffordGroupElement.from_vectors(alg, [alg.random_vector(rng) for _ in range(k)])
    M = cl.conjugation_matrix(h)
    g = cl.reflection_lift(M, alg)
    assert (cl.conjugation_matrix(g) == M).all()
    # lifts agree up to a scalar: g h^{-1} is central and even, hence a scalar
    ratio = g.value * h.value.inverse()
    assert set(ratio.terms) <= {0}


def test_reflection_lift_floats():
    rng = np.random.default_rng(11)
    alg = CliffordAlgebra(3)
    h = CliffordGroupElement.from_vectors(alg, [alg.random_vector(rng) for _ in range(4)])
    M = np.array(cl.conjugation_matrix(h), dtype=float)
    g = cl.reflection_lift(M, alg)
    back = np.array(cl.conjugation_matrix(g), dtype=float)
    assert np.max(np.abs(back - M)) < 1e-9


def test_reflection_lift_rejects_nonorthogonal_and_odd():
    alg = CliffordAlgebra(1)
    with pytest.raises(cl.FormViolationError):
        cl.reflection_lift([[2, 0, 0], [0, 1, 0], [0, 0, 1]], alg)
    with pytest.raises(cl.CliffordError):
        cl.reflection_lift([[-1, 0, 0], [0, 1, 0], [0, 0, 1]], alg)


def test_clifford_group_element_must_be_even():
    alg = CliffordAlgebra(1)
    with pytest.raises(cl.NotInCliffordGroupError):
        CliffordGroupElement(alg.gen(0))
    with pytest.raises(cl.NotInCliffordGroupError):
        CliffordGroupElement.from_vectors(alg, [(1, 0, 0)])


@pytest.mark.parametrize("n", [3, 4])
def test_spin_and_standard_log_eigenvalues(n):
    rng = np.random.default_rng(n)
    alg = CliffordAlgebra(n)
    for _ in range(5):
        h = CliffordGroupElement.from_vectors(alg, [alg.random_vector(rng) for _ in range(4)])
        M = np.array(cl.conjugation_matrix(h), dtype=float)
        S = np.array(cl.spin_matrix(h), dtype=float) / np.sqrt(abs(float(h.norm)))
        x = np.sort(np.log(np.abs(np.linalg.eigvals(M))))[::-1]
        x1, x2 = x[0], x[1]
        pred = np.sort(np.repeat([(x1 + x2) / 2, (x1 - x2) / 2, -(x1 - x2) / 2,
                                  -(x1 + x2) / 2], 2 ** (n - 1)))
        got = np.sort(np.log(np.abs(np.linalg.eigvals(S))))
        assert S.shape == (2 ** (n + 1),) * 2
        assert np.max(np.abs(got - pred)) < 1e-6


def test_conjugation_matrix_preserves_form():
    alg = CliffordAlgebra(2)
    rng = np.random.default_rng(2)
    h = CliffordGroupElement.from_vectors(alg, [alg.random_vector(rng) for _ in range(2)])
    M = cl.conjugation_matrix(h)
    G = np.array(standard_k3_space(2).gram, dtype=object)
    assert (M.T.dot(G).dot(M) == G).all()
