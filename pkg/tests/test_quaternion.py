import numpy as np
import pytest

from app.services.quaternion import (
    I,
    J,
    K,
    ONE,
    Quaternion,
    SymplecticPair,
    anticommutator_i,
    commutator_i,
    conj,
    conjugate,
    from_complex_pair,
    from_symplectic,
    hamilton_product,
    imag_residue,
    left_i,
    left_matrix,
    norm_sq,
    qmul,
    right_i,
    to_symplectic,
)


def test_unit_products():
    assert (I * J).isclose(K)
    assert (J * I).isclose(-K)
    assert (J * K).isclose(I)
    assert (K * I).isclose(J)
    assert (I * J * K).isclose(-ONE)
    for unit in (I, J, K):
        assert (unit * unit).isclose(-ONE)


def test_worked_product():
    assert qmul(ONE + I, ONE + J).isclose(Quaternion(1.0, 1.0, 1.0, 1.0))


def test_conjugate_and_norm():
    q = Quaternion(1.0, -2.0, 3.0, 0.5)
    assert conj(q).isclose(Quaternion(1.0, 2.0, -3.0, -0.5))
    assert (q * conj(q)).isclose(Quaternion(q.norm_sq()))
    assert q.norm_sq() == pytest.approx(14.25)


def test_symplectic_round_trip():
    q = Quaternion(0.25, -1.0, 2.0, 3.5)
    pair = to_symplectic(q)
    assert pair == SymplecticPair(z=complex(0.25, -1.0), zeta=complex(2.0, 3.5))
    assert from_symplectic(pair) == q


def test_symplectic_product_rule():
    # (z1 + zeta1 j)(z2 + zeta2 j) = (z1 z2 - zeta1 conj(zeta2)) + (z1 zeta2 + zeta1 conj(z2)) j
    a, b = Quaternion(0.3, 1.2, -0.7, 0.4), Quaternion(-1.1, 0.5, 0.9, 2.0)
    pa, pb = to_symplectic(a), to_symplectic(b)
    z = pa.z * pb.z - pa.zeta * pb.zeta.conjugate()
    zeta = pa.z * pb.zeta + pa.zeta * pb.z.conjugate()
    assert (a * b).isclose(from_symplectic(SymplecticPair(z, zeta)))


def test_i_commutators():
    assert commutator_i(J).isclose(2.0 * K)
    assert commutator_i(K).isclose(-2.0 * J)
    assert anticommutator_i(K).isclose(Quaternion())
    assert anticommutator_i(J).isclose(Quaternion())
    # complex quaternions commute with i
    assert commutator_i(Quaternion(0.4, -2.0)).isclose(Quaternion())


def test_left_and_right_i_match_products(rng):
    q = rng.normal(size=(32, 4))
    i = np.broadcast_to(I.components, q.shape)
    np.testing.assert_allclose(left_i(q), hamilton_product(i, q), atol=1e-15)
    np.testing.assert_allclose(right_i(q), hamilton_product(q, i), atol=1e-15)


def test_associative_and_norm_multiplicative(rng):
    a, b, c = (rng.normal(size=(200, 4)) for _ in range(3))
    lhs = hamilton_product(hamilton_product(a, b), c)
    rhs = hamilton_product(a, hamilton_product(b, c))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    np.testing.assert_allclose(norm_sq(hamilton_product(a, b)), norm_sq(a) * norm_sq(b), rtol=1e-12)


def test_conjugate_reverses_products(rng):
    a, b = rng.normal(size=(50, 4)), rng.normal(size=(50, 4))
    np.testing.assert_allclose(
        conjugate(hamilton_product(a, b)),
        hamilton_product(conjugate(b), conjugate(a)),
        atol=1e-13,
    )


def test_left_matrix_acts_as_left_product(rng):
    q, p = rng.normal(size=4), rng.normal(size=4)
    np.testing.assert_allclose(left_matrix(q) @ p, hamilton_product(q, p), atol=1e-14)


def test_from_complex_pair_and_residue():
    values = from_complex_pair(np.array([1 + 2j, 0.5j]), np.array([3 - 1j, 0.0]))
    np.testing.assert_array_equal(values, [[1.0, 2.0, 3.0, -1.0], [0.0, 0.5, 0.0, 0.0]])
    assert imag_residue(np.array([2.0, 0.0, 0.0, 0.0])) == 0.0
    assert imag_residue(np.array([2.0, 0.0, -3.0, 1.5])) == 3.0


def test_scalar_multiplication():
    q = Quaternion(1.0, 2.0, 3.0, 4.0)
    assert (2 * q).isclose(q * 2.0)
    assert (2 * q).isclose(Quaternion(2.0, 4.0, 6.0, 8.0))
