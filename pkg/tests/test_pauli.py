import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from qrecec.stabilizer import PauliString

from oracles import pauli_dense

paulis = st.integers(min_value=1, max_value=5).flatmap(
    lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n),
                        st.text("IXYZ", min_size=n, max_size=n),
                        st.text("IXYZ", min_size=n, max_size=n)))


def test_parse_and_print():
    p = PauliString.from_str("-XIZY")
    assert str(p) == "-XIZY"
    assert p.sign == -1 and p.weight() == 3
    with pytest.raises(ValueError):
        PauliString.from_str("XQ")


def test_single_qubit_products():
    X, Y, Z = (PauliString.from_str(c) for c in "XYZ")
    assert X * Z == PauliString.from_str("Y") * PauliString(np.zeros(1), np.zeros(1), phase=3)
    assert X * Y == PauliString(np.array([0]), np.array([1]), phase=1)  # iZ
    assert Z * X == PauliString(np.array([1]), np.array([1]), phase=1)  # iY


def test_yy_is_minus_xx_times_zz():
    xx, zz = PauliString.from_str("XX"), PauliString.from_str("ZZ")
    assert xx * zz == -PauliString.from_str("YY")


def test_imaginary_sign_rejected():
    with pytest.raises(ValueError):
        (PauliString.from_str("X") * PauliString.from_str("Z")).sign


@given(paulis)
def test_product_matches_matrices(triple):
    a, b, _ = (PauliString.from_str(t) for t in triple)
    dense = lambda p: pauli_dense(p.x_bits, p.z_bits, p.phase)
    assert np.allclose(dense(a * b), dense(a) @ dense(b))


@given(paulis)
def test_product_associative(triple):
    a, b, c = (PauliString.from_str(t) for t in triple)
    assert (a * b) * c == a * (b * c)


@given(paulis)
def test_commutation_matches_product_order(triple):
    a, b, _ = (PauliString.from_str(t) for t in triple)
    assert a.commutes(b) == b.commutes(a)
    assert (a * b == b * a) == a.commutes(b)


@given(paulis)
def test_hash_consistent_with_eq(triple):
    a = PauliString.from_str(triple[0])
    assert hash(a) == hash(PauliString.from_str(triple[0]))
    assert a * a == PauliString.identity(a.n)
