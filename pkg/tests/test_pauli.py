import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bcslab.pauli import DENSE_LIMIT, I, PauliWord, X, Y, Z, commutation_sign, mul, product, tensor, tensor_all, to_dense

from oracles import pauli_matrix

PREFIXES = ["", "i*", "-", "-i*"]


def all_words(n):
    for pre in PREFIXES:
        for letters in itertools.product("IXYZ", repeat=n):
            yield pre + "".join(letters)


def test_x_times_z_is_minus_i_y():
    w = mul(X, Z)
    assert w.label() == "-i*Y"
    assert w.phase == 3


def test_labels_roundtrip():
    for label in all_words(2):
        assert PauliWord.from_label(label).label() == label


def test_label_separators_ignored():
    assert PauliWord.from_label("- i*X.Z I") == PauliWord.from_label("-i*XZI")


def test_bad_label():
    with pytest.raises(ValueError):
        PauliWord.from_label("XQ")


def test_dense_matches_kron_oracle():
    for label in all_words(2):
        assert np.allclose(PauliWord.from_label(label).to_dense(), pauli_matrix(label))


def test_products_exhaustive_two_qubits():
    labels = list(all_words(2))
    for a in labels:
        pa, ma = PauliWord.from_label(a), pauli_matrix(a)
        for b in labels:
            pb, mb = PauliWord.from_label(b), pauli_matrix(b)
            assert np.allclose(to_dense(mul(pa, pb)), ma @ mb), (a, b)


def test_commutation_sign_exhaustive_two_qubits():
    labels = ["".join(t) for t in itertools.product("IXYZ", repeat=2)]
    for a in labels:
        for b in labels:
            ma, mb = pauli_matrix(a), pauli_matrix(b)
            commute = np.allclose(ma @ mb, mb @ ma)
            assert commutation_sign(PauliWord.from_label(a), PauliWord.from_label(b)) == (1 if commute else -1)


def test_hermitian_iff_even_phase():
    for label in all_words(1):
        m = pauli_matrix(label)
        assert PauliWord.from_label(label).is_hermitian() == np.allclose(m, m.conj().T)


def test_tensor_puts_first_word_on_leading_qubits():
    w = tensor(X, Z)
    assert w.label() == "XZ"
    assert np.allclose(to_dense(w), np.kron(pauli_matrix("X"), pauli_matrix("Z")))
    assert tensor_all([X, Y, -Z]).label() == "-XYZ"


def test_size_mismatch():
    with pytest.raises(ValueError):
        mul(X, PauliWord.identity(2))
    with pytest.raises(ValueError):
        commutation_sign(X, PauliWord.identity(2))


def test_dense_guard():
    with pytest.raises(ValueError):
        to_dense(PauliWord.identity(DENSE_LIMIT + 1))


def test_scalar_and_adjoint():
    assert PauliWord.identity(2).times_i(3).scalar() == -1j
    assert X.scalar() is None
    w = PauliWord.from_label("i*XY")
    assert np.allclose(to_dense(w.adjoint()), pauli_matrix("i*XY").conj().T)


def test_product_of_sequence():
    assert product([X, Y, Z], 1).label() == "i*I"


words3 = st.builds(
    PauliWord,
    st.just(3),
    st.integers(0, 3),
    st.integers(0, 7),
    st.integers(0, 7),
)


@settings(max_examples=150, deadline=None)
@given(words3, words3, words3)
def test_group_laws(p, q, r):
    assert mul(mul(p, q), r) == mul(p, mul(q, r))
    assert mul(p, PauliWord.identity(3)) == p
    # p q = sign * q p
    s = commutation_sign(p, q)
    qp = mul(q, p)
    assert mul(p, q) == (qp if s == 1 else -qp)


@settings(max_examples=100, deadline=None)
@given(words3, words3)
def test_product_matches_dense(p, q):
    assert np.allclose(to_dense(mul(p, q)), to_dense(p) @ to_dense(q))


@settings(max_examples=100, deadline=None)
@given(words3)
def test_hermitian_words_square_to_identity(p):
    sq = mul(p, p)
    assert sq.is_identity()
    assert sq.scalar() == (1 if p.is_hermitian() else -1)
