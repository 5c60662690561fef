import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from sldkit import numkit
from sldkit.errors import NotFullRankError, NumericalDomainError, ValidationError
from helpers import random_hermitian


def test_eig_diagonal_sorted():
    es = numkit.eig_hermitian(np.diag([2.0, 1.0]))
    assert np.allclose(es.eigenvalues, [1, 2])
    assert np.allclose(np.abs(es.basis), [[0, 1], [1, 0]])


def test_eig_pauli_x():
    es = numkit.eig_hermitian(np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.allclose(es.eigenvalues, [-1, 1])
    v = es.basis[:, 0] * np.sign(es.basis[0, 0].real)
    assert np.allclose(v, np.array([1, -1]) / np.sqrt(2))


def test_eig_deterministic(rng):
    A = random_hermitian(6, rng)
    a, b = numkit.eig_hermitian(A), numkit.eig_hermitian(A)
    assert np.array_equal(a.eigenvalues, b.eigenvalues) and np.array_equal(a.basis, b.basis)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_eig_reconstruction_and_unitarity(n, seed):
    A = random_hermitian(n, np.random.default_rng(seed), scale=5.0)
    es = numkit.eig_hermitian(A)
    assert np.all(np.diff(es.eigenvalues) >= 0)
    assert np.linalg.norm(es.basis.conj().T @ es.basis - np.eye(n)) <= 1e-10 * n
    assert np.linalg.norm(es.reconstruct() - A) <= 1e-10 * max(np.linalg.norm(A), 1e-300)


def test_check_hermitian_names_entry():
    A = np.eye(3, dtype=complex)
    A[0, 2] = 1e-6
    with pytest.raises(ValidationError, match=r"\(0, 2\)|\(2, 0\)"):
        numkit.check_hermitian(A, "H")


def test_check_hermitian_shape():
    with pytest.raises(ValidationError):
        numkit.check_hermitian(np.ones((2, 3)))


def test_matrix_function_examples():
    out = numkit.matrix_function(np.diag([0.0, np.log(2)]), np.exp)
    assert np.allclose(out, np.diag([1, 2]), atol=1e-14)
    assert np.allclose(numkit.matrix_function(np.zeros((3, 3)), np.exp), np.eye(3))


def test_matrix_function_identity_and_roundtrip(rng):
    A = random_hermitian(5, rng, scale=3.0)
    assert np.linalg.norm(numkit.matrix_function(A, lambda w: w) - A) <= 1e-12 * 5
    E = numkit.matrix_function(A, np.exp)
    assert np.allclose(E, expm(A), atol=1e-12)
    assert np.linalg.norm(numkit.matrix_function(E, np.log) - A) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_matrix_function_composition(n, seed):
    A = random_hermitian(n, np.random.default_rng(seed), scale=2.0)
    once = numkit.matrix_function(A, lambda w: np.sin(np.exp(w)))
    twice = numkit.matrix_function(numkit.matrix_function(A, np.exp), np.sin)
    assert np.linalg.norm(once - twice) <= 1e-10


def test_matrix_function_domain_error():
    with pytest.raises(NumericalDomainError, match="-1"):
        numkit.matrix_function(np.diag([-1.0, 2.0]), np.log)


def test_log_density_examples():
    assert np.allclose(numkit.log_density(np.eye(2) / 2), -np.log(2) * np.eye(2))
    G = numkit.log_density(np.diag([2 / 3, 1 / 3]))
    assert np.allclose(G, np.diag(np.log([2 / 3, 1 / 3])))


def test_log_density_rank_deficient():
    with pytest.raises(NotFullRankError, match="state not full rank"):
        numkit.log_density(np.diag([1 - 1e-16, 1e-16]))


def test_log_density_trace_checked():
    with pytest.raises(ValidationError):
        numkit.log_density(np.eye(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_log_density_inverts_exp(n, seed):
    A = random_hermitian(n, np.random.default_rng(seed), scale=3.0)
    rho = expm(A)
    rho /= np.trace(rho).real
    G = numkit.log_density(rho)
    assert np.linalg.norm(expm(G) - rho) <= 1e-9
    shift = G - A
    assert np.linalg.norm(shift - shift[0, 0] * np.eye(n)) <= 1e-9


def test_gauss_legendre():
    x, w = numkit.gauss_legendre(1)
    assert np.allclose(x, [0.5]) and np.allclose(w, [1.0])
    x, w = numkit.gauss_legendre(2)
    assert abs(w @ x**2 - 1 / 3) <= 1e-15
    x, w = numkit.gauss_legendre(16)
    assert abs(w @ np.exp(x) - (np.e - 1)) <= 1e-14
    for order in (1, 7, 32, 64):
        x, w = numkit.gauss_legendre(order)
        assert np.all((x > 0) & (x < 1)) and np.all(w > 0)
        assert abs(w.sum() - 1) <= 1e-14
        assert abs(w @ x ** (2 * order - 1) - 1 / (2 * order)) <= 1e-13


@pytest.mark.parametrize("order", [0, 65, 2.5])
def test_gauss_legendre_range(order):
    with pytest.raises(ValidationError):
        numkit.gauss_legendre(order)
