"""Independent oracles and random instance generators for the test suite.

Nothing here calls the routes under test: derivatives of ``e^G`` come from
finite differences of scipy's ``expm`` and Gaussian Fisher information from a
dense Kronecker-product solve of the defining covariance equation.
"""

import numpy as np
from scipy.linalg import expm, logm

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def qubit_qfi(gamma, gamma_dot, tau1=0.0, tau2=0.0):
    """Closed-form qubit Fisher information."""
    return gamma_dot**2 / np.cosh(gamma) ** 2 + (np.tanh(gamma) / gamma) ** 2 * (tau1**2 + tau2**2)


def haar_unitary(n, rng):
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_hermitian(n, rng, scale=1.0):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A = 0.5 * (A + A.conj().T)
    return scale * A / np.linalg.norm(A)


def random_generator(dim, spread, rng):
    """Normalized ``G`` whose eigenvalues span exactly ``spread``."""
    g = np.sort(rng.uniform(0, 1, dim))
    g = (g - g[0]) / (g[-1] - g[0]) * spread if dim > 1 else np.zeros(1)
    U = haar_unitary(dim, rng)
    G = (U * g) @ U.conj().T
    G = 0.5 * (G + G.conj().T)
    return G - np.log(np.trace(expm(G)).real) * np.eye(dim)


def traceless_derivative(G, dG):
    rho = expm(G)
    return dG - np.trace(rho @ dG) * np.eye(len(G))


def rhodot_fd(G, dG, h=1e-4):
    """Fourth-order central difference of ``expm(G + t dG)``."""
    f = lambda t: expm(G + t * dG)
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def sld_sylvester(rho, drho):
    """Solve ``drho = (L rho + rho L) / 2`` as a dense Kronecker linear system."""
    n = len(rho)
    eye = np.eye(n)
    A = 0.5 * (np.kron(eye, rho) + np.kron(rho.T, eye))
    L = np.linalg.solve(A, drho.reshape(-1, order="F")).reshape(n, n, order="F")
    return 0.5 * (L + L.conj().T)


def qfi_of(rho, L):
    return float(np.trace(rho @ L @ L).real)


def sympmat(n):
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


def random_symplectic(n, rng, squeeze=0.5):
    """``exp(J H)`` for random symmetric ``H`` is symplectic."""
    J = sympmat(n)
    H = rng.standard_normal((2 * n, 2 * n))
    H = squeeze * (H + H.T) / np.linalg.norm(H + H.T)
    return expm(J @ H)


def random_covariance(n, rng, lam_min=1.1, lam_max=3.0):
    S = random_symplectic(n, rng)
    lam = rng.uniform(lam_min, lam_max, n)
    return S @ np.diag(np.concatenate([lam, lam])) @ S.T


def random_symmetric(n, rng):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)


def gaussian_qfi_kron(gamma, dgamma, ddelta):
    """Solve ``dgamma = gamma Phi gamma - J Phi J^T`` by vectorization."""
    J = sympmat(len(gamma) // 2)
    M = np.kron(gamma, gamma) - np.kron(J, J)
    Phi = np.linalg.solve(M, dgamma.reshape(-1)).reshape(gamma.shape)
    return 0.5 * np.trace(dgamma @ Phi) + 2 * ddelta @ np.linalg.solve(gamma, ddelta)


def log_density(rho):
    return logm(rho)
