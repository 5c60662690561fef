"""Symplectic structure for ``n`` bosonic modes in block ordering ``(x_1..x_n, p_1..p_n)``."""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalDomainError, UnphysicalCovarianceError, ValidationError
from .numkit import eig_hermitian, matrix_function

_SQRT_HALF = np.sqrt(0.5)


def sympmat(n_modes: int) -> np.ndarray:
    """Symplectic form ``J = [[0, I], [-I, 0]]``."""
    if n_modes < 1:
        raise ValidationError(f"number of modes must be positive, got {n_modes}")
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def ladder_map(n_modes: int) -> np.ndarray:
    """Unitary ``V`` with ``V a = r`` where ``a = (a_1..a_n, a_1^dag..a_n^dag)``."""
    eye = np.eye(n_modes)
    return _SQRT_HALF * np.block([[eye, eye], [-1j * eye, 1j * eye]])


def n_modes_of(A: np.ndarray, name: str = "matrix") -> int:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2 or A.shape[0] == 0:
        raise ValidationError(f"{name} must be a square matrix of even dimension, got shape {A.shape}")
    return A.shape[0] // 2


def is_symplectic(S) -> float:
    """Residual ``||S J S^T - J||_F``; callers threshold it (typically at 1e-8)."""
    S = np.asarray(S, dtype=float)
    J = sympmat(n_modes_of(S, "S"))
    return float(np.linalg.norm(S @ J @ S.T - J))


def symplectic_inverse(S: np.ndarray) -> np.ndarray:
    J = sympmat(S.shape[0] // 2)
    return -J @ S.T @ J


def symplectic_eigenvalues(A) -> np.ndarray:
    """Positive eigenvalues of ``iJA``, descending; independent of :func:`williamson`."""
    A = np.asarray(A, dtype=float)
    n = n_modes_of(A)
    w = np.linalg.eigvals(1j * sympmat(n) @ A).real
    return np.sort(w)[::-1][:n]


@dataclass(frozen=True)
class SymplecticDecomposition:
    """``S`` with ``S A S^T = diag(spectrum, spectrum)`` (covariance input) or
    ``S^-T A S^-1 = diag(spectrum, spectrum)`` (generator input)."""

    S: np.ndarray
    spectrum: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.spectrum)

    @property
    def S_inv(self) -> np.ndarray:
        return symplectic_inverse(self.S)

    @property
    def diagonal(self) -> np.ndarray:
        return np.concatenate([self.spectrum, self.spectrum])


def _check_symmetric_pd(A, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    n_modes_of(A, name)
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} has non-finite entries")
    asym = np.max(np.abs(A - A.T))
    if asym > 1e-10 * max(1.0, np.max(np.abs(A))):
        raise ValidationError(f"{name} is not symmetric (max asymmetry {asym:.3e})")
    A = 0.5 * (A + A.T)
    w = np.linalg.eigvalsh(A)
    if w[0] <= 0:
        raise NumericalDomainError(f"{name} is not positive definite (smallest eigenvalue {w[0]:.3e})")
    return A


def _williamson_core(A: np.ndarray) -> SymplecticDecomposition:
    # A^{1/2} J A^{1/2} = O diag(L, L) J O^T with O orthogonal; S = diag(L,L)^{1/2} O^T A^{-1/2}.
    n = A.shape[0] // 2
    J = sympmat(n)
    root = matrix_function(A, np.sqrt).real
    inv_root = matrix_function(A, lambda w: 1.0 / np.sqrt(w)).real
    K = root @ J @ root
    es = eig_hermitian(1j * K)
    # positive half of the +-L spectrum, descending
    idx = np.arange(2 * n - 1, n - 1, -1)
    spectrum = es.eigenvalues[idx]
    O = np.empty((2 * n, 2 * n))
    for col, i in enumerate(idx):
        v = -1j * es.basis[:, i]
        mag = np.abs(v)
        lead = int(np.flatnonzero(mag >= mag.max() - 1e-8)[0])
        v = v * (np.conj(v[lead]) / mag[lead])
        ox = np.sqrt(2.0) * v.real
        op = -np.sqrt(2.0) * v.imag
        if ox[0] < -1e-14:
            ox, op = -ox, -op
        O[:, col] = ox
        O[:, n + col] = op
    d = np.concatenate([spectrum, spectrum])
    S = (np.sqrt(d)[:, None] * O.T) @ inv_root
    return SymplecticDecomposition(S, spectrum)


def williamson(gamma) -> SymplecticDecomposition:
    """Bring a covariance matrix to ``S gamma S^T = diag(L, L)``, ``L`` descending.

    Raises:
        UnphysicalCovarianceError: if a symplectic eigenvalue falls below one,
            i.e. ``gamma + iJ`` is not positive semidefinite.
    """
    gamma = _check_symmetric_pd(gamma, "covariance matrix")
    dec = _williamson_core(gamma)
    if dec.spectrum[-1] < 1.0 - 1e-6:
        raise UnphysicalCovarianceError(
            f"unphysical covariance: symplectic eigenvalue {dec.spectrum[-1]:.6f} < 1"
        )
    return dec


def normal_modes(omega) -> SymplecticDecomposition:
    """Symplectic ``S`` with ``S^-T omega S^-1 = diag(eps, eps)``, ``eps`` descending."""
    omega = _check_symmetric_pd(omega, "generator matrix Omega")
    core = _williamson_core(omega)
    J = sympmat(core.n_modes)
    return SymplecticDecomposition(-J @ core.S @ J, core.spectrum)


def orthosymplectic(U: np.ndarray) -> np.ndarray:
    """Real orthogonal symplectic matrix of an ``n x n`` unitary (passive linear optics)."""
    X, Y = U.real, U.imag
    return np.block([[X, -Y], [Y, X]])


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_symplectic(n_modes: int, seed: int, max_squeeze: float = 0.6) -> np.ndarray:
    """Seeded random symplectic matrix ``O1 diag(e^-r, e^r) O2``."""
    if not 1 <= n_modes <= 4:
        raise ValidationError(f"n_modes must be in [1, 4], got {n_modes}")
    rng = np.random.default_rng(seed)
    U1 = _haar_unitary(n_modes, rng)
    U2 = _haar_unitary(n_modes, rng)
    r = rng.uniform(-max_squeeze, max_squeeze, size=n_modes)
    D = np.diag(np.concatenate([np.exp(-r), np.exp(r)]))
    return orthosymplectic(U1) @ D @ orthosymplectic(U2)
