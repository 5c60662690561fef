"""Dense linear-algebra kernel: Hermitian eigensystems, matrix functions, quadrature."""

from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, NotFullRankError, NumericalDomainError, ValidationError

# Eigenvalues of a density matrix below RANK_FLOOR * max eigenvalue count as zero.
RANK_FLOOR = 1e-12
HERMITIAN_TOL = 1e-12


class EigenSystem(NamedTuple):
    """Ascending eigenvalues and the unitary whose columns are the eigenvectors."""

    eigenvalues: np.ndarray
    basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.conj().T

    def to_basis(self, A: np.ndarray) -> np.ndarray:
        """Matrix elements of ``A`` between eigenvectors, ``U^dag A U``."""
        return self.basis.conj().T @ A @ self.basis

    def from_basis(self, A: np.ndarray) -> np.ndarray:
        return self.basis @ A @ self.basis.conj().T


def check_hermitian(A, name: str = "matrix", tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a square Hermitian matrix and return it as a complex array.

    The tolerance is absolute for matrices of norm up to one and relative
    beyond that. The returned array is exactly Hermitian.

    Raises:
        ValidationError: naming the first offending ``(row, col)`` entry.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} has non-finite entries")
    dev = np.abs(A - A.conj().T)
    scale = max(1.0, float(np.max(np.abs(A))))
    if dev.max() > tol * scale:
        j, k = np.unravel_index(np.argmax(dev), dev.shape)
        raise ValidationError(
            f"{name} is not Hermitian: entry ({j}, {k}) differs from the conjugate of "
            f"({k}, {j}) by {dev[j, k]:.3e}"
        )
    return 0.5 * (A + A.conj().T)


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def eig_hermitian(A: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Ties keep LAPACK's column order (stable sort), so repeated calls on the
    same input give identical output.
    """
    A = np.asarray(A)
    try:
        w, U = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"Hermitian eigensolver did not converge for a {A.shape[0]}x{A.shape[0]} matrix"
        ) from exc
    order = np.argsort(w, kind="stable")
    return EigenSystem(w[order], U[:, order])


def matrix_function(
    A: np.ndarray, func: Callable[[np.ndarray], np.ndarray], eig: EigenSystem | None = None
) -> np.ndarray:
    """Apply a real scalar function to a Hermitian matrix through its spectrum.

    ``func`` receives the eigenvalue array and must return finite values.
    """
    es = eig if eig is not None else eig_hermitian(A)
    with np.errstate(all="ignore"):
        fw = np.asarray(func(es.eigenvalues), dtype=float)
    bad = ~np.isfinite(fw)
    if bad.any():
        raise NumericalDomainError(
            f"function is not finite at eigenvalue {es.eigenvalues[np.argmax(bad)]!r}"
        )
    return (es.basis * fw) @ es.basis.conj().T


def log_density(rho: np.ndarray, rank_floor: float = RANK_FLOOR) -> np.ndarray:
    """Generator ``G = ln rho`` of a full-rank density matrix."""
    rho = check_hermitian(rho, "density matrix", tol=1e-10)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-10:
        raise ValidationError(f"density matrix has trace {tr!r}, expected 1")
    es = eig_hermitian(rho)
    p = es.eigenvalues
    if p[0] <= rank_floor * p[-1]:
        raise NotFullRankError(
            f"state not full rank: eigenvalue {p[0]:.3e} is below the rank floor "
            f"{rank_floor:.0e} relative to {p[-1]:.3e}"
        )
    return matrix_function(rho, np.log, eig=es)


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to the unit interval."""
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= 64:
        raise ValidationError(f"quadrature order must be an integer in [1, 64], got {order!r}")
    x, w = np.polynomial.legendre.leggauss(int(order))
    return 0.5 * (x + 1.0), 0.5 * w
