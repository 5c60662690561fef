"""Truncated Fock-space brute force for single-mode Gaussian states.

States are built in a padded working space and compressed to the requested
truncation, so edge effects of the truncated exponentials stay in the padding.
The trace lost in the compression is the leakage and must stay below
:data:`LEAKAGE_BUDGET`.
"""

import numpy as np

from .errors import TruncationError, ValidationError
from .expstate import sld_direct
from .gaussian import GaussianGenerator, GaussianMoments
from .numkit import eig_hermitian, hermitian_part

LEAKAGE_BUDGET = 1e-6
DEFAULT_PAD = 40


def ladder_ops(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation operators on the lowest ``N`` number states."""
    if N < 2:
        raise ValidationError(f"truncation must be at least 2, got {N}")
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def quadratures(N: int) -> tuple[np.ndarray, np.ndarray]:
    a, ad = ladder_ops(N)
    return (a + ad) / np.sqrt(2.0), (a - ad) / (1j * np.sqrt(2.0))


def _exp_minus_i(H: np.ndarray) -> np.ndarray:
    es = eig_hermitian(H)
    return (es.basis * np.exp(-1j * es.eigenvalues)) @ es.basis.conj().T


def _compress(rho: np.ndarray, N: int) -> np.ndarray:
    out = hermitian_part(rho[:N, :N])
    leakage = 1.0 - np.trace(out).real
    if leakage > LEAKAGE_BUDGET:
        raise TruncationError(
            f"increase truncation: trace leakage {leakage:.3e} exceeds {LEAKAGE_BUDGET:.0e} at N = {N}"
        )
    return out


def thermal_populations(nbar: float, M: int) -> np.ndarray:
    """``nbar^n / (nbar + 1)^(n+1)`` for ``n < M``."""
    n = np.arange(M)
    if nbar == 0:
        return (n == 0).astype(float)
    return np.exp(n * np.log(nbar) - (n + 1) * np.log1p(nbar))


def gaussian_fock(
    nbar: float,
    r: float,
    phi: float,
    alpha: complex,
    N: int,
    rotation: float = 0.0,
    pad: int = DEFAULT_PAD,
) -> np.ndarray:
    """``R D(alpha) S(r e^{i phi}) rho_th(nbar) S^dag D^dag R^dag`` with ``R = e^{-i rotation n}``.

    ``S(z) = exp((z* a^2 - z a^dag^2) / 2)`` and ``D(alpha) = exp(alpha a^dag - alpha* a)``.
    """
    if nbar < 0:
        raise ValidationError(f"thermal occupation must be nonnegative, got {nbar}")
    M = N + pad
    a, ad = ladder_ops(M)
    rho = np.diag(thermal_populations(nbar, M)).astype(complex)
    U = np.eye(M, dtype=complex)
    if r != 0.0:
        z = r * np.exp(1j * phi)
        # S = exp(K) with K anti-Hermitian; exp(K) = exp(-i (iK))
        K = 0.5 * (np.conj(z) * a @ a - z * ad @ ad)
        U = _exp_minus_i(hermitian_part(1j * K)) @ U
    if alpha != 0:
        K = alpha * ad - np.conj(alpha) * a
        U = _exp_minus_i(hermitian_part(1j * K)) @ U
    if rotation != 0.0:
        U = np.exp(-1j * rotation * np.arange(M))[:, None] * U
    return _compress(U @ rho @ U.conj().T, N)


def quadratic_form_fock(omega: np.ndarray, M: int) -> np.ndarray:
    """Exact compression of ``r^T omega r`` (one mode) to ``M`` levels."""
    a, ad = ladder_ops(M)
    aa, adad, num = a @ a, ad @ ad, ad @ a
    eye = np.eye(M)
    x2 = 0.5 * (aa + adad + 2 * num + eye)
    p2 = 0.5 * (-aa - adad + 2 * num + eye)
    xp_px = -1j * (aa - adad)
    return omega[0, 0] * x2 + omega[1, 1] * p2 + 0.5 * (omega[0, 1] + omega[1, 0]) * xp_px


def generator_fock(g: GaussianGenerator, N: int, pad: int = DEFAULT_PAD) -> np.ndarray:
    """``exp(-r^T omega r / 2 + r^T eta - ln Z)`` exponentiated directly in Fock space."""
    if g.n_modes != 1:
        raise ValidationError("Fock rendering supports single-mode states only")
    M = N + pad
    x, p = quadratures(M)
    G = -0.5 * quadratic_form_fock(g.omega, M) + g.eta[0] * x + g.eta[1] * p - g.log_z * np.eye(M)
    es = eig_hermitian(hermitian_part(G))
    rho = (es.basis * np.exp(es.eigenvalues)) @ es.basis.conj().T
    return _compress(rho, N)


def single_mode_parameters(m: GaussianMoments) -> dict:
    """``(nbar, r, phi, alpha)`` with ``gaussian_fock`` reproducing the moments ``m``."""
    if m.n_modes != 1:
        raise ValidationError("Fock rendering supports single-mode states only")
    G = m.gamma
    d = np.sqrt(np.linalg.det(G))
    ch_cos = (G[1, 1] - G[0, 0]) / (2 * d)
    sh_sin = -G[0, 1] / d
    sh = np.hypot(ch_cos, sh_sin)
    return {
        "nbar": max(0.0, 0.5 * (d - 1.0)),
        "r": 0.5 * np.arcsinh(sh),
        "phi": float(np.arctan2(sh_sin, ch_cos)) if sh > 0 else 0.0,
        "alpha": complex(m.delta[0], m.delta[1]) / np.sqrt(2.0),
    }


def fock_from_moments(m: GaussianMoments, N: int, pad: int = DEFAULT_PAD) -> np.ndarray:
    return gaussian_fock(N=N, pad=pad, **single_mode_parameters(m))


def measure_moments(rho: np.ndarray) -> GaussianMoments:
    """Quadrature means and symmetrized covariance read off a Fock density matrix."""
    x, p = quadratures(rho.shape[0])
    ops = (x, p)
    delta = np.array([np.trace(rho @ o).real for o in ops])
    gamma = np.empty((2, 2))
    for j in range(2):
        for k in range(2):
            dj = ops[j] - delta[j] * np.eye(len(rho))
            dk = ops[k] - delta[k] * np.eye(len(rho))
            gamma[j, k] = np.trace(rho @ (dj @ dk + dk @ dj)).real
    return GaussianMoments(delta, gamma)


def _render(family, theta: float, N: int) -> np.ndarray:
    rho = family(theta, N) if callable(family) else family.density(theta, N)
    # truncation loses up to LEAKAGE_BUDGET of trace; restoring it keeps d(rho) traceless
    return rho / np.trace(rho).real


def oracle_qfi(family, theta: float, h: float = 1e-4, N: int = 80, check_convergence: bool = True):
    """Brute-force ``(qfi, L)`` from central differences of rendered density matrices.

    ``family`` is either a callable ``(theta, N) -> rho`` or an object with a
    ``density(theta, N)`` method. With ``check_convergence`` the computation is
    repeated at ``N + 20`` and must move the result by less than 1e-6.
    """
    if not 1e-6 <= h <= 1e-2:
        raise ValidationError(f"finite-difference step must lie in [1e-6, 1e-2], got {h}")

    def at(n_levels):
        rho = _render(family, theta, n_levels)
        drho = (_render(family, theta + h, n_levels) - _render(family, theta - h, n_levels)) / (2 * h)
        res = sld_direct(rho, hermitian_part(drho), project_support=True)
        return res.qfi, res.L

    qfi, L = at(N)
    if check_convergence and L.shape[0] == N:
        shift = abs(at(N + 20)[0] - qfi)
        if shift >= 1e-6:
            raise TruncationError(
                f"increase truncation: oracle QFI moved by {shift:.3e} between N = {N} and N = {N + 20}"
            )
    return qfi, L
