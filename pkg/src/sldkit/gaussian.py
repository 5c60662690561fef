"""SLD and quantum Fisher information of multimode Gaussian states.

Conventions: quadratures ``r = (x_1..x_n, p_1..p_n)`` with ``[r_j, r_k] = i J_jk``;
covariance ``gamma_jk = tr(rho {dr_j, dr_k})`` so the vacuum has ``gamma = I``.
A state is described either by its moments ``(delta, gamma)`` or by its
generator ``rho = exp(-r^T omega r / 2 + r^T eta - ln Z)``.

The SLD is the quadratic operator ``L = r^T Phi r + r^T zeta - nu``. Two routes
compute it:

* generator route: go to the normal-mode frame of ``omega`` and weight the
  ladder-operator components of ``d omega`` and ``d eta`` by ``f = tanh(t/2)/(t/2)``
  evaluated at mode-energy differences, sums, and single energies;
* moment route: solve ``d gamma = gamma Phi gamma - J Phi J^T`` entrywise in
  the Williamson frame of ``gamma``, and ``d delta = gamma zeta / 2``.

Both return the SLD in lab coordinates. ``nu`` is always fixed by
``tr(rho L) = 0``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PureModeError, PurityBreakingError, UnphysicalCovarianceError, ValidationError
from .expstate import f_scalar
from .symplectic import ladder_map, n_modes_of, normal_modes, sympmat, symplectic_eigenvalues, williamson

PURE_FLOOR = 1e-9
_PURITY_TOL = 1e-6


def _as_vector(v, size: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (size,):
        raise ValidationError(f"{name} must have length {size}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite entries")
    return v


def _as_symmetric(A, size: int, name: str, tol: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape != (size, size):
        raise ValidationError(f"{name} must be {size}x{size}, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} has non-finite entries")
    asym = np.abs(A - A.T)
    if asym.max() > tol * max(1.0, np.abs(A).max()):
        j, k = np.unravel_index(np.argmax(asym), asym.shape)
        raise ValidationError(f"{name} is not symmetric at entry ({j}, {k}): asymmetry {asym[j, k]:.3e}")
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class GaussianMoments:
    """Mean vector ``delta`` and covariance ``gamma`` of an ``n``-mode Gaussian state."""

    delta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        n = n_modes_of(gamma, "covariance matrix")
        gamma = _as_symmetric(gamma, 2 * n, "covariance matrix", 1e-10)
        delta = _as_vector(self.delta, 2 * n, "mean vector")
        J = sympmat(n)
        low = np.linalg.eigvalsh(gamma + 1j * J)[0]
        if low < -1e-8:
            raise UnphysicalCovarianceError(
                f"unphysical covariance: gamma + iJ has eigenvalue {low:.3e} < 0"
            )
        lam = symplectic_eigenvalues(gamma)
        if lam[-1] < 1.0 - 1e-8:
            raise UnphysicalCovarianceError(f"unphysical covariance: symplectic eigenvalue {lam[-1]:.3e} < 1")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "delta", delta)

    @property
    def n_modes(self) -> int:
        return self.gamma.shape[0] // 2


@dataclass(frozen=True)
class GaussianGenerator:
    """``rho = exp(-r^T omega r / 2 + r^T eta - log_z)``; ``log_z`` defaults to the normalizing value."""

    omega: np.ndarray
    eta: np.ndarray
    log_z: float | None = None

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        n = n_modes_of(omega, "generator matrix Omega")
        omega = _as_symmetric(omega, 2 * n, "generator matrix Omega", 1e-10)
        eta = _as_vector(self.eta, 2 * n, "generator vector eta")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "eta", eta)
        if self.log_z is None:
            object.__setattr__(self, "log_z", log_partition(omega, eta))

    @property
    def n_modes(self) -> int:
        return self.omega.shape[0] // 2


@dataclass(frozen=True)
class MomentDerivatives:
    ddelta: np.ndarray
    dgamma: np.ndarray

    def __post_init__(self):
        dgamma = np.asarray(self.dgamma, dtype=float)
        n = n_modes_of(dgamma, "covariance derivative")
        object.__setattr__(self, "dgamma", _as_symmetric(dgamma, 2 * n, "covariance derivative", 1e-9))
        object.__setattr__(self, "ddelta", _as_vector(self.ddelta, 2 * n, "mean derivative"))


@dataclass(frozen=True)
class GeneratorDerivatives:
    domega: np.ndarray
    deta: np.ndarray

    def __post_init__(self):
        domega = np.asarray(self.domega, dtype=float)
        n = n_modes_of(domega, "generator matrix derivative")
        object.__setattr__(self, "domega", _as_symmetric(domega, 2 * n, "generator matrix derivative", 1e-9))
        object.__setattr__(self, "deta", _as_vector(self.deta, 2 * n, "generator vector derivative"))


@dataclass(frozen=True)
class QuadraticSLD:
    """``L = r^T Phi r + r^T zeta - nu`` in lab quadratures."""

    Phi: np.ndarray
    zeta: np.ndarray
    nu: float


def _check_shapes(n: int, d) -> None:
    size = d.dgamma.shape[0] if isinstance(d, MomentDerivatives) else d.domega.shape[0]
    if size != 2 * n:
        raise ValidationError(f"derivatives describe {size // 2} modes, state has {n}")


# ---------------------------------------------------------------------------
# conversions


def _log_two_sinh_half(eps: np.ndarray) -> np.ndarray:
    return 0.5 * eps + np.log1p(-np.exp(-eps))


def log_partition(omega: np.ndarray, eta: np.ndarray) -> float:
    """``ln tr exp(-r^T omega r / 2 + r^T eta)``.

    Each normal mode contributes ``-ln(2 sinh(eps/2))``; completing the square
    in the displacement adds ``eta^T omega^-1 eta / 2``.
    """
    eps = normal_modes(omega).spectrum
    return float(-np.sum(_log_two_sinh_half(eps)) + 0.5 * eta @ np.linalg.solve(omega, eta))


def generator_to_moments(g: GaussianGenerator) -> GaussianMoments:
    nm = normal_modes(g.omega)
    Si = nm.S_inv
    c = 1.0 / np.tanh(0.5 * nm.diagonal)
    gamma = (Si * c) @ Si.T
    return GaussianMoments(np.linalg.solve(g.omega, g.eta), gamma)


def _pure_mode_check(spectrum: np.ndarray, pure_floor: float) -> None:
    if spectrum[-1] < 1.0 + pure_floor:
        raise PureModeError(
            f"pure or near-pure mode: generator form diverges (symplectic eigenvalue "
            f"{spectrum[-1]:.12g} within {pure_floor:.0e} of 1)"
        )


def moments_to_generator(m: GaussianMoments, pure_floor: float = PURE_FLOOR) -> GaussianGenerator:
    dec = williamson(m.gamma)
    _pure_mode_check(dec.spectrum, pure_floor)
    lam = dec.diagonal
    eps = np.log((lam + 1.0) / (lam - 1.0))
    omega = (dec.S.T * eps) @ dec.S
    omega = 0.5 * (omega + omega.T)
    return GaussianGenerator(omega, omega @ m.delta)


def _frechet(X: np.ndarray, Xinv: np.ndarray, d: np.ndarray, E: np.ndarray, f, fprime) -> np.ndarray:
    # Frechet derivative of the primary matrix function f at X diag(d) X^-1 in direction E.
    dj, dk = d[:, None], d[None, :]
    gap = dj - dk
    close = np.abs(gap) <= 1e-10 * np.maximum(1.0, np.abs(dj) + np.abs(dk))
    with np.errstate(divide="ignore", invalid="ignore"):
        dd = np.where(close, fprime(0.5 * (dj + dk)), (f(dj) - f(dk)) / np.where(close, 1.0, gap))
    return X @ (dd * (Xinv @ E @ X)) @ Xinv


def moment_derivatives_from_generator(g: GaussianGenerator, gd: GeneratorDerivatives) -> MomentDerivatives:
    """Exact ``(d delta, d gamma)`` for a generator family.

    Uses ``gamma = coth(iJ omega / 2) iJ`` and differentiates the matrix
    function along ``iJ d omega`` in the normal-mode eigenbasis of ``iJ omega``.
    """
    n = g.n_modes
    _check_shapes(n, gd)
    nm = normal_modes(g.omega)
    V = ladder_map(n)
    X, Xinv = nm.S_inv @ V, V.conj().T @ nm.S
    d = np.concatenate([nm.spectrum, -nm.spectrum])
    iJ = 1j * sympmat(n)
    dA = _frechet(
        X, Xinv, d, iJ @ gd.domega,
        lambda x: 1.0 / np.tanh(0.5 * x),
        lambda x: -0.5 / np.sinh(0.5 * x) ** 2,
    )
    dgamma = (dA @ iJ).real
    delta = np.linalg.solve(g.omega, g.eta)
    ddelta = np.linalg.solve(g.omega, gd.deta - gd.domega @ delta)
    return MomentDerivatives(ddelta, 0.5 * (dgamma + dgamma.T))


def generator_derivatives_from_moments(
    m: GaussianMoments, md: MomentDerivatives, pure_floor: float = PURE_FLOOR
) -> GeneratorDerivatives:
    """Exact ``(d omega, d eta)`` for a moment family; inverse of the map above."""
    n = m.n_modes
    _check_shapes(n, md)
    dec = williamson(m.gamma)
    _pure_mode_check(dec.spectrum, pure_floor)
    V = ladder_map(n)
    X, Xinv = dec.S_inv @ V, V.conj().T @ dec.S
    d = np.concatenate([dec.spectrum, -dec.spectrum])
    iJ = 1j * sympmat(n)
    dA = _frechet(
        X, Xinv, d, md.dgamma @ iJ,
        lambda y: np.log((y + 1.0) / (y - 1.0)),
        lambda y: 2.0 / (1.0 - y * y),
    )
    domega = (iJ @ dA).real
    domega = 0.5 * (domega + domega.T)
    omega = moments_to_generator(m, pure_floor).omega
    return GeneratorDerivatives(domega, domega @ m.delta + omega @ md.ddelta)


# ---------------------------------------------------------------------------
# SLD helpers


def _lab_frame(m: GaussianMoments, Phi: np.ndarray, zeta_c: np.ndarray) -> QuadraticSLD:
    # r -> r - delta; nu re-imposes tr(rho L) = 0
    Phi = 0.5 * (Phi + Phi.T)
    delta = m.delta
    zeta = zeta_c - 2.0 * Phi @ delta
    nu = 0.5 * np.trace(m.gamma @ Phi) + delta @ Phi @ delta + delta @ zeta
    return QuadraticSLD(Phi, zeta, float(nu))


def sld_residuals(m: GaussianMoments, md: MomentDerivatives, sld: QuadraticSLD) -> dict:
    """Residuals of the defining equations for ``sld`` at state ``m``.

    ``covariance`` is ``||gamma Phi gamma - J Phi J^T - d gamma||_F``, ``mean``
    is ``||gamma zeta_c / 2 - d delta||`` with ``zeta_c`` the centred linear
    part, ``trace`` is the violation of ``tr(rho L) = 0``.
    """
    G, Phi = m.gamma, sld.Phi
    J = sympmat(m.n_modes)
    zeta_c = sld.zeta + 2.0 * Phi @ m.delta
    expect = 0.5 * np.trace(G @ Phi) + m.delta @ Phi @ m.delta + m.delta @ sld.zeta
    return {
        "covariance": float(np.linalg.norm(G @ Phi @ G - J @ Phi @ J.T - md.dgamma)),
        "mean": float(np.linalg.norm(0.5 * G @ zeta_c - md.ddelta)),
        "trace": float(abs(sld.nu - expect)),
    }


def qfi_from_sld(m: GaussianMoments, sld: QuadraticSLD) -> float:
    """``tr(rho L^2)`` evaluated from the SLD coefficients alone."""
    G, Phi = m.gamma, sld.Phi
    J = sympmat(m.n_modes)
    zeta_c = sld.zeta + 2.0 * Phi @ m.delta
    return float(
        0.5 * np.trace(G @ Phi @ G @ Phi) + 0.5 * np.trace(J @ Phi @ J @ Phi) + 0.5 * zeta_c @ G @ zeta_c
    )


def _linear_qfi(m: GaussianMoments, ddelta: np.ndarray) -> float:
    return float(2.0 * ddelta @ np.linalg.solve(m.gamma, ddelta))


# ---------------------------------------------------------------------------
# generator route


def _normal_mode_sld(g: GaussianGenerator, gd: GeneratorDerivatives):
    n = g.n_modes
    _check_shapes(n, gd)
    nm = normal_modes(g.omega)
    Si = nm.S_inv
    delta = np.linalg.solve(g.omega, g.eta)
    deta_c = gd.deta - gd.domega @ delta
    V = ladder_map(n)
    Vh = V.conj().T
    dom_lad = Vh @ (Si.T @ gd.domega @ Si) @ V
    deta_lad = Vh @ (Si.T @ deta_c)
    eps = nm.diagonal
    block = np.arange(2 * n) < n
    same = block[:, None] == block[None, :]
    weight = np.where(same, f_scalar(eps[:, None] - eps[None, :]), f_scalar(eps[:, None] + eps[None, :]))
    phi_lad = -0.5 * weight * dom_lad
    zeta_lad = f_scalar(eps) * deta_lad
    return nm, phi_lad, zeta_lad


def sld_from_generator(g: GaussianGenerator, gd: GeneratorDerivatives) -> QuadraticSLD:
    nm, phi_lad, zeta_lad = _normal_mode_sld(g, gd)
    V = ladder_map(g.n_modes)
    phi_s = (V @ phi_lad @ V.conj().T).real
    zeta_s = (V @ zeta_lad).real
    Phi = nm.S.T @ phi_s @ nm.S
    zeta_c = nm.S.T @ zeta_s
    return _lab_frame(generator_to_moments(g), Phi, zeta_c)


def qfi_from_generator(g: GaussianGenerator, gd: GeneratorDerivatives) -> float:
    """Fisher information as the coth-weighted sum over normal-mode SLD components."""
    nm, phi_lad, zeta_lad = _normal_mode_sld(g, gd)
    n = g.n_modes
    c = 1.0 / np.tanh(0.5 * nm.spectrum)
    A2 = np.abs(phi_lad[:n, :n]) ** 2
    B2 = np.abs(phi_lad[:n, n:]) ** 2
    total = np.sum((A2 + B2) * np.outer(c, c) + B2 - A2) + np.sum(np.abs(zeta_lad[:n]) ** 2 * c)
    return float(total)


# ---------------------------------------------------------------------------
# moment route


def sld_from_moments(m: GaussianMoments, md: MomentDerivatives, pure_floor: float = PURE_FLOOR) -> QuadraticSLD:
    """General moment-form SLD via the Williamson frame of the covariance.

    Pairs of pure modes have a vanishing denominator; there the numerator must
    vanish too and the pure-state limit ``-J dgamma_s J^T / 2`` is used.
    """
    n = m.n_modes
    _check_shapes(n, md)
    J = sympmat(n)
    dec = williamson(m.gamma)
    lam = dec.diagonal
    dg_s = dec.S @ md.dgamma @ dec.S.T
    jdj = J @ dg_s @ J.T
    num = np.outer(lam, lam) * dg_s + jdj
    den = np.outer(lam, lam) ** 2 - 1.0
    pure = lam < 1.0 + pure_floor
    both = pure[:, None] & pure[None, :]
    phi_s = np.empty_like(num)
    phi_s[~both] = num[~both] / den[~both]
    if both.any():
        bad = np.abs(num[both]).max()
        if bad > _PURITY_TOL * max(1.0, np.linalg.norm(dg_s)):
            raise PurityBreakingError(
                f"SLD undefined: purity-breaking derivative on pure mode (numerator {bad:.3e})"
            )
        phi_s[both] = -0.5 * jdj[both]
    Phi = dec.S.T @ phi_s @ dec.S
    zeta_c = 2.0 * np.linalg.solve(m.gamma, md.ddelta)
    return _lab_frame(m, Phi, zeta_c)


def qfi_from_moments(m: GaussianMoments, md: MomentDerivatives, pure_floor: float = PURE_FLOOR) -> float:
    sld = sld_from_moments(m, md, pure_floor)
    return float(0.5 * np.sum(md.dgamma * sld.Phi)) + _linear_qfi(m, md.ddelta)


# ---------------------------------------------------------------------------
# special cases


def _gamma_inv_dgamma(m: GaussianMoments, md: MomentDerivatives) -> np.ndarray:
    Gi = np.linalg.inv(m.gamma)
    return Gi @ md.dgamma @ Gi


def _check_pure(m: GaussianMoments, md: MomentDerivatives, pure_floor: float) -> np.ndarray:
    _check_shapes(m.n_modes, md)
    lam = williamson(m.gamma).spectrum
    if lam[0] > 1.0 + pure_floor:
        raise ValidationError(
            f"state is not pure (largest symplectic eigenvalue {lam[0]:.12g}); use sld_from_moments"
        )
    J = sympmat(m.n_modes)
    a = _gamma_inv_dgamma(m, md)
    b = -J @ md.dgamma @ J.T
    gap = np.linalg.norm(a - b)
    if gap > _PURITY_TOL * max(1.0, np.linalg.norm(md.dgamma)):
        raise PurityBreakingError(
            f"purity-breaking derivative: gamma^-1 dgamma gamma^-1 and -J dgamma J^T differ by {gap:.3e}"
        )
    return a


def sld_pure(m: GaussianMoments, md: MomentDerivatives, pure_floor: float = PURE_FLOOR) -> QuadraticSLD:
    """SLD of a pure Gaussian state, ``Phi = gamma^-1 dgamma gamma^-1 / 2``."""
    a = _check_pure(m, md, pure_floor)
    return _lab_frame(m, 0.5 * a, 2.0 * np.linalg.solve(m.gamma, md.ddelta))


def qfi_pure(m: GaussianMoments, md: MomentDerivatives, pure_floor: float = PURE_FLOOR) -> float:
    _check_pure(m, md, pure_floor)
    M = md.dgamma @ np.linalg.inv(m.gamma)
    return float(0.25 * np.trace(M @ M)) + _linear_qfi(m, md.ddelta)


def _degenerate_lambda(m: GaussianMoments, pure_floor: float) -> float:
    lam = williamson(m.gamma).spectrum
    if lam[0] - lam[-1] > 1e-8:
        raise ValidationError(
            f"symplectic spectrum is not degenerate (spread {lam[0] - lam[-1]:.3e}); use sld_from_moments"
        )
    lam0 = float(np.mean(lam))
    if lam0 <= 1.0 + pure_floor:
        raise ValidationError("degenerate formula needs a mixed state; use sld_pure")
    return lam0


def sld_degenerate(m: GaussianMoments, md: MomentDerivatives, pure_floor: float = PURE_FLOOR) -> QuadraticSLD:
    """Closed form for equal symplectic eigenvalues (every single-mode state)."""
    _check_shapes(m.n_modes, md)
    lam = _degenerate_lambda(m, pure_floor)
    J = sympmat(m.n_modes)
    l4 = lam ** 4
    Phi = (l4 * _gamma_inv_dgamma(m, md) + J @ md.dgamma @ J.T) / (l4 - 1.0)
    return _lab_frame(m, Phi, 2.0 * np.linalg.solve(m.gamma, md.ddelta))


def qfi_degenerate(m: GaussianMoments, md: MomentDerivatives, pure_floor: float = PURE_FLOOR) -> float:
    _check_shapes(m.n_modes, md)
    lam = _degenerate_lambda(m, pure_floor)
    J = sympmat(m.n_modes)
    M = md.dgamma @ np.linalg.inv(m.gamma)
    K = md.dgamma @ J
    l4 = lam ** 4
    return float(np.trace(l4 * M @ M - K @ K) / (2.0 * (l4 - 1.0))) + _linear_qfi(m, md.ddelta)


def qfi_noisy_approx(m: GaussianMoments, md: MomentDerivatives) -> float:
    """Large-noise approximation ``tr((dgamma gamma^-1)^2) / 2 + 2 ddelta^T gamma^-1 ddelta``.

    No accuracy guarantee; the quadratic term carries a relative error of order
    ``1 / lambda^2`` for symplectic eigenvalues ``lambda``.
    """
    _check_shapes(m.n_modes, md)
    M = md.dgamma @ np.linalg.inv(m.gamma)
    return float(0.5 * np.trace(M @ M)) + _linear_qfi(m, md.ddelta)
