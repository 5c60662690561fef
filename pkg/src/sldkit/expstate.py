"""SLD and quantum Fisher information for finite-dimensional states ``rho = exp(G)``.

Four routes are provided and are expected to agree:

* :func:`sld_eigenbasis` weights the matrix elements of ``dG`` in the
  eigenbasis of ``G`` by ``f(g_j - g_k)`` with ``f(t) = tanh(t/2) / (t/2)``;
* :func:`sld_series` sums ``f_n C^n(dG)`` over nested commutators with ``G``;
* :func:`sld_direct` divides ``2 drho_jk`` by ``p_j + p_k`` in the eigenbasis
  of ``rho`` and is the reference for everything else;
* :func:`sld_unitary_family` handles ``rho(theta) = e^{-i theta H} rho e^{i theta H}``
  with ``L = 2i tanh(C/2)(H)``.

:func:`rhodot_wilcox` evaluates ``drho`` from ``dG`` by quadrature of the
Wilcox integral, giving the direct route an independent input.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, pi

import numpy as np
from scipy.linalg import expm

from .errors import BoundUndefinedError, NotFullRankError, SeriesDivergentError, ValidationError
from .numkit import (
    RANK_FLOOR,
    EigenSystem,
    check_hermitian,
    eig_hermitian,
    gauss_legendre,
    hermitian_part,
    log_density,
)

MAX_SERIES_ORDER = 60
DEFAULT_SERIES_ORDER = 40
_SMALL_T = 1e-4


@lru_cache(maxsize=None)
def _bernoulli_table(m_max: int) -> tuple[Fraction, ...]:
    B = [Fraction(1)]
    for m in range(1, m_max + 1):
        B.append(-sum(comb(m + 1, k) * B[k] for k in range(m)) / (m + 1))
    return tuple(B)


def bernoulli(m: int) -> Fraction:
    """Bernoulli number ``B_m`` (``B_1 = -1/2`` convention) as an exact rational."""
    if m < 0:
        raise ValidationError(f"Bernoulli index must be nonnegative, got {m}")
    return _bernoulli_table(max(m, MAX_SERIES_ORDER + 2))[m]


def f_coefficient(n: int) -> Fraction:
    """Taylor coefficient of ``t^n`` in ``tanh(t/2) / (t/2)``, exactly.

    Odd orders vanish; even ones are ``4 (4^(n/2+1) - 1) B_(n+2) / (n+2)!``.
    """
    if not isinstance(n, (int, np.integer)) or not 0 <= n <= MAX_SERIES_ORDER:
        raise ValidationError(f"coefficient index must be an integer in [0, {MAX_SERIES_ORDER}], got {n!r}")
    n = int(n)
    if n % 2:
        return Fraction(0)
    return 4 * (4 ** (n // 2 + 1) - 1) * bernoulli(n + 2) / factorial(n + 2)


_F_SMALL = [float(f_coefficient(n)) for n in (0, 2, 4, 6, 8)]


def f_scalar(t):
    """``tanh(t/2) / (t/2)``, finite and smooth through ``t = 0``."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SMALL_T
    t2 = t * t
    series = _F_SMALL[0] + t2 * (_F_SMALL[1] + t2 * (_F_SMALL[2] + t2 * (_F_SMALL[3] + t2 * _F_SMALL[4])))
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = np.tanh(0.5 * t) / (0.5 * t)
    out = np.where(small, series, closed)
    return out if out.ndim else float(out)


def _h_scalar(t: np.ndarray) -> np.ndarray:
    # (e^t - 1)/t
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t == 0.0, 1.0, np.expm1(t) / t)


@dataclass(frozen=True)
class ExponentialState:
    """Full-rank state written as ``rho = exp(G)`` with ``tr exp(G) = 1``."""

    G: np.ndarray
    eig: EigenSystem = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        G = check_hermitian(self.G, "generator G", tol=1e-10)
        object.__setattr__(self, "G", G)
        es = eig_hermitian(G)
        object.__setattr__(self, "eig", es)
        tr = float(np.sum(np.exp(es.eigenvalues)))
        if abs(tr - 1.0) > 1e-9:
            raise ValidationError(
                f"generator is not normalized: tr exp(G) = {tr!r}; use ExponentialState.normalized"
            )

    @classmethod
    def normalized(cls, G) -> "ExponentialState":
        """Shift ``G`` by a multiple of the identity so that ``tr exp(G) = 1``."""
        G = check_hermitian(G, "generator G", tol=1e-10)
        g = eig_hermitian(G).eigenvalues
        gmax = g[-1]
        log_z = gmax + np.log(np.sum(np.exp(g - gmax)))
        return cls(G - log_z * np.eye(G.shape[0]))

    @classmethod
    def from_density(cls, rho) -> "ExponentialState":
        return cls.normalized(log_density(rho))

    @property
    def dim(self) -> int:
        return self.G.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return np.exp(self.eig.eigenvalues)

    @property
    def rho(self) -> np.ndarray:
        es = self.eig
        return (es.basis * self.populations) @ es.basis.conj().T

    @property
    def spread(self) -> float:
        g = self.eig.eigenvalues
        return float(g[-1] - g[0])


@dataclass(frozen=True)
class SLDResult:
    L: np.ndarray
    qfi: float


def check_generator_derivative(state: ExponentialState, Gdot, tol: float = 1e-8) -> np.ndarray:
    """Validate ``dG`` against ``state``: Hermitian with ``tr(rho dG) = 0``."""
    Gdot = check_hermitian(Gdot, "generator derivative", tol=1e-10)
    if Gdot.shape != state.G.shape:
        raise ValidationError(f"derivative shape {Gdot.shape} does not match state {state.G.shape}")
    drift = abs(np.trace(state.rho @ Gdot))
    if drift > tol * max(1.0, np.linalg.norm(Gdot)):
        raise ValidationError(
            f"generator derivative is not trace preserving: tr(rho dG) = {drift:.3e}"
        )
    return Gdot


def rhodot_eigenbasis(state: ExponentialState, Gdot: np.ndarray) -> np.ndarray:
    """``drho`` from ``dG`` via ``drho_jk = e^{g_k} h(g_j - g_k) dG_jk``."""
    g = state.eig.eigenvalues
    gap = g[:, None] - g[None, :]
    Gp = state.eig.to_basis(Gdot)
    return hermitian_part(state.eig.from_basis(np.exp(g)[None, :] * _h_scalar(gap) * Gp))


def sld_residual(rho: np.ndarray, rhodot: np.ndarray, L: np.ndarray) -> float:
    """Frobenius norm of ``drho - (L rho + rho L) / 2``."""
    return float(np.linalg.norm(rhodot - 0.5 * (L @ rho + rho @ L)))


def sld_eigenbasis(state: ExponentialState, Gdot) -> SLDResult:
    Gdot = check_generator_derivative(state, Gdot)
    g = state.eig.eigenvalues
    Lp = f_scalar(g[:, None] - g[None, :]) * state.eig.to_basis(Gdot)
    qfi = float(np.sum(np.exp(g)[:, None] * np.abs(Lp) ** 2))
    return SLDResult(hermitian_part(state.eig.from_basis(Lp)), qfi)


def sld_direct(
    rho, rhodot, rank_floor: float = RANK_FLOOR, project_support: bool = False
) -> SLDResult:
    """Reference SLD ``L_jk = 2 drho_jk / (p_j + p_k)`` in the eigenbasis of ``rho``.

    With ``project_support`` set, pairs whose combined weight falls below the
    rank floor are dropped instead of raising; this is how truncated Fock
    states with numerically empty tails are handled.
    """
    rho = check_hermitian(rho, "density matrix", tol=1e-10)
    rhodot = check_hermitian(rhodot, "density derivative", tol=1e-9)
    if abs(np.trace(rhodot)) > 1e-8 * max(1.0, np.linalg.norm(rhodot)):
        raise ValidationError(f"density derivative has trace {np.trace(rhodot).real:.3e}, expected 0")
    es = eig_hermitian(rho)
    p = es.eigenvalues
    floor = rank_floor * p[-1]
    denom = p[:, None] + p[None, :]
    if project_support:
        keep = denom > floor
    else:
        if p[0] <= floor:
            raise NotFullRankError(
                f"state not full rank: eigenvalue {p[0]:.3e} is below the rank floor "
                f"{rank_floor:.0e} relative to {p[-1]:.3e}"
            )
        keep = np.ones_like(denom, dtype=bool)
    Dp = es.to_basis(rhodot)
    Lp = np.zeros_like(Dp)
    Lp[keep] = 2.0 * Dp[keep] / denom[keep]
    qfi = float(np.sum(0.5 * np.where(keep, denom, 0.0) * np.abs(Lp) ** 2))
    return SLDResult(hermitian_part(es.from_basis(Lp)), qfi)


def sld_series(state: ExponentialState, Gdot, order: int = DEFAULT_SERIES_ORDER) -> SLDResult:
    """Truncated nested-commutator series ``sum_{n <= order} f_n C^n(dG)``.

    Converges only when every eigenvalue gap of ``G`` is below pi.
    """
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= MAX_SERIES_ORDER:
        raise ValidationError(f"series order must be an integer in [0, {MAX_SERIES_ORDER}], got {order!r}")
    Gdot = check_generator_derivative(state, Gdot)
    if state.spread >= pi:
        raise SeriesDivergentError(
            f"series divergent: spectral spread of G is {state.spread:.4f} >= pi; use sld_eigenbasis"
        )
    G = state.G
    term = Gdot.copy()
    L = term.copy()
    for n in range(1, order + 1):
        term = G @ term - term @ G
        if n % 2 == 0:
            L = L + float(f_coefficient(n)) * term
    L = hermitian_part(L)
    Lp = state.eig.to_basis(L)
    qfi = float(np.sum(state.populations[:, None] * np.abs(Lp) ** 2))
    return SLDResult(L, qfi)


def sld_unitary_family(state: ExponentialState, H) -> SLDResult:
    """SLD of ``e^{-i theta H} rho e^{i theta H}`` at the working point."""
    H = check_hermitian(H, "Hamiltonian H", tol=1e-10)
    g = state.eig.eigenvalues
    Lp = 2j * np.tanh(0.5 * (g[:, None] - g[None, :])) * state.eig.to_basis(H)
    qfi = float(np.sum(np.exp(g)[:, None] * np.abs(Lp) ** 2))
    return SLDResult(hermitian_part(state.eig.from_basis(Lp)), qfi)


def unitary_generator_derivative(state: ExponentialState, H) -> np.ndarray:
    """``dG = i [G, H]`` for the unitary family generated by ``H``."""
    H = check_hermitian(H, "Hamiltonian H", tol=1e-10)
    return hermitian_part(1j * (state.G @ H - H @ state.G))


def rhodot_wilcox(state: ExponentialState, Gdot, quad_order: int = 32) -> np.ndarray:
    """``drho = int_0^1 e^{sG} dG e^{(1-s)G} ds`` by Gauss-Legendre quadrature.

    Exponentials are taken with scipy's Pade ``expm``, independently of the
    eigendecomposition used by the other routes.
    """
    if not isinstance(quad_order, (int, np.integer)) or not 8 <= quad_order <= 64:
        raise ValidationError(f"quadrature order must be an integer in [8, 64], got {quad_order!r}")
    Gdot = check_hermitian(Gdot, "generator derivative", tol=1e-10)
    G = state.G
    nodes, weights = gauss_legendre(int(quad_order))
    out = np.zeros_like(G)
    for s, w in zip(nodes, weights):
        out += w * (expm(s * G) @ Gdot @ expm((1.0 - s) * G))
    return hermitian_part(out)


def crb(qfi: float, trials: int = 1) -> float:
    """Quantum Cramer-Rao bound on the variance after ``trials`` repetitions."""
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    if not qfi > 0:
        raise BoundUndefinedError(f"bound undefined for Fisher information {qfi!r}")
    return 1.0 / (trials * qfi)
