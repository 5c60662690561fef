"""Catalog of parameterized state families and derivative extraction.

A :class:`Family` maps the estimation parameter ``theta`` to a state in one of
four representations:

``exponential``  :class:`~sldkit.expstate.ExponentialState` (finite dimension)
``density``      density matrix; Fock-truncated for single-mode Gaussian kinds
``moments``      :class:`~sldkit.gaussian.GaussianMoments`
``generator``    :class:`~sldkit.gaussian.GaussianGenerator`
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import fockspace, gaussian
from .errors import ValidationError
from .expstate import ExponentialState
from .numkit import check_hermitian, eig_hermitian, hermitian_part
from .symplectic import sympmat

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

FINITE_KINDS = ("qubit_exponential", "explicit_exponential", "unitary_rotation")
GAUSSIAN_KINDS = ("single_mode_gaussian", "two_mode_squeezed", "explicit_moments")
KINDS = FINITE_KINDS + GAUSSIAN_KINDS + ("thermal_beta",)

_PARAMETERS = {
    "qubit_exponential": ("theta",),
    "explicit_exponential": ("theta",),
    "unitary_rotation": ("theta",),
    "thermal_beta": ("beta",),
    "single_mode_gaussian": ("nbar", "r", "phi", "alpha_re", "alpha_im", "rotation"),
    "two_mode_squeezed": ("r", "nbar"),
    "explicit_moments": ("theta",),
}

_PARAM_KEYS = {
    "qubit_exponential": {"gamma_offset", "gamma_rate", "tau1", "tau2", "tau_origin"},
    "explicit_exponential": {"G0", "G1"},
    "unitary_rotation": {"G0", "rho0", "H"},
    "thermal_beta": {"hamiltonian", "omega", "eta"},
    "single_mode_gaussian": {"nbar", "r", "phi", "alpha", "alpha_re", "alpha_im", "rotation"},
    "two_mode_squeezed": {"r", "nbar"},
    "explicit_moments": {"gamma0", "gamma1", "delta0", "delta1"},
}


@dataclass(frozen=True)
class DerivativeBundle:
    """State and its ``theta`` derivative in one representation.

    ``derivative`` is ``dG`` (exponential), ``drho`` (density),
    :class:`~sldkit.gaussian.MomentDerivatives` or
    :class:`~sldkit.gaussian.GeneratorDerivatives`.
    """

    representation: str
    state: Any
    derivative: Any
    h: float | None
    method: str


def default_step(theta: float) -> float:
    return 1e-5 * max(1.0, abs(theta))


@dataclass(frozen=True)
class Family:
    kind: str
    params: dict = field(default_factory=dict)
    parameter: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown family kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        allowed = _PARAMETERS[self.kind]
        parameter = self.parameter or allowed[0]
        if parameter not in allowed:
            raise ValidationError(
                f"{self.kind} cannot estimate {parameter!r}; choose one of {', '.join(allowed)}"
            )
        object.__setattr__(self, "parameter", parameter)
        unknown = sorted(set(self.params) - _PARAM_KEYS[self.kind])
        if unknown:
            raise ValidationError(
                f"{self.kind} has no parameter(s) {', '.join(unknown)}; "
                f"known: {', '.join(sorted(_PARAM_KEYS[self.kind]))}"
            )
        object.__setattr__(self, "params", _normalize_params(self.kind, dict(self.params)))

    # -- introspection ------------------------------------------------------

    @property
    def is_gaussian(self) -> bool:
        return self.kind in GAUSSIAN_KINDS or (self.kind == "thermal_beta" and "omega" in self.params)

    @property
    def native(self) -> str:
        if not self.is_gaussian:
            return "exponential"
        return "generator" if self.kind == "thermal_beta" else "moments"

    @property
    def n_modes(self) -> int | None:
        if not self.is_gaussian:
            return None
        if self.kind == "single_mode_gaussian":
            return 1
        if self.kind == "two_mode_squeezed":
            return 2
        key = "omega" if self.kind == "thermal_beta" else "gamma0"
        return self.params[key].shape[0] // 2

    @property
    def representations(self) -> tuple[str, ...]:
        if not self.is_gaussian:
            return ("exponential", "density")
        reps = ("moments", "generator")
        return reps + ("density",) if self.n_modes == 1 else reps

    @property
    def hamiltonian(self) -> np.ndarray | None:
        """Generator ``H`` of ``e^{-i theta H}`` for unitary families."""
        return self.params["H"] if self.kind == "unitary_rotation" else None

    # -- evaluation ---------------------------------------------------------

    def check_domain(self, theta: float) -> None:
        if not np.isfinite(theta):
            raise ValidationError(f"theta must be finite, got {theta!r}")
        if self.parameter == "nbar" and theta < 0:
            raise ValidationError(f"nbar = {theta} is outside the domain nbar >= 0")
        if self.kind == "thermal_beta" and self.is_gaussian and theta <= 0:
            raise ValidationError(f"beta = {theta} is outside the domain beta > 0 for a Gaussian Hamiltonian")

    def evaluate(self, theta: float, representation: str | None = None):
        rep = representation or self.native
        if rep not in self.representations:
            raise ValidationError(f"{self.kind} has no {rep!r} representation")
        self.check_domain(theta)
        if rep == "density":
            return self.density(theta)
        if rep == "exponential":
            return ExponentialState.normalized(self._raw_generator(theta))
        if self.native == "generator":
            g = self._generator(theta)
            return g if rep == "generator" else gaussian.generator_to_moments(g)
        m = self._moments(theta)
        return m if rep == "moments" else gaussian.moments_to_generator(m)

    def density(self, theta: float, fock_dim: int = 80) -> np.ndarray:
        if not self.is_gaussian:
            return ExponentialState.normalized(self._raw_generator(theta)).rho
        if self.n_modes != 1:
            raise ValidationError("density rendering of Gaussian families needs a single mode")
        self.check_domain(theta)
        if self.native == "generator":
            return fockspace.generator_fock(self._generator(theta), fock_dim)
        return fockspace.fock_from_moments(self._moments(theta), fock_dim)

    def differentiate(
        self,
        theta: float,
        h: float | None = None,
        representation: str | None = None,
        method: str = "auto",
        richardson: bool = False,
    ) -> DerivativeBundle:
        """Derivative at ``theta``.

        ``method="auto"`` uses analytic derivatives when the family has them
        and central differences otherwise; ``"central"`` forces differences.
        ``richardson`` halves ``h`` once and extrapolates.
        """
        rep = representation or self.native
        if rep not in self.representations:
            raise ValidationError(f"{self.kind} has no {rep!r} representation")
        if method not in ("auto", "analytic", "central"):
            raise ValidationError(f"unknown differentiation method {method!r}")
        state = self.evaluate(theta, rep)
        if method != "central" and rep != "density":
            return DerivativeBundle(rep, state, self._analytic(theta, rep, state), None, "analytic")
        if method == "analytic":
            raise ValidationError("density representation has no analytic derivative")
        h = default_step(theta) if h is None else h
        if not h > 0:
            raise ValidationError(f"finite-difference step must be positive, got {h}")
        self.check_domain(theta - h)
        self.check_domain(theta + h)
        d = self._central(theta, h, rep)
        if richardson:
            d_half = self._central(theta, 0.5 * h, rep)
            d = [(4.0 * b - a) / 3.0 for a, b in zip(d, d_half)]
        return DerivativeBundle(rep, state, _package(rep, d), h, "central-difference")

    # -- internals ----------------------------------------------------------

    def _components(self, theta: float, rep: str) -> list[np.ndarray]:
        if rep == "density":
            return [self.density(theta)]
        if rep == "exponential":
            return [ExponentialState.normalized(self._raw_generator(theta)).G]
        x = self.evaluate(theta, rep)
        if rep == "moments":
            return [x.delta, x.gamma]
        return [x.omega, x.eta]

    def _central(self, theta: float, h: float, rep: str) -> list[np.ndarray]:
        plus = self._components(theta + h, rep)
        minus = self._components(theta - h, rep)
        return [(a - b) / (2.0 * h) for a, b in zip(plus, minus)]

    def _raw_generator(self, theta: float) -> np.ndarray:
        p = self.params
        if self.kind == "qubit_exponential":
            gamma = p["gamma_offset"] + p["gamma_rate"] * theta
            tau = p["tau1"] * SIGMA[1] + p["tau2"] * SIGMA[2]
            return gamma * SIGMA[3] + (theta - p["tau_origin"]) * tau
        if self.kind == "explicit_exponential":
            return p["G0"] + theta * p["G1"]
        if self.kind == "unitary_rotation":
            W = _unitary(p["H"], theta)
            return W @ p["G0"] @ W.conj().T
        if self.kind == "thermal_beta":
            return -theta * p["hamiltonian"]
        raise ValidationError(f"{self.kind} has no exponential representation")

    def _generator(self, theta: float) -> gaussian.GaussianGenerator:
        p = self.params
        return gaussian.GaussianGenerator(theta * p["omega"], theta * p["eta"])

    def _values(self, theta: float) -> dict:
        values = dict(self.params)
        values[self.parameter] = theta
        return values

    def _moments(self, theta: float) -> gaussian.GaussianMoments:
        v = self._values(theta)
        if self.kind == "single_mode_gaussian":
            R = _rotation(v["rotation"])
            delta = R @ (np.sqrt(2.0) * np.array([v["alpha_re"], v["alpha_im"]]))
            gamma = (2 * v["nbar"] + 1) * R @ _squeeze_cov(v["r"], v["phi"]) @ R.T
            return gaussian.GaussianMoments(delta, gamma)
        if self.kind == "two_mode_squeezed":
            return gaussian.GaussianMoments(np.zeros(4), (2 * v["nbar"] + 1) * _tmsv_cov(v["r"]))
        return gaussian.GaussianMoments(
            v["delta0"] + theta * v["delta1"], v["gamma0"] + theta * v["gamma1"]
        )

    def _analytic(self, theta: float, rep: str, state):
        if rep == "exponential":
            raw = self._raw_derivative(theta, state)
            return hermitian_part(raw - np.trace(state.rho @ raw) * np.eye(state.dim))
        if self.native == "generator":
            gd = gaussian.GeneratorDerivatives(self.params["omega"], self.params["eta"])
            if rep == "generator":
                return gd
            return gaussian.moment_derivatives_from_generator(self._generator(theta), gd)
        md = self._moment_derivatives(theta)
        if rep == "moments":
            return md
        return gaussian.generator_derivatives_from_moments(self._moments(theta), md)

    def _raw_derivative(self, theta: float, state: ExponentialState) -> np.ndarray:
        p = self.params
        if self.kind == "qubit_exponential":
            return p["gamma_rate"] * SIGMA[3] + p["tau1"] * SIGMA[1] + p["tau2"] * SIGMA[2]
        if self.kind == "explicit_exponential":
            return p["G1"]
        if self.kind == "unitary_rotation":
            return 1j * (state.G @ p["H"] - p["H"] @ state.G)
        return -p["hamiltonian"]

    def _moment_derivatives(self, theta: float) -> gaussian.MomentDerivatives:
        v = self._values(theta)
        name = self.parameter
        if self.kind == "single_mode_gaussian":
            R = _rotation(v["rotation"])
            d = np.sqrt(2.0) * np.array([v["alpha_re"], v["alpha_im"]])
            scale = 2 * v["nbar"] + 1
            ddelta, dgamma = np.zeros(2), np.zeros((2, 2))
            if name == "nbar":
                dgamma = 2 * R @ _squeeze_cov(v["r"], v["phi"]) @ R.T
            elif name == "r":
                r, phi = v["r"], v["phi"]
                dgamma = scale * R @ (2 * np.sinh(2 * r) * np.eye(2) - 2 * np.cosh(2 * r) * _squeeze_axis(phi)) @ R.T
            elif name == "phi":
                r, phi = v["r"], v["phi"]
                dK = np.array([[-np.sin(phi), np.cos(phi)], [np.cos(phi), np.sin(phi)]])
                dgamma = -scale * np.sinh(2 * r) * R @ dK @ R.T
            elif name == "alpha_re":
                ddelta = R @ np.array([np.sqrt(2.0), 0.0])
            elif name == "alpha_im":
                ddelta = R @ np.array([0.0, np.sqrt(2.0)])
            else:
                J = sympmat(1)
                gamma = scale * R @ _squeeze_cov(v["r"], v["phi"]) @ R.T
                dgamma = J @ gamma + gamma @ J.T
                ddelta = J @ R @ d
            return gaussian.MomentDerivatives(ddelta, dgamma)
        if self.kind == "two_mode_squeezed":
            if name == "nbar":
                return gaussian.MomentDerivatives(np.zeros(4), 2 * _tmsv_cov(v["r"]))
            return gaussian.MomentDerivatives(np.zeros(4), (2 * v["nbar"] + 1) * _tmsv_cov_dr(v["r"]))
        return gaussian.MomentDerivatives(v["delta1"], v["gamma1"])


def _unitary(H: np.ndarray, theta: float) -> np.ndarray:
    es = eig_hermitian(H)
    return (es.basis * np.exp(-1j * theta * es.eigenvalues)) @ es.basis.conj().T


def _rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]])


def _squeeze_axis(phi: float) -> np.ndarray:
    return np.array([[np.cos(phi), np.sin(phi)], [np.sin(phi), -np.cos(phi)]])


def _squeeze_cov(r: float, phi: float) -> np.ndarray:
    return np.cosh(2 * r) * np.eye(2) - np.sinh(2 * r) * _squeeze_axis(phi)


def _tmsv_cov(r: float) -> np.ndarray:
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    xx = np.array([[c, s], [s, c]])
    pp = np.array([[c, -s], [-s, c]])
    zero = np.zeros((2, 2))
    return np.block([[xx, zero], [zero, pp]])


def _tmsv_cov_dr(r: float) -> np.ndarray:
    c, s = 2 * np.cosh(2 * r), 2 * np.sinh(2 * r)
    xx = np.array([[s, c], [c, s]])
    pp = np.array([[s, -c], [-c, s]])
    zero = np.zeros((2, 2))
    return np.block([[xx, zero], [zero, pp]])


def _package(rep: str, d: list[np.ndarray]):
    if rep == "moments":
        return gaussian.MomentDerivatives(d[0], d[1])
    if rep == "generator":
        return gaussian.GeneratorDerivatives(d[0], d[1])
    return hermitian_part(d[0])


def _real(params: dict, key: str, default: float) -> float:
    value = params.get(key, default)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"parameter {key!r} must be a real number, got {value!r}") from None
    if not np.isfinite(value):
        raise ValidationError(f"parameter {key!r} must be finite")
    return value


def _required(params: dict, key: str, kind: str):
    if key not in params:
        raise ValidationError(f"{kind} requires parameter {key!r}")
    return params[key]


def _real_array(value, key: str, shape: tuple | None = None) -> np.ndarray:
    arr = np.asarray(value)
    if np.iscomplexobj(arr):
        if np.abs(arr.imag).max() > 0:
            raise ValidationError(f"parameter {key!r} must be real")
        arr = arr.real
    arr = arr.astype(float)
    if shape is not None and arr.shape != shape:
        raise ValidationError(f"parameter {key!r} must have shape {shape}, got {arr.shape}")
    return arr


def _normalize_params(kind: str, p: dict) -> dict:
    out: dict = {}
    if kind == "qubit_exponential":
        for key, default in (("gamma_offset", 0.0), ("gamma_rate", 1.0), ("tau1", 0.0), ("tau2", 0.0), ("tau_origin", 0.0)):
            out[key] = _real(p, key, default)
    elif kind == "explicit_exponential":
        out["G0"] = check_hermitian(_required(p, "G0", kind), "G0")
        out["G1"] = check_hermitian(_required(p, "G1", kind), "G1")
        if out["G0"].shape != out["G1"].shape:
            raise ValidationError("G0 and G1 must have the same shape")
    elif kind == "unitary_rotation":
        out["H"] = check_hermitian(_required(p, "H", kind), "H")
        if "G0" in p:
            G0 = check_hermitian(p["G0"], "G0")
        elif "rho0" in p:
            G0 = ExponentialState.from_density(check_hermitian(p["rho0"], "rho0", tol=1e-10)).G
        else:
            raise ValidationError("unitary_rotation requires 'G0' or 'rho0'")
        out["G0"] = ExponentialState.normalized(G0).G
        if out["G0"].shape != out["H"].shape:
            raise ValidationError("H and the initial state must have the same shape")
    elif kind == "thermal_beta":
        if "omega" in p:
            omega = _real_array(p["omega"], "omega")
            n2 = omega.shape[0] if omega.ndim == 2 else -1
            if n2 < 2 or n2 % 2 or omega.shape != (n2, n2):
                raise ValidationError("thermal_beta omega must be a square matrix of even dimension")
            out["omega"] = gaussian.GaussianGenerator(omega, np.zeros(n2)).omega
            out["eta"] = _real_array(p.get("eta", np.zeros(n2)), "eta", (n2,))
        elif "hamiltonian" in p:
            out["hamiltonian"] = check_hermitian(p["hamiltonian"], "hamiltonian")
        else:
            raise ValidationError("thermal_beta requires 'hamiltonian' (finite) or 'omega' (Gaussian)")
    elif kind == "single_mode_gaussian":
        for key in ("nbar", "r", "phi", "rotation"):
            out[key] = _real(p, key, 0.0)
        alpha = p.get("alpha", 0.0)
        if isinstance(alpha, (list, tuple)) and len(alpha) == 2:
            alpha = complex(float(alpha[0]), float(alpha[1]))
        alpha = complex(alpha)
        out["alpha_re"] = _real(p, "alpha_re", alpha.real)
        out["alpha_im"] = _real(p, "alpha_im", alpha.imag)
        if out["nbar"] < 0:
            raise ValidationError("nbar must be nonnegative")
    elif kind == "two_mode_squeezed":
        out["r"] = _real(p, "r", 0.0)
        out["nbar"] = _real(p, "nbar", 0.0)
        if out["nbar"] < 0:
            raise ValidationError("nbar must be nonnegative")
    elif kind == "explicit_moments":
        gamma0 = _real_array(_required(p, "gamma0", kind), "gamma0")
        n2 = gamma0.shape[0]
        out["gamma0"] = gamma0
        out["delta0"] = _real_array(p.get("delta0", np.zeros(n2)), "delta0", (n2,))
        out["gamma1"] = _real_array(p.get("gamma1", np.zeros((n2, n2))), "gamma1", (n2, n2))
        out["delta1"] = _real_array(p.get("delta1", np.zeros(n2)), "delta1", (n2,))
        gaussian.GaussianMoments(out["delta0"], gamma0)
        gaussian.MomentDerivatives(out["delta1"], out["gamma1"])
    return out
