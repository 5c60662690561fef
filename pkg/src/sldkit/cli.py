"""Command-line front end.

Usage::

    sldkit compute -s scenario.json -o result.json
    sldkit sweep -s scenario.json -o table.csv
    sldkit crosscheck -s scenario.json
    sldkit coeffs --n 10

Exit codes: 0 success, 1 crosscheck disagreement, 2 validation error,
3 numerical-domain error.
"""

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources

import jsonschema
import numpy as np

from . import expstate, fockspace, gaussian
from .errors import NumericalDomainError, SldError, ValidationError
from .families import Family

SCHEMA_VERSION = "1"
METHODS = ("moments", "generator", "eigenbasis", "series", "fock_oracle", "auto", "crosscheck")
OUTPUTS = ("qfi", "sld", "residuals", "crb")
CSV_COLUMNS = ("theta", "qfi", "residual_max", "method", "schema_version")
CROSSCHECK_TOL = 1e-8
CROSSCHECK_TOL_FOCK = 1e-5

_MATRIX_KEYS = {"G0", "G1", "H", "rho0", "hamiltonian", "omega", "gamma0", "gamma1"}
_VECTOR_KEYS = {"eta", "delta0", "delta1"}


# -- encoding -----------------------------------------------------------------


def encode_array(a) -> list:
    """Row-major nested lists; complex arrays carry ``[re, im]`` pairs."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return np.stack([a.real, a.imag], axis=-1).tolist()
    return a.tolist()


def decode_array(value, ndim: int, name: str = "array") -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} is not a rectangular numeric array") from None
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim != ndim:
        raise ValidationError(f"{name} must have {ndim} dimension(s) (complex entries as [re, im]), got shape {arr.shape}")
    return arr


def decode_params(params: dict) -> dict:
    out = {}
    for key, value in params.items():
        if key in _MATRIX_KEYS:
            out[key] = decode_array(value, 2, key)
        elif key in _VECTOR_KEYS:
            out[key] = decode_array(value, 1, key)
        else:
            out[key] = value
    return out


# -- scenarios ----------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    family: Family
    method: str
    theta: float = 0.0
    fd_step: float = 1e-5
    fock_dim: int = 80
    series_order: int = expstate.DEFAULT_SERIES_ORDER
    trials: int = 1
    outputs: tuple = ("qfi", "residuals")
    sweep: dict | None = None

    def __post_init__(self):
        check_compatibility(self.family, self.method)


def check_compatibility(family: Family, method: str) -> None:
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}")
    if method in ("eigenbasis", "series") and family.is_gaussian:
        raise ValidationError(f"method {method} needs a finite-dimensional family, {family.kind} is Gaussian")
    if method in ("moments", "generator") and not family.is_gaussian:
        raise ValidationError(f"method {method} needs a Gaussian family, {family.kind} is finite-dimensional")
    if method == "fock_oracle" and family.is_gaussian and family.n_modes != 1:
        raise ValidationError("method fock_oracle needs a single-mode or finite-dimensional family")


def _schema() -> dict:
    text = resources.files("sldkit").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


def parse_scenario(data: dict) -> Scenario:
    try:
        jsonschema.validate(data, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"scenario invalid at {where}: {exc.message}") from None
    fam = data["family"]
    family = Family(fam["kind"], decode_params(fam.get("params", {})), fam.get("parameter"))
    kwargs = {k: data[k] for k in ("theta", "fd_step", "fock_dim", "series_order", "trials") if k in data}
    if "outputs" in data:
        kwargs["outputs"] = tuple(data["outputs"])
    if "sweep" in data:
        kwargs["sweep"] = dict(data["sweep"])
    return Scenario(family=family, method=data["method"], **kwargs)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read scenario {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario {path} is not valid JSON: {exc}") from None
    return parse_scenario(data)


# -- routes -------------------------------------------------------------------


def _finite_route(sc: Scenario, method: str, theta: float) -> dict:
    fam = sc.family
    b = fam.differentiate(theta, h=sc.fd_step)
    state, Gdot = b.state, b.derivative
    if method == "eigenbasis":
        res = expstate.sld_eigenbasis(state, Gdot)
    elif method == "series":
        res = expstate.sld_series(state, Gdot, sc.series_order)
    elif method == "unitary":
        res = expstate.sld_unitary_family(state, fam.hamiltonian)
    else:
        res = expstate.sld_direct(state.rho, expstate.rhodot_wilcox(state, Gdot))
    rhodot = expstate.rhodot_wilcox(state, Gdot)
    return {
        "qfi": res.qfi,
        "sld": {"L": res.L},
        "residuals": {"sld_equation": expstate.sld_residual(state.rho, rhodot, res.L)},
    }


def _gaussian_route(sc: Scenario, method: str, theta: float) -> dict:
    fam = sc.family
    mb = fam.differentiate(theta, representation="moments")
    m, md = mb.state, mb.derivative
    if method == "generator":
        gb = fam.differentiate(theta, representation="generator")
        sld = gaussian.sld_from_generator(gb.state, gb.derivative)
        qfi = gaussian.qfi_from_generator(gb.state, gb.derivative)
    else:
        sld = gaussian.sld_from_moments(m, md)
        qfi = gaussian.qfi_from_moments(m, md)
    return {
        "qfi": qfi,
        "sld": {"Phi": sld.Phi, "zeta": sld.zeta, "nu": sld.nu},
        "residuals": gaussian.sld_residuals(m, md, sld),
    }


def _oracle_route(sc: Scenario, theta: float) -> dict:
    fam, h, N = sc.family, sc.fd_step, sc.fock_dim
    qfi, L = fockspace.oracle_qfi(fam, theta, h=h, N=N)
    rho = fam.density(theta, N)
    drho = (fam.density(theta + h, N) - fam.density(theta - h, N)) / (2 * h)
    return {"qfi": qfi, "sld": {"L": L}, "residuals": {"sld_equation": expstate.sld_residual(rho, drho, L)}}


def route(sc: Scenario, method: str, theta: float) -> dict:
    """Run a single route and return ``qfi``, ``sld`` and ``residuals``."""
    if method == "auto":
        method = "moments" if sc.family.is_gaussian else "eigenbasis"
    if method == "fock_oracle":
        out = _oracle_route(sc, theta)
    elif sc.family.is_gaussian:
        out = _gaussian_route(sc, method, theta)
    else:
        out = _finite_route(sc, method, theta)
    out["method"] = method
    return out


def crosscheck_routes(sc: Scenario) -> list[str]:
    fam = sc.family
    if fam.is_gaussian:
        routes = ["moments", "generator"]
    else:
        routes = ["eigenbasis", "direct", "series"]
        if fam.hamiltonian is not None:
            routes.append("unitary")
    if not fam.is_gaussian or fam.n_modes == 1:
        routes.append("fock_oracle")
    return routes


def crosscheck(sc: Scenario, theta: float) -> dict:
    """QFI from every applicable route; routes outside their domain are reported as skipped."""
    values, skipped = {}, {}
    for name in crosscheck_routes(sc):
        try:
            values[name] = route(sc, name, theta)
        except NumericalDomainError as exc:
            skipped[name] = str(exc)
    if len(values) < 2:
        raise NumericalDomainError(f"crosscheck needs two routes, only {sorted(values)} applied; skipped: {skipped}")
    tol = CROSSCHECK_TOL_FOCK if "fock_oracle" in values else CROSSCHECK_TOL
    qfis = [v["qfi"] for v in values.values()]
    spread = max(qfis) - min(qfis)
    scale = max(1.0, max(abs(q) for q in qfis))
    primary = values[next(iter(values))]
    return {
        "qfi": primary["qfi"],
        "sld": primary["sld"],
        "residuals": {"route_" + k + "_" + r: x for k, v in values.items() for r, x in v["residuals"].items()},
        "method": "crosscheck",
        "routes": {k: v["qfi"] for k, v in values.items()},
        "skipped": skipped,
        "max_difference": spread,
        "tolerance": tol,
        "agree": bool(spread <= tol * scale),
    }


def _encode_sld(sld: dict) -> dict:
    return {k: (v if isinstance(v, float) else encode_array(v)) for k, v in sld.items()}


def evaluate(sc: Scenario, theta: float | None = None) -> dict:
    """Result record at ``theta`` (defaults to the scenario's ``theta``)."""
    theta = sc.theta if theta is None else float(theta)
    start = time.perf_counter()
    out = crosscheck(sc, theta) if sc.method == "crosscheck" else route(sc, sc.method, theta)
    record = {
        "schema_version": SCHEMA_VERSION,
        "family": sc.family.kind,
        "parameter": sc.family.parameter,
        "theta": theta,
        "method": out["method"],
    }
    for key in ("routes", "skipped", "max_difference", "tolerance", "agree"):
        if key in out:
            record[key] = out[key]
    record["qfi"] = out["qfi"]
    if "crb" in sc.outputs:
        record["crb"] = expstate.crb(out["qfi"], sc.trials)
    if "sld" in sc.outputs:
        record["sld"] = _encode_sld(out["sld"])
    if "residuals" in sc.outputs or "sld" in sc.outputs:
        record["residuals"] = out["residuals"]
    record["residual_max"] = max(out["residuals"].values())
    record["timing_s"] = time.perf_counter() - start
    return record


def sweep_grid(sc: Scenario) -> np.ndarray:
    if not sc.sweep:
        raise ValidationError("scenario has no sweep block")
    steps = sc.sweep["steps"]
    if steps < 2:
        raise ValidationError(f"sweep needs at least 2 steps, got {steps}")
    return np.linspace(sc.sweep["from"], sc.sweep["to"], steps)


def run_sweep(sc: Scenario, workers: int | None = None) -> list[dict]:
    """Records for every grid point, ordered by the swept value.

    By default the grid runs over ``theta``. With ``sweep.variable`` naming
    another family parameter, that parameter runs over the grid while the
    estimate stays at the scenario's ``theta``; each record then carries the
    swept value under ``sweep_value``.
    """
    grid = sweep_grid(sc)
    workers = workers or sc.sweep.get("workers") or os.cpu_count() or 1
    variable = sc.sweep.get("variable")
    if variable == sc.family.parameter:
        variable = None

    def point(value):
        value = float(value)
        try:
            if variable is None:
                return evaluate(sc, value)
            params = dict(sc.family.params)
            params[variable] = value
            fam = Family(sc.family.kind, params, sc.family.parameter)
            record = evaluate(replace(sc, family=fam))
            record["sweep_variable"], record["sweep_value"] = variable, value
            return record
        except SldError as exc:
            raise type(exc)(f"sweep point {variable or 'theta'} = {value!r} failed: {exc}") from exc

    with ThreadPoolExecutor(max_workers=min(workers, len(grid))) as pool:
        records = list(pool.map(point, grid))
    return sorted(records, key=lambda r: r.get("sweep_value", r["theta"]))


def write_csv(records: list[dict], path: str) -> None:
    """Columns theta, qfi, residual_max, method, schema_version; a swept
    non-estimated parameter is prepended as its own column."""
    variable = records[0].get("sweep_variable") if records else None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(((variable,) if variable else ()) + CSV_COLUMNS)
        for r in records:
            row = [repr(r["theta"]), repr(r["qfi"]), repr(r["residual_max"]), r["method"], SCHEMA_VERSION]
            writer.writerow(([repr(r["sweep_value"])] if variable else []) + row)


def coefficient_rows(n_max: int) -> list[tuple[int, str, str]]:
    if not 0 <= n_max <= expstate.MAX_SERIES_ORDER:
        raise ValidationError(f"--n must lie in [0, {expstate.MAX_SERIES_ORDER}], got {n_max}")
    rows = []
    for n in range(n_max + 1):
        c = expstate.f_coefficient(n)
        rows.append((n, str(c), repr(float(c))))
    return rows


# -- entry point --------------------------------------------------------------


def _overrides(sc: Scenario, args) -> Scenario:
    changes = {}
    if getattr(args, "fd_step", None) is not None:
        if not args.fd_step > 0:
            raise ValidationError(f"--fd-step must be positive, got {args.fd_step}")
        changes["fd_step"] = args.fd_step
    if getattr(args, "fock_dim", None) is not None:
        if args.fock_dim < 2:
            raise ValidationError(f"--fock-dim must be at least 2, got {args.fock_dim}")
        changes["fock_dim"] = args.fock_dim
    return replace(sc, **changes) if changes else sc


def _write_json(record: dict, path: str | None) -> None:
    text = json.dumps(record, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fd-step", type=float, default=argparse.SUPPRESS, help="finite-difference step")
    common.add_argument("--fock-dim", type=int, default=argparse.SUPPRESS, help="Fock truncation")
    parser = argparse.ArgumentParser(prog="sldkit", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("compute", parents=[common], help="single computation, JSON output")
    p.add_argument("-s", "--scenario", required=True)
    p.add_argument("-o", "--output")
    p = sub.add_parser("sweep", parents=[common], help="parameter sweep, CSV output")
    p.add_argument("-s", "--scenario", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--workers", type=int, default=None)
    p = sub.add_parser("crosscheck", parents=[common], help="compare all applicable routes")
    p.add_argument("-s", "--scenario", required=True)
    p.add_argument("-o", "--output")
    p = sub.add_parser("coeffs", help="print series coefficients f_n")
    p.add_argument("--n", type=int, required=True)
    return parser


def _dispatch(args) -> int:
    if args.command == "coeffs":
        for n, frac, dec in coefficient_rows(args.n):
            print(f"{n}\t{frac}\t{dec}")
        return 0
    sc = _overrides(load_scenario(args.scenario), args)
    if args.command == "sweep":
        write_csv(run_sweep(sc, args.workers), args.output)
        return 0
    if args.command == "crosscheck":
        sc = replace(sc, method="crosscheck")
    record = evaluate(sc)
    _write_json(record, args.output)
    if record.get("agree") is False:
        print(f"crosscheck failed: routes differ by {record['max_difference']:.3e}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
