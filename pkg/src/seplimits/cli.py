"""Command-line front end.

Subcommands expose the bound calculations, Fisher curves, exact and Monte
Carlo error evaluation, photon-number scaling studies, and the built-in
verification suite. Outputs are diffable CSV/JSON with 17-significant-digit
floats, and every file output is accompanied by a manifest recording the
resolved parameters; rerunning from a manifest reproduces the output byte
for byte.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical failure,
4 verification failure.
"""

import argparse
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bounds import bound_report, direct_minimax_bound_closed, ground_state, spade_minimax_bound
from .errors import InvalidInputError, NumericalError
from .estimators import (
    EstimatorKind,
    expected_sqrt_poisson,
    spade_exact_mse,
    verify_sqrt_inequality,
)
from .model import ImagingConfig, fisher_direct, fisher_direct_curve, fisher_spade
from .simulate import SweepConfig, mse_sweep, scaling_sweep, sup_mse

_EXIT_OK = 0
_EXIT_USAGE = 1
_EXIT_IO = 2
_EXIT_NUMERICAL = 3
_EXIT_VERIFY = 4

_DEFAULT_VERIFY_SEED = 20259


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems via exit code 1."""

    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    """Serialize one cell: floats at 17 significant digits, ints plain."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_dumps(obj, indent: int = 0) -> str:
    """Stable JSON with 17-significant-digit floats and insertion order."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{json.dumps(str(k))}: {_json_dumps(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{inner}{_json_dumps(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    return _fmt(obj)


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def _rows_as_json(header: list[str], rows: list[list]) -> list[dict]:
    return [dict(zip(header, row)) for row in rows]


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


def _load_manifest(path: str, command: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("command") != command:
        raise _UsageError(
            f"manifest at {path} is for command {manifest.get('command')!r}, not {command!r}"
        )
    return manifest


def _build_manifest(command: str, parameters: dict, replay: dict | None) -> dict:
    timestamp = (
        replay["timestamp"]
        if replay is not None
        else datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    )
    return {
        "command": command,
        "version": __version__,
        "timestamp": timestamp,
        "parameters": parameters,
    }


def _emit(args, manifest: dict, header: list[str], rows: list[list], extra: dict | None = None):
    """Write the data payload plus manifest sidecar in the chosen format."""
    if getattr(args, "format", "csv") == "json":
        payload = {"manifest": manifest, "rows": _rows_as_json(header, rows)}
        if extra:
            payload.update(extra)
        _write_text(args.out, _json_dumps(payload) + "\n")
    else:
        _write_text(args.out, _csv_text(header, rows))
        if extra and args.out is not None:
            side = {"manifest": manifest, **extra}
            _write_text(_sidecar_path(args.out, ".slopes.json"), _json_dumps(side) + "\n")
    if args.out is not None:
        _write_text(_sidecar_path(args.out, ".manifest.json"), _json_dumps(manifest) + "\n")


def _sidecar_path(out: str, suffix: str) -> str:
    return str(out) + suffix


def _resolve(args, manifest_params: dict | None, names: list[str]) -> dict:
    """Collect parameters from the command line or a replayed manifest."""
    if manifest_params is not None:
        missing = [n for n in names if n not in manifest_params]
        if missing:
            raise _UsageError(f"manifest lacks parameters: {', '.join(missing)}")
        return {n: manifest_params[n] for n in names}
    return {n: getattr(args, n) for n in names}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_fisher(args) -> int:
    replay = _load_manifest(args.manifest, "fisher") if args.manifest else None
    params = _resolve(args, replay and replay["parameters"], ["sigma", "photons", "theta_max", "theta_points"])
    cfg = ImagingConfig(sigma=float(params["sigma"]), photons=int(params["photons"]))
    theta_max = float(params["theta_max"]) if params["theta_max"] is not None else 10.0 * cfg.sigma
    points = int(params["theta_points"])
    if points < 2:
        raise _UsageError("--theta-points must be at least 2")
    params["theta_max"] = theta_max

    grid = np.linspace(0.0, theta_max, points)
    curve = fisher_direct_curve(cfg, grid)
    shot = fisher_spade(cfg)
    header = ["theta", "J_direct", "J_spade", "J_quadratic_bound", "J_normalized_direct"]
    rows = [
        [th, jd, shot, cfg.photons * th**2 / (8.0 * cfg.sigma**4), jd / shot]
        for th, jd in zip(curve.grid, curve.values)
    ]
    _emit(args, _build_manifest("fisher", params, replay), header, rows)
    return _EXIT_OK


def _cmd_bounds(args) -> int:
    replay = _load_manifest(args.manifest, "bounds") if args.manifest else None
    params = _resolve(args, replay and replay["parameters"], ["sigma", "photons", "domain", "grid_n"])
    cfg = ImagingConfig(sigma=float(params["sigma"]), photons=int(params["photons"]))
    domain = float(params["domain"]) if params["domain"] is not None else 10.0 * cfg.sigma
    params["domain"] = domain
    n = int(params["grid_n"])

    report = bound_report(cfg, a=domain, n=n)
    manifest = _build_manifest("bounds", params, replay)
    body = {
        "manifest": manifest,
        "report": {
            "sigma": cfg.sigma,
            "photons": cfg.photons,
            "theta_domain": [0.0, report.domain],
            "grid_n": report.grid_n,
            "spade_bound": report.spade_bound,
            "direct_closed_bound": report.direct_closed_bound,
            "direct_numeric_bound": report.direct_numeric_bound,
            "K_values": report.K_values,
        },
    }
    if getattr(args, "format", "json") == "csv":
        header = ["quantity", "value"]
        rows = [[k, v] for k, v in body["report"].items() if isinstance(v, (int, float))]
        rows += [[f"K_{k}", v] for k, v in report.K_values.items()]
        _emit(args, manifest, header, rows)
    else:
        _write_text(args.out, _json_dumps(body) + "\n")
        if args.out is not None:
            _write_text(_sidecar_path(args.out, ".manifest.json"), _json_dumps(manifest) + "\n")
    return _EXIT_OK


def _parse_estimators(spec: str) -> tuple[EstimatorKind, ...]:
    kinds = []
    for token in spec.split(","):
        token = token.strip()
        try:
            kinds.append(EstimatorKind(token))
        except ValueError:
            valid = ", ".join(k.value for k in EstimatorKind)
            raise _UsageError(f"unknown estimator {token!r}; choose from: {valid}") from None
    return tuple(kinds)


def _cmd_simulate(args) -> int:
    replay = _load_manifest(args.manifest, "simulate") if args.manifest else None
    names = ["sigma", "photons", "estimators", "trials", "seed", "theta_max", "theta_points", "search_max"]
    params = _resolve(args, replay and replay["parameters"], names)
    cfg = ImagingConfig(sigma=float(params["sigma"]), photons=int(params["photons"]))
    theta_max = float(params["theta_max"]) if params["theta_max"] is not None else 6.0 * cfg.sigma
    params["theta_max"] = theta_max
    kinds = _parse_estimators(params["estimators"])
    if params["trials"] is None or params["seed"] is None:
        raise _UsageError("--trials and --seed are required")

    sw = SweepConfig(
        cfg=cfg,
        theta_grid=np.linspace(0.0, theta_max, int(params["theta_points"])),
        trials=int(params["trials"]),
        seed=int(params["seed"]),
        kinds=kinds,
        search_max=float(params["search_max"]) if params["search_max"] is not None else None,
    )
    curves = mse_sweep(sw)
    norm = cfg.photons / (4.0 * cfg.sigma**2)
    header = ["estimator", "theta", "mse", "mse_normalized", "std_err", "bias", "trials"]
    rows = [
        [c.kind.value, th, m, m * norm, se, b, sw.trials]
        for c in curves
        for th, m, se, b in zip(c.theta, c.mse, c.std_err, c.bias)
    ]
    _emit(args, _build_manifest("simulate", params, replay), header, rows)
    return _EXIT_OK


def _cmd_scaling(args) -> int:
    replay = _load_manifest(args.manifest, "scaling") if args.manifest else None
    names = ["sigma", "photons", "estimators", "trials", "seed", "theta_max", "theta_points", "search_max"]
    params = _resolve(args, replay and replay["parameters"], names)
    sigma = float(params["sigma"])
    try:
        L_values = [int(tok) for tok in str(params["photons"]).split(",")]
    except ValueError:
        raise _UsageError("--photons must be a comma-separated list of integers") from None
    if len(L_values) < 3:
        raise _UsageError("scaling needs at least 3 photon numbers")
    kinds = _parse_estimators(params["estimators"])
    if params["trials"] is None or params["seed"] is None:
        raise _UsageError("--trials and --seed are required")
    theta_max = float(params["theta_max"]) if params["theta_max"] is not None else 6.0 * sigma
    params["theta_max"] = theta_max

    cfg = ImagingConfig(sigma=sigma, photons=L_values[0])
    sw = SweepConfig(
        cfg=cfg,
        theta_grid=np.linspace(0.0, theta_max, int(params["theta_points"])),
        trials=int(params["trials"]),
        seed=int(params["seed"]),
        kinds=kinds,
        search_max=float(params["search_max"]) if params["search_max"] is not None else None,
    )
    results = scaling_sweep(cfg, L_values, sw)

    header = ["estimator", "L", "sup_mse", "sup_theta", "std_err", "bcrb_spade", "bcrb_direct"]
    rows = []
    for res in results:
        for L, s, th, se in zip(res.L_values, res.sup_mse, res.sup_theta, res.sup_std_err):
            c = ImagingConfig(sigma=sigma, photons=L)
            rows.append([res.kind.value, L, s, th, se, spade_minimax_bound(c), direct_minimax_bound_closed(c)])
    slopes = [
        {"estimator": res.kind.value, "slope": res.slope, "intercept": res.intercept}
        for res in results
    ]
    _emit(args, _build_manifest("scaling", params, replay), header, rows, extra={"slopes": slopes})
    return _EXIT_OK


def _cmd_mse_exact(args) -> int:
    replay = _load_manifest(args.manifest, "mse-exact") if args.manifest else None
    names = ["sigma", "photons", "estimators", "theta_max", "theta_points"]
    params = _resolve(args, replay and replay["parameters"], names)
    cfg = ImagingConfig(sigma=float(params["sigma"]), photons=int(params["photons"]))
    theta_max = float(params["theta_max"]) if params["theta_max"] is not None else 6.0 * cfg.sigma
    params["theta_max"] = theta_max
    kinds = _parse_estimators(params["estimators"])
    if any(not k.is_spade for k in kinds):
        raise _UsageError("mse-exact supports the mode-sorting estimators only")

    grid = np.linspace(0.0, theta_max, int(params["theta_points"]))
    norm = cfg.photons / (4.0 * cfg.sigma**2)
    header = ["estimator", "theta", "mse", "mse_normalized"]
    rows = []
    for kind in kinds:
        for th in grid:
            m = spade_exact_mse(cfg, float(th), kind)
            rows.append([kind.value, float(th), m, m * norm])
    _emit(args, _build_manifest("mse-exact", params, replay), header, rows)
    return _EXIT_OK


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------


def _verify_checks(seed: int):
    """Yield (name, passed, detail) for each consistency check."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    xs = rng.random(100_000) * 100.0
    ok = all(verify_sqrt_inequality(float(x)) for x in xs)
    yield "sqrt-inequality", ok, f"held on {xs.size} samples in [0, 100]"

    margins = []
    for mu in (0.1, 1.0, 10.0, 100.0, 1e4):
        margins.append(expected_sqrt_poisson(mu) - (math.sqrt(mu) - 0.5 / math.sqrt(mu)))
    ok = all(m >= 0.0 for m in margins)
    yield "expected-sqrt-lower-bound", ok, f"min margin {min(margins):.3e}"

    worst_norm16 = 0.0
    worst_norm4 = 0.0
    for L in (10, 100, 1000, 10_000):
        cfg = ImagingConfig(sigma=1.0, photons=L)
        for th in np.linspace(0.0, 10.0, 400):
            m = spade_exact_mse(cfg, float(th), EstimatorKind.SPADE_ML)
            worst_norm16 = max(worst_norm16, m * L / 16.0)
            worst_norm4 = max(worst_norm4, m * L / 4.0)
    ok = worst_norm16 <= 1.0
    yield (
        "ml-error-guarantee",
        ok,
        f"max MSE*L/(16 sigma^2) = {worst_norm16:.6f}; max MSE*L/(4 sigma^2) = {worst_norm4:.6f}",
    )

    L = 100
    lam, _ = ground_state(lambda th: L * th**2 / 8.0, a=10.0, n=8192)
    target = 3.0 * math.sqrt(L) / math.sqrt(2.0)
    rel = abs(lam - target) / target
    yield "oscillator-eigenvalue", rel < 2e-3, f"lambda = {lam:.6f} vs {target:.6f} (rel err {rel:.2e})"

    cfg = ImagingConfig(sigma=1.0, photons=100)
    shot = fisher_spade(cfg)
    grid = np.linspace(0.0, 10.0, 200)
    jvals = np.array([fisher_direct(cfg, float(th)) for th in grid])
    quad = cfg.photons * grid**2 / 8.0
    ok = (
        jvals[0] == 0.0
        and jvals[-1] / shot >= 0.99
        and np.all(jvals <= shot * (1.0 + 1e-6))
        and np.all(jvals <= quad * (1.0 + 1e-6) + 1e-300)
    )
    yield "information-bounds", ok, f"J(10 sigma)/shot = {jvals[-1] / shot:.6f}"


def _cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _DEFAULT_VERIFY_SEED
    failures = 0
    for name, ok, detail in _verify_checks(int(seed)):
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{'OK' if failures == 0 else 'FAILED'}: {failures} failing check(s)")
    return _EXIT_OK if failures == 0 else _EXIT_VERIFY


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def _add_common(sub, *, photons_list: bool = False):
    sub.add_argument("--sigma", type=float, default=1.0, help="PSF width (default 1.0)")
    if photons_list:
        sub.add_argument("--photons", type=str, default="32,128,512,2048",
                         help="comma-separated photon numbers")
    else:
        sub.add_argument("--photons", type=int, default=100, help="detected photon number")
    sub.add_argument("--out", type=str, default=None, help="output path (default stdout)")
    sub.add_argument("--manifest", type=str, default=None,
                     help="replay parameters from a manifest file")


def _build_parser() -> _Parser:
    parser = _Parser(prog="seplimits", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("fisher", help="Fisher information curves as CSV")
    _add_common(p)
    p.add_argument("--theta-max", dest="theta_max", type=float, default=None,
                   help="largest separation (default 10 sigma)")
    p.add_argument("--theta-points", dest="theta_points", type=int, default=200)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_fisher)

    p = subs.add_parser("bounds", help="minimax lower bounds as JSON")
    _add_common(p)
    p.add_argument("--domain", type=float, default=None,
                   help="worst-case domain length (default 10 sigma)")
    p.add_argument("--grid-n", dest="grid_n", type=int, default=8192,
                   help="eigensolver grid size")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=_cmd_bounds)

    p = subs.add_parser("simulate", help="Monte Carlo MSE sweep as CSV")
    _add_common(p)
    p.add_argument("--estimators", type=str,
                   default="spade-ml,spade-modified-ml,direct-ml")
    p.add_argument("--trials", type=int, default=5000)
    p.add_argument("--seed", type=int, default=None, help="required; no wall-clock seeding")
    p.add_argument("--theta-max", dest="theta_max", type=float, default=None,
                   help="largest separation (default 6 sigma)")
    p.add_argument("--theta-points", dest="theta_points", type=int, default=61)
    p.add_argument("--search-max", dest="search_max", type=float, default=None,
                   help="direct-ML search ceiling (default 2 theta-max)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("scaling", help="sup-MSE vs photon number with slope fits")
    _add_common(p, photons_list=True)
    p.add_argument("--estimators", type=str, default="spade-ml,direct-ml")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=None, help="required; no wall-clock seeding")
    p.add_argument("--theta-max", dest="theta_max", type=float, default=None)
    p.add_argument("--theta-points", dest="theta_points", type=int, default=31)
    p.add_argument("--search-max", dest="search_max", type=float, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_scaling)

    p = subs.add_parser("mse-exact", help="exact mode-sorting MSE sweep as CSV")
    _add_common(p)
    p.add_argument("--estimators", type=str, default="spade-ml,spade-modified-ml")
    p.add_argument("--theta-max", dest="theta_max", type=float, default=None)
    p.add_argument("--theta-points", dest="theta_points", type=int, default=61)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_mse_exact)

    p = subs.add_parser("verify", help="run the built-in consistency checks")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
