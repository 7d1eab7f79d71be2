"""Command-line runner: JSON config in, summary.json and CSV maps out.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .approximations import APPROXIMATIONS
from .basis import make_grid
from .core import FrameMismatchError, SimParams, ValidationError
from .evolution import IntegrationError, UndefinedDriftError, drift_time, free_drift, run_exact
from .observables import (
    RunPair,
    build_report,
    component_moments,
    lobe_moments,
    overlap,
    probability_density,
    spin_flip_density,
    spin_flip_probability,
)
from .runs import approximation_pair, exact_records, suggest_n_basis
from .tomography import AsymmetryBasis, DegenerateBasisError, predicted_density, reconstruct_polarization

log = logging.getLogger("sgsim")

KINDS = ("evolve", "approximate", "compare", "asymmetry", "tomography", "sweep")
SWEEP_AXES = ("A", "S", "z0")
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

_SIM_KEYS = ("A", "S", "z0", "n_basis", "grid_extent", "grid_points", "dt", "textbook_mode")
_TOP_KEYS = set(_SIM_KEYS) | {"kind", "m0", "drift", "out", "snapshot_stride", "sweep", "tomography"}
_SWEEP_KEYS = {"axis", "values", "hold"}
_TOMO_KEYS = {"p", "noise", "seed", "observed"}


@dataclass
class SweepSpec:
    axis: str
    values: list[float]
    hold: str | None = None


@dataclass
class TomographySpec:
    p: list[float] = field(default_factory=lambda: [0.0, 0.0, 1.0])
    noise: float = 0.0
    seed: int = 0
    observed: str | None = None


@dataclass
class RunConfig:
    A: float
    S: float
    z0: float
    n_basis: int | str = 40
    grid_extent: float | None = None
    grid_points: int = 256
    dt: float = 1e-3
    textbook_mode: bool = False
    kind: str = "evolve"
    m0: str | float = "both"
    drift: bool = True
    out: str = "out"
    snapshot_stride: int = 20
    sweep: SweepSpec | None = None
    tomography: TomographySpec | None = None

    def sim_params(self, **overrides) -> SimParams:
        values = {k: getattr(self, k) for k in _SIM_KEYS}
        values.update(overrides)
        if values["n_basis"] == "auto":
            values["n_basis"] = suggest_n_basis(values["A"], values["S"])
        return SimParams(**values)

    def m0_values(self) -> tuple[float, ...]:
        return (0.5, -0.5) if self.m0 == "both" else (float(self.m0),)


def _require(cond: bool, key: str, constraint: str):
    if not cond:
        raise ValidationError(f"config key '{key}': {constraint}")


def _number(value, key: str, positive=False, allow_zero=True) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), key, "must be a number")
    _require(math.isfinite(value), key, "must be finite")
    if positive:
        _require(value > 0 or (allow_zero and value == 0), key, "must be positive")
    return float(value)


def config_from_dict(data: dict) -> RunConfig:
    _require(isinstance(data, dict), "<root>", "must be a JSON object")
    unknown = sorted(set(data) - _TOP_KEYS)
    _require(not unknown, ",".join(unknown), "unknown key")
    missing = [k for k in ("A", "S", "z0") if k not in data]
    _require(not missing, ", ".join(missing), "missing required key")

    cfg = RunConfig(
        A=_number(data["A"], "A", positive=True),
        S=_number(data["S"], "S", positive=True),
        z0=_number(data["z0"], "z0", positive=True, allow_zero=False),
    )
    if "n_basis" in data:
        nb = data["n_basis"]
        _require(nb == "auto" or (isinstance(nb, int) and not isinstance(nb, bool) and nb >= 2),
                 "n_basis", "must be an integer >= 2 or \"auto\"")
        cfg.n_basis = nb
    if data.get("grid_extent") is not None:
        cfg.grid_extent = _number(data["grid_extent"], "grid_extent", positive=True, allow_zero=False)
    if "grid_points" in data:
        gp = data["grid_points"]
        _require(isinstance(gp, int) and not isinstance(gp, bool) and gp >= 16 and gp % 2 == 0,
                 "grid_points", "must be an even integer >= 16")
        cfg.grid_points = gp
    if "dt" in data:
        cfg.dt = _number(data["dt"], "dt", positive=True, allow_zero=False)
    for key in ("textbook_mode", "drift"):
        if key in data:
            _require(isinstance(data[key], bool), key, "must be true or false")
            setattr(cfg, key, data[key])
    if "kind" in data:
        _require(data["kind"] in KINDS, "kind", f"must be one of {', '.join(KINDS)}")
        cfg.kind = data["kind"]
    if "m0" in data:
        _require(data["m0"] in ("both", 0.5, -0.5), "m0", "must be \"both\", 0.5 or -0.5")
        cfg.m0 = data["m0"]
    if "out" in data:
        _require(isinstance(data["out"], str) and data["out"], "out", "must be a non-empty path")
        cfg.out = data["out"]
    if "snapshot_stride" in data:
        st = data["snapshot_stride"]
        _require(isinstance(st, int) and not isinstance(st, bool) and st >= 1, "snapshot_stride", "must be an integer >= 1")
        cfg.snapshot_stride = st

    if "sweep" in data and data["sweep"] is not None:
        sw = data["sweep"]
        _require(isinstance(sw, dict), "sweep", "must be an object")
        unknown = sorted(set(sw) - _SWEEP_KEYS)
        _require(not unknown, "sweep." + ",".join(unknown), "unknown key")
        _require(sw.get("axis") in SWEEP_AXES, "sweep.axis", f"must be one of {', '.join(SWEEP_AXES)}")
        values = sw.get("values")
        _require(isinstance(values, list) and len(values) > 0, "sweep.values", "must be a nonempty list")
        values = [_number(v, "sweep.values", positive=True, allow_zero=False) for v in values]
        hold = sw.get("hold")
        _require(hold in (None, "AS"), "sweep.hold", "must be \"AS\" or null")
        cfg.sweep = SweepSpec(axis=sw["axis"], values=values, hold=hold)
    _require(cfg.kind != "sweep" or cfg.sweep is not None, "sweep", "required when kind is \"sweep\"")

    if "tomography" in data and data["tomography"] is not None:
        tm = data["tomography"]
        _require(isinstance(tm, dict), "tomography", "must be an object")
        unknown = sorted(set(tm) - _TOMO_KEYS)
        _require(not unknown, "tomography." + ",".join(unknown), "unknown key")
        spec = TomographySpec()
        if "p" in tm:
            p = tm["p"]
            _require(isinstance(p, list) and len(p) == 3, "tomography.p", "must be a list of three numbers")
            spec.p = [_number(v, "tomography.p") for v in p]
            _require(math.fsum(v * v for v in spec.p) <= 1 + 1e-12, "tomography.p", "must satisfy |p| <= 1")
        if "noise" in tm:
            spec.noise = _number(tm["noise"], "tomography.noise", positive=True)
        if "seed" in tm:
            _require(isinstance(tm["seed"], int) and not isinstance(tm["seed"], bool), "tomography.seed", "must be an integer")
            spec.seed = tm["seed"]
        if tm.get("observed") is not None:
            _require(isinstance(tm["observed"], str), "tomography.observed", "must be a CSV path")
            spec.observed = tm["observed"]
        cfg.tomography = spec
    if cfg.kind == "tomography" and cfg.tomography is None:
        cfg.tomography = TomographySpec()
    # surface parameter-level violations now, not mid-run
    if cfg.kind != "sweep":
        cfg.sim_params()
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data)


# --- output helpers ---------------------------------------------------------

def grid_geometry(x: np.ndarray) -> dict:
    spacing = float(x[1] - x[0])
    return {"points": int(x.size), "origin": float(x[0]), "spacing": spacing, "extent": float(-x[0])}


def write_map(path: Path, x: np.ndarray, z: np.ndarray, values: np.ndarray):
    X, Z = np.meshgrid(x, z, indexing="ij")
    table = np.column_stack([X.ravel(), Z.ravel(), np.asarray(values, dtype=float).ravel()])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header="x,z,value", comments="")


def read_map(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = np.unique(table[:, 0])
    z = np.unique(table[:, 1])
    if x.size * z.size != table.shape[0]:
        raise ValidationError(f"{path}: rows do not form a full x,z grid")
    values = table[:, 2].reshape(x.size, z.size)
    return x, z, values


def _moments_dict(m):
    return None if m is None else asdict(m)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


# --- run kinds --------------------------------------------------------------

def _run_evolve(cfg: RunConfig, params: SimParams, out: Path) -> dict:
    drift = cfg.drift and params.AS > 0
    records = {}
    if cfg.m0 == "both":
        plus, minus = exact_records(params, drift, cfg.snapshot_stride)
        records = {0.5: plus, -0.5: minus}
    else:
        m0 = float(cfg.m0)
        records = {m0: run_exact(params, m0, drift, cfg.snapshot_stride)}

    summary = {"flip": {}, "moments": {}, "norm_drift": {}, "warnings": []}
    rows = []
    for m0, rec in records.items():
        label = "plus" if m0 > 0 else "minus"
        grid = rec.final_grid
        summary["flip"][label] = spin_flip_probability(grid, m0)
        summary["moments"][label] = {c: _moments_dict(m) for c, m in component_moments(grid).items()}
        summary["norm_drift"][label] = rec.norm_drift
        summary["warnings"].extend(f"m0={m0:+g}: {w}" for w in rec.warnings)
        for row in rec.trajectory(params):
            rows.append({"m0": m0, **row})
    first = next(iter(records.values())).final_grid
    summary["grid"] = grid_geometry(first.x)
    summary["t_final"] = first.t
    if 0.5 in records:
        write_map(out / "flip_density.csv", first.x, first.z, spin_flip_density(records[0.5].final_grid, 0.5))
    else:
        write_map(out / "flip_density.csv", first.x, first.z, spin_flip_density(first, -0.5))
    if len(records) == 2:
        pair = RunPair(records[0.5].final_grid, records[-0.5].final_grid)
        p0 = probability_density(pair)
        write_map(out / "p0.csv", first.x, first.z, p0)
        summary["lobes"] = {k: _moments_dict(v) for k, v in lobe_moments(p0, first.x, first.z, first.cell_area).items()}
    _write_trajectory(out / "trajectory.csv", rows)
    return summary


def _write_trajectory(path: Path, rows: list[dict]):
    if not rows:
        return
    cols = list(rows[0])
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(f"{row[c]:.17g}" for c in cols))
    path.write_text("\n".join(lines) + "\n")


def _compare(params: SimParams, t: float = 1.0) -> dict:
    plus, minus = exact_records(params, False)
    exact = RunPair(plus.final_grid, minus.final_grid)
    deficits = {}
    approx_flips = {}
    for name in APPROXIMATIONS:
        ap = approximation_pair(name, params, t)
        deficits[name] = 1.0 - overlap(exact, ap)
        approx_flips[name] = {
            "plus": spin_flip_probability(ap.plus, 0.5),
            "minus": spin_flip_probability(ap.minus, -0.5),
        }
    order = [deficits[k] for k in ("adiabatic", "pseudo_adiabatic", "coherent_state", "symmetrized")]
    return {
        "A": params.A,
        "S": params.S,
        "z0": params.z0,
        "n_basis": params.n_basis,
        "overlap_deficits": deficits,
        "ordering_holds": all(a > b for a, b in zip(order, order[1:])),
        "flip": {
            "exact": {
                "plus": spin_flip_probability(exact.plus, 0.5),
                "minus": spin_flip_probability(exact.minus, -0.5),
            },
            **approx_flips,
        },
        "warnings": plus.warnings + minus.warnings,
    }


def _run_compare(cfg: RunConfig, params: SimParams, out: Path) -> dict:
    summary = _compare(params)
    summary["grid"] = grid_geometry(make_grid(params))
    return summary


def _run_approximate(cfg: RunConfig, params: SimParams, out: Path) -> dict:
    summary = {"approximations": {}}
    x = make_grid(params)
    for name in APPROXIMATIONS:
        pair = approximation_pair(name, params, 1.0)
        if cfg.drift and params.AS > 0:
            td = drift_time(params)
            pair = RunPair(free_drift(pair.plus, td, params), free_drift(pair.minus, td, params))
        report = build_report(pair)
        summary["approximations"][name] = report.scalars()
        write_map(out / f"p0_{name}.csv", x, x, report.p0)
    summary["grid"] = grid_geometry(x)
    return summary


def _asymmetry_pair(cfg: RunConfig, params: SimParams) -> tuple[RunPair, list[str]]:
    drift = cfg.drift and params.AS > 0
    plus, minus = exact_records(params, drift)
    return RunPair(plus.final_grid, minus.final_grid), plus.warnings + minus.warnings


def _write_basis_maps(out: Path, pair: RunPair, report) -> None:
    x, z = pair.x, pair.z
    write_map(out / "p0.csv", x, z, report.p0)
    write_map(out / "ax.csv", x, z, report.ax)
    write_map(out / "ay.csv", x, z, report.ay)
    write_map(out / "az.csv", x, z, report.az)
    write_map(out / "flip_density.csv", x, z, spin_flip_density(pair.plus, 0.5))


def _run_asymmetry(cfg: RunConfig, params: SimParams, out: Path) -> dict:
    pair, warnings = _asymmetry_pair(cfg, params)
    report = build_report(pair)
    _write_basis_maps(out, pair, report)
    summary = report.scalars()
    summary["max_abs_asymmetry"] = {k: float(np.abs(getattr(report, k)).max()) for k in ("ax", "ay", "az")}
    summary["lobes"] = {k: _moments_dict(v) for k, v in
                        lobe_moments(report.p0, pair.x, pair.z, pair.cell_area).items()}
    summary["grid"] = grid_geometry(pair.x)
    summary["t_final"] = pair.plus.t
    summary["warnings"] = warnings
    return summary


def _run_tomography(cfg: RunConfig, params: SimParams, out: Path) -> dict:
    spec = cfg.tomography
    pair, warnings = _asymmetry_pair(cfg, params)
    report = build_report(pair)
    _write_basis_maps(out, pair, report)
    basis = AsymmetryBasis(p0=report.p0, ax=report.ax, ay=report.ay, az=report.az, cell_area=pair.cell_area)
    summary = {"grid": grid_geometry(pair.x), "warnings": warnings}
    if spec.observed is not None:
        x, z, observed = read_map(Path(spec.observed))
        if x.size != pair.x.size or not np.allclose(x, pair.x) or not np.allclose(z, pair.z):
            raise ValidationError("observed map geometry does not match the simulation grid")
        summary["observed"] = spec.observed
    else:
        observed = predicted_density(basis, spec.p)
        if spec.noise > 0:
            rng = np.random.default_rng(spec.seed)
            observed = observed + spec.noise * report.p0.max() * rng.standard_normal(observed.shape)
        write_map(out / "observed.csv", pair.x, pair.z, observed)
        summary["injected_p"] = list(spec.p)
        summary["noise"] = spec.noise
        summary["seed"] = spec.seed
    fit = reconstruct_polarization(observed, basis)
    summary["fitted_p"] = [fit.p.p_x, fit.p.p_y, fit.p.p_z]
    summary["residual"] = fit.residual
    summary["condition"] = fit.condition
    summary["scale"] = fit.scale
    summary["unphysical"] = fit.unphysical
    return summary


def _run_sweep(cfg: RunConfig, out: Path) -> dict:
    sweep = cfg.sweep
    AS = cfg.A * cfg.S
    points = []
    for value in sweep.values:
        overrides = {sweep.axis: value}
        if sweep.hold == "AS" and sweep.axis == "A":
            overrides["S"] = AS / value
        elif sweep.hold == "AS" and sweep.axis == "S":
            overrides["A"] = AS / value
        if sweep.axis == "z0" and cfg.grid_extent is None:
            overrides["grid_extent"] = None
        params = cfg.sim_params(**overrides)
        log.info("sweep point %s=%g (A=%g, S=%g, n_basis=%d)", sweep.axis, value, params.A, params.S, params.n_basis)
        points.append(_compare(params))
    return {
        "axis": sweep.axis,
        "hold": sweep.hold,
        "points": points,
        "ordering_holds": all(p["ordering_holds"] for p in points),
    }


def run(config: RunConfig) -> dict:
    """Execute one configured run and write its artifacts to ``config.out``."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    if config.kind == "sweep":
        summary = _run_sweep(config, out)
    else:
        params = config.sim_params()
        handler = {
            "evolve": _run_evolve,
            "approximate": _run_approximate,
            "compare": _run_compare,
            "asymmetry": _run_asymmetry,
            "tomography": _run_tomography,
        }[config.kind]
        summary = handler(config, params, out)
        summary["params"] = asdict(params)
    summary["kind"] = config.kind
    summary["config"] = asdict(config)
    summary["wall_time"] = time.perf_counter() - start
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return summary


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sgsim", description="Spin-1/2 wave packet in a Stern-Gerlach field")
    ap.add_argument("--config", help="JSON config file; flags override its values")
    ap.add_argument("--A", type=float)
    ap.add_argument("--S", type=float)
    ap.add_argument("--z0", type=float)
    ap.add_argument("--kind", choices=KINDS)
    ap.add_argument("--out")
    ap.add_argument("--n-basis", dest="n_basis")
    ap.add_argument("--grid-points", dest="grid_points", type=int)
    ap.add_argument("--grid-extent", dest="grid_extent", type=float)
    ap.add_argument("--dt", type=float)
    ap.add_argument("--textbook-mode", dest="textbook_mode", action="store_true", default=None)
    ap.add_argument("--no-drift", dest="drift", action="store_false", default=None)
    ap.add_argument("--m0", help="both, 0.5 or -0.5")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _merge_args(args: argparse.Namespace) -> dict:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValidationError("config file must contain a JSON object")
    for key in ("A", "S", "z0", "kind", "out", "grid_points", "grid_extent", "dt", "textbook_mode", "drift"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.n_basis is not None:
        data["n_basis"] = args.n_basis if args.n_basis == "auto" else int(args.n_basis)
    if args.m0 is not None:
        data["m0"] = args.m0 if args.m0 == "both" else float(args.m0)
    return data


def _fail(code: int, kind: str, exc: Exception, out: str | None) -> int:
    payload = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    text = json.dumps(payload)
    print(text, file=sys.stderr)
    if out:
        try:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / "error.json").write_text(text + "\n")
        except OSError:
            pass
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    out = args.out
    try:
        data = _merge_args(args)
        out = data.get("out", out)
        cfg = config_from_dict(data)
        summary = run(cfg)
    except (ValidationError, FrameMismatchError, UndefinedDriftError, json.JSONDecodeError, OSError, ValueError) as exc:
        if isinstance(exc, DegenerateBasisError):
            return _fail(EXIT_NUMERICAL, "numerical", exc, out)
        return _fail(EXIT_VALIDATION, "validation", exc, out)
    except (IntegrationError, FloatingPointError) as exc:
        return _fail(EXIT_NUMERICAL, "numerical", exc, out)
    print(json.dumps({"kind": summary["kind"], "out": str(Path(cfg.out)), "wall_time": summary["wall_time"]}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
