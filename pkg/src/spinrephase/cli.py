"""Command-line front end.

Subcommands: derive, simulate, two-class, fig3, ramsey-scan, fit.  A run
is described by a single JSON config (``--config`` takes a path, a
built-in preset name, or a manifest from a previous run); every simulation
writes plot-ready CSV plus a manifest that fully reproduces it.  All
config frequencies are in Hz; everything internal is rad/s.

Exit codes: 0 success, 2 config error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .backend import BACKEND
from .constants import BOHR_RADIUS, TWO_PI
from .grid import EnergyGrid, GridScheme, build_gauss, build_uniform
from .kinetic import (
    KernelSpec,
    NumericsError,
    SpinField,
    evolve,
)
from .presets import PRESET_NAMES, get_preset
from .ramsey import (
    NoRevivalError,
    RamseyConfig,
    contrast_vs_time,
    fit_atom_number,
    fit_exponential_decay,
    fit_revival_time,
    fringe_scan,
    read_xy_csv,
)
from .rates import (
    AtomicParams,
    RateSet,
    TrapParams,
    classify_regime,
    exchange_rate,
    inhomogeneity_scale,
    lateral_collision_rate,
    mean_field_shift,
    thermal_velocity,
)
from .twoclass import TwoClassState, evolve_two_class, two_class_revival_estimate
from .kinetic import ContrastCurve, u_perp1


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# config access helpers


def _section(cfg: dict, name: str, required: bool = True) -> dict:
    value = cfg.get(name)
    if value is None:
        if required:
            raise ConfigError(f"{name}: section is required")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: must be a JSON object")
    return value


def _number(section: dict, key: str, ctx: str, default=None, required: bool = True):
    if key not in section:
        if required and default is None:
            raise ConfigError(f"{ctx}.{key}: field is required")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{ctx}.{key}: must be a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ConfigError(f"{ctx}.{key}: must be finite")
    return float(value)


def _int(section: dict, key: str, ctx: str, default=None, required: bool = True):
    value = _number(section, key, ctx, default=default, required=required)
    if value is None:
        return None
    if value != int(value):
        raise ConfigError(f"{ctx}.{key}: must be an integer, got {value!r}")
    return int(value)


# ---------------------------------------------------------------------------
# config resolution


def _resolve_grid(cfg: dict) -> EnergyGrid:
    # Default: uniform midpoint grid, 256 nodes on (0, 18].  It resolves the
    # energy comb of freely dephasing spins through delta0 * t of order 4 pi
    # (absolute contrast error about 5e-6); a 48-node Gauss-Laguerre rule,
    # despite exact moments, partially rephases there with O(0.1) errors.
    section = _section(cfg, "grid", required=False)
    scheme = section.get("scheme", "uniform")
    try:
        if scheme == "gauss":
            n_points = _int(section, "n_points", "grid", default=48)
            return build_gauss(n_points)
        if scheme == "uniform":
            n_points = _int(section, "n_points", "grid", default=256)
            e_max = _number(section, "e_max", "grid", default=18.0)
            return build_uniform(n_points, e_max)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc
    raise ConfigError(f"grid.scheme: must be 'gauss' or 'uniform', got {scheme!r}")


def _load_kernel_matrix(path: str) -> np.ndarray:
    p = Path(path)
    if p.suffix == ".npy":
        return np.load(p)
    return np.loadtxt(p, delimiter=",", ndmin=2)


def _resolve_kernel(cfg: dict, grid: EnergyGrid) -> KernelSpec:
    section = _section(cfg, "kernel", required=False)
    kind = section.get("kind", "uniform")
    eps = _number(section, "regularization_epsilon", "kernel", default=1e-6)
    try:
        if kind in ("uniform", "infinite-range"):
            return KernelSpec.infinite_range()
        if kind in ("oned", "one-d"):
            if grid.scheme is not GridScheme.UNIFORM_TRUNCATED:
                raise ConfigError(
                    "kernel.kind: 'oned' requires grid.scheme 'uniform'"
                )
            return KernelSpec.one_d(regularization_epsilon=eps)
        if kind == "matrix":
            path = section.get("matrix_path")
            if not path:
                raise ConfigError("kernel.matrix_path: required for kind 'matrix'")
            matrix = _load_kernel_matrix(path)
            if matrix.shape != (len(grid), len(grid)):
                raise ConfigError(
                    f"kernel.matrix_path: matrix shape {matrix.shape} does not "
                    f"match the {len(grid)}-node grid"
                )
            return KernelSpec.from_matrix(matrix)
    except ValueError as exc:
        raise ConfigError(f"kernel: {exc}") from exc
    raise ConfigError(
        f"kernel.kind: must be 'uniform', 'oned' or 'matrix', got {kind!r}"
    )


def _resolve_atomic(cfg: dict) -> AtomicParams:
    section = _section(cfg, "atomic")
    a01_m = _number(section, "scattering_length_a01_m", "atomic", required=False)
    a01_bohr = _number(section, "scattering_length_a01_bohr", "atomic", required=False)
    if (a01_m is None) == (a01_bohr is None):
        raise ConfigError(
            "atomic: exactly one of scattering_length_a01_m or "
            "scattering_length_a01_bohr is required"
        )
    a01 = a01_m if a01_m is not None else a01_bohr * BOHR_RADIUS
    try:
        return AtomicParams(
            mass=_number(section, "mass_kg", "atomic"),
            scattering_length_a01=a01,
            density_nbar=_number(section, "density_nbar_m3", "atomic"),
            temperature=_number(section, "temperature_k", "atomic"),
        )
    except ValueError as exc:
        raise ConfigError(f"atomic: {exc}") from exc


def _resolve_delta0(cfg: dict, density_nbar_m3: float) -> float:
    section = _section(cfg, "inhomogeneity")
    delta0_hz = _number(section, "delta0_hz", "inhomogeneity", required=False)
    base_hz = _number(section, "base_hz", "inhomogeneity", required=False)
    if (delta0_hz is None) == (base_hz is None):
        raise ConfigError(
            "inhomogeneity: exactly one of delta0_hz or (base_hz, "
            "slope_hz_per_unit_density) is required"
        )
    if delta0_hz is not None:
        return TWO_PI * delta0_hz
    slope = _number(section, "slope_hz_per_unit_density", "inhomogeneity", default=0.1)
    return inhomogeneity_scale(density_nbar_m3, base_hz, slope)


def _sequence_detuning(cfg: dict) -> float:
    section = _section(cfg, "sequence", required=False)
    return TWO_PI * _number(section, "detuning_dr_hz", "sequence", default=3.6)


def _resolve_rates(cfg: dict) -> tuple[RateSet, AtomicParams | None]:
    """Rates from exactly one of the atomic or the override section."""
    has_atomic = "atomic" in cfg
    has_override = "rates_override" in cfg
    if has_atomic == has_override:
        raise ConfigError(
            "config must contain exactly one of 'atomic' or 'rates_override'"
        )
    renorm = _number(cfg, "exchange_renorm", "config", default=1.0)
    try:
        if has_atomic:
            atomic = _resolve_atomic(cfg)
            rates = RateSet(
                delta0=_resolve_delta0(cfg, atomic.density_nbar),
                omega_ex=exchange_rate(atomic),
                gamma_c=lateral_collision_rate(atomic),
                detuning=_sequence_detuning(cfg),
                exchange_renorm=renorm,
            )
            return rates, atomic
        section = _section(cfg, "rates_override")
        rates = RateSet(
            delta0=TWO_PI * _number(section, "delta0_hz", "rates_override"),
            omega_ex=TWO_PI * _number(section, "omega_ex_hz", "rates_override"),
            gamma_c=_number(section, "gamma_c_per_s", "rates_override"),
            detuning=TWO_PI
            * _number(section, "detuning_hz", "rates_override", default=0.0),
            exchange_renorm=_number(
                section, "exchange_renorm", "rates_override", default=renorm
            ),
        )
        return rates, None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"rates: {exc}") from exc


def _resolve_trap(cfg: dict) -> TrapParams:
    section = _section(cfg, "trap")
    try:
        return TrapParams.from_hz(
            _number(section, "omega_x_hz", "trap"),
            _number(section, "omega_y_hz", "trap"),
            _number(section, "omega_z_hz", "trap"),
        )
    except ValueError as exc:
        raise ConfigError(f"trap: {exc}") from exc


def _resolve_sequence(cfg: dict, ramsey_time: float | None = None) -> RamseyConfig:
    section = _section(cfg, "sequence", required=False)
    tr = ramsey_time
    if tr is None:
        tr = _number(section, "ramsey_time_tr_s", "sequence")
    try:
        return RamseyConfig(
            ramsey_time_tr=tr,
            detuning_dr=TWO_PI * _number(section, "detuning_dr_hz", "sequence", default=3.6),
            n_detuning_steps=_int(section, "n_detuning_steps", "sequence", default=30),
            detuning_span_periods=_number(
                section, "detuning_span_periods", "sequence", default=2.0
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"sequence: {exc}") from exc


@dataclass
class Times:
    t_final: float
    dt: float
    sample_every: int
    tr_list: list[float] | None


def _resolve_times(cfg: dict) -> Times:
    section = _section(cfg, "times")
    t_final = _number(section, "t_final_s", "times")
    dt = _number(section, "dt_s", "times")
    sample_every = _int(section, "sample_every", "times", default=1)
    if not t_final > 0.0:
        raise ConfigError(f"times.t_final_s: must be > 0, got {t_final}")
    if not dt > 0.0:
        raise ConfigError(f"times.dt_s: must be > 0, got {dt}")
    if sample_every < 1:
        raise ConfigError(f"times.sample_every: must be >= 1, got {sample_every}")
    tr_list = section.get("tr_list_s")
    if tr_list is not None:
        if (
            not isinstance(tr_list, list)
            or not tr_list
            or not all(isinstance(v, (int, float)) and v > 0 for v in tr_list)
            or any(b <= a for a, b in zip(tr_list, tr_list[1:]))
        ):
            raise ConfigError(
                "times.tr_list_s: must be a nonempty, strictly increasing list of "
                "positive Ramsey times"
            )
        tr_list = [float(v) for v in tr_list]
    return Times(t_final, dt, sample_every, tr_list)


# ---------------------------------------------------------------------------
# config loading and overrides


def load_config(value: str | None, default_preset: str) -> dict:
    if value is None:
        return get_preset(default_preset)
    if value in PRESET_NAMES:
        return get_preset(value)
    path = Path(value)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    if "resolved_config" in doc:
        doc = doc["resolved_config"]  # rerun from a manifest
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: resolved_config must be an object")
    return doc


def apply_flag_overrides(cfg: dict, args: argparse.Namespace) -> dict:
    if getattr(args, "grid_points", None) is not None:
        cfg.setdefault("grid", {})["n_points"] = args.grid_points
    if getattr(args, "dt", None) is not None:
        cfg.setdefault("times", {})["dt_s"] = args.dt
    if getattr(args, "renorm", None) is not None:
        cfg["exchange_renorm"] = args.renorm
        if "rates_override" in cfg:
            cfg["rates_override"]["exchange_renorm"] = args.renorm
    if getattr(args, "kernel", None) is not None:
        spec = args.kernel
        if spec in ("uniform", "oned"):
            cfg["kernel"] = {"kind": spec}
        elif spec.startswith("matrix:"):
            cfg["kernel"] = {"kind": "matrix", "matrix_path": spec[len("matrix:"):]}
        else:
            raise ConfigError(
                f"--kernel: must be 'uniform', 'oned' or 'matrix:PATH', got {spec!r}"
            )
    if getattr(args, "out", None) is not None:
        cfg.setdefault("output", {})["path"] = args.out
    return cfg


def _out_dir(cfg: dict) -> Path:
    section = _section(cfg, "output", required=False)
    fmt = section.get("format", "csv")
    if fmt != "csv":
        raise ConfigError(f"output.format: only 'csv' is supported, got {fmt!r}")
    out = Path(section.get("path", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid_checksum(grid: EnergyGrid) -> str:
    digest = hashlib.sha256()
    digest.update(grid.nodes.tobytes())
    digest.update(grid.weights.tobytes())
    return digest.hexdigest()


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="ascii")


def _manifest(
    command: str, cfg: dict, grid: EnergyGrid, rates_doc, started: float
) -> dict:
    return {
        "tool": "spinrephase",
        "version": __version__,
        "backend": BACKEND,
        "command": command,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "duration_s": time.perf_counter() - started,
        "grid_checksum_sha256": _grid_checksum(grid),
        "rates_rad_per_s": rates_doc,
        "resolved_config": cfg,
    }


def _rates_doc(rates: RateSet) -> dict:
    return {
        "delta0": rates.delta0,
        "omega_ex": rates.omega_ex,
        "omega_ex_effective": rates.omega_ex_effective,
        "gamma_c_per_s": rates.gamma_c,
        "detuning": rates.detuning,
        "exchange_renorm": rates.exchange_renorm,
    }


def _dump_grid(grid: EnergyGrid, path: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("node,weight\n")
        for e, w in zip(grid.nodes, grid.weights):
            fh.write(f"{e:.17g},{w:.17g}\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_derive(args: argparse.Namespace) -> None:
    cfg = apply_flag_overrides(load_config(args.config, "experiment1"), args)
    grid = _resolve_grid(cfg)
    if args.dump_grid:
        _dump_grid(grid, args.dump_grid)
    rates, atomic = _resolve_rates(cfg)
    trap = _resolve_trap(cfg)
    report = classify_regime(rates, trap)
    doc = {
        "rates": _rates_doc(rates),
        "rates_hz": {
            "delta0_hz": rates.delta0 / TWO_PI,
            "omega_ex_hz": rates.omega_ex / TWO_PI,
            "omega_ex_effective_hz": rates.omega_ex_effective / TWO_PI,
            "gamma_c_per_s": rates.gamma_c,
            "detuning_hz": rates.detuning / TWO_PI,
        },
        "regime": {
            "knudsen_ok": report.knudsen_ok,
            "isre_dominates_collisions": report.isre_dominates_collisions,
            "isre_dominates_inhomogeneity": report.isre_dominates_inhomogeneity,
            "label": report.regime_label.value,
        },
    }
    if atomic is not None:
        doc["thermal_velocity_m_per_s"] = thermal_velocity(atomic)
        doc["mean_field_shift_hz_at_nbar"] = mean_field_shift(atomic.density_nbar) / TWO_PI
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if args.out is not None:
        out = _out_dir(cfg)
        (out / "derive.json").write_text(text + "\n", encoding="ascii")


def cmd_simulate(args: argparse.Namespace) -> None:
    started = time.perf_counter()
    cfg = apply_flag_overrides(load_config(args.config, "experiment1"), args)
    grid = _resolve_grid(cfg)
    if args.dump_grid:
        _dump_grid(grid, args.dump_grid)
    kernel = _resolve_kernel(cfg, grid)
    rates, _ = _resolve_rates(cfg)
    times = _resolve_times(cfg)
    initial = SpinField.initial_transverse(len(grid))
    curve = evolve(
        initial,
        grid,
        rates,
        kernel,
        t_final=times.t_final,
        dt=times.dt,
        sample_every=times.sample_every,
    )
    out = _out_dir(cfg)
    curve.write_csv(out / "trajectory.csv")
    _write_json(out / "manifest.json", _manifest("simulate", cfg, grid, _rates_doc(rates), started))
    print(f"wrote {out / 'trajectory.csv'} ({len(curve)} samples)")


def cmd_two_class(args: argparse.Namespace) -> None:
    started = time.perf_counter()
    cfg = apply_flag_overrides(load_config(args.config, "experiment1"), args)
    section = _section(cfg, "two_class")
    try:
        state = TwoClassState(
            s_fast=u_perp1(),
            s_slow=u_perp1(),
            delta_split=TWO_PI * _number(section, "delta_split_hz", "two_class"),
            omega_ex=TWO_PI * _number(section, "omega_ex_hz", "two_class"),
            gamma_x=_number(section, "gamma_x_per_s", "two_class", default=0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"two_class: {exc}") from exc
    t_final = _number(section, "t_final_s", "two_class")
    dt = _number(section, "dt_s", "two_class")
    sample_every = _int(section, "sample_every", "two_class", default=1)
    curve = evolve_two_class(state, t_final, dt, sample_every=sample_every)
    out = _out_dir(cfg)
    curve.write_csv(out / "twoclass.csv")
    grid = _resolve_grid(cfg)
    rates_doc = {
        "delta_split": state.delta_split,
        "omega_ex": state.omega_ex,
        "gamma_x_per_s": state.gamma_x,
    }
    _write_json(out / "manifest.json", _manifest("two-class", cfg, grid, rates_doc, started))
    print(f"wrote {out / 'twoclass.csv'} ({len(curve)} samples)")


def _fig3_rates(cfg: dict, density: float) -> RateSet:
    section = _section(cfg, "fig3", required=False)
    delta0_hz = _number(section, "delta0_hz", "fig3", default=2.0)
    wex_per_n = _number(section, "omega_ex_hz_per_density", "fig3", default=4.5)
    gc_per_n = _number(section, "gamma_c_per_density", "fig3", default=2.1)
    renorm = _number(cfg, "exchange_renorm", "config", default=1.0)
    try:
        return RateSet(
            delta0=TWO_PI * delta0_hz,
            omega_ex=TWO_PI * wex_per_n * density,
            gamma_c=gc_per_n * density,
            detuning=_sequence_detuning(cfg),
            exchange_renorm=renorm,
        )
    except ValueError as exc:
        raise ConfigError(f"fig3 rates at density {density}: {exc}") from exc


def cmd_fig3(args: argparse.Namespace) -> None:
    started = time.perf_counter()
    cfg = apply_flag_overrides(load_config(args.config, "fig3"), args)
    densities = cfg.get("densities")
    if not isinstance(densities, list) or not densities:
        raise ConfigError("densities: a nonempty list is required for fig3")
    grid = _resolve_grid(cfg)
    if args.dump_grid:
        _dump_grid(grid, args.dump_grid)
    kernel = _resolve_kernel(cfg, grid)
    times = _resolve_times(cfg)
    if times.tr_list is None:
        raise ConfigError("times.tr_list_s: required for fig3")
    out = _out_dir(cfg)
    summary = []
    for density in densities:
        if not isinstance(density, (int, float)) or density <= 0:
            raise ConfigError(f"densities: entries must be > 0, got {density!r}")
        rates = _fig3_rates(cfg, float(density))
        seq = _resolve_sequence(cfg, ramsey_time=times.tr_list[0])
        curve = contrast_vs_time(grid, rates, kernel, times.tr_list, seq, dt=times.dt)
        name = f"fig3_nbar_{density:g}.csv"
        curve.write_csv(out / name)
        entry = {
            "nbar": density,
            "omega_ex_hz": rates.omega_ex / TWO_PI,
            "omega_ex_effective_hz": rates.omega_ex_effective / TWO_PI,
            "gamma_c_per_s": rates.gamma_c,
            "csv": name,
            "revival_estimate_s": two_class_revival_estimate(rates),
        }
        try:
            entry["revival_time_s"] = fit_revival_time(curve)
            entry["no_revival"] = False
        except NoRevivalError as exc:
            entry["revival_time_s"] = None
            entry["no_revival"] = True
            entry["no_revival_reason"] = str(exc)
        summary.append(entry)
    _write_json(out / "fig3_summary.json", {"densities": summary})
    _write_json(out / "manifest.json", _manifest("fig3", cfg, grid, [s["omega_ex_hz"] for s in summary], started))
    print(f"wrote {len(densities)} contrast curves and {out / 'fig3_summary.json'}")


def cmd_ramsey_scan(args: argparse.Namespace) -> None:
    started = time.perf_counter()
    cfg = apply_flag_overrides(load_config(args.config, "fig3"), args)
    grid = _resolve_grid(cfg)
    if args.dump_grid:
        _dump_grid(grid, args.dump_grid)
    kernel = _resolve_kernel(cfg, grid)
    rates, _ = _resolve_rates(cfg)
    seq = _resolve_sequence(cfg)
    times = _resolve_times(cfg)
    scan = fringe_scan(grid, rates, kernel, seq, dt=times.dt)
    out = _out_dir(cfg)
    with open(out / "ramsey_scan.csv", "w", encoding="ascii", newline="\n") as fh:
        fh.write("t_or_detuning,value\n")
        for d, p in zip(scan.detunings, scan.probabilities):
            fh.write(f"{d / TWO_PI:.17g},{p:.17g}\n")
    fit_doc = {
        "model": "ramsey-fringe",
        "parameters": {
            "contrast": scan.fitted_contrast,
            "phase_rad": scan.fitted_phase,
            "ramsey_time_s": seq.ramsey_time_tr,
        },
        "residual_rms": float(
            np.sqrt(
                np.mean(
                    (
                        2.0 * scan.probabilities
                        - 1.0
                        - scan.fitted_contrast
                        * np.cos(scan.detunings * seq.ramsey_time_tr + scan.fitted_phase)
                    )
                    ** 2
                )
            )
        ),
    }
    _write_json(out / "fringe.json", fit_doc)
    _write_json(out / "manifest.json", _manifest("ramsey-scan", cfg, grid, _rates_doc(rates), started))
    print(f"wrote {out / 'ramsey_scan.csv'} (contrast {scan.fitted_contrast:.6f})")


def cmd_fit(args: argparse.Namespace) -> None:
    x, y = read_xy_csv(args.input)
    if args.kind == "exp_decay":
        fit = fit_exponential_decay(x, y)
        doc = {
            "model": "exp_decay",
            "parameters": {"amplitude": fit.amplitude, "tau_s": fit.tau},
            "residual_rms": fit.residual_rms,
        }
    elif args.kind == "atom_number":
        fit = fit_atom_number(x, y)
        doc = {
            "model": "atom_number",
            "parameters": {"n_total": fit.n_total, "tau_s": fit.tau},
            "residual_rms": fit.residual_rms,
        }
    else:  # revival
        sbar = np.zeros((x.size, 3))
        sbar[:, 0] = y
        try:
            curve = ContrastCurve.from_sbar(x, sbar)
        except ValueError as exc:
            raise ConfigError(f"{args.input}: {exc}") from exc
        doc = {
            "model": "revival",
            "parameters": {"revival_time_s": fit_revival_time(curve)},
            "residual_rms": None,
        }
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "fit.json").write_text(text + "\n", encoding="ascii")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinrephase",
        description="Spin self-rephasing toolkit: kinetic simulations and fits.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        metavar="PATH",
        help=f"JSON config, preset name ({', '.join(PRESET_NAMES)}), or manifest",
    )
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--grid-points", type=int, metavar="N", help="override grid.n_points")
    common.add_argument("--dt", type=float, metavar="SECONDS", help="override times.dt_s")
    common.add_argument("--renorm", type=float, metavar="FLOAT", help="override exchange_renorm")
    common.add_argument(
        "--kernel",
        metavar="{uniform|oned|matrix:PATH}",
        help="override the exchange kernel",
    )
    common.add_argument(
        "--dump-grid", metavar="PATH", help="also write the quadrature grid as CSV"
    )

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("derive", parents=[common], help="derive rates and classify the regime")
    p.set_defaults(func=cmd_derive)
    p = sub.add_parser("simulate", parents=[common], help="free-evolution contrast trajectory")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("two-class", parents=[common], help="two-class toy model trajectory")
    p.set_defaults(func=cmd_two_class)
    p = sub.add_parser("fig3", parents=[common], help="density sweep of fringe contrast vs Ramsey time")
    p.set_defaults(func=cmd_fig3)
    p = sub.add_parser("ramsey-scan", parents=[common], help="fringe scan at one Ramsey time")
    p.set_defaults(func=cmd_ramsey_scan)
    p = sub.add_parser("fit", parents=[common], help="fit a model to a two-column CSV")
    p.add_argument("kind", choices=["exp_decay", "atom_number", "revival"])
    p.add_argument("input", metavar="CSV", help="input file: t_or_detuning,value")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
