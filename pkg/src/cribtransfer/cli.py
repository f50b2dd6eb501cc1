"""Command-line front end.

Subcommands: storage, transfer, sweep, estimate, reproduce.  Settings come
from built-in defaults, overridden by an optional TOML config file,
overridden by command-line flags.  Every report embeds the fully resolved
configuration (G-units, after any MHz conversion); feeding that JSON back
in with --config reproduces the data files byte for byte.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .core import ConfigError
from .storage import (
    StorageError,
    StorageProblem,
    analytic_coherence,
    optimize_envelope_width,
    read_envelope_csv,
    solve_propagation,
    storage_efficiency,
    write_coherence_csv,
)
from .sweep import (
    PROTOCOLS,
    SWEEP_AXES,
    AxisSpec,
    SweepSpec,
    fig_heatmap_spec,
    run_sweep,
    write_sweep_csv,
    write_sweep_sidecar,
)
from .transfer import (
    TransferError,
    TransferParams,
    eta_t_estimate,
    run_adiabatic,
    run_reduced_sweep_variant,
    run_reverse,
    run_staggered,
)

CONFIG_SCHEMA = "cribtransfer-config/1"

# [transfer] keys that carry frequency (divide by g_mhz) or time (multiply)
_FREQ_KEYS = ("delta_ib", "delta_inh", "kappa_sqrtn", "delta")
_TIME_KEYS = ("tau_r", "sweep_duration")
_FREQ_AXES = ("delta_IB", "kappa_sqrtN", "delta_inh", "Delta")
_TIME_AXES = ("tau_R",)


def load_config(path: str | None) -> dict:
    """Read a TOML config, or the resolved_config out of a report JSON."""
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    if p.suffix == ".json":
        doc = json.loads(p.read_text())
        doc = doc.get("resolved_config", doc)
    else:
        try:
            doc = tomllib.loads(p.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be a table: {path}")
    schema = doc.get("schema", CONFIG_SCHEMA)
    if schema != CONFIG_SCHEMA:
        raise ConfigError(f"unknown config schema {schema!r} (expected {CONFIG_SCHEMA})")
    return doc


def resolve_units(doc: dict) -> dict:
    """Convert an MHz-mode config to G-units in place of the original."""
    units = doc.get("units", "G-units")
    if units == "G-units":
        return doc
    if units != "MHz":
        raise ConfigError(f"units must be 'G-units' or 'MHz', got {units!r}")
    g_mhz = doc.get("g_mhz")
    if not g_mhz or g_mhz <= 0:
        raise ConfigError("MHz mode requires g_mhz > 0")
    out = json.loads(json.dumps(doc))  # deep copy, plain types only
    tr = out.get("transfer", {})
    for k in _FREQ_KEYS:
        if k in tr:
            tr[k] = tr[k] / g_mhz
    for k in _TIME_KEYS:
        if k in tr:
            tr[k] = tr[k] * g_mhz
    sw = out.get("sweep", {})
    for axis_key in ("axis1", "axis2"):
        ax = sw.get(axis_key)
        if ax and ax.get("name") in _FREQ_AXES:
            ax["min"], ax["max"] = ax["min"] / g_mhz, ax["max"] / g_mhz
        elif ax and ax.get("name") in _TIME_AXES:
            ax["min"], ax["max"] = ax["min"] * g_mhz, ax["max"] * g_mhz
    out["units"] = "G-units"
    out.pop("g_mhz", None)
    return out


def _merge_flags(section: dict, args: argparse.Namespace, keys: dict) -> dict:
    out = dict(section)
    for flag, key in keys.items():
        val = getattr(args, flag, None)
        if val is not None:
            out[key] = val
    return out


def _write_json(doc: dict, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _transfer_params(section: dict, seed) -> TransferParams:
    fields = {f.name for f in dataclasses.fields(TransferParams)}
    rename = {"kappa_sqrtn": "kappa_sqrt_n"}
    kwargs = {}
    for k, v in section.items():
        k2 = rename.get(k, k)
        if k2 in fields:
            kwargs[k2] = v
    if seed is not None:
        kwargs["seed"] = seed
    return TransferParams(**kwargs)


# ------------------------------------------------------------- subcommands

def cmd_storage(args) -> int:
    doc = resolve_units(load_config(args.config))
    sec = _merge_flags(
        doc.get("storage", {}),
        args,
        {
            "envelope": "envelope",
            "optical_depth": "optical_depth",
            "bandwidth_ratio": "bandwidth_ratio",
            "width": "width",
            "peak_time": "peak_time",
            "envelope_csv": "envelope_csv",
            "spectral_offset": "spectral_offset",
        },
    )
    if args.optimize_width is not None:
        sec["optimize_width"] = list(args.optimize_width)
    if "optical_depth" not in sec:
        raise ConfigError("missing field: [storage] optical_depth")
    d = float(sec["optical_depth"])
    kind = sec.get("envelope", "gaussian")
    offset = float(sec.get("spectral_offset", 0.0))

    report: dict = {"schema": "cribtransfer-storage-report/1", "version": __version__}
    if "optimize_width" in sec:
        lo, hi = sec["optimize_width"]
        best_w, best_eta, dense = optimize_envelope_width(d, (lo, hi), sec.get("peak_time"))
        sec["bandwidth_ratio"] = best_w
        report["optimized_width"] = {
            "best_bandwidth_ratio": best_w,
            "range": [lo, hi],
            "used_dense_scan": dense,
        }
        kind = "gaussian"

    problem = _build_problem(kind, d, sec)
    eta_s = storage_efficiency(problem, spectral_offset=offset)
    report["eta_s"] = eta_s
    report["envelope"] = kind
    report["optical_depth"] = d
    report["bandwidth_ratio"] = problem.bandwidth_ratio

    out_dir = Path(args.out_dir or doc.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.crosscheck:
        t_final = problem.envelope.peak_time + 8.0 * problem.envelope.pulse_duration
        pde = solve_propagation(problem, t_final=t_final)
        spectral = analytic_coherence(problem, t_final)
        num = np.trapezoid(np.abs(pde.values - spectral.values) ** 2, pde.grid)
        den = np.trapezoid(np.abs(spectral.values) ** 2, spectral.grid)
        rel = math.sqrt(num / den) if den > 0 else math.inf
        report["crosscheck"] = {"t_final": t_final, "l2_relative_difference": rel}
        fmt = args.format or doc.get("format", "csv")
        if fmt == "csv":
            write_coherence_csv(pde, out_dir / "coherence_pde.csv")
            write_coherence_csv(spectral, out_dir / "coherence_analytic.csv")
            report["crosscheck"]["files"] = ["coherence_pde.csv", "coherence_analytic.csv"]
        else:
            report["crosscheck"]["pde"] = _field_as_dict(pde)
            report["crosscheck"]["analytic"] = _field_as_dict(spectral)

    report["resolved_config"] = _resolved(doc, storage=sec)
    _write_json(report, out_dir / "storage_report.json")
    print(f"eta_s = {eta_s:.6f}  (d = {d}, envelope = {kind})")
    return 0


def _build_problem(kind: str, d: float, sec: dict) -> StorageProblem:
    if kind == "gaussian":
        if "bandwidth_ratio" not in sec:
            raise ConfigError("missing field: [storage] bandwidth_ratio")
        return StorageProblem.gaussian(d, float(sec["bandwidth_ratio"]), sec.get("peak_time"))
    if kind == "flat":
        return StorageProblem.flat(d, float(sec.get("width", 1.0)), float(sec.get("peak_time", 0.0)))
    if kind == "table":
        if "envelope_csv" not in sec:
            raise ConfigError("missing field: [storage] envelope_csv")
        return StorageProblem(read_envelope_csv(sec["envelope_csv"]), d)
    raise ConfigError(f"unknown envelope kind {kind!r} (gaussian, flat, table)")


def _field_as_dict(fld) -> dict:
    return {
        "time": fld.time,
        "xi": [float(x) for x in fld.grid],
        "re": [float(v) for v in fld.values.real],
        "im": [float(v) for v in fld.values.imag],
    }


def cmd_transfer(args) -> int:
    doc = resolve_units(load_config(args.config))
    sec = _merge_flags(
        doc.get("transfer", {}),
        args,
        {
            "protocol": "protocol",
            "n_spins": "n_spins",
            "delta_ib": "delta_ib",
            "delta_inh": "delta_inh",
            "kappa_sqrtn": "kappa_sqrtn",
            "delta": "delta",
            "tau_r": "tau_r",
            "trim_s": "trim_s",
            "trim_c": "trim_c",
            "sweep_duration": "sweep_duration",
            "tol": "tol",
            "intrinsic_profile": "intrinsic_profile",
        },
    )
    seed = args.seed if args.seed is not None else doc.get("seed")
    protocol = sec.get("protocol", "staggered")
    if protocol not in PROTOCOLS:
        raise ConfigError(f"unknown protocol {protocol!r}; valid: {', '.join(PROTOCOLS)}")
    params = _transfer_params(sec, seed)
    tol = float(sec.get("tol", 1e-8))
    trim_s = float(sec.get("trim_s", 1.0))
    trim_c = float(sec.get("trim_c", 1.0))

    if protocol == "staggered":
        res = run_staggered(params, trim_s=trim_s, trim_c=trim_c, tol=tol)
    elif protocol == "reduced-sweep":
        res = run_reduced_sweep_variant(params, trim_s=trim_s, trim_c=trim_c, tol=tol)
    elif protocol == "reverse":
        res = run_reverse(params, tol=tol)
    else:
        res = run_adiabatic(params, float(sec.get("sweep_duration", 50.0)), tol=tol)

    report = {
        "schema": "cribtransfer-transfer-report/1",
        "version": __version__,
        "protocol": protocol,
        "efficiency": res.efficiency,
        "final_populations": {
            "spins": float(np.sum(np.abs(res.final_state.spin_amps) ** 2)),
            "cavity": float(abs(res.final_state.cavity_amp) ** 2),
            "qubit": float(abs(res.final_state.qubit_amp) ** 2),
        },
        "schedule_total_duration": res.schedule.total_duration,
        **{k: v for k, v in res.report.items() if k != "kind"},
    }

    storage_sec = dict(doc.get("storage", {}))
    if storage_sec:
        if "optimize_width" in storage_sec:
            lo, hi = storage_sec["optimize_width"]
            d0 = float(storage_sec["optical_depth"])
            best_w, _, _ = optimize_envelope_width(d0, (lo, hi), storage_sec.get("peak_time"))
            storage_sec["bandwidth_ratio"] = best_w
        prob = _build_problem(
            storage_sec.get("envelope", "gaussian"),
            float(storage_sec["optical_depth"]),
            storage_sec,
        )
        eta_s = storage_efficiency(prob, spectral_offset=float(storage_sec.get("spectral_offset", 0.0)))
        report["eta_s"] = eta_s
        report["eta_t"] = res.efficiency
        report["eta_total"] = eta_s * res.efficiency

    out_dir = Path(args.out_dir or doc.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = args.format or doc.get("format", "csv")
    if fmt == "csv":
        res.trajectory.write_csv(out_dir / "trajectory.csv")
        report["trajectory_file"] = "trajectory.csv"
    else:
        report["trajectory"] = {
            "t": [float(x) for x in res.trajectory.times],
            "spin_pop": [float(x) for x in res.trajectory.spin_population],
            "cavity_pop": [float(x) for x in res.trajectory.cavity_population],
            "qubit_pop": [float(x) for x in res.trajectory.qubit_population],
            "sym_overlap": [float(x) for x in res.trajectory.symmetric_overlap],
        }
    resolved_tr = {**sec, "protocol": protocol, "trim_s": trim_s, "trim_c": trim_c, "tol": tol}
    report["resolved_config"] = _resolved(
        doc, transfer=resolved_tr, storage=storage_sec or None, seed=params.seed, fmt=fmt
    )
    _write_json(report, out_dir / "transfer_report.json")
    line = f"efficiency = {res.efficiency:.6f}  ({protocol})"
    if "eta_total" in report:
        line += f"  eta_s = {report['eta_s']:.6f}  eta_total = {report['eta_total']:.6f}"
    print(line)
    return 0


def _parse_axis(text: str) -> AxisSpec:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(
            f"axis must be name:min:max:n_points, got {text!r}; "
            f"valid names: {', '.join(SWEEP_AXES)}"
        )
    return AxisSpec(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))


def cmd_sweep(args) -> int:
    doc = resolve_units(load_config(args.config))
    sec = dict(doc.get("sweep", {}))
    if args.axis1 is not None:
        sec["axis1"] = dataclasses.asdict(_parse_axis(args.axis1))
    if args.axis2 is not None:
        sec["axis2"] = dataclasses.asdict(_parse_axis(args.axis2))
    if args.protocol is not None:
        sec["protocol"] = args.protocol
    if "axis1" not in sec:
        raise ConfigError("missing field: [sweep] axis1")
    seed = args.seed if args.seed is not None else doc.get("seed")
    base = _transfer_params(doc.get("transfer", {}), seed)

    spec = SweepSpec(
        axis1=AxisSpec(**sec["axis1"]),
        axis2=AxisSpec(**sec["axis2"]) if sec.get("axis2") else None,
        base=base,
        protocol=sec.get("protocol", "staggered"),
        trim_s=float(sec.get("trim_s", 1.0)),
        trim_c=float(sec.get("trim_c", 1.0)),
        sweep_duration=float(sec.get("sweep_duration", 50.0)),
        tol=float(sec.get("tol", 1e-8)),
    )
    workers = args.workers or int(doc.get("workers", 1))
    out_dir = Path(args.out_dir or doc.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / (args.out_name or "sweep.csv")
    resume_from = csv_path if args.resume and csv_path.exists() else None

    result = run_sweep(spec, workers=workers, resume_from=resume_from)

    resolved = _resolved(doc, transfer=dataclasses.asdict(base), sweep=sec, seed=base.seed)
    fmt = args.format or doc.get("format", "csv")
    if fmt == "csv":
        write_sweep_csv(result, csv_path)
        write_sweep_sidecar(
            result,
            csv_path.with_suffix(".json"),
            extra={"resolved_config": resolved, "csv": csv_path.name},
        )
    else:
        doc_out = {
            "schema": "cribtransfer-sweep-report/1",
            "version": __version__,
            "axis1": list(map(float, result.axis1_grid)),
            "axis2": None if result.axis2_grid is None else list(map(float, result.axis2_grid)),
            "efficiency": np.where(np.isfinite(result.values), result.values, None).tolist(),
            "resolved_config": resolved,
        }
        _write_json(doc_out, csv_path.with_suffix(".json"))
    n_bad = len(result.diagnostics)
    print(
        f"sweep done: {result.values.size} points, {n_bad} failed, "
        f"{result.wall_time:.1f} s with {result.workers} workers"
    )
    for d_ in result.diagnostics[:10]:
        print(f"  {d_}", file=sys.stderr)
    return 0


def cmd_estimate(args) -> int:
    if args.t_s is not None:
        t_s = args.t_s
    else:
        if args.kappa_sqrtn is None or args.kappa_sqrtn <= 0:
            raise ConfigError("estimate needs --kappa-sqrtn > 0 (or --t-s)")
        t_s = math.pi / (2.0 * args.kappa_sqrtn)
    sinc2 = eta_t_estimate(args.delta_ib, t_s)
    gauss = eta_t_estimate(args.delta_ib, t_s, gaussian_approx=True)
    print(f"swap window t_s = {t_s:.6g}")
    print(f"dephasing factor delta_ib*t_s = {args.delta_ib * t_s:.6g}")
    print(f"eta_t (sinc^2)        = {sinc2:.6g}")
    print(f"eta_t (gaussian approx) = {gauss:.6g}")
    return 0


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.figure == "fig3":
        params = TransferParams(seed=args.seed if args.seed is not None else 0)
        res = run_staggered(params)
        res.trajectory.write_csv(out_dir / "fig3_trajectory.csv")
        report = {
            "schema": "cribtransfer-transfer-report/1",
            "version": __version__,
            "protocol": "staggered",
            "efficiency": res.efficiency,
            "trajectory_file": "fig3_trajectory.csv",
            "resolved_config": _resolved(
                {}, transfer=dataclasses.asdict(params), seed=params.seed
            ),
        }
        _write_json(report, out_dir / "fig3_report.json")
        print(f"fig3: final qubit population = {res.efficiency:.6f}")
        return 0
    # fig2
    spec = fig_heatmap_spec(n_points=args.n_points)
    if args.seed is not None:
        spec = dataclasses.replace(
            spec, base=dataclasses.replace(spec.base, seed=args.seed)
        )
    workers = args.workers or 1
    csv_path = out_dir / "fig2.csv"
    resume_from = csv_path if args.resume and csv_path.exists() else None
    result = run_sweep(spec, workers=workers, resume_from=resume_from)
    write_sweep_csv(result, csv_path)
    write_sweep_sidecar(
        result,
        out_dir / "fig2.json",
        extra={
            "resolved_config": _resolved(
                {},
                transfer=dataclasses.asdict(spec.base),
                sweep={
                    "axis1": dataclasses.asdict(spec.axis1),
                    "axis2": dataclasses.asdict(spec.axis2),
                    "protocol": spec.protocol,
                },
                seed=spec.base.seed,
            ),
            "csv": "fig2.csv",
            "note": "axis ranges are package defaults; fixed values delta_inh=7, kappa_sqrt_n=6",
        },
    )
    finite = result.values[np.isfinite(result.values)]
    print(
        f"fig2: {result.values.size} points, max efficiency {finite.max():.6f}, "
        f"{result.wall_time:.1f} s with {result.workers} workers"
    )
    return 0


def _resolved(doc: dict, transfer=None, storage=None, sweep=None, seed=None, fmt=None) -> dict:
    out = {"schema": CONFIG_SCHEMA, "units": "G-units"}
    if seed is not None:
        out["seed"] = seed
    elif "seed" in doc:
        out["seed"] = doc["seed"]
    if fmt is not None:
        out["format"] = fmt
    if transfer:
        out["transfer"] = transfer
    if storage:
        out["storage"] = storage
    if sweep:
        out["sweep"] = sweep
    return out


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file (or a report JSON to replay)")
    common.add_argument("--seed", type=int, help="ensemble assignment seed")
    common.add_argument("--out-dir", help="output directory (default .)")
    common.add_argument("--format", choices=("csv", "json"), help="data file format")

    p = argparse.ArgumentParser(
        prog="cribtransfer",
        description="Photon -> spin-ensemble -> cavity -> qubit transfer simulator",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("storage", parents=[common], help="storage-stage efficiency")
    ps.add_argument("--envelope", choices=("gaussian", "flat", "table"))
    ps.add_argument("--optical-depth", type=float, dest="optical_depth")
    ps.add_argument("--bandwidth-ratio", type=float, dest="bandwidth_ratio")
    ps.add_argument("--width", type=float, help="flat-spectrum width")
    ps.add_argument("--peak-time", type=float, dest="peak_time")
    ps.add_argument("--envelope-csv", dest="envelope_csv", help="table envelope: time,re,im")
    ps.add_argument("--spectral-offset", type=float, dest="spectral_offset")
    ps.add_argument(
        "--optimize-width", type=float, nargs=2, metavar=("LO", "HI"), dest="optimize_width"
    )
    ps.add_argument(
        "--crosscheck",
        action="store_true",
        help="also solve the propagation equations and compare with the spectral solution",
    )
    ps.set_defaults(func=cmd_storage)

    pt = sub.add_parser("transfer", parents=[common], help="run one transfer protocol")
    pt.add_argument("--protocol", choices=PROTOCOLS)
    pt.add_argument("--n-spins", type=int, dest="n_spins")
    pt.add_argument("--delta-ib", type=float, dest="delta_ib")
    pt.add_argument("--delta-inh", type=float, dest="delta_inh")
    pt.add_argument("--kappa-sqrtn", type=float, dest="kappa_sqrtn")
    pt.add_argument("--delta", type=float)
    pt.add_argument("--tau-r", type=float, dest="tau_r")
    pt.add_argument("--trim-s", type=float, dest="trim_s")
    pt.add_argument("--trim-c", type=float, dest="trim_c")
    pt.add_argument("--sweep-duration", type=float, dest="sweep_duration")
    pt.add_argument("--tol", type=float)
    pt.add_argument("--intrinsic-profile", dest="intrinsic_profile")
    pt.set_defaults(func=cmd_transfer)

    pw = sub.add_parser("sweep", parents=[common], help="grid sweep over parameters")
    pw.add_argument("--axis1", help="name:min:max:n_points")
    pw.add_argument("--axis2", help="name:min:max:n_points")
    pw.add_argument("--protocol", choices=PROTOCOLS)
    pw.add_argument("--workers", type=int)
    pw.add_argument("--resume", action="store_true", help="reuse finished rows of an existing CSV")
    pw.add_argument("--out-name", dest="out_name", help="CSV file name (default sweep.csv)")
    pw.set_defaults(func=cmd_sweep)

    pe = sub.add_parser("estimate", parents=[common], help="dephasing-bound estimate")
    pe.add_argument("--delta-ib", type=float, required=True, dest="delta_ib")
    pe.add_argument("--kappa-sqrtn", type=float, dest="kappa_sqrtn")
    pe.add_argument("--t-s", type=float, dest="t_s", help="swap window (overrides --kappa-sqrtn)")
    pe.set_defaults(func=cmd_estimate)

    pr = sub.add_parser("reproduce", parents=[common], help="one-command figure presets")
    pr.add_argument("figure", choices=("fig2", "fig3"))
    pr.add_argument("--workers", type=int)
    pr.add_argument("--n-points", type=int, default=40, dest="n_points")
    pr.add_argument("--resume", action="store_true")
    pr.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (StorageError, TransferError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
