"""Config-driven experiment runner.

Commands:

* ``synth``        - synthesize ground truth, clean and noisy holograms.
* ``reconstruct``  - run one or all configured methods on the synthesized data.
* ``eval``         - compare an estimate field against a truth field.
* ``trace``        - export a report's per-epoch trace as CSV (with rebound flag).
* ``sweep``        - repeat synth+reconstruct over a list of parameter values.
* ``write-config`` - print or save the fully-defaulted configuration.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 solver
failure, 1 unexpected error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import ExperimentConfig, default_config_text, load_config
from .errors import ConfigurationError, ContractError, SolverError
from .esm import build_esm_matrices, hologram_mae, reconstruct_velocity_esm, select_lambda
from .fieldfile import (
    ensure_dir,
    read_field,
    read_mask,
    read_report,
    write_field,
    write_network,
    write_report,
)
from .metrics import ncc, nmse
from .sfd import optimize
from .synth import add_noise, forward_holography, monopole_field, plate_mode_velocity

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4

TRUTH_FILE = "v_s_true.field"
CLEAN_FILE = "p_h_clean.field"
NOISY_FILE = "p_h_noisy.field"


def _note(cfg: ExperimentConfig) -> str:
    return f"config_hash={cfg.config_hash} seed={cfg.noise.seed} optimizer_seed={cfg.scene.optimizer.seed}"


def _truth_field(cfg: ExperimentConfig):
    scene = cfg.scene
    if cfg.source_type == "plate_mode":
        return plate_mode_velocity(cfg.plate_spec, scene.grid_s)
    if cfg.source_type == "monopole":
        _, v = monopole_field(cfg.monopole_pos, cfg.monopole_strength, scene.omega, scene.grid_s, scene.constants)
        return v
    if cfg.source_type == "file":
        if not cfg.source_path:
            raise ConfigurationError("source.type=file requires source.path")
        field, _ = read_field(cfg.source_path)
        if field.grid != scene.grid_s:
            raise ConfigurationError("source file grid does not match the scene's source grid")
        return field.with_values(field.values, kind="velocity")
    raise ConfigurationError(f"unresolvable source type {cfg.source_type!r}")


def cmd_synth(cfg: ExperimentConfig) -> dict:
    scene = cfg.scene
    ensure_dir(cfg.output_dir)
    truth = _truth_field(cfg)
    clean = forward_holography(truth, scene)
    noisy = add_noise(clean, cfg.noise)
    note = _note(cfg)
    files = {}
    for name, field in ((TRUTH_FILE, truth), (CLEAN_FILE, clean), (NOISY_FILE, noisy)):
        path = os.path.join(cfg.output_dir, name)
        write_field(path, field, note=note)
        files[name] = path
    manifest = {
        "config_hash": cfg.config_hash,
        "noise_seed": cfg.noise.seed,
        "snr_db": cfg.noise.snr_db,
        "frequency_hz": scene.omega / (2.0 * np.pi),
        "z_equivalent": scene.grid_e.z,
        "z_source": scene.grid_s.z,
        "z_hologram": scene.grid_h.z,
        "virtual_z": [g.z for g in scene.virtual_grids],
        "source_grid": [scene.grid_s.nx, scene.grid_s.ny],
        "hologram_grid": [scene.grid_h.nx, scene.grid_h.ny],
        "files": files,
    }
    with open(os.path.join(cfg.output_dir, "manifest.json"), "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
    return manifest


def _load_inputs(cfg: ExperimentConfig):
    noisy_path = os.path.join(cfg.output_dir, NOISY_FILE)
    if not os.path.exists(noisy_path):
        raise FileNotFoundError(f"missing input field {noisy_path}; run synth first")
    p_h, _ = read_field(noisy_path)
    if p_h.grid != cfg.scene.grid_h:
        raise ConfigurationError("synthesized hologram grid does not match the configured scene")
    truth = None
    truth_path = os.path.join(cfg.output_dir, TRUTH_FILE)
    if os.path.exists(truth_path):
        truth, _ = read_field(truth_path)
    return p_h, truth


def _metrics_entries(estimate, truth) -> dict:
    if truth is None:
        return {}
    return {
        "source_nmse_db": f"{nmse(estimate.values, truth.values):.2f}",
        "source_ncc_pct": f"{100.0 * ncc(estimate.values, truth.values):.2f}",
    }


def run_method(cfg: ExperimentConfig, method: str) -> str:
    """Run one reconstruction method; returns the report path."""
    scene = cfg.scene
    p_h, truth = _load_inputs(cfg)
    note = _note(cfg)
    ensure_dir(cfg.output_dir)
    report_path = os.path.join(cfg.output_dir, f"report_{method}.txt")

    if method == "cesm":
        mats = build_esm_matrices(scene)
        lam, solution = select_lambda(p_h.values, mats, cfg.cesm_candidates)
        v_s = reconstruct_velocity_esm(solution, mats, scene.constants, scene.omega, scene.grid_s)
        write_field(os.path.join(cfg.output_dir, "v_s_cesm.field"), v_s, note=note)
        entries = {
            "method": method,
            "config_hash": cfg.config_hash,
            "noise_seed": cfg.noise.seed,
            "selected_lambda": lam,
            "lambda_candidates": " ".join(format(c, ".6g") for c in cfg.cesm_candidates),
            "iterations": solution.iterations,
            "converged": solution.converged,
            "hologram_mae": hologram_mae(solution, p_h.values, mats),
            "active_sources": int(np.count_nonzero(np.abs(solution.q_hat) > 1e-9)),
            "data_term_note": "sum of squared residuals, not averaged over microphones",
            "ncc_note": "ncc reported as modulus of the complex correlation",
            **_metrics_entries(v_s, truth),
        }
        write_report(report_path, entries)
        return report_path

    if method in ("pinnsfd_direct", "pinnsfd_network"):
        mode = "direct" if method == "pinnsfd_direct" else "network"
        scene = scene.with_options(optimizer=dataclasses.replace(scene.optimizer, mode=mode))
        report = optimize(p_h, scene, truth_v_s=truth)
        prefix = method
        write_field(os.path.join(cfg.output_dir, f"v_e_{prefix}.field"), report.v_e_hat, note=note)
        write_field(os.path.join(cfg.output_dir, f"v_s_{prefix}.field"), report.v_s_hat, note=note)
        write_field(os.path.join(cfg.output_dir, f"p_h_{prefix}.field"), report.p_h_hat, note=note)
        if report.network is not None:
            write_network(os.path.join(cfg.output_dir, f"network_{prefix}.params"), report.network, note=note)
        entries = {
            "method": method,
            "config_hash": cfg.config_hash,
            "noise_seed": cfg.noise.seed,
            "optimizer_seed": report.seed,
            "n_virtual": scene.n_virtual,
            "lambda": scene.lam,
            "epochs_run": report.epochs_run,
            "best_epoch": report.best_epoch,
            "stop_reason": report.stop_reason,
            "wall_time_s": f"{report.wall_time:.3f}",
            "final_lr": report.final_lr,
            "best_loss": report.best_loss,
            "direct_mae": report.loss_parts["direct_mae"],
            "hologram_fit_nmse_db": f"{nmse(report.p_h_hat.values, p_h.values):.2f}",
            "ncc_note": "ncc reported as modulus of the complex correlation",
            **_metrics_entries(report.v_s_hat, truth),
        }
        rows = []
        nmse_trace = report.nmse_vs_truth_trace
        for epoch, loss_val in enumerate(report.loss_trace):
            nmse_val = float(nmse_trace[epoch]) if nmse_trace is not None else None
            rows.append((epoch, float(loss_val), nmse_val))
        write_report(report_path, entries, trace_rows=rows, trace_columns=("epoch", "loss", "nmse_db"))
        return report_path

    raise ConfigurationError(f"unknown method {method!r}")


def cmd_reconstruct(cfg: ExperimentConfig, methods=None) -> list[str]:
    return [run_method(cfg, method) for method in (methods or cfg.methods)]


def cmd_eval(truth_path, estimate_path, mask_path=None, out_path=None) -> dict:
    truth, _ = read_field(truth_path)
    estimate, _ = read_field(estimate_path)
    mask = read_mask(mask_path) if mask_path else None
    values = {"nmse_db": f"{nmse(estimate.values, truth.values, mask):.2f}"}
    try:
        values["ncc_pct"] = f"{100.0 * ncc(estimate.values, truth.values, mask):.2f}"
    except ContractError:
        # correlation is undefined for an identically zero estimate
        values["ncc_pct"] = ""
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write("metric,value\n")
            for key, value in values.items():
                handle.write(f"{key},{value}\n")
    return values


def detect_rebound(nmse_trace, rise_db: float = 1.0) -> bool:
    """True when the trace dips, rises by at least ``rise_db``, then falls again."""
    run_min = np.inf
    peak = None
    for value in nmse_trace:
        if peak is not None:
            if value > peak:
                peak = value
            elif value < peak:
                return True
        if value < run_min:
            run_min = value
        elif peak is None and value >= run_min + rise_db:
            peak = value
    return False


def cmd_trace(report_path, out_path=None) -> dict:
    entries, rows = read_report(report_path)
    if not rows:
        raise ContractError(f"{report_path} carries no trace section")
    nmse_values = [float(r["nmse_db"]) for r in rows if r.get("nmse_db")]
    rebound = detect_rebound(nmse_values) if nmse_values else False
    out_path = out_path or os.path.splitext(report_path)[0] + "_trace.csv"
    with open(out_path, "w", encoding="utf-8") as handle:
        handle.write(f"# config_hash={entries.get('config_hash', '')}\n")
        handle.write(f"# rebound_detected={str(rebound).lower()}\n")
        handle.write("epoch,loss,nmse_db\n")
        for row in rows:
            handle.write(f"{row['epoch']},{row['loss']},{row.get('nmse_db', '')}\n")
    return {"rows": len(rows), "rebound_detected": rebound, "out_path": out_path}


def _sweep_one(args):
    config_path, parameter, value, base_dir = args
    cfg = load_config(config_path)
    section, _, key = parameter.partition(".")
    cfg.raw[section][key] = format(value, ".17g")
    from .config import _build  # re-resolve with the override

    cfg = _build(cfg.raw)
    run_dir = os.path.join(base_dir, f"{section}_{key}_{value:g}")
    cfg.output_dir = run_dir
    cmd_synth(cfg)
    cmd_reconstruct(cfg)
    summaries = []
    for method in cfg.methods:
        entries, _ = read_report(os.path.join(run_dir, f"report_{method}.txt"))
        summaries.append((value, method, entries.get("source_nmse_db", ""), entries.get("source_ncc_pct", "")))
    return summaries


def cmd_sweep(cfg: ExperimentConfig, config_path) -> str:
    if not cfg.sweep_parameter or not cfg.sweep_values:
        raise ConfigurationError("sweep needs [sweep] parameter and values")
    section, _, key = cfg.sweep_parameter.partition(".")
    if section not in cfg.raw or key not in cfg.raw[section]:
        raise ConfigurationError(f"unknown sweep parameter {cfg.sweep_parameter!r}")
    ensure_dir(cfg.output_dir)
    jobs = [(config_path, cfg.sweep_parameter, value, cfg.output_dir) for value in cfg.sweep_values]
    if cfg.sweep_workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.sweep_workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(job) for job in jobs]
    summary_path = os.path.join(cfg.output_dir, "sweep_summary.csv")
    with open(summary_path, "w", encoding="utf-8") as handle:
        handle.write(f"# parameter={cfg.sweep_parameter} config_hash={cfg.config_hash}\n")
        handle.write("value,method,source_nmse_db,source_ncc_pct\n")
        for group in results:
            for value, method, nmse_db, ncc_pct in group:
                handle.write(f"{value:g},{method},{nmse_db},{ncc_pct}\n")
    return summary_path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pynah", description="Near-field acoustic holography experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("synth", "reconstruct", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", required=True, help="experiment config file")
        if name == "reconstruct":
            p.add_argument("--method", choices=["cesm", "pinnsfd_direct", "pinnsfd_network"], default=None)

    p_eval = sub.add_parser("eval")
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--estimate", required=True)
    p_eval.add_argument("--mask", default=None)
    p_eval.add_argument("-o", "--out", default=None)

    p_trace = sub.add_parser("trace")
    p_trace.add_argument("--report", required=True)
    p_trace.add_argument("-o", "--out", default=None)

    p_cfg = sub.add_parser("write-config")
    p_cfg.add_argument("-o", "--out", default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "write-config":
            text = default_config_text()
            if args.out:
                with open(args.out, "w", encoding="utf-8") as handle:
                    handle.write(text)
            else:
                print(text)
        elif args.command == "synth":
            manifest = cmd_synth(load_config(args.config))
            print(json.dumps(manifest, indent=2, sort_keys=True))
        elif args.command == "reconstruct":
            cfg = load_config(args.config)
            methods = [args.method] if args.method else None
            for path in cmd_reconstruct(cfg, methods):
                print(path)
        elif args.command == "eval":
            values = cmd_eval(args.truth, args.estimate, args.mask, args.out)
            for key, value in values.items():
                print(f"{key}: {value}")
        elif args.command == "trace":
            info = cmd_trace(args.report, args.out)
            print(f"wrote {info['out_path']} ({info['rows']} rows)")
            print(f"rebound_detected: {str(info['rebound_detected']).lower()}")
        elif args.command == "sweep":
            print(cmd_sweep(load_config(args.config), args.config))
    except (ConfigurationError, ContractError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
