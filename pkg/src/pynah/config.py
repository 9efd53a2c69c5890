"""Experiment configuration: INI-style files with pre-filled defaults.

A config describes one experiment: the scene (plane stack, grids,
frequency, medium, regularization, optimizer), the ground-truth source,
the noise, the methods to run, and the output directory. Every value
has a default matching the standard scenario, so a minimal file like::

    [source]
    type = plate_mode
    m = 3
    n = 2

    [run]
    output_dir = runs/mode32

is complete. Unknown keys are rejected. The resolved configuration has
a stable hash that output files embed for reproducibility.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .fields import PhysicalConstants
from .geometry import build_plane_grid
from .scene import (
    HOLOGRAM_SHAPE,
    HOLOGRAM_SPACING,
    SOURCE_SHAPE,
    SOURCE_SPACING,
    VIRTUAL_Z,
    Z_EQUIVALENT,
    Z_HOLOGRAM,
    Z_SOURCE,
    OptimizerSettings,
    SceneConfig,
)
from .synth import NoiseSpec, PlateModeSpec

__all__ = ["ExperimentConfig", "load_config", "default_config_text", "VALID_METHODS"]

VALID_METHODS = ("cesm", "pinnsfd_direct", "pinnsfd_network")

DEFAULTS = {
    "scene": {
        "frequency_hz": "",  # empty: derive from the source spec
        "c": "343.0",
        "rho": "1.225",
        "z_equivalent": str(Z_EQUIVALENT),
        "z_source": str(Z_SOURCE),
        "z_hologram": str(Z_HOLOGRAM),
        "virtual_z": ", ".join(str(z) for z in VIRTUAL_Z),
        "n_virtual": "3",
        "source_nx": str(SOURCE_SHAPE[0]),
        "source_ny": str(SOURCE_SHAPE[1]),
        "source_dx": str(SOURCE_SPACING[0]),
        "source_dy": str(SOURCE_SPACING[1]),
        "hologram_nx": str(HOLOGRAM_SHAPE[0]),
        "hologram_ny": str(HOLOGRAM_SHAPE[1]),
        "hologram_dx": str(HOLOGRAM_SPACING[0]),
        "hologram_dy": str(HOLOGRAM_SPACING[1]),
        "center_x": "0.0",
        "center_y": "0.0",
        "lambda": "1e-6",
        "alpha": "0.01",
    },
    "optimizer": {
        "mode": "direct",
        "lr": "0.01",
        "lr_factor": "0.1",
        "lr_patience": "200",
        "lr_floor": "0.001",
        "stop_patience": "50",
        "improvement_rtol": "1e-12",
        "max_epochs": "10000",
        "seed": "0",
        "hidden_sizes": "256, 512",
        "init": "zeros",
    },
    "source": {
        "type": "plate_mode",  # plate_mode | monopole | file
        "m": "1",
        "n": "1",
        "plate_lx": "0.20",
        "plate_ly": "0.80",
        "amplitude": "1.0",
        "frequency_hz": "",
        "monopole_x": "0.0",
        "monopole_y": "0.0",
        "monopole_z": "-0.05",
        "strength_re": "1.0",
        "strength_im": "0.0",
        "path": "",
    },
    "noise": {
        "snr_db": "30.0",
        "seed": "0",
    },
    "cesm": {
        "lambda_min": "0.005",
        "lambda_max": "0.1",
        "n_candidates": "5",
    },
    "run": {
        "methods": "cesm, pinnsfd_direct",
        "output_dir": "runs/experiment",
    },
    "sweep": {
        "parameter": "",
        "values": "",
        "workers": "1",
    },
}


@dataclass
class ExperimentConfig:
    scene: SceneConfig
    source_type: str
    plate_spec: PlateModeSpec | None
    monopole_pos: tuple[float, float, float]
    monopole_strength: complex
    source_path: str
    noise: NoiseSpec
    cesm_candidates: np.ndarray
    methods: tuple[str, ...]
    output_dir: str
    sweep_parameter: str
    sweep_values: tuple[float, ...]
    sweep_workers: int
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def config_hash(self) -> str:
        canonical = "\n".join(
            f"{section}.{key}={value}"
            for section in sorted(self.raw)
            for key, value in sorted(self.raw[section].items())
        )
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def default_config_text() -> str:
    lines = []
    for section, keys in DEFAULTS.items():
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {value}" for key, value in keys.items())
        lines.append("")
    return "\n".join(lines)


def _merge_defaults(parser: configparser.ConfigParser) -> dict:
    merged = {section: dict(keys) for section, keys in DEFAULTS.items()}
    for section in parser.sections():
        if section not in merged:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key, value in parser[section].items():
            if key not in merged[section]:
                raise ConfigurationError(f"unknown key {key!r} in section [{section}]")
            merged[section][key] = value
    return merged


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigurationError(f"config file not found: {path}")
    return parse_config(parser)


def parse_config(parser: configparser.ConfigParser) -> ExperimentConfig:
    try:
        raw = _merge_defaults(parser)
        return _build(raw)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid configuration: {exc}") from exc


def _build(raw: dict) -> ExperimentConfig:
    sc = raw["scene"]
    src = raw["source"]

    source_type = src["type"].strip()
    plate_spec = None
    if source_type == "plate_mode":
        plate_spec = PlateModeSpec(
            m=int(src["m"]),
            n=int(src["n"]),
            lx=float(src["plate_lx"]),
            ly=float(src["plate_ly"]),
            amplitude=float(src["amplitude"]),
            frequency_hz=float(src["frequency_hz"]) if src["frequency_hz"].strip() else None,
        )
    elif source_type not in ("monopole", "file"):
        raise ConfigurationError(f"unknown source type {source_type!r}")

    if sc["frequency_hz"].strip():
        frequency = float(sc["frequency_hz"])
    elif plate_spec is not None:
        frequency = plate_spec.frequency
    elif source_type == "monopole" and src["frequency_hz"].strip():
        frequency = float(src["frequency_hz"])
    else:
        raise ConfigurationError("scene.frequency_hz is required unless a plate mode defines it")

    center = (float(sc["center_x"]), float(sc["center_y"]))

    def grid(nx, ny, dx, dy, z):
        origin = (center[0] - (nx - 1) * dx / 2.0, center[1] - (ny - 1) * dy / 2.0)
        return build_plane_grid(nx, ny, dx, dy, z, origin)

    snx, sny = int(sc["source_nx"]), int(sc["source_ny"])
    sdx, sdy = float(sc["source_dx"]), float(sc["source_dy"])
    virtual_z = _floats(sc["virtual_z"])
    n_virtual = int(sc["n_virtual"])
    if not 0 <= n_virtual <= len(virtual_z):
        raise ConfigurationError(f"n_virtual={n_virtual} but {len(virtual_z)} virtual offsets given")

    opt = raw["optimizer"]
    optimizer = OptimizerSettings(
        mode=opt["mode"].strip(),
        lr=float(opt["lr"]),
        lr_factor=float(opt["lr_factor"]),
        lr_patience=int(opt["lr_patience"]),
        lr_floor=float(opt["lr_floor"]),
        stop_patience=int(opt["stop_patience"]),
        improvement_rtol=float(opt["improvement_rtol"]),
        max_epochs=int(opt["max_epochs"]),
        seed=int(opt["seed"]),
        hidden_sizes=tuple(int(h) for h in _floats(opt["hidden_sizes"])),
        init=opt["init"].strip(),
    )

    scene = SceneConfig(
        constants=PhysicalConstants(c=float(sc["c"]), rho=float(sc["rho"])),
        omega=2.0 * np.pi * frequency,
        grid_e=grid(snx, sny, sdx, sdy, float(sc["z_equivalent"])),
        grid_s=grid(snx, sny, sdx, sdy, float(sc["z_source"])),
        grid_h=grid(
            int(sc["hologram_nx"]), int(sc["hologram_ny"]),
            float(sc["hologram_dx"]), float(sc["hologram_dy"]),
            float(sc["z_hologram"]),
        ),
        virtual_grids=tuple(grid(snx, sny, sdx, sdy, z) for z in virtual_z[:n_virtual]),
        lam=float(sc["lambda"]),
        alpha=float(sc["alpha"]),
        optimizer=optimizer,
    )

    methods = tuple(m.strip() for m in raw["run"]["methods"].replace(",", " ").split())
    if not methods:
        raise ConfigurationError("run.methods must list at least one method")
    for method in methods:
        if method not in VALID_METHODS:
            raise ConfigurationError(f"unknown method {method!r}; valid: {VALID_METHODS}")

    cesm = raw["cesm"]
    candidates = np.linspace(float(cesm["lambda_min"]), float(cesm["lambda_max"]), int(cesm["n_candidates"]))

    sweep = raw["sweep"]
    return ExperimentConfig(
        scene=scene,
        source_type=source_type,
        plate_spec=plate_spec,
        monopole_pos=(float(src["monopole_x"]), float(src["monopole_y"]), float(src["monopole_z"])),
        monopole_strength=complex(float(src["strength_re"]), float(src["strength_im"])),
        source_path=src["path"].strip(),
        noise=NoiseSpec(snr_db=float(raw["noise"]["snr_db"]), seed=int(raw["noise"]["seed"])),
        cesm_candidates=candidates,
        methods=methods,
        output_dir=raw["run"]["output_dir"].strip(),
        sweep_parameter=sweep["parameter"].strip(),
        sweep_values=_floats(sweep["values"]),
        sweep_workers=int(sweep["workers"]),
        raw=raw,
    )
