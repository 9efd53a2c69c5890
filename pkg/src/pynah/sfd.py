"""Self-supervised sparse-field reconstruction.

Recovers the equivalent-source velocity behind a vibrating surface from
one hologram pressure measurement by gradient descent on propagation
residuals: the direct equivalent-to-hologram path, optional paths
through intermediate virtual planes near the source, and an l1 penalty
that keeps the equivalent sources sparse. No training data is involved;
the physics chain is the only supervision.

The loss for measured pressure p (M microphones), candidate velocity v::

    L(v) = (1/M) (||p - A v||_1 + sum_i ||p - B_i v||_1) + lam ||v||_1

with A the direct-path matrix and B_i the virtual-plane chains. Because
every path is linear, the conjugate-Wirtinger gradient is analytic:

    grad L = -(1/M) (A^H csgn(p - A v) + sum_i B_i^H csgn(p - B_i v))
             + lam csgn(v),       csgn(z) = z/|z|, 0 at 0,

stored so that (Re, Im) of grad equal the loss derivatives in the real
and imaginary parts. Optimization runs Adam either on v itself
("direct" mode) or on the parameters of a complex network mapping
normalized hologram pressure to v ("network" mode).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cvnn import AdamState, ComplexNetwork, adam_step, network_adam_step
from .errors import ContractError, SolverError
from .fields import PRESSURE, VELOCITY, ComplexField
from .metrics import nmse
from .propagation import (
    assemble_path_operator,
    propagate_pressure,
    propagate_velocity,
    surface_pressure,
)
from .scene import SceneConfig
from .validation import as_complex_vector, check_field

__all__ = [
    "PathOperators",
    "SolverReport",
    "direct_path",
    "virtual_path",
    "loss",
    "build_path_operators",
    "loss_and_gradient",
    "optimize",
    "reconstruct_source",
]


def direct_path(v_e: ComplexField, scene: SceneConfig) -> tuple[ComplexField, ComplexField]:
    """Equivalent-plane pressure and its hologram propagation."""
    check_field(v_e, kind=VELOCITY, name="v_e")
    if v_e.grid != scene.grid_e:
        raise ContractError("v_e is not attached to the scene's equivalent grid")
    p_e = surface_pressure(v_e, scene.constants)
    p_h = propagate_pressure(p_e, v_e, scene.grid_h, scene.constants)
    return p_e, p_h


def virtual_path(v_e: ComplexField, scene: SceneConfig, i: int) -> tuple[ComplexField, ComplexField, ComplexField]:
    """Fields of the i-th (1-based) virtual-plane chain: (p_v, v_v, p_h)."""
    if not 1 <= i <= scene.n_virtual:
        raise ContractError(f"virtual index {i} out of range 1..{scene.n_virtual}")
    check_field(v_e, kind=VELOCITY, name="v_e")
    if v_e.grid != scene.grid_e:
        raise ContractError("v_e is not attached to the scene's equivalent grid")
    grid_v = scene.virtual_grids[i - 1]
    p_e = surface_pressure(v_e, scene.constants)
    p_v = propagate_pressure(p_e, v_e, grid_v, scene.constants)
    v_v = propagate_velocity(p_e, v_e, grid_v, scene.constants)
    p_h = propagate_pressure(p_v, v_v, scene.grid_h, scene.constants)
    return p_v, v_v, p_h


def reconstruct_source(v_e: ComplexField, scene: SceneConfig) -> ComplexField:
    """Source-plane velocity implied by an equivalent-source velocity."""
    check_field(v_e, kind=VELOCITY, name="v_e")
    if v_e.grid != scene.grid_e:
        raise ContractError("v_e is not attached to the scene's equivalent grid")
    p_e = surface_pressure(v_e, scene.constants)
    return propagate_velocity(p_e, v_e, scene.grid_s, scene.constants)


def _complex_sign(z: np.ndarray) -> np.ndarray:
    mag = np.abs(z)
    out = np.zeros_like(z)
    nz = mag > 0
    out[nz] = z[nz] / mag[nz]
    return out


@dataclass(frozen=True)
class PathOperators:
    """Dense matrices for one scene: direct, virtual chains, source map."""

    direct: np.ndarray
    virtual: tuple[np.ndarray, ...]
    source: np.ndarray
    n_microphones: int

    @property
    def all_hologram_paths(self) -> tuple[np.ndarray, ...]:
        return (self.direct, *self.virtual)


def build_path_operators(scene: SceneConfig) -> PathOperators:
    direct = assemble_path_operator(scene, "direct").entries
    virtual = tuple(
        assemble_path_operator(scene, f"via_virtual:{i}").entries for i in range(1, scene.n_virtual + 1)
    )
    source = assemble_path_operator(scene, "source_velocity").entries
    return PathOperators(direct, virtual, source, scene.grid_h.n_points)


def loss(p_h_meas, v_e, scene: SceneConfig) -> tuple[float, dict]:
    """Propagation-residual loss evaluated through the operator chains.

    Returns (total, parts) with parts = {"direct_mae", "virtual_mae",
    "reg"}; the parts sum to the total.
    """
    p = as_complex_vector(p_h_meas, n=scene.grid_h.n_points, name="p_h_meas")
    if isinstance(v_e, ComplexField):
        v_field = v_e
    else:
        v_field = ComplexField(v_e, scene.grid_e, scene.omega, VELOCITY)
    m = scene.grid_h.n_points
    _, p_h_direct = direct_path(v_field, scene)
    direct_mae = float(np.abs(p - p_h_direct.values).sum()) / m
    virtual_mae = []
    for i in range(1, scene.n_virtual + 1):
        _, _, p_h_virtual = virtual_path(v_field, scene, i)
        if not np.all(np.isfinite(p_h_virtual.values)):
            raise SolverError(f"virtual path {i} produced non-finite pressure")
        virtual_mae.append(float(np.abs(p - p_h_virtual.values).sum()) / m)
    reg = scene.lam * float(np.abs(v_field.values).sum())
    total = direct_mae + sum(virtual_mae) + reg
    if not np.isfinite(total):
        raise SolverError("loss is non-finite")
    return total, {"direct_mae": direct_mae, "virtual_mae": virtual_mae, "reg": reg}


def loss_and_gradient(p: np.ndarray, v: np.ndarray, ops: PathOperators, lam: float):
    """Loss, its parts, and the analytic conjugate-Wirtinger gradient."""
    m = ops.n_microphones
    grad = np.zeros_like(v)
    parts = []
    for mat in ops.all_hologram_paths:
        residual = p - mat @ v
        parts.append(float(np.abs(residual).sum()) / m)
        grad -= mat.conj().T @ _complex_sign(residual) / m
    reg = lam * float(np.abs(v).sum())
    grad += lam * _complex_sign(v)
    total = sum(parts) + reg
    return total, {"direct_mae": parts[0], "virtual_mae": parts[1:], "reg": reg}, grad


@dataclass
class SolverReport:
    """Everything one optimization run produced."""

    loss_trace: np.ndarray
    nmse_vs_truth_trace: np.ndarray | None
    v_e_hat: ComplexField
    v_s_hat: ComplexField
    p_h_hat: ComplexField
    stop_reason: str
    seed: int
    wall_time: float
    best_epoch: int
    best_loss: float
    final_lr: float
    mode: str
    loss_parts: dict = field(default_factory=dict)
    network: ComplexNetwork | None = None

    @property
    def epochs_run(self) -> int:
        return len(self.loss_trace)


def optimize(p_h_meas: ComplexField, scene: SceneConfig, truth_v_s: ComplexField | None = None) -> SolverReport:
    """Fit the equivalent-source velocity to one hologram measurement.

    Runs Adam with a plateau learning-rate schedule and early stopping
    on the training loss; the best-loss parameters are restored at the
    end. When ``truth_v_s`` is given, the source-velocity error (dB) is
    recorded every epoch alongside the loss. Deterministic for a fixed
    scene and seed.
    """
    check_field(p_h_meas, kind=PRESSURE, name="p_h_meas")
    if p_h_meas.grid != scene.grid_h:
        raise ContractError("p_h_meas is not attached to the scene's hologram grid")
    settings = scene.optimizer
    p = p_h_meas.values
    peak = float(np.max(np.abs(p)))
    if peak == 0.0:
        raise ContractError("hologram pressure is identically zero; normalization is undefined")
    beta = scene.alpha * peak

    truth = None
    if truth_v_s is not None:
        check_field(truth_v_s, kind=VELOCITY, name="truth_v_s")
        if truth_v_s.grid != scene.grid_s:
            raise ContractError("truth_v_s is not attached to the scene's source grid")
        truth = truth_v_s.values

    ops = build_path_operators(scene)
    n1 = scene.grid_e.n_points

    mode = settings.mode
    if mode == "network":
        net = ComplexNetwork.create([ops.direct.shape[0], *settings.hidden_sizes, n1], seed=settings.seed)
        net_input = p / beta
        adam = AdamState.for_arrays([a for _, a in net.parameters()])
    else:
        if settings.init == "least_squares":
            # Minimum-norm fit of the direct path as a warm start.
            a = ops.direct
            gram = a @ a.conj().T
            ridge = 1e-12 * float(np.trace(gram).real) / gram.shape[0]
            v = a.conj().T @ np.linalg.solve(gram + ridge * np.eye(gram.shape[0]), p)
        else:
            v = np.zeros(n1, dtype=np.complex128)
        adam = AdamState.for_arrays([v])

    lr = settings.lr
    best_loss = np.inf
    best_epoch = -1
    best_snapshot = None
    counter_best = np.inf
    stagnant = 0
    lr_stagnant = 0
    stop_reason = "max_epochs"
    loss_trace: list[float] = []
    nmse_trace: list[float] = []
    started = time.perf_counter()

    def partial_report(reason):
        return {
            "stop_reason": reason,
            "loss_trace": np.asarray(loss_trace),
            "epochs_run": len(loss_trace),
        }

    for _epoch in range(settings.max_epochs):
        if mode == "network":
            out, tape = net.forward(net_input)
            v = beta * out
        total, parts, grad_v = loss_and_gradient(p, v, ops, scene.lam)
        if not np.isfinite(total):
            raise SolverError("loss diverged to a non-finite value", report=partial_report("diverged"))
        loss_trace.append(total)
        if truth is not None:
            nmse_trace.append(nmse(ops.source @ v, truth))

        if total < best_loss:
            best_loss = total
            best_epoch = _epoch
            best_snapshot = (
                v.copy()
                if mode == "direct"
                else [(layer.weight.copy(), layer.bias.copy()) for layer in net.layers]
            )
        # Stagnation counters use the configured relative threshold, so
        # sub-threshold wiggles do not postpone the schedule.
        if total < counter_best * (1.0 - settings.improvement_rtol):
            counter_best = total
            stagnant = 0
            lr_stagnant = 0
        else:
            stagnant += 1
            lr_stagnant += 1

        if stagnant >= settings.stop_patience:
            stop_reason = "early_stop"
            break
        if lr_stagnant >= settings.lr_patience:
            if lr <= settings.lr_floor:
                stop_reason = "lr_floor_converged"
                break
            lr = max(lr * settings.lr_factor, settings.lr_floor)
            lr_stagnant = 0

        if mode == "network":
            # dL/d(conj(net output)) = beta * dL/d(conj(v)); grad_v holds
            # twice the conjugate-Wirtinger derivative, hence the 1/2.
            cotangent = 0.5 * beta * grad_v
            grads = net.backward(tape, cotangent)
            adam = network_adam_step(net, grads, adam, lr)
        else:
            adam = adam_step([("v_e", v)], [grad_v], adam, lr)

    wall_time = time.perf_counter() - started

    if best_snapshot is None:
        raise SolverError("optimizer made no progress", report=partial_report(stop_reason))
    if mode == "network":
        for layer, (w, b) in zip(net.layers, best_snapshot):
            layer.weight[...] = w
            layer.bias[...] = b
        net.version += 1
        out, _ = net.forward(net_input)
        v_best = beta * out
    else:
        v_best = best_snapshot

    _, best_parts, _ = loss_and_gradient(p, v_best, ops, scene.lam)
    v_e_hat = ComplexField(v_best, scene.grid_e, scene.omega, VELOCITY)
    v_s_hat = ComplexField(ops.source @ v_best, scene.grid_s, scene.omega, VELOCITY)
    # All active paths estimate the same hologram field; report their mean.
    predictions = [mat @ v_best for mat in ops.all_hologram_paths]
    p_h_hat = ComplexField(np.mean(predictions, axis=0), scene.grid_h, scene.omega, PRESSURE)
    return SolverReport(
        loss_trace=np.asarray(loss_trace),
        nmse_vs_truth_trace=np.asarray(nmse_trace) if truth is not None else None,
        v_e_hat=v_e_hat,
        v_s_hat=v_s_hat,
        p_h_hat=p_h_hat,
        stop_reason=stop_reason,
        seed=settings.seed,
        wall_time=wall_time,
        best_epoch=best_epoch,
        best_loss=float(best_loss),
        final_lr=lr,
        mode=mode,
        loss_parts=best_parts,
        network=net if mode == "network" else None,
    )
