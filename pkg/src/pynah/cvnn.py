"""Minimal complex-valued feed-forward network with hand-derived backprop.

The network alternates complex affine layers with the cardioid
activation f(z) = (1/2)(1 + cos(arg z)) z. Real-valued losses of complex
variables are differentiated in Wirtinger form: every gradient stored
here is dL/d(conj(z)), so the steepest-ascent direction in the (real,
imag) plane is (2 Re g, 2 Im g). Adam consumes these gradients
independently per real component, which makes the factor of two
immaterial to the update direction.

Backprop rules used below, with "cot" the output cotangent dL/d(conj(y)):

* affine y = W x + b:  dL/d(conj(W)) = outer(cot, conj(x)),
  dL/d(conj(b)) = cot, input cotangent = W^H cot.
* cardioid: dL/d(conj(z)) = conj(cot) * df/d(conj(z)) + cot * conj(df/dz)
  with df/dz = (1/2)(1 + cos t) + (j/4) sin t and
  df/d(conj(z)) = -(j/4) sin t * z / conj(z), t = arg z; both default to
  (1/2, 0) at z = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, SolverError

__all__ = [
    "cardioid",
    "cardioid_wirtinger",
    "ComplexAffine",
    "ComplexNetwork",
    "ForwardTape",
    "GradientSet",
    "AdamState",
    "adam_step",
]


def cardioid(z):
    """Phase-gated complex activation (1/2)(1 + cos(arg z)) z; 0 at 0."""
    z = np.asarray(z, dtype=np.complex128)
    return 0.5 * (1.0 + np.cos(np.angle(z))) * z


def cardioid_wirtinger(z):
    """Wirtinger pair (df/dz, df/dzbar) of the cardioid, elementwise."""
    z = np.asarray(z, dtype=np.complex128)
    theta = np.angle(z)
    df_dz = 0.5 * (1.0 + np.cos(theta)) + 0.25j * np.sin(theta)
    zero = z == 0
    # z / conj(z) = exp(2j theta); well-defined away from 0.
    phase2 = np.exp(2j * theta)
    df_dzbar = -0.25j * np.sin(theta) * phase2
    if np.any(zero):
        df_dz = np.where(zero, 0.5 + 0.0j, df_dz)
        df_dzbar = np.where(zero, 0.0 + 0.0j, df_dzbar)
    return df_dz, df_dzbar


@dataclass
class ComplexAffine:
    weight: np.ndarray
    bias: np.ndarray

    @property
    def in_size(self) -> int:
        return self.weight.shape[1]

    @property
    def out_size(self) -> int:
        return self.weight.shape[0]


@dataclass(frozen=True)
class ForwardTape:
    """Per-layer activations cached by forward for the backward pass."""

    inputs: tuple[np.ndarray, ...]
    preactivations: tuple[np.ndarray, ...]
    output: np.ndarray
    version: int


@dataclass(frozen=True)
class GradientSet:
    """Conjugate-Wirtinger gradients, ordered (weight, bias) per layer."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]


class ComplexNetwork:
    """Stack of complex affine layers with cardioid between them.

    The activation follows every layer except the last. ``version``
    counts parameter updates so stale tapes are rejected by backward.
    """

    def __init__(self, layers: list[ComplexAffine]):
        if not layers:
            raise ContractError("network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_size != nxt.in_size:
                raise ContractError(
                    f"layer dimensions do not chain: {prev.out_size} -> {nxt.in_size}"
                )
        self.layers = layers
        self.version = 0

    @classmethod
    def create(cls, sizes, seed: int = 0) -> "ComplexNetwork":
        """Glorot-style init: each real component ~ N(0, 1/(fan_in+fan_out))."""
        sizes = list(sizes)
        if len(sizes) < 2:
            raise ContractError("need at least input and output sizes")
        rng = np.random.default_rng(seed)
        layers = []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            std = np.sqrt(1.0 / (fan_in + fan_out))
            weight = std * (
                rng.standard_normal((fan_out, fan_in)) + 1j * rng.standard_normal((fan_out, fan_in))
            )
            bias = np.zeros(fan_out, dtype=np.complex128)
            layers.append(ComplexAffine(weight=weight, bias=bias))
        return cls(layers)

    @property
    def in_size(self) -> int:
        return self.layers[0].in_size

    @property
    def out_size(self) -> int:
        return self.layers[-1].out_size

    @property
    def param_count(self) -> int:
        return sum(layer.weight.size + layer.bias.size for layer in self.layers)

    def parameters(self):
        """Named parameter arrays, in GradientSet order."""
        for i, layer in enumerate(self.layers):
            yield f"layers[{i}].weight", layer.weight
            yield f"layers[{i}].bias", layer.bias

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, ForwardTape]:
        x = np.asarray(x, dtype=np.complex128).ravel()
        if x.size != self.in_size:
            raise ContractError(f"input length {x.size} does not match first layer ({self.in_size})")
        inputs = []
        preacts = []
        activation = x
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            inputs.append(activation)
            z = layer.weight @ activation + layer.bias
            preacts.append(z)
            activation = cardioid(z) if i != last else z
        tape = ForwardTape(tuple(inputs), tuple(preacts), activation, self.version)
        return activation, tape

    def backward(self, tape: ForwardTape, loss_cotangent: np.ndarray) -> GradientSet:
        """Propagate dL/d(conj(output)) to all parameters."""
        if tape.version != self.version:
            raise ContractError("stale tape: parameters changed since the forward pass")
        cot = np.asarray(loss_cotangent, dtype=np.complex128).ravel()
        if cot.size != self.out_size:
            raise ContractError(f"cotangent length {cot.size} does not match output ({self.out_size})")
        d_weights = [None] * len(self.layers)
        d_biases = [None] * len(self.layers)
        last = len(self.layers) - 1
        for i in range(last, -1, -1):
            if i != last:
                df_dz, df_dzbar = cardioid_wirtinger(tape.preactivations[i])
                cot = np.conj(cot) * df_dzbar + cot * np.conj(df_dz)
            layer = self.layers[i]
            d_weights[i] = np.outer(cot, np.conj(tape.inputs[i]))
            d_biases[i] = cot.copy()
            if i > 0:
                cot = layer.weight.conj().T @ cot
        return GradientSet(tuple(d_weights), tuple(d_biases))


@dataclass
class AdamState:
    """First/second moments on the real view of each parameter array."""

    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_arrays(cls, arrays) -> "AdamState":
        state = cls()
        for arr in arrays:
            state.m.append(np.zeros(arr.size * 2))
            state.v.append(np.zeros(arr.size * 2))
        return state


def _real_view(arr: np.ndarray) -> np.ndarray:
    return arr.view(np.float64).reshape(-1)


def adam_step(named_params, grads, state: AdamState, lr: float, betas=(0.9, 0.999), eps: float = 1e-8) -> AdamState:
    """One Adam update, applied independently to real and imaginary parts.

    ``named_params`` is a sequence of (name, complex array) updated in
    place; ``grads`` the matching conjugate-Wirtinger gradient arrays.
    """
    beta1, beta2 = betas
    state.step += 1
    t = state.step
    bias1 = 1.0 - beta1**t
    bias2 = 1.0 - beta2**t
    for i, ((name, param), grad) in enumerate(zip(named_params, grads)):
        g = _real_view(np.ascontiguousarray(grad))
        if not np.all(np.isfinite(g)):
            raise SolverError(f"non-finite gradient for {name}")
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g
        m_hat = state.m[i] / bias1
        v_hat = state.v[i] / bias2
        _real_view(param)[:] -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return state


def network_adam_step(net: ComplexNetwork, grads: GradientSet, state: AdamState, lr: float, betas=(0.9, 0.999), eps: float = 1e-8) -> AdamState:
    """Adam over all network parameters; bumps the network version."""
    flat_grads = []
    for dw, db in zip(grads.weights, grads.biases):
        flat_grads.extend([dw, db])
    state = adam_step(net.parameters(), flat_grads, state, lr, betas, eps)
    net.version += 1
    return state
