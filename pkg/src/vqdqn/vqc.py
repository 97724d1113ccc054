"""Variational Q-network circuits.

A circuit prepares the computational-basis encoding of a discrete state
(``RX(pi b_i)`` then ``RZ(pi b_i)`` on every qubit), then repeats a layer made
of a CNOT chain ``1->2, ..., (n-1)->n`` followed by a trainable general rotation
``RZ(alpha) RY(beta) RZ(gamma)`` on each parameterised qubit. The Q-value of
action ``a`` is the expectation read off measured qubit ``a`` plus a trainable
bias.

:func:`forward` is the reference path and runs gate by gate through the scalar
simulator. :func:`evaluate` is the batched engine used for training: it pushes
every state and every parameter-shifted copy of the model through the circuit
in one pass.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import qsim
from .errors import CompatibilityError, ConfigError, EncodingError, ValidationError
from .qsim import Gate, NoiseModel

SHIFT = math.pi / 2
OBSERVABLES = ("p1", "z")


@dataclass(frozen=True)
class CircuitSpec:
    n_qubits: int
    n_layers: int = 2
    parameterized_qubits: tuple[int, ...] = ()
    measured_qubits: tuple[int, ...] = ()
    observable: str = "p1"

    def __post_init__(self):
        if not 1 <= self.n_qubits <= qsim.MAX_QUBITS:
            raise ConfigError(f"n_qubits must be in [1, {qsim.MAX_QUBITS}], got {self.n_qubits}")
        if self.n_layers < 0:
            raise ConfigError("n_layers must be >= 0")
        pq = tuple(int(q) for q in (self.parameterized_qubits or range(1, self.n_qubits + 1)))
        mq = tuple(int(q) for q in (self.measured_qubits or range(1, self.n_qubits + 1)))
        for q in pq + mq:
            if not 1 <= q <= self.n_qubits:
                raise ConfigError(f"qubit {q} outside [1, {self.n_qubits}]")
        if len(set(pq)) != len(pq) or len(set(mq)) != len(mq):
            raise ConfigError("qubit lists must not repeat entries")
        if self.observable not in OBSERVABLES:
            raise ConfigError(f"observable must be one of {OBSERVABLES}")
        object.__setattr__(self, "parameterized_qubits", tuple(sorted(pq)))
        object.__setattr__(self, "measured_qubits", mq)

    @property
    def n_actions(self) -> int:
        return len(self.measured_qubits)

    @property
    def n_angles(self) -> int:
        return len(self.parameterized_qubits) * 3 * self.n_layers

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_qubits": self.n_qubits,
            "n_layers": self.n_layers,
            "parameterized_qubits": list(self.parameterized_qubits),
            "measured_qubits": list(self.measured_qubits),
            "observable": self.observable,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CircuitSpec:
        return cls(
            n_qubits=d["n_qubits"],
            n_layers=d["n_layers"],
            parameterized_qubits=tuple(d["parameterized_qubits"]),
            measured_qubits=tuple(d["measured_qubits"]),
            observable=d.get("observable", "p1"),
        )


def radio_circuit(n_channels: int, n_layers: int = 2, observable: str = "p1") -> CircuitSpec:
    """Circuit for the n-channel radio task.

    Three channels need 9 basis states, so a fourth qubit is added; it is
    neither rotated nor measured, keeping the parameter count at ``3 * 7``.
    """
    if n_channels == 3:
        return CircuitSpec(4, n_layers, (1, 2, 3), (1, 2, 3), observable)
    return CircuitSpec(n_channels, n_layers, observable=observable)


def frozen_lake_circuit(n_layers: int = 2, observable: str = "p1") -> CircuitSpec:
    return CircuitSpec(4, n_layers, observable=observable)


def param_count(spec: CircuitSpec) -> int:
    return spec.n_angles + spec.n_actions


@dataclass
class VqcModel:
    spec: CircuitSpec
    thetas: np.ndarray  # (layer, parameterised qubit, [alpha, beta, gamma])
    bias: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        shape = (self.spec.n_layers, len(self.spec.parameterized_qubits), 3)
        self.thetas = np.array(self.thetas, dtype=np.float64).reshape(shape)
        self.bias = np.array(self.bias, dtype=np.float64).reshape(self.spec.n_actions)

    @classmethod
    def random(cls, spec: CircuitSpec, seed: int) -> VqcModel:
        """Angles uniform on [0, 2pi), bias zero."""
        rng = np.random.default_rng(seed)
        thetas = rng.uniform(0.0, 2 * math.pi, size=(spec.n_layers, len(spec.parameterized_qubits), 3))
        return cls(spec, thetas, np.zeros(spec.n_actions), seed)

    @classmethod
    def zeros(cls, spec: CircuitSpec) -> VqcModel:
        return cls(spec, np.zeros((spec.n_layers, len(spec.parameterized_qubits), 3)), np.zeros(spec.n_actions))

    @property
    def n_params(self) -> int:
        return param_count(self.spec)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.thetas.ravel(), self.bias])

    def with_flat(self, params: np.ndarray) -> VqcModel:
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise ValidationError(f"expected {self.n_params} parameters, got shape {params.shape}")
        a = self.spec.n_angles
        return VqcModel(self.spec, params[:a].copy(), params[a:].copy(), self.seed)

    def copy(self) -> VqcModel:
        return VqcModel(self.spec, self.thetas.copy(), self.bias.copy(), self.seed)


@dataclass(frozen=True)
class EncodedInput:
    state_index: int
    bits: tuple[int, ...]
    theta: tuple[float, ...]
    phi: tuple[float, ...]

    @property
    def n_qubits(self) -> int:
        return len(self.bits)


def encode(state_index: int, n_qubits: int) -> EncodedInput:
    if not isinstance(state_index, (int, np.integer)) or not 0 <= state_index < 2**n_qubits:
        raise EncodingError(f"state {state_index!r} cannot be encoded on {n_qubits} qubits")
    bits = tuple((int(state_index) >> (n_qubits - i)) & 1 for i in range(1, n_qubits + 1))
    angles = tuple(math.pi * b for b in bits)
    return EncodedInput(int(state_index), bits, angles, angles)


def build_circuit(spec: CircuitSpec, model: VqcModel, inp: EncodedInput) -> list[Gate]:
    if inp.n_qubits != spec.n_qubits:
        raise CompatibilityError(f"input has {inp.n_qubits} qubits, circuit has {spec.n_qubits}")
    gates: list[Gate] = []
    for q in range(1, spec.n_qubits + 1):
        gates.append(Gate("RX", (inp.theta[q - 1],), q))
        gates.append(Gate("RZ", (inp.phi[q - 1],), q))
    for layer in range(spec.n_layers):
        for q in range(1, spec.n_qubits):
            gates.append(Gate("CNOT", (), q + 1, q))
        for j, q in enumerate(spec.parameterized_qubits):
            gates.append(Gate("U3", tuple(model.thetas[layer, j]), q))
    return gates


# -- backends ---------------------------------------------------------------

@dataclass(frozen=True)
class Analytic:
    """Exact expectation values."""


@dataclass
class Shots:
    """Expectations estimated from ``shots`` measurements, optionally noisy.

    The generator is seeded once and advances with every evaluation, so a run
    is reproducible for a fixed seed and call sequence.
    """

    shots: int = 1024
    seed: int = 0
    noise: NoiseModel | None = None
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.shots < 1:
            raise ValidationError(f"shots must be >= 1, got {self.shots}")
        self.rng = np.random.default_rng(self.seed)


ANALYTIC = Analytic()


def _observable(p1: np.ndarray, spec: CircuitSpec) -> np.ndarray:
    return p1 if spec.observable == "p1" else 1.0 - 2.0 * p1


def forward(model: VqcModel, state_index: int, backend: Analytic | Shots = ANALYTIC) -> np.ndarray:
    """Q-values of one state, simulated gate by gate."""
    spec = model.spec
    gates = build_circuit(spec, model, encode(state_index, spec.n_qubits))
    if isinstance(backend, Shots) and backend.noise is not None:
        p1 = _shots_p1(spec, gates, [qsim.gate_to_op(g) for g in gates], 1, backend)[0]
    else:
        sv = qsim.init_zero(spec.n_qubits)
        for g in gates:
            sv = qsim.apply_gate(sv, g)
        if isinstance(backend, Shots):
            seed = int(backend.rng.integers(2**63))
            p1 = qsim.sample_shots(sv, backend.shots, seed)
        else:
            p1 = np.array([qsim.prob_one(sv, q) for q in range(1, spec.n_qubits + 1)])
    measured = np.array(spec.measured_qubits) - 1
    return _observable(p1[measured], spec) + model.bias


def _shots_p1(spec, gates, ops, rows, backend: Shots) -> np.ndarray:
    noise = backend.noise
    if noise is not None and noise.n_qubits != spec.n_qubits:
        raise CompatibilityError(f"noise model covers {noise.n_qubits} qubits, circuit has {spec.n_qubits}")
    return qsim.run_shots(spec.n_qubits, gates, ops, rows, backend.shots, backend.rng, noise)


def batched_ops(spec: CircuitSpec, thetas: np.ndarray, states: np.ndarray):
    """Ops for ``V * S`` rows: row ``v * S + s`` is model ``v`` on state ``s``.

    ``thetas`` has shape ``(V, layers, parameterised qubits, 3)``. Returns the
    op list and one representative :class:`Gate` per op (for noise lookup).
    """
    n = spec.n_qubits
    v_count = thetas.shape[0]
    states = np.asarray(states, dtype=np.int64)
    s_count = states.shape[0]
    ops, reps = [], []
    for q in range(1, n + 1):
        bits = ((states >> (n - q)) & 1).astype(np.float64)
        enc_x = np.tile(qsim.rx_matrix(math.pi * bits), (v_count, 1, 1))
        enc_z = np.tile(qsim.rz_matrix(math.pi * bits), (v_count, 1, 1))
        ops.append(("1q", q, enc_x))
        reps.append(Gate("RX", (0.0,), q))
        ops.append(("1q", q, enc_z))
        reps.append(Gate("RZ", (0.0,), q))
    mats = qsim.u3_matrix(thetas[..., 0], thetas[..., 1], thetas[..., 2])  # (V, L, P, 2, 2)
    for layer in range(spec.n_layers):
        for q in range(1, n):
            ops.append(("cx", q, q + 1))
            reps.append(Gate("CNOT", (), q + 1, q))
        for j, q in enumerate(spec.parameterized_qubits):
            m = mats[:, layer, j]
            ops.append(("1q", q, np.repeat(m, s_count, axis=0) if s_count > 1 else m))
            reps.append(Gate("U3", (0.0, 0.0, 0.0), q))
    return ops, reps


def expectations(
    spec: CircuitSpec, thetas: np.ndarray, states, backend: Analytic | Shots = ANALYTIC
) -> np.ndarray:
    """Observable of every measured qubit; shape ``(V, S, n_actions)``."""
    thetas = np.asarray(thetas, dtype=np.float64)
    states = np.atleast_1d(np.asarray(states, dtype=np.int64))
    if states.size and (states.min() < 0 or states.max() >= 2**spec.n_qubits):
        raise EncodingError(f"states must lie in [0, {2 ** spec.n_qubits})")
    v_count, s_count = thetas.shape[0], states.shape[0]
    ops, reps = batched_ops(spec, thetas, states)
    rows = v_count * s_count
    if isinstance(backend, Shots):
        p1 = _shots_p1(spec, reps, ops, rows, backend)
    else:
        p1 = qsim.prob_one_batch(qsim.simulate_batch(spec.n_qubits, ops, rows), spec.n_qubits)
    measured = np.array(spec.measured_qubits) - 1
    return _observable(p1[:, measured], spec).reshape(v_count, s_count, spec.n_actions)


def shifted_thetas(thetas: np.ndarray) -> np.ndarray:
    """Stack ``[base, +shift_0, -shift_0, +shift_1, -shift_1, ...]``."""
    flat = thetas.ravel()
    a = flat.shape[0]
    out = np.tile(flat, (1 + 2 * a, 1))
    idx = np.arange(a)
    out[1 + 2 * idx, idx] += SHIFT
    out[2 + 2 * idx, idx] -= SHIFT
    return out.reshape((1 + 2 * a,) + thetas.shape)


def evaluate(model: VqcModel, states, backend: Analytic | Shots = ANALYTIC, with_grad: bool = False):
    """Batched Q-values ``(S, A)``; with ``with_grad`` also the Jacobian ``(S, A, P)``.

    The Jacobian holds d Q[s, a] / d param for every parameter in
    :meth:`VqcModel.flat` order, angles by the parameter-shift rule.
    """
    spec = model.spec
    states = np.atleast_1d(np.asarray(states, dtype=np.int64))
    if not with_grad:
        return expectations(spec, model.thetas[None], states, backend)[0] + model.bias
    values = expectations(spec, shifted_thetas(model.thetas), states, backend)
    q = values[0] + model.bias
    plus, minus = values[1::2], values[2::2]  # (A_angles, S, n_actions)
    angle_grad = np.transpose((plus - minus) / 2.0, (1, 2, 0))
    bias_grad = np.broadcast_to(np.eye(spec.n_actions), (states.shape[0], spec.n_actions, spec.n_actions))
    return q, np.concatenate([angle_grad, bias_grad], axis=2)


def parameter_shift_grad(model: VqcModel, state_index: int, output: int) -> np.ndarray:
    """Gradient of output ``output`` (0-based action wire) over all parameters."""
    if not 0 <= output < model.spec.n_actions:
        raise IndexError(f"output {output} outside [0, {model.spec.n_actions})")
    _, jac = evaluate(model, [state_index], ANALYTIC, with_grad=True)
    return jac[0, output]


# -- checkpoints --------------------------------------------------------------

CHECKPOINT_FORMAT = "vqdqn-checkpoint/1"


def model_to_dict(model: VqcModel) -> dict[str, Any]:
    return {
        "format": CHECKPOINT_FORMAT,
        "spec": model.spec.to_dict(),
        "thetas": model.thetas.tolist(),
        "bias": model.bias.tolist(),
        "seed": model.seed,
        "n_params": model.n_params,
    }


def model_from_dict(d: dict[str, Any]) -> VqcModel:
    if d.get("format") != CHECKPOINT_FORMAT:
        raise CompatibilityError(f"unsupported checkpoint format {d.get('format')!r}")
    spec = CircuitSpec.from_dict(d["spec"])
    return VqcModel(spec, np.array(d["thetas"], dtype=np.float64), np.array(d["bias"], dtype=np.float64), d.get("seed"))


def save_checkpoint(path, model: VqcModel, extra: dict[str, Any] | None = None) -> None:
    doc = model_to_dict(model)
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_checkpoint(path) -> tuple[VqcModel, dict[str, Any]]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CompatibilityError(f"{path}: not a JSON checkpoint ({exc})") from None
    model = model_from_dict(doc)
    extra = {k: v for k, v in doc.items() if k not in ("format", "spec", "thetas", "bias", "seed", "n_params")}
    return model, extra


def check_action_count(spec: CircuitSpec, n_actions: int) -> None:
    if spec.n_actions != n_actions:
        raise CompatibilityError(f"model has {spec.n_actions} outputs, environment has {n_actions} actions")


__all__ = [
    "ANALYTIC", "Analytic", "CircuitSpec", "EncodedInput", "Shots", "VqcModel",
    "build_circuit", "encode", "evaluate", "expectations", "forward", "frozen_lake_circuit",
    "load_checkpoint", "param_count", "parameter_shift_grad", "radio_circuit", "save_checkpoint",
]
