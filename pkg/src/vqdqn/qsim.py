"""Few-qubit statevector simulator.

Qubits are numbered from 1. Qubit 1 is the most significant bit of the
amplitude index, so ``|1011>`` on four qubits lives at index 11.

Two layers live here. The scalar API (:class:`StateVector`, :func:`apply_gate`,
:func:`prob_one`, :func:`sample_shots`, :func:`apply_noisy_gate`) operates on
one immutable register at a time. The batched kernel (:func:`simulate_batch`,
:func:`run_shots`) pushes many circuits of identical shape through the same
gate sequence at once; the variational-circuit code uses it for training.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, MappingError, ValidationError

MAX_QUBITS = 10
NORM_TOL = 1e-10

I2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
# indexed by error code: 0 = I, 1 = X, 2 = Y, 3 = Z
PAULIS = np.stack([I2, PAULI_X, PAULI_Y, PAULI_Z])

SINGLE_QUBIT_KINDS = ("RX", "RY", "RZ", "U3")
GATE_KINDS = SINGLE_QUBIT_KINDS + ("CNOT",)
_N_PARAMS = {"RX": 1, "RY": 1, "RZ": 1, "U3": 3, "CNOT": 0}


# -- gate matrices (vectorised over leading axes of the angle arrays) ------

def rx_matrix(theta):
    theta = np.asarray(theta, dtype=np.float64)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c
    out[..., 0, 1] = -1j * s
    out[..., 1, 0] = -1j * s
    out[..., 1, 1] = c
    return out


def ry_matrix(theta):
    theta = np.asarray(theta, dtype=np.float64)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def rz_matrix(theta):
    theta = np.asarray(theta, dtype=np.float64)
    out = np.zeros(theta.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = np.exp(-0.5j * theta)
    out[..., 1, 1] = np.exp(0.5j * theta)
    return out


def u3_matrix(alpha, beta, gamma):
    """General rotation ``RZ(alpha) @ RY(beta) @ RZ(gamma)``.

    Written out in closed form; equal to the product of the three rotation
    matrices to machine precision.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    plus = 0.5j * (alpha + gamma)
    minus = 0.5j * (alpha - gamma)
    shape = np.broadcast_shapes(alpha.shape, beta.shape, gamma.shape)
    out = np.empty(shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = np.exp(-plus) * c
    out[..., 0, 1] = -np.exp(-minus) * s
    out[..., 1, 0] = np.exp(minus) * s
    out[..., 1, 1] = np.exp(plus) * c
    return out


@dataclass(frozen=True)
class Gate:
    kind: str
    params: tuple[float, ...] = ()
    target: int = 1
    control: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.params) != _N_PARAMS[self.kind]:
            raise ValidationError(
                f"{self.kind} takes {_N_PARAMS[self.kind]} angle(s), got {len(self.params)}"
            )
        if self.kind == "CNOT":
            if self.control is None:
                raise ValidationError("CNOT needs a control qubit")
            if self.control == self.target:
                raise ValidationError("CNOT control and target must differ")
        elif self.control is not None:
            raise ValidationError(f"{self.kind} does not take a control qubit")

    @property
    def qubits(self) -> tuple[int, ...]:
        if self.control is None:
            return (self.target,)
        return (self.control, self.target)

    def matrix(self) -> np.ndarray:
        """2x2 unitary for single-qubit kinds, 4x4 (control first) for CNOT."""
        if self.kind == "RX":
            return rx_matrix(self.params[0])
        if self.kind == "RY":
            return ry_matrix(self.params[0])
        if self.kind == "RZ":
            return rz_matrix(self.params[0])
        if self.kind == "U3":
            return u3_matrix(*self.params)
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
        )


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 2**self.n_qubits:
            raise ValidationError(
                f"expected {2 ** self.n_qubits} amplitudes, got {amps.shape[0]}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalised (sum |c|^2 = {norm!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))


def _check_n_qubits(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
        raise ConfigError(f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n!r}")


def _check_qubit(q: int, n: int) -> None:
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= n:
        raise IndexError(f"qubit index {q!r} outside [1, {n}]")


def init_zero(n_qubits: int) -> StateVector:
    _check_n_qubits(n_qubits)
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def basis_state(index: int, n_qubits: int) -> StateVector:
    _check_n_qubits(n_qubits)
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


# -- batched kernel ---------------------------------------------------------

def apply_1q(psi: np.ndarray, mats: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Apply one 2x2 matrix (shared) or one per row (shape ``(R, 2, 2)``)."""
    rows = psi.shape[0]
    view = psi.reshape(rows, 2 ** (qubit - 1), 2, 2 ** (n - qubit))
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]
    if mats.ndim == 2:
        m00, m01, m10, m11 = mats[0, 0], mats[0, 1], mats[1, 0], mats[1, 1]
    else:
        m = mats[:, :, :, None, None]
        m00, m01, m10, m11 = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    out = np.empty_like(view)
    out[:, :, 0, :] = m00 * a0 + m01 * a1
    out[:, :, 1, :] = m10 * a0 + m11 * a1
    return out.reshape(rows, 2**n)


@lru_cache(maxsize=None)
def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    cbit = 1 << (n - control)
    tbit = 1 << (n - target)
    return np.where(idx & cbit, idx ^ tbit, idx)


def apply_cnot(psi: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    return psi[:, _cnot_permutation(n, control, target)]


@lru_cache(maxsize=None)
def _bit_table(n: int) -> np.ndarray:
    """``(2**n, n)`` matrix; column ``q-1`` holds bit ``q`` of every index."""
    idx = np.arange(2**n)
    return np.stack([(idx >> (n - q)) & 1 for q in range(1, n + 1)], axis=1).astype(np.float64)


def prob_one_batch(psi: np.ndarray, n: int) -> np.ndarray:
    """Per-row, per-qubit probability of reading 1; shape ``(R, n)``."""
    probs = psi.real**2 + psi.imag**2
    return probs @ _bit_table(n)


# An op is ("1q", qubit, matrices) or ("cx", control, target).
Op = tuple


def simulate_batch(
    n: int,
    ops: Sequence[Op],
    rows: int,
    errors: Mapping[int, Sequence[tuple[int, np.ndarray]]] | None = None,
    init: np.ndarray | None = None,
) -> np.ndarray:
    """Run ``rows`` circuits sharing one op sequence; returns ``(rows, 2**n)``.

    ``errors`` maps an op index to ``(qubit, codes)`` pairs: after that op,
    row ``r`` gets Pauli ``PAULIS[codes[r]]`` on ``qubit``.
    """
    if init is None:
        psi = np.zeros((rows, 2**n), dtype=np.complex128)
        psi[:, 0] = 1.0
    else:
        psi = np.array(init, dtype=np.complex128).reshape(rows, 2**n)
    for k, op in enumerate(ops):
        if op[0] == "1q":
            psi = apply_1q(psi, op[2], op[1], n)
        else:
            psi = apply_cnot(psi, op[1], op[2], n)
        if errors and k in errors:
            for qubit, codes in errors[k]:
                psi = apply_1q(psi, PAULIS[codes], qubit, n)
    return psi


def gate_to_op(g: Gate) -> Op:
    if g.kind == "CNOT":
        return ("cx", g.control, g.target)
    return ("1q", g.target, g.matrix())


# -- noise ------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Stochastic Pauli noise plus readout flips for a logical register.

    ``gate_error[kind][q-1]`` is the depolarizing probability of a
    single-qubit gate of that kind on logical qubit ``q``; ``cnot_error`` is
    keyed by the ordered ``(control, target)`` pair; ``readout_error[q-1]`` is
    the probability that a measured bit is reported flipped.
    """

    n_qubits: int
    gate_error: Mapping[str, tuple[float, ...]]
    cnot_error: Mapping[tuple[int, int], float]
    readout_error: tuple[float, ...]

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        gate_error = {k: tuple(float(p) for p in v) for k, v in self.gate_error.items()}
        cnot_error = {(int(c), int(t)): float(p) for (c, t), p in self.cnot_error.items()}
        readout = tuple(float(p) for p in self.readout_error)
        for kind, probs in gate_error.items():
            if kind not in SINGLE_QUBIT_KINDS:
                raise ValidationError(f"no single-qubit gate kind {kind!r}")
            if len(probs) != self.n_qubits:
                raise ValidationError(f"{kind} error needs {self.n_qubits} entries")
            _check_probs(probs, f"{kind} error")
        for pair, p in cnot_error.items():
            _check_probs([p], f"CNOT error {pair}")
        if len(readout) != self.n_qubits:
            raise ValidationError(f"readout error needs {self.n_qubits} entries")
        _check_probs(readout, "readout error")
        object.__setattr__(self, "gate_error", gate_error)
        object.__setattr__(self, "cnot_error", cnot_error)
        object.__setattr__(self, "readout_error", readout)

    @classmethod
    def zero(cls, n_qubits: int) -> NoiseModel:
        return cls.uniform(n_qubits, 0.0, 0.0, 0.0)

    @classmethod
    def uniform(cls, n_qubits: int, p1: float, p2: float, readout: float) -> NoiseModel:
        pairs = {(c, t): p2 for c in range(1, n_qubits + 1) for t in range(1, n_qubits + 1) if c != t}
        return cls(
            n_qubits,
            {k: (p1,) * n_qubits for k in SINGLE_QUBIT_KINDS},
            pairs,
            (readout,) * n_qubits,
        )

    def error_probability(self, g: Gate) -> float:
        if g.kind == "CNOT":
            try:
                return self.cnot_error[(g.control, g.target)]
            except KeyError:
                raise MappingError(f"no CNOT error defined for pair {(g.control, g.target)}") from None
        probs = self.gate_error.get(g.kind)
        if probs is None:
            return 0.0
        return probs[g.target - 1]

    def is_zero(self) -> bool:
        return (
            all(p == 0 for v in self.gate_error.values() for p in v)
            and all(p == 0 for p in self.cnot_error.values())
            and all(p == 0 for p in self.readout_error)
        )


def _check_probs(values, what: str) -> None:
    for p in values:
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"{what} must lie in [0, 1], got {p!r}")


# -- scalar API ---------------------------------------------------------------

def apply_gate(sv: StateVector, g: Gate) -> StateVector:
    n = sv.n_qubits
    for q in g.qubits:
        _check_qubit(q, n)
    psi = simulate_batch(n, [gate_to_op(g)], 1, init=sv.amplitudes)
    return StateVector(n, psi[0])


def prob_one(sv: StateVector, qubit: int) -> float:
    _check_qubit(qubit, sv.n_qubits)
    mask = (np.arange(2**sv.n_qubits) >> (sv.n_qubits - qubit)) & 1
    p = float(sv.probabilities()[mask == 1].sum())
    return min(max(p, 0.0), 1.0)


def _flip_counts(ones: np.ndarray, shots, readout, rng: np.random.Generator) -> np.ndarray:
    """Apply independent readout flips to per-qubit counts of ones."""
    readout = np.asarray(readout, dtype=np.float64)
    zeros = shots - ones
    kept = rng.binomial(ones, 1.0 - readout)
    flipped_up = rng.binomial(zeros, readout)
    return kept + flipped_up


def sample_shots(
    sv: StateVector, shots: int, rng_seed: int, noise: NoiseModel | None = None
) -> np.ndarray:
    """Empirical frequency of outcome 1 on every qubit over ``shots`` measurements."""
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    rng = np.random.default_rng(rng_seed)
    counts = rng.multinomial(shots, _renormalised(sv.probabilities()))
    ones = np.rint(counts @ _bit_table(sv.n_qubits)).astype(np.int64)
    if noise is not None:
        ones = _flip_counts(ones, shots, noise.readout_error, rng)
    return ones / shots


def _renormalised(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=-1, keepdims=True)


def apply_noisy_gate(
    sv: StateVector, g: Gate, noise: NoiseModel, rng: np.random.Generator
) -> StateVector:
    """Apply ``g`` then, with the gate's error probability, a random Pauli error.

    An error event draws a Pauli uniformly from {I, X, Y, Z} on each qubit the
    gate touches (independently for CNOT), which averages to the depolarizing
    channel ``(1 - p) rho + p I/d``.
    """
    out = apply_gate(sv, g)
    p = noise.error_probability(g)
    if p > 0 and rng.random() < p:
        psi = out.amplitudes.reshape(1, -1)
        for q in g.qubits:
            psi = apply_1q(psi, PAULIS[rng.integers(4)], q, sv.n_qubits)
        out = StateVector(sv.n_qubits, psi[0])
    return out


def _sample_error_patterns(site_probs: np.ndarray, rows: int, shots: int, rng: np.random.Generator):
    """Draw which shots of each row suffer errors, and where.

    Returns ``(clean, err_rows, err_mask)``: the error-free shot count per row,
    the owning row of every erroneous shot, and a boolean ``(E, K)`` matrix of
    error sites. Exact: the first error site is drawn from its conditional
    distribution given at least one error, later sites independently.
    """
    k = site_probs.shape[0]
    survive = np.concatenate([[1.0], np.cumprod(1.0 - site_probs)])
    p_clean = survive[-1]
    n_err = rng.binomial(shots, 1.0 - p_clean, size=rows)
    clean = shots - n_err
    err_rows = np.repeat(np.arange(rows), n_err)
    e = err_rows.shape[0]
    if e == 0:
        return clean, err_rows, np.zeros((0, k), dtype=bool)
    first_w = site_probs * survive[:-1]
    cdf = np.cumsum(first_w) / first_w.sum()
    first = np.minimum(np.searchsorted(cdf, rng.random(e), side="right"), k - 1)
    later = rng.random((e, k)) < site_probs
    cols = np.arange(k)
    mask = np.where(cols > first[:, None], later, cols == first[:, None])
    return clean, err_rows, mask


def run_shots(
    n: int,
    gates_per_op: Sequence[Gate],
    ops: Sequence[Op],
    rows: int,
    shots: int,
    rng: np.random.Generator,
    noise: NoiseModel | None = None,
) -> np.ndarray:
    """Shot-sample ``rows`` circuits; returns per-qubit frequencies of 1, ``(rows, n)``.

    ``gates_per_op[k]`` is a representative gate for op ``k`` (used only to look
    up its error probability); ``ops`` carries the per-row matrices. With noise,
    every shot is its own Pauli trajectory and every reported bit is subject to
    its qubit's readout flip.
    """
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    bits = _bit_table(n)
    if noise is None:
        full = simulate_batch(n, ops, rows)
        counts = rng.multinomial(shots, _renormalised(full.real**2 + full.imag**2))
        return (counts @ bits) / shots

    site_probs = np.array([noise.error_probability(g) for g in gates_per_op])
    clean, err_rows, mask = _sample_error_patterns(site_probs, rows, shots, rng)
    clean_psi = simulate_batch(n, ops, rows)
    clean_p = _renormalised(clean_psi.real**2 + clean_psi.imag**2)
    ones = rng.multinomial(clean, clean_p) @ bits

    e = err_rows.shape[0]
    if e:
        err_ops = []
        for op in ops:
            if op[0] == "1q" and op[2].ndim == 3:
                err_ops.append(("1q", op[1], op[2][err_rows]))
            else:
                err_ops.append(op)
        errors = {}
        for k, g in enumerate(gates_per_op):
            hit = mask[:, k]
            if not hit.any():
                continue
            entries = []
            for q in g.qubits:
                codes = np.where(hit, rng.integers(0, 4, size=e), 0)
                entries.append((q, codes))
            errors[k] = entries
        err_psi = simulate_batch(n, err_ops, e, errors=errors)
        err_p = _renormalised(err_psi.real**2 + err_psi.imag**2)
        cdf = np.cumsum(err_p, axis=1)
        outcome = (cdf < rng.random(e)[:, None]).sum(axis=1)
        outcome = np.minimum(outcome, 2**n - 1)
        np.add.at(ones, err_rows, bits[outcome])

    ones = np.rint(ones).astype(np.int64)
    ones = _flip_counts(ones, shots, noise.readout_error, rng)
    return ones / shots
