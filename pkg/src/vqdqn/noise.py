"""Device calibration tables and the noise models derived from them.

Device files are CSV documents split into three sections::

    # device: ibmq-valencia
    [qubits]
    qubit,t1_us,t2_us,frequency_ghz,readout_error
    [gates]
    qubit,id_error,u1_error,u2_error,u3_error,id_length_ns,u1_length_ns,u2_length_ns,u3_length_ns
    [couplings]
    control,target,cnot_error,cnot_length_ns

Lines starting with ``#`` are comments; ``# key: value`` comments are kept as
metadata. Every coupling must be listed in both directions.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .errors import MappingError, ParseError, ValidationError
from .qsim import SINGLE_QUBIT_KINDS, NoiseModel

GATES = ("id", "u1", "u2", "u3")
SECTION_COLUMNS = {
    "qubits": ["qubit", "t1_us", "t2_us", "frequency_ghz", "readout_error"],
    "gates": ["qubit"] + [f"{g}_error" for g in GATES] + [f"{g}_length_ns" for g in GATES],
    "couplings": ["control", "target", "cnot_error", "cnot_length_ns"],
}
BUNDLED_DEVICES = ("ibmq-poughkeepsie", "ibmq-valencia")


@dataclass(frozen=True)
class QubitProperties:
    t1_us: float
    t2_us: float
    frequency_ghz: float
    readout_error: float
    gate_error: Mapping[str, float]
    gate_length_ns: Mapping[str, float]


@dataclass(frozen=True)
class Coupling:
    cnot_error: float
    cnot_length_ns: float


@dataclass(frozen=True)
class DeviceProperties:
    name: str
    qubits: Mapping[int, QubitProperties]
    couplings: Mapping[tuple[int, int], Coupling]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for q, props in self.qubits.items():
            if props.t1_us <= 0 or props.t2_us <= 0:
                raise ValidationError(f"qubit {q}: T1 and T2 must be positive")
            _check_unit(props.readout_error, f"qubit {q} readout error")
            for g in GATES:
                _check_unit(props.gate_error[g], f"qubit {q} {g} error")
                if props.gate_length_ns[g] < 0:
                    raise ValidationError(f"qubit {q}: negative {g} gate length")
            if props.gate_error["u1"] != 0.0:
                raise ValidationError(f"qubit {q}: U1 is a virtual gate and must have zero error")
        for (c, t), cp in self.couplings.items():
            for q in (c, t):
                if q not in self.qubits:
                    raise ValidationError(f"coupling {[c, t]} references unknown qubit {q}")
            _check_unit(cp.cnot_error, f"CNOT {[c, t]} error")
            if (t, c) not in self.couplings:
                raise ValidationError(f"coupling {[c, t]} has no reverse entry {[t, c]}")

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)


def _check_unit(p: float, what: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"{what} must lie in [0, 1], got {p!r}")


def bundled_device_path(name: str) -> Path:
    return Path(str(resources.files(__package__).joinpath("data", f"{name}.csv")))


def parse_device_file(ref) -> DeviceProperties:
    """Parse a device CSV by path or bundled name (``ibmq-valencia``, ...)."""
    path = bundled_device_path(ref) if str(ref) in BUNDLED_DEVICES else Path(ref)
    if not path.exists():
        raise ParseError(f"device file {ref!s} not found")
    return parse_device_text(path.read_text(), default_name=path.stem)


def parse_device_text(text: str, default_name: str = "device") -> DeviceProperties:
    metadata: dict[str, str] = {}
    rows: dict[str, list[tuple[int, list[str]]]] = {k: [] for k in SECTION_COLUMNS}
    section = None
    expect_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if sep:
                metadata[key.strip()] = value.strip()
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SECTION_COLUMNS:
                raise ParseError(f"unknown section [{section}]", lineno)
            expect_header = True
            continue
        if section is None:
            raise ParseError("data before the first section header", lineno)
        cells = next(csv.reader([line]))
        cells = [c.strip() for c in cells]
        if expect_header:
            if cells != SECTION_COLUMNS[section]:
                raise ParseError(f"[{section}] header must be {','.join(SECTION_COLUMNS[section])}", lineno)
            expect_header = False
            continue
        if len(cells) != len(SECTION_COLUMNS[section]):
            raise ParseError(f"expected {len(SECTION_COLUMNS[section])} columns, got {len(cells)}", lineno)
        rows[section].append((lineno, cells))

    def num(cell: str, lineno: int) -> float:
        try:
            return float(cell)
        except ValueError:
            raise ParseError(f"not a number: {cell!r}", lineno) from None

    def idx(cell: str, lineno: int) -> int:
        try:
            return int(cell)
        except ValueError:
            raise ParseError(f"not a qubit index: {cell!r}", lineno) from None

    base: dict[int, tuple[float, float, float, float]] = {}
    for lineno, c in rows["qubits"]:
        q = idx(c[0], lineno)
        if q in base:
            raise ParseError(f"qubit {q} listed twice in [qubits]", lineno)
        base[q] = tuple(num(x, lineno) for x in c[1:])
    gates: dict[int, tuple[dict, dict]] = {}
    for lineno, c in rows["gates"]:
        q = idx(c[0], lineno)
        if q in gates:
            raise ParseError(f"qubit {q} listed twice in [gates]", lineno)
        values = [num(x, lineno) for x in c[1:]]
        gates[q] = (dict(zip(GATES, values[:4])), dict(zip(GATES, values[4:])))
    if not base:
        raise ParseError("no [qubits] rows")
    if set(base) != set(gates):
        raise ParseError(f"[qubits] lists {sorted(base)} but [gates] lists {sorted(gates)}")
    couplings: dict[tuple[int, int], Coupling] = {}
    for lineno, c in rows["couplings"]:
        pair = (idx(c[0], lineno), idx(c[1], lineno))
        if pair in couplings:
            raise ParseError(f"coupling {list(pair)} listed twice", lineno)
        couplings[pair] = Coupling(num(c[2], lineno), num(c[3], lineno))
    if not couplings:
        raise ParseError("no [couplings] rows")
    qubits = {
        q: QubitProperties(t1, t2, freq, ro, gates[q][0], gates[q][1])
        for q, (t1, t2, freq, ro) in sorted(base.items())
    }
    name = metadata.get("device", default_name)
    return DeviceProperties(name, qubits, couplings, metadata)


def format_device(props: DeviceProperties) -> str:
    """Serialise to the CSV schema; floats are written with ``repr`` so parsing is lossless."""
    lines = [f"# {k}: {v}" for k, v in props.metadata.items()]
    if "device" not in props.metadata:
        lines.insert(0, f"# device: {props.name}")
    lines += ["[qubits]", ",".join(SECTION_COLUMNS["qubits"])]
    for q, p in props.qubits.items():
        lines.append(",".join([str(q)] + [repr(float(x)) for x in (p.t1_us, p.t2_us, p.frequency_ghz, p.readout_error)]))
    lines += ["", "[gates]", ",".join(SECTION_COLUMNS["gates"])]
    for q, p in props.qubits.items():
        vals = [p.gate_error[g] for g in GATES] + [p.gate_length_ns[g] for g in GATES]
        lines.append(",".join([str(q)] + [repr(float(x)) for x in vals]))
    lines += ["", "[couplings]", ",".join(SECTION_COLUMNS["couplings"])]
    for (c, t), cp in props.couplings.items():
        lines.append(f"{c},{t},{float(cp.cnot_error)!r},{float(cp.cnot_length_ns)!r}")
    return "\n".join(lines) + "\n"


def find_chain(props: DeviceProperties, n: int) -> list[int]:
    """First linear chain of ``n`` device qubits (depth-first, lowest index first)."""
    neighbours: dict[int, list[int]] = {q: [] for q in props.qubits}
    for c, t in props.couplings:
        neighbours[c].append(t)

    def extend(path: list[int]) -> list[int] | None:
        if len(path) == n:
            return path
        for nxt in sorted(neighbours[path[-1]]):
            if nxt not in path:
                found = extend(path + [nxt])
                if found:
                    return found
        return None

    for start in sorted(props.qubits):
        found = extend([start])
        if found:
            return found
    raise MappingError(f"{props.name} has no linear chain of {n} coupled qubits")


def single_qubit_error(q: QubitProperties) -> float:
    """Depolarizing probability for one single-qubit gate.

    The larger of the calibrated U3 error and the amplitude-damping
    probability accumulated over one U3 duration.
    """
    relax = 1.0 - math.exp(-q.gate_length_ns["u3"] / (q.t1_us * 1000.0))
    return min(max(q.gate_error["u3"], relax, 0.0), 1.0)


def synthesize_noise_model(props: DeviceProperties, qubit_assignment: Sequence[int] | None = None, n_qubits: int | None = None) -> NoiseModel:
    """Noise model for a logical register laid out on the device.

    ``qubit_assignment[i]`` is the device qubit hosting logical qubit ``i + 1``.
    Logical neighbours ``i -> i + 1`` must be coupled, as the circuits use a
    CNOT chain. Without an assignment the first available chain of
    ``n_qubits`` is used.
    """
    if qubit_assignment is None:
        if n_qubits is None:
            raise MappingError("give either a qubit assignment or a register size")
        qubit_assignment = find_chain(props, n_qubits)
    assignment = [int(q) for q in qubit_assignment]
    if len(set(assignment)) != len(assignment):
        raise MappingError(f"assignment {assignment} reuses a device qubit")
    for q in assignment:
        if q not in props.qubits:
            raise MappingError(f"device {props.name} has no qubit {q}")
    n = len(assignment)
    per_qubit = tuple(single_qubit_error(props.qubits[q]) for q in assignment)
    cnot = {}
    for i in range(1, n):
        for c, t in ((i, i + 1), (i + 1, i)):
            pair = (assignment[c - 1], assignment[t - 1])
            cp = props.couplings.get(pair)
            if cp is None:
                if (c, t) == (i, i + 1):
                    raise MappingError(f"device {props.name} has no coupling {list(pair)} for CNOT {c}->{t}")
                continue
            cnot[(c, t)] = min(max(cp.cnot_error, 0.0), 1.0)
    readout = tuple(min(max(props.qubits[q].readout_error, 0.0), 1.0) for q in assignment)
    return NoiseModel(n, {k: per_qubit for k in SINGLE_QUBIT_KINDS}, cnot, readout)
