"""Dense statevector simulation: gates, controlled unitaries, sampling, I/O.

Register convention (global): qubit 0 is the leftmost label character and the
most significant bit of the basis index. When an ancilla is present it is
qubit 0, so basis indices below 2^(m-1) have the ancilla in |0>.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .pauli import PauliString

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10

_DUMP_MAGIC = b"QSV"


class MeasurementRecord(NamedTuple):
    """One computational-basis outcome on an ancilla+system register."""

    index: int
    qubit_count: int

    @property
    def bitstring(self) -> str:
        return format(self.index, f"0{self.qubit_count}b")

    @property
    def ancilla_bit(self) -> int:
        return (self.index >> (self.qubit_count - 1)) & 1

    @property
    def system_bits(self) -> str:
        return self.bitstring[1:]


@dataclass(frozen=True)
class StateVector:
    """Immutable complex amplitude vector over `qubit_count` qubits.

    Unnormalized intermediates (e.g. the output of a non-unitary filter before
    post-selection) must be flagged; norm-sensitive operations refuse them.
    """

    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        n = amps.shape[0]
        if n == 0 or (n & (n - 1)) != 0:
            raise ValueError("amplitude vector length must be a power of two")
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError("state marked normalized but norm deviates from 1")

    @property
    def qubit_count(self) -> int:
        return int(self.amplitudes.shape[0]).bit_length() - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def renormalized(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot renormalize the zero vector")
        return StateVector(self.amplitudes / n)

    def dump(self) -> bytes:
        """8-byte header (magic + qubit count) then little-endian (re, im)
        float64 pairs."""
        header = _DUMP_MAGIC + b"\x00" + struct.pack("<i", self.qubit_count)
        interleaved = np.empty(2 * self.amplitudes.shape[0], dtype="<f8")
        interleaved[0::2] = self.amplitudes.real
        interleaved[1::2] = self.amplitudes.imag
        return header + interleaved.tobytes()

    @staticmethod
    def load(blob: bytes) -> "StateVector":
        if blob[:3] != _DUMP_MAGIC:
            raise ValueError("bad magic in statevector dump")
        (m,) = struct.unpack("<i", blob[4:8])
        flat = np.frombuffer(blob[8:], dtype="<f8")
        if flat.shape[0] != 2 ** (m + 1):
            raise ValueError("statevector dump length mismatch")
        amps = flat[0::2] + 1j * flat[1::2]
        return StateVector(amps, normalized=abs(np.linalg.norm(amps) - 1) <= NORM_TOL)


def basis_state(qubit_count: int, index: int = 0) -> StateVector:
    amps = np.zeros(2**qubit_count, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps)


def apply_dense(u: np.ndarray, s: StateVector) -> StateVector:
    """U @ s for an explicitly materialized unitary."""
    u = np.asarray(u)
    if u.shape != (s.amplitudes.shape[0],) * 2:
        raise ValueError("dimension mismatch")
    if np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) > UNITARY_TOL:
        raise ValueError("matrix is not unitary")
    return StateVector(u @ s.amplitudes, normalized=s.normalized)


def apply_pauli_rotation(s: StateVector, p: PauliString, theta: float) -> StateVector:
    """e^{-i theta P / 2} |s>, via cos(theta/2) I - i sin(theta/2) P."""
    if p.qubit_count != s.qubit_count:
        raise ValueError("dimension mismatch")
    c, sn = np.cos(theta / 2.0), np.sin(theta / 2.0)
    amps = c * s.amplitudes - 1j * sn * p.apply(s.amplitudes)
    return StateVector(amps, normalized=s.normalized)


def apply_controlled(
    u: np.ndarray, s: StateVector, control_value: int = 1, dagger: bool = False
) -> StateVector:
    """Apply U (or U†) to the system register when the ancilla (qubit 0)
    equals `control_value`; identity on the other branch."""
    if s.qubit_count < 2:
        raise ValueError("state has no ancilla qubit")
    dim_sys = s.amplitudes.shape[0] // 2
    u = np.asarray(u)
    if u.shape != (dim_sys, dim_sys):
        raise ValueError("dimension mismatch")
    mat = u.conj().T if dagger else u
    amps = s.amplitudes.copy()
    if control_value == 0:
        amps[:dim_sys] = mat @ amps[:dim_sys]
    else:
        amps[dim_sys:] = mat @ amps[dim_sys:]
    return StateVector(amps, normalized=s.normalized)


def sample(s: StateVector, shots: int, seed: int) -> list[MeasurementRecord]:
    """I.i.d. computational-basis samples; deterministic in (state, shots, seed)."""
    if not s.normalized:
        raise ValueError("sampling requires a normalized state")
    if shots < 1:
        raise ValueError("shots must be positive")
    probs = np.abs(s.amplitudes) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    m = s.qubit_count
    records = []
    for idx in np.nonzero(counts)[0]:
        records.extend([MeasurementRecord(int(idx), m)] * int(counts[idx]))
    return records


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>| for normalized states."""
    if a.amplitudes.shape != b.amplitudes.shape:
        raise ValueError("dimension mismatch")
    if not (a.normalized and b.normalized):
        raise ValueError("fidelity requires normalized states")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))
