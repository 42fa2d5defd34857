"""Pauli-string algebra, Hamiltonian construction and exact spectral data.

Conventions used throughout the package:

- a Pauli string is a label like ``"XXIZ"``, one character per qubit, with
  qubit 0 the leftmost character (most significant bit of the basis index);
- dense matrices are built by Kronecker products in string order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

DENSE_QUBIT_LIMIT = 12
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Pauli operators, e.g. ``"XIZ"``."""

    ops: str

    def __post_init__(self):
        if not self.ops or any(c not in _PAULI_MATS for c in self.ops):
            raise ValueError(f"invalid Pauli label {self.ops!r}")

    @property
    def qubit_count(self) -> int:
        return len(self.ops)

    @property
    def support(self) -> tuple[int, ...]:
        """Indices of non-identity sites."""
        return tuple(q for q, c in enumerate(self.ops) if c != "I")

    def dense(self) -> np.ndarray:
        m = np.array([[1.0 + 0j]])
        for c in self.ops:
            m = np.kron(m, _PAULI_MATS[c])
        return m

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """Apply the string to an amplitude vector without materializing it.

        Works axis-by-axis on the (2,)*m tensor view: X permutes, Z flips the
        sign of the |1> slice, Y does both with the +-i phases.
        """
        m = self.qubit_count
        psi = amplitudes.reshape((2,) * m)
        for q, c in enumerate(self.ops):
            if c == "I":
                continue
            if c in ("X", "Y"):
                psi = np.flip(psi, axis=q)
            if c in ("Y", "Z"):
                shape = [1] * m
                shape[q] = 2
                phase = np.array([-1j, 1j] if c == "Y" else [1, -1])
                psi = psi * phase.reshape(shape)
        return psi.reshape(-1)


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings H = sum_j h_j P_j.

    `normalized`/`shift` record whether the operator was rescaled into the
    unit spectral disc and any identity offset applied in the process; the
    identity term itself is kept out of `terms` so the term count matches
    the physical model.
    """

    terms: tuple[tuple[float, PauliString], ...]
    normalized: bool = False
    shift: float = 0.0

    def __post_init__(self):
        if not self.terms:
            raise ValueError("empty PauliSum")
        n = self.terms[0][1].qubit_count
        if any(p.qubit_count != n for _, p in self.terms):
            raise ValueError("mixed qubit counts in PauliSum")

    @property
    def qubit_count(self) -> int:
        return self.terms[0][1].qubit_count

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def max_abs_coeff(self) -> float:
        return max(abs(h) for h, _ in self.terms)

    @property
    def coeff_l1(self) -> float:
        return sum(abs(h) for h, _ in self.terms)

    def dense(self) -> np.ndarray:
        dim = 2 ** self.qubit_count
        m = np.zeros((dim, dim), dtype=complex)
        for h, p in self.terms:
            m += h * p.dense()
        if self.shift:
            m += self.shift * np.eye(dim)
        return m

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        out = self.shift * amplitudes if self.shift else np.zeros_like(amplitudes)
        for h, p in self.terms:
            out = out + h * p.apply(amplitudes)
        return out

    def to_json(self) -> str:
        payload = {
            "n": self.qubit_count,
            "terms": [{"coeff": h, "pauli": p.ops} for h, p in self.terms],
            "normalized": self.normalized,
            "shift": self.shift,
        }
        return json.dumps(payload, indent=2)

    @staticmethod
    def from_json(text: str) -> "PauliSum":
        payload = json.loads(text)
        terms = tuple(
            (float(t["coeff"]), PauliString(t["pauli"])) for t in payload["terms"]
        )
        h = PauliSum(
            terms,
            normalized=bool(payload.get("normalized", False)),
            shift=float(payload.get("shift", 0.0)),
        )
        if h.qubit_count != payload["n"]:
            raise ValueError("qubit count mismatch in Hamiltonian file")
        return h


@dataclass(frozen=True)
class SpectrumInfo:
    """Full eigendecomposition plus the derived quantities used everywhere.

    eigenvalues ascending; eigenvectors column-orthonormal; gap = lambda_1 -
    lambda_0; `degenerate` flags a gap below numerical resolution.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap: float
    ground_energy: float
    degenerate: bool = False

    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def build_heisenberg(n: int = 4) -> PauliSum:
    """Open-chain antiferromagnet with a transverse field, unnormalized.

    -(XX + YY + ZZ) on each nearest-neighbour bond plus -(1/2) X on every
    site; n=4 gives 13 terms.
    """
    if n < 2:
        raise ValueError("need at least 2 qubits")
    terms: list[tuple[float, PauliString]] = []
    for j in range(n - 1):
        for axis in "XYZ":
            label = "I" * j + axis + axis + "I" * (n - j - 2)
            terms.append((-1.0, PauliString(label)))
    for j in range(n):
        label = "I" * j + "X" + "I" * (n - j - 1)
        terms.append((-0.5, PauliString(label)))
    return PauliSum(tuple(terms))


@lru_cache(maxsize=64)
def _diagonalize_cached(h: PauliSum) -> SpectrumInfo:
    mat = h.dense()
    evals, evecs = np.linalg.eigh(mat)
    gap = float(evals[1] - evals[0]) if len(evals) > 1 else 0.0
    return SpectrumInfo(
        eigenvalues=evals,
        eigenvectors=evecs,
        gap=gap,
        ground_energy=float(evals[0]),
        degenerate=gap < DEGENERACY_TOL,
    )


def diagonalize(h: PauliSum, dense_limit: int = DENSE_QUBIT_LIMIT) -> SpectrumInfo:
    """Exact dense eigendecomposition; the spectral oracle for everything else.

    Results are cached per PauliSum (they are immutable and hashable).
    """
    if h.qubit_count > dense_limit:
        raise ValueError(
            f"{h.qubit_count} qubits exceeds the dense limit {dense_limit}"
        )
    return _diagonalize_cached(h)


def normalize(h: PauliSum) -> PauliSum:
    """Rescale so all eigenvalues lie in [-1, 1] with a negative ground energy.

    The divisor is the exact spectral radius. If the rescaled ground energy is
    still nonnegative, an identity shift is applied (and recorded in `shift`)
    to push it below zero, followed by a second rescale so the spectrum stays
    inside [-1, 1].
    """
    if h.normalized:
        return h
    spec = diagonalize(h)
    radius = float(np.max(np.abs(spec.eigenvalues)))
    if radius == 0.0:
        raise ValueError("zero Hamiltonian cannot be normalized")
    terms = tuple((hj / radius, p) for hj, p in h.terms)
    shift = h.shift / radius
    lo = spec.eigenvalues[0] / radius
    hi = spec.eigenvalues[-1] / radius
    if lo >= 0.0:
        # centre the spectrum (or, for a single-point spectrum, drop it to -1)
        c = -1.0 - lo if hi - lo < DEGENERACY_TOL else -(lo + hi) / 2.0
        shift += c
        lo2, hi2 = lo + c, hi + c
        radius2 = max(abs(lo2), abs(hi2))
        terms = tuple((hj / radius2, p) for hj, p in terms)
        shift /= radius2
    return PauliSum(terms, normalized=True, shift=shift)


def overlap_gamma(spec: SpectrumInfo, phi: np.ndarray) -> float:
    """|<psi_0|phi>| — the initial state's ground-state amplitude."""
    if phi.shape[0] != spec.eigenvectors.shape[0]:
        raise ValueError("dimension mismatch")
    return float(abs(np.vdot(spec.ground_state(), phi)))


def eigen_coefficients(spec: SpectrumInfo, phi: np.ndarray) -> np.ndarray:
    """Amplitudes c_j = <psi_j|phi> of a state in the eigenbasis."""
    if phi.shape[0] != spec.eigenvectors.shape[0]:
        raise ValueError("dimension mismatch")
    return spec.eigenvectors.conj().T @ phi
