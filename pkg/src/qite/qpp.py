"""Trigonometric-polynomial transformations F(U) of a unitary's eigenphases.

Two execution modes:

- ideal-block (default): F(U)|phi> = sum_k c_k U^k |phi>, built from iterated
  applications of U and its inverse — this is what all the analytic guarantees
  are stated against;
- comb mode: the explicit single-ancilla circuit interleaving ancilla
  rotations with controlled-U / controlled-U† blocks, whose ancilla-<0| block
  realizes F(U) up to a global phase once angles have been synthesized.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy.optimize import least_squares

from .approx import TrigPolynomial
from .states import StateVector

SUCCESS_PROB_FLOOR = 1e-300


class UnitaryEvaluator(Protocol):
    """Matrix-free access to U and U†; implementations count queries."""

    query_count: int

    def apply(self, amplitudes: np.ndarray) -> np.ndarray: ...

    def apply_inverse(self, amplitudes: np.ndarray) -> np.ndarray: ...


class DenseUnitary:
    """Evaluator backed by an explicit unitary matrix."""

    def __init__(self, matrix: np.ndarray, check: bool = True):
        matrix = np.asarray(matrix, dtype=complex)
        if check and np.linalg.norm(
            matrix.conj().T @ matrix - np.eye(matrix.shape[0])
        ) > 1e-10:
            raise ValueError("matrix is not unitary")
        self.matrix = matrix
        self.query_count = 0

    def apply(self, amplitudes):
        self.query_count += 1
        return self.matrix @ amplitudes

    def apply_inverse(self, amplitudes):
        self.query_count += 1
        return self.matrix.conj().T @ amplitudes


def apply_block(
    poly: TrigPolynomial, u: UnitaryEvaluator, phi: StateVector
) -> StateVector:
    """F(U)|phi> = sum_{k=-L}^{L} c_k U^k |phi>, without materializing powers.

    Uses exactly 2*degree queries to U/U† (degree forward iterates, degree
    backward). The output is generally unnormalized.
    """
    c = poly.coeffs
    deg = poly.degree
    acc = c[deg] * phi.amplitudes
    fwd = phi.amplitudes
    for k in range(1, deg + 1):
        fwd = u.apply(fwd)
        acc = acc + c[deg + k] * fwd
    bwd = phi.amplitudes
    for k in range(1, deg + 1):
        bwd = u.apply_inverse(bwd)
        acc = acc + c[deg - k] * bwd
    return StateVector(acc, normalized=False)


@dataclass(frozen=True)
class QPPComb:
    """Angle data of a 2L-slot comb: 2L+1 ancilla rotation pairs."""

    theta_y: tuple[float, ...]
    theta_z: tuple[float, ...]

    def __post_init__(self):
        if len(self.theta_y) != len(self.theta_z):
            raise ValueError("angle lists must have equal length")
        if len(self.theta_y) % 2 != 1:
            raise ValueError("a 2L-slot comb carries 2L+1 rotation pairs")

    @property
    def slots(self) -> int:
        return len(self.theta_y) - 1

    @property
    def degree(self) -> int:
        return self.slots // 2

    def to_json(self) -> str:
        return json.dumps(
            {
                "slots": self.slots,
                "theta_y": list(self.theta_y),
                "theta_z": list(self.theta_z),
            }
        )

    @staticmethod
    def from_json(text: str) -> "QPPComb":
        payload = json.loads(text)
        comb = QPPComb(tuple(payload["theta_y"]), tuple(payload["theta_z"]))
        if comb.slots != payload["slots"]:
            raise ValueError("slot count inconsistent with angle lists")
        return comb


def _rot_pair(theta_y: float, theta_z: float) -> np.ndarray:
    """A(thY, thZ) = Ry(thY) Rz(thZ) on one qubit."""
    cy, sy = math.cos(theta_y / 2.0), math.sin(theta_y / 2.0)
    ry = np.array([[cy, -sy], [sy, cy]], dtype=complex)
    ez = np.exp(-0.5j * theta_z)
    rz = np.diag([ez, ez.conjugate()])
    return ry @ rz


def _apply_ancilla(a: np.ndarray, amplitudes: np.ndarray) -> np.ndarray:
    half = amplitudes.shape[0] // 2
    top, bot = amplitudes[:half], amplitudes[half:]
    return np.concatenate([a[0, 0] * top + a[0, 1] * bot,
                           a[1, 0] * top + a[1, 1] * bot])


def apply_comb(
    comb: QPPComb, u: UnitaryEvaluator, joint: StateVector
) -> StateVector:
    """Apply the interleaved comb circuit to an ancilla+system state.

    Operator order (leftmost acts last):

        A(0) * prod_{l=1..L} [ diag(U†, I) A(2l-1) diag(I, U) A(2l) ]

    so the rightmost factor A(2L) is applied first.
    """
    half = joint.amplitudes.shape[0] // 2
    amps = joint.amplitudes.copy()
    for l in range(comb.degree, 0, -1):
        amps = _apply_ancilla(_rot_pair(comb.theta_y[2 * l], comb.theta_z[2 * l]), amps)
        amps = np.concatenate([amps[:half], u.apply(amps[half:])])  # diag(I, U)
        amps = _apply_ancilla(
            _rot_pair(comb.theta_y[2 * l - 1], comb.theta_z[2 * l - 1]), amps
        )
        amps = np.concatenate([u.apply_inverse(amps[:half]), amps[half:]])  # diag(U†, I)
    amps = _apply_ancilla(_rot_pair(comb.theta_y[0], comb.theta_z[0]), amps)
    return StateVector(amps, normalized=joint.normalized)


class _ScalarPhase:
    """1x1 'unitary' e^{ix} on a grid; lets the comb be evaluated as a scalar
    transfer function for angle synthesis."""

    def __init__(self, xs: np.ndarray):
        self.z = np.exp(1j * xs)
        self.query_count = 0

    def apply(self, amplitudes):
        return self.z * amplitudes

    def apply_inverse(self, amplitudes):
        return self.z.conjugate() * amplitudes


def comb_block_scalar(comb: QPPComb, xs: np.ndarray) -> np.ndarray:
    """<0| V(e^{ix}) |0> for each grid phase x (vectorized over the grid)."""
    u = _ScalarPhase(xs)
    top = np.ones_like(u.z)
    bot = np.zeros_like(u.z)

    def rot(idx, t, b):
        a = _rot_pair(comb.theta_y[idx], comb.theta_z[idx])
        return a[0, 0] * t + a[0, 1] * b, a[1, 0] * t + a[1, 1] * b

    for l in range(comb.degree, 0, -1):
        top, bot = rot(2 * l, top, bot)
        bot = u.apply(bot)
        top, bot = rot(2 * l - 1, top, bot)
        top = u.apply_inverse(top)
    top, _ = rot(0, top, bot)
    return top


@dataclass(frozen=True)
class SynthesisResult:
    comb: QPPComb
    residual: float
    global_phase: float


def synthesize_angles(
    poly: TrigPolynomial,
    grid_points: int = 512,
    tol: float = 1e-6,
    restarts: int = 4,
    seed: int = 7,
) -> SynthesisResult:
    """Numerically find comb angles whose <0| block matches F up to a phase.

    Least-squares over the 2(2L+1) rotation angles plus one global-phase
    parameter, on a uniform phase grid. For higher degrees a continuation
    strategy (fit truncations of F of increasing degree, reusing angles)
    keeps the optimizer out of bad basins. Non-convergence is reported with
    the residual rather than silently accepted.
    """
    if poly.sup_norm() > 1.0 - 1e-6:
        raise ValueError("synthesis needs headroom: require sup|F| <= 1 - 1e-6")
    rng = np.random.default_rng(seed)
    full_deg = poly.degree

    def solve(target_poly, x0):
        deg = target_poly.degree
        xs = np.linspace(-math.pi, math.pi, max(grid_points, 16 * deg + 16),
                         endpoint=False)
        fv = target_poly(xs)

        def residuals(params):
            n = 2 * deg + 1
            comb = QPPComb(tuple(params[:n]), tuple(params[n:2 * n]))
            diff = comb_block_scalar(comb, xs) - np.exp(-1j * params[-1]) * fv
            return np.concatenate([diff.real, diff.imag])

        sol = least_squares(residuals, x0, method="lm", xtol=1e-15, ftol=1e-15)
        err = float(np.max(np.abs(sol.fun.reshape(2, -1)[0]
                                  + 1j * sol.fun.reshape(2, -1)[1])))
        return sol.x, err

    def truncate(deg):
        lo = full_deg - deg
        return TrigPolynomial(poly.coeffs[lo:len(poly.coeffs) - lo])

    best_params, best_err = None, math.inf
    for attempt in range(restarts):
        scale = 0.3 * (attempt + 1)
        params = None
        try:
            if full_deg <= 2:
                n = 2 * full_deg + 1
                x0 = rng.normal(scale=scale, size=2 * n + 1)
                params, err = solve(poly, x0)
            else:
                # continuation: grow the target degree, recycling angles
                degs = sorted(set(list(range(2, full_deg, 2)) + [full_deg]))
                params, err = None, math.inf
                for deg in degs:
                    n = 2 * deg + 1
                    if params is None:
                        x0 = rng.normal(scale=scale, size=2 * n + 1)
                    else:
                        prev_n = (len(params) - 1) // 2
                        pad = n - prev_n
                        x0 = np.concatenate([
                            np.zeros(pad // 2), params[:prev_n], np.zeros(pad - pad // 2),
                            np.zeros(pad // 2), params[prev_n:-1], np.zeros(pad - pad // 2),
                            params[-1:],
                        ])
                    params, err = solve(truncate(deg), x0)
        except np.linalg.LinAlgError:
            continue
        if err < best_err:
            best_params, best_err = params, err
        if best_err <= tol:
            break
    if best_params is None or best_err > tol:
        raise RuntimeError(
            f"angle synthesis did not converge: residual {best_err:.3e} > {tol:.1e}"
        )
    n = 2 * full_deg + 1
    comb = QPPComb(tuple(best_params[:n]), tuple(best_params[n:2 * n]))
    return SynthesisResult(comb=comb, residual=best_err,
                           global_phase=float(best_params[-1]))


@dataclass(frozen=True)
class PostSelectResult:
    state: StateVector
    success_prob: float


def postselect_zero(joint: StateVector) -> PostSelectResult:
    """Project the ancilla (qubit 0) onto |0>, renormalize the system branch."""
    if joint.qubit_count < 2:
        raise ValueError("state has no ancilla qubit")
    half = joint.amplitudes.shape[0] // 2
    branch = joint.amplitudes[:half]
    prob = float(np.vdot(branch, branch).real)
    if prob < SUCCESS_PROB_FLOOR:
        raise ValueError("post-selection failed: ancilla-zero branch has no weight")
    return PostSelectResult(
        state=StateVector(branch / math.sqrt(prob)), success_prob=prob
    )
