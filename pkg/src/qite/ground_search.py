"""Ground-state search: loss functions, sampling estimator, and the adaptive
ternary search with its binary-search bootstrap.

The loss L(lambda) = <phi| f(U)† H f(U) |phi> (unnormalized filtered state)
jumps by a relative factor e^{2 tau delta} per lambda step while lambda stays
above |lambda_0| and freezes below it; the ternary search exploits that jump
to trap |lambda_0| while harvesting ground-energy samples on the side.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm as _gaussian

from . import approx
from .ite import evolution_unitary
from .pauli import PauliString, PauliSum, diagonalize, eigen_coefficients
from .states import StateVector

CONFIDENCE_LEVEL = 0.95
ITERATION_CAP = 200
DEFAULT_ALPHA = 0.85

_SINGLE_QUBIT_T = {
    # T sigma T† = Z for each non-identity axis
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),  # H
    "Y": np.array([[1, -1j], [1, 1j]], dtype=complex) / math.sqrt(2),  # H S†
}


@dataclass(frozen=True)
class LossEstimate:
    """One Monte-Carlo loss estimate plus its harvestable energy samples."""

    value: float
    shots_used: int
    ancilla_zero_samples: np.ndarray  # signed +-S values
    seed: int
    queries: int = 0  # total U/U† applications implied by the shots

    def __post_init__(self):
        arr = np.asarray(self.ancilla_zero_samples, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "ancilla_zero_samples", arr)
        if self.shots_used <= 0:
            raise ValueError("shots_used must be positive")


@dataclass
class SearchState:
    """One row of the ternary-search trace."""

    iteration: int
    tau: float
    lambda_l: float
    lambda_r: float
    delta: float
    r: float
    branch: str
    energy: float
    ci_low: float
    ci_high: float
    shots: int
    cumulative_queries: int


@dataclass(frozen=True)
class SearchResult:
    tau: float
    lam: float
    energy: float
    ci_low: float
    ci_high: float
    history: tuple[SearchState, ...]


def _sampling_terms(h: PauliSum) -> tuple[tuple[float, PauliString], ...]:
    """Terms of H including any recorded identity shift, so the estimator
    targets the full (shifted) operator."""
    terms = h.terms
    if h.shift:
        terms = terms + ((h.shift, PauliString("I" * h.qubit_count)),)
    return terms


def _filter_values(h: PauliSum, spec: approx.ApproxSpec, use_F: bool,
                   poly: approx.TrigPolynomial | None):
    """|filter|^2 evaluated at the eigenphases -lambda_j of U = e^{-iH}."""
    sp = diagonalize(h)
    x = -sp.eigenvalues
    if use_F:
        if poly is None:
            poly = _fit_for_loss(spec)
        vals = np.abs(poly(x)) ** 2
    else:
        vals = np.asarray(approx.target_g(x, spec)) ** 2
    return sp, vals


def _fit_for_loss(spec: approx.ApproxSpec, eps_target: float = 1e-6):
    if spec.degree > 0:
        return approx.fourier_fit(spec, spec.degree)
    poly, _ = approx.fit_to_tolerance(spec, eps_target)
    return poly


def loss_exact(
    h: PauliSum,
    phi: StateVector,
    spec: approx.ApproxSpec,
    use_F: bool = False,
    poly: approx.TrigPolynomial | None = None,
) -> float:
    """sum_j |c_j|^2 filter(-lambda_j)^2 lambda_j, in the eigenbasis.

    use_F=False evaluates the smooth target itself (exact arithmetic for the
    analytic identities); use_F=True evaluates the fitted polynomial (what a
    circuit would realize).
    """
    sp, vals = _filter_values(h, spec, use_F, poly)
    c = eigen_coefficients(sp, phi.amplitudes)
    return float(np.sum(np.abs(c) ** 2 * vals * sp.eigenvalues))


def energy_exact(h: PauliSum, phi: StateVector, spec: approx.ApproxSpec) -> float:
    """<H> on the normalized filtered state (the infinite-shot energy)."""
    sp, vals = _filter_values(h, spec, use_F=False, poly=None)
    c2 = np.abs(eigen_coefficients(sp, phi.amplitudes)) ** 2
    wsum = float(np.sum(c2 * vals))
    return float(np.sum(c2 * vals * sp.eigenvalues)) / wsum


def shot_budget(L: int, Lam: float, tau: float, B: float) -> int:
    """ceil(8 L Lam^2 tau^3 / B^2)."""
    if B <= 0:
        raise ValueError("B must be positive")
    return math.ceil(8.0 * L * Lam**2 * tau**3 / B**2)


def _apply_single(gate: np.ndarray, q: int, amps: np.ndarray, n: int) -> np.ndarray:
    psi = amps.reshape((2,) * n)
    psi = np.moveaxis(psi, q, 0).reshape(2, -1)
    psi = gate @ psi
    return np.moveaxis(psi.reshape((2,) * n), 0, q).reshape(-1)


def _outcome_distribution(
    h: PauliSum, phi: StateVector, spec: approx.ApproxSpec,
    poly: approx.TrigPolynomial | None,
):
    """Exact per-term outcome data for the estimation protocol.

    Returns (terms, S, success_prob, per-term list of (probs over system
    bitstrings with ancilla 0, signed outcome values +-1)).
    """
    sp, vals_sq = None, None
    sp = diagonalize(h)
    if poly is None:
        poly = _fit_for_loss(spec)
    c = eigen_coefficients(sp, phi.amplitudes)
    w = poly(-sp.eigenvalues) * c
    v = sp.eigenvectors @ w  # F(U)|phi> in the computational basis
    p0 = float(np.vdot(v, v).real)
    n = phi.qubit_count
    terms = _sampling_terms(h)
    per_term = []
    for hl, pstr in terms:
        u = v
        for q, axis in enumerate(pstr.ops):
            if axis in _SINGLE_QUBIT_T:
                u = _apply_single(_SINGLE_QUBIT_T[axis], q, u, n)
        probs = np.abs(u) ** 2
        # <b| T sigma T† |b> = product of Z eigenvalues on the support
        signs = np.ones(2**n)
        for q in pstr.support:
            bit = (np.arange(2**n) >> (n - 1 - q)) & 1
            signs *= 1.0 - 2.0 * bit
        per_term.append((probs, math.copysign(1.0, hl) * signs))
    return terms, p0, per_term


def loss_expectation_bruteforce(
    h: PauliSum, phi: StateVector, spec: approx.ApproxSpec,
    poly: approx.TrigPolynomial | None = None,
) -> float:
    """Expectation of the sampling estimator over the complete outcome space
    (term choice x measurement outcome), with no Monte-Carlo at all."""
    terms, _, per_term = _outcome_distribution(h, phi, spec, poly)
    S = sum(abs(hl) for hl, _ in terms)
    total = 0.0
    for (hl, _), (probs, signs) in zip(terms, per_term):
        weight = abs(hl) / S
        total += weight * float(np.sum(probs * S * signs))
        # the ancilla-1 bucket contributes X = 0
    return total


def estimate_loss(
    h: PauliSum,
    phi: StateVector,
    spec: approx.ApproxSpec,
    shots: int,
    seed: int,
    poly: approx.TrigPolynomial | None = None,
) -> LossEstimate:
    """Monte-Carlo loss estimation via importance-sampled Pauli terms.

    Term l is drawn with weight |h_l|/S; each draw measures the filtered
    joint state in the (per-term rotated) computational basis. A shot with
    ancilla 0 contributes +-S depending on the parity of the measured system
    bits on the term's support; ancilla-1 shots contribute 0. Outcome
    probabilities are exact; only measurement statistics are simulated.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    terms, p0, per_term = _outcome_distribution(h, phi, spec, poly)
    S = sum(abs(hl) for hl, _ in terms)
    rng = np.random.default_rng(seed)
    weights = np.array([abs(hl) for hl, _ in terms]) / S
    m_l = rng.multinomial(shots, weights)
    total = 0.0
    n_plus = n_minus = 0
    for ml, (probs, signs) in zip(m_l, per_term):
        if ml == 0:
            continue
        fail = max(1.0 - p0, 0.0)
        full = np.concatenate([probs, [fail]])
        full = full / full.sum()
        counts = rng.multinomial(int(ml), full)
        succ = counts[:-1]
        total += S * float(np.sum(succ * signs))
        n_plus += int(np.sum(succ[signs > 0]))
        n_minus += int(np.sum(succ[signs < 0]))
    samples = np.concatenate([
        np.full(n_plus, S), np.full(n_minus, -S)
    ])
    if spec.degree > 0:
        queries = 2 * spec.degree * shots
    elif poly is not None:
        queries = 2 * poly.degree * shots
    else:
        queries = 0
    return LossEstimate(
        value=total / shots,
        shots_used=shots,
        ancilla_zero_samples=samples,
        seed=seed,
        queries=queries,
    )


def agresti_coull_interval(
    successes: int, trials: int, confidence: float = CONFIDENCE_LEVEL
) -> tuple[float, float]:
    """Adjusted binomial proportion interval (add z^2/2 pseudo-counts)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    z = float(_gaussian.ppf(0.5 + confidence / 2.0))
    n_adj = trials + z**2
    p_adj = (successes + z**2 / 2.0) / n_adj
    half = z * math.sqrt(p_adj * (1.0 - p_adj) / n_adj)
    return max(0.0, p_adj - half), min(1.0, p_adj + half)


@dataclass(frozen=True)
class EnergyEstimate:
    """Energy from pooled ancilla-zero samples, with its confidence interval."""

    value: float
    ci_low: float
    ci_high: float
    sample_count: int


def energy_from_samples(samples: np.ndarray) -> EnergyEstimate:
    """Each sample is +-S; the mean estimates <H> on the post-selected state.

    The confidence interval is the Agresti-Coull interval on the fraction of
    +S outcomes, mapped affinely to the energy scale.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("no ancilla-zero samples to aggregate")
    S = float(np.max(np.abs(samples)))
    if S == 0.0:
        return EnergyEstimate(0.0, 0.0, 0.0, samples.size)
    n_plus = int(np.sum(samples > 0))
    lo, hi = agresti_coull_interval(n_plus, samples.size)
    return EnergyEstimate(
        value=float(np.mean(samples)),
        ci_low=S * (2.0 * lo - 1.0),
        ci_high=S * (2.0 * hi - 1.0),
        sample_count=samples.size,
    )


def ternary_decide(
    loss_lt: float, loss_r: float, tau: float, delta: float
) -> tuple[str, float]:
    """The interval-shrinking decision on the relative loss change.

    Returns ("left" | "right", r). "left" (lambda_l <- lambda_lt) fires when
    the relative change r = (loss_lt - loss_r)/loss_r deviates from the pure
    exponential prediction e^{4 tau delta} - 1 by more than the noise margin
    tau^{-1} (e^{4 tau delta} + 1), i.e. when lambda_lt has fallen below
    |lambda_0|; otherwise "right" (lambda_r <- lambda_rt).
    """
    if loss_r >= 0.0:
        raise ValueError("loss at lambda_r must be negative in the search region")
    r = (loss_lt - loss_r) / loss_r
    growth = math.exp(4.0 * tau * delta)
    if abs(r - (growth - 1.0)) > (growth + 1.0) / tau:
        return "left", r
    return "right", r


def convergence_test_X(history: list[EnergyEstimate]) -> bool:
    """True iff the two latest estimates sit inside each other's intervals."""
    if len(history) < 2:
        raise ValueError("need at least two energy estimates")
    a, b = history[-2], history[-1]
    return (a.ci_low <= b.value <= a.ci_high) and (b.ci_low <= a.value <= b.ci_high)


def _loss_evaluator(h, phi, alpha, eps_rule, need_poly):
    """Build a per-(tau, lambda) accessor for (spec, fitted polynomial).

    eps_rule maps tau -> fit tolerance. With need_poly=False (exact-loss
    mode) the expensive fit is skipped entirely and the polynomial slot is
    None; results are cached per (tau, lambda) either way.
    """
    cache: dict[tuple[float, float], tuple] = {}

    def get(tau, lam):
        key = (tau, lam)
        if key not in cache:
            spec = approx.make_spec(tau, lam, alpha)
            if need_poly:
                poly, spec = approx.fit_to_tolerance(spec, eps_rule(tau))
            else:
                poly = None
            cache[key] = (spec, poly)
        return cache[key]

    return get


@dataclass(frozen=True)
class BootstrapOutcome:
    """Raw result of the halving bootstrap plus its self-diagnostics."""

    value: float
    early_left: bool  # the left-end probe never crossed the -B threshold
    contract_ok: bool  # loss(value) <= -B < loss(value + 1/(2 tau))


def binary_search_halving(
    h: PauliSum,
    phi: StateVector,
    tau: float,
    B: float,
    seed: int = 0,
    shots: int | None = None,
    alpha: float = DEFAULT_ALPHA,
) -> BootstrapOutcome:
    """The halving bootstrap, transcribed branch-for-branch.

    Probe the right end, then the left end, then shrink with steps 1/2^i for
    i = 1..ceil(log2 tau); return lambda_r - 1/(2 tau). shots=None evaluates
    exact losses (infinite-shot surrogate).

    The branch structure assumes the loss magnitude decreases monotonically
    in lambda, which holds only while every eigenphase stays inside the
    exponential window (lambda >= |lambda_0|). Below |lambda_0| the smooth
    cutoff removes the ground component and the loss oscillates with the
    discrete spectrum, so on configurations with sizable |lambda_0| the
    left-end probe reads above -B and the early-left branch fires; callers
    should treat that as "bootstrap inconclusive", not as a located point.
    """
    get = _loss_evaluator(h, phi, alpha, lambda t: min(1e-5, B / (4.0 * t)),
                          need_poly=shots is not None)
    rng = np.random.default_rng(seed)

    def loss(lam):
        spec_fit, poly = get(tau, lam)
        if shots is None:
            return loss_exact(h, phi, spec_fit, use_F=False)
        return estimate_loss(
            h, phi, spec_fit, shots, int(rng.integers(2**63)), poly=poly
        ).value

    lam_l, lam_r = 1.0 / tau, 1.0 + 1.0 / tau
    early_left = False
    if loss(lam_r) <= -B:
        result = lam_r
    elif loss(lam_l) > -B:
        result = lam_l
        early_left = True
    else:
        i = 0
        while i <= math.ceil(math.log2(tau)):
            i += 1
            if loss(lam_l) > -B:
                lam_l, lam_r = lam_l - 1.0 / 2**i, lam_l
            else:
                lam_l, lam_r = lam_r - 1.0 / 2**i, lam_r
        result = lam_r - 1.0 / (2.0 * tau)
    probe = min(result + 1.0 / (2.0 * tau), 1.25)
    contract_ok = result > 0 and loss(result) <= -B < loss(probe)
    return BootstrapOutcome(value=result, early_left=early_left,
                            contract_ok=contract_ok)


def binary_search_start(
    h: PauliSum,
    phi: StateVector,
    tau: float,
    B: float,
    seed: int = 0,
    shots: int | None = None,
    alpha: float = DEFAULT_ALPHA,
) -> float:
    """Bootstrap the ternary search with an upper bound lambda_r > |lambda_0|.

    Runs the halving bootstrap first; if its diagnostics show it was
    inconclusive (early-left return or a failed threshold contract), falls
    back to the eigenphase-threshold bisection (the step-filter estimator),
    which needs no loss-monotonicity assumption, and returns that estimate
    plus the 1/(2 tau) safety shift.
    """
    outcome = binary_search_halving(h, phi, tau, B, seed=seed, shots=shots,
                                    alpha=alpha)
    if outcome.contract_ok and not outcome.early_left:
        return outcome.value
    from .ite import estimate_lambda_qpe

    warnings.warn(
        "halving bootstrap inconclusive (oscillatory loss below |lambda_0|); "
        "falling back to the step-filter threshold search"
    )
    return estimate_lambda_qpe(h, phi, precision=1.0 / (2.0 * tau),
                               seed=seed + 1)


def run_adaptive_search(
    h: PauliSum,
    phi: StateVector,
    tau0: float,
    dt: float,
    B: float,
    shots_override: int | None = None,
    seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    exact_loss: bool = False,
    budget_mode: str = "fixed",
    iteration_cap: int = ITERATION_CAP,
) -> SearchResult:
    """The full adaptive ternary search.

    Per iteration: trisect [lambda_l, lambda_r], estimate the losses at
    lambda_lt and lambda_r, decide the shrink direction from the relative
    change, harvest the ancilla-zero samples into the energy estimate E_i
    (right-shrink pools both estimates, left-shrink only the lambda_r one),
    then increment tau by dt. Terminates when the interval is below 1/tau and
    the convergence test passes.

    exact_loss=True replaces estimates by exact losses (infinite-shot
    surrogate); energies are then exact post-selected expectations with
    zero-width intervals and the convergence test is vacuously true.
    budget_mode "fixed" freezes the shot budget at the tau0 value; "adaptive"
    recomputes it with the current tau each iteration.
    """
    if budget_mode not in ("fixed", "adaptive"):
        raise ValueError("budget_mode must be 'fixed' or 'adaptive'")
    # fit error is negligible against the sampling noise; 1e-5 stays well
    # inside the reachable-degree range at every tau on the schedule
    eps_rule = lambda t: min(1e-5, B / (4.0 * t))
    get = _loss_evaluator(h, phi, alpha, eps_rule, need_poly=not exact_loss)
    rng = np.random.default_rng(seed)
    L, Lam = h.term_count, h.max_abs_coeff

    tau = tau0
    lam_l = 0.0
    lam_r = binary_search_start(
        h, phi, tau, B, seed=int(rng.integers(2**63)),
        shots=None if exact_loss else (shots_override or shot_budget(L, Lam, tau, B)),
        alpha=alpha,
    )
    history: list[EnergyEstimate] = []
    trace: list[SearchState] = []
    cumulative_queries = 0
    i = 0
    while lam_r - lam_l > 1.0 / tau or (
        not exact_loss and (len(history) < 2 or not convergence_test_X(history))
    ):
        if i >= iteration_cap:
            raise RuntimeError(f"iteration cap {iteration_cap} exceeded")
        if shots_override is not None:
            shots = shots_override
        else:
            shots = shot_budget(L, Lam, tau0 if budget_mode == "fixed" else tau, B)
        delta = (lam_r - lam_l) / 3.0
        lam_lt, lam_rt = lam_l + delta, lam_r - delta
        spec_lt, poly_lt = get(tau, lam_lt)
        spec_r, poly_r = get(tau, lam_r)
        if exact_loss:
            loss_lt = loss_exact(h, phi, spec_lt, use_F=False)
            loss_r = loss_exact(h, phi, spec_r, use_F=False)
            est_lt = est_r = None
        else:
            est_lt = estimate_loss(h, phi, spec_lt, shots,
                                   int(rng.integers(2**63)), poly=poly_lt)
            est_r = estimate_loss(h, phi, spec_r, shots,
                                  int(rng.integers(2**63)), poly=poly_r)
            loss_lt, loss_r = est_lt.value, est_r.value
            cumulative_queries += est_lt.queries + est_r.queries
        branch, r = ternary_decide(loss_lt, loss_r, tau, delta)
        if branch == "left":
            if exact_loss:
                energy = EnergyEstimate(energy_exact(h, phi, spec_r), 0.0, 0.0, 0)
            else:
                energy = energy_from_samples(est_r.ancilla_zero_samples)
            lam_l = lam_lt
        else:
            if exact_loss:
                # both trisection points sit above |lambda_0|; report the
                # lambda_r-filtered energy (the pools agree up to rescaling)
                energy = EnergyEstimate(energy_exact(h, phi, spec_r), 0.0, 0.0, 0)
            else:
                energy = energy_from_samples(np.concatenate([
                    est_lt.ancilla_zero_samples, est_r.ancilla_zero_samples
                ]))
            lam_r = lam_rt
        if exact_loss:
            energy = EnergyEstimate(energy.value, energy.value, energy.value, 0)
        history.append(energy)
        trace.append(SearchState(
            iteration=i, tau=tau, lambda_l=lam_l, lambda_r=lam_r, delta=delta,
            r=r, branch=branch, energy=energy.value, ci_low=energy.ci_low,
            ci_high=energy.ci_high, shots=0 if exact_loss else shots,
            cumulative_queries=cumulative_queries,
        ))
        tau += dt
        i += 1
    final = history[-1]
    return SearchResult(
        tau=tau, lam=lam_r, energy=final.value,
        ci_low=final.ci_low, ci_high=final.ci_high, history=tuple(trace),
    )
