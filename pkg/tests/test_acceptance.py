"""End-to-end acceptance checks for the full pipeline.

Each test covers one headline guarantee, prints exactly one PASS/FAIL line,
and enforces its wall-clock budget. Tolerances are stated inline.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from qite import approx, cli, ground_search as gs, ite, qpp, trotter
from qite.config import config_from_dict
from qite.pauli import (PauliString, PauliSum, build_heisenberg, diagonalize,
                        normalize)
from qite.states import StateVector, basis_state

ABS_L0 = 0.7735026918962575
GAMMA0 = 0.25  # |<psi_0|0000>|


@contextmanager
def criterion(name: str, budget_s: float):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"FAIL {name}")
        raise
    elapsed = time.monotonic() - start
    if elapsed > budget_s:
        print(f"FAIL {name} (runtime {elapsed:.1f}s > {budget_s}s)")
        raise AssertionError(f"runtime budget exceeded: {elapsed:.1f}s")
    print(f"PASS {name} ({elapsed:.1f}s)")


def random_model(seed, n=2):
    rng = np.random.default_rng(seed)
    labels = set()
    while len(labels) < 4:
        labels.add("".join(rng.choice(list("IXYZ"), size=n)))
    labels.discard("I" * n)
    terms = tuple((float(rng.normal()), PauliString(s)) for s in labels)
    return normalize(PauliSum(terms))


def random_state(seed, n=2):
    rng = np.random.default_rng(seed + 77)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(v / np.linalg.norm(v))


def test_success_probability_floor(h4, spec4):
    """Post-selection probability floor on the engineered gamma^2=0.5 state."""
    with criterion("success-probability floor", 10.0):
        tau = 20.0
        lam = ABS_L0 + 1.0 / (2.0 * tau)
        phi = ite.state_with_overlap(spec4, 0.5)
        res = ite.prepare_ite(h4, phi, tau, lam)
        assert res.eps_used <= 1e-4
        assert res.success_prob >= 0.85**2 * 0.5 * math.exp(-2.0) - res.eps_used


def test_lambda_sweep_shape(h4, spec4):
    """61-point lambda sweep: flat high-fidelity window, exponential success
    decay beyond it, fidelity collapse below |lambda_0|."""
    with criterion("lambda-sweep shape", 120.0):
        cfg = config_from_dict({"experiment": "lambda_sweep", "seed": 1})
        _, rows, _ = cli.run_lambda_sweep(cfg)
        assert len(rows) >= 60
        lams = np.array([r[0] for r in rows])
        infids = np.array([r[1] for r in rows])
        succs = np.array([r[2] for r in rows])
        window = (lams >= ABS_L0) & (lams <= ABS_L0 + 1.0 / 20.0)
        assert window.sum() >= 3
        assert np.max(infids[window]) <= 1e-3
        # exponential-decay fit on the far side of the window
        tail = lams > ABS_L0 + 2.0 / 20.0
        coeffs = np.polyfit(lams[tail], np.log(succs[tail]), 1)
        fit = np.exp(np.polyval(coeffs, lams[tail]))
        ratio = succs[tail] / fit
        assert np.all((ratio >= 1 / 1.5) & (ratio <= 1.5))
        # fidelity collapse below the window
        idx = int(np.argmin(np.abs(lams - (ABS_L0 - 0.1))))
        assert infids[idx] >= 10.0 * np.min(infids[window])


def test_tau_sweep_energy_convergence(h4, spec4, phi0):
    """Energies converge monotonically to the ground energy with success
    probabilities above their analytic floors."""
    with criterion("tau-sweep energy convergence", 300.0):
        cfg = config_from_dict({"experiment": "tau_sweep", "seed": 1})
        _, rows, _ = cli.run_tau_sweep(cfg)
        errors = [abs(r[1] - spec4.ground_energy) for r in rows]
        assert all(a >= b for a, b in zip(errors, errors[1:]))
        # tolerance from the overlap bound propagated through the spectrum
        assert errors[-1] <= 2.0 * math.exp(-2.0 * 50.0 * spec4.gap) / GAMMA0**2
        assert all(r[3] >= r[4] for r in rows)


def test_loss_estimator_unbiased():
    """Brute-force expectation over the complete outcome space equals the
    polynomial loss to 1e-10 on 25 random 2-qubit instances."""
    with criterion("loss-estimator unbiasedness", 60.0):
        for k in range(25):
            h = random_model(k)
            phi = random_state(k)
            sp = diagonalize(h)
            lam = min(abs(sp.ground_energy) + 0.1 + 0.02 * k, 1.0)
            tau = 5.0 + (k % 7)
            spec = approx.make_spec(tau, lam, 0.85)
            poly = approx.fourier_fit(spec, 250)
            want = gs.loss_exact(h, phi, spec, use_F=True, poly=poly)
            got = gs.loss_expectation_bruteforce(h, phi, spec, poly=poly)
            assert abs(got - want) <= 1e-10


def test_loss_step_identity():
    """loss(lam-delta) = e^{2 tau delta} loss(lam) to relative 1e-9 whenever
    lam-delta stays above |lambda_0|, over 50 random configurations."""
    with criterion("loss step identity", 60.0):
        rng = np.random.default_rng(2024)
        checked = 0
        seed = 0
        while checked < 50:
            seed += 1
            h = random_model(seed)
            sp = diagonalize(h)
            lam0 = abs(sp.ground_energy)
            if lam0 > 0.8:
                continue
            phi = random_state(seed)
            tau = float(rng.uniform(5.0, 30.0))
            lam = float(rng.uniform(lam0 + 0.1, 1.0))
            delta = float(rng.uniform(0.0, lam - lam0 - 0.05))
            la = gs.loss_exact(h, phi, approx.make_spec(tau, lam, 0.85))
            lb = gs.loss_exact(h, phi, approx.make_spec(tau, lam - delta, 0.85))
            assert lb == pytest.approx(math.exp(2.0 * tau * delta) * la,
                                       rel=1e-9)
            checked += 1


def test_product_formula_error_bound(h4):
    """Measured operator error under the analytic bound for every step count,
    with the expected ~1/N decay once N is large."""
    with criterion("product-formula error bound", 30.0):
        exact = ite.evolution_unitary(h4)
        L, Lam = h4.term_count, h4.max_abs_coeff
        errors = {}
        for n in (1, 4, 16, 64, 256):
            u = trotter.dense_plan(trotter.build_trotter(h4, 1.0, n))
            err = float(np.linalg.norm(u - exact, 2))
            assert err <= trotter.trotter_error_bound(L, Lam, 1.0, n)
            errors[n] = err
        assert 3.5 <= errors[16] / errors[64] <= 4.5
        assert 3.5 <= errors[64] / errors[256] <= 4.5


def test_exact_search_contract(h4, phi0):
    """Exact-loss adaptive search traps |lambda_0| within 1/tau_final inside
    the iteration cap."""
    with criterion("exact-loss search contract", 30.0):
        res = gs.run_adaptive_search(h4, phi0, 20.0, 2.5, 0.005, seed=7,
                                     exact_loss=True)
        assert ABS_L0 <= res.lam <= ABS_L0 + 1.0 / res.tau
        last = res.history[-1]
        assert last.lambda_r - last.lambda_l <= 1.0 / last.tau + 1e-12
        cap = math.ceil(math.log(4.0 * res.tau / 3.0) / math.log(1.5))
        assert len(res.history) <= cap


def test_sampled_search_convergence(h4, spec4, phi0):
    """Golden-seeded desk-scale run: the final confidence interval covers the
    ground energy and the log-error regression over cumulative queries is
    decreasing. Desk scale (1e6 shots) checks CI coverage and slope sign only,
    not absolute error."""
    with criterion("sampled search convergence", 1800.0):
        res = gs.run_adaptive_search(h4, phi0, 20.0, 2.5, 0.005,
                                     shots_override=10**6, seed=5)
        assert res.ci_low <= spec4.ground_energy <= res.ci_high
        xs = np.array([s.cumulative_queries for s in res.history], dtype=float)
        ys = np.array([abs(s.energy - spec4.ground_energy)
                       for s in res.history])
        keep = ys > 0
        slope = np.polyfit(xs[keep], np.log(ys[keep]), 1)[0]
        assert slope < 0
        assert len(res.history) <= 12


def test_polynomial_transform_equivalence():
    """Block evaluation matches the eigendecomposition formula to 1e-10; the
    synthesized-angle circuit matches the block to 1e-5 at low degree."""
    with criterion("polynomial transform equivalence", 120.0):
        rng = np.random.default_rng(31)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            dim = 2**n
            m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            q, r = np.linalg.qr(m)
            u_mat = q * (np.diag(r) / np.abs(np.diag(r)))
            deg = int(rng.integers(1, 7))
            poly = approx.TrigPolynomial(
                rng.normal(size=2 * deg + 1) + 1j * rng.normal(size=2 * deg + 1)
            )
            phi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            phi /= np.linalg.norm(phi)
            got = qpp.apply_block(poly, qpp.DenseUnitary(u_mat),
                                  StateVector(phi))
            evals, evecs = np.linalg.eig(u_mat)
            want = evecs @ (poly(np.angle(evals)) * np.linalg.solve(evecs, phi))
            assert np.max(np.abs(got.amplitudes - want)) <= 1e-10
        # comb mode at synthesizable degree
        for deg in (2, 8):
            c = rng.normal(size=2 * deg + 1) + 1j * rng.normal(size=2 * deg + 1)
            poly = approx.TrigPolynomial(c)
            poly = approx.TrigPolynomial(0.5 * poly.coeffs / poly.sup_norm())
            synth = qpp.synthesize_angles(poly)
            u_mat = ite.evolution_unitary(normalize(build_heisenberg(4)))
            phi = basis_state(4, 0)
            block = qpp.apply_block(poly, qpp.DenseUnitary(u_mat), phi)
            joint = StateVector(np.concatenate(
                [phi.amplitudes, np.zeros_like(phi.amplitudes)]
            ))
            out = qpp.apply_comb(synth.comb, qpp.DenseUnitary(u_mat), joint)
            branch = np.exp(1j * synth.global_phase) * out.amplitudes[:16]
            assert np.max(np.abs(branch - block.amplitudes)) <= 1e-5
