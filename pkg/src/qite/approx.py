"""Regularized exponential target and its trigonometric-polynomial fit.

The target on the physical window [-1, lam] is alpha * e^{tau (x - lam)} with
alpha = e^{-tau mu}. It is extended to a smooth 2*pi-periodic function g by a
compactly supported bump, then truncated Fourier series give the filter F.
Smoothness of g makes the truncation error decay super-polynomially until
64-bit rounding takes over, so sup errors around 1e-10 are the practical floor.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

SUP_CAP_SLACK = 1e-9
EPS_FLOOR = 1e-10
DEFAULT_OVERSAMPLE = 32
DEFAULT_GRID_POINTS = 10_000
DEGREE_CAP_FACTOR = 512  # smallest-degree search runs over [tau, 512*tau]
ALPHA_ASYMPTOTIC_FLOOR = math.exp(-0.5)


def alpha_lower_bound(tau: float) -> float:
    """Smallest admissible alpha at a given tau; decreases to e^{-1/2}."""
    ti = 1.0 / tau
    denom = (1.0 - ti) * math.e**2 - 2.0 * ti
    if denom <= 0.0:
        raise ValueError(f"tau={tau} too small for an admissible alpha")
    return math.sqrt((1.0 + ti) * math.e / denom)


def choose_mu(tau: float, alpha: float) -> float:
    """mu = -ln(alpha)/tau, after validating alpha against its lower bound."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if alpha > 1.0 or alpha <= alpha_lower_bound(tau):
        raise ValueError(
            f"alpha={alpha} outside the admissible range "
            f"({alpha_lower_bound(tau):.6f}, 1] at tau={tau}"
        )
    mu = -math.log(alpha) / tau
    if alpha == 1.0:
        warnings.warn("alpha=1 gives mu=0: zero-width ramps, fit quality degrades")
    assert mu <= 1.0 / tau + 1e-15
    return mu


def beta(z: float) -> float:
    """Smooth monotone ramp: 0 for z <= 0, 1 for z >= 1."""
    if z <= 0.0:
        return 0.0
    if z >= 1.0:
        return 1.0
    a = math.exp(-1.0 / z)
    b = math.exp(-1.0 / (1.0 - z))
    return a / (a + b)


def bump_rho(x: float, lam: float, mu: float) -> float:
    """Smooth cutoff: 1 on [-1, lam], ramps to 0 over width mu on both sides."""
    if -1.0 <= x <= lam:
        return 1.0
    if -1.0 - mu < x < -1.0:
        return beta((x + 1.0 + mu) / mu)
    if lam < x < lam + mu:
        return beta((lam + mu - x) / mu)
    return 0.0


@dataclass(frozen=True)
class ApproxSpec:
    """Parameters of the target alpha*e^{tau(x-lam)} and its measured fit.

    degree/eps are filled in by the fitting step; a fresh spec carries
    degree=0, eps=inf.
    """

    tau: float
    lam: float
    mu: float
    degree: int = 0
    eps: float = math.inf

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        # the physical window is lam <= 1, but the search bootstrap probes
        # losses at lam up to 1 + 1/tau, so a little headroom is allowed
        if not 0.0 < self.lam <= 1.25:
            raise ValueError("lam must lie in (0, 1.25]")
        if self.mu < 0 or self.mu * self.tau > 1.0 + 1e-12:
            raise ValueError("mu must lie in [0, 1/tau]")
        if self.mu == 0.0:
            warnings.warn("mu=0 boundary spec: bump ramps have zero width")
        alpha = math.exp(-self.tau * self.mu)
        if alpha <= ALPHA_ASYMPTOTIC_FLOOR:
            raise ValueError("implied alpha at or below the asymptotic floor")

    @property
    def alpha(self) -> float:
        return math.exp(-self.tau * self.mu)

    def f_exact(self, x) -> np.ndarray:
        """The ideal target alpha*e^{tau(x-lam)} on [-1, lam] (no bump)."""
        return self.alpha * np.exp(self.tau * (np.asarray(x, dtype=float) - self.lam))


def make_spec(tau: float, lam: float, alpha: float) -> ApproxSpec:
    return ApproxSpec(tau=tau, lam=lam, mu=choose_mu(tau, alpha))


def target_g(x, spec: ApproxSpec) -> np.ndarray:
    """Smooth periodic extension g(x) = rho(x) * e^{tau (x - lam - mu)}.

    Coincides with the ideal target on [-1, lam] and vanishes outside
    (-1-mu, lam+mu); |g| <= 1 everywhere.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    rho = np.array([bump_rho(v, spec.lam, spec.mu) for v in xs])
    out = np.zeros_like(xs)
    live = rho > 0.0
    out[live] = rho[live] * np.exp(spec.tau * (xs[live] - spec.lam - spec.mu))
    return out if np.ndim(x) else out[0]


@dataclass(frozen=True)
class TrigPolynomial:
    """F(x) = sum_{k=-L}^{L} c_k e^{ikx}, coefficients indexed -L..L."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if c.shape[0] % 2 != 1:
            raise ValueError("coefficient vector must have odd length 2L+1")

    @property
    def degree(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    def __call__(self, x) -> np.ndarray:
        """Evaluate by Horner's rule in z = e^{ix}: F = z^{-L} * sum c_m z^m."""
        z = np.exp(1j * np.asarray(x, dtype=float))
        acc = np.full_like(z, self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            acc = acc * z + c
        return acc * np.exp(-1j * self.degree * np.asarray(x, dtype=float))

    def values_on_circle(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """F at the uniform grid x_j = -pi + 2*pi*j/m, via one inverse FFT.

        Exact (not approximate): e^{ikx_j} depends on k only mod m, so placing
        the twiddled coefficients in an m-bin array and inverse-transforming
        reproduces the Horner values at every grid point.
        """
        ks = np.arange(-self.degree, self.degree + 1)
        d = np.zeros(m, dtype=complex)
        np.add.at(d, ks % m, self.coeffs * np.exp(-1j * math.pi * ks))
        xs = -math.pi + 2.0 * math.pi * np.arange(m) / m
        return xs, m * np.fft.ifft(d)

    def sup_norm(self, grid_points: int = DEFAULT_GRID_POINTS) -> float:
        m = max(grid_points, 4 * self.degree + 4)
        _, vals = self.values_on_circle(m)
        return float(np.max(np.abs(vals)))

    def to_json(self) -> str:
        return json.dumps(
            {
                "degree": self.degree,
                "coeffs": [[c.real, c.imag] for c in self.coeffs],
            }
        )

    @staticmethod
    def from_json(text: str) -> "TrigPolynomial":
        payload = json.loads(text)
        coeffs = np.array([complex(re, im) for re, im in payload["coeffs"]])
        poly = TrigPolynomial(coeffs)
        if poly.degree != payload["degree"]:
            raise ValueError("degree field inconsistent with coefficients")
        return poly


def fourier_fit(
    spec: ApproxSpec, degree: int, oversample: int = DEFAULT_OVERSAMPLE
) -> TrigPolynomial:
    """Truncated Fourier series of g via an FFT on an oversampled grid.

    c_k = (1/2pi) \\int g(x) e^{-ikx} dx, evaluated by the trapezoid rule on a
    uniform grid of at least `oversample * degree` points (the trapezoid rule
    on a periodic function is exactly a DFT). If the grid sup of the result
    exceeds 1 the coefficients are rescaled globally, preserving the
    trigonometric-polynomial form.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    m = max(oversample * degree, 4 * degree + 4)
    xs = -math.pi + 2.0 * math.pi * np.arange(m) / m
    gv = target_g(xs, spec)
    fft = np.fft.fft(gv) / m
    ks = np.arange(-degree, degree + 1)
    # grid starts at -pi, not 0, hence the e^{ik pi} twiddle
    coeffs = fft[ks % m] * np.exp(1j * math.pi * ks)
    poly = TrigPolynomial(coeffs)
    sup = poly.sup_norm()
    if sup > 1.0:
        poly = TrigPolynomial(coeffs / (sup * (1.0 + SUP_CAP_SLACK)))
    return poly


def sup_error(
    f_exact: Callable[[np.ndarray], np.ndarray],
    poly: TrigPolynomial,
    interval: tuple[float, float],
    grid_points: int = DEFAULT_GRID_POINTS,
) -> float:
    """Dense-grid sup of |f(x) - F(x)| on [a, b].

    The grid is the restriction of a fine uniform circle grid to [a, b]
    (at least `grid_points` samples inside the interval), so the polynomial
    can be evaluated with a single FFT even at high degree.
    """
    a, b = interval
    if not a < b:
        raise ValueError("empty interval")
    m = max(8 * poly.degree + 8, math.ceil(grid_points * 2.0 * math.pi / (b - a)))
    xs_all, vals = poly.values_on_circle(m)
    mask = (xs_all >= a) & (xs_all <= b)
    xs = xs_all[mask]
    return float(np.max(np.abs(np.asarray(f_exact(xs)) - vals[mask])))


def fit_to_tolerance(
    spec: ApproxSpec, eps_target: float, degree_cap: int | None = None
) -> tuple[TrigPolynomial, ApproxSpec]:
    """Find (nearly) the smallest degree whose fit meets eps_target on [-1, lam].

    Binary search over [tau, degree_cap]; returns the fitted polynomial and the
    spec updated with (degree, measured eps). If even the cap cannot reach the
    target the best fit is returned with its measured eps (reported, not
    fatal) — callers decide whether that is acceptable.
    """
    if eps_target < EPS_FLOOR:
        raise ValueError(
            f"eps_target={eps_target} below the 64-bit rounding floor {EPS_FLOOR}"
        )
    lo = max(1, math.ceil(spec.tau))
    hi = degree_cap or DEGREE_CAP_FACTOR * math.ceil(spec.tau)
    window = (-1.0, spec.lam)

    def measure(deg):
        poly = fourier_fit(spec, deg)
        return poly, sup_error(spec.f_exact, poly, window)

    poly_hi, eps_hi = measure(hi)
    if eps_hi > eps_target:
        warnings.warn(
            f"degree cap {hi} reaches eps={eps_hi:.3e} > target {eps_target:.3e}"
        )
        return poly_hi, replace(spec, degree=hi, eps=eps_hi)
    best, best_eps, best_deg = poly_hi, eps_hi, hi
    while lo < hi:
        mid = (lo + hi) // 2
        poly, eps = measure(mid)
        if eps <= eps_target:
            best, best_eps, best_deg = poly, eps, mid
            hi = mid
        else:
            lo = mid + 1
    return best, replace(spec, degree=best_deg, eps=best_eps)


def fit_report(
    spec: ApproxSpec, poly: TrigPolynomial, grid_points: int = DEFAULT_GRID_POINTS
) -> list[tuple[float, float, float, float]]:
    """Rows (x, f_exact, F, |diff|) over [-1, lam] for diagnostics/CSV dumps."""
    xs = np.linspace(-1.0, spec.lam, grid_points)
    fe = spec.f_exact(xs)
    fv = poly(xs)
    return [
        (float(x), float(f), float(np.real(v)), float(abs(f - v)))
        for x, f, v in zip(xs, fe, fv)
    ]
