"""Accuracy of the pairwise parameter comparison.

If the per-carrier index errors are independent complex Gaussians, the index
of a candidate with noise MSE ``s2`` is ``s2 / (2K)`` times a chi-square
variable with ``2K`` degrees of freedom. The worse of two candidates wins
with probability

    eps(alpha, K) = E[ F((1 - alpha) X) ],   X ~ chi2(2K),

where ``F`` is the chi-square CDF and ``alpha`` is the MSE gap scaled by the
worse candidate's noise MSE. The fuzzy bound is the ``alpha`` at which
``eps`` equals a target level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "regularized_gamma_p",
    "regularized_gamma_q",
    "chi2_cdf",
    "chi2_pdf",
    "adaptive_simpson",
    "false_comparison_probability",
    "fuzzy_bound",
    "average_gain_bound",
    "scaled_difference",
    "ComparisonTheoryQuery",
    "FalseComparisonResult",
    "empirical_false_comparison",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _log_prefactor(a, x):
    return a * math.log(x) - x - math.lgamma(a)


def _gamma_series(a, x):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(_log_prefactor(a, x))
    raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _gamma_continued_fraction(a, x):
    # Q(a, x) by modified Lentz on the Legendre continued fraction.
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(_log_prefactor(a, x))
    raise ArithmeticError(f"incomplete gamma fraction did not converge (a={a}, x={x})")


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma ``P(a, x)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 0.0
    if x < a + 1.0:
        return min(_gamma_series(a, x), 1.0)
    return max(1.0 - _gamma_continued_fraction(a, x), 0.0)


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if x < a + 1.0:
        return max(1.0 - _gamma_series(a, x), 0.0)
    return min(_gamma_continued_fraction(a, x), 1.0)


def chi2_cdf(x: float, dof: float) -> float:
    return regularized_gamma_p(0.5 * dof, 0.5 * x)


def chi2_pdf(x: float, dof: float) -> float:
    if x < 0:
        return 0.0
    k = 0.5 * dof
    if x == 0:
        return 0.5 if k == 1 else (math.inf if k < 1 else 0.0)
    return math.exp((k - 1.0) * math.log(x) - 0.5 * x - k * math.log(2.0) - math.lgamma(k))


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction (iterative)."""
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4 * fm + fb) / 6.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) * (flo + 4 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4 * frm + fhi) / 6.0
        delta = left + right - est
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    return total


def _window(dof):
    # Mean +- 12 sd, widened at small dof where the right tail is heavy.
    sd = math.sqrt(2.0 * dof)
    lo = max(0.0, dof - 12.0 * sd)
    hi = dof + 12.0 * sd
    while regularized_gamma_q(0.5 * dof, 0.5 * hi) > 1e-13:
        hi += 4.0 * sd + 8.0
    return lo, hi


def false_comparison_probability(alpha: float, k_len: int, tol: float = 1e-6) -> float:
    """Probability that the worse of two candidates gets the smaller index.

    Parameters
    ----------
    alpha : float
        MSE difference over the worse candidate's noise MSE, in ``[0, 1)``.
    k_len : int
        Number of carriers entering the index (chi-square dof is ``2 k_len``).
    tol : float
        Absolute quadrature tolerance.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if k_len < 1:
        raise ValueError("k_len must be at least 1")
    dof = 2.0 * k_len
    lo, hi = _window(dof)
    a = 0.5 * dof
    shrink = 1.0 - alpha

    def integrand(s):
        return regularized_gamma_p(a, 0.5 * shrink * s) * chi2_pdf(s, dof)

    # Split at the mode so both halves are unimodal-ish for the quadrature.
    mid = min(max(dof - 2.0, lo), hi)
    parts = [(lo, mid), (mid, hi)] if lo < mid < hi else [(lo, hi)]
    val = sum(adaptive_simpson(integrand, p, q, tol * 1e-3) for p, q in parts)
    return float(min(max(val, 0.0), 1.0))


def fuzzy_bound(epsilon0: float, k_len: int, xtol: float = 1e-5) -> float:
    """Scaled MSE gap at which the false-comparison probability equals ``epsilon0``."""
    if not 0.0 < epsilon0 < 0.5:
        raise ValueError(f"epsilon0 must lie in (0, 0.5), got {epsilon0}")
    lo, hi = 0.0, 1.0 - 1e-12
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if false_comparison_probability(mid, k_len, tol=1e-8) > epsilon0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def average_gain_bound(bound_b: float, epsilon0: float) -> float:
    """Lower bound ``B (2 eps0 - 1)`` on the average scaled MSE change of selection."""
    if bound_b < 0:
        raise ValueError("bound must be non-negative")
    if not 0.0 < epsilon0 <= 0.5:
        raise ValueError("epsilon0 must lie in (0, 0.5]")
    return bound_b * (2.0 * epsilon0 - 1.0)


def scaled_difference(sigma1_sq: float, sigma2_sq: float) -> float:
    """``alpha`` from the two noise MSEs (better first)."""
    if not 0 < sigma1_sq <= sigma2_sq:
        raise ValueError("need 0 < sigma1_sq <= sigma2_sq")
    return (sigma2_sq - sigma1_sq) / sigma2_sq


@dataclass(frozen=True)
class ComparisonTheoryQuery:
    """A pairwise comparison described by its scaled gap and sequence length."""

    alpha: float
    k_len: int
    sigma1_sq: float | None = None
    sigma2_sq: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if self.k_len < 1:
            raise ValueError("k_len must be at least 1")
        if self.sigma1_sq is not None and self.sigma2_sq is not None:
            if not math.isclose(self.alpha, scaled_difference(self.sigma1_sq, self.sigma2_sq),
                                rel_tol=1e-9, abs_tol=1e-12):
                raise ValueError("alpha does not match the noise MSEs")

    @classmethod
    def from_noise_mse(cls, sigma1_sq, sigma2_sq, k_len):
        lo, hi = sorted((sigma1_sq, sigma2_sq))
        return cls(scaled_difference(lo, hi), k_len, lo, hi)

    @property
    def epsilon(self):
        return false_comparison_probability(self.alpha, self.k_len)


@dataclass
class FalseComparisonResult:
    frequency: float
    theoretical: float
    alpha: float
    k_len: int
    trials: int
    better: str
    worse: str
    snr_db: float

    @property
    def standard_error(self):
        p = self.frequency
        return math.sqrt(max(p * (1 - p), 1e-12) / self.trials)


def empirical_false_comparison(omega, model, snr_db, config, trials, seed=0, method="split", pilot_seed=0):
    """Fraction of trials where selection picks the worse of two candidates.

    The better candidate is the one with the lower expected index on
    ``model`` at this SNR; the theoretical probability for the same
    ``(alpha, K)`` is reported alongside.
    """
    from .channel import build_cir, cir_to_cfr, get_model, observe_pilot, snr_to_noise_var
    from .correlation import model_correlation
    from .experiments import substream
    from .selector import FilterBank, expected_index

    if len(omega) != 2:
        raise ValueError("need exactly two candidates")
    model = get_model(model) if isinstance(model, str) else model
    noise_var = snr_to_noise_var(snr_db)
    r_true = model_correlation(model, config)
    s = [expected_index(c, r_true, noise_var, config, method) for c in omega]
    better = int(np.argmin(s))
    worse = 1 - better
    alpha = scaled_difference(s[better], s[worse])
    bank = FilterBank(omega, noise_var, config, method)
    wrong = 0
    for t in range(trials):
        rng = substream(seed, t, "channel")
        cfr = cir_to_cfr(build_cir(model, config, rng), config)
        obs = observe_pilot(cfr, snr_db, pilot_seed, substream(seed, t, "noise"))
        wrong += bank.select(obs.ls).chosen_index == worse
    return FalseComparisonResult(
        frequency=wrong / trials,
        theoretical=false_comparison_probability(alpha, config.n_usable),
        alpha=alpha,
        k_len=config.n_usable,
        trials=trials,
        better=omega[better].label,
        worse=omega[worse].label,
        snr_db=snr_db,
    )
