"""Candidate scoring by sampled noise MSE and the self-selecting LMMSE estimator.

The evaluation index of a candidate correlation is the mean squared gap
between each carrier's LS estimate and its MMSE interpolation from other
carriers, computed with that candidate. ``full`` interpolates every carrier
from all the others; ``split`` interpolates the even-position carriers from
the odd-position ones and vice versa.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import OfdmConfig, PilotObservation
from .correlation import CorrelationVector, ParameterSet
from .errors import NumericalError, SelectionError
from .estimators import HermitianFactor, correlation_matrix, lmmse_filter, lmmse_matrix

__all__ = [
    "METHODS",
    "SelectionReport",
    "split_groups",
    "evaluation_index_full",
    "evaluation_index_split",
    "evaluation_index",
    "expected_index",
    "select_parameters",
    "enhanced_lmmse",
    "FilterBank",
]

METHODS = ("full", "split")


@dataclass
class SelectionReport:
    chosen_label: str
    chosen_index: int
    xi: np.ndarray
    method: str
    labels: tuple = ()
    failed: tuple = field(default_factory=tuple)

    @staticmethod
    def csv_header(labels):
        return ["trial", "method", "chosen_label", *labels]

    def to_csv_row(self, trial_id):
        return [str(trial_id), self.method, self.chosen_label, *(repr(float(x)) for x in self.xi)]

    @classmethod
    def from_csv_row(cls, row, labels):
        _, method, chosen, *xs = row
        xi = np.array([float(x) for x in xs])
        labels = tuple(labels)
        return cls(chosen, labels.index(chosen), xi, method, labels,
                   tuple(l for l, x in zip(labels, xi) if np.isinf(x)))


def split_groups(config: OfdmConfig):
    """Physical indices of the even-position and odd-position usable carriers."""
    k = config.carriers
    return k[0::2], k[1::2]


def _check_method(method):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def _full_residual_operator(r, noise_var, config):
    # Leave-one-out residual of a Gaussian vector with covariance A = R + s I:
    # y_k - E[y_k | y_-k] = (A^-1 y)_k / (A^-1)_kk, so one inverse serves all k.
    k = config.carriers
    prec = HermitianFactor(correlation_matrix(r, k) + noise_var * np.eye(k.size)).inverse()
    return prec / np.real(np.diag(prec))[:, None]


def _split_weights(r, noise_var, config):
    g1, g2 = split_groups(config)
    out = []
    for tgt, src in ((g1, g2), (g2, g1)):
        cross = correlation_matrix(r, tgt, src)
        fac = HermitianFactor(correlation_matrix(r, src) + noise_var * np.eye(src.size))
        out.append(fac.solve(cross.conj().T).conj().T)
    return tuple(out)


def evaluation_index_full(obs: PilotObservation, r, config: OfdmConfig) -> float:
    """Sampled noise MSE with leave-one-carrier-out interpolation."""
    if config.n_usable < 2:
        raise ValueError("the full index needs at least two carriers")
    op = _full_residual_operator(r, obs.noise_var, config)
    return float(np.mean(np.abs(op @ obs.ls) ** 2))


def evaluation_index_split(obs: PilotObservation, r, config: OfdmConfig) -> float:
    """Sampled noise MSE with the two-group interleaved interpolation."""
    if config.n_usable < 4:
        raise ValueError("the split index needs at least four carriers")
    w1, w2 = _split_weights(r, obs.noise_var, config)
    y1, y2 = obs.ls[0::2], obs.ls[1::2]
    err = np.sum(np.abs(w1 @ y2 - y1) ** 2) + np.sum(np.abs(w2 @ y1 - y2) ** 2)
    return float(err / config.n_usable)


def evaluation_index(obs, r, config, method="split") -> float:
    _check_method(method)
    if method == "full":
        return evaluation_index_full(obs, r, config)
    return evaluation_index_split(obs, r, config)


def expected_index(r_used, r_true, noise_var, config, method="split") -> float:
    """Expectation of the evaluation index (interpolation MSE plus LS noise).

    Designed with ``r_used``, evaluated on a channel whose correlation is
    ``r_true``.
    """
    _check_method(method)
    k = config.carriers
    a_true = correlation_matrix(r_true, k) + noise_var * np.eye(k.size)
    if method == "full":
        op = _full_residual_operator(r_used, noise_var, config)
        return float(np.mean(np.real(np.einsum("ij,jk,ik->i", op, a_true, op.conj()))))
    w1, w2 = _split_weights(r_used, noise_var, config)
    n1 = w1.shape[0]
    # Residual operator rows: group 1 -> [-I, w1], group 2 -> [w2, -I] in (g1, g2) order.
    order = np.concatenate([np.arange(0, k.size, 2), np.arange(1, k.size, 2)])
    a = a_true[np.ix_(order, order)]
    top = np.hstack([-np.eye(n1), w1])
    bottom = np.hstack([w2, -np.eye(w2.shape[0])])
    op = np.vstack([top, bottom])
    return float(np.mean(np.real(np.einsum("ij,jk,ik->i", op, a, op.conj()))))


def select_parameters(obs: PilotObservation, omega: ParameterSet, method="split",
                      config: OfdmConfig = None) -> SelectionReport:
    """Score every candidate and pick the smallest index (first one on ties)."""
    _check_method(method)
    if len(omega) == 0:
        raise ValueError("empty parameter set")
    xi = np.empty(len(omega))
    failed = []
    for n, cand in enumerate(omega):
        try:
            xi[n] = evaluation_index(obs, cand, config, method)
        except NumericalError:
            xi[n] = np.inf
            failed.append(cand.label)
    return _report(xi, omega.labels, method, failed)


def _report(xi, labels, method, failed=()):
    if not np.any(np.isfinite(xi)):
        raise SelectionError("every candidate failed")
    i = int(np.argmin(xi))
    return SelectionReport(labels[i], i, xi, method, tuple(labels), tuple(failed))


def enhanced_lmmse(obs: PilotObservation, omega: ParameterSet, method="split", config: OfdmConfig = None):
    """Select a correlation from ``omega`` and LMMSE-filter with it.

    Returns
    -------
    estimate : ndarray
    report : SelectionReport
    """
    report = select_parameters(obs, omega, method, config)
    est = lmmse_filter(obs.ls, omega[report.chosen_index], obs.noise_var, config)
    return est, report


class FilterBank:
    """Precomputed index operators and LMMSE filters for one parameter set at
    one noise variance.

    The operators only depend on the candidates and the noise variance, so a
    Monte Carlo campaign builds them once per SNR point and reuses them for
    every trial. Candidates whose factorization fails are scored ``inf``.
    """

    def __init__(self, omega: ParameterSet, noise_var: float, config: OfdmConfig, method="split"):
        _check_method(method)
        self.omega = omega
        self.noise_var = float(noise_var)
        self.config = config
        self.method = method
        self._ops = {}
        self._filters = {}
        self.failed = []
        for n, cand in enumerate(omega):
            try:
                if method == "full":
                    self._ops[n] = _full_residual_operator(cand, noise_var, config)
                else:
                    self._ops[n] = _split_weights(cand, noise_var, config)
            except NumericalError:
                self.failed.append(cand.label)

    def indexes(self, ls) -> np.ndarray:
        """Evaluation index of every candidate for one LS vector."""
        ls = np.asarray(ls)
        xi = np.full(len(self.omega), np.inf)
        y1, y2 = ls[0::2], ls[1::2]
        for n, op in self._ops.items():
            if self.method == "full":
                xi[n] = np.mean(np.abs(op @ ls) ** 2)
            else:
                w1, w2 = op
                xi[n] = (np.sum(np.abs(w1 @ y2 - y1) ** 2)
                         + np.sum(np.abs(w2 @ y1 - y2) ** 2)) / ls.size
        return xi

    def select(self, ls) -> SelectionReport:
        return _report(self.indexes(ls), self.omega.labels, self.method, self.failed)

    def filter_matrix(self, n):
        if n not in self._filters:
            self._filters[n] = lmmse_matrix(self.omega[n], self.noise_var, self.config)
        return self._filters[n]

    def estimate(self, ls):
        report = self.select(ls)
        return self.filter_matrix(report.chosen_index) @ ls, report

