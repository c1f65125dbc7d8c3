"""Linear channel estimators on a block pilot symbol.

All correlation matrices are assembled from a lag vector ``r`` using the
physical carrier indices, so non-contiguous carrier sets need no special
handling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NumericalError

__all__ = [
    "JITTER_LADDER",
    "CorrelationMatrixView",
    "correlation_matrix",
    "HermitianFactor",
    "factorize",
    "hermitian_solve",
    "ls_estimate",
    "lmmse_filter",
    "lmmse_matrix",
    "mmse_interpolate",
    "interpolation_mse_theoretical",
    "empirical_mse",
    "is_psd_extendable",
]

JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)


def _lag_values(r):
    return np.asarray(getattr(r, "r", r), dtype=complex)


def correlation_matrix(r, rows, cols=None) -> np.ndarray:
    """``E[h_rows h_cols^H]`` from lag vector ``r`` and physical carrier indices."""
    r = _lag_values(r)
    rows = np.asarray(rows, dtype=np.int64)
    cols = rows if cols is None else np.asarray(cols, dtype=np.int64)
    d = rows[:, None] - cols[None, :]
    span = np.abs(d)
    if span.size and span.max() >= r.size:
        raise ValueError(
            f"correlation vector has {r.size} lags but carriers span {span.max() + 1}"
        )
    vals = r[span]
    return np.where(d >= 0, vals, vals.conj())


@dataclass
class CorrelationMatrixView:
    """Rows/columns of the autocorrelation matrix selected by carrier index."""

    source: object
    row_indices: np.ndarray
    col_indices: np.ndarray = None

    def toarray(self) -> np.ndarray:
        return correlation_matrix(self.source, self.row_indices, self.col_indices)


class HermitianFactor:
    """Cholesky factor of a Hermitian PSD matrix with diagonal jitter escalation.

    The jitter tried is ``eps * trace(A) / n`` for ``eps`` in
    :data:`JITTER_LADDER`; the ``eps`` that succeeded is kept in
    :attr:`jitter`.
    """

    def __init__(self, a, herm_tol=1e-10):
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        scale = max(np.abs(a).max(initial=0.0), 1.0)
        if np.abs(a - a.conj().T).max(initial=0.0) > herm_tol * scale:
            raise ValueError("matrix is not Hermitian")
        n = a.shape[0]
        load = np.real(np.trace(a)) / max(n, 1)
        if load <= 0:
            load = 1.0
        for eps in JITTER_LADDER:
            trial = a + (eps * load) * np.eye(n) if eps else a
            try:
                self._cho = linalg.cho_factor(trial, lower=True, check_finite=False)
            except linalg.LinAlgError:
                continue
            if np.all(np.isfinite(self._cho[0])):
                self.jitter = eps
                self.n = n
                return
        raise NumericalError("Cholesky failed at every jitter level")

    def solve(self, b):
        return linalg.cho_solve(self._cho, b, check_finite=False)

    def inverse(self):
        return self.solve(np.eye(self.n, dtype=self._cho[0].dtype))


def factorize(a) -> HermitianFactor:
    return HermitianFactor(a)


def hermitian_solve(a, b):
    """Solve ``a x = b`` for Hermitian PSD ``a`` (jittered if near-singular)."""
    return HermitianFactor(a).solve(b)


def ls_estimate(received, pilot) -> np.ndarray:
    pilot = np.asarray(pilot)
    if np.any(pilot == 0):
        raise ValueError("pilot has a zero entry")
    return np.asarray(received) / pilot


def _loaded(r, rows, noise_var):
    a = correlation_matrix(r, rows)
    if noise_var:
        a = a + noise_var * np.eye(len(rows))
    return a


def lmmse_matrix(r, noise_var, config) -> np.ndarray:
    """Filter matrix ``R (R + noise_var I)^-1`` over the usable carriers."""
    if noise_var < 0:
        raise ValueError("noise_var must be non-negative")
    k = config.carriers
    if noise_var == 0:
        return np.eye(k.size, dtype=complex)
    rhh = correlation_matrix(r, k)
    # R and (R + s I) commute, so R (R + s I)^-1 = ((R + s I)^-1 R)^H with R Hermitian.
    return HermitianFactor(rhh + noise_var * np.eye(k.size)).solve(rhh).conj().T


def lmmse_filter(ls, r, noise_var, config) -> np.ndarray:
    """LMMSE smoothing of the LS estimates with correlation ``r``.

    With ``noise_var == 0`` the LS estimate is already exact and is
    returned unchanged.
    """
    ls = np.asarray(ls, dtype=complex)
    if noise_var < 0:
        raise ValueError("noise_var must be non-negative")
    if ls.size != config.n_usable:
        raise ValueError("ls length does not match the usable carriers")
    if noise_var == 0:
        return ls.copy()
    k = config.carriers
    rhh = correlation_matrix(r, k)
    x = HermitianFactor(rhh + noise_var * np.eye(k.size)).solve(ls)
    return rhh @ x


def _others(target_pos, config, others_pos):
    if others_pos is None:
        k = config.carriers
        if target_pos not in config.usable:
            raise ValueError(f"carrier {target_pos} is not usable")
        return k[k != target_pos]
    return np.asarray(others_pos, dtype=np.int64)


def interpolation_weights(r, noise_var, target_pos, others_pos):
    """Row vector ``w`` with ``h_target ~ w @ ls_others``."""
    target = np.atleast_1d(np.asarray(target_pos, dtype=np.int64))
    cross = correlation_matrix(r, target, others_pos)
    fac = HermitianFactor(_loaded(r, others_pos, noise_var))
    # w = cross A^-1  <=>  w^H = A^-1 cross^H
    return fac.solve(cross.conj().T).conj().T


def mmse_interpolate(ls_others, target_pos, r, noise_var, config, others_pos=None):
    """MMSE interpolation of one carrier from the LS values of the others.

    By default the others are all usable carriers except ``target_pos``, in
    increasing order, matching the layout of ``ls_others``.
    """
    others = _others(target_pos, config, others_pos)
    ls_others = np.asarray(ls_others, dtype=complex)
    if ls_others.size != others.size:
        raise ValueError("ls_others does not match the observed carriers")
    w = interpolation_weights(r, noise_var, target_pos, others)
    return complex((w @ ls_others)[0])


def interpolation_mse_theoretical(r_used, r_true, noise_var, target_pos, config, others_pos=None) -> float:
    """MSE of interpolating ``target_pos`` with weights designed from ``r_used``
    when the channel actually has correlation ``r_true``."""
    others = _others(target_pos, config, others_pos)
    target = np.array([target_pos], dtype=np.int64)
    w = interpolation_weights(r_used, noise_var, target, others)[0]
    c = correlation_matrix(r_true, others, target)[:, 0]
    a_true = _loaded(r_true, others, noise_var)
    r0 = _lag_values(r_true)[0].real
    mse = r0 - 2.0 * np.real(w @ c) + np.real(w @ a_true @ w.conj())
    return float(max(mse, 0.0))


def empirical_mse(estimate, truth) -> float:
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise ValueError("shape mismatch")
    return float(np.mean(np.abs(estimate - truth) ** 2))


def is_psd_extendable(r, config=None, carriers=None, tol=1e-8) -> bool:
    """Whether the Hermitian Toeplitz matrix built from ``r`` is PSD within ``tol``
    (relative to its largest eigenvalue)."""
    vals = _lag_values(r)
    if carriers is None:
        carriers = config.carriers if config is not None else np.arange(vals.size)
    eig = np.linalg.eigvalsh(correlation_matrix(vals, carriers))
    return bool(eig[0] >= -tol * max(eig[-1], 1e-300))
