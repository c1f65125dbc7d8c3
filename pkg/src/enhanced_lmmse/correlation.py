"""Frequency-correlation vectors of the channel: construction, STO transforms,
estimation from pilots, and text serialization of candidate sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelModel, OfdmConfig, PilotObservation
from .errors import ConfigurationError, EstimationFailed

__all__ = [
    "PowerDelayProfile",
    "CorrelationVector",
    "ParameterSet",
    "StoDistribution",
    "pdp_to_correlation",
    "robust_correlation",
    "sto_shift_correlation",
    "sto_average_correlation",
    "estimate_correlation",
    "model_correlation",
    "detect_path_span",
]


@dataclass
class PowerDelayProfile:
    """Power per integer sample delay; normalized to unit total power."""

    powers: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.powers, dtype=float).ravel()
        if p.size == 0 or np.any(p < 0) or p.sum() <= 0:
            raise ValueError("PDP needs non-negative powers with positive sum")
        self.powers = p / p.sum()

    @classmethod
    def uniform(cls, first: int, last: int):
        """Flat profile over delays ``first..last`` inclusive."""
        if not 0 <= first <= last:
            raise ValueError(f"bad delay span [{first}, {last}]")
        p = np.zeros(last + 1)
        p[first:] = 1.0
        return cls(p)

    @property
    def length(self) -> int:
        return self.powers.size


@dataclass
class CorrelationVector:
    """``r[dk] = E[h[k + dk] h[k]^*]`` for lags ``dk = 0 .. len(r) - 1``."""

    label: str
    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=complex).ravel()
        if r.size == 0:
            raise ValueError("empty correlation vector")
        if abs(r[0].imag) > 1e-9 * max(1.0, abs(r[0])) or r[0].real <= 0:
            raise ValueError(f"{self.label}: r[0] must be real and positive, got {r[0]}")
        self.r = r

    def __len__(self):
        return self.r.size

    def relabel(self, label):
        return CorrelationVector(label, self.r.copy())


@dataclass
class ParameterSet:
    """Ordered candidate correlation vectors with unique labels."""

    candidates: list = field(default_factory=list)

    def __post_init__(self):
        self.candidates = list(self.candidates)
        if not self.candidates:
            raise ValueError("a parameter set needs at least one candidate")
        labels = [c.label for c in self.candidates]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate candidate labels in {labels}")
        n = {len(c) for c in self.candidates}
        if len(n) != 1:
            raise ValueError(f"candidates have different lengths {sorted(n)}")

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, i):
        return self.candidates[i]

    @property
    def labels(self):
        return [c.label for c in self.candidates]

    def index(self, label):
        return self.labels.index(label)

    def save(self, path):
        """One line per candidate: ``label,re0,im0,re1,im1,...``.

        Floats are written with ``repr`` so a load reproduces them exactly.
        """
        lines = []
        for c in self.candidates:
            if "," in c.label or "\n" in c.label:
                raise ValueError(f"label {c.label!r} cannot be serialized")
            parts = [c.label]
            for z in c.r:
                parts.append(repr(float(z.real)))
                parts.append(repr(float(z.imag)))
            lines.append(",".join(parts))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path):
        cands = []
        for line in Path(path).read_text().splitlines():
            if not line.strip():
                continue
            label, *nums = line.split(",")
            if len(nums) % 2:
                raise ValueError(f"odd number of values for candidate {label!r}")
            vals = np.array([float(x) for x in nums])
            cands.append(CorrelationVector(label, vals[0::2] + 1j * vals[1::2]))
        return cls(cands)


@dataclass
class StoDistribution:
    """Probability mass function of the timing offset (in samples)."""

    support: tuple
    pmf: tuple

    def __post_init__(self):
        self.support = tuple(int(s) for s in self.support)
        self.pmf = tuple(float(p) for p in self.pmf)
        if not self.support or len(self.support) != len(self.pmf):
            raise ValueError("support and pmf must be non-empty and aligned")
        if min(self.pmf) < 0 or abs(sum(self.pmf) - 1.0) > 1e-12:
            raise ValueError("pmf must be non-negative and sum to 1")

    @classmethod
    def uniform(cls, low=-10, high=0):
        support = tuple(range(low, high + 1))
        return cls(support, (1.0 / len(support),) * len(support))

    @classmethod
    def point(cls, theta):
        return cls((theta,), (1.0,))

    def sample(self, rng, size=None):
        return rng.choice(np.asarray(self.support), size=size, p=np.asarray(self.pmf))


def _lags(n_lags, config):
    n = config.n_lags if n_lags is None else int(n_lags)
    if not 1 <= n <= config.n_fft:
        raise ValueError(f"n_lags must lie in [1, {config.n_fft}]")
    return n


def pdp_to_correlation(pdp, config: OfdmConfig, label="pdp", n_lags=None) -> CorrelationVector:
    """Fourier pair of the PDP: ``r[dk] = sum_l p[l] exp(-2j pi dk l / n_fft)``."""
    if not isinstance(pdp, PowerDelayProfile):
        pdp = PowerDelayProfile(pdp)
    if pdp.length > config.n_fft:
        raise ConfigurationError("PDP longer than the FFT size")
    n = _lags(n_lags, config)
    r = np.fft.fft(pdp.powers, config.n_fft)[:n]
    r[0] = r[0].real
    return CorrelationVector(label, r)


def robust_correlation(tau_max_samples: int, config: OfdmConfig, label=None, n_lags=None) -> CorrelationVector:
    """Correlation of a flat PDP over delays ``0 .. tau_max_samples - 1``."""
    tau = int(tau_max_samples)
    if tau < 1 or tau > config.cp_len:
        raise ValueError(f"tau_max_samples must lie in [1, {config.cp_len}], got {tau}")
    return pdp_to_correlation(
        PowerDelayProfile.uniform(0, tau - 1), config, label or f"robust{tau}", n_lags
    )


def _sto_factor(theta, n, config):
    return np.exp(-2j * np.pi * theta * np.arange(n) / config.n_fft)


def sto_shift_correlation(r: CorrelationVector, theta: int, config: OfdmConfig, label=None) -> CorrelationVector:
    """Effective correlation under a fixed timing offset ``theta``."""
    out = r.r * _sto_factor(theta, len(r), config)
    return CorrelationVector(label or f"{r.label}@sto{theta:+d}", out)


def sto_average_correlation(r: CorrelationVector, dist: StoDistribution, config: OfdmConfig,
                            label=None) -> CorrelationVector:
    """Correlation averaged over the timing-offset distribution."""
    mult = np.zeros(len(r), dtype=complex)
    for theta, p in zip(dist.support, dist.pmf):
        mult += p * _sto_factor(theta, len(r), config)
    return CorrelationVector(label or f"{r.label}@sto-avg", r.r * mult)


def model_correlation(model: ChannelModel, config: OfdmConfig, n_lags=None) -> CorrelationVector:
    """Correlation implied by a tap table, with delays rounded to the sample grid."""
    return pdp_to_correlation(model.sampled_profile(config), config, model.name, n_lags)


def cir_estimates(observations, config: OfdmConfig) -> np.ndarray:
    """Time-domain channel estimates (M x n_fft), virtual carriers zero-filled."""
    spectra = np.zeros((len(observations), config.n_fft), dtype=complex)
    for m, obs in enumerate(observations):
        spectra[m, config.carriers] = obs.ls
    return np.fft.ifft(spectra, axis=1)


THRESHOLD_SPANS = ("cir", "cp")


def detect_path_span(observations, config: OfdmConfig, threshold_span="cir"):
    """Threshold path detection on the first ``cp_len`` CIR samples.

    The threshold is sqrt(2) times the mean CIR power, averaged jointly over
    symbols and delays; a delay is a path when its power averaged over the
    symbols exceeds it. ``threshold_span`` sets the delays entering that mean:
    ``"cir"`` uses every sample of the CIR estimate, ``"cp"`` only the
    scanned ``cp_len`` samples.

    Returns
    -------
    (first, last) : tuple of int
        Delays of the first and last detected path.
    """
    if len(observations) < 1:
        raise ValueError("need at least one observation")
    if threshold_span not in THRESHOLD_SPANS:
        raise ValueError(f"threshold_span must be one of {THRESHOLD_SPANS}")
    power = np.abs(cir_estimates(observations, config)) ** 2
    scanned = power[:, : config.cp_len]
    ref = power if threshold_span == "cir" else scanned
    threshold = np.sqrt(2.0) * ref.sum() / ref.size
    paths = np.flatnonzero(scanned.mean(axis=0) > threshold)
    if paths.size == 0:
        raise EstimationFailed("no CIR sample exceeds the detection threshold")
    return int(paths[0]), int(paths[-1])


def estimate_correlation(observations, config: OfdmConfig, label="estimated", n_lags=None,
                         threshold_span="cir") -> CorrelationVector:
    """Uniform-PDP correlation spanning the detected paths of ``observations``.

    Raises
    ------
    EstimationFailed
        If no delay passes the detection threshold.
    """
    first, last = detect_path_span(observations, config, threshold_span)
    return pdp_to_correlation(PowerDelayProfile.uniform(first, last), config, label, n_lags)
