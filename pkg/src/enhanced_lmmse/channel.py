"""Block-fading OFDM channel simulation.

Tapped-delay-line WSSUS channels are drawn from power delay profiles,
mapped onto the usable subcarriers, and observed through one block pilot
symbol with additive white Gaussian noise. Timing offset (STO) and
carrier frequency offset (CFO) impairments act on the frequency response.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "OfdmConfig",
    "ChannelModel",
    "ChannelRealization",
    "PilotObservation",
    "MODELS",
    "get_model",
    "load_model",
    "build_cir",
    "cir_to_cfr",
    "apply_sto",
    "apply_cfo",
    "observe_pilot",
    "pilot_sequence",
]


@dataclass(frozen=True)
class OfdmConfig:
    """Subcarrier grid of one OFDM symbol.

    ``usable`` holds the physical subcarrier indices in ``[0, n_fft)`` that
    carry pilots. Correlation lags are taken from differences of these
    indices, so gaps (the DC null) are handled exactly.
    """

    n_fft: int = 512
    cp_len: int = 128
    usable: tuple = ()
    sample_time: float = 1e-7

    def __post_init__(self):
        if self.n_fft <= 0 or self.cp_len <= 0:
            raise ConfigurationError("n_fft and cp_len must be positive")
        if self.cp_len >= self.n_fft:
            raise ConfigurationError("cp_len must be shorter than n_fft")
        if not self.usable:
            object.__setattr__(self, "usable", tuple(range(self.n_fft)))
        usable = tuple(int(k) for k in self.usable)
        object.__setattr__(self, "usable", usable)
        if any(b <= a for a, b in zip(usable, usable[1:])):
            raise ConfigurationError("usable carriers must be strictly increasing")
        if usable[0] < 0 or usable[-1] >= self.n_fft:
            raise ConfigurationError("usable carriers must lie in [0, n_fft)")
        if self.sample_time <= 0:
            raise ConfigurationError("sample_time must be positive")

    @classmethod
    def standard(cls, n_usable=408, n_fft=512, cp_len=128, sample_time=1e-7):
        """Grid with a nulled DC carrier and symmetric virtual band edges.

        DC sits at physical index ``n_fft // 2``; the lower band takes
        ``ceil(n_usable / 2)`` carriers directly below it and the upper band
        the rest directly above it.
        """
        if not 1 <= n_usable <= n_fft - 1:
            raise ConfigurationError(f"cannot fit {n_usable} usable carriers")
        dc = n_fft // 2
        lower = (n_usable + 1) // 2
        upper = n_usable - lower
        if lower > dc or upper > n_fft - dc - 1:
            raise ConfigurationError(f"cannot fit {n_usable} usable carriers")
        usable = tuple(range(dc - lower, dc)) + tuple(range(dc + 1, dc + 1 + upper))
        return cls(n_fft=n_fft, cp_len=cp_len, usable=usable, sample_time=sample_time)

    @property
    def carriers(self) -> np.ndarray:
        return np.asarray(self.usable, dtype=np.int64)

    @property
    def n_usable(self) -> int:
        return len(self.usable)

    @property
    def n_lags(self) -> int:
        """Number of correlation lags the usable set needs (span of indices)."""
        return self.usable[-1] - self.usable[0] + 1


@dataclass(frozen=True)
class ChannelModel:
    """Tap table of a tapped-delay-line channel (delays in seconds, powers in dB)."""

    name: str
    delays: tuple
    powers_db: tuple

    def __post_init__(self):
        delays = tuple(float(d) for d in self.delays)
        powers = tuple(float(p) for p in self.powers_db)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "powers_db", powers)
        if not delays:
            raise ConfigurationError(f"model {self.name!r} has no taps")
        if len(delays) != len(powers):
            raise ConfigurationError(f"model {self.name!r}: delay/power length mismatch")
        if delays[0] < 0 or any(b <= a for a, b in zip(delays, delays[1:])):
            raise ConfigurationError(
                f"model {self.name!r}: delays must be non-negative and strictly increasing"
            )

    @property
    def linear_powers(self) -> np.ndarray:
        """Tap powers in linear scale, normalized to unit sum."""
        p = 10.0 ** (np.asarray(self.powers_db) / 10.0)
        return p / p.sum()

    def sample_delays(self, sample_time: float) -> np.ndarray:
        """Tap delays rounded to the nearest sample."""
        return np.rint(np.asarray(self.delays) / sample_time).astype(np.int64)

    def sampled_profile(self, config: OfdmConfig) -> np.ndarray:
        """Normalized power per integer sample delay on ``config``'s grid.

        Taps that round to the same sample have their powers added.
        """
        lags = self.sample_delays(config.sample_time)
        if lags[-1] >= config.cp_len:
            raise ConfigurationError(
                f"model {self.name!r}: delay of {lags[-1]} samples does not fit "
                f"inside a {config.cp_len}-sample cyclic prefix"
            )
        profile = np.zeros(lags[-1] + 1)
        np.add.at(profile, lags, self.linear_powers)
        return profile


def _model(name, delays_ns, powers_db):
    return ChannelModel(name, tuple(d * 1e-9 for d in delays_ns), tuple(powers_db))


# Quantized at 100 ns: office_b -> {0,1,2,3,5,7}, pedestrian_a -> {0,1,2,4},
# pedestrian_b -> {0,2,8,12,23,37}.
MODELS = {
    m.name: m
    for m in (
        _model("office_b", (0, 100, 200, 300, 500, 700), (0, -3.6, -7.2, -10.8, -18.0, -25.5)),
        _model("pedestrian_a", (0, 110, 190, 410), (0, -9.7, -19.2, -22.8)),
        _model("pedestrian_b", (0, 200, 800, 1200, 2300, 3700), (0, -0.9, -4.9, -8.0, -7.8, -23.9)),
    )
}


def get_model(name: str) -> ChannelModel:
    try:
        return MODELS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown channel model {name!r}; known: {sorted(MODELS)}"
        ) from None


def load_model(path, name=None) -> ChannelModel:
    """Read a tap table with one ``delay_ns,power_db`` row per tap.

    Blank lines, ``#`` comments and a non-numeric header row are skipped.
    """
    path = Path(path)
    delays, powers = [], []
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields_ = [f.strip() for f in line.split(",")]
        if len(fields_) != 2:
            raise ConfigurationError(f"{path}: expected 'delay_ns,power_db', got {line!r}")
        try:
            d, p = float(fields_[0]), float(fields_[1])
        except ValueError:
            if not delays:
                continue  # header
            raise ConfigurationError(f"{path}: non-numeric row {line!r}") from None
        delays.append(d)
        powers.append(p)
    return _model(name or path.stem, delays, powers)


@dataclass
class ChannelRealization:
    """One channel impulse response on the sample grid."""

    gains: np.ndarray
    model: str
    seed_info: object = None


@dataclass
class PilotObservation:
    """One received block pilot symbol over the usable carriers."""

    cfr_true: np.ndarray
    pilot: np.ndarray
    received: np.ndarray
    noise_var: float
    ls: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.noise_var < 0:
            raise ValueError("noise_var must be non-negative")
        if self.ls is None:
            self.ls = self.received / self.pilot


def build_cir(model: ChannelModel, config: OfdmConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw independent complex Gaussian tap gains with the model's powers."""
    profile = model.sampled_profile(config)
    scale = np.sqrt(profile / 2.0)
    gains = scale * (rng.standard_normal(profile.size) + 1j * rng.standard_normal(profile.size))
    return ChannelRealization(gains=gains, model=model.name, seed_info=_provenance(rng))


def _provenance(rng):
    seq = getattr(rng.bit_generator, "seed_seq", None)
    return getattr(seq, "entropy", None), getattr(seq, "spawn_key", None)


def _steering(lags, carriers, n_fft):
    return np.exp(-2j * np.pi * np.outer(carriers, lags) / n_fft)


def cir_to_cfr(cir: ChannelRealization, config: OfdmConfig) -> np.ndarray:
    """Frequency response of ``cir`` at the usable carriers."""
    gains = np.asarray(cir.gains if isinstance(cir, ChannelRealization) else cir)
    if gains.size == 0:
        raise ValueError("empty impulse response")
    return _steering(np.arange(gains.size), config.carriers, config.n_fft) @ gains


def apply_sto(cfr: np.ndarray, theta: int, config: OfdmConfig) -> np.ndarray:
    """Phase ramp caused by a timing offset of ``theta`` samples."""
    return cfr * np.exp(-2j * np.pi * config.carriers * theta / config.n_fft)


def apply_cfo(observation: PilotObservation, phase: float, ici_var: float,
              rng: np.random.Generator | None = None) -> PilotObservation:
    """Common phase rotation plus inter-carrier interference modeled as white noise.

    The rotation is applied to the received samples (and to the effective
    frequency response); the ICI adds ``ici_var`` to the noise variance.
    """
    if ici_var < 0:
        raise ValueError("ici_var must be non-negative")
    rot = np.exp(1j * phase)
    received = observation.received * rot
    if ici_var > 0:
        if rng is None:
            raise ValueError("an rng is required to draw ICI noise")
        received = received + _cn(rng, received.size, ici_var)
    return PilotObservation(
        cfr_true=observation.cfr_true * rot,
        pilot=observation.pilot,
        received=received,
        noise_var=observation.noise_var + ici_var,
    )


def pilot_sequence(n: int, pilot_seed) -> np.ndarray:
    """Unit-modulus QPSK pilot sequence fixed by ``pilot_seed``."""
    idx = np.random.default_rng(pilot_seed).integers(0, 4, size=n)
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * idx))


def _cn(rng, n, var):
    return math.sqrt(var / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def snr_to_noise_var(snr_db: float) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    if not math.isfinite(snr_db):
        raise ValueError(f"invalid SNR {snr_db!r}")
    return 10.0 ** (-snr_db / 10.0)


def observe_pilot(cfr: np.ndarray, snr_db: float, pilot_seed, rng: np.random.Generator) -> PilotObservation:
    """Transmit a unit-modulus pilot through ``cfr`` at ``snr_db`` (unit signal power).

    ``snr_db = float('inf')`` disables the noise.
    """
    cfr = np.asarray(cfr, dtype=complex)
    noise_var = snr_to_noise_var(float(snr_db))
    pilot = pilot_sequence(cfr.size, pilot_seed)
    received = pilot * cfr
    if noise_var > 0:
        received = received + _cn(rng, cfr.size, noise_var)
    return PilotObservation(cfr_true=cfr, pilot=pilot, received=received, noise_var=noise_var)

