"""Monte Carlo campaigns comparing channel estimators on block pilots.

A campaign runs one scenario over an SNR grid. Each trial is one pilot
transmission; consecutive transmissions are grouped into stationary periods
of ``stationary_period_M`` symbols over which the correlation is estimated.
The channel model and timing offset are drawn once per coherence block
(``coherence_block`` symbols, by default one period) and the tap gains are
redrawn per symbol. All randomness of trial ``t`` (and of block ``b``) comes
from substreams keyed by ``(master_seed, t)`` (``(master_seed, b)``), so
results do not depend on how many trials are run after it or in what order.

Timing offsets follow the receiver's view: an offset ``theta < 0`` places the
FFT window ``|theta|`` samples early, inside the cyclic prefix, so the channel
appears delayed by ``|theta|`` samples. Its phase ramp is
``apply_sto(cfr, -theta)`` and its correlation ``sto_shift_correlation(r, -theta)``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (MODELS, OfdmConfig, apply_sto, build_cir, cir_to_cfr, get_model,
                      observe_pilot, snr_to_noise_var)
from .correlation import (CorrelationVector, ParameterSet, StoDistribution, estimate_correlation,
                          model_correlation, robust_correlation, sto_average_correlation,
                          sto_shift_correlation)
from .errors import ConfigurationError, EstimationFailed, NumericalError
from .estimators import HermitianFactor, correlation_matrix, empirical_mse, lmmse_matrix
from .selector import METHODS, FilterBank
from .theory import false_comparison_probability, scaled_difference

__all__ = [
    "SCENARIOS",
    "CSV_COLUMNS",
    "substream",
    "ScenarioConfig",
    "CampaignRow",
    "CampaignReport",
    "default_config",
    "load_config",
    "resolve_candidate",
    "run_scenario",
    "emit_report",
    "read_report_csv",
    "trace_transmissions",
    "timing_shift",
    "timing_average",
]

SCENARIOS = ("known_stats", "sto", "estimated_corr", "no_prior", "theory_validation")
CSV_COLUMNS = ("scenario", "snr_db", "method", "trials", "mse_mean", "mse_se",
               "false_sel_rate", "sel_hist_json")
ESTIMATED = "estimated"


def substream(master_seed, index, tag) -> np.random.Generator:
    """Independent Philox stream for ``(master_seed, index, tag)``."""
    digest = hashlib.blake2b(str(tag).encode(), digest_size=8).digest()
    key = [int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(index), int.from_bytes(digest, "little")]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


# --- configuration -----------------------------------------------------------

@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one campaign.

    ``omega_spec`` maps each enhanced-estimator method name to its list of
    candidate specs; ``fixed_spec`` maps each fixed-correlation LMMSE method
    name to one candidate spec. ``ls`` and ``lmmse_oracle`` (true effective
    correlation) are always run. See :func:`resolve_candidate` for the candidate
    grammar.
    """

    scenario: str
    ofdm: OfdmConfig = field(default_factory=OfdmConfig.standard)
    snr_grid_db: tuple = (0.0, 10.0, 20.0)
    trials: int = 500
    master_seed: int = 0
    sto_dist: StoDistribution | None = None
    stationary_period_M: int = 1
    omega_spec: dict = field(default_factory=dict)
    fixed_spec: dict = field(default_factory=dict)
    models: tuple = ("office_b", "pedestrian_a", "pedestrian_b")
    method: str = "split"
    pilot_seed: int = 0
    coherence_block: int | None = None
    threshold_span: str = "cir"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(f"unknown scenario {self.scenario!r}; known: {SCENARIOS}")
        self.snr_grid_db = tuple(float(s) for s in self.snr_grid_db)
        self.models = tuple(self.models)
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if not self.snr_grid_db:
            raise ConfigurationError("snr_grid_db must not be empty")
        if self.stationary_period_M is None or self.stationary_period_M < 1:
            raise ConfigurationError("stationary_period_M must be a positive integer")
        if self.coherence_block is not None and (
                self.coherence_block < 1 or self.coherence_block % self.stationary_period_M):
            raise ConfigurationError("coherence_block must be a positive multiple of stationary_period_M")
        if self.threshold_span not in ("cir", "cp"):
            raise ConfigurationError("threshold_span must be 'cir' or 'cp'")
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}")
        if not self.models:
            raise ConfigurationError("at least one channel model is needed")
        for name in self.models:
            get_model(name)
        reserved = {"ls", "lmmse_oracle"}
        names = list(self.omega_spec) + list(self.fixed_spec)
        if len(set(names)) != len(names) or reserved & set(names):
            raise ConfigurationError(f"method names must be unique and not in {reserved}")

    @property
    def block_len(self):
        return self.coherence_block or self.stationary_period_M

    @property
    def method_names(self):
        return ["ls", "lmmse_oracle", *self.fixed_spec, *self.omega_spec]

    def to_dict(self):
        d = asdict(self)
        d["ofdm"] = {"n_fft": self.ofdm.n_fft, "cp_len": self.ofdm.cp_len,
                     "usable": list(self.ofdm.usable), "sample_time": self.ofdm.sample_time}
        d["sto_dist"] = None if self.sto_dist is None else {
            "support": list(self.sto_dist.support), "pmf": list(self.sto_dist.pmf)}
        d["snr_grid_db"] = list(self.snr_grid_db)
        d["models"] = list(self.models)
        return d


def _robust_spec(tau):
    return {"robust": tau}


def default_config(scenario: str, **overrides) -> ScenarioConfig:
    """Scenario defaults reproducing the evaluation designs at desk scale."""
    models = ("office_b", "pedestrian_a", "pedestrian_b")
    base = dict(scenario=scenario)
    if scenario == "known_stats":
        base.update(
            fixed_spec={"lmmse_robust": _robust_spec("cp")},
            omega_spec={
                "enhanced_complete": [*models, _robust_spec("cp")],
                "enhanced_incomplete": ["office_b", "pedestrian_a", _robust_spec("cp")],
            },
        )
    elif scenario == "sto":
        all_sto = list(range(-10, 0))
        base.update(
            sto_dist=StoDistribution.uniform(-10, 0),
            fixed_spec={"lmmse_robust": _robust_spec("cp")},
            omega_spec={
                "enhanced_omega1": [
                    *models,
                    *({"model": m, "sto": all_sto} for m in models),
                    *({"model": m, "sto": "average"} for m in models),
                ],
                "enhanced_omega2": [
                    *models,
                    *({"model": m, "sto": [-5, -4, -3, -2, -1]} for m in models),
                    *({"model": m, "sto": "average"} for m in models),
                ],
                "enhanced_omega3": [{"model": m, "sto": "average"} for m in models],
            },
        )
    elif scenario == "estimated_corr":
        base.update(
            snr_grid_db=(0.0,),
            stationary_period_M=8,
            fixed_spec={"lmmse_robust": _robust_spec("cp"), "lmmse_estimated": ESTIMATED},
            omega_spec={"enhanced": [ESTIMATED, _robust_spec("cp")]},
        )
    elif scenario == "no_prior":
        taus = ("cp", "cp/4", "cp/16")
        base.update(
            sto_dist=StoDistribution.uniform(-10, 0),
            fixed_spec={
                "lmmse_robust": _robust_spec("cp"),
                "lmmse_robust_cp4": _robust_spec("cp/4"),
                "lmmse_robust_cp16": _robust_spec("cp/16"),
            },
            omega_spec={"enhanced": [
                *(_robust_spec(t) for t in taus),
                *({"robust": t, "sto": [-5, -4, -3, -2, -1]} for t in taus),
            ]},
        )
    elif scenario == "theory_validation":
        trials = overrides.get("trials", 500)
        base.update(
            ofdm=OfdmConfig.standard(160),
            snr_grid_db=(0.0, 2.0, 4.0, 6.0, 8.0),
            models=("office_b",),
            method="full" if trials <= 500 else "split",
            omega_spec={"enhanced": ["office_b", "pedestrian_b"]},
        )
    else:
        raise ConfigurationError(f"unknown scenario {scenario!r}")
    base.update(overrides)
    return ScenarioConfig(**base)


def _ofdm_from_dict(d):
    d = dict(d)
    n_usable = d.pop("n_usable", None)
    if n_usable is not None:
        if "usable" in d:
            raise ConfigurationError("give either n_usable or usable, not both")
        return OfdmConfig.standard(n_usable, **d)
    return OfdmConfig(**{**d, "usable": tuple(d.get("usable", ()))})


def _sto_from_dict(d):
    if d is None:
        return None
    if "uniform" in d:
        lo, hi = d["uniform"]
        return StoDistribution.uniform(lo, hi)
    return StoDistribution(d["support"], d["pmf"])


def config_from_dict(d: dict) -> ScenarioConfig:
    """Build a config; absent fields take the scenario's defaults."""
    d = dict(d)
    unknown = set(d) - {f for f in ScenarioConfig.__dataclass_fields__}
    if unknown:
        raise ConfigurationError(f"unknown config fields {sorted(unknown)}")
    if "scenario" not in d:
        raise ConfigurationError("config needs a 'scenario' field")
    if "ofdm" in d:
        d["ofdm"] = _ofdm_from_dict(d["ofdm"])
    if "sto_dist" in d:
        d["sto_dist"] = _sto_from_dict(d["sto_dist"])
    cfg = default_config(d.pop("scenario"), **d)
    _check_specs(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    """Read a JSON scenario file (schema in the README)."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return config_from_dict(data)


# --- candidate specs ---------------------------------------------------------

def timing_shift(r: CorrelationVector, theta: int, ofdm: OfdmConfig) -> CorrelationVector:
    """Correlation seen with the FFT window ``theta`` samples off (negative = early)."""
    return sto_shift_correlation(r, -theta, ofdm, label=f"{r.label}@sto{theta:+d}")


def timing_average(r: CorrelationVector, dist: StoDistribution, ofdm: OfdmConfig) -> CorrelationVector:
    """Correlation averaged over window offsets drawn from ``dist``."""
    mirrored = StoDistribution([-s for s in dist.support], dist.pmf)
    return sto_average_correlation(r, mirrored, ofdm, label=f"{r.label}@sto-avg")


def _tau(value, cp_len):
    if isinstance(value, str):
        v = value.strip().lower()
        if v == "cp":
            return cp_len
        if v.startswith("cp/"):
            return max(1, cp_len // int(v[3:]))
        raise ConfigurationError(f"bad robust delay {value!r}")
    return int(value)


def _normalize_spec(spec):
    if isinstance(spec, str):
        if spec == ESTIMATED:
            return {"estimated": True}
        if spec.startswith("robust"):
            _, _, tau = spec.partition(":")
            return {"robust": tau or "cp"}
        return {"model": spec}
    if isinstance(spec, dict):
        return dict(spec)
    raise ConfigurationError(f"bad candidate spec {spec!r}")


def resolve_candidate(spec, cfg: ScenarioConfig):
    """Expand one candidate spec into correlation vectors.

    Grammar (JSON objects or shorthand strings):

    - ``"office_b"`` / ``{"model": "office_b"}``: tap-table correlation;
    - ``"robust"``, ``"robust:cp/4"``, ``{"robust": 32}``: flat PDP of that
      many samples (``"cp"`` and ``"cp/N"`` are relative to the CP);
    - ``"estimated"``: estimated from the stationary period's pilots;
    - an optional ``"sto"`` key on model/robust specs: an offset, a list of
      offsets (one candidate each) or ``"average"`` (over ``sto_dist``);
    - an optional ``"label"`` overrides the generated label.

    Returns a list whose items are :class:`CorrelationVector` or the
    placeholder string ``"estimated"``.
    """
    spec = _normalize_spec(spec)
    ofdm = cfg.ofdm
    if spec.get("estimated"):
        return [ESTIMATED]
    if "model" in spec:
        base = model_correlation(get_model(spec["model"]), ofdm)
    elif "robust" in spec:
        tau = _tau(spec["robust"], ofdm.cp_len)
        base = robust_correlation(tau, ofdm)
    else:
        raise ConfigurationError(f"candidate spec {spec!r} names no correlation")
    sto = spec.get("sto")
    if sto is None:
        out = [base]
    elif sto == "average":
        dist = cfg.sto_dist or StoDistribution.uniform(-10, 0)
        out = [timing_average(base, dist, ofdm)]
    else:
        shifts = sto if isinstance(sto, (list, tuple)) else [sto]
        out = [timing_shift(base, int(s), ofdm) for s in shifts]
    if "label" in spec:
        if len(out) != 1:
            raise ConfigurationError("a label can only be given to a single candidate")
        out = [out[0].relabel(spec["label"])]
    return out


def _resolve_list(specs, cfg):
    out = []
    for s in specs:
        out.extend(resolve_candidate(s, cfg))
    labels = [c if isinstance(c, str) else c.label for c in out]
    if len(set(labels)) != len(labels):
        raise ConfigurationError(f"duplicate candidate labels {labels}")
    if not out:
        raise ConfigurationError("empty candidate list")
    return out


def _check_specs(cfg):
    for specs in cfg.omega_spec.values():
        _resolve_list(specs, cfg)
    for spec in cfg.fixed_spec.values():
        if len(resolve_candidate(spec, cfg)) != 1:
            raise ConfigurationError("a fixed LMMSE method needs exactly one candidate")


# --- report ------------------------------------------------------------------

@dataclass
class CampaignRow:
    scenario: str
    snr_db: float
    method: str
    trials: int
    mse_mean: float
    mse_se: float
    false_sel_rate: float
    sel_hist: dict

    def csv_fields(self):
        return [
            self.scenario,
            _fmt(self.snr_db),
            self.method,
            str(self.trials),
            _fmt(self.mse_mean),
            _fmt(self.mse_se),
            "" if math.isnan(self.false_sel_rate) else _fmt(self.false_sel_rate),
            json.dumps(self.sel_hist, separators=(",", ":")),
        ]


def _fmt(x):
    return f"{x:.9g}"


@dataclass
class TrialRecord:
    """Per-transmission results of one method at one SNR."""

    mse: np.ndarray
    chosen: list
    truth: list
    xi: np.ndarray | None = None
    labels: tuple = ()


@dataclass
class CampaignReport:
    config: ScenarioConfig
    rows: list
    records: dict
    models: list
    thetas: list
    extras: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def row(self, method, snr_db):
        for r in self.rows:
            if r.method == method and r.snr_db == float(snr_db):
                return r
        raise KeyError((method, snr_db))

    def mse(self, method, snr_db):
        return self.row(method, snr_db).mse_mean

    def mse_db(self, method, snr_db):
        return 10.0 * math.log10(self.mse(method, snr_db))


def _aggregate(scenario, snr, method, rec: TrialRecord) -> CampaignRow:
    n = rec.mse.size
    se = float(rec.mse.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    hist = {}
    for lab in rec.labels:
        hist[lab] = 0
    for lab in rec.chosen:
        hist[lab] = hist.get(lab, 0) + 1
    judged = [(c, t) for c, t in zip(rec.chosen, rec.truth) if t is not None]
    fsr = float(np.mean([c != t for c, t in judged])) if judged else math.nan
    return CampaignRow(scenario, float(snr), method, n, float(rec.mse.mean()), se, fsr, hist)


# --- runner ------------------------------------------------------------------

class _OperatorCache:
    """Filter banks and LMMSE matrices keyed by candidate content and noise level."""

    def __init__(self, ofdm, method):
        self.ofdm = ofdm
        self.method = method
        self._banks = {}
        self._filters = {}

    @staticmethod
    def _key(cand, noise_var):
        return cand.label, hashlib.blake2b(cand.r.tobytes(), digest_size=16).digest(), noise_var

    def bank(self, cand, noise_var):
        key = self._key(cand, noise_var)
        if key not in self._banks:
            self._banks[key] = FilterBank(ParameterSet([cand]), noise_var, self.ofdm, self.method)
        return self._banks[key]

    def filter(self, cand, noise_var):
        key = self._key(cand, noise_var)
        if key not in self._filters:
            self._filters[key] = lmmse_matrix(cand, noise_var, self.ofdm)
        return self._filters[key]


def _truth_label(model, theta):
    return model if theta == 0 else f"{model}@sto{theta:+d}"


class _PeriodCandidate:
    """Index operator and LMMSE solve for a correlation used in one period only."""

    def __init__(self, cand, noise_var, ofdm, method):
        self.cand = cand
        self.bank = FilterBank(ParameterSet([cand]), noise_var, ofdm, method)
        k = ofdm.carriers
        self._rhh = correlation_matrix(cand, k)
        self._fac = HermitianFactor(self._rhh + noise_var * np.eye(k.size)) if noise_var else None

    def indexes(self, ls):
        return self.bank.indexes(ls)

    def apply(self, ls):
        return ls.copy() if self._fac is None else self._rhh @ self._fac.solve(ls)


def run_scenario(cfg: ScenarioConfig) -> CampaignReport:
    """Run every method of ``cfg`` over its SNR grid."""
    started = time.perf_counter()
    _check_specs(cfg)
    ofdm = cfg.ofdm
    omegas = {name: _resolve_list(specs, cfg) for name, specs in cfg.omega_spec.items()}
    fixed = {name: resolve_candidate(spec, cfg)[0] for name, spec in cfg.fixed_spec.items()}
    need_estimate = any(ESTIMATED in c for c in omegas.values()) or ESTIMATED in fixed.values()
    fallback = robust_correlation(ofdm.cp_len, ofdm, label=ESTIMATED)
    models = [get_model(m) for m in cfg.models]
    base_corr = {m.name: model_correlation(m, ofdm) for m in models}
    cache = _OperatorCache(ofdm, cfg.method)
    noise_vars = [snr_to_noise_var(s) for s in cfg.snr_grid_db]
    n_snr = len(cfg.snr_grid_db)
    M = cfg.stationary_period_M
    block = cfg.block_len

    mse = {(i, name): np.empty(cfg.trials) for i in range(n_snr) for name in cfg.method_names}
    chosen = {(i, name): [] for i in range(n_snr) for name in cfg.method_names}
    truth = {(i, name): [] for i in range(n_snr) for name in cfg.method_names}
    xis = {(i, name): np.empty((cfg.trials, len(c))) for i in range(n_snr) for name, c in omegas.items()}
    trial_models, trial_thetas = [], []
    estimation_failures = [0] * n_snr

    for b in range(math.ceil(cfg.trials / block)):
        brng = substream(cfg.master_seed, b, "period")
        model = models[int(brng.integers(len(models)))]
        theta = int(cfg.sto_dist.sample(brng)) if cfg.sto_dist is not None else 0
        r_true = base_corr[model.name]
        if theta:
            r_true = timing_shift(r_true, theta, ofdm)
        true_label = _truth_label(model.name, theta)
        block_end = min((b + 1) * block, cfg.trials)
        for p0 in range(b * block, block_end, M):
            ts = range(p0, min(p0 + M, block_end))
            cfrs = []
            for t in ts:
                cfr = cir_to_cfr(build_cir(model, ofdm, substream(cfg.master_seed, t, "channel")), ofdm)
                cfrs.append(apply_sto(cfr, -theta, ofdm) if theta else cfr)
                trial_models.append(model.name)
                trial_thetas.append(theta)

            for i, snr in enumerate(cfg.snr_grid_db):
                nv = noise_vars[i]
                obs = [observe_pilot(cfr, snr, cfg.pilot_seed,
                                     substream(cfg.master_seed, t, f"noise/{i}"))
                       for t, cfr in zip(ts, cfrs)]
                est = None
                if need_estimate:
                    try:
                        r_est = estimate_correlation(obs, ofdm, label=ESTIMATED,
                                                     threshold_span=cfg.threshold_span)
                    except EstimationFailed:
                        r_est = fallback
                        estimation_failures[i] += 1
                    est = _PeriodCandidate(r_est, nv, ofdm, cfg.method)

                def indexes(c, ls):
                    return est.indexes(ls) if isinstance(c, str) else cache.bank(c, nv).indexes(ls)

                def apply(c, ls):
                    return est.apply(ls) if isinstance(c, str) else cache.filter(c, nv) @ ls

                def label(c):
                    return ESTIMATED if isinstance(c, str) else c.label

                for t, o in zip(ts, obs):
                    ls, h = o.ls, o.cfr_true
                    _store(mse, chosen, truth, i, "ls", t, empirical_mse(ls, h), "ls", None)
                    _store(mse, chosen, truth, i, "lmmse_oracle", t,
                           empirical_mse(cache.filter(r_true, nv) @ ls, h), "oracle", None)
                    for name, cand in fixed.items():
                        _store(mse, chosen, truth, i, name, t, empirical_mse(apply(cand, ls), h),
                               label(cand), None)
                    for name, cands in omegas.items():
                        labels = [label(c) for c in cands]
                        xi = np.concatenate([indexes(c, ls) for c in cands])
                        if not np.any(np.isfinite(xi)):
                            raise NumericalError(f"every candidate of {name} failed")
                        k = int(np.argmin(xi))
                        xis[i, name][t] = xi
                        _store(mse, chosen, truth, i, name, t,
                               empirical_mse(apply(cands[k], ls), h),
                               labels[k], true_label if true_label in labels else None)

    records, rows = {}, []
    for i, snr in enumerate(cfg.snr_grid_db):
        for name in cfg.method_names:
            labels = ()
            if name in omegas:
                labels = tuple(ESTIMATED if isinstance(c, str) else c.label for c in omegas[name])
            rec = TrialRecord(mse[i, name], chosen[i, name], truth[i, name],
                              xis.get((i, name)), labels)
            records[snr, name] = rec
            rows.append(_aggregate(cfg.scenario, snr, name, rec))

    extras = {"estimation_failures": dict(zip(cfg.snr_grid_db, estimation_failures))}
    if cfg.scenario == "theory_validation":
        extras["theory"] = _theory_points(cfg, omegas, base_corr, noise_vars)
    return CampaignReport(cfg, rows, records, trial_models, trial_thetas, extras,
                          time.perf_counter() - started)


def _store(mse, chosen, truth, i, name, t, value, label, true_label):
    mse[i, name][t] = value
    chosen[i, name].append(label)
    truth[i, name].append(true_label)


def _theory_points(cfg, omegas, base_corr, noise_vars):
    """Theoretical false-comparison probability per SNR for two-candidate sets."""
    from .selector import expected_index

    out = {}
    r_true = base_corr[cfg.models[0]]
    for name, cands in omegas.items():
        if len(cands) != 2 or any(isinstance(c, str) for c in cands):
            continue
        for snr, nv in zip(cfg.snr_grid_db, noise_vars):
            s = sorted(expected_index(c, r_true, nv, cfg.ofdm, cfg.method) for c in cands)
            alpha = scaled_difference(s[0], s[1])
            out[name, snr] = {"alpha": alpha,
                              "epsilon": false_comparison_probability(alpha, cfg.ofdm.n_usable)}
    return out


# --- output ------------------------------------------------------------------

def emit_report(report: CampaignReport, path) -> dict:
    """Write ``report.csv``, ``trials.csv``, per-method index files and ``manifest.txt``.

    Returns the paths written, keyed by kind.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    written = {}

    p = out / "report.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in report.rows:
            w.writerow(row.csv_fields())
    written["report"] = p

    p = out / "trials.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snr_db", "method", "trial", "model", "sto", "mse", "chosen_label"])
        for (snr, name), rec in report.records.items():
            for t, (m, lab) in enumerate(zip(rec.mse, rec.chosen)):
                w.writerow([_fmt(snr), name, t, report.models[t], report.thetas[t], repr(float(m)), lab])
    written["trials"] = p

    for (snr, name), rec in report.records.items():
        if rec.xi is None:
            continue
        p = out / f"xi_{name}_snr{_fmt(snr)}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "method", "chosen_label", *rec.labels])
            for t, (lab, xi) in enumerate(zip(rec.chosen, rec.xi)):
                w.writerow([t, name, lab, *(repr(float(x)) for x in xi)])
        written[f"xi/{name}/{_fmt(snr)}"] = p

    p = out / "manifest.txt"
    cfg = report.config
    lines = [
        f"library_version = {__version__}",
        f"scenario = {cfg.scenario}",
        f"master_seed = {cfg.master_seed}",
        f"trials = {cfg.trials}",
        f"method = {cfg.method}",
        f"wall_time_s = {report.wall_time:.3f}",
        f"n_fft = {cfg.ofdm.n_fft}",
        f"cp_len = {cfg.ofdm.cp_len}",
        f"n_usable = {cfg.ofdm.n_usable}",
        f"usable = {_ranges(cfg.ofdm.usable)}",
        f"extras = {json.dumps(_jsonable(report.extras))}",
        "config = " + json.dumps(cfg.to_dict()),
    ]
    p.write_text("\n".join(lines) + "\n")
    written["manifest"] = p
    return written


def _ranges(idx):
    parts, start = [], idx[0]
    for a, b in zip(idx, idx[1:] + (None,)):
        if b is None or b != a + 1:
            parts.append(f"{start}-{a}" if a != start else f"{a}")
            if b is not None:
                start = b
    return ",".join(parts)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {(k if isinstance(k, str) else "|".join(map(str, k)) if isinstance(k, tuple) else str(k)):
                _jsonable(v) for k, v in obj.items()}
    return obj


def read_report_csv(path) -> list:
    """Parse a ``report.csv`` back into :class:`CampaignRow` objects."""
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        for f in reader:
            rows.append(CampaignRow(
                scenario=f[0], snr_db=float(f[1]), method=f[2], trials=int(f[3]),
                mse_mean=float(f[4]), mse_se=float(f[5]),
                false_sel_rate=float(f[6]) if f[6] else math.nan,
                sel_hist=json.loads(f[7]),
            ))
    return rows


def trace_transmissions(cfg: ScenarioConfig) -> list:
    """Per-transmission MSE of every method and the enhanced selection.

    Returns one dict per (SNR, transmission) with keys ``snr_db``,
    ``transmission``, ``period``, ``model``, ``mse_<method>`` and
    ``selected`` (label picked by the ``enhanced`` method).
    """
    if cfg.scenario != "estimated_corr":
        raise ConfigurationError("traces are defined for the estimated_corr scenario")
    report = run_scenario(cfg)
    enhanced = next(iter(cfg.omega_spec))
    out = []
    for snr in cfg.snr_grid_db:
        for t in range(cfg.trials):
            row = {"snr_db": snr, "transmission": t, "period": t // cfg.stationary_period_M,
                   "model": report.models[t]}
            for name in cfg.method_names:
                row[f"mse_{name}"] = float(report.records[snr, name].mse[t])
            row["selected"] = report.records[snr, enhanced].chosen[t]
            out.append(row)
    return out


def trace_to_csv(trace) -> str:
    if not trace:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(trace[0]))
    w.writeheader()
    for row in trace:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
