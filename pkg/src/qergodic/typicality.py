"""Monte Carlo typicality experiments over random decompositions and Hamiltonians.

Each experiment is a pure function of its :class:`ExperimentConfig`. Trial
``k`` draws from the stream ``seed.trial(k)`` and per-trial results are
reduced in trial order, so the output does not depend on ``workers``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import stats

from .errors import ConfigError, DomainError
from .hilbert import (
    EnergySpectrum,
    MacroDecomposition,
    StateVector,
    UnitaryMatrix,
    build_projector_overlaps,
    macro_occupation_at_time,
    time_averaged_occupation,
)
from .normality import (
    NormalityParams,
    condition_terms,
    deviation_G,
    normality_bounds,
    population_G,
    stationary_fraction,
    time_grid,
    worst_case_G,
)
from .sampling import (
    SeedSpec,
    conjugated_hamiltonian,
    decomposition_from_hamiltonian,
    haar_unitary,
    lemma1_statistics,
    uniform_decomposition,
    uniform_state,
)
from .spectra import check_spectrum, generate_nonresonant_spectrum, occupation_horizon

VARIANTS = ("lemma1", "lemma_bounds", "theorem1", "theorem2", "theorem3",
            "equilibrium", "quantifier_contrast")

# spawn keys for draws that are shared by all trials
_SPECTRUM_KEY = 1_000_001
_FIXED_STATE_KEY = 1_000_002
_ALIGNED_KEY = 1_000_003


@dataclass(frozen=True)
class Constants:
    C1: float = 1.0
    C2: float = 121.0
    a: float | None = None

    @property
    def theta(self) -> float:
        return 1.0 - 2.0 / (3.0 * math.sqrt(self.C2))


@dataclass(frozen=True)
class ExperimentConfig:
    variant: str
    D: int
    dims: tuple[int, ...]
    params: NormalityParams
    delta: float = 0.05
    trials: int = 100
    seed: SeedSpec = SeedSpec()
    spectrum_source: str = "generate"
    span: float = 1.0
    energies: tuple[float, ...] | None = None
    constants: Constants = Constants()
    threshold_scale: float | None = None
    direct: bool = False
    block: int = 0
    n_samples: int = 4096
    cycles: int = 200
    uniform_probes: int = 16
    worst_case_trials: int = 100
    record_trials: bool = False
    alignment: str = "haar"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError("variant", f"unknown variant {self.variant!r}")
        if self.D < 2:
            raise ConfigError("D", "must be at least 2")
        if not self.dims or any(d <= 0 for d in self.dims):
            raise ConfigError("dims", "must be a non-empty list of positive integers")
        if sum(self.dims) != self.D:
            raise ConfigError("dims", f"sum {sum(self.dims)} does not equal D={self.D}")
        if self.trials < 1:
            raise ConfigError("trials", "must be at least 1")
        if not 0 < self.delta < 1:
            raise ConfigError("delta", "must lie in (0, 1)")
        if self.params.N != len(self.dims):
            raise ConfigError("params", "N must equal the number of blocks")
        if not 0 <= self.block < len(self.dims):
            raise ConfigError("block", "out of range")
        if self.spectrum_source not in ("generate", "explicit"):
            raise ConfigError("spectrum.source", "must be 'generate' or 'explicit'")
        if self.spectrum_source == "explicit":
            if self.energies is None or len(self.energies) != self.D:
                raise ConfigError("spectrum.energies", f"need exactly D={self.D} energies")
        elif not self.span > 0:
            raise ConfigError("spectrum.span", "must be positive")
        if self.alignment not in ("haar", "identity"):
            raise ConfigError("alignment", "must be 'haar' or 'identity'")

    # -- JSON round trip -----------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {"variant", "D", "dims", "params", "delta", "trials", "seed", "spectrum",
                 "constants", "threshold_scale", "direct", "block", "n_samples", "cycles",
                 "uniform_probes", "worst_case_trials", "record_trials", "alignment"}
        extra = set(data) - known
        if extra:
            raise ConfigError(sorted(extra)[0], "unknown field")
        variant = _get(data, "variant", str)
        dims = _get(data, "dims", list)
        if not all(isinstance(d, int) and not isinstance(d, bool) for d in dims):
            raise ConfigError("dims", "entries must be integers")
        D = _get(data, "D", int, default=sum(dims))
        p = data.get("params", {}) or {}
        if not isinstance(p, dict):
            raise ConfigError("params", "must be an object")
        default_sense = "von_neumann" if variant == "theorem1" else "strong"
        try:
            params = NormalityParams(float(p.get("epsilon", 0.5)), float(p.get("delta_prime", 0.2)),
                                     len(dims), p.get("sense", default_sense))
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError("params", str(exc)) from None
        s = data.get("seed", {}) or {}
        try:
            seed = SeedSpec(int(s.get("master_seed", 0)), int(s.get("stream_index", 0)))
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError("seed", str(exc)) from None
        spec = data.get("spectrum", {}) or {}
        source = spec.get("source", "generate")
        energies = spec.get("energies")
        c = data.get("constants", {}) or {}
        try:
            constants = Constants(float(c.get("C1", 1.0)), float(c.get("C2", 121.0)),
                                  None if c.get("a") is None else float(c["a"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError("constants", str(exc)) from None
        return cls(
            variant=variant, D=D, dims=tuple(dims), params=params,
            delta=_get(data, "delta", float, default=0.05),
            trials=_get(data, "trials", int, default=100),
            seed=seed, spectrum_source=source,
            span=float(spec.get("span", 1.0)),
            energies=None if energies is None else tuple(float(x) for x in energies),
            constants=constants,
            threshold_scale=_get(data, "threshold_scale", float, default=None),
            direct=_get(data, "direct", bool, default=False),
            block=_get(data, "block", int, default=0),
            n_samples=_get(data, "n_samples", int, default=4096),
            cycles=_get(data, "cycles", int, default=200),
            uniform_probes=_get(data, "uniform_probes", int, default=16),
            worst_case_trials=_get(data, "worst_case_trials", int, default=100),
            record_trials=_get(data, "record_trials", bool, default=False),
            alignment=_get(data, "alignment", str, default="haar"),
        )

    def to_dict(self) -> dict:
        spectrum: dict[str, Any] = {"source": self.spectrum_source}
        if self.spectrum_source == "generate":
            spectrum["span"] = self.span
        else:
            spectrum["energies"] = list(self.energies)
        return {
            "variant": self.variant, "D": self.D, "dims": list(self.dims),
            "params": {"epsilon": self.params.epsilon, "delta_prime": self.params.delta_prime,
                       "N": self.params.N, "sense": self.params.sense},
            "delta": self.delta, "trials": self.trials, "seed": self.seed.to_dict(),
            "spectrum": spectrum, "constants": asdict(self.constants),
            "threshold_scale": self.threshold_scale, "direct": self.direct,
            "block": self.block, "n_samples": self.n_samples, "cycles": self.cycles,
            "uniform_probes": self.uniform_probes,
            "worst_case_trials": self.worst_case_trials, "record_trials": self.record_trials,
            "alignment": self.alignment,
        }


def _get(data: dict, key: str, kind: type, default: Any = ...):
    if key not in data or data[key] is None:
        if default is ...:
            raise ConfigError(key, "required field is missing")
        return default
    value = data[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise ConfigError(key, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


@dataclass
class TypicalityEstimate:
    variant: str
    trials: int
    successes: int
    success_fraction: float
    confidence_interval: tuple[float, float]
    hypothesis_check: dict[str, bool] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
    per_trial_records: list[dict] | None = None

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


@dataclass
class ContrastReport:
    """Outcome of the quantifier-order experiment."""

    averages: dict[str, Any]
    contrast: dict[str, Any]
    aligned: dict[str, Any]
    hypothesis_check: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise DomainError("need 0 <= successes <= trials")
    z = float(stats.norm.ppf(0.5 + confidence / 2))
    n, p = trials, successes / trials
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def _map(fn: Callable[[int], Any], n: int, workers: int) -> list:
    if workers <= 1 or n <= 1:
        return [fn(k) for k in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def experiment_spectrum(config: ExperimentConfig) -> EnergySpectrum:
    if config.spectrum_source == "explicit":
        return EnergySpectrum(np.asarray(config.energies, dtype=float))
    return generate_nonresonant_spectrum(config.D, config.seed.spawn(_SPECTRUM_KEY), config.span)


def _estimate(config: ExperimentConfig, flags: list[bool], **extra) -> TypicalityEstimate:
    k = int(sum(flags))
    n = len(flags)
    return TypicalityEstimate(config.variant, n, k, k / n, wilson_interval(k, n), **extra)


# --- occupation of a fixed subspace ------------------------------------------

def run_lemma1_experiment(config: ExperimentConfig, workers: int = 1) -> TypicalityEstimate:
    """Occupation of a fixed subspace by uniform random states."""
    D, d, eps = config.D, config.dims[config.block], config.params.epsilon
    rows = np.asarray(range(sum(config.dims[:config.block]), sum(config.dims[:config.block + 1])))

    def trial(k):
        phi = uniform_state(D, config.seed.trial(k))
        return float(np.sum(phi.population[rows]))

    x = np.asarray(_map(trial, config.trials, workers))
    mean, var, cheb = lemma1_statistics(d, D, eps)
    n = x.size
    m = float(np.mean(x))
    centred = x - m
    v = float(np.sum(centred ** 2) / (n - 1)) if n > 1 else 0.0
    se_mean = math.sqrt(v / n) if n > 1 else float("nan")
    m4 = float(np.mean(centred ** 4))
    se_var = math.sqrt(max(m4 - v * v, 0.0) / n) if n > 1 else float("nan")
    flags = list(np.abs(x - mean) < eps * mean)
    frac = float(np.mean(flags))
    diagnostics = {
        "d": d, "D": D,
        "mean_theory": mean, "variance_theory": var,
        "mean_mc": m, "variance_mc": v,
        "se_mean": se_mean, "se_variance": se_var,
        "z_mean": (m - mean) / se_mean if se_mean > 0 else 0.0,
        "z_variance": (v - var) / se_var if se_var > 0 else 0.0,
        "chebyshev_lower_bound": cheb,
    }
    records = [{"trial": k, "occupation": float(x[k])} for k in range(n)] if config.record_trials else None
    return _estimate(config, flags, diagnostics=diagnostics,
                     hypothesis_check={"chebyshev_bound_respected": frac >= cheb},
                     per_trial_records=records)


# --- max-statistics of a random projector ----------------------------------

def lemma_bound_hypotheses(D: int, d: int, a: float, c: Constants) -> dict[str, bool]:
    logD = math.log(D)
    return {
        "expectation_bound_window": c.C1 * logD < d < D / c.C1,
        "tail_bound_window": c.C2 < d < D - c.C2,
        "tail_threshold_below_limit": 0 < a < d * d / (D * D * c.C2),
    }


def max_statistics(U: UnitaryMatrix, rows: np.ndarray) -> tuple[float, float]:
    """Off-diagonal and diagonal max-statistics of ``sum_{g in rows} U_ga conj(U_gb)``."""
    D = U.dim
    m = U.entries[rows, :]
    P = m.T @ m.conj()
    mag = P.real ** 2 + P.imag ** 2
    np.fill_diagonal(mag, 0.0)
    diag = np.sum(np.abs(m) ** 2, axis=0)
    return float(mag.max()), float(np.max((diag - rows.size / D) ** 2))


def run_lemma_bounds_experiment(config: ExperimentConfig, workers: int = 1) -> TypicalityEstimate:
    D = config.D
    d = config.dims[config.block]
    if d >= D:
        raise DomainError("the examined block must be a proper subspace (d < D)")
    if config.trials < 30:
        raise DomainError("lemma_bounds needs at least 30 trials")
    c = config.constants
    # default threshold: half the strong bound
    a = c.a if c.a is not None else normality_bounds(config.params, d, D)[1] / 2
    start = sum(config.dims[:config.block])
    rows = np.arange(start, start + d)

    stats_ = _map(lambda k: max_statistics(haar_unitary(D, config.seed.trial(k)), rows),
                  config.trials, workers)
    off = np.array([s[0] for s in stats_])
    dia = np.array([s[1] for s in stats_])
    logD = math.log(D)
    off_bound, diag_bound = logD / D, 9 * d * logD / D ** 2
    theta = c.theta
    tail_off = (D ** 2 / 2) * math.exp(-4 * a * (D - 1))
    tail_diag = D ** 3 / (math.sqrt(2 * math.pi * d) * (D - d)) * math.exp(-theta * D ** 2 * a / (2 * d))
    n = off.size
    diagnostics = {
        "d": d, "D": D, "a": a, "theta": theta,
        "offdiag_mean": float(np.mean(off)), "offdiag_se": float(np.std(off, ddof=1) / math.sqrt(n)),
        "offdiag_expectation_bound": off_bound,
        "diag_mean": float(np.mean(dia)), "diag_se": float(np.std(dia, ddof=1) / math.sqrt(n)),
        "diag_expectation_bound": diag_bound,
        "offdiag_mean_below_bound": bool(np.mean(off) <= off_bound),
        "diag_mean_below_bound": bool(np.mean(dia) <= diag_bound),
        "offdiag_tail_empirical": float(np.mean(off >= a)), "offdiag_tail_bound": tail_off,
        "diag_tail_empirical": float(np.mean(dia >= a)), "diag_tail_bound": tail_diag,
    }
    records = ([{"trial": k, "offdiag_max": float(off[k]), "diag_max": float(dia[k])} for k in range(n)]
               if config.record_trials else None)
    flags = list((off < a) & (dia < a))
    return _estimate(config, flags, diagnostics=diagnostics,
                     hypothesis_check=lemma_bound_hypotheses(D, d, a, c),
                     per_trial_records=records)


# --- typicality of the condition value ---------------------------------------

def theorem_hypotheses(config: ExperimentConfig) -> dict[str, bool]:
    D, N = config.D, len(config.dims)
    eps2dp = config.params.epsilon ** 2 * config.params.delta_prime
    logD = math.log(D)
    c = config.constants
    if config.variant == "theorem1":
        low = max(c.C1, 10 * N ** 2 / (eps2dp * config.delta)) * logD
        return {"vn_dimension_window": all(low < d < D / c.C1 for d in config.dims)}
    low = max(c.C2, math.sqrt((3 * N / eps2dp) * D * logD))
    return {
        "strong_dimension_window": all(low < d < D - c.C2 for d in config.dims),
        "strong_eps_delta_vs_C2": eps2dp < 2 * N / c.C2,
        "strong_D_over_log_D": D / logD > 100 * N / eps2dp,
        "D_exceeds_inverse_delta": D > 1 / config.delta,
    }


def thresholds(config: ExperimentConfig) -> list[float]:
    """Per-block success threshold on the condition value.

    theorem1 uses the von Neumann bound and theorem2/3 the strong bound;
    other variants follow ``params.sense``. ``threshold_scale`` replaces
    either with ``threshold_scale * log D / D``.
    """
    D = config.D
    if config.threshold_scale is not None:
        return [config.threshold_scale * math.log(D) / D] * len(config.dims)
    if config.variant == "theorem1":
        pick = 0
    elif config.variant in ("theorem2", "theorem3"):
        pick = 1
    else:
        pick = 0 if config.params.sense == "von_neumann" else 1
    return [normality_bounds(config.params, d, D)[pick] for d in config.dims]


def trial_decomposition(config: ExperimentConfig, k: int, spectrum: EnergySpectrum) -> MacroDecomposition:
    seed = config.seed.trial(k)
    if config.alignment == "identity":
        # adversarial: macro-spaces spanned by energy eigenstates, no randomness
        return MacroDecomposition.aligned(config.dims)
    if config.variant == "theorem3":
        return decomposition_from_hamiltonian(config.dims, conjugated_hamiltonian(spectrum, seed))
    return uniform_decomposition(config.dims, seed)


def probe_fractions(decomp: MacroDecomposition, spectrum: EnergySpectrum, params: NormalityParams,
                    seed: SeedSpec, n_uniform: int, n_samples: int, cycles: int) -> dict[str, float]:
    """Minimum time fraction of normality over the probe states.

    Probes are every energy eigenstate (stationary, evaluated exactly),
    ``n_uniform`` uniform states and, per block, the worst-case population
    found by :func:`worst_case_G` with uniform phases.
    """
    D = decomp.D
    projectors = [build_projector_overlaps(decomp, nu) for nu in range(decomp.N)]
    diag = np.array([P.diagonal for P in projectors])
    eig = min(stationary_fraction(diag[:, a], decomp, params) for a in range(D))

    probes = [uniform_state(D, seed.spawn(i)) for i in range(n_uniform)]
    for nu, P in enumerate(projectors):
        p = worst_case_G(P, seed=seed.spawn(10_000 + nu))[1]
        probes.append(StateVector.normalized(np.sqrt(np.maximum(p, 0.0))))
    times = time_grid(occupation_horizon(spectrum, cycles), n_samples, seed.spawn(20_000))
    target = np.array([d / D for d in decomp.dims])
    tol = np.array([params.tolerance(d, D) for d in decomp.dims])
    fractions = []
    for psi in probes:
        occ = np.column_stack([macro_occupation_at_time(psi, spectrum, P, times) for P in projectors])
        fractions.append(float(np.mean(np.all(np.abs(occ - target) < tol, axis=1))))
    return {
        "eigenstates": eig,
        "uniform": min(fractions[:n_uniform]) if n_uniform else 1.0,
        "worst_case": min(fractions[n_uniform:]),
    }


def run_typicality_experiment(config: ExperimentConfig, workers: int = 1) -> TypicalityEstimate:
    if config.variant not in ("theorem1", "theorem2", "theorem3"):
        raise DomainError(f"run_typicality_experiment does not handle {config.variant!r}")
    spectrum = experiment_spectrum(config)
    thr = thresholds(config)
    N = len(config.dims)

    def trial(k):
        decomp = trial_decomposition(config, k, spectrum)
        terms = [condition_terms(build_projector_overlaps(decomp, nu)) for nu in range(N)]
        cv = [o + g for o, g in terms]
        rec = {"trial": k, "condition_value": cv, "success": all(x < t for x, t in zip(cv, thr))}
        if config.direct:
            rec["probes"] = probe_fractions(decomp, spectrum, config.params, config.seed.trial(k).spawn(7),
                                            config.uniform_probes, config.n_samples, config.cycles)
        return rec

    records = _map(trial, config.trials, workers)
    cv = np.array([r["condition_value"] for r in records])
    sreport = check_spectrum(spectrum)
    hyp = theorem_hypotheses(config)
    hyp["spectrum_nonresonant"] = sreport.is_nondegenerate and sreport.is_nonresonant

    diagnostics: dict[str, Any] = {
        "thresholds": thr,
        "condition_value_mean": list(np.mean(cv, axis=0)),
        "condition_value_median": list(np.median(cv, axis=0)),
        "log_D_over_D": math.log(config.D) / config.D,
        "markov_check": markov_check(cv, thr, config.trials),
    }
    if config.direct:
        need = 1 - config.params.delta_prime
        direct = [min(r["probes"].values()) >= need for r in records]
        diagnostics["direct_success_fraction"] = float(np.mean(direct))
        diagnostics["direct_implied_by_condition"] = all(d for d, r in zip(direct, records) if r["success"])
    flags = [r["success"] for r in records]
    return _estimate(config, flags, hypothesis_check=hyp, diagnostics=diagnostics,
                     per_trial_records=records if config.record_trials else None)


def markov_check(cv: np.ndarray, thr: list[float], trials: int) -> list[dict]:
    """Empirical tail ``P(X >= b)`` against ``E X / b + 3 / sqrt(trials)``."""
    out = []
    for nu in range(cv.shape[1]):
        x = cv[:, nu]
        med = float(np.median(x))
        for b in sorted({thr[nu], 0.5 * med, med, 2 * med, 4 * med}):
            if b <= 0:
                continue
            tail = float(np.mean(x >= b))
            bound = float(np.mean(x)) / b + 3 / math.sqrt(trials)
            out.append({"block": nu, "b": b, "tail": tail, "markov": bound, "holds": tail <= bound})
    return out


# --- equilibrium -----------------------------------------------------------

def equilibrium_hypotheses(config: ExperimentConfig) -> dict[str, bool]:
    D, d_eq = config.D, config.dims[0]
    eps, dp, c = config.params.epsilon, config.params.delta_prime, config.constants
    logD = math.log(D)
    margin = max(c.C2, math.sqrt((6 / (eps ** 2 * dp)) * D * logD))
    eps2dp = eps ** 2 * dp
    return {
        "equilibrium_fraction": d_eq / D >= 1 - eps,
        "equilibrium_dimension_window": margin < d_eq < D - margin,
        "strong_eps_delta_vs_C2": eps2dp < 2 * 2 / c.C2,
        "strong_D_over_log_D": D / logD > 100 * 2 / eps2dp,
        "D_exceeds_inverse_delta": D > 1 / config.delta,
    }


def run_equilibrium_experiment(config: ExperimentConfig, workers: int = 1) -> TypicalityEstimate:
    """Does every probe state spend a ``1 - delta'`` fraction of time with
    equilibrium occupation above ``1 - 2 eps``?

    The occupation of the equilibrium block is evaluated as one minus that of
    its complement, which has the same deviation functional and a much
    smaller factor.
    """
    D = config.D
    if len(config.dims) != 2:
        raise DomainError("equilibrium needs dims = [d_eq, D - d_eq]")
    d_eq = config.dims[0]
    eps, dp = config.params.epsilon, config.params.delta_prime
    if d_eq / D < 1 - eps:
        raise DomainError(f"d_eq/D = {d_eq / D:.4g} is below 1 - epsilon")
    spectrum = experiment_spectrum(config)
    level = 1 - 2 * eps
    need = 1 - dp

    def trial(k):
        seed = config.seed.trial(k)
        decomp = uniform_decomposition(config.dims, seed)
        P_eq = build_projector_overlaps(decomp, 0)
        eq_diag = np.asarray(P_eq.diagonal)
        eig_pass = float(np.mean(eq_diag > level))
        eth = float(np.max(np.abs(eq_diag - d_eq / D)))
        rec = {"trial": k, "eigenstate_pass_fraction": eig_pass, "eigenstate_max_deviation": eth}
        if d_eq == D:
            rec.update(uniform_min_fraction=1.0, worst_case_fraction=1.0, success=True)
            return rec
        P_out = build_projector_overlaps(decomp, 1)
        times = time_grid(occupation_horizon(spectrum, config.cycles), config.n_samples, seed.spawn(1))
        probes = [uniform_state(D, seed.spawn(2, i)) for i in range(config.uniform_probes)]
        p_worst = worst_case_G(P_out, seed=seed.spawn(3))[1]
        probes.append(StateVector.normalized(np.sqrt(np.maximum(p_worst, 0.0))))
        fracs = [float(np.mean(1 - macro_occupation_at_time(psi, spectrum, P_out, times) > level))
                 for psi in probes]
        rec["uniform_min_fraction"] = min(fracs[:-1]) if config.uniform_probes else 1.0
        rec["worst_case_fraction"] = fracs[-1]
        # stationary eigenstates pass iff their occupation itself is above the level
        rec["success"] = eig_pass == 1.0 and min(fracs) > need
        return rec

    records = _map(trial, config.trials, workers)
    diagnostics = {
        "level": level, "required_time_fraction": need,
        "eigenstates_all_pass_fraction": float(np.mean([r["eigenstate_pass_fraction"] == 1.0 for r in records])),
        "mean_eigenstate_pass_fraction": float(np.mean([r["eigenstate_pass_fraction"] for r in records])),
        "uniform_probes_pass_fraction": float(np.mean([r["uniform_min_fraction"] > need for r in records])),
        "worst_case_probe_pass_fraction": float(np.mean([r["worst_case_fraction"] > need for r in records])),
        "max_eigenstate_deviation": float(max(r["eigenstate_max_deviation"] for r in records)),
    }
    flags = [r["success"] for r in records]
    return _estimate(config, flags, hypothesis_check=equilibrium_hypotheses(config),
                     diagnostics=diagnostics,
                     per_trial_records=records if config.record_trials else None)


# --- quantifier order -------------------------------------------------------

def run_quantifier_contrast(config: ExperimentConfig, workers: int = 1) -> ContrastReport:
    """Contrast "for most decompositions, every state" with "for every state,
    most decompositions".
    """
    if config.trials < 30:
        raise DomainError("quantifier_contrast needs at least 30 trials")
    D, nu = config.D, config.block
    d = config.dims[nu]
    target = d / D
    thr = thresholds(config)[nu]
    psi_fixed = uniform_state(D, config.seed.spawn(_FIXED_STATE_KEY))
    n_wc = min(config.worst_case_trials, config.trials)

    def trial(k):
        seed = config.seed.trial(k)
        P = build_projector_overlaps(uniform_decomposition(config.dims, seed), nu)
        psi = uniform_state(D, seed.spawn(1))
        G = deviation_G(psi, P)
        avg2 = (time_averaged_occupation(psi, P) - target) ** 2
        rec = {"G": G, "avg_dev2": avg2}
        if k < n_wc:
            p0 = np.asarray(psi_fixed.population)
            rec["G_fixed"] = population_G(p0, P, d, D)
            rec["worst"] = worst_case_G(P, seed=seed.spawn(2), extra_starts=[p0])[0]
            off, dia = condition_terms(P)
            rec["cv"] = off + dia
        return rec

    records = _map(trial, config.trials, workers)
    G = np.array([r["G"] for r in records])
    avg2 = np.array([r["avg_dev2"] for r in records])
    n = G.size
    scale = target ** 2
    average_deviation_bound = 2 * (D - d) / (d * D)
    averages = {
        "pairs": n,
        "mean_G_ratio": float(np.mean(G) / scale),
        "mean_G_ratio_se": float(np.std(G, ddof=1) / math.sqrt(n) / scale),
        "average_deviation_ratio": float(np.mean(avg2) / scale),
        "average_deviation_ratio_se": float(np.std(avg2, ddof=1) / math.sqrt(n) / scale),
        "average_deviation_bound": average_deviation_bound,
        "average_deviation_bound_holds": bool(np.mean(avg2) / scale < average_deviation_bound),
        "jensen_holds": bool(np.all(avg2 <= G + 1e-15)),
    }

    sub = records[:n_wc]
    fixed_good = np.array([r["G_fixed"] < thr for r in sub])
    all_good = np.array([r["worst"] < thr for r in sub])
    certified = np.array([r["cv"] < thr for r in sub])
    contrast = {
        "threshold": thr, "decompositions": n_wc,
        "fraction_fixed_state_good": float(np.mean(fixed_good)),
        "fraction_all_states_good": float(np.mean(all_good)),
        "fraction_all_states_certified": float(np.mean(certified)),
        "worst_case_G_mean": float(np.mean([r["worst"] for r in sub])),
        "fixed_state_G_mean": float(np.mean([r["G_fixed"] for r in sub])),
        "inclusion_holds": bool(np.all(certified <= all_good) and np.all(all_good <= fixed_good)),
    }

    aligned = aligned_contrast(config.dims, nu, thr, config.seed.spawn(_ALIGNED_KEY))
    hyp = {"dimension_at_least_3": D >= 3}
    return ContrastReport(averages, contrast, aligned, hyp)


def aligned_contrast(dims, nu: int, thr: float, seed: SeedSpec) -> dict[str, Any]:
    """Macro-spaces spanned by energy eigenstates: a flat-population state is
    perfectly normal while block eigenstates never are.
    """
    decomp = MacroDecomposition.aligned(dims)
    D, d = decomp.D, decomp.dims[nu]
    P = build_projector_overlaps(decomp, nu)
    phases = np.exp(2j * np.pi * seed.generator().random(D))
    flat = StateVector(phases / math.sqrt(D))
    G_flat = deviation_G(flat, P)
    G_random = deviation_G(uniform_state(D, seed.spawn(1)), P)
    worst, p_worst = worst_case_G(P, seed=seed.spawn(2))
    return {
        "threshold": thr,
        "G_flat_state": G_flat,
        "G_random_state": G_random,
        "worst_case_G": worst,
        "worst_case_support": [int(i) for i in np.nonzero(p_worst > 1e-9)[0]],
        "expected_worst_case": max((1 - d / D) ** 2, (d / D) ** 2),
        "fixed_state_good": bool(G_flat < thr),
        "worst_case_fails": bool(worst >= thr),
        "worst_case_at_least_square_fraction": bool(worst >= (d / D) ** 2),
    }


# --- scaling --------------------------------------------------------------

def run_scaling_experiment(Ds, fraction: float = 0.25, trials: int = 100,
                           seed: SeedSpec = SeedSpec(), workers: int = 1) -> dict[str, Any]:
    """Median condition value of a ``fraction * D`` block across dimensions,
    with log-log slopes against ``D / log D`` and against ``D``.
    """
    medians = []
    for i, D in enumerate(Ds):
        d = int(round(fraction * D))
        rows = np.arange(d)
        base = seed.spawn(i)
        vals = _map(lambda k: sum(max_statistics(haar_unitary(D, base.trial(k)), rows)), trials, workers)
        medians.append(float(np.median(vals)))
    logs = np.log(np.asarray(Ds, dtype=float))
    y = np.log(medians)
    slope_pred = float(np.polyfit(logs - np.log(logs), y, 1)[0])
    slope_D = float(np.polyfit(logs, y, 1)[0])
    return {"D": list(Ds), "medians": medians, "slope_vs_D_over_log_D": slope_pred, "slope_vs_D": slope_D}


def run_experiment(config: ExperimentConfig, workers: int = 1):
    runner = {
        "lemma1": run_lemma1_experiment,
        "lemma_bounds": run_lemma_bounds_experiment,
        "theorem1": run_typicality_experiment,
        "theorem2": run_typicality_experiment,
        "theorem3": run_typicality_experiment,
        "equilibrium": run_equilibrium_experiment,
        "quantifier_contrast": run_quantifier_contrast,
    }[config.variant]
    return runner(config, workers=workers)
