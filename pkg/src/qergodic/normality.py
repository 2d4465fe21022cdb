"""Deviation functional, normality bounds and time-fraction estimates.

``G`` is the infinite-time mean of ``(||P_nu psi_t||^2 - d/D)^2``. For a
spectrum without degeneracies and resonances it reduces to a function of the
populations ``p_alpha = |c_alpha|^2``::

    G(p) = sum_{a != b} p_a p_b |P_ab|^2 + (sum_a p_a P_aa - d/D)^2

which is bounded by the state-independent *condition value*
``max_{a != b} |P_ab|^2 + max_a (P_aa - d/D)^2``.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import DomainError, SpectrumError
from .hilbert import (
    EnergySpectrum,
    MacroDecomposition,
    ProjectorOverlaps,
    StateVector,
    build_projector_overlaps,
    macro_occupation_at_time,
    occupations,
    time_averaged_occupation,
)
from .sampling import SeedSpec
from .spectra import check_spectrum, occupation_horizon

Sense = Literal["von_neumann", "strong"]


class ConvergenceWarning(UserWarning):
    """A finite-window estimate moved noticeably when the window was doubled."""


@dataclass(frozen=True)
class NormalityParams:
    epsilon: float
    delta_prime: float
    N: int
    sense: Sense = "strong"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if not 0 < self.delta_prime < 1:
            raise DomainError("delta_prime must lie in (0, 1)")
        if int(self.N) < 1:
            raise DomainError("N must be a positive integer")
        if self.sense not in ("von_neumann", "strong"):
            raise DomainError(f"unknown sense {self.sense!r}")

    def tolerance(self, d: int, D: int) -> float:
        """Per-time allowed deviation of the occupation from ``d/D``."""
        if self.sense == "von_neumann":
            return self.epsilon * np.sqrt(d / (self.N * D))
        return self.epsilon * d / D


def _dims(P: ProjectorOverlaps, d, D) -> tuple[int, int]:
    d = P.dim if d is None else int(d)
    D = P.D if D is None else int(D)
    if d != P.dim or D != P.D:
        raise DomainError(f"(d, D) = ({d}, {D}) does not match projector ({P.dim}, {P.D})")
    return d, D


def _require_closed_form(spectrum: EnergySpectrum | None) -> None:
    if spectrum is None:
        return
    report = check_spectrum(spectrum)
    if not (report.is_nondegenerate and report.is_nonresonant):
        raise SpectrumError("closed-form G needs a spectrum without degeneracies and resonances")


def population_G(p: np.ndarray, P: ProjectorOverlaps, d: int, D: int) -> float:
    """``G`` as a function of a population vector ``p``."""
    m = P.factor
    # sum_{a,b} p_a p_b |P_ab|^2 = ||conj(M) diag(p) M^T||_F^2, a d x d matrix
    small = (m.conj() * p[None, :]) @ m.T
    full = float(np.sum(small.real ** 2 + small.imag ** 2))
    diag = P.diagonal
    off = full - float(np.sum((p * diag) ** 2))
    return max(off, 0.0) + (float(p @ diag) - d / D) ** 2


def deviation_G(state: StateVector, P: ProjectorOverlaps, d: int | None = None,
                D: int | None = None, spectrum: EnergySpectrum | None = None) -> float:
    """Closed-form infinite-time mean of ``(||P psi_t||^2 - d/D)^2``.

    Pass ``spectrum`` to have the no-degeneracy/no-resonance hypothesis
    checked; a spectrum that fails it raises :class:`SpectrumError`.
    """
    d, D = _dims(P, d, D)
    if state.dim != D:
        raise DomainError("state and projector dimensions differ")
    _require_closed_form(spectrum)
    return population_G(np.asarray(state.population), P, d, D)


def time_grid(T: float, n_samples: int, seed: SeedSpec) -> np.ndarray:
    """One uniform draw in each of ``n_samples`` equal cells of ``[0, T)``.

    A single shared offset is not enough: when the step ``T / n`` exceeds
    the fastest period, the sampled phases form a Weyl sequence that can
    alias a resonance-free signal by percent-level amounts.
    """
    if not T > 0:
        raise DomainError("T must be positive")
    n = int(n_samples)
    if n < 1:
        raise DomainError("n_samples must be positive")
    u = seed.generator().random(n)
    return (np.arange(n) + u) * (T / n)


def deviation_G_empirical(state: StateVector, spectrum: EnergySpectrum, P: ProjectorOverlaps,
                          d: int | None, D: int | None, T: float, n_samples: int,
                          seed: SeedSpec = SeedSpec()) -> float:
    """Sampled time average of ``(||P psi_t||^2 - d/D)^2`` over ``[0, T]``.

    Makes no assumption on the spectrum.
    """
    d, D = _dims(P, d, D)
    if int(n_samples) < 2:
        raise DomainError("n_samples must be at least 2")
    occ = macro_occupation_at_time(state, spectrum, P, time_grid(T, n_samples, seed))
    return float(np.mean((occ - d / D) ** 2))


def condition_value(P: ProjectorOverlaps, d: int | None = None, D: int | None = None) -> float:
    d, D = _dims(P, d, D)
    mat = P.matrix
    mag = mat.real ** 2 + mat.imag ** 2
    np.fill_diagonal(mag, 0.0)
    off = float(mag.max()) if D > 1 else 0.0
    diag = float(np.max((P.diagonal - d / D) ** 2))
    return off + diag


def condition_terms(P: ProjectorOverlaps) -> tuple[float, float]:
    """The two maxima of the condition value separately (off-diagonal, diagonal)."""
    mat = P.matrix
    mag = mat.real ** 2 + mat.imag ** 2
    np.fill_diagonal(mag, 0.0)
    return float(mag.max()), float(np.max((P.diagonal - P.dim / P.D) ** 2))


def normality_bounds(params: NormalityParams, d: int, D: int) -> tuple[float, float]:
    """``(bound1, bound2)``: G below bound1 gives von Neumann normality, below
    bound2 strong normality.
    """
    eps2, dp, N = params.epsilon ** 2, params.delta_prime, params.N
    bound1 = eps2 * (d / (N * D)) * (dp / N)
    bound2 = eps2 * (d / D) ** 2 * (dp / N)
    return bound1, bound2


def sense_bound(params: NormalityParams, d: int, D: int) -> float:
    b1, b2 = normality_bounds(params, d, D)
    return b1 if params.sense == "von_neumann" else b2


def _fractions(occ: np.ndarray, decomp: MacroDecomposition, params: NormalityParams):
    D = decomp.D
    target = np.array([d / D for d in decomp.dims])
    tol = np.array([params.tolerance(d, D) for d in decomp.dims])
    ok = np.abs(occ - target[None, :]) < tol[None, :]
    return float(np.mean(np.all(ok, axis=1))), [float(x) for x in np.mean(ok, axis=0)]


def time_fraction_normal(state: StateVector, spectrum: EnergySpectrum, decomp: MacroDecomposition,
                         params: NormalityParams, T: float | None = None, n_samples: int = 4096,
                         seed: SeedSpec = SeedSpec(), check_convergence: bool = True):
    """Fraction of sampled times in ``[0, T]`` at which every block satisfies
    the per-time inequality of ``params.sense``; also per-block fractions.

    ``T`` defaults to 200 periods of the smallest level spacing. With
    ``check_convergence`` the estimate is repeated on ``[0, 2T]`` and a
    :class:`ConvergenceWarning` is issued if it moves by more than 0.01.
    """
    if int(n_samples) < 16:
        raise DomainError("n_samples must be at least 16")
    if T is None:
        T = occupation_horizon(spectrum)
    occ = occupations(state, spectrum, decomp, time_grid(T, n_samples, seed))
    frac, per_block = _fractions(occ, decomp, params)
    if check_convergence:
        occ2 = occupations(state, spectrum, decomp, time_grid(2 * T, n_samples, seed.spawn(1)))
        frac2, _ = _fractions(occ2, decomp, params)
        if abs(frac2 - frac) > 0.01:
            warnings.warn(f"time fraction moved from {frac:.4f} to {frac2:.4f} when doubling T",
                          ConvergenceWarning, stacklevel=2)
    return frac, per_block


def macro_observable_deviation(state: StateVector, spectrum: EnergySpectrum,
                               decomp: MacroDecomposition, weights: Sequence[float],
                               t: float) -> tuple[float, float]:
    """For ``A = sum_nu w_nu P_nu`` return ``|<psi_t|A|psi_t> - tr A / D|`` and
    ``sqrt(tr(A^2) / D)``.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (decomp.N,):
        raise DomainError(f"expected {decomp.N} weights, got {w.size}")
    occ = occupations(state, spectrum, decomp, [t])[0]
    frac = np.asarray(decomp.dims, dtype=float) / decomp.D
    lhs = abs(float(w @ occ) - float(w @ frac))
    return lhs, float(np.sqrt(np.sum(w ** 2 * frac)))


# --- worst case over initial states ---------------------------------------

def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = 1}`` (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _quadratic(P: ProjectorOverlaps, d: int, D: int):
    """``G(p) = p^T A p + b^T p + c`` on the simplex."""
    mat = P.matrix
    a = np.asarray(P.diagonal)
    A = mat.real ** 2 + mat.imag ** 2
    np.fill_diagonal(A, 0.0)
    A += np.outer(a, a)
    return A, -2.0 * (d / D) * a, (d / D) ** 2


def _ascend(A, b, c, x, lipschitz, max_iter=10_000, tol=1e-10, armijo=1e-4):
    def f(y):
        return float(y @ A @ y + b @ y + c)

    fx = f(x)
    step = 1.0 / lipschitz
    for _ in range(max_iter):
        g = 2.0 * A @ x + b
        s = min(2.0 * step, 1e3 / lipschitz)
        while True:
            y = project_simplex(x + s * g)
            fy = f(y)
            if fy >= fx + armijo * float(g @ (y - x)) or s < 1e-3 / lipschitz:
                break
            s *= 0.5
        mapping = np.linalg.norm(y - x) / s
        step = s
        if fy < fx:  # no ascent possible from here at any tested step
            break
        x, fx = y, fy
        if mapping < tol:
            break
    return fx, x


def worst_case_G(P: ProjectorOverlaps, d: int | None = None, D: int | None = None,
                 starts: int = 32, seed: SeedSpec = SeedSpec(),
                 extra_starts: Sequence[np.ndarray] = ()) -> tuple[float, np.ndarray]:
    """Largest ``G(p)`` found over the population simplex.

    Multi-start projected-gradient ascent from the best ``min(D, 16)``
    vertices, random Dirichlet(1) points (``starts`` points in total, at
    least one random) and any ``extra_starts``. The result is a lower bound
    on the true maximum; :func:`condition_value` is an upper bound.
    """
    d, D = _dims(P, d, D)
    A, b, c = _quadratic(P, d, D)
    lipschitz = max(2.0 * float(np.max(np.abs(np.linalg.eigvalsh(A)))), 1e-12)

    vertex_scores = (np.asarray(P.diagonal) - d / D) ** 2
    n_vertex = min(D, 16)
    top = np.argsort(-vertex_scores, kind="stable")[:n_vertex]
    points = [np.eye(D)[i] for i in top]
    rng = seed.generator()
    points += list(rng.dirichlet(np.ones(D), size=max(int(starts) - n_vertex, 1)))
    points += [np.asarray(p, dtype=float) for p in extra_starts]

    best_f, best_p = -np.inf, None
    for x0 in points:
        fx, x = _ascend(A, b, c, x0, lipschitz)
        if fx > best_f:
            best_f, best_p = fx, x
    return float(best_f), best_p


# --- reports ----------------------------------------------------------------

@dataclass
class BlockReport:
    block: int
    dim: int
    G_closed_form: float
    condition_value: float
    bound1: float
    bound2: float
    sufficient: bool
    condition_sufficient: bool
    time_fraction: float | None = None
    worst_case_G: float | None = None


@dataclass
class NormalityReport:
    params: NormalityParams
    per_block: list[BlockReport] = field(default_factory=list)
    overall_normal: bool = False
    overall_time_fraction: float | None = None
    T: float | None = None
    n_samples: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def normality_report(state: StateVector, spectrum: EnergySpectrum, decomp: MacroDecomposition,
                     params: NormalityParams, T: float | None = None, n_samples: int = 4096,
                     seed: SeedSpec = SeedSpec(), time_fractions: bool = True,
                     worst_case: bool = False) -> NormalityReport:
    """Per-block ``G``, condition value and bounds for one system.

    ``sufficient`` means ``G`` is below the bound of ``params.sense``, which
    certifies normality of this state; ``condition_sufficient`` means the
    condition value is, which certifies it for every state.
    """
    if params.N != decomp.N:
        raise DomainError(f"params.N = {params.N} but decomposition has {decomp.N} blocks")
    _require_closed_form(spectrum)
    D = decomp.D
    blocks = []
    for nu, d in enumerate(decomp.dims):
        P = build_projector_overlaps(decomp, nu)
        G = deviation_G(state, P, d, D)
        cv = condition_value(P, d, D)
        b1, b2 = normality_bounds(params, d, D)
        bound = b1 if params.sense == "von_neumann" else b2
        wc = worst_case_G(P, d, D, seed=seed.spawn(2, nu))[0] if worst_case else None
        blocks.append(BlockReport(nu, d, G, cv, b1, b2, G < bound, cv < bound, worst_case_G=wc))
    report = NormalityReport(params, blocks, overall_normal=all(b.sufficient for b in blocks))
    if time_fractions:
        if T is None:
            T = occupation_horizon(spectrum)
        frac, per = time_fraction_normal(state, spectrum, decomp, params, T, n_samples, seed)
        for b, f in zip(blocks, per):
            b.time_fraction = f
        report.overall_time_fraction = frac
        report.T, report.n_samples = float(T), int(n_samples)
    return report


def stationary_fraction(P_diag_by_block: Sequence[float], decomp: MacroDecomposition,
                        params: NormalityParams) -> float:
    """Time fraction for an energy eigenstate, whose occupations are constant."""
    ok = all(abs(x - d / decomp.D) < params.tolerance(d, decomp.D)
             for x, d in zip(P_diag_by_block, decomp.dims))
    return 1.0 if ok else 0.0


__all__ = [
    "BlockReport", "ConvergenceWarning", "NormalityParams", "NormalityReport",
    "condition_terms", "condition_value", "deviation_G", "deviation_G_empirical",
    "macro_observable_deviation", "normality_bounds", "normality_report",
    "population_G", "project_simplex", "sense_bound", "stationary_fraction",
    "time_averaged_occupation", "time_fraction_normal", "time_grid", "worst_case_G",
]
