"""Spectrum generation and the degeneracy / resonance hypotheses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError, SpectrumError
from .hilbert import EnergySpectrum
from .sampling import SeedSpec

MAX_VIOLATIONS = 100
MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class SpectrumReport:
    is_nondegenerate: bool
    is_nonresonant: bool
    min_gap: float
    min_frequency_separation: float
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "is_nondegenerate": self.is_nondegenerate,
            "is_nonresonant": self.is_nonresonant,
            "min_gap": self.min_gap,
            "min_frequency_separation": self.min_frequency_separation,
            "violations": [list(v) for v in self.violations],
        }


def ordered_differences(energies: np.ndarray):
    """All ``E_a - E_b`` with ``a != b``, sorted, with their index pairs."""
    D = energies.size
    a, b = np.nonzero(~np.eye(D, dtype=bool))
    diffs = energies[a] - energies[b]
    order = np.argsort(diffs, kind="stable")
    return diffs[order], a[order], b[order]


def check_spectrum(spectrum: EnergySpectrum) -> SpectrumReport:
    e = spectrum.energies
    violations: list[tuple[int, ...]] = []

    gaps = np.diff(e)
    degenerate = np.nonzero(gaps <= spectrum.degeneracy_tol)[0]
    violations.extend((int(i), int(i) + 1) for i in degenerate[:MAX_VIOLATIONS])
    nondegenerate = degenerate.size == 0
    min_gap = float(gaps.min()) if nondegenerate else 0.0

    # distinct entries of this list are never a trivial coincidence, because
    # the a == b differences are excluded and each ordered pair appears once
    diffs, a, b = ordered_differences(e)
    seps = np.diff(diffs)
    resonant = np.nonzero(seps <= spectrum.resonance_tol)[0]
    room = MAX_VIOLATIONS - len(violations)
    violations.extend((int(a[i]), int(b[i]), int(a[i + 1]), int(b[i + 1]))
                      for i in resonant[:max(room, 0)])
    nonresonant = resonant.size == 0
    min_sep = float(seps.min()) if nonresonant else 0.0

    return SpectrumReport(nondegenerate, nonresonant, min_gap, min_sep, violations)


def generated_resonance_tol(D: int) -> float:
    """Resonance tolerance of generated spectra, relative to their range.

    The ``D (D - 1)`` ordered differences of uniform draws are typically
    ``~ range / D^4`` apart, so the default ``1e-9`` is unattainable beyond
    ``D ~ 30``. Shrink it to ``1e-3 / D^4`` there, floored at ``1e-13`` to
    stay well above rounding in the differences.
    """
    return max(1e-13, min(1e-9, 1e-3 / float(D) ** 4))


def generate_nonresonant_spectrum(D: int, seed: SeedSpec, span: float = 1.0) -> EnergySpectrum:
    """``D`` sorted uniform draws on ``[0, span]``, redrawn until free of
    degeneracies and resonances under :func:`generated_resonance_tol`.
    """
    if D < 2:
        raise SpectrumError("a spectrum needs D >= 2")
    if not span > 0:
        raise SpectrumError("span must be positive")
    rng = seed.generator()
    rel = generated_resonance_tol(D)
    for _ in range(MAX_ATTEMPTS):
        e = np.sort(rng.random(D) * span)
        spectrum = EnergySpectrum(e, resonance_tol=rel * (e[-1] - e[0]))
        report = check_spectrum(spectrum)
        if report.is_nondegenerate and report.is_nonresonant:
            return spectrum
    raise GenerationError(f"no resonance-free spectrum after {MAX_ATTEMPTS} attempts")


def slowest_frequency(report: SpectrumReport) -> float:
    """Smallest nonzero frequency in ``|occupation - d/D|^2``.

    Its Fourier content consists of single differences ``E_a - E_b`` and of
    differences of two such differences, so the slowest mode is the smaller
    of ``min_gap`` and ``min_frequency_separation``.
    """
    return min(report.min_gap, report.min_frequency_separation)


def occupation_horizon(spectrum: EnergySpectrum, cycles: int = 200) -> float:
    """``cycles`` periods of the smallest level spacing; needs no degeneracy only."""
    if int(cycles) < 1:
        raise SpectrumError("cycles must be a positive integer")
    report = check_spectrum(spectrum)
    if not report.is_nondegenerate:
        raise SpectrumError("T_occupation undefined: spectrum is degenerate")
    return float(cycles * 2 * np.pi / report.min_gap)


def time_horizon(spectrum: EnergySpectrum, cycles: int = 200) -> tuple[float, float]:
    """Averaging windows ``(T_occupation, T_deviation)`` spanning ``cycles``
    periods of the slowest relevant frequency.
    """
    if int(cycles) < 1:
        raise SpectrumError("cycles must be a positive integer")
    report = check_spectrum(spectrum)
    if not report.is_nondegenerate:
        raise SpectrumError("T_occupation undefined: spectrum is degenerate")
    if not report.is_nonresonant:
        raise SpectrumError("T_deviation undefined: spectrum has resonances")
    t_occ = cycles * 2 * np.pi / report.min_gap
    t_dev = cycles * 2 * np.pi / slowest_frequency(report)
    return float(t_occ), float(t_dev)
