"""Numerical checks of normal typicality for closed quantum systems."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, GenerationError, SpectrumError
from .hilbert import (
    EnergySpectrum,
    MacroDecomposition,
    ProjectorOverlaps,
    StateVector,
    UnitaryMatrix,
    build_projector_overlaps,
    effective_dimension,
    macro_occupation_at_time,
    occupations,
    time_averaged_occupation,
)
from .normality import (
    NormalityParams,
    NormalityReport,
    condition_value,
    deviation_G,
    deviation_G_empirical,
    macro_observable_deviation,
    normality_bounds,
    normality_report,
    time_fraction_normal,
    worst_case_G,
)
from .sampling import (
    SeedSpec,
    conjugated_hamiltonian,
    haar_unitary,
    lemma1_statistics,
    uniform_decomposition,
    uniform_state,
)
from .spectra import SpectrumReport, check_spectrum, generate_nonresonant_spectrum, time_horizon
from .typicality import (
    ExperimentConfig,
    TypicalityEstimate,
    run_equilibrium_experiment,
    run_experiment,
    run_lemma_bounds_experiment,
    run_quantifier_contrast,
    run_typicality_experiment,
    wilson_interval,
)
