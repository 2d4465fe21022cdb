"""Reproducible uniform (Haar) sampling.

Every draw is a pure function of its dimension arguments and a
:class:`SeedSpec`. A spec maps to a counter-based Philox generator keyed by
``SeedSequence(master_seed, spawn_key=(stream_index, *subkey))``, so trial
``k`` of an experiment can be computed on any worker in any order and still
produce the same numbers.

Gaussians come from Box-Muller on the generator's 53-bit uniforms rather
than numpy's ziggurat, which keeps the recipe simple to reproduce elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .hilbert import EnergySpectrum, MacroDecomposition, StateVector, UnitaryMatrix


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0
    stream_index: int = 0
    subkey: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")
        if int(self.stream_index) < 0 or any(int(k) < 0 for k in self.subkey):
            raise DomainError("stream indices must be non-negative")

    def spawn(self, *keys: int) -> "SeedSpec":
        """Independent child stream; ``spawn(a).spawn(b) == spawn(a, b)``."""
        return SeedSpec(self.master_seed, self.stream_index, self.subkey + tuple(keys))

    def trial(self, k: int) -> "SeedSpec":
        """Seed for trial ``k``: the stream index advanced by ``k``."""
        return SeedSpec(self.master_seed, self.stream_index + k, self.subkey)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.master_seed),
                                    spawn_key=(int(self.stream_index), *self.subkey))
        return np.random.Generator(np.random.Philox(ss))

    def to_dict(self) -> dict:
        out = {"master_seed": int(self.master_seed), "stream_index": int(self.stream_index)}
        if self.subkey:
            out["subkey"] = list(self.subkey)
        return out


def complex_gaussians(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussians (independent N(0,1) real and imaginary parts)."""
    n = int(np.prod(shape))
    u = rng.random((2, n))
    # 1 - u lies in (0, 1], so the log is finite
    r = np.sqrt(-2.0 * np.log1p(-u[0]))
    theta = 2.0 * np.pi * u[1]
    return (r * np.exp(1j * theta)).reshape(shape)


def _check_dim(D: int) -> int:
    D = int(D)
    if D < 1:
        raise DomainError("dimension must be at least 1")
    return D


def haar_unitary(D: int, seed: SeedSpec) -> UnitaryMatrix:
    D = _check_dim(D)
    z = complex_gaussians(seed.generator(), (D, D))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    # make R's diagonal positive; without this the distribution is not Haar
    q = q * (d / np.abs(d))[None, :]
    return UnitaryMatrix(q)


def uniform_state(D: int, seed: SeedSpec) -> StateVector:
    D = _check_dim(D)
    return StateVector.normalized(complex_gaussians(seed.generator(), (D,)))


def uniform_decomposition(dims: Sequence[int], seed: SeedSpec,
                          D: int | None = None) -> MacroDecomposition:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d <= 0 for d in dims):
        raise DomainError("dims must be positive integers")
    total = sum(dims)
    if D is not None and total != D:
        raise DomainError(f"dims sum to {total}, not D={D}")
    return MacroDecomposition(dims, haar_unitary(total, seed))


def conjugated_hamiltonian(spectrum: EnergySpectrum, seed: SeedSpec) -> UnitaryMatrix:
    """Eigenbasis ``U`` of ``H = U H_0 U^-1`` relative to the fixed macro basis.

    Column ``alpha`` of ``U`` is the eigenvector for ``E_alpha`` written in the
    macro basis.
    """
    return haar_unitary(spectrum.dim, seed)


def decomposition_from_hamiltonian(dims: Sequence[int], eigenbasis: UnitaryMatrix) -> MacroDecomposition:
    """Fixed macro-aligned decomposition seen from a random eigenbasis.

    With ``phi_alpha = U e_alpha`` and ``omega_gamma = e_gamma`` the alignment
    entries are ``<phi_alpha|omega_gamma> = conj(U[gamma, alpha])``.
    """
    return MacroDecomposition(tuple(dims), UnitaryMatrix(eigenbasis.entries.conj()))


def lemma1_statistics(d: int, D: int, eps: float) -> tuple[float, float, float]:
    """Mean and variance of ``||P phi||^2`` for uniform ``phi`` and a fixed
    ``d``-dimensional subspace, plus the Chebyshev lower bound on
    ``P(|X - d/D| < eps d/D)``.
    """
    d, D = int(d), int(D)
    if not 1 <= d <= D:
        raise DomainError(f"need 1 <= d <= D, got d={d}, D={D}")
    if not eps > 0:
        raise DomainError("eps must be positive")
    mean = d / D
    var = (1.0 / d) * mean ** 2 * (D - d) / (D + 1)
    return mean, var, 1.0 - 1.0 / (eps ** 2 * d)
