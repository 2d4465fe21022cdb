"""Finite-dimensional Hilbert space objects in the energy eigenbasis.

Everything here is expressed relative to the eigenbasis ``phi_1..phi_D`` of
the Hamiltonian, so the Hamiltonian itself is just its list of energies and
is never stored as a matrix. A macro decomposition is described by a unitary
``W`` whose row ``gamma`` holds the coefficients ``<phi_alpha|omega_gamma>``
of the macro-aligned basis vector ``omega_gamma``; block ``nu`` is spanned by
the rows listed in its index set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError

# constructors reject violations above this; internal checks use 1e-10
CONSTRUCT_TOL = 1e-8
INTERNAL_TOL = 1e-10
DEFAULT_RELATIVE_TOL = 1e-9
# time points per batched phase matrix
_CHUNK = 2048


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EnergySpectrum:
    """Sorted energies ``E_1 <= ... <= E_D`` (hbar = 1).

    Tolerances default to ``1e-9 * (E_max - E_min)``.
    """

    energies: np.ndarray
    degeneracy_tol: float | None = None
    resonance_tol: float | None = None

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise DomainError("a spectrum needs at least two energies")
        if not np.all(np.isfinite(e)):
            raise DomainError("energies must be finite")
        if np.any(np.diff(e) < 0):
            raise DomainError("energies must be in non-decreasing order")
        width = float(e[-1] - e[0])
        for name in ("degeneracy_tol", "resonance_tol"):
            tol = getattr(self, name)
            tol = DEFAULT_RELATIVE_TOL * width if tol is None else float(tol)
            if not tol >= 0:
                raise DomainError(f"{name} must be non-negative")
            object.__setattr__(self, name, tol)
        object.__setattr__(self, "energies", _frozen(e))

    @property
    def dim(self) -> int:
        return self.energies.size

    def __len__(self) -> int:
        return self.dim

    def to_dict(self) -> dict:
        return {
            "energies": [float(x) for x in self.energies],
            "tolerances": {
                "degeneracy_tol": self.degeneracy_tol,
                "resonance_tol": self.resonance_tol,
            },
        }

    @classmethod
    def from_dict(cls, data) -> "EnergySpectrum":
        if isinstance(data, list):
            return cls(np.asarray(data, dtype=float))
        tol = data.get("tolerances", {}) or {}
        return cls(
            np.asarray(data["energies"], dtype=float),
            degeneracy_tol=tol.get("degeneracy_tol"),
            resonance_tol=tol.get("resonance_tol"),
        )


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    entries: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.entries, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
            raise DomainError("a unitary must be a non-empty square matrix")
        err = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
        if err > CONSTRUCT_TOL:
            raise DomainError(f"matrix is not unitary (max deviation {err:.3g})")
        object.__setattr__(self, "entries", _frozen(u))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class StateVector:
    """Coefficients ``c_alpha = <phi_alpha|psi_0>``.

    Input whose norm is off by more than 1e-8 is rejected; anything closer is
    renormalized.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size < 1:
            raise DomainError("a state needs at least one coefficient")
        norm2 = float(np.sum(np.abs(c) ** 2))
        if abs(norm2 - 1.0) > CONSTRUCT_TOL:
            raise DomainError(f"state is not normalized (norm^2 = {norm2:.12g})")
        object.__setattr__(self, "coeffs", _frozen(c / np.sqrt(norm2)))

    @classmethod
    def normalized(cls, raw: Sequence[complex]) -> "StateVector":
        c = np.asarray(raw, dtype=complex)
        n = np.linalg.norm(c)
        if n == 0:
            raise DomainError("cannot normalize the zero vector")
        return cls(c / n)

    @classmethod
    def eigenstate(cls, D: int, alpha: int) -> "StateVector":
        c = np.zeros(D, dtype=complex)
        c[alpha] = 1.0
        return cls(c)

    @cached_property
    def population(self) -> np.ndarray:
        return _frozen(np.abs(self.coeffs) ** 2)

    @property
    def dim(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True, eq=False)
class ProjectorOverlaps:
    """Matrix elements ``<phi_alpha|P_nu|phi_beta>`` of one macro projector.

    Stored through a ``d x D`` factor ``M`` with orthonormal rows, so that
    ``matrix[a, b] = sum_g M[g, a] * conj(M[g, b])``.
    """

    block_index: int
    dim: int
    factor: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.factor, dtype=complex)
        if m.ndim != 2 or m.shape[0] != self.dim:
            raise DomainError("factor must have one row per macro-space dimension")
        gram = m.conj() @ m.T
        err = np.max(np.abs(gram - np.eye(self.dim))) if self.dim else 0.0
        if err > CONSTRUCT_TOL:
            raise DomainError(f"factor rows are not orthonormal (deviation {err:.3g})")
        object.__setattr__(self, "factor", _frozen(m))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, block_index: int = 0) -> "ProjectorOverlaps":
        """Build from an explicit Hermitian idempotent matrix."""
        p = np.asarray(matrix, dtype=complex)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise DomainError("projector must be square")
        if np.max(np.abs(p - p.conj().T)) > CONSTRUCT_TOL:
            raise DomainError("projector is not Hermitian")
        if np.max(np.abs(p @ p - p)) > CONSTRUCT_TOL:
            raise DomainError("projector is not idempotent")
        d = int(round(np.trace(p).real))
        if abs(np.trace(p).real - d) > CONSTRUCT_TOL:
            raise DomainError("projector trace is not an integer")
        w, v = np.linalg.eigh(p)
        top = v[:, np.argsort(w)[::-1][:d]]
        return cls(block_index, d, top.T)

    @property
    def D(self) -> int:
        return self.factor.shape[1]

    @cached_property
    def matrix(self) -> np.ndarray:
        m = self.factor
        return _frozen(m.T @ m.conj())

    @cached_property
    def diagonal(self) -> np.ndarray:
        return _frozen(np.sum(np.abs(self.factor) ** 2, axis=0))


@dataclass(frozen=True, eq=False)
class MacroDecomposition:
    """Orthogonal decomposition into ``N`` macro-spaces.

    ``index_sets`` defaults to the consecutive partition ``{0..d_1-1}``,
    ``{d_1..d_1+d_2-1}``, ... (zero-based).
    """

    dims: tuple[int, ...]
    alignment: UnitaryMatrix
    index_sets: tuple[tuple[int, ...], ...] | None = field(default=None)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d <= 0 for d in dims):
            raise DomainError("dims must be a non-empty list of positive integers")
        D = self.alignment.dim
        if sum(dims) != D:
            raise DomainError(f"dims sum to {sum(dims)}, not D={D}")
        if self.index_sets is None:
            edges = np.cumsum((0,) + dims)
            sets = tuple(tuple(range(edges[i], edges[i + 1])) for i in range(len(dims)))
        else:
            sets = tuple(tuple(int(i) for i in s) for s in self.index_sets)
            if len(sets) != len(dims) or any(len(s) != d for s, d in zip(sets, dims)):
                raise DomainError("index sets must match dims")
            if sorted(i for s in sets for i in s) != list(range(D)):
                raise DomainError("index sets must partition 0..D-1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "index_sets", sets)

    @property
    def D(self) -> int:
        return self.alignment.dim

    @property
    def N(self) -> int:
        return len(self.dims)

    @classmethod
    def aligned(cls, dims: Sequence[int]) -> "MacroDecomposition":
        """Decomposition whose macro-spaces are spanned by energy eigenstates."""
        D = int(sum(dims))
        return cls(tuple(dims), UnitaryMatrix(np.eye(D, dtype=complex)))


def build_projector_overlaps(decomp: MacroDecomposition, nu: int) -> ProjectorOverlaps:
    if not 0 <= nu < decomp.N:
        raise DomainError(f"block index {nu} out of range for N={decomp.N}")
    rows = np.asarray(decomp.index_sets[nu])
    return ProjectorOverlaps(nu, decomp.dims[nu], decomp.alignment.entries[rows, :])


def _check_dims(*sizes: int) -> None:
    if len(set(sizes)) != 1:
        raise DomainError(f"dimension mismatch: {sizes}")


def macro_occupation_at_time(state: StateVector, spectrum: EnergySpectrum,
                             P: ProjectorOverlaps, t):
    """``||P_nu psi_t||^2``; ``t`` may be a scalar or an array of times."""
    _check_dims(state.dim, spectrum.dim, P.D)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    weighted = P.factor.conj() * state.coeffs[None, :]
    out = np.empty(times.size)
    for lo in range(0, times.size, _CHUNK):
        chunk = times[lo:lo + _CHUNK]
        phases = np.exp(-1j * np.outer(spectrum.energies, chunk))
        v = weighted @ phases
        out[lo:lo + _CHUNK] = np.sum(v.real ** 2 + v.imag ** 2, axis=0)
    return float(out[0]) if np.ndim(t) == 0 else out



def occupations(state: StateVector, spectrum: EnergySpectrum,
                decomp: MacroDecomposition, times) -> np.ndarray:
    """Occupations of every block, shape ``(len(times), N)``."""
    _check_dims(state.dim, spectrum.dim, decomp.D)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    cols = [macro_occupation_at_time(state, spectrum, build_projector_overlaps(decomp, nu), times)
            for nu in range(decomp.N)]
    return np.column_stack(cols) if cols else np.empty((times.size, 0))


def occupation_quadratic_form(state: StateVector, spectrum: EnergySpectrum,
                              P: ProjectorOverlaps, t: float) -> float:
    """Direct ``sum c*_a c_b e^{i(E_a-E_b)t} P_ab``; O(D^2), used as a cross-check."""
    _check_dims(state.dim, spectrum.dim, P.D)
    ct = state.coeffs * np.exp(-1j * spectrum.energies * t)
    val = ct.conj() @ P.matrix @ ct
    if abs(val.imag) > INTERNAL_TOL:
        raise AssertionError(f"occupation has imaginary part {val.imag:.3g}")
    return float(val.real)


def time_averaged_occupation(state: StateVector, P: ProjectorOverlaps) -> float:
    """Infinite-time average of the occupation for a non-degenerate spectrum.

    Degeneracy is not checked here.
    """
    _check_dims(state.dim, P.D)
    return float(state.population @ P.diagonal)


def effective_dimension(state: StateVector) -> tuple[float, float]:
    """Return ``(sum |c|^4, 1 / sum |c|^4)``."""
    s = float(np.sum(state.population ** 2))
    return s, 1.0 / s
