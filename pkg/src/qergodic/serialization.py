"""JSON requests/reports and CSV traces."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError, DomainError
from .hilbert import EnergySpectrum, MacroDecomposition, StateVector, UnitaryMatrix, occupations
from .normality import NormalityParams
from .sampling import SeedSpec, haar_unitary, uniform_state
from .spectra import generate_nonresonant_spectrum, occupation_horizon


def load_json(path: str | Path) -> Any:
    """Read JSON, turning syntax errors into a ``ConfigError`` with line/column."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.write_text(dump_json(obj))
    return path


def parse_complex(x, field: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise ConfigError(field, f"expected a number or [re, im], got {x!r}")


def complex_to_json(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def fmt17(x: float) -> str:
    return f"{x:.17g}"


@dataclass(frozen=True)
class NormalityRequest:
    """A single system: spectrum, decomposition, initial state and parameters."""

    spectrum: EnergySpectrum
    decomposition: MacroDecomposition
    state: StateVector
    params: NormalityParams
    T: float
    n_samples: int
    cycles: int
    seed: SeedSpec
    worst_case: bool
    echo: dict

    @classmethod
    def from_dict(cls, data: dict, seed_override: int | None = None) -> "NormalityRequest":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        s = data.get("seed", {}) or {}
        seed = SeedSpec(int(s.get("master_seed", 0) if seed_override is None else seed_override),
                        int(s.get("stream_index", 0)))

        spec = data.get("spectrum")
        if spec is None:
            raise ConfigError("spectrum", "required field is missing")
        try:
            if isinstance(spec, dict) and spec.get("source") == "generate":
                D = int(spec["D"])
                span = float(spec.get("span", 1.0))
                spectrum = generate_nonresonant_spectrum(D, seed.spawn(1), span)
            else:
                spectrum = EnergySpectrum.from_dict(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("spectrum", str(exc)) from None
        D = spectrum.dim

        dec = data.get("decomposition")
        if not isinstance(dec, dict) or "dims" not in dec:
            raise ConfigError("decomposition.dims", "required field is missing")
        dims = dec["dims"]
        if not isinstance(dims, list) or not all(isinstance(d, int) and d > 0 for d in dims):
            raise ConfigError("decomposition.dims", "must be a list of positive integers")
        if sum(dims) != D:
            raise ConfigError("decomposition.dims", f"sum {sum(dims)} does not equal D={D}")
        align = dec.get("alignment", "haar")
        if align == "haar":
            W = haar_unitary(D, seed.spawn(2))
        elif align == "identity":
            W = UnitaryMatrix(np.eye(D, dtype=complex))
        elif isinstance(align, list):
            try:
                W = UnitaryMatrix(np.array([[parse_complex(x, "decomposition.alignment") for x in row]
                                            for row in align]))
            except DomainError as exc:
                raise ConfigError("decomposition.alignment", str(exc)) from None
        else:
            raise ConfigError("decomposition.alignment", "expected 'haar', 'identity' or a matrix")
        if W.dim != D:
            raise ConfigError("decomposition.alignment", f"must be {D} x {D}")
        decomp = MacroDecomposition(tuple(dims), W)

        st = data.get("state", "uniform")
        if st == "uniform":
            state = uniform_state(D, seed.spawn(3))
        elif isinstance(st, dict) and "eigenstate" in st:
            k = st["eigenstate"]
            if not isinstance(k, int) or not 0 <= k < D:
                raise ConfigError("state.eigenstate", f"must be an index in [0, {D})")
            state = StateVector.eigenstate(D, k)
        elif isinstance(st, dict) and "coeffs" in st:
            coeffs = [parse_complex(x, "state.coeffs") for x in st["coeffs"]]
            if len(coeffs) != D:
                raise ConfigError("state.coeffs", f"need {D} coefficients")
            try:
                state = StateVector.normalized(coeffs) if st.get("normalize") else StateVector(coeffs)
            except DomainError as exc:
                raise ConfigError("state.coeffs", str(exc)) from None
        else:
            raise ConfigError("state", "expected 'uniform', {'eigenstate': k} or {'coeffs': [...]}")

        p = data.get("params", {}) or {}
        try:
            params = NormalityParams(float(p.get("epsilon", 0.5)), float(p.get("delta_prime", 0.2)),
                                     len(dims), p.get("sense", "strong"))
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError("params", str(exc)) from None

        n_samples = data.get("n_samples", 4096)
        if not isinstance(n_samples, int) or n_samples < 1:
            raise ConfigError("n_samples", "must be a positive integer")
        cycles = data.get("cycles", 200)
        if not isinstance(cycles, int) or cycles < 1:
            raise ConfigError("cycles", "must be a positive integer")
        T = data.get("T")
        if T is None:
            T = occupation_horizon(spectrum, cycles)
        elif not isinstance(T, (int, float)) or not T > 0:
            raise ConfigError("T", "must be a positive number")

        echo = {
            "variant": "normality",
            "spectrum": spectrum.to_dict(),
            "decomposition": {"dims": list(dims),
                              "alignment": [[complex_to_json(z) for z in row] for row in W.entries]},
            "state": {"coeffs": [complex_to_json(z) for z in state.coeffs]},
            "params": {"epsilon": params.epsilon, "delta_prime": params.delta_prime,
                       "N": params.N, "sense": params.sense},
            "T": float(T), "n_samples": n_samples, "cycles": cycles,
            "seed": seed.to_dict(), "worst_case": bool(data.get("worst_case", False)),
        }
        return cls(spectrum, decomp, state, params, float(T), n_samples, cycles, seed,
                   bool(data.get("worst_case", False)), echo)


def occupation_trace(request: NormalityRequest) -> tuple[np.ndarray, np.ndarray]:
    """Occupations on the plain grid ``t_k = k T / n``."""
    times = np.arange(request.n_samples) * (request.T / request.n_samples)
    return times, occupations(request.state, request.spectrum, request.decomposition, times)


def write_trace_csv(path: str | Path, times: np.ndarray, occ: np.ndarray) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"occ_{i + 1}" for i in range(occ.shape[1])])
        for t, row in zip(times, occ):
            w.writerow([fmt17(t)] + [fmt17(x) for x in row])
    return path


def bands(decomp: MacroDecomposition, params: NormalityParams) -> dict:
    """Target values and tolerance bands of both normality senses per block."""
    D, N, eps = decomp.D, decomp.N, params.epsilon
    out = []
    for nu, d in enumerate(decomp.dims):
        target = d / D
        vn = eps * math.sqrt(d / (N * D))
        strong = eps * d / D
        out.append({
            "block": nu + 1, "dim": d, "target": target,
            "von_neumann_halfwidth": vn, "von_neumann_band": [target - vn, target + vn],
            "strong_halfwidth": strong, "strong_band": [target - strong, target + strong],
        })
    return {"epsilon": eps, "N": N, "D": D, "blocks": out}


def write_trials_csv(path: str | Path, records: list[dict]) -> Path:
    path = Path(path)
    n_blocks = len(records[0]["condition_value"]) if records else 0
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial"] + [f"condition_value_{i + 1}" for i in range(n_blocks)] + ["success"])
        for r in records:
            w.writerow([r["trial"]] + [fmt17(x) for x in r["condition_value"]] + [int(r["success"])])
    return path
