"""Command-line experiment runner.

    qergodic run CONFIG [--output-dir DIR] [--seed N] [--threads N]
    qergodic trace CONFIG [--output-dir DIR] [--seed N]
    qergodic check-spectrum SPECTRUM

Exit status is 0 on success, 1 for configuration or domain errors and 2 for
anything unexpected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import DomainError
from .hilbert import EnergySpectrum
from .normality import normality_report
from .sampling import SeedSpec
from .serialization import (
    NormalityRequest,
    bands,
    dump_json,
    load_json,
    occupation_trace,
    write_json,
    write_trace_csv,
    write_trials_csv,
)
from .spectra import check_spectrum
from .typicality import ExperimentConfig, run_experiment

log = logging.getLogger("qergodic")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(out: Path, echo: dict, started: str, outputs: list[Path], **extra) -> None:
    manifest_path = out / "manifest.json"
    files = [str(p) for p in outputs] + [str(manifest_path)]
    write_json(manifest_path, {
        "tool_version": __version__, "config_echo": echo, "started": started,
        "finished": _now(), "outputs": files, **extra,
    })


def cmd_run(args) -> int:
    started = _now()
    data = load_json(args.config)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []
    if isinstance(data, dict) and data.get("variant") == "normality":
        req = NormalityRequest.from_dict(data, seed_override=args.seed)
        report = normality_report(req.state, req.spectrum, req.decomposition, req.params,
                                  T=req.T, n_samples=req.n_samples, seed=req.seed,
                                  worst_case=req.worst_case)
        outputs.append(write_json(out / "report.json", report.to_dict()))
        echo = req.echo
    else:
        config = ExperimentConfig.from_dict(data)
        if args.seed is not None:
            config = replace(config, seed=SeedSpec(args.seed, config.seed.stream_index))
        result = run_experiment(config, workers=args.threads)
        body = result.to_dict()
        records = body.get("per_trial_records")
        if records and config.variant in ("theorem1", "theorem2", "theorem3"):
            outputs.append(write_trials_csv(out / "trials.csv", records))
        outputs.insert(0, write_json(out / "report.json", body))
        echo = config.to_dict()
    _write_manifest(out, echo, started, outputs, threads=args.threads)
    log.info("wrote %s", ", ".join(str(p) for p in outputs))
    return 0


def cmd_trace(args) -> int:
    started = _now()
    req = NormalityRequest.from_dict(load_json(args.config), seed_override=args.seed)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    times, occ = occupation_trace(req)
    outputs = [write_trace_csv(out / "occupation.csv", times, occ),
               write_json(out / "bands.json", bands(req.decomposition, req.params))]
    _write_manifest(out, req.echo, started, outputs)
    return 0


def cmd_check_spectrum(args) -> int:
    spectrum = EnergySpectrum.from_dict(load_json(args.spectrum))
    sys.stdout.write(dump_json(check_spectrum(spectrum).to_dict()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qergodic", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment or a normality request")
    run.add_argument("config")
    run.add_argument("--output-dir", default=".")
    run.add_argument("--seed", type=int, default=None, help="override master_seed")
    run.add_argument("--threads", type=int, default=1, help="worker threads (results unchanged)")
    run.set_defaults(func=cmd_run)

    trace = sub.add_parser("trace", help="write occupation.csv and bands.json")
    trace.add_argument("config")
    trace.add_argument("--output-dir", default=".")
    trace.add_argument("--seed", type=int, default=None)
    trace.add_argument("--threads", type=int, default=1)
    trace.set_defaults(func=cmd_trace)

    check = sub.add_parser("check-spectrum", help="print the spectrum report as JSON")
    check.add_argument("spectrum")
    check.set_defaults(func=cmd_check_spectrum)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (DomainError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
