"""Command-line front end.

Commands: ``pulses``, ``gate``, ``sweep-time``, ``sweep-decay``. Exit codes:
0 success, 2 configuration error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from .config import GATES, RunConfig, default_config, load_config
from .dynamics import write_trajectory_csv
from .errors import ConfigurationError, DomainError, IntegrationDivergedError, SingularityError
from .gates import run_gate, sweep_decay, sweep_operation_time, write_sweep_csv
from .pulses import DressingMode, sample_pulses

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

log = logging.getLogger("superholo")


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create output directory {out}: {exc}") from None
    return out


def cmd_pulses(cfg: RunConfig, out: Path) -> list[Path]:
    """Write the uncorrected, SATD and MSA pulse tables for the configured gate."""
    written = []
    for mode in DressingMode:
        corrected = cfg.protocol(mode.value).corrected_schedule()
        path = out / f"pulses_{cfg.gate}_{mode.value}.csv"
        sample_pulses(corrected, cfg.pulse_samples).to_csv(path)
        written.append(path)
    return written


def cmd_gate(cfg: RunConfig, out: Path) -> list[Path]:
    protocol = cfg.protocol()
    result = run_gate(protocol, cfg.open_system, cfg.integrator.build())
    stem = f"gate_{cfg.gate}_{cfg.mode}"
    summary = out / f"{stem}.json"
    summary.write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n")
    traj = write_trajectory_csv(
        out / f"{stem}_trajectory.csv",
        result.times,
        result.fidelity_trace,
        result.population_trace,
        result.labels,
    )
    log.info("%s %s fidelity %.6f", cfg.gate, cfg.mode, result.fidelity)
    print(f"{cfg.gate} {cfg.mode}: fidelity {result.fidelity:.6f}")
    return [summary, traj]


def _modes(cfg: RunConfig, explicit_mode: Optional[str], default):
    return (DressingMode(explicit_mode),) if explicit_mode else default


def cmd_sweep_time(cfg: RunConfig, out: Path, mode: Optional[str] = None, workers: int = 1) -> list[Path]:
    rows = sweep_operation_time(
        cfg.protocol(),
        cfg.time_multipliers,
        _modes(cfg, mode, (DressingMode.NONE, DressingMode.SATD, DressingMode.MSA)),
        workers=workers,
        cfg=cfg.integrator.build(),
    )
    return [write_sweep_csv(rows, out / f"sweep_time_{cfg.gate}.csv")]


def cmd_sweep_decay(cfg: RunConfig, out: Path, mode: Optional[str] = None, workers: int = 1) -> list[Path]:
    rows = sweep_decay(
        cfg.protocol(),
        cfg.decay_multipliers,
        _modes(cfg, mode, (DressingMode.SATD, DressingMode.MSA)),
        workers=workers,
        cfg=cfg.integrator.build(),
    )
    return [write_sweep_csv(rows, out / f"sweep_decay_{cfg.gate}.csv")]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--mode", choices=[m.value for m in DressingMode])
    common.add_argument("--gate", choices=GATES)
    common.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress and show physics warnings")
    parser = argparse.ArgumentParser(prog="superholo", description="Superadiabatic holonomic gate simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("pulses", "export uncorrected, SATD and MSA pulse tables"),
        ("gate", "run one gate and export its summary and fidelity trajectory"),
        ("sweep-time", "fidelity versus operation-time multiplier"),
        ("sweep-decay", "fidelity versus Gamma_1 multiplier"),
    ):
        sub.add_parser(name, help=help_text, parents=[common])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else default_config()
        cfg = cfg.with_overrides(gate=args.gate)
        if args.command in ("pulses", "gate"):
            cfg = cfg.with_overrides(mode=args.mode)
        if args.workers < 1:
            raise ConfigurationError("--workers must be at least 1")
        out = _out_dir(args.out)
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore")
            if args.command == "pulses":
                written = cmd_pulses(cfg, out)
            elif args.command == "gate":
                written = cmd_gate(cfg, out)
            elif args.command == "sweep-time":
                written = cmd_sweep_time(cfg, out, args.mode, args.workers)
            else:
                written = cmd_sweep_decay(cfg, out, args.mode, args.workers)
    except (ConfigurationError, DomainError, SingularityError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationDivergedError as exc:
        print(f"integration diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
