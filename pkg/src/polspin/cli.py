"""Command-line entry point and result serialization.

Commands: fidelity, rate, sweep, montecarlo, diagnose. Results are written
as CSV (long format, one row per cell) or JSON (with a full metadata block);
every artifact embeds the resolved-config hash and the resolved config is
echoed to stdout so no default stays silent.

Exit codes: 0 success, 2 validation, 3 infeasible constraint, 4 IO,
5 numerical failure (search cap reached, opaque device, no detection).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .device import (
    OpaqueDeviceError,
    effective_reflections,
    loss_balance_residual,
    transfer_fidelity,
)
from .montecarlo import McConfig, NoDetectionError, simulate_rate
from .params import ValidationError
from .rate import (
    InfeasibleConstraintError,
    attempt_probabilities,
    error_attribution_gap,
    explicit_error_probability,
    max_attempts,
    transfer_rate,
)
from .sweep import (
    SweepAxis,
    SweepResult,
    default_cooperativity_axis,
    default_coupling_axis,
    default_loss_axis,
    default_pdr_axes,
    sweep_fidelity_cavity,
    sweep_fidelity_pdr,
    sweep_rate_vs_loss,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4
EXIT_NUMERICAL = 5


class NumericalFailure(RuntimeError):
    pass


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: _jsonable(getattr(value, f.name))
                for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _table_of(result: Any, config_hash: str) -> tuple[list[str], list[list[Any]]]:
    """Flatten a result object into (header, rows) for CSV."""
    if isinstance(result, SweepResult):
        axis_names = [name for name, _ in result.axes]
        header = axis_names + [result.quantity] + list(result.columns) + ["config_hash"]
        rows = []
        grids = [vals for _, vals in result.axes]
        if len(grids) == 1:
            for i, x in enumerate(grids[0]):
                rows.append([x, result.values[i]]
                            + [col[i] for col in result.columns.values()]
                            + [config_hash])
        else:
            for i, x in enumerate(grids[0]):
                for j, y in enumerate(grids[1]):
                    rows.append([x, y, result.values[i, j]]
                                + [col[i, j] for col in result.columns.values()]
                                + [config_hash])
        return header, rows
    if dataclasses.is_dataclass(result) and not isinstance(result, type):
        fields = dataclasses.fields(result)
        header = []
        row = []
        for f in fields:
            val = getattr(result, f.name)
            if f.name == "per_input":
                for label, fid in val:
                    header.append(f"fidelity_{label}")
                    row.append(fid)
            elif f.name == "per_outcome":
                continue
            else:
                header.append(f.name)
                row.append(val)
        header.append("config_hash")
        row.append(config_hash)
        return header, [row]
    if isinstance(result, dict):
        header = list(result) + ["config_hash"]
        return header, [list(result.values()) + [config_hash]]
    raise TypeError(f"cannot tabulate {type(result)!r}")


def write_table(result: Any, fmt: str, path: str | Path, config_hash: str,
                metadata: dict[str, Any] | None = None) -> None:
    """Serialize a result to CSV (header row, '.' decimal, newline-terminated
    rows) or JSON (full metadata block, round-trippable at full precision)."""
    path = Path(path)
    if fmt == "csv":
        header, rows = _table_of(result, config_hash)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    elif fmt == "json":
        header, rows = _table_of(result, config_hash)
        payload = {
            "config_hash": config_hash,
            "metadata": _jsonable(metadata or {}),
            "columns": header,
            "rows": _jsonable(rows),
        }
        if isinstance(result, SweepResult):
            payload["metadata"] = _jsonable({**result.metadata,
                                             **(metadata or {})})
        path.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        raise ConfigError(f"unknown output format: {fmt!r}")


def _axis_from(spec: list | None, default: SweepAxis) -> SweepAxis:
    if spec is None:
        return default
    start, stop, num = spec[0], spec[1], spec[2]
    spacing = spec[3] if len(spec) > 3 else default.spacing
    return SweepAxis(default.path, start, stop, int(num), spacing)


def _cmd_fidelity(cfg: RunConfig, out: Path, fmt: str) -> None:
    report = transfer_fidelity(cfg.pdr, cfg.polarizer, cfg.cavity,
                               r_cav_h=cfg.r_cav_h)
    write_table(report, fmt, out, cfg.config_hash)


def _cmd_rate(cfg: RunConfig, out: Path, fmt: str) -> None:
    res = transfer_rate(cfg.pdr, cfg.polarizer, cfg.cavity, cfg.link,
                        cfg.timing, cfg.f_target, r_cav_h=cfg.r_cav_h,
                        false_herald_correction=cfg.false_herald_correction)
    if res.cap_reached:
        raise NumericalFailure("attempt search cap reached")
    write_table(res, fmt, out, cfg.config_hash)


def _cmd_sweep(cfg: RunConfig, out: Path, fmt: str) -> None:
    kind = cfg.sweep["kind"]
    if kind == "pdr":
        tv_default, rh_default = default_pdr_axes()
        res = sweep_fidelity_pdr(
            _axis_from(cfg.sweep.get("axis"), tv_default),
            _axis_from(cfg.sweep.get("second_axis"), rh_default),
            cfg.cavity, cfg.polarizer,
            zeta_V=cfg.pdr.zeta_V, zeta_H=cfg.pdr.zeta_H, r_cav_h=cfg.r_cav_h)
        write_table(res, fmt, out, cfg.config_hash)
    elif kind in ("cavity_c", "cavity_coupling"):
        which = "cooperativity" if kind == "cavity_c" else "coupling"
        default = (default_cooperativity_axis() if kind == "cavity_c"
                   else default_coupling_axis())
        res = sweep_fidelity_cavity(
            _axis_from(cfg.sweep.get("axis"), default),
            cfg.pdr, cfg.polarizer, cfg.cavity, which=which, r_cav_h=cfg.r_cav_h)
        write_table(res, fmt, out, cfg.config_hash)
    else:  # rate_vs_loss
        mc = McConfig(**cfg.mc) if cfg.sweep.get("with_mc") else None
        results = sweep_rate_vs_loss(
            _axis_from(cfg.sweep.get("axis"), default_loss_axis()),
            cfg.pdr, cfg.polarizer, cfg.cavity, cfg.link, cfg.timing,
            constraints=cfg.constraints, mc=mc, r_cav_h=cfg.r_cav_h)
        for f_target, res in results.items():
            suffix = f"_f{round(f_target * 100):02d}"
            target = out.with_name(out.stem + suffix + out.suffix)
            write_table(res, fmt, target, cfg.config_hash)


def _cmd_montecarlo(cfg: RunConfig, out: Path, fmt: str) -> None:
    probs = attempt_probabilities(cfg.pdr, cfg.polarizer, cfg.link)
    f0 = transfer_fidelity(cfg.pdr, cfg.polarizer, cfg.cavity,
                           r_cav_h=cfg.r_cav_h).f_avg
    nm = max_attempts(probs, f0, cfg.f_target)
    if nm.cap_reached:
        raise NumericalFailure("attempt search cap reached")
    est = simulate_rate(probs, nm.n, cfg.timing, McConfig(**cfg.mc))
    write_table(est, fmt, out, cfg.config_hash,
                metadata={"n_max": nm.n, "unbounded": nm.unbounded})


def _cmd_diagnose(cfg: RunConfig, out: Path, fmt: str) -> None:
    eff = effective_reflections(cfg.pdr, cfg.polarizer, cfg.cavity,
                                r_cav_h=cfg.r_cav_h)
    probs = attempt_probabilities(cfg.pdr, cfg.polarizer, cfg.link)
    row = {
        "loss_balance_residual": loss_balance_residual(eff),
        "p_det": probs.p_det,
        "p_lost": probs.p_lost,
        "p_e_canonical": probs.p_e,
        "p_e_explicit": explicit_error_probability(cfg.pdr, cfg.polarizer, cfg.link),
        "p_e_gap": error_attribution_gap(cfg.pdr, cfg.polarizer, cfg.link),
    }
    write_table(row, fmt, out, cfg.config_hash)


_COMMANDS = {
    "fidelity": _cmd_fidelity,
    "rate": _cmd_rate,
    "sweep": _cmd_sweep,
    "montecarlo": _cmd_montecarlo,
    "diagnose": _cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polspin",
        description="Heralded photon-to-spin transfer: fidelity and rate modeling")
    parser.add_argument("--command", required=True, choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--preset", default="paper-design")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="dotted-path override, repeatable")
    parser.add_argument("--out", default="result.csv", help="output path")
    parser.add_argument("--format", default="csv", choices=["csv", "json"])
    parser.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    parser.add_argument("--trials", type=int, default=None,
                        help="Monte Carlo trial count")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"mc.seed={args.seed}")
    if args.trials is not None:
        overrides.append(f"mc.trials={args.trials}")
    try:
        cfg = load_config(args.config, overrides, preset=args.preset)
    except (ConfigError, ValidationError) as exc:
        print(json.dumps({"error": "validation", "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(json.dumps({"error": "io", "detail": str(exc)}), file=sys.stderr)
        return EXIT_IO
    print(cfg.echo_json())
    try:
        _COMMANDS[args.command](cfg, Path(args.out), args.format)
    except InfeasibleConstraintError as exc:
        print(json.dumps({"error": "infeasible", "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, ValidationError) as exc:
        print(json.dumps({"error": "validation", "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalFailure, OpaqueDeviceError, NoDetectionError) as exc:
        print(json.dumps({"error": "numerical", "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(json.dumps({"error": "io", "detail": str(exc)}), file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
