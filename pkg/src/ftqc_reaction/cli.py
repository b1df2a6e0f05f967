"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 infeasible, 4 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace

import numpy as np

from . import config as cfg
from .assembler import (SWEEP_COLUMNS, SweepPoint, assemble, gamma_fixed, gamma_from_decoder,
                        sweep_reaction_time)
from .errors import ConfigError, DeadlockError, InfeasibleBudgetError, InfeasibleCommunicationError
from .latency import (DECODER_PRESETS, comm_preset, decoder_preset, gamma_ls, gamma_mem,
                      max_t_count, required_decoder_speed, t_com, tau_d)
from .units import Duration, seconds, us
from .windows import fleet_estimate, memory_windows, reference_scenario, surgery_windows, windows_to_jsonl

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 2, 3, 4

# below this per-round speed the communication hops dominate the reaction time
COMM_BOUND_SPEED_S = 1e-7

NAMED_DURATIONS_S = {"hour": 3600.0, "day": 86400.0, "week": 7 * 86400.0, "month": 30 * 86400.0}


class UsageError(ConfigError):
    pass


# ----------------------------------------------------------------- output

def _emit_csv(rows: list[dict], columns=None, out=None) -> str:
    out = out or sys.stdout
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    out.write(buf.getvalue())
    return buf.getvalue()


def _emit_json(obj, out=None):
    out = out or sys.stdout
    out.write(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, Duration):
        return o.us
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _emit(fmt: str, obj, rows: list[dict], columns=None):
    if fmt == "csv":
        _emit_csv(rows, columns)
    else:
        _emit_json(obj)


# --------------------------------------------------------------- commands

def _resolve(args) -> cfg.RunConfig:
    rc = cfg.load(args.config)
    try:
        if getattr(args, "decoder", None):
            rc = replace(rc, decoder=decoder_preset(args.decoder))
        if getattr(args, "comms", None):
            rc = replace(rc, comms=comm_preset(args.comms))
        if getattr(args, "circuit", None):
            from .assembler import circuit_preset
            rc = replace(rc, circuit=circuit_preset(args.circuit))
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    if getattr(args, "objective", None):
        rc = replace(rc, objective=args.objective)
    if getattr(args, "error_budget", None) is not None:
        rc = replace(rc, circuit=replace(rc.circuit, error_budget=args.error_budget))
    return rc


def _arch_table(arch) -> str:
    lines = [f"objective        {arch.objective}",
             f"d_core           {arch.d_core}",
             f"gamma_mem        {arch.gamma_mem.us:.3f} us ({arch.gamma_in_cycles:.2f} core cycles)",
             f"gamma_ls         {arch.gamma_ls.us:.3f} us",
             f"runtime          {arch.runtime_s:.4g} s"]
    for i, lv in enumerate(arch.msf_levels):
        lines.append(f"msf level {i}      d={lv.d_level} units={lv.n_units} storage/unit={lv.storage_patches}")
    lines += [f"qubits core      {arch.qubits_core}",
              f"qubits distill   {arch.qubits_msf_distill}",
              f"qubits storage   {arch.qubits_msf_storage}",
              f"qubits total     {arch.qubits_total}",
              f"error            {arch.accumulated_error:.4g}"]
    return "\n".join(lines) + "\n"


def cmd_estimate(args) -> int:
    rc = _resolve(args)
    if args.gamma_us is not None:
        gamma = gamma_fixed(us(args.gamma_us))
    else:
        gamma = gamma_from_decoder(rc.decoder, rc.comms)
    arch = assemble(rc.circuit, rc.hardware, rc.fits, objective=rc.objective, gamma=gamma, opts=rc.assembly)
    if args.table:
        sys.stderr.write(_arch_table(arch))
    obj = arch.to_dict()
    obj["circuit"] = rc.circuit.name
    obj["decoder"] = rc.decoder.name
    _emit(args.format, obj, SweepPoint(args.gamma_us or arch.gamma_mem.us, arch).rows(), SWEEP_COLUMNS)
    return EXIT_OK


def sweep_values(lo: float, hi: float, points: int) -> list[float]:
    if points < 1:
        raise UsageError("points must be >= 1")
    if lo <= 0 or hi <= 0:
        raise UsageError("gamma bounds must be positive")
    if points == 1:
        if lo > hi:
            raise UsageError("gamma_min must not exceed gamma_max")
        return [lo]
    if not lo < hi:
        raise UsageError("gamma_min must be below gamma_max")
    return [float(v) for v in np.geomspace(lo, hi, points)]


def cmd_sweep_reaction(args) -> int:
    rc = _resolve(args)
    values = sweep_values(args.gamma_min, args.gamma_max, args.points)
    pts = sweep_reaction_time(rc.circuit, rc.hardware, rc.fits, rc.comms, values,
                              in_cycles=args.unit == "cycles", objective=rc.objective,
                              opts=rc.assembly, jobs=args.jobs)
    rows = [r for p in pts for r in p.rows()]
    if args.format == "csv":
        cols = list(SWEEP_COLUMNS) + (["error"] if any(p.arch is None for p in pts) else [])
        _emit_csv(rows, cols)
    else:
        _emit_json({"circuit": rc.circuit.name, "unit": args.unit, "rows": rows})
    return EXIT_OK


def _parse_durations(items: list[str]) -> list[float]:
    out = []
    for it in items:
        key = it.strip().lower()
        if key in NAMED_DURATIONS_S:
            out.append(NAMED_DURATIONS_S[key])
        else:
            try:
                out.append(float(key))
            except ValueError:
                raise UsageError(f"cannot parse duration {it!r}") from None
    return out


def decoder_speed_rows(t_circuits_s: list[float], sweep: str, values: list[float], d: int, t_count: float,
                       comms) -> list[dict]:
    """Required ``tau_d(d^2)`` per (wall-clock budget, swept value), plus each preset's speed."""
    rows = []
    for tc in t_circuits_s:
        for v in values:
            dd = int(v) if sweep == "d" else d
            tt = float(t_count) if sweep == "d" else float(v)
            row = {"t_circuit_s": tc, "t_count": tt, "d": dd}
            try:
                need = required_decoder_speed(seconds(tc), tt, dd, comms).s
                row.update(required_tau_d_s=need, status="ok" if need >= COMM_BOUND_SPEED_S else "comm_bound")
            except InfeasibleCommunicationError:
                row.update(required_tau_d_s=None, status="infeasible")
            for name, model in DECODER_PRESETS.items():
                row[f"{name}_tau_d_s"] = tau_d(model, dd * dd).s
            rows.append(row)
    return rows


def cmd_decoder_speed(args) -> int:
    rc = _resolve(args)
    tcs = _parse_durations(args.t_circuit)
    if args.values:
        values = [float(v) for v in args.values]
    elif args.sweep == "T":
        values = [float(v) for v in np.geomspace(args.t_min, args.t_max, args.points)]
    else:
        values = list(range(args.d_min, args.d_max + 1, 2))
    if not tcs or not values:
        raise UsageError("t_circuit and sweep values must be nonempty")
    if args.sweep == "d" and any(v < 3 or int(v) % 2 == 0 for v in values):
        raise UsageError("swept distances must be odd and >= 3")
    rows = decoder_speed_rows(tcs, args.sweep, values, args.d, args.t_count, rc.comms)
    if args.format == "csv":
        _emit_csv(rows)
        return EXIT_OK
    crossings = []
    if args.sweep == "T":
        for tc in tcs:
            for name, model in DECODER_PRESETS.items():
                crossings.append({"t_circuit_s": tc, "decoder": name, "d": args.d,
                                  "t_count_crossing": max_t_count(model, args.d, seconds(tc), rc.comms)})
    _emit_json({"t_com_us": t_com(rc.comms).us, "comm_bound_below_s": COMM_BOUND_SPEED_S,
                "rows": rows, "crossings": crossings})
    return EXIT_OK


def cmd_decoders(args) -> int:
    rc = _resolve(args)
    fo = rc.fleet
    n_synd = fo.n_syndrome_qubits or fo.total_qubits // 2
    if fo.q_logical is None and args.q_logical is None:
        ref = reference_scenario(rc.decoder, rc.comms, total_qubits=fo.total_qubits,
                                 core_fraction=fo.core_fraction, d=fo.d, msf_uplift=fo.msf_uplift)
        fleet = fleet_estimate(ref["q_logical"], fo.d, rc.decoder, rc.comms, fo.msf_uplift,
                               stab_round=rc.hardware.stab_round, n_syndrome_qubits=n_synd,
                               bytes_per_syndrome=fo.bytes_per_syndrome)
        extra = {k: v for k, v in ref.items() if k not in ("fleet", "ram_mb")}
        q = ref["q_logical"]
    else:
        q = args.q_logical or fo.q_logical
        fleet = fleet_estimate(q, fo.d, rc.decoder, rc.comms, fo.msf_uplift, stab_round=rc.hardware.stab_round,
                               n_syndrome_qubits=n_synd, bytes_per_syndrome=fo.bytes_per_syndrome)
        extra = {}
    obj = {"decoder": rc.decoder.name, "d": fo.d, "q_logical": q, "k_mem": fleet.k_mem, "k_ls": fleet.k_ls,
           "k_core": fleet.k_core, "k_total": fleet.k_total, "surgery_multiplicity": fleet.multiplicity,
           "syndrome_rounds_retained": fleet.syndrome_rounds_retained,
           "syndrome_ram_bytes": fleet.syndrome_ram_bytes,
           "gamma_mem_us": gamma_mem(rc.decoder, fo.d, rc.comms).us,
           "gamma_ls_us": gamma_ls(rc.decoder, fo.d, rc.comms).us, **extra}
    row = {k: v for k, v in obj.items() if not isinstance(v, (list, dict))}
    _emit(args.format, obj, [row])
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .sim import SimConfig, background_memory_windows, run, run_msf_unit
    rc = _resolve(args)
    so = rc.simulate
    for key in ("d", "n_decoders", "n_injections", "seed"):
        if getattr(args, key, None) is not None:
            so = replace(so, **{key: getattr(args, key)})
    if args.msf_unit:
        so = replace(so, msf_unit=True)
    if args.co_store_magic:
        so = replace(so, co_store_magic=True)
    try:
        sc = SimConfig(d=so.d, decoder=rc.decoder, comms=rc.comms, n_decoders=so.n_decoders,
                       n_injections=so.n_injections, stab_round=rc.hardware.stab_round, seed=so.seed,
                       jitter=so.jitter, storage_slots=so.storage_slots, surgery_lanes=so.surgery_lanes,
                       co_store_magic=so.co_store_magic, surgery_grid=tuple(so.surgery_grid),
                       kernel=so.kernel, trace=bool(args.trace))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if so.msf_unit:
        report = run_msf_unit(sc)
    else:
        bg = None
        if so.background_patches:
            horizon = gamma_mem(rc.decoder, so.d, rc.comms) * so.n_injections
            bg = background_memory_windows(so.background_patches, horizon, so.d, rc.hardware.stab_round)
        report = run(sc, bg)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(report.trace_jsonl())
    obj = report.to_dict()
    obj["analytic_gamma_mem_us"] = gamma_mem(rc.decoder, so.d, rc.comms).us
    _emit(args.format, obj, [obj])
    return EXIT_OK


def cmd_windows(args) -> int:
    if args.kind == "memory":
        ws = memory_windows(args.cycles, args.d)
    else:
        ws = surgery_windows(args.nx, args.nz, args.d, has_y=not args.no_y)
    if args.format == "json":
        sys.stdout.write(windows_to_jsonl(ws, args.d))
    else:
        rows = [{"id": w.id, "kind": w.kind, "layer": w.layer,
                 "extent_halves": " ".join(map(str, w.extent.as_tuple())),
                 "commit_halves": " ".join(map(str, w.commit.as_tuple())),
                 "depends_on": " ".join(w.depends_on)} for w in ws]
        _emit_csv(rows)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftqc-reaction",
                                description="Reaction-time-aware resource estimation for surface-code FTQC.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"YAML config file (default: ${cfg.ENV_VAR})")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers where applicable")
    common.add_argument("--decoder", help="decoder preset name")
    common.add_argument("--comms", help="communication preset name")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("estimate", parents=[common], help="assemble one architecture")
    s.add_argument("--circuit")
    s.add_argument("--objective", choices=("time_optimal", "space_optimal"))
    s.add_argument("--error-budget", type=float)
    s.add_argument("--gamma-us", type=float, help="fix gamma_mem = gamma_ls instead of deriving it")
    s.add_argument("--table", action="store_true", help="also print a readable table to stderr")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("sweep-reaction", parents=[common], help="sweep the reaction time")
    s.add_argument("--circuit")
    s.add_argument("--objective", choices=("time_optimal", "space_optimal"))
    s.add_argument("--error-budget", type=float)
    s.add_argument("--gamma-min", type=float, default=1.0)
    s.add_argument("--gamma-max", type=float, default=1000.0)
    s.add_argument("--points", type=int, default=25)
    s.add_argument("--unit", choices=("us", "cycles"), default="cycles")
    s.set_defaults(func=cmd_sweep_reaction)

    s = sub.add_parser("decoder-speed", parents=[common], help="required decoder speed")
    s.add_argument("--t-circuit", nargs="+", default=["hour", "month"],
                   help="wall-clock budgets in seconds or hour/day/week/month")
    s.add_argument("--sweep", choices=("T", "d"), default="T")
    s.add_argument("--values", nargs="+")
    s.add_argument("--t-min", type=float, default=1e6)
    s.add_argument("--t-max", type=float, default=1e12)
    s.add_argument("--d-min", type=int, default=11)
    s.add_argument("--d-max", type=int, default=51)
    s.add_argument("--points", type=int, default=61)
    s.add_argument("--d", type=int, default=31)
    s.add_argument("--t-count", type=float, default=1e8)
    s.set_defaults(func=cmd_decoder_speed)

    s = sub.add_parser("decoders", parents=[common], help="decoder fleet and syndrome RAM")
    s.add_argument("--q-logical", type=int)
    s.set_defaults(func=cmd_decoders)

    s = sub.add_parser("simulate", parents=[common], help="discrete-event pipeline simulation")
    s.add_argument("--d", type=int)
    s.add_argument("--n-decoders", type=int)
    s.add_argument("--n-injections", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--msf-unit", action="store_true")
    s.add_argument("--co-store-magic", action="store_true")
    s.add_argument("--trace", help="write a JSON-lines event trace to this file")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("windows", parents=[common], help="export decoding windows")
    s.add_argument("--kind", choices=("memory", "surgery"), default="memory")
    s.add_argument("--d", type=int, default=31)
    s.add_argument("--cycles", type=int, default=2)
    s.add_argument("--nx", type=int, default=3)
    s.add_argument("--nz", type=int, default=3)
    s.add_argument("--no-y", action="store_true")
    s.set_defaults(func=cmd_windows)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.jobs < 1:
        sys.stderr.write("error: --jobs must be >= 1\n")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (InfeasibleBudgetError, InfeasibleCommunicationError) as exc:
        sys.stderr.write(f"infeasible: {exc}\n")
        return EXIT_INFEASIBLE
    except (ConfigError, ValueError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except DeadlockError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
