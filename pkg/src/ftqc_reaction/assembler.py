"""Microarchitecture synthesis against a logical error budget.

The architecture is a core processor of ``Q`` computational qubits plus a
multi-level 15-to-1 magic state factory (MSF). The error budget is split
between the core's stream of pi/8 gadgets and the delivered magic states.
Every distance is the smallest odd value meeting its share; unit counts are
the smallest meeting the throughput demand; correction storage per unit is
``ceil(gamma_mem / tau_logical(level))``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

from .errors import DistanceCapError, InfeasibleBudgetError
from .latency import CommLatencies, ReactionTimes, reaction_times
from .models import (ErrorFitParams, HardwareParams, _p_ls_raw, check_distance, p_magic_prep,
                     p_mem, p_pi8_gadget)
from .units import Duration

DISTILL_ROTATIONS = 11
DISTILL_INPUTS = 15
DISTILL_CUBIC = 35.0
DISTANCE_CAP = 61


def tile_qubits(d: int) -> int:
    """Physical qubits of one ``d x d`` rotated surface-code tile (data plus measure)."""
    return 2 * d * d - 1


@dataclass(frozen=True)
class CircuitSpec:
    name: str
    q_logical: int
    t_count: int
    k_avg: float
    b_avg: float
    error_budget: float = 0.05

    def __post_init__(self):
        if self.q_logical < 1:
            raise ValueError("q_logical must be >= 1")
        if self.t_count < 1:
            raise ValueError("t_count must be >= 1")
        if self.k_avg < 1 or self.b_avg < 0:
            raise ValueError("k_avg must be >= 1 and b_avg >= 0")
        if self.error_budget == 0:
            raise InfeasibleBudgetError("error budget is zero")
        if not 0 < self.error_budget < 1:
            raise ValueError("error_budget must lie in (0, 1)")


# k_avg / b_avg are estimates for the compiled circuits; both are overridable.
CIRCUIT_PRESETS = {
    "fermi_hubbard": CircuitSpec("fermi_hubbard", q_logical=2562, t_count=4_000_000, k_avg=4.0, b_avg=4.0),
    "conotoxin": CircuitSpec("conotoxin", q_logical=241, t_count=511_000_000_000, k_avg=4.0, b_avg=4.0),
}


def circuit_preset(name: str) -> CircuitSpec:
    try:
        return CIRCUIT_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown circuit preset {name!r}; known: {sorted(CIRCUIT_PRESETS)}") from None


@dataclass(frozen=True)
class UnitFootprint:
    """Tiles of one 15-to-1 distillation unit, excluding correction storage.

    ``prep_tiles=None`` sizes magic-state preparation from the cultivation
    acceptance rate so that one accepted state is available per logical cycle.
    """

    data_tiles: int = 5
    output_tiles: int = 1
    bus_tiles: int = 5
    magic_storage_tiles: int = 1
    growth_tiles: int = 1
    correction_prep_tiles: int = 2  # one d x 2d patch
    prep_tiles: int | None = None
    rotation_k: float = 4.0  # mean unit qubits touched per rotation
    rotation_b: float = 4.0

    def prep(self, accept_rate: float) -> int:
        if self.prep_tiles is not None:
            return self.prep_tiles
        return math.ceil(1.0 / accept_rate - 1e-12)

    def tiles(self, accept_rate: float) -> int:
        return (self.data_tiles + self.output_tiles + self.bus_tiles + self.magic_storage_tiles
                + self.growth_tiles + self.correction_prep_tiles + self.prep(accept_rate))


@dataclass(frozen=True)
class AssemblyOptions:
    core_budget_fraction: float = 0.5
    idle_qubits: str = "q_logical"  # or "k_avg"
    co_store_magic: bool = False
    max_distance: int = DISTANCE_CAP
    max_levels: int = 3
    core_tiles_per_qubit: float = 2.0
    footprint: UnitFootprint = field(default_factory=UnitFootprint)

    def __post_init__(self):
        if not 0 < self.core_budget_fraction < 1:
            raise ValueError("core_budget_fraction must lie in (0, 1)")
        if self.idle_qubits not in ("q_logical", "k_avg"):
            raise ValueError("idle_qubits must be 'q_logical' or 'k_avg'")
        check_distance(self.max_distance)
        if self.max_levels < 1:
            raise ValueError("max_levels must be >= 1")


@dataclass(frozen=True)
class MsfLevel:
    d_level: int
    n_units: int
    storage_patches: int
    p_in: float
    p_out: float
    success_rate: float


@dataclass(frozen=True)
class Microarchitecture:
    objective: str
    d_core: int
    msf_levels: tuple[MsfLevel, ...]
    gamma_mem: Duration
    gamma_ls: Duration
    injection_period: Duration
    runtime_s: float
    qubits_core: int
    qubits_msf_distill: int
    qubits_msf_storage: int
    core_error: float
    msf_error: float
    accumulated_error: float
    stab_round: Duration

    @property
    def qubits_total(self) -> int:
        return self.qubits_core + self.qubits_msf_distill + self.qubits_msf_storage

    @property
    def tau_core(self) -> Duration:
        return self.stab_round * self.d_core

    @property
    def gamma_in_cycles(self) -> float:
        return self.gamma_mem / self.tau_core

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "d_core": self.d_core,
            "msf_levels": [
                {"level_index": i, "d_level": lv.d_level, "n_units": lv.n_units,
                 "storage_patches": lv.storage_patches, "p_in": lv.p_in, "p_out": lv.p_out,
                 "success_rate": lv.success_rate}
                for i, lv in enumerate(self.msf_levels)
            ],
            "gamma_mem_us": self.gamma_mem.us,
            "gamma_ls_us": self.gamma_ls.us,
            "gamma_in_cycles": self.gamma_in_cycles,
            "injection_period_us": self.injection_period.us,
            "runtime_s": self.runtime_s,
            "qubits_core": self.qubits_core,
            "qubits_msf_distill": self.qubits_msf_distill,
            "qubits_msf_storage": self.qubits_msf_storage,
            "qubits_total": self.qubits_total,
            "core_error": self.core_error,
            "msf_error": self.msf_error,
            "accumulated_error": self.accumulated_error,
        }


def storage_patches(gamma_mem: Duration, tau_level: Duration, co_store_magic: bool = False) -> int:
    """Correction-storage patches per unit; one more when produced states share the pool."""
    n = math.ceil(gamma_mem / tau_level - 1e-9) if gamma_mem.s > 0 else 0
    return n + (1 if co_store_magic else 0)


# ---------------------------------------------------------------- error terms

def _idle_count(spec: CircuitSpec, opts: AssemblyOptions) -> float:
    return spec.q_logical if opts.idle_qubits == "q_logical" else spec.k_avg


def core_gadget_error(d: int, spec: CircuitSpec, rt: ReactionTimes, period: Duration,
                      hw: HardwareParams, fit: ErrorFitParams, opts: AssemblyOptions) -> float:
    """Per-gadget error in the core; computational qubits idle for ``period`` between gadgets."""
    return p_pi8_gadget(d, spec.k_avg, spec.b_avg, period, rt.gamma_ls, hw.tau_logical(d), fit,
                        idle_qubits=_idle_count(spec, opts))


def unit_logical_error(d: int, gamma_mem: Duration, hw: HardwareParams, fit: ErrorFitParams,
                       opts: AssemblyOptions) -> float:
    """Logical error a 15-to-1 unit at distance ``d`` adds to its output.

    Eleven rotations, each two surgeries plus one stored cycle of the
    correction qubit, then ``ceil(gamma/tau)`` stored cycles for each of the
    eleven corrections and for the output state waiting on them.
    """
    fp = opts.footprint
    surgeries = _p_ls_raw(3, 2, d, d, fit) + _p_ls_raw(fp.rotation_k + 1, fp.rotation_b, d, d, fit)
    cycle = p_mem(d, d, fit)
    waits = storage_patches(gamma_mem, hw.tau_logical(d))
    return min(1.0, DISTILL_ROTATIONS * (surgeries + cycle) + (DISTILL_ROTATIONS + 1) * waits * cycle)


def _level_input_error(level: int, d: int, p_prev_out: float | None, prev_d: int | None,
                       fit: ErrorFitParams) -> float:
    if level == 0:
        # cultivated at most at the cap, then grown
        grow = p_mem(d, d, fit) if d > fit.magic_max_distance else 0.0
        return min(1.0, p_magic_prep(d, fit) + grow)
    # growth from the lower level's distance is charged as one memory cycle
    grow = p_mem(d, d, fit) if d > prev_d else 0.0
    return min(1.0, p_prev_out + grow)


def level_output_error(p_in: float, d: int, gamma_mem: Duration, hw: HardwareParams,
                       fit: ErrorFitParams, opts: AssemblyOptions) -> float:
    return min(1.0, DISTILL_CUBIC * p_in ** 3 + unit_logical_error(d, gamma_mem, hw, fit, opts))


def _success_rate(p_in: float) -> float:
    return max(0.0, 1.0 - DISTILL_INPUTS * p_in)


def msf_state_error(distances: tuple[int, ...], d_core: int, gamma_mem: Duration, hw: HardwareParams,
                    fit: ErrorFitParams, opts: AssemblyOptions) -> tuple[list[tuple[float, float]], float]:
    """Per-level (p_in, p_out) chain and the error of one state delivered to the core."""
    chain = []
    p_prev, d_prev = None, None
    for i, d in enumerate(distances):
        p_in = _level_input_error(i, d, p_prev, d_prev, fit)
        p_out = level_output_error(p_in, d, gamma_mem, hw, fit, opts)
        chain.append((p_in, p_out))
        p_prev, d_prev = p_out, d
    delivered = p_prev + (p_mem(d_core, d_core, fit) if d_core > d_prev else 0.0)
    return chain, min(1.0, delivered)


# ------------------------------------------------------------------- search

def _odd_range(cap: int):
    return range(3, cap + 1, 2)


def _choose_level_distances(target: float, d_core: int, gamma_fn, hw, fit, opts) -> tuple[int, ...]:
    """Greedy: the fewest levels that can meet ``target``; smallest distances level by level."""
    for n_levels in range(1, opts.max_levels + 1):
        targets = [target]
        for _ in range(n_levels - 1):
            targets.insert(0, (targets[0] / (2 * DISTILL_CUBIC)) ** (1.0 / 3.0))
        gamma = gamma_fn(d_core).gamma_mem
        distances: list[int] = []
        ok = True
        for lvl, t in enumerate(targets):
            found = None
            for d in _odd_range(opts.max_distance):
                trial = tuple(distances) + (d,)
                chain, delivered = msf_state_error(trial, d_core, gamma, hw, fit, opts)
                err = delivered if lvl == n_levels - 1 else chain[-1][1]
                if err <= t:
                    found = d
                    break
            if found is None:
                ok = False
                break
            distances.append(found)
        if ok:
            return tuple(distances)
        # more levels only help once the cubic term is what limits the top level
    raise DistanceCapError(
        f"no MSF with up to {opts.max_levels} levels and distance <= {opts.max_distance} "
        f"reaches {target:.3e} per state")


def _unit_counts(distances, chain, period: Duration, hw: HardwareParams) -> list[int]:
    """Smallest unit counts sustaining one delivered state per ``period``."""
    counts = [0] * len(distances)
    demand = 1.0 / period.s  # successful outputs needed per second from the current level
    for lvl in range(len(distances) - 1, -1, -1):
        s = _success_rate(chain[lvl][0])
        if s <= 0:
            raise InfeasibleBudgetError("distillation success rate is zero")
        cycle = hw.tau_logical(distances[lvl]).s * DISTILL_ROTATIONS
        counts[lvl] = max(1, math.ceil(demand * cycle / s - 1e-9))
        # each attempt consumes one input per rotation
        demand = demand / s * DISTILL_ROTATIONS
    return counts


def _core_distance(spec, budget, gamma_fn, period_fn, hw, fit, opts) -> tuple[int, float]:
    for d in _odd_range(opts.max_distance):
        rt = gamma_fn(d)
        p = core_gadget_error(d, spec, rt, period_fn(d, rt), hw, fit, opts)
        if spec.t_count * p <= budget:
            return d, p
    raise DistanceCapError(f"core needs d > {opts.max_distance} to meet {budget:.3e}")


def qubit_accounting(arch: Microarchitecture, spec: CircuitSpec, fit: ErrorFitParams = ErrorFitParams(),
                     opts: AssemblyOptions = AssemblyOptions()) -> tuple[int, int, int]:
    core = math.ceil(opts.core_tiles_per_qubit * spec.q_logical) * tile_qubits(arch.d_core)
    unit_tiles = opts.footprint.tiles(1.0 - fit.discard_magic)
    distill = sum(lv.n_units * unit_tiles * tile_qubits(lv.d_level) for lv in arch.msf_levels)
    storage = sum(lv.n_units * lv.storage_patches * tile_qubits(lv.d_level) for lv in arch.msf_levels)
    return core, distill, storage


def accumulate_error(arch: Microarchitecture, spec: CircuitSpec, hw: HardwareParams = HardwareParams(),
                     fit: ErrorFitParams = ErrorFitParams(), rt: ReactionTimes | None = None,
                     opts: AssemblyOptions = AssemblyOptions(), *, include_msf: bool = True) -> float:
    """Total logical error of running ``spec`` on ``arch``, summed over all events."""
    rt = rt or ReactionTimes(arch.gamma_mem, arch.gamma_ls)
    core = spec.t_count * core_gadget_error(arch.d_core, spec, rt, arch.injection_period, hw, fit, opts)
    if not include_msf or not arch.msf_levels:
        return core
    _, delivered = msf_state_error(tuple(lv.d_level for lv in arch.msf_levels), arch.d_core,
                                   rt.gamma_mem, hw, fit, opts)
    return core + spec.t_count * delivered


def _build(objective, spec, hw, fit, opts, gamma_fn, max_top_units=None) -> Microarchitecture:
    budget_core = spec.error_budget * opts.core_budget_fraction
    budget_msf = spec.error_budget - budget_core
    per_state = budget_msf / spec.t_count

    d_core, _ = _core_distance(spec, budget_core, gamma_fn, lambda d, r: r.gamma_mem, hw, fit, opts)
    rt = gamma_fn(d_core)
    distances = _choose_level_distances(per_state, d_core, gamma_fn, hw, fit, opts)
    chain, delivered = msf_state_error(distances, d_core, rt.gamma_mem, hw, fit, opts)
    period = rt.gamma_mem
    counts = _unit_counts(distances, chain, period, hw)

    if max_top_units is not None and counts[-1] > max_top_units:
        # an undersized factory slows the core; its idle time grows and d_core is re-derived
        top = len(distances) - 1
        cycle = hw.tau_logical(distances[top]) * DISTILL_ROTATIONS
        s_top = _success_rate(chain[top][0])
        slow = cycle / (max_top_units * s_top)
        d_core, _ = _core_distance(spec, budget_core, gamma_fn,
                                   lambda d, r: max(r.gamma_mem, slow), hw, fit, opts)
        rt = gamma_fn(d_core)
        period = max(rt.gamma_mem, slow)
        distances = _choose_level_distances(per_state, d_core, gamma_fn, hw, fit, opts)
        chain, delivered = msf_state_error(distances, d_core, rt.gamma_mem, hw, fit, opts)
        counts = _unit_counts(distances, chain, period, hw)

    levels = tuple(
        MsfLevel(d_level=d, n_units=n,
                 storage_patches=storage_patches(rt.gamma_mem, hw.tau_logical(d), opts.co_store_magic),
                 p_in=pi, p_out=po, success_rate=_success_rate(pi))
        for d, n, (pi, po) in zip(distances, counts, chain)
    )
    core_p = core_gadget_error(d_core, spec, rt, period, hw, fit, opts)
    arch = Microarchitecture(
        objective=objective, d_core=d_core, msf_levels=levels, gamma_mem=rt.gamma_mem,
        gamma_ls=rt.gamma_ls, injection_period=period, runtime_s=period.s * spec.t_count,
        qubits_core=0, qubits_msf_distill=0, qubits_msf_storage=0,
        core_error=spec.t_count * core_p, msf_error=spec.t_count * delivered,
        accumulated_error=spec.t_count * (core_p + delivered), stab_round=hw.stab_round,
    )
    qc, qd, qs = qubit_accounting(arch, spec, fit, opts)
    return replace(arch, qubits_core=qc, qubits_msf_distill=qd, qubits_msf_storage=qs)


def _tie_key(a: Microarchitecture):
    return (a.qubits_total, a.runtime_s, a.d_core, tuple(lv.d_level for lv in a.msf_levels))


def gamma_from_decoder(model, c: CommLatencies) -> Callable[[int], ReactionTimes]:
    return lambda d: reaction_times(model, d, c)


def gamma_fixed(gamma_mem: Duration, gamma_ls: Duration | None = None) -> Callable[[int], ReactionTimes]:
    rt = ReactionTimes(gamma_mem, gamma_mem if gamma_ls is None else gamma_ls)
    return lambda d: rt


def gamma_in_core_cycles(cycles: float, hw: HardwareParams) -> Callable[[int], ReactionTimes]:
    """Reaction time pinned to ``cycles`` logical cycles of whichever core distance is chosen."""
    def fn(d):
        g = hw.tau_logical(d) * cycles
        return ReactionTimes(g, g)
    return fn


def assemble(spec: CircuitSpec, hw: HardwareParams = HardwareParams(), fit: ErrorFitParams = ErrorFitParams(),
             model=None, c: CommLatencies | None = None, objective: str = "time_optimal", *,
             gamma: Callable[[int], ReactionTimes] | None = None,
             opts: AssemblyOptions = AssemblyOptions()) -> Microarchitecture:
    """Assemble ``spec`` onto the core + MSF microarchitecture.

    Reaction times come from ``gamma`` (a function of the core distance; see
    :func:`gamma_fixed` and :func:`gamma_in_core_cycles`) or, when it is not
    given, from the decoder ``model`` and communication latencies ``c``.
    ``space_optimal`` tries every top-level unit count up to the time-optimal
    one and keeps the smallest total footprint.
    """
    if gamma is None:
        if model is None:
            raise ValueError("either gamma or a decoder model is required")
        gamma = gamma_from_decoder(model, c or CommLatencies())
    if objective == "time_optimal":
        return _build(objective, spec, hw, fit, opts, gamma)
    if objective != "space_optimal":
        raise ValueError(f"unknown objective {objective!r}")
    best = _build(objective, spec, hw, fit, opts, gamma)
    for n_top in range(best.msf_levels[-1].n_units - 1, 0, -1):
        try:
            cand = _build(objective, spec, hw, fit, opts, gamma, max_top_units=n_top)
        except DistanceCapError:
            continue
        if _tie_key(cand) < _tie_key(best):
            best = cand
    return best


# -------------------------------------------------------------------- sweep

SWEEP_COLUMNS = ("gamma_mem_us", "gamma_in_cycles", "d_core", "level_index", "d_level", "n_units",
                 "storage_patches", "qubits_core", "qubits_distill", "qubits_storage", "runtime_s",
                 "accumulated_error")


@dataclass(frozen=True)
class SweepPoint:
    gamma_input: float
    arch: Microarchitecture | None
    error: str | None = None

    def rows(self) -> list[dict]:
        if self.arch is None:
            return [{"gamma_mem_us": None, "gamma_in_cycles": None, "error": self.error}]
        a = self.arch
        return [
            {"gamma_mem_us": a.gamma_mem.us, "gamma_in_cycles": a.gamma_in_cycles, "d_core": a.d_core,
             "level_index": i, "d_level": lv.d_level, "n_units": lv.n_units,
             "storage_patches": lv.storage_patches, "qubits_core": a.qubits_core,
             "qubits_distill": a.qubits_msf_distill, "qubits_storage": a.qubits_msf_storage,
             "runtime_s": a.runtime_s, "accumulated_error": a.accumulated_error}
            for i, lv in enumerate(a.msf_levels)
        ]


def _sweep_one(args) -> SweepPoint:
    value, in_cycles, spec, hw, fit, opts, objective = args
    fn = gamma_in_core_cycles(value, hw) if in_cycles else gamma_fixed(Duration(value * 1e-6))
    try:
        return SweepPoint(value, assemble(spec, hw, fit, objective=objective, gamma=fn, opts=opts))
    except InfeasibleBudgetError as exc:
        return SweepPoint(value, None, f"{type(exc).__name__}: {exc}")


def sweep_reaction_time(spec: CircuitSpec, hw: HardwareParams = HardwareParams(),
                        fit: ErrorFitParams = ErrorFitParams(), c: CommLatencies | None = None,
                        gamma_range=(), *, in_cycles: bool = False, objective: str = "time_optimal",
                        opts: AssemblyOptions = AssemblyOptions(), jobs: int = 1) -> list[SweepPoint]:
    """Assemble one architecture per reaction time, with gamma_LS equal to gamma_mem.

    Values are microseconds, or core logical cycles with ``in_cycles``.
    Infeasible points are recorded and the sweep continues. ``c`` is accepted
    for interface symmetry; fixed reaction times make it unused.
    """
    values = list(gamma_range)
    if not values:
        raise ValueError("gamma_range must be nonempty")
    tasks = [(float(v), in_cycles, spec, hw, fit, opts, objective) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


__all__ = [
    "AssemblyOptions", "CIRCUIT_PRESETS", "CircuitSpec", "Microarchitecture", "MsfLevel", "SWEEP_COLUMNS",
    "SweepPoint", "UnitFootprint", "accumulate_error", "assemble", "circuit_preset", "core_gadget_error",
    "gamma_fixed", "gamma_from_decoder", "gamma_in_core_cycles", "level_output_error", "msf_state_error",
    "qubit_accounting", "storage_patches", "sweep_reaction_time", "tile_qubits", "unit_logical_error",
]
