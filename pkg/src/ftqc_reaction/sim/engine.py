"""Deterministic discrete-event model of the decode/control pipeline.

The pipeline is expressed as a DAG of jobs with per-edge delays and run on a
FIFO pool of identical decoders by the scheduling kernel. Decode jobs occupy
a decoder; milestones (measurements, gadget issues, results reaching the
QPU) take no decoder and complete the instant their inputs are in.
Communication hops are edge delays:

* ``t_qc + t_cd`` between the last syndrome round of a window and the
  window becoming decodable,
* ``t_dd`` between dependent windows,
* ``t_do + t_oc + t_cq`` between the last decode of an outcome and the
  instruction reaching the QPU.

Time is integer nanoseconds throughout.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..latency import CommLatencies, gamma_ls, gamma_mem, tau_d
from ..models import check_distance
from ..units import Duration, ns, us
from ..windows import DecodingWindow, memory_windows, surgery_windows
from . import sched

# nominal spatial nodes per round of each Y-surgery layer, in units of d^2
_LS_LAYER_NODES = {"1": 4.0, "2": 3.0, "3": 1.0}
MSF_ROTATIONS = 11


@dataclass(frozen=True)
class SimConfig:
    d: int
    decoder: object
    comms: CommLatencies = field(default_factory=CommLatencies)
    n_decoders: int = 64
    n_injections: int = 200
    stab_round: Duration = us(1.0)
    seed: int = 0
    jitter: float = 0.0  # relative std-dev of decode times; 0 disables
    storage_slots: int | None = None
    surgery_lanes: int | None = None  # gadgets whose surgeries may overlap; None derives it
    co_store_magic: bool = False
    surgery_grid: tuple[int, int] = (1, 6)
    warmup_fraction: float = 0.1
    kernel: str = "auto"  # "auto", "python" or "compiled"
    trace: bool = False

    def __post_init__(self):
        check_distance(self.d)
        if self.n_decoders < 1:
            raise ValueError("n_decoders must be >= 1")
        if self.n_injections < 1:
            raise ValueError("n_injections must be >= 1")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")
        if self.kernel not in ("auto", "python", "compiled"):
            raise ValueError(f"unknown kernel {self.kernel!r}")

    @property
    def tau_logical(self) -> Duration:
        return self.stab_round * self.d


@dataclass
class SimReport:
    mean_injection_period: Duration
    measured_gamma_mem: Duration
    peak_correction_storage: int
    total_runtime: Duration
    decoder_utilization: float
    max_queue_depth: int
    storage_slots: int
    n_jobs: int
    n_decode_jobs: int
    queue_growth_per_ms: float
    backend: str
    trace: list | None = None

    def to_dict(self) -> dict:
        return {
            "mean_injection_period_us": self.mean_injection_period.us,
            "measured_gamma_mem_us": self.measured_gamma_mem.us,
            "peak_correction_storage": self.peak_correction_storage,
            "total_runtime_us": self.total_runtime.us,
            "decoder_utilization": self.decoder_utilization,
            "max_queue_depth": self.max_queue_depth,
            "storage_slots": self.storage_slots,
            "n_jobs": self.n_jobs,
            "n_decode_jobs": self.n_decode_jobs,
            "queue_growth_per_ms": self.queue_growth_per_ms,
            "backend": self.backend,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def trace_jsonl(self) -> str:
        if self.trace is None:
            return ""
        return "".join(json.dumps(e, separators=(",", ":")) + "\n" for e in self.trace)


class JobGraph:
    """Accumulates jobs and dependency edges in the kernel's CSR layout."""

    def __init__(self):
        self.release: list[int] = []
        self.duration: list[int] = []
        self.uses_worker: list[int] = []
        self.deps: list[list[tuple[int, int]]] = []
        self.tags: list[str] = []

    def add(self, tag: str, *, duration_ns: int = 0, worker: bool = True, release_ns: int = 0,
            deps=()) -> int:
        self.release.append(int(release_ns))
        self.duration.append(int(duration_ns))
        self.uses_worker.append(1 if worker else 0)
        self.deps.append([(int(p), int(delay)) for p, delay in deps])
        self.tags.append(tag)
        return len(self.tags) - 1

    def milestone(self, tag: str, *, release_ns: int = 0, deps=()) -> int:
        return self.add(tag, worker=False, release_ns=release_ns, deps=deps)

    def __len__(self):
        return len(self.tags)

    def arrays(self):
        ptr = np.zeros(len(self) + 1, dtype=np.int64)
        for j, dl in enumerate(self.deps):
            ptr[j + 1] = ptr[j] + len(dl)
        idx = np.fromiter((p for dl in self.deps for p, _ in dl), dtype=np.int64, count=ptr[-1])
        delay = np.fromiter((w for dl in self.deps for _, w in dl), dtype=np.int64, count=ptr[-1])
        return (np.asarray(self.release, dtype=np.int64), np.asarray(self.duration, dtype=np.int64),
                np.asarray(self.uses_worker, dtype=np.int64), ptr, idx, delay)


def _kernel(name: str):
    if name == "python":
        return sched.python_schedule_dag, "python"
    if name == "compiled":
        if sched.compiled_schedule_dag is None:
            raise RuntimeError("compiled scheduling kernel is not available")
        return sched.compiled_schedule_dag, "compiled"
    return sched.schedule_dag, sched.BACKEND


@dataclass
class Schedule:
    graph: JobGraph
    ready: np.ndarray
    start: np.ndarray
    finish: np.ndarray
    worker: np.ndarray
    backend: str


def execute(graph: JobGraph, n_workers: int, kernel: str = "auto", *, jitter: float = 0.0,
            seed: int = 0) -> Schedule:
    release, duration, uses, ptr, idx, delay = graph.arrays()
    if jitter > 0:
        rng = np.random.default_rng(seed)
        factor = np.clip(1.0 + jitter * rng.standard_normal(len(duration)), 0.0, None)
        duration = np.where(uses == 1, np.rint(duration * factor), duration).astype(np.int64)
        graph.duration = duration.tolist()
    fn, backend = _kernel(kernel)
    ready, start, finish, worker = fn(release, duration, uses, ptr, idx, delay, n_workers)
    return Schedule(graph, ready, start, finish, worker, backend)


def queue_depth_profile(ready: np.ndarray, start: np.ndarray):
    """Step function of jobs waiting for a decoder: (times, depth after each time)."""
    times = np.concatenate([ready, start])
    steps = np.concatenate([np.ones_like(ready), -np.ones_like(start)])
    # at equal times a start is applied before a new arrival
    order = np.lexsort((steps, times))
    return times[order], np.cumsum(steps[order])


def queue_growth_rate(ready: np.ndarray, start: np.ndarray, until: int | None = None,
                      n_samples: int = 200) -> float:
    """Least-squares slope of queue depth over ``[min(ready), until]``, in jobs per millisecond.

    ``until`` defaults to the last ready time; pass the last external release
    to restrict the fit to the interval in which load keeps arriving.
    """
    if len(ready) < 2:
        return 0.0
    times, depth = queue_depth_profile(ready, start)
    hi = int(ready.max()) if not until else int(until)
    grid = np.linspace(ready.min(), hi, n_samples)
    pos = np.searchsorted(times, grid, side="right") - 1
    sampled = np.where(pos >= 0, depth[np.clip(pos, 0, None)], 0)
    if grid[-1] == grid[0]:
        return 0.0
    slope, _ = np.polyfit(grid / 1e6, sampled, 1)
    return float(slope)


def peak_occupancy(enter: np.ndarray, leave: np.ndarray) -> int:
    """Max number of half-open intervals ``[enter, leave)`` alive at once."""
    if len(enter) == 0:
        return 0
    times = np.concatenate([enter, leave])
    steps = np.concatenate([np.ones_like(enter), -np.ones_like(leave)])
    order = np.lexsort((steps, times))
    return int(np.cumsum(steps[order]).max())


def _ns(x: Duration) -> int:
    return x.to_ns_int()


def _hops(c: CommLatencies):
    return _ns(c.inbound), _ns(c.hop("t_dd")), _ns(c.outbound)


def _memory_window_ns(config: SimConfig) -> int:
    d = config.d
    return _ns(tau_d(config.decoder, d * d) * (3 * d))


def _add_background(g: JobGraph, windows, d: int, model, round_ns: int, inbound: int,
                    t_dd: int) -> list[int]:
    index = {}
    jobs = []
    for w in windows:
        rel = w.syndrome_ready_round(d) * round_ns + inbound
        deps = [(index[dep], t_dd) for dep in w.depends_on]
        j = g.add(f"bg:{w.id}", duration_ns=_ns(w.decode_time(model, d)), release_ns=rel, deps=deps)
        index[w.id] = j
        jobs.append(j)
    return jobs


def background_memory_windows(n_patches: int, horizon: Duration, d: int, stab_round: Duration = us(1.0),
                              patch_x: int = 2) -> list[DecodingWindow]:
    """Temporal windows for ``n_patches`` pair-storage patches covering ``horizon``."""
    rounds = math.ceil(horizon / stab_round)
    n_cycles = max(1, math.ceil(max(rounds - 3 * d, 0) / (4 * d)) + 1)
    out = []
    for p in range(n_patches):
        out.extend(memory_windows(n_cycles, d, patch_x=patch_x, prefix=f"p{p}:"))
    return out


def _sorted_windows(windows) -> list[DecodingWindow]:
    from ..windows import topological_order
    order = {wid: k for k, wid in enumerate(topological_order(list(windows)))}
    return sorted(windows, key=lambda w: order[w.id])


def default_core_slots(config: SimConfig) -> int:
    """Correction-storage slots that keep the core from stalling on surgery decodes."""
    gm = gamma_mem(config.decoder, config.d, config.comms)
    gl = gamma_ls(config.decoder, config.d, config.comms)
    return max(1, math.ceil((gl + config.tau_logical * 2) / gm))


def default_surgery_lanes(config: SimConfig) -> int:
    """Parallel surgery buses needed so that gadget issue never outpaces γ_mem."""
    gm = gamma_mem(config.decoder, config.d, config.comms)
    return max(1, math.ceil(config.tau_logical / gm))


def _steady(values: np.ndarray, warmup_fraction: float) -> np.ndarray:
    skip = int(len(values) * warmup_fraction)
    return values[skip:] if len(values) - skip >= 1 else values


def _trace(schedule: Schedule) -> list[dict]:
    events = []
    g = schedule.graph
    for j, tag in enumerate(g.tags):
        if g.uses_worker[j]:
            events.append({"time_ns": int(schedule.ready[j]), "event_type": "ready", "ids": [tag]})
            events.append({"time_ns": int(schedule.start[j]), "event_type": "start",
                           "ids": [tag, int(schedule.worker[j])]})
            events.append({"time_ns": int(schedule.finish[j]), "event_type": "finish", "ids": [tag]})
        else:
            events.append({"time_ns": int(schedule.finish[j]), "event_type": "milestone", "ids": [tag]})
    rank = {"finish": 0, "milestone": 1, "ready": 2, "start": 3}
    events.sort(key=lambda e: (e["time_ns"], rank[e["event_type"]], e["ids"][0]))
    return events


def _pool_stats(schedule: Schedule, n_decoders: int):
    uses = np.asarray(schedule.graph.uses_worker, dtype=bool)
    if not uses.any():
        return 0.0, 0, 0.0
    r, s, f = schedule.ready[uses], schedule.start[uses], schedule.finish[uses]
    last_release = int(np.asarray(schedule.graph.release, dtype=np.int64)[uses].max())
    span = int(f.max() - min(r.min(), 0))
    busy = float((f - s).sum())
    util = busy / (n_decoders * span) if span > 0 else 0.0
    _, depth = queue_depth_profile(r, s)
    return min(util, 1.0), int(depth.max()), queue_growth_rate(r, s, last_release or None)


def run(config: SimConfig, windows=None) -> SimReport:
    """Simulate a chain of anti-commuting pi/8 gadgets in the core.

    Each gadget issues two surgeries (one logical cycle each) on one of
    ``surgery_lanes`` buses, after which
    its correction qubit waits in storage. The correction is measured once
    the surgery outcome is decoded and the previous correction's outcome is
    known; the measured outcome is then decoded with a layer-A and a
    layer-B temporal window. ``windows`` adds background decode load (for
    instance from :func:`background_memory_windows`) on the same decoder
    pool; each background window is released when its last syndrome round
    reaches the decoders.
    """
    d, model, c = config.d, config.decoder, config.comms
    round_ns = _ns(config.stab_round)
    tau_ns = round_ns * d
    inbound, t_dd, outbound = _hops(c)
    window_ns = _memory_window_ns(config)
    slots = config.storage_slots or default_core_slots(config)
    lanes = config.surgery_lanes or default_surgery_lanes(config)
    grid = surgery_windows(*config.surgery_grid, d, has_y=True)
    layer_ns = {k: _ns(tau_d(model, v * d * d) * (2 * d)) for k, v in _LS_LAYER_NODES.items()}

    g = JobGraph()
    if windows:
        _add_background(g, _sorted_windows(windows), d, model, round_ns, inbound, t_dd)
    issue, measure, result = [], [], []
    for i in range(config.n_injections):
        deps = [(issue[i - 1], 0)] if i > 0 else []
        if i >= lanes:
            deps.append((issue[i - lanes], tau_ns))
        if i >= slots:
            deps.append((measure[i - slots], 0))
        gi = g.milestone(f"issue:{i}", deps=deps)
        issue.append(gi)
        local = {}
        for w in grid:
            wdeps = [(gi, 2 * tau_ns + inbound)] + [(local[x], t_dd) for x in w.depends_on]
            local[w.id] = g.add(f"ls:{i}:{w.id}", duration_ns=layer_ns[w.layer], deps=wdeps)
        ls_done = g.milestone(f"ls_result:{i}", deps=[(j, outbound) for j in local.values()])
        mdeps = [(ls_done, 0)] + ([(result[i - 1], 0)] if i > 0 else [])
        mi = g.milestone(f"measure:{i}", deps=mdeps)
        a = g.add(f"memA:{i}", duration_ns=window_ns, deps=[(mi, inbound)])
        b = g.add(f"memB:{i}", duration_ns=window_ns, deps=[(a, t_dd)])
        result.append(g.milestone(f"result:{i}", deps=[(b, outbound)]))
        measure.append(mi)

    sch = execute(g, config.n_decoders, config.kernel, jitter=config.jitter, seed=config.seed)
    m = sch.finish[measure]
    r = sch.finish[result]
    enter = sch.finish[issue] + tau_ns
    gam = _steady(r - m, config.warmup_fraction)
    periods = _steady(np.diff(m), config.warmup_fraction) if len(m) > 1 else gam
    util, qmax, growth = _pool_stats(sch, config.n_decoders)
    return SimReport(
        mean_injection_period=ns(float(periods.mean())),
        measured_gamma_mem=ns(float(gam.mean())),
        peak_correction_storage=peak_occupancy(enter, m),
        total_runtime=ns(float(r.max())),
        decoder_utilization=util,
        max_queue_depth=qmax,
        storage_slots=slots,
        n_jobs=len(g),
        n_decode_jobs=int(sum(g.uses_worker)),
        queue_growth_per_ms=growth,
        backend=sch.backend,
        trace=_trace(sch) if config.trace else None,
    )


def run_msf_unit(config: SimConfig) -> SimReport:
    """Simulate one 15-to-1 distillation unit.

    The unit performs its 11 commuting rotations back to back, one per
    logical cycle, producing a magic state every 11 cycles. Each rotation
    leaves a correction qubit in storage until its outcome is decoded (layer
    A then layer B) and the instruction reaches the QPU; there are no
    cross-rotation decode dependencies. A rotation stalls if all storage
    slots are busy. ``n_injections`` counts produced magic states.

    ``mean_injection_period`` is the output period of magic states and
    ``peak_correction_storage`` the peak number of occupied storage patches
    (including stored magic states when ``co_store_magic`` is set).
    """
    d, c = config.d, config.comms
    round_ns = _ns(config.stab_round)
    tau_ns = round_ns * d
    inbound, t_dd, outbound = _hops(c)
    window_ns = _memory_window_ns(config)
    gamma_ns = inbound + 2 * window_ns + t_dd + outbound
    slots = config.storage_slots or max(1, -(-gamma_ns // tau_ns))

    g = JobGraph()
    enter, release, outputs, magic_done = [], [], [], []
    n_rot = MSF_ROTATIONS * config.n_injections
    for j in range(n_rot):
        deps = [(enter[j - 1], tau_ns)] if j > 0 else []
        if j >= slots:
            deps.append((release[j - slots], 0))
        e = g.milestone(f"rotation:{j}", release_ns=tau_ns, deps=deps)
        a = g.add(f"memA:{j}", duration_ns=window_ns, deps=[(e, inbound)])
        b = g.add(f"memB:{j}", duration_ns=window_ns, deps=[(a, t_dd)])
        enter.append(e)
        release.append(g.milestone(f"measured:{j}", deps=[(b, outbound)]))
        if j % MSF_ROTATIONS == MSF_ROTATIONS - 1:
            k = j // MSF_ROTATIONS
            outputs.append(g.milestone(f"magic:{k}", deps=[(e, 0)]))
            magic_done.append(g.milestone(
                f"magic_free:{k}", deps=[(release[x], 0) for x in range(j - MSF_ROTATIONS + 1, j + 1)]))

    sch = execute(g, config.n_decoders, config.kernel, jitter=config.jitter, seed=config.seed)
    e_t, r_t = sch.finish[enter], sch.finish[release]
    out_t = sch.finish[outputs]
    if config.co_store_magic:
        peak = peak_occupancy(np.concatenate([e_t, out_t]), np.concatenate([r_t, sch.finish[magic_done]]))
    else:
        peak = peak_occupancy(e_t, r_t)
    gam = _steady(r_t - e_t, config.warmup_fraction)
    periods = _steady(np.diff(out_t), config.warmup_fraction) if len(out_t) > 1 else \
        np.array([out_t[0]], dtype=np.int64)
    util, qmax, growth = _pool_stats(sch, config.n_decoders)
    return SimReport(
        mean_injection_period=ns(float(periods.mean())),
        measured_gamma_mem=ns(float(gam.mean())),
        peak_correction_storage=peak,
        total_runtime=ns(float(sch.finish.max())),
        decoder_utilization=util,
        max_queue_depth=qmax,
        storage_slots=slots,
        n_jobs=len(g),
        n_decode_jobs=int(sum(g.uses_worker)),
        queue_growth_per_ms=growth,
        backend=sch.backend,
        trace=_trace(sch) if config.trace else None,
    )
