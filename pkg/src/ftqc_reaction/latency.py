"""Decoder and communication latency, and the two reaction times.

A decoding unit is modelled as a monomial in the number of decoding-graph
nodes per round, ``tau_d(N) = alpha * N ** beta`` seconds per round. The
memory reaction time chains two temporal windows of ``3d`` rounds; the
Y-surgery reaction time chains three spatial layers of ``2d`` rounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import InfeasibleCommunicationError
from .models import check_distance
from .units import Duration, us


@dataclass(frozen=True)
class DecoderModel:
    name: str
    alpha: float  # seconds per round at N = 1
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive (use IDEAL_DECODER for a zero-latency decoder)")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @property
    def is_ideal(self) -> bool:
        return False


@dataclass(frozen=True)
class IdealDecoder:
    """Sentinel decoder that returns instantly. Useful for decode-free limits."""

    name: str = "ideal"
    alpha: float = 0.0
    beta: float = 1.0

    @property
    def is_ideal(self) -> bool:
        return True


IDEAL_DECODER = IdealDecoder()

DECODER_PRESETS = {
    "cc-fpga": DecoderModel("cc-fpga", 2.85e-10, 1.2),
    "cc-asic": DecoderModel("cc-asic", 5.53e-11, 1.34),
    "alphaqubit": DecoderModel("alphaqubit", 4.8e-6, 0.503),
    "pymatching": DecoderModel("pymatching", 5.91e-9, 1.17),
}


def decoder_preset(name: str):
    if name == "ideal":
        return IDEAL_DECODER
    try:
        return DECODER_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown decoder preset {name!r}; choose from "
                       f"{sorted(DECODER_PRESETS) + ['ideal']}") from None


@dataclass(frozen=True)
class CommLatencies:
    """Per-hop latencies of the execution environment, all in microseconds.

    ``t_qc`` QPU to controller, ``t_cd`` controller to decoders, ``t_dd``
    decoder to decoder, ``t_do`` decoders to orchestrator, ``t_oc``
    orchestrator to controller, ``t_cq`` controller to QPU.
    """

    t_qc: float = 0.15
    t_cd: float = 2.0
    t_dd: float = 0.5
    t_do: float = 1.0
    t_oc: float = 4.0
    t_cq: float = 0.15

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")

    def hop(self, name: str) -> Duration:
        return us(getattr(self, name))

    @property
    def inbound(self) -> Duration:
        """Syndrome path, paid once per round: QPU -> controller -> decoders."""
        return us(self.t_qc + self.t_cd)

    @property
    def outbound(self) -> Duration:
        """Result path, paid once per decode cycle: decoders -> orchestrator -> controller -> QPU."""
        return us(self.t_do + self.t_oc + self.t_cq)

    def scaled_to(self, total_us: float) -> CommLatencies:
        """Same hop proportions, rescaled so the six hops sum to ``total_us``."""
        current = sum(getattr(self, f.name) for f in fields(self))
        if current == 0:
            raise ValueError("cannot rescale all-zero latencies")
        k = total_us / current
        return CommLatencies(**{f.name: getattr(self, f.name) * k for f in fields(self)})


COMM_PRESETS = {
    "default": CommLatencies(),
    "o10us": CommLatencies().scaled_to(10.0),
    "zero": CommLatencies(0, 0, 0, 0, 0, 0),
}


def comm_preset(name: str) -> CommLatencies:
    try:
        return COMM_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown comms preset {name!r}; choose from {sorted(COMM_PRESETS)}") from None


@dataclass(frozen=True)
class ReactionTimes:
    gamma_mem: Duration
    gamma_ls: Duration

    @property
    def surgery_multiplicity(self) -> int:
        """How many surgeries are decoded concurrently: ceil(gamma_ls / gamma_mem)."""
        return math.ceil(self.gamma_ls / self.gamma_mem)


def tau_d(model, n_nodes: float) -> Duration:
    """Per-round decoding time for a graph slice of ``n_nodes`` nodes."""
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
    if model.is_ideal:
        return Duration(0.0)
    return Duration(model.alpha * n_nodes ** model.beta)


def t_com(c: CommLatencies) -> Duration:
    return us(c.t_qc + c.t_cd + c.t_dd + c.t_do + c.t_oc + c.t_cq)


def gamma_mem(model, d: int, c: CommLatencies) -> Duration:
    d = check_distance(d)
    return tau_d(model, d * d) * (6 * d) + t_com(c)


def gamma_ls(model, d: int, c: CommLatencies) -> Duration:
    d = check_distance(d)
    spatial = 4 ** model.beta + 3 ** model.beta + 1
    return (tau_d(model, d * d) * (2 * d * spatial)
            + us(2 * c.t_dd + c.t_qc + c.t_cd + c.t_do + c.t_oc + c.t_cq))


def ls_syndrome_retention(model, d: int, c: CommLatencies) -> Duration:
    """How long surgery syndromes sit in decoder RAM: gamma_ls without the I/O hops."""
    d = check_distance(d)
    spatial = 4 ** model.beta + 3 ** model.beta + 1
    return tau_d(model, d * d) * (2 * d * spatial) + us(2 * c.t_dd)


def reaction_times(model, d: int, c: CommLatencies) -> ReactionTimes:
    return ReactionTimes(gamma_mem(model, d, c), gamma_ls(model, d, c))


def required_decoder_speed(t_circuit: Duration, t_count: int, d: int, c: CommLatencies) -> Duration:
    """Per-round decoding time of a ``d x d`` patch that finishes ``t_count`` injections in ``t_circuit``."""
    d = check_distance(d)
    if t_count <= 0:
        raise ValueError("t_count must be positive")
    per_injection = t_circuit / t_count
    slack = per_injection - t_com(c)
    if slack.s <= 0:
        raise InfeasibleCommunicationError(
            f"{per_injection.us:.4g} us per injection does not cover t_com = {t_com(c).us:.4g} us")
    return slack / (6 * d)


def circuit_runtime(gamma: Duration, t_count: int) -> Duration:
    if t_count < 0:
        raise ValueError("t_count must be non-negative")
    return gamma * t_count


def max_t_count(model, d: int, t_circuit: Duration, c: CommLatencies) -> float:
    """Largest T count that ``model`` can run within ``t_circuit``.

    This is where the required per-round speed curve crosses the decoder's
    achieved ``tau_d(d^2)``.
    """
    return t_circuit / gamma_mem(model, d, c)
