"""Closed-form logical error rates for surface-code operations.

Memory, lattice surgery and the post-corrected pi/8 rotation gadget are all
expressed through two exponential suppression laws: a space-like one
``mu_s * Lambda_s ** (-(d + 1) / 2)`` per unit of patch area per round, and a
time-like one ``mu_t * Lambda_t ** (-(r + 1) / 2)`` for measurement errors on
the bus. Every probability is clamped at 1; pass ``with_flag=True`` to learn
whether the clamp was hit.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass, field

from .errors import InvalidDistanceError, InvalidRoundsError
from .units import Duration


def check_distance(d) -> int:
    if isinstance(d, bool) or not isinstance(d, numbers.Integral) or d < 3 or d % 2 == 0:
        raise InvalidDistanceError(d)
    return int(d)


def check_rounds(r) -> int:
    if isinstance(r, bool) or not isinstance(r, numbers.Integral) or r < 1:
        raise InvalidRoundsError(r)
    return int(r)


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class HardwareParams:
    """Physical noise and timing parameters of the QPU.

    Defaults are the near-term superconducting target set. ``stab_round_us``
    is the wall-clock stabilizer round including error-suppression overheads,
    which is why it is longer than the sum of the gate times.
    """

    t1_us: float = 200.0
    t2_us: float = 200.0
    err_1q: float = 0.0002
    err_2q: float = 0.0005
    err_prep: float = 0.01
    err_meas: float = 0.005
    err_reset: float = 0.005
    time_1q_ns: float = 25.0
    time_2q_ns: float = 25.0
    time_prep_ns: float = 1000.0
    time_meas_ns: float = 100.0
    time_reset_ns: float = 100.0
    stab_round_us: float = 1.0

    def __post_init__(self):
        for name in ("err_1q", "err_2q", "err_prep", "err_meas", "err_reset"):
            _check_prob(name, getattr(self, name))
        for name in ("t1_us", "t2_us", "time_1q_ns", "time_2q_ns", "time_prep_ns",
                     "time_meas_ns", "time_reset_ns", "stab_round_us"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def stab_round(self) -> Duration:
        return Duration(self.stab_round_us * 1e-6)

    def tau_logical(self, d: int) -> Duration:
        """One logical cycle: ``d`` stabilizer rounds."""
        return self.stab_round * check_distance(d)


@dataclass(frozen=True)
class ErrorFitParams:
    """Fitted constants of the logical error models.

    ``mu``/``lambda_`` describe plain memory; the ``_s`` and ``_t`` pairs are
    the space-like and time-like lattice-surgery fits. The surgery fits are
    available only as plots, so they default to the memory fit.
    """

    mu: float = 0.019
    lambda_: float = 9.3
    mu_s: float = 0.019
    lambda_s: float = 9.3
    mu_t: float = 0.019
    lambda_t: float = 9.3
    p_magic: float = 4.73e-5
    discard_magic: float = 0.41
    magic_max_distance: int = field(default=25)

    def __post_init__(self):
        for name in ("lambda_", "lambda_s", "lambda_t"):
            if not getattr(self, name) > 1.0:
                raise ValueError(f"{name} must exceed 1")
        for name in ("mu", "mu_s", "mu_t"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        _check_prob("p_magic", self.p_magic)
        _check_prob("discard_magic", self.discard_magic)


@dataclass(frozen=True)
class SurgeryShape:
    """A lattice surgery on ``k_patches`` logical patches joined by ``b_patches`` bus tiles."""

    k_patches: int
    b_patches: int
    rounds: int
    distance: int

    def __post_init__(self):
        check_distance(self.distance)
        check_rounds(self.rounds)
        if self.k_patches < 1:
            raise ValueError("k_patches must be >= 1")
        if self.b_patches < 0:
            raise ValueError("b_patches must be >= 0")


def _clamp(raw: float, with_flag: bool):
    saturated = raw > 1.0
    p = 1.0 if saturated else raw
    return (p, saturated) if with_flag else p


def _space_suppression(d: int, fit: ErrorFitParams) -> float:
    return fit.lambda_s ** (-(d + 1) / 2)


def p_mem(d: int, r: int, fit: ErrorFitParams = ErrorFitParams(), *, with_flag=False):
    """Logical error of a ``d x d`` memory patch held for ``r`` rounds."""
    d = check_distance(d)
    r = check_rounds(r)
    return _clamp(fit.mu_s * d * r * _space_suppression(d, fit), with_flag)


def _p_ls_raw(k: float, b: float, r: int, d: int, fit: ErrorFitParams) -> float:
    space = fit.mu_s * ((k + b) * d * r + k * d) * _space_suppression(d, fit)
    time = fit.mu_t * b * d * d * fit.lambda_t ** (-(r + 1) / 2)
    return space + time


def p_lattice_surgery(shape: SurgeryShape, fit: ErrorFitParams = ErrorFitParams(), *,
                      with_flag=False):
    return _clamp(_p_ls_raw(shape.k_patches, shape.b_patches, shape.rounds, shape.distance, fit),
                  with_flag)


def p_pi8_gadget(d: int, k_avg: float, b_avg: float, gamma_mem: Duration, gamma_ls: Duration,
                 tau_logical: Duration, fit: ErrorFitParams = ErrorFitParams(), *,
                 idle_qubits: float | None = None, with_flag=False):
    """Error of one post-corrected pi/8 rotation.

    Two surgeries at ``r = d`` (magic state with correction qubit, then the
    rotation's Pauli with ``k_avg + 1`` patches), plus memory while the
    correction qubit waits ``gamma_ls + tau_logical`` and the computational
    qubits idle ``gamma_mem``. ``idle_qubits`` overrides how many qubits idle
    for ``gamma_mem``; it defaults to ``k_avg``.
    """
    d = check_distance(d)
    if gamma_mem.s < 0 or gamma_ls.s < 0:
        raise ValueError("reaction times must be non-negative")
    if tau_logical.s <= 0:
        raise ValueError("tau_logical must be positive")
    if k_avg < 0 or b_avg < 0:
        raise ValueError("k_avg and b_avg must be non-negative")
    idle = k_avg if idle_qubits is None else idle_qubits
    surgeries = _p_ls_raw(3, 2, d, d, fit) + _p_ls_raw(k_avg + 1, b_avg, d, d, fit)
    cycles = (idle * gamma_mem.s + gamma_ls.s + tau_logical.s) / tau_logical.s
    memory = cycles * fit.mu_s * d * d * _space_suppression(d, fit)
    return _clamp(surgeries + memory, with_flag)


def p_magic_prep(d: int, fit: ErrorFitParams = ErrorFitParams()) -> float:
    """Error of one accepted cultivated magic state.

    Treated as distance independent; above ``magic_max_distance`` the state is
    cultivated at the cap and grown, which the caller charges as memory.
    """
    check_distance(d)
    return fit.p_magic


def magic_accept_rate(fit: ErrorFitParams = ErrorFitParams()) -> float:
    return 1.0 - fit.discard_magic
