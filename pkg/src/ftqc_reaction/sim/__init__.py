"""Discrete-event simulation of the decode/control pipeline."""
from .engine import (JobGraph, SimConfig, SimReport, background_memory_windows, default_core_slots, default_surgery_lanes,
                     execute, peak_occupancy, queue_depth_profile, queue_growth_rate, run,
                     run_msf_unit)
from .sched import BACKEND

__all__ = ["BACKEND", "JobGraph", "SimConfig", "SimReport", "background_memory_windows",
           "default_core_slots", "default_surgery_lanes", "execute", "peak_occupancy", "queue_depth_profile",
           "queue_growth_rate", "run", "run_msf_unit"]
