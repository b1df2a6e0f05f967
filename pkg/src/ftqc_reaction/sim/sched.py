"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``FTQC_REACTION_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _sched_py

python_schedule_dag = _sched_py.schedule_dag

try:
    if os.environ.get("FTQC_REACTION_PURE_PYTHON") == "1":
        raise ImportError("pure Python kernel forced by environment")
    from ._sched_ext import schedule_dag as compiled_schedule_dag
except ImportError:
    compiled_schedule_dag = None

schedule_dag = compiled_schedule_dag or python_schedule_dag
BACKEND = "compiled" if compiled_schedule_dag is not None else "python"
