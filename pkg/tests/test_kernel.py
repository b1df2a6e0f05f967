import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ftqc_reaction.errors import DeadlockError
from ftqc_reaction.sim import sched

needs_ext = pytest.mark.skipif(sched.compiled_schedule_dag is None, reason="compiled kernel not built")


@st.composite
def dags(draw):
    n = draw(st.integers(1, 60))
    release = draw(st.lists(st.integers(0, 50), min_size=n, max_size=n))
    duration = draw(st.lists(st.integers(0, 30), min_size=n, max_size=n))
    uses = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    ptr, idx, delay = [0], [], []
    for j in range(n):
        preds = draw(st.lists(st.integers(0, j - 1), max_size=4, unique=True)) if j else []
        for p in preds:
            idx.append(p)
            delay.append(draw(st.integers(0, 10)))
        ptr.append(len(idx))
    workers = draw(st.integers(1, 5))
    return release, duration, uses, ptr, idx, delay, workers


def _run(fn, dag):
    return [np.asarray(a) for a in fn(*dag)]


@needs_ext
@given(dags())
def test_backends_agree(dag):
    for a, b in zip(_run(sched.python_schedule_dag, dag), _run(sched.compiled_schedule_dag, dag)):
        assert np.array_equal(a, b)


@given(dags())
def test_schedule_invariants(dag):
    release, duration, uses, ptr, idx, delay, workers = dag
    ready, start, finish, worker = _run(sched.schedule_dag, dag)
    n = len(release)
    for j in range(n):
        bound = release[j]
        for e in range(ptr[j], ptr[j + 1]):
            bound = max(bound, finish[idx[e]] + delay[e])
        assert ready[j] == bound
        assert start[j] >= ready[j]
        assert finish[j] == start[j] + (duration[j] if uses[j] else 0)
        if not uses[j]:
            assert start[j] == ready[j] and worker[j] == -1
        else:
            assert 0 <= worker[j] < workers
    # one job per worker at a time
    for w in range(workers):
        spans = sorted((start[j], finish[j]) for j in range(n) if worker[j] == w)
        for (_, f0), (s1, _) in zip(spans, spans[1:]):
            assert s1 >= f0
    # work conserving: a waiting job implies every worker is busy
    jobs = [j for j in range(n) if uses[j]]
    for j in jobs:
        if start[j] > ready[j]:
            t = ready[j]
            busy = sum(1 for k in jobs if k != j and start[k] <= t < finish[k])
            assert busy == workers


def test_fifo_order_single_worker():
    release = [0, 5, 1, 3]
    out = sched.schedule_dag(release, [10, 1, 1, 1], [1, 1, 1, 1], [0, 0, 0, 0, 0], [], [], 1)
    start = np.asarray(out[1])
    assert list(np.argsort(start, kind="stable")) == [0, 2, 3, 1]


def test_cycle_raises_deadlock():
    args = ([0, 0], [1, 1], [1, 1], [0, 1, 2], [1, 0], [0, 0], 1)
    with pytest.raises(DeadlockError):
        sched.python_schedule_dag(*args)
    if sched.compiled_schedule_dag is not None:
        with pytest.raises(DeadlockError):
            sched.compiled_schedule_dag(*args)


def test_rejects_zero_workers():
    with pytest.raises(ValueError):
        sched.schedule_dag([0], [1], [1], [0, 0], [], [], 0)


def test_env_forces_python_backend():
    code = "from ftqc_reaction.sim import BACKEND; print(BACKEND)"
    env = dict(os.environ, FTQC_REACTION_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
