"""Pure-Python scheduling kernel. Must stay behaviourally identical to ``_sched_ext.pyx``."""
import heapq

import numpy as np

from ..errors import DeadlockError


def schedule_dag(release, duration, uses_worker, dep_ptr, dep_idx, dep_delay, n_workers):
    """Run a dependency DAG of jobs on ``n_workers`` identical FIFO workers.

    Job ``j`` becomes ready at ``max(release[j], finish[p] + delay)`` over
    its predecessors ``p``. Worker jobs are dispatched in ``(ready, j)``
    order whenever a worker is free; jobs with ``uses_worker[j] == 0`` are
    milestones that finish the instant they are ready. Completions at time
    ``t`` are processed before dispatching at ``t``. All times are integer
    nanoseconds.

    Returns ``(ready, start, finish, worker)`` int64 arrays; ``worker`` is -1
    for milestones.
    """
    n = len(release)
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    release = [int(x) for x in release]
    duration = [int(x) for x in duration]
    uses = [bool(x) for x in uses_worker]
    dep_ptr = [int(x) for x in dep_ptr]
    dep_idx = [int(x) for x in dep_idx]
    dep_delay = [int(x) for x in dep_delay]

    succ = [[] for _ in range(n)]
    indeg = [0] * n
    for j in range(n):
        for e in range(dep_ptr[j], dep_ptr[j + 1]):
            succ[dep_idx[e]].append((j, dep_delay[e]))
        indeg[j] = dep_ptr[j + 1] - dep_ptr[j]

    ready = list(release)
    start = [-1] * n
    finish = [-1] * n
    worker = [-1] * n
    pending = []  # (ready, j) worker jobs with all deps done
    running = []  # (finish, j)
    free_ids = list(range(n_workers))
    done = 0

    def resolve(j):
        # j has all dependencies finished; finalize milestones recursively
        nonlocal done
        stack = [j]
        while stack:
            k = stack.pop()
            if uses[k]:
                heapq.heappush(pending, (ready[k], k))
                continue
            start[k] = finish[k] = ready[k]
            done += 1
            for s, delay in succ[k]:
                if finish[k] + delay > ready[s]:
                    ready[s] = finish[k] + delay
                indeg[s] -= 1
                if indeg[s] == 0:
                    stack.append(s)

    for j in [j for j in range(n) if indeg[j] == 0]:
        resolve(j)

    t = 0
    while pending or running:
        while free_ids and pending and pending[0][0] <= t:
            r, j = heapq.heappop(pending)
            w = heapq.heappop(free_ids)
            start[j] = t
            finish[j] = t + duration[j]
            worker[j] = w
            heapq.heappush(running, (finish[j], j))
        nxt = running[0][0] if running else None
        if free_ids and pending:
            r = pending[0][0]
            nxt = r if nxt is None or r < nxt else nxt
        if nxt is None:
            break
        t = max(t, nxt)
        while running and running[0][0] <= t:
            f, j = heapq.heappop(running)
            heapq.heappush(free_ids, worker[j])
            done += 1
            for s, delay in succ[j]:
                if finish[j] + delay > ready[s]:
                    ready[s] = finish[j] + delay
                indeg[s] -= 1
                if indeg[s] == 0:
                    resolve(s)

    if done != n:
        stuck = [j for j in range(n) if finish[j] < 0][:10]
        raise DeadlockError(f"{n - done} jobs can never become ready (e.g. {stuck}); "
                            "the dependency graph has a cycle")
    as_arr = lambda a: np.asarray(a, dtype=np.int64)
    return as_arr(ready), as_arr(start), as_arr(finish), as_arr(worker)
