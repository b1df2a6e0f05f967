# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scheduling kernel. Semantics mirror ``_sched_py.schedule_dag`` exactly."""
import numpy as np
cimport numpy as cnp

from ..errors import DeadlockError

ctypedef long long i64

cnp.import_array()


cdef inline bint _less(i64* key, i64* ids, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    if key[a] != key[b]:
        return key[a] < key[b]
    return ids[a] < ids[b]


cdef inline void _swap(i64* key, i64* ids, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef i64 tk = key[a], ti = ids[a]
    key[a] = key[b]; ids[a] = ids[b]
    key[b] = tk; ids[b] = ti


cdef inline void _push(i64* key, i64* ids, Py_ssize_t* size, i64 k, i64 v) noexcept nogil:
    cdef Py_ssize_t i = size[0], parent
    key[i] = k; ids[i] = v
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(key, ids, i, parent):
            _swap(key, ids, i, parent)
            i = parent
        else:
            break


cdef inline void _pop(i64* key, i64* ids, Py_ssize_t* size) noexcept nogil:
    cdef Py_ssize_t n, i = 0, l, r, m
    size[0] -= 1
    n = size[0]
    if n == 0:
        return
    key[0] = key[n]; ids[0] = ids[n]
    while True:
        l = 2 * i + 1
        r = l + 1
        m = i
        if l < n and _less(key, ids, l, m):
            m = l
        if r < n and _less(key, ids, r, m):
            m = r
        if m == i:
            break
        _swap(key, ids, i, m)
        i = m


def schedule_dag(release, duration, uses_worker, dep_ptr, dep_idx, dep_delay, long n_workers):
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    rel_np = np.ascontiguousarray(release, dtype=np.int64)
    cdef i64[:] rel = rel_np
    cdef i64[:] dur = np.ascontiguousarray(duration, dtype=np.int64)
    cdef i64[:] uses = np.ascontiguousarray(uses_worker, dtype=np.int64)
    cdef i64[:] dptr = np.ascontiguousarray(dep_ptr, dtype=np.int64)
    cdef i64[:] didx = np.ascontiguousarray(dep_idx, dtype=np.int64)
    cdef i64[:] ddel = np.ascontiguousarray(dep_delay, dtype=np.int64)
    cdef Py_ssize_t n = rel.shape[0]
    cdef Py_ssize_t m = didx.shape[0]
    cdef Py_ssize_t j, e, k, s, p

    # successor CSR with edge delays, preserving input edge order per source
    s_cnt = np.zeros(n + 1, dtype=np.int64)
    cdef i64[:] sptr = s_cnt
    for j in range(n):
        for e in range(dptr[j], dptr[j + 1]):
            sptr[didx[e] + 1] += 1
    for j in range(n):
        sptr[j + 1] += sptr[j]
    fill_arr = np.array(s_cnt[:n], dtype=np.int64)
    cdef i64[:] fill = fill_arr
    succ_arr = np.empty(m, dtype=np.int64)
    sdel_arr = np.empty(m, dtype=np.int64)
    cdef i64[:] succ = succ_arr
    cdef i64[:] sdel = sdel_arr
    indeg_arr = np.empty(n, dtype=np.int64)
    cdef i64[:] indeg = indeg_arr
    for j in range(n):
        indeg[j] = dptr[j + 1] - dptr[j]
        for e in range(dptr[j], dptr[j + 1]):
            p = didx[e]
            succ[fill[p]] = j
            sdel[fill[p]] = ddel[e]
            fill[p] += 1

    ready_arr = rel_np.copy()
    start_arr = np.full(n, -1, dtype=np.int64)
    finish_arr = np.full(n, -1, dtype=np.int64)
    worker_arr = np.full(n, -1, dtype=np.int64)
    cdef i64[:] ready = ready_arr
    cdef i64[:] start = start_arr
    cdef i64[:] finish = finish_arr
    cdef i64[:] worker = worker_arr

    cdef i64[:] pk = np.empty(n + 1, dtype=np.int64)
    cdef i64[:] pv = np.empty(n + 1, dtype=np.int64)
    cdef i64[:] rk = np.empty(n + 1, dtype=np.int64)
    cdef i64[:] rv = np.empty(n + 1, dtype=np.int64)
    cdef i64[:] fk = np.empty(n_workers + 1, dtype=np.int64)
    cdef i64[:] fv = np.empty(n_workers + 1, dtype=np.int64)
    cdef i64[:] stack = np.empty(n + 1, dtype=np.int64)
    cdef i64* PK = &pk[0]
    cdef i64* PV = &pv[0]
    cdef i64* RK = &rk[0]
    cdef i64* RV = &rv[0]
    cdef i64* FK = &fk[0]
    cdef i64* FV = &fv[0]
    cdef Py_ssize_t np_ = 0, nr = 0, nf = 0, ns = 0
    cdef i64 done = 0, t = 0, nxt, w, f
    cdef bint have

    for k in range(n_workers):
        _push(FK, FV, &nf, k, k)

    # snapshot the sources first: resolving milestones below lowers indegrees
    cdef i64[:] initial = np.flatnonzero(indeg_arr == 0).astype(np.int64)
    for p in range(initial.shape[0]):
        stack[ns] = initial[p]; ns += 1
        while ns > 0:
            ns -= 1
            k = stack[ns]
            if uses[k]:
                _push(PK, PV, &np_, ready[k], k)
                continue
            start[k] = ready[k]; finish[k] = ready[k]
            done += 1
            for e in range(sptr[k], sptr[k + 1]):
                s = succ[e]
                if finish[k] + sdel[e] > ready[s]:
                    ready[s] = finish[k] + sdel[e]
                indeg[s] -= 1
                if indeg[s] == 0:
                    stack[ns] = s; ns += 1

    with nogil:
        while np_ > 0 or nr > 0:
            while nf > 0 and np_ > 0 and pk[0] <= t:
                j = pv[0]
                _pop(PK, PV, &np_)
                w = fv[0]
                _pop(FK, FV, &nf)
                start[j] = t
                finish[j] = t + dur[j]
                worker[j] = w
                _push(RK, RV, &nr, finish[j], j)
            have = False
            if nr > 0:
                nxt = rk[0]; have = True
            if nf > 0 and np_ > 0:
                if not have or pk[0] < nxt:
                    nxt = pk[0]; have = True
            if not have:
                break
            if nxt > t:
                t = nxt
            while nr > 0 and rk[0] <= t:
                j = rv[0]
                _pop(RK, RV, &nr)
                _push(FK, FV, &nf, worker[j], worker[j])
                done += 1
                for e in range(sptr[j], sptr[j + 1]):
                    s = succ[e]
                    if finish[j] + sdel[e] > ready[s]:
                        ready[s] = finish[j] + sdel[e]
                    indeg[s] -= 1
                    if indeg[s] == 0:
                        stack[ns] = s; ns += 1
                while ns > 0:
                    ns -= 1
                    k = stack[ns]
                    if uses[k]:
                        _push(PK, PV, &np_, ready[k], k)
                        continue
                    start[k] = ready[k]; finish[k] = ready[k]
                    done += 1
                    for e in range(sptr[k], sptr[k + 1]):
                        s = succ[e]
                        if finish[k] + sdel[e] > ready[s]:
                            ready[s] = finish[k] + sdel[e]
                        indeg[s] -= 1
                        if indeg[s] == 0:
                            stack[ns] = s; ns += 1

    if done != n:
        stuck = [j for j in range(n) if finish_arr[j] < 0][:10]
        raise DeadlockError(f"{n - done} jobs can never become ready (e.g. {stuck}); "
                            "the dependency graph has a cycle")
    return ready_arr, start_arr, finish_arr, worker_arr
