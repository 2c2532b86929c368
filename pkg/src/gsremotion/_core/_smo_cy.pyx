# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SMO working-set solver.

Same algorithm as _smo_py, written as C loops. The float operations use the
same association as the numpy backend and the module is compiled with
-ffp-contract=off, so alpha/G trajectories match the fallback bit for bit.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double TAU = 1e-12


def smo_solve(object Q_in, object y_in, double C, double tol, long max_iter,
              object tiebreak_in):
    """Drop-in replacement for _smo_py.smo_solve (same contract)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] Q = \
        np.ascontiguousarray(Q_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] y = \
        np.ascontiguousarray(y_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] tb = \
        np.ascontiguousarray(tiebreak_in, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] alpha = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] G = np.full(n, -1.0)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] trace = \
        np.empty(max_iter + 1, dtype=np.float64)

    cdef Py_ssize_t i, j, t, it
    cdef long iterations = 0
    cdef bint converged = False
    cdef bint has_up, has_low, in_up, in_low
    cdef double v, best_i_v, best_i_tb, best_j_v, best_j_tb
    cdef double quad, delta, diff, total, old_i, old_j, dai, daj
    cdef double sum_a, dot_ag

    trace[0] = 0.0

    for it in range(max_iter):
        has_up = False
        has_low = False
        best_i_v = 0.0
        best_i_tb = 0.0
        best_j_v = 0.0
        best_j_tb = 0.0
        i = -1
        j = -1
        for t in range(n):
            v = -y[t] * G[t]
            in_up = (y[t] > 0.0 and alpha[t] < C) or (y[t] < 0.0 and alpha[t] > 0.0)
            in_low = (y[t] < 0.0 and alpha[t] < C) or (y[t] > 0.0 and alpha[t] > 0.0)
            if in_up:
                if (not has_up) or v > best_i_v or (v == best_i_v and tb[t] > best_i_tb):
                    has_up = True
                    best_i_v = v
                    best_i_tb = tb[t]
                    i = t
            if in_low:
                if (not has_low) or v < best_j_v or (v == best_j_v and tb[t] > best_j_tb):
                    has_low = True
                    best_j_v = v
                    best_j_tb = tb[t]
                    j = t
        if not has_up or not has_low:
            converged = True
            break
        if best_i_v - best_j_v <= tol:
            converged = True
            break

        old_i = alpha[i]
        old_j = alpha[j]
        if y[i] != y[j]:
            quad = Q[i, i] + Q[j, j] + 2.0 * Q[i, j]
            if quad <= 0.0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0.0:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0.0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
            if quad <= 0.0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = total

        dai = alpha[i] - old_i
        daj = alpha[j] - old_j
        for t in range(n):
            G[t] = G[t] + (dai * Q[i, t] + daj * Q[j, t])
        iterations += 1
        sum_a = 0.0
        dot_ag = 0.0
        for t in range(n):
            sum_a += alpha[t]
            dot_ag += alpha[t] * G[t]
        trace[iterations] = 0.5 * (sum_a - dot_ag)

    return alpha, G, iterations, converged, trace[:iterations + 1].copy()
