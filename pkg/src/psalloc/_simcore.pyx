# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event kernels; same contract and arithmetic as ``_simcore_py``."""
from libc.math cimport floor

import numpy as np
cimport numpy as cnp

cnp.import_array()


def aggregate_run(int m, double rho, const double[::1] expo, const double[::1] unif,
                  Py_ssize_t start, cnp.int64_t[::1] state, double[:, ::1] occ,
                  bint accumulate):
    cdef Py_ssize_t k = state[0], r = state[1]
    cdef Py_ssize_t rcap = occ.shape[1], n = expo.shape[0], i = start
    cdef Py_ssize_t N, victim
    cdef double total, x
    cdef bint arrival
    with nogil:
        while i < n:
            N = k + r
            total = rho + (1.0 if N > 0 else 0.0)
            x = unif[i] * total
            arrival = x < rho
            if arrival and k == m and r + 1 >= rcap:
                break
            if accumulate:
                occ[k, r] += expo[i] / total
            if arrival:
                if k < m:
                    k += 1
                else:
                    r += 1
            else:
                victim = <Py_ssize_t>floor((x - rho) * N)
                if victim >= N:
                    victim = N - 1
                if victim < k:
                    k -= 1
                else:
                    r -= 1
            i += 1
    state[0] = k
    state[1] = r
    return i


def detailed_run(int m, double rho, const double[::1] expo, const double[::1] unif,
                 Py_ssize_t start, cnp.uint8_t[::1] used, cnp.int64_t[::1] occ_list,
                 cnp.int64_t[::1] pos, cnp.int64_t[::1] state, double[::1] wocc,
                 double[:, ::1] occ, bint accumulate):
    cdef Py_ssize_t n_c = state[0], max_s = state[1], lo = state[2], nprim = state[3]
    cdef Py_ssize_t cap = used.shape[0], wcap = wocc.shape[0], rcap = occ.shape[1]
    cdef Py_ssize_t n = expo.shape[0], i = start
    cdef Py_ssize_t s = 0, w, j, last
    cdef double total, x, dt
    cdef bint arrival
    with nogil:
        while i < n:
            total = rho + (1.0 if n_c > 0 else 0.0)
            x = unif[i] * total
            arrival = x < rho
            w = max_s - n_c
            if accumulate and (w >= wcap or n_c - nprim >= rcap):
                break
            if arrival:
                s = lo
                while used[s]:
                    s += 1
                if s + 1 >= cap:
                    break
            if accumulate:
                dt = expo[i] / total
                wocc[w] += dt
                occ[nprim, n_c - nprim] += dt
            if arrival:
                used[s] = 1
                occ_list[n_c] = s
                pos[s] = n_c
                n_c += 1
                lo = s + 1
                if s > max_s:
                    max_s = s
                if s <= m:
                    nprim += 1
            else:
                j = <Py_ssize_t>floor((x - rho) * n_c)
                if j >= n_c:
                    j = n_c - 1
                s = occ_list[j]
                last = occ_list[n_c - 1]
                occ_list[j] = last
                pos[last] = j
                n_c -= 1
                used[s] = 0
                if s < lo:
                    lo = s
                if s <= m:
                    nprim -= 1
                if s == max_s:
                    while max_s > 0 and not used[max_s]:
                        max_s -= 1
            i += 1
    state[0] = n_c
    state[1] = max_s
    state[2] = lo
    state[3] = nprim
    return i
