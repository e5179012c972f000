"""Pure-Python event kernels; reference behaviour for the compiled ones.

Every kernel consumes pre-drawn arrays ``expo`` (standard exponentials) and
``unif`` (uniforms on [0, 1)) from index ``start`` on and returns the index
of the first event it did not process.  Returning early (< len(expo)) means
a buffer is full; the caller grows it and resumes from that index.
"""
from __future__ import annotations

import math


def aggregate_run(m, rho, expo, unif, start, state, occ, accumulate):
    """(N1, N2) chain.  ``state = [k, r]``; ``occ[k, r]`` collects holding times."""
    k = int(state[0])
    r = int(state[1])
    rcap = occ.shape[1]
    n = expo.shape[0]
    i = start
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
            victim = int(math.floor((x - rho) * N))
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


def detailed_run(m, rho, expo, unif, start, used, occ_list, pos, state, wocc, occ, accumulate):
    """Occupied-set simulator.

    ``used[s]`` marks space ``s`` (1-based; ``used[0]`` is unused) as taken.
    ``occ_list[:n]`` lists the taken spaces, ``pos[s]`` is the slot of ``s``
    in it.  ``state = [n, max_s, lo, nprim]`` where ``lo`` never exceeds the
    lowest free space and ``nprim`` counts taken spaces ``<= m``.  ``wocc[W]``
    and ``occ[k, r]`` (with k = nprim) collect holding times.
    """
    n_c = int(state[0])
    max_s = int(state[1])
    lo = int(state[2])
    nprim = int(state[3])
    cap = used.shape[0]
    wcap = wocc.shape[0]
    rcap = occ.shape[1]
    n = expo.shape[0]
    i = start
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
            j = int(math.floor((x - rho) * n_c))
            if j >= n_c:
                j = n_c - 1
            s = int(occ_list[j])
            last = int(occ_list[n_c - 1])
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
