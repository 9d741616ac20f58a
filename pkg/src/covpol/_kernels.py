"""Compiled inner loops for the adoption step.

Random draws never happen in here. Callers pass one activation permutation
and one uniform per activation slot, drawn from each particle's own stream,
so a compiled step and a pure-Python step consume identical randomness.
"""

import math

from numba import njit


@njit(cache=True, nogil=True)
def peer_mean(i, status, n_locked, order, dist, p):
    """Mean distance from ``i`` to its ``min(p, n_locked)`` nearest locked countries."""
    need = min(p, n_locked)
    acc = 0.0
    cnt = 0
    row = order[i]
    for k in range(row.shape[0]):
        j = row[k]
        if status[j]:
            acc += dist[i, j]
            cnt += 1
            if cnt == need:
                break
    return acc / need


@njit(cache=True, nogil=True)
def social_ok(i, status, n_locked, order, dist, s_i, p):
    if n_locked == 0:
        return False
    return peer_mean(i, status, n_locked, order, dist, p) < s_i


@njit(cache=True, nogil=True)
def adoption_probability(b_i, fraction_locked, steepness):
    x = b_i + math.exp(steepness * (fraction_locked - 1.0))
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


@njit(cache=True, nogil=True)
def step_inplace(status, perm, u, order, dist, s, b, p, steepness, synchronous):
    n = status.shape[0]
    n_locked = 0
    for i in range(n):
        if status[i]:
            n_locked += 1
    view = status.copy() if synchronous else status
    view_locked = n_locked
    for k in range(n):
        i = perm[k]
        if status[i]:
            continue
        if not synchronous:
            view_locked = n_locked
        adopt = social_ok(i, view, view_locked, order, dist, s[i], p)
        if not adopt:
            adopt = u[k] < adoption_probability(b[i], view_locked / n, steepness)
        if adopt:
            status[i] = True
            n_locked += 1


@njit(cache=True, nogil=True)
def step_batch(status, perms, u, order, dist, s, b, p, steepness, synchronous):
    for q in range(status.shape[0]):
        step_inplace(status[q], perms[q], u[q], order, dist, s, b, p, steepness, synchronous)
