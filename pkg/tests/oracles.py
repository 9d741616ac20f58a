"""Independent slow re-implementations used as test oracles.

Nothing here imports the compiled kernels or reuses package helpers for the
quantity under test.
"""

import math

import numpy as np

R_EARTH = 6371.0


def great_circle_km(lat1, lon1, lat2, lon2):
    # vector form; independent of the haversine used in the package
    def unit(lat, lon):
        la, lo = math.radians(lat), math.radians(lon)
        return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))

    a, b = unit(lat1, lon1), unit(lat2, lon2)
    dot = sum(x * y for x, y in zip(a, b))
    cross = (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
    return R_EARTH * math.atan2(math.sqrt(sum(c * c for c in cross)), dot)


def distance(ci, cj, countries):
    incomes = [c.income for c in countries]
    dems = [c.democracy for c in countries]
    hmax = max(
        great_circle_km(a.capital_lat, a.capital_lon, b.capital_lat, b.capital_lon)
        for a in countries
        for b in countries
    )
    geo = great_circle_km(ci.capital_lat, ci.capital_lon, cj.capital_lat, cj.capital_lon)
    return (
        abs(ci.income - cj.income) / (max(incomes) - min(incomes))
        + abs(ci.democracy - cj.democracy) / (max(dems) - min(dems))
        + geo / hmax
    ) / 3


def social(i, status, dist, s_i, p):
    locked = [j for j in range(len(status)) if status[j] and j != i]
    if not locked:
        return False
    nearest = sorted((dist[i][j], j) for j in locked)[: min(p, len(locked))]
    return sum(d for d, _ in nearest) / len(nearest) < s_i


def step(status, perm, u, dist, s, b, p, steepness, synchronous=False):
    """One day of the adoption rule on plain Python lists."""
    status = [bool(x) for x in status]
    n = len(status)
    frozen = list(status)
    for k, i in enumerate(perm):
        if status[i]:
            continue
        view = frozen if synchronous else status
        f = sum(view) / n
        ok = social(i, view, dist, s[i], p)
        if not ok:
            prob = min(1.0, max(0.0, b[i] + math.exp(steepness * (f - 1))))
            ok = u[k] < prob
        if ok:
            status[i] = True
    return status


def hamming_accuracy(a, b):
    return 1 - sum(x != y for x, y in zip(a, b)) / len(a)


def trapezoid(y):
    return sum((y[k] + y[k + 1]) / 2 for k in range(len(y) - 1))


def copy_counts(indices, n):
    return np.bincount(np.asarray(indices), minlength=n)
