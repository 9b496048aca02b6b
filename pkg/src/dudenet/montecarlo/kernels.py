"""Compiled geometry kernels for the simulator.

Points are bucketed on a square grid covering the window; each UE finds its
nearest Mcell and its minimum-pathloss Scell by scanning grid rings.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(cache=True)
def splitmix64(x):
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


@nb.njit(cache=True)
def pair_uniform(key, j, i):
    """Deterministic U(0,1) attached to the (Scell j, receiver i) pair."""
    h = splitmix64(key ^ splitmix64((np.uint64(j) << np.uint64(32)) | np.uint64(i)))
    return float(h >> np.uint64(11)) * _INV53


@nb.njit(cache=True)
def pair_uniform_many(key, js, i):
    out = np.empty(js.shape[0])
    for n in range(js.shape[0]):
        out[n] = pair_uniform(key, js[n], i)
    return out


@nb.njit(cache=True)
def pair_uniform_receivers(key, j, receivers):
    out = np.empty(receivers.shape[0])
    for n in range(receivers.shape[0]):
        out[n] = pair_uniform(key, j, receivers[n])
    return out


def pair_uniforms(key: int, scells, receiver: int) -> np.ndarray:
    """Vector of pair uniforms for Scells ``scells`` seen from ``receiver``."""
    return pair_uniform_many(np.uint64(key), np.asarray(scells, dtype=np.int64), receiver)


class Grid:
    """CSR bucket grid over [-radius, radius]^2."""

    def __init__(self, points: np.ndarray, radius: float, cell: float):
        self.radius = float(radius)
        self.n = max(1, int(math.ceil(2.0 * radius / cell)))
        self.cell = 2.0 * radius / self.n
        self.xs = np.ascontiguousarray(points[:, 0])
        self.ys = np.ascontiguousarray(points[:, 1])
        self.start, self.order = _bucket(self.xs, self.ys, self.radius, self.cell, self.n)


@nb.njit(cache=True)
def _cell_of(v, radius, cell, n):
    c = int((v + radius) / cell)
    if c < 0:
        return 0
    if c >= n:
        return n - 1
    return c


@nb.njit(cache=True)
def _bucket(xs, ys, radius, cell, n):
    ids = np.empty(xs.shape[0], dtype=np.int64)
    counts = np.zeros(n * n + 1, dtype=np.int64)
    for p in range(xs.shape[0]):
        g = _cell_of(xs[p], radius, cell, n) * n + _cell_of(ys[p], radius, cell, n)
        ids[p] = g
        counts[g + 1] += 1
    start = np.cumsum(counts)
    fill = start[:-1].copy()
    order = np.empty(xs.shape[0], dtype=np.int64)
    for p in range(xs.shape[0]):
        order[fill[ids[p]]] = p
        fill[ids[p]] += 1
    return start, order


@nb.njit(cache=True)
def _nearest(x, y, xs, ys, start, order, radius, cell, n):
    """Index and squared distance of the nearest point (-1, inf if none)."""
    cx = _cell_of(x, radius, cell, n)
    cy = _cell_of(y, radius, cell, n)
    best = np.inf
    bi = -1
    k = 0
    while k <= n:
        for gx in range(cx - k, cx + k + 1):
            if gx < 0 or gx >= n:
                continue
            for gy in range(cy - k, cy + k + 1):
                if gy < 0 or gy >= n:
                    continue
                if max(abs(gx - cx), abs(gy - cy)) != k:
                    continue
                g = gx * n + gy
                for q in range(start[g], start[g + 1]):
                    p = order[q]
                    d2 = (xs[p] - x) ** 2 + (ys[p] - y) ** 2
                    if d2 < best:
                        best = d2
                        bi = p
        # Everything outside rings 0..k is at least k*cell away.
        if bi >= 0 and best <= (k * cell) ** 2:
            break
        k += 1
    return bi, best


@nb.njit(cache=True)
def nearest_many(ux, uy, xs, ys, start, order, radius, cell, n):
    m = ux.shape[0]
    idx = np.empty(m, dtype=np.int64)
    d2 = np.empty(m)
    for u in range(m):
        idx[u], d2[u] = _nearest(ux[u], uy[u], xs, ys, start, order, radius, cell, n)
    return idx, d2


@nb.njit(cache=True)
def best_scell_many(ux, uy, xs, ys, start, order, radius, cell, n,
                    key, omega, mu, alpha_l, alpha_n):
    """Minimum Scell pathloss per UE under the LOS-ball blockage marks.

    Within ``mu`` a link is LOS when its pair uniform is below ``omega``;
    any Scell within ``mu`` beats every Scell beyond it, so the ring search
    is only needed when the ball is empty.
    """
    m = ux.shape[0]
    idx = np.full(m, -1, dtype=np.int64)
    pl = np.full(m, np.inf)
    reach = int(math.ceil(mu / cell))
    mu2 = mu * mu
    for u in range(m):
        x = ux[u]
        y = uy[u]
        cx = _cell_of(x, radius, cell, n)
        cy = _cell_of(y, radius, cell, n)
        best = np.inf
        bi = -1
        for gx in range(max(cx - reach, 0), min(cx + reach + 1, n)):
            for gy in range(max(cy - reach, 0), min(cy + reach + 1, n)):
                g = gx * n + gy
                for q in range(start[g], start[g + 1]):
                    p = order[q]
                    d2 = (xs[p] - x) ** 2 + (ys[p] - y) ** 2
                    if d2 > mu2:
                        continue
                    if pair_uniform(key, p, u) < omega:
                        v = d2 ** (0.5 * alpha_l)
                    else:
                        v = d2 ** (0.5 * alpha_n)
                    if v < best:
                        best = v
                        bi = p
        if bi < 0 and xs.shape[0] > 0:
            bi, d2 = _nearest(x, y, xs, ys, start, order, radius, cell, n)
            best = d2 ** (0.5 * alpha_n)
        idx[u] = bi
        pl[u] = best
    return idx, pl


@nb.njit(cache=True)
def pick_one_per_cell(cells, n_cells, priority, skip):
    """For each cell the member with the highest priority (-1 if empty).

    ``cells[u]`` is UE u's serving cell or -1; UE ``skip`` is never picked.
    """
    best = np.full(n_cells, -1.0)
    sel = np.full(n_cells, -1, dtype=np.int64)
    for u in range(cells.shape[0]):
        c = cells[u]
        if c < 0 or u == skip:
            continue
        if priority[u] > best[c]:
            best[c] = priority[u]
            sel[c] = u
    return sel
