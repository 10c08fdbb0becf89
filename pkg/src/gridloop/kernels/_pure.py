"""Pure-Python grid kernels: DDA raycasting and exact grid Dijkstra.

This is the fallback backend and the reference semantics. The compiled
backend (_core.pyx) mirrors every floating-point operation in the same
order so that both produce bit-identical results; keep the two in sync.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

BACKEND = "pure"

DEG2RAD = math.pi / 180.0
SQRT2 = math.sqrt(2.0)

# Fixed 8-neighbourhood order; determinism of Dijkstra depends on it.
_NEIGHBORS = (
    (-1, -1, 1),
    (-1, 0, 0),
    (-1, 1, 1),
    (0, -1, 0),
    (0, 1, 0),
    (1, -1, 1),
    (1, 0, 0),
    (1, 1, 1),
)


def _trace_ray(solid, x, y, angle_deg, cell_size, inv_cell, max_range):
    """DDA grid traversal.

    Returns (hit, t, cy, cx): hit is True when a solid cell was entered at
    distance t <= max_range; otherwise t is the distance at which the ray
    left the grid or exceeded max_range (whichever came first).
    """
    h, w = solid.shape
    rad = angle_deg * DEG2RAD
    dx = math.cos(rad)
    dy = math.sin(rad)
    cx = int(math.floor(x * inv_cell))
    cy = int(math.floor(y * inv_cell))

    if dx > 0.0:
        step_x = 1
        tx = ((cx + 1) * cell_size - x) / dx
        dtx = cell_size / dx
    elif dx < 0.0:
        step_x = -1
        tx = (cx * cell_size - x) / dx
        dtx = -cell_size / dx
    else:
        step_x = 0
        tx = math.inf
        dtx = 0.0
    if dy > 0.0:
        step_y = 1
        ty = ((cy + 1) * cell_size - y) / dy
        dty = cell_size / dy
    elif dy < 0.0:
        step_y = -1
        ty = (cy * cell_size - y) / dy
        dty = -cell_size / dy
    else:
        step_y = 0
        ty = math.inf
        dty = 0.0

    t = 0.0
    while True:
        if solid[cy, cx]:
            if t > max_range:
                return False, max_range, -1, -1
            return True, t, cy, cx
        if tx <= ty:
            t = tx
            cx += step_x
            tx += dtx
        else:
            t = ty
            cy += step_y
            ty += dty
        if cx < 0 or cx >= w or cy < 0 or cy >= h:
            return False, t, -1, -1
        if t > max_range:
            return False, max_range, -1, -1


def cast_rays(solid, class_id, instance_id, cell_size, x, y, angles_deg, max_range):
    """Cast one ray per angle from (x, y); angles in degrees, world frame.

    Returns (depth, cls, inst) arrays. No-hit columns (ray exits the grid or
    passes max_range) carry the max_range sentinel with cls = inst = 0.
    """
    inv_cell = 1.0 / cell_size
    n = len(angles_deg)
    depth = np.empty(n, dtype=np.float64)
    cls = np.zeros(n, dtype=np.int32)
    inst = np.zeros(n, dtype=np.int32)
    for i in range(n):
        hit, t, cy, cx = _trace_ray(
            solid, x, y, angles_deg[i], cell_size, inv_cell, max_range
        )
        if hit:
            depth[i] = t
            cls[i] = class_id[cy, cx]
            inst[i] = instance_id[cy, cx]
        else:
            depth[i] = max_range
    return depth, cls, inst


def clear_distance(solid, cell_size, x, y, angle_deg):
    """Distance from (x, y) along angle to the first solid cell or grid exit."""
    inv_cell = 1.0 / cell_size
    hit, t, _, _ = _trace_ray(solid, x, y, angle_deg, cell_size, inv_cell, math.inf)
    return t


def dijkstra_grid(free, src_r, src_c):
    """Single-source shortest paths on the free-cell grid, 8-connected.

    Axis steps cost 1, diagonal steps sqrt(2) (cell units). A diagonal step
    requires both adjacent axis cells to be free (no corner cutting).
    Distances are derived from exact integer step-pair counts, so the result
    is the unique optimum independent of traversal order.

    Returns (dist, pred): dist float64 in cell units with +inf for
    unreachable cells; pred int8 neighbour-table index of the step taken
    into each cell (-1 at the source and unreached cells).
    """
    h, w = free.shape
    dist = np.full((h, w), np.inf, dtype=np.float64)
    steps_a = np.zeros((h, w), dtype=np.int32)
    steps_b = np.zeros((h, w), dtype=np.int32)
    pred = np.full((h, w), -1, dtype=np.int8)
    done = np.zeros((h, w), dtype=np.uint8)

    if not free[src_r, src_c]:
        return dist, pred

    dist[src_r, src_c] = 0.0
    heap = [(0.0, src_r * w + src_c)]
    while heap:
        _, lin = heapq.heappop(heap)
        r = lin // w
        c = lin - r * w
        if done[r, c]:
            continue
        done[r, c] = 1
        ca = steps_a[r, c]
        cb = steps_b[r, c]
        for k in range(8):
            dr, dc, diag = _NEIGHBORS[k]
            nr = r + dr
            nc = c + dc
            if nr < 0 or nr >= h or nc < 0 or nc >= w:
                continue
            if not free[nr, nc] or done[nr, nc]:
                continue
            if diag and not (free[r + dr, c] and free[r, c + dc]):
                continue
            na = ca + (0 if diag else 1)
            nb = cb + (1 if diag else 0)
            nv = na + nb * SQRT2
            if nv < dist[nr, nc]:
                dist[nr, nc] = nv
                steps_a[nr, nc] = na
                steps_b[nr, nc] = nb
                pred[nr, nc] = k
                heapq.heappush(heap, (nv, nr * w + nc))
    return dist, pred
