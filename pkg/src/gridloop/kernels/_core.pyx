# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid kernels.

Mirrors kernels._pure operation-for-operation (same IEEE double ops in the
same order) so both backends return bit-identical arrays. Any semantic
change must be made in both files.
"""

from libc.math cimport cos, sin, floor, sqrt, INFINITY

import numpy as np

BACKEND = "compiled"

cdef double PI = 3.141592653589793
cdef double DEG2RAD = PI / 180.0
cdef double SQRT2 = sqrt(2.0)

cdef int NBR_DR[8]
cdef int NBR_DC[8]
cdef int NBR_DIAG[8]
NBR_DR[0] = -1; NBR_DC[0] = -1; NBR_DIAG[0] = 1
NBR_DR[1] = -1; NBR_DC[1] = 0; NBR_DIAG[1] = 0
NBR_DR[2] = -1; NBR_DC[2] = 1; NBR_DIAG[2] = 1
NBR_DR[3] = 0; NBR_DC[3] = -1; NBR_DIAG[3] = 0
NBR_DR[4] = 0; NBR_DC[4] = 1; NBR_DIAG[4] = 0
NBR_DR[5] = 1; NBR_DC[5] = -1; NBR_DIAG[5] = 1
NBR_DR[6] = 1; NBR_DC[6] = 0; NBR_DIAG[6] = 0
NBR_DR[7] = 1; NBR_DC[7] = 1; NBR_DIAG[7] = 1


cdef inline int _trace_ray(
    const unsigned char[:, ::1] solid,
    double x,
    double y,
    double angle_deg,
    double cell_size,
    double inv_cell,
    double max_range,
    double* t_out,
    int* cy_out,
    int* cx_out,
) nogil:
    cdef int h = solid.shape[0]
    cdef int w = solid.shape[1]
    cdef double rad = angle_deg * DEG2RAD
    cdef double dx = cos(rad)
    cdef double dy = sin(rad)
    cdef int cx = <int>floor(x * inv_cell)
    cdef int cy = <int>floor(y * inv_cell)
    cdef int step_x, step_y
    cdef double tx, ty, dtx, dty, t

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
        tx = INFINITY
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
        ty = INFINITY
        dty = 0.0

    t = 0.0
    while True:
        if solid[cy, cx]:
            if t > max_range:
                t_out[0] = max_range
                return 0
            t_out[0] = t
            cy_out[0] = cy
            cx_out[0] = cx
            return 1
        if tx <= ty:
            t = tx
            cx += step_x
            tx += dtx
        else:
            t = ty
            cy += step_y
            ty += dty
        if cx < 0 or cx >= w or cy < 0 or cy >= h:
            t_out[0] = t
            return 0
        if t > max_range:
            t_out[0] = max_range
            return 0


def cast_rays(solid, class_id, instance_id, cell_size, x, y, angles_deg, max_range):
    """See kernels._pure.cast_rays."""
    cdef const unsigned char[:, ::1] solid_v = solid
    cdef const int[:, ::1] class_v = class_id
    cdef const int[:, ::1] inst_v = instance_id
    cdef const double[::1] ang_v = angles_deg
    cdef double cs = cell_size
    cdef double inv_cell = 1.0 / cs
    cdef double px = x
    cdef double py = y
    cdef double mr = max_range
    cdef int n = ang_v.shape[0]

    depth_arr = np.empty(n, dtype=np.float64)
    cls_arr = np.zeros(n, dtype=np.int32)
    inst_arr = np.zeros(n, dtype=np.int32)
    cdef double[::1] depth = depth_arr
    cdef int[::1] cls = cls_arr
    cdef int[::1] inst = inst_arr

    cdef int i, hit, cy, cx
    cdef double t
    with nogil:
        for i in range(n):
            hit = _trace_ray(solid_v, px, py, ang_v[i], cs, inv_cell, mr, &t, &cy, &cx)
            if hit:
                depth[i] = t
                cls[i] = class_v[cy, cx]
                inst[i] = inst_v[cy, cx]
            else:
                depth[i] = mr
    return depth_arr, cls_arr, inst_arr


def clear_distance(solid, cell_size, x, y, angle_deg):
    """See kernels._pure.clear_distance."""
    cdef const unsigned char[:, ::1] solid_v = solid
    cdef double cs = cell_size
    cdef double inv_cell = 1.0 / cs
    cdef double t
    cdef int cy, cx
    _trace_ray(solid_v, x, y, angle_deg, cs, inv_cell, INFINITY, &t, &cy, &cx)
    return t


def dijkstra_grid(free, src_r, src_c):
    """See kernels._pure.dijkstra_grid."""
    cdef const unsigned char[:, ::1] free_v = free
    cdef int h = free_v.shape[0]
    cdef int w = free_v.shape[1]
    cdef int n_cells = h * w

    dist_arr = np.full((h, w), np.inf, dtype=np.float64)
    pred_arr = np.full((h, w), -1, dtype=np.int8)
    cdef double[:, ::1] dist = dist_arr
    cdef signed char[:, ::1] pred = pred_arr
    steps_a_arr = np.zeros((h, w), dtype=np.int32)
    steps_b_arr = np.zeros((h, w), dtype=np.int32)
    done_arr = np.zeros((h, w), dtype=np.uint8)
    cdef int[:, ::1] steps_a = steps_a_arr
    cdef int[:, ::1] steps_b = steps_b_arr
    cdef unsigned char[:, ::1] done = done_arr

    cdef int sr = src_r
    cdef int sc = src_c
    if not free_v[sr, sc]:
        return dist_arr, pred_arr

    # Binary min-heap over (v, lin) with lexicographic order; lazy deletion.
    cdef double[::1] heap_v = np.empty(n_cells * 8 + 8, dtype=np.float64)
    cdef long[::1] heap_lin = np.empty(n_cells * 8 + 8, dtype=np.int64)
    cdef int heap_n = 0

    cdef int r, c, k, nr, nc, lin
    cdef int ca, cb, na, nb
    cdef double nv
    cdef int i, parent, child, smallest
    cdef double tv
    cdef long tl

    dist[sr, sc] = 0.0
    heap_v[0] = 0.0
    heap_lin[0] = sr * w + sc
    heap_n = 1

    while heap_n > 0:
        # pop min
        tv = heap_v[0]
        tl = heap_lin[0]
        heap_n -= 1
        heap_v[0] = heap_v[heap_n]
        heap_lin[0] = heap_lin[heap_n]
        i = 0
        while True:
            child = 2 * i + 1
            if child >= heap_n:
                break
            smallest = child
            if child + 1 < heap_n and (
                heap_v[child + 1] < heap_v[child]
                or (heap_v[child + 1] == heap_v[child] and heap_lin[child + 1] < heap_lin[child])
            ):
                smallest = child + 1
            if heap_v[smallest] < heap_v[i] or (
                heap_v[smallest] == heap_v[i] and heap_lin[smallest] < heap_lin[i]
            ):
                heap_v[i], heap_v[smallest] = heap_v[smallest], heap_v[i]
                heap_lin[i], heap_lin[smallest] = heap_lin[smallest], heap_lin[i]
                i = smallest
            else:
                break

        lin = <int>tl
        r = lin // w
        c = lin - r * w
        if done[r, c]:
            continue
        done[r, c] = 1
        ca = steps_a[r, c]
        cb = steps_b[r, c]
        for k in range(8):
            nr = r + NBR_DR[k]
            nc = c + NBR_DC[k]
            if nr < 0 or nr >= h or nc < 0 or nc >= w:
                continue
            if not free_v[nr, nc] or done[nr, nc]:
                continue
            if NBR_DIAG[k] and not (free_v[r + NBR_DR[k], c] and free_v[r, c + NBR_DC[k]]):
                continue
            if NBR_DIAG[k]:
                na = ca
                nb = cb + 1
            else:
                na = ca + 1
                nb = cb
            nv = na + nb * SQRT2
            if nv < dist[nr, nc]:
                dist[nr, nc] = nv
                steps_a[nr, nc] = na
                steps_b[nr, nc] = nb
                pred[nr, nc] = k
                # push (nv, nr*w+nc)
                i = heap_n
                heap_v[i] = nv
                heap_lin[i] = nr * w + nc
                heap_n += 1
                while i > 0:
                    parent = (i - 1) // 2
                    if heap_v[i] < heap_v[parent] or (
                        heap_v[i] == heap_v[parent] and heap_lin[i] < heap_lin[parent]
                    ):
                        heap_v[i], heap_v[parent] = heap_v[parent], heap_v[i]
                        heap_lin[i], heap_lin[parent] = heap_lin[parent], heap_lin[i]
                        i = parent
                    else:
                        break
    return dist_arr, pred_arr
