# cython: language_level=3
"""Compiled ray-tracing kernels.

Same contract as ``canyonsim._pykernels``: single-bounce specular reflections
off bounded one-sided planes, with both reflection legs and the direct path
tested against axis-aligned building boxes.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

cdef double BOUNDS_TOL = 1e-9


cdef inline bint _hits_box(const double* o, const double* d,
                           const double* lo, const double* hi, double eps) noexcept nogil:
    cdef double t0 = eps
    cdef double t1 = 1.0 - eps
    cdef double ta, tb, tmp
    cdef int i
    for i in range(3):
        if d[i] == 0.0:
            if not (o[i] > lo[i] and o[i] < hi[i]):
                return False
        else:
            ta = (lo[i] - o[i]) / d[i]
            tb = (hi[i] - o[i]) / d[i]
            if ta > tb:
                tmp = ta
                ta = tb
                tb = tmp
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 >= t1:
                return False
    return t0 < t1


cdef inline bint _occluded(const double* o, const double* e,
                           const double[:, ::1] box_lo, const double[:, ::1] box_hi,
                           Py_ssize_t ignore, double eps) noexcept nogil:
    cdef double d[3]
    cdef Py_ssize_t b, nb = box_lo.shape[0]
    d[0] = e[0] - o[0]
    d[1] = e[1] - o[1]
    d[2] = e[2] - o[2]
    for b in range(nb):
        if b == ignore:
            continue
        if _hits_box(o, d, &box_lo[b, 0], &box_hi[b, 0], eps):
            return True
    return False


cdef inline double _path_delay(const double* s, const double* a, const double* r) noexcept nogil:
    cdef double rs2 = 0.0, as2 = 0.0, ar2 = 0.0, dot = 0.0, denom, diff, val
    cdef int j
    for j in range(3):
        rs2 += (r[j] - s[j]) * (r[j] - s[j])
        as2 += (a[j] - s[j]) * (a[j] - s[j])
        ar2 += (a[j] - r[j]) * (a[j] - r[j])
        dot += (r[j] - a[j]) * (r[j] + a[j] - 2.0 * s[j])
    denom = sqrt(rs2) + sqrt(as2)
    diff = dot / denom if denom > 0.0 else 0.0
    val = diff + sqrt(ar2)
    return val if val > 0.0 else 0.0


def segments_occluded(starts, ends, box_lo, box_hi, ignore, double eps):
    cdef const double[:, ::1] s_v = np.ascontiguousarray(starts, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] e_v = np.ascontiguousarray(ends, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] lo_v = np.ascontiguousarray(box_lo, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] hi_v = np.ascontiguousarray(box_hi, dtype=np.float64).reshape(-1, 3)
    cdef const long long[::1] ig_v = np.ascontiguousarray(ignore, dtype=np.int64).reshape(-1)
    cdef Py_ssize_t m, n = s_v.shape[0]
    out = np.zeros(n, dtype=bool)
    cdef cnp.uint8_t[::1] out_v = out.view(np.uint8)
    with nogil:
        for m in range(n):
            out_v[m] = _occluded(&s_v[m, 0], &e_v[m, 0], lo_v, hi_v, <Py_ssize_t>ig_v[m], eps)
    return out


def trace_epoch_batch(antenna, sats, point, normal, axis_u, axis_v, extent, owner,
                      box_lo, box_hi, double eps):
    cdef const double[::1] a_v = np.ascontiguousarray(antenna, dtype=np.float64).reshape(3)
    cdef const double[:, ::1] s_v = np.ascontiguousarray(sats, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] p_v = np.ascontiguousarray(point, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] n_v = np.ascontiguousarray(normal, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] u_v = np.ascontiguousarray(axis_u, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] v_v = np.ascontiguousarray(axis_v, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] x_v = np.ascontiguousarray(extent, dtype=np.float64).reshape(-1, 4)
    cdef const long long[::1] o_v = np.ascontiguousarray(owner, dtype=np.int64).reshape(-1)
    cdef const double[:, ::1] lo_v = np.ascontiguousarray(box_lo, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] hi_v = np.ascontiguousarray(box_hi, dtype=np.float64).reshape(-1, 3)

    cdef Py_ssize_t nk = s_v.shape[0], nplanes = p_v.shape[0]
    cdef Py_ssize_t k, i, j, count = 0, cap = 64
    cdef double sd_a, sd_s, mu, cu, cv
    cdef double am[3]
    cdef double r[3]
    cdef double q[3]
    cdef const double* a = &a_v[0]
    cdef const double* s
    cdef long long[::1] os_v, op_v
    cdef double[:, ::1] or_v
    cdef double[::1] od_v

    los = np.ones(nk, dtype=bool)
    cdef cnp.uint8_t[::1] los_v = los.view(np.uint8)

    # front-facing test for the antenna does not depend on the satellite
    sd_a_arr = np.empty(nplanes, dtype=np.float64)
    cdef double[::1] sda_v = sd_a_arr
    for i in range(nplanes):
        sda_v[i] = ((a[0] - p_v[i, 0]) * n_v[i, 0] + (a[1] - p_v[i, 1]) * n_v[i, 1]
                    + (a[2] - p_v[i, 2]) * n_v[i, 2])

    cdef long long* ev_sat = <long long*> malloc(cap * sizeof(long long))
    cdef long long* ev_plane = <long long*> malloc(cap * sizeof(long long))
    cdef double* ev_r = <double*> malloc(cap * 3 * sizeof(double))
    cdef double* ev_d = <double*> malloc(cap * sizeof(double))
    if not ev_sat or not ev_plane or not ev_r or not ev_d:
        free(ev_sat); free(ev_plane); free(ev_r); free(ev_d)
        raise MemoryError()

    try:
        with nogil:
            for k in range(nk):
                s = &s_v[k, 0]
                if _occluded(a, s, lo_v, hi_v, -1, eps):
                    los_v[k] = 0
                for i in range(nplanes):
                    sd_a = sda_v[i]
                    if not sd_a > 0.0:
                        continue
                    sd_s = ((s[0] - p_v[i, 0]) * n_v[i, 0] + (s[1] - p_v[i, 1]) * n_v[i, 1]
                            + (s[2] - p_v[i, 2]) * n_v[i, 2])
                    if not sd_s > 0.0:
                        continue
                    mu = sd_a / (sd_a + sd_s)
                    for j in range(3):
                        am[j] = a[j] - 2.0 * sd_a * n_v[i, j]
                        r[j] = am[j] + mu * (s[j] - am[j])
                        q[j] = r[j] - p_v[i, j]
                    cu = q[0] * u_v[i, 0] + q[1] * u_v[i, 1] + q[2] * u_v[i, 2]
                    if cu < x_v[i, 0] - BOUNDS_TOL or cu > x_v[i, 1] + BOUNDS_TOL:
                        continue
                    cv = q[0] * v_v[i, 0] + q[1] * v_v[i, 1] + q[2] * v_v[i, 2]
                    if cv < x_v[i, 2] - BOUNDS_TOL or cv > x_v[i, 3] + BOUNDS_TOL:
                        continue
                    if _occluded(r, s, lo_v, hi_v, <Py_ssize_t>o_v[i], eps):
                        continue
                    if _occluded(a, r, lo_v, hi_v, <Py_ssize_t>o_v[i], eps):
                        continue
                    if count == cap:
                        cap *= 2
                        ev_sat = <long long*> realloc(ev_sat, cap * sizeof(long long))
                        ev_plane = <long long*> realloc(ev_plane, cap * sizeof(long long))
                        ev_r = <double*> realloc(ev_r, cap * 3 * sizeof(double))
                        ev_d = <double*> realloc(ev_d, cap * sizeof(double))
                        if not ev_sat or not ev_plane or not ev_r or not ev_d:
                            with gil:
                                raise MemoryError()
                    ev_sat[count] = k
                    ev_plane[count] = i
                    ev_r[3 * count] = r[0]
                    ev_r[3 * count + 1] = r[1]
                    ev_r[3 * count + 2] = r[2]
                    ev_d[count] = _path_delay(s, a, r)
                    count += 1

        out_sat = np.empty(count, dtype=np.int64)
        out_plane = np.empty(count, dtype=np.int64)
        out_r = np.empty((count, 3), dtype=np.float64)
        out_d = np.empty(count, dtype=np.float64)
        os_v = out_sat
        op_v = out_plane
        or_v = out_r
        od_v = out_d
        for i in range(count):
            os_v[i] = ev_sat[i]
            op_v[i] = ev_plane[i]
            or_v[i, 0] = ev_r[3 * i]
            or_v[i, 1] = ev_r[3 * i + 1]
            or_v[i, 2] = ev_r[3 * i + 2]
            od_v[i] = ev_d[i]
    finally:
        free(ev_sat)
        free(ev_plane)
        free(ev_r)
        free(ev_d)
    return los, out_sat, out_plane, out_r, out_d
