"""numpy implementation of the ray-tracing kernels.

Used when the compiled ``_ckernels`` extension is unavailable, and as the
reference the compiled kernels are checked against.  Both modules expose the
same two functions with the same argument order.
"""
from __future__ import annotations

import numpy as np

BOUNDS_TOL = 1e-9


def segments_occluded(starts, ends, box_lo, box_hi, ignore, eps):
    """For each segment, whether its open interior passes strictly through a box.

    A segment ``o + t*(e - o)`` is occluded by a box when the parameter
    interval inside the box overlaps ``(eps, 1 - eps)`` with positive length.
    ``ignore[m]`` names one box index to skip for segment ``m`` (-1 for none).
    """
    starts = np.asarray(starts, dtype=np.float64).reshape(-1, 3)
    ends = np.asarray(ends, dtype=np.float64).reshape(-1, 3)
    ignore = np.asarray(ignore, dtype=np.int64).reshape(-1)
    m = starts.shape[0]
    if m == 0 or box_lo.shape[0] == 0:
        return np.zeros(m, dtype=bool)
    o = starts[:, None, :]
    d = (ends - starts)[:, None, :]
    lo = box_lo[None, :, :]
    hi = box_hi[None, :, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (lo - o) / d
        tb = (hi - o) / d
    t_near = np.minimum(ta, tb)
    t_far = np.maximum(ta, tb)
    parallel = d == 0.0
    inside_slab = (o > lo) & (o < hi)
    t_near = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), t_near)
    t_far = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), t_far)
    t0 = np.maximum(t_near.max(axis=2), eps)
    t1 = np.minimum(t_far.min(axis=2), 1.0 - eps)
    hit = t0 < t1
    rows = np.nonzero(ignore >= 0)[0]
    hit[rows, ignore[rows]] = False
    return hit.any(axis=1)


def trace_epoch_batch(
    antenna, sats, point, normal, axis_u, axis_v, extent, owner, box_lo, box_hi, eps
):
    """Trace every satellite in ``sats`` (K, 3) against every plane.

    Returns ``(los_clear, ev_sat, ev_plane, ev_r, ev_d)``; events are ordered
    by satellite index, then plane index.
    """
    a = np.asarray(antenna, dtype=np.float64).reshape(3)
    sats = np.asarray(sats, dtype=np.float64).reshape(-1, 3)
    k = sats.shape[0]

    los_clear = ~segments_occluded(
        np.broadcast_to(a, (k, 3)), sats, box_lo, box_hi, np.full(k, -1, dtype=np.int64), eps
    )

    sd_a = np.einsum("nj,nj->n", a[None, :] - point, normal)
    sd_s = np.einsum("knj,nj->kn", sats[:, None, :] - point[None, :, :], normal)
    front = (sd_a > 0.0)[None, :] & (sd_s > 0.0)
    ks, ns = np.nonzero(front)
    if ks.size:
        nrm = normal[ns]
        a_m = a[None, :] - 2.0 * sd_a[ns, None] * nrm
        s = sats[ks]
        mu = sd_a[ns] / (sd_a[ns] + sd_s[ks, ns])
        r = a_m + mu[:, None] * (s - a_m)
        q = r - point[ns]
        cu = np.einsum("mj,mj->m", q, axis_u[ns])
        cv = np.einsum("mj,mj->m", q, axis_v[ns])
        ext = extent[ns]
        inside = (
            (cu >= ext[:, 0] - BOUNDS_TOL)
            & (cu <= ext[:, 1] + BOUNDS_TOL)
            & (cv >= ext[:, 2] - BOUNDS_TOL)
            & (cv <= ext[:, 3] + BOUNDS_TOL)
        )
        ks, ns, r, s = ks[inside], ns[inside], r[inside], s[inside]
    else:
        r = np.zeros((0, 3))
        s = np.zeros((0, 3))
    if ks.size:
        own = owner[ns]
        m = ks.size
        blocked = segments_occluded(
            np.concatenate([r, np.broadcast_to(a, (m, 3))]),
            np.concatenate([s, r]),
            box_lo,
            box_hi,
            np.concatenate([own, own]),
            eps,
        )
        keep = ~(blocked[:m] | blocked[m:])
        ks, ns, r, s = ks[keep], ns[keep], r[keep], s[keep]
    d = path_delay_many(s, a, r)
    return (
        los_clear,
        ks.astype(np.int64),
        ns.astype(np.int64),
        np.ascontiguousarray(r, dtype=np.float64).reshape(-1, 3),
        d,
    )


def path_delay_many(s, a, r):
    """Excess path length via ``r``; stable when ``s`` is very far away."""
    s = np.asarray(s, dtype=np.float64).reshape(-1, 3)
    r = np.asarray(r, dtype=np.float64).reshape(-1, 3)
    a = np.broadcast_to(np.asarray(a, dtype=np.float64), r.shape)
    rs = np.linalg.norm(r - s, axis=1)
    as_ = np.linalg.norm(a - s, axis=1)
    ar = np.linalg.norm(a - r, axis=1)
    denom = rs + as_
    with np.errstate(invalid="ignore", divide="ignore"):
        # |r-s| - |a-s| written without cancellation
        diff = np.einsum("mj,mj->m", r - a, r + a - 2.0 * s) / denom
    diff = np.where(denom > 0.0, diff, 0.0)
    return np.maximum(diff + ar, 0.0)
