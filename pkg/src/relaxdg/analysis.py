"""Run-time probes and post-processing helpers: wavefront arrival fitting,
L2 errors against exact solutions and observed convergence orders."""

from __future__ import annotations

import numpy as np


class SolidWaveProbes:
    """Observer recording div(w) and curl(w) time series at probe points.

    The dilatational front carries div(w) and travels at c1; the shear
    front carries curl(w) and travels at c2, so arrival-time fits of the
    two series measure the two solid wavefront speeds independently.
    """

    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, float))
        self.times = []
        self.div = []
        self.curl = []

    def __call__(self, step, t, state, ops):
        dw1dx = ops.eval_points(state, 0, self.points, deriv=0)[:, 0]
        dw1dy = ops.eval_points(state, 0, self.points, deriv=1)[:, 0]
        dw2dx = ops.eval_points(state, 0, self.points, deriv=0)[:, 1]
        dw2dy = ops.eval_points(state, 0, self.points, deriv=1)[:, 1]
        self.times.append(t)
        self.div.append(dw1dx + dw2dy)
        self.curl.append(dw2dx - dw1dy)

    def series(self):
        return (np.asarray(self.times), np.asarray(self.div),
                np.asarray(self.curl))


def first_arrival(times, series, threshold):
    """Earliest time |series| exceeds the threshold, per probe (nan if never).

    ``series`` has shape (ntimes, nprobes); crossing times are linearly
    interpolated between samples.
    """
    times = np.asarray(times)
    mag = np.abs(series)
    nt, npr = mag.shape
    out = np.full(npr, np.nan)
    for j in range(npr):
        idx = np.flatnonzero(mag[:, j] >= threshold)
        if idx.size == 0:
            continue
        i = idx[0]
        if i == 0:
            out[j] = times[0]
        else:
            f = (threshold - mag[i - 1, j]) / (mag[i, j] - mag[i - 1, j])
            out[j] = times[i - 1] + f * (times[i] - times[i - 1])
    return out


def fit_front_speed(distances, arrivals):
    """Least-squares front speed from probe distance vs arrival time.

    Returns (speed, points used).  Probes that never triggered are ignored.
    """
    d = np.asarray(distances, float)
    t = np.asarray(arrivals, float)
    ok = np.isfinite(t)
    if ok.sum() < 3:
        return np.nan, int(ok.sum())
    A = np.column_stack([t[ok], np.ones(ok.sum())])
    slope, _ = np.linalg.lstsq(A, d[ok], rcond=None)[0]
    return float(slope), int(ok.sum())


def l2_error(ops, field, exact_fns, t=None):
    """Per-block L2 errors against exact pointwise solutions.

    ``exact_fns[b](points)`` returns exact values; pass None to skip a block.
    """
    errs = []
    for b, fn in enumerate(exact_fns):
        if fn is None:
            errs.append(None)
            continue
        tab = ops.tables[b]
        vals = ops.volume_values(field.blocks[b], b)
        pts = ops.cell_points(b, tab.vol_ref).reshape(-1, 2)
        ex = np.asarray(fn(pts)).reshape(vals.shape)
        diff2 = np.einsum("cqv,q->", (vals - ex) ** 2, tab.w_vol)
        errs.append(float(np.sqrt(diff2)))
    return errs


def observed_orders(errors, ratio=2.0):
    errors = np.asarray(errors, float)
    return list(np.log(errors[:-1] / errors[1:]) / np.log(ratio))
