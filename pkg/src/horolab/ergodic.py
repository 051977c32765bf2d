"""Horocycle ergodic integrals on the quotient: Birkhoff averages,
variance growth, and normalized ergodic-integral ensembles.

Orbits are advanced by right multiplication with exp(h*U) and reduced to
the fundamental domain at every quadrature node, which keeps matrix
entries uniformly bounded for arbitrarily long integration times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sl2, surface


class DegenerateVarianceError(RuntimeError):
    """All variances numerically zero: the observable looks like a
    coboundary at this scale."""


@dataclass(frozen=True)
class VarianceCurve:
    """Variance of the ergodic integral along an increasing time grid."""

    times: np.ndarray
    variances: np.ndarray
    stderrs: np.ndarray
    flagged: bool = False

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size == 0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be nonempty and strictly increasing")


def _orbit_integrals(obs, grp, x0, t_marks, h):
    """Composite-Simpson integrals of the observable along stable-horocycle
    orbits, snapshotted at each mark.

    Returns an array of shape (len(t_marks), n) with int_0^{t_k} f(h_s x) ds
    for each of the n starting points.
    """
    t_marks = np.asarray(t_marks, dtype=float)
    if np.any(t_marks < 0) or np.any(np.diff(t_marks) <= 0):
        raise ValueError("marks must be nonnegative and strictly increasing")
    x = surface.reduce_batch(grp, np.asarray(x0, dtype=float))
    n = x.shape[0]
    half = sl2.flow_matrix(sl2.STABLE, h / 2.0)

    def step_half(x):
        return surface.reduce_batch(grp, x @ half)

    acc = np.zeros(n)
    out = np.empty((t_marks.size, n))
    f0 = surface.observable_eval(obs, grp, x, reduced=True)
    t = 0.0
    mark_i = 0
    while mark_i < t_marks.size:
        target = t_marks[mark_i]
        if target - t < h - 1e-12:
            # single Simpson interval over the remainder
            w = target - t
            if w > 1e-14:
                xm = surface.reduce_batch(grp, x @ sl2.flow_matrix(sl2.STABLE, w / 2.0))
                xe = surface.reduce_batch(grp, xm @ sl2.flow_matrix(sl2.STABLE, w / 2.0))
                fm = surface.observable_eval(obs, grp, xm, reduced=True)
                fe = surface.observable_eval(obs, grp, xe, reduced=True)
                out[mark_i] = acc + w / 6.0 * (f0 + 4.0 * fm + fe)
            else:
                out[mark_i] = acc
            mark_i += 1
            continue
        xm = step_half(x)
        x = step_half(xm)
        fm = surface.observable_eval(obs, grp, xm, reduced=True)
        fe = surface.observable_eval(obs, grp, x, reduced=True)
        acc = acc + h / 6.0 * (f0 + 4.0 * fm + fe)
        f0 = fe
        t += h
    return out


def ergodic_integral(obs, grp, x, T, h=1.0 / 64.0):
    """int_0^T f(h^U_s x) ds by composite Simpson quadrature."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    if T == 0:
        return 0.0
    out = _orbit_integrals(obs, grp, np.asarray(x)[None], [T], h)
    return float(out[0, 0])


def variance_curve(obs, grp, Ts, n, seed, h=1.0 / 64.0, stream=0):
    """Monte Carlo variance of the ergodic integral over Haar samples.

    The residual batch mean is subtracted before squaring to reduce bias.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    x0 = surface.sample_point(grp, seed, n, stream=stream)
    ints = _orbit_integrals(obs, grp, x0, Ts, h)
    centered = ints - ints.mean(axis=1, keepdims=True)
    sq = centered**2
    var = sq.mean(axis=1)
    se = sq.std(axis=1, ddof=1) / np.sqrt(n)
    floor = 1e-12 * (1.0 + np.abs(np.asarray(Ts, dtype=float)))
    flagged = bool(np.all(var <= floor))
    return VarianceCurve(np.asarray(Ts, dtype=float), var, se, flagged), ints


def growth_exponent(curve, n_boot=400, seed=0):
    """Least-squares slope of log ||integral|| vs log T with a pairs
    bootstrap standard error.  ||.|| is the square root of the variance."""
    if curve.flagged:
        raise DegenerateVarianceError("variance curve is numerically degenerate")
    lt = np.log(curve.times)
    ly = 0.5 * np.log(curve.variances)

    def slope(ix):
        x, y = lt[ix], ly[ix]
        xc = x - x.mean()
        denom = np.dot(xc, xc)
        if denom < 1e-12:
            return np.nan
        return float(np.dot(xc, y - y.mean()) / denom)

    k = lt.size
    est = slope(np.arange(k))
    rng = surface.rng_for(seed, 1)
    boots = []
    while len(boots) < n_boot:
        s = slope(rng.integers(0, k, size=k))
        if np.isfinite(s):
            boots.append(s)
    return est, float(np.std(boots, ddof=1))


def empirical_normalized(obs, grp, t, T, n, seed, h=1.0 / 64.0, stream=0):
    """Samples of the normalized ergodic integral at time T*e^t over
    Haar-random starting points, divided by the batch L2 norm."""
    from .distlab import EmpiricalDistribution

    horizon = T * np.exp(t)
    curve, ints = variance_curve(obs, grp, [horizon], n, seed, h=h, stream=stream)
    vals = ints[0]
    norm = np.sqrt(np.mean(vals**2))
    if curve.flagged or norm <= 0:
        raise DegenerateVarianceError("normalization norm is degenerate")
    return EmpiricalDistribution(vals / norm)


def write_variance_csv(curve, path):
    """Columns: T, variance, stderr (17 significant digits)."""
    from .cli import write_csv

    rows = [
        (t, v, s)
        for t, v, s in zip(curve.times, curve.variances, curve.stderrs)
    ]
    write_csv(path, ["T", "variance", "stderr"], rows)
