"""PSL(2,R) arithmetic, one-parameter flows, and the Poincare-disk action.

Group elements are real 2x2 matrices of determinant 1, stored as numpy
arrays of shape (..., 2, 2) so that every operation broadcasts over
batches.  Elements are considered modulo sign; ``canonicalize`` picks the
representative with a > 0 (or a == 0 and b > 0).

Disk points are complex numbers with |z| < 1.  Matrices act on the upper
half plane by linear fractional transformations; the disk action is the
half-plane action conjugated by the Cayley map w = i(1+z)/(1-z).
"""

from __future__ import annotations

import numpy as np

GEODESIC = "geodesic"
STABLE = "stable_horocycle"
UNSTABLE = "unstable_horocycle"

_FLOW_KINDS = (GEODESIC, STABLE, UNSTABLE)


def identity(shape=()):
    """Identity element, broadcast to the given batch shape."""
    out = np.zeros(shape + (2, 2))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    return out


def generator_matrix(kind):
    """Lie-algebra generators: X (diagonal), U (upper), V (lower).

    They satisfy [X, U] = U, [X, V] = -V and [U, V] = 2X exactly.
    """
    if kind == "X":
        return np.array([[0.5, 0.0], [0.0, -0.5]])
    if kind == "U":
        return np.array([[0.0, 1.0], [0.0, 0.0]])
    if kind == "V":
        return np.array([[0.0, 0.0], [1.0, 0.0]])
    raise ValueError(f"unknown generator kind {kind!r}")


def flow_matrix(kind, t):
    """Closed-form exp(t*W) for the three flows. Supports array t."""
    t = np.asarray(t, dtype=float)
    out = identity(t.shape)
    if kind == GEODESIC:
        out[..., 0, 0] = np.exp(t / 2.0)
        out[..., 1, 1] = np.exp(-t / 2.0)
    elif kind == STABLE:
        out[..., 0, 1] = t
    elif kind == UNSTABLE:
        out[..., 1, 0] = t
    else:
        raise ValueError(f"unknown flow kind {kind!r}")
    return out


def flow(kind, t, g=None):
    """Right action g * exp(t*W) of the flow on a group element."""
    m = flow_matrix(kind, t)
    if g is None:
        return m
    return g @ m


def compose(*gs):
    out = gs[0]
    for g in gs[1:]:
        out = out @ g
    return out


def inverse(g):
    """Inverse without division: adjugate of a det-1 matrix."""
    g = np.asarray(g, dtype=float)
    out = np.empty_like(g)
    out[..., 0, 0] = g[..., 1, 1]
    out[..., 1, 1] = g[..., 0, 0]
    out[..., 0, 1] = -g[..., 0, 1]
    out[..., 1, 0] = -g[..., 1, 0]
    return out


def renormalize(g):
    """Divide by sqrt(det) to push the determinant back to 1."""
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    return g / np.sqrt(det)[..., None, None]


def canonicalize(g, renorm=True):
    """PSL sign convention: a > 0, or a == 0 and b > 0."""
    if renorm:
        g = renormalize(g)
    a = g[..., 0, 0]
    b = g[..., 0, 1]
    neg = (a < 0) | ((a == 0) & (b < 0))
    return np.where(neg[..., None, None], -g, g)


def proj_distance(g, h):
    """Max-entry distance between PSL representatives."""
    g = canonicalize(g)
    h = canonicalize(h)
    return np.max(np.abs(g - h), axis=(-2, -1))


def disk_to_halfplane(z):
    z = np.asarray(z, dtype=complex)
    return 1j * (1.0 + z) / (1.0 - z)


def halfplane_to_disk(w):
    w = np.asarray(w, dtype=complex)
    return (w - 1j) / (w + 1j)


def mobius(g, z):
    """Action of g on a disk point (or array of disk points)."""
    w = disk_to_halfplane(z)
    a = g[..., 0, 0]
    b = g[..., 0, 1]
    c = g[..., 1, 0]
    d = g[..., 1, 1]
    w2 = (a * w + b) / (c * w + d)
    return halfplane_to_disk(w2)


def hyperbolic_distance(z, w):
    """Distance in the Poincare disk (curvature -1)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    q = np.abs(z - w) / np.abs(1.0 - np.conj(z) * w)
    # clip guards against q = 1 + eps from rounding at large distances
    return 2.0 * np.arctanh(np.clip(q, 0.0, 1.0 - 1e-17))


def dist0(z):
    """Distance from the disk origin."""
    r = np.abs(np.asarray(z, dtype=complex))
    return 2.0 * np.arctanh(np.clip(r, 0.0, 1.0 - 1e-17))
