"""The Bolza octagon group: fundamental-domain reduction, Haar sampling,
and quotient observables.

The surface is the genus-2 quotient of the disk by the group generated by
the eight hyperbolic translations G_k = R(k*pi/4) T R(-k*pi/4), where T
translates along the real axis by twice the octagon inradius.  The
fundamental domain is the regular hyperbolic octagon centered at 0 with
vertex angles pi/4 (circumradius arcosh(3 + 2*sqrt(2)), area 4*pi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import sl2

# Opposite-side pairing of the regular octagon: composing the pairings
# around the single vertex cycle gives this word, which must be +-I.
BOLZA_RELATOR = (0, 3, 6, 1, 4, 7, 2, 5)

MAX_REDUCE_STEPS = 10**6


class ReductionError(RuntimeError):
    """Raised when fundamental-domain reduction fails to terminate."""


def rotation(phi):
    """Group element rotating the disk about 0 by angle phi."""
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi / 2.0), np.sin(phi / 2.0)
    out = np.empty(phi.shape + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = -s
    out[..., 1, 1] = c
    return out


def translation_to(z):
    """Hyperbolic translation taking 0 to the disk point z (pure, along
    the geodesic through 0 and z)."""
    z = np.asarray(z, dtype=complex)
    phi = np.angle(z)
    d = sl2.dist0(z)
    return rotation(phi) @ sl2.flow_matrix(sl2.GEODESIC, d) @ rotation(-phi)


def frame_element(z, theta):
    """Element with base point z and frame angle theta."""
    return translation_to(z) @ rotation(theta)


@dataclass(frozen=True)
class FuchsianGroup:
    """Cocompact Fuchsian group with a centered Dirichlet octagon."""

    generators: np.ndarray          # shape (8, 2, 2); G_{k+4} = G_k^{-1}
    circumradius: float
    inradius: float
    relator: tuple = BOLZA_RELATOR

    def relator_residual(self):
        m = np.eye(2)
        for k in self.relator:
            m = m @ self.generators[k]
        return min(np.max(np.abs(m - np.eye(2))), np.max(np.abs(m + np.eye(2))))


def bolza_group():
    """Construct the Bolza octagon group; fails loudly if the relator
    does not close up."""
    circumradius = np.arccosh(3.0 + 2.0 * np.sqrt(2.0))
    inradius = np.arccosh(1.0 + np.sqrt(2.0))
    t = sl2.flow_matrix(sl2.GEODESIC, 2.0 * inradius)
    gens = np.stack(
        [rotation(k * np.pi / 4.0) @ t @ rotation(-k * np.pi / 4.0) for k in range(8)]
    )
    grp = FuchsianGroup(gens, circumradius, inradius)
    res = grp.relator_residual()
    if res > 1e-9:
        raise RuntimeError(f"Bolza relator failed to close: residual {res:.3e}")
    return grp


def in_domain(grp, z, tol=1e-12):
    """Dirichlet-domain membership: no generator moves z closer to 0."""
    z = np.asarray(z, dtype=complex)
    d0 = sl2.dist0(z)
    dk = sl2.dist0(sl2.mobius(grp.generators[:, None], z[None]))
    return np.all(dk >= d0[None] - tol, axis=0)


def reduce_batch(grp, g, collect_words=False):
    """Greedy fundamental-domain reduction of a batch of elements.

    Repeatedly left-multiplies by the generator that most decreases the
    base-point distance to 0 (ties broken by lowest index).  Returns the
    reduced elements, and the per-element word of applied generator
    indices when ``collect_words`` is set.
    """
    g = np.array(sl2.renormalize(np.asarray(g, dtype=float)))
    batch = g.shape[:-2]
    words = [[] for _ in range(int(np.prod(batch, dtype=int)))] if collect_words else None
    flat = g.reshape(-1, 2, 2)
    active = np.arange(flat.shape[0])
    gens = grp.generators
    for step in range(MAX_REDUCE_STEPS):
        if active.size == 0:
            break
        z = sl2.mobius(flat[active], 0j)
        d0 = sl2.dist0(z)
        zk = sl2.mobius(gens[:, None], z[None])          # (8, m)
        dk = sl2.dist0(zk)
        best = np.argmin(dk, axis=0)
        improved = dk[best, np.arange(active.size)] < d0 - 1e-13
        hit = active[improved]
        if hit.size == 0:
            break
        kbest = best[improved]
        flat[hit] = gens[kbest] @ flat[hit]
        if collect_words:
            for i, k in zip(hit, kbest):
                words[i].append(int(k))
        active = hit
    else:
        raise ReductionError("reduction did not terminate")
    flat = sl2.canonicalize(flat)
    out = flat.reshape(batch + (2, 2))
    if collect_words:
        return out, words
    return out


def reduce(grp, g):
    """Reduce one element; returns (reduced element, word).

    The word lists the generator indices applied on the left, so the
    original element is recovered as inverse(product(word)) @ reduced.
    """
    out, words = reduce_batch(grp, g[None], collect_words=True)
    return out[0], words[0]


def frame_angle(g):
    """Cartan frame coordinate: angle of the rotation part of g after
    removing the translation to its base point."""
    z = sl2.mobius(g, 0j)
    k = sl2.inverse(translation_to(z)) @ g
    # k fixes 0, hence acts as z -> e^{i phi} z
    return np.angle(sl2.mobius(k, 0.5 + 0j))


def _area_disk(rho):
    # hyperbolic area of the Euclidean-radius-rho disk about 0
    return 4.0 * np.pi * rho**2 / (1.0 - rho**2)


def sample_disk_points(rng, n, rho_max):
    """Points uniform w.r.t. hyperbolic area in the Euclidean-radius
    rho_max disk, by exact radial inversion."""
    s_max = rho_max**2 / (1.0 - rho_max**2)
    s = rng.random(n) * s_max
    rho = np.sqrt(s / (1.0 + s))
    ang = rng.random(n) * 2.0 * np.pi
    return rho * np.exp(1j * ang)


def rng_for(seed, stream=0):
    """Counter-based generator: independent streams keyed by (seed, stream)."""
    return np.random.Generator(np.random.Philox(key=(int(seed), int(stream))))


def sample_point(grp, seed, n=1, stream=0):
    """Haar-random elements: base point uniform w.r.t. hyperbolic area on
    the octagon (rejection from the circumdisk), frame angle uniform."""
    rng = rng_for(seed, stream)
    rho_max = np.tanh(grp.circumradius / 2.0)
    zs = np.empty(n, dtype=complex)
    have = 0
    while have < n:
        want = max(2 * (n - have), 64)
        cand = sample_disk_points(rng, want, rho_max)
        cand = cand[in_domain(grp, cand)]
        take = min(cand.size, n - have)
        zs[have:have + take] = cand[:take]
        have += take
    theta = rng.random(n) * 2.0 * np.pi
    return frame_element(zs, theta)


def _bump(s):
    """C-infinity bump: 1 at 0, vanishing (with all derivatives) at |s| >= 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


@dataclass(frozen=True)
class Observable:
    """Zero-average quotient observable: a radial bump around a center in
    the domain interior, times cos(n * frame angle), minus a mean offset."""

    center: complex
    radius: float
    mode: int = 0
    mean_offset: float = 0.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")


def make_observable(grp, center=0j, radius=0.5, mode=0):
    """Build an observable whose support ball stays inside the domain and
    whose surface mean vanishes (offset fixed by exact radial quadrature)."""
    center = complex(center)
    d_center = sl2.dist0(center)
    if d_center + radius >= grp.inradius:
        raise ValueError(
            f"support ball (center distance {d_center:.3f}, radius {radius:.3f}) "
            f"leaves the domain interior (inradius {grp.inradius:.3f})"
        )
    if mode != 0:
        offset = 0.0    # angular mode integrates to zero
    else:
        # mean over SM: (1/4pi) * 2pi * int_0^r bump(s/r) sinh(s) ds
        mass, _ = quad(lambda s: _bump(s / radius) * np.sinh(s), 0.0, radius)
        offset = mass / 2.0
    return Observable(center, float(radius), int(mode), float(offset))


def observable_eval(obs, grp, g, reduced=False):
    """Evaluate the observable at group elements (vectorized).

    ``reduced=True`` skips the fundamental-domain reduction when the
    caller guarantees the base points already lie in the domain.
    """
    g = np.asarray(g, dtype=float)
    scalar = g.ndim == 2
    if scalar:
        g = g[None]
    if not reduced:
        g = reduce_batch(grp, g)
    z = sl2.mobius(g, 0j)
    val = _bump(sl2.hyperbolic_distance(z, obs.center) / obs.radius)
    if obs.mode != 0:
        val = val * np.cos(obs.mode * frame_angle(g))
    val = val - obs.mean_offset
    return val[0] if scalar else val


def surface_mean(obs, grp, n, seed, stream=0):
    """Monte Carlo volume average; returns (mean, standard error)."""
    g = sample_point(grp, seed, n, stream=stream)
    vals = observable_eval(obs, grp, g, reduced=True)
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / np.sqrt(n))


def octagon_area_mc(grp, n, seed):
    """Monte Carlo estimate of the octagon's hyperbolic area (oracle:
    Gauss-Bonnet gives 4*pi). Returns (estimate, standard error)."""
    rng = rng_for(seed)
    rho_max = np.tanh(grp.circumradius / 2.0)
    z = sample_disk_points(rng, n, rho_max)
    inside = in_domain(grp, z)
    p = np.mean(inside)
    total = _area_disk(rho_max)
    return total * p, total * np.sqrt(p * (1.0 - p) / n)
