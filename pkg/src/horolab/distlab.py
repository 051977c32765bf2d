"""Empirical distributions, the Levy metric, torus distributions of
cocycle expansions, and rotational-symmetry moment tests.

The 1-D Levy metric on step CDFs stands in for the Levy-Prohorov metric:
both metrize weak* convergence on the line, and the Levy metric admits an
exact finite algorithm (bisection over the feasibility condition, then a
snap to the finite candidate set of breakpoint/level differences).
Reported as "levy" in all outputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .renorm import cocycle_expand


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Weighted sample set on R (or C^n for vector samples)."""

    samples: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.size == 0:
            raise ValueError("empty sample set")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape[0] != s.shape[0] or np.any(w <= 0):
                raise ValueError("weights must be positive, one per sample")
            object.__setattr__(self, "weights", w / w.sum())
        object.__setattr__(self, "samples", s)

    def _w(self):
        if self.weights is not None:
            return self.weights
        n = self.samples.shape[0]
        return np.full(n, 1.0 / n)

    def cdf_points(self):
        """Sorted unique support points and the CDF values just after them."""
        x = np.asarray(self.samples, dtype=float)
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ws = self._w()[order]
        ux, inv = np.unique(xs, return_inverse=True)
        cw = np.zeros(ux.size)
        np.add.at(cw, inv, ws)
        return ux, np.cumsum(cw)

    def mean(self):
        return np.average(self.samples, weights=self._w(), axis=0)

    def moment(self, k):
        return np.average(self.samples**k, weights=self._w(), axis=0)

    def second_moment(self):
        return float(np.average(np.abs(self.samples) ** 2, weights=self._w()))


def _cdf_right(xs, cum, q):
    """Right-continuous CDF at points q."""
    idx = np.searchsorted(xs, q, side="right")
    out = np.zeros(np.shape(q))
    nz = idx > 0
    out[nz] = cum[idx[nz] - 1]
    return out


def _feasible(eps, xF, cF, xG, cG):
    # for all x: F(x - eps) - eps <= G(x) <= F(x + eps) + eps.
    # Both one-sided conditions peak right after a jump of the step CDF on
    # the large side, so it is enough to compare each jump level against
    # the other CDF evaluated eps to the right (no round-trip x +- eps).
    if np.any(cF - eps - 1e-15 > _cdf_right(xG, cG, xF + eps)):
        return False
    if np.any(cG - eps - 1e-15 > _cdf_right(xF, cF, xG + eps)):
        return False
    return True


def levy_distance(P, Q, snap_limit=64, tol=1e-14):
    """Exact Levy metric between two 1-D empirical distributions.

    Bisects the monotone feasibility condition on the step CDFs; when the
    supports are small, snaps to the exact candidate value (a breakpoint
    or CDF-level difference)."""
    xF, cF = P.cdf_points()
    xG, cG = Q.cdf_points()
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _feasible(mid, xF, cF, xG, cG):
            hi = mid
        else:
            lo = mid
    if xF.size * xG.size <= snap_limit * snap_limit:
        lvF = np.concatenate([[0.0], cF])
        lvG = np.concatenate([[0.0], cG])
        cands = np.concatenate([
            np.abs(xF[:, None] - xG[None, :]).ravel(),
            np.abs(lvF[:, None] - lvG[None, :]).ravel(),
        ])
        cands = np.unique(cands[(cands >= lo - 1e-12) & (cands <= hi + 1e-12)])
        for c in cands:
            if _feasible(c, xF, cF, xG, cG):
                return float(c)
    return float(0.5 * (lo + hi))


def torus_distribution(spec_obs, fields_plus, theta=None, t=None,
                       fields_minus=None, normalize=True, floor=1e-12):
    """Distribution of the theta-twisted cocycle expansion over the
    field's sample index, normalized to unit second moment.

    Either a torus point ``theta`` (one angle per spectrum entry) or a
    time ``t`` is given; in the latter case theta_n = upsilon_n t / 2
    with upsilon_n = sqrt(4 mu_n - 1)."""
    k = len(spec_obs.entries)
    if theta is None:
        if t is None:
            raise ValueError("give either theta or t")
        theta = spec_obs.frequencies() * t / 2.0
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (k,):
        raise ValueError("theta needs one angle per spectrum entry")
    tw_plus = {i: np.exp(1j * theta[i]) * np.asarray(fields_plus[i], dtype=complex)
               for i in range(k)}
    tw_minus = None
    if fields_minus is not None:
        tw_minus = {i: np.exp(-1j * theta[i]) * np.asarray(fields_minus[i], dtype=complex)
                    for i in fields_minus}
    vals = cocycle_expand(spec_obs, tw_plus, tw_minus)
    vals = np.asarray(vals)
    if spec_obs.conjugation:
        vals = vals.real
    if normalize:
        norm = np.sqrt(np.mean(np.abs(vals) ** 2))
        if norm <= floor:
            raise ValueError("degenerate norm in torus distribution")
        vals = vals / norm
    return EmpiricalDistribution(vals)


def _multi_indices(dim, max_degree):
    """All (alpha, beta) pairs of multi-indices with 1 <= |alpha|+|beta| <= max_degree."""
    rng = range(max_degree + 1)
    for alpha in itertools.product(rng, repeat=dim):
        for beta in itertools.product(rng, repeat=dim):
            tot = sum(alpha) + sum(beta)
            if 1 <= tot <= max_degree:
                yield alpha, beta


def mixed_moments(samples, max_degree):
    """Plug-in estimates of E[z^alpha conj(z)^beta] with jackknife
    standard errors, for complex-vector samples of shape (n,) or (n, d)."""
    z = np.asarray(samples, dtype=complex)
    if z.ndim == 1:
        z = z[:, None]
    n, d = z.shape
    zc = np.conj(z)
    rows = []
    for alpha, beta in _multi_indices(d, max_degree):
        term = np.ones(n, dtype=complex)
        for s in range(d):
            if alpha[s]:
                term = term * z[:, s] ** alpha[s]
            if beta[s]:
                term = term * zc[:, s] ** beta[s]
        est = term.mean()
        # jackknife of the mean reduces to the usual standard error
        se = float(np.sqrt(np.sum(np.abs(term - est) ** 2) / (n - 1) / n))
        rows.append({"alpha": alpha, "beta": beta, "estimate": complex(est),
                     "stderr": se})
    return rows


@dataclass(frozen=True)
class AffineNormalizer:
    """Rotation angle and semi-axis scales (theta, A, B) with A^2 >= B^2."""

    theta: float
    A: float
    B: float
    degenerate_B: bool = False
    theta_defined: bool = True

    def transform(self, z):
        w = np.exp(1j * self.theta) * np.asarray(z, dtype=complex)
        if self.degenerate_B:
            return w.real / self.A
        return w.real / self.A + 1j * w.imag / self.B


def affine_normalizer(samples):
    """Estimate (theta, A, B) from complex samples of one coordinate:
    e^{2i theta} E[beta^2] in R+, A^2 = (E|beta|^2 + |E beta^2|)/2,
    B^2 = (E|beta|^2 - |E beta^2|)/2."""
    z = np.asarray(samples, dtype=complex)
    n = z.size
    m2 = np.mean(z**2)
    p2 = float(np.mean(np.abs(z) ** 2))
    # statistical floor: 3 standard errors of the relevant estimates
    se_m2 = np.sqrt(np.sum(np.abs(z**2 - m2) ** 2) / (n - 1) / n)
    floor = 3.0 * se_m2
    theta_defined = abs(m2) > floor
    theta = float(np.mod(-np.angle(m2) / 2.0, 2.0 * np.pi)) if theta_defined else 0.0
    a2 = (p2 + abs(m2)) / 2.0
    b2 = (p2 - abs(m2)) / 2.0
    degenerate = b2 <= max(floor, 0.0)
    return AffineNormalizer(theta, float(np.sqrt(a2)), float(np.sqrt(max(b2, 0.0))),
                            degenerate_B=degenerate, theta_defined=theta_defined)


def _bonferroni_threshold(m, significance):
    """Two-sided normal quantile at level significance/m."""
    from scipy.stats import norm

    return float(norm.isf(significance / (2.0 * m)))


def moment_table_verdict(rows, significance=0.0027):
    """A moment 'vanishes' when |estimate| <= z * stderr with the
    Bonferroni-corrected z (never below the plain 3 sigma rule)."""
    m = len(rows)
    z = max(3.0, _bonferroni_threshold(m, significance))
    out = []
    all_pass = True
    first_violation = None
    for i, r in enumerate(rows):
        ok = abs(r["estimate"]) <= z * max(r["stderr"], 1e-300)
        out.append({**r, "pass": bool(ok), "threshold": z * r["stderr"]})
        if not ok and first_violation is None:
            first_violation = i
            all_pass = False
    return {"pass": all_pass, "rows": out, "z": z,
            "first_violation": first_violation}


def projected_functionals(z, normalizers, r_grid=(1.0, 2.0), n_theta=8):
    """The scan family Re(sum r_s e^{i theta_s} z_s) normalized by
    sqrt(sum r_s^2 (A_s^2 cos^2 + B_s^2 sin^2 theta_s)).

    Yields (label, EmpiricalDistribution) over the product grid."""
    z = np.asarray(z, dtype=complex)
    if z.ndim == 1:
        z = z[:, None]
    d = z.shape[1]
    thetas = np.arange(n_theta) * 2.0 * np.pi / n_theta
    for rs in itertools.product(r_grid, repeat=d):
        for ths in itertools.product(thetas, repeat=d):
            num = np.zeros(z.shape[0])
            denom = 0.0
            for s in range(d):
                num += rs[s] * (np.exp(1j * ths[s]) * z[:, s]).real
                a, b = normalizers[s].A, normalizers[s].B
                denom += rs[s] ** 2 * (a**2 * np.cos(ths[s]) ** 2
                                       + b**2 * np.sin(ths[s]) ** 2)
            yield (rs, ths), EmpiricalDistribution(num / np.sqrt(denom))


def scan_levy_spread(dists, exact_limit=40, subsample=20000, seed=0, tol=1e-6):
    """Max pairwise Levy distance over a family of distributions.

    Exact for small families.  For large ones, distances to the first
    member locate the extremes and the exact maximum is then taken over
    the extreme subset (a pairwise distance, hence a tight lower bound
    on the family diameter, at most a factor 2 off)."""
    dists = list(dists)
    rng = np.random.Generator(np.random.Philox(key=seed))

    def maybe_sub(d):
        s = np.asarray(d.samples, dtype=float)
        if d.weights is None and s.size > subsample:
            return EmpiricalDistribution(s[rng.choice(s.size, subsample, replace=False)])
        return d

    dists = [maybe_sub(d) for d in dists]

    def exact_max(family):
        best = 0.0
        for i in range(len(family)):
            for j in range(i + 1, len(family)):
                best = max(best, levy_distance(family[i], family[j], tol=tol))
        return best

    if len(dists) <= exact_limit:
        return exact_max(dists)
    ref = dists[0]
    to_ref = np.array([levy_distance(ref, d, tol=tol) for d in dists[1:]])
    top = np.argsort(to_ref)[-7:]
    subset = [ref] + [dists[1 + i] for i in top]
    return max(exact_max(subset), float(to_ref.max()))


def scan_noise_floor(dist, n_boot=12, subsample=20000, seed=0, tol=1e-6):
    """Null scale for a Levy scan statistic: the max pairwise distance
    among bootstrap resamples of one member, mimicking a family with no
    distributional dependence."""
    s = np.asarray(dist.samples, dtype=float)
    rng = np.random.Generator(np.random.Philox(key=seed))
    size = min(s.size, subsample)
    fam = [EmpiricalDistribution(rng.choice(s, size, replace=True))
           for _ in range(n_boot)]
    best = 0.0
    for i in range(n_boot):
        for j in range(i + 1, n_boot):
            best = max(best, levy_distance(fam[i], fam[j], tol=tol))
    return best


def split_noise_floor(dist, seed=0, n_splits=4, tol=1e-6):
    """Same-seed-split noise floor: Levy distance between the two halves
    of the sample set under a deterministic shuffle, averaged over a few
    shuffles to tame the variance of a single split."""
    s = np.asarray(dist.samples, dtype=float)
    half = s.size // 2
    acc = 0.0
    for j in range(n_splits):
        rng = np.random.Generator(np.random.Philox(key=(seed, j)))
        perm = rng.permutation(s.size)
        acc += levy_distance(EmpiricalDistribution(s[perm[:half]]),
                             EmpiricalDistribution(s[perm[half:2 * half]]),
                             tol=tol)
    return acc / n_splits


def rot_invariance_test(samples, max_degree=4, significance=0.0027,
                        normalizers=None, n_theta=8, r_grid=(1.0, 2.0),
                        scan_seed=0):
    """Rotational-invariance verdict after coordinatewise affine
    normalization.

    Tests vanishing of all mixed moments with alpha != beta up to
    max_degree (Bonferroni-corrected), and scans the projected
    functionals for distributional theta-dependence in the Levy metric.
    Degenerate-B coordinates are excluded from the scan with a warning.
    """
    z = np.asarray(samples, dtype=complex)
    if z.ndim == 1:
        z = z[:, None]
    d = z.shape[1]
    if normalizers is None:
        normalizers = [affine_normalizer(z[:, s]) for s in range(d)]
    warnings = []
    keep = [s for s in range(d) if not normalizers[s].degenerate_B]
    for s in range(d):
        if normalizers[s].degenerate_B:
            warnings.append(f"coordinate {s} has degenerate B; excluded from scan")

    w = np.stack([normalizers[s].transform(z[:, s]) for s in range(d)], axis=1)
    raw_rows = mixed_moments(z, max_degree)
    raw = moment_table_verdict([r for r in raw_rows if r["alpha"] != r["beta"]],
                               significance)
    norm_rows = mixed_moments(w, max_degree)
    normed = moment_table_verdict([r for r in norm_rows if r["alpha"] != r["beta"]],
                                  significance)

    scan = None
    if keep:
        # rotate to principal axes so the scan denominator matches
        rot = np.array([np.exp(1j * normalizers[s].theta) for s in keep])
        zk = z[:, keep] * rot[None, :]
        nk = [normalizers[s] for s in keep]
        fam = [dist for _, dist in projected_functionals(zk, nk, r_grid, n_theta)]
        stat = scan_levy_spread(fam, seed=scan_seed)
        floor = scan_noise_floor(fam[0], seed=scan_seed)
        scan = {"max_pairwise": stat, "noise_floor": floor,
                "pass": stat <= 2.0 * floor}
    return {
        "raw_moments": raw,
        "normalized_moments": normed,
        "projection_scan": scan,
        "warnings": warnings,
        "pass": normed["pass"] and (scan is None or scan["pass"]),
    }
