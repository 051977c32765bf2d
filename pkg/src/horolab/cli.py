"""Batch experiment driver: seeded subcommands that emit plot-ready CSV
artifacts plus a machine-readable summary.json.

Exit codes: 0 all summary criteria pass, 1 a criterion failed, 2
configuration or runtime error.  Diagnostics go to standard error only;
artifacts never mix with logs.  Re-running any subcommand with the same
config byte-reproduces every artifact.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np


def write_csv(path, header, rows):
    """RFC-4180 style CSV: header row, '.' decimals, floats at 17
    significant digits (round-trip exact)."""

    def fmt(v):
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return "%.17g" % v
        if isinstance(v, (complex, np.complexfloating)):
            return "%.17g%+.17gj" % (v.real, v.imag)
        return str(v)

    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def gate(criterion, value, threshold, passed=None):
    """Summary row; by default the gate is value <= threshold."""
    if passed is None:
        passed = bool(value <= threshold)
    return {"criterion": criterion, "value": float(value),
            "threshold": float(threshold), "pass": bool(passed)}


def write_summary(path, rows):
    with open(path, "w") as f:
        json.dump(rows, f, sort_keys=True, indent=2)
        f.write("\n")


def _parse_floats(text):
    vals = [float(x) for x in str(text).split(",") if x.strip()]
    if not vals:
        raise ValueError("empty grid")
    return vals


def _parse_complexes(text):
    vals = [complex(x) for x in str(text).split(",") if x.strip()]
    if not vals:
        raise ValueError("empty grid")
    return vals


class _Resolver:
    """Flag value, else flat dotted config key, else default."""

    def __init__(self, args, config):
        self.args = args
        self.config = config
        self.sub = args.subcommand

    def get(self, name, default=None):
        v = getattr(self.args, name.replace("-", "_"), None)
        if v is not None:
            return v
        for key in (f"{self.sub}.{name}", name):
            if key in self.config:
                return self.config[key]
        return default


def _cmd_flow_check(res, out):
    from . import sl2, surface

    seed = int(res.get("seed"))
    n = int(res.get("samples", 1000))
    rng = surface.rng_for(seed)

    lie = max(
        np.max(np.abs(
            sl2.generator_matrix("X") @ sl2.generator_matrix("U")
            - sl2.generator_matrix("U") @ sl2.generator_matrix("X")
            - sl2.generator_matrix("U"))),
        np.max(np.abs(
            sl2.generator_matrix("X") @ sl2.generator_matrix("V")
            - sl2.generator_matrix("V") @ sl2.generator_matrix("X")
            + sl2.generator_matrix("V"))),
        np.max(np.abs(
            sl2.generator_matrix("U") @ sl2.generator_matrix("V")
            - sl2.generator_matrix("V") @ sl2.generator_matrix("U")
            - 2.0 * sl2.generator_matrix("X"))),
    )

    ts = rng.uniform(-3.0, 3.0, n)
    ss = rng.uniform(-3.0, 3.0, n)
    z = surface.sample_disk_points(rng, n, 0.9)
    x = surface.frame_element(z, rng.random(n) * 2.0 * np.pi)
    lhs = sl2.flow(sl2.GEODESIC, ts, sl2.flow(sl2.STABLE, ss, x))
    rhs = sl2.flow(sl2.STABLE, np.exp(-ts) * ss, sl2.flow(sl2.GEODESIC, ts, x))
    resid = sl2.proj_distance(lhs, rhs)

    write_csv(os.path.join(out, "flow_check.csv"),
              ["t", "s", "residual"],
              list(zip(ts, ss, resid)))
    return [
        gate("lie_bracket_residual", lie, 1e-12),
        gate("flow_commutation_residual", float(np.max(resid)), 1e-10),
    ]


def _cmd_surface_check(res, out):
    from . import sl2, surface

    seed = int(res.get("seed"))
    n_area = int(res.get("area-samples", 100000))
    n_red = int(res.get("reduce-samples", 1000))
    grp = surface.bolza_group()

    area, area_se = surface.octagon_area_mc(grp, n_area, seed)
    rng = surface.rng_for(seed, 1)
    z = surface.sample_disk_points(rng, n_red, 0.999)
    g = surface.frame_element(z, rng.random(n_red) * 2.0 * np.pi)
    red = surface.reduce_batch(grp, g)
    red2 = surface.reduce_batch(grp, red)
    idem = float(np.max(sl2.proj_distance(red, red2)))

    write_csv(os.path.join(out, "surface_check.csv"),
              ["quantity", "value", "stderr"],
              [("relator_residual", grp.relator_residual(), 0.0),
               ("area_mc", area, area_se),
               ("reduction_idempotency", idem, 0.0)])
    return [
        gate("relator_residual", grp.relator_residual(), 1e-9),
        gate("area_relative_error", abs(area - 4.0 * np.pi) / (4.0 * np.pi), 0.01),
        gate("reduction_idempotency", idem, 1e-9),
    ]


def _cmd_ergodic_scan(res, out):
    from . import ergodic, surface

    seed = int(res.get("seed"))
    Ts = _parse_floats(res.get("T", "50,100,200,400,800"))
    n = int(res.get("n", 100))
    h = float(res.get("h", 1.0 / 64.0))
    grp = surface.bolza_group()
    obs = surface.make_observable(grp, center=0.2 + 0.1j, radius=0.5)

    curve, ints = ergodic.variance_curve(obs, grp, Ts, n, seed, h=h)
    ergodic.write_variance_csv(curve, os.path.join(out, "variance.csv"))
    medians = np.median(np.abs(ints) / np.asarray(Ts)[:, None], axis=1)
    write_csv(os.path.join(out, "birkhoff_medians.csv"),
              ["T", "median_abs_average"],
              list(zip(Ts, medians)))

    rows = [gate("birkhoff_median_decreasing", float(np.max(np.diff(medians))), 0.0)]
    if len(Ts) >= 3:
        exp, se = ergodic.growth_exponent(curve, seed=seed)
        rows.append(gate("growth_exponent_deviation", abs(exp - 0.5), 0.1))
        rows.append(gate("growth_exponent_stderr", se, 0.05))
        write_csv(os.path.join(out, "growth_exponent.csv"),
                  ["exponent", "stderr"], [(exp, se)])
    return rows


def _cmd_model_asymptotics(res, out):
    from . import repmodel as rm

    nus = _parse_complexes(res.get("nu", "0.5"))
    Ts = sorted(_parse_floats(res.get("T", "10,100")))
    params = [rm.CasimirParameter.from_nu(nu) for nu in nus]

    i0 = rm.I_nu(rm.CasimirParameter.from_nu(0.0))
    rows, csv_rows = [], []
    jt_max = 0.0
    worst_increase = -np.inf
    finals = []
    for p in params:
        prev = None
        for T in Ts:
            _, _, jres = rm.J_T(p, T)
            jres = 0.0 if jres is None else jres
            jt_max = max(jt_max, jres)
            ares = rm.asymptotic_residual(p, T) if T > 1 else np.nan
            csv_rows.append((p.nu.real, p.nu.imag, T, ares, jres))
            if prev is not None and np.isfinite(ares):
                worst_increase = max(worst_increase, ares - prev)
            if np.isfinite(ares):
                prev = ares
        finals.append(prev)
    write_csv(os.path.join(out, "asymptotics.csv"),
              ["nu_re", "nu_im", "T", "asymptotic_residual", "jt_identity_residual"],
              csv_rows)

    rows.append(gate("i_nu_at_zero", abs(i0 - 2.0), 1e-10))
    rows.append(gate("jt_identity_residual", jt_max, 1e-8))
    if len(Ts) >= 2:
        rows.append(gate("asymptotic_residual_decreasing", worst_increase, 0.0))
    if max(Ts) >= 1000:
        rows.append(gate("asymptotic_residual_final", max(finals), 0.05))
    return rows


def _cmd_renorm(res, out):
    from . import renorm as rn
    from .repmodel import CasimirParameter

    nu = complex(res.get("nu", "0.5"))
    t_max = float(res.get("t-max", 5.0))
    n_grid = int(res.get("grid-n", 11))
    p = CasimirParameter.from_nu(nu)
    pj = CasimirParameter.from_nu(0.0)

    # exponentially settling forcing with closed-form limits
    decay = lambda u: np.exp(-u)
    forcing = rn.Forcing.from_callable(decay, decay, t_max + 5.0, n=1025,
                                       tail_plus=(0.0, 1.0), tail_minus=(0.0, 1.0))
    a0 = complex(res.get("alpha0", "0.25"))
    state = rn.CocycleState(a0, a0, p)
    bp, bm, err = rn.renormalized_limit(state, forcing)
    closed = max(abs(bp - (a0 + 2.0 / (3.0 - nu))),
                 abs(bm - (a0 + 2.0 / (3.0 + nu))))

    jstate = rn.CocycleState(0.0, 0.0, pj)
    jforce = rn.Forcing(forcing.times, np.exp(-forcing.times),
                        np.zeros_like(forcing.times), (0.0, 1.0), (0.0, 0.0))
    jb, _, _ = rn.renormalized_limit(jstate, jforce)
    jordan_closed = abs(jb - 2.0 / 3.0)

    lp, lm = state.eigenvalues()
    csv_rows = []
    cons_max = 0.0
    env_violation = -np.inf
    for t in np.linspace(0.0, t_max, n_grid):
        ev = rn.evolve(state, forcing, float(t))
        shifted = forcing.shifted(float(t))
        bp_t, bm_t, _ = rn.renormalized_limit(
            rn.CocycleState(ev.alpha_plus, ev.alpha_minus, p), shifted)
        cons = max(abs(np.exp(-lp * t) * bp_t - bp),
                   abs(np.exp(-lm * t) * bm_t - bm))
        cons_max = max(cons_max, float(cons))
        envelope = min(rn.tail_remainder_bound(forcing, float(t), lp),
                       rn.tail_remainder_bound(forcing, float(t), lm))
        conv = max(abs(bp - ev.alpha_plus * np.exp(-lp * t)),
                   abs(bm - ev.alpha_minus * np.exp(-lm * t)))
        env_violation = max(env_violation, float(conv - envelope))
        csv_rows.append((float(t), float(cons), float(conv), float(envelope)))
    write_csv(os.path.join(out, "renorm.csv"),
              ["t", "consistency_residual", "convergence_gap", "tail_bound"],
              csv_rows)

    stats = [(0.1 * (k + 1), rn.ArcStats(0.5, 0.1 * (k + 1), 0.3)) for k in range(5)]
    report = rn.holder_check(stats, 0.5, 10.0)
    return [
        gate("closed_form_limits", closed, 1e-9),
        gate("jordan_closed_form", jordan_closed, 1e-9),
        gate("consistency_identity", cons_max, 1e-9),
        gate("convergence_envelope", env_violation, 0.0),
        gate("holder_bound_ratio", report["max_ratio"], report["constant"],
             passed=report["pass"]),
    ]


def _limit_lab_json(path, payload):
    def default(o):
        if isinstance(o, (complex, np.complexfloating)):
            return [o.real, o.imag]
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        if isinstance(o, tuple):
            return list(o)
        raise TypeError(type(o).__name__)

    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True, indent=2, default=default)
        f.write("\n")


def _moment_csv(path, verdicts):
    rows = []
    for name, verdict in verdicts:
        for r in verdict["rows"]:
            rows.append((name, "".join(map(str, r["alpha"])),
                         "".join(map(str, r["beta"])),
                         r["estimate"].real, r["estimate"].imag,
                         r["stderr"], r["pass"]))
    write_csv(path, ["table", "alpha", "beta", "estimate_re", "estimate_im",
                     "stderr", "pass"], rows)


def _cmd_limit_lab(res, out):
    from . import distlab as dl, renorm as rn
    from .repmodel import CasimirParameter

    seed = int(res.get("seed"))
    preset = str(res.get("preset", "gaussian"))
    rng = np.random.Generator(np.random.Philox(key=(seed, 0)))

    if preset in ("gaussian", "stretched-gaussian"):
        n = int(res.get("n", 100000))
        z = (rng.normal(size=n) + 1j * rng.normal(size=n)) / np.sqrt(2.0)
        if preset == "stretched-gaussian":
            z = np.exp(1j * 0.7) * (1.6 * z.real + 1j * 0.5 * z.imag)
        r = dl.rot_invariance_test(z)
        _limit_lab_json(os.path.join(out, "limit_lab.json"), {
            "preset": preset,
            "raw_moments_pass": r["raw_moments"]["pass"],
            "normalized_moments_pass": r["normalized_moments"]["pass"],
            "projection_scan": r["projection_scan"],
            "pass": r["pass"],
        })
        _moment_csv(os.path.join(out, "moments.csv"),
                    [("raw", r["raw_moments"]), ("normalized", r["normalized_moments"])])
        scan = r["projection_scan"]
        rows = [gate("scan_spread_over_floor",
                     scan["max_pairwise"] / scan["noise_floor"], 2.0,
                     passed=scan["pass"])]
        if preset == "gaussian":
            rows.append(gate("raw_moments_vanish", 0.0 if r["raw_moments"]["pass"] else 1.0, 0.5))
            rows.append(gate("normalized_moments_vanish",
                             0.0 if r["normalized_moments"]["pass"] else 1.0, 0.5))
        else:
            rows.append(gate("raw_moments_rejected",
                             0.0 if not r["raw_moments"]["pass"] else 1.0, 0.5))
            rows.append(gate("normalized_moments_vanish",
                             0.0 if r["normalized_moments"]["pass"] else 1.0, 0.5))
        return rows

    if preset == "torus":
        n = int(res.get("n", 60000))
        pc = CasimirParameter.from_nu(0.4)
        beta = rn.synthetic_cocycle_field(n, 1.0, 0.0, 0.0, rng).real.astype(complex)
        so_c = rn.SpectralObservable(((pc, 0.7 + 0j, 0.7 - 0j),), conjugation=True)
        th16 = (np.arange(16) + 0.5) * 2.0 * np.pi / 16.0
        fam_c = [dl.torus_distribution(so_c, {0: beta}, theta=[th]) for th in th16]
        stat_c = dl.scan_levy_spread(fam_c, subsample=n)
        floor_c = dl.split_noise_floor(fam_c[0])

        p1 = CasimirParameter.from_mu(1.0)
        p2 = CasimirParameter.from_mu(2.5)
        f1 = rn.synthetic_cocycle_field(n, 2.0, 0.2, 0.3, rng)
        f2 = rn.synthetic_cocycle_field(n, 1.5, 0.1, 1.1, rng)
        so_p = rn.SpectralObservable(((p1, 0.8 + 0j, 0.8 - 0j),
                                      (p2, 0.5 + 0j, 0.5 - 0j)), conjugation=True)
        th8 = (np.arange(8) + 0.5) * 2.0 * np.pi / 8.0
        fam_p = [dl.torus_distribution(so_p, {0: f1, 1: f2}, theta=[a, b])
                 for a in th8 for b in th8]
        stat_p = dl.scan_levy_spread(fam_p, subsample=n)
        floor_p = dl.split_noise_floor(fam_p[0])

        write_csv(os.path.join(out, "torus_scan.csv"),
                  ["spectrum", "max_pairwise", "noise_floor"],
                  [("complementary", stat_c, floor_c),
                   ("principal", stat_p, floor_p)])
        _limit_lab_json(os.path.join(out, "limit_lab.json"), {
            "preset": preset,
            "complementary": {"max_pairwise": stat_c, "noise_floor": floor_c},
            "principal": {"max_pairwise": stat_p, "noise_floor": floor_p},
        })
        return [
            gate("complementary_theta_independence", stat_c / floor_c, 2.0),
            gate("principal_theta_dependence", stat_p / floor_p, 5.0,
                 passed=stat_p >= 5.0 * floor_p),
        ]

    raise ValueError(f"unknown preset {preset!r}")


_COMMANDS = {
    "flow-check": _cmd_flow_check,
    "surface-check": _cmd_surface_check,
    "ergodic-scan": _cmd_ergodic_scan,
    "model-asymptotics": _cmd_model_asymptotics,
    "renorm": _cmd_renorm,
    "limit-lab": _cmd_limit_lab,
}


def _build_parser():
    parser = argparse.ArgumentParser(prog="horolab")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, flags):
        sp = subs.add_parser(name)
        sp.add_argument("--config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int)
        for flag, kw in flags:
            sp.add_argument(flag, **kw)
        return sp

    add("flow-check", [("--samples", {"type": int})])
    add("surface-check", [("--area-samples", {"type": int}),
                          ("--reduce-samples", {"type": int})])
    add("ergodic-scan", [("--T", {}), ("--n", {"type": int}),
                         ("--h", {"type": float})])
    add("model-asymptotics", [("--nu", {}), ("--T", {})])
    add("renorm", [("--nu", {}), ("--t-max", {"type": float}),
                   ("--grid-n", {"type": int}), ("--alpha0", {})])
    add("limit-lab", [("--preset", {}), ("--n", {"type": int})])
    return parser


def run(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0

    config = {}
    if args.config:
        try:
            with open(args.config) as f:
                config = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            print(f"horolab: bad config: {e}", file=sys.stderr)
            return 2

    res = _Resolver(args, config)
    if res.get("seed") is None:
        print("horolab: --seed is required (no wall-clock default)", file=sys.stderr)
        return 2

    threads = res.get("threads", os.environ.get("HOROLAB_THREADS"))
    if threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(int(threads))

    out = str(res.get("out", "."))
    os.makedirs(out, exist_ok=True)
    try:
        rows = _COMMANDS[args.subcommand](res, out)
    except (ValueError, KeyError, OSError) as e:
        print(f"horolab: {e}", file=sys.stderr)
        return 2
    write_summary(os.path.join(out, "summary.json"), rows)
    for r in rows:
        verdict = "pass" if r["pass"] else "FAIL"
        print(f"{r['criterion']}: value {r['value']:.6g} vs "
              f"threshold {r['threshold']:.6g} [{verdict}]", file=sys.stderr)
    return 0 if all(r["pass"] for r in rows) else 1


def main():
    sys.exit(run())
