import numpy as np
import pytest

from horolab import renorm as rn
from horolab.repmodel import CasimirParameter


def decaying_forcing(t_max=10.0, n=1025):
    decay = lambda u: np.exp(-u)
    return rn.Forcing.from_callable(decay, decay, t_max, n=n,
                                    tail_plus=(0.0, 1.0), tail_minus=(0.0, 1.0))


def test_forcing_validation():
    with pytest.raises(ValueError):
        rn.Forcing(np.array([1.0, 2.0]), np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        rn.Forcing(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2))


def test_forcing_evaluation_and_tail():
    f = decaying_forcing(t_max=3.0)
    assert abs(f(1.3)[0] - np.exp(-1.3)) < 1e-10
    assert abs(f(7.0)[1] - np.exp(-7.0)) < 1e-15


def test_forcing_shift_reanchors_tail():
    f = decaying_forcing(t_max=4.0)
    g = f.shifted(1.5)
    assert abs(g(0.7)[0] - np.exp(-2.2)) < 1e-9
    assert abs(g.tail_plus[1] - np.exp(-1.5)) < 1e-15


def test_forcing_json_roundtrip():
    f = decaying_forcing(t_max=2.0, n=17)
    g = rn.Forcing.from_json(f.to_json())
    assert np.array_equal(f.times, g.times)
    assert np.array_equal(f.rho_plus, g.rho_plus)
    assert f.to_json() == g.to_json()


def test_evolve_without_forcing_is_exponential():
    p = CasimirParameter.from_nu(0.5)
    state = rn.CocycleState(1.0, 2.0, p)
    ev = rn.evolve(state, rn.Forcing.zero(6.0), 3.0)
    lp, lm = state.eigenvalues()
    assert abs(ev.alpha_plus - np.exp(lp * 3.0)) < 1e-12
    assert abs(ev.alpha_minus - 2.0 * np.exp(lm * 3.0)) < 1e-12


def test_jordan_propagator_shape():
    p = CasimirParameter.from_nu(0.0)
    state = rn.CocycleState(1.0, 1.0, p)
    assert state.jordan
    ev = rn.evolve(state, rn.Forcing.zero(6.0), 2.0)
    expect = np.exp(1.0) * np.array([1.0 - 1.0, 1.0])  # e^{t/2} [[1,-t/2],[0,1]]
    assert abs(ev.alpha_plus - expect[0]) < 1e-12
    assert abs(ev.alpha_minus - np.exp(1.0)) < 1e-12


def test_renormalized_limit_closed_form():
    p = CasimirParameter.from_nu(0.5)
    state = rn.CocycleState(0.25, 0.25, p)
    bp, bm, err = rn.renormalized_limit(state, decaying_forcing())
    assert abs(bp - (0.25 + 2.0 / 2.5)) < 1e-9
    assert abs(bm - (0.25 + 2.0 / 3.5)) < 1e-9
    assert err >= 0


def test_jordan_limit_closed_form():
    p = CasimirParameter.from_nu(0.0)
    forcing = decaying_forcing()
    zeroed = rn.Forcing(forcing.times, forcing.rho_plus,
                        np.zeros_like(forcing.rho_minus), (0.0, 1.0), (0.0, 0.0))
    bp, bm, _ = rn.renormalized_limit(rn.CocycleState(0.0, 0.0, p), zeroed)
    assert abs(bp - 2.0 / 3.0) < 1e-9
    assert abs(bm) < 1e-9


def test_renormalization_consistency_identity():
    for nu in (0.5, 0.0):
        p = CasimirParameter.from_nu(nu)
        state = rn.CocycleState(0.3, -0.1, p)
        forcing = decaying_forcing()
        if nu == 0.0:
            ref = rn.renormalized_limit(state, forcing)
            for t in (0.0, 1.0, 2.5):
                ev = rn.evolve(state, forcing, t)
                lim = rn.renormalized_limit(ev, forcing.shifted(t))
                prop = rn._jordan_propagator(t)
                back = np.linalg.solve(prop, [lim[0], lim[1]])
                assert abs(back[0] - ref[0]) < 1e-9
                assert abs(back[1] - ref[1]) < 1e-9
        else:
            lp, lm = state.eigenvalues()
            bp, bm, _ = rn.renormalized_limit(state, forcing)
            for t in (0.0, 1.0, 2.5):
                ev = rn.evolve(state, forcing, t)
                bp_t, bm_t, _ = rn.renormalized_limit(ev, forcing.shifted(t))
                assert abs(np.exp(-lp * t) * bp_t - bp) < 1e-9
                assert abs(np.exp(-lm * t) * bm_t - bm) < 1e-9


def test_divergent_tail_rejected():
    p = CasimirParameter.from_nu(3.0)  # eigenvalue (1-nu)/2 = -1 < 0
    state = rn.CocycleState(1.0, 1.0, p)
    with pytest.raises(rn.DivergentTailError):
        rn.renormalized_limit(state, decaying_forcing(t_max=2.0))


def test_tail_bound_dominates_convergence_gap():
    p = CasimirParameter.from_nu(0.5)
    state = rn.CocycleState(0.25, 0.25, p)
    forcing = decaying_forcing()
    bp, bm, _ = rn.renormalized_limit(state, forcing)
    lp, lm = state.eigenvalues()
    for t in np.linspace(0.0, 5.0, 6):
        ev = rn.evolve(state, forcing, float(t))
        gap = max(abs(bp - ev.alpha_plus * np.exp(-lp * t)),
                  abs(bm - ev.alpha_minus * np.exp(-lm * t)))
        bound = min(rn.tail_remainder_bound(forcing, float(t), lp),
                    rn.tail_remainder_bound(forcing, float(t), lm))
        assert gap <= bound + 1e-12


def test_spectral_observable_roundtrip_and_conjugation():
    p = CasimirParameter.from_mu(1.0)
    so = rn.SpectralObservable(((p, 0.5 + 0.2j, 0.5 - 0.2j),), conjugation=True)
    back = rn.SpectralObservable.from_json(so.to_json())
    assert back.conjugation
    assert abs(back.entries[0][1] - (0.5 + 0.2j)) < 1e-15
    assert abs(so.frequencies()[0] - np.sqrt(3.0)) < 1e-14
    with pytest.raises(ValueError):
        rn.SpectralObservable(((p, 0.5, 0.4),), conjugation=True)


def test_cocycle_expand_conjugation_is_real():
    p = CasimirParameter.from_mu(1.0)
    so = rn.SpectralObservable(((p, 0.5 + 0.2j, 0.5 - 0.2j),), conjugation=True)
    rng = np.random.default_rng(3)
    beta = rng.normal(size=8) + 1j * rng.normal(size=8)
    vals = rn.cocycle_expand(so, {0: beta})
    assert np.max(np.abs(vals.imag)) < 1e-14
    with pytest.raises(KeyError):
        rn.cocycle_expand(so, {})


def test_holder_check_flags_violations():
    good = [(0.1, rn.ArcStats(1.0, 0.5, 1.0)), (0.2, rn.ArcStats(0.0, 1.0, 0.0))]
    rep = rn.holder_check(good, 0.5, 1.0)
    assert rep["pass"]
    bad = good + [(100.0, rn.ArcStats(0.0, 0.01, 0.0))]
    rep = rn.holder_check(bad, 0.5, 1.0)
    assert not rep["pass"]
    assert rep["worst_index"] == 2
    # the log-corrected gauge exceeds the plain square root near zero
    rep_log = rn.holder_check(bad, 0.5, 1.0, log_corrected=True)
    assert rep_log["max_ratio"] < rep["max_ratio"]


def test_synthetic_field_second_order_structure():
    rng = np.random.default_rng(19)
    A, B, theta = 2.0, 0.5, 0.7
    beta = rn.synthetic_cocycle_field(200000, A, B, theta, rng)
    assert abs(np.mean(np.abs(beta) ** 2) - (A**2 + B**2)) < 0.05
    target = np.exp(-2j * theta) * (A**2 - B**2)
    assert abs(np.mean(beta**2) - target) < 0.05
