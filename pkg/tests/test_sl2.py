import numpy as np

from horolab import sl2


def test_generator_brackets_exact():
    X = sl2.generator_matrix("X")
    U = sl2.generator_matrix("U")
    V = sl2.generator_matrix("V")
    assert np.array_equal(X @ U - U @ X, U)
    assert np.array_equal(X @ V - V @ X, -V)
    assert np.array_equal(U @ V - V @ U, 2.0 * X)


def test_flow_matrices_are_exponentials():
    t = 0.73
    assert np.allclose(sl2.flow_matrix(sl2.GEODESIC, t),
                       np.diag([np.exp(t / 2.0), np.exp(-t / 2.0)]))
    assert np.array_equal(sl2.flow_matrix(sl2.STABLE, t),
                          np.array([[1.0, t], [0.0, 1.0]]))
    assert np.array_equal(sl2.flow_matrix(sl2.UNSTABLE, t),
                          np.array([[1.0, 0.0], [t, 1.0]]))


def test_flow_group_property():
    rng = np.random.default_rng(3)
    for kind in (sl2.GEODESIC, sl2.STABLE, sl2.UNSTABLE):
        s, t = rng.uniform(-2, 2, 2)
        a = sl2.flow_matrix(kind, s) @ sl2.flow_matrix(kind, t)
        assert np.allclose(a, sl2.flow_matrix(kind, s + t), atol=1e-14)


def test_geodesic_renormalizes_stable_horocycle():
    rng = np.random.default_rng(7)
    t = rng.uniform(-3, 3, 500)
    s = rng.uniform(-3, 3, 500)
    x = sl2.flow(sl2.UNSTABLE, rng.uniform(-1, 1, 500),
                 sl2.flow(sl2.GEODESIC, rng.uniform(-1, 1, 500)))
    lhs = sl2.flow(sl2.GEODESIC, t, sl2.flow(sl2.STABLE, s, x))
    rhs = sl2.flow(sl2.STABLE, np.exp(-t) * s, sl2.flow(sl2.GEODESIC, t, x))
    assert np.max(sl2.proj_distance(lhs, rhs)) <= 1e-10


def test_inverse_is_adjugate():
    rng = np.random.default_rng(11)
    g = sl2.flow(sl2.STABLE, rng.uniform(-2, 2, 20),
                 sl2.flow(sl2.GEODESIC, rng.uniform(-2, 2, 20)))
    prod = g @ sl2.inverse(g)
    assert np.max(np.abs(prod - np.eye(2))) < 1e-14


def test_canonicalize_fixes_projective_sign():
    g = np.array([[-2.0, 0.3], [0.1, -0.515]])
    g = sl2.renormalize(g)
    c = sl2.canonicalize(g)
    assert c[0, 0] > 0
    assert sl2.proj_distance(g, -g) == 0.0


def test_disk_halfplane_inverse_maps():
    rng = np.random.default_rng(5)
    z = 0.8 * (rng.random(50) + 1j * rng.random(50) - 0.5 - 0.5j)
    w = sl2.disk_to_halfplane(z)
    assert np.all(w.imag > 0)
    assert np.allclose(sl2.halfplane_to_disk(w), z, atol=1e-13)


def test_mobius_action_of_flows():
    # the geodesic flow pushes the origin along the real axis
    t = 1.3
    z = sl2.mobius(sl2.flow_matrix(sl2.GEODESIC, t), 0j)
    assert abs(z - np.tanh(t / 2.0)) < 1e-14


def test_hyperbolic_distance_axioms():
    rng = np.random.default_rng(13)
    z, w, v = (0.9 * np.sqrt(rng.random(3)) * np.exp(2j * np.pi * rng.random(3)))
    dzw = sl2.hyperbolic_distance(z, w)
    assert dzw >= 0
    assert abs(sl2.hyperbolic_distance(w, z) - dzw) < 1e-12
    assert dzw <= sl2.hyperbolic_distance(z, v) + sl2.hyperbolic_distance(v, w) + 1e-12
    assert sl2.hyperbolic_distance(z, z) == 0.0
    assert abs(sl2.dist0(np.tanh(0.7 / 2.0)) - 0.7) < 1e-13


def test_mobius_is_an_isometry():
    rng = np.random.default_rng(17)
    g = sl2.flow(sl2.GEODESIC, 0.9, sl2.flow(sl2.STABLE, -0.4))
    z = 0.7 * (rng.random(10) - 0.5) + 0.6j * (rng.random(10) - 0.5)
    w = 0.7 * (rng.random(10) - 0.5) + 0.6j * (rng.random(10) - 0.5)
    assert np.allclose(sl2.hyperbolic_distance(sl2.mobius(g, z), sl2.mobius(g, w)),
                       sl2.hyperbolic_distance(z, w), atol=1e-11)
