import warnings

import numpy as np
import pytest

from holokit.disc import Mobius, poincare_distance
from holokit.domains import Annulus, NormBall, Polydisc, parse_domain, unit_disc
from holokit.errors import OutsideDomainError
from holokit.expr import parse_map
from holokit.metrics import (
    NonConvergenceWarning,
    caratheodory_inf_metric,
    caratheodory_lower,
    chain_upper,
    distance_bracket,
    integrated_distance,
    kobayashi_inf_metric,
    kobayashi_upper,
)

H = NormBall("h", 2)
BIDISC = Polydisc((1, 1))
SQUARE = parse_domain("domain{|x|<1; |y|<1; convex}")


def test_disc_pair():
    lo, ell = caratheodory_lower(unit_disc(), [0], [0.5])
    assert lo == pytest.approx(np.arctanh(0.5), abs=1e-14)
    assert ell.distance([0], [0.5]) == pytest.approx(lo)


def test_ball_from_origin_linear_disc():
    bound, disc, s = kobayashi_upper(H, [0, 0], [0.3, 0.4])
    assert bound == pytest.approx(np.arctanh(0.5), abs=1e-14)
    assert np.allclose(disc(s), [0.3, 0.4]) and np.allclose(disc(0), [0, 0])
    assert np.allclose(disc(0.5j), 0.5j * np.array([0.6, 0.8]))


def test_bidisc_bracket_closes():
    est = distance_bracket(BIDISC, [0, 0], [0.5, 0.25])
    assert est.lower == pytest.approx(np.arctanh(0.5), abs=1e-4)
    assert est.upper == pytest.approx(np.arctanh(0.5), abs=1e-4)
    assert est.converged


def test_equal_points():
    est = distance_bracket(H, [0.1, 0.2], [0.1, 0.2])
    assert est.lower == 0 and est.upper == 0


def test_off_origin_ball_converges(rng):
    for z, w in zip(H.sample(5, seed=1), H.sample(5, seed=2)):
        est = distance_bracket(H, z, w)
        assert est.gap < 1e-9


def test_infinitesimal_examples():
    v = np.array([0.3, -0.4j])
    assert caratheodory_inf_metric(H, [0, 0], v) == pytest.approx(0.5)
    assert kobayashi_inf_metric(H, [0, 0], v) == pytest.approx(0.5)
    assert caratheodory_inf_metric(H, [0.1, 0], [0, 0]) == 0
    assert caratheodory_inf_metric(unit_disc(), [0.5], [1]) == pytest.approx(4 / 3)
    assert kobayashi_inf_metric(unit_disc(), [0.5], [1]) == pytest.approx(4 / 3)


def test_general_convex_domain_matches_model():
    """The square given by inequalities has no transport; the searched discs must still close."""
    for z, w in (([0, 0], [0.5, 0.25]), ([0.1, 0.2j], [-0.3, 0.4])):
        est = distance_bracket(SQUARE, z, w)
        exact = distance_bracket(BIDISC, z, w).lower
        assert est.lower <= exact + 1e-9 <= est.upper + 2e-9
        assert est.gap < 1e-4
    lo = caratheodory_inf_metric(SQUARE, [0.2, 0.1], [1, 0.5])
    hi = kobayashi_inf_metric(SQUARE, [0.2, 0.1], [1, 0.5])
    assert lo <= hi + 1e-9 and hi - lo < 1e-3


def test_searched_disc_is_inside():
    bound, disc, s = kobayashi_upper(SQUARE, [0.1, 0.2j], [-0.3, 0.4])
    zeta = np.exp(2j * np.pi * np.arange(4096) / 4096)
    assert np.all(SQUARE.contains_many(disc.evaluate_many(zeta)))
    assert np.allclose(disc(s), [-0.3, 0.4], atol=1e-10)


def test_bracket_soundness_p_balls():
    for p in (1, 3):
        B = NormBall(p, 2)
        Z = B.sample(6, seed=p)
        for z, w in zip(Z[:3], Z[3:]):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NonConvergenceWarning)
                est = distance_bracket(B, z, w)
            assert est.lower <= est.upper + 1e-9


def test_norm_ball_distance_depends_on_norm_only(rng):
    for p in ("h", 3, "sup"):
        B = NormBall(p, 2)
        z = B.sample(1, seed=9)[0]
        U = np.diag(np.exp(2j * np.pi * rng.random(2)))
        assert distance_bracket(B, [0, 0], U @ z).lower == pytest.approx(distance_bracket(B, [0, 0], z).lower, abs=1e-10)


def test_mobius_isometry_on_disc(rng):
    m = Mobius(0.3 - 0.4j, 1j)
    for z, w in 0.8 * np.exp(2j * np.pi * rng.random((5, 2))):
        a = distance_bracket(unit_disc(), [z], [w])
        b = distance_bracket(unit_disc(), [m(z)], [m(w)])
        assert a.lower == pytest.approx(b.lower, abs=1e-9)


def test_contraction_under_holomorphic_map():
    # the coordinate projection maps the ball into the disc
    f = parse_map("z0", 2)
    for z, w in zip(H.sample(5, seed=3), H.sample(5, seed=4)):
        lo = distance_bracket(unit_disc(), f(z), f(w)).lower
        assert lo <= distance_bracket(H, z, w).upper + 1e-6


def test_widening_lowers_the_bound():
    z, w = [0.1, 0.2], [0.3, -0.4]
    small = distance_bracket(Polydisc((1, 1)), z, w).lower
    big = distance_bracket(Polydisc((2, 2)), z, w).lower
    assert big <= small + 1e-12


def test_integrated_distance():
    assert integrated_distance(unit_disc(), [0], [0.5]) == pytest.approx(np.arctanh(0.5), abs=1e-6)
    assert integrated_distance(unit_disc(), [0.2], [0.2]) == 0
    z = np.array([0.3, 0.4j])
    assert integrated_distance(H, [0, 0], z) == pytest.approx(np.arctanh(0.5), abs=1e-5)
    for z, w in zip(unit_disc().sample(5, seed=1), unit_disc().sample(5, seed=2)):
        assert integrated_distance(unit_disc(), z, w) == pytest.approx(poincare_distance(z[0], w[0]), abs=1e-6)


def test_integrated_distance_needs_waypoints():
    with pytest.raises(OutsideDomainError):
        integrated_distance(Annulus(2), [1], [-1], waypoints=[])


def test_annulus_bracket_is_valid():
    est = distance_bracket(Annulus(2), [1], [-1])
    true_k = np.pi**2 / (4 * np.log(2))
    assert est.lower <= true_k <= est.upper
    assert est.upper_kind == "chain"


def test_chain_upper_on_disc():
    bound, chain = chain_upper(unit_disc(), [0], [0.5])
    assert bound >= np.arctanh(0.5) - 1e-12
    assert np.allclose(chain.points[0], [0]) and np.allclose(chain.points[-1], [0.5])


def test_outside_points_rejected():
    with pytest.raises(OutsideDomainError):
        distance_bracket(unit_disc(), [0], [1.2])


def test_far_pair_falls_back_to_split_segment():
    z, w = SQUARE.sample(4, seed=0)[[0, 2]]
    exact = distance_bracket(BIDISC, z, w).lower
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        est = distance_bracket(SQUARE, z, w)
    assert est.upper_kind == "split"
    assert est.lower <= exact + 1e-9 <= est.upper
    pts = est.upper_witness.points
    assert np.allclose(pts[0], z) and np.allclose(pts[-1], w)
    assert est.upper == pytest.approx(est.upper_witness.steps.sum())
