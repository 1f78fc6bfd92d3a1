import numpy as np
import pytest

from holokit.disc import Mobius, poincare_distance
from holokit.domains import Annulus, NormBall, Polydisc
from holokit.errors import ConvexityRequiredError, NotSelfMapError, PreconditionError
from holokit.expr import parse_map
from holokit.geodesics import (
    complex_extreme_test,
    default_probe_pairs,
    fix_set_on_ball,
    geodesic_ball_origin,
    geodesic_defect,
    geodesic_search,
    max_principle_defect,
    retraction_from_geodesic,
    scalar_max_principle_defect,
)
from holokit.metrics import AnalyticDisc, distance_bracket

H = NormBall("h", 2)
SUP = NormBall("sup", 2)
BIDISC = Polydisc((1, 1))


def linear_disc(v):
    return AnalyticDisc(np.vstack([np.zeros(len(v)), v]).astype(complex))


def test_linear_ball_geodesic():
    cand = geodesic_ball_origin(H, [0.6, 0.8])
    assert cand.verified and cand.defect < 1e-6
    with pytest.raises(PreconditionError):
        geodesic_ball_origin(SUP, [1, 0])


def test_bidisc_graph_geodesic():
    cand = geodesic_defect(linear_disc([1, 0.5]), BIDISC, tol=1e-4)
    assert cand.verified
    bent = AnalyticDisc(np.array([[0, 0], [0, 0], [0.6, 0.8]], dtype=complex))
    assert not geodesic_defect(bent, H).verified


def test_disc_leaving_domain_refused():
    with pytest.raises(NotSelfMapError):
        geodesic_defect(linear_disc([1, 1]), H)


def test_reparametrization_invariance():
    m = Mobius(0.3 + 0.2j, np.exp(0.7j))
    for disc, d in ((linear_disc([0.6, 0.8]), H), (linear_disc([1, 0.5]), BIDISC)):
        a = geodesic_defect(disc, d).defect
        b = geodesic_defect(disc.reparametrize(m), d).defect
        assert abs(a - b) < 2e-6


def test_search_on_bidisc():
    cand = geodesic_search(BIDISC, [0, 0], [0.5, 0.25])
    assert cand.distance == pytest.approx(np.arctanh(0.5), abs=1e-4)
    assert np.allclose(cand.disc(cand.parameter), [0.5, 0.25], atol=1e-10)
    with pytest.raises(ConvexityRequiredError):
        geodesic_search(Annulus(2), [1], [-1])


def test_uniqueness_shadow_on_ball(rng):
    """A searched geodesic through 0 tangent to v agrees with zeta v after normalisation."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    cand = geodesic_search(H, [0, 0], 0.5 * v)
    disc = cand.disc
    c = disc(0)
    assert np.allclose(c, 0, atol=1e-12)
    # normalise the parametrisation so that the derivative at 0 is a positive multiple of v
    h = 1e-5
    deriv = (disc(h) - disc(-h)) / (2 * h)
    lam = np.vdot(v, deriv)
    probe = 0.7 * np.exp(2j * np.pi * np.arange(16) / 16)
    for zeta in probe:
        assert np.linalg.norm(disc(zeta * np.conj(lam) / abs(lam)) - zeta * v) < 1e-4


def test_retraction_from_geodesic():
    cand = geodesic_defect(linear_disc([1, 0.5]), BIDISC, tol=1e-4)
    rho = retraction_from_geodesic(BIDISC, cand)
    assert np.allclose(rho([0.3, 0.1]), [0.3, 0.15])
    image = [cand.disc(z) for z in 0.6 * np.exp(2j * np.pi * np.arange(5) / 5)]
    for p in image:
        assert np.allclose(rho(p), p, atol=1e-10)
    for zeta, eta in default_probe_pairs(4):
        est = distance_bracket(BIDISC, cand.disc(zeta), cand.disc(eta))
        assert abs(est.lower - poincare_distance(zeta, eta)) < 1e-4
    ball = retraction_from_geodesic(H, geodesic_ball_origin(H, [1, 0]))
    assert np.allclose(ball([0.3, 0.4]), [0.3, 0])


def test_extreme_distinguishes_balls(rng):
    for x in rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2)):
        assert complex_extreme_test(H, x / np.linalg.norm(x)).is_extreme
    rep = complex_extreme_test(SUP, [1, 0])
    assert not rep.is_extreme and rep.slack >= -1e-9
    assert complex_extreme_test(SUP, [1, 1]).is_extreme
    assert complex_extreme_test(NormBall(1, 2), [0.5, 0.5]).is_extreme
    with pytest.raises(PreconditionError):
        complex_extreme_test(H, [0.5, 0])


def test_max_principle():
    assert max_principle_defect(parse_map("0.5*z0, 0.3*z0^2", 1), H) <= 1e-12
    assert scalar_max_principle_defect(parse_map("z0^3", 1)) <= 1e-12


def test_fixed_set_on_ball():
    rep = fix_set_on_ball(parse_map("z0, z1/2", 2), H)
    assert rep.verified and rep.dim == 1
    rep = fix_set_on_ball(parse_map("z1, z0", 2), H)
    assert rep.verified and rep.dim == 1
    with pytest.raises(PreconditionError):
        fix_set_on_ball(parse_map("z0, z1/2", 2), SUP)
    with pytest.raises(PreconditionError):
        fix_set_on_ball(parse_map("z0 + 0.1, z1", 2), H)
