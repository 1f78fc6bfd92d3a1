"""End-to-end checks against closed forms; one PASS/FAIL line per criterion."""

import time

import numpy as np

from holokit.disc import Mobius, poincare_distance, schwarz_pick_defect
from holokit.domains import NormBall, Polydisc, Annulus, parse_domain, unit_disc
from holokit.expr import affine_map, parse_map
from holokit.fixed_points import (
    earle_hamilton,
    fix_components,
    fix_dimension,
    fix_scan,
    retract_to_fix,
)
from holokit.geodesics import complex_extreme_test, fix_set_on_ball, geodesic_defect, geodesic_search
from holokit.linearization import cartan_chart, circled_linear_part, iterate_average_chart
from holokit.metrics import AnalyticDisc, distance_bracket, integrated_distance


def _pairs(d, count, seed):
    Z = d.sample(2 * count, seed=seed)
    return list(zip(Z[:count], Z[count:]))


def _random_sphere(n, count, rng):
    V = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    return V / np.linalg.norm(V, axis=1)[:, None]


def test_01_poincare_closed_form(report):
    D = unit_disc()
    err_closed, err_path = 0.0, 0.0
    for r in np.arange(1, 10) / 10:
        err_closed = max(err_closed, abs(poincare_distance(0, r) - np.arctanh(r)))
        err_path = max(err_path, abs(integrated_distance(D, [0], [r]) - np.arctanh(r)))
    ok = err_closed < 1e-12 and err_path < 1e-6
    assert report(1, ok, f"closed form err {err_closed:.1e}, path length err {err_path:.1e}")


def test_02_ball_formula(report, rng):
    worst = 0.0
    for p in ("h", "sup"):
        B = NormBall(p, 2)
        for z in B.sample(20, seed=int(rng.integers(1 << 30))):
            target = np.arctanh(B.norm(z))
            est = distance_bracket(B, np.zeros(2), z)
            worst = max(worst, abs(est.lower - target), abs(est.upper - target))
    assert report(2, worst < 1e-4, f"max |bracket - omega(0,|z|)| = {worst:.1e} over 40 points")


def test_03_lempert_tightness(report):
    t0 = time.perf_counter()
    worst = 0.0
    for d in (unit_disc(), NormBall("h", 2), Polydisc((1, 1))):
        for z, w in _pairs(d, 10, seed=3):
            est = distance_bracket(d, z, w, degree=6, budget=20000)
            worst = max(worst, est.gap)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-3 and elapsed <= 60
    assert report(3, ok, f"max gap {worst:.1e}, {elapsed:.1f} s")


def test_04_chain_ordering(report):
    cases = []
    for d in (unit_disc(), NormBall("h", 2), Polydisc((1, 1))):
        cases += [(d, z, w) for z, w in _pairs(d, 3, seed=4)]
    for p in (1, 3, "sup"):
        B = NormBall(p, 2)
        cases += [(B, np.zeros(2), w) for w in B.sample(2, seed=5)]
    cases.append((NormBall(3, 2), np.array([0.1, 0.2]), np.array([0.3, -0.4])))
    worst = -np.inf
    for d, z, w in cases:
        est = distance_bracket(d, z, w)
        mid = integrated_distance(d, z, w)
        worst = max(worst, est.lower - mid - 1e-9, mid - est.upper - 1e-9)
    assert report(4, worst <= 0, f"{len(cases)} instances, worst violation {worst:.1e}")


def test_05_earle_hamilton(report, rng):
    tol = 1e-10
    failures = []
    for n, d in ((1, unit_disc()), (2, NormBall("h", 2))):
        for _ in range(10):
            A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            b = rng.normal(size=n) + 1j * rng.normal(size=n)
            total = rng.uniform(0.3, 0.9)
            share = rng.uniform(0.1, 0.9)
            A *= share * total / np.linalg.norm(A, 2)
            b *= (1 - share) * total / np.linalg.norm(b)
            f = affine_map(A, b)
            exact = np.linalg.solve(np.eye(n) - A, b)
            z0 = np.zeros(n, dtype=complex)
            res = earle_hamilton(f, d, z0, tol=tol)
            step0 = np.linalg.norm(f(z0) - z0)
            bound = res.predicted_iterations(tol, step0) + 5
            if np.linalg.norm(res.point - exact) >= tol or res.iterations > bound:
                failures.append((n, np.linalg.norm(res.point - exact), res.iterations, bound))
    assert report(5, not failures, f"20 affine maps, failures {failures}")


def test_06_annulus_fixed_points(report):
    scan = fix_scan(parse_map("1/z", 1), Annulus(2))
    pts = sorted(complex(p[0]).real for p, _ in scan)
    dims = [r.dim for _, r in scan]
    ok = len(scan) == 2 and np.allclose(pts, [-1, 1], atol=1e-10) and dims == [0, 0]
    assert report(6, ok, f"fixed points {np.round(pts, 12)}, dims {dims}")


def test_07_example_two_components(report):
    f = parse_map("1/x, x*y", 2)
    d = parse_domain("domain{1/2<|x|<2; |x*y^2|<1}")
    comps = fix_components(fix_scan(f, d), f, d)
    line = [c for c in comps if c["dim"] == 1]
    point = [c for c in comps if c["dim"] == 0]
    ok = (
        len(line) == 1
        and len(point) == 1
        and all(abs(p[0] - 1) < 1e-10 for p in line[0]["points"])
        and np.linalg.norm(point[0]["points"][0] - np.array([-1, 0])) < 1e-10
        and fix_dimension(f, [1, 0.3]).dim == 1
        and fix_dimension(f, [-1, 0]).dim == 0
    )
    assert report(7, ok, f"components (dim, size): {[(c['dim'], len(c['points'])) for c in comps]}")


def test_08_lambda_retraction(report):
    trace = []
    a = 0.4
    p = retract_to_fix(parse_map("-z", 1), unit_disc(), [a], trace=trace)
    err_trace = max(abs(q[0] - a * (1 - lam) / (1 + lam)) for lam, q in trace)
    rho = retract_to_fix(parse_map("x, -y", 2), NormBall("h", 2), [0.3, 0.4])
    err_ball = np.linalg.norm(rho - np.array([0.3, 0]))
    ok = err_trace < 1e-8 and abs(p[0]) < 1e-7 and err_ball < 1e-6
    assert report(8, ok, f"trace err {err_trace:.1e}, |limit| {abs(p[0]):.1e}, ball err {err_ball:.1e}")


def test_09_cartan_chart(report):
    chart = cartan_chart(parse_map("z0, z0^2", 2), [0, 0], probe_radius=0.05)
    assert report(9, chart.conjugacy_defect < 1e-9, f"conjugacy defect {chart.conjugacy_defect:.1e}")


def _conjugated_rotation(a, theta):
    lam = complex(np.exp(1j * theta))
    m = Mobius(a)
    rot = f"({lam.real!r} + {lam.imag!r}*i)*({m.to_text('z0')})"
    return parse_map(Mobius(-a).to_text("z0"), 1).compose(parse_map(rot, 1))


def test_10_iterate_averaging_rate(report):
    f = _conjugated_rotation(0.3, np.pi / 5)
    ns = (8, 16, 32, 64)
    defects = [iterate_average_chart(f, [0.3], n).conjugacy_defect for n in ns]
    ratios = [defects[i] / defects[i + 1] for i in range(3)]
    overall = defects[0] / defects[-1]
    ok = all(1 <= r <= 4 for r in ratios) and 4 <= overall <= 16
    assert report(10, ok, f"defects {np.array(defects)}, doubling ratios {np.round(ratios, 2)}, 8->64 ratio {overall:.2f}")


def test_11_circled_linear_part(report):
    swap = circled_linear_part(parse_map("z1, z0", 2), Polydisc((1, 1)))
    square = circled_linear_part(parse_map("z^2", 1), unit_disc())
    ok = (
        np.max(np.abs(swap.matrix - np.array([[0, 1], [1, 0]]))) < 1e-12
        and swap.defect < 1e-12
        and np.max(np.abs(square.matrix)) < 1e-12
        and square.defect > 0
    )
    assert report(11, ok, f"swap defect {swap.defect:.1e}, z^2 |L| {np.max(np.abs(square.matrix)):.1e} defect {square.defect:.2f}")


def test_12_extreme_points(report, rng):
    H = NormBall("h", 2)
    found = sum(not complex_extreme_test(H, x, seed=k).is_extreme for k, x in enumerate(_random_sphere(2, 50, rng)))
    sup = complex_extreme_test(NormBall("sup", 2), [1, 0])
    ok = found == 0 and not sup.is_extreme and sup.slack >= -1e-9 and np.linalg.norm(sup.witness) >= 1e-6
    assert report(12, ok, f"hermitian witnesses {found}/50, sup (1,0) witness {sup.witness} slack {sup.slack:.1e}")


def test_13_geodesics(report):
    H, P = NormBall("h", 2), Polydisc((1, 1))
    ball = geodesic_defect(AnalyticDisc(np.array([[0, 0], [0.6, 0.8]], dtype=complex)), H)
    bidisc = geodesic_defect(AnalyticDisc(np.array([[0, 0], [1, 0.5]], dtype=complex)), P, tol=1e-4)
    search = geodesic_search(P, [0, 0], [0.5, 0.25])
    err = abs(search.distance - np.arctanh(0.5))
    ok = ball.defect < 1e-6 and bidisc.verified and bidisc.defect < 1e-4 and err < 1e-4
    assert report(13, ok, f"ball defect {ball.defect:.1e}, bidisc defect {bidisc.defect:.1e}, search err {err:.1e}")


def test_14_fixed_set_on_ball(report):
    rep = fix_set_on_ball(parse_map("z0, z1/2", 2), NormBall("h", 2), samples=100)
    span_ok = rep.dim == 1 and abs(abs(rep.basis[0, 0]) - 1) < 1e-12
    ok = rep.verified and rep.residual < 1e-7 and span_ok
    assert report(14, ok, f"dim {rep.dim}, residual {rep.residual:.1e}, verified {rep.verified}")


def _random_mobius(rng, radius=0.9):
    a = radius * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
    return Mobius(complex(a), complex(np.exp(2j * np.pi * rng.random())))


def _random_self_map(rng, mobius_only):
    inner = parse_map(_random_mobius(rng).to_text("z0"), 1)
    outer = parse_map(_random_mobius(rng).to_text("z0"), 1)
    if mobius_only:
        return outer.compose(inner)
    deg = int(rng.integers(2, 5))
    c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
    c /= np.sum(np.abs(c)) * (1 + rng.uniform(0.01, 0.5))
    poly = " + ".join(f"({complex(ck).real!r} + {complex(ck).imag!r}*i)*z0^{k}" for k, ck in enumerate(c))
    return outer.compose(parse_map(poly, 1).compose(inner))


def test_15_schwarz_pick(report, rng):
    worst_any, worst_mob, weakest_other = np.inf, 0.0, np.inf
    for k in range(100):
        mobius_only = k < 30
        f = _random_self_map(rng, mobius_only)
        defects = []
        for _ in range(20):
            z, w = 0.95 * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2))
            defects.append(schwarz_pick_defect(f, z, w))
        worst_any = min(worst_any, min(defects))
        if mobius_only:
            worst_mob = max(worst_mob, max(np.abs(defects)))
        else:
            weakest_other = min(weakest_other, max(defects))
    ok = worst_any >= -1e-10 and worst_mob < 1e-9 and weakest_other >= 1e-9
    assert report(
        15,
        ok,
        f"min defect {worst_any:.1e}, max |defect| Moebius {worst_mob:.1e}, smallest max defect otherwise {weakest_other:.1e}",
    )
