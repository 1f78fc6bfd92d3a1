"""Complex geodesics, complex extreme points and fixed sets on balls."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .disc import Mobius, poincare_distance
from .domains import Domain, NormBall
from .errors import (
    ConvexityRequiredError,
    DegeneracyError,
    MobiusFitError,
    NotSelfMapError,
    PreconditionError,
)
from .expr import HolomorphicMap, as_vector
from .fixed_points import RetractionApprox, fix_dimension
from .metrics import AnalyticDisc, ExtremalFunctional, distance_bracket

CIRCLE = 64


@dataclass(frozen=True)
class GeodesicCandidate:
    disc: AnalyticDisc
    defect: float
    verified: bool
    certificate: ExtremalFunctional | None = None
    inconclusive: bool = False
    distance: float | None = None
    parameter: float | None = None

    def to_dict(self):
        return {
            "disc": self.disc.to_dict(),
            "defect": self.defect,
            "verified": self.verified,
            "inconclusive": self.inconclusive,
            "distance": self.distance,
            "disc_parameter": self.parameter,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }


@dataclass(frozen=True)
class ExtremePointReport:
    point: np.ndarray
    is_extreme: bool
    witness: np.ndarray | None
    slack: float
    searched: int

    @property
    def label(self):
        return "no witness found" if self.is_extreme else "not extreme"

    def to_dict(self):
        return {
            "point": self.point,
            "is_extreme": self.is_extreme,
            "label": self.label,
            "witness": self.witness,
            "slack": self.slack,
            "directions_searched": self.searched,
        }


@dataclass(frozen=True)
class FixSetReport:
    basis: np.ndarray
    dim: int
    residual: float
    verified: bool
    samples: int
    counterexample: np.ndarray | None = None

    def to_dict(self):
        return {
            "basis": self.basis,
            "dim": self.dim,
            "residual": self.residual,
            "verified": self.verified,
            "samples": self.samples,
            "counterexample": self.counterexample,
        }


# ------------------------------------------------------------------ geodesic checks


def _disc_inside(disc, d, angles=256, radii=(0.25, 0.5, 0.75, 0.9, 0.99, 1 - 1e-9)):
    th = np.exp(2j * np.pi * np.arange(angles) / angles)
    zeta = np.concatenate([r * th for r in radii])
    return bool(np.all(d.contains_many(disc.evaluate_many(zeta))))


def default_probe_pairs(count: int = 8, seed: int = 0, radius: float = 0.8):
    rng = np.random.default_rng(seed)
    pairs = [(0j, 0.5 + 0j)]
    for _ in range(count - 1):
        a, b = radius * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2))
        pairs.append((complex(a), complex(b)))
    return pairs


def geodesic_defect(
    disc: AnalyticDisc, d: Domain, probe_pairs=None, tol: float = 1e-6, budget: int = 20000, seed: int = 0
) -> GeodesicCandidate:
    """Largest gap between the Poincare distance of parameters and the lower bound of their images."""
    if not _disc_inside(disc, d):
        raise NotSelfMapError("the disc leaves the domain")
    pairs = default_probe_pairs(seed=seed) if probe_pairs is None else probe_pairs
    defect, cert, inconclusive = 0.0, None, False
    best_match = np.inf
    for zeta, eta in pairs:
        if zeta == eta:
            continue
        p, q = disc(zeta), disc(eta)
        est = distance_bracket(d, p, q, tol=tol, budget=budget, seed=seed)
        if d.convex and not est.converged:
            inconclusive = True
        om = poincare_distance(zeta, eta)
        gap = abs(om - est.lower)
        defect = max(defect, gap)
        if gap < best_match:
            best_match, cert = gap, est.lower_witness
    verified = defect < tol and not inconclusive
    return GeodesicCandidate(disc, defect, verified, cert, inconclusive)


def geodesic_ball_origin(ball: NormBall, v, tol: float = 1e-6) -> GeodesicCandidate:
    """The linear disc ``zeta -> zeta v`` through the origin of a norm ball."""
    v = as_vector(v, ball.dim)
    if abs(float(ball.norm(v)) - 1) > 1e-10:
        raise PreconditionError("direction must have norm 1")
    report = complex_extreme_test(ball, v)
    if not report.is_extreme:
        raise PreconditionError(f"{v} is not a complex extreme point; the geodesic is not unique")
    disc = AnalyticDisc(np.vstack([np.zeros(ball.dim, dtype=complex), v]))
    return geodesic_defect(disc, ball, tol=tol)


def geodesic_search(
    d: Domain, a, b, degree: int = 6, budget: int = 20000, tol: float = 1e-4, seed: int = 0
) -> GeodesicCandidate:
    """Best disc through ``a`` and ``b`` with the bracket gap as a certificate."""
    if not d.convex:
        raise ConvexityRequiredError("geodesic search needs a convex domain")
    a, b = as_vector(a, d.dim), as_vector(b, d.dim)
    if np.allclose(a, b, atol=1e-14, rtol=0):
        raise DegeneracyError("the two points coincide")
    est = distance_bracket(d, a, b, tol=tol, budget=budget, degree=degree, seed=seed)
    return GeodesicCandidate(
        est.upper_witness,
        est.gap,
        est.gap < tol,
        est.lower_witness,
        not est.converged,
        est.upper,
        est.parameter,
    )


def _derivative_at_zero(g, h=1e-3):
    return (g(-2 * h) - 8 * g(-h) + 8 * g(h) - g(2 * h)) / (12 * h)


def retraction_from_geodesic(
    d: Domain, candidate: GeodesicCandidate, ell: ExtremalFunctional | None = None, tol: float = 1e-8, probes: int = 100, seed: int = 0
) -> RetractionApprox:
    """Retraction onto the image of a geodesic: ``phi o m^-1 o ell`` with ``ell o phi = m`` Moebius."""
    if not candidate.verified:
        raise PreconditionError("candidate geodesic is not verified")
    ell = candidate.certificate if ell is None else ell
    if ell is None:
        raise PreconditionError("no functional achieving equality is available")
    phi = candidate.disc

    def g(zeta):
        return ell(phi(zeta))

    c = g(0.0)
    gp = _derivative_at_zero(g)
    if abs(c) >= 1:
        raise MobiusFitError("functional sends the disc centre outside the unit disc")
    lam = gp / (1 - abs(c) ** 2)
    if abs(abs(lam) - 1) > 1e-6:
        raise MobiusFitError(f"ell o phi is not an automorphism (|lambda| = {abs(lam):.6f})")
    m = Mobius(-c / lam, lam / abs(lam))
    th = np.exp(2j * np.pi * np.arange(32) / 32)
    for zeta in np.concatenate([0.3 * th, 0.7 * th]):
        if abs(g(zeta) - m(zeta)) > max(tol, 1e-7):
            raise MobiusFitError(f"ell o phi deviates from a Moebius map at {zeta}")
    minv = m.invert()

    def evaluate(z):
        return phi(minv(ell(as_vector(z, d.dim))))

    Z = d.sample(probes, seed=seed)
    defect = 0.0
    for z in Z:
        p = evaluate(z)
        defect = max(defect, float(np.linalg.norm(evaluate(p) - p)))
    return RetractionApprox(evaluate, None, {"mobius": m, "idempotence_defect": defect})


# ------------------------------------------------------------------ extreme points


def _reach(ball, x, y, circle):
    """Largest ``t`` with ``max_zeta ||x + zeta t y|| <= 1 + 1e-9`` (the excess is convex in t)."""

    def excess(t):
        return float(np.max(ball.norm(x[None, :] + t * circle[:, None] * y[None, :]))) - 1.0 - 1e-9

    if excess(4.0) <= 0:
        return 4.0
    lo, hi = 0.0, 4.0
    for _ in range(45):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if excess(mid) <= 0 else (lo, mid)
    return lo


def complex_extreme_test(
    ball: NormBall, x, budget: int = 300, seed: int = 0, min_witness: float = 1e-3, restarts: int = 4
) -> ExtremePointReport:
    """Search for ``y != 0`` with ``x + zeta y`` in the closed ball for all ``|zeta| <= 1``.

    Finding one shows ``x`` is not complex extreme.  Failing to find one within
    the budget is reported as extreme, meaning only that no witness was found.
    A witness must have norm at least ``min_witness``: on a smooth boundary
    the tolerance 1e-9 already admits directions of size about 4e-5.
    """
    x = as_vector(x, ball.dim)
    if abs(float(ball.norm(x)) - 1) > 1e-9:
        raise PreconditionError("point must lie on the unit sphere")
    n = ball.dim
    circle = np.exp(2j * np.pi * np.arange(CIRCLE) / CIRCLE)
    rng = np.random.default_rng(seed)
    starts = []
    # kernel of the peaking functional: the tangent directions at x
    u = ball.peak_functional(x)
    _, _, Vh = np.linalg.svd(u[None, :])
    starts += list(np.conj(Vh[1:]))
    starts += list(np.eye(n, dtype=complex))
    starts += [rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(restarts)]
    searched = 0

    def score(y):
        nonlocal searched
        searched += 1
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        return _reach(ball, x, y / ny, circle)

    scored = sorted(((score(s), i) for i, s in enumerate(starts)), reverse=True)
    best_t, best_y = scored[0][0], starts[scored[0][1]] / np.linalg.norm(starts[scored[0][1]])
    if best_t < min_witness:
        for _, i in scored[:restarts]:
            res = minimize(
                lambda p: -score(p[:n] + 1j * p[n:]),
                np.concatenate([starts[i].real, starts[i].imag]),
                method="Nelder-Mead",
                options={"maxfev": max(budget // restarts, 20)},
            )
            if -res.fun > best_t:
                y = res.x[:n] + 1j * res.x[n:]
                best_t, best_y = -res.fun, y / np.linalg.norm(y)
            if best_t >= min_witness:
                break
    witness = best_t * best_y
    slack = 1.0 - float(np.max(ball.norm(x[None, :] + circle[:, None] * witness[None, :])))
    if best_t >= min_witness:
        return ExtremePointReport(x, False, witness, slack, searched)
    return ExtremePointReport(x, True, None, slack, searched)


# ------------------------------------------------------------------ maximum principle


def _check_into_closed_ball(f, ball, nodes=1024):
    zeta = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    norms = ball.norm(f.evaluate_many(zeta[:, None]))
    k = int(np.argmax(norms))
    if norms[k] > 1 + 1e-9:
        raise NotSelfMapError(f"||f({zeta[k]:.4f})|| = {norms[k]:.6f} exceeds 1", point=zeta[k])


def max_principle_defect(f: HolomorphicMap, ball: NormBall, samples: int = 256, seed: int = 0) -> float:
    """Largest violation of ``||f(0) + w (f(z) - f(0))|| <= 1`` for ``|w| <= (1 - |z|) / (2|z|)``.

    Holds for every holomorphic ``f`` from the disc into the closed ball, so
    the result should vanish up to rounding.
    """
    if f.arity != 1 or f.dim != ball.dim:
        raise PreconditionError("f must map the disc into the ball's space")
    _check_into_closed_ball(f, ball)
    rng = np.random.default_rng(seed)
    z = 0.98 * np.sqrt(rng.random(samples)) * np.exp(2j * np.pi * rng.random(samples))
    z = z[np.abs(z) > 1e-6]
    f0 = f(np.zeros(1))
    Fz = f.evaluate_many(z[:, None])
    circle = np.exp(2j * np.pi * np.arange(CIRCLE) / CIRCLE)
    rad = (1 - np.abs(z)) / (2 * np.abs(z))
    W = rad[:, None] * circle[None, :]
    P = f0[None, None, :] + W[:, :, None] * (Fz - f0)[:, None, :]
    return float(max(0.0, np.max(ball.norm(P)) - 1.0))


def scalar_max_principle_defect(g: HolomorphicMap, samples: int = 256, seed: int = 0) -> float:
    """Largest violation of ``2|z||g(0)| + (1 - |z|)|g(z) - g(0)| <= 2|z|`` for ``g`` into the closed disc."""
    rng = np.random.default_rng(seed)
    z = 0.98 * np.sqrt(rng.random(samples)) * np.exp(2j * np.pi * rng.random(samples))
    g0 = complex(g(np.zeros(1))[0])
    gz = g.evaluate_many(z[:, None])[:, 0]
    lhs = 2 * np.abs(z) * abs(g0) + (1 - np.abs(z)) * np.abs(gz - g0)
    return float(max(0.0, np.max(lhs - 2 * np.abs(z))))


# ------------------------------------------------------------------ fixed sets


def fix_set_on_ball(
    f: HolomorphicMap, ball: NormBall, tol: float = 1e-8, samples: int = 100, seed: int = 0, self_map_samples: int = 2000
) -> FixSetReport:
    """Check that the fixed set is the ball cut by the eigenvalue-1 eigenspace of ``f'(0)``.

    Requires a norm ball whose boundary points are all complex extreme
    (``1 <= p < inf``); the sup-norm ball is refused.
    """
    if not isinstance(ball, NormBall) or ball.p == np.inf:
        raise PreconditionError("boundary points must all be complex extreme (sup-norm ball refused)")
    n = ball.dim
    if np.linalg.norm(f(np.zeros(n))) >= tol:
        raise PreconditionError("f(0) != 0")
    Z = ball.sample(self_map_samples, seed=seed)
    inside = ball.contains_many(f.evaluate_many(Z))
    if not np.all(inside):
        raise NotSelfMapError("f maps sampled points outside the ball", point=Z[np.argmin(inside)])
    rep = fix_dimension(f, np.zeros(n), eig_tol=max(tol, 1e-10))
    basis = rep.eigenbasis
    if rep.dim == 0:
        return FixSetReport(basis, 0, 0.0, True, 0)
    rng = np.random.default_rng(seed + 1)
    worst, counter = 0.0, None
    for _ in range(samples):
        c = rng.normal(size=rep.dim) + 1j * rng.normal(size=rep.dim)
        p = c @ basis
        p = 0.99 * rng.random() * p / float(ball.norm(p))
        r = float(np.linalg.norm(f(p) - p))
        if r > worst:
            worst, counter = r, p
    ok = worst < 10 * tol
    return FixSetReport(basis, rep.dim, worst, ok, samples, None if ok else counter)
