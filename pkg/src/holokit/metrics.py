"""Brackets for the invariant pseudodistances and metrics of a bounded domain.

Lower bounds come from holomorphic functions into the disc built out of
linear functionals: ``z -> <u, T z> / support(u)`` where ``T`` is an
optional automorphism of the domain moving the base point to the origin.
Upper bounds come from analytic discs through both points: exact linear
discs on balanced domains with a transitive automorphism group, penalised
polynomial discs otherwise, and a chain of small Euclidean balls when no
polynomial disc is feasible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.special import expit

from .disc import Mobius, artanh, pseudo_distance
from .domains import Domain, InequalityDomain
from .errors import ConvexityRequiredError, InfeasibleDiscError, OutsideDomainError
from .expr import as_vector

DISC_MARGIN = 1e-6
GRID = 256
SHRINK_LADDER = (0.0, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.2)


class NonConvergenceWarning(RuntimeWarning):
    pass


# ------------------------------------------------------------------ witnesses


@dataclass(frozen=True)
class ExtremalFunctional:
    """Holomorphic map ``z -> <u, T z> / scale`` of the domain into the unit disc."""

    u: np.ndarray
    scale: float
    pre: object = None
    label: str = ""

    def value_many(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        if self.pre is not None:
            Z = self.pre.apply_many(Z)
        return Z @ self.u / self.scale

    def __call__(self, z):
        return complex(self.value_many(np.atleast_1d(z)[None, :])[0])

    def differential(self, z, v):
        """Derivative of the functional at ``z`` in the direction ``v``."""
        v = as_vector(v)
        if self.pre is not None:
            # pre is built centred at the evaluation point when used infinitesimally
            v = self.pre.differential_at_base(v)
        return complex(np.dot(self.u, v) / self.scale)

    def distance(self, z, w):
        return float(artanh(pseudo_distance(self(z), self(w))))

    def to_dict(self):
        return {"u": self.u, "scale": self.scale, "transported": self.pre is not None, "label": self.label}


@dataclass(frozen=True)
class AnalyticDisc:
    """Polynomial disc ``zeta -> post^-1(sum_k c_k m(zeta)^k)``."""

    coefficients: np.ndarray
    post: object = None
    pre: Mobius | None = None
    shrink: float = 0.0
    certified: bool = True
    containment_margin: float = 0.0

    @property
    def degree(self):
        return self.coefficients.shape[0] - 1

    @property
    def dim(self):
        return self.coefficients.shape[1]

    def evaluate_many(self, zeta):
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        if self.pre is not None:
            zeta = self.pre(zeta)
        P = np.vander(zeta, self.degree + 1, increasing=True) @ self.coefficients
        if self.post is not None:
            P = self.post.inverse_many(P)
        return P

    def __call__(self, zeta):
        return self.evaluate_many(np.array([zeta]))[0]

    def reparametrize(self, m: Mobius) -> "AnalyticDisc":
        """The disc ``self o m``."""
        pre = m if self.pre is None else self.pre.compose(m)
        return AnalyticDisc(self.coefficients, self.post, pre, self.shrink, self.certified, self.containment_margin)

    def to_dict(self):
        return {
            "coefficients": self.coefficients,
            "transported": self.post is not None,
            "reparametrized": self.pre is not None,
            "shrink": self.shrink,
            "certified": self.certified,
            "containment_margin": self.containment_margin,
        }


@dataclass(frozen=True)
class ChainWitness:
    """Sequence of points where consecutive points lie in Euclidean balls inside the domain."""

    points: np.ndarray
    steps: np.ndarray

    def to_dict(self):
        return {"points": self.points, "steps": self.steps}


@dataclass(frozen=True)
class DistanceEstimate:
    lower: float
    upper: float
    lower_witness: ExtremalFunctional | None
    upper_witness: object
    converged: bool
    upper_kind: str = "disc"
    parameter: float | None = None
    tolerance: float = 1e-4
    info: dict = field(default_factory=dict)

    @property
    def gap(self):
        return self.upper - self.lower

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "converged": self.converged,
            "upper_kind": self.upper_kind,
            "disc_parameter": self.parameter,
            "tolerance": self.tolerance,
            "lower_witness": None if self.lower_witness is None else self.lower_witness.to_dict(),
            "upper_witness": None if self.upper_witness is None else self.upper_witness.to_dict(),
            **self.info,
        }


# ------------------------------------------------------------------ helpers


def _check_inside(d, *points):
    out = []
    for p in points:
        p = as_vector(p, d.dim)
        if not d.contains(p):
            raise OutsideDomainError(f"point {p} is not in the domain")
        out.append(p)
    return out


def _exact_model(d):
    """True when linear discs and peak functionals are extremal after transport."""
    return d.convex and d.balanced and hasattr(d, "gauge_many")


def _gauge(d, z):
    return float(d.gauge_many(np.atleast_1d(z)[None, :])[0])


def _unit(u):
    n = np.linalg.norm(u)
    return u / n if n > 0 else u


def _candidate_functionals(d, zs):
    """Directions worth trying first: peaks of the domain gauge and coordinates."""
    cands = []
    for z in zs:
        if np.linalg.norm(z) == 0:
            continue
        if hasattr(d, "peak_functional"):
            cands.append(d.peak_functional(z))
        cands.append(np.conj(z))
    for j in range(d.dim):
        e = np.zeros(d.dim, dtype=complex)
        e[j] = 1.0
        cands.append(e)
    return [c for c in cands if np.linalg.norm(c) > 0]


def _pack(u):
    return np.concatenate([u.real, u.imag])


def _unpack(x):
    n = len(x) // 2
    return x[:n] + 1j * x[n:]


# ------------------------------------------------------------------ Caratheodory


def caratheodory_lower(d: Domain, z, w, budget: int = 2000, seed: int = 0):
    """Lower bound for the Caratheodory distance and the functional achieving it."""
    z, w = _check_inside(d, z, w)
    T = d.transport(z)
    zt, wt = (T(z), T(w)) if T is not None else (z, w)

    def value(u):
        S = d.support(u)
        if not S > 0:
            return 0.0
        a, b = np.dot(u, zt) / S, np.dot(u, wt) / S
        return float(artanh(min(pseudo_distance(a, b), 1 - 1e-15 - 1e-16)))

    if np.allclose(z, w, rtol=0, atol=0):
        u = _candidate_functionals(d, [])[0]
        return 0.0, ExtremalFunctional(u, d.support(u), T, "trivial")

    cands = _candidate_functionals(d, [wt, zt, wt - zt, 0.5 * (zt + wt)])
    vals = [value(u) for u in cands]
    k = int(np.argmax(vals))
    best_u, best = cands[k], vals[k]
    exact = T is not None and _exact_model(d)
    if not exact and budget > 0:
        res = minimize(
            lambda x: -value(_unpack(x)),
            _pack(_unit(best_u)),
            method="Nelder-Mead",
            options={"maxfev": budget, "xatol": 1e-12, "fatol": 1e-14, "adaptive": True},
        )
        if -res.fun > best:
            best_u, best = _unpack(res.x), -res.fun
    return best, ExtremalFunctional(best_u, d.support(best_u), T, "transported-peak" if exact else "searched")


def caratheodory_inf_metric(d: Domain, z, v, budget: int = 1000) -> float:
    """Lower bound for the infinitesimal Caratheodory metric at ``z`` in direction ``v``."""
    (z,) = _check_inside(d, z)
    v = as_vector(v, d.dim)
    if np.linalg.norm(v) == 0:
        return 0.0
    T = d.transport(z)
    if T is not None and _exact_model(d):
        return _gauge(d, T.differential_at_base(v))
    vt = T.differential_at_base(v) if T is not None else v
    zt = T(z) if T is not None else z

    def value(u):
        S = d.support(u)
        if not S > 0:
            return 0.0
        a = np.dot(u, zt) / S
        return abs(np.dot(u, vt) / S) / max(1.0 - abs(a) ** 2, 1e-300)

    cands = _candidate_functionals(d, [vt, zt])
    best_u = max(cands, key=value)
    best = value(best_u)
    if budget > 0:
        res = minimize(
            lambda x: -value(_unpack(x)),
            _pack(_unit(best_u)),
            method="Nelder-Mead",
            options={"maxfev": budget, "xatol": 1e-12, "fatol": 1e-14, "adaptive": True},
        )
        best = max(best, -res.fun)
    return float(best)


# ------------------------------------------------------------------ discs


def _containment_ok(d, P):
    return bool(np.all(d.slack_many(P) > 0))


def _radial_grid(n_angle, radii=(0.25, 0.5, 0.75, 0.9, 0.97, 1.0)):
    th = np.exp(2j * np.pi * np.arange(n_angle) / n_angle)
    return np.concatenate([r * th for r in radii])


def _certify(d, C, angles=2048):
    """Smallest radial shrink making the polynomial disc provably inside ``d``.

    On convex model domains the boundary curve is sampled on ``N`` points;
    between samples it deviates from the chord by at most ``M2 h^2 / 8`` where
    ``M2`` bounds the second derivative, and chords stay inside because the
    distance to the boundary is concave.  Elsewhere a radial grid is checked
    and the result is flagged as uncertified.
    """
    deg = C.shape[0] - 1
    k = np.arange(deg + 1)
    exact_gap = d.convex and not isinstance(d, InequalityDomain)
    for eps in SHRINK_LADDER:
        Ce = C * ((1.0 - eps) ** k)[:, None]
        if exact_gap:
            M2 = float(np.sum(k**2 * np.linalg.norm(Ce, axis=1)))
            for N in (angles, 4 * angles):
                zeta = np.exp(2j * np.pi * np.arange(N) / N)
                gaps = d.gap_many(np.vander(zeta, deg + 1, increasing=True) @ Ce)
                need = M2 * (2 * np.pi / N) ** 2 / 8
                if np.min(gaps) > need:
                    return eps, Ce, True, float(np.min(gaps) - need)
        else:
            zeta = _radial_grid(angles // 2)
            sl = d.slack_many(np.vander(zeta, deg + 1, increasing=True) @ Ce)
            if np.min(sl) > 0:
                return eps, Ce, False, float(np.min(sl))
    return None


def _chord_parameter(d, z, v, convex):
    """Smallest s with the disc ``z + zeta v / s`` inside (on a boundary or radial grid)."""
    zeta = np.exp(2j * np.pi * np.arange(GRID) / GRID) if convex else _radial_grid(GRID // 2)

    def ok(s):
        return _containment_ok(d, z + np.outer(zeta, v) / s)

    hi = 1 - 1e-12
    if not ok(hi):
        return None
    lo = float(np.linalg.norm(v)) / (2 * d.bounding_radius())
    if ok(lo):
        return lo
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


def _slsqp_min_first(y0, slack, first_bounds, maxiter=500):
    """Minimise ``y[0]`` subject to ``slack(y) >= 0``; ``None`` when the run fails."""
    bounds = [first_bounds] + [(None, None)] * (len(y0) - 1)
    y0 = np.array(y0, dtype=float)
    y0[0] = np.clip(y0[0], *first_bounds)
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(
            lambda y: y[0],
            y0,
            jac=lambda y: np.eye(len(y))[0],
            method="SLSQP",
            bounds=bounds,
            constraints=[{"type": "ineq", "fun": lambda y: np.nan_to_num(slack(y), nan=-1e6, neginf=-1e6)}],
            options={"maxiter": maxiter, "ftol": 1e-14},
        )
    if not np.all(np.isfinite(res.x)):
        return None
    return res.x


def _polynomial_disc(d, z, w, degree, budget, seed):
    n = d.dim
    v = w - z
    convex = d.convex
    zeta = np.exp(2j * np.pi * np.arange(GRID) / GRID) if convex else _radial_grid(GRID // 2)
    V = np.vander(zeta, degree + 1, increasing=True)
    ks = np.arange(2, degree + 1)

    def coeffs(x):
        s = float(expit(x[0]))
        rest = _unpack(x[1:]).reshape(len(ks), n) if len(ks) else np.zeros((0, n), dtype=complex)
        c1 = (v - (s ** ks) @ rest) / s
        return s, np.vstack([z[None, :], c1[None, :], rest])

    def objective(x):
        s, C = coeffs(x)
        sl = d.slack_many(V @ C)
        viol = np.maximum(DISC_MARGIN - sl, 0.0)
        pen = float(np.sum(np.where(np.isfinite(viol), viol, 1e6) ** 2))
        return float(artanh(min(s, 1 - 1e-12))) + 1e4 * pen

    s0 = _chord_parameter(d, z, v, convex)
    rng = np.random.default_rng(seed)
    start_s = min(s0 * 1.001, 0.999) if s0 is not None else 0.9
    x0 = np.concatenate([[np.log(start_s / (1 - start_s))], np.zeros(2 * n * len(ks))])
    starts = [x0] + [
        np.concatenate([[x0[0]], 0.05 * rng.normal(size=2 * n * len(ks))]) for _ in range(2)
    ]
    shares = [budget // 2, budget // 4, budget - budget // 2 - budget // 4]
    results = []
    for xs, fev in zip(starts, shares):
        if fev < 10:
            continue
        res = minimize(
            objective,
            xs,
            method="Nelder-Mead",
            options={"maxfev": fev, "xatol": 1e-12, "fatol": 1e-14, "adaptive": True},
        )
        results.append(res.x)

    # polish with SLSQP: minimise s directly with the grid slacks as constraints
    def coeffs_plain(y):
        return coeffs(np.concatenate([[np.log(y[0] / (1 - y[0]))], y[1:]]))

    polish = [np.concatenate([[expit(x[0])], x[1:]]) for x in results]
    if s0 is not None:
        polish.append(np.concatenate([[s0], np.zeros(2 * n * len(ks))]))
    for y0 in polish:
        y = _slsqp_min_first(y0, lambda y: d.slack_many(V @ coeffs_plain(y)[1]) - DISC_MARGIN, (1e-9, 1 - 1e-9))
        if y is not None:
            results.append(np.concatenate([[np.log(y[0] / (1 - y[0]))], y[1:]]))

    best = None
    candidates = [coeffs(x) for x in results]
    if s0 is not None:
        C = np.zeros((degree + 1, n), dtype=complex)
        C[0], C[1] = z, v / s0
        candidates.append((s0, C))
    for s, C in candidates:
        cert = _certify(d, C)
        if cert is None:
            continue
        eps, Ce, certified, margin = cert
        t = s / (1.0 - eps)
        if t >= 1:
            continue
        if best is None or t < best[0]:
            best = (t, AnalyticDisc(Ce, shrink=eps, certified=certified, containment_margin=margin))
    if best is None:
        raise InfeasibleDiscError("no polynomial disc through both points fits inside the domain")
    return best


def kobayashi_upper(d: Domain, z, w, degree: int = 6, budget: int = 20000, seed: int = 0):
    """Upper bound for the Lempert function and a disc realising it.

    Returns ``(bound, disc, s)`` with ``disc(0) = z`` and ``disc(s) = w``.
    """
    z, w = _check_inside(d, z, w)
    if np.array_equal(z, w):
        C = np.zeros((degree + 1, d.dim), dtype=complex)
        C[0] = z
        return 0.0, AnalyticDisc(C), 0.0
    T = d.transport(z)
    if T is not None and _exact_model(d):
        y = T(w)
        s = _gauge(d, y)
        C = np.zeros((2, d.dim), dtype=complex)
        C[1] = y / s
        return float(artanh(s)), AnalyticDisc(C, post=T), s
    if _exact_model(d) and (np.linalg.norm(z) == 0 or np.linalg.norm(w) == 0):
        far = w if np.linalg.norm(z) == 0 else z
        s = _gauge(d, far)
        C = np.zeros((2, d.dim), dtype=complex)
        C[1] = far / s
        disc = AnalyticDisc(C)
        if np.linalg.norm(w) == 0:
            disc = disc.reparametrize(Mobius(s, -1.0))
        return float(artanh(s)), disc, s
    t, disc = _polynomial_disc(d, z, w, degree, budget, seed)
    return float(artanh(t)), disc, t


def kobayashi_inf_metric(d: Domain, z, v, degree: int = 6, budget: int = 20000, seed: int = 0) -> float:
    """Upper bound for the Kobayashi-Royden metric: smallest ``lam`` with a disc ``phi'(0) = v / lam``."""
    (z,) = _check_inside(d, z)
    v = as_vector(v, d.dim)
    if np.linalg.norm(v) == 0:
        return 0.0
    T = d.transport(z)
    if T is not None and _exact_model(d):
        return _gauge(d, T.differential_at_base(v))
    if _exact_model(d) and np.linalg.norm(z) == 0:
        return _gauge(d, v)
    n = d.dim
    convex = d.convex
    zeta = np.exp(2j * np.pi * np.arange(GRID) / GRID) if convex else _radial_grid(GRID // 2)
    V = np.vander(zeta, degree + 1, increasing=True)
    nk = degree - 1

    def coeffs(x):
        lam = float(np.exp(x[0]))
        rest = _unpack(x[1:]).reshape(nk, n) if nk else np.zeros((0, n), dtype=complex)
        return lam, np.vstack([z[None, :], v[None, :] / lam, rest])

    def objective(x):
        lam, C = coeffs(x)
        sl = d.slack_many(V @ C)
        viol = np.maximum(DISC_MARGIN - sl, 0.0)
        return lam + 1e4 * float(np.sum(np.where(np.isfinite(viol), viol, 1e6) ** 2))

    # start from the largest feasible straight disc
    gap = d.boundary_gap(z)
    lam0 = float(np.linalg.norm(v)) / gap
    x0 = np.concatenate([[np.log(lam0)], np.zeros(2 * n * nk)])
    res = minimize(
        objective, x0, method="Nelder-Mead", options={"maxfev": budget, "xatol": 1e-12, "fatol": 1e-14, "adaptive": True}
    )
    candidates = [res.x, x0]
    y = _slsqp_min_first(
        np.concatenate([[np.exp(res.x[0])], res.x[1:]]),
        lambda y: d.slack_many(V @ coeffs(np.concatenate([[np.log(y[0])], y[1:]]))[1]) - DISC_MARGIN,
        (1e-12, lam0),
    )
    if y is not None:
        candidates.append(np.concatenate([[np.log(y[0])], y[1:]]))
    best = lam0
    for x in candidates:
        lam, C = coeffs(x)
        cert = _certify(d, C)
        if cert is None:
            continue
        eps, _, _, _ = cert
        best = min(best, lam / (1.0 - eps))
    return float(best)


# ------------------------------------------------------------------ chains


def _ball_graph(d, pts):
    P = np.asarray(pts)
    gaps = d.gap_many(P)
    D = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2)
    ratio = D / np.maximum(gaps[:, None], 1e-300)
    mask = (ratio < 1 - 1e-9) & (D > 0)
    weights = np.where(mask, np.arctanh(np.clip(ratio, 0, 1 - 1e-9)), 0.0)
    return csr_matrix(np.where(mask, np.maximum(weights, 1e-300), 0.0))


def chain_upper(d: Domain, z, w, samples: int = 1500, seed: int = 0):
    """Upper bound for the Kobayashi distance through a chain of Euclidean balls inside ``d``.

    Consecutive points ``p, q`` satisfy ``|q - p| < gap(p)``, and the ball of radius
    ``gap(p)`` about ``p`` lies in ``d``; its Kobayashi distance bounds the domain's.
    """
    z, w = _check_inside(d, z, w)
    segment = z + np.linspace(0, 1, 65)[:, None] * (w - z)[None, :]
    seg_in = segment[d.contains_many(segment)]
    pts = np.vstack([z, w, seg_in, d.sample(samples, seed=seed)])
    G = _ball_graph(d, pts)
    dist, pred = dijkstra(G, directed=True, indices=0, return_predecessors=True)
    if not np.isfinite(dist[1]):
        raise InfeasibleDiscError("sampled points do not connect the two points")
    path = [1]
    while path[-1] != 0:
        path.append(pred[path[-1]])
    path = path[::-1]
    steps = np.array([G[path[i], path[i + 1]] for i in range(len(path) - 1)])
    return float(dist[1]), ChainWitness(pts[path], steps)


def split_disc_upper(d: Domain, z, w, degree: int = 6, budget: int = 20000, seed: int = 0, depth: int = 4):
    """Upper bound summing disc bounds over a bisected straight segment (convex domains).

    Used when no single disc through both points is found; each half is split
    again on failure, down to ``depth`` levels.
    """
    if not d.convex:
        raise ConvexityRequiredError("segment splitting needs a convex domain")
    z, w = _check_inside(d, z, w)

    def leg(a, b, level):
        try:
            return [a, b], [kobayashi_upper(d, a, b, degree=degree, budget=budget, seed=seed)[0]]
        except InfeasibleDiscError:
            if level == 0:
                raise
        m = 0.5 * (a + b)
        p1, s1 = leg(a, m, level - 1)
        p2, s2 = leg(m, b, level - 1)
        return p1 + p2[1:], s1 + s2

    pts, steps = leg(z, w, depth)
    return float(sum(steps)), ChainWitness(np.array(pts), np.array(steps))


# ------------------------------------------------------------------ brackets


def distance_bracket(
    d: Domain, z, w, tol: float = 1e-4, budget: int = 20000, degree: int = 6, seed: int = 0
) -> DistanceEstimate:
    """Caratheodory lower bound and disc (or chain) upper bound for the distance of ``z`` and ``w``."""
    z, w = _check_inside(d, z, w)
    lower, lw = caratheodory_lower(d, z, w, budget=min(budget, 4000), seed=seed)
    try:
        upper, disc, s = kobayashi_upper(d, z, w, degree=degree, budget=budget, seed=seed)
        kind, witness = "disc", disc
    except InfeasibleDiscError:
        upper, witness, kind, s = None, None, "chain", None
        if d.convex:
            try:
                upper, witness = split_disc_upper(d, z, w, degree=degree, budget=budget, seed=seed)
                kind = "split"
            except InfeasibleDiscError:
                pass
        if upper is None:
            upper, witness = chain_upper(d, z, w, seed=seed)
    lower = max(lower, 0.0)
    converged = upper - lower < tol
    if d.convex and not converged:
        warnings.warn(f"bracket did not close on a convex domain: gap {upper - lower:.3e}", NonConvergenceWarning)
    return DistanceEstimate(lower, upper, lw, witness, converged, kind, s, tol)


# ------------------------------------------------------------------ integrated distance

_GL_CACHE = {}


def _gauss_legendre(n):
    if n not in _GL_CACHE:
        x, wts = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1), 0.5 * wts)
    return _GL_CACHE[n]


class _Path:
    """Piecewise path made of straight pieces (in transported coordinates when given)."""

    def __init__(self, knots, transport=None, model=None):
        self.knots = np.asarray(knots, dtype=complex)
        self.T = transport
        self.model = model

    def pieces(self):
        for a, b in zip(self.knots[:-1], self.knots[1:]):
            yield a, b

    def points(self, t, a, b):
        P = a[None, :] + t[:, None] * (b - a)[None, :]
        return P if self.T is None else self.T.inverse_many(P)

    def velocities(self, t, a, b):
        if self.T is None:
            return np.repeat((b - a)[None, :], len(t), axis=0)
        # derivative of the holomorphic T^-1 by a Cauchy integral on a circle kept inside the model
        c = b - a
        Q = a[None, :] + t[:, None] * c[None, :]
        eps = 0.5 * (1 - self.model.gauge_many(Q)) / float(self.model.gauge_many(c[None, :])[0])
        K = 32
        roots = np.exp(2j * np.pi * np.arange(K) / K)
        Pts = Q[:, None, :] + (eps[:, None] * roots[None, :])[:, :, None] * c[None, None, :]
        G = self.T.inverse_many(Pts.reshape(-1, len(a))).reshape(len(t), K, len(a))
        return np.einsum("tkn,k->tn", G, np.conj(roots)) / (K * eps[:, None])


def _default_path(d, z, w, seed):
    T = d.transport(z)
    if T is not None and _exact_model(d):
        return _Path([np.zeros(d.dim, dtype=complex), T(w)], transport=T, model=d)
    if d.convex:
        return _Path([z, w])
    _, chain = chain_upper(d, z, w, seed=seed)
    return _Path(chain.points)


def _panels(levels):
    """Breakpoints of [0, 1] refined geometrically towards both ends."""
    inner = 0.5 ** np.arange(levels, 0, -1)
    return np.concatenate([[0.0], inner, 1 - inner[::-1], [1.0]])


def _grading(d, z, w):
    """Refinement depth from the boundary gap at the path ends."""
    g = max(float(np.min(d.gap_many(np.vstack([z, w])))), 1e-16)
    return int(np.clip(np.ceil(np.log2(1 / g)) + 3, 1, 52))


def _path_length(d, path, nodes, metric, levels=1):
    total = 0.0
    x, wx = _gauss_legendre(nodes)
    br = _panels(levels)
    t = (br[:-1, None] + (br[1:] - br[:-1])[:, None] * x[None, :]).ravel()
    wt = ((br[1:] - br[:-1])[:, None] * wx[None, :]).ravel()
    for a, b in path.pieces():
        P = path.points(t, a, b)
        Vel = path.velocities(t, a, b)
        if not np.all(d.contains_many(P)):
            raise OutsideDomainError("path leaves the domain; supply waypoints")
        total += float(sum(wi * metric(p, v) for wi, p, v in zip(wt, P, Vel)))
    return total


def integrated_distance(
    d: Domain,
    z,
    w,
    path_degree: int = 1,
    quadrature_nodes: int = 16,
    waypoints=None,
    polish: bool = False,
    budget: int = 200,
    seed: int = 0,
) -> float:
    """Length of a path from ``z`` to ``w`` in the infinitesimal Caratheodory metric.

    The default path is the geodesic segment after transport when the domain has
    one, the straight segment on convex domains and a chain of sampled waypoints
    otherwise.  ``path_degree > 1`` inserts that many equally spaced knots on
    straight paths so that ``polish`` has control points to move.  Quadrature is
    composite Gauss-Legendre on panels refined geometrically towards the ends
    (the integrand blows up near the boundary); the nodes per panel are doubled
    until two successive values agree to 1e-12.
    """
    z, w = _check_inside(d, z, w)
    if np.array_equal(z, w):
        return 0.0
    if waypoints is not None:
        path = _Path(np.vstack([z, np.asarray(waypoints, dtype=complex).reshape(-1, d.dim), w]))
    else:
        path = _default_path(d, z, w, seed)
        if path_degree > 1 and path.T is None and len(path.knots) == 2:
            t = np.linspace(0, 1, path_degree + 1)[:, None]
            path = _Path(z + t * (w - z))

    def metric(p, v):
        return caratheodory_inf_metric(d, p, v, budget=budget)

    levels = _grading(d, z, w)

    def length(p, n):
        return _path_length(d, p, n, metric, levels)

    if polish and len(path.knots) > 2 and path.T is None:
        inner0 = path.knots[1:-1].ravel()

        def objective(x):
            knots = np.vstack([z, _unpack(x).reshape(-1, d.dim), w])
            try:
                return length(_Path(knots), 16)
            except OutsideDomainError:
                return np.inf

        res = minimize(objective, _pack(inner0), method="Nelder-Mead", options={"maxfev": 40 * len(inner0)})
        if np.isfinite(res.fun):
            path = _Path(np.vstack([z, _unpack(res.x).reshape(-1, d.dim), w]))

    n = quadrature_nodes
    prev = length(path, n)
    while n < 256:
        n *= 2
        cur = length(path, n)
        if abs(cur - prev) < 1e-12:
            return cur
        prev = cur
    return prev
