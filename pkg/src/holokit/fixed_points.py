"""Fixed points of holomorphic self-maps and retractions onto the fixed set."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import Domain
from .errors import (
    ConvexityRequiredError,
    DomainEscapeError,
    EmptyFixSetSuspected,
    EvaluationError,
    NoStabilizationError,
    NonConvergenceError,
    NotCompactlyContainedError,
    OutsideDomainError,
    PoleError,
    PreconditionError,
)
from .expr import HolomorphicMap, affine_post, as_vector


@dataclass(frozen=True)
class FixedPointResult:
    point: np.ndarray
    residual: float
    iterations: int
    contraction_estimate: float
    r_used: float
    R_used: float

    def predicted_iterations(self, tol, first_step):
        """Iteration count implied by the contraction constant for a target tolerance."""
        if first_step <= tol:
            return 1
        return int(np.ceil(np.log(tol / first_step) / np.log(self.contraction_estimate)))

    def to_dict(self):
        return {
            "point": self.point,
            "residual": self.residual,
            "iterations": self.iterations,
            "contraction_estimate": self.contraction_estimate,
            "r_used": self.r_used,
            "R_used": self.R_used,
        }


@dataclass(frozen=True)
class FixDimensionReport:
    base: np.ndarray
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    dim: int
    eigenbasis: np.ndarray
    algebraic: int
    defective: bool

    def to_dict(self):
        return {
            "base": self.base,
            "jacobian": self.jacobian,
            "eigenvalues": self.eigenvalues,
            "dim": self.dim,
            "eigenbasis": self.eigenbasis,
            "algebraic_multiplicity": self.algebraic,
            "defective": self.defective,
        }


@dataclass
class RetractionApprox:
    """Pointwise approximation of a holomorphic retraction onto the fixed set."""

    evaluate: Callable
    lambda_schedule: object = None
    diagnostics: dict = field(default_factory=dict)
    stabilized: bool = True

    def __call__(self, z):
        return self.evaluate(z)

    def idempotence_defect(self, probes) -> float:
        worst = 0.0
        for z in np.atleast_2d(probes):
            p = self(z)
            worst = max(worst, float(np.linalg.norm(self(p) - p)))
        return worst


def _residual(f, z):
    return float(np.linalg.norm(f(z) - z))


# ------------------------------------------------------------------ Earle-Hamilton


def _near_boundary(d: Domain, S, count: int):
    """Members within about 1e-12 of the boundary, found by bisection along rays from a sample."""
    c = S[0]
    U = S[1 : count + 1] - c
    lo = np.zeros(len(U))
    hi = np.full(len(U), 1.0)
    for _ in range(60):
        inside = d.contains_many(c + hi[:, None] * U)
        if not inside.any():
            break
        hi = np.where(inside, 2 * hi, hi)
    for _ in range(45):
        mid = 0.5 * (lo + hi)
        inside = d.contains_many(c + mid[:, None] * U)
        lo, hi = np.where(inside, mid, lo), np.where(inside, hi, mid)
    return c + lo[:, None] * U


def contraction_certificate(f: HolomorphicMap, d: Domain, samples: int = 4096, seed: int = 0):
    """Estimate ``(r, R, k)``: image gap, diameter bound and contraction constant.

    The gap of ``f(D)`` is measured on interior samples and on points pushed
    to the boundary, so maps whose image reaches the boundary are refused.
    """
    S = d.sample(samples, seed=seed)
    S = np.vstack([S, _near_boundary(d, S, min(256, samples - 1))])
    try:
        F = f.evaluate_many(S)
    except (PoleError, EvaluationError) as exc:
        raise NotCompactlyContainedError(f"map is singular on the domain: {exc}") from exc
    gaps = np.where(d.contains_many(F), d.gap_many(np.where(d.contains_many(F)[:, None], F, S)), -1.0)
    r = float(np.min(gaps))
    R = 2.0 * d.bounding_radius()
    if not r > 1e-7 * R:
        k = int(np.argmin(gaps))
        raise NotCompactlyContainedError(f"f({S[k]}) = {F[k]} is not compactly inside the domain (gap {r:.3e})")
    return r, R, 1.0 / (1.0 + r / R)


def earle_hamilton(
    f: HolomorphicMap,
    d: Domain,
    z0,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    samples: int = 4096,
    seed: int = 0,
) -> FixedPointResult:
    """Iterate a map whose image lies compactly inside ``d`` until it settles.

    Stops when ``|f(z) - z| < (1 - k) tol``; with Euclidean Lipschitz constant
    at most ``k`` this bounds the distance to the fixed point by ``tol``.
    """
    z = as_vector(z0, d.dim)
    if not d.contains(z):
        raise OutsideDomainError(f"starting point {z} is not in the domain")
    r, R, k = contraction_certificate(f, d, samples, seed)
    threshold = (1.0 - k) * tol
    best, best_res = z, np.inf
    for it in range(max_iter + 1):
        fz = f(z)
        res = float(np.linalg.norm(fz - z))
        if res < best_res:
            best, best_res = z, res
        if res < threshold:
            return FixedPointResult(z, res, it, k, r, R)
        z = fz
    raise NonConvergenceError(
        f"no convergence after {max_iter} iterations (residual {best_res:.3e})",
        best=best,
        residual=best_res,
        iterations=max_iter,
    )


# ------------------------------------------------------------------ lambda family


def lambda_map(f: HolomorphicMap, a, lam: float) -> HolomorphicMap:
    """``z -> a + lam (f(z) - a)``."""
    a = as_vector(a, f.arity)
    n = f.dim
    return affine_post(f, lam * np.eye(n), (1.0 - lam) * a)


def _newton_fixed(g, z, d, tol, max_iter=60):
    """Damped Newton on ``g(z) - z``; returns ``None`` on failure."""
    n = len(z)
    F = g(z) - z
    for _ in range(max_iter):
        res = float(np.linalg.norm(F))
        if res < tol:
            return z
        J = g.jacobian(z) - np.eye(n)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            step = -np.linalg.pinv(J) @ F
        t = 1.0
        while t > 1e-6:
            zn = z + t * step
            if d.contains(zn):
                try:
                    Fn = g(zn) - zn
                except (PoleError, EvaluationError):
                    Fn = None
                if Fn is not None and np.linalg.norm(Fn) < res:
                    z, F = zn, Fn
                    break
            t *= 0.5
        else:
            return None
    return z if float(np.linalg.norm(F)) < tol else None


def lambda_fixed_point(
    f: HolomorphicMap, d: Domain, a, lam: float, tol: float = 1e-13, warm=None, picard_steps: int = 200
) -> np.ndarray:
    """Unique fixed point of ``z -> a + lam (f(z) - a)`` on a convex domain.

    Runs the contraction iteration from ``warm`` (default ``a``) and hands
    over to Newton when the contraction is too slow, which happens as
    ``lam -> 1``.  The fixed point is unique, so both routes agree.
    """
    if not d.convex:
        raise ConvexityRequiredError("the lambda family needs a convex domain")
    if not 0 <= lam < 1:
        raise ValueError("lam must lie in [0, 1)")
    a = as_vector(a, d.dim)
    if not d.contains(a):
        raise OutsideDomainError(f"base point {a} is not in the domain")
    if lam == 0:
        return a.copy()
    g = lambda_map(f, a, lam)
    z = a.copy() if warm is None else as_vector(warm, d.dim)
    for _ in range(picard_steps):
        gz = g(z)
        if np.linalg.norm(gz - z) < tol:
            return gz
        z = gz
    z = _newton_fixed(g, z, d, tol)
    if z is None:
        raise NonConvergenceError(f"no fixed point found for lam = {lam}")
    return z


def default_schedule(k: int) -> float:
    return 1.0 - 2.0**-k


def lambda_path(f, d, a, schedule=default_schedule, budget: int = 60):
    """Yield ``(lam_k, phi_lam_k(a))`` for ``k = 1 .. budget``."""
    p = as_vector(a, d.dim)
    for k in range(1, budget + 1):
        lam = schedule(k)
        p = lambda_fixed_point(f, d, a, lam, warm=p)
        yield lam, p


def retract_to_fix(
    f: HolomorphicMap,
    d: Domain,
    a,
    schedule=default_schedule,
    tol: float = 1e-8,
    budget: int = 60,
    boundary_eps: float = 1e-6,
    extrapolate: bool = False,
    trace: list | None = None,
) -> np.ndarray:
    """Limit of the lambda-family fixed points as ``lam -> 1``.

    ``trace``, when given, receives the ``(lam, point)`` pairs visited.
    """
    if not d.convex:
        raise ConvexityRequiredError("the lambda family needs a convex domain")
    a = as_vector(a, d.dim)
    if _residual(f, a) < tol:
        return a.copy()
    prev = None
    for lam, p in lambda_path(f, d, a, schedule, budget):
        if trace is not None:
            trace.append((lam, p))
        if d.boundary_gap(p) < boundary_eps:
            raise EmptyFixSetSuspected(f"lambda-family points approach the boundary (lam = {lam})")
        if prev is not None and np.linalg.norm(p - prev) < tol:
            q = 2 * p - prev if extrapolate else p
            if _residual(f, q) < 10 * tol:
                return q
        prev = p
    raise NonConvergenceError(f"no Cauchy convergence within {budget} schedule steps", best=prev)


def lambda_retraction(f, d, schedule=default_schedule, tol=1e-8, budget=60) -> RetractionApprox:
    """The retraction ``a -> lim phi_lam(a)`` as a pointwise evaluator."""
    diagnostics = {}

    def evaluate(z):
        trace = []
        p = retract_to_fix(f, d, z, schedule, tol, budget, trace=trace)
        diagnostics[tuple(np.round(as_vector(z), 12))] = {"steps": len(trace), "lam": trace[-1][0] if trace else 0.0}
        return p

    return RetractionApprox(evaluate, schedule, diagnostics)


# ------------------------------------------------------------------ local structure


def fix_dimension(f: HolomorphicMap, a, eig_tol: float = 1e-8) -> FixDimensionReport:
    """Dimension of the eigenvalue-1 eigenspace of ``f'(a)`` at a fixed point ``a``."""
    a = as_vector(a, f.arity)
    if _residual(f, a) >= 1e-8:
        raise PreconditionError(f"{a} is not a fixed point (residual {_residual(f, a):.3e})")
    J = f.jacobian(a)
    n = J.shape[0]
    eig = np.linalg.eigvals(J)
    algebraic = int(np.sum(np.abs(eig - 1) < max(eig_tol, 1e-6)))
    _, sv, Vh = np.linalg.svd(J - np.eye(n))
    null = sv < eig_tol * max(1.0, float(np.linalg.norm(J, 2)))
    basis = np.conj(Vh[null])
    basis = np.array([v for v in basis if np.linalg.norm(J @ v - v) <= 10 * eig_tol * np.linalg.norm(v)])
    basis = basis.reshape(-1, n)
    dim = len(basis)
    return FixDimensionReport(a, J, eig, dim, basis, algebraic, dim < algebraic)


def _truncated_pinv_step(J, F, rcond=1e-8):
    U, s, Vh = np.linalg.svd(J)
    keep = s > rcond * max(s[0], 1e-300)
    return -(np.conj(Vh[keep]).T @ ((np.conj(U[:, keep]).T @ F) / s[keep]))


def newton_fixed_point(f, d, z, tol=1e-12, max_iter=80):
    """Damped Newton on ``f(z) - z`` with a pseudo-inverse on the near-kernel of ``f' - I``."""
    n = len(z)
    F = f(z) - z
    for _ in range(max_iter):
        res = float(np.linalg.norm(F))
        if res < tol:
            return z
        step = _truncated_pinv_step(f.jacobian(z) - np.eye(n), F)
        t = 1.0
        while t > 1e-8:
            zn = z + t * step
            if d.contains(zn):
                try:
                    Fn = f(zn) - zn
                except (PoleError, EvaluationError):
                    Fn = None
                if Fn is not None and np.linalg.norm(Fn) < res:
                    z, F = zn, Fn
                    break
            t *= 0.5
        else:
            return None
    return z if float(np.linalg.norm(F)) < tol else None


def fix_scan(
    f: HolomorphicMap,
    d: Domain,
    grid_count: int = 200,
    seed: int = 0,
    tol: float = 1e-12,
    cluster_radius: float = 1e-5,
    eig_tol: float = 1e-8,
):
    """Fixed points reached by Newton from sampled starts, deduplicated and annotated."""
    starts = d.sample(grid_count, seed=seed)
    found = []
    for z in starts:
        try:
            p = newton_fixed_point(f, d, z, tol=tol)
        except (PoleError, EvaluationError):
            continue
        if p is None or not d.contains(p):
            continue
        if any(np.linalg.norm(p - q) < cluster_radius for q in found):
            continue
        found.append(p)
    found.sort(key=lambda p: tuple(np.round(np.concatenate([p.real, p.imag]), 9)))
    return [(p, fix_dimension(f, p, eig_tol)) for p in found]


def fix_components(scan, f: HolomorphicMap, d: Domain, tol: float = 1e-8, checks: int = 16):
    """Group scan results into components of the fixed set.

    Two fixed points of the same dimension are linked when the straight
    segment between them stays in ``d`` and consists of fixed points, which
    is the case on affine pieces of the fixed set.
    """
    pts = [p for p, _ in scan]
    dims = [rep.dim for _, rep in scan]
    parent = list(range(len(pts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    t = np.linspace(0, 1, checks)[:, None]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if dims[i] != dims[j] or dims[i] == 0 or find(i) == find(j):
                continue
            seg = pts[i] + t * (pts[j] - pts[i])
            if not np.all(d.contains_many(seg)):
                continue
            try:
                F = f.evaluate_many(seg)
            except (PoleError, EvaluationError):
                continue
            if np.max(np.linalg.norm(F - seg, axis=1)) < tol:
                parent[find(j)] = find(i)
    groups = {}
    for i, p in enumerate(pts):
        groups.setdefault(find(i), {"dim": dims[i], "points": []})["points"].append(p)
    return list(groups.values())


# ------------------------------------------------------------------ iterate limits


def _stabilize(f, d, z, budget, tol):
    """Iterate until ``|f^{m+1} - f^m| < tol``, confirmed by ``|f^{2m} - f^m| < tol``."""
    z0 = as_vector(z, d.dim)
    zm = z0
    for m in range(budget):
        nxt = f(zm)
        if not d.contains(nxt):
            raise DomainEscapeError(f"orbit left the domain at step {m + 1}", point=nxt, step=m + 1)
        if np.linalg.norm(nxt - zm) < tol:
            w = zm
            for _ in range(max(m, 1)):
                w = f(w)
            if np.linalg.norm(w - zm) < tol:
                return zm, {"m": m, "confirmed": True}
        zm = nxt
    diag = {"m": budget, "confirmed": False, "last_step": float(np.linalg.norm(f(zm) - zm))}
    period = None
    w = zm
    for p in range(1, 33):
        w = f(w)
        if np.linalg.norm(w - zm) < tol:
            period = p
            break
    diag["period"] = period
    raise NoStabilizationError(f"orbit of {z0} did not stabilise within {budget} iterations", diag)


def iterate_limit_retraction(
    f: HolomorphicMap, d: Domain, a, budget: int = 10_000, tol: float = 1e-10, probes: int = 8, seed: int = 0
) -> RetractionApprox:
    """Retraction approximated by high iterates ``f^m`` with ``m`` chosen per point.

    A few probes around ``a`` are evaluated up front; if their orbits do not
    settle the result is returned with ``stabilized=False`` and diagnostics
    instead of an answer.
    """
    a = as_vector(a, d.dim)
    if _residual(f, a) >= max(tol, 1e-10):
        raise PreconditionError(f"{a} is not a fixed point (residual {_residual(f, a):.3e})")
    diagnostics = {}

    def evaluate(z):
        p, info = _stabilize(f, d, z, budget, tol)
        diagnostics[tuple(np.round(as_vector(z), 12))] = info
        return p

    rng = np.random.default_rng(seed)
    radius = 0.25 * d.boundary_gap(a)
    stabilized = True
    failures = []
    for _ in range(probes):
        v = rng.normal(size=d.dim) + 1j * rng.normal(size=d.dim)
        z = a + radius * rng.random() * v / np.linalg.norm(v)
        try:
            evaluate(z)
        except NoStabilizationError as exc:
            stabilized = False
            failures.append(exc.diagnostics)
    if failures:
        diagnostics["failures"] = failures
    return RetractionApprox(evaluate, None, diagnostics, stabilized)
