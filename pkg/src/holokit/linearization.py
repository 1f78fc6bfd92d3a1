"""Linearizing charts for retractions, automorphisms and finite groups."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domains import Domain
from .errors import (
    DomainEscapeError,
    EvaluationError,
    NonConvergenceError,
    NotAGroupError,
    NotARetractionError,
    PoleError,
    PreconditionError,
)
from .expr import HolomorphicMap, affine_post, as_vector, linear_combination


@dataclass(frozen=True)
class ChartApprox:
    forward: Callable
    inverse: Callable
    base: np.ndarray
    P: np.ndarray
    conjugacy_defect: float
    verified_radius: float = 0.0
    jacobian_at_base: np.ndarray | None = None

    def __call__(self, z):
        return self.forward(z)

    def to_dict(self):
        return {
            "base": self.base,
            "linear_part": self.P,
            "conjugacy_defect": self.conjugacy_defect,
            "verified_radius": self.verified_radius,
        }


@dataclass(frozen=True)
class CircledLinearPart:
    matrix: np.ndarray
    defect: float
    nodes: int

    def to_dict(self):
        return {"matrix": self.matrix, "defect": self.defect, "nodes": self.nodes}


@dataclass(frozen=True)
class UniquenessReport:
    residual: float
    violations: int
    samples: int

    @property
    def self_map_ok(self):
        return self.violations == 0

    def to_dict(self):
        return {"residual": self.residual, "violations": self.violations, "samples": self.samples}


def _ball_probes(center, radius, count, seed):
    rng = np.random.default_rng(seed)
    n = len(center)
    V = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    V /= np.linalg.norm(V, axis=1)[:, None]
    return center + radius * rng.random(count)[:, None] ** (1.0 / (2 * n)) * V


def _newton_inverse(forward, jac, w, start, tol=1e-13, max_iter=50):
    """Solve ``forward(z) = w`` by damped Newton."""
    z = start
    F = forward(z) - w
    for _ in range(max_iter):
        res = float(np.linalg.norm(F))
        if res < tol:
            return z
        step = np.linalg.solve(jac(z), -F)
        t = 1.0
        while t > 1e-8:
            try:
                Fn = forward(z + t * step) - w
            except (PoleError, EvaluationError):
                Fn = None
            if Fn is not None and np.linalg.norm(Fn) < res:
                z, F = z + t * step, Fn
                break
            t *= 0.5
        else:
            break
    if float(np.linalg.norm(F)) < max(tol, 1e-10):
        return z
    raise NonConvergenceError("chart inverse did not converge", best=z, residual=float(np.linalg.norm(F)))


def _verified_radius(forward, inverse, base, radii=(0.4, 0.2, 0.1, 0.05, 0.02, 0.01), count=16, seed=1):
    for r in radii:
        ok = True
        for z in _ball_probes(base, r, count, seed):
            try:
                if np.linalg.norm(inverse(forward(z)) - z) >= 1e-8:
                    ok = False
                    break
            except (NonConvergenceError, PoleError, EvaluationError, np.linalg.LinAlgError):
                ok = False
                break
        if ok:
            return r
    return 0.0


# ------------------------------------------------------------------ retraction chart


def cartan_chart(
    rho: HolomorphicMap, z0, probe_radius: float = 0.05, probes: int = 64, seed: int = 0
) -> ChartApprox:
    """Chart ``u = x + (2P - I)(rho(x) - P x)`` (``x = z - z0``) conjugating ``rho`` to ``P = rho'(z0)``."""
    z0 = as_vector(z0, rho.arity)
    n = rho.arity
    if np.linalg.norm(rho(z0) - z0) >= 1e-10:
        raise PreconditionError("base point is not fixed by the retraction")
    P = rho.jacobian(z0)
    if np.linalg.norm(P @ P - P) >= 1e-8:
        raise NotARetractionError(f"derivative at the base point is not idempotent (defect {np.linalg.norm(P @ P - P):.2e})")
    cloud = []
    for z in _ball_probes(z0, probe_radius, probes, seed):
        try:
            rz = rho(z)
            if np.linalg.norm(rho(rz) - rz) >= 1e-8:
                raise NotARetractionError(f"rho o rho != rho at {z}")
            cloud.append(z)
        except (PoleError, EvaluationError):
            warnings.warn(f"probe {z} skipped: outside the evaluation domain", RuntimeWarning)
    M = 2 * P - np.eye(n)
    u = affine_post(rho, M, -z0 - M @ z0 + M @ P @ z0, include_input=np.eye(n) - M @ P)

    defect = 0.0
    for z in cloud:
        defect = max(defect, float(np.linalg.norm(u(rho(z)) - P @ u(z))))

    def inverse(w):
        return _newton_inverse(u, u.jacobian, as_vector(w, n), z0 + as_vector(w, n))

    return ChartApprox(u, inverse, z0, P, defect, _verified_radius(u, inverse, z0), u.jacobian(z0))


# ------------------------------------------------------------------ averaging charts


def _orbit(f, z, steps, guard):
    out = [z]
    for k in range(steps):
        z = f(z)
        if guard is not None and not guard.contains(z):
            raise DomainEscapeError("probe orbit escaped", point=z, step=k + 1)
        out.append(z)
    return out


def iterate_average_chart(
    f: HolomorphicMap,
    a,
    n: int,
    probe_radius: float = 0.1,
    probes: int = 32,
    seed: int = 0,
    guard: Domain | None = None,
) -> ChartApprox:
    """Average ``(1/n) sum_p A^-p (f^p(z) - a)`` with ``A = f'(a)``; conjugates ``f`` towards ``A``."""
    a = as_vector(a, f.arity)
    dim = f.arity
    if np.linalg.norm(f(a) - a) >= 1e-10:
        raise PreconditionError("a is not a fixed point")
    A = f.jacobian(a)
    if abs(np.linalg.det(A)) < 1e-12:
        raise PreconditionError("derivative at the fixed point is not invertible")
    Ainv = np.linalg.inv(A)
    powers = [np.eye(dim, dtype=complex)]
    for _ in range(n):
        powers.append(Ainv @ powers[-1])

    def chart_from_orbit(orbit, shift=0):
        return sum(powers[p] @ (orbit[p + shift] - a) for p in range(n)) / n

    def forward(z):
        return chart_from_orbit(_orbit(f, as_vector(z, dim), n - 1, guard))

    def jac(z):
        z = as_vector(z, dim)
        D = np.eye(dim, dtype=complex)
        total = np.zeros((dim, dim), dtype=complex)
        for p in range(n):
            total += powers[p] @ D
            D = f.jacobian(z) @ D
            z = f(z)
        return total / n

    defect, kept = 0.0, 0
    for z in _ball_probes(a, probe_radius, probes, seed):
        try:
            orbit = _orbit(f, z, n, guard)
        except (DomainEscapeError, PoleError, EvaluationError):
            continue
        kept += 1
        defect = max(defect, float(np.linalg.norm(chart_from_orbit(orbit, 1) - A @ chart_from_orbit(orbit))))
    if kept == 0:
        raise DomainEscapeError("every probe orbit escaped")

    def inverse(w):
        return _newton_inverse(forward, jac, as_vector(w, dim), a + as_vector(w, dim))

    return ChartApprox(forward, inverse, a, A, defect, _verified_radius(forward, inverse, a), jac(a))


def _same_map(g, h, cloud, tol=1e-8):
    try:
        return bool(np.max(np.linalg.norm(g.evaluate_many(cloud) - h.evaluate_many(cloud), axis=1)) < tol)
    except (PoleError, EvaluationError):
        return False


def finite_group_average_chart(
    maps: Sequence[HolomorphicMap], a, probe_radius: float = 0.1, probes: int = 32, seed: int = 0
) -> ChartApprox:
    """Uniform average ``(1/|G|) sum_g g'(a)^-1 (g(z) - a)`` over a finite group fixing ``a``."""
    maps = list(maps)
    dim = maps[0].arity
    a = as_vector(a, dim)
    for g in maps:
        if np.linalg.norm(g(a) - a) >= 1e-10:
            raise NotAGroupError("a group element does not fix the base point")
    cloud = _ball_probes(a, probe_radius, probes, seed)
    for g in maps:
        for h in maps:
            gh = g.compose(h)
            if not any(_same_map(gh, k, cloud) for k in maps):
                raise NotAGroupError("the list is not closed under composition")
    N = len(maps)
    inverses = [np.linalg.inv(g.jacobian(a)) for g in maps]
    comps = []
    for j in range(dim):
        terms = [(inv[j, k] / N, g.components[k]) for g, inv in zip(maps, inverses) for k in range(dim)]
        const = -sum(inv[j] @ a for inv in inverses) / N
        comps.append(linear_combination(terms, const))
    phi = HolomorphicMap(tuple(comps), dim)

    defect = 0.0
    for g in maps:
        A = g.jacobian(a)
        for z in cloud:
            defect = max(defect, float(np.linalg.norm(phi(g(z)) - A @ phi(z))))

    def inverse(w):
        return _newton_inverse(phi, phi.jacobian, as_vector(w, dim), a + as_vector(w, dim))

    return ChartApprox(phi, inverse, a, np.eye(dim), defect, _verified_radius(phi, inverse, a), phi.jacobian(a))


# ------------------------------------------------------------------ circled domains


def _theta_average(f, z, nodes):
    w = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    F = f.evaluate_many(w[:, None] * z[None, :])
    return (np.conj(w)[:, None] * F).mean(axis=0)


def circled_linear_part(
    f: HolomorphicMap,
    d: Domain | None = None,
    nodes: int = 256,
    probes: int = 64,
    seed: int = 0,
    radius: float = 0.5,
    max_nodes: int = 4096,
) -> CircledLinearPart:
    """Linear part ``(1/2pi) int f(e^{it} z) e^{-it} dt`` by the periodic trapezoid rule.

    The matrix is read off from ``radius * e_j``; the node count is doubled
    until two successive matrices agree.  The defect is the largest
    ``|f(z) - L z|`` over probes in ``d`` (or in the ball of ``radius``).
    """
    n = f.arity
    if np.linalg.norm(f(np.zeros(n))) >= 1e-10:
        raise PreconditionError("f(0) != 0")
    if d is not None and not d.circled:
        raise PreconditionError("domain is not declared circled")
    E = radius * np.eye(n, dtype=complex)

    def matrix(N):
        return np.column_stack([_theta_average(f, E[j], N) for j in range(n)]) / radius

    L = matrix(nodes)
    while nodes < max_nodes:
        L2 = matrix(2 * nodes)
        done = np.max(np.abs(L2 - L)) < 1e-14
        L, nodes = L2, 2 * nodes
        if done:
            break
    if d is not None:
        Z = d.sample(probes, seed=seed)
    else:
        Z = _ball_probes(np.zeros(n, dtype=complex), radius, probes, seed)
    defect = float(np.max(np.linalg.norm(f.evaluate_many(Z) - Z @ L.T, axis=1)))
    return CircledLinearPart(L, defect, nodes)


def cartan_uniqueness_residual(f: HolomorphicMap, d: Domain, a, samples: int = 2000, seed: int = 0) -> UniquenessReport:
    """Largest ``|f(z) - z|`` on samples for a map with ``f(a) = a`` and ``f'(a) = I``.

    A self-map with these properties is the identity, so a large residual
    together with sampled points mapped outside ``d`` exposes a map that is
    not a self-map.
    """
    a = as_vector(a, d.dim)
    if np.linalg.norm(f(a) - a) >= 1e-10:
        raise PreconditionError("a is not a fixed point")
    if np.linalg.norm(f.jacobian(a) - np.eye(d.dim)) >= 1e-8:
        raise PreconditionError("derivative at a is not the identity")
    Z = d.sample(samples, seed=seed)
    F = f.evaluate_many(Z, on_pole="nan")
    finite = np.all(np.isfinite(F), axis=1)
    inside = finite & d.contains_many(np.where(finite[:, None], F, 0))
    resid = float(np.max(np.linalg.norm(F[finite] - Z[finite], axis=1))) if finite.any() else np.inf
    return UniquenessReport(resid, int(np.sum(~inside)), samples)
