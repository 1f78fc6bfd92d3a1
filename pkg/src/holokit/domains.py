"""Bounded domains in C^n described by modulus inequalities.

Every domain answers the same small set of queries: membership with a
slack margin, a certified lower bound on the Euclidean distance to the
boundary, a bounding radius about the origin, deterministic sampling, and
the support function ``sup |<u, z>|`` used to scale linear functionals.

Model domains (norm balls, polydiscs, annuli) answer exactly.  An
``InequalityDomain`` is given by constraints ``lo < |g(z)| < b`` with
rational ``g``; its boundary gap is a Lipschitz estimate and its bounding
box is probed numerically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    OutsideDomainError,
    ParseError,
    SamplingError,
    UnboundedDomainError,
)
from .expr import HolomorphicMap, Var, as_vector, parse_expression, _Env

SAMPLE_MARGIN = 1e-9
PROBE_LIMIT = 1e3


def _rows(Z, dim):
    return np.asarray(Z, dtype=complex).reshape(-1, dim)


class Domain:
    """Interface shared by all domains.  Subclasses set ``dim``."""

    convex = False
    circled = False
    balanced = False

    # -- membership -------------------------------------------------------

    def slack_many(self, Z) -> np.ndarray:
        """Smallest slack among the defining inequalities (positive inside)."""
        raise NotImplementedError

    def slack(self, z) -> float:
        return float(self.slack_many(as_vector(z, self.dim)[None, :])[0])

    def contains_many(self, Z, margin=0.0) -> np.ndarray:
        s = self.slack_many(Z)
        return (s > 0) & (s >= margin)

    def contains(self, z, margin=0.0) -> bool:
        z = as_vector(z, self.dim)
        return bool(self.contains_many(z[None, :], margin)[0])

    # -- geometry ---------------------------------------------------------

    def gap_many(self, Z) -> np.ndarray:
        """Lower bound on the distance to the boundary; non-positive outside."""
        raise NotImplementedError

    def boundary_gap(self, z) -> float:
        z = as_vector(z, self.dim)
        if not self.contains(z):
            raise OutsideDomainError(f"point {z} is not in the domain")
        return float(self.gap_many(z[None, :])[0])

    def bounding_radius(self) -> float:
        raise NotImplementedError

    def coordinate_bounds(self) -> np.ndarray:
        """Per-coordinate modulus bounds (a polydisc containing the domain)."""
        raise NotImplementedError

    def support(self, u) -> float:
        """An upper bound for ``sup_{z in D} |sum_j u_j z_j|`` (exact for models)."""
        return float(np.sum(np.abs(as_vector(u, self.dim)) * self.coordinate_bounds()))

    def transport(self, z):
        """Automorphism sending ``z`` to the origin, or ``None`` if unavailable."""
        return None

    # -- sampling ---------------------------------------------------------

    def sample(self, count: int, seed: int = 0, margin: float = SAMPLE_MARGIN) -> np.ndarray:
        """Draw ``count`` points by rejection from the coordinate polydisc."""
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        bounds = self.coordinate_bounds()
        out = []
        got = drawn = 0
        batch = max(1024, 4 * count)
        while got < count:
            Z = _disc_box(rng, bounds, batch)
            drawn += batch
            keep = Z[self.contains_many(Z, margin)]
            out.append(keep)
            got += len(keep)
            if drawn >= 1_000_000 and got / drawn < 1e-6:
                raise SamplingError(f"acceptance ratio {got / drawn:.2e} too small after {drawn} draws")
            if drawn >= 50_000_000:
                raise SamplingError(f"only {got} of {count} samples after {drawn} draws")
        return np.concatenate(out)[:count]

    def describe(self) -> str:
        return repr(self)


def _disc_box(rng, bounds, count):
    n = len(bounds)
    r = bounds * np.sqrt(rng.random((count, n)))
    return r * np.exp(2j * np.pi * rng.random((count, n)))


# ------------------------------------------------------------------ balls


def _pnorm(Z, p):
    A = np.abs(Z)
    if p == np.inf:
        return A.max(axis=-1)
    if p == 1:
        return A.sum(axis=-1)
    if p == 2:
        return np.sqrt((A * A).sum(axis=-1))
    return (A**p).sum(axis=-1) ** (1.0 / p)


def _dual_exponent(p):
    if p == 1:
        return np.inf
    if p == np.inf:
        return 1.0
    return p / (p - 1.0)


_NORM_NAMES = {"h": 2.0, "hermitian": 2.0, "sup": np.inf, "1": 1.0, "one": 1.0}


@dataclass(frozen=True)
class NormBall(Domain):
    """Unit ball of the l^p norm on C^n (``p=2`` is the hermitian ball)."""

    p: float
    dim: int

    convex = True
    circled = True
    balanced = True

    def __post_init__(self):
        p = _NORM_NAMES.get(self.p, self.p) if isinstance(self.p, str) else self.p
        p = float(p)
        if not p >= 1:
            raise ValueError("norm exponent must be >= 1")
        object.__setattr__(self, "p", p)
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def norm_name(self):
        return {2.0: "h", np.inf: "sup", 1.0: "1"}.get(self.p, f"p={self.p:g}")

    def norm(self, z):
        return _pnorm(np.asarray(z, dtype=complex), self.p)

    def gauge_many(self, Z):
        return self.norm(_rows(Z, self.dim))

    def dual_norm(self, u):
        return _pnorm(np.asarray(u, dtype=complex), _dual_exponent(self.p))

    def slack_many(self, Z):
        return 1.0 - self.norm(_rows(Z, self.dim))

    def gap_many(self, Z):
        Z = _rows(Z, self.dim)
        n, p = self.dim, self.p
        if p == np.inf:
            return np.min(1.0 - np.abs(Z), axis=1)
        # ||h||_p <= n^max(0, 1/p - 1/2) ||h||_2, so this is a lower bound (exact for p >= 2 along axes)
        return (1.0 - self.norm(Z)) / n ** max(0.0, 1.0 / p - 0.5)

    def bounding_radius(self):
        return float(self.dim ** max(0.0, 0.5 - 1.0 / self.p))

    def coordinate_bounds(self):
        return np.ones(self.dim)

    def support(self, u):
        return float(self.dual_norm(as_vector(u, self.dim)))

    def peak_functional(self, z) -> np.ndarray:
        """Linear functional ``u`` of dual norm 1 with ``sum(u * z) = ||z||``."""
        z = as_vector(z, self.dim)
        nz = float(self.norm(z))
        if nz == 0:
            u = np.zeros(self.dim, dtype=complex)
            u[0] = 1.0
            return u
        a = np.abs(z)
        phase = np.where(a > 0, np.conj(z) / np.where(a > 0, a, 1), 0)
        if self.p == np.inf:
            u = np.zeros(self.dim, dtype=complex)
            j = int(np.argmax(a))
            u[j] = phase[j]
            return u
        if self.p == 1:
            return np.where(a > 0, phase, 1.0 + 0j)
        return phase * a ** (self.p - 1) / nz ** (self.p - 1)

    def check_dual(self, u, samples=2000, seed=0) -> float:
        """Largest ``|sum(u*z)|`` over random unit-sphere points; should not exceed 1."""
        rng = np.random.default_rng(seed)
        Z = rng.normal(size=(samples, self.dim)) + 1j * rng.normal(size=(samples, self.dim))
        # include the points where the functional peaks
        Z = np.vstack([Z, np.conj(np.asarray(u))[None, :]])
        Z = Z / self.norm(Z)[:, None]
        return float(np.max(np.abs(Z @ np.asarray(u))))

    def transport(self, z):
        z = as_vector(z, self.dim)
        if self.p == 2:
            return BallAutomorphism(z)
        if self.p == np.inf:
            return PolydiscAutomorphism(z, np.ones(self.dim))
        return None

    def describe(self):
        if self.p == 2 and self.dim == 1:
            return "disc"
        return f"ball({self.norm_name}, {self.dim})"


BallGeometry = NormBall


def unit_disc() -> NormBall:
    return NormBall(2.0, 1)


@dataclass(frozen=True)
class Polydisc(Domain):
    radii: tuple

    convex = True
    circled = True
    balanced = True

    def __post_init__(self):
        radii = tuple(float(r) for r in np.atleast_1d(self.radii))
        if not radii or min(radii) <= 0:
            raise ValueError("polydisc radii must be positive")
        object.__setattr__(self, "radii", radii)

    @property
    def dim(self):
        return len(self.radii)

    @property
    def r(self):
        return np.array(self.radii)

    def slack_many(self, Z):
        return np.min(self.r - np.abs(_rows(Z, self.dim)), axis=1)

    gap_many = slack_many

    def gauge_many(self, Z):
        return np.max(np.abs(_rows(Z, self.dim)) / self.r, axis=1)

    def peak_functional(self, z):
        z = as_vector(z, self.dim)
        j = int(np.argmax(np.abs(z) / self.r))
        u = np.zeros(self.dim, dtype=complex)
        u[j] = (np.conj(z[j]) / abs(z[j]) if z[j] != 0 else 1.0) / self.r[j]
        return u

    def bounding_radius(self):
        return float(np.sqrt(np.sum(self.r**2)))

    def coordinate_bounds(self):
        return self.r.copy()

    def transport(self, z):
        return PolydiscAutomorphism(as_vector(z, self.dim), self.r)

    def describe(self):
        return "polydisc(" + ", ".join(f"{r:g}" for r in self.radii) + ")"


@dataclass(frozen=True)
class Annulus(Domain):
    """``{1/R < |z| < R}`` in C."""

    R: float
    dim: int = 1

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError("annulus needs R > 1")
        if self.dim != 1:
            raise ValueError("annulus is one-dimensional")

    def slack_many(self, Z):
        a = np.abs(_rows(Z, 1)[:, 0])
        return np.minimum(self.R - a, a - 1.0 / self.R)

    gap_many = slack_many

    def bounding_radius(self):
        return float(self.R)

    def coordinate_bounds(self):
        return np.array([float(self.R)])

    def describe(self):
        return f"annulus({self.R:g})"


# ------------------------------------------------------------------ products


@dataclass(frozen=True)
class Product(Domain):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("product needs at least one factor")

    @property
    def dims(self):
        return [f.dim for f in self.factors]

    @property
    def dim(self):
        return sum(self.dims)

    @property
    def convex(self):
        return all(f.convex for f in self.factors)

    @property
    def circled(self):
        return all(f.circled for f in self.factors)

    @property
    def balanced(self):
        return all(f.balanced for f in self.factors)

    def gauge_many(self, Z):
        return np.max([f.gauge_many(B) for f, B in zip(self.factors, self.blocks(Z))], axis=0)

    def peak_functional(self, z):
        blocks = self.blocks(as_vector(z, self.dim))
        k = int(np.argmax([f.gauge_many(B)[0] for f, B in zip(self.factors, blocks)]))
        parts = [np.zeros(f.dim, dtype=complex) for f in self.factors]
        parts[k] = self.factors[k].peak_functional(blocks[k][0])
        return np.concatenate(parts)

    def blocks(self, Z):
        Z = _rows(Z, self.dim)
        edges = np.cumsum([0] + self.dims)
        return [Z[:, edges[k] : edges[k + 1]] for k in range(len(self.factors))]

    def slack_many(self, Z):
        return np.min([f.slack_many(B) for f, B in zip(self.factors, self.blocks(Z))], axis=0)

    def gap_many(self, Z):
        return np.min([f.gap_many(B) for f, B in zip(self.factors, self.blocks(Z))], axis=0)

    def bounding_radius(self):
        return float(np.sqrt(sum(f.bounding_radius() ** 2 for f in self.factors)))

    def coordinate_bounds(self):
        return np.concatenate([f.coordinate_bounds() for f in self.factors])

    def support(self, u):
        return float(sum(f.support(B[0]) for f, B in zip(self.factors, self.blocks(as_vector(u, self.dim)))))

    def transport(self, z):
        parts = [f.transport(B[0]) for f, B in zip(self.factors, self.blocks(as_vector(z, self.dim)))]
        if any(p is None for p in parts):
            return None
        return ProductAutomorphism(tuple(parts), tuple(self.dims))

    def sample(self, count, seed=0, margin=SAMPLE_MARGIN):
        seqs = np.random.SeedSequence([seed, len(self.factors)]).spawn(len(self.factors))
        parts = [
            f.sample(count, seed=int(s.generate_state(1)[0]), margin=margin) for f, s in zip(self.factors, seqs)
        ]
        return np.hstack(parts)

    def describe(self):
        return "product(" + ", ".join(f.describe() for f in self.factors) + ")"


# ------------------------------------------------------------------ inequality domains


@dataclass(frozen=True)
class Constraint:
    """``lower < |g(z)| < upper``; either bound may be ``None``."""

    g: HolomorphicMap
    upper: float | None = None
    lower: float | None = None

    def slack_many(self, Z):
        G = self.g.evaluate_many(Z, on_pole="nan")[:, 0]
        a = np.abs(G)
        s = np.full(a.shape, np.inf)
        if self.upper is not None:
            s = np.minimum(s, self.upper - a)
        if self.lower is not None:
            s = np.minimum(s, a - self.lower)
        return np.where(np.isfinite(a), s, -np.inf)

    def structural_bound(self):
        """Index and bound when the constraint reads ``|z_j| < b``."""
        node = self.g.components[0]
        if isinstance(node, Var) and self.upper is not None:
            return node.index, float(self.upper)
        return None

    def describe(self):
        s = f"|{self.g.to_text()}|"
        if self.lower is not None:
            s = f"{self.lower:g} < {s}"
        if self.upper is not None:
            s = f"{s} < {self.upper:g}"
        return s


@dataclass(frozen=True)
class InequalityDomain(Domain):
    constraints: tuple
    dim: int
    declared_convex: bool = False
    box: tuple | None = None
    probe_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.box is not None:
            object.__setattr__(self, "box", tuple(float(b) for b in self.box))

    @property
    def convex(self):
        return self.declared_convex

    def slack_many(self, Z):
        Z = _rows(Z, self.dim)
        s = np.full(Z.shape[0], np.inf)
        for c in self.constraints:
            s = np.minimum(s, c.slack_many(Z))
        return s

    @cached_property
    def _bounds(self):
        if self.box is not None:
            return np.array(self.box)
        bounds = np.full(self.dim, np.nan)
        for c in self.constraints:
            sb = c.structural_bound()
            if sb is not None:
                j, b = sb
                bounds[j] = b if np.isnan(bounds[j]) else min(bounds[j], b)
        missing = np.flatnonzero(np.isnan(bounds))
        if len(missing):
            bounds[missing] = self._probe(bounds, missing)
        return bounds

    def _probe(self, known, missing, shells=240, per_shell=4000):
        """Escape test: largest shell radius on which members are found."""
        rng = np.random.default_rng(self.probe_seed)
        radii = np.geomspace(1e-3, PROBE_LIMIT, shells)
        out = []
        for j in missing:
            last_hit = -1
            for k, t in enumerate(radii):
                Z = np.empty((per_shell, self.dim), dtype=complex)
                for i in range(self.dim):
                    if i == j:
                        mod = np.full(per_shell, t)
                    elif np.isnan(known[i]):
                        # log-uniform moduli, with a share of exact zeros for thin unbounded arms
                        mod = np.exp(rng.uniform(np.log(1e-9), np.log(PROBE_LIMIT), per_shell))
                        mod[rng.random(per_shell) < 0.1] = 0.0
                    else:
                        mod = known[i] * np.sqrt(rng.random(per_shell))
                    Z[:, i] = mod * np.exp(2j * np.pi * rng.random(per_shell))
                if np.any(self.contains_many(Z)):
                    last_hit = k
            if last_hit == len(radii) - 1:
                raise UnboundedDomainError(f"members found with |z{j}| = {PROBE_LIMIT:g}; domain looks unbounded")
            if last_hit < 0:
                raise SamplingError(f"no members found while probing coordinate {j}")
            out.append(radii[last_hit + 1])
        return np.array(out)

    def coordinate_bounds(self):
        return self._bounds.copy()

    def bounding_radius(self):
        return float(np.sqrt(self.dim) * np.max(self._bounds))

    def gap_many(self, Z):
        Z = _rows(Z, self.dim)
        return np.array([self._lipschitz_gap(z) if s > 0 else s for z, s in zip(Z, self.slack_many(Z))])

    def _lipschitz_gap(self, z, cloud=256, rounds=30):
        """Largest r such that slack / (max gradient norm on B(z, rho)) = r <= rho."""
        rng = np.random.default_rng(self.probe_seed + 1)
        slacks = [c.slack_many(z[None, :])[0] for c in self.constraints]
        rho = self.bounding_radius()
        best = 0.0
        dirs = rng.normal(size=(cloud, self.dim)) + 1j * rng.normal(size=(cloud, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        scale = np.concatenate([np.ones(cloud // 4), rng.random(cloud - cloud // 4) ** (1.0 / (2 * self.dim))])
        for _ in range(rounds):
            P = np.vstack([z[None, :], z + rho * scale[:, None] * dirs])
            r = np.inf
            for c, s in zip(self.constraints, slacks):
                J = c.g.jacobian_many(P, on_pole="nan")[:, 0, :]
                L = np.linalg.norm(J, axis=1)
                L = np.inf if not np.all(np.isfinite(L)) else 1.1 * float(np.max(L))
                r = min(r, s / L if L > 0 else np.inf)
            if r <= rho:
                best = max(best, r)
                if r > 0.5 * rho:
                    break
                rho = 1.5 * r
            else:
                # the bound reaches past the cloud: only rho itself is certified
                best = max(best, rho)
                rho *= 2.0
                if rho > 4 * self.bounding_radius():
                    break
        return best

    def describe(self):
        return f"domain({self.dim}){{" + "; ".join(c.describe() for c in self.constraints) + "}"


# ------------------------------------------------------------------ automorphisms


@dataclass(frozen=True)
class BallAutomorphism:
    """Involutive automorphism of the hermitian ball exchanging ``a`` and 0."""

    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", as_vector(self.a))

    def apply_many(self, Z):
        a = self.a
        Z = np.asarray(Z, dtype=complex).reshape(-1, len(a))
        na2 = float(np.real(np.vdot(a, a)))
        s = np.sqrt(1.0 - na2)
        inner = Z @ np.conj(a)  # <z, a>
        if na2 == 0:
            return -Z
        P = inner[:, None] * a[None, :] / na2
        MZ = P + s * (Z - P)
        return (a[None, :] - MZ) / (1.0 - inner)[:, None]

    def __call__(self, z):
        return self.apply_many(np.atleast_1d(z))[0]

    def inverse_many(self, Z):
        return self.apply_many(Z)

    def inverse(self, z):
        return self(z)

    def differential_at_base(self, v):
        """d(phi)(a) v; the norm of this gives the invariant metric at ``a``."""
        a = self.a
        v = as_vector(v, len(a))
        na2 = float(np.real(np.vdot(a, a)))
        s2 = 1.0 - na2
        if na2 == 0:
            return -v
        P = (v @ np.conj(a)) * a / na2
        return -(P + np.sqrt(s2) * (v - P)) / s2

    def inverse_differential_at_origin(self, v):
        """d(phi^-1)(0) v, a vector at ``a``."""
        a = self.a
        v = as_vector(v, len(a))
        na2 = float(np.real(np.vdot(a, a)))
        if na2 == 0:
            return -v
        P = (v @ np.conj(a)) * a / na2
        return -(1.0 - na2) * P - np.sqrt(1.0 - na2) * (v - P)


@dataclass(frozen=True)
class PolydiscAutomorphism:
    """Coordinatewise Moebius automorphism of the polydisc of radii ``r`` sending ``a`` to 0."""

    a: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", as_vector(self.a))
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))

    def apply_many(self, Z):
        W = np.asarray(Z, dtype=complex).reshape(-1, len(self.a)) / self.r
        b = self.a / self.r
        return self.r * (W - b) / (1.0 - np.conj(b) * W)

    def __call__(self, z):
        return self.apply_many(np.atleast_1d(z))[0]

    def inverse_many(self, Z):
        W = np.asarray(Z, dtype=complex).reshape(-1, len(self.a)) / self.r
        b = self.a / self.r
        return self.r * (W + b) / (1.0 + np.conj(b) * W)

    def inverse(self, z):
        return self.inverse_many(np.atleast_1d(z))[0]

    def differential_at_base(self, v):
        b = self.a / self.r
        return as_vector(v, len(self.a)) / (1.0 - np.abs(b) ** 2)

    def inverse_differential_at_origin(self, v):
        b = self.a / self.r
        return as_vector(v, len(self.a)) * (1.0 - np.abs(b) ** 2)


@dataclass(frozen=True)
class ProductAutomorphism:
    parts: tuple
    dims: tuple

    def _split(self, Z):
        Z = np.asarray(Z, dtype=complex).reshape(-1, sum(self.dims))
        edges = np.cumsum((0,) + self.dims)
        return [Z[:, edges[k] : edges[k + 1]] for k in range(len(self.dims))]

    def apply_many(self, Z):
        return np.hstack([p.apply_many(B) for p, B in zip(self.parts, self._split(Z))])

    def inverse_many(self, Z):
        return np.hstack([p.inverse_many(B) for p, B in zip(self.parts, self._split(Z))])

    def __call__(self, z):
        return self.apply_many(np.atleast_1d(z))[0]

    def inverse(self, z):
        return self.inverse_many(np.atleast_1d(z))[0]

    def differential_at_base(self, v):
        return np.concatenate([p.differential_at_base(B[0]) for p, B in zip(self.parts, self._split(v))])

    def inverse_differential_at_origin(self, v):
        return np.concatenate([p.inverse_differential_at_origin(B[0]) for p, B in zip(self.parts, self._split(v))])


# ------------------------------------------------------------------ grammar


def _split_top(text, sep):
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts]


def _constant(text):
    node = parse_expression(text, 0)
    return complex(node.evaluate(_Env([])))


def _real(text):
    v = _constant(text)
    if v.imag != 0:
        raise ParseError(f"expected a real number, got {text!r}")
    return v.real


def _infer_arity(exprs):
    idx = [int(m) for e in exprs for m in re.findall(r"\bz(\d+)\b", e)]
    if idx:
        return max(idx) + 1
    if any(re.search(r"\by\b", e) for e in exprs):
        return 2
    return 1


_ITEM = re.compile(r"^(?:(?P<lo>[^|<]+?)\s*<\s*)?\|(?P<expr>[^|]+)\|(?:\s*<\s*(?P<hi>[^|<]+))?$")


def parse_domain(text: str) -> Domain:
    """Parse the textual domain grammar used by the command line."""
    t = text.strip()
    m = re.fullmatch(r"(\w+)\s*(?:\((.*)\))?\s*(\{.*\})?", t, flags=re.S)
    if m is None:
        raise ParseError(f"cannot parse domain {text!r}")
    kind, args, body = m.group(1), m.group(2), m.group(3)
    argv = _split_top(args, ",") if args is not None and args.strip() else []
    if kind == "disc" and not argv and body is None:
        return unit_disc()
    if kind == "ball" and len(argv) == 2:
        norm = argv[0].replace(" ", "")
        if norm.startswith("p="):
            p = _real(norm[2:])
        elif norm in _NORM_NAMES:
            p = _NORM_NAMES[norm]
        else:
            raise ParseError(f"unknown norm {argv[0]!r}")
        return NormBall(p, int(_real(argv[1])))
    if kind == "polydisc" and argv:
        return Polydisc(tuple(_real(a) for a in argv))
    if kind == "annulus" and len(argv) == 1:
        return Annulus(_real(argv[0]))
    if kind == "product" and argv:
        return Product(tuple(parse_domain(a) for a in argv))
    if kind == "domain" and body is not None:
        items = [s for s in _split_top(body[1:-1], ";") if s]
        convex = "convex" in items
        items = [s for s in items if s != "convex"]
        parsed = []
        for item in items:
            im = _ITEM.match(item)
            if im is None or (im.group("lo") is None and im.group("hi") is None):
                raise ParseError(f"cannot parse constraint {item!r}")
            parsed.append(im)
        n = int(_real(argv[0])) if argv else _infer_arity([im.group("expr") for im in parsed])
        from .expr import parse_map

        cons = []
        for im in parsed:
            g = parse_map(im.group("expr"), n)
            lo = _real(im.group("lo")) if im.group("lo") else None
            hi = _real(im.group("hi")) if im.group("hi") else None
            cons.append(Constraint(g, upper=hi, lower=lo))
        d = InequalityDomain(tuple(cons), n, declared_convex=convex)
        d.coordinate_bounds()  # boundedness probe runs up front
        return d
    raise ParseError(f"cannot parse domain {text!r}")


def contains(d: Domain, z, margin=0.0) -> bool:
    return d.contains(z, margin)


def boundary_gap(d: Domain, z) -> float:
    return d.boundary_gap(z)


def bounding_radius(d: Domain) -> float:
    return d.bounding_radius()


def sample(d: Domain, count: int, seed: int = 0) -> np.ndarray:
    return d.sample(count, seed)
