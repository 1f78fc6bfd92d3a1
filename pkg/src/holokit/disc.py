"""Hyperbolic geometry of the unit disc."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, NotSelfMapError, OutsideDomainError

ARTANH_CLAMP = 1.0 - 1e-15


def artanh(t):
    """0.5 log((1+t)/(1-t)) via log1p; ``t`` must stay below 1 - 1e-15."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= ARTANH_CLAMP):
        raise OutsideDomainError("argument too close to the unit circle")
    t = np.maximum(t, 0.0)
    out = 0.5 * (np.log1p(t) - np.log1p(-t))
    return float(out) if out.ndim == 0 else out


def _check_in_disc(*zs):
    for z in zs:
        if not abs(complex(z)) < 1:
            raise OutsideDomainError(f"{z} is not in the open unit disc")


def pseudo_distance(z, w) -> float:
    """Moebius pseudo-distance |(z - w) / (1 - conj(w) z)|."""
    z, w = complex(z), complex(w)
    _check_in_disc(z, w)
    return abs(z - w) / abs(1 - w.conjugate() * z)


def poincare_distance(z, w) -> float:
    return artanh(pseudo_distance(z, w))


def poincare_metric(z, v) -> float:
    z = complex(z)
    _check_in_disc(z)
    return abs(complex(v)) / (1.0 - abs(z) ** 2)


@dataclass(frozen=True)
class Mobius:
    """z -> phase * (z - a) / (1 - conj(a) z)."""

    a: complex = 0j
    phase: complex = 1 + 0j

    def __post_init__(self):
        a, lam = complex(self.a), complex(self.phase)
        if not abs(a) < 1 - 1e-12:
            raise DegeneracyError(f"Moebius centre {a} is not inside the disc")
        if abs(abs(lam) - 1) > 1e-12:
            if abs(abs(lam) - 1) > 1e-9:
                raise DegeneracyError(f"Moebius phase {lam} is not unimodular")
            lam /= abs(lam)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "phase", lam)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.phase * (z - self.a) / (1 - np.conj(self.a) * z)
        return complex(out) if out.ndim == 0 else out

    apply = __call__

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.phase * (1 - abs(self.a) ** 2) / (1 - np.conj(self.a) * z) ** 2
        return complex(out) if out.ndim == 0 else out

    def invert(self) -> "Mobius":
        return Mobius(-self.phase * self.a, self.phase.conjugate())

    def compose(self, other: "Mobius") -> "Mobius":
        """``self o other``."""
        # the composite sends a' to 0, with a' = other^-1(self.a)
        a_new = other.invert()(self.a)
        if not abs(a_new) < 1 - 1e-12:
            raise DegeneracyError("composition degenerated to the boundary")
        d = self.derivative(other(a_new)) * other.derivative(a_new)
        lam = d * (1 - abs(a_new) ** 2)
        return Mobius(a_new, lam / abs(lam))

    def to_text(self, var="z0") -> str:
        lam, a = self.phase, self.a
        return f"({_c(lam)})*({var} - ({_c(a)}))/(1 - ({_c(a.conjugate())})*{var})"


def _c(v):
    v = complex(v)
    return f"{v.real!r} + {v.imag!r}*i" if v.imag >= 0 else f"{v.real!r} - {-v.imag!r}*i"


def mobius_apply(m: Mobius, z):
    return m(z)


def mobius_compose(m1: Mobius, m2: Mobius) -> Mobius:
    return m1.compose(m2)


def mobius_invert(m: Mobius) -> Mobius:
    return m.invert()


def schwarz_pick_defect(f, z, w) -> float:
    """omega(z, w) - omega(f z, f w) for a self-map ``f`` of the disc."""
    z, w = complex(z), complex(w)
    _check_in_disc(z, w)
    fz = complex(np.ravel(f([z]))[0]) if not isinstance(f, Mobius) else f(z)
    fw = complex(np.ravel(f([w]))[0]) if not isinstance(f, Mobius) else f(w)
    for p, q in ((z, fz), (w, fw)):
        if not abs(q) < 1:
            raise NotSelfMapError(f"f({p}) = {q} is outside the disc", point=p)
    return poincare_distance(z, w) - poincare_distance(fz, fw)
