"""Point evaluation of exact expressions, in floating point or exactly."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq

from ..exact import IA, IC, IQ, IS, IU, IU0, GaussianRational, Layout, SymbolExpr


@dataclass(frozen=True)
class EvalPoint:
    """A point (u0, u, alpha, alpha_j).

    ``s`` and ``c`` default to the square roots of u0 and 1 - u0.  For exact
    evaluation pass rational ``s`` and ``c`` with s^2 + c^2 = 1 (u0 is then s^2).
    """

    u0: float | Fraction
    u: tuple
    alpha: float | Fraction
    alphaj: tuple
    s: float | Fraction | None = None
    c: float | Fraction | None = None

    def __post_init__(self):
        if not 0 < self.u0 < 1:
            raise ValueError("u0 must lie strictly between 0 and 1")
        if self.alpha == 0:
            raise ValueError("alpha must be non-zero")
        if self.s is None:
            object.__setattr__(self, "s", math.sqrt(self.u0))
        if self.c is None:
            object.__setattr__(self, "c", math.sqrt(1 - self.u0))

    @classmethod
    def rational(cls, t: Fraction, u, alpha, alphaj) -> "EvalPoint":
        """Exact point on the Pythagorean parametrization s = 2t/(1+t^2), c = (1-t^2)/(1+t^2)."""
        t = Fraction(t)
        s = 2 * t / (1 + t * t)
        c = (1 - t * t) / (1 + t * t)
        return cls(s * s, tuple(Fraction(x) for x in u), Fraction(alpha),
                   tuple(Fraction(x) for x in alphaj), s, c)

    @classmethod
    def from_eta(cls, eta: float, u, alpha, alphaj) -> "EvalPoint":
        s, c = math.sin(eta), math.cos(eta)
        return cls(s * s, tuple(u), alpha, tuple(alphaj), s, c)

    def q_value(self, n: int):
        u = self.u
        Q = u[0] ** 2 + (u[1] ** 2 + u[2] ** 2 + u[3] ** 2) / self.alpha ** 2
        for x in u[4:2 * n + 2]:
            Q = Q + x ** 2
        return Q


def _exact_field(x):
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def evaluate(e: SymbolExpr, p: EvalPoint, *, exact: bool = False):
    """Value of ``e`` at ``p``: a complex float, or a GaussianRational when ``exact``."""
    L: Layout = e.layout
    if len(p.u) < L.N or len(p.alphaj) < L.nA:
        raise ValueError(f"point has too few coordinates for n={L.n}")
    if exact:
        conv = _exact_field
    else:
        conv = float
    u0, s, c, al = conv(p.u0), conv(p.s), conv(p.c), conv(p.alpha)
    if exact and (s * s != u0 or c * c != 1 - u0):
        raise ValueError("exact evaluation needs rational s, c with s^2 = u0 and c^2 = 1 - u0")
    u = [conv(x) for x in p.u[:L.N]]
    aj = [conv(x) for x in p.alphaj[:L.nA]]
    Q = conv(p.q_value(L.n))
    if Q == 0:
        raise ZeroDivisionError("Q vanishes at this point")
    re = mpq(0) if exact else 0.0
    im = mpq(0) if exact else 0.0
    for k, v in e.raw().items():
        if (k[IS] < 0 and s == 0) or (k[IC] < 0 and c == 0):
            raise ZeroDivisionError("s or c vanishes below the line")
        term = conv(v) * u0 ** k[IU0] * s ** k[IS] * c ** k[IC] * al ** k[IA] / Q ** k[IQ]
        for x, ex in zip(u, k[IU:L.iaj]):
            if ex:
                term *= x ** ex
        for x, ex in zip(aj, k[L.iaj:L.ii]):
            if ex:
                term *= x ** ex
        if k[-1]:
            im += term
        else:
            re += term
    if exact:
        return GaussianRational(re, im)
    return complex(re, im)


def evaluate_array(e: SymbolExpr, eta: float, u, alpha: float, alphaj):
    """Complex values of ``e`` at fixed eta for a batch of fibre points ``u`` of shape (N, P)."""
    import numpy as np

    L: Layout = e.layout
    u = np.asarray(u, dtype=float)
    s, c = math.sin(eta), math.cos(eta)
    Q = u[0] ** 2 + (u[1] ** 2 + u[2] ** 2 + u[3] ** 2) / alpha ** 2 + (u[4:L.N] ** 2).sum(axis=0)
    aj = list(alphaj) + [0.0] * (L.nA - len(alphaj))
    out = np.zeros(u.shape[1], dtype=complex)
    for k, v in e.raw().items():
        term = float(v) * s ** (2 * k[IU0] + k[IS]) * c ** k[IC] * alpha ** k[IA] / Q ** k[IQ]
        for a, ex in zip(aj, k[L.iaj:L.ii]):
            if ex:
                term = term * a ** ex
        for j, ex in enumerate(k[IU:L.iaj]):
            if ex:
                term = term * u[j] ** ex
        out += 1j * term if k[-1] else term
    return out
