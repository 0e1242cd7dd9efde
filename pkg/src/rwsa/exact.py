"""Exact arithmetic substrate.

Expressions live in the ring generated by

    u0, s = sqrt(u0), c = sqrt(1 - u0), u1 .. u_{2n+2},
    alpha (Laurent), alpha_1 .. alpha_{2n}, 1/Q and the imaginary unit,

where ``Q = u1^2 + alpha^-2 (u2^2 + u3^2 + u4^2) + u5^2 + ... + u_{2n+2}^2``.
``Q`` is never expanded; it only appears as a denominator power.

Internally a :class:`SymbolExpr` is a dict from an exponent key to an
``mpq`` coefficient.  The key is a flat tuple

    (q, alpha, u0, s, c, u1..uN, alpha_1..alpha_2n, i)

with ``N = 2n + 2``.  ``s`` and ``c`` carry *signed* exponents: a negative
value is a power of ``s`` (resp. ``c``) below the line.  The imaginary
unit is a 0/1 bit so coefficients stay rational; the public
:class:`Term` view folds it back into a :class:`GaussianRational`.

Normal form of the (u0, s, c) part, which is what makes equality
structural:

* numerator ``s``/``c`` exponents are 0 or 1 (``s^2 -> u0``,
  ``c^2 -> 1 - u0``),
* ``u0`` never shares a term with ``s`` or ``c`` below the line,
* ``s`` and ``c`` are never both below the line (``1 = s^2 + c^2`` splits
  such terms into partial fractions).

Within each parity class {1, s, c, sc} this is the partial-fraction basis
``u0^a, u0^-k, (1-u0)^-k`` of Q[u0, 1/u0, 1/(1-u0)], hence unique.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from operator import add
from typing import Iterable, Iterator, Mapping

from gmpy2 import mpq

__all__ = [
    "GaussianRational",
    "Layout",
    "Term",
    "SymbolExpr",
    "StructuralError",
    "DerivativeOverflowError",
    "d_u",
    "d_t",
    "d_eta",
    "normalize_sc",
]


class StructuralError(ValueError):
    """Operands built for different problem indices, or a malformed key."""


class DerivativeOverflowError(ArithmeticError):
    """A time derivative would need alpha_{2n+1}; the problem index is too small."""


def _q(x) -> mpq:
    if isinstance(x, mpq):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return mpq(x)
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction or a 'p/q' string")
    return mpq(x)


def _qstr(x: mpq) -> str:
    return f"{x.numerator}/{x.denominator}"


class GaussianRational:
    """``re + i*im`` with arbitrary precision rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def parse(cls, re: str, im: str = "0") -> "GaussianRational":
        return cls(mpq(re), mpq(im))

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            raise TypeError("complex floats are not exact")
        return cls(x)

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational((self.re * o.re + self.im * o.im) / d,
                                (self.im * o.re - self.re * o.im) / d)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({_qstr(self.re)!r}, {_qstr(self.im)!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i)"


@lru_cache(maxsize=None)
def normalize_sc(a: int, s: int, c: int) -> tuple[tuple[int, int, int, int], ...]:
    """Rewrite ``u0^a s^s c^c`` into normal-form monomials.

    Returns a tuple of ``(coefficient, a, s, c)``.  ``a`` must be >= 0; ``s``
    and ``c`` may be any integers.
    """
    if a < 0:
        raise StructuralError("negative u0 exponent")
    out: dict[tuple[int, int, int], int] = {}

    def push(k, a, s, c):
        if s >= 2:
            a += s // 2
            s %= 2
        if c >= 2:
            h, c = divmod(c, 2)
            # c^(2h) = (1 - u0)^h
            for j in range(h + 1):
                push(k * comb(h, j) * (-1) ** j, a + j, s, c)
            return
        if s < 0 and a > 0:
            m = min(a, (1 - s) // 2)
            a -= m
            s += 2 * m
        if c < 0 and a > 0:
            # u0 = 1 - c^2
            for j in range(a + 1):
                push(k * comb(a, j) * (-1) ** j, 0, s, c + 2 * j)
            return
        if s < 0 and c < 0:
            # 1 = s^2 + c^2
            push(k, a, s + 2, c)
            push(k, a, s, c + 2)
            return
        key = (a, s, c)
        v = out.get(key, 0) + k
        if v:
            out[key] = v
        else:
            out.pop(key, None)

    push(1, a, s, c)
    return tuple((v, *key) for key, v in sorted(out.items()))


# Slot positions inside a key.
IQ, IA, IU0, IS, IC, IU = 0, 1, 2, 3, 4, 5


class Layout:
    """Key geometry for problem index ``n`` (2n+2 cotangent variables)."""

    __slots__ = ("n", "N", "nA", "size", "iaj", "ii")
    _cache: dict[int, "Layout"] = {}

    def __new__(cls, n: int):
        if n in cls._cache:
            return cls._cache[n]
        if n < 1:
            raise ValueError(f"problem index must be >= 1, got {n}")
        self = super().__new__(cls)
        self.n = n
        self.N = 2 * n + 2
        self.nA = 2 * n
        self.iaj = IU + self.N
        self.ii = self.iaj + self.nA
        self.size = self.ii + 1
        cls._cache[n] = self
        return self

    def __reduce__(self):
        return (Layout, (self.n,))

    def zero_key(self) -> tuple[int, ...]:
        return (0,) * self.size


@dataclass(frozen=True)
class Term:
    """Read-only view of one term: ``coeff * num / (s^den_s c^den_c Q^q_pow)``."""

    coeff: GaussianRational
    u0: int
    s: int
    c: int
    u: tuple[int, ...]
    alpha: int
    alphaj: tuple[int, ...]
    den_s: int
    den_c: int
    q_pow: int


def _accumulate(out: dict, key: tuple, coef) -> None:
    """Add ``coef * key`` into ``out`` applying the (u0, s, c) and i rewrites."""
    if key[-1] >= 2:
        coef = -coef
        key = key[:-1] + (key[-1] - 2,)
    a, s, c = key[IU0], key[IS], key[IC]
    if (s == 0 or s == 1 or (s < 0 and a == 0)) and (c == 0 or c == 1 or (c < 0 and a == 0)) \
            and not (s < 0 and c < 0):
        v = out.get(key)
        v = coef if v is None else v + coef
        if v:
            out[key] = v
        else:
            del out[key]
        return
    head, tail = key[:IU0], key[IU:]
    for m, a2, s2, c2 in normalize_sc(a, s, c):
        k = head + (a2, s2, c2) + tail
        v = out.get(k)
        v = coef * m if v is None else v + coef * m
        if v:
            out[k] = v
        else:
            del out[k]


class SymbolExpr:
    """Exact sum of terms for problem index ``n``.  Treat instances as immutable."""

    __slots__ = ("layout", "_t", "_hash")

    def __init__(self, n: int | Layout, terms: Mapping[tuple, mpq] | None = None, *, _trusted=False):
        self.layout = n if isinstance(n, Layout) else Layout(n)
        self._hash = None
        if terms is None:
            self._t = {}
        elif _trusted:
            self._t = terms
        else:
            out: dict = {}
            size = self.layout.size
            for k, v in terms.items():
                k = tuple(k)
                if len(k) != size:
                    raise StructuralError(f"key of length {len(k)} in layout of size {size}")
                v = _q(v)
                if v:
                    _accumulate(out, k, v)
            self._t = out

    # -- construction -------------------------------------------------------
    @property
    def n(self) -> int:
        return self.layout.n

    @classmethod
    def zero(cls, n) -> "SymbolExpr":
        return cls(n)

    @classmethod
    def const(cls, n, value=1) -> "SymbolExpr":
        return cls.monomial(n, value)

    @classmethod
    def monomial(cls, n, coeff=1, *, u0=0, s=0, c=0, u: Mapping[int, int] | Iterable[int] = (),
                 alpha=0, alphaj: Mapping[int, int] | Iterable[int] = (), q=0) -> "SymbolExpr":
        """Build ``coeff * u0^u0 s^s c^c prod u_j^.. alpha^.. prod alpha_j^.. / Q^q``.

        ``u`` and ``alphaj`` are either 1-based ``{index: exponent}`` maps or
        sequences starting at index 1.  ``s`` and ``c`` may be negative.
        """
        L = n if isinstance(n, Layout) else Layout(n)
        key = [0] * L.size
        key[IQ], key[IA], key[IU0], key[IS], key[IC] = q, alpha, u0, s, c
        for j, e in _indexed(u):
            if not 1 <= j <= L.N:
                raise StructuralError(f"u_{j} out of range for n={L.n}")
            key[IU + j - 1] = e
        for j, e in _indexed(alphaj):
            if not 1 <= j <= L.nA:
                raise StructuralError(f"alpha_{j} out of range for n={L.n}")
            key[L.iaj + j - 1] = e
        if q < 0 or u0 < 0 or any(e < 0 for e in key[IU:L.ii]):
            raise StructuralError("negative exponent outside alpha, s, c")
        g = GaussianRational.coerce(coeff)
        out: dict = {}
        if g.re:
            _accumulate(out, tuple(key), g.re)
        if g.im:
            key[L.ii] = 1
            _accumulate(out, tuple(key), g.im)
        return cls(L, out, _trusted=True)

    @classmethod
    def var(cls, n, name: str, power: int = 1) -> "SymbolExpr":
        """``var(n, 'u3')``, ``'alpha'``, ``'alpha2'``, ``'s'``, ``'c'``, ``'u0'``, ``'i'`` or ``'Qinv'``."""
        if name == "i":
            return cls.const(n, GaussianRational(0, 1)) ** power
        if name == "Qinv":
            return cls.monomial(n, q=power)
        if name == "Q":
            return cls.quadric(n) ** power
        if name in ("alpha", "s", "c", "u0"):
            return cls.monomial(n, **{name: power})
        if name.startswith("alpha"):
            return cls.monomial(n, alphaj={int(name[5:]): power})
        if name.startswith("u"):
            return cls.monomial(n, u={int(name[1:]): power})
        raise KeyError(name)

    @classmethod
    def quadric(cls, n) -> "SymbolExpr":
        """The polynomial Q itself (expanded; for tests and conversions)."""
        L = n if isinstance(n, Layout) else Layout(n)
        e = cls.monomial(L, u={1: 2})
        for j in (2, 3, 4):
            e = e + cls.monomial(L, u={j: 2}, alpha=-2)
        for j in range(5, L.N + 1):
            e = e + cls.monomial(L, u={j: 2})
        return e

    # -- inspection ---------------------------------------------------------
    def raw(self) -> dict:
        """The internal key -> coefficient map (do not mutate)."""
        return self._t

    def __len__(self):
        return len(self.terms())

    def __bool__(self):
        return bool(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def sorted_keys(self) -> list[tuple]:
        return sorted(self._t)

    def terms(self) -> list[Term]:
        """Terms in canonical order, real and imaginary parts merged."""
        L = self.layout
        merged: dict[tuple, list] = {}
        for k, v in self._t.items():
            slot = merged.setdefault(k[:-1], [mpq(0), mpq(0)])
            slot[k[-1]] += v
        out = []
        for k in sorted(merged):
            re, im = merged[k]
            s, c = k[IS], k[IC]
            out.append(Term(
                coeff=GaussianRational(re, im),
                u0=k[IU0], s=max(s, 0), c=max(c, 0),
                u=tuple(k[IU:L.iaj]), alpha=k[IA], alphaj=tuple(k[L.iaj:L.ii]),
                den_s=max(-s, 0), den_c=max(-c, 0), q_pow=k[IQ],
            ))
        return out

    def real_part(self) -> "SymbolExpr":
        return SymbolExpr(self.layout, {k: v for k, v in self._t.items() if k[-1] == 0}, _trusted=True)

    def imag_part(self) -> "SymbolExpr":
        """Coefficient of i, as an expression with real coefficients."""
        return SymbolExpr(self.layout, {k[:-1] + (0,): v for k, v in self._t.items() if k[-1] == 1},
                          _trusted=True)

    def is_real(self) -> bool:
        return all(k[-1] == 0 for k in self._t)

    def u_degrees(self) -> set[int]:
        """Set of homogeneity degrees in (u1..uN) over all terms (Q counts as 2)."""
        L = self.layout
        return {sum(k[IU:L.iaj]) - 2 * k[IQ] for k in self._t}

    # -- ring operations ----------------------------------------------------
    def _check(self, other: "SymbolExpr"):
        if not isinstance(other, SymbolExpr):
            raise TypeError(f"expected SymbolExpr, got {type(other).__name__}")
        if other.layout is not self.layout:
            raise StructuralError(f"mismatched problem index: n={self.n} vs n={other.n}")

    def _lift(self, other) -> "SymbolExpr":
        if isinstance(other, SymbolExpr):
            self._check(other)
            return other
        return SymbolExpr.const(self.layout, other)

    def __add__(self, other):
        other = self._lift(other)
        if len(other._t) > len(self._t):
            big, small = other._t, self._t
        else:
            big, small = self._t, other._t
        out = dict(big)
        for k, v in small.items():
            w = out.get(k)
            w = v if w is None else w + v
            if w:
                out[k] = w
            else:
                del out[k]
        return SymbolExpr(self.layout, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return SymbolExpr(self.layout, {k: -v for k, v in self._t.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, factor) -> "SymbolExpr":
        g = GaussianRational.coerce(factor)
        out: dict = {}
        if g.im == 0:
            if g.re == 0:
                return SymbolExpr(self.layout)
            return SymbolExpr(self.layout, {k: v * g.re for k, v in self._t.items()}, _trusted=True)
        ii = self.layout.ii
        for k, v in self._t.items():
            if g.re:
                _accumulate(out, k, v * g.re)
            k2 = k[:ii] + (k[ii] + 1,)
            _accumulate(out, k2, v * g.im)
        return SymbolExpr(self.layout, out, _trusted=True)

    def __mul__(self, other):
        if not isinstance(other, SymbolExpr):
            return self.scale(other)
        self._check(other)
        a, b = self._t, other._t
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        for k2, v2 in b.items():
            for k1, v1 in a.items():
                _accumulate(out, tuple(map(add, k1, k2)), v1 * v2)
        return SymbolExpr(self.layout, out, _trusted=True)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported; use monomial(q=...) for 1/Q")
        result = SymbolExpr.const(self.layout, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def map_keys(self, fn) -> "SymbolExpr":
        """Apply ``fn(key) -> key`` termwise and renormalize."""
        out: dict = {}
        for k, v in self._t.items():
            _accumulate(out, fn(k), v)
        return SymbolExpr(self.layout, out, _trusted=True)

    def filter(self, pred) -> "SymbolExpr":
        return SymbolExpr(self.layout, {k: v for k, v in self._t.items() if pred(k)}, _trusted=True)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, SymbolExpr):
            return self.layout is other.layout and self._t == other._t
        if isinstance(other, (int, Fraction, GaussianRational)) or type(other) is type(mpq(0)):
            return self == SymbolExpr.const(self.layout, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.layout.n, frozenset(self._t.items())))
        return self._hash

    # -- derivations (see module-level functions) ---------------------------
    def d_u(self, j: int) -> "SymbolExpr":
        return d_u(self, j)

    def d_t(self) -> "SymbolExpr":
        return d_t(self)

    def d_eta(self) -> "SymbolExpr":
        return d_eta(self)

    # -- text ---------------------------------------------------------------
    def __repr__(self):
        return f"SymbolExpr(n={self.n}, {len(self._t)} raw terms)"

    def __str__(self):
        from .serialize import to_text
        return to_text(self)


def _indexed(x) -> Iterator[tuple[int, int]]:
    if isinstance(x, Mapping):
        yield from ((int(j), int(e)) for j, e in x.items() if e)
    else:
        yield from ((j, int(e)) for j, e in enumerate(x, start=1) if e)


def _bump(key: tuple, idx: int, delta: int) -> tuple:
    return key[:idx] + (key[idx] + delta,) + key[idx + 1:]


def d_u(a: SymbolExpr, j: int) -> SymbolExpr:
    """Partial derivative with respect to the cotangent coordinate u_j (j >= 1)."""
    L = a.layout
    if not 1 <= j <= L.N:
        raise IndexError(f"d_u index {j} out of range 1..{L.N}")
    p = IU + j - 1
    out: dict = {}
    for k, v in a._t.items():
        e = k[p]
        if e:
            _accumulate(out, _bump(k, p, -1), v * e)
        q = k[IQ]
        if q:
            # d(Q^-q) = -q Q^-(q+1) dQ/du_j
            k2 = _bump(_bump(k, IQ, 1), p, 1)
            if 2 <= j <= 4:
                k2 = _bump(k2, IA, -2)
            _accumulate(out, k2, v * (-2 * q))
    return SymbolExpr(L, out, _trusted=True)


def d_t(a: SymbolExpr) -> SymbolExpr:
    """Time derivative: alpha -> alpha_1, alpha_j -> alpha_{j+1}, Q through alpha."""
    L = a.layout
    ia1 = L.iaj
    last = L.ii - 1
    out: dict = {}
    for k, v in a._t.items():
        e = k[IA]
        if e:
            _accumulate(out, _bump(_bump(k, IA, -1), ia1, 1), v * e)
        for p in range(ia1, L.ii):
            e = k[p]
            if e:
                if p == last:
                    raise DerivativeOverflowError(
                        f"d_t of alpha_{L.nA} needs alpha_{L.nA + 1}; n={L.n} is too small")
                _accumulate(out, _bump(_bump(k, p, -1), p + 1, 1), v * e)
        q = k[IQ]
        if q:
            # dQ/dt = -2 alpha^-3 alpha_1 (u2^2 + u3^2 + u4^2)
            base = _bump(_bump(_bump(k, IQ, 1), IA, -3), ia1, 1)
            for p in (IU + 1, IU + 2, IU + 3):
                _accumulate(out, _bump(base, p, 2), v * (2 * q))
    return SymbolExpr(L, out, _trusted=True)


def d_eta(a: SymbolExpr) -> SymbolExpr:
    """Derivative in the chart angle: 2sc d/du0 - u3 (c/s) d/du3 + u4 (s/c) d/du4.

    On the generators this is  u0' = 2sc,  s' = c,  c' = -s.
    """
    L = a.layout
    p3, p4 = IU + 2, IU + 3
    out: dict = {}
    for k, v in a._t.items():
        e = k[IU0]
        if e:
            _accumulate(out, _bump(_bump(_bump(k, IU0, -1), IS, 1), IC, 1), v * (2 * e))
        e = k[IS]
        if e:
            _accumulate(out, _bump(_bump(k, IS, -1), IC, 1), v * e)
        e = k[IC]
        if e:
            _accumulate(out, _bump(_bump(k, IC, -1), IS, 1), v * (-e))
        e3 = k[p3]
        e4 = k[p4]
        if e3:
            _accumulate(out, _bump(_bump(k, IS, -1), IC, 1), v * (-e3))
        if e4:
            _accumulate(out, _bump(_bump(k, IS, 1), IC, -1), v * e4)
        q = k[IQ]
        if q:
            # dQ/deta = alpha^-2 (-2 u3^2 c/s + 2 u4^2 s/c)
            base = _bump(_bump(k, IQ, 1), IA, -2)
            _accumulate(out, _bump(_bump(_bump(base, p3, 2), IS, -1), IC, 1), v * (2 * q))
            _accumulate(out, _bump(_bump(_bump(base, p4, 2), IS, 1), IC, -1), v * (-2 * q))
    return SymbolExpr(L, out, _trusted=True)
