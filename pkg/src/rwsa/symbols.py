"""Symbols of the Robertson-Walker Dirac operator and its square, in u-coordinates."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from gmpy2 import mpq

from .exact import IQ, IU, GaussianRational, Layout, StructuralError, SymbolExpr, d_eta, d_t, d_u

I = GaussianRational(0, 1)
MINUS_I = GaussianRational(0, -1)


def scale_u(e: SymbolExpr, lam) -> SymbolExpr:
    """Substitute u_j -> lam*u_j for all j >= 1 (Q picks up lam^2)."""
    L = e.layout
    lam = mpq(lam)
    out = {}
    for k, v in e.raw().items():
        deg = sum(k[IU:L.iaj]) - 2 * k[IQ]
        out[k] = v * lam ** deg
    return SymbolExpr(L, out, _trusted=True)


def is_homogeneous(e: SymbolExpr, order: int, lams=(2, 3)) -> bool:
    """Check homogeneity of degree ``order`` in (u1..u_{2n+2}) by explicit substitution."""
    return all(scale_u(e, lam) == e.scale(mpq(lam) ** order) for lam in lams)


@dataclass(frozen=True)
class MatrixSymbol:
    """4x4 matrix of expressions, homogeneous of degree ``order``."""

    n: int
    entries: tuple[tuple[SymbolExpr, ...], ...]
    order: int

    def __post_init__(self):
        if len(self.entries) != 4 or any(len(r) != 4 for r in self.entries):
            raise StructuralError("MatrixSymbol must be 4x4")

    @classmethod
    def build(cls, n: int, rows, order: int) -> "MatrixSymbol":
        return cls(n, tuple(tuple(r) for r in rows), order)

    @classmethod
    def scalar(cls, e: SymbolExpr, order: int) -> "MatrixSymbol":
        z = SymbolExpr.zero(e.layout)
        return cls(e.n, tuple(tuple(e if a == b else z for b in range(4)) for a in range(4)), order)

    def entry(self, i: int, j: int) -> SymbolExpr:
        """1-based entry access."""
        return self.entries[i - 1][j - 1]

    def map(self, fn: Callable[[SymbolExpr], SymbolExpr], order: int | None = None) -> "MatrixSymbol":
        return MatrixSymbol(self.n, tuple(tuple(fn(x) for x in r) for r in self.entries),
                            self.order if order is None else order)

    def __add__(self, other: "MatrixSymbol") -> "MatrixSymbol":
        return MatrixSymbol(self.n, tuple(tuple(a + b for a, b in zip(r1, r2))
                                          for r1, r2 in zip(self.entries, other.entries)),
                            max(self.order, other.order))

    def __neg__(self):
        return self.map(lambda x: -x)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "MatrixSymbol":
        return self.map(lambda x: x.scale(f))

    def __matmul__(self, other: "MatrixSymbol") -> "MatrixSymbol":
        A, B = self.entries, other.entries
        rows = []
        for a in range(4):
            row = []
            for b in range(4):
                acc = SymbolExpr.zero(Layout(self.n))
                for k in range(4):
                    if A[a][k] and B[k][b]:
                        acc = acc + A[a][k] * B[k][b]
                row.append(acc)
            rows.append(row)
        return MatrixSymbol.build(self.n, rows, self.order + other.order)

    def trace(self) -> SymbolExpr:
        acc = SymbolExpr.zero(Layout(self.n))
        for a in range(4):
            acc = acc + self.entries[a][a]
        return acc

    def is_homogeneous(self) -> bool:
        return all(is_homogeneous(x, self.order) for r in self.entries for x in r if x)

    def __eq__(self, other):
        if not isinstance(other, MatrixSymbol):
            return NotImplemented
        return self.n == other.n and self.entries == other.entries

    def __hash__(self):
        return hash((self.n, self.entries))


def _v(n, name, p=1):
    return SymbolExpr.var(n, name, p)


@lru_cache(maxsize=None)
def dirac_q1(n: int) -> MatrixSymbol:
    """Principal symbol of the Dirac operator (order 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u1, u2, u3, u4 = (_v(n, f"u{j}") for j in range(1, 5))
    ia = _v(n, "alpha", -1)
    z = SymbolExpr.zero(n)
    rows = [
        [z, z, (u4 * ia).scale(I) - u1, (u2 * ia).scale(I) + u3 * ia],
        [z, z, (u2 * ia).scale(I) - u3 * ia, -u1 - (u4 * ia).scale(I)],
        [-u1 - (u4 * ia).scale(I), -(u2 * ia).scale(I) - u3 * ia, z, z],
        [u3 * ia - (u2 * ia).scale(I), (u4 * ia).scale(I) - u1, z, z],
    ]
    return MatrixSymbol.build(n, rows, 1)


@lru_cache(maxsize=None)
def dirac_q0(n: int) -> MatrixSymbol:
    """Order-0 part of the Dirac symbol."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z = SymbolExpr.zero(n)
    d = SymbolExpr.monomial(n, GaussianRational(0, mpq(3, 2)), alpha=-1, alphaj={1: 1})
    # (1 - 2 u0) / (2 alpha s c)
    K = (SymbolExpr.const(n, 1) - _v(n, "u0").scale(2)) * SymbolExpr.monomial(n, mpq(1, 2), alpha=-1, s=-1, c=-1)
    rows = [
        [z, z, d, K],
        [z, z, K, d],
        [d, -K, z, z],
        [-K, d, z, z],
    ]
    return MatrixSymbol.build(n, rows, 0)


@lru_cache(maxsize=None)
def laplace_symbols(n: int) -> tuple[MatrixSymbol, MatrixSymbol, MatrixSymbol]:
    """(p2, p1, p0): homogeneous parts of the symbol of the squared Dirac operator."""
    q1, q0 = dirac_q1(n), dirac_q0(n)
    p2 = q1 @ q1
    p2 = MatrixSymbol(n, p2.entries, 2)
    dq1_u1 = q1.map(lambda x: d_u(x, 1), 0)
    dq1_u2 = q1.map(lambda x: d_u(x, 2), 0)
    p1 = (q0 @ q1) + (q1 @ q0) \
        + (dq1_u1 @ q1.map(d_t)).scale(MINUS_I) \
        + (dq1_u2 @ q1.map(d_eta)).scale(MINUS_I)
    p1 = MatrixSymbol(n, p1.entries, 1)
    p0 = (q0 @ q0) \
        + (dq1_u1 @ q0.map(d_t)).scale(MINUS_I) \
        + (dq1_u2 @ q0.map(d_eta)).scale(MINUS_I)
    p0 = MatrixSymbol(n, p0.entries, 0)
    return p2, p1, p0


def symbol_by_name(name: str, n: int) -> MatrixSymbol:
    if name == "q1":
        return dirac_q1(n)
    if name == "q0":
        return dirac_q0(n)
    p2, p1, p0 = laplace_symbols(n)
    try:
        return {"p2": p2, "p1": p1, "p0": p0}[name]
    except KeyError:
        raise ValueError(f"unknown symbol {name!r}; expected q1, q0, p2, p1 or p0") from None
