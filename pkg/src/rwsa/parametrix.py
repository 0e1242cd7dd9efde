"""Homogeneous orders of the left parametrix of the torus-extended squared Dirac operator.

With r_{-2} = 1/Q and p = p2 + p1 + p0 (Q also containing the torus
variables u5..u_{2n+2}), the order -2-m part is

    r_{-2-m} = - sum  (-i)^(l1+l2) / (l1! l2!)
                      (d_u1^l1 d_u2^l2 r_{-2-j}) (d_t^l1 d_eta^l2 p_k) / Q

over j < m, k in {0, 1, 2} and l1 + l2 = m - 2 - j + k >= 0, which is
exactly the set of combinations landing in order -2-m.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

from gmpy2 import mpq

from .exact import IQ, GaussianRational, Layout, SymbolExpr, d_eta, d_t, d_u
from .symbols import MatrixSymbol, is_homogeneous, laplace_symbols

log = logging.getLogger(__name__)


class HomogeneityError(AssertionError):
    """A computed parametrix order is not homogeneous of the expected degree."""


def _times_qinv(e: SymbolExpr) -> SymbolExpr:
    return SymbolExpr(e.layout, {k[:IQ] + (k[IQ] + 1,) + k[IQ + 1:]: v for k, v in e.raw().items()},
                      _trusted=True)


def sigma_minus2(n: int) -> MatrixSymbol:
    """Leading parametrix order: (1/Q) times the identity."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return MatrixSymbol.scalar(SymbolExpr.monomial(n, q=1), -2)


@dataclass
class SymbolExpansion:
    n: int
    orders: dict[int, MatrixSymbol] = field(default_factory=dict)
    top_trace: SymbolExpr | None = None


def _coef(l1: int, l2: int) -> GaussianRational:
    # (-i)^l / (l1! l2!)
    l = l1 + l2
    unit = [GaussianRational(1), GaussianRational(0, -1), GaussianRational(-1), GaussianRational(0, 1)][l % 4]
    return unit * GaussianRational(mpq(1, factorial(l1) * factorial(l2)))


class _Derivs:
    """Memoized mixed derivatives of p_k in (t, eta) and of r_{-2-j} in (u1, u2)."""

    def __init__(self, n: int):
        self.n = n
        self.p = laplace_symbols(n)  # (p2, p1, p0)
        self._px: dict[tuple[int, int, int], MatrixSymbol] = {}
        self._rx: dict[tuple[int, int, int], MatrixSymbol] = {}
        self.r: dict[int, MatrixSymbol] = {}

    def px(self, k: int, l1: int, l2: int) -> MatrixSymbol:
        key = (k, l1, l2)
        if key not in self._px:
            if l2:
                m = self.px(k, l1, l2 - 1).map(d_eta)
            elif l1:
                m = self.px(k, l1 - 1, 0).map(d_t)
            else:
                m = self.p[2 - k]
            self._px[key] = m
        return self._px[key]

    def rx(self, j: int, l1: int, l2: int) -> MatrixSymbol:
        key = (j, l1, l2)
        if key not in self._rx:
            if l2:
                prev = self.rx(j, l1, l2 - 1)
                m = prev.map(lambda e: d_u(e, 2), prev.order - 1)
            elif l1:
                prev = self.rx(j, l1 - 1, 0)
                m = prev.map(lambda e: d_u(e, 1), prev.order - 1)
            else:
                m = self.r[j]
            self._rx[key] = m
        return self._rx[key]


def _contributions(m: int):
    for j in range(m):
        for k in (2, 1, 0):
            l = m - 2 - j + k
            if l < 0:
                continue
            for l1 in range(l + 1):
                yield j, k, l1, l - l1


def expand(n: int, *, trace_top: bool = False, check: bool = True) -> SymbolExpansion:
    """Compute r_{-2-m} for m = 0..2n.

    With ``trace_top`` the last order is produced only through its trace
    (the diagonal of each matrix product), which is all the residue needs;
    ``orders`` then stops at 2n - 1 and ``top_trace`` holds the trace.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"problem index must be a positive integer, got {n!r}")
    D = _Derivs(n)
    D.r[0] = sigma_minus2(n)
    exp = SymbolExpansion(n, {0: D.r[0]})
    L = Layout(n)
    for m in range(1, 2 * n + 1):
        last = trace_top and m == 2 * n
        acc = [[SymbolExpr.zero(L) for _ in range(4)] for _ in range(4)]
        tr = SymbolExpr.zero(L)
        for j, k, l1, l2 in _contributions(m):
            A = D.rx(j, l1, l2).entries
            B = D.px(k, l1, l2).entries
            c = _coef(l1, l2)
            if last:
                part = SymbolExpr.zero(L)
                for a in range(4):
                    for b in range(4):
                        if A[a][b] and B[b][a]:
                            part = part + A[a][b] * B[b][a]
                tr = tr + part.scale(c)
                continue
            for a in range(4):
                for b in range(4):
                    part = SymbolExpr.zero(L)
                    for q in range(4):
                        if A[a][q] and B[q][b]:
                            part = part + A[a][q] * B[q][b]
                    if part:
                        acc[a][b] = acc[a][b] + part.scale(c)
        if last:
            top = -_times_qinv(tr)
            if check and not is_homogeneous(top, -2 - m):
                raise HomogeneityError(f"trace of order {-2 - m} is not homogeneous")
            exp.top_trace = top
            log.debug("m=%d traced: %d raw terms", m, len(top.raw()))
            break
        rm = MatrixSymbol.build(n, [[-_times_qinv(x) for x in row] for row in acc], -2 - m)
        if check and not rm.is_homogeneous():
            raise HomogeneityError(f"parametrix order {-2 - m} is not homogeneous")
        D.r[m] = rm
        exp.orders[m] = rm
        log.debug("m=%d: %d raw terms", m, sum(len(x.raw()) for r in rm.entries for x in r))
    return exp


def trace(m: MatrixSymbol) -> SymbolExpr:
    return m.trace()


@lru_cache(maxsize=8)
def top_trace(n: int) -> SymbolExpr:
    """Trace of r_{-2n-2}, the integrand of the residue."""
    return expand(n, trace_top=True).top_trace
