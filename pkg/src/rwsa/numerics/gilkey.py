"""Independent heat coefficients from curvature invariants.

For D^2 = nabla^* nabla + R/4 on rank-4 spinors (Lichnerowicz) the local
heat invariants are

    a_2:  (4 pi)^-2 tr(R/6 - R/4) = -(4 pi)^-2 R/3,
    a_4:  (4 pi)^-2 / 360 * (-12 Lap R + 5 R^2 - 8 |Ric|^2 - 7 |Riem|^2),

the second from the general a_4 invariant with E = -R/4 and spin
curvature trace tr(W_ij W^ij) = -|Riem|^2 / 2.  Curvature is computed from
the metric components by a small tensor routine, sharing nothing with the
symbol pipeline.
"""
from __future__ import annotations

from functools import lru_cache

import sympy as sp
from gmpy2 import mpq

from ..residue import HeatCoefficient

t, eta, phi1, phi2 = sp.symbols("t eta phi1 phi2", real=True)
COORDS = (t, eta, phi1, phi2)
a = sp.Function("a")(t)


def rw_metric() -> sp.Matrix:
    return sp.diag(1, a**2, a**2 * sp.sin(eta) ** 2, a**2 * sp.cos(eta) ** 2)


def christoffel(g: sp.Matrix, x=COORDS):
    """Gamma^l_{mn} as a nested list [l][m][n]."""
    d = len(x)
    gi = g.inv()
    return [[[sp.cancel(sum(gi[l, k] * (sp.diff(g[k, m], x[nn]) + sp.diff(g[k, nn], x[m])
                                        - sp.diff(g[m, nn], x[k])) for k in range(d)) / 2)
              for nn in range(d)] for m in range(d)] for l in range(d)]


def riemann(g: sp.Matrix, x=COORDS):
    """R^r_{smn} = d_m G^r_{ns} - d_n G^r_{ms} + G^r_{ml} G^l_{ns} - G^r_{nl} G^l_{ms}, as [r][s][m][n]."""
    d = len(x)
    G = christoffel(g, x)
    return [[[[sp.cancel(sp.diff(G[r][nn][s_], x[m]) - sp.diff(G[r][m][s_], x[nn])
                         + sum(G[r][m][l] * G[l][nn][s_] - G[r][nn][l] * G[l][m][s_] for l in range(d)))
               for nn in range(d)] for m in range(d)] for s_ in range(d)] for r in range(d)]


def ricci(g: sp.Matrix, x=COORDS) -> sp.Matrix:
    """R_{mn} = d_l G^l_{mn} - d_n G^l_{ml} + G^l_{lk} G^k_{mn} - G^l_{nk} G^k_{ml}."""
    d = len(x)
    G = christoffel(g, x)
    Ric = sp.zeros(d, d)
    for m in range(d):
        for nn in range(d):
            v = 0
            for l in range(d):
                v += sp.diff(G[l][m][nn], x[l]) - sp.diff(G[l][m][l], x[nn])
                for k in range(d):
                    v += G[l][l][k] * G[k][m][nn] - G[l][nn][k] * G[k][m][l]
            Ric[m, nn] = sp.cancel(v)
    return Ric


def scalar_curvature(g: sp.Matrix, x=COORDS) -> sp.Expr:
    gi = g.inv()
    Ric = ricci(g, x)
    return sp.simplify(sum(gi[m, nn] * Ric[m, nn] for m in range(len(x)) for nn in range(len(x))))


def _to_heat(expr: sp.Expr, n: int = 1) -> HeatCoefficient:
    al = sp.Symbol("alpha")
    ajs = sp.symbols(f"alpha1:{2 * n + 1}")
    e = expr
    for k in range(2 * n, 0, -1):
        e = e.subs(sp.Derivative(a, (t, k)), ajs[k - 1])
    e = sp.expand(e.subs(a, al))
    if e.has(sp.pi) or e.has(t) or e.has(eta):
        raise ValueError(f"oracle result is not a rational polynomial: {e}")
    # alpha may appear with negative powers; clear them before reading off terms
    shift = -min(0, min((sp.degree(m, al) if m.has(al) else 0) for m in sp.Add.make_args(e)) if e != 0 else 0)
    poly = {}
    for mono in sp.Add.make_args(sp.expand(e * al**shift)):
        c, rest = mono.as_coeff_Mul()
        pw = sp.Poly(rest, al, *ajs).monoms()[0]
        c = sp.Rational(c)
        poly[(int(pw[0]) - shift, tuple(int(x) for x in pw[1:]))] = mpq(int(c.p), int(c.q))
    return HeatCoefficient(n, poly, 0)


@lru_cache(maxsize=1)
def gilkey_a2_oracle() -> HeatCoefficient:
    """Heat coefficient a_2 at fixed t, integrated over the spatial sphere."""
    g = rw_metric()
    R = scalar_curvature(g)
    vol = a**3 * sp.sin(eta) * sp.cos(eta)  # positive branch on 0 < eta < pi/2
    assert sp.simplify(vol**2 - g.det()) == 0
    density = 4 * (R / 6 - R / 4) / (4 * sp.pi) ** 2
    total = sp.integrate(density * vol, (eta, 0, sp.pi / 2)) * (2 * sp.pi) ** 2
    return _to_heat(sp.simplify(total))


def _laplacian(f: sp.Expr, g: sp.Matrix, x=COORDS) -> sp.Expr:
    gi = g.inv()
    vol = a**3 * sp.sin(eta) * sp.cos(eta)
    return sp.cancel(sum(sp.diff(vol * gi[m, m] * sp.diff(f, x[m]), x[m]) for m in range(len(x))) / vol)


@lru_cache(maxsize=1)
def gilkey_a4_oracle() -> HeatCoefficient:
    """Heat coefficient a_4 at fixed t, integrated over the spatial sphere."""
    g = rw_metric()
    gi = g.inv()
    d = len(COORDS)
    Rm = riemann(g)
    Ric = ricci(g)
    R = scalar_curvature(g)
    # the metric is diagonal, so index raising is a rescaling
    riem2 = sum(Rm[r][s][m][nn] ** 2 * g[r, r] * gi[s, s] * gi[m, m] * gi[nn, nn]
                for r in range(d) for s in range(d) for m in range(d) for nn in range(d))
    ric2 = sum(Ric[m, nn] ** 2 * gi[m, m] * gi[nn, nn] for m in range(d) for nn in range(d))
    density = (-12 * _laplacian(R, g) + 5 * R**2 - 8 * ric2 - 7 * riem2) / (360 * (4 * sp.pi) ** 2)
    density = sp.simplify(density)
    if density.has(eta):
        raise ValueError("curvature density depends on the sphere angle")
    # constant on the sphere, whose volume is 2 pi^2 a^3
    return _to_heat(sp.expand(density * 2 * sp.pi**2 * a**3), n=2)
