"""Numerical integration of the period form representing a_{2n}.

The form lives on (eta, xi) with xi on a sphere in the cotangent fibre.
Since it is closed and homogeneous of degree -(2n+2) in the fibre, the
Euclidean unit sphere (the semialgebraic domain) may be traded for the
metric cosphere Q = 1, parametrized by w on the unit sphere S^{2n+1}:

    u1 = w1,  u2..u4 = alpha w2..w4,  u_j = w_j (j >= 5),  fibre volume alpha^3 s c dOmega.

Individual terms blow up like negative powers of sin(eta) and only cancel
after the fibre integral, so eta is always integrated outside the fibre, by
Gauss-Legendre nodes or at one fixed eta.  The fibre is done by a product
Gauss rule ("gauss") or by Monte Carlo ("mc").
"""
from __future__ import annotations

import math
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_gegenbauer

from ..exact import IA, IC, IS, IU, IU0, SymbolExpr
from ..residue import parity_filter, rational_integrand
from .evaluate import evaluate_array

BATCH = 1 << 20


@dataclass
class PeriodEstimate:
    value: float
    error: float
    method: str
    samples: int
    converged: bool
    seconds: float

    def to_json_obj(self) -> dict:
        return {"value": float(f"{self.value:.17g}"), "error": float(f"{self.error:.17g}"),
                "method": self.method, "samples": self.samples, "converged": self.converged}


class FibreIntegrand:
    """The integrand on the metric cosphere, as a polynomial in w with eta-dependent coefficients.

    Only even powers of w occur, so monomials are stored by the exponents of x_j = w_j^2.
    """

    def __init__(self, e: SymbolExpr, alpha: float, alphaj):
        L = e.layout
        self.n = L.n
        self.N = L.N
        aj = list(alphaj) + [0.0] * (L.nA - len(alphaj))
        groups: dict[tuple, dict[tuple[int, int], float]] = defaultdict(lambda: defaultdict(float))
        for k, v in e.raw().items():
            if k[-1]:
                raise ValueError("complex coefficient in the period integrand")
            w = k[IU:L.iaj]
            if any(x % 2 for x in w):
                raise ValueError("odd fibre exponent; apply the parity filter first")
            val = float(v) * alpha ** (k[IA] + w[1] + w[2] + w[3])
            for x, ex in zip(aj, k[L.iaj:L.ii]):
                if ex:
                    val *= x ** ex
            if val == 0.0:
                continue
            groups[tuple(x // 2 for x in w)][(2 * k[IU0] + k[IS], k[IC])] += val
        self.monomials = sorted(groups)
        self._eta = [sorted(groups[m].items()) for m in self.monomials]
        self.scale = alpha ** 3
        # the torus variables w5.. only enter through Q; drop trailing unused columns
        used = [any(m[j] for m in self.monomials) for j in range(self.N)]
        self.used = [j for j in range(self.N) if used[j]]

    def coefficients(self, eta: float) -> np.ndarray:
        """Coefficient of each w-monomial at this eta, fibre volume s c alpha^3 included."""
        s, c = math.sin(eta), math.cos(eta)
        out = np.empty(len(self.monomials))
        for i, terms in enumerate(self._eta):
            out[i] = sum(v * s ** sp * c ** cp for (sp, cp), v in terms)
        return out * (s * c * self.scale)

    def monomial_values(self, x: np.ndarray) -> np.ndarray:
        """x has shape (N, B) with x_j = w_j^2; returns (M, B)."""
        maxp = max((max(m) for m in self.monomials), default=0)
        pw = {}
        for j in self.used:
            p = [np.ones_like(x[j]), x[j]]
            for _ in range(2, maxp + 1):
                p.append(p[-1] * x[j])
            pw[j] = p
        out = np.empty((len(self.monomials), x.shape[1]))
        for i, m in enumerate(self.monomials):
            acc = None
            for j in self.used:
                if m[j]:
                    acc = pw[j][m[j]] if acc is None else acc * pw[j][m[j]]
            out[i] = 1.0 if acc is None else acc
        return out


def sphere_points(N: int, nodes: int):
    """Product rule on S^{N-1}: returns (w of shape (N, P), weights).

    psi_1 runs over the full circle (trapezoid rule); each polar angle psi_l,
    l >= 2, is integrated in t = cos(psi_l) by Gauss-Gegenbauer nodes, which
    absorb the sin^{l-1} Jacobian.  Polynomials of degree < 2 nodes in every
    t_l and in cos/sin(psi_1) are integrated exactly.
    """
    p1 = np.arange(2 * nodes) * (math.pi / nodes)
    grids = [p1]
    wts = [np.full(2 * nodes, math.pi / nodes)]
    for l in range(2, N):
        t, tw = roots_gegenbauer(nodes, (l - 1) / 2)
        grids.append(t)
        wts.append(tw)
    mesh = np.meshgrid(*grids, indexing="ij")
    wmesh = np.meshgrid(*wts, indexing="ij")
    cols = [m.ravel() for m in mesh]
    weight = np.prod([m.ravel() for m in wmesh], axis=0)
    w = np.empty((N, cols[0].size))
    tail = np.ones_like(cols[0])
    for l in range(N - 1, 1, -1):
        # w_{l+1} = t_l * prod_{m > l} sqrt(1 - t_m^2)
        w[l] = cols[l - 1] * tail
        tail = tail * np.sqrt(np.maximum(1 - cols[l - 1] ** 2, 0.0))
    w[0] = np.cos(cols[0]) * tail
    w[1] = np.sin(cols[0]) * tail
    return w, weight


def sphere_gauss(N: int, nodes: int):
    """:func:`sphere_points` with the squares x = w^2 in place of w."""
    w, weight = sphere_points(N, nodes)
    return w * w, weight


def _prefactor(n: int) -> float:
    return 1.0 / (8.0 * math.pi ** (1 + n))


def fibre_integral_gauss(F: FibreIntegrand, eta: float, nodes: int) -> float:
    x, wt = sphere_gauss(F.N, nodes)
    return float(F.coefficients(eta) @ (F.monomial_values(x) @ wt))


def _eta_rule(lo: float, hi: float, eta: float | None, eta_nodes: int):
    """Nodes and weights for the eta direction, folded into the fibre coefficients.

    With a fixed ``eta`` the fibre integral is divided by s c and multiplied by
    the exact integral of s c over [0, pi/2]; this relies on the eta-independence
    established by the exact pipeline.
    """
    if eta is not None:
        if not 0 < eta < math.pi / 2:
            raise ValueError("eta must lie strictly inside (0, pi/2)")
        return [eta], [0.5 / (math.sin(eta) * math.cos(eta))]
    g, gw = np.polynomial.legendre.leggauss(eta_nodes)
    return list(lo + (g + 1) * (hi - lo) / 2), list(gw * (hi - lo) / 2)


def _mc_batch(F: FibreIntegrand, coeff: np.ndarray, seed: np.random.SeedSequence, size: int):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((F.N, size))
    z *= z
    z /= z.sum(axis=0)
    vals = coeff @ F.monomial_values(z)
    return float(vals.sum()), float((vals * vals).sum())


def period_integrate(n: int, alpha: float, alphaj, method: str = "gauss", budget: int | None = None, *,
                     seed: int = 0, eta: float | None = None, eta_nodes: int | None = None,
                     tol: float = 1e-9, threads: int = 1, integrand: SymbolExpr | None = None,
                     eta_range: tuple[float, float] | None = None) -> PeriodEstimate:
    """Estimate a_{2n} at (alpha, alpha_j) by integrating the period form.

    ``gauss``: product Gauss rule in the fibre, nodes per angle raised by two
    until successive values agree to ``tol`` (relative) or the grid would
    exceed ``budget`` points.  ``mc``: ``budget`` uniform fibre samples, error
    from the sample variance; batches use independent child seeds of ``seed``
    so the result does not depend on ``threads``.  Monte Carlo defaults to a
    single fibre at eta = pi/4, where the sample variance is smallest.
    """
    if alpha == 0:
        raise ValueError("alpha must be non-zero")
    t0 = time.perf_counter()
    e = integrand if integrand is not None else rational_integrand(n)
    F = FibreIntegrand(e, alpha, alphaj)
    lo, hi = eta_range or (0.0, math.pi / 2)
    if method == "gauss":
        etas, ew = _eta_rule(lo, hi, eta, eta_nodes or 8)
        coeff = sum(w * F.coefficients(h) for h, w in zip(etas, ew))
        limit = int(budget or 4 * 10**6)
        nodes, used, prev, cur, err = 4, 0, None, None, math.inf
        while cur is None or 2 * nodes ** (F.N - 1) <= limit:
            x, wt = sphere_gauss(F.N, nodes)
            prev, cur, used = cur, float(coeff @ (F.monomial_values(x) @ wt)) * _prefactor(n), nodes
            if prev is not None:
                err = abs(cur - prev)
                if err <= tol * max(abs(cur), 1e-300):
                    break
            nodes += 2
        converged = err <= tol * max(abs(cur), 1e-300)
        return PeriodEstimate(cur, err, "gauss", used, converged, time.perf_counter() - t0)
    if method == "mc":
        budget = int(budget or 10**6)
        if eta is None and eta_nodes is None:
            eta = math.pi / 4
        etas, ew = _eta_rule(lo, hi, eta, eta_nodes or 1)
        coeff = sum(w * F.coefficients(h) for h, w in zip(etas, ew))
        area = 2 * math.pi ** (F.N / 2) / math.gamma(F.N / 2)
        nb = (budget + BATCH - 1) // BATCH
        sizes = [min(BATCH, budget - i * BATCH) for i in range(nb)]
        children = np.random.SeedSequence(seed).spawn(nb)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda a: _mc_batch(F, coeff, *a), zip(children, sizes)))
        else:
            parts = [_mc_batch(F, coeff, c, b) for c, b in zip(children, sizes)]
        total = math.fsum(p[0] for p in parts)
        total2 = math.fsum(p[1] for p in parts)
        mean = total / budget
        var = max(total2 / budget - mean * mean, 0.0)
        pf = _prefactor(n) * area
        return PeriodEstimate(mean * pf, math.sqrt(var / budget) * abs(pf), "mc", budget, True,
                              time.perf_counter() - t0)
    raise ValueError(f"unknown method {method!r}; expected 'gauss' or 'mc'")


def fibre_integral_euclidean(e: SymbolExpr, eta: float, alpha: float, alphaj, nodes: int = 24) -> float:
    """Integral over the Euclidean unit sphere in xi at fixed eta, evaluating the trace as given.

    This is the literal fibre of the semialgebraic domain; it must agree with
    the metric-cosphere integral by Stokes.
    """
    N = e.layout.N
    x, wt = sphere_gauss(N, nodes)
    # any sign choice works since only even powers survive the parity filter
    u = np.sqrt(x)
    u[2] /= math.sin(eta)
    u[3] /= math.cos(eta)
    vals = evaluate_array(parity_filter(e), eta, u, alpha, alphaj)
    if np.any(vals.imag):
        raise ValueError("complex values after the parity filter")
    return float(vals.real @ wt)
