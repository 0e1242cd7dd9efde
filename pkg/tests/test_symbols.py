import math

import numpy as np
import pytest

from rwsa.exact import GaussianRational, SymbolExpr
from rwsa.numerics.evaluate import EvalPoint, evaluate
from rwsa.symbols import (MatrixSymbol, dirac_q0, dirac_q1, is_homogeneous, laplace_symbols, scale_u,
                          symbol_by_name)

V = SymbolExpr.var
I = GaussianRational(0, 1)


def test_q1_entries():
    q1 = dirac_q1(1)
    assert q1.entry(1, 3) == (V(1, "u4") * V(1, "alpha", -1)).scale(I) - V(1, "u1")
    assert q1.entry(1, 1).is_zero()


def test_q1_scales_linearly():
    q1 = dirac_q1(1)
    assert q1.map(lambda x: scale_u(x, 2)) == q1.scale(2)


def test_q0_entries():
    q0 = dirac_q0(1)
    K = (SymbolExpr.const(1) - V(1, "u0").scale(2)) * SymbolExpr.monomial(1, 1, alpha=-1, s=-1, c=-1).scale(
        GaussianRational(1) / 2)
    assert q0.entry(1, 3) == SymbolExpr.monomial(1, GaussianRational(0, 3) / 2, alpha=-1, alphaj={1: 1})
    assert q0.entry(1, 4) == K
    assert q0.entry(3, 2) == -K


def test_p2_is_the_metric_quadric():
    p2, _, _ = laplace_symbols(1)
    ia2 = V(1, "alpha", -2)
    assert p2.entry(1, 1) == V(1, "u1", 2) + ia2 * (V(1, "u2", 2) + V(1, "u3", 2) + V(1, "u4", 2))
    assert p2.entry(1, 2).is_zero()


@pytest.mark.parametrize("n", [1, 2])
def test_q1_squared_is_p2(n):
    q1 = dirac_q1(n)
    p2, _, _ = laplace_symbols(n)
    assert q1 @ q1 == p2
    assert p2 == MatrixSymbol.scalar(p2.entry(1, 1), 2)


def test_p2_commutes():
    q1, q0 = dirac_q1(1), dirac_q0(1)
    p2, p1, _ = laplace_symbols(1)
    assert p2 @ q1 == q1 @ p2
    assert p2 @ q0 == q0 @ p2
    assert p2 @ p1 == p1 @ p2


@pytest.mark.parametrize("name,order", [("q1", 1), ("q0", 0), ("p2", 2), ("p1", 1), ("p0", 0)])
def test_homogeneity_orders(name, order):
    m = symbol_by_name(name, 1)
    assert m.order == order
    assert all(is_homogeneous(x, order, (2, 3)) for r in m.entries for x in r)


def test_wrong_order_is_detected():
    assert not is_homogeneous(dirac_q1(1).entry(1, 3), 2)


def test_unknown_symbol():
    with pytest.raises(ValueError):
        symbol_by_name("p3", 1)


# -- float oracle in the trigonometric chart ----------------------------------------
# q1, q0 written in (t, eta, xi) with a(t) = 2 + sin(t) + t^2/5; derivatives by central differences.


def _a(t):
    return 2 + math.sin(t) + t * t / 5


def _a1(t):
    return math.cos(t) + 2 * t / 5


def _a2(t):
    return -math.sin(t) + 2 / 5


def _q1(a, eta, xi):
    x1, x2, x3, x4 = xi
    cs, sc = 1 / math.sin(eta), 1 / math.cos(eta)
    return np.array([
        [0, 0, 1j * sc * x4 / a - x1, 1j * x2 / a + cs * x3 / a],
        [0, 0, 1j * x2 / a - cs * x3 / a, -x1 - 1j * sc * x4 / a],
        [-x1 - 1j * sc * x4 / a, -1j * x2 / a - cs * x3 / a, 0, 0],
        [cs * x3 / a - 1j * x2 / a, 1j * sc * x4 / a - x1, 0, 0],
    ])


def _q0(a, a1, eta):
    d = 3j * a1 / (2 * a)
    k = (1 / math.tan(eta) - math.tan(eta)) / (2 * a)
    return np.array([[0, 0, d, k], [0, 0, k, d], [d, -k, 0, 0], [-k, d, 0, 0]])


def _fd(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


def _numeric_p1_p0(t, eta, xi):
    q1, q0 = _q1(_a(t), eta, xi), _q0(_a(t), _a1(t), eta)
    # q1 is linear in xi
    dq1_x1 = _q1(_a(t), eta, (1, 0, 0, 0))
    dq1_x2 = _q1(_a(t), eta, (0, 1, 0, 0))
    dq1_t = _fd(lambda s: _q1(_a(s), eta, xi), t)
    dq1_eta = _fd(lambda e: _q1(_a(t), e, xi), eta)
    dq0_t = _fd(lambda s: _q0(_a(s), _a1(s), eta), t)
    dq0_eta = _fd(lambda e: _q0(_a(t), _a1(t), e), eta)
    p1 = q0 @ q1 + q1 @ q0 - 1j * dq1_x1 @ dq1_t - 1j * dq1_x2 @ dq1_eta
    p0 = q0 @ q0 - 1j * dq1_x1 @ dq0_t - 1j * dq1_x2 @ dq0_eta
    return p1, p0


def _point(eta, xi, a, aj):
    s, c = math.sin(eta), math.cos(eta)
    return EvalPoint.from_eta(eta, (xi[0], xi[1], xi[2] / s, xi[3] / c), a, aj)


def _engine_matrix(m, t, eta, xi):
    p = _point(eta, xi, _a(t), (_a1(t), _a2(t)))
    return np.array([[evaluate(x, p) for x in row] for row in m.entries])


def test_p1_p0_against_trigonometric_chart():
    _, p1, p0 = laplace_symbols(1)
    rng = np.random.default_rng(7)
    for _ in range(10):
        t = rng.uniform(-1, 1)
        eta = rng.uniform(0.2, 1.35)
        xi = rng.uniform(-1, 1, 4)
        n1, n0 = _numeric_p1_p0(t, eta, xi)
        e1, e0 = _engine_matrix(p1, t, eta, xi), _engine_matrix(p0, t, eta, xi)
        assert np.trace(e1) == pytest.approx(np.trace(n1), rel=1e-7, abs=1e-8)
        assert np.abs(e1 - n1).max() <= 1e-7 * max(1, np.abs(n1).max())
        assert np.abs(e0 - n0).max() <= 1e-7 * max(1, np.abs(n0).max())


def test_trace_p1_with_constant_scale_factor():
    # alpha_1 = 0: only the eta-derivative term survives besides q0 q1 + q1 q0
    _, p1, _ = laplace_symbols(1)
    rng = np.random.default_rng(11)
    for _ in range(10):
        eta = rng.uniform(0.2, 1.35)
        xi = rng.uniform(-1, 1, 4)
        a = rng.uniform(0.5, 2)
        q1, q0 = _q1(a, eta, xi), _q0(a, 0.0, eta)
        dq1_eta = _fd(lambda e: _q1(a, e, xi), eta)
        want = np.trace(q0 @ q1 + q1 @ q0 - 1j * _q1(a, eta, (0, 1, 0, 0)) @ dq1_eta)
        got = evaluate(p1.trace(), _point(eta, xi, a, (0.0, 0.0)))
        assert got == pytest.approx(want, rel=1e-7, abs=1e-8)
