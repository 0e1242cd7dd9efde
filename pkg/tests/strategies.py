"""Hypothesis strategies for small exact expressions (n = 2, alpha_j limited to alpha_1, alpha_2)."""
from fractions import Fraction

from hypothesis import strategies as st

from rwsa.exact import GaussianRational, Layout, SymbolExpr

N_TEST = 2
L = Layout(N_TEST)

small = st.integers(-4, 4)
coeffs = st.builds(lambda a, b, d: GaussianRational(Fraction(a, d), Fraction(b, d)),
                   small, small, st.integers(1, 3)).filter(bool)


@st.composite
def monomials(draw):
    return SymbolExpr.monomial(
        N_TEST, draw(coeffs),
        u0=draw(st.integers(0, 2)), s=draw(st.integers(-2, 2)), c=draw(st.integers(-2, 2)),
        u=draw(st.lists(st.integers(0, 2), min_size=L.N, max_size=L.N)),
        alpha=draw(st.integers(-2, 2)),
        alphaj=draw(st.lists(st.integers(0, 1), min_size=2, max_size=2)),
        q=draw(st.integers(0, 2)))


@st.composite
def exprs(draw, max_terms=3):
    e = SymbolExpr.zero(N_TEST)
    for m in draw(st.lists(monomials(), min_size=0, max_size=max_terms)):
        e = e + m
    return e


@st.composite
def raw_soups(draw):
    """Un-normalized key -> coefficient maps: any s, c exponents and i powers up to i^3."""
    out = {}
    for _ in range(draw(st.integers(0, 5))):
        key = [0] * L.size
        key[0] = draw(st.integers(0, 2))
        key[1] = draw(st.integers(-2, 2))
        key[2] = draw(st.integers(0, 3))
        key[3] = draw(st.integers(-3, 4))
        key[4] = draw(st.integers(-3, 4))
        for j in range(L.N):
            key[5 + j] = draw(st.integers(0, 2))
        key[L.ii] = draw(st.integers(0, 3))
        out[tuple(key)] = Fraction(draw(small), draw(st.integers(1, 3)))
    return out
