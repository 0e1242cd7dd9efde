"""Transcription oracles: a small expression language, its evaluator and a bridge to SymbolExpr.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' integer)?
    base   := rational | symbol | func '(' expr ')' | '(' expr ')'
    symbol := a | a1 .. a4 | alpha | eta | xi1 .. xi6 | Q
    func   := sin | cos | tan | cot | sec | csc

``a(t)``, ``a'(t)``, ``a''(t)``, ... are accepted as spellings of ``a``,
``a1``, ``a2``, ...  ``alpha`` is the same quantity as ``a``.  ``Q`` is the
quadric ``xi1^2 + (xi2^2 + csc(eta)^2 xi3^2 + sec(eta)^2 xi4^2)/a^2 + xi5^2 + ...``
in the fixture's dimension.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from ..exact import IQ, IS, IU, IU0, GaussianRational, Layout, SymbolExpr

FUNCS = ("sin", "cos", "tan", "cot", "sec", "csc")
SYMBOLS = {"a", "a1", "a2", "a3", "a4", "alpha", "eta", "Q"} | {f"xi{j}" for j in range(1, 7)}


class OracleSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line, self.col = line, col


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Node"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: int


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Num, Sym, Func, Neg, Pow, Bin]


@dataclass(frozen=True)
class OracleExpression:
    tree: Node
    n: int = 1


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<alias>a(?P<primes>'{0,4})\(t\))
  | (?P<num>\d+)
  | (?P<name>[A-Za-z][A-Za-z0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(text: str):
    pos, line, lstart = 0, 1, 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise OracleSyntaxError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        col = pos - lstart + 1
        if kind == "ws":
            chunk = m.group()
            if "\n" in chunk:
                line += chunk.count("\n")
                lstart = pos + chunk.rindex("\n") + 1
        elif kind == "alias":
            k = len(m.group("primes"))
            out.append(("name", "a" if k == 0 else f"a{k}", line, col))
        else:
            out.append((kind if kind != "op" else m.group(), m.group(), line, col))
        pos = m.end()
    out.append(("eof", "", line, pos - lstart + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        t = self.toks[self.i]
        if kind is not None and t[0] != kind:
            raise OracleSyntaxError(f"expected {kind!r}, found {t[1] or 'end of input'!r}", t[2], t[3])
        self.i += 1
        return t

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            node = Bin(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek()[0] == "-":
            self.take()
            return Neg(self.factor())
        b = self.base()
        if self.peek()[0] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "-":
                self.take()
                sign = -1
            t = self.take("num")
            return Pow(b, sign * int(t[1]))
        return b

    def base(self) -> Node:
        t = self.peek()
        if t[0] == "num":
            self.take()
            return Num(Fraction(t[1]))
        if t[0] == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if t[0] == "name":
            self.take()
            if t[1] in FUNCS:
                self.take("(")
                e = self.expr()
                self.take(")")
                return Func(t[1], e)
            if t[1] not in SYMBOLS:
                raise OracleSyntaxError(f"unknown symbol {t[1]!r}", t[2], t[3])
            return Sym(t[1])
        raise OracleSyntaxError(f"unexpected {t[1] or 'end of input'!r}", t[2], t[3])


def parse_oracle(text: str, n: int = 1) -> OracleExpression:
    """Parse a transcription.  Lines starting with '#' are comments; '# n = K' sets the dimension."""
    body = []
    for line in text.splitlines():
        m = re.match(r"\s*#\s*n\s*=\s*(\d+)", line)
        if m:
            n = int(m.group(1))
        body.append("" if line.lstrip().startswith("#") else line)
    p = _Parser("\n".join(body))
    tree = p.expr()
    t = p.peek()
    if t[0] != "eof":
        raise OracleSyntaxError(f"trailing input {t[1]!r}", t[2], t[3])
    return OracleExpression(tree, n)


# -- printing -----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _show(node: Node, ctx: int = 0) -> str:
    """ctx: 0 expr, 1 right operand of +/-, 2 term operand, 3 right of * or /, 4 power base."""
    if isinstance(node, Num):
        v = node.value
        s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return f"({s})" if v.denominator != 1 else s
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Func):
        return f"{node.name}({_show(node.arg)})"
    if isinstance(node, Neg):
        s = "-" + _show(node.arg, 4 if isinstance(node.arg, (Num, Sym, Func, Pow)) else 5)
        return f"({s})" if ctx >= 4 else s
    if isinstance(node, Pow):
        s = f"{_show(node.base, 4)}^{node.exp}"
        return f"({s})" if ctx >= 4 else s
    p = _PREC[node.op]
    if p == 1:
        parts = []
        while isinstance(node, Bin) and node.op in "+-":
            parts.append(node.op + _show(node.right, 1))
            node = node.left
        s = _show(node, 0) + "".join(reversed(parts))
        return f"({s})" if ctx >= 1 else s
    left = _show(node.left, 0 if p == 1 else 2)
    right = _show(node.right, 1 if p == 1 else 3)
    s = f"{left}{node.op}{right}"
    need = (p == 1 and ctx >= 1) or (p == 2 and ctx >= 3)
    return f"({s})" if need else s


def print_oracle(e: OracleExpression | Node) -> str:
    tree = e.tree if isinstance(e, OracleExpression) else e
    return _show(tree)


def _fold_sum(node: Bin, fn):
    # Left-deep chains of + and - can be thousands of terms long; walk them without recursion.
    parts = []
    while isinstance(node, Bin) and node.op in "+-":
        parts.append((node.op, node.right))
        node = node.left
    acc = fn(node)
    for op, r in reversed(parts):
        acc = acc + fn(r) if op == "+" else acc - fn(r)
    return acc


# -- numeric evaluation ----------------------------------------------------------

_NP = {"sin": np.sin, "cos": np.cos, "tan": np.tan,
       "cot": lambda x: 1 / np.tan(x), "sec": lambda x: 1 / np.cos(x), "csc": lambda x: 1 / np.sin(x)}


def quadric_value(env: dict, n: int):
    e, a = env["eta"], env["a"]
    Q = env["xi1"] ** 2 + (env["xi2"] ** 2 + (env["xi3"] / np.sin(e)) ** 2 + (env["xi4"] / np.cos(e)) ** 2) / a ** 2
    for j in range(5, 2 * n + 3):
        Q = Q + env[f"xi{j}"] ** 2
    return Q


def eval_oracle(e: OracleExpression, env: dict):
    """Evaluate with floats or numpy arrays.  ``env`` maps a, a1.., eta, xi1.. to values."""
    env = dict(env)
    env.setdefault("alpha", env["a"])
    env["Q"] = quadric_value(env, e.n)

    def ev(node):
        if isinstance(node, Bin) and node.op in "+-":
            return _fold_sum(node, ev)
        if isinstance(node, Num):
            return float(node.value)
        if isinstance(node, Sym):
            return env[node.name]
        if isinstance(node, Func):
            return _NP[node.name](ev(node.arg))
        if isinstance(node, Neg):
            return -ev(node.arg)
        if isinstance(node, Pow):
            b = ev(node.base)
            return b ** node.exp if node.exp >= 0 else 1.0 / b ** (-node.exp)
        l, r = ev(node.left), ev(node.right)
        if node.op == "+":
            return l + r
        if node.op == "-":
            return l - r
        if node.op == "*":
            return l * r
        return l / r

    return ev(e.tree)


# -- bridge to exact expressions -----------------------------------------------------


class NotRepresentable(ValueError):
    pass


def _invert_monomial(x: SymbolExpr) -> SymbolExpr:
    raw = x.raw()
    if len(raw) != 1:
        raise NotRepresentable("division by a sum other than Q")
    (k, v), = raw.items()
    L = x.layout
    if any(k[IU:L.iaj]) or any(k[L.iaj:L.ii]):
        raise NotRepresentable("division by a cotangent variable or a derivative of the scale factor")
    key = list(-e for e in k)
    key[IU0] = 0
    key[IS] = -(k[IS] + 2 * k[IU0])
    key[-1] = 0
    coeff = GaussianRational(1) / (GaussianRational(0, v) if k[-1] else GaussianRational(v))
    return SymbolExpr.monomial(L, coeff) * SymbolExpr(L, {tuple(key): 1})


def to_symbolic(e: OracleExpression) -> SymbolExpr:
    """Rewrite in u-coordinates: xi3 = s u3, xi4 = c u4, trig functions of eta through s and c.

    Q stays an opaque symbol (a negative Q-denominator power).  Division
    is supported by Q powers and by monomials in s, c, alpha.
    """
    n = e.n
    S = SymbolExpr
    s, c = S.var(n, "s"), S.var(n, "c")
    one = S.const(n, 1)
    inv_s, inv_c = S.monomial(n, s=-1), S.monomial(n, c=-1)
    inv_sc = S.monomial(n, s=-1, c=-1)
    cos2 = one - S.var(n, "u0").scale(2)
    trig1 = {"sin": s, "cos": c, "tan": s * inv_c, "cot": c * inv_s, "sec": inv_c, "csc": inv_s}
    trig2 = {"sin": (s * c).scale(2), "cos": cos2, "cot": (cos2 * inv_sc).scale(Fraction(1, 2)),
             "csc": inv_sc.scale(Fraction(1, 2))}
    twice_eta = (Bin("*", Num(Fraction(2)), Sym("eta")), Bin("*", Sym("eta"), Num(Fraction(2))))
    xi = {"xi1": S.var(n, "u1"), "xi2": S.var(n, "u2"), "xi3": s * S.var(n, "u3"), "xi4": c * S.var(n, "u4")}
    for j in range(5, 2 * n + 3):
        xi[f"xi{j}"] = S.var(n, f"u{j}")
    Qsym = S(n, {tuple(-1 if i == IQ else 0 for i in range(Layout(n).size)): 1})
    names = {"a": S.var(n, "alpha"), "alpha": S.var(n, "alpha"), "Q": Qsym, **xi}
    for j in range(1, min(4, 2 * n) + 1):
        names[f"a{j}"] = S.var(n, f"alpha{j}")

    def conv(node) -> SymbolExpr:
        if isinstance(node, Bin) and node.op in "+-":
            return _fold_sum(node, conv)
        if isinstance(node, Num):
            return S.const(n, node.value)
        if isinstance(node, Sym):
            if node.name not in names:
                raise NotRepresentable(f"symbol {node.name} has no exact counterpart for n={n}")
            return names[node.name]
        if isinstance(node, Func):
            if node.arg == Sym("eta"):
                return trig1[node.name]
            if node.arg in twice_eta and node.name in trig2:
                return trig2[node.name]
            raise NotRepresentable(f"{node.name} of {print_oracle(node.arg)}")
        if isinstance(node, Neg):
            return -conv(node.arg)
        if isinstance(node, Pow):
            b = conv(node.base)
            if node.exp >= 0:
                return b ** node.exp
            return _invert_monomial(b) ** (-node.exp)
        l, r = conv(node.left), conv(node.right)
        if node.op == "+":
            return l + r
        if node.op == "-":
            return l - r
        if node.op == "*":
            return l * r
        return l * _invert_monomial(r)

    return conv(e.tree)


# -- comparison --------------------------------------------------------------------


@dataclass
class CompareReport:
    npoints: int
    max_rel_dev: float
    worst_point: dict
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_rel_dev < self.tol


def sample_points(n: int, npoints: int, seed: int = 0):
    """Admissible random points: |Q| > 1e-3 and sin(eta) cos(eta) > 1e-2."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < npoints:
        eta = rng.uniform(0, math.pi / 2)
        xi = rng.uniform(-1, 1, 2 * n + 2)
        a = float(Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 40))))
        aj = [float(Fraction(int(rng.integers(-30, 31)), int(rng.integers(1, 30)))) for _ in range(2 * n)]
        env = {"eta": eta, "a": a, **{f"xi{j + 1}": float(x) for j, x in enumerate(xi)},
               **{f"a{j + 1}": x for j, x in enumerate(aj)}}
        if math.sin(eta) * math.cos(eta) <= 1e-2 or quadric_value(env, n) <= 1e-3:
            continue
        pts.append(env)
    return pts


def env_to_point(env: dict, n: int):
    from .evaluate import EvalPoint
    s, c = math.sin(env["eta"]), math.cos(env["eta"])
    xi = [env[f"xi{j}"] for j in range(1, 2 * n + 3)]
    u = [xi[0], xi[1], xi[2] / s, xi[3] / c] + xi[4:]
    return EvalPoint(s * s, tuple(u), env["a"], tuple(env.get(f"a{j}", 0.0) for j in range(1, 2 * n + 1)), s, c)


def oracle_compare(engine: SymbolExpr, oracle: OracleExpression, npoints: int = 20, tol: float = 1e-10,
                   seed: int = 0) -> CompareReport:
    from .evaluate import evaluate
    n = engine.n
    worst, worst_env = 0.0, {}
    for env in sample_points(n, npoints, seed):
        ev = evaluate(engine, env_to_point(env, n))
        ov = eval_oracle(oracle, env)
        dev = abs(ev - ov) / max(abs(ov), abs(ev), 1e-300)
        if dev > worst or not worst_env:
            worst, worst_env = dev, env
    return CompareReport(npoints, worst, worst_env, tol)


# -- term samples ------------------------------------------------------------------


def split_terms(e: OracleExpression) -> list[OracleExpression]:
    """Top-level summands, with subtraction folded into a leading minus."""
    parts = []
    node = e.tree
    while isinstance(node, Bin) and node.op in "+-":
        parts.append(node.right if node.op == "+" else Neg(node.right))
        node = node.left
    parts.append(node)
    return [OracleExpression(p, e.n) for p in reversed(parts)]


def join_terms(terms: list[OracleExpression], n: int) -> OracleExpression:
    if not terms:
        return OracleExpression(Num(Fraction(0)), n)
    tree = terms[0].tree
    for t in terms[1:]:
        tree = Bin("+", tree, t.tree)
    return OracleExpression(tree, n)


def term_class(key: tuple, layout: Layout) -> tuple:
    """Fibre monomial, Q power and alpha_j monomial of a normal-form key; trigonometric factors are ignored."""
    return key[IQ], key[IU:layout.iaj], key[layout.iaj:layout.ii]


@dataclass
class SampleReport:
    classes: int
    sampled: int
    terms: int
    compare: CompareReport

    @property
    def ok(self) -> bool:
        return self.compare.ok


def class_sample_compare(engine: SymbolExpr, oracle: OracleExpression, fraction: float = 0.25,
                         seed: int = 0, npoints: int = 20, tol: float = 1e-10) -> SampleReport:
    """Compare a random share of term classes between the engine and a transcription.

    Terms are grouped by :func:`term_class`; both sides restricted to the same
    sampled classes are well-defined sub-expressions and must agree pointwise.
    """
    L = engine.layout
    by_class: dict[tuple, list[OracleExpression]] = {}
    for t in split_terms(oracle):
        keys = {term_class(k, L) for k in to_symbolic(t).raw()}
        if len(keys) > 1:
            raise NotRepresentable("a transcription term spans several classes")
        for k in keys:
            by_class.setdefault(k, []).append(t)
    classes = sorted(set(by_class) | {term_class(k, L) for k in engine.raw()})
    rng = np.random.default_rng(seed)
    size = max(1, math.ceil(fraction * len(classes)))
    picked = {classes[i] for i in rng.choice(len(classes), size=size, replace=False)}
    sub_engine = engine.filter(lambda k: term_class(k, L) in picked)
    sub_terms = [t for c in sorted(picked) for t in by_class.get(c, [])]
    rep = oracle_compare(sub_engine, join_terms(sub_terms, oracle.n), npoints, tol, seed)
    return SampleReport(len(classes), size, len(sub_terms), rep)
