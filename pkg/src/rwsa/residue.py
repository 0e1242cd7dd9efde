"""From the traced top-order symbol to the heat coefficient.

The fibre integral is taken over the metric cosphere rather than the
Euclidean unit sphere; both bound the same region for a closed form that
is homogeneous of degree -(2n+2), so the integrals agree.  On the metric
cosphere

    u1 = w1,  u2 = alpha w2,  u3 = alpha w3,  u4 = alpha w4,  u_j = w_j (j >= 5),

with w on the unit sphere S^{2n+1}, so Q = 1 and the pulled-back fibre
volume form is alpha^3 s c dOmega(w).  The w-sphere is parametrized by
angles psi_1 in [0, 2 pi) and psi_2..psi_{2n+1} in [0, pi]:

    w1 = cos(psi_1) prod_{l>=2} sin(psi_l),   w2 = sin(psi_1) prod_{l>=2} sin(psi_l),
    w_j = cos(psi_{j-1}) prod_{l>=j} sin(psi_l)   (j >= 3),
    dOmega = prod_{l>=2} sin(psi_l)^(l-1).
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from math import factorial

from gmpy2 import mpq

from .exact import IA, IC, IQ, IS, IU, IU0, Layout, SymbolExpr, normalize_sc
from .parametrix import top_trace

log = logging.getLogger(__name__)


class EtaDependenceError(AssertionError):
    """The fibre integral depends on eta: something upstream is wrong."""


class RationalityError(AssertionError):
    """A residual power of pi or an imaginary part survived assembly."""


@dataclass(frozen=True, order=True)
class PiRational:
    """``coeff * pi^pi_power``."""

    coeff: mpq
    pi_power: int

    def __mul__(self, other: "PiRational") -> "PiRational":
        return PiRational(self.coeff * other.coeff, self.pi_power + other.pi_power)

    def __float__(self):
        from math import pi
        return float(self.coeff) * pi ** self.pi_power

    def __str__(self):
        if self.pi_power == 0 or self.coeff == 0:
            return str(self.coeff)
        return f"{self.coeff}*pi^{self.pi_power}"


ZERO = PiRational(mpq(0), 0)


def _gamma_half(twice: int) -> PiRational:
    """Gamma(twice/2) for twice >= 1, exactly, as rational * pi^(1/2 * k) with k in {0, 1}.

    The pi exponent is returned doubled (0 or 1) so half powers stay integral.
    """
    if twice % 2 == 0:
        return PiRational(mpq(factorial(twice // 2 - 1)), 0)
    k = twice // 2  # Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi)
    return PiRational(mpq(factorial(2 * k), 4 ** k * factorial(k)), 1)


def wallis(cos_pow: int, sin_pow: int, full_circle: bool) -> PiRational:
    """Exact integral of cos^a sin^b over [0, 2 pi] (full circle) or [0, pi]."""
    a, b = cos_pow, sin_pow
    if a < 0 or b < 0:
        raise ValueError("Wallis exponents must be non-negative")
    if a % 2 or (full_circle and b % 2):
        return ZERO
    # Quarter period: Gamma((a+1)/2) Gamma((b+1)/2) / (2 Gamma((a+b)/2 + 1))
    g1, g2, g3 = _gamma_half(a + 1), _gamma_half(b + 1), _gamma_half(a + b + 2)
    half_pi = g1.pi_power + g2.pi_power - g3.pi_power
    assert half_pi % 2 == 0
    quarter = g1.coeff * g2.coeff / (2 * g3.coeff)
    mult = 4 if full_circle else 2
    return PiRational(quarter * mult, half_pi // 2)


def parity_filter(e: SymbolExpr) -> SymbolExpr:
    """Drop every term that is odd in some cotangent variable u_j."""
    L = e.layout
    return e.filter(lambda k: not any(x & 1 for x in k[IU:L.iaj]))


@dataclass(frozen=True)
class CosphereTerm:
    coeff: mpq
    eta_pows: tuple[int, int]  # signed exponents of sin(eta), cos(eta), volume factor included
    alpha_pow: int
    alphaj_pows: tuple[int, ...]
    psi_exponents: tuple[tuple[int, int], ...]  # (cos, sin) for psi_1 .. psi_{2n+1}
    weight: PiRational = field(default=ZERO)

    @property
    def monomial(self) -> tuple[int, tuple[int, ...]]:
        return self.alpha_pow, self.alphaj_pows


def psi_exponents(w: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    """Angle exponents for the monomial prod w_j^{w[j-1]} times the sphere volume density."""
    N = len(w)
    out = [(w[0], w[1])]
    run = w[0] + w[1]
    for l in range(2, N):
        out.append((w[l], run + l - 1))
        run += w[l]
    return tuple(out)


def sphere_weight(w: tuple[int, ...]) -> PiRational:
    """Integral over the unit sphere S^{N-1} of prod w_j^{e_j}, as a product of Wallis factors."""
    acc = PiRational(mpq(1), 0)
    for l, (a, b) in enumerate(psi_exponents(w), start=1):
        f = wallis(a, b, full_circle=(l == 1))
        if f.coeff == 0:
            return ZERO
        acc = acc * f
    return acc


def cosphere_reduce(e: SymbolExpr, n: int | None = None, *, order: int | None = None) -> list[CosphereTerm]:
    """Substitute the cosphere parametrization term by term.

    ``order`` defaults to -2n-2; any other value is accepted for testing
    smaller pieces (e.g. 1/Q at order -2).
    """
    L = e.layout
    if n is not None and n != L.n:
        raise ValueError(f"expression has n={L.n}, got n={n}")
    if order is None:
        order = -2 * L.n - 2
    out = []
    for k in sorted(e.raw()):
        v = e.raw()[k]
        if k[-1]:
            raise ValueError("complex coefficient reached the cosphere stage")
        w = k[IU:L.iaj]
        if sum(w) - 2 * k[IQ] != order:
            raise ValueError(f"term of degree {sum(w) - 2 * k[IQ]} in an expression of order {order}")
        ap = k[IA] + w[1] + w[2] + w[3] + 3
        sp = 2 * k[IU0] + k[IS] + 1
        cp = k[IC] + 1
        out.append(CosphereTerm(coeff=v, eta_pows=(sp, cp), alpha_pow=ap,
                                alphaj_pows=tuple(k[L.iaj:L.ii]), psi_exponents=psi_exponents(w),
                                weight=sphere_weight(w)))
    return out


@dataclass
class EtaReduced:
    values: dict[tuple[int, tuple[int, ...]], mpq]
    pi_power: int


def eta_reduce(terms: list[CosphereTerm], n: int) -> EtaReduced:
    """Sum the Wallis-weighted terms and verify the eta dependence is exactly s*c.

    For each alpha-monomial the eta part, divided by sin(eta) cos(eta), is
    reduced to normal form in (u0, s, c); it must be a constant.
    """
    pis = {t.weight.pi_power for t in terms if t.weight.coeff}
    if len(pis) > 1:
        raise RationalityError(f"mixed pi powers {sorted(pis)} in the fibre integral")
    pi_power = pis.pop() if pis else n + 1
    acc: dict = defaultdict(lambda: defaultdict(mpq))
    for t in terms:
        if not t.weight.coeff:
            continue
        c = t.coeff * t.weight.coeff
        sp, cp = t.eta_pows[0] - 1, t.eta_pows[1] - 1
        a0, sp = (sp // 2, sp % 2) if sp > 0 else (0, sp)
        for m, a, s, cc in normalize_sc(a0, sp, cp):
            acc[t.monomial][(a, s, cc)] += c * m
    values = {}
    for mono in sorted(acc):
        poly = {k: v for k, v in acc[mono].items() if v}
        rest = {k: v for k, v in poly.items() if k != (0, 0, 0)}
        if rest:
            shown = ", ".join(f"{v}*u0^{a}*s^{s}*c^{c}" for (a, s, c), v in sorted(rest.items()))
            raise EtaDependenceError(
                f"fibre integral of alpha^{mono[0]} alpha_j^{mono[1]} depends on eta: {shown}")
        if poly:
            values[mono] = poly[(0, 0, 0)]
    return EtaReduced(values, pi_power)


@dataclass
class HeatCoefficient:
    """Exact heat coefficient: {(alpha power, alpha_j powers): rational} times pi^pi_power."""

    n: int
    poly: dict[tuple[int, tuple[int, ...]], mpq]
    pi_power: int = 0

    def evaluate(self, alpha, alphaj) -> mpq | float:
        """Value at a point; exact when the inputs are rational."""
        total = 0
        for (ap, js), c in self.poly.items():
            term = c * alpha ** ap
            for x, e in zip(alphaj, js):
                if e:
                    term = term * x ** e
            total = total + term
        return total

    def to_text(self) -> str:
        if not self.poly:
            return "0"
        parts = []
        for (ap, js), c in sorted(self.poly.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
            mono = [f"alpha^{ap}" if ap != 1 else "alpha"] if ap else []
            mono += [f"alpha{j}" + (f"^{e}" if e > 1 else "") for j, e in enumerate(js, 1) if e]
            parts.append(f"({c})" + ("*" + "*".join(mono) if mono else ""))
        return " + ".join(parts)

    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "pi_power": self.pi_power,
            "terms": [{"coeff": f"{c.numerator}/{c.denominator}", "alpha": ap, "alphaj": list(js)}
                      for (ap, js), c in sorted(self.poly.items())],
        }

    def __eq__(self, other):
        if not isinstance(other, HeatCoefficient):
            return NotImplemented
        return self.pi_power == other.pi_power and self.poly == other.poly


def prefactor(n: int) -> PiRational:
    """Normalization between the heat coefficient and the (eta, fibre) integral, eta-integral of s*c included."""
    return PiRational(mpq(1, 2 ** 3) * mpq(1, 2), -(1 + n))


def heat_coefficient(n: int, *, trace: SymbolExpr | None = None) -> HeatCoefficient:
    """Full pipeline for a_{2n}."""
    if trace is None:
        trace = top_trace(n)
    filtered = parity_filter(trace)
    if not filtered.is_real():
        raise RationalityError("parity-filtered trace has a non-zero imaginary part")
    terms = cosphere_reduce(filtered, n)
    red = eta_reduce(terms, n)
    pre = prefactor(n)
    pi_power = red.pi_power + pre.pi_power
    if pi_power != 0:
        raise RationalityError(f"residual pi power {pi_power}")
    poly = {m: v * pre.coeff for m, v in red.values.items()}
    return HeatCoefficient(n, poly, pi_power)


def period_constant(n: int) -> PiRational:
    """C with a_{2n} = C * (integral of the rational form over the semialgebraic domain).

    The domain keeps u1, u2, u5.. positive, a 2^{-2n} share of the sphere.
    """
    return PiRational(mpq(2 ** (2 * n), 2 ** 3), -(1 + n))


def rational_integrand(n: int, trace: SymbolExpr | None = None) -> SymbolExpr:
    """Even part of the parity-filtered trace: the terms free of s and c, a rational function of u0, u."""
    if trace is None:
        trace = top_trace(n)
    f = parity_filter(trace)
    return f.filter(lambda k: k[IS] % 2 == 0 and k[IC] % 2 == 0)


def emit_period_form(n: int) -> dict:
    """Integrand, form and domain of the period representing a_{2n}."""
    from .serialize import to_json_obj

    L = Layout(n)
    N = L.N
    f = rational_integrand(n)
    form = []
    for j in range(1, N + 1):
        form.append({"sign": (-1) ** (j - 1), "coefficient_var": f"u{j}",
                     "differentials": ["u0"] + [f"u{i}" for i in range(1, N + 1) if i != j]})
    quadric = ["u1^2", "u2^2", "u0*u3^2", "(1-u0)*u4^2"] + [f"u{j}^2" for j in range(5, N + 1)]
    box = ["u0", "u1", "u2"] + [f"u{j}" for j in range(5, N + 1)]
    C = period_constant(n)
    return {
        "n": n,
        "integrand": to_json_obj(f),
        "form": {"factor": "1/2", "terms": form},
        "domain": {
            "equation": " + ".join(quadric) + " = 1",
            "bounds": [f"0 < {v} < 1" for v in box],
        },
        "constant": {"rational": f"{C.coeff.numerator}/{C.coeff.denominator}", "pi_power": C.pi_power},
    }


def form_text(n: int) -> str:
    """Human-readable rendering of the (2n+2)-form on the domain."""
    N = Layout(n).N
    parts = []
    for j in range(1, N + 1):
        d = "".join(f"du{i}" for i in [0] + [i for i in range(1, N + 1) if i != j])
        parts.append(("+ " if j % 2 else "- ") + f"u{j} {d}")
    return "(1/2)(" + " ".join(parts).lstrip("+ ") + ")"
