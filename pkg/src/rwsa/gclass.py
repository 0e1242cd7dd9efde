"""Classes in the Grothendieck ring of varieties that are polynomials in the Lefschetz class L."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping


class ClassMismatchError(AssertionError):
    """Two independent computations of the same class disagree."""


class LefschetzPoly:
    """Integer polynomial in L, stored sparsely without zero coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, int] | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            if k < 0:
                raise ValueError("negative power of L")
            if v:
                c[int(k)] = int(v)
        self._c = c

    @classmethod
    def L(cls, k: int = 1) -> "LefschetzPoly":
        return cls({k: 1})

    @classmethod
    def const(cls, v: int) -> "LefschetzPoly":
        return cls({0: v})

    @property
    def coeffs(self) -> dict[int, int]:
        return dict(self._c)

    def degree(self) -> int:
        return max(self._c, default=-1)

    def _lift(self, o) -> "LefschetzPoly":
        return o if isinstance(o, LefschetzPoly) else LefschetzPoly.const(o)

    def __add__(self, o):
        o = self._lift(o)
        c = dict(self._c)
        for k, v in o._c.items():
            c[k] = c.get(k, 0) + v
        return LefschetzPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return LefschetzPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        c: dict[int, int] = {}
        for k1, v1 in self._c.items():
            for k2, v2 in o._c.items():
                c[k1 + k2] = c.get(k1 + k2, 0) + v1 * v2
        return LefschetzPoly(c)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        r = LefschetzPoly.const(1)
        for _ in range(k):
            r = r * self
        return r

    def __call__(self, x: int) -> int:
        return sum(v * x ** k for k, v in self._c.items())

    def __eq__(self, o):
        if isinstance(o, int):
            o = LefschetzPoly.const(o)
        if not isinstance(o, LefschetzPoly):
            return NotImplemented
        return self._c == o._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __repr__(self):
        return f"LefschetzPoly({self})"

    def __str__(self):
        """Descending powers, e.g. 'L^5 - 3L^4 + L^3 + 3L^2 - 2L'."""
        if not self._c:
            return "0"
        out = []
        for k in sorted(self._c, reverse=True):
            v = self._c[k]
            mag = abs(v)
            mono = "" if k == 0 else ("L" if k == 1 else f"L^{k}")
            body = str(mag) if k == 0 else (mono if mag == 1 else f"{mag}{mono}")
            if not out:
                out.append(("-" if v < 0 else "") + body)
            else:
                out.append(("- " if v < 0 else "+ ") + body)
        return " ".join(out)

    def to_json_obj(self) -> dict:
        return {"text": str(self), "coeffs": {str(k): v for k, v in sorted(self._c.items(), reverse=True)}}


L = LefschetzPoly.L()
ONE = LefschetzPoly.const(1)


def projective_space(N: int) -> LefschetzPoly:
    """[P^N] = 1 + L + ... + L^N."""
    return LefschetzPoly({k: 1 for k in range(N + 1)})


def cone_class(z: LefschetzPoly) -> LefschetzPoly:
    """Projective cone over Z: L [Z] + 1."""
    return L * z + 1


def affine_complement_class(z: LefschetzPoly, N: int) -> LefschetzPoly:
    """Complement in A^{N+1} of the affine cone over Z in P^N."""
    if N < 0:
        raise ValueError("N must be non-negative")
    return L ** (N + 1) - L * (L - 1) * z - L


def complement_with_hyperplanes(z: LefschetzPoly, N: int) -> LefschetzPoly:
    """Complement in A^{N+1} of the affine cone together with two parallel hyperplanes."""
    if N < 0:
        raise ValueError("N must be non-negative")
    return L ** (N + 1) - 2 * L ** N - (L - 2) * (L - 1) * z - (L - 2)


def complement_by_inclusion_exclusion(z: LefschetzPoly, N: int) -> LefschetzPoly:
    """Same class as :func:`complement_with_hyperplanes`, assembled from its pieces.

    The two hyperplanes H, H' (u0 = 0, u0 = 1) have [H u H'] = 2 L^N; the cone
    meets each in the affine cone over Z in one dimension less, with
    class (L - 1)[Z] + 1.
    """
    cone = L ** (N + 1) - affine_complement_class(z, N)
    hyper = 2 * L ** N
    meet = 2 * ((L - 1) * z + 1)
    return L ** (N + 1) - (cone + hyper - meet)


def quadric_complement_recursive(n: int) -> LefschetzPoly:
    """[P^{2n+1} minus Z] via the step from n-1 to n, starting at L^3 - L."""
    if n < 1:
        raise ValueError("n must be >= 1")
    c = L ** 3 - L
    for k in range(2, n + 1):
        c = L ** (2 * k) * (L - 1) + L * c
    return c


def quadric_complement_closed(n: int) -> LefschetzPoly:
    return L ** (2 * n + 1) - L ** n


def quadric_complement_class(n: int) -> LefschetzPoly:
    """[P^{2n+1} minus Z], recursion checked against L^{2n+1} - L^n."""
    r = quadric_complement_recursive(n)
    c = quadric_complement_closed(n)
    if r != c:
        raise ClassMismatchError(f"n={n}: recursion gives {r}, closed form {c}")
    return r


def quadric_class(n: int) -> LefschetzPoly:
    """[Z] for the quadric in P^{2n+1}."""
    return projective_space(2 * n + 1) - quadric_complement_class(n)


def affine_cone_complement_closed(n: int) -> LefschetzPoly:
    return L ** (2 * n + 3) - L ** (2 * n + 2) - L ** (n + 2) + L ** (n + 1)


def hyperplane_complement_closed(n: int) -> LefschetzPoly:
    return (L ** (2 * n + 3) - 3 * L ** (2 * n + 2) + 2 * L ** (2 * n + 1)
            - L ** (n + 2) + 3 * L ** (n + 1) - 2 * L ** n)


@dataclass
class ClassReport:
    n: int
    projective_complement: LefschetzPoly
    affine_complement: LefschetzPoly
    hyperplane_complement: LefschetzPoly
    notes: list[str] = field(default_factory=list)

    def items(self):
        return [("projective_complement", self.projective_complement),
                ("affine_complement", self.affine_complement),
                ("hyperplane_complement", self.hyperplane_complement)]

    def to_json_obj(self) -> dict:
        return {"n": self.n, **{k: v.to_json_obj() for k, v in self.items()}, "notes": self.notes}

    def to_text(self) -> str:
        return "\n".join(f"{k}: {v}" for k, v in self.items())


def full_class_suite(n: int) -> ClassReport:
    """All three classes for the quadric of index n, each computed two ways."""
    pc = quadric_complement_class(n)
    z = quadric_class(n)
    N = 2 * n + 2
    ac = affine_complement_class(z, N)
    hc = complement_with_hyperplanes(z, N)
    checks = [
        ("affine complement", ac, affine_cone_complement_closed(n)),
        ("complement with hyperplanes", hc, hyperplane_complement_closed(n)),
        ("inclusion-exclusion", complement_by_inclusion_exclusion(z, N), hc),
    ]
    for name, got, want in checks:
        if got != want:
            raise ClassMismatchError(f"n={n}, {name}: {got} != {want}")
    for name, cls in (("projective", pc), ("affine", ac), ("hyperplane", hc)):
        if cls(1) != 0:
            raise ClassMismatchError(f"n={n}: {name} complement has non-zero Euler characteristic")
    return ClassReport(n, pc, ac, hc,
                       notes=["classes computed after adjoining a square root of -1 to the base field"])
