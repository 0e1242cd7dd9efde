"""Text and JSON forms of :class:`SymbolExpr` (canonical order, exact coefficients)."""
from __future__ import annotations

import json
from typing import Any

from gmpy2 import mpq

from .exact import GaussianRational, SymbolExpr, Term, _qstr


def term_to_dict(t: Term) -> dict[str, Any]:
    return {
        "coeff": {"re": _qstr(t.coeff.re), "im": _qstr(t.coeff.im)},
        "num": {"u0": t.u0, "s": t.s, "c": t.c, "u": list(t.u), "alpha": t.alpha,
                "alphaj": list(t.alphaj)},
        "den": {"s": t.den_s, "c": t.den_c, "q": t.q_pow},
    }


def to_json_obj(e: SymbolExpr) -> dict[str, Any]:
    return {"n": e.n, "terms": [term_to_dict(t) for t in e.terms()]}


def from_json_obj(obj: dict[str, Any]) -> SymbolExpr:
    n = int(obj["n"])
    out = SymbolExpr.zero(n)
    parts = []
    for d in obj["terms"]:
        num, den = d["num"], d["den"]
        if num["s"] and den["s"] or num["c"] and den["c"]:
            raise ValueError("s or c appears both above and below the line")
        parts.append(SymbolExpr.monomial(
            n, GaussianRational(mpq(d["coeff"]["re"]), mpq(d["coeff"]["im"])),
            u0=num["u0"], s=num["s"] - den["s"], c=num["c"] - den["c"],
            u=num["u"], alpha=num["alpha"], alphaj=num["alphaj"], q=den["q"]))
    for p in parts:
        out = out + p
    return out


def to_json(e: SymbolExpr, **kw) -> str:
    return json.dumps(to_json_obj(e), **kw)


def from_json(text: str) -> SymbolExpr:
    return from_json_obj(json.loads(text))


def _pw(name: str, e: int) -> str:
    return name if e == 1 else f"{name}^{e}"


def term_to_text(t: Term) -> str:
    num = []
    if t.u0:
        num.append(_pw("u0", t.u0))
    if t.s:
        num.append("s")
    if t.c:
        num.append("c")
    num += [_pw(f"u{j}", e) for j, e in enumerate(t.u, 1) if e]
    if t.alpha:
        num.append(_pw("alpha", t.alpha))
    num += [_pw(f"alpha{j}", e) for j, e in enumerate(t.alphaj, 1) if e]
    den = []
    if t.den_s:
        den.append(_pw("s", t.den_s))
    if t.den_c:
        den.append(_pw("c", t.den_c))
    if t.q_pow:
        den.append(_pw("Q", t.q_pow))
    body = "*".join(num) if num else "1"
    if den:
        body += "/(" + "*".join(den) + ")"
    return f"({t.coeff})*{body}"


def to_text(e: SymbolExpr) -> str:
    ts = e.terms()
    if not ts:
        return "0"
    return "\n+ ".join(term_to_text(t) for t in ts)
