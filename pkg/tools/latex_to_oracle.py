"""Convert Mathematica-style LaTeX output into the oracle expression language.

    python tools/latex_to_oracle.py SOURCE START END N > fixture.txt

START/END are 1-based inclusive line numbers of the math block body.
"""
from __future__ import annotations

import re
import sys

SIMPLE = {r"\alpha": "alpha", r"\eta": "eta"}
FUNCS = ("sin", "cos", "tan", "cot", "sec", "csc")


class Converter:
    def __init__(self, text: str, n: int):
        text = re.sub(r"\s+", "", text).rstrip(".")
        self.s = text
        self.i = 0
        self.n = n
        self.q_forms: set[str] = set()

    # helpers
    def at(self, lit: str) -> bool:
        return self.s.startswith(lit, self.i)

    def eat(self, lit: str):
        if not self.at(lit):
            raise SyntaxError(f"expected {lit!r} at {self.i}: {self.s[self.i:self.i + 40]!r}")
        self.i += len(lit)

    def group(self) -> str:
        """Body of a {...} group or a single character."""
        if self.at("{"):
            depth, j = 0, self.i
            while True:
                ch = self.s[j]
                depth += ch == "{"
                depth -= ch == "}"
                j += 1
                if depth == 0:
                    break
            body = self.s[self.i + 1:j - 1]
            self.i = j
            return body
        ch = self.s[self.i]
        self.i += 1
        return ch

    def power(self) -> str:
        if self.at("^"):
            self.i += 1
            return self.group()
        return ""

    # grammar
    def expr(self) -> str:
        parts = []
        first = True
        while self.i < len(self.s) and not self.at("}") and not self.at(r"\right") and not self.at(")"):
            if self.at("+") or self.at("-"):
                op = self.s[self.i]
                self.i += 1
            else:
                op = "+" if not first else ""
            item = self.item()
            parts.append(("-" if op == "-" else ("+" if parts else "")) + item)
            first = False
        return "".join(parts)

    def item(self) -> str:
        factors = []
        while self.i < len(self.s) and not (self.at("+") or self.at("-") or self.at("}")
                                            or self.at(r"\right") or self.at(")")):
            factors.append(self.factor())
        return "*".join(factors)

    def factor(self) -> str:
        s = self.s
        if self.at(r"\frac"):
            self.i += 5
            num = Converter(self.group(), self.n)
            numer = num.expr()
            den = Converter(self.group(), self.n)
            denom = den.expr()
            self.q_forms |= num.q_forms | den.q_forms
            return f"({numer})/({denom})"
        if self.at(r"\left("):
            self.i += 6
            inner = self.expr()
            self.eat(r"\right)")
            if self.at("{}"):
                self.i += 2
            p = self.power()
            body = inner
            if self._is_quadric(inner):
                self.q_forms.add(inner)
                base = "Q"
            else:
                base = f"({body})"
            return base + (f"^{p}" if p else "")
        if self.at(r"\xi"):
            self.i += 3
            self.eat("_")
            j = self.group()
            p = self.power()
            return f"xi{j}" + (f"^{p}" if p else "")
        if self.at("Q_"):
            self.i += 1
            self.eat("_")
            self.group()
            p = self.power()
            return "Q" + (f"^{p}" if p else "")
        for f in FUNCS:
            if self.at("\\" + f):
                self.i += len(f) + 1
                p = self.power()
                self.eat("(")
                arg = self.expr()
                self.eat(")")
                arg = re.sub(r"^(\d+)eta$", r"\1*eta", arg)
                return f"{f}({arg})" + (f"^{p}" if p else "")
        for lit, name in SIMPLE.items():
            if self.at(lit):
                self.i += len(lit)
                p = self.power()
                return name + (f"^{p}" if p else "")
        m = re.compile(r"a('*)\(t\)").match(s, self.i)
        if m:
            self.i = m.end()
            k = len(m.group(1))
            p = self.power()
            return ("a" if k == 0 else f"a{k}") + (f"^{p}" if p else "")
        m = re.compile(r"a\^\{\((\d)\)\}\(t\)").match(s, self.i)
        if m:
            self.i = m.end()
            p = self.power()
            return f"a{m.group(1)}" + (f"^{p}" if p else "")
        m = re.compile(r"\d+").match(s, self.i)
        if m:
            self.i = m.end()
            return m.group()
        if self.at("("):
            self.i += 1
            inner = self.expr()
            self.eat(")")
            p = self.power()
            return f"({inner})" + (f"^{p}" if p else "")
        raise SyntaxError(f"cannot parse at {self.i}: {s[self.i:self.i + 60]!r}")

    def _is_quadric(self, inner: str) -> bool:
        want = {"xi1^2", "(xi2^2)/(a^2)", "(csc(eta)^2*xi3^2)/(a^2)", "(sec(eta)^2*xi4^2)/(a^2)"}
        want |= {f"xi{j}^2" for j in range(5, 2 * self.n + 3)}
        return set(inner.split("+")) == want


def convert(text: str, n: int) -> str:
    c = Converter(text, n)
    out = c.expr()
    if c.i != len(c.s):
        raise SyntaxError(f"trailing input at {c.i}: {c.s[c.i:c.i + 60]!r}")
    # one term per line
    return re.sub(r"(?<=.)([+-])(?=\()", r"\n\1", out)


def main(argv):
    src, start, end, n = argv[1], int(argv[2]), int(argv[3]), int(argv[4])
    lines = open(src, encoding="utf-8").read().splitlines()[start - 1:end]
    print(f"# n = {n}")
    print(convert("\n".join(lines), n))


if __name__ == "__main__":
    main(sys.argv)
