"""Command-line entry point: ``rwsa <command> [options]``.

Exit status: 0 on success, 1 when a pipeline assertion fails, 2 for invalid
arguments, 3 when the resource guard refuses to run.  Failures print a JSON
diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import jsonschema

from . import __version__
from .exact import DerivativeOverflowError, StructuralError
from .gclass import ClassMismatchError, full_class_suite, quadric_class, quadric_complement_class
from .parametrix import HomogeneityError, expand, top_trace
from .residue import (EtaDependenceError, RationalityError, emit_period_form, form_text, heat_coefficient,
                      parity_filter, rational_integrand)
from .serialize import to_json_obj, to_text
from .symbols import symbol_by_name

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3
GUARD_N = 4
# bytes per raw term of the top trace; growth per step in n extrapolated from n=1 (63) to n=2 (1032)
_BYTES_PER_TERM = 600
_TERMS_N2 = 1032
_GROWTH = 16


class ResourceGuard(RuntimeError):
    pass


@lru_cache(maxsize=1)
def _schema() -> dict:
    return json.loads(resources.files("rwsa").joinpath("schemas/rwsa.json").read_text())


def validate_output(obj: dict, kind: str) -> None:
    """Check ``obj`` against the shipped schema for ``kind`` (e.g. "heat")."""
    schema = {"$schema": _schema()["$schema"], "$defs": _schema()["$defs"], "$ref": f"#/$defs/{kind}"}
    jsonschema.validate(obj, schema)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _num(x: float) -> float:
    return float(f"{x:.17g}")


def _guard(n: int, force: bool) -> None:
    if n < 1:
        raise argparse.ArgumentTypeError("n must be >= 1")
    if n >= GUARD_N:
        est = _TERMS_N2 * _GROWTH ** (n - 2) * _BYTES_PER_TERM
        msg = f"n={n}: estimated peak memory {est / 2**30:.1f} GiB for the top trace"
        if not force:
            raise ResourceGuard(msg + "; pass --force to run anyway")
        print(f"warning: {msg}", file=sys.stderr)


def _matrix_json(m) -> list:
    return [[to_json_obj(x) for x in row] for row in m.entries]


def _matrix_text(m) -> str:
    blocks = []
    for i, row in enumerate(m.entries, 1):
        for j, x in enumerate(row, 1):
            if x:
                blocks.append(f"[{i},{j}]\n{to_text(x)}")
    return "\n".join(blocks) if blocks else "0"


def cmd_symbol(a):
    m = symbol_by_name(a.which, a.n)
    obj = {"command": "symbol", "n": a.n, "which": a.which, "order": m.order, "entries": _matrix_json(m)}
    return obj, "symbol", f"{a.which} (order {m.order}), n={a.n}\n{_matrix_text(m)}"


def cmd_parametrix(a):
    top = 2 * a.n
    order = top if a.order is None else a.order
    if not 0 <= order <= top:
        raise argparse.ArgumentTypeError(f"--order must lie in 0..{top}")
    obj = {"command": "parametrix", "n": a.n, "order": -2 - order, "parity": a.parity}
    if a.trace:
        tr = top_trace(a.n) if order == top else expand(a.n).orders[order].trace()
        if a.parity:
            tr = parity_filter(tr)
        obj["trace"] = to_json_obj(tr)
        return obj, "parametrix", to_text(tr)
    if a.parity:
        raise argparse.ArgumentTypeError("--parity applies to --trace output")
    m = expand(a.n).orders[order]
    obj["entries"] = _matrix_json(m)
    return obj, "parametrix", _matrix_text(m)


def cmd_heat(a):
    h = heat_coefficient(a.n)
    return {"command": "heat", "n": a.n, "coefficient": h.to_json_obj()}, "heat", h.to_text()


def cmd_period_form(a):
    d = emit_period_form(a.n)
    obj = {"command": "period-form", **d}
    dom = d["domain"]
    text = "\n".join([
        f"a_{2 * a.n} = {d['constant']['rational']} * pi^{d['constant']['pi_power']} * integral of f * omega",
        f"omega = {form_text(a.n)}",
        f"domain: {dom['equation']}, " + ", ".join(dom["bounds"]),
        "f =",
        to_text(rational_integrand(a.n)),
    ])
    return obj, "period_form", text


def cmd_gclass(a):
    if a.suite:
        rep = full_class_suite(a.n)
        classes = dict(rep.items())
        notes = rep.notes
    else:
        classes = {"quadric": quadric_class(a.n), "projective_complement": quadric_complement_class(a.n)}
        notes = []
    obj = {"command": "gclass", "n": a.n, "suite": a.suite,
           "classes": {k: v.to_json_obj() for k, v in classes.items()}, "notes": notes}
    return obj, "gclass", "\n".join(f"{k}: {v}" for k, v in classes.items())


def cmd_verify(a):
    if a.check == "oracle":
        from .numerics.oracle import oracle_compare, parse_oracle
        with open(a.file) as fh:
            oracle = parse_oracle(fh.read(), a.n)
        n = oracle.n
        engine = top_trace(n)
        if a.expr == "parity":
            engine = parity_filter(engine)
        rep = oracle_compare(engine, oracle, npoints=a.points, tol=a.tol, seed=a.seed)
        obj = {"command": "verify", "check": "oracle", "ok": rep.ok, "n": n, "points": rep.npoints,
               "max_rel_dev": _num(rep.max_rel_dev), "tol": a.tol}
        text = f"oracle: {'ok' if rep.ok else 'MISMATCH'} max relative deviation {_num(rep.max_rel_dev)!r} " \
               f"over {rep.npoints} points (tol {a.tol})"
        return obj, "verify", text, rep.ok
    if a.check == "period":
        from .numerics.period import period_integrate
        need = 2 * a.n
        aj = list(a.alphaj or [])
        if len(aj) > need:
            raise argparse.ArgumentTypeError(f"--alphaj takes at most {need} values for n={a.n}")
        aj += [Fraction(0)] * (need - len(aj))
        exact = heat_coefficient(a.n).evaluate(a.alpha, aj)
        exact = float(Fraction(int(exact.numerator), int(exact.denominator)))
        est = period_integrate(a.n, float(a.alpha), [float(x) for x in aj], a.method, a.budget,
                               seed=a.seed, threads=a.threads, eta=a.eta)
        diff = abs(est.value - exact)
        ok = diff <= a.tol * abs(exact) if exact else diff <= a.tol
        obj = {"command": "verify", "check": "period", "ok": ok, "n": a.n,
               "alpha": str(a.alpha), "alphaj": [str(x) for x in aj], "exact": _num(exact),
               "estimate": est.to_json_obj(), "abs_dev": _num(diff),
               "rel_dev": _num(diff / abs(exact)) if exact else None, "tol": a.tol}
        text = (f"period ({est.method}, {est.samples} {'samples' if est.method == 'mc' else 'nodes'}): "
                f"{_num(est.value)!r} +- {_num(est.error)!r}; exact {_num(exact)!r}; "
                f"{'ok' if ok else 'MISMATCH'}")
        return obj, "verify", text, ok
    from .numerics.gilkey import gilkey_a2_oracle, gilkey_a4_oracle
    results = {"a2": gilkey_a2_oracle() == heat_coefficient(1)}
    if a.a4:
        results["a4"] = gilkey_a4_oracle() == heat_coefficient(2)
    ok = all(results.values())
    obj = {"command": "verify", "check": "gilkey", "ok": ok, "results": results}
    text = "\n".join(f"gilkey {k}: {'ok' if v else 'MISMATCH'}" for k, v in results.items())
    return obj, "verify", text, ok


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rwsa", description="Exact heat coefficients of the Dirac operator "
                                "on Robertson-Walker spacetimes, with verification tools.")
    p.add_argument("--version", action="version", version=f"rwsa {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for sampling (default 0)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $RWSA_THREADS or 1)")
    common.add_argument("--force", action="store_true", help="allow n >= 4")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("symbol", parents=[common], help="symbol of the Dirac operator or its square")
    s.add_argument("--which", choices=("q1", "q0", "p2", "p1", "p0"), required=True)
    s.add_argument("--n", type=int, default=1)
    s.set_defaults(run=cmd_symbol)

    s = sub.add_parser("parametrix", parents=[common], help="terms of the parametrix")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--order", type=int, default=None, help="j in r_{-2-j} (default 2n)")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--parity", action="store_true", help="drop terms odd in a fibre variable")
    s.set_defaults(run=cmd_parametrix)

    s = sub.add_parser("heat", parents=[common], help="exact heat coefficient a_{2n}")
    s.add_argument("--n", type=int, default=1)
    s.set_defaults(run=cmd_heat)

    s = sub.add_parser("period-form", parents=[common], help="rational form and domain for a_{2n}")
    s.add_argument("--n", type=int, default=1)
    s.set_defaults(run=cmd_period_form)

    s = sub.add_parser("gclass", parents=[common], help="Grothendieck classes of the quadric and its complements")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--suite", action="store_true")
    s.set_defaults(run=cmd_gclass)

    s = sub.add_parser("verify", help="independent checks")
    vs = s.add_subparsers(dest="check", required=True)
    v = vs.add_parser("oracle", parents=[common], help="compare the engine trace with a transcribed expression")
    v.add_argument("--file", required=True)
    v.add_argument("--n", type=int, default=1)
    v.add_argument("--points", type=int, default=20)
    v.add_argument("--tol", type=float, default=1e-10)
    v.add_argument("--expr", choices=("parity", "trace"), default="parity",
                   help="compare against the parity-filtered trace (default) or the full trace")
    v = vs.add_parser("period", parents=[common], help="numerical integration of the period form")
    v.add_argument("--n", type=int, default=1)
    v.add_argument("--alpha", type=_rational, default=Fraction(1))
    v.add_argument("--alphaj", type=_rational, nargs="*")
    v.add_argument("--method", choices=("gauss", "mc"), default="gauss")
    v.add_argument("--budget", type=int, default=None, help="Gauss grid points or Monte Carlo samples")
    v.add_argument("--eta", type=float, default=None, help="integrate the fibre at this eta only")
    v.add_argument("--tol", type=float, default=1e-6, help="relative tolerance (absolute when a_{2n} = 0)")
    v = vs.add_parser("gilkey", parents=[common], help="compare with the curvature formulas")
    v.add_argument("--a4", action="store_true", help="also check a_4 (n=2)")
    v.set_defaults(n=1)
    return p


def _threads(a) -> int:
    if a.threads is not None:
        return a.threads
    env = os.environ.get("RWSA_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise argparse.ArgumentTypeError(f"RWSA_THREADS must be an integer, got {env!r}") from None
    return 1


def _diagnose(kind: str, msg: str, code: int) -> int:
    print(json.dumps({"error": True, "kind": kind, "message": msg}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        a.threads = _threads(a)
        if a.threads < 1:
            raise argparse.ArgumentTypeError("--threads must be >= 1")
        _guard(a.n, a.force)
        if a.command == "verify":
            obj, kind, text, ok = cmd_verify(a)
        else:
            obj, kind, text = a.run(a)
            ok = True
        if a.format == "json":
            validate_output(obj, kind)
            out = json.dumps(obj, indent=1) + "\n"
        else:
            out = text + "\n"
        if a.out:
            with open(a.out, "w") as fh:
                fh.write(out)
        else:
            sys.stdout.write(out)
        if not ok:
            return _diagnose("verification", "verification failed", EXIT_FAIL)
        return EXIT_OK
    except argparse.ArgumentTypeError as e:
        return _diagnose("usage", str(e), EXIT_USAGE)
    except ResourceGuard as e:
        return _diagnose("resource", str(e), EXIT_GUARD)
    except HomogeneityError as e:
        return _diagnose("homogeneity", str(e), EXIT_FAIL)
    except EtaDependenceError as e:
        return _diagnose("eta-dependence", str(e), EXIT_FAIL)
    except RationalityError as e:
        return _diagnose("rationality", str(e), EXIT_FAIL)
    except ClassMismatchError as e:
        return _diagnose("class-mismatch", str(e), EXIT_FAIL)
    except (StructuralError, DerivativeOverflowError) as e:
        return _diagnose("structure", str(e), EXIT_FAIL)
    except (OSError, ValueError) as e:
        return _diagnose(type(e).__name__, str(e), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
