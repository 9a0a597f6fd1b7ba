"""Command-line front end: ``starmorita <command> --workspace FILE ... [options]``.

Exit codes: 0 pass, 1 fail, 2 unknown (a search ran out of budget), 64
usage or parse error, 65 reference error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import yaml

from . import deformation as dfm
from . import morita
from .algebra import (AlgebraElement, AlgebraPresentation, Functional, check_star_algebra, format_element,
                      is_positive_functional, membership_aplus, membership_app, UnsupportedAlgebra)
from .gns import NotPositive, gns_construct
from .modules import (ModuleElement, ModuleOperator, NO, UNKNOWN, YES, InnerProductModule, Representation,
                      SearchResult, are_unitarily_equivalent, check_representation, direct_sum,
                      trivial_representation)
from .report import FAIL, PASS, Report
from .ring import Scalar, format_scalar
from .tensor import internal_tensor
from .workspace import Emitter, ModuleEntry, SpecParseError, SpecReferenceError, WorkspaceError, load

BUDGET_ENV = "STARMORITA_BUDGET"
DEFAULT_BUDGET = 64
EXIT_USAGE, EXIT_REFERENCE = 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Outcome:
    command: str
    report: Report
    data: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return self.report.exit_code


# -- serialisation -------------------------------------------------------------------------------

def plain(x):
    """JSON-ready form of witnesses and data."""
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, Scalar):
        return format_scalar(x)
    if isinstance(x, AlgebraElement):
        return format_element(x)
    if isinstance(x, Functional):
        return {lab: format_scalar(v) for lab, v in zip(x.algebra.labels, x.values) if v}
    if isinstance(x, dfm.PolyFunctional):
        return {",".join(map(str, e)): format_scalar(v) for e, v in sorted(x.values.items())}
    if isinstance(x, ModuleElement):
        return [format_element(c) for c in x.coords]
    if isinstance(x, dfm.PolyObservable):
        return str(x)
    if isinstance(x, ModuleOperator):
        return [[format_element(c) for c in row] for row in x.matrix]
    if isinstance(x, SearchResult):
        return {"verdict": x.verdict, "reason": x.reason, "witness": plain(x.witness)}
    if isinstance(x, Report):
        return [{"name": c.name, "verdict": c.verdict, "witness": plain(c.witness)} for c in x.checks]
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if hasattr(x, "witness") and hasattr(x, "positive"):
        return {"positive": x.positive, "witness": plain(x.witness)}
    return repr(x)


class _Dumper(yaml.SafeDumper):
    pass


def _str_presenter(dumper, text):
    style = "|" if "\n" in text else None
    return dumper.represent_scalar("tag:yaml.org,2002:str", text, style=style)


_Dumper.add_representer(str, _str_presenter)


def render(out: Outcome, as_json: bool) -> str:
    doc = {
        "command": out.command,
        "checks": plain(out.report),
        "data": plain(out.data),
        "verdict": {0: PASS, 1: FAIL, 2: "unknown"}[out.exit_code],
        "exit_code": out.exit_code,
    }
    if as_json:
        return json.dumps(doc, sort_keys=True, indent=2)
    lines = [f"command: {out.command}"]
    for c in doc["checks"]:
        w = "" if c["witness"] is None else f"  witness: {json.dumps(c['witness'], sort_keys=True)}"
        lines.append(f"{c['name']}: {c['verdict']}{w}")
    if doc["data"]:
        lines.append(yaml.dump({"data": doc["data"]}, Dumper=_Dumper, sort_keys=True, width=100).rstrip())
    lines.append(f"verdict: {doc['verdict']}")
    return "\n".join(lines)


# -- commands ---------------------------------------------------------------------------------------

def _module_entry(ws, name) -> ModuleEntry:
    return ws.get(name, "module")


def _element_arg(alg: AlgebraPresentation, text: str) -> AlgebraElement:
    from .algebra import parse_element
    try:
        return parse_element(alg, text)
    except (SyntaxError, ValueError) as e:
        raise SpecParseError(f"bad element literal {text!r}: {e}") from None


def cmd_check_positivity(ws, args) -> Outcome:
    alg = ws.get(args.algebra, "algebra")
    rep = Report("positivity")
    data = {}
    if args.functional:
        om = ws.get(args.functional, "functional")
        v = is_positive_functional(om)
        rep.add("positive_functional", v.positive, v.witness)
        return Outcome("check-positivity", rep, data)
    if not args.element:
        raise UsageError("check-positivity needs --element or --functional")
    x = _element_arg(alg, args.element)
    rep.add("hermitian", x.is_hermitian(), None if x.is_hermitian() else format_element(x.star()))
    if alg.exact_class:
        v = membership_aplus(x)
        rep.add("aplus", v.member, v.witness)
    cert = membership_app(x, args.budget)
    data["certificate"] = cert.kind
    if cert.member is True:
        data["sos"] = [[format_scalar(a), format_element(b)] for a, b in cert.witnesses]
    rep.add("algebraic_positive", cert.member, None if cert.member else plain(cert.witnesses) or None)
    return Outcome("check-positivity", rep, data)


def cmd_gns(ws, args) -> Outcome:
    alg = ws.get(args.algebra, "algebra")
    om = ws.get(args.functional, "functional")
    rep = Report("gns")
    if om.algebra != alg:
        raise SpecReferenceError(f"functional {args.functional!r} is not on {args.algebra!r}")
    try:
        g = gns_construct(om)
    except NotPositive as e:
        rep.add("positive", False, str(e))
        return Outcome("gns", rep)
    rep.add("positive", True)
    rep.extend(check_representation(g.representation), "representation_")
    bad = None
    for a in range(alg.dim):
        v = g.representation.basis_operator(a)(g.cyclic_vector)
        from .modules import inner_product
        if inner_product(g.cyclic_vector, v).coords[0] != om.values[a]:
            bad = alg.labels[a]
            break
    rep.add("cyclic_state", bad is None, bad)
    em = Emitter(ws)
    em.module("gns", g.representation.module, g.representation)
    data = {
        "dimension": g.dim,
        "ideal_basis": [format_element(x) for x in g.ideal_basis],
        "cyclic_vector": plain(g.cyclic_vector),
        "module": em.text(),
    }
    return Outcome("gns", rep, data)


def cmd_tensor(ws, args) -> Outcome:
    F, E = _module_entry(ws, args.left), _module_entry(ws, args.right)
    if E.representation is None:
        raise SpecReferenceError(f"module {args.right!r} has no representation to balance over")
    Frep = F.representation or trivial_representation(F.module)
    rep = Report("tensor")
    if Frep.module.over != E.representation.algebra:
        rep.add("middle_algebra", False, f"{F.module.over.name} vs {E.representation.algebra.name}")
        return Outcome("tensor", rep)
    t = internal_tensor(Frep, E.representation)
    rep.extend(check_representation(t.representation), "representation_")
    from .tensor import positivity_of_tensor
    try:
        pos = positivity_of_tensor(t)
        rep.add("completely_positive", pos.positive, pos.witness)
    except Exception as e:
        rep.add("completely_positive", None, str(e))
    em = Emitter(ws)
    em.module(f"{args.left}_x_{args.right}", t.result, t.representation if F.representation else None)
    kE = E.module.rank
    qmap = {f"{i},{j}": [format_element(c) for c in col]
            for p, col in enumerate(zip(*t.quotient_map.matrix)) for i, j in [divmod(p, kE)]}
    data = {"rank": t.result.rank, "kept_pairs": [list(divmod(p, kE)) for p in t.kept],
            "quotient_map": qmap, "module": em.text()}
    return Outcome("tensor", rep, data)


def _bimodule(ws, name) -> morita.Bimodule:
    return ws.get(name, "bimodule")


def cmd_verify_equivalence(ws, args) -> Outcome:
    E = _bimodule(ws, args.bimodule)
    rep = morita.check_equivalence_bimodule(E, args.level)
    data = {"left": E.left_algebra.name, "right": E.right_algebra.name, "level": args.level,
            "quotient_dim": E.module.quotient.dim}
    return Outcome("verify-equivalence", rep, data)


def _arrow(ws, name, level) -> tuple:
    E = _bimodule(ws, name)
    r = morita.check_equivalence_bimodule(E, level)
    return morita.PicardArrow(E, level, r), r


def cmd_compose(ws, args) -> Outcome:
    F, rf = _arrow(ws, args.left, args.level)
    E, re_ = _arrow(ws, args.right, args.level)
    rep = Report("compose")
    rep.extend(rf, "left_")
    rep.extend(re_, "right_")
    if rep.exit_code != 0:
        return Outcome("compose", rep)
    try:
        C = morita.compose(F, E, verify=False)
    except morita.MiddleMismatch as e:
        rep.add("middle_algebra", False, str(e))
        return Outcome("compose", rep)
    rep.extend(morita.check_equivalence_bimodule(C.bimodule, args.level), "result_")
    em = Emitter(ws)
    em.module("composite", C.bimodule.module, C.bimodule.rep)
    data = {"left": C.target.name, "right": C.source.name, "rank": C.bimodule.module.rank,
            "quotient_dim": C.bimodule.module.quotient.dim, "module": em.text()}
    return Outcome("compose", rep, data)


def cmd_picard(ws, args) -> Outcome:
    alg = ws.get(args.algebra, "algebra")
    rep = Report("picard")
    try:
        G = morita.picard_group(alg, budget=args.budget)
    except ValueError as e:
        raise UsageError(str(e)) from None
    for i, j, r in G.certificates:
        rep.add(f"distinct_{i}_{j}", {NO: True, YES: False}.get(r.verdict), r.reason)
    for k, a in enumerate(G.arrows):
        rep.add(f"arrow_{k}_certified", a.certified.ok)
    data = {"order": G.order, "automorphisms": [a.name for a in G.automorphisms]}
    return Outcome("picard", rep, data)


def cmd_k0_action(ws, args) -> Outcome:
    H = _module_entry(ws, args.module).module
    E, r = _arrow(ws, args.bimodule, morita.STRONG)
    rep = Report("k0-action")
    rep.extend(r, "arrow_")
    try:
        kind = morita.check_projective(H)
        rep.add("projective", True, kind)
    except morita.NotProjective as e:
        rep.add("projective", False, str(e))
        return Outcome("k0-action", rep)
    try:
        out = morita.k0h_action(morita.K0Class(H.over, [(H, args.multiplicity)]), E)
    except morita.MiddleMismatch as e:
        rep.add("algebras_match", False, str(e))
        return Outcome("k0-action", rep)
    data = {"algebra": out.algebra.name,
            "summands": [{"rank": m.rank, "gram": [[format_element(x) for x in row] for row in m.gram],
                          "multiplicity": k} for m, k in out.terms]}
    return Outcome("k0-action", rep, data)


def cmd_rep_transfer(ws, args) -> Outcome:
    H = _module_entry(ws, args.module)
    if H.representation is None:
        raise SpecReferenceError(f"module {args.module!r} carries no representation")
    E, r = _arrow(ws, args.bimodule, morita.STRONG)
    rep = Report("rep-transfer")
    rep.extend(r, "arrow_")
    rho = H.representation
    ok = morita.is_nondegenerate_representation(rho)
    rep.add("nondegenerate", ok)
    if not ok or r.exit_code != 0:
        return Outcome("rep-transfer", rep)
    try:
        t = morita.rep_transfer(E, rho)
    except morita.MiddleMismatch as e:
        rep.add("algebras_match", False, str(e))
        return Outcome("rep-transfer", rep)
    rep.extend(check_representation(t.representation), "result_")
    back = morita.rep_transfer(morita.inverse(E, verify=False), t.representation)
    rt = are_unitarily_equivalent(back.representation, rho, args.budget)
    rep.add("round_trip", {YES: True, NO: False}.get(rt.verdict), rt.reason)
    em = Emitter(ws)
    em.module("transferred", t.result, t.representation)
    data = {"dimension": t.result.quotient.dim, "rank": t.result.rank, "module": em.text()}
    return Outcome("rep-transfer", rep, data)


def cmd_star_product(ws, args) -> Outcome:
    s = ws.get(args.star, "star_product") if args.star else dfm.moyal_star(args.vars, args.order)
    rep = dfm.check_star_axioms(s, args.check)
    data = {"vars": s.n, "order": s.order, "name": s.name}
    if args.left is not None and args.right is not None:
        try:
            f, g = dfm.parse_observable(args.left, s.n), dfm.parse_observable(args.right, s.n)
        except (SyntaxError, ValueError) as e:
            raise SpecParseError(str(e)) from None
        data["product"] = str(s(f, g))
    return Outcome("star-product", rep, data)


def cmd_deform_functional(ws, args) -> Outcome:
    om = ws.get(args.functional, "functional")
    if not isinstance(om, dfm.PolyFunctional):
        raise SpecReferenceError(f"{args.functional!r} is not a functional on polynomials")
    s = ws.get(args.star, "star_product") if args.star else dfm.moyal_star(om.n, args.order)
    rep = Report("deform-functional")
    try:
        res = dfm.deform_functional(om, s, args.order, args.test_degree, args.budget)
    except dfm.NotClassicallyPositive as e:
        rep.add("classically_positive", False, str(e))
        return Outcome("deform-functional", rep)
    rep.add("classically_positive", True)
    rep.add("lift_found", True if res.found else None, None if res.found else f"budget {res.budget} exhausted")
    data = {"tried": res.tried, "corrections": res.corrections}
    if res.found:
        v = dfm.formal_positive(res.functional, s, args.test_degree, args.order)
        rep.add("reverified", v.positive, v.witness)
        data["lift"] = plain(res.functional)
    return Outcome("deform-functional", rep, data)


def cmd_classical_limit(ws, args) -> Outcome:
    rep = Report("classical-limit")
    data = {}
    if args.bimodule:
        E = _bimodule(ws, args.bimodule)
        cl = dfm.classical_limit(E)
        r = morita.check_equivalence_bimodule(cl, args.level)
        rep.extend(r)
        em = Emitter(ws)
        em.module("limit", cl.module, cl.rep)
        data = {"left": cl.left_algebra.name, "right": cl.right_algebra.name, "module": em.text()}
    elif args.algebra:
        cl = dfm.classical_limit(ws.get(args.algebra, "algebra"))
        rep.extend(check_star_algebra(cl))
        from .workspace import algebra_block
        data = {"algebra": yaml.safe_dump({"algebra limit": algebra_block(cl)}, sort_keys=True)}
    elif args.star:
        s = ws.get(args.star, "star_product")
        cl = dfm.classical_limit(s)
        rep.extend(dfm.check_star_axioms(cl, args.check))
        data = {"order": cl.order, "name": cl.name}
    elif args.functional:
        f = ws.get(args.functional, "functional")
        cl = dfm.classical_limit(f)
        rep.add("computed", True)
        data = {"functional": plain(cl)}
    else:
        raise UsageError("classical-limit needs one of --bimodule, --algebra, --star-product, --functional")
    return Outcome("classical-limit", rep, data)


COMMANDS = {
    "check-positivity": cmd_check_positivity,
    "gns": cmd_gns,
    "tensor": cmd_tensor,
    "verify-equivalence": cmd_verify_equivalence,
    "compose": cmd_compose,
    "picard": cmd_picard,
    "k0-action": cmd_k0_action,
    "rep-transfer": cmd_rep_transfer,
    "star-product": cmd_star_product,
    "deform-functional": cmd_deform_functional,
    "classical-limit": cmd_classical_limit,
}


def _default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--workspace", action="append", default=[], metavar="FILE",
                        help="spec file to load (repeatable)")
    common.add_argument("--budget", type=int, default=None, help=f"search budget (default ${BUDGET_ENV} or 64)")
    common.add_argument("--json", action="store_true", help="emit the report as JSON")
    p = _Parser(prog="starmorita", description="Exact checks for star-algebras, Hilbert modules and Morita theory.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    levels = [morita.STRONG, morita.STAR, morita.RING]

    c = sub.add_parser("check-positivity", parents=[common], help="positivity of an element or functional")
    c.add_argument("--algebra", required=True)
    c.add_argument("--element")
    c.add_argument("--functional")
    c = sub.add_parser("gns", parents=[common], help="GNS representation of a positive functional")
    c.add_argument("--algebra", required=True)
    c.add_argument("--functional", required=True)
    c = sub.add_parser("tensor", parents=[common], help="internal tensor product of two modules")
    c.add_argument("--left", required=True)
    c.add_argument("--right", required=True)
    c = sub.add_parser("verify-equivalence", parents=[common], help="check an equivalence bimodule")
    c.add_argument("--bimodule", required=True)
    c.add_argument("--level", choices=levels, default=morita.STRONG)
    c = sub.add_parser("compose", parents=[common], help="compose two Picard arrows")
    c.add_argument("--left", required=True)
    c.add_argument("--right", required=True)
    c.add_argument("--level", choices=levels, default=morita.STRONG)
    c = sub.add_parser("picard", parents=[common], help="enumerate the strong Picard group")
    c.add_argument("--algebra", required=True)
    c = sub.add_parser("k0-action", parents=[common], help="push a projective module through an arrow")
    c.add_argument("--module", required=True)
    c.add_argument("--bimodule", required=True)
    c.add_argument("--multiplicity", type=int, default=1)
    c = sub.add_parser("rep-transfer", parents=[common], help="transfer a representation along an arrow")
    c.add_argument("--bimodule", required=True)
    c.add_argument("--module", required=True)
    c = sub.add_parser("star-product", parents=[common], help="check the axioms of a star product")
    c.add_argument("--vars", type=int, default=1)
    c.add_argument("--order", type=int, default=2)
    c.add_argument("--check", type=int, default=3, metavar="DEGREE")
    c.add_argument("--star-product", dest="star")
    c.add_argument("--left")
    c.add_argument("--right")
    c = sub.add_parser("deform-functional", parents=[common], help="lift a classical state to a formal positive one")
    c.add_argument("--functional", required=True)
    c.add_argument("--order", type=int, default=1)
    c.add_argument("--test-degree", type=int, default=2)
    c.add_argument("--star-product", dest="star")
    c = sub.add_parser("classical-limit", parents=[common], help="set l = 0")
    c.add_argument("--bimodule")
    c.add_argument("--algebra")
    c.add_argument("--star-product", dest="star")
    c.add_argument("--functional")
    c.add_argument("--level", choices=levels, default=morita.STRONG)
    c.add_argument("--check", type=int, default=3, metavar="DEGREE")
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.budget is None:
            args.budget = _default_budget()
        ws = load(args.workspace)
        out = COMMANDS[args.command](ws, args)
        out.command = " ".join([args.command] + [a for a in (argv or sys.argv[1:]) if a != args.command])
    except UsageError as e:
        print(str(e), file=stderr)
        return EXIT_USAGE
    except WorkspaceError as e:
        print(f"error: {e}", file=stderr)
        return e.exit_code
    except UnsupportedAlgebra as e:
        print(f"error: {e}", file=stderr)
        return EXIT_USAGE
    print(render(out, args.json), file=stdout)
    return out.exit_code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
