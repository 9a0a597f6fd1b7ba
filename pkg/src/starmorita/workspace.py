"""Spec files: loading named objects and emitting them back.

A spec file is a YAML mapping whose keys are ``"<kind> <name>"`` with kind
one of ``algebra``, ``module``, ``bimodule``, ``functional`` or
``star_product``.  Scalars are literals such as ``"2/3"``, ``"1+2i"`` or
``"(1/2)l^2 - i l^3"``; algebra elements are literals in the basis labels,
e.g. ``"E11 - (1+i)*E12"``.

algebra
    Either ``preset: scalars | matrix | functions`` (with ``n`` or ``points``
    and optional ``lambda: true``), ``matrix_over: <ref>`` with ``n``,
    ``deform: <ref>`` for the nilpotent deformation of a matrix or function
    algebra, or the dense keys ``dim``, ``labels``, ``structure`` (``[a][b]``
    lists of coordinates), ``involution``, ``unit`` and optional ``class``,
    ``blocks``, ``embedding``.
module
    ``over: <ref>`` with ``gram`` (matrix of element literals) or
    ``preset: canonical`` and ``rank``; optional ``representation: {of:
    <ref>, images: {label: matrix}}``.
bimodule
    ``preset: identity | column | twist | signature | deformed_column |
    inverse`` with ``algebra``, ``n``, ``permutation``/``index``, ``signs`` or
    ``of``; optional ``gram`` replaces the right Gram matrix.
functional
    ``algebra: <ref>`` with ``values: {label: literal}`` or ``preset: trace |
    evaluation`` (``point``); with ``vars: n`` it is a functional on
    polynomials, ``values`` keyed by comma-separated exponents, or ``preset:
    gaussian | delta``.
star_product
    ``preset: moyal | pointwise`` with ``vars`` and ``order``; optional
    ``equivalence: [{exponents: literal}, ...]`` applies ``S = id + sum l^r S_r``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from . import deformation as dfm
from . import morita
from .algebra import (AlgebraElement, AlgebraPresentation, Functional, check_star_algebra, evaluation_functional,
                      format_element, full_matrix_algebra, function_algebra, matrix_algebra, parse_element,
                      scalars, trace_functional)
from .modules import InnerProductModule, Representation
from .ring import format_scalar, parse_scalar

KINDS = ("algebra", "module", "bimodule", "functional", "star_product")
PACKAGE_DIR = Path(__file__).resolve().parent


class WorkspaceError(Exception):
    exit_code = 64

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


class SpecParseError(WorkspaceError):
    exit_code = 64


class SpecReferenceError(WorkspaceError):
    exit_code = 65


class SpecAxiomError(WorkspaceError):
    exit_code = 1

    def __init__(self, message: str, where: str = "", report=None):
        super().__init__(message, where)
        self.report = report


@dataclass
class ModuleEntry:
    module: InnerProductModule
    representation: Optional[Representation] = None


@dataclass
class _Block:
    kind: str
    name: str
    data: dict
    where: str


@dataclass
class Workspace:
    """Named registry of loaded objects."""

    objects: dict = field(default_factory=dict)   # name -> (kind, object)
    sources: dict = field(default_factory=dict)   # name -> "file:line"

    def get(self, name: str, kind: Optional[str] = None):
        if name not in self.objects:
            raise SpecReferenceError(f"unknown reference {name!r}")
        k, obj = self.objects[name]
        if kind is not None and k != kind:
            raise SpecReferenceError(f"{name!r} is a {k}, not a {kind}")
        return obj

    def kind(self, name: str) -> str:
        self.get(name)
        return self.objects[name][0]

    def names(self, kind: Optional[str] = None) -> list:
        return sorted(n for n, (k, _) in self.objects.items() if kind is None or k == kind)

    def name_of(self, obj) -> Optional[str]:
        for n in sorted(self.objects):
            k, o = self.objects[n]
            if o is obj:
                return n
        for n in sorted(self.objects):
            k, o = self.objects[n]
            if k == "algebra" and isinstance(obj, AlgebraPresentation) and o == obj:
                return n
        return None


def resolve_path(path: str) -> Path:
    """Paths are taken as given; a missing ``examples/<file>`` falls back to the bundled fixture."""
    p = Path(path)
    if p.exists():
        return p
    bundled = PACKAGE_DIR / "examples" / p.name
    if bundled.exists():
        return bundled
    raise SpecParseError(f"no such file {path!r}")


def _read_blocks(path: Path) -> list:
    text = path.read_text()
    try:
        loader = yaml.SafeLoader(text)
        try:
            node = loader.get_single_node()
            if node is None:
                return []
            if not isinstance(node, yaml.MappingNode):
                raise SpecParseError("top level must be a mapping", f"{path}:1")
            out = []
            for knode, vnode in node.value:
                where = f"{path}:{knode.start_mark.line + 1}"
                key = loader.construct_object(knode, deep=True)
                data = loader.construct_object(vnode, deep=True)
                parts = str(key).split()
                if len(parts) != 2 or parts[0] not in KINDS:
                    raise SpecParseError(f"block key {key!r} must be '<kind> <name>' with kind in {KINDS}",
                                         where)
                if not isinstance(data, dict):
                    raise SpecParseError(f"block {key!r} must be a mapping", where)
                out.append(_Block(parts[0], parts[1], data, where))
            return out
        finally:
            loader.dispose()
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = f":{mark.line + 1}" if mark is not None else ""
        raise SpecParseError(str(e).splitlines()[0], f"{path}{line}") from None


def load(paths, check: bool = True) -> Workspace:
    """Parse every file, then build the objects in dependency order."""
    blocks: dict = {}
    for path in paths:
        p = resolve_path(str(path))
        for b in _read_blocks(p):
            if b.name in blocks:
                raise SpecReferenceError(f"duplicate name {b.name!r} (first defined at {blocks[b.name].where})",
                                         b.where)
            blocks[b.name] = b
    ws = Workspace()
    builder = _Builder(ws, blocks, check)
    for name in blocks:
        builder.build(name)
    return ws


# -- building ------------------------------------------------------------------------------

def _scalar(v, lam: bool, where: str):
    try:
        s = parse_scalar(str(v), lam=lam)
    except (SyntaxError, ValueError) as e:
        raise SpecParseError(f"bad scalar literal {v!r}: {e}", where) from None
    return s


def _element(alg: AlgebraPresentation, v, where: str) -> AlgebraElement:
    try:
        return parse_element(alg, str(v))
    except (SyntaxError, ValueError) as e:
        raise SpecParseError(f"bad element literal {v!r}: {e}", where) from None


def _int(d: dict, key: str, where: str, default=None) -> int:
    if key not in d:
        if default is None:
            raise SpecParseError(f"missing key {key!r}", where)
        return default
    try:
        return int(d[key])
    except (TypeError, ValueError):
        raise SpecParseError(f"{key!r} must be an integer", where) from None


def _exps(key, nvars: int, where: str) -> tuple:
    if isinstance(key, (list, tuple)):
        parts = list(key)
    else:
        parts = [p for p in str(key).replace("(", "").replace(")", "").split(",") if p.strip()]
    try:
        e = tuple(int(p) for p in parts)
    except ValueError:
        raise SpecParseError(f"bad exponent key {key!r}", where) from None
    if len(e) != nvars:
        raise SpecParseError(f"exponent key {key!r} needs {nvars} entries", where)
    return e


class _Builder:
    def __init__(self, ws: Workspace, blocks: dict, check: bool):
        self.ws, self.blocks, self.check = ws, blocks, check
        self.active: list = []

    def ref(self, name, kind: str, where: str):
        name = str(name)
        if name in self.ws.objects:
            k, obj = self.ws.objects[name]
        elif name in self.blocks:
            self.build(name)
            k, obj = self.ws.objects[name]
        else:
            raise SpecReferenceError(f"dangling reference {name!r}", where)
        if k != kind:
            raise SpecReferenceError(f"{name!r} is a {k}, expected a {kind}", where)
        return obj

    def build(self, name: str) -> None:
        if name in self.ws.objects:
            return
        b = self.blocks[name]
        if name in self.active:
            raise SpecReferenceError(f"reference cycle through {' -> '.join(self.active + [name])}", b.where)
        self.active.append(name)
        try:
            obj = getattr(self, f"_{b.kind}")(b)
        finally:
            self.active.pop()
        self.ws.objects[name] = (b.kind, obj)
        self.ws.sources[name] = b.where

    # algebra ------------------------------------------------------------
    def _algebra(self, b: _Block) -> AlgebraPresentation:
        d, w = b.data, b.where
        lam = bool(d.get("lambda", False))
        if "preset" in d:
            kind = d["preset"]
            if kind == "scalars":
                alg = scalars(lam)
            elif kind == "matrix":
                alg = full_matrix_algebra(_int(d, "n", w), lam)
            elif kind == "functions":
                alg = function_algebra(_int(d, "points", w), lam)
            else:
                raise SpecParseError(f"unknown algebra preset {kind!r}", w)
        elif "matrix_over" in d:
            alg = matrix_algebra(self.ref(d["matrix_over"], "algebra", w), _int(d, "n", w))
        elif "deform" in d:
            base = self.ref(d["deform"], "algebra", w)
            try:
                alg = dfm.deform_algebra(base).algebra
            except ValueError as e:
                raise SpecParseError(str(e), w) from None
        else:
            alg = self._dense_algebra(d, w, lam, b.name)
        alg = AlgebraPresentation(alg.labels, alg.structure, alg.involution, alg.unit, alg.kind, alg.blocks,
                                  alg.embedding, alg.lam, b.name)
        if self.check:
            rep = check_star_algebra(alg)
            if not rep.ok:
                bad = rep.failures[0]
                raise SpecAxiomError(f"algebra {b.name!r} fails {bad.name} at {bad.witness}", w, rep)
        return alg

    def _dense_algebra(self, d: dict, w: str, lam: bool, name: str) -> AlgebraPresentation:
        for key in ("dim", "labels", "structure", "involution"):
            if key not in d:
                raise SpecParseError(f"missing key {key!r}", w)
        k = _int(d, "dim", w)
        labels = [str(x) for x in d["labels"]]
        if len(labels) != k:
            raise SpecParseError(f"{len(labels)} labels for dimension {k}", w)
        try:
            st = [[[_scalar(v, lam, w) for v in d["structure"][a][b]] for b in range(k)] for a in range(k)]
            if any(len(st[a][b]) != k for a in range(k) for b in range(k)):
                raise IndexError
            inv = [[_scalar(v, lam, w) for v in d["involution"][a]] for a in range(k)]
            if any(len(r) != k for r in inv):
                raise IndexError
        except (IndexError, TypeError):
            raise SpecParseError("structure must be dim x dim x dim and involution dim x dim", w) from None
        unit = None if d.get("unit") is None else [_scalar(v, lam, w) for v in d["unit"]]
        cls = d.get("class", "generic")
        if cls not in ("matrix", "functions", "generic"):
            raise SpecParseError(f"unknown class {cls!r}", w)
        blocks = d.get("blocks")
        emb = d.get("embedding")
        if emb is not None:
            emb = [[(int(e[0]), int(e[1]), int(e[2]), _scalar(e[3], lam, w)) for e in entries] for entries in emb]
        elif cls == "functions":
            blocks, emb = [1] * k, [[(a, 0, 0, 1)] for a in range(k)]
        elif cls == "matrix":
            n = int(round(k ** 0.5))
            emb = []
            for lab in labels:
                if n * n != k or not (lab.startswith("E") and len(lab) == 3 and lab[1:].isdigit()):
                    raise SpecParseError("class matrix needs labels Eij or an explicit embedding", w)
                emb.append([(0, int(lab[1]) - 1, int(lab[2]) - 1, 1)])
            blocks = [n]
        if emb is not None and blocks is None:
            raise SpecParseError("embedding needs blocks", w)
        return AlgebraPresentation.from_dense(labels, st, inv, unit, cls, None if blocks is None else tuple(blocks),
                                              emb, lam, name)

    # module -------------------------------------------------------------
    def _module(self, b: _Block) -> ModuleEntry:
        d, w = b.data, b.where
        if "over" not in d:
            raise SpecParseError("missing key 'over'", w)
        D = self.ref(d["over"], "algebra", w)
        if d.get("preset") == "canonical":
            rank = _int(d, "rank", w, 1)
            gram = [[D.one() if i == j else D.zero() for j in range(rank)] for i in range(rank)]
        elif "gram" in d:
            gram = self._matrix(D, d["gram"], w)
            rank = len(gram)
        else:
            raise SpecParseError("module needs 'gram' or 'preset: canonical'", w)
        m = InnerProductModule(D, gram, b.name)
        rep = None
        if "representation" in d:
            r = d["representation"]
            A = self.ref(r.get("of"), "algebra", w)
            imgs = r.get("images", {})
            images = []
            for lab in A.labels:
                if lab not in imgs:
                    raise SpecParseError(f"representation image for {lab!r} missing", w)
                mat = self._matrix(D, imgs[lab], w)
                if len(mat) != rank:
                    raise SpecParseError(f"image of {lab!r} must be {rank} x {rank}", w)
                images.append(mat)
            rep = Representation(A, m, images, b.name)
        return ModuleEntry(m, rep)

    def _matrix(self, D: AlgebraPresentation, rows, w: str) -> list:
        try:
            mat = [[_element(D, v, w) for v in row] for row in rows]
        except TypeError:
            raise SpecParseError("expected a matrix of element literals", w) from None
        if any(len(r) != len(mat) for r in mat):
            raise SpecParseError("matrix must be square", w)
        return mat

    # bimodule -----------------------------------------------------------
    def _bimodule(self, b: _Block) -> morita.Bimodule:
        d, w = b.data, b.where
        kind = d.get("preset")
        if kind == "identity":
            E = morita.identity_bimodule(self.ref(d.get("algebra"), "algebra", w))
        elif kind == "column":
            E = morita.column_bimodule(self.ref(d.get("algebra"), "algebra", w), _int(d, "n", w))
        elif kind == "twist":
            A = self.ref(d.get("algebra"), "algebra", w)
            perm = [int(x) for x in d.get("permutation", range(len(A.blocks or ())))]
            index = d.get("index")
            if index is None:
                index = [list(range(n)) for n in A.blocks]
            try:
                alpha = morita.block_automorphism(A, perm, [[int(x) for x in r] for r in index])
            except (IndexError, TypeError):
                raise SpecParseError("twist needs a block permutation and index permutations", w) from None
            if not alpha.is_star_automorphism():
                raise SpecAxiomError("twist is not a *-automorphism", w)
            E = morita.twisted_bimodule(A, alpha)
        elif kind == "signature":
            E = morita.signature_bimodule(tuple(int(s) for s in d.get("signs", (1, -1))))
        elif kind == "inverse":
            E = morita.inverse_bimodule(self.ref(d.get("of"), "bimodule", w))
        elif kind == "deformed_column":
            E = dfm.deformed_column_bimodule(_int(d, "n", w, 2))
        else:
            raise SpecParseError(f"unknown bimodule preset {kind!r}", w)
        if "gram" in d:
            m = InnerProductModule(E.right_algebra, self._matrix(E.right_algebra, d["gram"], w), b.name)
            if m.rank != E.module.rank:
                raise SpecParseError(f"gram must be {E.module.rank} x {E.module.rank}", w)
            E = morita.Bimodule(E.left_algebra, E.right_algebra, Representation(E.left_algebra, m, E.rep.images),
                                E.left_ip, b.name)
        E.name = b.name
        return E

    # functional ---------------------------------------------------------
    def _functional(self, b: _Block):
        d, w = b.data, b.where
        if "vars" in d:
            n = _int(d, "vars", w)
            kind = d.get("preset")
            if kind == "gaussian":
                return dfm.gaussian_moments(n, _int(d, "degree", w, 8))
            if kind == "delta":
                return dfm.point_evaluation(n)
            vals = {}
            for key, v in (d.get("values") or {}).items():
                vals[_exps(key, 2 * n, w)] = _scalar(v, True, w)
            return dfm.PolyFunctional(n, vals, b.name)
        A = self.ref(d.get("algebra"), "algebra", w)
        kind = d.get("preset")
        try:
            if kind == "trace":
                return trace_functional(A)
            if kind == "evaluation":
                return evaluation_functional(A, _int(d, "point", w, 0))
        except Exception as e:
            raise SpecParseError(f"preset {kind!r} not available on {A.name}: {e}", w) from None
        if kind is not None:
            raise SpecParseError(f"unknown functional preset {kind!r}", w)
        vals = d.get("values") or {}
        bad = [k for k in vals if str(k) not in A.labels]
        if bad:
            raise SpecParseError(f"unknown basis labels {bad}", w)
        return Functional(A, [_scalar(vals.get(lab, 0), A.lam, w) for lab in A.labels])

    # star product -------------------------------------------------------
    def _star_product(self, b: _Block):
        d, w = b.data, b.where
        n = _int(d, "vars", w, 1)
        kind = d.get("preset", "moyal")
        if kind == "pointwise":
            return dfm.pointwise_product(n)
        if kind != "moyal":
            raise SpecParseError(f"unknown star product preset {kind!r}", w)
        N = _int(d, "order", w)
        s = dfm.moyal_star(n, N)
        if "equivalence" in d:
            stages = list(d["equivalence"])
            if len(stages) != N:
                raise SpecParseError(f"equivalence needs {N} stages", w)
            st = tuple({_exps(k, 2 * n, w): _scalar(v, False, w) for k, v in (stage or {}).items()}
                       for stage in stages)
            try:
                s = dfm.apply_equivalence(dfm.EquivalenceOperator(n, N, st), s)
            except ValueError as e:
                raise SpecParseError(str(e), w) from None
        return s


# -- emitting ------------------------------------------------------------------------------

def _lit(s) -> str:
    return format_scalar(s)


def algebra_block(alg: AlgebraPresentation) -> dict:
    k = alg.dim
    z = alg.zero_scalar
    st = []
    for a in range(k):
        row = []
        for b in range(k):
            v = [z] * k
            for c, s in alg.structure[a][b]:
                v[c] = s
            row.append([_lit(x) for x in v])
        st.append(row)
    inv = [[_lit(x) for x in alg.star_basis[a].coords] for a in range(k)]
    out = {"dim": k, "labels": list(alg.labels), "structure": st, "involution": inv, "class": alg.kind}
    if alg.lam:
        out["lambda"] = True
    if alg.unit is not None:
        out["unit"] = [_lit(x) for x in alg.unit]
    if alg.embedding is not None:
        out["blocks"] = list(alg.blocks)
        out["embedding"] = [[[bk, r, c, _lit(v)] for bk, r, c, v in e] for e in alg.embedding]
    return out


def _mat_literals(mat) -> list:
    return [[format_element(x) for x in row] for row in mat]


class Emitter:
    """Collects blocks into a standalone document.

    Referenced algebras are emitted in dense form, under their workspace name
    when they have one and under a fresh name otherwise.
    """

    def __init__(self, ws: Optional[Workspace] = None):
        self.ws = ws or Workspace()
        self.blocks: dict = {}
        self._names: list = []   # (algebra, name)

    def algebra(self, alg: AlgebraPresentation) -> str:
        for a, n in self._names:
            if a == alg:
                return n
        name = self.ws.name_of(alg)
        if name is not None:
            self._names.append((alg, name))
            self.blocks[f"algebra {name}"] = algebra_block(alg)
            return name
        base = "".join(ch if ch.isalnum() else "_" for ch in (alg.name or "algebra")).strip("_") or "algebra"
        name, k = base, 1
        taken = set(self.ws.objects) | {n for _, n in self._names}
        while name in taken:
            k += 1
            name = f"{base}_{k}"
        self._names.append((alg, name))
        self.blocks[f"algebra {name}"] = algebra_block(alg)
        return name

    def module(self, name: str, m: InnerProductModule, rep: Optional[Representation] = None) -> str:
        block = {"over": self.algebra(m.over), "gram": _mat_literals(m.gram)}
        if rep is not None:
            block["representation"] = {
                "of": self.algebra(rep.algebra),
                "images": {lab: _mat_literals(img) for lab, img in zip(rep.algebra.labels, rep.images)},
            }
        self.blocks[f"module {name}"] = block
        return name

    def functional(self, name: str, f) -> str:
        if isinstance(f, dfm.PolyFunctional):
            vals = {",".join(str(x) for x in e): _lit(v) for e, v in sorted(f.values.items())}
            self.blocks[f"functional {name}"] = {"vars": f.n, "values": vals}
        else:
            alg = f.algebra
            self.blocks[f"functional {name}"] = {
                "algebra": self.algebra(alg),
                "values": {lab: _lit(v) for lab, v in zip(alg.labels, f.values) if v},
            }
        return name

    def text(self) -> str:
        return yaml.safe_dump(self.blocks, sort_keys=True, default_flow_style=None, width=100)


def emit(objects: dict, ws: Optional[Workspace] = None) -> str:
    """Spec-file text for ``{name: object}``; modules may be given as ``(module, representation)``."""
    em = Emitter(ws)
    for name in sorted(objects):
        obj = objects[name]
        if isinstance(obj, AlgebraPresentation):
            em.blocks[f"algebra {name}"] = algebra_block(obj)
            em._names.append((obj, name))
        elif isinstance(obj, InnerProductModule):
            em.module(name, obj)
        elif isinstance(obj, ModuleEntry):
            em.module(name, obj.module, obj.representation)
        elif isinstance(obj, tuple) and len(obj) == 2 and isinstance(obj[0], InnerProductModule):
            em.module(name, obj[0], obj[1])
        elif isinstance(obj, (Functional, dfm.PolyFunctional)):
            em.functional(name, obj)
        else:
            raise TypeError(f"cannot emit {type(obj).__name__}")
    return em.text()


def loads(text: str, name: str = "<string>", check: bool = True) -> Workspace:
    """Load spec text (used in round-trip tests)."""
    import tempfile
    with tempfile.NamedTemporaryFile("w", suffix=".yaml", delete=False) as fh:
        fh.write(text)
        tmp = fh.name
    try:
        return load([tmp], check)
    finally:
        os.unlink(tmp)
