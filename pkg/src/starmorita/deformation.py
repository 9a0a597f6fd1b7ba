"""Truncated formal deformations.

Observables are polynomials in ``x_1..x_n, p_1..p_n`` with coefficients in
``Q(i)[l]``.  A star product of order ``N`` is stored as constant-coefficient
bidifferential cochains ``C_1..C_N``; each cochain is a dict
``(alpha, beta) -> c`` meaning ``c * d^alpha f * d^beta g``.  Such operators
compose like polynomials in two sets of symbol variables, which is how
equivalence transformations are pushed through a product.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

from . import linalg
from .algebra import (AlgebraElement, AlgebraPresentation, Functional, function_algebra, full_matrix_algebra)
from .modules import InnerProductModule, ModuleElement, Representation
from .ring import ExprParser, LAMBDA, Scalar, Sign

Exps = Tuple[int, ...]
ONE_L = Scalar.one(True)
ZERO_L = Scalar.zero(True)


def _lam(v) -> Scalar:
    if isinstance(v, Scalar):
        return v if v.lam else v.lift()
    return Scalar(v, 0, True)


# -- polynomials ---------------------------------------------------------------------

def monomials(nvars: int, max_degree: int) -> list:
    """Exponent tuples of total degree ``<= max_degree``, graded then lexicographic."""
    out = []
    for d in range(max_degree + 1):
        for c in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for k in c:
                e[k] += 1
            out.append(tuple(e))
    out = sorted(set(out), key=lambda e: (sum(e), tuple(-x for x in e)))
    return out


def _falling(m: int, k: int) -> int:
    r = 1
    for t in range(k):
        r *= m - t
    return r


def _derive_monomial(e: Exps, a: Exps):
    """``d^a x^e = c x^(e-a)``; returns ``(c, e - a)`` or ``None``."""
    c = 1
    out = []
    for ek, ak in zip(e, a):
        if ak > ek:
            return None
        c *= _falling(ek, ak)
        out.append(ek - ak)
    return c, tuple(out)


def _add_into(acc: dict, key, v: Scalar) -> None:
    w = acc.get(key)
    w = v if w is None else w + v
    if w:
        acc[key] = w
    else:
        acc.pop(key, None)


def _emul(a: Exps, b: Exps) -> Exps:
    return tuple(x + y for x, y in zip(a, b))


class PolyObservable:
    """Polynomial observable with ``Q(i)[l]`` coefficients, keyed by exponent tuples ``(x..., p...)``."""

    __slots__ = ("n", "terms", "bound")

    def __init__(self, n: int, terms: Optional[dict] = None, bound: Optional[int] = None):
        self.n = n
        self.terms = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != 2 * n:
                raise ValueError(f"exponent {e} does not have {2 * n} entries")
            c = _lam(c)
            if c:
                self.terms[e] = c
        self.bound = bound
        if bound is not None and self.degree > bound:
            raise ValueError(f"degree {self.degree} exceeds the bound {bound}")

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "PolyObservable":
        f = object.__new__(cls)
        f.n, f.terms, f.bound = n, terms, None
        return f

    # constructors
    @classmethod
    def constant(cls, n: int, c=1) -> "PolyObservable":
        return cls(n, {(0,) * (2 * n): c})

    @classmethod
    def monomial(cls, n: int, e: Exps, c=1) -> "PolyObservable":
        return cls(n, {tuple(e): c})

    @classmethod
    def variable(cls, n: int, name: str) -> "PolyObservable":
        names = variable_names(n)
        if name not in names:
            raise KeyError(f"unknown variable {name!r}; expected one of {names}")
        e = [0] * (2 * n)
        e[names.index(name)] = 1
        return cls(n, {tuple(e): 1})

    # structure
    @property
    def nvars(self) -> int:
        return 2 * self.n

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def coefficient(self, e: Exps) -> Scalar:
        return self.terms.get(tuple(e), ZERO_L)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other: "PolyObservable") -> None:
        if other.n != self.n:
            raise ValueError("observables live on different phase spaces")

    def _coerce(self, other) -> "PolyObservable":
        if isinstance(other, PolyObservable):
            self._check(other)
            return other
        return PolyObservable.constant(self.n, other)

    def __add__(self, other):
        o = self._coerce(other)
        acc = dict(self.terms)
        for e, c in o.terms.items():
            _add_into(acc, e, c)
        return PolyObservable._raw(self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return PolyObservable._raw(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "PolyObservable":
        c = _lam(c)
        if not c:
            return PolyObservable._raw(self.n, {})
        return PolyObservable._raw(self.n, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        """Pointwise product."""
        if not isinstance(other, PolyObservable):
            return self.scale(other)
        self._check(other)
        acc: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                _add_into(acc, _emul(e1, e2), c1 * c2)
        return PolyObservable._raw(self.n, acc)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        r = PolyObservable.constant(self.n)
        for _ in range(k):
            r = r * self
        return r

    def conj(self) -> "PolyObservable":
        """Complex conjugate; the phase-space variables are real."""
        return PolyObservable._raw(self.n, {e: c.conj() for e, c in self.terms.items()})

    def derivative(self, a: Exps) -> "PolyObservable":
        acc: dict = {}
        for e, c in self.terms.items():
            d = _derive_monomial(e, a)
            if d is not None and d[0]:
                _add_into(acc, d[1], c * d[0])
        return PolyObservable._raw(self.n, acc)

    def partial(self, k: int) -> "PolyObservable":
        a = [0] * self.nvars
        a[k] = 1
        return self.derivative(tuple(a))

    def truncate(self, order: int) -> "PolyObservable":
        """Drop powers of ``l`` above ``order``."""
        acc = {}
        for e, c in self.terms.items():
            t = c.truncate(order)
            if t:
                acc[e] = t
        return PolyObservable._raw(self.n, acc)

    def lambda_coefficient(self, k: int) -> "PolyObservable":
        acc = {}
        for e, c in self.terms.items():
            t = c.coefficient(k)
            if t:
                acc[e] = t.lift()
        return PolyObservable._raw(self.n, acc)

    def at_zero(self) -> "PolyObservable":
        return self.lambda_coefficient(0)

    def __eq__(self, other):
        if isinstance(other, PolyObservable):
            return self.n == other.n and self.terms == other.terms
        try:
            return self == self._coerce(other)
        except Exception:
            return NotImplemented

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self):
        return f"PolyObservable({format_observable(self)})"

    def __str__(self):
        return format_observable(self)


def variable_names(n: int) -> list:
    if n == 1:
        return ["x", "p"]
    return [f"x{k + 1}" for k in range(n)] + [f"p{k + 1}" for k in range(n)]


def format_observable(f: PolyObservable) -> str:
    if not f.terms:
        return "0"
    names = variable_names(f.n)
    parts = []
    for e in sorted(f.terms, key=lambda e: (sum(e), tuple(-x for x in e))):
        c = f.terms[e]
        mono = "*".join(f"{names[k]}^{x}" if x > 1 else names[k] for k, x in enumerate(e) if x)
        cs = str(c)
        compound = any(ch in cs[1:] for ch in "+-") or " " in cs
        if not mono:
            parts.append(f"({cs})" if compound else cs)
        elif c == ONE_L:
            parts.append(mono)
        elif c == -ONE_L:
            parts.append(f"-{mono}")
        else:
            parts.append(f"({cs})*{mono}" if compound else f"{cs}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def parse_observable(text: str, n: int = 1) -> PolyObservable:
    """Parse ``"x^2 + (1/2)i*x*p - l*p"``; ``l`` is the formal parameter."""
    names = variable_names(n)

    def atom(tok):
        if tok in names:
            return PolyObservable.variable(n, tok)
        raise SyntaxError(f"unknown symbol {tok!r}; variables are {names}")

    v = ExprParser(str(text), True, atom).parse()
    if isinstance(v, Scalar):
        return PolyObservable.constant(n, v)
    return v


def poisson_bracket(f: PolyObservable, g: PolyObservable) -> PolyObservable:
    """``{f, g} = sum_k d_xk f d_pk g - d_pk f d_xk g``."""
    acc = PolyObservable._raw(f.n, {})
    for k in range(f.n):
        acc = acc + f.partial(k) * g.partial(f.n + k) - f.partial(f.n + k) * g.partial(k)
    return acc


# -- star products ------------------------------------------------------------------------

class StarProduct:
    """``f * g = f g + sum_{r=1}^N l^r C_r(f, g)`` truncated at order ``N``."""

    def __init__(self, n: int, order: int, cochains: Sequence[dict], name: str = ""):
        if len(cochains) != order:
            raise ValueError(f"expected {order} cochains, got {len(cochains)}")
        self.n = n
        self.order = order
        self.cochains = tuple({(tuple(a), tuple(b)): _lam(c).at_zero() for (a, b), c in C.items() if c}
                              for C in cochains)
        self.name = name
        self._cache: dict = {}

    def cochain(self, r: int) -> dict:
        if r == 0:
            z = (0,) * (2 * self.n)
            return {(z, z): Scalar.one()}
        return self.cochains[r - 1]

    @property
    def poisson(self) -> dict:
        """Antisymmetric part ``C_1(f, g) - C_1(g, f)`` as bidifferential data."""
        if self.order < 1:
            return {}
        acc: dict = {}
        for (a, b), c in self.cochain(1).items():
            _add_into(acc, (a, b), c)
            _add_into(acc, (b, a), -c)
        return acc

    def apply_cochain(self, r: int, f: PolyObservable, g: PolyObservable) -> PolyObservable:
        acc: dict = {}
        for (a, b), c in self.cochain(r).items():
            for e1, c1 in f.terms.items():
                d1 = _derive_monomial(e1, a)
                if d1 is None or not d1[0]:
                    continue
                for e2, c2 in g.terms.items():
                    d2 = _derive_monomial(e2, b)
                    if d2 is None or not d2[0]:
                        continue
                    _add_into(acc, _emul(d1[1], d2[1]), c1 * c2 * (c.lift() * (d1[0] * d2[0])))
        return PolyObservable._raw(f.n, acc)

    def _monomial_product(self, e1: Exps, e2: Exps) -> dict:
        key = (e1, e2)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        acc: dict = {}
        for r in range(self.order + 1):
            lr = LAMBDA_POWERS[r]
            for (a, b), c in self.cochain(r).items():
                d1 = _derive_monomial(e1, a)
                if d1 is None or not d1[0]:
                    continue
                d2 = _derive_monomial(e2, b)
                if d2 is None or not d2[0]:
                    continue
                _add_into(acc, _emul(d1[1], d2[1]), (c * (d1[0] * d2[0])).lift() * lr)
        self._cache[key] = acc
        return acc

    def __call__(self, f: PolyObservable, g: PolyObservable) -> PolyObservable:
        f._check(g)
        if f.n != self.n:
            raise ValueError("observable and star product have different dimensions")
        acc: dict = {}
        N = self.order
        for e1, c1 in f.terms.items():
            for e2, c2 in g.terms.items():
                c12 = (c1 * c2).truncate(N)
                if not c12:
                    continue
                for e, v in self._monomial_product(e1, e2).items():
                    _add_into(acc, e, (c12 * v).truncate(N))
        return PolyObservable._raw(self.n, acc)

    product = __call__

    def truncated(self, order: int) -> "StarProduct":
        return StarProduct(self.n, order, self.cochains[:order], f"{self.name}|{order}")

    def __eq__(self, other):
        return (isinstance(other, StarProduct) and self.n == other.n and self.order == other.order
                and self.cochains == other.cochains)

    def __hash__(self):
        return hash((self.n, self.order))

    def __repr__(self):
        return f"StarProduct({self.name or '?'}, n={self.n}, N={self.order})"


LAMBDA_POWERS = [Scalar.one(True)]
for _ in range(32):
    LAMBDA_POWERS.append(LAMBDA_POWERS[-1] * LAMBDA)


def pointwise_product(n: int = 1) -> StarProduct:
    return StarProduct(n, 0, [], "pointwise")


@lru_cache(maxsize=None)
def moyal_star(n: int, order: int) -> StarProduct:
    """Weyl-Moyal product on ``R^{2n}`` with ``C_1(f, g) - C_1(g, f) = i{f, g}``."""
    cochains = []
    for r in range(1, order + 1):
        C: dict = {}
        pref = _pow(Scalar(0, 1) * _half(), r)
        for split in itertools.product(range(r + 1), repeat=2 * n):
            if sum(split) != r:
                continue
            al, be = split[:n], split[n:]
            denom = 1
            for v in split:
                denom *= math.factorial(v)
            sign = -1 if sum(be) % 2 else 1
            a = tuple(al) + tuple(be)     # on f: d_x^al d_p^be
            b = tuple(be) + tuple(al)     # on g: d_x^be d_p^al
            _add_into(C, (a, b), pref * _frac(sign, denom))
        cochains.append(C)
    return StarProduct(n, order, cochains, "moyal")


def _pow(s: Scalar, k: int) -> Scalar:
    r = Scalar.one(s.lam)
    for _ in range(k):
        r = r * s
    return r


def _frac(p: int, q: int) -> Scalar:
    from gmpy2 import mpq
    return Scalar(mpq(p, q))


def _half() -> Scalar:
    return _frac(1, 2)


def moyal_product(f: PolyObservable, g: PolyObservable, order: int) -> PolyObservable:
    return moyal_star(f.n, order)(f, g)


def check_star_axioms(s: StarProduct, degree_bound: int, order: Optional[int] = None,
                      associativity_degree: Optional[int] = None):
    """Associativity, unit, pointwise ``C_0``, ``C_1`` antisymmetrisation and the Hermitian identity.

    All identities are tested modulo ``l^(N+1)`` on every monomial pair (and
    triple, for associativity) of degree at most ``degree_bound``.
    """
    from .report import Report
    N = s.order if order is None else order
    s = s if N == s.order else s.truncated(N)
    rep = Report(f"star product {s.name} at order {N}")
    mons = [PolyObservable.monomial(s.n, e) for e in monomials(2 * s.n, degree_bound)]
    one = PolyObservable.constant(s.n)
    rep.add("unit", next((str(f) for f in mons if s(one, f) != f or s(f, one) != f), None) is None)
    bad = None
    if N >= 0:
        for f, g in itertools.product(mons, repeat=2):
            if s(f, g).lambda_coefficient(0) != f * g:
                bad = (str(f), str(g))
                break
    rep.add("pointwise_c0", bad is None, bad)
    bad = None
    if N >= 1:
        for f, g in itertools.product(mons, repeat=2):
            lhs = s.apply_cochain(1, f, g) - s.apply_cochain(1, g, f)
            if lhs != poisson_bracket(f, g).scale(Scalar(0, 1, True)):
                bad = (str(f), str(g))
                break
        rep.add("poisson", bad is None, bad)
    bad = None
    for f, g in itertools.product(mons, repeat=2):
        if s(f, g).conj() != s(g.conj(), f.conj()):
            bad = (str(f), str(g))
            break
    rep.add("hermitian", bad is None, bad)
    bad = None
    td = mons if associativity_degree is None else [m for m in mons if m.degree <= associativity_degree]
    left = {}
    for f, g in itertools.product(td, repeat=2):
        left[(f, g)] = s(f, g)
    for f, g, h in itertools.product(td, repeat=3):
        if s(left[(f, g)], h) != s(f, left[(g, h)]):
            bad = (str(f), str(g), str(h))
            break
    rep.add("associative", bad is None, bad)
    return rep


# -- symbols of constant-coefficient operators -----------------------------------------------

def _sym_mul(a: dict, b: dict, order: int) -> dict:
    acc: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            c = (c1 * c2).truncate(order)
            if c:
                _add_into(acc, _emul(e1, e2), c)
    return acc


def _cochains_symbol(s: StarProduct) -> dict:
    """``sum_r l^r C_r`` as a polynomial in ``(xi, eta)``."""
    acc: dict = {}
    for r in range(s.order + 1):
        for (a, b), c in s.cochain(r).items():
            _add_into(acc, a + b, c.lift() * LAMBDA_POWERS[r])
    return acc


def _split_symbol(sym: dict, n: int, order: int) -> list:
    cochains = [dict() for _ in range(order + 1)]
    for e, c in sym.items():
        a, b = e[:2 * n], e[2 * n:]
        for r in range(order + 1):
            v = c.coefficient(r)
            if v:
                cochains[r][(a, b)] = v
    return cochains


@dataclass(frozen=True)
class EquivalenceOperator:
    """``S = id + sum_r l^r S_r`` with constant-coefficient differential stages ``S_r`` killing constants."""

    n: int
    order: int
    stages: tuple  # of dicts exps -> Scalar

    def __post_init__(self):
        if len(self.stages) != self.order:
            raise ValueError("one stage per order is required")
        z = (0,) * (2 * self.n)
        clean = []
        for st in self.stages:
            st = {tuple(e): _lam(c).at_zero() for e, c in st.items() if c}
            if z in st:
                raise ValueError("S_r must annihilate constants")
            clean.append(st)
        object.__setattr__(self, "stages", tuple(clean))

    @classmethod
    def identity(cls, n: int, order: int) -> "EquivalenceOperator":
        return cls(n, order, tuple({} for _ in range(order)))

    def symbol(self) -> dict:
        acc = {(0,) * (2 * self.n): ONE_L}
        for r, st in enumerate(self.stages, 1):
            for e, c in st.items():
                _add_into(acc, e, c.lift() * LAMBDA_POWERS[r])
        return acc

    @classmethod
    def from_symbol(cls, n: int, order: int, sym: dict) -> "EquivalenceOperator":
        stages = [dict() for _ in range(order)]
        for e, c in sym.items():
            for r in range(1, order + 1):
                v = c.coefficient(r)
                if v:
                    stages[r - 1][e] = v
        return cls(n, order, tuple(stages))

    def __call__(self, f: PolyObservable) -> PolyObservable:
        acc = f
        for r, st in enumerate(self.stages, 1):
            for e, c in st.items():
                acc = acc + f.derivative(e).scale(c.lift() * LAMBDA_POWERS[r])
        return acc.truncate(self.order)

    def compose(self, other: "EquivalenceOperator") -> "EquivalenceOperator":
        return EquivalenceOperator.from_symbol(self.n, self.order,
                                               _sym_mul(self.symbol(), other.symbol(), self.order))

    def inverse(self) -> "EquivalenceOperator":
        """Neumann series ``sum_k (-T)^k`` with ``T = S - id``, truncated."""
        t = {e: -c for e, c in self.symbol().items() if any(e)}
        acc = {(0,) * (2 * self.n): ONE_L}
        power = dict(acc)
        for _ in range(self.order):
            power = _sym_mul(power, t, self.order)
            for e, c in power.items():
                _add_into(acc, e, c)
        return EquivalenceOperator.from_symbol(self.n, self.order, acc)

    def is_real(self) -> bool:
        return all(c.is_real() for st in self.stages for c in st.values())


def _substitute_sum(sym: dict, n: int, order: int) -> dict:
    """``S(xi + eta)`` for a one-set symbol ``S``."""
    acc: dict = {}
    nv = 2 * n
    for e, c in sym.items():
        for split in itertools.product(*[range(k + 1) for k in e]):
            coef = 1
            for k, j in zip(e, split):
                coef *= math.comb(k, j)
            a = tuple(split)
            b = tuple(k - j for k, j in zip(e, split))
            _add_into(acc, a + b, c * coef)
    return acc


def _first(sym: dict, n: int) -> dict:
    z = (0,) * (2 * n)
    return {e + z: c for e, c in sym.items()}


def _second(sym: dict, n: int) -> dict:
    z = (0,) * (2 * n)
    return {z + e: c for e, c in sym.items()}


def apply_equivalence(S: EquivalenceOperator, s: StarProduct) -> StarProduct:
    """``f *' g = S(S^-1 f * S^-1 g)`` so that ``S(f * g) = Sf *' Sg``."""
    if S.order != s.order or S.n != s.n:
        raise ValueError("equivalence and star product must have the same order and dimension")
    N, n = s.order, s.n
    Si = S.inverse().symbol()
    sym = _sym_mul(_substitute_sum(S.symbol(), n, N), _cochains_symbol(s), N)
    sym = _sym_mul(sym, _first(Si, n), N)
    sym = _sym_mul(sym, _second(Si, n), N)
    cochains = _split_symbol(sym, n, N)
    return StarProduct(n, N, cochains[1:], f"S({s.name})")


# -- formal functionals -------------------------------------------------------------------------

class PolyFunctional:
    """Linear functional on observables given by its monomial values (missing monomials map to 0)."""

    def __init__(self, n: int, values: Optional[dict] = None, name: str = ""):
        self.n = n
        self.values = {tuple(e): _lam(v) for e, v in (values or {}).items() if v}
        self.name = name

    def __call__(self, f: PolyObservable) -> Scalar:
        acc = ZERO_L
        for e, c in f.terms.items():
            v = self.values.get(e)
            if v is not None:
                acc = acc + c * v
        return acc

    def __add__(self, other: "PolyFunctional") -> "PolyFunctional":
        vals = dict(self.values)
        for e, v in other.values.items():
            _add_into(vals, e, v)
        return PolyFunctional(self.n, vals, self.name)

    def scale(self, c) -> "PolyFunctional":
        c = _lam(c)
        return PolyFunctional(self.n, {e: v * c for e, v in self.values.items()}, self.name)

    def order_part(self, k: int) -> "PolyFunctional":
        return PolyFunctional(self.n, {e: v.coefficient(k) for e, v in self.values.items()})

    def at_zero(self) -> "PolyFunctional":
        return self.order_part(0)

    def __eq__(self, other):
        return isinstance(other, PolyFunctional) and self.n == other.n and self.values == other.values

    def __repr__(self):
        return f"PolyFunctional({self.name or len(self.values)})"


def _double_factorial(k: int) -> int:
    r = 1
    while k > 1:
        r *= k
        k -= 2
    return r


def gaussian_moments(n: int = 1, max_degree: int = 8, variance: int = 1) -> PolyFunctional:
    """Moments of the standard normal law on ``R^{2n}``: ``E[x^a] = (a-1)!! var^(a/2)`` for even ``a``."""
    vals = {}
    for e in monomials(2 * n, max_degree):
        if all(k % 2 == 0 for k in e):
            c = 1
            for k in e:
                c *= _double_factorial(k - 1) * variance ** (k // 2)
            vals[e] = c
    return PolyFunctional(n, vals, "gaussian")


def point_evaluation(n: int = 1) -> PolyFunctional:
    """``f -> f(0)``."""
    return PolyFunctional(n, {(0,) * (2 * n): 1}, "delta0")


def test_family(n: int, test_degree: int) -> list:
    """Monomials of degree ``<= test_degree`` and the pairs ``m_a + c m_b`` with ``c`` in ``{1, -1, i, -i}``."""
    mons = [PolyObservable.monomial(n, e) for e in monomials(2 * n, test_degree)]
    out = list(mons)
    units = [Scalar(1), Scalar(-1), Scalar(0, 1), Scalar(0, -1)]
    for a, b in itertools.combinations(range(len(mons)), 2):
        for c in units:
            out.append(mons[a] + mons[b].scale(c))
    return out


@dataclass
class FormalVerdict:
    positive: bool
    witness: Optional[PolyObservable] = None
    value: Optional[Scalar] = None
    tested: int = 0

    def __bool__(self):
        return self.positive


def formal_positive(omega: PolyFunctional, s: StarProduct, test_degree: int,
                    order: Optional[int] = None, family: Optional[list] = None) -> FormalVerdict:
    """``omega(conj(f) * f) >= 0`` as a formal power series for every ``f`` of the test family."""
    N = s.order if order is None else order
    s = s if N == s.order else s.truncated(N)
    fam = test_family(omega.n, test_degree) if family is None else family
    for k, f in enumerate(fam):
        v = omega(s(f.conj(), f)).truncate(N)
        if not v.is_real() or not v.is_nonnegative():
            return FormalVerdict(False, f, v, k + 1)
    return FormalVerdict(True, None, None, len(fam))


class NotClassicallyPositive(ValueError):
    pass


@dataclass
class LiftResult:
    found: bool
    functional: Optional[PolyFunctional]
    corrections: list = field(default_factory=list)   # per order: description of the chosen correction
    tried: int = 0
    budget: int = 0

    @property
    def budget_exhausted(self) -> bool:
        return not self.found


def second_moment_shift(omega: PolyFunctional, max_degree: int) -> PolyFunctional:
    """``m -> omega(Laplacian(m)) / 2``: the first-order change of ``omega`` under a variance shift."""
    n = omega.n
    half = _half().lift()
    vals = {}
    for e in monomials(2 * n, max_degree):
        m = PolyObservable.monomial(n, e)
        lap = PolyObservable._raw(n, {})
        for k in range(2 * n):
            lap = lap + m.partial(k).partial(k)
        v = omega(lap) * half
        if v:
            vals[e] = v
    return PolyFunctional(n, vals, "second-moment")


def _correction_directions(omega0: PolyFunctional, max_degree: int) -> list:
    n = omega0.n
    dirs = [("scale", omega0.at_zero()), ("second-moment", second_moment_shift(omega0.at_zero(), max_degree))]
    for e in monomials(2 * n, max_degree):
        dirs.append((f"delta{e}", PolyFunctional(n, {e: 1})))
    return dirs


def deform_functional(omega0: PolyFunctional, s: StarProduct, order: Optional[int] = None,
                      test_degree: int = 2, budget: int = 64) -> LiftResult:
    """Order-by-order positive lift ``Omega = omega_0 + l omega_1 + ... + l^N omega_N``.

    At order ``r`` the zero correction is tried first, then rays
    ``t * d`` along a fixed list of directions ``d`` (``omega_0`` itself, the
    second-moment shift, monomial deltas) with ``t`` in ``1, 2, 4, ...``.
    ``budget`` counts candidate corrections over all orders; running out
    is reported as exhaustion, never as a counterexample.
    """
    N = s.order if order is None else order
    s = s if N == s.order else s.truncated(N)
    n = omega0.n
    fam = test_family(n, test_degree)
    classical = formal_positive(omega0.at_zero(), pointwise_product(n), test_degree, 0, fam)
    if not classical:
        raise NotClassicallyPositive(f"omega_0 is negative on {classical.witness}")
    # values order by order: omega_k applied to [l^j] conj(f) * f
    prods = [s(f.conj(), f) for f in fam]
    parts = [[p.lambda_coefficient(j) for j in range(N + 1)] for p in prods]
    current = omega0.at_zero()
    chosen = []
    tried = 0
    for r in range(1, N + 1):
        def ok_with(cand: PolyFunctional) -> bool:
            trial = current + cand.scale(LAMBDA_POWERS[r])
            pieces = [trial.order_part(k) for k in range(r + 1)]
            for pp in parts:
                series = ZERO_L
                for total in range(r + 1):
                    acc = ZERO_L
                    for k in range(total + 1):
                        acc = acc + pieces[k](pp[total - k])
                    series = series + acc.at_zero().lift() * LAMBDA_POWERS[total]
                if not series.is_real() or not series.is_nonnegative():
                    return False
            return True

        zero = PolyFunctional(n, {})
        tried += 1
        if ok_with(zero):
            chosen.append("zero")
            continue
        found = None
        scale = 1
        dirs = _correction_directions(omega0, 2 * test_degree)
        while found is None and tried < budget:
            for label, d in dirs:
                if tried >= budget:
                    break
                tried += 1
                cand = d.scale(scale)
                if ok_with(cand):
                    found = (f"{scale}*{label}", cand)
                    break
            scale *= 2
        if found is None:
            return LiftResult(False, None, chosen, tried, budget)
        chosen.append(found[0])
        current = current + found[1].scale(LAMBDA_POWERS[r])
    return LiftResult(True, current, chosen, tried, budget)


# -- deformed algebras and the classical limit ---------------------------------------------------

@dataclass(eq=False)
class DeformedAlgebra:
    """``a *' b = S(S^-1 a . S^-1 b)`` on ``A[l]`` for ``S = id + l N`` with ``N^2 = 0``.

    ``S`` is a ``*``-map when ``N`` commutes with the involution, so the
    deformation is equivalent to the trivial one and the multi-matrix
    embedding of ``A`` composed with ``S^-1`` still decides positivity.
    """

    classical: AlgebraPresentation
    algebra: AlgebraPresentation
    shift: tuple  # N(e_a) as elements of the lifted classical algebra

    def undeform(self, x: AlgebraElement) -> AlgebraElement:
        """``S^-1 x`` in the lifted classical algebra."""
        L = self.classical.lift()
        y = AlgebraElement(L, x.coords)
        acc = y
        for a, c in enumerate(x.coords):
            if c:
                acc = acc - self.shift[a].scale(c * LAMBDA)
        return acc

    def deform(self, y: AlgebraElement) -> AlgebraElement:
        """``S y`` for ``y`` in the lifted classical algebra."""
        acc = list(y.coords)
        for a, c in enumerate(y.coords):
            if c:
                for b, v in enumerate(self.shift[a].coords):
                    acc[b] = acc[b] + c * LAMBDA * v
        return AlgebraElement(self.algebra, tuple(acc))


def default_shift(alg: AlgebraPresentation) -> list:
    """A real nilpotent ``N`` with ``N(1) = 0``: ``d1 -> 1, d2 -> -1`` on functions, ``E11 -> E12 + E21, E22 -> -(E12 + E21)`` on ``M_2``."""
    L = alg.lift()
    z = L.zero()
    if alg.kind == "functions" and alg.dim >= 2:
        out = [z] * alg.dim
        out[0], out[1] = L.one(), -L.one()
        return out
    if alg.kind == "matrix" and alg.blocks == (2,):
        off = L["E12"] + L["E21"]
        return [off if lab == "E11" else -off if lab == "E22" else z for lab in alg.labels]
    raise ValueError(f"no default deformation for {alg!r}")


def deform_algebra(alg: AlgebraPresentation, shift: Optional[Sequence[AlgebraElement]] = None,
                   name: Optional[str] = None) -> DeformedAlgebra:
    L = alg.lift()
    shift = tuple(default_shift(alg) if shift is None else [AlgebraElement(L, tuple(_lam(c) for c in s.coords))
                                                             for s in shift])
    k = alg.dim

    def N(y):
        acc = L.zero()
        for a, c in enumerate(y.coords):
            if c:
                acc = acc + shift[a].scale(c)
        return acc

    for a in range(k):
        if not N(shift[a]).is_zero():
            raise ValueError("the shift must square to zero")
        if N(L.basis(a).star()) != shift[a].star():
            raise ValueError("the shift must commute with the involution")
    z = ZERO_L
    S = lambda y: y + N(y).scale(LAMBDA)
    Si = lambda y: y - N(y).scale(LAMBDA)
    inv_images = [Si(L.basis(a)) for a in range(k)]
    structure = []
    for a in range(k):
        row = []
        for b in range(k):
            row.append(list(S(inv_images[a] * inv_images[b]).coords))
        structure.append(row)
    involution = [list(S(inv_images[a].star()).coords) for a in range(k)]
    unit = None if alg.unit is None else list(S(L.one()).coords)
    embedding = None
    if alg.embedding is not None:
        embedding = []
        for a in range(k):
            mats = L.embed(inv_images[a])
            entries = [(bk, r, c, v) for bk, m in enumerate(mats) for r, row in enumerate(m)
                       for c, v in enumerate(row) if v]
            embedding.append(entries)
    dalg = AlgebraPresentation.from_dense(alg.labels, structure, involution, unit, alg.kind, alg.blocks,
                                          embedding, True, name or f"{alg.name}[l]")
    return DeformedAlgebra(alg, dalg, shift)


def _cl_algebra(alg: AlgebraPresentation) -> AlgebraPresentation:
    if not alg.lam:
        return alg
    return alg.map_scalars(lambda v: v.at_zero(), False, alg.name.replace("[l]", ""))


def _cl_element(x: AlgebraElement, target: AlgebraPresentation) -> AlgebraElement:
    return x.map_scalars(lambda v: v.at_zero(), target)


def _cl_module(m: InnerProductModule) -> InnerProductModule:
    D = _cl_algebra(m.over)
    return InnerProductModule(D, [[_cl_element(g, D) for g in row] for row in m.gram], m.name)


def _cl_rep(rho: Representation, module: InnerProductModule) -> Representation:
    A = _cl_algebra(rho.algebra)
    D = module.over
    images = [[[_cl_element(x, D) for x in row] for row in img] for img in rho.images]
    return Representation(A, module, images, rho.name)


def classical_limit(obj):
    """Set ``l = 0`` in every structure constant, Gram entry, cochain and functional value.

    Arrows are re-certified at their level after the limit.
    """
    from .morita import Bimodule, PicardArrow, certify
    if isinstance(obj, StarProduct):
        return pointwise_product(obj.n)
    if isinstance(obj, (PolyObservable, PolyFunctional)):
        return obj.at_zero()
    if isinstance(obj, DeformedAlgebra):
        return obj.classical
    if isinstance(obj, AlgebraPresentation):
        return _cl_algebra(obj)
    if isinstance(obj, AlgebraElement):
        return _cl_element(obj, _cl_algebra(obj.algebra))
    if isinstance(obj, Functional):
        return Functional(_cl_algebra(obj.algebra), [v.at_zero() for v in obj.values])
    if isinstance(obj, InnerProductModule):
        return _cl_module(obj)
    if isinstance(obj, Representation):
        return _cl_rep(obj, _cl_module(obj.module))
    if isinstance(obj, Bimodule):
        m = _cl_module(obj.module)
        rep = _cl_rep(obj.rep, m)
        big = obj.module
        B = rep.algebra

        def lip(x, y):
            lx = ModuleElement(big, tuple(c.map_scalars(lambda v: v.lift(), big.over) for c in x.coords))
            ly = ModuleElement(big, tuple(c.map_scalars(lambda v: v.lift(), big.over) for c in y.coords))
            return _cl_element(obj.left_ip(lx, ly), B)

        return Bimodule(B, m.over, rep, lip, f"cl({obj.name})")
    if isinstance(obj, PicardArrow):
        return certify(classical_limit(obj.bimodule), obj.level)
    raise TypeError(f"no classical limit for {type(obj).__name__}")


def deformed_identity_arrow(d: DeformedAlgebra, level: str = "strong"):
    from .morita import certify, identity_bimodule
    return certify(identity_bimodule(d.algebra), level)


def deformed_column_bimodule(n: int = 2, nilpotent: Optional[Sequence[Sequence]] = None):
    """``C[l]^n`` between ``M_n(C[l])`` and ``C[l]`` twisted by ``U = 1 + l N``.

    The Gram matrix is ``U^dagger U``, ``pi(b) = U^-1 b U`` and the left product is
    ``U x y^dagger U^dagger``; at ``l = 0`` this is the standard column module.
    """
    from .algebra import matrix_element, scalars, matrix_algebra
    from .morita import Bimodule
    C = scalars(True)
    mn = matrix_algebra(C, n)
    if nilpotent is None:
        nilpotent = [[1 if (r, c) == (0, n - 1) else 0 for c in range(n)] for r in range(n)]
    Nm = [[_lam(v) for v in row] for row in nilpotent]
    ident = [[ONE_L if r == c else ZERO_L for c in range(n)] for r in range(n)]
    if any(v for row in linalg.matmul(Nm, Nm) for v in row):
        raise ValueError("N must square to zero")
    U = [[ident[r][c] + LAMBDA * Nm[r][c] for c in range(n)] for r in range(n)]
    Ui = [[ident[r][c] - LAMBDA * Nm[r][c] for c in range(n)] for r in range(n)]
    Ud = linalg.adjoint(U)
    G = linalg.matmul(Ud, U)
    m = InnerProductModule(C, [[C.element([v]) for v in row] for row in G], "column[l]")
    images = []
    for I in range(n):
        for J in range(n):
            unit = [[ONE_L if (r, c) == (I, J) else ZERO_L for c in range(n)] for r in range(n)]
            P = linalg.matmul(linalg.matmul(Ui, unit), U)
            images.append([[C.element([v]) for v in row] for row in P])
    rep = Representation(mn, m, images, "column[l]")

    def lip(x, y):
        xv = [x.coords[i].coords[0] for i in range(n)]
        yv = [y.coords[i].coords[0] for i in range(n)]
        ux, uy = linalg.matvec(U, xv), linalg.matvec(U, yv)
        return matrix_element(C, mn, [[C.element([ux[I] * uy[J].conj()]) for J in range(n)] for I in range(n)])

    return Bimodule(mn, C, rep, lip, "column[l]")


def matrix_level_lift(omega0: Functional, d: DeformedAlgebra, n: int = 2) -> Functional:
    """Lift a positive functional on ``M_n(A)`` to ``M_n(A[l]')`` by precomposing with ``S^-1`` entrywise."""
    from .algebra import matrix_algebra, matrix_entries, matrix_element
    mn_def = matrix_algebra(d.algebra, n)
    Lc = d.classical.lift()
    mn_cl = matrix_algebra(Lc, n)
    if _cl_algebra(mn_cl) != omega0.algebra:
        raise ValueError("functional does not live on M_n of the classical algebra")
    lifted = [v.lift() for v in omega0.values]
    vals = []
    for a in range(mn_def.dim):
        ents = matrix_entries(d.algebra, mn_def.basis(a), n)
        y = matrix_element(Lc, mn_cl, [[d.undeform(e) for e in row] for row in ents])
        acc = ZERO_L
        for k, c in enumerate(y.coords):
            if c:
                acc = acc + c * lifted[k]
        vals.append(acc)
    return Functional(mn_def, vals)
