"""Exact scalars for C = R(i) with R = Q or Q[l] ordered by the lowest-order coefficient.

Elements of R are stored as coefficient tuples indexed by the power of the
formal parameter ``l``; the tuple never carries trailing zeros.  A
:class:`Scalar` is a pair ``(re, im)`` of such tuples plus a variant flag
telling whether it lives in the plain rationals or in the polynomial ring.
Arithmetic between the two variants is refused on purpose: lift explicitly
with :meth:`Scalar.lift` when a rational constant enters a deformed context.
"""
from __future__ import annotations

import enum
import re as _re
from typing import Iterable, Sequence, Union

from gmpy2 import mpq

__all__ = [
    "VariantMismatch",
    "Sign",
    "Real",
    "Scalar",
    "is_positive",
    "compare",
    "conjugate",
    "scalar_arithmetic",
    "parse_scalar",
    "format_scalar",
    "scalar",
    "ZERO",
    "ONE",
    "I",
    "LAMBDA",
    "gcd",
]

_Q0 = mpq(0)
_Q1 = mpq(1)

Number = Union[int, "mpq"]


class VariantMismatch(ValueError):
    """Raised when rational and lambda-polynomial scalars are combined."""


class Sign(enum.Enum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


# -- coefficient tuple helpers ------------------------------------------------

def _trim(c: Sequence) -> tuple:
    n = len(c)
    while n and not c[n - 1]:
        n -= 1
    return tuple(c[:n])


def _padd(a: tuple, b: tuple) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return a
    out = list(a)
    for k, v in enumerate(b):
        out[k] += v
    return _trim(out)


def _psub(a: tuple, b: tuple) -> tuple:
    if not b:
        return a
    n = max(len(a), len(b))
    out = [_Q0] * n
    for k, v in enumerate(a):
        out[k] = v
    for k, v in enumerate(b):
        out[k] -= v
    return _trim(out)


def _pneg(a: tuple) -> tuple:
    return tuple(-v for v in a)


def _pmul(a: tuple, b: tuple) -> tuple:
    if not a or not b:
        return ()
    if len(a) == 1 and len(b) == 1:
        return (a[0] * b[0],)
    out = [_Q0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _pscale(a: tuple, q) -> tuple:
    if not q:
        return ()
    return tuple(v * q for v in a)


def _low_sign(a: tuple) -> int:
    for v in a:
        if v:
            return 1 if v > 0 else -1
    return 0


def _q(x) -> mpq:
    if isinstance(x, str):
        return mpq(x)
    return mpq(x)


# -- the ordered ring R ---------------------------------------------------------

class Real:
    """Element of R: a rational, or a polynomial in ``l`` with rational coefficients."""

    __slots__ = ("coeffs", "lam")

    def __init__(self, coeffs: Iterable = (), lam: bool = False):
        c = _trim(tuple(_q(v) for v in coeffs))
        if not lam and len(c) > 1:
            raise ValueError("rational variant cannot carry powers of l")
        self.coeffs = c
        self.lam = lam

    @property
    def variant(self) -> str:
        return "lambda_poly" if self.lam else "rational"

    def _check(self, other: "Real") -> None:
        if other.lam != self.lam:
            raise VariantMismatch(f"{self.variant} vs {other.variant}")

    def _coerce(self, other) -> "Real":
        if isinstance(other, Real):
            self._check(other)
            return other
        if isinstance(other, Scalar):
            raise TypeError("use Scalar arithmetic for complex values")
        return Real((other,), self.lam)

    def __add__(self, other):
        o = self._coerce(other)
        return Real._raw(_padd(self.coeffs, o.coeffs), self.lam)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Real._raw(_psub(self.coeffs, o.coeffs), self.lam)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return Real._raw(_pmul(self.coeffs, o.coeffs), self.lam)

    __rmul__ = __mul__

    def __neg__(self):
        return Real._raw(_pneg(self.coeffs), self.lam)

    @classmethod
    def _raw(cls, coeffs: tuple, lam: bool) -> "Real":
        r = object.__new__(cls)
        r.coeffs = coeffs
        r.lam = lam
        return r

    def sign(self) -> Sign:
        return Sign(_low_sign(self.coeffs))

    def __eq__(self, other):
        if isinstance(other, Real):
            return self.lam == other.lam and self.coeffs == other.coeffs
        if isinstance(other, (int, type(_Q0))):
            return self.coeffs == _trim((_q(other),))
        return NotImplemented

    def __hash__(self):
        return hash((self.coeffs, self.lam))

    def __lt__(self, other):
        return compare(self, self._coerce(other)) < 0

    def __le__(self, other):
        return compare(self, self._coerce(other)) <= 0

    def __gt__(self, other):
        return compare(self, self._coerce(other)) > 0

    def __ge__(self, other):
        return compare(self, self._coerce(other)) >= 0

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        return f"Real({format_scalar(Scalar._raw(self.coeffs, (), self.lam))!r})"


def is_positive(a: Real) -> Sign:
    """Sign of the lowest-order nonzero coefficient (ZERO iff ``a == 0``)."""
    return a.sign()


def compare(a: Real, b: Real) -> int:
    """Total order: ``a > b`` iff ``a - b`` is positive.  Returns -1, 0 or 1."""
    a._check(b)
    return _low_sign(_psub(a.coeffs, b.coeffs))


# -- the scalar ring C = R(i) ----------------------------------------------------

class Scalar:
    """Element ``re + i*im`` of C = R(i).  Immutable and hashable."""

    __slots__ = ("_re", "_im", "lam")

    def __init__(self, re=0, im=0, lam: bool = False):
        self._re = _as_coeffs(re, lam)
        self._im = _as_coeffs(im, lam)
        self.lam = lam

    @classmethod
    def _raw(cls, re: tuple, im: tuple, lam: bool) -> "Scalar":
        s = object.__new__(cls)
        s._re = re
        s._im = im
        s.lam = lam
        return s

    @classmethod
    def zero(cls, lam: bool = False) -> "Scalar":
        return cls._raw((), (), lam)

    @classmethod
    def one(cls, lam: bool = False) -> "Scalar":
        return cls._raw((_Q1,), (), lam)

    @property
    def re(self) -> Real:
        return Real._raw(self._re, self.lam)

    @property
    def im(self) -> Real:
        return Real._raw(self._im, self.lam)

    @property
    def variant(self) -> str:
        return "lambda_poly" if self.lam else "rational"

    def degree(self) -> int:
        """Highest power of ``l`` present (-1 for zero)."""
        return max(len(self._re), len(self._im)) - 1

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.lam != self.lam:
                raise VariantMismatch(f"{self.variant} vs {other.variant}")
            return other
        if isinstance(other, Real):
            if other.lam != self.lam:
                raise VariantMismatch(f"{self.variant} vs {other.variant}")
            return Scalar._raw(other.coeffs, (), self.lam)
        return Scalar._raw(_trim((_q(other),)), (), self.lam)

    def __add__(self, other):
        o = self._coerce(other)
        return Scalar._raw(_padd(self._re, o._re), _padd(self._im, o._im), self.lam)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Scalar._raw(_psub(self._re, o._re), _psub(self._im, o._im), self.lam)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return Scalar._raw(_pneg(self._re), _pneg(self._im), self.lam)

    def __mul__(self, other):
        o = self._coerce(other)
        a, b, c, d = self._re, self._im, o._re, o._im
        if not b and not d:
            return Scalar._raw(_pmul(a, c), (), self.lam)
        re = _psub(_pmul(a, c), _pmul(b, d))
        im = _padd(_pmul(a, d), _pmul(b, c))
        return Scalar._raw(re, im, self.lam)

    __rmul__ = __mul__

    def conj(self) -> "Scalar":
        return Scalar._raw(self._re, _pneg(self._im), self.lam)

    def norm(self) -> Real:
        """``|a|^2 = re^2 + im^2`` as an element of R."""
        return Real._raw(_padd(_pmul(self._re, self._re), _pmul(self._im, self._im)), self.lam)

    def is_zero(self) -> bool:
        return not self._re and not self._im

    def __bool__(self):
        return bool(self._re) or bool(self._im)

    def is_real(self) -> bool:
        return not self._im

    def is_unit(self) -> bool:
        """Invertible in C: any nonzero rational, or a nonzero constant polynomial."""
        if self.is_zero():
            return False
        return len(self._re) <= 1 and len(self._im) <= 1

    def inverse(self) -> "Scalar":
        if not self.is_unit():
            raise ZeroDivisionError(f"{format_scalar(self)} is not a unit")
        a = self._re[0] if self._re else _Q0
        b = self._im[0] if self._im else _Q0
        n = a * a + b * b
        return Scalar._raw(_trim((a / n,)), _trim((-b / n,)), self.lam)

    def exquo(self, other) -> "Scalar":
        """Exact quotient; raises ``ArithmeticError`` if ``other`` does not divide ``self``."""
        o = self._coerce(other)
        if o.is_unit():
            return self * o.inverse()
        q, r = _cdivmod(_to_complex(self), _to_complex(o))
        if any(r):
            raise ArithmeticError(f"{format_scalar(o)} does not divide {format_scalar(self)}")
        return _from_complex(q, self.lam)

    def __truediv__(self, other):
        return self.exquo(other)

    def sign(self) -> Sign:
        """Sign of a real scalar; raises for non-real values."""
        if self._im:
            raise ValueError(f"{format_scalar(self)} is not real")
        return Sign(_low_sign(self._re))

    def is_nonnegative(self) -> bool:
        return not self._im and _low_sign(self._re) >= 0

    def is_strictly_positive(self) -> bool:
        return not self._im and _low_sign(self._re) > 0

    def lift(self) -> "Scalar":
        """The same value viewed as a lambda-polynomial."""
        return Scalar._raw(self._re, self._im, True)

    def at_zero(self) -> "Scalar":
        """Set ``l = 0``; the result is in the rational variant."""
        return Scalar._raw(_trim(self._re[:1]), _trim(self._im[:1]), False)

    def truncate(self, order: int) -> "Scalar":
        """Drop all powers of ``l`` above ``order``."""
        return Scalar._raw(_trim(self._re[: order + 1]), _trim(self._im[: order + 1]), self.lam)

    def coefficient(self, k: int) -> "Scalar":
        """Coefficient of ``l**k`` as a rational-variant scalar."""
        re = self._re[k] if k < len(self._re) else _Q0
        im = self._im[k] if k < len(self._im) else _Q0
        return Scalar._raw(_trim((re,)), _trim((im,)), False)

    def shift(self, k: int) -> "Scalar":
        """Multiply by ``l**k``."""
        if not self.lam:
            raise VariantMismatch("shift needs a lambda_poly scalar")
        pad = (_Q0,) * k
        return Scalar._raw(pad + self._re if self._re else (), pad + self._im if self._im else (), True)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.lam == other.lam and self._re == other._re and self._im == other._im
        if isinstance(other, (int, type(_Q0))):
            return not self._im and self._re == _trim((_q(other),))
        return NotImplemented

    def __hash__(self):
        return hash((self._re, self._im, self.lam))

    def __repr__(self):
        return f"Scalar({format_scalar(self)!r}{', lam=True' if self.lam else ''})"

    def __str__(self):
        return format_scalar(self)


def _as_coeffs(x, lam: bool) -> tuple:
    if isinstance(x, Real):
        if x.lam != lam:
            raise VariantMismatch("component variant differs from scalar variant")
        return x.coeffs
    if isinstance(x, (tuple, list)):
        c = _trim(tuple(_q(v) for v in x))
    else:
        c = _trim((_q(x),))
    if not lam and len(c) > 1:
        raise ValueError("rational variant cannot carry powers of l")
    return c


# complex-coefficient polynomial helpers used for exact division and gcd

def _to_complex(s: Scalar) -> list:
    n = max(len(s._re), len(s._im))
    return [
        (s._re[k] if k < len(s._re) else _Q0, s._im[k] if k < len(s._im) else _Q0)
        for k in range(n)
    ]


def _from_complex(c: list, lam: bool) -> Scalar:
    return Scalar._raw(_trim([a for a, _ in c]), _trim([b for _, b in c]), lam)


def _cmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _cinv(x):
    n = x[0] * x[0] + x[1] * x[1]
    return (x[0] / n, -x[1] / n)


def _ctrim(c: list) -> list:
    while c and not c[-1][0] and not c[-1][1]:
        c.pop()
    return c


def _cdivmod(a: list, b: list):
    a = _ctrim(list(a))
    b = _ctrim(list(b))
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    inv_lead = _cinv(b[-1])
    q = [(_Q0, _Q0)] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    while len(r) >= len(b):
        k = len(r) - len(b)
        f = _cmul(r[-1], inv_lead)
        q[k] = f
        for j, bj in enumerate(b):
            t = _cmul(f, bj)
            r[k + j] = (r[k + j][0] - t[0], r[k + j][1] - t[1])
        r.pop()
        _ctrim(r)
    return q, [v for pair in r for v in pair]


def gcd(a: Scalar, b: Scalar) -> Scalar:
    """A gcd in Q(i)[l] (monic, or 1 for the rational variant when not both zero)."""
    a._coerce(b)
    if not a.lam:
        if a.is_zero() and b.is_zero():
            return a
        return Scalar.one(False)
    x, y = _ctrim(_to_complex(a)), _ctrim(_to_complex(b))
    while y:
        _, r = _cdivmod(x, y)
        x, y = y, _ctrim([(r[2 * k], r[2 * k + 1]) for k in range(len(r) // 2)])
    if not x:
        return Scalar.zero(True)
    inv = _cinv(x[-1])
    return _from_complex([_cmul(v, inv) for v in x], True)


# -- spec-level operation names ---------------------------------------------------

def conjugate(a: Scalar) -> Scalar:
    return a.conj()


def scalar_arithmetic(a: Scalar, b: Scalar, op: str) -> Scalar:
    if a.lam != b.lam:
        raise VariantMismatch(f"{a.variant} vs {b.variant}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def scalar(value, lam: bool = False) -> Scalar:
    """Coerce an int, rational, string literal or Scalar into a Scalar of the given variant."""
    if isinstance(value, Scalar):
        if value.lam == lam:
            return value
        if lam:
            return value.lift()
        if value.degree() > 0:
            raise VariantMismatch(f"{value} has powers of l")
        return Scalar._raw(value._re, value._im, False)
    if isinstance(value, str):
        return parse_scalar(value, lam=lam)
    return Scalar._raw(_trim((_q(value),)), (), lam)


ZERO = Scalar.zero(False)
ONE = Scalar.one(False)
I = Scalar._raw((), (_Q1,), False)
LAMBDA = Scalar._raw((_Q0, _Q1), (), True)


# -- literals -------------------------------------------------------------------

_TOKEN = _re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9.]*)|(.))")


def tokenize(text: str) -> list:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        elif op is not None:
            if op not in "+-*/^()":
                raise SyntaxError(f"unexpected character {op!r} in {text!r}")
            out.append(("op", op))
        pos = m.end()
    return out


class ExprParser:
    """Recursive-descent parser for sums of products of numbers, ``i``, ``l`` and names.

    ``atom`` turns a name other than ``i``/``l`` into a value; scalar literals
    reject any such name, element literals resolve basis labels through it.
    Juxtaposition multiplies, so ``2i``, ``(1/2)l^2`` and ``i l^3`` are accepted.
    """

    def __init__(self, text: str, lam: bool, atom=None):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0
        self.lam = lam
        self.atom = atom

    def parse(self):
        if not self.toks:
            raise SyntaxError("empty literal")
        v = self.expr()
        if self.pos != len(self.toks):
            raise SyntaxError(f"trailing input in {self.text!r}")
        return v

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def take(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expr(self):
        neg = False
        if self.peek() == ("op", "-"):
            self.take()
            neg = True
        elif self.peek() == ("op", "+"):
            self.take()
        v = self.term()
        if neg:
            v = -v
        while self.peek() in (("op", "+"), ("op", "-")):
            _, o = self.take()
            t = self.term()
            v = _add(v, t) if o == "+" else _add(v, -t)
        return v

    def term(self):
        v = self.power()
        while True:
            kind, tok = self.peek()
            if kind == "op" and tok == "*":
                self.take()
                v = _mul(v, self.power())
            elif kind == "op" and tok == "/":
                self.take()
                d = self.power()
                if not isinstance(d, Scalar) or not d.is_unit():
                    raise SyntaxError(f"can only divide by nonzero constants in {self.text!r}")
                v = _mul(v, d.inverse())
            elif kind in ("num", "name") or (kind == "op" and tok == "("):
                v = _mul(v, self.power())
            else:
                return v

    def power(self):
        base = self.primary()
        if self.peek() == ("op", "^"):
            self.take()
            kind, tok = self.take()
            if kind != "num":
                raise SyntaxError(f"exponent must be an integer in {self.text!r}")
            if not isinstance(base, Scalar):
                if hasattr(base, "__pow__"):
                    return base ** int(tok)
                raise SyntaxError("only scalars can be raised to a power")
            r = Scalar.one(base.lam)
            for _ in range(int(tok)):
                r = r * base
            return r
        return base

    def primary(self):
        kind, tok = self.peek()
        if kind is None:
            raise SyntaxError(f"unexpected end of {self.text!r}")
        self.take()
        if kind == "num":
            return Scalar._raw(_trim((mpq(int(tok)),)), (), self.lam)
        if kind == "name":
            if tok == "i":
                return Scalar._raw((), (_Q1,), self.lam)
            if tok == "l":
                if not self.lam:
                    raise VariantMismatch(f"'l' in a rational literal {self.text!r}")
                return LAMBDA
            if self.atom is None:
                raise SyntaxError(f"unknown symbol {tok!r} in {self.text!r}")
            return self.atom(tok)
        if tok == "(":
            v = self.expr()
            if self.take() != ("op", ")"):
                raise SyntaxError(f"unbalanced parentheses in {self.text!r}")
            return v
        raise SyntaxError(f"unexpected {tok!r} in {self.text!r}")


def _add(a, b):
    if isinstance(a, Scalar) and not isinstance(b, Scalar):
        return b + a
    return a + b


def _mul(a, b):
    if isinstance(a, Scalar) and not isinstance(b, Scalar):
        return b.scale(a) if hasattr(b, "scale") else a * b
    if isinstance(b, Scalar) and not isinstance(a, Scalar):
        return a.scale(b) if hasattr(a, "scale") else a * b
    return a * b


def _needs_lambda(text: str) -> bool:
    return any(kind == "name" and tok == "l" for kind, tok in tokenize(text))


def parse_scalar(text: str, lam: bool | None = None) -> Scalar:
    """Parse ``"2/3"``, ``"1+2i"``, ``"(1/2)l^2 - i l^3"``.

    With ``lam=None`` the variant is inferred: lambda_poly iff ``l`` occurs.
    """
    if lam is None:
        lam = _needs_lambda(text)
    v = ExprParser(str(text), lam).parse()
    return v


def _format_real(c: mpq) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_coeff(re: mpq, im: mpq) -> tuple[str, bool]:
    """Return (text, is_compound) for the complex rational ``re + i im``."""
    if re and im:
        ims = _format_real(abs(im))
        s = f"{_format_real(re)}{'-' if im < 0 else '+'}{'' if abs(im) == 1 else ims + '*'}i"
        return s, True
    if im:
        if im == 1:
            return "i", False
        if im == -1:
            return "-i", False
        return f"{_format_real(im)}*i", False
    return _format_real(re), False


def format_scalar(s: Scalar) -> str:
    """Canonical text form; ``parse_scalar(format_scalar(s), s.lam) == s``."""
    n = s.degree() + 1
    if n == 0:
        return "0"
    parts = []
    for k in range(n):
        re = s._re[k] if k < len(s._re) else _Q0
        im = s._im[k] if k < len(s._im) else _Q0
        if not re and not im:
            continue
        text, compound = _format_coeff(re, im)
        if k == 0:
            parts.append(text)
            continue
        mono = "l" if k == 1 else f"l^{k}"
        if compound:
            parts.append(f"({text})*{mono}")
        elif text == "1":
            parts.append(mono)
        elif text == "-1":
            parts.append(f"-{mono}")
        else:
            parts.append(f"{text}*{mono}")
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out
