"""Exact rational functions in two formal variables ``u`` and ``v``.

Scalars are :class:`fractions.Fraction`.  Polynomials in one variable are
tuples of coefficients, lowest degree first, with no trailing zeros.  A
:class:`RatFunc` keeps its numerator as a sparse bivariate map and its
denominator factored as ``den_u(u) * den_v(v)`` with both factors monic.
Every denominator that shows up in the Capelli/Gaudin constructions is a
product of ``(u - z)`` and ``(v - lam)`` powers, so a denominator mixing the
two variables is treated as a bug and rejected.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Optional, Tuple, Union

BigRat = Fraction
UPoly = Tuple[Fraction, ...]
Exp = Tuple[int, int]

Scalar = Union[int, Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)
ONE_POLY: UPoly = (_ONE,)


class DivisionByZero(ZeroDivisionError):
    pass


class NonSeparableDenominator(ArithmeticError):
    pass


class PoleAtPoint(ArithmeticError):
    pass


def as_rat(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating point values are not exact; pass a Fraction or 'p/q'")
    return Fraction(value)


# ---------------------------------------------------------------------------
# univariate polynomials over Q
# ---------------------------------------------------------------------------

def _trim(c) -> UPoly:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def upoly_add(a: UPoly, b: UPoly) -> UPoly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def upoly_neg(a: UPoly) -> UPoly:
    return tuple(-c for c in a)


def upoly_sub(a: UPoly, b: UPoly) -> UPoly:
    return upoly_add(a, upoly_neg(b))


def upoly_scale(a: UPoly, c: Fraction) -> UPoly:
    if c == 0:
        return ()
    return tuple(x * c for x in a)


def upoly_mul(a: UPoly, b: UPoly) -> UPoly:
    if not a or not b:
        return ()
    if len(a) == 1:
        return upoly_scale(b, a[0])
    if len(b) == 1:
        return upoly_scale(a, b[0])
    out = [_ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def upoly_pow(a: UPoly, k: int) -> UPoly:
    out = ONE_POLY
    for _ in range(k):
        out = upoly_mul(out, a)
    return out


def upoly_divmod(a: UPoly, b: UPoly) -> Tuple[UPoly, UPoly]:
    if not b:
        raise DivisionByZero("polynomial division by zero")
    if len(a) < len(b):
        return (), a
    rem = list(a)
    lead = b[-1]
    q = [_ZERO] * (len(a) - len(b) + 1)
    for k in range(len(a) - len(b), -1, -1):
        c = rem[k + len(b) - 1] / lead
        q[k] = c
        if c:
            for j, y in enumerate(b):
                rem[k + j] -= c * y
    return _trim(q), _trim(rem[: len(b) - 1])


def upoly_monic(a: UPoly) -> UPoly:
    if not a or a[-1] == 1:
        return a
    lead = a[-1]
    return tuple(c / lead for c in a)


def upoly_gcd(a: UPoly, b: UPoly) -> UPoly:
    """Monic gcd; ``gcd(0, 0) = 0``."""
    while b:
        a, b = b, upoly_divmod(a, b)[1]
    return upoly_monic(a)


def upoly_deriv(a: UPoly) -> UPoly:
    return _trim(a[i] * i for i in range(1, len(a)))


def upoly_eval(a: UPoly, x: Fraction) -> Fraction:
    acc = _ZERO
    for c in reversed(a):
        acc = acc * x + c
    return acc


def linear(root: Scalar) -> UPoly:
    """The monic polynomial ``t - root``."""
    return _trim((-as_rat(root), _ONE))


# ---------------------------------------------------------------------------
# bivariate polynomials: dict (deg_u, deg_v) -> Fraction
# ---------------------------------------------------------------------------

BiPoly = Dict[Exp, Fraction]


def bipoly_mul(a: BiPoly, b: BiPoly) -> BiPoly:
    out: BiPoly = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, _ZERO) + c1 * c2
    return {k: c for k, c in out.items() if c}


def bipoly_add(a: BiPoly, b: BiPoly, sign: int = 1) -> BiPoly:
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, _ZERO) + (c if sign > 0 else -c)
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def bipoly_scale(a: BiPoly, c: Fraction) -> BiPoly:
    if c == 0:
        return {}
    return {k: x * c for k, x in a.items()}


def bipoly_times_upoly(a: BiPoly, p: UPoly, var: int) -> BiPoly:
    """Multiply by a univariate polynomial in ``u`` (var=0) or ``v`` (var=1)."""
    if p == ONE_POLY:
        return a
    out: BiPoly = {}
    for (i, j), c in a.items():
        for d, y in enumerate(p):
            if y:
                k = (i + d, j) if var == 0 else (i, j + d)
                out[k] = out.get(k, _ZERO) + c * y
    return {k: c for k, c in out.items() if c}


def bipoly_slices(a: BiPoly, var: int) -> Dict[int, UPoly]:
    """Group ``a`` by the degree in the *other* variable.

    Returns ``{deg_other: poly in var}``.
    """
    groups: Dict[int, Dict[int, Fraction]] = {}
    for (i, j), c in a.items():
        d, o = (i, j) if var == 0 else (j, i)
        groups.setdefault(o, {})[d] = c
    out = {}
    for o, g in groups.items():
        top = max(g)
        out[o] = _trim(g.get(k, _ZERO) for k in range(top + 1))
    return out


def bipoly_exact_div_upoly(a: BiPoly, p: UPoly, var: int) -> BiPoly:
    out: BiPoly = {}
    for o, s in bipoly_slices(a, var).items():
        q, r = upoly_divmod(s, p)
        assert not r, "inexact polynomial division"
        for d, c in enumerate(q):
            if c:
                out[(d, o) if var == 0 else (o, d)] = c
    return out


def bipoly_deriv(a: BiPoly, var: int) -> BiPoly:
    out: BiPoly = {}
    for (i, j), c in a.items():
        if var == 0 and i:
            out[(i - 1, j)] = c * i
        elif var == 1 and j:
            out[(i, j - 1)] = c * j
    return out


def bipoly_from_upoly(p: UPoly, var: int) -> BiPoly:
    return {((d, 0) if var == 0 else (0, d)): c for d, c in enumerate(p) if c}


def bipoly_order_key(k: Exp):
    # graded lex, u > v: higher total degree first, then higher u degree
    return (-(k[0] + k[1]), -k[0])


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

def _reduce(num: BiPoly, den_u: UPoly, den_v: UPoly):
    if not num:
        return {}, ONE_POLY, ONE_POLY
    for var in (0, 1):
        den = den_u if var == 0 else den_v
        if den == ONE_POLY:
            continue
        g = den
        for s in bipoly_slices(num, var).values():
            g = upoly_gcd(g, s)
            if g == ONE_POLY:
                break
        if g != ONE_POLY:
            num = bipoly_exact_div_upoly(num, g, var)
            den = upoly_divmod(den, g)[0]
            if var == 0:
                den_u = den
            else:
                den_v = den
    # make both denominator factors monic, push the scale into the numerator
    lead = den_u[-1] * den_v[-1]
    if lead != 1:
        den_u = upoly_monic(den_u)
        den_v = upoly_monic(den_v)
        num = bipoly_scale(num, 1 / lead)
    return num, den_u, den_v


class RatFunc:
    """Canonical reduced fraction ``num(u, v) / (den_u(u) * den_v(v))``.

    Instances are immutable; equality is structural on the canonical form.
    """

    __slots__ = ("num", "den_u", "den_v", "_hash")

    def __init__(self, num: Optional[BiPoly] = None, den_u: UPoly = ONE_POLY,
                 den_v: UPoly = ONE_POLY, *, reduced: bool = False):
        num = {k: as_rat(c) for k, c in (num or {}).items() if c}
        den_u = _trim(as_rat(c) for c in den_u)
        den_v = _trim(as_rat(c) for c in den_v)
        if not den_u or not den_v:
            raise DivisionByZero("zero denominator")
        if not reduced:
            num, den_u, den_v = _reduce(num, den_u, den_v)
        self.num = num
        self.den_u = den_u
        self.den_v = den_v
        self._hash = None

    @classmethod
    def _raw(cls, num, den_u, den_v):
        obj = cls.__new__(cls)
        obj.num = num
        obj.den_u = den_u
        obj.den_v = den_v
        obj._hash = None
        return obj

    @classmethod
    def const(cls, c: Scalar) -> "RatFunc":
        c = as_rat(c)
        return cls._raw({(0, 0): c} if c else {}, ONE_POLY, ONE_POLY)

    @classmethod
    def u(cls) -> "RatFunc":
        return cls._raw({(1, 0): _ONE}, ONE_POLY, ONE_POLY)

    @classmethod
    def v(cls) -> "RatFunc":
        return cls._raw({(0, 1): _ONE}, ONE_POLY, ONE_POLY)

    @classmethod
    def monomial(cls, i: int, j: int, c: Scalar = 1) -> "RatFunc":
        c = as_rat(c)
        return cls._raw({(i, j): c} if c else {}, ONE_POLY, ONE_POLY)

    @classmethod
    def from_upoly(cls, p: UPoly, var: str = "u") -> "RatFunc":
        return cls._raw(bipoly_from_upoly(_trim(p), 0 if var == "u" else 1),
                        ONE_POLY, ONE_POLY)

    @classmethod
    def inv_upoly(cls, p: UPoly, var: str = "u") -> "RatFunc":
        """``1 / p`` for a univariate polynomial ``p``."""
        p = _trim(as_rat(c) for c in p)
        if not p:
            raise DivisionByZero("inverse of the zero polynomial")
        if var == "u":
            return cls({(0, 0): _ONE}, p, ONE_POLY)
        return cls({(0, 0): _ONE}, ONE_POLY, p)

    # -- structure -------------------------------------------------------

    @property
    def den(self) -> BiPoly:
        """Expanded denominator ``den_u * den_v``."""
        return bipoly_times_upoly(bipoly_from_upoly(self.den_u, 0), self.den_v, 1)

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_polynomial(self) -> bool:
        return self.den_u == ONE_POLY and self.den_v == ONE_POLY

    def is_constant(self) -> bool:
        return self.is_polynomial() and all(k == (0, 0) for k in self.num)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self.num.get((0, 0), _ZERO)

    def depends_on(self, var: str) -> bool:
        idx = 0 if var == "u" else 1
        den = self.den_u if var == "u" else self.den_v
        return len(den) > 1 or any(k[idx] for k in self.num)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RatFunc.const(other)
        if not isinstance(other, RatFunc):
            return NotImplemented
        return (self.num == other.num and self.den_u == other.den_u
                and self.den_v == other.den_v)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), self.den_u, self.den_v))
        return self._hash

    # -- arithmetic ------------------------------------------------------

    def __neg__(self) -> "RatFunc":
        return RatFunc._raw({k: -c for k, c in self.num.items()}, self.den_u, self.den_v)

    def _addsub(self, other: "RatFunc", sign: int) -> "RatFunc":
        if not other.num:
            return self
        if not self.num:
            return other if sign > 0 else -other
        if self.den_u == other.den_u and self.den_v == other.den_v:
            num = bipoly_add(self.num, other.num, sign)
            if self.is_polynomial():
                return RatFunc._raw(num, ONE_POLY, ONE_POLY)
            return RatFunc(num, self.den_u, self.den_v)
        gu = upoly_gcd(self.den_u, other.den_u)
        gv = upoly_gcd(self.den_v, other.den_v)
        a_u = upoly_divmod(self.den_u, gu)[0]
        b_u = upoly_divmod(other.den_u, gu)[0]
        a_v = upoly_divmod(self.den_v, gv)[0]
        b_v = upoly_divmod(other.den_v, gv)[0]
        left = bipoly_times_upoly(bipoly_times_upoly(self.num, b_u, 0), b_v, 1)
        right = bipoly_times_upoly(bipoly_times_upoly(other.num, a_u, 0), a_v, 1)
        num = bipoly_add(left, right, sign)
        return RatFunc(num, upoly_mul(self.den_u, b_u), upoly_mul(self.den_v, b_v))

    def __add__(self, other) -> "RatFunc":
        return self._addsub(_coerce(other), 1)

    __radd__ = __add__

    def __sub__(self, other) -> "RatFunc":
        return self._addsub(_coerce(other), -1)

    def __rsub__(self, other) -> "RatFunc":
        return _coerce(other)._addsub(self, -1)

    def __mul__(self, other) -> "RatFunc":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return RatFunc._raw({}, ONE_POLY, ONE_POLY)
            return RatFunc._raw(bipoly_scale(self.num, as_rat(other)), self.den_u, self.den_v)
        other = _coerce(other)
        if not self.num or not other.num:
            return RatFunc._raw({}, ONE_POLY, ONE_POLY)
        num = bipoly_mul(self.num, other.num)
        if self.is_polynomial() and other.is_polynomial():
            return RatFunc._raw(num, ONE_POLY, ONE_POLY)
        return RatFunc(num, upoly_mul(self.den_u, other.den_u),
                       upoly_mul(self.den_v, other.den_v))

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if not self.num:
            raise DivisionByZero("inverse of zero")
        # num must itself split as f(u) * g(v) to keep the denominator separable
        fu, fv, c = _split_separable(self.num)
        if fu is None:
            raise NonSeparableDenominator(f"1/({self}) needs a mixed-variable denominator")
        num = bipoly_times_upoly(bipoly_from_upoly(self.den_u, 0), self.den_v, 1)
        return RatFunc(bipoly_scale(num, 1 / c), fu, fv)

    def __truediv__(self, other) -> "RatFunc":
        other = _coerce(other)
        if not other.num:
            raise DivisionByZero("division by zero")
        return self * other.inverse()

    def __rtruediv__(self, other) -> "RatFunc":
        return _coerce(other) / self

    def __pow__(self, k: int) -> "RatFunc":
        if k < 0:
            return self.inverse() ** (-k)
        out = RatFunc.const(1)
        for _ in range(k):
            out = out * self
        return out

    # -- calculus / evaluation ----------------------------------------------

    def derive(self, var: str = "u") -> "RatFunc":
        """Formal partial derivative (quotient rule)."""
        idx = 0 if var == "u" else 1
        den = self.den_u if idx == 0 else self.den_v
        dnum = bipoly_deriv(self.num, idx)
        if den == ONE_POLY:
            if self.is_polynomial():
                return RatFunc._raw(dnum, ONE_POLY, ONE_POLY)
            # the other denominator may now cancel
            return RatFunc(dnum, self.den_u, self.den_v)
        dden = upoly_deriv(den)
        num = bipoly_add(bipoly_times_upoly(dnum, den, idx),
                         bipoly_times_upoly(self.num, dden, idx), -1)
        sq = upoly_mul(den, den)
        if idx == 0:
            return RatFunc(num, sq, self.den_v)
        return RatFunc(num, self.den_u, sq)

    def evaluate(self, at_u: Optional[Scalar] = None, at_v: Optional[Scalar] = None) -> "RatFunc":
        num, den_u, den_v = self.num, self.den_u, self.den_v
        scale = _ONE
        if at_u is not None:
            x = as_rat(at_u)
            d = upoly_eval(den_u, x)
            if d == 0:
                raise PoleAtPoint(f"u = {x} is a pole of {self}")
            scale /= d
            den_u = ONE_POLY
            new: BiPoly = {}
            for (i, j), c in num.items():
                new[(0, j)] = new.get((0, j), _ZERO) + c * x ** i
            num = {k: c for k, c in new.items() if c}
        if at_v is not None:
            y = as_rat(at_v)
            d = upoly_eval(den_v, y)
            if d == 0:
                raise PoleAtPoint(f"v = {y} is a pole of {self}")
            scale /= d
            den_v = ONE_POLY
            new = {}
            for (i, j), c in num.items():
                new[(i, 0)] = new.get((i, 0), _ZERO) + c * y ** j
            num = {k: c for k, c in new.items() if c}
        return RatFunc(bipoly_scale(num, scale), den_u, den_v)

    # -- polynomial views -----------------------------------------------------

    def u_coefficients(self) -> Dict[int, Fraction]:
        """``{deg_u: coeff}`` for a v-free polynomial."""
        if not self.is_polynomial() or self.depends_on("v"):
            raise ValueError(f"{self} is not a polynomial in u alone")
        return {i: c for (i, _), c in self.num.items()}

    # -- text ------------------------------------------------------------------

    def __str__(self) -> str:
        num = format_bipoly(self.num)
        if self.is_polynomial():
            return num
        return f"({num})/({format_bipoly(self.den)})"

    def __repr__(self) -> str:
        return f"RatFunc({self})"


def _coerce(x) -> RatFunc:
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, (int, Fraction)):
        return RatFunc.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a rational function")


def _split_separable(num: BiPoly):
    """Write ``num = c * f(u) * g(v)`` with f, g monic, or return (None, None, None)."""
    su = bipoly_slices(num, 0)  # deg_v -> poly in u
    j0 = min(su)
    fu = upoly_monic(su[j0])
    gv_coeffs = {}
    for j, s in su.items():
        q, r = upoly_divmod(s, fu)
        if r or len(q) != 1:
            return None, None, None
        gv_coeffs[j] = q[0]
    gv = _trim(gv_coeffs.get(j, _ZERO) for j in range(max(gv_coeffs) + 1))
    c = gv[-1]
    return fu, upoly_monic(gv), c


def rf_arith(a: RatFunc, b: RatFunc, op: str) -> RatFunc:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def rf_derive(a: RatFunc, var: str) -> RatFunc:
    return a.derive(var)


def rf_eval(a: RatFunc, at_u: Optional[Scalar] = None, at_v: Optional[Scalar] = None) -> RatFunc:
    return a.evaluate(at_u, at_v)


def format_rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_bipoly(p: BiPoly) -> str:
    if not p:
        return "0"
    parts = []
    for k in sorted(p, key=bipoly_order_key):
        c = p[k]
        mono = []
        if k[0]:
            mono.append("u" if k[0] == 1 else f"u^{k[0]}")
        if k[1]:
            mono.append("v" if k[1] == 1 else f"v^{k[1]}")
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if mono and mag == 1:
            body = "*".join(mono)
        else:
            body = "*".join([format_rat(mag)] + mono)
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def prod_linear(roots: Iterable[Scalar], power: int = 1) -> UPoly:
    """``prod (t - r)^power`` over the given roots."""
    out = ONE_POLY
    for r in roots:
        out = upoly_mul(out, upoly_pow(linear(r), power))
    return out
