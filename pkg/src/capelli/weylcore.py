"""Normally ordered Weyl algebra over ``Q(u) (x) Q(v)``.

Generators are ``u, v`` (absorbed into coefficients), ``x[i,j]``,
``p[i,j]`` for ``1 <= i <= M``, ``1 <= j <= N``, and the momenta ``pu, pv``.
The only nonzero commutators are ``[pu, u] = [pv, v] = [p[i,j], x[i,j]] = h``.

Every :class:`WeylElement` is stored in normal form: a map from a monomial
key to a nonzero :class:`~capelli.exactarith.RatFunc` coefficient, where a
key ``(x exponents..., p exponents..., pu, pv)`` means
``coeff * x^alpha * p^beta * pu^j * pv^k`` in exactly that factor order.

Text format (see README for the grammar)::

    (3/2)/(u - 2)*x[1,1]*p[1,2]*pu^2 + (-1)
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from .exactarith import RatFunc, Scalar, as_rat

Key = Tuple[int, ...]


class SignatureMismatch(ValueError):
    pass


class DependsOnV(ValueError):
    pass


class NotPolynomialInU(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraSignature:
    """Shape ``M x N`` of the x/p block and the deformation parameter ``h``.

    ``xp_sign`` multiplies the ``[p[i,j], x[i,j]]`` commutator.  It is +1 for
    the real algebra; -1 builds a deliberately broken engine used as a
    negative control.
    """

    M: int
    N: int
    h: Fraction
    xp_sign: int = 1

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be positive")
        object.__setattr__(self, "h", as_rat(self.h))

    @property
    def nvars(self) -> int:
        return self.M * self.N

    @property
    def key_len(self) -> int:
        return 2 * self.M * self.N + 2

    def _idx(self, i: int, j: int) -> int:
        if not (1 <= i <= self.M and 1 <= j <= self.N):
            raise IndexError(f"index ({i},{j}) outside {self.M}x{self.N}")
        return (i - 1) * self.N + (j - 1)

    def unit_key(self) -> Key:
        return (0,) * self.key_len

    # generators -----------------------------------------------------------

    def zero(self) -> "WeylElement":
        return WeylElement(self, {})

    def one(self) -> "WeylElement":
        return self.scalar(1)

    def scalar(self, c) -> "WeylElement":
        c = c if isinstance(c, RatFunc) else RatFunc.const(c)
        return WeylElement(self, {self.unit_key(): c} if c else {})

    def u(self) -> "WeylElement":
        return self.scalar(RatFunc.u())

    def v(self) -> "WeylElement":
        return self.scalar(RatFunc.v())

    def _gen(self, pos: int) -> "WeylElement":
        key = [0] * self.key_len
        key[pos] = 1
        return WeylElement(self, {tuple(key): RatFunc.const(1)})

    def x(self, i: int, j: int) -> "WeylElement":
        return self._gen(self._idx(i, j))

    def p(self, i: int, j: int) -> "WeylElement":
        return self._gen(self.nvars + self._idx(i, j))

    def pu(self) -> "WeylElement":
        return self._gen(2 * self.nvars)

    def pv(self) -> "WeylElement":
        return self._gen(2 * self.nvars + 1)

    def with_h(self, h) -> "AlgebraSignature":
        return AlgebraSignature(self.M, self.N, as_rat(h), self.xp_sign)


def _add_into(acc: Dict[Key, RatFunc], key: Key, c: RatFunc) -> None:
    old = acc.get(key)
    if old is None:
        if c:
            acc[key] = c
        return
    s = old + c
    if s:
        acc[key] = s
    else:
        del acc[key]


class WeylElement:
    """Immutable element of the normally ordered Weyl algebra."""

    __slots__ = ("sig", "terms")

    def __init__(self, sig: AlgebraSignature, terms: Mapping[Key, RatFunc]):
        self.sig = sig
        self.terms: Dict[Key, RatFunc] = {k: c for k, c in terms.items() if c}

    # -- basics ----------------------------------------------------------------

    def _check(self, other: "WeylElement") -> None:
        if self.sig != other.sig:
            raise SignatureMismatch(f"{self.sig} vs {other.sig}")

    def _lift(self, other) -> "WeylElement":
        if isinstance(other, WeylElement):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, RatFunc)):
            return self.sig.scalar(other)
        raise TypeError(f"cannot combine WeylElement with {type(other).__name__}")

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def items(self) -> Iterator[Tuple[Key, RatFunc]]:
        """Terms in canonical order."""
        for k in sorted(self.terms):
            yield k, self.terms[k]

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylElement):
            if isinstance(other, (int, Fraction, RatFunc)):
                return self.terms == self.sig.scalar(other).terms
            return NotImplemented
        self._check(other)
        return self.terms == other.terms

    __hash__ = None

    def __add__(self, other) -> "WeylElement":
        other = self._lift(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            _add_into(acc, k, c)
        return WeylElement(self.sig, acc)

    __radd__ = __add__

    def __neg__(self) -> "WeylElement":
        return WeylElement(self.sig, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "WeylElement":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "WeylElement":
        return self._lift(other) - self

    def scale(self, c) -> "WeylElement":
        """Left multiplication by a coefficient (no reordering needed)."""
        return WeylElement(self.sig, {k: c * coef for k, coef in self.terms.items()})

    def __mul__(self, other) -> "WeylElement":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return no_multiply(self, self._lift(other))

    def __rmul__(self, other) -> "WeylElement":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return no_multiply(self._lift(other), self)

    def __truediv__(self, other) -> "WeylElement":
        if isinstance(other, WeylElement):
            self._check(other)
            if set(other.terms) - {self.sig.unit_key()}:
                raise ValueError("can only divide by a coefficient")
            other = other.terms.get(self.sig.unit_key(), RatFunc.const(0))
        inv = RatFunc.const(1) / (other if isinstance(other, RatFunc) else RatFunc.const(as_rat(other)))
        return self * self.sig.scalar(inv)

    def __pow__(self, k: int) -> "WeylElement":
        if k < 0:
            if set(self.terms) - {self.sig.unit_key()}:
                raise ValueError("negative powers only of coefficients")
            return self.sig.scalar(self.coefficient() ** k)
        out = self.sig.one()
        for _ in range(k):
            out = out * self
        return out

    def coefficient(self, key: Optional[Key] = None) -> RatFunc:
        key = self.sig.unit_key() if key is None else key
        return self.terms.get(key, RatFunc.const(0))

    # -- structure queries -----------------------------------------------------

    def degree(self, which: str) -> int:
        """Maximum exponent of ``pu``, ``pv`` or polynomial degree in ``u``."""
        if not self.terms:
            return 0
        n = self.sig.nvars
        if which == "pu":
            return max(k[2 * n] for k in self.terms)
        if which == "pv":
            return max(k[2 * n + 1] for k in self.terms)
        if which == "u":
            return max(i for c in self.terms.values() for (i, _) in c.num)
        raise ValueError(which)

    def is_polynomial(self) -> bool:
        return all(c.is_polynomial() for c in self.terms.values())

    def __str__(self) -> str:
        return serialize(self)

    def __repr__(self) -> str:
        return f"WeylElement({serialize(self)})"


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def _xp_factor(b: int, a: int, k: int, hk: Fraction) -> Fraction:
    # p^b x^a = sum_k C(b,k) C(a,k) k! h^k x^(a-k) p^(b-k)
    return comb(b, k) * comb(a, k) * factorial(k) * hk


def no_multiply(a: WeylElement, b: WeylElement) -> WeylElement:
    """Product of two normally ordered elements, returned in normal form."""
    a._check(b)
    sig = a.sig
    n = sig.nvars
    h = sig.h
    hx = h * sig.xp_sign
    pu_pos, pv_pos = 2 * n, 2 * n + 1
    acc: Dict[Key, RatFunc] = {}
    deriv_cache: Dict[Tuple[Key, int, int], RatFunc] = {}

    def dcoef(k2: Key, c2: RatFunc, r: int, s: int) -> RatFunc:
        ck = (k2, r, s)
        got = deriv_cache.get(ck)
        if got is None:
            got = c2
            for _ in range(r):
                got = got.derive("u")
            for _ in range(s):
                got = got.derive("v")
            deriv_cache[ck] = got
        return got

    for k1, c1 in a.terms.items():
        j1, l1 = k1[pu_pos], k1[pv_pos]
        p1 = k1[n:2 * n]
        for k2, c2 in b.terms.items():
            x2 = k2[:n]
            # coefficient part: pu^j1 pv^l1 * c2 = sum C(j1,r)C(l1,s) h^(r+s) d^r_u d^s_v c2 pu^(j1-r) pv^(l1-s)
            if h == 0:
                coef_moves = [(0, 0, c2)]
            else:
                coef_moves = []
                ru = j1 if c2.depends_on("u") else 0
                sv = l1 if c2.depends_on("v") else 0
                for r in range(ru + 1):
                    for s in range(sv + 1):
                        d = dcoef(k2, c2, r, s)
                        if d:
                            coef_moves.append((r, s, d * (comb(j1, r) * comb(l1, s) * h ** (r + s))))
            # x/p part: contraction choices per overlapping variable
            overlap = [i for i in range(n) if p1[i] and x2[i]]
            if hx == 0 or not overlap:
                xp_moves = [((), Fraction(1))]
            else:
                ranges = [range(min(p1[i], x2[i]) + 1) for i in overlap]
                xp_moves = []
                for ks in itertools.product(*ranges):
                    w = Fraction(1)
                    for i, kk in zip(overlap, ks):
                        if kk:
                            w *= _xp_factor(p1[i], x2[i], kk, hx ** kk)
                    xp_moves.append((ks, w))
            base = [k1[i] + k2[i] for i in range(2 * n + 2)]
            for ks, w in xp_moves:
                key = list(base)
                for i, kk in zip(overlap, ks):
                    key[i] -= kk
                    key[n + i] -= kk
                for r, s, d in coef_moves:
                    kk = list(key)
                    kk[pu_pos] -= r
                    kk[pv_pos] -= s
                    coeff = c1 * d
                    if w != 1:
                        coeff = coeff * w
                    _add_into(acc, tuple(kk), coeff)
    return WeylElement(sig, acc)


def commutator(a: WeylElement, b: WeylElement) -> WeylElement:
    return no_multiply(a, b) - no_multiply(b, a)


def we_equal(a: WeylElement, b: WeylElement) -> bool:
    a._check(b)
    return a.terms == b.terms


# ---------------------------------------------------------------------------
# linear maps
# ---------------------------------------------------------------------------

def e_map(a: WeylElement) -> WeylElement:
    """Replace trailing ``pu^j pv^k`` by the coefficient ``v^j u^k``."""
    n = a.sig.nvars
    acc: Dict[Key, RatFunc] = {}
    for k, c in a.terms.items():
        j, l = k[2 * n], k[2 * n + 1]
        if j or l:
            c = c * RatFunc.monomial(l, j)
            k = k[:2 * n] + (0, 0)
        _add_into(acc, k, c)
    return WeylElement(a.sig, acc)


def alpha_s(a: WeylElement, s: Scalar) -> WeylElement:
    """Linear map fixing pu-free monomials with ``alpha(a u pu) = s alpha(a)``.

    On a normal monomial ``f(u) X pu^b`` it returns
    ``f(u) u^-b (s)(s-h)...(s-(b-1)h) X``.
    """
    s = as_rat(s)
    sig = a.sig
    n = sig.nvars
    acc: Dict[Key, RatFunc] = {}
    for k, c in a.terms.items():
        if k[2 * n + 1] or c.depends_on("v"):
            raise DependsOnV("alpha_s is defined on v-free, pv-free elements")
        b = k[2 * n]
        if b:
            falling = Fraction(1)
            for t in range(b):
                falling *= s - t * sig.h
            if not falling:
                continue
            c = c * RatFunc.inv_upoly((0,) * b + (1,)) * falling
            k = k[:2 * n] + (0, 0)
        _add_into(acc, k, c)
    return WeylElement(sig, acc)


def strip_coeff_grid(a: WeylElement, var: str = "u") -> Dict[Tuple[int, int], WeylElement]:
    """Split a polynomial-in-``var`` element into pure x/p buckets.

    Keys are ``(degree of var in the coefficient, momentum exponent)``; with
    ``var="v"`` the roles of ``(u, pu)`` are played by ``(v, pv)``.
    """
    sig = a.sig
    n = sig.nvars
    other = "v" if var == "u" else "u"
    mpos, opos = (2 * n, 2 * n + 1) if var == "u" else (2 * n + 1, 2 * n)
    vidx = 0 if var == "u" else 1
    out: Dict[Tuple[int, int], Dict[Key, RatFunc]] = {}
    for k, c in a.terms.items():
        if not c.is_polynomial():
            raise NotPolynomialInU(f"coefficient {c} has a denominator")
        if c.depends_on(other) or k[opos]:
            raise NotPolynomialInU(f"element depends on {other}")
        base = k[:2 * n] + (0, 0)
        for e, coef in c.num.items():
            bucket = out.setdefault((e[vidx], k[mpos]), {})
            _add_into(bucket, base, RatFunc.const(coef))
    return {key: WeylElement(sig, t) for key, t in sorted(out.items()) if t}


def swap_roles(a: WeylElement, target: AlgebraSignature) -> WeylElement:
    """Transpose x and p blocks and exchange ``(u, pu) <-> (v, pv)``.

    ``a`` lives on an ``M x N`` signature, ``target`` must be ``N x M``.
    """
    src = a.sig
    if (target.M, target.N) != (src.N, src.M):
        raise SignatureMismatch("target must have transposed shape")
    n = src.nvars
    perm = []
    for i in range(1, target.M + 1):
        for j in range(1, target.N + 1):
            perm.append(src._idx(j, i))
    acc: Dict[Key, RatFunc] = {}
    for k, c in a.terms.items():
        xs = tuple(k[q] for q in perm)
        ps = tuple(k[n + q] for q in perm)
        nk = xs + ps + (k[2 * n + 1], k[2 * n])
        swapped = RatFunc(
            {(j, i): v for (i, j), v in c.num.items()}, c.den_v, c.den_u, reduced=True)
        _add_into(acc, nk, swapped)
    return WeylElement(target, acc)


def with_signature(a: WeylElement, sig: AlgebraSignature) -> WeylElement:
    """Reinterpret the normal-form term map of ``a`` under another ``h``."""
    if (sig.M, sig.N) != (a.sig.M, a.sig.N):
        raise SignatureMismatch("shape differs")
    return WeylElement(sig, a.terms)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def monomial_str(sig: AlgebraSignature, key: Key) -> str:
    n = sig.nvars
    parts = []
    for block, name in ((0, "x"), (n, "p")):
        for q in range(n):
            e = key[block + q]
            if e:
                i, j = divmod(q, sig.N)
                g = f"{name}[{i + 1},{j + 1}]"
                parts.append(g if e == 1 else f"{g}^{e}")
    for pos, name in ((2 * n, "pu"), (2 * n + 1, "pv")):
        e = key[pos]
        if e:
            parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def term_str(sig: AlgebraSignature, key: Key, c: RatFunc) -> str:
    if c.is_polynomial():
        head = f"({c})"
    else:
        head = str(c)
    mono = monomial_str(sig, key)
    return f"{head}*{mono}" if mono else head


def serialize(a: WeylElement) -> str:
    if not a.terms:
        return "0"
    return " + ".join(term_str(a.sig, k, c) for k, c in a.items())


_TOKEN = re.compile(r"\s*(?:(\d+)|(x|p)\[(\d+),(\d+)\]|(pu|pv|u|v)|(.))")


class ParseError(ValueError):
    pass


class _Parser:
    def __init__(self, sig: AlgebraSignature, text: str):
        self.sig = sig
        self.toks: List[Tuple[str, object]] = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"bad input at {pos}: {text[pos:pos + 10]!r}")
            pos = m.end()
            if m.group(1):
                self.toks.append(("num", int(m.group(1))))
            elif m.group(2):
                self.toks.append(("gen", (m.group(2), int(m.group(3)), int(m.group(4)))))
            elif m.group(5):
                self.toks.append(("gen", (m.group(5),)))
            elif m.group(6).strip():
                self.toks.append(("op", m.group(6)))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, op):
        t = self.take()
        if t != ("op", op):
            raise ParseError(f"expected {op!r}, got {t}")

    def expr(self) -> WeylElement:
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("op", "+"):
            self.take()
        out = self.term()
        if sign < 0:
            out = -out
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> WeylElement:
        out = self.power()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.power()
            out = out * rhs if op == "*" else out / rhs
        return out

    def power(self) -> WeylElement:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            kind, val = self.take()
            if kind != "num":
                raise ParseError("exponent must be an integer")
            try:
                return base ** (sign * val)
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(str(exc)) from None
        return base

    def atom(self) -> WeylElement:
        kind, val = self.take()
        sig = self.sig
        if kind == "num":
            return sig.scalar(val)
        if kind == "gen":
            name = val[0]
            try:
                if name == "x":
                    return sig.x(val[1], val[2])
                if name == "p":
                    return sig.p(val[1], val[2])
            except IndexError as exc:
                raise ParseError(str(exc)) from None
            return {"u": sig.u, "v": sig.v, "pu": sig.pu, "pv": sig.pv}[name]()
        if (kind, val) == ("op", "("):
            inner = self.expr()
            self.expect(")")
            return inner
        if (kind, val) == ("op", "-"):
            return -self.power()
        raise ParseError(f"unexpected token {val!r}")


def parse(sig: AlgebraSignature, text: str) -> WeylElement:
    """Parse the text format; products are evaluated in the algebra, so any
    factor order is accepted and the result is normal ordered."""
    p = _Parser(sig, text)
    if not p.toks:
        raise ParseError("empty input")
    out = p.expr()
    if p.peek()[0] != "end":
        raise ParseError(f"trailing input at token {p.i}")
    return out
