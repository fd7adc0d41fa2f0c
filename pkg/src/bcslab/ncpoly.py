"""Non-commutative polynomials over the Gaussian rationals.

A polynomial is a finite map from words (tuples of variable names) to
exact coefficients.  Real coefficients are plain :class:`fractions.Fraction`
values; a coefficient with a non-zero imaginary part is a
:class:`GaussianRational`.  Arithmetic between the two is closed and always
normalises back to ``Fraction`` when the imaginary part cancels.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

Word = Tuple[str, ...]


class GaussianRational:
    """``re + im*i`` with exact rational parts and ``im != 0``.

    Use :func:`gaussian` to build values; it returns a ``Fraction`` when the
    imaginary part is zero so that real arithmetic stays on the fast path.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: Fraction, im: Fraction):
        self.re = re
        self.im = im

    @staticmethod
    def _parts(other):
        if isinstance(other, GaussianRational):
            return other.re, other.im
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gaussian(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gaussian(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gaussian(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = p
        return gaussian(self.re * a - self.im * b, self.re * b + self.im * a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = p
        den = a * a + b * b
        if den == 0:
            raise ZeroDivisionError("division by zero")
        return gaussian((self.re * a + self.im * b) / den, (self.im * a - self.re * b) / den)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussianRational(p[0], p[1]) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return True

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"


Coeff = Union[Fraction, GaussianRational]

I_UNIT = GaussianRational(Fraction(0), Fraction(1))


def gaussian(re, im=0) -> Coeff:
    re, im = Fraction(re), Fraction(im)
    if im == 0:
        return re
    return GaussianRational(re, im)


def as_coeff(c) -> Coeff:
    if isinstance(c, GaussianRational):
        return c
    if isinstance(c, complex):
        return gaussian(Fraction(c.real), Fraction(c.imag))
    return Fraction(c)


def conj(c: Coeff) -> Coeff:
    if isinstance(c, GaussianRational):
        return c.conjugate()
    return c


def coeff_parts(c: Coeff) -> Tuple[Fraction, Fraction]:
    if isinstance(c, GaussianRational):
        return c.re, c.im
    return Fraction(c), Fraction(0)


def format_coeff(c: Coeff) -> str:
    re_, im = coeff_parts(c)
    sign = "-" if im < 0 else "+"
    return f"({re_}{sign}{abs(im)}i)"


_COEFF_RE = re.compile(r"\(\s*([-+]?\d+(?:/\d+)?)\s*([-+])\s*(\d+(?:/\d+)?)i\s*\)")


def parse_coeff(text: str) -> Coeff:
    m = _COEFF_RE.fullmatch(text.strip())
    if not m:
        raise ValueError(f"bad coefficient {text!r}")
    im = Fraction(m.group(3))
    return gaussian(Fraction(m.group(1)), -im if m.group(2) == "-" else im)


class NcPoly:
    """Element of the free algebra on named generators.

    Instances are treated as immutable; every operation returns a new
    polynomial.  Zero coefficients are never stored and the empty word is
    the unit.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Word, object] | None = None):
        clean: Dict[Word, Coeff] = {}
        if terms:
            for w, c in terms.items():
                c = as_coeff(c)
                if c != 0:
                    clean[tuple(w)] = c
        self._terms = clean

    @classmethod
    def _raw(cls, terms: Dict[Word, Coeff]) -> "NcPoly":
        p = cls.__new__(cls)
        p._terms = terms
        return p

    @classmethod
    def var(cls, name: str) -> "NcPoly":
        return cls._raw({(name,): Fraction(1)})

    @classmethod
    def const(cls, c) -> "NcPoly":
        c = as_coeff(c)
        return cls._raw({(): c} if c != 0 else {})

    @classmethod
    def word(cls, *names: str, coeff=1) -> "NcPoly":
        return cls({tuple(names): coeff})

    @property
    def terms(self) -> Dict[Word, Coeff]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=-1)

    def variables(self) -> set:
        return {v for w in self._terms for v in w}

    @staticmethod
    def _coerce(other) -> "NcPoly":
        if isinstance(other, NcPoly):
            return other
        return NcPoly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            s = out.get(w, 0) + c
            if s == 0:
                out.pop(w, None)
            else:
                out[w] = s
        return NcPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return NcPoly._raw({w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, NcPoly):
            c = as_coeff(other)
            if c == 0:
                return NcPoly()
            return NcPoly._raw({w: v * c for w, v in self._terms.items()})
        out: Dict[Word, Coeff] = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                w = w1 + w2
                s = out.get(w, 0) + c1 * c2
                if s == 0:
                    out.pop(w, None)
                else:
                    out[w] = s
        return NcPoly._raw(out)

    def __rmul__(self, other):
        c = as_coeff(other)
        if c == 0:
            return NcPoly()
        return NcPoly._raw({w: c * v for w, v in self._terms.items()})

    def __pow__(self, k: int):
        out = NcPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, NcPoly):
            other = self._coerce(other)
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def involution(self) -> "NcPoly":
        """Reverse every word and conjugate every coefficient."""
        return NcPoly._raw({w[::-1]: conj(c) for w, c in self._terms.items()})

    def is_self_adjoint(self) -> bool:
        return self.involution() == self

    def sorted_terms(self, order: Mapping[str, int] | None = None):
        if order is None:
            key = lambda wc: (len(wc[0]), wc[0])
        else:
            key = lambda wc: (len(wc[0]), tuple(order[v] for v in wc[0]))
        return sorted(self._terms.items(), key=key, reverse=True)

    def to_text(self, order: Mapping[str, int] | None = None) -> str:
        """Canonical text ``(a+bi) w1.w2 + ...`` with terms in descending order."""
        if not self._terms:
            return "0"
        parts = []
        for w, c in self.sorted_terms(order):
            parts.append(f"{format_coeff(c)} {'.'.join(w) if w else '1'}")
        return " + ".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "NcPoly":
        text = text.strip()
        if text == "0":
            return cls()
        terms: Dict[Word, Coeff] = {}
        pos = 0
        term_re = re.compile(r"\s*(\([^)]*\))\s+([^\s+]+)\s*(\+|$)")
        while pos < len(text):
            m = term_re.match(text, pos)
            if not m:
                raise ValueError(f"cannot parse polynomial near {text[pos:pos + 20]!r}")
            c = parse_coeff(m.group(1))
            w = () if m.group(2) == "1" else tuple(m.group(2).split("."))
            terms[w] = terms.get(w, 0) + c
            pos = m.end()
        return cls(terms)

    def evaluate(self, ops: Mapping[str, "object"], identity):
        """Substitute numeric matrices for generators (numpy arrays)."""
        acc = 0 * identity
        for w, c in self._terms.items():
            m = identity
            for v in w:
                m = m @ ops[v]
            acc = acc + complex(c) * m
        return acc

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"NcPoly({self.to_text()!r})"


def commutator(a: NcPoly, b: NcPoly) -> NcPoly:
    return a * b - b * a


def anticommutator(a: NcPoly, b: NcPoly) -> NcPoly:
    return a * b + b * a


def variables(*names: str) -> Tuple[NcPoly, ...]:
    return tuple(NcPoly.var(n) for n in names)


def combine(polys: Iterable[Tuple[object, NcPoly]]) -> NcPoly:
    out = NcPoly()
    for c, p in polys:
        out = out + p * c
    return out
