"""Exact arithmetic for the ring tower used throughout the package.

Polynomials have rational coefficients (``gmpy2.mpq``) and live over an
ordered tuple of variable names.  Monomials are packed into a single Python
integer, one fixed-width bit field per variable, with the *last* variable in
the most significant field.  Integer comparison of packed monomials is then
the lexicographic order in which the last declared variable (``T`` by
convention) is the greatest, which is the order used for exact division and
for canonical printing.

A :class:`RingDescriptor` declares the variables together with a finite list
of inverted polynomials; a :class:`RingElement` is a numerator polynomial
together with one non-negative exponent per inverted generator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from gmpy2 import mpq

from .errors import (
    DescriptorMismatch,
    InapplicableSubstitution,
    NotDivisible,
    NotIntegral,
    ParseError,
)

Q = mpq

T_VAR = "T"

_WIDTH = 24
_FIELD = (1 << _WIDTH) - 1
_TOP = 1 << (_WIDTH - 1)


def _guard(k):
    g = 0
    for i in range(k):
        g |= _TOP << (_WIDTH * i)
    return g


def _pack(exps):
    m = 0
    for i, e in enumerate(exps):
        if e < 0 or e >= _TOP:
            raise ValueError("exponent out of range: %r" % (e,))
        m |= e << (_WIDTH * i)
    return m


def _unpack(m, k):
    return tuple((m >> (_WIDTH * i)) & _FIELD for i in range(k))


def _coeff(c):
    return Q(c)


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("gens", "terms", "_hash", "_guard")

    def __init__(self, gens, terms=None):
        self.gens = tuple(gens)
        self.terms = {}
        if terms:
            for m, c in terms.items():
                if c:
                    self.terms[m] = Q(c)
        self._hash = None
        self._guard = None

    @classmethod
    def _raw(cls, gens, terms):
        p = cls.__new__(cls)
        p.gens = gens
        p.terms = terms
        p._hash = None
        p._guard = None
        return p

    # constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, gens):
        return cls._raw(tuple(gens), {})

    @classmethod
    def const(cls, gens, c):
        c = _coeff(c)
        return cls._raw(tuple(gens), {0: c} if c else {})

    @classmethod
    def var(cls, gens, name, power=1):
        gens = tuple(gens)
        try:
            i = gens.index(name)
        except ValueError:
            raise DescriptorMismatch("unknown variable %r" % name) from None
        return cls._raw(gens, {power << (_WIDTH * i): Q(1)})

    @classmethod
    def from_exponents(cls, gens, mapping):
        """Build from ``{exponent tuple: coefficient}``."""
        gens = tuple(gens)
        terms = {}
        for exps, c in mapping.items():
            c = _coeff(c)
            if c:
                m = _pack(exps)
                terms[m] = terms.get(m, 0) + c
        return cls._raw(gens, {m: c for m, c in terms.items() if c})

    # predicates -------------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.terms.get(0, Q(0))

    def constant_term(self):
        return self.terms.get(0, Q(0))

    def _idx(self, name):
        try:
            return self.gens.index(name)
        except ValueError:
            return None

    def degree_in(self, name):
        i = self._idx(name)
        if i is None or not self.terms:
            return 0
        sh = _WIDTH * i
        return max((m >> sh) & _FIELD for m in self.terms)

    def involves(self, name):
        return self.degree_in(name) > 0

    def variables_used(self):
        used = set()
        for m in self.terms:
            for i, e in enumerate(_unpack(m, len(self.gens))):
                if e:
                    used.add(self.gens[i])
        return used

    def total_degree(self):
        k = len(self.gens)
        return max((sum(_unpack(m, k)) for m in self.terms), default=0)

    def items(self):
        """Yield ``(exponent tuple, coefficient)`` pairs."""
        k = len(self.gens)
        for m, c in self.terms.items():
            yield _unpack(m, k), c

    # arithmetic -------------------------------------------------------------

    def _check(self, other):
        if self.gens != other.gens:
            raise DescriptorMismatch(
                "polynomials over different variables: %r vs %r" % (self.gens, other.gens)
            )

    def _lift(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.gens, other)

    def __add__(self, other):
        other = self._lift(other)
        if not other.terms:
            return self
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = terms.get(m)
            if v is None:
                terms[m] = c
            else:
                v = v + c
                if v:
                    terms[m] = v
                else:
                    del terms[m]
        return Poly._raw(self.gens, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.gens, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _coeff(other)
            if not c:
                return Poly._raw(self.gens, {})
            return Poly._raw(self.gens, {m: v * c for m, v in self.terms.items()})
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (mb, cb), = b.items()
            return Poly._raw(self.gens, {m + mb: c * cb for m, c in a.items()})
        terms = {}
        get = terms.get
        for mb, cb in b.items():
            for ma, ca in a.items():
                m = ma + mb
                v = get(m)
                terms[m] = ca * cb if v is None else v + ca * cb
        return Poly._raw(self.gens, {m: c for m, c in terms.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(self.gens, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            if self.gens != other.gens:
                try:
                    other = other.regen(self.gens)
                except DescriptorMismatch:
                    return False
            return self.terms == other.terms
        if isinstance(other, (int, type(Q(0)))):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.gens, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # division ---------------------------------------------------------------

    def _guardmask(self):
        if self._guard is None:
            self._guard = _guard(len(self.gens))
        return self._guard

    def exact_div(self, q):
        """Return ``r`` with ``q * r == self``; raise :class:`NotDivisible` otherwise.

        Leading-term division in the lexicographic order with the last
        variable greatest.  Exactness does not depend on the order: when ``q``
        divides ``p`` the leading term of ``q`` divides that of every
        intermediate remainder.
        """
        self._check(q)
        if not q.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return self
        guard = self._guardmask()
        lm_q = max(q.terms)
        lc_q = q.terms[lm_q]
        if len(q.terms) == 1:
            out = {}
            for m, c in self.terms.items():
                d = (m | guard) - lm_q
                if d & guard != guard:
                    raise NotDivisible("monomial does not divide")
                out[d ^ guard] = c / lc_q
            return Poly._raw(self.gens, out)
        # cheap necessary conditions on the extreme monomials
        for m_p, m_q in ((max(self.terms), lm_q), (min(self.terms), min(q.terms))):
            if ((m_p | guard) - m_q) & guard != guard:
                raise NotDivisible("extreme monomial does not divide")
        rem = dict(self.terms)
        quot = {}
        q_items = [(m, c) for m, c in q.terms.items() if m != lm_q]
        while rem:
            m = max(rem)
            d = (m | guard) - lm_q
            if d & guard != guard:
                raise NotDivisible("leading monomial does not divide")
            t = d ^ guard
            c = rem.pop(m) / lc_q
            quot[t] = c
            for mq, cq in q_items:
                k = mq + t
                v = rem.get(k)
                if v is None:
                    rem[k] = -c * cq
                else:
                    v = v - c * cq
                    if v:
                        rem[k] = v
                    else:
                        del rem[k]
        return Poly._raw(self.gens, quot)

    def divides(self, p):
        try:
            p.exact_div(self)
        except NotDivisible:
            return False
        return True

    # structure --------------------------------------------------------------

    def regen(self, gens):
        """Re-express over another variable tuple (variables may be added or dropped if unused)."""
        gens = tuple(gens)
        if gens == self.gens:
            return self
        pos = []
        for name in self.gens:
            pos.append(gens.index(name) if name in gens else None)
        k = len(self.gens)
        terms = {}
        for m, c in self.terms.items():
            exps = _unpack(m, k)
            new = 0
            for i, e in enumerate(exps):
                if e:
                    if pos[i] is None:
                        raise DescriptorMismatch(
                            "variable %r is used but absent from %r" % (self.gens[i], gens)
                        )
                    new |= e << (_WIDTH * pos[i])
            terms[new] = c
        return Poly._raw(gens, terms)

    def coefficients_in(self, name):
        """Split as ``{k: coefficient}`` with ``self = sum coefficient * name**k``.

        Coefficients are polynomials over the same variables that do not
        involve ``name``.
        """
        i = self._idx(name)
        if i is None:
            return {0: self} if self.terms else {}
        sh = _WIDTH * i
        mask = _FIELD << sh
        out = {}
        for m, c in self.terms.items():
            k = (m & mask) >> sh
            out.setdefault(k, {})[m & ~mask] = c
        return {k: Poly._raw(self.gens, t) for k, t in out.items()}

    def subs(self, name, value):
        """Substitute the polynomial ``value`` (same variables) for ``name``."""
        parts = self.coefficients_in(name)
        if not parts:
            return self
        result = Poly.zero(self.gens)
        powers = {0: Poly.const(self.gens, 1)}
        for k in sorted(parts):
            if k not in powers:
                powers[k] = value ** k
            result = result + parts[k] * powers[k]
        return result

    def monic_in(self, name):
        """True when the leading coefficient in ``name`` is the constant 1."""
        d = self.degree_in(name)
        if d == 0:
            return False
        lead = self.coefficients_in(name)[d]
        return lead.is_constant() and lead.constant_value() == 1

    def normalized(self):
        """Scale so that the leading coefficient (lex order) is 1; returns (poly, scale)."""
        if not self.terms:
            return self, Q(1)
        lc = self.terms[max(self.terms)]
        return self * (1 / lc), lc

    # printing ---------------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        k = len(self.gens)
        out = []
        for m in sorted(self.terms, reverse=True):
            c = self.terms[m]
            exps = _unpack(m, k)
            mono = "*".join(
                name if e == 1 else "%s^%d" % (name, e)
                for name, e in zip(self.gens, exps)
                if e
            )
            neg = c < 0
            a = -c if neg else c
            if mono:
                body = mono if a == 1 else "%s*%s" % (_fmt(a), mono)
            else:
                body = _fmt(a)
            if not out:
                out.append("-" + body if neg else body)
            else:
                out.append(("- " if neg else "+ ") + body)
        return " ".join(out)

    def __repr__(self):
        return "Poly(%r, %s)" % (self.gens, self)


def _fmt(c):
    c = Q(c)
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)


def exact_divide(p, q):
    """Exact quotient ``p / q`` of polynomials, or :class:`NotDivisible`."""
    if not isinstance(q, Poly) or not isinstance(p, Poly):
        raise TypeError("exact_divide expects polynomials")
    if q.gens != p.gens:
        names = _merge_names(p.gens, q.gens)
        p, q = p.regen(names), q.regen(names)
    return p.exact_div(q)


def _merge_names(a, b):
    out = [v for v in a if v != T_VAR]
    out += [v for v in b if v not in out and v != T_VAR]
    if T_VAR in a or T_VAR in b:
        out.append(T_VAR)
    return tuple(out)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text):
    pos = 0
    tokens = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        pos = m.end()
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", int(num)))
        elif name is not None:
            tokens.append(("name", name))
        elif op is not None:
            if op.isspace():
                continue
            if op not in "+-*/^()":
                raise ParseError("unexpected character %r in %r" % (op, text))
            tokens.append(("op", op))
    return tokens


class _Parser:
    """Recursive descent over ``+ - * / ^ ( )``; values are (numerator, denominator) pairs."""

    def __init__(self, text, gens):
        self.text = text
        self.gens = tuple(gens)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self):
        if not self.tokens:
            raise ParseError("empty expression")
        val = self.expr()
        if self.i != len(self.tokens):
            raise ParseError("trailing input in %r" % self.text)
        return val

    def expr(self):
        n, d = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            n2, d2 = self.term()
            n = n * d2 + n2 * d if op == "+" else n * d2 - n2 * d
            d = d * d2
        return n, d

    def term(self):
        n, d = self.factor()
        while True:
            tok = self.peek()
            if tok == ("op", "*"):
                self.take()
                n2, d2 = self.factor()
                n, d = n * n2, d * d2
            elif tok == ("op", "/"):
                self.take()
                n2, d2 = self.factor()
                if n2.is_zero():
                    raise ParseError("division by zero in %r" % self.text)
                n, d = n * d2, d * n2
            else:
                return n, d

    def factor(self):
        tok = self.peek()
        if tok == ("op", "-"):
            self.take()
            n, d = self.factor()
            return -n, d
        if tok == ("op", "+"):
            self.take()
            return self.factor()
        return self.power()

    def power(self):
        n, d = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ParseError("exponent must be a non-negative integer in %r" % self.text)
            n, d = n ** val, d ** val
        return n, d

    def atom(self):
        kind, val = self.take()
        one = Poly.const(self.gens, 1)
        if kind == "num":
            return Poly.const(self.gens, val), one
        if kind == "name":
            if val not in self.gens:
                raise ParseError("unknown variable %r in %r" % (val, self.text))
            return Poly.var(self.gens, val), one
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ParseError("unbalanced parentheses in %r" % self.text)
            return inner
        raise ParseError("unexpected token %r in %r" % (val, self.text))


def parse_rational(text, gens):
    """Parse ``text`` into a (numerator, denominator) pair of polynomials."""
    return _Parser(str(text), gens).parse()


def parse_poly(text, gens):
    """Parse polynomial syntax such as ``"3/2*x^2*T - 1"``."""
    n, d = parse_rational(text, gens)
    if not d.is_constant():
        raise ParseError("not a polynomial: %r" % text)
    return n * (1 / d.constant_value())


# ---------------------------------------------------------------------------
# ring descriptors

_INTERN = {}


def _as_poly(g, variables):
    if isinstance(g, str):
        return parse_poly(g, variables)
    if isinstance(g, Poly):
        return g.regen(variables)
    return Poly.const(variables, g)


class RingDescriptor:
    """Variables plus the finite list of inverted polynomials.

    ``T`` (when present) is always the last variable.  Instances are
    immutable and interned, so equal descriptors are usually the same object.
    """

    __slots__ = ("variables", "inverted", "_key", "_powers")

    def __new__(cls, variables, inverted=()):
        variables = tuple(variables)
        inv = tuple(_as_poly(g, variables) for g in inverted)
        key = (variables, inv)
        hit = _INTERN.get(key)
        if hit is not None:
            return hit
        if len(set(variables)) != len(variables):
            raise DescriptorMismatch("duplicate variable names in %r" % (variables,))
        for v in variables:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", v):
                raise DescriptorMismatch("bad variable name %r" % v)
        if T_VAR in variables and variables[-1] != T_VAR:
            raise DescriptorMismatch("T must be the last variable")
        for g in inv:
            if g.is_constant():
                raise DescriptorMismatch("inverted elements must be non-constant polynomials")
        self = object.__new__(cls)
        self.variables = variables
        self.inverted = inv
        self._key = key
        self._powers = {}
        _INTERN[key] = self
        return self

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, RingDescriptor):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __reduce__(self):
        return (RingDescriptor, (self.variables, self.inverted))

    def __repr__(self):
        return "RingDescriptor(%r, [%s])" % (
            self.variables,
            ", ".join(str(g) for g in self.inverted),
        )

    # element constructors ---------------------------------------------------

    def zero(self):
        return RingElement(self, Poly.zero(self.variables), self._zero_exps())

    def one(self):
        return self.const(1)

    def const(self, c):
        return RingElement(self, Poly.const(self.variables, c), self._zero_exps())

    def var(self, name):
        return RingElement(self, Poly.var(self.variables, name), self._zero_exps())

    def poly(self, p):
        if isinstance(p, str):
            p = parse_poly(p, self.variables)
        return RingElement(self, p.regen(self.variables), self._zero_exps())

    def __call__(self, value):
        """Coerce a number, polynomial, string, or element into this ring."""
        if isinstance(value, RingElement):
            return value.to(self)
        if isinstance(value, Poly):
            return self.poly(value)
        if isinstance(value, str):
            return self.parse(value)
        return self.const(value)

    def parse(self, text):
        """Parse an element; denominators must be products of inverted generators."""
        num, den = parse_rational(text, self.variables)
        exps = list(self._zero_exps())
        for j, g in enumerate(self.inverted):
            while not den.is_constant():
                try:
                    den = den.exact_div(g)
                except NotDivisible:
                    break
                exps[j] += 1
        if not den.is_constant():
            raise ParseError("denominator of %r is not a product of inverted elements" % text)
        return RingElement(self, num * (1 / den.constant_value()), tuple(exps))

    def _zero_exps(self):
        return (0,) * len(self.inverted)

    def gen_power(self, j, k):
        key = (j, k)
        p = self._powers.get(key)
        if p is None:
            p = self.inverted[j] ** k
            self._powers[key] = p
        return p

    def denominator_poly(self, exps):
        d = Poly.const(self.variables, 1)
        for j, e in enumerate(exps):
            if e:
                d = d * self.gen_power(j, e)
        return d

    def find_generator(self, g):
        """Return ``(j, c)`` with ``g == c * inverted[j]``, or ``None``."""
        try:
            g = g.regen(self.variables)
        except DescriptorMismatch:
            return None
        gn, gc = g.normalized()
        for j, h in enumerate(self.inverted):
            hn, hc = h.normalized()
            if hn.terms == gn.terms:
                return j, gc / hc
        return None

    # derived descriptors ----------------------------------------------------

    def with_variables(self, names):
        """Add variables (inserted before ``T`` if present)."""
        new = [v for v in names if v not in self.variables]
        if not new:
            return self
        if self.variables and self.variables[-1] == T_VAR:
            vars_ = self.variables[:-1] + tuple(new) + (T_VAR,)
        else:
            vars_ = self.variables + tuple(new)
        return RingDescriptor(vars_, [g.regen(vars_) for g in self.inverted])

    def without_variable(self, name):
        vars_ = tuple(v for v in self.variables if v != name)
        return RingDescriptor(vars_, [g.regen(vars_) for g in self.inverted])

    def with_inverted(self, gens):
        inv = list(self.inverted)
        for g in gens:
            if isinstance(g, str):
                g = parse_poly(g, self.variables)
            g = g.regen(self.variables)
            if self.find_generator(g) is None and not g.is_constant():
                inv.append(g)
        return RingDescriptor(self.variables, inv)

    def without_inverted(self, gens=None):
        """Drop the listed inverted generators (all of them when ``gens`` is None)."""
        if gens is None:
            return RingDescriptor(self.variables, [])
        drop = set()
        for g in gens:
            if isinstance(g, str):
                g = parse_poly(g, self.variables)
            hit = self.find_generator(g)
            if hit is None:
                raise DescriptorMismatch("%s is not inverted in %r" % (g, self))
            drop.add(hit[0])
        return RingDescriptor(
            self.variables, [g for j, g in enumerate(self.inverted) if j not in drop]
        )

    def base(self):
        """The polynomial ring over the same variables (nothing inverted)."""
        return RingDescriptor(self.variables, [])

    def fresh_name(self, stem):
        name = stem
        k = 1
        while name in self.variables:
            name = "%s%d" % (stem, k)
            k += 1
        return name

    def to_json(self):
        return {"variables": list(self.variables), "inverted": [str(g) for g in self.inverted]}

    @classmethod
    def from_json(cls, data):
        try:
            return cls(data["variables"], data.get("inverted", []))
        except (KeyError, TypeError) as exc:
            raise ParseError("malformed ring descriptor: %s" % exc) from None


# ---------------------------------------------------------------------------
# ring elements


class RingElement:
    """``numerator / prod(inverted[j] ** exps[j])`` in the ring ``desc``.

    Construction cancels a generator power whenever the generator divides
    the numerator exactly.  Equality is decided by cross-multiplication.
    """

    __slots__ = ("desc", "num", "exps")

    def __init__(self, desc, num, exps=None, normalize=True):
        self.desc = desc
        if num.gens != desc.variables:
            num = num.regen(desc.variables)
        exps = tuple(exps) if exps is not None else desc._zero_exps()
        if len(exps) != len(desc.inverted):
            raise DescriptorMismatch("exponent vector does not match descriptor")
        if not num.terms:
            exps = desc._zero_exps()
        elif normalize and any(exps):
            num, exps = _cancel(desc, num, exps)
        self.num = num
        self.exps = exps

    # predicates -------------------------------------------------------------

    def is_zero(self):
        return not self.num.terms

    def is_polynomial(self):
        return not any(self.exps)

    def is_constant(self):
        return self.is_polynomial() and self.num.is_constant()

    def __bool__(self):
        return bool(self.num.terms)

    # arithmetic -------------------------------------------------------------

    def _other(self, y):
        if isinstance(y, RingElement):
            if y.desc is not self.desc and y.desc != self.desc:
                raise DescriptorMismatch("%r vs %r" % (self.desc, y.desc))
            return y
        if isinstance(y, Poly):
            return self.desc.poly(y)
        return self.desc.const(y)

    def __add__(self, y):
        y = self._other(y)
        if not y.num.terms:
            return self
        if not self.num.terms:
            return y
        if self.exps == y.exps:
            return RingElement(self.desc, self.num + y.num, self.exps)
        exps = tuple(max(a, b) for a, b in zip(self.exps, y.exps))
        d = self.desc
        na, nb = self.num, y.num
        for j, (e, a, b) in enumerate(zip(exps, self.exps, y.exps)):
            if e > a:
                na = na * d.gen_power(j, e - a)
            if e > b:
                nb = nb * d.gen_power(j, e - b)
        return RingElement(d, na + nb, exps)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.desc, -self.num, self.exps, normalize=False)

    def __sub__(self, y):
        return self + (-self._other(y))

    def __rsub__(self, y):
        return self._other(y) - self

    def __mul__(self, y):
        if not isinstance(y, (RingElement, Poly)):
            c = Q(y)
            return RingElement(self.desc, self.num * c, self.exps, normalize=False)
        y = self._other(y)
        if not self.num.terms or not y.num.terms:
            return self.desc.zero()
        exps = tuple(a + b for a, b in zip(self.exps, y.exps))
        return RingElement(self.desc, self.num * y.num, exps)

    __rmul__ = __mul__

    def __truediv__(self, y):
        if isinstance(y, RingElement):
            return self * y.inverse()
        return self * (1 / Q(y))

    def __rtruediv__(self, y):
        return self.inverse() * y

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.desc.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def inverse(self):
        """Inverse, when the numerator is a constant times inverted generators."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        d = self.desc
        num = self.num
        factors = list(d._zero_exps())
        for j, g in enumerate(d.inverted):
            while not num.is_constant():
                try:
                    num = num.exact_div(g)
                except NotDivisible:
                    break
                factors[j] += 1
        if not num.is_constant():
            raise NotIntegral("%s is not a unit in %r" % (self, d))
        c = num.constant_value()
        return RingElement(d, d.denominator_poly(self.exps) * (1 / c), factors)

    def __eq__(self, y):
        if isinstance(y, RingElement):
            if y.desc is not self.desc and y.desc != self.desc:
                return False
        elif isinstance(y, (int, Poly)) or isinstance(y, type(Q(0))):
            y = self._other(y)
        else:
            return NotImplemented
        if self.exps == y.exps:
            return self.num == y.num
        d = self.desc
        return self.num * d.denominator_poly(y.exps) == y.num * d.denominator_poly(self.exps)

    def __ne__(self, y):
        r = self.__eq__(y)
        return r if r is NotImplemented else not r

    __hash__ = None

    # conversions ------------------------------------------------------------

    def to(self, target):
        """Re-express in ``target``; raises :class:`NotIntegral` if a removed denominator does not cancel."""
        if target is self.desc or target == self.desc:
            return self
        try:
            num = self.num.regen(target.variables)
        except DescriptorMismatch:
            raise DescriptorMismatch(
                "%s uses variables absent from %r" % (self, target)
            ) from None
        exps = list(target._zero_exps())
        leftover = Poly.const(target.variables, 1)
        for j, e in enumerate(self.exps):
            if not e:
                continue
            g = self.desc.inverted[j]
            hit = target.find_generator(g)
            if hit is None:
                leftover = leftover * g.regen(target.variables) ** e
            else:
                k, c = hit
                exps[k] += e
                num = num * (1 / c ** e)
        if not leftover.is_constant():
            try:
                num = num.exact_div(leftover)
            except NotDivisible:
                raise NotIntegral("%s does not lie in %r" % (self, target)) from None
        else:
            num = num * (1 / leftover.constant_value())
        return RingElement(target, num, exps)

    def numerator(self):
        return self.num

    def denominator(self):
        return self.desc.denominator_poly(self.exps)

    def max_exponent(self):
        return max(self.exps, default=0)

    def involves(self, name):
        if self.num.involves(name):
            return True
        return any(e and self.desc.inverted[j].involves(name) for j, e in enumerate(self.exps))

    def __str__(self):
        if not any(self.exps):
            return str(self.num)
        den = "*".join(
            "(%s)" % g if e == 1 else "(%s)^%d" % (g, e)
            for g, e in zip(self.desc.inverted, self.exps)
            if e
        )
        return "(%s)/(%s)" % (self.num, den)

    def __repr__(self):
        return "RingElement(%s)" % self


def _cancel(desc, num, exps):
    exps = list(exps)
    for j, e in enumerate(exps):
        if not e:
            continue
        g = desc.inverted[j]
        while exps[j]:
            try:
                num = num.exact_div(g)
            except NotDivisible:
                break
            exps[j] -= 1
    return num, tuple(exps)


def ring_arith(x, y, op):
    """Exact ``add``/``sub``/``mul``/``neg`` on elements sharing a descriptor."""
    if op == "neg":
        return -x
    if not isinstance(y, RingElement) or (x.desc is not y.desc and x.desc != y.desc):
        raise DescriptorMismatch("operands live in different rings")
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError("unknown operation %r" % op)


def integrality_test(e):
    """Return the polynomial equal to ``e``, or raise :class:`NotIntegral`."""
    return e.to(e.desc.base()).num


# ---------------------------------------------------------------------------
# substitutions


def substitute_value(e, name, value, target):
    """Ring homomorphism sending ``name`` to ``value`` (an element of ``target``).

    Every other variable of ``e.desc`` must exist in ``target``.  Inverted
    generators are mapped and inverted in ``target``; a generator that maps to
    zero while carrying a positive exponent makes the substitution
    inapplicable.
    """
    if value.desc is not target and value.desc != target:
        value = value.to(target)

    def image(p):
        parts = p.coefficients_in(name)
        acc = target.zero()
        powers = {}
        for k in sorted(parts):
            coeff = parts[k]
            term = RingElement(target, coeff.regen(target.variables))
            if k:
                if k not in powers:
                    powers[k] = value ** k
                term = term * powers[k]
            acc = acc + term
        return acc

    result = image(e.num)
    for j, k in enumerate(e.exps):
        if not k:
            continue
        g = e.desc.inverted[j]
        if not g.involves(name):
            hit = target.find_generator(g)
            if hit is not None:
                jj, c = hit
                exps = list(target._zero_exps())
                exps[jj] = k
                one = Poly.const(target.variables, 1 / c ** k)
                result = result * RingElement(target, one, exps)
                continue
            gimg = RingElement(target, g.regen(target.variables))
        else:
            gimg = image(g)
        if gimg.is_zero():
            raise InapplicableSubstitution(
                "%s maps to zero under %s -> %s" % (g, name, value)
            )
        try:
            result = result * gimg.inverse() ** k
        except NotIntegral:
            raise InapplicableSubstitution(
                "image %s of %s is not invertible in %r" % (gimg, g, target)
            ) from None
    return result


@dataclass(frozen=True)
class Substitution:
    """One of the three substitutions used by the package.

    ``kind``:
      * ``"evaluate"`` sends ``var`` to ``payload`` (a polynomial string,
        number, or :class:`Poly` in the remaining variables and possibly new
        ones);
      * ``"scale"`` sends ``var`` to ``payload * var``;
      * ``"invert"`` sends ``var`` to ``1 / payload`` where ``payload`` is a
        fresh variable name; inverted generators ``h`` of degree ``m`` in
        ``var`` become ``payload**m * h(1/payload)``.
    """

    kind: str
    var: str = T_VAR
    payload: object = 0

    def _payload_poly(self, names):
        p = self.payload
        if isinstance(p, Poly):
            extra = [v for v in p.variables_used() if v not in names]
            return p, extra
        if isinstance(p, RingElement):
            if not p.is_polynomial():
                raise InapplicableSubstitution("substituted value must be a polynomial")
            return p.num, [v for v in p.num.variables_used() if v not in names]
        text = str(p)
        found = set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text))
        extra = sorted(v for v in found if v not in names)
        return text, extra

    def target(self, desc):
        """Descriptor receiving the image of ``desc``."""
        if self.var not in desc.variables:
            raise InapplicableSubstitution("%r is not a variable of %r" % (self.var, desc))
        if self.kind == "invert":
            fresh = str(self.payload)
            if fresh in desc.variables:
                raise InapplicableSubstitution("%r is not a fresh variable" % fresh)
            vars_ = tuple(fresh if v == self.var else v for v in desc.variables)
            inv = [Poly.var(vars_, fresh)]
            for g in desc.inverted:
                if g.involves(self.var):
                    star = _rename(reverse_in(g, self.var), self.var, fresh).regen(vars_)
                    if not star.is_constant():
                        inv.append(star)
                else:
                    inv.append(g.regen(vars_))
            return _dedupe(vars_, inv)
        if self.kind == "scale":
            _, extra = self._payload_poly(desc.variables)
            return desc.with_variables(extra)
        if self.kind == "evaluate":
            p, extra = self._payload_poly(desc.variables)
            vars_ = [v for v in desc.variables if v != self.var]
            if vars_ and vars_[-1] == T_VAR:
                vars_ = vars_[:-1] + list(extra) + [T_VAR]
            else:
                vars_ = vars_ + list(extra)
            if T_VAR in vars_ and vars_[-1] != T_VAR:
                vars_.remove(T_VAR)
                vars_.append(T_VAR)
            vars_ = tuple(vars_)
            full = tuple(dict.fromkeys(desc.variables + vars_))
            pv = p if isinstance(p, Poly) else parse_poly(p, full)
            pv = pv.regen(full)
            inv = []
            for g in desc.inverted:
                if g.involves(self.var):
                    gi = g.regen(full).subs(self.var, pv)
                    if gi.is_constant():
                        continue
                    inv.append(gi.regen(vars_))
                else:
                    inv.append(g.regen(vars_))
            return _dedupe(vars_, inv)
        raise ValueError("unknown substitution kind %r" % self.kind)

    def apply(self, e, target=None):
        desc = e.desc
        target = target or self.target(desc)
        if self.kind == "invert":
            fresh = str(self.payload)
            value = target.var(fresh).inverse()
            return substitute_value(e, self.var, value, target)
        p, _ = self._payload_poly(desc.variables)
        if not isinstance(p, Poly):
            p = parse_poly(p, target.variables)
        pe = RingElement(target, p.regen(target.variables))
        if self.kind == "scale":
            if any(k and desc.inverted[j].involves(self.var) for j, k in enumerate(e.exps)) and not pe.is_constant():
                raise InapplicableSubstitution(
                    "scaling %s by a non-constant inside an inverted element" % self.var
                )
            pe = pe * target.var(self.var)
        return substitute_value(e, self.var, pe, target)


def _dedupe(vars_, inv):
    out = []
    for g in inv:
        gn = g.normalized()[0]
        if all(h.normalized()[0].terms != gn.terms for h in out):
            out.append(g)
    return RingDescriptor(vars_, out)


def _rename(p, old, new):
    gens = tuple(new if v == old else v for v in p.gens)
    return Poly._raw(gens, dict(p.terms))


def reverse_in(p, name):
    """``name**deg * p(1/name)``: the reciprocal polynomial in one variable."""
    parts = p.coefficients_in(name)
    if not parts:
        return p
    m = max(parts)
    out = Poly.zero(p.gens)
    for k, c in parts.items():
        out = out + c * Poly.var(p.gens, name, m - k) if m - k else out + c
    return out


def substitute(e, s, target=None):
    """Apply the :class:`Substitution` ``s`` to the element ``e``."""
    return s.apply(e, target)
