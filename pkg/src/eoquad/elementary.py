"""Elementary orthogonal generators, words, and their algebra.

Tags:

* ``T1``..``T5`` -- the five coordinate transvections, parameters ``(i, j, lam)``
  with 1-based indices (``j`` unused for ``T1``/``T2``);
* ``EA``/``EB`` -- ``E_alpha``/``E_beta`` for a vector ``alpha(1)`` in ``A^n``
  (resp. ``beta(1)`` in the dual);
* ``CAB``/``CAA``/``CBB`` -- closed forms of the commutators
  ``[E_beta, E_alpha]``, ``[E_alpha2, E_alpha1]``, ``[E_beta2, E_beta1]``.

A word is evaluated as the ordered matrix product of its letters, so the
last letter acts first on a column vector.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DescriptorMismatch, VerificationError
from .quadspace import OrthMatrix, QuadSpace
from .rings import Q, Substitution, T_VAR

TRANSVECTIONS = ("T1", "T2", "T3", "T4", "T5")
VECTOR_TAGS = ("EA", "EB")
COMMUTATORS = ("CAB", "CAA", "CBB")
TAGS = TRANSVECTIONS + VECTOR_TAGS + COMMUTATORS


def _dot(u, v):
    acc = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        acc = acc + a * b
    return acc


@dataclass(frozen=True, eq=False)
class Generator:
    tag: str
    i: int = 0
    j: int = 0
    lam: object = None
    vecs: tuple = ()

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError("unknown generator tag %r" % self.tag)
        if self.tag in TRANSVECTIONS:
            if self.lam is None:
                raise ValueError("%s needs a parameter" % self.tag)
            if self.i < 1:
                raise ValueError("index out of range")
            if self.tag in ("T3", "T4", "T5") and (self.j < 1 or self.i == self.j):
                raise ValueError("%s needs distinct indices i != j" % self.tag)
        elif self.tag in VECTOR_TAGS:
            if len(self.vecs) != 1:
                raise ValueError("%s needs one vector" % self.tag)
        else:
            if len(self.vecs) != 2 or len(self.vecs[0]) != len(self.vecs[1]):
                raise ValueError("%s needs two vectors of equal length" % self.tag)
        elems = self.elements()
        if not elems:
            raise ValueError("%s needs a non-empty vector" % self.tag)
        if any(x.desc != elems[0].desc for x in elems):
            raise DescriptorMismatch("parameters of %s live over different rings" % self.tag)
        if self.tag in COMMUTATORS:
            if self.tag == "CAB":
                a, b = self.vecs
                if not _dot(b, a).is_zero():
                    raise ValueError("CAB needs beta*(alpha(1)) = 0")

    # constructors -------------------------------------------------------------

    @classmethod
    def transvection(cls, tag, i, lam, j=0):
        return cls(tag, i=i, j=j, lam=lam)

    @classmethod
    def alpha(cls, v):
        return cls("EA", vecs=(tuple(v),))

    @classmethod
    def beta(cls, v):
        return cls("EB", vecs=(tuple(v),))

    @classmethod
    def commutator(cls, tag, u, v):
        return cls(tag, vecs=(tuple(u), tuple(v)))

    # structure ----------------------------------------------------------------

    @property
    def desc(self):
        if self.lam is not None:
            return self.lam.desc
        return self.vecs[0][0].desc

    def elements(self):
        if self.lam is not None:
            return [self.lam]
        return [x for v in self.vecs for x in v]

    def map(self, fn):
        """Apply ``fn`` to every ring parameter."""
        if self.lam is not None:
            return Generator(self.tag, self.i, self.j, fn(self.lam))
        vecs = tuple(tuple(fn(x) for x in v) for v in self.vecs)
        return Generator(self.tag, self.i, self.j, None, vecs)

    def negated(self):
        """The inverse letter: every generator is a one-parameter subgroup in its first argument."""
        if self.lam is not None:
            return Generator(self.tag, self.i, self.j, -self.lam)
        first = tuple(-x for x in self.vecs[0])
        return Generator(self.tag, vecs=(first,) + self.vecs[1:])

    def check_rank(self, n):
        if self.tag in TRANSVECTIONS:
            if self.i > n or self.j > n:
                raise ValueError("index out of range for rank %d" % n)
        elif any(len(v) != n for v in self.vecs):
            raise ValueError("vector length does not match rank %d" % n)

    def __eq__(self, other):
        if not isinstance(other, Generator):
            return NotImplemented
        if (self.tag, self.i, self.j) != (other.tag, other.i, other.j):
            return False
        if (self.lam is None) != (other.lam is None):
            return False
        if self.lam is not None:
            return self.lam == other.lam
        return all(
            len(u) == len(v) and all(a == b for a, b in zip(u, v))
            for u, v in zip(self.vecs, other.vecs)
        )

    __hash__ = None

    def __repr__(self):
        if self.lam is not None:
            idx = "%d" % self.i if self.tag in ("T1", "T2") else "%d,%d" % (self.i, self.j)
            return "%s(%s; %s)" % (self.tag, idx, self.lam)
        return "%s(%s)" % (self.tag, "; ".join("[" + ", ".join(map(str, v)) + "]" for v in self.vecs))


# ---------------------------------------------------------------------------
# matrices


def _blank(n, desc):
    return [list(r) for r in OrthMatrix.identity(2 * n + 1, desc).rows]


def transvection_matrix(g, n):
    """Matrix of a coordinate transvection ``T1``..``T5`` on ``A^(2n+1)``."""
    if g.tag not in TRANSVECTIONS:
        raise ValueError("not a transvection: %s" % g.tag)
    g.check_rank(n)
    lam = g.lam
    desc = lam.desc
    m = _blank(n, desc)
    i, j, z = g.i - 1, g.j - 1, 2 * n
    if g.tag == "T1":
        m[i][n + i] = -lam * lam
        m[i][z] = lam * 2
        m[z][n + i] = -lam
    elif g.tag == "T2":
        m[n + i][i] = -lam * lam
        m[n + i][z] = lam * 2
        m[z][i] = -lam
    elif g.tag == "T3":
        m[i][j] = lam
        m[n + j][n + i] = -lam
    elif g.tag == "T4":
        m[i][n + j] = lam
        m[j][n + i] = -lam
    else:
        m[n + i][j] = lam
        m[n + j][i] = -lam
    return OrthMatrix(desc, m)


def e_alpha(v):
    """``E_alpha``: ``(p, f, z) -> (p - a f(a) + 2 a z, f, z - f(a))`` with ``a = alpha(1)``."""
    v = tuple(v)
    n = len(v)
    desc = v[0].desc
    m = _blank(n, desc)
    z = 2 * n
    for i in range(n):
        if v[i].is_zero():
            continue
        for k in range(n):
            if not v[k].is_zero():
                m[i][n + k] = m[i][n + k] - v[i] * v[k]
        m[i][z] = v[i] * 2
    for k in range(n):
        m[z][n + k] = -v[k]
    return OrthMatrix(desc, m)


def e_beta(v):
    """``E_beta``: ``(p, f, z) -> (p, f - b b(p) + 2 b z, z - b(p))`` with ``b = beta(1)``."""
    v = tuple(v)
    n = len(v)
    desc = v[0].desc
    m = _blank(n, desc)
    z = 2 * n
    for i in range(n):
        if v[i].is_zero():
            continue
        for k in range(n):
            if not v[k].is_zero():
                m[n + i][k] = m[n + i][k] - v[i] * v[k]
        m[n + i][z] = v[i] * 2
    for k in range(n):
        m[z][k] = -v[k]
    return OrthMatrix(desc, m)


def commutator_closed_form(g):
    """Closed-form matrix of a ``CAB``/``CAA``/``CBB`` letter."""
    if g.tag not in COMMUTATORS:
        raise ValueError("not a commutator tag: %s" % g.tag)
    u, v = g.vecs
    n = len(u)
    desc = u[0].desc
    m = _blank(n, desc)
    for i in range(n):
        for k in range(n):
            if g.tag == "CAB":
                # p + 2 a b(p),  f - 2 b f(a)
                if not (u[i].is_zero() or v[k].is_zero()):
                    m[i][k] = m[i][k] + u[i] * v[k] * 2
                if not (v[i].is_zero() or u[k].is_zero()):
                    m[n + i][n + k] = m[n + i][n + k] - v[i] * u[k] * 2
            elif g.tag == "CAA":
                # p - 2 a2 f(a1) + 2 a1 f(a2)
                m[i][n + k] = (u[i] * v[k] - v[i] * u[k]) * 2
            else:
                # f - 2 b2 b1(p) + 2 b1 b2(p)
                m[n + i][k] = (u[i] * v[k] - v[i] * u[k]) * 2
    return OrthMatrix(desc, m)


def generator_matrix(g, n=None):
    if n is None:
        n = len(g.vecs[0]) if g.vecs else None
        if n is None:
            raise ValueError("rank needed for a transvection")
    g.check_rank(n)
    if g.tag in TRANSVECTIONS:
        return transvection_matrix(g, n)
    if g.tag == "EA":
        return e_alpha(g.vecs[0])
    if g.tag == "EB":
        return e_beta(g.vecs[0])
    return commutator_closed_form(g)


def literal_commutator(g):
    """``[E_x, E_y] = E_x^-1 E_y^-1 E_x E_y`` computed by four matrix products."""
    u, v = g.vecs
    if g.tag == "CAB":
        x, y = e_beta(v), e_alpha(u)
        xi, yi = e_beta([-t for t in v]), e_alpha([-t for t in u])
    elif g.tag == "CAA":
        x, y = e_alpha(v), e_alpha(u)
        xi, yi = e_alpha([-t for t in v]), e_alpha([-t for t in u])
    elif g.tag == "CBB":
        x, y = e_beta(v), e_beta(u)
        xi, yi = e_beta([-t for t in v]), e_beta([-t for t in u])
    else:
        raise ValueError("not a commutator tag: %s" % g.tag)
    return xi @ yi @ x @ y


# ---------------------------------------------------------------------------
# words


class GeneratorWord:
    """Ordered product of letters ``(Generator, +-1)`` on a fixed :class:`QuadSpace`."""

    __slots__ = ("space", "letters")

    def __init__(self, space, letters=()):
        self.space = space
        out = []
        for g, e in letters:
            if e not in (1, -1):
                raise ValueError("exponent must be +1 or -1")
            if g.desc is not space.desc and g.desc != space.desc:
                raise DescriptorMismatch("letter %r is not over the word's ring" % (g,))
            g.check_rank(space.n)
            out.append((g, e))
        self.letters = tuple(out)

    @classmethod
    def of(cls, space, *gens):
        return cls(space, [(g, 1) for g in gens])

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __add__(self, other):
        if other.space != self.space:
            raise DescriptorMismatch("words over different spaces")
        return GeneratorWord(self.space, self.letters + other.letters)

    def inverse(self):
        return GeneratorWord(self.space, [(g, -e) for g, e in reversed(self.letters)])

    def map(self, fn, space=None):
        space = space or self.space
        return GeneratorWord(space, [(g.map(fn), e) for g, e in self.letters])

    def to(self, desc):
        if desc == self.space.desc:
            return self
        return self.map(lambda x: x.to(desc), self.space.over(desc))

    def substitute(self, sub, target=None):
        target = target or sub.target(self.space.desc)
        return self.map(lambda x: sub.apply(x, target), self.space.over(target))

    def reduced(self):
        """Cancel adjacent mutually inverse letters (``g^e g^-e``, or ``g`` next to its negation)."""
        out = []
        for g, e in self.letters:
            if out:
                h, f = out[-1]
                if (f == -e and h == g) or (f == e and h == g.negated()):
                    out.pop()
                    continue
            out.append((g, e))
        return GeneratorWord(self.space, out)

    def max_exponent(self):
        return max((x.max_exponent() for g, _ in self.letters for x in g.elements()), default=0)

    def is_polynomial(self):
        return all(x.is_polynomial() for g, _ in self.letters for x in g.elements())

    def __repr__(self):
        return "GeneratorWord(%s)" % ", ".join(
            repr(g) + ("^-1" if e < 0 else "") for g, e in self.letters
        )


def word_evaluate(w):
    """Ordered product of the letter matrices (``g^-1`` uses the negated letter)."""
    n, desc = w.space.n, w.space.desc
    m = OrthMatrix.identity(w.space.dim, desc)
    for g, e in w.letters:
        if g.desc != desc:
            raise DescriptorMismatch("mixed ambient rings in word")
        letter = g if e == 1 else g.negated()
        m = m @ generator_matrix(letter, n)
    return m


def word_concat(*words):
    if not words:
        raise ValueError("nothing to concatenate")
    out = words[0]
    for w in words[1:]:
        out = out + w
    return out


# ---------------------------------------------------------------------------
# translation between E_alpha/E_beta and coordinate transvections


def _expand_pair_commutator(tag, i, c, rest, desc):
    """``CAA``/``CBB`` with first vector ``c e_i`` as a product of ``T4``/``T5`` letters."""
    out = []
    t = "T4" if tag == "CAA" else "T5"
    for j, d in enumerate(rest):
        if j == i or d.is_zero():
            continue
        out.append((Generator(t, i=i + 1, j=j + 1, lam=c * d * 2), 1))
    return out


def decompose_to_transvections(v, kind="alpha", strict=True):
    """Word in ``T1``..``T5`` (plus ``CAA``/``CBB`` letters unless ``strict``) equal to ``E_v``.

    Peels off the first non-zero coordinate ``a_1 e_1`` and uses
    ``E_{a1 + a''} = E_{-a1/2, a''} E_{a''} E_{a1}``.
    """
    v = tuple(v)
    n = len(v)
    desc = v[0].desc
    space = QuadSpace(n, desc)
    letters = _decompose(v, kind, strict, desc)
    return GeneratorWord(space, letters)


def _decompose(v, kind, strict, desc):
    nz = [i for i, x in enumerate(v) if not x.is_zero()]
    if not nz:
        return []
    single = "T1" if kind == "alpha" else "T2"
    i = nz[0]
    head = Generator(single, i=i + 1, lam=v[i])
    if len(nz) == 1:
        return [(head, 1)]
    zero = desc.zero()
    rest = tuple(zero if k == i else x for k, x in enumerate(v))
    half = -v[i] * Q(1, 2)
    tag = "CAA" if kind == "alpha" else "CBB"
    if strict:
        comm = _expand_pair_commutator(tag, i, half, rest, desc)
    else:
        first = tuple(half if k == i else zero for k in range(len(v)))
        comm = [(Generator.commutator(tag, first, rest), 1)]
    return comm + _decompose(rest, kind, strict, desc) + [(head, 1)]


def commutator_word(g, e=1):
    """The four-letter ``EA``/``EB`` word defining a commutator letter (inverse when ``e = -1``)."""
    u, v = g.vecs
    if g.tag == "CAB":
        x, y = Generator.beta(v), Generator.alpha(u)
    elif g.tag == "CAA":
        x, y = Generator.alpha(v), Generator.alpha(u)
    elif g.tag == "CBB":
        x, y = Generator.beta(v), Generator.beta(u)
    else:
        raise ValueError("not a commutator tag: %s" % g.tag)
    letters = [(x, -1), (y, -1), (x, 1), (y, 1)]
    if e == -1:
        letters = [(h, -s) for h, s in reversed(letters)]
    return letters


def expand_commutators(w):
    letters = []
    for g, e in w.letters:
        if g.tag in COMMUTATORS:
            letters.extend(commutator_word(g, e))
        else:
            letters.append((g, e))
    return GeneratorWord(w.space, letters)


def homotopize(w, var=T_VAR):
    """Scale every letter by the new variable ``var``: ``Phi(0) = Id``, ``Phi(1) = w``."""
    desc = w.space.desc
    if var in desc.variables:
        raise DescriptorMismatch("%r already present in %r" % (var, desc))
    target = desc.with_variables([var])
    tv = target.var(var)
    expanded = expand_commutators(w)
    return expanded.map(lambda x: x.to(target) * tv, w.space.over(target))


def check_homotopy_endpoints(phi, w, var=T_VAR):
    m = word_evaluate(phi)
    at0 = m.substitute(Substitution("evaluate", var, 0))
    at1 = m.substitute(Substitution("evaluate", var, 1))
    if not at0.is_identity():
        raise VerificationError("homotopy is not the identity at %s = 0" % var)
    if at1 != word_evaluate(w):
        raise VerificationError("homotopy does not recover the word at %s = 1" % var)
    return True
