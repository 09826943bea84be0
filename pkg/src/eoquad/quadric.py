"""Quadric points, homotopy certificates, orientations, and certificate chains.

A point of ``Q`` is ``(p, f, s)`` with ``f(p) = s(1 - s)``; a point of ``Q'``
is ``(p, f, z)`` with ``f(p) + z^2 = 1``.  Both are stored as flat
coordinate tuples of length ``2n + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .elementary import GeneratorWord, word_evaluate
from .errors import DescriptorMismatch, VerificationError, WitnessError
from .quadspace import OrthMatrix, is_isometry, quadratic_form, rank_of
from .rings import Q, Substitution, substitute_value

QVAR = "Q"
QPRIME = "Q'"
HOMOTOPY_VAR = "W"


def _dot(u, v):
    acc = u[0].desc.zero()
    for a, b in zip(u, v):
        acc = acc + a * b
    return acc


class QuadricPoint:
    __slots__ = ("variant", "coords")

    def __init__(self, variant, coords):
        if variant not in (QVAR, QPRIME):
            raise ValueError("variant must be 'Q' or \"Q'\"")
        coords = tuple(coords)
        rank_of(len(coords))
        desc = coords[0].desc
        if any(c.desc != desc for c in coords):
            raise DescriptorMismatch("coordinates over different rings")
        self.variant = variant
        self.coords = coords

    @classmethod
    def of(cls, variant, p, f, last):
        return cls(variant, tuple(p) + tuple(f) + (last,))

    @classmethod
    def base(cls, variant, n, desc):
        last = desc.one() if variant == QPRIME else desc.zero()
        return cls(variant, (desc.zero(),) * (2 * n) + (last,))

    @property
    def desc(self):
        return self.coords[0].desc

    @property
    def n(self):
        return rank_of(len(self.coords))

    @property
    def p(self):
        return self.coords[: self.n]

    @property
    def f(self):
        return self.coords[self.n : 2 * self.n]

    @property
    def last(self):
        return self.coords[-1]

    def to(self, desc):
        return QuadricPoint(self.variant, [c.to(desc) for c in self.coords])

    def substitute(self, sub, target=None):
        target = target or sub.target(self.desc)
        return QuadricPoint(self.variant, [sub.apply(c, target) for c in self.coords])

    def map(self, fn):
        return QuadricPoint(self.variant, [fn(c) for c in self.coords])

    def __eq__(self, other):
        if not isinstance(other, QuadricPoint):
            return NotImplemented
        return (
            self.variant == other.variant
            and len(self.coords) == len(other.coords)
            and all(a == b for a, b in zip(self.coords, other.coords))
        )

    __hash__ = None

    def strings(self):
        return [str(c) for c in self.coords]

    def __repr__(self):
        return "QuadricPoint(%s, [%s])" % (self.variant, ", ".join(self.strings()))


def q_defect(pt):
    """Left side minus right side of the defining equation."""
    if pt.variant == QPRIME:
        return quadratic_form(pt.coords) - 1
    s = pt.last
    return _dot(pt.f, pt.p) - s * (1 - s)


def q_membership(pt):
    return q_defect(pt).is_zero()


def _require(pt, variant):
    if pt.variant != variant:
        raise ValueError("expected a %s point, got %s" % (variant, pt.variant))
    if not q_membership(pt):
        raise VerificationError("point is not on %s" % variant, detail=q_defect(pt))


def q_to_qprime(pt):
    """``(p, f, s) -> (2p, 2f, 1 - 2s)``."""
    _require(pt, QVAR)
    return QuadricPoint.of(
        QPRIME, [x * 2 for x in pt.p], [x * 2 for x in pt.f], 1 - pt.last * 2
    )


def qprime_to_q(pt):
    """``(p, f, z) -> (p/2, f/2, (1 - z)/2)``."""
    _require(pt, QPRIME)
    half = Q(1, 2)
    return QuadricPoint.of(
        QVAR, [x * half for x in pt.p], [x * half for x in pt.f], (1 - pt.last) * half
    )


def act(w, pt):
    """Left action of a word (or matrix) on a ``Q'`` point."""
    if pt.variant != QPRIME:
        raise ValueError("the orthogonal group acts on Q' points")
    m = w if isinstance(w, OrthMatrix) else word_evaluate(w)
    if m.dim != len(pt.coords):
        raise ValueError("dimension mismatch: %d vs %d" % (m.dim, len(pt.coords)))
    if m.desc != pt.desc:
        pt = pt.to(m.desc)
    return QuadricPoint(QPRIME, m.apply(pt.coords))


# ---------------------------------------------------------------------------
# homotopies


class HomotopyCertificate:
    """A family in ``var`` together with its recorded endpoints ``var = 0`` and ``var = 1``."""

    __slots__ = ("family", "var", "start", "end")

    def __init__(self, family, var=HOMOTOPY_VAR, start=None, end=None):
        if var not in family.desc.variables:
            family = family.to(family.desc.with_variables([var]))
        self.family = family
        self.var = var
        self.start = start if start is not None else self.at(0)
        self.end = end if end is not None else self.at(1)

    @property
    def base_desc(self):
        return self.family.desc.without_variable(self.var)

    def at(self, value):
        return self.family.substitute(Substitution("evaluate", self.var, value))

    def reversed(self):
        """The family at ``1 - var``, with endpoints swapped."""
        desc = self.family.desc
        flip = 1 - desc.var(self.var)
        fam = self.family.map(lambda c: substitute_value(c, self.var, flip, desc))
        return HomotopyCertificate(fam, self.var, self.end, self.start)

    def __repr__(self):
        return "HomotopyCertificate(%s; %s)" % (self.var, self.family)


def homotopy_defect(h, v0=None, v1=None):
    """``None`` if ``h`` verifies (against ``v0``/``v1`` when given), else a reason."""
    if not q_membership(h.family):
        return "family is not on %s identically" % h.family.variant
    a, b = h.at(0), h.at(1)
    base = a.desc
    checks = [("start", a, h.start), ("end", b, h.end)]
    if v0 is not None:
        checks.append(("start", a, v0))
    if v1 is not None:
        checks.append(("end", b, v1))
    for name, got, want in checks:
        if got.variant != want.variant:
            return "%s variant mismatch" % name
        try:
            want = want.to(base)
        except Exception:
            return "%s point lies over a different ring" % name
        if got != want:
            return "%s point does not match" % name
    return None


def verify_homotopy(h, v0, v1):
    return homotopy_defect(h, v0, v1) is None


def constant_homotopy(pt, var=HOMOTOPY_VAR):
    return HomotopyCertificate(pt, var)


def contract_parameter(H, var="T", hvar=HOMOTOPY_VAR):
    """``G(T, W) = H(T W)``: connects ``H(0)`` (constant in ``T``) to ``H(T)``."""
    desc = H.desc
    if var not in desc.variables:
        raise DescriptorMismatch("%r is not a variable of %r" % (var, desc))
    if hvar in desc.variables:
        raise DescriptorMismatch("homotopy variable %r already in use" % hvar)
    target = desc.with_variables([hvar])
    fam = H.substitute(Substitution("scale", var, hvar), target)
    h0 = H.substitute(Substitution("evaluate", var, 0)).to(desc)
    return HomotopyCertificate(fam, hvar, h0, H)


def homotopy_from_word(phi, pt, var=HOMOTOPY_VAR):
    """``Phi(W) v`` for a homotopized word ``Phi`` in ``var``."""
    fam = act(phi, pt.to(phi.space.desc))
    return HomotopyCertificate(fam, var)


# ---------------------------------------------------------------------------
# orientations


@dataclass(frozen=True)
class OrientationDatum:
    """Generators ``f`` of ``I`` (with ``s``) and a witness ``p`` of ``f(p) = s(1 - s)``."""

    f: tuple
    s: object
    p: tuple

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(self.f))
        object.__setattr__(self, "p", tuple(self.p))
        if len(self.f) != len(self.p) or not self.f:
            raise ValueError("f and p must have the same positive length")

    @property
    def n(self):
        return len(self.f)

    @property
    def desc(self):
        return self.s.desc

    def defect(self):
        return _dot(self.f, self.p) - self.s * (1 - self.s)

    def check(self):
        d = self.defect()
        if not d.is_zero():
            raise WitnessError("orientation witness fails: f(p) - s(1-s) = %s" % d)


def orientation_to_point(o):
    """Return the ``Q`` point ``(p, f, s)`` and its image ``(2p, 2f, 1 - 2s)`` in ``Q'``."""
    o.check()
    pt = QuadricPoint.of(QVAR, o.p, o.f, o.s)
    return pt, q_to_qprime(pt)


def surjection_certificate(o, hvar=HOMOTOPY_VAR):
    """``(0, 2(1 - W) f, 1)`` joining ``(0, 2f, 1)`` to the base point."""
    o.check()
    if not o.s.is_zero() or any(not x.is_zero() for x in o.p):
        raise WitnessError("surjection certificate needs s = 0 and p = 0")
    desc = o.desc.with_variables([hvar])
    w = desc.var(hvar)
    zero, one = desc.zero(), desc.one()
    f = [x.to(desc) * 2 * (1 - w) for x in o.f]
    fam = QuadricPoint.of(QPRIME, [zero] * o.n, f, one)
    _, start = orientation_to_point(o)
    end = QuadricPoint.base(QPRIME, o.n, o.desc)
    return HomotopyCertificate(fam, hvar, start, end)


# ---------------------------------------------------------------------------
# certificate chains


@dataclass
class Link:
    """One step ``src ~ dst`` of a chain.

    ``kind`` is ``"word"`` (``word`` acting, with its evaluated ``matrix``
    kept as a redundant check), ``"matrix"`` (an isometry with no word), or
    ``"homotopy"``.
    """

    kind: str
    src: QuadricPoint
    dst: QuadricPoint
    word: GeneratorWord = None
    matrix: OrthMatrix = None
    homotopy: HomotopyCertificate = None
    note: str = ""

    @classmethod
    def from_word(cls, w, src, note=""):
        m = word_evaluate(w)
        return cls("word", src, act(m, src), word=w, matrix=m, note=note)

    @classmethod
    def from_homotopy(cls, h, note=""):
        return cls("homotopy", h.start, h.end, homotopy=h, note=note)


@dataclass
class Chain:
    """Links ``start = v_0 ~ v_1 ~ ... ~ v_k = end`` over the ring ``desc``."""

    desc: object
    start: QuadricPoint
    end: QuadricPoint
    links: list = field(default_factory=list)
    status: str = ""

    def append(self, link):
        self.links.append(link)
        return self


def _lift(pt, desc):
    try:
        return pt.to(desc)
    except Exception as exc:
        raise VerificationError("point does not lie over the chain ring: %s" % exc) from None


def link_defect(link, desc):
    """``None`` if ``link`` verifies over ``desc``, else a reason string."""
    src, dst = _lift(link.src, desc), _lift(link.dst, desc)
    if not (q_membership(src) and q_membership(dst)):
        return "endpoint off the quadric"
    if link.kind in ("word", "matrix"):
        m = link.matrix
        if link.kind == "word":
            if link.word is None:
                return "word link without a word"
            ev = word_evaluate(link.word)
            if m is not None and ev != m:
                return "recorded matrix differs from the word at %s" % (ev.first_difference(m),)
            m = ev
        if m is None:
            return "matrix link without a matrix"
        m = m.to(desc)
        if not is_isometry(m):
            return "matrix is not an isometry"
        got = QuadricPoint(QPRIME, m.apply(src.coords))
        if got != dst:
            bad = next(i for i, (a, b) in enumerate(zip(got.coords, dst.coords)) if a != b)
            return "image differs from target in coordinate %d" % bad
        return None
    if link.kind == "homotopy":
        h = link.homotopy
        if h is None:
            return "homotopy link without a family"
        hd = desc.with_variables([h.var])
        try:
            fam = h.family.to(hd)
        except Exception:
            return "family does not lie over the chain ring"
        h2 = HomotopyCertificate(fam, h.var, h.start, h.end)
        return homotopy_defect(h2, src, dst)
    return "unknown link kind %r" % link.kind


def verify_chain(chain, start=None, end=None):
    """Re-verify every link from scratch; raise :class:`VerificationError` on the first failure."""
    desc = chain.desc
    cur = _lift(chain.start, desc)
    for want, name in ((start, "start"), (end, "end")):
        if want is not None and _lift(want, desc) != _lift(getattr(chain, name), desc):
            raise VerificationError("chain %s is not the expected point" % name, detail=name)
    if not q_membership(cur):
        raise VerificationError("chain start is off the quadric", detail="start")
    for k, link in enumerate(chain.links):
        if _lift(link.src, desc) != cur:
            raise VerificationError("link %d does not start where link %d ended" % (k, k - 1), detail=k)
        why = link_defect(link, desc)
        if why is not None:
            raise VerificationError("link %d: %s" % (k, why), detail=k)
        cur = _lift(link.dst, desc)
    if cur != _lift(chain.end, desc):
        raise VerificationError("chain does not end at its recorded end point", detail="end")
    return True
