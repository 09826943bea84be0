"""The quadratic space ``A^n (+) (A^n)* (+) A`` with form ``sum x_i y_i + z^2``.

Coordinates are ordered ``(x_1..x_n, y_1..y_n, z)``; matrices act on column
vectors from the left.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DescriptorMismatch
from .rings import Q, RingDescriptor, RingElement, Substitution, T_VAR


@dataclass(frozen=True)
class QuadSpace:
    n: int
    desc: RingDescriptor

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("rank must be at least 1")

    @property
    def dim(self):
        return 2 * self.n + 1

    def base_point(self):
        z, one = self.desc.zero(), self.desc.one()
        return (z,) * (2 * self.n) + (one,)

    def vector(self, values):
        v = tuple(self.desc(x) for x in values)
        if len(v) != self.dim:
            raise ValueError("expected %d coordinates, got %d" % (self.dim, len(v)))
        return v

    def over(self, desc):
        return QuadSpace(self.n, desc)


def rank_of(dim):
    if dim < 3 or dim % 2 == 0:
        raise ValueError("dimension %d is not of the form 2n+1" % dim)
    return (dim - 1) // 2


class OrthMatrix:
    """Square matrix of :class:`RingElement` entries over one descriptor."""

    __slots__ = ("desc", "rows")

    def __init__(self, desc, rows):
        self.desc = desc
        self.rows = tuple(tuple(r) for r in rows)
        k = len(self.rows)
        for r in self.rows:
            if len(r) != k:
                raise ValueError("matrix is not square")

    @classmethod
    def identity(cls, dim, desc):
        z, one = desc.zero(), desc.one()
        return cls(desc, [[one if i == j else z for j in range(dim)] for i in range(dim)])

    @classmethod
    def from_strings(cls, desc, rows):
        return cls(desc, [[desc.parse(str(x)) for x in r] for r in rows])

    @property
    def dim(self):
        return len(self.rows)

    @property
    def n(self):
        return rank_of(self.dim)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def _same(self, other):
        if other.desc is not self.desc and other.desc != self.desc:
            raise DescriptorMismatch("matrices over different rings")
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")

    def __matmul__(self, other):
        if isinstance(other, OrthMatrix):
            self._same(other)
            k = self.dim
            cols = list(zip(*other.rows))
            zero = self.desc.zero()
            out = []
            for row in self.rows:
                nz = [(t, a) for t, a in enumerate(row) if a.num.terms]
                new = []
                for j in range(k):
                    col = cols[j]
                    acc = zero
                    for t, a in nz:
                        b = col[t]
                        if b.num.terms:
                            acc = acc + a * b
                    new.append(acc)
                out.append(new)
            return OrthMatrix(self.desc, out)
        return self.apply(other)

    def apply(self, v):
        v = tuple(v)
        if len(v) != self.dim:
            raise ValueError("vector length %d does not match dimension %d" % (len(v), self.dim))
        zero = self.desc.zero()
        out = []
        for row in self.rows:
            acc = zero
            for a, b in zip(row, v):
                if a.num.terms and b.num.terms:
                    acc = acc + a * b
            out.append(acc)
        return tuple(out)

    def transpose(self):
        return OrthMatrix(self.desc, list(zip(*self.rows)))

    def map(self, fn, desc=None):
        return OrthMatrix(desc or self.desc, [[fn(x) for x in r] for r in self.rows])

    def to(self, desc):
        if desc is self.desc:
            return self
        return self.map(lambda x: x.to(desc), desc)

    def substitute(self, sub, target=None):
        target = target or sub.target(self.desc)
        return self.map(lambda x: sub.apply(x, target), target)

    def orth_inverse(self):
        """Inverse of an isometry, ``B^-1 M^T B``, without division."""
        n = self.n
        z = 2 * n
        # B pairs x_i with y_i at weight 1/2, B^-1 at weight 2; z has weight 1
        partner = list(range(n, 2 * n)) + list(range(n)) + [z]
        out = []
        for k in range(self.dim):
            pk = partner[k]
            row = []
            for l in range(self.dim):
                x = self.rows[partner[l]][pk]
                if k == z and l != z:
                    x = x * Q(1, 2)
                elif k != z and l == z:
                    x = x * 2
                row.append(x)
            out.append(row)
        return OrthMatrix(self.desc, out)

    def __eq__(self, other):
        if not isinstance(other, OrthMatrix):
            return NotImplemented
        if other.dim != self.dim:
            return False
        return all(a == b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb))

    __hash__ = None

    def is_identity(self):
        one = self.desc.one()
        for i, r in enumerate(self.rows):
            for j, x in enumerate(r):
                if i == j:
                    if x != one:
                        return False
                elif not x.is_zero():
                    return False
        return True

    def first_difference(self, other):
        for i, (ra, rb) in enumerate(zip(self.rows, other.rows)):
            for j, (a, b) in enumerate(zip(ra, rb)):
                if a != b:
                    return i, j
        return None

    def max_exponent(self):
        return max((x.max_exponent() for r in self.rows for x in r), default=0)

    def strings(self):
        return [[str(x) for x in r] for r in self.rows]

    def __repr__(self):
        return "OrthMatrix(%s)" % self.strings()


def quadratic_form(v):
    """``sum x_i y_i + z^2`` for a vector of length ``2n+1``."""
    v = tuple(v)
    n = rank_of(len(v))
    acc = v[-1] * v[-1]
    for i in range(n):
        acc = acc + v[i] * v[n + i]
    return acc


def gram_matrix(space):
    """Symmetric matrix ``B`` with ``v^T B v == quadratic_form(v)``."""
    n, desc = space.n, space.desc
    half = desc.const(Q(1, 2))
    m = OrthMatrix.identity(space.dim, desc)
    rows = [list(r) for r in m.rows]
    for i in range(2 * n):
        rows[i][i] = desc.zero()
    for i in range(n):
        rows[i][n + i] = half
        rows[n + i][i] = half
    return OrthMatrix(desc, rows)


def is_isometry(m):
    """Exact test of ``M^T B M == B``."""
    space = QuadSpace(m.n, m.desc)
    b = gram_matrix(space)
    return m.transpose() @ b @ m == b


def isometry_defect(m):
    """First ``(i, j)`` where ``M^T B M`` differs from ``B``, else ``None``."""
    b = gram_matrix(QuadSpace(m.n, m.desc))
    return (m.transpose() @ b @ m).first_difference(b)


def is_T_isometry(m, var=T_VAR):
    """Isometry that specializes to the identity at ``var = 0``."""
    if not is_isometry(m):
        return False
    return m.substitute(Substitution("evaluate", var, 0)).is_identity()


def vector_to(v, desc):
    return tuple(x.to(desc) for x in v)


def vector_substitute(v, sub, target=None):
    v = tuple(v)
    if not v:
        return v
    target = target or sub.target(v[0].desc)
    return tuple(sub.apply(x, target) for x in v)


def vectors_equal(u, v):
    return len(u) == len(v) and all(a == b for a, b in zip(u, v))
