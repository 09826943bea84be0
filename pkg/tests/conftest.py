import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import HealthCheck, settings

from eoquad.elementary import Generator, GeneratorWord
from eoquad.quadspace import QuadSpace
from eoquad.rings import RingDescriptor

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

QQ = RingDescriptor([])
QX = RingDescriptor(["x"])
QXT = RingDescriptor(["x", "T"])
QT = RingDescriptor(["T"])


def to_sympy(x, names=None):
    """Independent parse of a printed element (or string) into sympy."""
    text = str(x).replace("^", "**")
    names = names or sorted(set(__import__("re").findall(r"[A-Za-z_][A-Za-z_0-9]*", text)))
    return sp.sympify(text, locals={v: sp.Symbol(v) for v in names})


def sympy_matrix(m):
    return sp.Matrix([[to_sympy(x) for x in row] for row in m.rows])


def sympy_gram(n):
    B = sp.zeros(2 * n + 1)
    for i in range(n):
        B[i, n + i] = B[n + i, i] = sp.Rational(1, 2)
    B[2 * n, 2 * n] = 1
    return B


def sympy_is_isometry(m):
    M = sympy_matrix(m)
    B = sympy_gram(m.n)
    D = (M.T * B * M - B).applyfunc(sp.cancel)
    return D == sp.zeros(*D.shape)


def rand_coeff(rng, lo=-3, hi=3):
    return Fraction(rng.randint(lo, hi), rng.choice([1, 1, 1, 2, 3]))


def rand_const(rng, desc, lo=-3, hi=3):
    c = rand_coeff(rng, lo, hi)
    return desc.const(c)


def rand_poly_text(rng, names, terms=3, deg=2):
    out = []
    for _ in range(rng.randint(0, terms)):
        c = rand_coeff(rng)
        if c == 0:
            continue
        mono = "*".join("%s^%d" % (v, rng.randint(1, deg)) for v in names if rng.random() < 0.5)
        out.append("(%s)%s" % (c, "*" + mono if mono else ""))
    return " + ".join(out) or "0"


def rand_element(rng, desc, deg=2):
    return desc.parse(rand_poly_text(rng, desc.variables, deg=deg))


def rand_letter(rng, n, desc, tags=None, scale=None):
    """A random generator with polynomial parameters over ``desc``."""
    tags = tags or ["T1", "T2", "T3", "T4", "T5", "EA", "EB", "CAB", "CAA", "CBB"]
    if n == 1:
        tags = [t for t in tags if t in ("T1", "T2", "EA", "EB", "CAA", "CBB")]
    tag = rng.choice(tags)
    el = lambda: rand_const(rng, desc) if scale is None else rand_const(rng, desc) * scale
    vec = lambda: tuple(el() for _ in range(n))
    if tag in ("T1", "T2"):
        return Generator(tag, i=rng.randint(1, n), lam=el())
    if tag in ("T3", "T4", "T5"):
        i, j = rng.sample(range(1, n + 1), 2)
        return Generator(tag, i=i, j=j, lam=el())
    if tag in ("EA", "EB"):
        return Generator(tag, vecs=(vec(),))
    if tag == "CAB":
        # disjoint supports make beta*(alpha) vanish
        k = rng.randint(0, n - 1)
        a = tuple(el() if i == k else desc.zero() for i in range(n))
        b = tuple(desc.zero() if i == k else el() for i in range(n))
        return Generator("CAB", vecs=(a, b))
    return Generator(tag, vecs=(vec(), vec()))


def rand_word(rng, n, desc, length, **kw):
    space = QuadSpace(n, desc)
    return GeneratorWord(space, [(rand_letter(rng, n, desc, **kw), rng.choice([1, -1])) for _ in range(length)])


@pytest.fixture
def rng():
    return random.Random(20261016)


def sympy_q(coords):
    n = (len(coords) - 1) // 2
    return sp.expand(sum(coords[i] * coords[n + i] for i in range(n)) + coords[2 * n] ** 2)


def sympy_point(pt):
    return [sp.cancel(to_sympy(c)) for c in pt.coords]


def _is_poly(expr):
    return sp.fraction(sp.cancel(expr))[1].is_number


def sympy_check_chain(chain, start, end):
    """From-scratch chain check with sympy: polynomial points, q = 1, contiguous links."""
    cur = sympy_point(start)
    assert sympy_point(chain.start) == cur
    for link in chain.links:
        src, dst = sympy_point(link.src), sympy_point(link.dst)
        assert src == cur
        for v in (src, dst):
            assert all(_is_poly(c) for c in v)
            assert sympy_q(v) == 1
        if link.kind == "homotopy":
            h = link.homotopy
            W = sp.Symbol(h.var)
            fam = sympy_point(h.family)
            assert all(_is_poly(c) for c in fam)
            assert sympy_q(fam) == 1
            assert [sp.expand(c.subs(W, 0)) for c in fam] == src
            assert [sp.expand(c.subs(W, 1)) for c in fam] == dst
        else:
            M = sympy_matrix(link.matrix)
            assert all(_is_poly(c) for c in M)
            D = (M.T * sympy_gram(link.matrix.n) * M - sympy_gram(link.matrix.n)).applyfunc(sp.expand)
            assert D == sp.zeros(*D.shape)
            assert [sp.expand(c) for c in M * sp.Matrix(src)] == dst
        cur = dst
    assert cur == sympy_point(end) == sympy_point(chain.end)
    return True


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
