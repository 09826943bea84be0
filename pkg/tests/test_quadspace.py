import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from eoquad.elementary import Generator, GeneratorWord, transvection_matrix, word_evaluate
from eoquad.quadspace import (
    OrthMatrix,
    QuadSpace,
    gram_matrix,
    is_isometry,
    is_T_isometry,
    isometry_defect,
    quadratic_form,
)
from eoquad.rings import RingDescriptor

from conftest import QQ, rand_word, sympy_gram, sympy_matrix, to_sympy

XY = RingDescriptor(["x", "y"])
XT = RingDescriptor(["x", "T"])


def vec(desc, *vals):
    return tuple(desc(v) for v in vals)


def test_quadratic_form_examples():
    assert quadratic_form(vec(QQ, 0, 0, 1)) == QQ.one()
    assert quadratic_form(vec(QQ, 1, 2, 5)) == QQ.const(27)
    assert quadratic_form(vec(XY, "x", 0, "y", 0, 0)) == XY.parse("x*y")


def test_quadratic_form_length_mismatch():
    with pytest.raises(ValueError):
        quadratic_form(vec(QQ, 1, 2))


def test_gram_matrix_n1():
    B = gram_matrix(QuadSpace(1, QQ))
    assert B.strings() == [["0", "1/2", "0"], ["1/2", "0", "0"], ["0", "0", "1"]]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gram_matrix_matches_independent_construction(n):
    B = gram_matrix(QuadSpace(n, QQ))
    assert sympy_matrix(B) == sympy_gram(n)
    assert B == B.transpose()


@given(st.integers(0, 10**6))
def test_gram_represents_q(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    v = [QQ.const(Fraction(rng.randint(-9, 9), rng.randint(1, 4))) for _ in range(2 * n + 1)]
    B = gram_matrix(QuadSpace(n, QQ))
    Bv = B.apply(v)
    vBv = sum((a * b for a, b in zip(v, Bv)), QQ.zero())
    assert vBv == quadratic_form(v)


def test_is_isometry_examples():
    assert is_isometry(OrthMatrix.identity(3, QQ))
    diag = lambda a, b, c: OrthMatrix.from_strings(QQ, [[a, 0, 0], [0, b, 0], [0, 0, c]])
    assert is_isometry(diag(2, "1/2", 1))
    assert not is_isometry(diag(2, 2, 1))
    assert isometry_defect(diag(2, 2, 1)) in ((0, 1), (1, 0))


def test_is_T_isometry_examples():
    t = XT.var("T")
    assert is_T_isometry(OrthMatrix.identity(3, XT))
    assert is_T_isometry(transvection_matrix(Generator("T1", i=1, lam=t), 1))
    assert not is_T_isometry(transvection_matrix(Generator("T1", i=1, lam=XT.one()), 1))


def test_every_word_is_an_isometry(rng):
    for _ in range(60):
        n = rng.randint(1, 3)
        w = rand_word(rng, n, XY, rng.randint(0, 4), scale=XY.var("x"))
        assert is_isometry(word_evaluate(w))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("tag", ["T1", "T2", "T3", "T4", "T5", "EA", "EB"])
def test_q_preserved_symbolically(tag, n):
    if tag in ("T3", "T4", "T5") and n == 1:
        pytest.skip("needs two indices")
    names = ["v%d" % k for k in range(2 * n + 1)] + ["a%d" % k for k in range(n)]
    desc = RingDescriptor(names)
    if tag in ("EA", "EB"):
        g = Generator(tag, vecs=(tuple(desc.var("a%d" % k) for k in range(n)),))
    else:
        g = Generator(tag, i=1, j=2 if n > 1 else 0, lam=desc.var("a0"))
    space = QuadSpace(n, desc)
    m = word_evaluate(GeneratorWord.of(space, g))
    v = [desc.var("v%d" % k) for k in range(2 * n + 1)]
    assert quadratic_form(m.apply(v)) == quadratic_form(v)
    # the same identity through sympy
    M, V = sympy_matrix(m), sp.Matrix([sp.Symbol(s) for s in names[: 2 * n + 1]])
    B = sympy_gram(n)
    assert sp.expand(((M * V).T * B * (M * V))[0] - (V.T * B * V)[0]) == 0


def test_orth_inverse_is_inverse(rng):
    for _ in range(30):
        n = rng.randint(1, 3)
        m = word_evaluate(rand_word(rng, n, XY, 3, scale=XY.var("y")))
        assert (m @ m.orth_inverse()).is_identity()
        assert (m.orth_inverse() @ m).is_identity()
        assert sp.simplify(sympy_matrix(m).inv() - sympy_matrix(m.orth_inverse())) == sp.zeros(2 * n + 1)


def test_first_difference_names_entry():
    a = OrthMatrix.identity(5, QQ)
    rows = [list(r) for r in a.rows]
    rows[2][3] = QQ.const(7)
    assert a.first_difference(OrthMatrix(QQ, rows)) == (2, 3)
    assert to_sympy(OrthMatrix(QQ, rows)[2, 3]) == 7
