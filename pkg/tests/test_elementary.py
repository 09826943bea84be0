import random

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from eoquad.elementary import (
    Generator,
    GeneratorWord,
    check_homotopy_endpoints,
    commutator_closed_form,
    decompose_to_transvections,
    e_alpha,
    e_beta,
    expand_commutators,
    homotopize,
    literal_commutator,
    transvection_matrix,
    word_evaluate,
)
from eoquad.errors import DescriptorMismatch
from eoquad.quadspace import OrthMatrix, QuadSpace, is_isometry
from eoquad.rings import Q, RingDescriptor, Substitution

from conftest import QQ, rand_const, rand_word, sympy_is_isometry, sympy_matrix

LAM = RingDescriptor(["lam", "mu"])


def vec(desc, *vals):
    return tuple(desc(v) for v in vals)


def sym_vecs(n, *stems):
    names = ["%s%d" % (s, k) for s in stems for k in range(n)]
    d = RingDescriptor(names)
    return d, [tuple(d.var("%s%d" % (s, k)) for k in range(n)) for s in stems]


# --- independent coordinate formulas ----------------------------------------


def coordinate_transvection(tag, n, i, j, lam):
    """The coordinate maps of the five transvection types, written out in sympy."""
    xs = sp.symbols("x1:%d" % (n + 1))
    ys = sp.symbols("y1:%d" % (n + 1))
    z = sp.Symbol("z")
    x, y, zz = list(xs), list(ys), z
    i, j = i - 1, j - 1
    if tag == "T1":
        x[i] = xs[i] - lam**2 * ys[i] + 2 * lam * z
        zz = z - lam * ys[i]
    elif tag == "T2":
        y[i] = ys[i] - lam**2 * xs[i] + 2 * lam * z
        zz = z - lam * xs[i]
    elif tag == "T3":
        x[i] = xs[i] + lam * xs[j]
        y[j] = ys[j] - lam * ys[i]
    elif tag == "T4":
        x[i] = xs[i] + lam * ys[j]
        x[j] = xs[j] - lam * ys[i]
    else:
        y[i] = ys[i] + lam * xs[j]
        y[j] = ys[j] - lam * xs[i]
    out = x + y + [zz]
    var = list(xs) + list(ys) + [z]
    return sp.Matrix([[sp.diff(e, v) for v in var] for e in out])


@pytest.mark.parametrize("tag", ["T1", "T2", "T3", "T4", "T5"])
@pytest.mark.parametrize("n", [2, 3])
def test_transvection_matrix_matches_coordinate_formula(tag, n):
    lam = LAM.var("lam")
    g = Generator(tag, i=1, j=n, lam=lam)
    got = sympy_matrix(transvection_matrix(g, n))
    assert got == coordinate_transvection(tag, n, 1, n, sp.Symbol("lam"))


def test_transvection_examples():
    m = transvection_matrix(Generator("T1", i=1, lam=QQ.const(3)), 1)
    assert m.apply(vec(QQ, 1, 2, 5)) == vec(QQ, 13, 2, -1)
    m = transvection_matrix(Generator("T3", i=1, j=2, lam=QQ.one()), 2)
    assert m.apply(vec(QQ, 0, 1, 1, 0, 0)) == vec(QQ, 1, 1, 1, -1, 0)
    for tag in ("T1", "T2", "T3", "T4", "T5"):
        assert transvection_matrix(Generator(tag, i=1, j=2, lam=QQ.zero()), 2).is_identity()


def test_transvection_index_errors():
    with pytest.raises(ValueError):
        Generator("T3", i=1, j=1, lam=QQ.one())
    with pytest.raises(ValueError):
        transvection_matrix(Generator("T1", i=3, lam=QQ.one()), 2)


def test_e_alpha_examples():
    m = e_alpha(vec(QQ, 1, 0))
    assert m.apply(vec(QQ, 0, 0, 1, 1, 1)) == vec(QQ, 1, 0, 1, 1, 0)
    assert e_alpha(vec(QQ, 0, 0)).is_identity()
    assert e_beta(vec(QQ, 0, 0, 0)).is_identity()
    lam = LAM.var("lam")
    assert e_alpha((lam,)) == transvection_matrix(Generator("T1", i=1, lam=lam), 1)
    assert e_beta((lam,)) == transvection_matrix(Generator("T2", i=1, lam=lam), 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_all_generators_are_isometries(n):
    d, (a, b) = sym_vecs(n, "a", "b")
    lam = d.var("a0")
    gens = [Generator(t, i=1, lam=lam) for t in ("T1", "T2")]
    if n > 1:
        gens += [Generator(t, i=1, j=2, lam=lam) for t in ("T3", "T4", "T5")]
    gens += [Generator.alpha(a), Generator.beta(b)]
    for g in gens:
        m = word_evaluate(GeneratorWord.of(QuadSpace(n, d), g))
        assert is_isometry(m), g
        assert sympy_is_isometry(m), g


# --- commutators ---------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("tag", ["CAB", "CAA", "CBB"])
def test_closed_form_equals_literal_commutator(tag, n):
    d, (a, b) = sym_vecs(n, "a", "b")
    if tag == "CAB":
        zero = d.zero()
        a = (a[0],) + (zero,) * (n - 1)
        b = (zero,) + b[1:]
    g = Generator.commutator(tag, a, b)
    assert commutator_closed_form(g) == literal_commutator(g)
    # independent: sympy product of the four E matrices
    E = lambda kind, v: sympy_matrix((e_alpha if kind == "a" else e_beta)(v))
    x, y = {"CAB": (E("b", b), E("a", a)), "CAA": (E("a", b), E("a", a)), "CBB": (E("b", b), E("b", a))}[tag]
    lit = (x.inv() * y.inv() * x * y).applyfunc(sp.expand)
    assert lit == sympy_matrix(commutator_closed_form(g))


def test_cab_orthogonality_checked():
    with pytest.raises(ValueError):
        Generator.commutator("CAB", vec(QQ, 1, 0), vec(QQ, 1, 0))


def test_commutators_reproduce_types_three_and_four():
    lam = LAM.var("lam")
    z, one, half = LAM.zero(), LAM.one(), lam * Q(1, 2)
    cab = Generator.commutator("CAB", (one, z), (z, half))
    assert commutator_closed_form(cab) == transvection_matrix(Generator("T3", i=1, j=2, lam=lam), 2)
    caa = Generator.commutator("CAA", (one, z), (z, half))
    assert commutator_closed_form(caa) == transvection_matrix(Generator("T4", i=1, j=2, lam=lam), 2)
    cbb = Generator.commutator("CBB", (one, z), (z, half))
    assert commutator_closed_form(cbb) == transvection_matrix(Generator("T5", i=1, j=2, lam=lam), 2)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["alpha", "beta"])
def test_addition_identity(kind, n):
    d, (u, v) = sym_vecs(n, "u", "v")
    E = e_alpha if kind == "alpha" else e_beta
    tag = "CAA" if kind == "alpha" else "CBB"
    half = tuple(-x * Q(1, 2) for x in u)
    lhs = E(tuple(a + b for a, b in zip(u, v)))
    rhs = commutator_closed_form(Generator.commutator(tag, half, v)) @ E(v) @ E(u)
    assert lhs == rhs


@pytest.mark.parametrize("tag", ["T1", "T2", "T3", "T4", "T5"])
def test_one_parameter_subgroup(tag):
    lam, mu = LAM.var("lam"), LAM.var("mu")
    M = lambda t: transvection_matrix(Generator(tag, i=1, j=2, lam=t), 2)
    assert M(lam) @ M(mu) == M(lam + mu)
    assert (M(lam) @ M(-lam)).is_identity()


# --- words ---------------------------------------------------------------------


def test_word_evaluate_examples():
    space = QuadSpace(2, QQ)
    assert word_evaluate(GeneratorWord(space)).is_identity()
    g = Generator.alpha(vec(QQ, 1, 2))
    assert word_evaluate(GeneratorWord.of(space, g)) == e_alpha(vec(QQ, 1, 2))


def test_word_times_inverse_is_identity_100(rng):
    X = RingDescriptor(["x"])
    for _ in range(100):
        n = rng.randint(1, 3)
        w = rand_word(rng, n, X, rng.randint(0, 6), scale=X.var("x"))
        assert word_evaluate(w + w.inverse()).is_identity()


def test_mixed_rings_rejected():
    X = RingDescriptor(["x"])
    with pytest.raises(DescriptorMismatch):
        GeneratorWord.of(QuadSpace(1, QQ), Generator.alpha((X.var("x"),)))


def test_reduced_keeps_value(rng):
    for _ in range(30):
        w = rand_word(rng, 2, QQ, 3)
        ww = w + w.inverse() + w
        assert len(ww.reduced()) <= len(ww)
        assert word_evaluate(ww.reduced()) == word_evaluate(w)


# --- decomposition -----------------------------------------------------------


def test_decompose_examples():
    lam = QQ.const(5)
    w = decompose_to_transvections((QQ.zero(), lam, QQ.zero()))
    assert [(g.tag, g.i) for g, _ in w.letters] == [("T1", 2)]
    w = decompose_to_transvections((QQ.zero(), lam), "beta")
    assert [(g.tag, g.i) for g, _ in w.letters] == [("T2", 2)]
    assert len(decompose_to_transvections(vec(QQ, 0, 0))) == 0
    v = vec(QQ, 1, 2, 3)
    assert word_evaluate(decompose_to_transvections(v)) == e_alpha(v)


def _rand_vec(rng, n):
    return tuple(rand_const(rng, QQ, -5, 5) if rng.random() < 0.8 else QQ.zero() for _ in range(n))


@pytest.mark.parametrize("strict", [True, False], ids=["strict", "lazy"])
@pytest.mark.parametrize("kind", ["alpha", "beta"])
def test_decompose_round_trip_100(kind, strict, rng):
    E = e_alpha if kind == "alpha" else e_beta
    for _ in range(100):
        v = _rand_vec(rng, rng.randint(1, 4))
        w = decompose_to_transvections(v, kind, strict=strict)
        if strict:
            assert all(g.tag in ("T1", "T2", "T3", "T4", "T5") for g, _ in w.letters)
        assert word_evaluate(w) == E(v)


def test_decompose_symbolic():
    d, (a,) = sym_vecs(3, "a")
    for kind, E in (("alpha", e_alpha), ("beta", e_beta)):
        assert word_evaluate(decompose_to_transvections(a, kind)) == E(a)


# --- homotopies ----------------------------------------------------------------


def test_homotopize_examples():
    space = QuadSpace(2, QQ)
    assert len(homotopize(GeneratorWord(space))) == 0
    g = Generator.alpha(vec(QQ, 1, 0))
    phi = homotopize(GeneratorWord.of(space, g))
    (h, e), = phi.letters
    T = phi.space.desc.var("T")
    assert h.tag == "EA" and h.vecs[0][0] == T and h.vecs[0][1].is_zero()
    at1 = phi.substitute(Substitution("evaluate", "T", 1))
    assert word_evaluate(at1) == e_alpha(vec(QQ, 1, 0))


def test_homotopize_rejects_existing_T():
    X = RingDescriptor(["T"])
    with pytest.raises(DescriptorMismatch):
        homotopize(GeneratorWord(QuadSpace(1, X)))


@given(st.integers(0, 10**6))
def test_homotopy_endpoints_random(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    w = rand_word(rng, n, QQ, rng.randint(0, 5))
    phi = homotopize(w)
    assert check_homotopy_endpoints(phi, w)
    assert is_isometry(word_evaluate(phi))


def test_expand_commutators_keeps_value(rng):
    for _ in range(30):
        w = rand_word(rng, 3, QQ, 3, tags=["CAB", "CAA", "CBB"])
        ex = expand_commutators(w)
        assert all(g.tag in ("EA", "EB") for g, _ in ex.letters)
        assert word_evaluate(ex) == word_evaluate(w)


def test_inverse_letter_is_negation(rng):
    for _ in range(40):
        w = rand_word(rng, 2, QQ, 1)
        (g, _), = w.letters
        m = word_evaluate(GeneratorWord.of(w.space, g))
        assert (m @ word_evaluate(GeneratorWord.of(w.space, g.negated()))).is_identity()
        assert isinstance(m, OrthMatrix)
