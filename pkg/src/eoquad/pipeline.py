"""Monic inversion for quadric points, as a certificate transformer.

Input: a point ``H(T)`` of ``Q'`` over ``A[T]``, a monic ``g`` and a
witness bundle.  Output: a :class:`~eoquad.quadric.Chain` over ``A[T]``
from ``H(T)`` to ``(0, ..., 0, 1)`` that verifies from scratch.

The construction, for ``g != T``:

1. ``sigma = sigma_g * C * E^-1`` sends ``H(1)`` to ``e`` over ``A[T]_g``;
2. ``T -> 1/U`` moves ``sigma`` to ``A[U]`` with ``U`` and ``g*`` inverted;
3. ``sigma = sigma_2 * sigma_1`` with ``sigma_2`` over ``A[U]_U`` and
   ``sigma_1`` over ``A[U]_g*``;
4. ``sigma_1 H(1)`` and ``sigma_2^-1 e`` patch to ``w`` over ``A[U]``;
5. chain: ``H(T) -> H(0) -> H(1) -> w(0) -> w(1) -> e``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .elementary import Generator, GeneratorWord, decompose_to_transvections
from .errors import DescriptorMismatch, NotIntegral, VerificationError, WitnessError
from .patching import bezout_certificate, patch_exponents, patch_vector, split_sigma
from .quadric import (
    QPRIME,
    Chain,
    HomotopyCertificate,
    Link,
    OrientationDatum,
    QuadricPoint,
    act,
    orientation_to_point,
    q_membership,
    surjection_certificate,
    verify_chain,
)
from .quadspace import QuadSpace
from .rings import T_VAR, Poly, RingDescriptor, RingElement, Substitution

STATUS_MONIC = "H(T) is connected to the base point over A[T]"
STATUS_LIFT = "existence certified modulo the lifting criterion"


@dataclass
class WitnessBundle:
    """Words standing in for the non-constructive steps.

    * ``sigma_g`` over ``A[T]_g``: ``sigma_g H(T) = e``;
    * ``sigma_contract`` over ``A[T]``: ``sigma_contract H(0) = H(T)``;
    * ``sigma_endpoints`` over ``A``: ``sigma_endpoints H(0) = H(1)``;
    * ``sigma_lift`` over ``A[T]_g`` (orchestration only): sends ``H(T)``
      to ``(0, 2 phi, 1)`` for the localized lift ``phi``;
    * ``recursive_bundle``: accepted and depth-checked, not consumed.
    """

    sigma_g: GeneratorWord = None
    sigma_contract: GeneratorWord = None
    sigma_endpoints: GeneratorWord = None
    sigma_lift: GeneratorWord = None
    recursive_bundle: "WitnessBundle" = None


@dataclass
class MonicInstance:
    H: QuadricPoint
    g: RingElement
    bundle: WitnessBundle
    planted: GeneratorWord = None

    @property
    def ring(self):
        return self.H.desc

    @property
    def base(self):
        return self.ring.without_variable(T_VAR)

    @property
    def localized(self):
        return self.ring.with_inverted([self.g.num])


# ---------------------------------------------------------------------------
# ingestion


def _word_over(w, desc, name):
    if w is None:
        raise WitnessError("bundle is missing %s" % name)
    if w.space.desc.variables != desc.variables and not set(w.space.desc.variables) <= set(desc.variables):
        raise WitnessError("%s is over the wrong variables" % name)
    try:
        return w.to(desc)
    except (NotIntegral, DescriptorMismatch) as exc:
        raise WitnessError("%s does not lie over %r: %s" % (name, desc, exc)) from None


def _expect(w, src, dst, name):
    got = act(w, src)
    if got != dst.to(got.desc):
        raise WitnessError("%s does not send its source to its target" % name)


def check_instance(inst):
    """Validate the instance and every bundle word; return the coerced words ``(C, E, sigma_g)``."""
    H, g = inst.H, inst.g
    ring = H.desc
    if H.variant != QPRIME:
        raise WitnessError("H must be a Q' point")
    if T_VAR not in ring.variables or ring.inverted:
        raise WitnessError("H must live over a polynomial ring A[T]")
    if not q_membership(H):
        raise WitnessError("H is not on the quadric")
    if not isinstance(g, RingElement):
        g = ring(g)
        inst.g = g
    if not g.is_polynomial() or not g.num.monic_in(T_VAR):
        raise WitnessError("g must be a monic polynomial in T")
    depth, rb = 0, inst.bundle.recursive_bundle
    while rb is not None:
        depth, rb = depth + 1, rb.recursive_bundle
    if depth > 1:
        raise WitnessError("recursion deeper than one level")
    base, loc = inst.base, inst.localized
    h0 = H.substitute(Substitution("evaluate", T_VAR, 0))
    h1 = H.substitute(Substitution("evaluate", T_VAR, 1))
    e = QuadricPoint.base(QPRIME, H.n, ring)
    b = inst.bundle
    C = _word_over(b.sigma_contract, ring, "sigma_contract")
    E = _word_over(b.sigma_endpoints, base, "sigma_endpoints")
    _expect(C, h0.to(ring), H, "sigma_contract")
    _expect(E, h0, h1, "sigma_endpoints")
    sg = None
    if b.sigma_g is not None:
        sg = _word_over(b.sigma_g, loc, "sigma_g")
        _expect(sg, H.to(loc), e, "sigma_g")
    return C, E, sg


# ---------------------------------------------------------------------------
# chains


def _word_link(w, src, dst, note):
    link = Link.from_word(w, src, note)
    if link.dst != dst.to(link.dst.desc):
        raise VerificationError("%s does not reach its target" % note)
    return link


def _prefix_links(inst, C, E):
    """``H(T) -> H(0) -> H(1)`` over ``A[T]``."""
    ring = inst.ring
    H = inst.H
    h0 = H.substitute(Substitution("evaluate", T_VAR, 0)).to(ring)
    h1 = H.substitute(Substitution("evaluate", T_VAR, 1)).to(ring)
    links = []
    if len(C):
        links.append(_word_link(C.inverse(), H, h0, "contract"))
    if len(E):
        links.append(_word_link(E.to(ring), h0, h1, "endpoints"))
    return links, h1


def _finish(inst, links, status):
    ring = inst.ring
    e = QuadricPoint.base(QPRIME, inst.H.n, ring)
    chain = Chain(ring, inst.H, e, links, status)
    verify_chain(chain, inst.H, e)
    return chain


def base_case_T(inst):
    """Chain for ``g = T`` (or a power of ``T``): localization at ``T`` dies at ``T = 1``."""
    C, E, sg = check_instance(inst)
    g = inst.g.num
    if g != Poly.var(g.gens, T_VAR) ** g.degree_in(T_VAR):
        raise WitnessError("base case needs g = T")
    if sg is None:
        raise WitnessError("bundle is missing sigma_g")
    links, h1 = _prefix_links(inst, C, E)
    ring = inst.ring
    s1 = sg.substitute(Substitution("evaluate", T_VAR, 1)).to(inst.base)
    e = QuadricPoint.base(QPRIME, inst.H.n, ring)
    if len(s1):
        links.append(_word_link(s1.to(ring), h1, e, "sigma_g at T = 1"))
    elif h1 != e:
        raise VerificationError("sigma_g at T = 1 does not reach the base point")
    return _finish(inst, links, STATUS_MONIC)


def g_star(g, fresh="U"):
    """``U^deg g * g(1/U)`` as a polynomial over the variables with ``T`` renamed to ``fresh``."""
    sub = Substitution("invert", T_VAR, fresh)
    desc = RingDescriptor(g.desc.variables, [g.num])
    target = sub.target(desc)
    star = [h for h in target.inverted if h != Poly.var(target.variables, fresh)]
    return star[0] if star else Poly.const(target.variables, 1)


def monic_inversion_transform(inst, bound=None):
    """Certificate chain from ``H(T)`` to the base point over ``A[T]``."""
    C, E, sg = check_instance(inst)
    if sg is None:
        raise WitnessError("bundle is missing sigma_g")
    g = inst.g.num
    ring, base, loc = inst.ring, inst.base, inst.localized
    n = inst.H.n
    gs = g_star(inst.g)
    if gs.is_constant():
        return base_case_T(inst)

    # (i) sigma H(1) = e over A[T]_g
    sigma = (sg + C.to(loc) + E.to(loc).inverse()).reduced()
    h1 = inst.H.substitute(Substitution("evaluate", T_VAR, 1))
    e_base = QuadricPoint.base(QPRIME, n, base)
    if act(sigma, h1.to(loc)) != e_base.to(loc):
        raise VerificationError("composed witness does not send H(1) to the base point")

    # (ii) T -> 1/U
    U = loc.fresh_name("U")
    swap = Substitution("invert", T_VAR, U)
    ring_u = swap.target(loc)
    sigma_u = sigma.substitute(swap, ring_u)
    a = Poly.var(ring_u.variables, U)
    b = gs.regen(ring_u.variables)

    # (iii) split over the comaximal pair (U, g*)
    hv = ring_u.fresh_name("W")
    while hv in ring.variables:
        hv = hv + "_"
    split = split_sigma(sigma_u, a, b, bound=bound, var=hv, strategy="conjugate")
    sigma2, sigma1 = split.alpha, split.beta

    # (iv) patch sigma_1 H(1) and sigma_2^-1 e
    poly_u = ring_u.base()
    wb = act(sigma1, h1.to(sigma1.desc))
    wa = act(sigma2.orth_inverse(), e_base.to(sigma2.desc))
    ka, kb = patch_exponents(wa.coords, wb.coords, a, b)
    cert = bezout_certificate(a, b, ka, kb)
    w = patch_vector(wa, wb, cert)
    if w.desc != poly_u:
        w = w.to(poly_u)
    if not q_membership(w):
        raise VerificationError("patched point is off the quadric")

    # (v)-(vi) links over A[T]
    links, h1_ring = _prefix_links(inst, C, E)
    at0 = Substitution("evaluate", U, 0)
    at1 = Substitution("evaluate", U, 1)
    w0 = w.substitute(at0)
    w1 = w.substitute(at1)
    fam3 = act(split.beta_T.substitute(at0), h1.to(split.beta_T.substitute(at0).desc))
    links.append(_homotopy_link(fam3, hv, h1, w0, ring, "sigma_1 at U = 0"))
    fam4 = w.substitute(Substitution("evaluate", U, hv))
    links.append(_homotopy_link(fam4, hv, w0, w1, ring, "patched point"))
    a1 = split.alpha_T.substitute(at1)
    fam5 = act(a1, w1.to(a1.desc))
    links.append(_homotopy_link(fam5, hv, w1, e_base, ring, "sigma_2 at U = 1"))
    return _finish(inst, [l for l in links if l is not None], STATUS_MONIC)


def _homotopy_link(fam, var, start, end, ring, note):
    hd = ring.with_variables([var])
    fam = fam.to(hd)
    start, end = start.to(ring), end.to(ring)
    if start == end and all(not c.involves(var) for c in fam.coords):
        return None
    h = HomotopyCertificate(fam, var, start, end)
    return Link.from_homotopy(h, note)


# ---------------------------------------------------------------------------
# orientations


def lift_point(H_loc, sigma_lift):
    """Apply the lift witness; the image must have the shape ``(0, 2 phi, 1)``."""
    L = act(sigma_lift, H_loc)
    if any(not x.is_zero() for x in L.p) or L.last != L.desc.one():
        raise WitnessError("sigma_lift does not reach a point of the form (0, 2 phi, 1)")
    return [x / 2 for x in L.f]


def main_theorem_orchestration(o, g=None, bundle=None, bound=None):
    """Chain certifying that the image of ``o`` is the base point over ``A[T]``."""
    o.check()
    _, H = orientation_to_point(o)
    ring = H.desc
    e = QuadricPoint.base(QPRIME, o.n, ring)
    if o.s.is_zero() and all(x.is_zero() for x in o.p):
        h = surjection_certificate(o)
        chain = Chain(ring, H, e, [Link.from_homotopy(h, "surjective lift")], STATUS_LIFT)
        verify_chain(chain, H, e)
        return chain
    if g is None or bundle is None or bundle.sigma_lift is None:
        raise WitnessError("a monic g and a sigma_lift witness are required")
    g = g if isinstance(g, RingElement) else ring(g)
    loc = ring.with_inverted([g.num])
    lift = _word_over(bundle.sigma_lift, loc, "sigma_lift")
    phi = lift_point(H.to(loc), lift)
    zero = loc.zero()
    od = OrientationDatum(phi, zero, [zero] * o.n)
    cert = surjection_certificate(od)
    if cert.end != QuadricPoint.base(QPRIME, o.n, loc):
        raise VerificationError("localized surjection certificate does not reach the base point")
    undo = Generator.beta([-x for x in phi])
    sigma_g = GeneratorWord(lift.space, [(undo, 1)] + list(lift.letters))
    b2 = WitnessBundle(sigma_g, bundle.sigma_contract, bundle.sigma_endpoints, bundle.sigma_lift)
    chain = monic_inversion_transform(MonicInstance(H, g, b2), bound=bound)
    chain.status = STATUS_LIFT
    return chain


# ---------------------------------------------------------------------------
# planted instances


def _small(rng, desc, scale=2):
    """Small random element of the polynomial ring ``desc`` (no ``T``)."""
    out = desc.const(rng.randint(-scale, scale))
    for v in desc.variables:
        if rng.random() < 0.5:
            out = out + desc.var(v) * rng.randint(-scale, scale)
    return out


def _random_letter(rng, n, desc, scale_by):
    tag = rng.choice(("T1", "T2", "T3", "T4", "T5", "EA", "EB"))
    if tag in ("EA", "EB"):
        v = [_small(rng, desc) * scale_by for _ in range(n)]
        if all(x.is_zero() for x in v):
            v[0] = scale_by
        return Generator(tag, vecs=(tuple(v),))
    i = rng.randint(1, n)
    j = rng.choice([k for k in range(1, n + 1) if k != i])
    lam = _small(rng, desc) * scale_by
    if lam.is_zero():
        lam = scale_by
    return Generator(tag, i=i, j=j if tag not in ("T1", "T2") else 0, lam=lam)


def _fixing_letter(rng, n, lam):
    """A ``T3``/``T4``/``T5`` letter: these fix the base point."""
    tag = rng.choice(("T3", "T4", "T5"))
    i = rng.randint(1, n)
    j = rng.choice([k for k in range(1, n + 1) if k != i])
    return Generator(tag, i=i, j=j, lam=lam)


_AS_COMMUTATOR = {"T3": "CAB", "T4": "CAA", "T5": "CBB"}


def _as_commutator(h, n):
    """``T3``/``T4``/``T5`` as the commutator letter with ``(e_i, lam/2 e_j)`` or ``(lam/2 e_i, e_j)``."""
    desc = h.lam.desc
    zero = desc.zero()
    u = [zero] * n
    v = [zero] * n
    if h.tag == "T3":
        u[h.i - 1], v[h.j - 1] = desc.one(), h.lam / 2
    else:
        u[h.i - 1], v[h.j - 1] = h.lam / 2, desc.one()
    return Generator.commutator(_AS_COMMUTATOR[h.tag], u, v)


def rewrite_word(w):
    """An equal word that shares no letters with ``w``.

    ``T3``/``T4``/``T5`` become commutator letters (quadratic under scaling, so
    the rewrite does not survive homotopy); ``T1``/``T2`` with parameter
    ``lam`` become two letters with ``lam/2``; ``E_v`` letters go through the
    strict peeling decomposition (linear where the peeling is quadratic).
    """
    out = []
    for g, e in w.letters:
        h = g if e == 1 else g.negated()
        if h.tag in ("EA", "EB"):
            kind = "alpha" if h.tag == "EA" else "beta"
            out.extend(decompose_to_transvections(h.vecs[0], kind, strict=True).letters)
        elif h.tag in _AS_COMMUTATOR:
            out.append((_as_commutator(h, w.space.n), 1))
        elif h.lam is not None:
            half = Generator(h.tag, h.i, h.j, h.lam / 2)
            out.extend([(half, 1), (half, 1)])
        else:
            out.append((h, 1))
    return GeneratorWord(w.space, out)


def plant_instance(seed, n, ring, g, word_length, scramble=True):
    """Random ``sigma(T)`` with ``sigma(0) = 1``; ``H = sigma(T) e`` and a complete bundle.

    With ``scramble`` the inverse inside ``sigma_g`` is rewritten so that it
    does not cancel syntactically against ``sigma_contract``.
    """
    if n < 2:
        raise ValueError("planting needs n >= 2")
    rng = random.Random(seed)
    base = ring.base()
    at = base.with_variables([T_VAR])
    g = at(g) if not isinstance(g, RingElement) else g.to(at)
    if not g.num.monic_in(T_VAR):
        raise ValueError("g must be monic in T")
    loc = at.with_inverted([g.num])
    tv = at.var(T_VAR)
    space = QuadSpace(n, at)
    letters = []
    for _ in range(word_length):
        letters.append((_random_letter(rng, n, at, tv), rng.choice((1, -1))))
    sigma = GeneratorWord(space, letters)
    e = QuadricPoint.base(QPRIME, n, at)
    H = act(sigma, e)
    E = sigma.substitute(Substitution("evaluate", T_VAR, 1)).to(base)
    fixing = []
    if word_length:
        m = g.num.degree_in(T_VAR)

        def localized():
            k = rng.randint(1, 2)
            # numerator degree above k*deg(g) leaves U-denominators after T -> 1/U
            top = k * m + rng.choice((0, 1, 2))
            r = tv ** top * rng.choice((-2, -1, 1, 2))
            for d in range(top):
                r = r + _small(rng, base).to(at) * tv ** d
            return r.to(loc) / g.to(loc) ** k

        for _ in range(rng.randint(1, 2)):
            if rng.random() < 0.5:
                fixing.append((_fixing_letter(rng, n, localized()), 1))
            else:
                # E_v T4 E_v^-1 fixes e since T4 fixes E_v^-1 e = (-2v, 0, 1)
                v = [localized() if rng.random() < 0.7 else loc.zero() for _ in range(n)]
                v[0] = localized()
                y = Generator.alpha(v)
                i = rng.randint(1, n)
                j = rng.choice([k for k in range(1, n + 1) if k != i])
                t4 = Generator("T4", i=i, j=j, lam=localized())
                fixing.extend([(y, 1), (t4, 1), (y, -1)])
    inv = sigma.to(loc).inverse()
    if scramble:
        inv = rewrite_word(inv)
    sigma_g = GeneratorWord(space.over(loc), fixing) + inv
    bundle = WitnessBundle(sigma_g, sigma, E)
    inst = MonicInstance(H, g, bundle, planted=sigma)
    check_instance(inst)
    return inst


# ---------------------------------------------------------------------------
# the ideal demo


def corollary_demo(seed=0, f="T^2 + x*T + 1"):
    """``A = Q[x]``, ``n = 2``, ``I = (x, f)`` with ``f`` monic and the localized lift ``pr_2``.

    Returns ``(orientation, g, bundle)``.
    """
    rng = random.Random(seed)
    at = RingDescriptor(["x", T_VAR])
    base = at.without_variable(T_VAR)
    x = at.var("x")
    fpoly = at(f)
    loc = at.with_inverted([fpoly.num])
    G = [x, fpoly]
    p0 = [at.one(), at(rng.randint(-2, 2))]
    s = G[0] * p0[0] + G[1] * p0[1]
    p = [c * (1 - s) for c in p0]
    o = OrientationDatum(G, s, p)
    space = QuadSpace(2, at)
    neg = lambda v: [-c for c in v]
    at0 = Substitution("evaluate", T_VAR, 0)
    G0 = [at0.apply(c).to(at) for c in G]
    p00 = [at0.apply(c).to(at) for c in p0]
    C = rewrite_word(
        GeneratorWord.of(
            space,
            Generator.alpha(p0),
            Generator.beta(G),
            Generator.beta(neg(G0)),
            Generator.alpha(neg(p00)),
        )
    )
    E = C.substitute(Substitution("evaluate", T_VAR, 1)).to(base)
    fl = loc.one() / fpoly.to(loc)
    lam = (x.to(loc) + loc.var(T_VAR) ** 3 * rng.randint(1, 3)) * fl
    y = Generator.alpha([lam, fl])
    S_f = [(y, 1), (Generator("T4", i=1, j=2, lam=lam), 1), (y, -1), (Generator("T3", i=2, j=1, lam=fl * fl), 1)]
    lspace = space.over(loc)
    lift = GeneratorWord(
        lspace,
        [(Generator.beta([loc.zero(), loc.one()]), 1)]
        + S_f
        + [
            (Generator.beta([c.to(loc) for c in neg(G)]), 1),
            (Generator.alpha([c.to(loc) for c in neg(p0)]), 1),
        ],
    )
    return o, fpoly, WitnessBundle(None, C, E, lift)
