"""Quillen clearing, comaximal splitting, and patching over ``A_a`` / ``A_b``.

Conventions: ``a`` and ``b`` are polynomials of the base ring ``A``;
``A_a`` inverts ``a`` only, ``A_b`` inverts ``b`` only, ``A_ab`` both.
A split writes ``sigma = alpha * beta`` with ``alpha`` over ``A_a`` and
``beta`` over ``A_b`` (both localized into ``A_ab`` for the product).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .elementary import GeneratorWord, generator_matrix, homotopize, word_evaluate
from .errors import BoundExceeded, NotComaximal, NotIntegral, VerificationError
from .quadric import QuadricPoint
from .quadspace import OrthMatrix
from .rings import T_VAR, Poly, Q, RingElement, Substitution, parse_poly


# ---------------------------------------------------------------------------
# comaximality certificates


@dataclass(frozen=True)
class ComaximalCertificate:
    """``a^m_a * s + b^m_b * r = 1`` in a polynomial ring."""

    a: Poly
    b: Poly
    m_a: int
    m_b: int
    s: Poly
    r: Poly

    @property
    def m(self):
        return max(self.m_a, self.m_b)

    @property
    def gens(self):
        return self.a.gens

    def residual(self):
        return self.a ** self.m_a * self.s + self.b ** self.m_b * self.r - Poly.const(self.gens, 1)

    def verify(self):
        if not self.residual().is_zero():
            raise NotComaximal(
                "certificate fails: a^%d*s + b^%d*r - 1 = %s" % (self.m_a, self.m_b, self.residual())
            )
        return True

    def regen(self, gens):
        return ComaximalCertificate(
            *(p.regen(gens) for p in (self.a, self.b)),
            self.m_a,
            self.m_b,
            *(p.regen(gens) for p in (self.s, self.r)),
        )

    def to_json(self):
        return {
            "a": str(self.a),
            "b": str(self.b),
            "m_a": self.m_a,
            "m_b": self.m_b,
            "s": str(self.s),
            "r": str(self.r),
        }

    @classmethod
    def from_json(cls, data, gens):
        cert = cls(
            parse_poly(data["a"], gens),
            parse_poly(data["b"], gens),
            int(data["m_a"]),
            int(data["m_b"]),
            parse_poly(data["s"], gens),
            parse_poly(data["r"], gens),
        )
        cert.verify()
        return cert


def _as_poly(x, gens):
    if isinstance(x, Poly):
        return x.regen(gens)
    if isinstance(x, RingElement):
        if not x.is_polynomial():
            raise ValueError("%s is not a polynomial" % x)
        return x.num.regen(gens)
    if isinstance(x, str):
        return parse_poly(x, gens)
    return Poly.const(gens, x)


def _gens_of(*items):
    for x in items:
        if isinstance(x, Poly):
            return x.gens
        if isinstance(x, RingElement):
            return x.desc.variables
    raise ValueError("cannot infer the polynomial ring; pass gens")


# univariate helpers on dense coefficient lists (lowest degree first)


def _to_dense(p, var):
    parts = p.coefficients_in(var)
    if not parts:
        return []
    out = [Q(0)] * (max(parts) + 1)
    for k, c in parts.items():
        if not c.is_constant():
            raise ValueError("not univariate")
        out[k] = c.constant_value()
    return out


def _from_dense(coeffs, gens, var):
    out = Poly.zero(gens)
    for k, c in enumerate(coeffs):
        if c:
            out = out + Poly.var(gens, var, k) * c if k else out + c
    return out


def _trim(u):
    while u and not u[-1]:
        u.pop()
    return u


def _dsub(u, v):
    n = max(len(u), len(v))
    return _trim([(u[i] if i < len(u) else 0) - (v[i] if i < len(v) else 0) for i in range(n)])


def _dmul(u, v):
    if not u or not v:
        return []
    out = [Q(0)] * (len(u) + len(v) - 1)
    for i, a in enumerate(u):
        if a:
            for j, b in enumerate(v):
                out[i + j] += a * b
    return _trim(out)


def _ddivmod(u, v):
    u = list(u)
    q = [Q(0)] * max(len(u) - len(v) + 1, 0)
    lead = v[-1]
    while len(u) >= len(v) and u:
        k = len(u) - len(v)
        c = u[-1] / lead
        q[k] = c
        for i, b in enumerate(v):
            u[i + k] -= c * b
        _trim(u)
    return _trim(q), u


def _ext_euclid(u, v):
    """``(g, s, t)`` with ``s u + t v = g = gcd``."""
    r0, r1 = _trim(list(u)), _trim(list(v))
    s0, s1 = [Q(1)], []
    t0, t1 = [], [Q(1)]
    while r1:
        q, r = _ddivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _dsub(s0, _dmul(q, s1))
        t0, t1 = t1, _dsub(t0, _dmul(q, t1))
    return r0, s0, t0


def _univariate_var(*polys):
    used = set()
    for p in polys:
        used |= set(p.variables_used())
    if len(used) > 1:
        return None
    return used.pop() if used else ""


def _truncate(p, var, k):
    out = Poly.zero(p.gens)
    for e, c in p.coefficients_in(var).items():
        if e < k:
            out = out + c * Poly.var(p.gens, var, e) if e else out + c
    return out


def _series_certificate(a, b, m_a, m_b, var):
    """``a = var``; inverts ``b^m_b`` modulo ``var^m_a`` (needs ``b(var = 0)`` a unit)."""
    gens = a.gens
    bb = b ** m_b
    b0 = bb.subs(var, Poly.zero(gens))
    if not b0.is_constant() or not b0.constant_value():
        raise NotComaximal("%s is not a unit at %s = 0" % (b, var))
    r = Poly.const(gens, 1 / b0.constant_value())
    prec = 1
    while prec < m_a:
        prec = min(2 * prec, m_a)
        r = _truncate(r * (Poly.const(gens, 2) - bb * r), var, prec)
    r = _truncate(r, var, m_a)
    rest = Poly.const(gens, 1) - bb * r
    s = rest.exact_div(a ** m_a)
    return ComaximalCertificate(a, b, m_a, m_b, s, r)


def _is_var(p):
    used = p.variables_used()
    return len(used) == 1 and p == Poly.var(p.gens, next(iter(used)))


def bezout_certificate(a, b, m=1, m_b=None, s=None, r=None, gens=None):
    """Certificate ``a^m * s + b^m_b * r = 1`` (``m_b`` defaults to ``m``).

    Given ``s`` and ``r`` the identity is only checked.  Otherwise the
    univariate case uses extended Euclid over the rationals, and the case
    where one of ``a``, ``b`` is a variable and the other is a unit modulo
    it uses a truncated power-series inverse.
    """
    gens = gens or _gens_of(a, b, s, r)
    a, b = _as_poly(a, gens), _as_poly(b, gens)
    m_a = int(m)
    m_b = m_a if m_b is None else int(m_b)
    if m_a < 0 or m_b < 0:
        raise ValueError("exponents must be non-negative")
    if s is not None or r is not None:
        if s is None or r is None:
            raise ValueError("supply both s and r")
        cert = ComaximalCertificate(a, b, m_a, m_b, _as_poly(s, gens), _as_poly(r, gens))
        cert.verify()
        return cert
    one, zero = Poly.const(gens, 1), Poly.zero(gens)
    if m_a == 0:
        return ComaximalCertificate(a, b, 0, m_b, one, zero)
    if m_b == 0:
        return ComaximalCertificate(a, b, m_a, 0, zero, one)
    var = _univariate_var(a, b)
    if var is not None:
        if var == "":
            if a.is_zero() and b.is_zero():
                raise NotComaximal("both elements are zero")
            if not b.is_zero():
                return ComaximalCertificate(a, b, m_a, m_b, zero, Poly.const(gens, 1 / b.constant_value() ** m_b))
            return ComaximalCertificate(a, b, m_a, m_b, Poly.const(gens, 1 / a.constant_value() ** m_a), zero)
        g, u, v = _ext_euclid(_to_dense(a ** m_a, var), _to_dense(b ** m_b, var))
        if len(g) != 1:
            raise NotComaximal("gcd of %s and %s is not a unit" % (a, b))
        inv = 1 / g[0]
        u = _from_dense([c * inv for c in u], gens, var)
        v = _from_dense([c * inv for c in v], gens, var)
        cert = ComaximalCertificate(a, b, m_a, m_b, u, v)
        cert.verify()
        return cert
    if _is_var(a):
        cert = _series_certificate(a, b, m_a, m_b, next(iter(a.variables_used())))
    elif _is_var(b):
        flip = _series_certificate(b, a, m_b, m_a, next(iter(b.variables_used())))
        cert = ComaximalCertificate(a, b, m_a, m_b, flip.r, flip.s)
    else:
        raise NotComaximal("no constructive certificate for %s, %s; supply s and r" % (a, b))
    cert.verify()
    return cert


# ---------------------------------------------------------------------------
# clearing


def _inverted_list(desc, which):
    if which is None:
        return list(desc.inverted)
    if isinstance(which, (list, tuple)):
        return [_as_poly(g, desc.variables) for g in which]
    return [_as_poly(which, desc.variables)]


def _check_t_identity(sigma, var):
    at0 = sigma.substitute(Substitution("evaluate", var, 0))
    if not at0.is_identity():
        raise VerificationError("sigma(0) is not the identity")


def quillen_clear(sigma, c, d, a=None, var=T_VAR, check=True):
    """``tau = sigma(cT) sigma(dT)^-1`` with the denominators ``a`` removed.

    ``a`` is one inverted generator or a list of them (default: all).
    ``c`` and ``d`` are polynomials that may involve fresh variables.
    Raises :class:`NotIntegral` when an entry keeps an ``a``-denominator.
    """
    desc = sigma.desc
    if check:
        _check_t_identity(sigma, var)
    cp, dp = (_as_poly_loose(x, desc) for x in (c, d))
    extra = [v for p in (cp, dp) for v in p.variables_used() if v not in desc.variables]
    target = desc.with_variables(list(dict.fromkeys(extra)))
    cp, dp = cp.regen(target.variables), dp.regen(target.variables)
    sc = sigma.substitute(Substitution("scale", var, cp), target)
    sd = sigma.substitute(Substitution("scale", var, dp), target)
    prod = sc @ sd.orth_inverse()
    cleared = target.without_inverted(_inverted_list(target, a))
    try:
        return prod.to(cleared)
    except NotIntegral as exc:
        raise NotIntegral("clearing failed: %s" % exc) from None


def _as_poly_loose(x, desc):
    if isinstance(x, Poly):
        names = tuple(dict.fromkeys(desc.variables + tuple(x.variables_used())))
        return x.regen(names)
    if isinstance(x, RingElement):
        if not x.is_polynomial():
            raise ValueError("%s is not a polynomial" % x)
        return x.num
    if isinstance(x, str):
        found = [v for v in re.findall(r"[A-Za-z_][A-Za-z_0-9]*", x) if v not in desc.variables]
        return parse_poly(x, desc.variables + tuple(dict.fromkeys(found)))
    return Poly.const(desc.variables, x)


def default_bound(sigma):
    return 2 * sigma.max_exponent() + 2


def minimal_clearing_exponent(sigma, bound=None, a=None, var=T_VAR):
    """Smallest ``N <= bound`` so that clearing works for ``c = d + a^N e`` with ``d, e`` symbolic.

    Returns ``None`` when no such ``N`` exists within the bound.
    """
    desc = sigma.desc
    _check_t_identity(sigma, var)
    if bound is None:
        bound = default_bound(sigma)
    gens = _inverted_list(desc, a)
    av = Poly.const(desc.variables, 1)
    for g in gens:
        av = av * g
    dn = desc.fresh_name("d_")
    en = desc.fresh_name("e_")
    names = desc.variables + (dn, en)
    dv, ev = Poly.var(names, dn), Poly.var(names, en)
    av = av.regen(names)
    for N in range(bound + 1):
        c = dv + av ** N * ev
        try:
            quillen_clear(sigma, c, dv, a=gens, var=var, check=False)
        except NotIntegral:
            continue
        return N
    return None


# ---------------------------------------------------------------------------
# splitting


@dataclass
class SplitResult:
    """``sigma = alpha * beta`` with ``alpha`` over ``A_a`` and ``beta`` over ``A_b``.

    ``alpha_T`` / ``beta_T`` are the families in ``var`` (identity at 0)
    when the split came from a homotopy.
    """

    alpha: OrthMatrix
    beta: OrthMatrix
    cert: ComaximalCertificate = None
    alpha_T: OrthMatrix = None
    beta_T: OrthMatrix = None
    var: str = T_VAR

    def product(self, desc_ab):
        return self.alpha.to(desc_ab) @ self.beta.to(desc_ab)


def _side_rings(desc, a, b):
    ab = desc.with_inverted([a, b])
    return ab, ab.without_inverted([b]), ab.without_inverted([a])


def split_sigma_T(sigma, cert, var=T_VAR):
    """``alpha(T) = sigma(T) sigma(cT)^-1`` and ``beta(T) = sigma(cT)`` with ``c = a^m_a s``."""
    desc = sigma.desc
    cert = cert.regen(desc.variables)
    ab, da, db = _side_rings(desc, cert.a, cert.b)
    sigma = sigma.to(ab)
    _check_t_identity(sigma, var)
    c = cert.a ** cert.m_a * cert.s
    one = Poly.const(desc.variables, 1)
    try:
        alpha = quillen_clear(sigma, one, c, a=cert.b, var=var, check=False)
    except NotIntegral as exc:
        exc.side = "alpha"
        raise
    try:
        beta = quillen_clear(sigma, c, Poly.zero(desc.variables), a=cert.a, var=var, check=False)
    except NotIntegral as exc:
        exc.side = "beta"
        raise
    res = SplitResult(alpha, beta, cert, alpha, beta, var)
    if res.product(ab) != sigma:
        raise VerificationError("split product does not reproduce sigma")
    return res


def _over(g, desc):
    try:
        for x in g.elements():
            x.to(desc)
    except NotIntegral:
        return False
    return True


def _conjugate_pieces(letters, n, da, ab):
    """Pull letters over ``A_a`` to the front.

    Returns ``(pulled, pieces)`` with ``word = pulled * prod(K^-1 M K)`` for
    ``(K, M)`` in ``pieces``; ``K`` is a matrix over ``A_ab`` and ``M`` a
    list of letters.
    """
    pulled, pieces = [], []
    fresh = True
    for g, e in letters:
        if _over(g, da):
            pulled.append((g, e))
            m = generator_matrix(g, n).to(ab)
            if e < 0:
                m = m.orth_inverse()
            pieces = [(m if k is None else k @ m, ms) for k, ms in pieces]
            fresh = True
        elif fresh or not pieces:
            pieces.append((None, [(g, e)]))
            fresh = False
        else:
            pieces[-1][1].append((g, e))
    return pulled, pieces


def split_sigma(word, a, b, cert=None, bound=None, trim=True, var=None, strategy="uniform"):
    """Split a word over ``A_ab`` as ``alpha_b * beta_a`` with constant factors.

    The word is homotopized in ``var``, split, and evaluated at ``var = 1``.
    With ``trim`` the longest suffix already over ``A_b`` goes straight to
    ``beta`` and the longest prefix over ``A_a`` to ``alpha``.  Without a
    certificate the exponents are raised until both sides clear.

    ``strategy="conjugate"`` also moves every inner letter over ``A_a`` to
    the front, conjugating the remaining letters, and scales only those.
    The families have much lower degree in ``var`` when few letters mix
    both denominators.
    """
    desc = word.space.desc
    a, b = _as_poly(a, desc.variables), _as_poly(b, desc.variables)
    ab, da, db = _side_rings(desc, a, b)
    word = word.to(ab)
    if var is None:
        var = T_VAR if T_VAR not in ab.variables else ab.fresh_name("S")
    letters = list(word.letters)
    lo, hi = 0, len(letters)
    if trim:
        while hi > lo and _over(letters[hi - 1][0], db):
            hi -= 1
        while lo < hi and _over(letters[lo][0], da):
            lo += 1
    space = word.space
    head, pieces = letters[:lo], [(None, letters[lo:hi])] if hi > lo else []
    if strategy == "conjugate":
        pulled, pieces = _conjugate_pieces(letters[lo:hi], space.n, da, ab)
        head = head + pulled
    elif strategy != "uniform":
        raise ValueError("unknown strategy %r" % strategy)
    prefix = GeneratorWord(space, head).to(da)
    suffix = GeneratorWord(space, letters[hi:]).to(db)

    def family(w, ring):
        phi = homotopize(w.to(ring), var)
        return word_evaluate(phi)

    sub1 = Substitution("evaluate", var, 1)
    pa, sb = family(prefix, da), family(suffix, db)
    if pieces:
        tau = None
        for k, ms in pieces:
            f = family(GeneratorWord(space, ms), ab)
            if k is not None:
                k = k.to(f.desc)
                f = k.orth_inverse() @ f @ k
            tau = f if tau is None else tau @ f
        if cert is None:
            res = _search_split(tau, a, b, bound, var)
        else:
            res = split_sigma_T(tau, cert, var)
        al, be, cert = res.alpha, res.beta, res.cert
    else:
        al = OrthMatrix.identity(space.dim, pa.desc)
        be = OrthMatrix.identity(space.dim, sb.desc)
    alpha_T = pa @ al.to(pa.desc)
    beta_T = be.to(sb.desc) @ sb
    if cert is not None:
        cert = cert.regen(desc.variables)
    out = SplitResult(
        alpha_T.substitute(sub1), beta_T.substitute(sub1), cert, alpha_T, beta_T, var
    )
    if out.product(ab) != word_evaluate(word):
        raise VerificationError("split product does not reproduce the word")
    return out


def _search_split(tau, a, b, bound, var):
    if bound is None:
        bound = default_bound(tau)
    m_a = m_b = 1
    while True:
        if m_a > bound or m_b > bound:
            raise BoundExceeded("clearing exponent exceeds the bound %d" % bound)
        cert = bezout_certificate(a, b, m_a, m_b)
        try:
            return split_sigma_T(tau, cert, var)
        except NotIntegral as exc:
            if getattr(exc, "side", "alpha") == "alpha":
                m_b += 1
            else:
                m_a += 1


# ---------------------------------------------------------------------------
# patching


def _num_and_exponent(e, g):
    """``(p, k)`` with ``e = p / g^k`` where ``g`` is the only inverted element of ``e``'s ring."""
    desc = e.desc
    if not desc.inverted:
        return e.num, 0
    hit = desc.find_generator(g)
    if hit is None or len(desc.inverted) != 1:
        raise ValueError("%s must live in a ring inverting only %s" % (e, g))
    j, c = hit
    k = e.exps[j]
    return e.num * (1 / c ** k), k


def patch_element(ea, eb, cert):
    """The unique ``e`` in ``A`` with ``e = ea`` in ``A_a`` and ``e = eb`` in ``A_b``."""
    gens = ea.desc.variables
    if eb.desc.variables != gens:
        raise ValueError("patch inputs over different variables")
    cert = cert.regen(gens)
    p, m = _num_and_exponent(ea, cert.a)
    q, k = _num_and_exponent(eb, cert.b)
    if p * cert.b ** k != q * cert.a ** m:
        raise VerificationError("inputs disagree in A_ab")
    if cert.m_a < m or cert.m_b < k:
        raise NotComaximal(
            "certificate exponents (%d, %d) below denominators (%d, %d)" % (cert.m_a, cert.m_b, m, k)
        )
    e = cert.s * p * cert.a ** (cert.m_a - m) + cert.r * q * cert.b ** (cert.m_b - k)
    base = ea.desc.base()
    return RingElement(base, e)


def patch_vector(va, vb, cert):
    if isinstance(va, QuadricPoint):
        if not isinstance(vb, QuadricPoint) or va.variant != vb.variant:
            raise ValueError("patching points of different variants")
        return QuadricPoint(va.variant, patch_vector(va.coords, vb.coords, cert))
    va, vb = tuple(va), tuple(vb)
    if len(va) != len(vb):
        raise ValueError("vectors of different lengths")
    return tuple(patch_element(x, y, cert) for x, y in zip(va, vb))


def patch_exponents(va, vb, a, b):
    """Largest denominator exponents of ``a`` in ``va`` and of ``b`` in ``vb``."""
    ka = max((_num_and_exponent(x, a)[1] for x in va), default=0)
    kb = max((_num_and_exponent(x, b)[1] for x in vb), default=0)
    return ka, kb

