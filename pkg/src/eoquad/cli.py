"""Command-line front end: ``eoquad <command> [options]``.

Exit codes: 0 success, 2 parse error, 3 verification failure, 4 witness
ingestion failure, 5 clearing bound exceeded, 1 anything else.
"""

from __future__ import annotations

import argparse
import sys

from . import document as docs
from .elementary import decompose_to_transvections, expand_commutators, word_evaluate
from .errors import EOQuadError, ParseError, VerificationError
from .patching import (
    _search_split,
    bezout_certificate,
    patch_element,
    patch_vector,
    split_sigma,
    split_sigma_T,
)
from .pipeline import (
    check_instance,
    corollary_demo,
    main_theorem_orchestration,
    monic_inversion_transform,
    plant_instance,
)
from .quadric import Link, q_defect, verify_chain, verify_homotopy
from .quadspace import is_isometry, is_T_isometry, isometry_defect
from .rings import T_VAR, RingDescriptor, parse_poly

SCENARIOS = ("monic-quadric", "corollary")


# ---------------------------------------------------------------------------
# output helpers


def _maybe_expand(word, args):
    if getattr(args, "expand_commutators", False):
        return expand_commutators(word)
    return word


def _expand_chain(chain):
    links = []
    for k in chain.links:
        if k.kind == "word":
            k = Link.from_word(expand_commutators(k.word), k.src, k.note)
        links.append(k)
    chain.links = links
    return chain


def _emit(doc, args, path=None):
    path = path or args.output
    if getattr(args, "check_only", False):
        return
    text = docs.dumps(doc)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _read(args):
    if not args.input:
        raise ParseError("--input is required")
    return docs.read(args.input[0])


# ---------------------------------------------------------------------------
# commands


def _verify_matrix(m, say):
    bad = isometry_defect(m)
    if bad is not None:
        i, j = bad
        raise VerificationError(
            "matrix is not an isometry: (M^T B M - B)[%d][%d] != 0; check row/column %d of M" % (i, j, j),
            detail=bad,
        )
    say("isometry: ok (%dx%d over %r)" % (m.dim, m.dim, m.desc))
    if T_VAR in m.desc.variables:
        say("T-isometry (identity at T = 0): %s" % ("yes" if is_T_isometry(m) else "no"))


def verify_document(doc, say=lambda m: None):
    """Run the exact check for ``doc``; raise on failure."""
    kind, obj = doc.kind, doc.payload
    if kind == "matrix":
        _verify_matrix(obj, say)
    elif kind == "word":
        m = word_evaluate(obj)
        if not is_isometry(m):
            raise VerificationError("word does not evaluate to an isometry")
        say("word of %d letters evaluates to an isometry" % len(obj))
        if "equals" in doc.meta:
            target = docs.decode_word(doc.meta["equals"], doc.ring)
            bad = m.first_difference(word_evaluate(target))
            if bad is not None:
                raise VerificationError(
                    "word does not evaluate to the recorded source: entry [%d][%d] differs" % bad, detail=bad
                )
            say("word evaluates to the recorded source")
    elif kind == "point":
        d = q_defect(obj)
        if not d.is_zero():
            raise VerificationError("point is off the quadric %s: defect %s" % (obj.variant, d))
        say("point lies on %s" % obj.variant)
    elif kind == "chain":
        verify_chain(obj)
        say("chain of %d links verified: %s" % (len(obj.links), obj.status or "ok"))
    elif kind == "homotopy":
        verify_homotopy(obj, obj.start, obj.end)
        say("homotopy verified")
    elif kind == "certificate":
        obj.verify()
        say("certificate verified")
    elif kind == "instance":
        check_instance(obj)
        say("instance witnesses verified")
    elif kind == "orientation":
        obj.check()
        say("orientation witness verified")
    elif kind in ("element", "vector"):
        say("%s over %r is well formed" % (kind, doc.ring))
    else:
        raise ParseError("nothing to verify in a %s document" % kind)


def cmd_verify(args, say):
    verify_document(_read(args), say)
    return 0


def cmd_decompose(args, say):
    doc = _read(args)
    if doc.kind != "word" or len(doc.payload) != 1:
        raise ParseError("decompose needs a word document with a single EA/EB letter")
    (g, e), = doc.payload.letters
    if g.tag not in ("EA", "EB"):
        raise ParseError("decompose needs an EA or EB letter, got %s" % g.tag)
    kind = "alpha" if g.tag == "EA" else "beta"
    out = decompose_to_transvections(g.vecs[0], kind, strict=not args.lazy)
    if e < 0:
        out = out.inverse()
    out = _maybe_expand(out, args)
    if word_evaluate(out) != word_evaluate(doc.payload):
        raise VerificationError("decomposition does not evaluate to the input")
    say("decomposed into %d letters" % len(out))
    meta = {"source": "decompose", "equals": docs.encode_word(doc.payload)}
    _emit(docs.make("word", out, meta), args)
    return 0


def _pair(args, desc):
    if args.a is None or args.b is None:
        raise ParseError("--a and --b are required")
    return parse_poly(args.a, desc.variables), parse_poly(args.b, desc.variables)


def _certificate(args, gens):
    if args.certificate:
        cdoc = docs.read(args.certificate)
        if cdoc.kind != "certificate":
            raise ParseError("--certificate must name a certificate document")
        return cdoc.payload.regen(gens)
    return None


def cmd_split(args, say):
    doc = _read(args)
    desc = doc.ring.base()
    a, b = _pair(args, desc)
    cert = _certificate(args, desc.variables)
    if doc.kind == "word":
        res = split_sigma(doc.payload, a, b, cert=cert, bound=args.bound)
    elif doc.kind == "matrix":
        sigma = doc.payload
        ab = sigma.desc.with_inverted([a, b])
        sigma = sigma.to(ab)
        if cert is None:
            res = _search_split(sigma, a, b, args.bound, T_VAR)
        else:
            res = split_sigma_T(sigma, cert, T_VAR)
    else:
        raise ParseError("split needs a word or matrix document")
    cert = res.cert
    meta = {"a": str(a), "b": str(b)}
    if cert is not None:
        meta.update(m_a=cert.m_a, m_b=cert.m_b, s=cert.s, r=cert.r)
    say("split: a = %s, b = %s%s" % (a, b, "" if cert is None else ", exponents (%d, %d)" % (cert.m_a, cert.m_b)))
    prefix = args.output or "split"
    _emit(docs.make("matrix", res.alpha, dict(meta, side="alpha")), args, prefix + ".alpha.json")
    _emit(docs.make("matrix", res.beta, dict(meta, side="beta")), args, prefix + ".beta.json")
    return 0


def cmd_patch(args, say):
    if not args.input or len(args.input) != 2:
        raise ParseError("patch needs two --input documents (over A_a, then over A_b)")
    da, db = (docs.read(p) for p in args.input)
    if da.kind != db.kind or da.kind not in ("element", "vector"):
        raise ParseError("patch needs two element documents or two vector documents")
    base = da.ring.base()
    a, b = _pair(args, base)
    cert = _certificate(args, base.variables) or bezout_certificate(a, b)
    if da.kind == "element":
        out = patch_element(da.payload, db.payload, cert)
    else:
        out = patch_vector(da.payload, db.payload, cert)
    say("patched over %r" % base)
    _emit(docs.make(da.kind, out, {"source": "patch"}), args)
    return 0


def _chain_out(chain, args, meta):
    if args.expand_commutators:
        chain = _expand_chain(chain)
        verify_chain(chain)
    return docs.make("chain", chain, meta)


def cmd_monic_invert(args, say):
    doc = _read(args)
    if doc.kind == "instance":
        chain = monic_inversion_transform(doc.payload, bound=args.bound)
    else:
        raise ParseError("monic-invert needs an instance document")
    say("chain of %d links: %s" % (len(chain.links), chain.status))
    _emit(_chain_out(chain, args, {"source": "monic-invert"}), args)
    return 0


def run_demo(seed, scenario, n=2, length=3):
    """``(chain, meta)`` for a shipped scenario."""
    if scenario == "monic-quadric":
        ring = RingDescriptor(["x"])
        g = "T^2 + x*T + 1"
        inst = plant_instance(seed, n, ring, g, length)
        chain = monic_inversion_transform(inst)
        meta = {"scenario": scenario, "seed": seed, "n": n, "g": g, "length": length}
    elif scenario == "corollary":
        o, f, bundle = corollary_demo(seed)
        chain = main_theorem_orchestration(o, f, bundle)
        meta = {"scenario": scenario, "seed": seed, "f": str(f), "ideal": "(x, %s)" % f}
    else:
        raise ParseError("unknown scenario %r (choose from %s)" % (scenario, ", ".join(SCENARIOS)))
    return chain, meta


def cmd_demo(args, say):
    chain, meta = run_demo(args.seed, args.scenario, n=args.n, length=args.length)
    verify_chain(chain)
    say("%s demo, seed %d: %d links, %s" % (args.scenario, args.seed, len(chain.links), chain.status))
    _emit(_chain_out(chain, args, meta), args)
    return 0


COMMANDS = {
    "verify": cmd_verify,
    "decompose": cmd_decompose,
    "split": cmd_split,
    "patch": cmd_patch,
    "monic-invert": cmd_monic_invert,
    "demo": cmd_demo,
}


def build_parser():
    p = argparse.ArgumentParser(prog="eoquad", description="Exact certificates for elementary orthogonal actions.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--input", action="append", help="input document (patch takes two)")
    p.add_argument("--output", help="output file; for split, the file prefix")
    p.add_argument("--check-only", action="store_true", help="verify without writing output")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--scenario", default="monic-quadric", choices=SCENARIOS)
    p.add_argument("--bound", type=int, default=None, help="clearing-exponent bound")
    p.add_argument("--expand-commutators", action="store_true", help="write commutator letters as four letters")
    p.add_argument("--lazy", action="store_true", help="decompose: keep commutator letters")
    p.add_argument("--a", help="split/patch: the element a")
    p.add_argument("--b", help="split/patch: the element b")
    p.add_argument("--certificate", help="split/patch: comaximality certificate document")
    p.add_argument("--n", type=int, default=2, help="demo: rank")
    p.add_argument("--length", type=int, default=3, help="demo: planted word length")
    return p


def main(argv=None, err=None):
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    say = lambda msg: print(msg, file=err)
    try:
        return COMMANDS[args.command](args, say)
    except EOQuadError as exc:
        detail = getattr(exc, "detail", None)
        say("error: %s%s" % (exc, "" if detail is None else " [at %s]" % (detail,)))
        return exc.exit_code
    except (ValueError, ZeroDivisionError) as exc:
        say("error: %s" % exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
