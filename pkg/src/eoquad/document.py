"""On-disk document format.

A document is one JSON object::

    {"format": "eoquad", "version": 1, "kind": ..., "ring": {...},
     "payload": ..., "meta": {...}}

Ring elements are written as canonical strings.  Objects nested inside a
chain or an instance carry their own ``ring`` so that a chain file can be
re-verified with nothing else at hand.  :func:`dumps` is canonical
(sorted keys), so ``dumps(loads(text)) == text`` for anything it wrote.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .elementary import Generator, GeneratorWord
from .errors import EOQuadError, ParseError, VerificationError
from .patching import ComaximalCertificate
from .pipeline import MonicInstance, WitnessBundle
from .quadric import Chain, HomotopyCertificate, Link, OrientationDatum, QuadricPoint
from .quadspace import OrthMatrix, QuadSpace, rank_of
from .rings import RingDescriptor, RingElement

FORMAT = "eoquad"
VERSION = 1
KINDS = (
    "element",
    "vector",
    "matrix",
    "word",
    "point",
    "homotopy",
    "chain",
    "certificate",
    "orientation",
    "instance",
)


@dataclass
class Document:
    kind: str
    ring: RingDescriptor
    payload: object
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown document kind %r" % self.kind)
        self.meta = {str(k): str(v) for k, v in (self.meta or {}).items()}

    def __eq__(self, other):
        if not isinstance(other, Document):
            return NotImplemented
        return dumps(self) == dumps(other)


def ring_of(obj):
    """The descriptor a payload object lives over."""
    if isinstance(obj, (tuple, list)):
        return obj[0].desc
    if isinstance(obj, GeneratorWord):
        return obj.space.desc
    if isinstance(obj, HomotopyCertificate):
        return obj.base_desc
    if isinstance(obj, ComaximalCertificate):
        return RingDescriptor(obj.gens)
    if isinstance(obj, MonicInstance):
        return obj.ring
    return obj.desc


def make(kind, obj, meta=None):
    return Document(kind, ring_of(obj), obj, meta or {})


# ---------------------------------------------------------------------------
# encoding


def _el(x):
    return str(x)


def _vec(v):
    return [str(x) for x in v]


def _enc_letter(g, e):
    out = {"tag": g.tag, "exp": e}
    if g.lam is not None:
        out["i"] = g.i
        if g.tag in ("T3", "T4", "T5"):
            out["j"] = g.j
        out["lam"] = _el(g.lam)
    else:
        out["vecs"] = [_vec(v) for v in g.vecs]
    return out


def _enc_word(w):
    return {"n": w.space.n, "letters": [_enc_letter(g, e) for g, e in w.letters]}


def _enc_matrix(m):
    return m.strings()


def _enc_point(pt):
    return {"variant": pt.variant, "coords": pt.strings()}


def _enc_homotopy(h):
    return {
        "var": h.var,
        "family": _nested(_enc_point, h.family, h.family.desc),
        "start": _nested(_enc_point, h.start, h.start.desc),
        "end": _nested(_enc_point, h.end, h.end.desc),
    }


def _nested(enc, obj, desc):
    return {"ring": desc.to_json(), "value": enc(obj)}


def _enc_link(link):
    out = {
        "kind": link.kind,
        "note": link.note,
        "src": _nested(_enc_point, link.src, link.src.desc),
        "dst": _nested(_enc_point, link.dst, link.dst.desc),
    }
    if link.word is not None:
        out["word"] = _nested(_enc_word, link.word, link.word.space.desc)
    if link.matrix is not None:
        out["matrix"] = _nested(_enc_matrix, link.matrix, link.matrix.desc)
    if link.homotopy is not None:
        out["homotopy"] = _enc_homotopy(link.homotopy)
    return out


def _enc_chain(c):
    return {
        "status": c.status,
        "start": _nested(_enc_point, c.start, c.start.desc),
        "end": _nested(_enc_point, c.end, c.end.desc),
        "links": [_enc_link(k) for k in c.links],
    }


def _enc_bundle(b):
    if b is None:
        return None
    out = {}
    for name in ("sigma_g", "sigma_contract", "sigma_endpoints", "sigma_lift"):
        w = getattr(b, name)
        out[name] = None if w is None else _nested(_enc_word, w, w.space.desc)
    out["recursive_bundle"] = _enc_bundle(b.recursive_bundle)
    return out


def _enc_instance(inst):
    return {
        "H": _enc_point(inst.H),
        "g": _el(inst.g),
        "bundle": _enc_bundle(inst.bundle),
        "planted": None if inst.planted is None else _nested(_enc_word, inst.planted, inst.planted.space.desc),
    }


def _enc_orientation(o):
    return {"f": _vec(o.f), "s": _el(o.s), "p": _vec(o.p)}


_ENCODERS = {
    "element": _el,
    "vector": _vec,
    "matrix": _enc_matrix,
    "word": _enc_word,
    "point": _enc_point,
    "homotopy": _enc_homotopy,
    "chain": _enc_chain,
    "certificate": lambda c: c.to_json(),
    "orientation": _enc_orientation,
    "instance": _enc_instance,
}


def dump(doc):
    """The JSON-ready dict for ``doc``."""
    return {
        "format": FORMAT,
        "version": VERSION,
        "kind": doc.kind,
        "ring": doc.ring.to_json(),
        "payload": _ENCODERS[doc.kind](doc.payload),
        "meta": dict(doc.meta),
    }


def dumps(doc):
    return json.dumps(dump(doc), indent=1, sort_keys=True) + "\n"


def write(doc, path):
    with open(path, "w") as fh:
        fh.write(dumps(doc))


# ---------------------------------------------------------------------------
# decoding


def _ring(data):
    return RingDescriptor.from_json(data)


def _str(x, what):
    if not isinstance(x, str):
        raise ParseError("%s must be a string, got %r" % (what, x))
    return x


def _dec_el(x, desc):
    return desc.parse(_str(x, "ring element"))


def _dec_vec(v, desc):
    if not isinstance(v, list) or not v:
        raise ParseError("vector must be a non-empty list")
    return tuple(_dec_el(x, desc) for x in v)


def _dec_letter(d, desc):
    tag = d["tag"]
    e = d.get("exp", 1)
    if e not in (1, -1):
        raise ParseError("letter exponent must be 1 or -1")
    if "lam" in d:
        g = Generator(tag, i=int(d["i"]), j=int(d.get("j", 0)), lam=_dec_el(d["lam"], desc))
    else:
        g = Generator(tag, vecs=tuple(_dec_vec(v, desc) for v in d["vecs"]))
    return g, e


def _dec_word(d, desc):
    space = QuadSpace(int(d["n"]), desc)
    return GeneratorWord(space, [_dec_letter(x, desc) for x in d["letters"]])


def _dec_matrix(rows, desc):
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError("matrix payload must be a list of rows")
    m = OrthMatrix(desc, [[_dec_el(x, desc) for x in r] for r in rows])
    rank_of(m.dim)
    return m


def _dec_point(d, desc):
    return QuadricPoint(d["variant"], [_dec_el(x, desc) for x in d["coords"]])


def _dec_nested(dec, d):
    return dec(d["value"], _ring(d["ring"]))


def _dec_homotopy(d, desc=None):
    fam = _dec_nested(_dec_point, d["family"])
    return HomotopyCertificate(
        fam, _str(d["var"], "homotopy variable"),
        _dec_nested(_dec_point, d["start"]),
        _dec_nested(_dec_point, d["end"]),
    )


def _dec_link(d):
    opt = lambda key, dec: None if d.get(key) is None else _dec_nested(dec, d[key])
    h = d.get("homotopy")
    return Link(
        d["kind"],
        _dec_nested(_dec_point, d["src"]),
        _dec_nested(_dec_point, d["dst"]),
        word=opt("word", _dec_word),
        matrix=opt("matrix", _dec_matrix),
        homotopy=None if h is None else _dec_homotopy(h),
        note=d.get("note", ""),
    )


def _dec_chain(d, desc):
    return Chain(
        desc,
        _dec_nested(_dec_point, d["start"]),
        _dec_nested(_dec_point, d["end"]),
        [_dec_link(k) for k in d["links"]],
        d.get("status", ""),
    )


def _dec_bundle(d):
    if d is None:
        return None
    words = {
        name: None if d.get(name) is None else _dec_nested(_dec_word, d[name])
        for name in ("sigma_g", "sigma_contract", "sigma_endpoints", "sigma_lift")
    }
    return WitnessBundle(recursive_bundle=_dec_bundle(d.get("recursive_bundle")), **words)


def _dec_instance(d, desc):
    planted = d.get("planted")
    return MonicInstance(
        _dec_point(d["H"], desc),
        _dec_el(d["g"], desc),
        _dec_bundle(d.get("bundle")),
        None if planted is None else _dec_nested(_dec_word, planted),
    )


def _dec_orientation(d, desc):
    return OrientationDatum(_dec_vec(d["f"], desc), _dec_el(d["s"], desc), _dec_vec(d["p"], desc))


_DECODERS = {
    "element": _dec_el,
    "vector": _dec_vec,
    "matrix": _dec_matrix,
    "word": _dec_word,
    "point": _dec_point,
    "homotopy": _dec_homotopy,
    "chain": _dec_chain,
    "certificate": lambda d, desc: ComaximalCertificate.from_json(d, desc.variables),
    "orientation": _dec_orientation,
    "instance": _dec_instance,
}


def encode_word(w):
    """Compact JSON text for a word payload (used to record a source in meta)."""
    return json.dumps(_enc_word(w), sort_keys=True, separators=(",", ":"))


def decode_word(text, desc):
    try:
        return _dec_word(json.loads(text), desc)
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
        raise ParseError("malformed recorded word: %r" % exc) from None


def load(data):
    """Decode a JSON-ready dict.

    Malformed structure raises :class:`ParseError`; well-formed data that
    describes an invalid object (a CAB pair that is not orthogonal, an
    inconsistent certificate) raises :class:`VerificationError`.
    """
    if not isinstance(data, dict):
        raise ParseError("document must be a JSON object")
    if data.get("format") != FORMAT:
        raise ParseError("not an %s document" % FORMAT)
    if data.get("version") != VERSION:
        raise ParseError("unsupported document version %r" % data.get("version"))
    kind = data.get("kind")
    if kind not in KINDS:
        raise ParseError("unknown document kind %r" % kind)
    try:
        desc = _ring(data["ring"])
        payload = _DECODERS[kind](data["payload"], desc)
        meta = data.get("meta") or {}
        if not isinstance(meta, dict):
            raise ParseError("meta must be an object")
    except EOQuadError as exc:
        if isinstance(exc, (ParseError, VerificationError)):
            raise
        raise VerificationError("invalid %s: %s" % (kind, exc)) from None
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError("malformed %s payload: %r" % (kind, exc)) from None
    except ValueError as exc:
        raise VerificationError("invalid %s: %s" % (kind, exc)) from None
    return Document(kind, desc, payload, meta)


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("not valid JSON: %s" % exc) from None
    return load(data)


def read(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError("cannot read %s: %s" % (path, exc)) from None
    return loads(text)
