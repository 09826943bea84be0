import pytest

from eoquad.elementary import GeneratorWord
from eoquad.errors import WitnessError
from eoquad.pipeline import (
    STATUS_LIFT,
    STATUS_MONIC,
    MonicInstance,
    WitnessBundle,
    base_case_T,
    check_instance,
    corollary_demo,
    g_star,
    main_theorem_orchestration,
    monic_inversion_transform,
    plant_instance,
)
from eoquad.quadric import QPRIME, OrientationDatum, QuadricPoint, act, q_membership, verify_chain
from eoquad.rings import RingDescriptor, Substitution

from conftest import QQ, QX, QXT, rand_element, sympy_check_chain

GS = ["T", "T + 1", "T^2 + x*T + 1"]
RINGS = {"Q": QQ, "Q[x]": QX}


def flip(word):
    """Invert the first letter."""
    (g, e), rest = word.letters[0], list(word.letters[1:])
    return GeneratorWord(word.space, [(g, -e)] + rest)


def grid():
    for rname, ring in RINGS.items():
        for g in GS:
            if "x" in g and rname == "Q":
                continue
            for n in (2, 3):
                for length in range(5):
                    yield pytest.param(ring, g, n, length, id="%s-%s-n%d-L%d" % (rname, g, n, length))


# --- base case -------------------------------------------------------------------


def test_base_case_trivial():
    inst = plant_instance(0, 2, QQ, "T", 0)
    assert inst.H == QuadricPoint.base(QPRIME, 2, inst.ring)
    chain = base_case_T(inst)
    assert chain.links == []
    assert chain.status == STATUS_MONIC


def test_base_case_planted():
    inst = plant_instance(3, 2, QQ, "T", 3)
    assert act(inst.planted, QuadricPoint.base(QPRIME, 2, inst.ring)) == inst.H
    chain = base_case_T(inst)
    assert verify_chain(chain, inst.H)
    assert sympy_check_chain(chain, inst.H, QuadricPoint.base(QPRIME, 2, inst.ring))


def test_base_case_corrupted_witness():
    inst = plant_instance(3, 2, QQ, "T", 3)
    inst.bundle.sigma_contract = flip(inst.bundle.sigma_contract)
    with pytest.raises(WitnessError):
        base_case_T(inst)


def test_base_case_rejects_other_g():
    with pytest.raises(WitnessError):
        base_case_T(plant_instance(1, 2, QQ, "T + 1", 2))


def test_g_equal_T_delegates():
    inst = plant_instance(5, 2, QX, "T", 2)
    a = monic_inversion_transform(inst)
    b = base_case_T(inst)
    assert [l.note for l in a.links] == [l.note for l in b.links]


# --- planted instances -------------------------------------------------------------


@pytest.mark.parametrize("ring,g,n,length", list(grid()))
def test_planted_grid(ring, g, n, length):
    inst = plant_instance(length + 7 * n, n, ring, g, length)
    chain = monic_inversion_transform(inst)
    e = QuadricPoint.base(QPRIME, n, inst.ring)
    assert chain.start == inst.H and chain.end == e
    assert verify_chain(chain, inst.H, e)
    assert sympy_check_chain(chain, inst.H, e)
    for link in chain.links:
        assert q_membership(link.src) and q_membership(link.dst)


def test_denominators_in_g_only():
    inst = plant_instance(2, 2, QQ, "T + 1", 3)
    assert inst.bundle.sigma_g.space.desc.variables == ("T",)
    chain = monic_inversion_transform(inst)
    assert sympy_check_chain(chain, inst.H, QuadricPoint.base(QPRIME, 2, inst.ring))


def test_localized_chain_matches_witness():
    inst = plant_instance(4, 2, QX, "T^2 + x*T + 1", 3)
    chain = monic_inversion_transform(inst)
    loc = inst.localized
    assert act(inst.bundle.sigma_g, chain.start.to(loc)) == chain.end.to(loc)


def test_plant_determinism():
    a = plant_instance(11, 3, QX, "T^2 + x*T + 1", 4)
    b = plant_instance(11, 3, QX, "T^2 + x*T + 1", 4)
    c = plant_instance(12, 3, QX, "T^2 + x*T + 1", 4)
    assert a.H == b.H and a.planted.letters == b.planted.letters
    assert a.bundle.sigma_g.letters == b.bundle.sigma_g.letters
    assert a.planted.letters != c.planted.letters


def test_plant_rejects_non_monic():
    with pytest.raises(ValueError):
        plant_instance(0, 2, QX, "x*T + 1", 2)
    with pytest.raises(ValueError):
        plant_instance(0, 1, QX, "T", 2)


def test_corrupted_sigma_g():
    inst = plant_instance(6, 2, QX, "T + 1", 3)
    inst.bundle.sigma_g = flip(inst.bundle.sigma_g)
    with pytest.raises(WitnessError):
        monic_inversion_transform(inst)


def test_missing_witness():
    inst = plant_instance(6, 2, QX, "T + 1", 2)
    inst.bundle.sigma_endpoints = None
    with pytest.raises(WitnessError):
        check_instance(inst)


def test_recursion_depth_limited():
    inst = plant_instance(6, 2, QX, "T + 1", 2)
    inst.bundle.recursive_bundle = WitnessBundle(recursive_bundle=WitnessBundle())
    with pytest.raises(WitnessError):
        check_instance(inst)


def test_off_quadric_instance():
    inst = plant_instance(6, 2, QQ, "T + 1", 1)
    coords = list(inst.H.coords)
    coords[-1] = coords[-1] + 1
    bad = MonicInstance(QuadricPoint(QPRIME, coords), inst.g, inst.bundle)
    with pytest.raises(WitnessError):
        check_instance(bad)


# --- ring swap ---------------------------------------------------------------------


@pytest.mark.parametrize("g,star", [("T", "1"), ("T + 1", "1 + U"), ("T^2 + x*T + 1", "1 + x*U + U^2")])
def test_g_star(g, star):
    xu = RingDescriptor(["x", "U"])
    gs = g_star(QXT(g))
    assert gs == xu.parse(star).num
    assert Substitution("evaluate", "U", 0).apply(xu.poly(gs)) == QX.one()


def test_u_swap_round_trip(rng):
    d = RingDescriptor(["x", "T"], ["T"])
    there = Substitution("invert", "T", "U")
    back = Substitution("invert", "U", "T")
    du = there.target(d)
    for _ in range(100):
        e = rand_element(rng, d, deg=3) + rand_element(rng, d) / d.var("T") ** rng.randint(0, 3)
        u = there.apply(e, du)
        assert back.apply(u, back.target(du)) == e


# --- orchestration -----------------------------------------------------------------


def test_orchestration_unit_ideal():
    z = QXT.zero()
    o = OrientationDatum([QXT.one(), z], z, [z, z])
    chain = main_theorem_orchestration(o)
    assert chain.status == STATUS_LIFT
    assert len(chain.links) == 1
    assert verify_chain(chain)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_orchestration_corollary(seed):
    o, g, bundle = corollary_demo(seed)
    chain = main_theorem_orchestration(o, g, bundle)
    assert chain.status == STATUS_LIFT
    assert verify_chain(chain)
    assert sympy_check_chain(chain, chain.start, QuadricPoint.base(QPRIME, 2, chain.desc))


def test_orchestration_corrupted_lift_data():
    o, g, bundle = corollary_demo(0)
    bad = OrientationDatum(o.f, o.s + 1, o.p)
    with pytest.raises(WitnessError):
        main_theorem_orchestration(bad, g, bundle)


def test_orchestration_needs_lift():
    o, g, bundle = corollary_demo(0)
    bundle.sigma_lift = None
    with pytest.raises(WitnessError):
        main_theorem_orchestration(o, g, bundle)
