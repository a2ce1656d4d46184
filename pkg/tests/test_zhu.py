from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from zhulab.voa import (
    HEISENBERG,
    VIRASORO,
    VOAPreset,
    add_scaled,
    monomials_up_to,
    top_weight,
)
from zhulab.zhu import (
    WindowError,
    an_presentation,
    certify_relation,
    circ_n,
    poly_eval_state,
    poly_mul,
    poly_str,
    poly_weight,
    relation_catalog,
    shift_element,
    star_n,
    surjection_consistency,
    zhu_algebra,
)

Q = Fraction

BOSON = VOAPreset(HEISENBERG, Q(0))
VIR = VOAPreset(VIRASORO, Q(1, 2))


def one(mon):
    return {tuple(mon): Q(1)}


# ------------------------------------------------------------ the products


def test_star0_omega_omega():
    # omega *_0 omega = L(-2)^2|0> + 2 L(-3)|0> + 2 L(-2)|0>
    got = star_n(VIR, one((2,)), one((2,)), 0)
    assert got == {(2, 2): Q(1), (3,): Q(2), (2,): Q(2)}


def test_circ0_omega_omega():
    # omega o_0 omega = L(-3)L(-2)|0> + 2 L(-2)^2|0> + L(-3)|0>
    got = circ_n(VIR, one((2,)), one((2,)), 0)
    assert got == {(3, 2): Q(1), (2, 2): Q(2), (3,): Q(1)}


def test_star1_alpha_alpha():
    # a *_1 a = -2 a(-3)a(-1)|0> - 3 a(-2)a(-1)|0>
    got = star_n(BOSON, one((1,)), one((1,)), 1)
    assert got == {(3, 1): Q(-2), (2, 1): Q(-3)}


def test_circ0_alpha_alpha():
    # a o_0 a = a(-2)a(-1)|0> + a(-1)^2|0>
    got = circ_n(BOSON, one((1,)), one((1,)), 0)
    assert got == {(2, 1): Q(1), (1, 1): Q(1)}


def test_star0_alpha_alpha_is_square_state():
    # a(m>=0) kills the vacuum module, so x *_0 x is exactly the y state
    got = star_n(BOSON, one((1,)), one((1,)), 0)
    assert got == {(1, 1): Q(1)}
    # (L(-1)+L(0)) a(-1)|0> = a(-2)|0> + a(-1)|0>
    assert shift_element(BOSON, one((1,))) == {(2,): Q(1), (1,): Q(1)}


def test_product_weight_bounds():
    for preset in (BOSON, VIR):
        mons = [m for m in monomials_up_to(preset, 4) if m]
        for n in (0, 1, 2):
            for u in mons[:6]:
                for v in mons[:6]:
                    s = star_n(preset, one(u), one(v), n)
                    c = circ_n(preset, one(u), one(v), n)
                    assert top_weight(s) <= sum(u) + sum(v) + 2 * n
                    assert top_weight(c) <= sum(u) + sum(v) + 2 * n + 1


# ------------------------------------------------------------- the windows


def test_a0_boson_window():
    alg = zhu_algebra(BOSON, 0, 8)
    assert alg.reps == [(1,) * i for i in range(9)]
    assert alg.stability_report().stable
    # the generator itself is a representative
    assert alg.reduce(one((1,))) == {(1,): Q(1)}
    # a(-2)|0> = (L(-1)+L(0))a - a: reduces to -x
    assert alg.reduce(one((2,))) == {(1,): Q(-1)}


def test_a0_virasoro_window():
    alg = zhu_algebra(VIR, 0, 8)
    assert alg.reps == [(2,) * i for i in range(5)]
    assert alg.stability_report().stable
    assert alg.dims_by_weight() == {0: 1, 2: 1, 4: 1, 6: 1, 8: 1}


def test_a1_window_dims_frozen():
    alg = zhu_algebra(BOSON, 1, 10)
    assert len(alg.reps) == 18
    assert alg.dims_by_weight() == {
        0: 1, 1: 1, 2: 1, 3: 1, 4: 2, 5: 2, 6: 2, 7: 2, 8: 2, 9: 2, 10: 2
    }
    algv = zhu_algebra(VIR, 1, 10)
    assert len(algv.reps) == 9
    assert algv.dims_by_weight() == {0: 1, 2: 1, 4: 1, 6: 2, 8: 2, 10: 2}


def test_window_error_on_escape():
    alg = zhu_algebra(BOSON, 0, 4)
    with pytest.raises(WindowError):
        alg.reduce({(5,): Q(1)})


def test_membership_certificate_resums():
    alg = zhu_algebra(VIR, 0, 8)
    elem = circ_n(VIR, one((2,)), one((2, 2)), 0)
    res = alg.o_membership(elem)
    assert res.member
    acc = {}
    for tag, c in res.certificate:
        add_scaled(acc, alg.generator_element(tag), c)
    assert acc == elem
    # a representative is never in O_n
    assert not alg.o_membership(one((2,))).member


# ------------------------------------------------- algebra laws mod O_n


@pytest.mark.parametrize("preset,level,window", [
    (BOSON, 0, 8), (BOSON, 1, 8), (VIR, 0, 10), (VIR, 1, 10),
])
def test_vacuum_is_unit(preset, level, window):
    alg = zhu_algebra(preset, level, window)
    for u in monomials_up_to(preset, window - 2 * level - preset.gen_weight):
        e = {u: Q(1)}
        left = star_n(preset, {(): Q(1)}, e, level)
        right = star_n(preset, e, {(): Q(1)}, level)
        if top_weight(right) <= window:
            assert alg.reduce(right) == alg.reduce(e), ("right", u)
        assert alg.reduce(left) == alg.reduce(e), ("left", u)


@pytest.mark.parametrize("preset,level,window", [
    (BOSON, 0, 8), (BOSON, 1, 10), (VIR, 1, 12),
])
def test_conformal_class_is_central(preset, level, window):
    alg = zhu_algebra(preset, level, window)
    conf = preset.conformal_state()
    bound = window - 2 - 2 * level
    for u in monomials_up_to(preset, bound):
        e = {u: Q(1)}
        d = star_n(preset, conf, e, level)
        add_scaled(d, star_n(preset, e, conf, level), -1)
        assert not alg.reduce(d), u


@pytest.mark.parametrize("preset,level,window", [
    (BOSON, 0, 9), (BOSON, 1, 11), (VIR, 0, 12),
])
def test_associativity_mod_o(preset, level, window):
    alg = zhu_algebra(preset, level, window)
    g = preset.gen_weight
    mons = [m for m in monomials_up_to(preset, 2 * g) if m]
    for u in mons:
        for v in mons:
            for w in mons:
                if sum(u) + sum(v) + sum(w) + 6 * level > window:
                    continue
                lhs = star_n(preset, star_n(preset, one(u), one(v), level),
                             one(w), level)
                rhs = star_n(preset, one(u),
                             star_n(preset, one(v), one(w), level), level)
                d = dict(lhs)
                add_scaled(d, rhs, -1)
                assert not alg.reduce(d), (u, v, w)


@pytest.mark.parametrize("preset,level,window", [
    (BOSON, 0, 9), (BOSON, 1, 11), (VIR, 0, 12), (VIR, 1, 14),
])
def test_o_is_an_ideal(preset, level, window):
    alg = zhu_algebra(preset, level, window)
    g = preset.gen_weight
    x = one((g,))
    circ = circ_n(preset, x, x, level)  # a small O_n element
    assert not alg.reduce(circ)
    left = star_n(preset, x, circ, level)
    right = star_n(preset, circ, x, level)
    assert not alg.reduce(left)
    assert not alg.reduce(right)


# ---------------------------------------------------------- presentations


def test_presentation_a0_boson():
    p = an_presentation(BOSON, 0, 8)
    cat = relation_catalog(BOSON)
    assert p.minimal_relations == [cat["level0"]]
    assert p.stability.stable
    assert p.dims_by_weight == {w: 1 for w in range(9)}


def test_presentation_a0_virasoro():
    p = an_presentation(VIR, 0, 8)
    cat = relation_catalog(VIR)
    assert p.minimal_relations == [cat["level0"]]
    assert p.stability.stable


def test_presentation_a1_boson():
    p = an_presentation(BOSON, 1, 10, pool_weight=4)
    cat = relation_catalog(BOSON)
    assert p.minimal_relations == [cat["level1_minimal"]]
    assert p.stability.stable
    assert p.evaluation_window == 10


def test_presentation_a1_virasoro():
    p = an_presentation(VIR, 1, 10, pool_weight=8)
    cat = relation_catalog(VIR)
    assert p.minimal_relations == [cat["level1_minimal"]]
    assert p.stability.stable
    assert p.evaluation_window == 12  # pool evaluation needed two more


def test_relation_certificates():
    for preset, expected_window in [(BOSON, 10), (VIR, 14)]:
        cat = relation_catalog(preset)
        cert = certify_relation(preset, 1, cat["level1_minimal"])
        assert cert.member
        assert cert.window == expected_window
        elem = poly_eval_state(preset, 1, cat["level1_minimal"])
        alg = zhu_algebra(preset, 1, cert.window)
        acc = {}
        for tag, c in cert.certificate:
            add_scaled(acc, alg.generator_element(tag), c)
        assert acc == elem


def test_level0_relations_certify():
    for preset in (BOSON, VIR):
        cat = relation_catalog(preset)
        cert = certify_relation(preset, 0, cat["level0"])
        assert cert.member


def test_idempotent_in_a1_boson():
    # e = (y - x*x)/2 satisfies e*e = e in A_1: e^2 - e = p0 p1 / 4
    cat = relation_catalog(BOSON)
    p0 = cat["level0"]
    esq_minus_e = poly_mul(p0, p0)
    add_scaled(esq_minus_e, p0, Q(-2))
    # (p0/2)^2 - p0/2 = (p0^2 - 2 p0)/4 = p0 p1 / 4
    quarter = {k: v / 4 for k, v in esq_minus_e.items()}
    expect = {k: v / 4 for k, v in poly_mul(cat["level0"], cat["level1"]).items()}
    assert quarter == expect
    # and the state it evaluates to is in O_1
    cert = certify_relation(BOSON, 1, quarter)
    assert cert.member


def test_poly_helpers():
    cat = relation_catalog(BOSON)
    assert poly_weight(cat["level1_minimal"], 1, 2) == 4
    assert poly_str(cat["level0"]) == "1*y - 1*x^2"
    p = poly_mul({(1, 0): Q(2)}, {(0, 1): Q(3), (0, 0): Q(1)})
    assert p == {(1, 1): Q(6), (1, 0): Q(2)}


def test_surjection_consistency_both_presets():
    rep = surjection_consistency(BOSON)
    assert rep["all_pass"]
    assert rep["level1_relation_image"] == {(): Q(-2)}
    repv = surjection_consistency(VIR)
    assert repv["all_pass"]
    assert repv["level1_relation_image"] == {(): Q(4), (2,): Q(-4)}


# ------------------------------------------------------------- properties

small_mon_boson = st.lists(st.integers(1, 2), min_size=1, max_size=2).map(
    lambda xs: tuple(sorted(xs, reverse=True))
)


@settings(max_examples=25)
@given(u=small_mon_boson, v=small_mon_boson)
def test_star_minus_star_next_level_in_o(u, v):
    # u *_1 v == u *_0 v modulo O_0 whenever both fit the window
    alg = zhu_algebra(BOSON, 0, 10)
    d = star_n(BOSON, one(u), one(v), 1)
    add_scaled(d, star_n(BOSON, one(u), one(v), 0), -1)
    assert not alg.reduce(d)


@settings(max_examples=25)
@given(u=small_mon_boson, v=small_mon_boson)
def test_circ_lands_in_o(u, v):
    for level, window in ((0, 10), (1, 10)):
        assume(sum(u) + sum(v) + 2 * level + 1 <= window)
        alg = zhu_algebra(BOSON, level, window)
        c = circ_n(BOSON, one(u), one(v), level)
        assert not alg.reduce(c)
        res = alg.o_membership(c)
        assert res.member
