from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from zhulab.voa import (
    HEISENBERG,
    VIRASORO,
    ModeEngine,
    VOAPreset,
    VacuumBackend,
    add_scaled,
    commutator_defect,
    elements_equal,
    monomial_key,
    monomials_up_to,
    partitions_of,
    top_weight,
    translate,
    vacuum_engine,
    weight_basis,
)

Q = Fraction

BOSON = VOAPreset(HEISENBERG, Q(0))
BOSON_SHIFTED = VOAPreset(HEISENBERG, Q(1, 2))
VIR = VOAPreset(VIRASORO, Q(1, 2))
VIR_GENERIC = VOAPreset(VIRASORO, Q(-7, 3))


# ------------------------------------------------------------------ presets


def test_preset_basics():
    assert BOSON.gen_weight == 1 and VIR.gen_weight == 2
    assert BOSON_SHIFTED.central_charge == 1 - 12 * Q(1, 4)  # = -2
    assert VIR.central_charge == Q(1, 2)
    assert BOSON.conformal_state() == {(1, 1): Q(1, 2)}
    assert BOSON_SHIFTED.conformal_state() == {(1, 1): Q(1, 2), (2,): Q(1, 2)}
    assert VIR.conformal_state() == {(2,): Q(1)}
    with pytest.raises(ValueError):
        VOAPreset("lattice", Q(1))


def test_weight_basis_counts_and_order():
    # boson: all partitions; Virasoro: partitions into parts >= 2
    assert weight_basis(BOSON, 3) == [(1, 1, 1), (2, 1), (3,)]
    assert weight_basis(VIR, 4) == [(2, 2), (4,)]
    assert weight_basis(VIR, 1) == []
    assert weight_basis(VIR, 0) == [()]
    assert len(weight_basis(BOSON, 8)) == 22
    # canonical order: weight first, then lex ascending
    mons = monomials_up_to(BOSON, 3)
    assert mons == sorted(mons, key=monomial_key)
    assert mons.index((1, 1)) < mons.index((2,))


def test_partitions_respect_caps():
    assert list(partitions_of(4, 2)) == [(2, 2), (4,)]
    assert list(partitions_of(4, 1, 2)) == [(1, 1, 1, 1), (2, 1, 1), (2, 2)]
    assert list(partitions_of(0)) == [()]


# ------------------------------------------------------------- base actions


def test_boson_single_modes():
    be = VacuumBackend(BOSON)
    assert be.gen_mode(-2, (1,)) == {(2, 1): Q(1)}
    assert be.gen_mode(1, (1, 1)) == {(1,): Q(2)}  # two ways to contract
    assert be.gen_mode(2, (2, 2, 1)) == {(2, 1): Q(4)}
    assert be.gen_mode(3, (2, 1)) == {}
    assert be.gen_mode(0, (2, 1)) == {}  # zero momentum


def test_virasoro_single_modes():
    be = VacuumBackend(VIR)
    c = VIR.param
    assert be.gen_mode(-3, ()) == {(3,): Q(1)}
    assert be.gen_mode(-1, ()) == {}  # L(-1)|0> = 0
    assert be.gen_mode(0, (2,)) == {(2,): Q(2)}  # L(0) omega = 2 omega
    assert be.gen_mode(1, (2,)) == {}  # L(1) omega = 3 L(-1)|0> = 0
    assert be.gen_mode(2, (2,)) == {(): c / 2}  # L(2) omega = c/2 |0>
    # L(-1) omega = L(-3)|0>
    assert be.gen_mode(-1, (2,)) == {(3,): Q(1)}
    # L(-2) applied out of order: L(-2) L(-3)|0> = L(-3)L(-2)|0> + L(-5)|0>
    assert be.gen_mode(-2, (3,)) == {(3, 2): Q(1), (5,): Q(1)}


def test_virasoro_grading_operator():
    be = VacuumBackend(VIR_GENERIC)
    for mon in monomials_up_to(VIR_GENERIC, 6):
        assert be.gen_mode(0, mon) == ({mon: Q(sum(mon))} if mon else {})


# ------------------------------------------------------------------- engine


def engine_mode(preset, u, m, v):
    return vacuum_engine(preset).act(tuple(u), m, tuple(v))


def test_vacuum_modes():
    # |0>_m = delta_{m,-1} id
    assert engine_mode(BOSON, (), -1, (2, 1)) == {(2, 1): Q(1)}
    assert engine_mode(BOSON, (), 0, (2, 1)) == {}
    assert engine_mode(VIR, (), -2, (2,)) == {}


@pytest.mark.parametrize("preset", [BOSON, BOSON_SHIFTED, VIR, VIR_GENERIC])
def test_creation_axiom(preset):
    # u_{-1}|0> must reproduce u itself, through the full iterate recursion
    for u in monomials_up_to(preset, 6):
        assert engine_mode(preset, u, -1, ()) == {u: Q(1)}, u


@pytest.mark.parametrize("preset", [BOSON, VIR])
def test_annihilation_on_vacuum(preset):
    for u in monomials_up_to(preset, 5):
        for m in range(0, 4):
            assert engine_mode(preset, u, m, ()) == {}


@pytest.mark.parametrize("preset", [BOSON_SHIFTED, VIR_GENERIC])
def test_mode_grading(preset):
    for u in monomials_up_to(preset, 4):
        if not u:
            continue
        for v in monomials_up_to(preset, 4):
            for m in range(-3, sum(u) + sum(v) + 1):
                res = engine_mode(preset, u, m, v)
                target = sum(u) + sum(v) - m - 1
                for mon in res:
                    assert sum(mon) == target


def test_boson_translated_generator_modes():
    # (a(-k)|0>)_m = (-1)^(k-1) C(m, k-1) a(m-k+1): frozen closed form
    import math

    eng = vacuum_engine(BOSON)
    be = eng.backend
    for k in range(1, 5):
        for m in range(-4, 6):
            got = eng.act((k,), m, (3, 1))
            coeff = (-1) ** (k - 1) * _gbinom(m, k - 1)
            want = {}
            add_scaled(want, be.gen_mode(m - k + 1, (3, 1)), coeff)
            assert got == want, (k, m)


def _gbinom(n, k):
    from zhulab.linalg import gbinom

    return gbinom(n, k)


def test_omega_modes_on_omega():
    # frozen hand values for the Virasoro generator
    c = VIR_GENERIC.param
    assert engine_mode(VIR_GENERIC, (2,), 0, (2,)) == {(3,): Q(1)}
    assert engine_mode(VIR_GENERIC, (2,), 1, (2,)) == {(2,): Q(2)}
    assert engine_mode(VIR_GENERIC, (2,), 2, (2,)) == {}
    assert engine_mode(VIR_GENERIC, (2,), 3, (2,)) == {(): c / 2}
    assert engine_mode(VIR_GENERIC, (2,), -1, (2,)) == {(2, 2): Q(1)}
    assert engine_mode(VIR_GENERIC, (2,), -2, (2,)) == {(3, 2): Q(1)}


def test_composite_zero_mode_expansion():
    # o(L(-2)^2|0>) = L(0)^2 + 2 L(0) + 2 sum_{i>=1} L(-i)L(i), checked on
    # every monomial of weight <= 6.  This pins the iterate expansion of a
    # genuinely composite state against a hand calculation.
    preset = VIR_GENERIC
    eng = vacuum_engine(preset)
    be = eng.backend
    for w in monomials_up_to(preset, 6):
        got = eng.act((2, 2), 3, w)  # weight 4 state, zero mode = u_3
        want = {}
        l0w = be.gen_mode(0, w)
        add_scaled(want, l0w, 2)
        for mon, coeff in l0w.items():
            add_scaled(want, be.gen_mode(0, mon), coeff)
        for i in range(1, sum(w) + 2):
            liw = be.gen_mode(i, w)
            for mon, coeff in liw.items():
                add_scaled(want, be.gen_mode(-i, mon), 2 * coeff)
        assert got == want, w


def test_boson_composite_mode_hand_value():
    # (a(-1)^2|0>)_3 on a(-1)|0>: normal ordering gives
    # sum_{i} :a(i) a(3-1-i):, only a(1)a(1), a(0)a(2), ... contribute;
    # on a(-1)|0> everything dies except a(1)a(1) routes -> 0, and
    # a(-1)a(3)-type terms -> 0.  Net: zero.
    assert engine_mode(BOSON, (1, 1), 3, (1,)) == {}
    # the zero mode o(a(-1)^2|0>) = a(0)^2 + 2 sum_{i>=1} a(-i)a(i) is
    # twice the part-counting operator on the vacuum module:
    # on a(-1)|0>: 2 * a(-1)a(1) -> 2
    assert engine_mode(BOSON, (1, 1), 1, (1,)) == {(1,): Q(2)}
    # on a(-2)a(-1)|0>: 2 * (1*(2,1) + 2*(2,1)) = 6
    assert engine_mode(BOSON, (1, 1), 1, (2, 1)) == {(2, 1): Q(6)}


def test_translate_virasoro():
    assert translate(VIR, {(2,): Q(1)}) == {(3,): Q(1)}
    # L(-1) L(-2)^2 |0> = 2 L(-3)L(-2)|0> + L(-5)|0>  (the second term from
    # straightening L(-2)L(-3) back into normal order)
    assert translate(VIR, {(2, 2): Q(1)}) == {(3, 2): Q(2), (5,): Q(1)}


def test_translate_boson_matches_engine():
    # derivation formula == zero mode of the conformal vector, for both
    # values of the momentum shift (the shift term contributes nothing)
    for preset in (BOSON, BOSON_SHIFTED):
        eng = vacuum_engine(preset)
        conf = preset.conformal_state()
        for mon in monomials_up_to(preset, 5):
            via_engine = eng.apply(conf, 0, {mon: Q(1)})
            assert translate(preset, {mon: Q(1)}) == via_engine, mon


def test_zero_mode_of_conformal_is_grading():
    # o(omega) = L(0): eigenvalue = weight on the vacuum module (boson at
    # zero shift; with a nonzero shift a correction appears only on
    # non-vacuum Fock modules, not here)
    for preset in (BOSON, BOSON_SHIFTED, VIR_GENERIC):
        eng = vacuum_engine(preset)
        conf = preset.conformal_state()
        for mon in monomials_up_to(preset, 5):
            got = eng.zero_mode(conf, {mon: Q(1)})
            want = {mon: Q(sum(mon))} if mon else {}
            assert got == want, (preset.kind, mon)


def test_translation_covariance():
    # (L(-1)u)_m = -m u_{m-1}, a derived identity the engine must satisfy
    for preset in (BOSON_SHIFTED, VIR_GENERIC):
        eng = vacuum_engine(preset)
        for u in monomials_up_to(preset, 4):
            tu = translate(preset, {u: Q(1)})
            for v in monomials_up_to(preset, 3):
                for m in range(-2, 6):
                    lhs = eng.apply(tu, m, {v: Q(1)})
                    rhs = {}
                    add_scaled(rhs, eng.act(u, m - 1, v), -m)
                    assert elements_equal(lhs, rhs), (u, m, v)


# ------------------------------------------------- commutator cross-check

mon_boson = st.lists(st.integers(1, 3), min_size=0, max_size=3).map(
    lambda xs: tuple(sorted(xs, reverse=True))
)
mon_vir = st.lists(st.integers(2, 4), min_size=0, max_size=2).map(
    lambda xs: tuple(sorted(xs, reverse=True))
)
modes = st.integers(-3, 4)


@given(u=mon_boson, m=modes, v=mon_boson, k=modes, w=mon_boson)
def test_commutator_identity_boson(u, m, v, k, w):
    assert commutator_defect(BOSON_SHIFTED, u, m, v, k, w) == {}


@given(u=mon_vir, m=modes, v=mon_vir, k=modes, w=mon_vir)
def test_commutator_identity_virasoro(u, m, v, k, w):
    assert commutator_defect(VIR_GENERIC, u, m, v, k, w) == {}


def test_commutator_identity_deep_modes():
    # a couple of deliberately awkward fixed cases with deep negative modes
    assert commutator_defect(BOSON, (2, 1), -5, (1, 1), 3, (2,)) == {}
    assert commutator_defect(VIR, (2, 2), -4, (3,), 2, (2,)) == {}


def test_engine_results_are_cached_and_stable():
    eng = vacuum_engine(VIR)
    first = eng.act((2, 2), 3, (2,))
    second = eng.act((2, 2), 3, (2,))
    assert first is second  # shared cache entry
    assert top_weight(first) == 4 + 2 - 3 - 1
