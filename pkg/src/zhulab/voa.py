"""Mode algebra of two universal vertex algebras.

The two presets are a rank-one free boson (Heisenberg algebra, with the
momentum-shifted conformal vector) and the universal Virasoro algebra at
a chosen central charge.  Both are *generated by a single field*, which
is what makes the whole package tractable: every composite mode reduces
to words in the generator modes.

Normal-form monomials
---------------------
A state of the boson algebra is a combination of

    a(-k_1) ... a(-k_p) |0>,   k_1 >= ... >= k_p >= 1,

encoded as the tuple ``(k_1, ..., k_p)``; the Virasoro algebra uses

    L(-k_1) ... L(-k_p) |0>,   k_1 >= ... >= k_p >= 2

(no L(-1) on the vacuum).  Elements are ``dict`` mapping monomial tuples
to nonzero ``Fraction`` coefficients; the empty tuple is the vacuum.

Within a fixed weight, monomials are ordered lexicographically ascending,
so (1, 1) < (2) and (2, 2) < (3, 1); across weights, lower weight first.

Engine
------
:class:`ModeEngine` evaluates the vertex mode ``u_m`` of an arbitrary
state ``u`` on any *backend*: the algebra acting on itself
(:class:`VacuumBackend`), a highest-weight module, a Fock module with a
Jordan-block zero mode, or the free word spaces used to induce modules
(see :mod:`zhulab.modules` and :mod:`zhulab.induction`).  Composite
modes are expanded with the iterate recursion

    (a_n b)_m = sum_{i>=0} (-1)^i C(n, i)
                   ( a_{n-i} b_{m+i}  -  (-1)^n b_{n+m-i} a_i ),

where ``a`` is always the generator, so a backend only has to implement
single generator modes:

* boson:    a(m) itself (the generator a(-1)|0> has vertex modes a(m));
* Virasoro: L(m), the generator omega = L(-2)|0> having vertex modes
  omega_i = L(i-1).

C(n, i) is the generalized binomial coefficient, n being negative here.
The sum over i is truncated soundly using the backend's degree floor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .linalg import gbinom

HEISENBERG = "heisenberg"
VIRASORO = "virasoro"

# an element: monomial/key -> coefficient, zero coefficients pruned
Element = dict

__all__ = [
    "HEISENBERG",
    "VIRASORO",
    "Element",
    "VOAPreset",
    "VacuumBackend",
    "ModeEngine",
    "vacuum_engine",
    "add_scaled",
    "scaled",
    "elements_equal",
    "partitions_of",
    "weight_basis",
    "monomials_up_to",
    "monomial_key",
    "top_weight",
    "translate",
    "commutator_defect",
    "format_element",
]


# ---------------------------------------------------------------------------
# element helpers
# ---------------------------------------------------------------------------


def add_scaled(acc: Element, other: Element, coeff: Fraction | int = 1) -> Element:
    """acc += coeff * other, pruning zeros.  Mutates and returns acc."""
    if coeff:
        for k, v in other.items():
            nv = acc.get(k, 0) + coeff * v
            if nv:
                acc[k] = nv
            else:
                del acc[k]
    return acc


def scaled(elem: Element, coeff: Fraction | int) -> Element:
    return {k: coeff * v for k, v in elem.items()} if coeff else {}


def elements_equal(x: Element, y: Element) -> bool:
    return {k: v for k, v in x.items() if v} == {k: v for k, v in y.items() if v}


def monomial_key(mon: tuple[int, ...]) -> tuple:
    """Sort key implementing the canonical order: weight, then lex."""
    return (sum(mon), mon)


def top_weight(elem: Element) -> int:
    """Largest monomial weight present (vacuum counts as 0); -1 if empty."""
    return max((sum(mon) for mon in elem), default=-1)


def format_element(preset: "VOAPreset", elem: Element) -> str:
    if not elem:
        return "0"
    letter = "a" if preset.kind == HEISENBERG else "L"
    bits = []
    for mon in sorted(elem, key=monomial_key):
        c = elem[mon]
        word = "".join(f"{letter}(-{k})" for k in mon) + "|0>"
        bits.append(f"({c}) {word}")
    return " + ".join(bits)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VOAPreset:
    """Which universal algebra, plus its structure parameter.

    ``kind == "heisenberg"``: ``param`` is the momentum shift entering the
    conformal vector  1/2 a(-1)^2|0> + param * a(-2)|0>, so the central
    charge is 1 - 12 param^2.

    ``kind == "virasoro"``: ``param`` is the central charge.
    """

    kind: str
    param: Fraction

    def __post_init__(self):
        if self.kind not in (HEISENBERG, VIRASORO):
            raise ValueError(f"unknown preset kind: {self.kind!r}")
        object.__setattr__(self, "param", Fraction(self.param))

    @property
    def gen_weight(self) -> int:
        return 1 if self.kind == HEISENBERG else 2

    @property
    def min_part(self) -> int:
        # smallest part allowed in a vacuum-module monomial
        return 1 if self.kind == HEISENBERG else 2

    @property
    def generator(self) -> tuple[int, ...]:
        return (self.gen_weight,)

    @property
    def central_charge(self) -> Fraction:
        if self.kind == HEISENBERG:
            return 1 - 12 * self.param**2
        return self.param

    def vertex_to_lie(self, i: int) -> int:
        """Lie mode corresponding to the generator's vertex mode ``i``."""
        return i if self.kind == HEISENBERG else i - 1

    def conformal_state(self) -> Element:
        if self.kind == HEISENBERG:
            out: Element = {(1, 1): Fraction(1, 2)}
            if self.param:
                out[(2,)] = Fraction(self.param)
            return out
        return {(2,): Fraction(1)}

    def describe(self) -> str:
        if self.kind == HEISENBERG:
            return f"free boson, momentum shift {self.param} (c = {self.central_charge})"
        return f"universal Virasoro, c = {self.param}"


# ---------------------------------------------------------------------------
# partitions / weight bases
# ---------------------------------------------------------------------------


def partitions_of(
    total: int, min_part: int = 1, max_part: int | None = None
) -> Iterator[tuple[int, ...]]:
    """Partitions of ``total`` as descending tuples, lex-ascending order.

    Lex-ascending on descending tuples puts many-small-parts first:
    (1,1,1) < (2,1) < (3).
    """
    if total == 0:
        yield ()
        return
    if total < min_part:
        return
    top = total if max_part is None else min(max_part, total)
    # first (largest) part last: recurse smallest-leading first
    for first in range(min_part, top + 1):
        if total - first == 0:
            yield (first,)
        else:
            for rest in partitions_of(total - first, min_part, first):
                if rest and rest[0] > first:
                    continue
                yield (first,) + rest


def weight_basis(preset: VOAPreset, weight: int) -> list[tuple[int, ...]]:
    """Normal-form monomials of the given weight, canonically ordered."""
    return sorted(partitions_of(weight, preset.min_part))


def monomials_up_to(preset: VOAPreset, max_weight: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    for w in range(max_weight + 1):
        out.extend(weight_basis(preset, w))
    return out


# ---------------------------------------------------------------------------
# the algebra acting on itself
# ---------------------------------------------------------------------------


def _insert_part(mon: tuple[int, ...], k: int) -> tuple[int, ...]:
    pos = 0
    while pos < len(mon) and mon[pos] >= k:
        pos += 1
    return mon[:pos] + (k,) + mon[pos:]


def _remove_part(mon: tuple[int, ...], k: int) -> tuple[int, ...]:
    idx = mon.index(k)
    return mon[:idx] + mon[idx + 1 :]


class VacuumBackend:
    """The algebra acting on itself; keys are normal-form monomials."""

    min_deg = 0

    def __init__(self, preset: VOAPreset):
        self.preset = preset
        self._memo: dict = {}

    def key_degree(self, key: tuple[int, ...]) -> int:
        return sum(key)

    def gen_mode(self, m: int, key: tuple[int, ...]) -> Element:
        """Single generator Lie mode: a(m) or L(m) on a monomial."""
        ck = (m, key)
        hit = self._memo.get(ck)
        if hit is None:
            if self.preset.kind == HEISENBERG:
                hit = self._boson(m, key)
            else:
                hit = self._vir(m, key)
            self._memo[ck] = hit
        return hit

    def _boson(self, m: int, key: tuple[int, ...]) -> Element:
        if m < 0:
            return {_insert_part(key, -m): Fraction(1)}
        if m == 0:
            return {}  # zero momentum on the vacuum module
        cnt = key.count(m)
        if not cnt:
            return {}
        return {_remove_part(key, m): Fraction(m * cnt)}

    def _vir(self, m: int, key: tuple[int, ...]) -> Element:
        if not key:
            if m <= -2:
                return {(-m,): Fraction(1)}
            return {}  # L(m)|0> = 0 for m >= -1
        s = key[0]
        rest = key[1:]
        if m <= -2 and -m >= s:
            return {(-m,) + key: Fraction(1)}
        # L(m) L(-s) = L(-s) L(m) + (m+s) L(m-s) + delta_{m,s} (m^3-m)/12 c
        out: Element = {}
        add_scaled(out, self.gen_mode(m - s, rest), m + s)
        if m == s:
            add_scaled(out, {rest: Fraction(1)}, Fraction(m**3 - m, 12) * self.preset.param)
        for mon, coeff in self.gen_mode(m, rest).items():
            add_scaled(out, self.gen_mode(-s, mon), coeff)
        return out


# ---------------------------------------------------------------------------
# the engine
# ---------------------------------------------------------------------------


class ModeEngine:
    """Evaluates vertex modes of arbitrary states on a backend.

    A backend provides:

    * ``gen_mode(m, key) -> Element``  -- single generator Lie mode;
    * ``key_degree(key) -> int``;
    * ``min_deg`` -- a floor: any result landing strictly below this
      degree is zero (used to truncate the iterate sum soundly).

    Results are cached; returned dicts are shared and must not be
    mutated by callers.
    """

    def __init__(self, preset: VOAPreset, backend):
        self.preset = preset
        self.backend = backend
        self._memo: dict = {}

    # -- monomial modes ------------------------------------------------

    def act(self, u: tuple[int, ...], m: int, key) -> Element:
        """The mode ``u_m`` of the normal-form monomial ``u`` on ``key``."""
        ck = (u, m, key)
        hit = self._memo.get(ck)
        if hit is None:
            hit = self._expand(u, m, key)
            self._memo[ck] = hit
        return hit

    def _expand(self, u: tuple[int, ...], m: int, key) -> Element:
        if not u:
            # vacuum: |0>_m = delta_{m,-1} id
            return {key: Fraction(1)} if m == -1 else {}
        gen = self.preset.gen_weight
        if len(u) == 1 and u[0] == gen:
            return self.backend.gen_mode(self.preset.vertex_to_lie(m), key)
        # u = a_n b exactly, a the generator:
        #   boson:    u = a(-k1) b,      n = -k1
        #   Virasoro: u = L(-k1) b = omega_{1-k1} b,  n = 1 - k1
        k1 = u[0]
        b = u[1:]
        n = -k1 if self.preset.kind == HEISENBERG else 1 - k1
        wt_b = sum(b)
        d = self.backend.key_degree(key)
        floor = self.backend.min_deg
        # b_{m+i} key lands at degree d + wt_b - (m+i) - 1: dead below floor
        i_b = d + wt_b - m - 1 - floor
        # a_i key lands at degree d + gen - i - 1: dead below floor
        i_a = d + gen - 1 - floor
        sign_n = -1 if n % 2 else 1
        out: Element = {}
        gen_mon = (gen,)
        for i in range(0, max(i_b, i_a) + 1):
            cb = gbinom(n, i) * (1 - 2 * (i % 2))
            if not cb:
                continue
            if i <= i_b:
                inner = self.act(b, m + i, key)
                for k2, c2 in inner.items():
                    add_scaled(out, self.act(gen_mon, n - i, k2), cb * c2)
            if i <= i_a:
                inner = self.act(gen_mon, i, key)
                for k2, c2 in inner.items():
                    add_scaled(out, self.act(b, n + m - i, k2), -sign_n * cb * c2)
        return out

    # -- linear extensions ----------------------------------------------

    def apply(self, state: Element | tuple, m: int, elem: Element) -> Element:
        """``(sum_u c_u u)_m`` applied to ``sum_k d_k key``."""
        if isinstance(state, tuple):
            state = {state: Fraction(1)}
        out: Element = {}
        for u, cu in state.items():
            for k, ck in elem.items():
                add_scaled(out, self.act(u, m, k), cu * ck)
        return out

    def zero_mode(self, state: Element | tuple, elem: Element) -> Element:
        """o(state) = sum over homogeneous pieces u of u_{wt u - 1}."""
        if isinstance(state, tuple):
            state = {state: Fraction(1)}
        out: Element = {}
        for u, cu in state.items():
            for k, ck in elem.items():
                add_scaled(out, self.act(u, sum(u) - 1, k), cu * ck)
        return out


_VACUUM_ENGINES: dict[VOAPreset, ModeEngine] = {}


def vacuum_engine(preset: VOAPreset) -> ModeEngine:
    """Shared, memoized engine for the algebra acting on itself."""
    eng = _VACUUM_ENGINES.get(preset)
    if eng is None:
        eng = ModeEngine(preset, VacuumBackend(preset))
        _VACUUM_ENGINES[preset] = eng
    return eng


# ---------------------------------------------------------------------------
# standard operators on the algebra
# ---------------------------------------------------------------------------


def translate(preset: VOAPreset, elem: Element) -> Element:
    """L(-1) on the vacuum module.

    For the boson this is the derivation sending each a(-k) to k a(-k-1);
    for Virasoro it is a genuine L(-1) commutation, done by the backend.
    Keeping the boson path independent of the engine gives the tests a
    cross-check of the conformal structure.
    """
    out: Element = {}
    if preset.kind == HEISENBERG:
        for mon, coeff in elem.items():
            for k in set(mon):
                bumped = _insert_part(_remove_part(mon, k), k + 1)
                add_scaled(out, {bumped: Fraction(1)}, coeff * k * mon.count(k))
    else:
        backend = vacuum_engine(preset).backend
        for mon, coeff in elem.items():
            add_scaled(out, backend.gen_mode(-1, mon), coeff)
    return out


def engine_commutator_defect(
    engine: ModeEngine,
    u: tuple[int, ...],
    m: int,
    v: tuple[int, ...],
    k: int,
    key,
) -> Element:
    """[u_m, v_k] key  -  sum_j C(m, j) (u_j v)_{m+k-j} key  on any backend.

    The engine implements the iterate identity; the commutator identity is
    an independent consequence, so a vanishing defect over random inputs is
    strong evidence the expansion is right on that backend.  The products
    u_j v are states, computed on the vacuum module of the same preset;
    C(m, j) is generalized, and the j-sum is finite because u_j v = 0 once
    its weight would go negative.
    """
    state_eng = vacuum_engine(engine.preset)
    lhs: Element = {}
    for k2, c2 in engine.act(v, k, key).items():
        add_scaled(lhs, engine.act(u, m, k2), c2)
    for k2, c2 in engine.act(u, m, key).items():
        add_scaled(lhs, engine.act(v, k, k2), -c2)
    for j in range(0, sum(u) + sum(v) + 1):
        cj = gbinom(m, j)
        if not cj:
            continue
        ujv = state_eng.act(u, j, v)
        for mon, c2 in ujv.items():
            add_scaled(lhs, engine.act(mon, m + k - j, key), -cj * c2)
    return lhs


def commutator_defect(
    preset: VOAPreset,
    u: tuple[int, ...],
    m: int,
    v: tuple[int, ...],
    k: int,
    w: tuple[int, ...],
) -> Element:
    """The defect on the algebra acting on itself (see above)."""
    return engine_commutator_defect(vacuum_engine(preset), u, m, v, k, w)
