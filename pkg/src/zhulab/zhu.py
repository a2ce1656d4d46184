"""Level-n Zhu algebras of the preset algebras, through weight windows.

For a vertex algebra V and a level n >= 0, the n-th Zhu algebra is
A_n = V / O_n, where O_n is spanned by the products

    u o_n v = sum_{j=0}^{wt u + n} C(wt u + n, j) u_{j-2n-2} v

together with (L(-1) + L(0)) u, and multiplication descends from

    u *_n v = sum_{m=0}^{n} (-1)^m C(m+n, n)
                sum_{j=0}^{wt u + n} C(wt u + n, j) u_{j-n-m-1} v

(both extended linearly, with each monomial of u using its own weight in
the binomials).  A_n is infinite dimensional for both presets, so
everything here is computed through an explicit weight window: the space
of states of weight <= max_weight modulo the in-window part of O_n.
Every reported object carries its window, and
:meth:`ZhuAlgebra.stability_report` compares against the next smaller
window so that window artifacts are flagged instead of silently trusted.

Monomials are ordered by (weight, lex); reduction pivots eliminate the
*greatest* monomial of each relation, so coset representatives are the
least monomials, and reduction can only decrease weights.

The polynomial presentation machinery expresses the window of A_n in two
commuting generators

    x = class of the generator state  (a(-1)|0>, resp. omega),
    y = class of its square           (a(-1)^2|0>, resp. L(-2)^2|0>),

finds all polynomial relations supported on a pool of monomials x^i y^j,
extracts a minimal generating set, and can certify each relation by
exhibiting the evaluated state as an explicit combination of O_n
generators (re-checkable by plain summation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .linalg import RationalMatrix, Subspace, kernel_basis, qstr
from .voa import (
    HEISENBERG,
    Element,
    VOAPreset,
    add_scaled,
    monomial_key,
    monomials_up_to,
    scaled,
    top_weight,
    translate,
    vacuum_engine,
)

__all__ = [
    "WindowError",
    "circ_n",
    "star_n",
    "shift_element",
    "ZhuAlgebra",
    "zhu_algebra",
    "MembershipResult",
    "StabilityReport",
    "an_presentation",
    "Presentation",
    "PolyRelation",
    "RelationCertificate",
    "certify_relation",
    "class_polynomial",
    "poly_mul",
    "poly_weight",
    "poly_str",
    "poly_eval_state",
    "relation_catalog",
    "surjection_consistency",
]


class WindowError(ValueError):
    """An exact computation escaped the configured weight window."""


# ---------------------------------------------------------------------------
# the two bilinear products
# ---------------------------------------------------------------------------


def circ_n(preset: VOAPreset, u: Element, v: Element, n: int) -> Element:
    eng = vacuum_engine(preset)
    out: Element = {}
    for umon, cu in u.items():
        wtu = sum(umon)
        for j in range(0, wtu + n + 1):
            cj = math.comb(wtu + n, j) * cu
            for vmon, cv in v.items():
                add_scaled(out, eng.act(umon, j - 2 * n - 2, vmon), cj * cv)
    return out


def star_n(preset: VOAPreset, u: Element, v: Element, n: int) -> Element:
    eng = vacuum_engine(preset)
    out: Element = {}
    for umon, cu in u.items():
        wtu = sum(umon)
        for m in range(0, n + 1):
            cm = (-1) ** m * math.comb(m + n, n) * cu
            for j in range(0, wtu + n + 1):
                cj = math.comb(wtu + n, j) * cm
                for vmon, cv in v.items():
                    add_scaled(out, eng.act(umon, j - n - m - 1, vmon), cj * cv)
    return out


def shift_element(preset: VOAPreset, u: Element) -> Element:
    """(L(-1) + L(0)) u, the translation-type generators of O_n."""
    out = translate(preset, u)
    for mon, c in u.items():
        add_scaled(out, {mon: Fraction(1)}, c * sum(mon))
    return out


# ---------------------------------------------------------------------------
# windowed quotient
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MembershipResult:
    """Outcome of an O_n membership test inside a weight window."""

    member: bool
    window: int
    # (tag, coefficient) pairs over the O_n generators; tags are
    # ("shift", u, None) or ("circ", u, v).  None when not a member.
    certificate: tuple | None


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    window: int
    detail: str


class ZhuAlgebra:
    """The window V_{<= max_weight} / (O_n cap V_{<= max_weight}).

    Built from in-window O_n generators only; enlarging the window can
    merge cosets, which is exactly what :meth:`stability_report` checks.
    """

    def __init__(self, preset: VOAPreset, level: int, max_weight: int):
        if level < 0:
            raise ValueError("level must be >= 0")
        self.preset = preset
        self.level = level
        self.max_weight = max_weight
        self.monomials = monomials_up_to(preset, max_weight)  # ascending
        self._index = {m: i for i, m in enumerate(self.monomials)}
        n_cols = len(self.monomials)
        self.tags: list[tuple] = []
        vecs: list[list[Fraction]] = []
        for u in self.monomials:
            if not u or sum(u) + 1 > max_weight:
                continue
            vecs.append(self._vectorize(shift_element(preset, {u: Fraction(1)})))
            self.tags.append(("shift", u, None))
        for u in self.monomials:
            if not u:
                continue
            for v in self.monomials:
                if sum(u) + sum(v) + 2 * level + 1 > max_weight:
                    continue
                prod = circ_n(preset, {u: Fraction(1)}, {v: Fraction(1)}, level)
                vecs.append(self._vectorize(prod))
                self.tags.append(("circ", u, v))
        self.osub = Subspace.from_generators(vecs, n_cols)
        piv = set(self.osub.pivots)
        rep_cols = [c for c in range(n_cols) if c not in piv]
        self.reps = sorted((self._mon_of_col(c) for c in rep_cols), key=monomial_key)

    # -- coordinates: column c <-> monomial number (N-1-c), descending ----

    def _col_of_mon(self, mon: tuple[int, ...]) -> int:
        return len(self.monomials) - 1 - self._index[mon]

    def _mon_of_col(self, col: int) -> tuple[int, ...]:
        return self.monomials[len(self.monomials) - 1 - col]

    def _vectorize(self, elem: Element) -> list[Fraction]:
        vec = [Fraction(0)] * len(self.monomials)
        for mon, c in elem.items():
            idx = self._index.get(mon)
            if idx is None:
                raise WindowError(
                    f"state of weight {sum(mon)} escapes window {self.max_weight}"
                )
            vec[len(self.monomials) - 1 - idx] = Fraction(c)
        return vec

    def generator_element(self, tag: tuple) -> Element:
        """The O_n generator element a certificate tag refers to."""
        kind, u, v = tag
        if kind == "shift":
            return shift_element(self.preset, {u: Fraction(1)})
        return circ_n(self.preset, {u: Fraction(1)}, {v: Fraction(1)}, self.level)

    # -- quotient operations ---------------------------------------------

    def reduce(self, elem: Element) -> dict[tuple[int, ...], Fraction]:
        """Class of elem as a combination of representative monomials."""
        residual, _ = self.osub.reduce(self._vectorize(elem))
        out: dict = {}
        for col, c in enumerate(residual):
            if c:
                out[self._mon_of_col(col)] = c
        return out

    def o_membership(self, elem: Element) -> MembershipResult:
        cert = self.osub.membership_certificate(self._vectorize(elem))
        if cert is None:
            return MembershipResult(False, self.max_weight, None)
        pairs = tuple((self.tags[i], c) for i, c in cert)
        return MembershipResult(True, self.max_weight, pairs)

    def star_classes(self, c1: dict, c2: dict) -> dict:
        """Product of two classes given in representative coordinates."""
        out: dict = {}
        for m1, a1 in c1.items():
            for m2, a2 in c2.items():
                prod = star_n(
                    self.preset, {m1: Fraction(1)}, {m2: Fraction(1)}, self.level
                )
                add_scaled(out, self.reduce(prod), a1 * a2)
        return out

    def class_of(self, elem: Element) -> dict:
        return self.reduce(elem)

    def dims_by_weight(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for r in self.reps:
            out[sum(r)] = out.get(sum(r), 0) + 1
        return out

    def stability_report(self) -> StabilityReport:
        """Compare with the window one smaller.

        Stable means: the representative sets agree up to weight W-1, and
        every monomial of weight <= W-1 reduces identically in both
        windows.  An unstable window means in-window O_n generators are
        still missing relations and nothing at the boundary should be
        trusted.
        """
        w = self.max_weight
        if w == 0:
            return StabilityReport(True, w, "window 0 is trivially stable")
        smaller = zhu_algebra(self.preset, self.level, w - 1)
        mine = [r for r in self.reps if sum(r) <= w - 1]
        if mine != smaller.reps:
            return StabilityReport(
                False, w, f"representatives differ at window {w - 1}: "
                f"{len(mine)} vs {len(smaller.reps)}"
            )
        for mon in smaller.monomials:
            if self.reduce({mon: Fraction(1)}) != smaller.reduce({mon: Fraction(1)}):
                return StabilityReport(
                    False, w, f"reduction of {mon} changed between windows"
                )
        return StabilityReport(True, w, "representatives and reductions agree")


_ALGEBRA_CACHE: dict[tuple, ZhuAlgebra] = {}


def zhu_algebra(preset: VOAPreset, level: int, max_weight: int) -> ZhuAlgebra:
    key = (preset, level, max_weight)
    alg = _ALGEBRA_CACHE.get(key)
    if alg is None:
        alg = ZhuAlgebra(preset, level, max_weight)
        _ALGEBRA_CACHE[key] = alg
    return alg


# ---------------------------------------------------------------------------
# polynomials in the two generators
# ---------------------------------------------------------------------------

# a polynomial is a dict {(i, j): coeff} standing for sum c_ij x^i y^j

Poly = dict


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            add_scaled(out, {(i1 + i2, j1 + j2): Fraction(1)}, c1 * c2)
    return out


def poly_weight(p: Poly, wtx: int, wty: int) -> int:
    return max((i * wtx + j * wty for (i, j) in p), default=0)


def _pool_key(ij: tuple[int, int], wtx: int, wty: int) -> tuple:
    i, j = ij
    return (i * wtx + j * wty, j, i)


def poly_str(p: Poly, wtx: int = 1, wty: int = 2) -> str:
    if not p:
        return "0"
    bits = []
    for (i, j) in sorted(p, key=lambda ij: _pool_key(ij, wtx, wty), reverse=True):
        c = p[(i, j)]
        mon = "".join(
            (f"x^{i}" if i > 1 else "x" if i == 1 else "",
             f"y^{j}" if j > 1 else "y" if j == 1 else "")
        )
        if not mon:
            mon = "1"
        coeff = qstr(c)
        bits.append(f"{coeff}*{mon}" if mon != "1" else coeff)
    return " + ".join(bits).replace("+ -", "- ")


def generator_states(preset: VOAPreset) -> tuple[tuple, tuple]:
    g = preset.gen_weight
    return (g,), (g, g)


def poly_eval_state(preset: VOAPreset, level: int, poly: Poly) -> Element:
    """Evaluate a polynomial as a state, via left-folded *_level products.

    x^i y^j is evaluated as x * (x * ... (y * (y * ... y))), with the
    convention that the empty product is the vacuum.  Any bracketing
    represents the same class of A_level, which is all a certificate
    needs.
    """
    xs, ys = generator_states(preset)
    # bottom out at the bare generator states: the vacuum is only a unit
    # modulo O_n, and a trailing *|0> would inflate the weight window
    cache: dict[tuple[int, int], Element] = {
        (0, 0): {(): Fraction(1)},
        (1, 0): {xs: Fraction(1)},
        (0, 1): {ys: Fraction(1)},
    }

    def ev(i: int, j: int) -> Element:
        got = cache.get((i, j))
        if got is None:
            if i:
                got = star_n(preset, {xs: Fraction(1)}, ev(i - 1, j), level)
            else:
                got = star_n(preset, {ys: Fraction(1)}, ev(0, j - 1), level)
            cache[(i, j)] = got
        return got

    out: Element = {}
    for (i, j), c in poly.items():
        if (i, j) == (0, 0):
            add_scaled(out, {(): Fraction(1)}, c)
        else:
            add_scaled(out, ev(i, j), c)
    return out


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------


@dataclass
class PolyRelation:
    poly: Poly
    weight: int
    minimal: bool


@dataclass
class RelationCertificate:
    poly: Poly
    window: int
    member: bool
    certificate: tuple | None  # (tag, coeff) pairs over O_n generators


@dataclass
class Presentation:
    preset: VOAPreset
    level: int
    window: int
    evaluation_window: int
    pool_weight: int
    reps: list[tuple[int, ...]]
    dims_by_weight: dict[int, int]
    relations: list[PolyRelation]
    stability: StabilityReport

    @property
    def minimal_relations(self) -> list[Poly]:
        return [r.poly for r in self.relations if r.minimal]


def an_presentation(
    preset: VOAPreset,
    level: int,
    max_weight: int,
    pool_weight: int | None = None,
    growth_cap: int = 6,
) -> Presentation:
    """Windowed presentation of A_level in the generators x, y.

    Pool monomials x^i y^j with i wt(x) + j wt(y) <= pool_weight are
    evaluated inside the quotient; the kernel of the evaluation map gives
    polynomial relations (true relations of A_level, since vanishing in a
    window certifies O_n membership).  Pool evaluation sometimes needs a
    larger window than the reported one; it is grown in steps of 2 up to
    max_weight + growth_cap, and the window actually used is reported.
    """
    algebra = zhu_algebra(preset, level, max_weight)
    wtx = preset.gen_weight
    wty = 2 * wtx
    if pool_weight is None:
        pool_weight = 2 * wty
    pool = sorted(
        (
            (i, j)
            for i in range(pool_weight // wtx + 1)
            for j in range(pool_weight // wty + 1)
            if i * wtx + j * wty <= pool_weight
        ),
        key=lambda ij: _pool_key(ij, wtx, wty),
    )

    xs, ys = generator_states(preset)
    eval_w = max_weight
    while True:
        alg_e = zhu_algebra(preset, level, eval_w)
        try:
            xc = alg_e.reduce({xs: Fraction(1)})
            yc = alg_e.reduce({ys: Fraction(1)})
            classes: dict[tuple[int, int], dict] = {
                (0, 0): alg_e.reduce({(): Fraction(1)})
            }
            for (i, j) in pool:
                if (i, j) == (0, 0):
                    continue
                prev = classes[(i - 1, j)] if i else classes[(0, j - 1)]
                classes[(i, j)] = alg_e.star_classes(xc if i else yc, prev)
            break
        except WindowError:
            eval_w += 2
            if eval_w > max_weight + growth_cap:
                raise WindowError(
                    f"pool of weight {pool_weight} not evaluable within "
                    f"window {max_weight}+{growth_cap}"
                )

    rep_list = alg_e.reps
    rows = [[classes[ij].get(rep, Fraction(0)) for ij in pool] for rep in rep_list]
    kernel = kernel_basis(RationalMatrix(rows)) if rows else []

    raw: list[Poly] = []
    for vec in kernel:
        poly = {pool[t]: c for t, c in enumerate(vec) if c}
        lead = max(poly, key=lambda ij: _pool_key(ij, wtx, wty))
        inv = 1 / poly[lead]
        raw.append({ij: c * inv for ij, c in poly.items()})
    raw.sort(key=lambda p: _pool_key(
        max(p, key=lambda ij: _pool_key(ij, wtx, wty)), wtx, wty))

    pool_pos = {ij: t for t, ij in enumerate(pool)}
    span = Subspace(ambient_dim=len(pool))
    relations: list[PolyRelation] = []
    for poly in raw:
        vec = [Fraction(0)] * len(pool)
        for ij, c in poly.items():
            vec[pool_pos[ij]] = c
        w = poly_weight(poly, wtx, wty)
        if span.contains(vec):
            relations.append(PolyRelation(poly, w, minimal=False))
            continue
        relations.append(PolyRelation(poly, w, minimal=True))
        # close the in-pool ideal span under monomial multiples
        for (a, b) in pool:
            shifted = poly_mul({(a, b): Fraction(1)}, poly)
            if poly_weight(shifted, wtx, wty) > pool_weight:
                continue
            if any(ij not in pool_pos for ij in shifted):
                continue
            svec = [Fraction(0)] * len(pool)
            for ij, c in shifted.items():
                svec[pool_pos[ij]] = c
            span.add_generator(svec)

    return Presentation(
        preset=preset,
        level=level,
        window=max_weight,
        evaluation_window=eval_w,
        pool_weight=pool_weight,
        reps=algebra.reps,
        dims_by_weight=algebra.dims_by_weight(),
        relations=relations,
        stability=algebra.stability_report(),
    )


def certify_relation(preset: VOAPreset, level: int, poly: Poly) -> RelationCertificate:
    """Certify that poly vanishes in A_level, enlarging the window as the
    evaluated state requires.  The certificate expresses the state as a
    combination of O_level generators; tests re-verify it by summation."""
    elem = poly_eval_state(preset, level, poly)
    if not elem:
        return RelationCertificate(poly, 0, True, ())
    w = top_weight(elem)
    algebra = zhu_algebra(preset, level, w)
    res = algebra.o_membership(elem)
    return RelationCertificate(poly, w, res.member, res.certificate)


def class_polynomial(
    preset: VOAPreset, level: int, state: Element | tuple
) -> Poly:
    """A polynomial in the generator classes equal to state's A_level class.

    Since the surjection from the two-variable polynomial ring is
    weight-filtered, a pool of monomials of weighted degree up to the
    state's weight suffices.  The window is grown to hold the evaluated
    pool states (star products overshoot the nominal weight by up to
    2*level per factor).
    """
    if isinstance(state, tuple):
        state = {state: Fraction(1)}
    if not state:
        return {}
    w = top_weight(state)
    wtx = preset.gen_weight
    wty = 2 * wtx
    pool = [
        (i, j)
        for i in range(w // wtx + 1)
        for j in range(w // wty + 1)
        if i * wtx + j * wty <= w
    ]
    pool.sort(key=lambda ij: _pool_key(ij, wtx, wty))
    evals = [poly_eval_state(preset, level, {ij: Fraction(1)}) for ij in pool]
    window = max([w] + [top_weight(e) for e in evals if e])
    algebra = zhu_algebra(preset, level, window)

    def vectorize(classes: dict) -> list[Fraction]:
        return [classes.get(rep, Fraction(0)) for rep in algebra.reps]

    span = Subspace.from_generators(
        [vectorize(algebra.reduce(e)) for e in evals], len(algebra.reps)
    )
    cert = span.membership_certificate(vectorize(algebra.reduce(state)))
    if cert is None:  # the filtered surjection says this cannot happen
        raise WindowError(
            f"no polynomial of weighted degree <= {w} hits the class"
        )
    return {pool[i]: c for i, c in cert}


# ---------------------------------------------------------------------------
# frozen low-level facts and cross-level checks
# ---------------------------------------------------------------------------


def relation_catalog(preset: VOAPreset) -> dict[str, Poly]:
    """The level-0 and level-1 relation polynomials, and their product
    (the expected minimal relation at level 1)."""
    one = Fraction(1)
    if preset.kind == HEISENBERG:
        p0 = {(0, 1): one, (2, 0): -one}
        p1 = {(0, 1): one, (2, 0): -one, (0, 0): Fraction(-2)}
    else:
        p0 = {(0, 1): one, (2, 0): -one, (1, 0): Fraction(-2)}
        p1 = {(0, 1): one, (2, 0): -one, (1, 0): Fraction(-6), (0, 0): Fraction(4)}
    return {"level0": p0, "level1": p1, "level1_minimal": poly_mul(p0, p1)}


def surjection_consistency(
    preset: VOAPreset,
    window: int | None = None,
    sample_weight: int = 3,
) -> dict:
    """Checks that the identity on states descends to A_1 ->> A_0.

    * the level-0 relation, evaluated with *_1 products, still reduces to
      zero at level 0;
    * the level-1 relation reduces at level 0 to its known image
      (difference of the two catalog polynomials evaluated at level 0);
    * star_1 and star_0 agree modulo O_0 on all monomial pairs up to
      sample_weight.
    """
    catalog = relation_catalog(preset)
    if window is None:
        window = 8 if preset.kind == HEISENBERG else 10
    a0 = zhu_algebra(preset, 0, window)

    p0_at_1 = poly_eval_state(preset, 1, catalog["level0"])
    p1_at_1 = poly_eval_state(preset, 1, catalog["level1"])
    image_p0 = a0.reduce(p0_at_1)
    image_p1 = a0.reduce(p1_at_1)

    # expected image of the level-1 poly: evaluate (level1 - level0) at
    # level 0, where it is a polynomial in x and constants only
    diff: Poly = {}
    add_scaled(diff, catalog["level1"], Fraction(1))
    add_scaled(diff, catalog["level0"], Fraction(-1))
    expected_p1 = a0.reduce(poly_eval_state(preset, 0, diff))

    samples_ok = True
    mismatch = None
    mons = [m for m in monomials_up_to(preset, sample_weight) if m]
    for u in mons:
        for v in mons:
            s1 = star_n(preset, {u: Fraction(1)}, {v: Fraction(1)}, 1)
            s0 = star_n(preset, {u: Fraction(1)}, {v: Fraction(1)}, 0)
            d: Element = {}
            add_scaled(d, s1, 1)
            add_scaled(d, s0, -1)
            if top_weight(d) > window:
                continue
            if a0.reduce(d):
                samples_ok = False
                mismatch = (u, v)
                break
        if not samples_ok:
            break

    return {
        "level0_relation_dies": not image_p0,
        "level1_relation_image": image_p1,
        "level1_relation_image_expected": expected_p1,
        "level1_image_matches": image_p1 == expected_p1,
        "star_compatible_on_samples": samples_ok,
        "first_mismatch": mismatch,
        "window": window,
        "all_pass": (not image_p0) and image_p1 == expected_p1 and samples_ok,
    }
