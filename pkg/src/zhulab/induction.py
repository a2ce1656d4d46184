"""Induction from level-n Zhu modules back to graded modules.

A finite-dimensional module U over the level-n Zhu algebra (given by the
commuting action matrices X, Y of the two generator classes) induces a
graded module for the vertex algebra: modes of degree < -n annihilate U,
degree-0 modes act through the Zhu algebra, and the modes in between act
freely.  The construction here materializes a degree window of that
module in three stages.

``build_mbar`` realizes the associativity quotient: the free space of
normal-ordered generator-mode words applied to U, modulo

* deep-mode relations: composite modes of degree < -n must kill U (their
  engine expansion into generator words becomes a relation vector);
* zero-mode relations: the composite zero mode o(v) must act as v's
  class polynomial in X and Y;
* the left-ideal closure of both under single generator letters.

The quotient is a graded space whose negative degrees must die entirely
and whose degree-n slice must be a copy of U -- both are checked, since
failing either means the relation cutoffs were too small for the window.

``compute_j`` extracts the largest graded submodule meeting the degree-n
copy of U trivially (the radical of the pairing against U-functionals),
by a decreasing fixpoint over single-letter maps.  ``induce_ln`` divides
by it, regrades so the lowest nonzero degree is zero, and wraps the
result as a TruncatedModule whose engine works through stored letter
matrices, so all module functors apply to it unchanged.

Words are ascending tuples of nonzero Lie-mode indices (negatives raise,
positives at most n lower).  Lowering words of weight > n pass through
negative degrees, so in the quotient only boundedly many survive; the
free model caps the count of positive letters.  For the boson no letter
can shorten a lowering word, so the cap is an exact quotient; the
Virasoro bracket can shorten one, so there overflow raises
``TruncationError`` and skipped relation vectors are counted instead of
silently dropped.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import (
    JordanReport,
    RationalMatrix,
    Subspace,
    SpectrumError,
    jordan_data,
    quotient_basis,
)
from .modules import OmegaReport, TruncatedModule, omega_n, zhu_generator_matrices
from .voa import (
    HEISENBERG,
    Element,
    ModeEngine,
    VOAPreset,
    add_scaled,
    partitions_of,
    weight_basis,
)
from .zhu import Poly, class_polynomial, generator_states, relation_catalog

__all__ = [
    "TruncationError",
    "InductionError",
    "FactorsThroughError",
    "AnModuleSpec",
    "module_from_matrices",
    "jordan_spec",
    "ClassifyReport",
    "classify_an_module",
    "InductionConfig",
    "FreeInductionBackend",
    "MbarModule",
    "build_mbar",
    "JReport",
    "compute_j",
    "InducedModule",
    "induce_ln",
    "pi_n",
    "IsoReport",
    "module_isomorphism",
    "RoundtripReport",
    "roundtrip_report",
    "poly_apply",
]


class TruncationError(RuntimeError):
    """A lowering word outgrew the cap and cannot be soundly dropped."""


class InductionError(RuntimeError):
    """The built window is inconsistent (cutoffs too small, or the input
    module is outside the supported shape)."""


class FactorsThroughError(InductionError):
    """The module factors entirely through the next level down."""


# ---------------------------------------------------------------------------
# module specs over the level-n Zhu algebra
# ---------------------------------------------------------------------------


def poly_apply(poly: Poly, x: RationalMatrix, y: RationalMatrix) -> RationalMatrix:
    """Evaluate a two-variable polynomial on commuting square matrices."""
    n = x.nrows
    out = RationalMatrix.zeros(n, n)
    powers: dict[tuple[int, int], RationalMatrix] = {(0, 0): RationalMatrix.identity(n)}

    def power(i: int, j: int) -> RationalMatrix:
        got = powers.get((i, j))
        if got is None:
            got = power(i - 1, j) @ x if i else power(0, j - 1) @ y
            powers[(i, j)] = got
        return got

    for (i, j), c in poly.items():
        out = out + power(i, j).scale(c)
    return out


@dataclass(eq=False)
class AnModuleSpec:
    """A finite-dimensional module over the level-n Zhu algebra.

    ``x`` and ``y`` are the action matrices of the generator class and of
    its square's class.  Construction validates that they commute and are
    annihilated by the defining relation of the level (the presentations
    are pinned for levels 0 and 1, which is the shipped range).
    """

    preset: VOAPreset
    level: int
    x: RationalMatrix
    y: RationalMatrix
    label: str = ""

    def __post_init__(self):
        if self.level not in (0, 1):
            raise NotImplementedError(
                "module specs are only classified for levels 0 and 1"
            )
        d = self.x.nrows
        if self.x.ncols != d or self.y.nrows != d or self.y.ncols != d:
            raise ValueError("x and y must be square matrices of equal size")
        if d and not (self.x @ self.y - self.y @ self.x).is_zero():
            raise ValueError("x and y do not commute")
        catalog = relation_catalog(self.preset)
        rel = catalog["level0"] if self.level == 0 else catalog["level1_minimal"]
        if d and not poly_apply(rel, self.x, self.y).is_zero():
            raise ValueError(
                f"matrices violate the level-{self.level} relation"
            )

    @property
    def dim(self) -> int:
        return self.x.nrows

    def describe(self) -> str:
        name = self.label or f"{self.dim}-dim module"
        return f"{name} over A_{self.level}({self.preset.describe()})"


def module_from_matrices(
    preset: VOAPreset,
    level: int,
    x_rows,
    y_rows,
    label: str = "",
) -> AnModuleSpec:
    return AnModuleSpec(
        preset=preset,
        level=level,
        x=RationalMatrix(x_rows),
        y=RationalMatrix(y_rows),
        label=label,
    )


def jordan_spec(
    preset: VOAPreset,
    level: int,
    lam: Fraction | int,
    size: int,
    branch: str = "level1",
) -> AnModuleSpec:
    """The module with X one Jordan block at ``lam`` and Y the polynomial
    in X cut out by the named branch of the level's relation variety.

    ``branch`` is "level0" or "level1": each catalog relation has the
    form y - f(x), and Y is set to f(X).  A "level0" branch at level 1
    builds a module factoring through the level below.
    """
    lam = Fraction(lam)
    rel = relation_catalog(preset)[branch]
    if rel.get((0, 1)) != 1:
        raise ValueError(f"branch {branch!r} is not of the form y - f(x)")
    x = RationalMatrix.zeros(size, size)
    for i in range(size):
        x.rows[i][i] = lam
        if i + 1 < size:
            x.rows[i][i + 1] = Fraction(1)
    f = {(i, 0): -c for (i, j), c in rel.items() if j == 0}
    y = poly_apply(f, x, RationalMatrix.identity(size))
    label = f"J_{size}({lam})@{branch}"
    return AnModuleSpec(preset=preset, level=level, x=x, y=y, label=label)


@dataclass(frozen=True)
class ClassifyReport:
    """Where a level-n module sits relative to the level below."""

    kind: str
    factoring_dim: int
    kernel: Subspace

    def __str__(self) -> str:
        if self.kind == "has-nonzero-factoring-submodule":
            return f"{self.kind}({self.factoring_dim})"
        return self.kind


def classify_an_module(spec: AnModuleSpec) -> ClassifyReport:
    """Split on the kernel of the level-0 relation polynomial.

    The kernel ideal of the surjection onto the level below is principal
    (generated by the level-0 relation), so that polynomial's kernel on U
    is exactly the maximal submodule factoring through the lower level.
    """
    if spec.level == 0:
        raise ValueError("level 0 has no lower level to factor through")
    rel = relation_catalog(spec.preset)["level0"]
    mat = poly_apply(rel, spec.x, spec.y)
    kernel = Subspace.full(spec.dim).intersect_kernel(mat)
    if kernel.dim == spec.dim:
        kind = "factors-through-lower"
    elif kernel.dim:
        kind = "has-nonzero-factoring-submodule"
    else:
        kind = "no-nonzero-factoring-submodule"
    return ClassifyReport(kind=kind, factoring_dim=kernel.dim, kernel=kernel)


# ---------------------------------------------------------------------------
# the free model
# ---------------------------------------------------------------------------


class FreeInductionBackend:
    """Generator-mode words applied to a U-basis slot.

    Keys are ``(word, j)``: ``word`` an ascending tuple of nonzero mode
    indices with positive entries at most ``level``, ``j`` a U-basis
    index; the key's degree is ``level - sum(word)``.  The zero mode acts
    on the slot through X (plus the grading shift for Virasoro), deeper
    positive modes die on the slot, and everything else is PBW
    straightening with the preset's bracket.
    """

    def __init__(
        self, preset: VOAPreset, level: int, x: RationalMatrix, cap: int
    ):
        self.preset = preset
        self.level = level
        self.x = x
        self.cap = cap
        self.dim_u = x.nrows
        self.min_deg = level * (1 - cap)
        self._memo: dict = {}

    def key_degree(self, key) -> int:
        word, _ = key
        return self.level - sum(word)

    def _slot_mix(self, word: tuple[int, ...], j: int) -> Element:
        out: Element = {}
        for i in range(self.dim_u):
            c = self.x.rows[i][j]
            if c:
                out[(word, i)] = c
        return out

    def gen_mode(self, m: int, key) -> Element:
        ck = (m, key)
        hit = self._memo.get(ck)
        if hit is None:
            hit = (
                self._boson(m, key)
                if self.preset.kind == HEISENBERG
                else self._vir(m, key)
            )
            self._memo[ck] = hit
        return hit

    def _positives(self, word: tuple[int, ...]) -> int:
        return sum(1 for p in word if p > 0)

    def _overflow(self, word: tuple[int, ...]) -> Element:
        if self.preset.kind == HEISENBERG:
            # no letter shortens a lowering word, so the overflow span is
            # invariant and quotienting it to zero is exact
            return {}
        raise TruncationError(
            f"lowering word {word} exceeds cap {self.cap}; raise lowering_cap"
        )

    def _boson(self, m: int, key) -> Element:
        word, j = key
        if m == 0:
            return self._slot_mix(word, j)
        if m < 0:
            return {(tuple(sorted(word + (m,))), j): Fraction(1)}
        out: Element = {}
        cnt = word.count(-m)
        if cnt:
            shorter = list(word)
            shorter.remove(-m)
            out[(tuple(shorter), j)] = Fraction(m * cnt)
        if m <= self.level:
            if self._positives(word) + 1 > self.cap:
                add_scaled(out, self._overflow(word), 1)
            else:
                out[(tuple(sorted(word + (m,))), j)] = Fraction(1)
        return out

    def _vir(self, m: int, key) -> Element:
        word, j = key
        n = self.level
        if m == 0:
            out = self._slot_mix(word, j)
            shift = self.key_degree(key) - n
            if shift:
                add_scaled(out, {key: Fraction(1)}, shift)
            return out
        if not word:
            if m > n:
                return {}
            if m > 0 and self.cap < 1:
                return self._overflow(word)
            return {((m,), j): Fraction(1)}
        h = word[0]
        if m <= h:
            if m > 0 and self._positives(word) + 1 > self.cap:
                return self._overflow(word)
            return {((m,) + word, j): Fraction(1)}
        # straighten: L(m) L(h) = L(h) L(m) + (m-h) L(m+h) + central term
        rest = (word[1:], j)
        out: Element = {}
        for k2, c2 in self.gen_mode(m, rest).items():
            add_scaled(out, self.gen_mode(h, k2), c2)
        add_scaled(out, self.gen_mode(m + h, rest), m - h)
        if m + h == 0:
            central = Fraction(m**3 - m, 12) * self.preset.central_charge
            if central:
                add_scaled(out, {rest: Fraction(1)}, central)
        return out


def _keys_at(backend: FreeInductionBackend, d: int) -> list:
    """Degree-d keys in reduction order: longest words first, bare slots
    last, so quotient representatives are the simplest keys."""
    n = backend.level
    found = []
    for t in range(backend.cap + 1):
        for pos in itertools.combinations_with_replacement(range(1, n + 1), t):
            deficit = sum(pos) + d - n
            if deficit < 0:
                continue
            raisings = [()] if deficit == 0 else partitions_of(deficit, 1)
            for mu in raisings:
                word = tuple(sorted([-p for p in mu] + list(pos)))
                for j in range(backend.dim_u):
                    found.append((word, j))
    found.sort(key=lambda k: (-len(k[0]), k[0], k[1]))
    return found


# ---------------------------------------------------------------------------
# the associativity quotient
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InductionConfig:
    """Cutoffs for the window build; ``None`` fields get preset defaults.

    * ``lowering_cap``: max count of positive letters in a word;
    * ``rel_weight``: deep-mode relations use states up to this weight;
    * ``zero_weight``: zero-mode relations use states up to this weight;
    * ``headroom``: extra degrees built above the presented window so
      composite-mode expansions on the result never leave it.
    """

    lowering_cap: int | None = None
    rel_weight: int | None = None
    zero_weight: int | None = None
    headroom: int | None = None

    def resolved(self, preset: VOAPreset, level: int) -> "InductionConfig":
        gen = preset.gen_weight
        cap = self.lowering_cap if self.lowering_cap is not None else level + 2
        return InductionConfig(
            lowering_cap=cap,
            rel_weight=self.rel_weight if self.rel_weight is not None else gen * cap,
            zero_weight=self.zero_weight
            if self.zero_weight is not None
            else 3 * gen,
            headroom=self.headroom
            if self.headroom is not None
            else 2 * (gen - 1),
        )


class MbarModule:
    """The associativity quotient over a degree window.

    Holds the free keys, the relation span and the surviving coordinates
    per degree, and serves single-letter matrices on the quotient.
    """

    def __init__(
        self,
        spec: AnModuleSpec,
        depth: int,
        config: InductionConfig,
        backend: FreeInductionBackend,
        engine: ModeEngine,
    ):
        self.spec = spec
        self.preset = spec.preset
        self.level = spec.level
        self.depth = depth
        self.config = config
        self.backend = backend
        self.engine = engine
        self.lo = backend.min_deg
        self.keys: dict[int, list] = {
            d: _keys_at(backend, d) for d in range(self.lo, depth + 1)
        }
        self.index: dict[int, dict] = {
            d: {k: i for i, k in enumerate(ks)} for d, ks in self.keys.items()
        }
        self.rel: dict[int, Subspace] = {
            d: Subspace(ambient_dim=len(ks)) for d, ks in self.keys.items()
        }
        self.qcols: dict[int, list[int]] = {}
        self.skipped_relations = 0
        self.relation_count = 0
        self._letters: dict[tuple[int, int], RationalMatrix] = {}

    # -- building blocks --------------------------------------------------

    def _vectorize(self, d: int, elem: Element) -> list[Fraction]:
        vec = [Fraction(0)] * len(self.keys[d])
        idx = self.index[d]
        for key, c in elem.items():
            vec[idx[key]] = c
        return vec

    def _finalize(self):
        self.qcols = {d: quotient_basis(sub) for d, sub in self.rel.items()}

    # -- the quotient ------------------------------------------------------

    def dim(self, d: int) -> int:
        if d not in self.qcols:
            return 0
        return len(self.qcols[d])

    def dims_by_degree(self) -> dict[int, int]:
        return {d: self.dim(d) for d in range(self.lo, self.depth + 1)}

    @property
    def negative_degrees_dead(self) -> bool:
        return all(self.dim(d) == 0 for d in range(self.lo, 0))

    def coords_of(self, d: int, elem: Element) -> list[Fraction]:
        residual, _ = self.rel[d].reduce(self._vectorize(d, elem))
        return [residual[c] for c in self.qcols[d]]

    def letter_matrix(self, m: int, d: int) -> RationalMatrix:
        """Matrix of the generator Lie mode: quotient degree d -> d - m."""
        target = d - m
        got = self._letters.get((m, d))
        if got is None:
            cols = []
            for c in self.qcols[d]:
                img = self.backend.gen_mode(m, self.keys[d][c])
                cols.append(self.coords_of(target, img))
            got = RationalMatrix.zeros(self.dim(target), self.dim(d))
            for j, col in enumerate(cols):
                for i, val in enumerate(col):
                    got.rows[i][j] = val
            self._letters[(m, d)] = got
        return got


def build_mbar(
    spec: AnModuleSpec,
    depth: int,
    config: InductionConfig | None = None,
    check: bool = True,
) -> MbarModule:
    """Free words modulo deep-mode death, zero-mode compatibility, and the
    single-letter left-ideal closure, over degrees up to ``depth``."""
    cfg = (config or InductionConfig()).resolved(spec.preset, spec.level)
    preset, n = spec.preset, spec.level
    backend = FreeInductionBackend(preset, n, spec.x, cfg.lowering_cap)
    engine = ModeEngine(preset, backend)
    mbar = MbarModule(spec, depth, cfg, backend, engine)
    if spec.dim == 0:
        mbar._finalize()
        return mbar
    lo = mbar.lo
    gen2 = 2 * preset.gen_weight

    seeds: list[tuple[int, Element]] = []
    # deep modes of composite states kill the slots (single-generator
    # states reduce to bare deep letters, which die in the backend)
    for wv in range(gen2, cfg.rel_weight + 1):
        for v in weight_basis(preset, wv):
            if len(v) < 2:
                continue
            for target in range(-1, lo - 1, -1):
                m = n + wv - 1 - target
                for j in range(spec.dim):
                    try:
                        elem = engine.act(v, m, ((), j))
                    except TruncationError:
                        mbar.skipped_relations += 1
                        continue
                    if elem:
                        seeds.append((target, elem))
    # composite zero modes act as the class polynomial in X, Y
    for wv in range(gen2, cfg.zero_weight + 1):
        for v in weight_basis(preset, wv):
            if len(v) < 2:
                continue
            poly = class_polynomial(preset, n, v)
            pmat = poly_apply(poly, spec.x, spec.y)
            for j in range(spec.dim):
                try:
                    expansion = engine.act(v, wv - 1, ((), j))
                except TruncationError:
                    mbar.skipped_relations += 1
                    continue
                elem: Element = {}
                add_scaled(elem, expansion, 1)
                for i in range(spec.dim):
                    if pmat.rows[i][j]:
                        add_scaled(elem, {((), i): Fraction(1)}, -pmat.rows[i][j])
                if elem:
                    seeds.append((n, elem))

    # left-ideal closure under single letters, to a fixpoint
    work = [(d, mbar._vectorize(d, e)) for d, e in seeds]
    while work:
        d, vec = work.pop()
        if not mbar.rel[d].add_generator(vec):
            continue
        mbar.relation_count += 1
        keys = mbar.keys[d]
        for m in range(d - depth, d - lo + 1):
            target = d - m
            img: Element = {}
            try:
                for c, coeff in enumerate(vec):
                    if coeff:
                        add_scaled(img, backend.gen_mode(m, keys[c]), coeff)
            except TruncationError:
                mbar.skipped_relations += 1
                continue
            if img:
                work.append((target, mbar._vectorize(target, img)))

    mbar._finalize()
    if check:
        dead = mbar.negative_degrees_dead
        if not dead:
            bad = {d: mbar.dim(d) for d in range(lo, 0) if mbar.dim(d)}
            raise InductionError(
                f"negative degrees survive the relations: {bad}; "
                "raise rel_weight/lowering_cap"
            )
        slots = [((), j) for j in range(spec.dim)]
        if depth >= n and [mbar.keys[n][c] for c in mbar.qcols[n]] != slots:
            raise InductionError(
                f"degree-{n} slice is not the expected copy of U "
                f"(dim {mbar.dim(n)} vs {spec.dim}); raise the cutoffs"
            )
    return mbar


# ---------------------------------------------------------------------------
# the pairing radical
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JReport:
    """The largest graded submodule meeting the degree-n slots trivially.

    ``spaces[d]`` lives in the quotient coordinates of the source window;
    letter-stability is enforced within degrees [0, top], and paths
    through degrees above the window are unavoidably not seen.
    """

    level: int
    top: int
    sweeps: int
    spaces: dict[int, Subspace]

    def dims_by_degree(self) -> dict[int, int]:
        return {d: sp.dim for d, sp in self.spaces.items()}


def _residual_rows(sub: Subspace) -> RationalMatrix:
    """Functionals (as rows) whose joint kernel is exactly ``sub``."""
    amb = sub.ambient_dim
    cols = []
    for i in range(amb):
        e = [Fraction(0)] * amb
        e[i] = Fraction(1)
        residual, _ = sub.reduce(e)
        cols.append(residual)
    keep = quotient_basis(sub)
    return RationalMatrix([[cols[j][c] for j in range(amb)] for c in keep])


def compute_j(mbar: MbarModule) -> JReport:
    """Decreasing fixpoint: start from everything away from degree n and
    intersect with the preimages of the surviving spaces under every
    single-letter map inside the window."""
    n, top = mbar.level, mbar.depth
    spaces: dict[int, Subspace] = {}
    for d in range(0, top + 1):
        dim = mbar.dim(d)
        spaces[d] = (
            Subspace(ambient_dim=dim) if d == n else Subspace.full(dim)
        )
    sweeps = 0
    changed = True
    while changed:
        changed = False
        sweeps += 1
        for d in range(0, top + 1):
            if spaces[d].dim == 0:
                continue
            for m in range(d - top, d + 1):
                target = d - m
                tgt_space = spaces.get(target)
                if tgt_space is None or tgt_space.dim == mbar.dim(target):
                    continue  # no constraint from a full target
                rows = _residual_rows(tgt_space)
                if rows.nrows == 0:
                    continue
                constraint = rows @ mbar.letter_matrix(m, d)
                before = spaces[d].dim
                spaces[d] = spaces[d].intersect_kernel(constraint)
                if spaces[d].dim != before:
                    changed = True
                if spaces[d].dim == 0:
                    break
    return JReport(level=n, top=top, sweeps=sweeps, spaces=spaces)


# ---------------------------------------------------------------------------
# the induced module
# ---------------------------------------------------------------------------


class _ReducedBackend:
    """Letters on the quotient (source window mod radical), regraded."""

    def __init__(self, mbar: MbarModule, jrep: JReport, shift: int):
        self.preset = mbar.preset
        self.mbar = mbar
        self.shift = shift
        self.min_deg = 0
        self.top = mbar.depth
        self._qcols = {
            d: quotient_basis(jrep.spaces[d]) for d in jrep.spaces
        }
        self._spaces = jrep.spaces
        self._memo: dict = {}

    def dim(self, d: int) -> int:
        return len(self._qcols.get(d, ()))

    def key_degree(self, key) -> int:
        return key[0] - self.shift

    def _project(self, d: int, vec: list[Fraction]) -> Element:
        residual, _ = self._spaces[d].reduce(vec)
        out: Element = {}
        for i, c in enumerate(self._qcols[d]):
            if residual[c]:
                out[(d, i)] = residual[c]
        return out

    def gen_mode(self, m: int, key) -> Element:
        ck = (m, key)
        hit = self._memo.get(ck)
        if hit is not None:
            return hit
        d, i = key
        target = d - m
        if target < self.shift or (target < 0 and self.dim(target) == 0):
            hit: Element = {}
        elif target > self.top:
            raise InductionError(
                f"mode {m} needs degree {target} beyond the built window "
                f"(top {self.top}); rebuild with more depth or headroom"
            )
        else:
            col = self._qcols[d][i]
            mat = self.mbar.letter_matrix(m, d)
            vec = [mat.rows[r][col] for r in range(mat.nrows)]
            hit = self._project(target, vec)
        self._memo[ck] = hit
        return hit


def _empty_module(preset: VOAPreset, depth: int, label: str) -> TruncatedModule:
    class _Nothing:
        min_deg = 0

        @staticmethod
        def key_degree(key):  # pragma: no cover - no keys exist
            return 0

        @staticmethod
        def gen_mode(m, key):  # pragma: no cover - no keys exist
            return {}

    return TruncatedModule(
        preset=preset,
        depth=depth,
        basis=[[] for _ in range(depth + 1)],
        lowest_weight=Fraction(0),
        engine=ModeEngine(preset, _Nothing()),
        label=label,
    )


@dataclass(eq=False)
class InducedModule:
    """The window of the induced module, regraded to start at degree 0.

    ``shift`` is the lowest nonzero degree before regrading (nonzero
    exactly when the input factors through a lower level and the copy of
    U slides down accordingly).  ``module`` is a TruncatedModule whose
    engine runs on stored letter matrices, so every functor in
    ``modules`` applies to it directly.
    """

    spec: AnModuleSpec
    level: int
    depth: int
    shift: int
    module: TruncatedModule
    mbar: MbarModule
    radical: JReport
    skipped_relations: int
    bottom_verified: bool

    def dims(self) -> list[int]:
        return self.module.dims

    def describe(self) -> str:
        tag = f", regraded by {self.shift}" if self.shift else ""
        return f"L_{self.level}({self.spec.label or 'U'}) window 0..{self.depth}{tag}"


def induce_ln(
    spec: AnModuleSpec,
    depth: int,
    config: InductionConfig | None = None,
    allow_factoring: bool = True,
) -> InducedModule:
    """Quotient the associativity window by the pairing radical.

    With ``allow_factoring`` (default) a module factoring through the
    lower level is induced anyway and arrives with its copy of U below
    degree n; the recorded ``shift`` regrades it.  Passing False raises
    ``FactorsThroughError`` instead, certifying the strict reading of
    the construction's hypothesis.
    """
    n = spec.level
    cfg = (config or InductionConfig()).resolved(spec.preset, n)
    label = f"L_{n}({spec.label or 'U'})"
    if spec.dim == 0:
        empty = build_mbar(spec, depth + n + cfg.headroom, cfg)
        return InducedModule(
            spec=spec,
            level=n,
            depth=depth,
            shift=0,
            module=_empty_module(spec.preset, depth, label),
            mbar=empty,
            radical=compute_j(empty),
            skipped_relations=0,
            bottom_verified=True,
        )
    if n > 0:
        report = classify_an_module(spec)
        if report.kind == "factors-through-lower" and not allow_factoring:
            raise FactorsThroughError(
                f"{spec.describe()} factors through level {n - 1}; "
                "induce there, or pass allow_factoring=True to regrade"
            )
    built_top = depth + n + cfg.headroom
    mbar = build_mbar(spec, built_top, cfg)
    jrep = compute_j(mbar)

    backend = _ReducedBackend(mbar, jrep, 0)
    ln_dims = {d: backend.dim(d) for d in range(0, built_top + 1)}
    nonzero = [d for d, k in ln_dims.items() if k]
    if not nonzero:
        return InducedModule(
            spec=spec,
            level=n,
            depth=depth,
            shift=0,
            module=_empty_module(spec.preset, depth, label),
            mbar=mbar,
            radical=jrep,
            skipped_relations=mbar.skipped_relations,
            bottom_verified=True,
        )
    shift = min(nonzero)
    backend.shift = shift
    engine = ModeEngine(spec.preset, backend)
    basis = [
        [(d, i) for i in range(ln_dims.get(d, 0))]
        for d in range(shift, shift + depth + 1)
    ]
    module = TruncatedModule(
        preset=spec.preset,
        depth=depth,
        basis=basis,
        lowest_weight=Fraction(0),
        engine=engine,
        label=label,
    )
    l0 = module.l0_matrix(0)
    lam0 = l0.trace() / l0.nrows
    module.lowest_weight = lam0
    for d in range(depth + 1):
        if not module.grading_ok(d):
            raise InductionError(
                "degree slices mix generalized L(0) eigenvalues; "
                "split the input module by X-eigenvalue first"
            )

    # the degree-n slice must be the inherited copy of U
    bottom_verified = False
    du = n - shift
    if 0 <= du <= depth:
        xs, ys = generator_states(spec.preset)
        bottom_verified = (
            module.dim(du) == spec.dim
            and module.zero_mode_matrix(xs, du) == spec.x
            and module.zero_mode_matrix(ys, du) == spec.y
        )
        if not bottom_verified:
            raise InductionError(
                f"degree-{n} slice does not reproduce U's action matrices"
            )
    return InducedModule(
        spec=spec,
        level=n,
        depth=depth,
        shift=shift,
        module=module,
        mbar=mbar,
        radical=jrep,
        skipped_relations=mbar.skipped_relations,
        bottom_verified=bottom_verified,
    )


def pi_n(module: TruncatedModule, level: int) -> AnModuleSpec:
    """The degree-``level`` slice as a module over the level's Zhu
    algebra, via the degree-preserving zero modes."""
    x, y = zhu_generator_matrices(module, level)
    return AnModuleSpec(
        preset=module.preset,
        level=level,
        x=x,
        y=y,
        label=f"Pi_{level}({module.label})",
    )


# ---------------------------------------------------------------------------
# isomorphism testing for module specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IsoReport:
    verdict: str  # ISO | NOT_ISO | UNDECIDED
    reason: str
    witness: RationalMatrix | None = None


def _spec_invariants(spec: AnModuleSpec) -> list:
    out: list = [spec.dim]
    for name, mat in (("x", spec.x), ("y", spec.y)):
        try:
            jd = jordan_data(mat)
            out.append((name, tuple(sorted(jd.blocks.items()))))
        except SpectrumError:
            out.append((name, "irrational-spectrum"))
    catalog = relation_catalog(spec.preset)
    for rname in ("level0", "level1"):
        out.append((rname, poly_apply(catalog[rname], spec.x, spec.y).rank()))
    return out


def module_isomorphism(
    a: AnModuleSpec, b: AnModuleSpec, seed: int = 0, attempts: int = 24
) -> IsoReport:
    """Decide isomorphism of two module specs where possible.

    Mismatched invariants give a certified NOT_ISO; an invertible element
    of the intertwiner space gives a certified ISO; otherwise the honest
    answer is UNDECIDED (random combinations missed an invertible
    intertwiner, or none exists).
    """
    if (a.preset, a.level) != (b.preset, b.level):
        return IsoReport("NOT_ISO", "different algebras")
    if a.dim != b.dim:
        return IsoReport("NOT_ISO", f"dims {a.dim} != {b.dim}")
    if a.dim == 0:
        return IsoReport("ISO", "both zero", RationalMatrix([]))
    ia, ib = _spec_invariants(a), _spec_invariants(b)
    if ia != ib:
        return IsoReport("NOT_ISO", f"invariants differ: {ia} vs {ib}")
    # solve S a.x = b.x S and S a.y = b.y S
    d = a.dim
    rows = []
    for xa, xb in ((a.x, b.x), (a.y, b.y)):
        for i in range(d):
            for j in range(d):
                row = [Fraction(0)] * (d * d)
                for k in range(d):
                    row[i * d + k] += xa.rows[k][j]
                    row[k * d + j] -= xb.rows[i][k]
                rows.append(row)
    from .linalg import kernel_basis

    hom = kernel_basis(RationalMatrix(rows))
    if not hom:
        return IsoReport("NOT_ISO", "no nonzero intertwiners")
    rng = random.Random(seed)
    for _ in range(attempts):
        coeffs = [Fraction(rng.randint(-5, 5)) for _ in hom]
        flat = [
            sum(c * v[i] for c, v in zip(coeffs, hom)) for i in range(d * d)
        ]
        s = RationalMatrix([flat[i * d : (i + 1) * d] for i in range(d)])
        if s.rank() == d:
            return IsoReport("ISO", "invertible intertwiner found", s)
    return IsoReport(
        "UNDECIDED",
        f"intertwiner space (dim {len(hom)}) yielded no invertible sample",
    )


# ---------------------------------------------------------------------------
# the roundtrip
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class RoundtripReport:
    """Does the level-n quotient functor recover U from its induction?

    ``defect`` is the dimension of the kernel of the natural map from U
    into Omega_n/Omega_{n-1} of the induced module; the verdict is HOLDS
    exactly when that map is bijective, and UNDECIDED when the kernel
    computations did not stabilize inside the window.
    """

    spec: AnModuleSpec
    level: int
    depth: int
    classify: ClassifyReport | None
    hypothesis_held: bool
    induced: InducedModule
    omega_low: OmegaReport | None
    omega_high: OmegaReport
    quotient_dims: list[int]
    defect: int
    verdict: str
    natural_map: RationalMatrix
    x_quotient: RationalMatrix
    y_quotient: RationalMatrix
    notes: tuple[str, ...]

    def summary(self) -> str:
        head = f"roundtrip {self.spec.describe()}: {self.verdict}"
        if self.verdict == "FAILS":
            head += f" (defect {self.defect})"
        return head


def _block_diag(mats: list[RationalMatrix]) -> RationalMatrix:
    total = sum(m.nrows for m in mats)
    out = RationalMatrix.zeros(total, total)
    at = 0
    for m in mats:
        for i in range(m.nrows):
            for j in range(m.ncols):
                out.rows[at + i][at + j] = m.rows[i][j]
        at += m.nrows
    return out


def roundtrip_report(
    spec: AnModuleSpec,
    depth: int | None = None,
    config: InductionConfig | None = None,
) -> RoundtripReport:
    n = spec.level
    if depth is None:
        depth = 2 * n + 3
    classify = classify_an_module(spec) if n > 0 else None
    hypothesis_held = classify is None or classify.kind == (
        "no-nonzero-factoring-submodule"
    )
    induced = induce_ln(spec, depth, config, allow_factoring=True)
    module = induced.module
    notes: list[str] = []
    if induced.shift:
        notes.append(
            f"input factors through level {n - 1}: copy of U regraded "
            f"down by {induced.shift}"
        )
    if spec.dim == 0:
        zero = RationalMatrix([])
        return RoundtripReport(
            spec=spec,
            level=n,
            depth=depth,
            classify=classify,
            hypothesis_held=hypothesis_held,
            induced=induced,
            omega_low=None,
            omega_high=OmegaReport(n, 0, True, ()),
            quotient_dims=[],
            defect=0,
            verdict="HOLDS",
            natural_map=zero,
            x_quotient=zero,
            y_quotient=zero,
            notes=("zero module: nothing to compare",),
        )

    omega_high = omega_n(module, n)
    omega_low = omega_n(module, n - 1) if n > 0 else None
    stable = omega_high.stable and (omega_low is None or omega_low.stable)

    xs, ys = generator_states(spec.preset)
    q_dims: list[int] = []
    x_blocks: list[RationalMatrix] = []
    y_blocks: list[RationalMatrix] = []
    degree_offsets: dict[int, int] = {}
    lowers: dict[int, Subspace] = {}
    highs: dict[int, Subspace] = {}
    at = 0
    for d in range(depth + 1):
        hi = omega_high.spaces[d]
        lo = (
            omega_low.spaces[d]
            if omega_low is not None
            else Subspace(ambient_dim=module.dim(d))
        )
        q = hi.dim - lo.dim
        degree_offsets[d] = at
        highs[d], lowers[d] = hi, lo
        at += q
        q_dims.append(q)
        if q == 0:
            x_blocks.append(RationalMatrix.zeros(0, 0))
            y_blocks.append(RationalMatrix.zeros(0, 0))
            continue
        # express the slice action of o(x), o(y) on hi, then mod out lo
        hmat = hi.basis_matrix()
        lo_in_hi = Subspace(ambient_dim=hi.dim)
        for row in lo.echelon:
            cert = hi.membership_certificate(row)
            coords = [Fraction(0)] * hi.dim
            for idx, c in cert or []:
                coords[idx] += c
            lo_in_hi.add_generator(coords)
        keep = quotient_basis(lo_in_hi)

        def slice_block(state) -> RationalMatrix:
            act = module.zero_mode_matrix(state, d)
            cols = []
            for row in hi.echelon:
                img = act.matvec(row)
                cert = hi.membership_certificate(img)
                if cert is None:
                    raise InductionError(
                        f"zero mode leaves the degree-{d} kernel space; "
                        "the kernel window did not stabilize"
                    )
                coords = [Fraction(0)] * hi.dim
                for idx, c in cert:
                    coords[idx] += c
                residual, _ = lo_in_hi.reduce(coords)
                cols.append([residual[c] for c in keep])
            blk = RationalMatrix.zeros(q, hi.dim)
            for j, col in enumerate(cols):
                for i, val in enumerate(col):
                    blk.rows[i][j] = val
            # columns were per hi-basis vector; restrict to the section
            return RationalMatrix([[blk.rows[i][j] for j in keep] for i in range(q)])

        x_blocks.append(slice_block(xs))
        y_blocks.append(slice_block(ys))

    x_q = _block_diag(x_blocks)
    y_q = _block_diag(y_blocks)

    # natural map: U = the degree-n slots, into Omega_n / Omega_{n-1}
    du = n - induced.shift
    nat = RationalMatrix.zeros(sum(q_dims), spec.dim)
    defect = 0
    if 0 <= du <= depth and module.dim(du) == spec.dim:
        hi, lo = highs[du], lowers[du]
        lo_in_hi = Subspace(ambient_dim=hi.dim)
        for row in lo.echelon:
            cert = hi.membership_certificate(row)
            coords = [Fraction(0)] * hi.dim
            for idx, c in cert or []:
                coords[idx] += c
            lo_in_hi.add_generator(coords)
        keep = quotient_basis(lo_in_hi)
        ok = True
        for j in range(spec.dim):
            e = [Fraction(0)] * spec.dim
            e[j] = Fraction(1)
            cert = hi.membership_certificate(e)
            if cert is None:
                ok = False
                notes.append(
                    "a slot vector escaped the level-n kernel space "
                    "(window instability)"
                )
                break
            coords = [Fraction(0)] * hi.dim
            for idx, c in cert:
                coords[idx] += c
            residual, _ = lo_in_hi.reduce(coords)
            for i, c in enumerate(keep):
                nat.rows[degree_offsets[du] + i][j] = residual[c]
        defect = spec.dim - (nat.rank() if ok else 0)
    else:
        defect = spec.dim
        notes.append("the copy of U fell outside the compared window")

    if not stable:
        verdict = "UNDECIDED"
        notes.append("kernel computations unstable within the window")
    elif defect == 0 and sum(q_dims) == spec.dim:
        verdict = "HOLDS"
    else:
        verdict = "FAILS"
    return RoundtripReport(
        spec=spec,
        level=n,
        depth=depth,
        classify=classify,
        hypothesis_held=hypothesis_held,
        induced=induced,
        omega_low=omega_low,
        omega_high=omega_high,
        quotient_dims=q_dims,
        defect=defect,
        verdict=verdict,
        natural_map=nat,
        x_quotient=x_q,
        y_quotient=y_q,
        notes=tuple(notes),
    )
