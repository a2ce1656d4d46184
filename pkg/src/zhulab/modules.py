"""Concrete graded modules and the degree-local functors.

A :class:`TruncatedModule` is a finite window [0, D] of an N-gradable
module: explicit per-degree bases and a :class:`~zhulab.voa.ModeEngine`
over a backend that knows the single generator modes.  Three backends
are provided:

* :func:`verma` -- the Virasoro Verma module M(c, h), PBW basis
  ``L(-s_1)...L(-s_r) w``, s_1 >= ... >= s_r >= 1;
* :func:`heisenberg_module` -- the boson Fock module with a Jordan-block
  zero mode, M_a(1) tensor a k-dimensional bottom on which a(0) acts by
  the single Jordan block at lambda;
* :func:`vacuum_module` -- the algebra over itself (shares the global
  vacuum engine).

Degrees are truncation-exact: every matrix with both endpoint degrees
inside the window is the true matrix of the infinite module.  Claims
that would need degrees beyond the window are flagged, never asserted:
:func:`omega_n` reports a stabilization flag over its weight cutoff.

The conformal weight of degree d is ``lowest_weight + d``; the conformal
zero mode is assembled by the engine from the state of the conformal
vector, so e.g. the boson L(0) is genuinely 1/2 a(0)^2 - shift * a(0)
plus the oscillator sum, with whatever Jordan structure that implies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .linalg import (
    JordanReport,
    QSeries,
    RationalMatrix,
    Subspace,
    jordan_data,
)
from .voa import (
    HEISENBERG,
    VIRASORO,
    Element,
    ModeEngine,
    VOAPreset,
    add_scaled,
    monomials_up_to,
    partitions_of,
    vacuum_engine,
    weight_basis,
)
from .zhu import generator_states

__all__ = [
    "TruncatedModule",
    "VermaBackend",
    "FockBackend",
    "verma",
    "heisenberg_module",
    "vacuum_module",
    "OmegaReport",
    "omega_n",
    "zhu_generator_matrices",
    "gdim",
    "DegreeBoundReport",
    "degree_bound_check",
]


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------


class VermaBackend:
    """M(c, h): keys are partitions with parts >= 1 applied to w_h."""

    min_deg = 0

    def __init__(self, c: Fraction, h: Fraction):
        self.c = Fraction(c)
        self.h = Fraction(h)
        self._memo: dict = {}

    def key_degree(self, key: tuple[int, ...]) -> int:
        return sum(key)

    def gen_mode(self, m: int, key: tuple[int, ...]) -> Element:
        ck = (m, key)
        hit = self._memo.get(ck)
        if hit is None:
            hit = self._act(m, key)
            self._memo[ck] = hit
        return hit

    def _act(self, m: int, key: tuple[int, ...]) -> Element:
        if not key:
            if m < 0:
                return {(-m,): Fraction(1)}
            if m == 0:
                return {(): self.h} if self.h else {}
            return {}  # L(m) w = 0, m > 0
        s = key[0]
        rest = key[1:]
        if m < 0 and -m >= s:
            return {(-m,) + key: Fraction(1)}
        # L(m) L(-s) = L(-s) L(m) + (m+s) L(m-s) + delta_{m,s} (m^3-m)/12 c
        out: Element = {}
        add_scaled(out, self.gen_mode(m - s, rest), m + s)
        if m == s:
            add_scaled(out, {rest: Fraction(1)}, Fraction(m**3 - m, 12) * self.c)
        for mon, coeff in self.gen_mode(m, rest).items():
            add_scaled(out, self.gen_mode(-s, mon), coeff)
        return out


class FockBackend:
    """M_a(1) tensor Omega(lambda, k): keys are (partition, t), t < k.

    The bottom slots e_0, ..., e_{k-1} carry the Jordan block:
    a(0) e_t = lambda e_t + e_{t-1} (e_{-1} = 0).  All other modes act
    on the oscillator part only.
    """

    min_deg = 0

    def __init__(self, lam: Fraction, block_size: int):
        if block_size < 1:
            raise ValueError("block size must be >= 1")
        self.lam = Fraction(lam)
        self.block_size = block_size

    def key_degree(self, key) -> int:
        return sum(key[0])

    def gen_mode(self, m: int, key) -> Element:
        mu, t = key
        if m < 0:
            pos = 0
            while pos < len(mu) and mu[pos] >= -m:
                pos += 1
            return {(mu[:pos] + (-m,) + mu[pos:], t): Fraction(1)}
        if m == 0:
            out: Element = {}
            if self.lam:
                out[(mu, t)] = self.lam
            if t:
                out[(mu, t - 1)] = Fraction(1)
            return out
        cnt = mu.count(m)
        if not cnt:
            return {}
        idx = mu.index(m)
        return {(mu[:idx] + mu[idx + 1 :], t): Fraction(m * cnt)}


# ---------------------------------------------------------------------------
# the truncated module
# ---------------------------------------------------------------------------


@dataclass
class TruncatedModule:
    """A degree window [0, depth] of a graded module, with exact matrices.

    ``basis[d]`` lists the degree-d keys in a fixed order; matrices are
    written in these bases (column = image of a source basis key).
    Degree d has sole L(0) generalized eigenvalue ``lowest_weight + d``.
    """

    preset: VOAPreset
    depth: int
    basis: list[list]
    lowest_weight: Fraction
    engine: ModeEngine
    label: str
    _index: list[dict] = field(init=False, repr=False)
    _zm_cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        self.lowest_weight = Fraction(self.lowest_weight)
        self._index = [{k: i for i, k in enumerate(bs)} for bs in self.basis]

    # -- sizes -----------------------------------------------------------

    def dim(self, d: int) -> int:
        return len(self.basis[d])

    @property
    def dims(self) -> list[int]:
        return [len(bs) for bs in self.basis]

    # -- matrices ---------------------------------------------------------

    def _columns(self, images: Iterable[Element], target: int) -> RationalMatrix:
        idx = self._index[target]
        cols = list(images)
        mat = RationalMatrix.zeros(len(idx), len(cols))
        for j, img in enumerate(cols):
            for key, coeff in img.items():
                mat.rows[idx[key]][j] = coeff
        return mat

    def gen_lie_matrix(self, m: int, d: int) -> RationalMatrix:
        """Matrix of the generator Lie mode a(m) / L(m): degree d -> d - m."""
        target = d - m
        if not (0 <= d <= self.depth and 0 <= target <= self.depth):
            raise ValueError(f"mode {m} leaves the window from degree {d}")
        backend = self.engine.backend
        return self._columns(
            (backend.gen_mode(m, key) for key in self.basis[d]), target
        )

    def mode_matrix(self, state: Element | tuple, m: int, d: int) -> RationalMatrix:
        """Matrix of the vertex mode ``state_m``: degree d -> d + wt - m - 1.

        ``state`` must be weight-homogeneous so the degree shift is
        well defined.
        """
        if isinstance(state, tuple):
            state = {state: Fraction(1)}
        weights = {sum(u) for u in state}
        if len(weights) != 1:
            raise ValueError("mode_matrix needs a weight-homogeneous state")
        (w,) = weights
        target = d + w - m - 1
        if not (0 <= d <= self.depth and 0 <= target <= self.depth):
            raise ValueError(f"mode ({w},{m}) leaves the window from degree {d}")
        return self._columns(
            (self.engine.apply(state, m, {key: Fraction(1)}) for key in self.basis[d]),
            target,
        )

    def zero_mode_matrix(self, state: Element | tuple, d: int) -> RationalMatrix:
        """Matrix of o(state) on the degree-d slice (any state: o is
        taken weight-by-weight, so homogeneity is not required)."""
        if isinstance(state, tuple):
            state = {state: Fraction(1)}
        key = (tuple(sorted(state.items())), d)
        hit = self._zm_cache.get(key)
        if hit is None:
            hit = self._columns(
                (self.engine.zero_mode(state, {k: Fraction(1)}) for k in self.basis[d]),
                d,
            )
            self._zm_cache[key] = hit
        return hit

    def l0_matrix(self, d: int) -> RationalMatrix:
        return self.zero_mode_matrix(self.preset.conformal_state(), d)

    def jordan_at(self, d: int) -> JordanReport:
        return jordan_data(self.l0_matrix(d))

    def grading_ok(self, d: int) -> bool:
        """(L(0) - (lowest_weight + d))^dim = 0 on degree d."""
        n = self.dim(d)
        if n == 0:
            return True
        shifted = self.l0_matrix(d).add_scalar(-(self.lowest_weight + d))
        return shifted.power(n).is_zero()


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def verma(c, h, depth: int) -> TruncatedModule:
    """The Virasoro Verma module M(c, h) through degree ``depth``."""
    preset = VOAPreset(VIRASORO, Fraction(c))
    backend = VermaBackend(Fraction(c), Fraction(h))
    basis = [sorted(partitions_of(d)) for d in range(depth + 1)]
    return TruncatedModule(
        preset=preset,
        depth=depth,
        basis=basis,
        lowest_weight=Fraction(h),
        engine=ModeEngine(preset, backend),
        label=f"M(c={c}, h={h})",
    )


def heisenberg_module(a, lam, block_size: int, depth: int) -> TruncatedModule:
    """M_a(1) tensor Omega(lambda, k) through degree ``depth``.

    Lowest conformal weight lam^2/2 - a*lam; each degree-d slice is
    k * p(d)-dimensional.
    """
    a = Fraction(a)
    lam = Fraction(lam)
    preset = VOAPreset(HEISENBERG, a)
    backend = FockBackend(lam, block_size)
    basis = [
        [(mu, t) for mu in sorted(partitions_of(d)) for t in range(block_size)]
        for d in range(depth + 1)
    ]
    return TruncatedModule(
        preset=preset,
        depth=depth,
        basis=basis,
        lowest_weight=lam * lam / 2 - a * lam,
        engine=ModeEngine(preset, backend),
        label=f"M_a(1)xOmega(lam={lam}, k={block_size}), a={a}",
    )


def vacuum_module(preset: VOAPreset, depth: int) -> TruncatedModule:
    """The algebra as a module over itself (vacuum highest weight 0)."""
    basis = [list(weight_basis(preset, d)) for d in range(depth + 1)]
    return TruncatedModule(
        preset=preset,
        depth=depth,
        basis=basis,
        lowest_weight=Fraction(0),
        engine=vacuum_engine(preset),
        label=f"vacuum module ({preset.describe()})",
    )


# ---------------------------------------------------------------------------
# Omega_n
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OmegaReport:
    """Per-degree joint kernels of the modes of weight < -level.

    ``spaces[d]`` is a subspace of the degree-d slice; ``stable`` records
    whether growing the constraint pool by two more weights changed
    nothing (the claim is exact within the window either way, but an
    unstable report means deeper constraints were still biting at the
    cutoff).
    """

    level: int
    weight_cutoff: int
    stable: bool
    spaces: tuple[Subspace, ...]

    @property
    def dims(self) -> list[int]:
        return [sp.dim for sp in self.spaces]

    def degree_support_within(self, bound: int) -> bool:
        return all(sp.dim == 0 for d, sp in enumerate(self.spaces) if d > bound)


def omega_n(
    module: TruncatedModule,
    level: int,
    weight_cutoff: int | None = None,
    quiet_weights: int = 2,
) -> OmegaReport:
    """Degreewise Omega_level: vectors killed by every mode of weight
    below -level.

    Constraints come from composite modes v_m with v running over the
    weight basis at weights 1, 2, ..., and m chosen so the mode weight
    wt v - m - 1 lies in [-d, -level-1] (anything lower leaves the
    module).  Weights keep growing until ``quiet_weights`` consecutive
    weights refine nothing, or until ``weight_cutoff``; the report says
    which happened.
    """
    depth = module.depth
    kernels = [Subspace.full(module.dim(d)) for d in range(depth + 1)]
    cap = weight_cutoff if weight_cutoff is not None else depth + 2 * level + 4
    quiet = 0
    w = 0
    while w < cap and quiet < quiet_weights:
        w += 1
        changed = False
        vs = weight_basis(module.preset, w)
        if not vs:
            continue  # no Virasoro states at weight 1: not a quiet weight
        for d in range(depth + 1):
            if kernels[d].dim == 0:
                continue
            for v in vs:
                for shift in range(-d, -level):
                    m = w - 1 - shift
                    mat = module.mode_matrix(v, m, d)
                    before = kernels[d].dim
                    kernels[d] = kernels[d].intersect_kernel(mat)
                    if kernels[d].dim != before:
                        changed = True
                    if kernels[d].dim == 0:
                        break
                if kernels[d].dim == 0:
                    break
        quiet = 0 if changed else quiet + 1
    return OmegaReport(
        level=level,
        weight_cutoff=w,
        stable=quiet >= quiet_weights,
        spaces=tuple(kernels),
    )


# ---------------------------------------------------------------------------
# degree-preserving Zhu action and graded dimension
# ---------------------------------------------------------------------------


def zhu_generator_matrices(
    module: TruncatedModule, d: int
) -> tuple[RationalMatrix, RationalMatrix]:
    """Matrices of o(x-state) and o(y-state) on the degree-d slice."""
    xs, ys = generator_states(module.preset)
    return (
        module.zero_mode_matrix(xs, d),
        module.zero_mode_matrix(ys, d),
    )


def gdim(module: TruncatedModule, depth: int | None = None) -> QSeries:
    """Graded dimension: leading exponent lowest_weight - c/24, then the
    per-degree dimensions as coefficients."""
    if depth is None:
        depth = module.depth
    lead = module.lowest_weight - module.preset.central_charge / 24
    return QSeries(lead, tuple(module.dims[: depth + 1]))


# ---------------------------------------------------------------------------
# degree bounds for induced modules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DegreeBoundReport:
    level: int
    omega_low: OmegaReport
    omega_high: OmegaReport
    ok: bool

    def __bool__(self) -> bool:
        return self.ok


def degree_bound_check(module: TruncatedModule, level: int) -> DegreeBoundReport:
    """Singular vectors live in degrees <= level; Omega_level lives in
    degrees <= 2*level.  True within the window iff both containments
    hold for this module."""
    low = omega_n(module, 0)
    high = omega_n(module, level) if level else low
    ok = low.degree_support_within(level) and high.degree_support_within(2 * level)
    return DegreeBoundReport(level=level, omega_low=low, omega_high=high, ok=ok)
