"""Dense exact linear algebra over the rationals.

Everything in this package that looks like a number is a
:class:`fractions.Fraction`; no floating point is allowed anywhere.  The
matrices involved are small (a few hundred rows at most), so plain
list-of-lists Gaussian elimination is both fast enough and easy to audit.

Conventions
-----------
* Vectors are ``list[Fraction]``; matrices are row-major ``list[list[...]]``.
* :class:`Subspace` keeps its generators *and* a reduced row echelon basis
  together with the transformation rows, so that membership tests can return
  a certificate (coefficients against the original generators) that a test
  can re-verify by plain summation.
* Jordan data is computed from rank sequences of ``(M - lam)^j``; if the
  characteristic polynomial does not split over Q the computation refuses
  with :class:`SpectrumError` naming the offending factor rather than
  guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Q = Fraction

__all__ = [
    "Q",
    "qstr",
    "parse_q",
    "RationalMatrix",
    "Subspace",
    "JordanReport",
    "QSeries",
    "SpectrumError",
    "gbinom",
    "kernel_basis",
    "charpoly",
    "rational_roots",
    "jordan_data",
    "partition_counts",
    "partition_qseries",
]


def qstr(x: Fraction | int) -> str:
    """Serialize a rational as ``"p"`` or ``"p/q"`` (the on-disk format)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_q(s: str | int) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(s)


def gbinom(n: int, k: int) -> int:
    """Generalized binomial coefficient C(n, k) for any integer n, k >= 0.

    For negative n this is the binomial-series coefficient
    n(n-1)...(n-k+1)/k!, always an integer.
    """
    if k < 0:
        return 0
    if n >= 0:
        if k > n:
            return 0
        return math.comb(n, k)
    # C(n,k) = (-1)^k C(k-n-1, k)
    return (-1) ** k * math.comb(k - n - 1, k)


class SpectrumError(ValueError):
    """Raised when a Jordan computation meets a non-rational spectrum."""


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


class RationalMatrix:
    """A dense matrix of Fractions with exact elementary operations."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence[Fraction | int]]):
        self.rows = [[Fraction(x) for x in r] for r in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        for r in self.rows:
            if len(r) != self.ncols:
                raise ValueError("ragged rows")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, m: int, n: int) -> "RationalMatrix":
        return cls([[Fraction(0)] * n for _ in range(m)])

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)])

    def copy(self) -> "RationalMatrix":
        return RationalMatrix([row[:] for row in self.rows])

    # -- basic algebra ------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RationalMatrix) and self.rows == other.rows

    def __hash__(self):  # pragma: no cover - matrices are not dict keys
        raise TypeError("RationalMatrix is unhashable")

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        assert (self.nrows, self.ncols) == (other.nrows, other.ncols)
        return RationalMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)]
        )

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        assert (self.nrows, self.ncols) == (other.nrows, other.ncols)
        return RationalMatrix(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)]
        )

    def scale(self, c: Fraction | int) -> "RationalMatrix":
        c = Fraction(c)
        return RationalMatrix([[c * x for x in r] for r in self.rows])

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        assert self.ncols == other.nrows, (self.ncols, other.nrows)
        bt = list(zip(*other.rows)) if other.rows else []
        out = []
        for r in self.rows:
            out.append([sum(a * b for a, b in zip(r, col)) for col in bt])
        return RationalMatrix(out) if out else RationalMatrix.zeros(0, other.ncols)

    def matvec(self, v: Sequence[Fraction]) -> list[Fraction]:
        assert len(v) == self.ncols
        return [sum(a * b for a, b in zip(r, v)) for r in self.rows]

    def transpose(self) -> "RationalMatrix":
        if not self.rows:
            return RationalMatrix.zeros(self.ncols, 0)
        return RationalMatrix([list(col) for col in zip(*self.rows)])

    def add_scalar(self, c: Fraction | int) -> "RationalMatrix":
        """self + c * Identity."""
        assert self.nrows == self.ncols
        out = self.copy()
        for i in range(self.nrows):
            out.rows[i][i] += Fraction(c)
        return out

    def power(self, k: int) -> "RationalMatrix":
        assert self.nrows == self.ncols and k >= 0
        result = RationalMatrix.identity(self.nrows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base_needed = k > 1
            if base_needed:
                base = base @ base
            k >>= 1
        return result

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    def trace(self) -> Fraction:
        assert self.nrows == self.ncols
        return sum((self.rows[i][i] for i in range(self.nrows)), Fraction(0))

    def rank(self) -> int:
        return len(_row_echelon([r[:] for r in self.rows])[0])

    def __repr__(self) -> str:
        body = "; ".join(" ".join(qstr(x) for x in r) for r in self.rows)
        return f"RationalMatrix[{self.nrows}x{self.ncols}]({body})"


def _row_echelon(rows: list[list[Fraction]]) -> tuple[list[int], list[list[Fraction]]]:
    """In-place reduced row echelon form.

    Returns (pivot column indices, nonzero rows).  Rows are normalized so the
    pivot entry is 1 and pivot columns are cleared above and below.
    """
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        if inv != 1:
            rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots, rows[:r]


def kernel_basis(mat: RationalMatrix) -> list[list[Fraction]]:
    """Basis of the right kernel {v : mat @ v = 0}, deterministic order."""
    pivots, rows = _row_echelon([r[:] for r in mat.rows])
    pivset = set(pivots)
    free = [c for c in range(mat.ncols) if c not in pivset]
    basis = []
    for fc in free:
        v = [Fraction(0)] * mat.ncols
        v[fc] = Fraction(1)
        for pr, pc in enumerate(pivots):
            v[pc] = -rows[pr][fc]
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# subspaces with membership certificates
# ---------------------------------------------------------------------------


@dataclass
class Subspace:
    """Row span of a generator list, with certificate-producing reduction.

    ``echelon`` is the RREF basis; ``transform[i]`` expresses ``echelon[i]``
    as a combination of the original ``generators`` so that membership
    certificates can point back at the generators the caller supplied.
    """

    ambient_dim: int
    generators: list[list[Fraction]] = field(default_factory=list)
    echelon: list[list[Fraction]] = field(default_factory=list)
    transform: list[list[Fraction]] = field(default_factory=list)
    pivots: list[int] = field(default_factory=list)

    @classmethod
    def from_generators(
        cls, gens: Iterable[Sequence[Fraction | int]], ambient_dim: int
    ) -> "Subspace":
        gens = [[Fraction(x) for x in g] for g in gens]
        for g in gens:
            if len(g) != ambient_dim:
                raise ValueError("generator has wrong length")
        sub = cls(ambient_dim=ambient_dim)
        for i, g in enumerate(gens):
            sub._insert(g, i, len(gens))
        sub.generators = gens
        return sub

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        """The whole coordinate space (generated by the standard basis)."""
        rows = [
            [Fraction(int(i == j)) for j in range(ambient_dim)]
            for i in range(ambient_dim)
        ]
        return cls.from_generators(rows, ambient_dim)

    def _insert(self, vec: list[Fraction], gen_index: int, total_gens: int) -> bool:
        """Reduce vec against the echelon and append if independent."""
        v = vec[:]
        t = [Fraction(0)] * total_gens
        if gen_index >= 0:
            if gen_index >= total_gens:
                raise IndexError
            t[gen_index] = Fraction(1)
        for row, trow, p in zip(self.echelon, self.transform, self.pivots):
            f = v[p]
            if f != 0:
                v = [a - f * b for a, b in zip(v, row)]
                t = [a - f * b for a, b in zip(t, trow)]
        piv = next((c for c, x in enumerate(v) if x != 0), None)
        if piv is None:
            return False
        inv = 1 / v[piv]
        v = [x * inv for x in v]
        t = [x * inv for x in t]
        # clear the new pivot column in older rows to keep full RREF
        for i in range(len(self.echelon)):
            f = self.echelon[i][piv]
            if f != 0:
                self.echelon[i] = [a - f * b for a, b in zip(self.echelon[i], v)]
                self.transform[i] = [a - f * b for a, b in zip(self.transform[i], t)]
        # keep rows sorted by pivot column
        pos = sum(1 for p in self.pivots if p < piv)
        self.echelon.insert(pos, v)
        self.transform.insert(pos, t)
        self.pivots.insert(pos, piv)
        return True

    @property
    def dim(self) -> int:
        return len(self.echelon)

    def add_generator(self, vec: Sequence[Fraction | int]) -> bool:
        """Append one generator; True if it enlarged the span."""
        v = [Fraction(x) for x in vec]
        if len(v) != self.ambient_dim:
            raise ValueError("generator has wrong length")
        self.generators.append(v)
        total = len(self.generators)
        for t in self.transform:
            t.append(Fraction(0))
        return self._insert(v[:], total - 1, total)

    def reduce(self, vec: Sequence[Fraction | int]) -> tuple[list[Fraction], list[Fraction]]:
        """Return (residual, combination) with
        vec = residual + sum_i combination[i] * generators[i]
        and residual supported off the pivot columns."""
        v = [Fraction(x) for x in vec]
        comb = [Fraction(0)] * len(self.generators)
        for row, trow, p in zip(self.echelon, self.transform, self.pivots):
            f = v[p]
            if f != 0:
                v = [a - f * b for a, b in zip(v, row)]
                comb = [a + f * b for a, b in zip(comb, trow)]
        return v, comb

    def contains(self, vec: Sequence[Fraction | int]) -> bool:
        residual, _ = self.reduce(vec)
        return all(x == 0 for x in residual)

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(row) for row in other.echelon)

    def membership_certificate(
        self, vec: Sequence[Fraction | int]
    ) -> list[tuple[int, Fraction]] | None:
        """Coefficients (generator index, coefficient) with
        vec == sum coeff * generators[idx], or None if vec is not in the span."""
        residual, comb = self.reduce(vec)
        if any(x != 0 for x in residual):
            return None
        return [(i, c) for i, c in enumerate(comb) if c != 0]

    def intersect_kernel(self, mat: RationalMatrix) -> "Subspace":
        """Subspace {v in self : mat @ v = 0} (mat acts on ambient coords)."""
        if self.dim == 0:
            return Subspace(ambient_dim=self.ambient_dim)
        if mat.nrows == 0:
            # no constraints (a map into a zero-dimensional target)
            return Subspace.from_generators(self.echelon, self.ambient_dim)
        cols = [mat.matvec(b) for b in self.echelon]
        small = RationalMatrix(list(map(list, zip(*cols))) if cols else [])
        coeffs = kernel_basis(small) if cols else []
        gens = []
        for cv in coeffs:
            vec = [Fraction(0)] * self.ambient_dim
            for c, b in zip(cv, self.echelon):
                if c != 0:
                    vec = [a + c * x for a, x in zip(vec, b)]
            gens.append(vec)
        return Subspace.from_generators(gens, self.ambient_dim)

    def basis_matrix(self) -> RationalMatrix:
        if not self.echelon:
            return RationalMatrix.zeros(0, self.ambient_dim)
        return RationalMatrix(self.echelon)


def quotient_basis(sub: Subspace) -> list[int]:
    """Indices of the ambient coordinates that represent the quotient.

    With the ambient coordinates listed in *descending* preference order
    (callers that want least-monomial representatives put the greatest
    monomial first), the non-pivot coordinates form a deterministic section
    of ambient/sub.
    """
    pivset = set(sub.pivots)
    return [c for c in range(sub.ambient_dim) if c not in pivset]


# ---------------------------------------------------------------------------
# characteristic polynomial, rational spectrum, Jordan data
# ---------------------------------------------------------------------------


def charpoly(mat: RationalMatrix) -> list[Fraction]:
    """Coefficients of det(xI - M), highest degree first (monic).

    Faddeev-LeVerrier: exact, O(n^4), fine for the sizes seen here.
    """
    n = mat.nrows
    assert n == mat.ncols
    coeffs = [Fraction(1)]
    Mk = RationalMatrix.identity(n)
    for k in range(1, n + 1):
        Mk = mat @ Mk
        ck = -Mk.trace() / k
        coeffs.append(ck)
        if k < n:
            Mk = Mk.add_scalar(ck)
    return coeffs


def _poly_eval(coeffs: list[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in coeffs:
        acc = acc * x + c
    return acc


def _poly_divide_linear(coeffs: list[Fraction], root: Fraction) -> list[Fraction]:
    """Divide by (x - root); assumes the division is exact."""
    out = [coeffs[0]]
    for c in coeffs[1:-1]:
        out.append(c + out[-1] * root)
    # remainder coeffs[-1] + out[-1]*root must be zero
    return out


def _divisors(n: int, cap: int = 200000) -> list[int]:
    n = abs(n)
    if n == 0:
        return [0]
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
            if len(out) > cap:
                raise SpectrumError(
                    "too many divisor candidates while searching rational roots"
                )
        d += 1
    return sorted(out)


def rational_roots(coeffs: list[Fraction]) -> tuple[dict[Fraction, int], list[Fraction]]:
    """All rational roots with multiplicity, plus the rootless residual factor.

    ``coeffs`` is highest-first.  The residual is monic; it is [1] exactly
    when the polynomial splits over Q.
    """
    work = [Fraction(c) for c in coeffs]
    # strip leading zeros defensively
    while work and work[0] == 0:
        work.pop(0)
    if not work:
        raise ValueError("zero polynomial")
    roots: dict[Fraction, int] = {}
    # x = 0 roots first
    while len(work) > 1 and work[-1] == 0:
        roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
        work.pop()
    if len(work) > 1:
        # clear denominators -> integer polynomial
        den = math.lcm(*[c.denominator for c in work])
        ipoly = [int(c * den) for c in work]
        cont = math.gcd(*[abs(c) for c in ipoly])
        ipoly = [c // cont for c in ipoly]
        cands: set[Fraction] = set()
        for p in _divisors(ipoly[-1]):
            for q in _divisors(ipoly[0]):
                if q == 0:
                    continue
                cands.add(Fraction(p, q))
                cands.add(Fraction(-p, q))
        for cand in sorted(cands):
            while len(work) > 1 and _poly_eval(work, cand) == 0:
                roots[cand] = roots.get(cand, 0) + 1
                work = _poly_divide_linear(work, cand)
    lead = work[0]
    residual = [c / lead for c in work]
    return roots, residual


@dataclass(frozen=True)
class JordanReport:
    """Jordan block data of a matrix with rational spectrum.

    ``blocks`` maps eigenvalue -> tuple of block sizes, descending.
    """

    size: int
    blocks: dict[Fraction, tuple[int, ...]]

    @property
    def eigenvalues(self) -> list[Fraction]:
        return sorted(self.blocks)

    @property
    def diagonalizable(self) -> bool:
        return all(all(b == 1 for b in bs) for bs in self.blocks.values())

    def to_jsonable(self) -> dict:
        return {
            "size": self.size,
            "blocks": {qstr(ev): list(bs) for ev, bs in sorted(self.blocks.items())},
            "diagonalizable": self.diagonalizable,
        }


def jordan_data(mat: RationalMatrix) -> JordanReport:
    """Jordan block sizes from rank sequences of (M - lam)^j.

    Raises SpectrumError if the characteristic polynomial has an
    irrational factor (reported in the message, integer-normalized).
    """
    n = mat.nrows
    if n == 0:
        return JordanReport(size=0, blocks={})
    roots, residual = rational_roots(charpoly(mat))
    if len(residual) > 1:
        den = math.lcm(*[c.denominator for c in residual])
        ints = [int(c * den) for c in residual]
        pretty = " + ".join(
            f"{c}*x^{len(ints) - 1 - i}" for i, c in enumerate(ints) if c != 0
        )
        raise SpectrumError(
            f"matrix spectrum is not rational; irreducible-over-Q residual factor: {pretty}"
        )
    blocks: dict[Fraction, tuple[int, ...]] = {}
    for ev, mult in sorted(roots.items()):
        shifted = mat.add_scalar(-ev)
        ranks = [n]
        power = RationalMatrix.identity(n)
        j = 0
        while True:
            j += 1
            power = power @ shifted
            ranks.append(power.rank())
            if ranks[-1] == ranks[-2] or n - ranks[-1] >= mult:
                break
        # number of blocks of size >= j is rank_{j-1} - rank_j
        sizes: list[int] = []
        geq = [ranks[i] - ranks[i + 1] for i in range(len(ranks) - 1)]
        for j, (g, g_next) in enumerate(zip(geq, geq[1:] + [0]), start=1):
            sizes.extend([j] * (g - g_next))
        sizes = [s for s in sizes if s > 0]
        sizes.sort(reverse=True)
        assert sum(sizes) == mult, (sizes, mult)
        blocks[ev] = tuple(sizes)
    return JordanReport(size=n, blocks=blocks)


# ---------------------------------------------------------------------------
# partition counting and q-series
# ---------------------------------------------------------------------------


def partition_counts(max_n: int, min_part: int = 1) -> list[int]:
    """[p(0), ..., p(max_n)] with parts >= min_part."""
    counts = [0] * (max_n + 1)
    counts[0] = 1
    for part in range(min_part, max_n + 1):
        for total in range(part, max_n + 1):
            counts[total] += counts[total - part]
    return counts


@dataclass(frozen=True)
class QSeries:
    """A truncated q-expansion  q^leading_exponent * sum coefficients[d] q^d."""

    leading_exponent: Fraction
    coefficients: tuple[int, ...]

    def to_jsonable(self) -> dict:
        return {
            "leading_exponent": qstr(self.leading_exponent),
            "coefficients": list(self.coefficients),
        }

    def __str__(self) -> str:
        head = qstr(self.leading_exponent)
        return f"q^({head}) * ({' + '.join(f'{c} q^{d}' for d, c in enumerate(self.coefficients))})"


def partition_qseries(max_n: int, min_part: int = 1) -> QSeries:
    return QSeries(
        leading_exponent=Fraction(0),
        coefficients=tuple(partition_counts(max_n, min_part)),
    )
