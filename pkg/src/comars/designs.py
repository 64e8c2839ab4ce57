"""Construction, validation, and I/O for conference and concatenated designs.

A conference design is an n x m matrix over {-1, 0, +1} with mutually
orthogonal columns, exactly one zero per column, and at most one zero per
row.  Folding one over (stacking it on its negation) gives the body of a
definitive screening design; stacking two such bodies plus center runs gives
a three-level screening design whose first-order effects are unaliased with
every second-order effect.

All constructors return frozen dataclasses wrapping read-only integer
arrays, so instances can be shared freely across threads.
"""

from __future__ import annotations

import csv
import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadZeroPattern,
    DimensionMismatch,
    NoneFound,
    NonOrthogonalColumns,
    NotPrime,
    OddRunCount,
    ParseError,
    TooFewFactors,
    ValidationError,
)

MIN_FACTORS = 5  # the aliasing formulas assume more than four factors

PALEY_PRIMES = (5, 7, 11, 13, 17, 19, 23)  # bundled orders 6, 8, 12, 14, 18, 20, 24


def _frozen(matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ConferenceDesign:
    """Validated conference design; build via :func:`validate_conference`."""

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    def drop_columns(self, m: int) -> "ConferenceDesign":
        """Keep the first m columns (column subsets stay conference designs)."""
        if not MIN_FACTORS <= m <= self.m:
            raise ValidationError(f"cannot keep {m} of {self.m} columns")
        return validate_conference(self.entries[:, :m])


@dataclass(frozen=True)
class ScreeningDesign:
    """DSD body: a conference design stacked over its negation (no center run)."""

    parent: ConferenceDesign
    entries: np.ndarray = field(compare=False)

    @property
    def n(self) -> int:
        return self.parent.n

    @property
    def m(self) -> int:
        return self.parent.m


@dataclass(frozen=True)
class LowerState:
    """Column permutation and per-column fold signs applied to the lower parent."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        m = len(self.perm)
        if sorted(self.perm) != list(range(m)):
            raise ValidationError(f"perm is not a permutation of 0..{m - 1}: {self.perm}")
        if len(self.signs) != m or any(s not in (-1, 1) for s in self.signs):
            raise ValidationError("signs must be a length-m vector over {-1, +1}")

    @property
    def m(self) -> int:
        return len(self.perm)


def identity_state(m: int) -> LowerState:
    return LowerState(perm=tuple(range(m)), signs=(1,) * m)


def random_state(m: int, rng: np.random.Generator) -> LowerState:
    perm = tuple(int(j) for j in rng.permutation(m))
    signs = tuple(int(s) for s in rng.integers(0, 2, size=m) * 2 - 1)
    return LowerState(perm=perm, signs=signs)


@dataclass(frozen=True)
class ComarsDesign:
    """Two DSD bodies stacked with n0 trailing center runs."""

    upper: ScreeningDesign
    lower: ScreeningDesign
    n0: int
    entries: np.ndarray = field(compare=False)

    @property
    def n(self) -> int:
        return self.upper.n

    @property
    def m(self) -> int:
        return self.upper.m

    @property
    def runs(self) -> int:
        return self.entries.shape[0]


def validate_conference(matrix) -> ConferenceDesign:
    """Check every conference-design invariant and wrap the matrix.

    Raises the most specific error first, naming the offending row or column
    pair: entry domain, factor count, run-count parity, zero pattern, and
    column orthogonality.
    """
    entries = np.asarray(matrix, dtype=np.int64)
    if entries.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {entries.shape}")
    n, m = entries.shape
    bad = np.argwhere(~np.isin(entries, (-1, 0, 1)))
    if bad.size:
        r, c = bad[0]
        raise ValidationError(f"entry at row {r}, column {c} is {entries[r, c]}, not in {{-1,0,1}}")
    if m < MIN_FACTORS:
        raise TooFewFactors(f"need at least {MIN_FACTORS} factors, got {m}")
    if n % 2 != 0:
        raise OddRunCount(f"run count {n} is odd")
    col_zeros = np.sum(entries == 0, axis=0)
    for j in np.flatnonzero(col_zeros != 1):
        raise BadZeroPattern(f"column {j} has {col_zeros[j]} zeros, expected exactly 1")
    row_zeros = np.sum(entries == 0, axis=1)
    for i in np.flatnonzero(row_zeros > 1):
        raise BadZeroPattern(f"row {i} has {row_zeros[i]} zeros, expected at most 1")
    gram = entries.T @ entries
    off = np.triu(gram, 1)
    hits = np.argwhere(off != 0)
    if hits.size:
        j, k = hits[0]
        raise NonOrthogonalColumns(f"columns {j} and {k} have inner product {gram[j, k]}")
    return ConferenceDesign(entries=_frozen(entries))


def _legendre(a: int, p: int) -> int:
    """Quadratic character of a mod p: 0, +1 for residues, -1 otherwise."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def paley_conference(p: int) -> ConferenceDesign:
    """Conference design of order p + 1 from the quadratic-character construction.

    The core is the Jacobsthal matrix Q[i, j] = chi(i - j) over GF(p),
    bordered by a row and column of ones.  Q is symmetric when p = 1 (mod 4)
    and skew when p = 3 (mod 4); the border sign is chosen accordingly so
    that the columns come out orthogonal in both cases.
    """
    if not _is_prime(p) or p == 2:
        raise NotPrime(f"{p} is not an odd prime")
    if p < MIN_FACTORS:
        raise TooFewFactors(f"order {p + 1} gives fewer than {MIN_FACTORS} factors")
    q = np.array([[_legendre(i - j, p) for j in range(p)] for i in range(p)], dtype=np.int64)
    n = p + 1
    c = np.zeros((n, n), dtype=np.int64)
    c[0, 1:] = 1
    c[1:, 0] = 1 if p % 4 == 1 else -1
    c[1:, 1:] = q
    return validate_conference(c)


def brute_force_conference(n: int, m: int, limit: int = 1) -> list[ConferenceDesign]:
    """Backtracking search for conference designs at small orders (n <= 10).

    Columns are built row by row with partial-inner-product pruning.  The
    first column is normalized to a zero in row 0 and +1 elsewhere; every
    later column is fixed to +1 in row 0 (row 0 already holds its only zero,
    and folding a column preserves all invariants, so this loses no designs
    up to folds).  Returns the first `limit` complete designs in search order.
    """
    if n not in (6, 8, 10):
        raise ValidationError(f"brute-force search supports n in {{6, 8, 10}}, got {n}")
    if not MIN_FACTORS <= m <= n:
        raise ValidationError(f"need {MIN_FACTORS} <= m <= {n}, got m={m}")

    first = [1] * n
    first[0] = 0
    columns: list[list[int]] = [first]
    row_has_zero = [False] * n
    row_has_zero[0] = True
    found: list[np.ndarray] = []

    def extend_column(col: list[int], row: int, zero_row: int, partials: list[int]) -> bool:
        """Fill `col` from `row` down; returns True once `limit` designs exist."""
        if row == n:
            if any(partials):
                return False
            columns.append(col.copy())
            row_has_zero[zero_row] = True
            done = search_columns()
            row_has_zero[zero_row] = False
            columns.pop()
            return done
        if row == zero_row:
            col[row] = 0
            return extend_column(col, row + 1, zero_row, partials)
        # rows left that can still move the partial inner products
        slack = n - row - 1 - (1 if zero_row > row else 0)
        for value in (1, -1):
            new = [p + value * c[row] for p, c in zip(partials, columns)]
            if all(abs(p) <= slack for p in new):
                col[row] = value
                if extend_column(col, row + 1, zero_row, new):
                    return True
        return False

    def search_columns() -> bool:
        if len(columns) == m:
            found.append(np.array(columns, dtype=np.int64).T)
            return len(found) >= limit
        for zero_row in range(1, n):
            if row_has_zero[zero_row]:
                continue
            col = [0] * n
            col[0] = 1
            partials = [c[0] for c in columns]
            if extend_column(col, 1, zero_row, partials):
                return True
        return False

    search_columns()
    if not found:
        raise NoneFound(f"no conference design of size {n} x {m} under the search constraints")
    return [validate_conference(mat) for mat in found]


def foldover(c: ConferenceDesign) -> ScreeningDesign:
    """Stack c over -c: the 2n-run DSD body with two zeros per column."""
    entries = np.vstack([c.entries, -c.entries])
    return ScreeningDesign(parent=c, entries=_frozen(entries))


def apply_lower_state(d: ScreeningDesign, s: LowerState) -> ScreeningDesign:
    """Permute and fold the columns of a DSD body: out[:, j] = signs[j] * d[:, perm[j]]."""
    if s.m != d.m:
        raise DimensionMismatch(f"state has {s.m} columns, design has {d.m}")
    signs = np.array(s.signs, dtype=np.int64)
    entries = d.entries[:, list(s.perm)] * signs
    parent = validate_conference(d.parent.entries[:, list(s.perm)] * signs)
    return ScreeningDesign(parent=parent, entries=_frozen(entries))


def concatenate(d1: ScreeningDesign, d2: ScreeningDesign, s: LowerState, n0: int) -> ComarsDesign:
    """Stack d1, the state-transformed d2, and n0 center runs; verify zero counts.

    The parents may be distinct conference designs of the same size.
    """
    if d1.entries.shape != d2.entries.shape:
        raise DimensionMismatch(
            f"parent bodies differ in shape: {d1.entries.shape} vs {d2.entries.shape}"
        )
    if n0 < 0:
        raise ValidationError(f"center-run count must be >= 0, got {n0}")
    lower = apply_lower_state(d2, s)
    entries = np.vstack([d1.entries, lower.entries, np.zeros((n0, d1.m), dtype=np.int64)])
    design = ComarsDesign(upper=d1, lower=lower, n0=n0, entries=_frozen(entries))
    _check_zero_counts(design)
    return design


def _check_zero_counts(design: ComarsDesign) -> None:
    """Zero-count law: 4 + n0 zeros per column, 8 + n0 per column product."""
    entries, n0 = design.entries, design.n0
    col_zeros = np.sum(entries == 0, axis=0)
    if np.any(col_zeros != 4 + n0):
        j = int(np.flatnonzero(col_zeros != 4 + n0)[0])
        raise ValidationError(f"column {j} has {col_zeros[j]} zeros, expected {4 + n0}")
    m = design.m
    for i in range(m):
        for j in range(i + 1, m):
            prod_zeros = int(np.sum(entries[:, i] * entries[:, j] == 0))
            if prod_zeros != 8 + n0:
                raise ValidationError(
                    f"product of columns {i} and {j} has {prod_zeros} zeros, expected {8 + n0}"
                )


def parent_conference(order_source: ConferenceDesign, m: int) -> ConferenceDesign:
    """The m-factor parent: keep the first m columns of the source design."""
    return order_source.drop_columns(m)


def smallest_parent_order(m: int) -> int:
    """Run size of the smallest conference design for m factors: m, or m+1 if odd."""
    return m + (m % 2)


# ---------------------------------------------------------------------------
# CSV I/O: headerless, comma-separated, entries -1/0/1, one run per row.
# ---------------------------------------------------------------------------


def load_design_csv(path) -> np.ndarray:
    """Load any three-level design matrix, checking only the entry domain."""
    rows: list[list[int]] = []
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record:
                continue
            try:
                values = [int(tok) for tok in record]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: non-integer token ({exc})") from None
            if any(v not in (-1, 0, 1) for v in values):
                bad = next(v for v in values if v not in (-1, 0, 1))
                raise ParseError(f"{path}: line {lineno}: entry {bad} not in {{-1,0,1}}")
            if rows and len(values) != len(rows[0]):
                raise ParseError(
                    f"{path}: line {lineno}: {len(values)} fields, expected {len(rows[0])}"
                )
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: empty file")
    return np.array(rows, dtype=np.int64)


def load_conference_csv(path) -> ConferenceDesign:
    """Load and fully validate a conference-design CSV."""
    return validate_conference(load_design_csv(path))


def save_csv(design, path) -> None:
    """Write a design (or raw matrix) as headerless integer CSV."""
    entries = design.entries if hasattr(design, "entries") else np.asarray(design)
    with open(path, "w", newline="") as fh:
        for row in entries:
            fh.write(",".join(str(int(v)) for v in row) + "\n")


def bundled_data_path(name: str) -> Path:
    """Path to a CSV shipped with the package (conference designs, reference design)."""
    resource = importlib.resources.files("comars").joinpath("data", name)
    with importlib.resources.as_file(resource) as p:
        return Path(p)
