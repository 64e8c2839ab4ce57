"""Empirical aliasing diagnostics for three-level screening designs.

Everything here works on a raw design matrix (N x m, entries -1/0/+1) so it
applies equally to constructed designs and to arbitrary CSV input.  Aliasing
between two effects is the absolute Pearson correlation between their
model-matrix columns, computed over all runs including center runs; that
convention reproduces the closed-form values in :mod:`comars.analytic`
exactly.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import analytic
from .errors import (
    SingularInformation,
    UnexpectedCorrelationValue,
    ValidationError,
    ZeroVariance,
)

CORR_TOL = 1e-9  # matching observed correlations to theoretical values
ORTHO_TOL = 1e-12  # first-order orthogonality and shared-factor zeros


class PairClass(enum.Enum):
    """Classes of second-order column pairs, each with its own value set."""

    QQ = "qq"
    Q2FI_SHARED = "q2fi_shared"
    Q2FI_DISJOINT = "q2fi_disjoint"
    TFI_SHARED = "tfi_shared"
    TFI_DISJOINT = "tfi_disjoint"


@dataclass(frozen=True)
class ModelMatrix:
    """Blocks of the second-order model matrix, without intercept."""

    linear: np.ndarray  # N x m
    quadratic: np.ndarray  # N x m, entries 0/1
    twofi: np.ndarray  # N x C(m,2), lexicographic pairs
    pairs: tuple[tuple[int, int], ...]

    @property
    def runs(self) -> int:
        return self.linear.shape[0]

    @property
    def m(self) -> int:
        return self.linear.shape[1]


def model_matrix(entries) -> ModelMatrix:
    """Linear, quadratic, and two-factor interaction blocks of a design."""
    x = np.asarray(entries, dtype=np.int64)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValidationError(f"need an N x m design with m >= 2, got shape {x.shape}")
    m = x.shape[1]
    pairs = tuple(itertools.combinations(range(m), 2))
    twofi = np.column_stack([x[:, i] * x[:, j] for i, j in pairs])
    return ModelMatrix(linear=x, quadratic=x * x, twofi=twofi, pairs=pairs)


def pearson(u, v) -> float:
    """Centered Pearson correlation of two columns over all runs."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    uc = u - u.mean()
    vc = v - v.mean()
    nu = math.sqrt(uc @ uc)
    nv = math.sqrt(vc @ vc)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVariance("correlation of a constant column is undefined")
    return float((uc @ vc) / (nu * nv))


def _corr_matrix(cols: np.ndarray, what: str) -> np.ndarray:
    """Correlation matrix of the columns of `cols`, guarding constant columns."""
    x = cols.astype(np.float64)
    xc = x - x.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", xc, xc))
    flat = np.flatnonzero(norms == 0.0)
    if flat.size:
        raise ZeroVariance(f"{what} column {int(flat[0])} is constant")
    return (xc.T @ xc) / np.outer(norms, norms)


def j4(entries, factors) -> int:
    """Absolute sum of the four-factor interaction column for the given 4-subset."""
    factors = tuple(factors)
    if len(factors) != 4 or len(set(factors)) != 4:
        raise ValidationError(f"need four distinct factor indices, got {factors}")
    i, jx, k, l = factors
    x = np.asarray(entries, dtype=np.int64)
    return int(abs(np.sum(x[:, i] * x[:, jx] * x[:, k] * x[:, l])))


def j4_spectrum(entries) -> dict[int, int]:
    """Multiset of J4 values over all 4-subsets of factors, as value -> count."""
    x = np.asarray(entries, dtype=np.int64)
    spectrum: dict[int, int] = {}
    for quad in itertools.combinations(range(x.shape[1]), 4):
        value = j4(x, quad)
        spectrum[value] = spectrum.get(value, 0) + 1
    return dict(sorted(spectrum.items()))


def corr_2fi_disjoint_via_j4(entries, pair_a, pair_b) -> float:
    """|correlation| of two disjoint interaction columns computed on the integer route.

    Equals the J4-characteristic of the four factors divided by the number of
    nonzero entries in an interaction column (both interaction columns have
    the same count in a valid design; the geometric mean covers the general
    case).  Agrees with the Pearson value to 1e-10 on constructed designs.
    """
    a, b = tuple(pair_a), tuple(pair_b)
    if set(a) & set(b):
        raise ValidationError(f"pairs {a} and {b} share a factor")
    x = np.asarray(entries, dtype=np.int64)
    nz_a = int(np.count_nonzero(x[:, a[0]] * x[:, a[1]]))
    nz_b = int(np.count_nonzero(x[:, b[0]] * x[:, b[1]]))
    if nz_a == 0 or nz_b == 0:
        raise ZeroVariance(f"interaction column {a if nz_a == 0 else b} is all zero")
    return j4(x, (*a, *b)) / math.sqrt(nz_a * nz_b)


def classify_pairs(m: int) -> dict[PairClass, list[tuple[int, int]]]:
    """Index pairs into the stacked [quadratic | twofi] column block, by class.

    Quadratic columns occupy indices 0..m-1 and interaction columns follow in
    lexicographic pair order.
    """
    pairs = list(itertools.combinations(range(m), 2))
    offset = m
    out: dict[PairClass, list[tuple[int, int]]] = {cls: [] for cls in PairClass}
    for i, jx in itertools.combinations(range(m), 2):
        out[PairClass.QQ].append((i, jx))
    for i in range(m):
        for p, (a, b) in enumerate(pairs):
            cls = PairClass.Q2FI_SHARED if i in (a, b) else PairClass.Q2FI_DISJOINT
            out[cls].append((i, offset + p))
    for p, q in itertools.combinations(range(len(pairs)), 2):
        shared = set(pairs[p]) & set(pairs[q])
        cls = PairClass.TFI_SHARED if shared else PairClass.TFI_DISJOINT
        out[cls].append((offset + p, offset + q))
    return out


def _second_order_corr(entries) -> tuple[np.ndarray, ModelMatrix]:
    mm = model_matrix(entries)
    block = np.hstack([mm.quadratic, mm.twofi])
    return _corr_matrix(block, "second-order"), mm


def class_correlations(entries) -> dict[PairClass, np.ndarray]:
    """Signed correlations for every second-order pair, grouped by class."""
    corr, mm = _second_order_corr(entries)
    grouped = {}
    for cls, idx in classify_pairs(mm.m).items():
        rows = np.array([corr[i, j] for i, j in idx]) if idx else np.empty(0)
        grouped[cls] = rows
    return grouped


def _twofi_corr_values(entries) -> np.ndarray:
    """Signed correlations of all interaction-column pairs, in pair-index order."""
    mm = model_matrix(entries)
    corr = _corr_matrix(mm.twofi, "interaction")
    iu = np.triu_indices(corr.shape[0], 1)
    return corr[iu]


def ssq_2fi(entries) -> float:
    """Sum of squared correlations over all pairs of interaction columns."""
    values = _twofi_corr_values(entries)
    return float(np.sum(values * values))


def ssq_all_second_order(entries) -> float:
    """Sum of squared correlations over all pairs of second-order columns."""
    corr, _ = _second_order_corr(entries)
    iu = np.triu_indices(corr.shape[0], 1)
    values = corr[iu]
    return float(np.sum(values * values))


def f_vector(entries, n: int) -> dict[float, int]:
    """Counts of interaction-pair |correlations| at each theoretical value.

    Keys are the nonzero grid values for parent run size ``n`` plus 0.0; the
    counts sum to the total number of interaction-column pairs.  An observed
    value farther than 1e-9 from every grid point signals a construction bug.
    """
    grid = analytic.twofi_value_grid(n) + (0.0,)
    counts = {value: 0 for value in grid}
    for r in np.abs(_twofi_corr_values(entries)):
        diffs = [abs(r - value) for value in grid]
        best = int(np.argmin(diffs))
        if diffs[best] > CORR_TOL:
            raise UnexpectedCorrelationValue(
                f"interaction correlation {r!r} is not a theoretical value for n={n}"
            )
        counts[grid[best]] += 1
    return counts


def observed_f_vector(entries) -> dict[float, int]:
    """Frequency map of interaction-pair |correlations| grouped at 1e-9 resolution.

    Fallback for designs whose parent run size is unknown.
    """
    counts: dict[float, int] = {}
    for r in sorted(np.abs(_twofi_corr_values(entries))):
        for seen in counts:
            if abs(r - seen) <= CORR_TOL:
                counts[seen] += 1
                break
        else:
            counts[float(r)] = 1
    return counts


def quartile_summary(entries) -> tuple[float, float, float]:
    """(median, upper quartile, maximum) of |correlation| over second-order pairs.

    Quantiles use linear interpolation on the sorted sample.
    """
    corr, _ = _second_order_corr(entries)
    iu = np.triu_indices(corr.shape[0], 1)
    values = np.abs(corr[iu])
    q2, q3 = np.quantile(values, [0.5, 0.75], method="linear")
    return float(q2), float(q3), float(np.max(values))


def d_criterion(entries) -> float:
    """Scaled D-criterion of the intercept + linear + quadratic model.

    det(X'X)^(1/p) / N with p = 2m + 1 columns in X.
    """
    x = np.asarray(entries, dtype=np.float64)
    n_runs, m = x.shape
    big_x = np.hstack([np.ones((n_runs, 1)), x, x * x])
    sign, logdet = np.linalg.slogdet(big_x.T @ big_x)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularInformation("intercept+linear+quadratic information matrix is singular")
    return float(math.exp(logdet / (2 * m + 1)) / n_runs)


def _quadratic_information(entries) -> tuple[np.ndarray, int, int]:
    """Information matrix of the quadratic effects, adjusted for intercept and linear."""
    x = np.asarray(entries, dtype=np.float64)
    n_runs, m = x.shape
    big_x = np.hstack([np.ones((n_runs, 1)), x, x * x])
    info = big_x.T @ big_x
    quad = slice(m + 1, 2 * m + 1)
    rest = slice(0, m + 1)
    try:
        solved = np.linalg.solve(info[rest, rest], info[rest, quad])
    except np.linalg.LinAlgError:
        raise SingularInformation("intercept+linear information matrix is singular") from None
    return info[quad, quad] - info[quad, rest] @ solved, n_runs, m


def quadratic_ds_criterion(entries) -> float:
    """Per-run D_s-criterion for the quadratic effects within the quadratic model.

    det(S)^(1/m) / N, where S is the quadratic-effect information adjusted for
    the intercept and linear effects.  Ratios of this quantity measure the
    relative efficiency of quadratic-effect estimation between designs.
    """
    s, n_runs, m = _quadratic_information(entries)
    sign, logdet = np.linalg.slogdet(s)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularInformation("quadratic-effect information matrix is singular")
    return float(math.exp(logdet / m) / n_runs)


def quadratic_standard_errors(entries) -> np.ndarray:
    """Standard errors of the quadratic coefficients at unit error variance."""
    s, _, _ = _quadratic_information(entries)
    try:
        inv = np.linalg.inv(s)
    except np.linalg.LinAlgError:
        raise SingularInformation("quadratic-effect information matrix is singular") from None
    return np.sqrt(np.diag(inv))


def check_theory(entries, n: int, n0: int) -> list[str]:
    """Compare every classified correlation against its closed-form value set.

    Returns human-readable violation messages; empty means the design obeys
    all first- and second-order aliasing laws for parent run size n with n0
    center runs.
    """
    x = np.asarray(entries, dtype=np.int64)
    mm = model_matrix(x)
    violations: list[str] = []

    so_block = np.hstack([mm.quadratic, mm.twofi])
    lin_corr = _cross_corr(mm.linear, np.hstack([mm.linear, so_block]))
    m = mm.m
    for i in range(m):
        for j in range(lin_corr.shape[1]):
            if j < m and j <= i:
                continue  # lower triangle / diagonal of the linear block
            if abs(lin_corr[i, j]) > ORTHO_TOL:
                violations.append(
                    f"linear column {i} correlates with model column {j}: {lin_corr[i, j]:.3e}"
                )

    corr = _corr_matrix(so_block, "second-order")
    expected_qq = analytic.qq_corr_comars(n, n0)
    expected_q2fi = analytic.q2fi_corr_comars(n, n0)
    expected_shared = analytic.tfi_shared_corr(n)
    disjoint_set = analytic.tfi_disjoint_value_set(n)
    for cls, idx in classify_pairs(m).items():
        for i, j in idx:
            r = corr[i, j]
            if cls is PairClass.QQ:
                ok = abs(r - expected_qq) <= CORR_TOL
                expected = f"{expected_qq:.6f}"
            elif cls is PairClass.Q2FI_SHARED:
                ok = abs(r) <= ORTHO_TOL
                expected = "0"
            elif cls is PairClass.Q2FI_DISJOINT:
                ok = any(abs(abs(r) - v) <= CORR_TOL for v in (0.0, expected_q2fi))
                expected = f"0 or {expected_q2fi:.6f}"
            elif cls is PairClass.TFI_SHARED:
                ok = any(abs(abs(r) - v) <= CORR_TOL for v in (0.0, expected_shared))
                expected = f"0 or {expected_shared:.6f}"
            else:
                ok = any(abs(abs(r) - v) <= CORR_TOL for v in disjoint_set)
                expected = f"one of {disjoint_set}"
            if not ok:
                violations.append(
                    f"{cls.value} pair ({i},{j}): observed {r:.9f}, expected {expected}"
                )
    return violations


def _cross_corr(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    lx = left.astype(np.float64)
    rx = right.astype(np.float64)
    lc = lx - lx.mean(axis=0)
    rc = rx - rx.mean(axis=0)
    ln = np.sqrt(np.einsum("ij,ij->j", lc, lc))
    rn = np.sqrt(np.einsum("ij,ij->j", rc, rc))
    for side, norms in (("left", ln), ("right", rn)):
        flat = np.flatnonzero(norms == 0.0)
        if flat.size:
            raise ZeroVariance(f"{side} column {int(flat[0])} is constant")
    return (lc.T @ rc) / np.outer(ln, rn)


@dataclass(frozen=True)
class AliasReport:
    """Every empirical diagnostic of a design in one bundle."""

    m: int
    n: int | None
    n0: int
    runs: int
    correlations: dict[PairClass, tuple[float, ...]]
    j4_spectrum: dict[int, int]
    ssq_2fi: float
    ssq_all_so: float
    f_vector: dict[float, int]
    quartiles: tuple[float, float, float]
    d_criterion: float


def count_center_runs(entries) -> int:
    """Number of all-zero rows."""
    x = np.asarray(entries)
    return int(np.sum(np.all(x == 0, axis=1)))


def infer_parent_run_size(entries) -> int | None:
    """Guess the parent run size n of a concatenated design from zero counts.

    A concatenated design has 4 + n0 zeros per linear column and 4n + n0
    runs.  Returns None when the counts are inconsistent with that shape.
    """
    x = np.asarray(entries)
    n0 = count_center_runs(x)
    col_zeros = np.sum(x == 0, axis=0)
    if np.any(col_zeros != 4 + n0):
        return None
    n, rem = divmod(x.shape[0] - n0, 4)
    if rem or n % 2 or n < 6:
        return None
    return int(n)


def alias_report(entries, n: int | None = None, n0: int | None = None) -> AliasReport:
    """Compute the full diagnostic bundle for a design matrix.

    When ``n`` is known the interaction frequency vector is matched against
    the theoretical value grid; otherwise it groups the observed values.
    """
    x = np.asarray(entries, dtype=np.int64)
    bad = np.argwhere(~np.isin(x, (-1, 0, 1)))
    if bad.size:
        r, c = bad[0]
        raise ValidationError(f"entry at row {r}, column {c} is {x[r, c]}, not in {{-1,0,1}}")
    if n0 is None:
        n0 = count_center_runs(x)
    corr, mm = _second_order_corr(x)
    grouped = {
        cls: tuple(float(corr[i, j]) for i, j in idx)
        for cls, idx in classify_pairs(mm.m).items()
    }
    iu = np.triu_indices(corr.shape[0], 1)
    all_values = corr[iu]
    abs_values = np.abs(all_values)
    q2, q3 = np.quantile(abs_values, [0.5, 0.75], method="linear")
    freq = f_vector(x, n) if n is not None else observed_f_vector(x)
    return AliasReport(
        m=mm.m,
        n=n,
        n0=n0,
        runs=mm.runs,
        correlations=grouped,
        j4_spectrum=j4_spectrum(x),
        ssq_2fi=ssq_2fi(x),
        ssq_all_so=float(np.sum(all_values * all_values)),
        f_vector=freq,
        quartiles=(float(q2), float(q3), float(np.max(abs_values))),
        d_criterion=d_criterion(x),
    )


def report_to_dict(report: AliasReport) -> dict:
    """JSON-ready form of a report, floats fixed at six decimals."""
    return {
        "m": report.m,
        "n": report.n,
        "n0": report.n0,
        "runs": report.runs,
        "ssq_2fi": round(report.ssq_2fi, 6),
        "ssq_all_so": round(report.ssq_all_so, 6),
        "f_vector": [
            {"value": round(value, 6), "count": count}
            for value, count in sorted(report.f_vector.items())
            if value != 0.0
        ],
        "quartiles": {
            "q2": round(report.quartiles[0], 6),
            "q3": round(report.quartiles[1], 6),
            "max": round(report.quartiles[2], 6),
        },
        "j4_spectrum": [
            {"value": value, "count": count}
            for value, count in sorted(report.j4_spectrum.items())
        ],
        "d_criterion": round(report.d_criterion, 6),
    }
