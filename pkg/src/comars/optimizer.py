"""CC/VNS search over column permutations and folds of the lower parent.

The upper DSD body stays fixed; the search space is the set of lower states
(column permutation plus per-column fold signs).  A best-improvement local
search over single folds and column swaps (CC) is nested inside a variable
neighborhood search that shakes with one or two folds, a swap, or a
three-cycle, restarted from random states.

Objectives are evaluated on an exact integer route: the Gram matrix of the
interaction columns of the concatenated design, whose entries are the
correlation values times 4n - 8.  The Gram of the transformed lower body is
obtained by index gymnastics on the untransformed body's Gram, so no matrix
products happen inside the search loop.  Correctness of this route against
the Pearson-based diagnostics is asserted on every optimization result.
"""

from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic, metrics
from .designs import ComarsDesign, LowerState, ScreeningDesign, concatenate
from .errors import DimensionMismatch, UnexpectedCorrelationValue, ValidationError

logger = logging.getLogger(__name__)

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Objective:
    """Comparable objective value: a sum of squares or a frequency vector.

    For kind ``"f"``, ``value`` holds the counts of interaction-column pairs
    at each nonzero correlation value in ``grid`` (sorted descending), and
    comparison is lexicographic: fewer pairs at the most severe correlation
    wins, ties broken at the next value.
    """

    kind: str  # "ssq" or "f"
    value: float | tuple[int, ...]
    grid: tuple[float, ...] | None = None

    @property
    def sort_key(self) -> tuple:
        return self.value if isinstance(self.value, tuple) else (self.value,)

    def __lt__(self, other: "Objective") -> bool:
        if self.kind != other.kind:
            raise ValidationError(f"cannot compare {self.kind} with {other.kind}")
        return self.sort_key < other.sort_key


@dataclass(frozen=True)
class SearchConfig:
    objective: str = "ssq"
    restarts: int = 100
    seed: int = 0
    max_cc_passes: int = 500
    workers: int | None = None  # None: COMARS_THREADS, else available parallelism

    def __post_init__(self) -> None:
        if self.objective not in ("ssq", "f"):
            raise ValidationError(f"objective must be 'ssq' or 'f', got {self.objective!r}")
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")
        if self.max_cc_passes < 1:
            raise ValidationError("max CC passes must be >= 1")


@dataclass(frozen=True)
class TraceEntry:
    """One accepted move; `search` numbers the CC invocations within a restart."""

    restart: int
    search: int
    move: str
    objective: float | tuple[int, ...]


@dataclass(frozen=True)
class OptimizeResult:
    design: ComarsDesign
    objective: Objective
    state: LowerState
    pairing: tuple[int, int] = (0, 0)
    cc_bound_hit: bool = False
    trace: tuple[TraceEntry, ...] = field(default=(), repr=False)


class _GramEvaluator:
    """Integer objective evaluation for one ordered pair of parent bodies."""

    def __init__(self, d1: ScreeningDesign, d2: ScreeningDesign):
        if d1.entries.shape != d2.entries.shape:
            raise DimensionMismatch(
                f"parent bodies differ in shape: {d1.entries.shape} vs {d2.entries.shape}"
            )
        self.m = d1.m
        self.n = d1.n
        pairs = list(itertools.combinations(range(self.m), 2))
        self.pairs = np.array(pairs, dtype=np.intp)
        self.pair_index = np.zeros((self.m, self.m), dtype=np.intp)
        for p, (a, b) in enumerate(pairs):
            self.pair_index[a, b] = self.pair_index[b, a] = p
        self.gram_upper = self._twofi_gram(d1.entries)
        self.gram_lower_base = self._twofi_gram(d2.entries)
        self.iu = np.triu_indices(len(pairs), 1)
        self.denominator = 4 * self.n - 8
        self.levels = np.array(analytic.twofi_gram_grid(self.n), dtype=np.int64)
        self.grid = analytic.twofi_value_grid(self.n)

    def _twofi_gram(self, body: np.ndarray) -> np.ndarray:
        cols = body[:, self.pairs[:, 0]] * body[:, self.pairs[:, 1]]
        return cols.T @ cols

    def gram(self, perm: np.ndarray, signs: np.ndarray) -> np.ndarray:
        """Interaction-column Gram of the concatenation for the given lower state."""
        mapped = self.pair_index[perm[self.pairs[:, 0]], perm[self.pairs[:, 1]]]
        pair_signs = signs[self.pairs[:, 0]] * signs[self.pairs[:, 1]]
        lower = self.gram_lower_base[np.ix_(mapped, mapped)] * np.outer(pair_signs, pair_signs)
        return self.gram_upper + lower

    def key(self, perm: np.ndarray, signs: np.ndarray, kind: str) -> tuple:
        """Comparable objective key; exact integers throughout."""
        g = np.abs(self.gram(perm, signs)[self.iu])
        if kind == "ssq":
            return (int(np.sum(g * g)),)
        counts = tuple(int(np.sum(g == lvl)) for lvl in self.levels)
        if sum(counts) != int(np.sum(g > 0)):
            stray = sorted(set(g[g > 0].tolist()) - set(self.levels.tolist()))
            raise UnexpectedCorrelationValue(
                f"interaction inner products {stray} outside the value set for n={self.n}"
            )
        return counts

    def objective(self, key: tuple, kind: str) -> Objective:
        if kind == "ssq":
            return Objective(kind="ssq", value=key[0] / self.denominator**2)
        return Objective(kind="f", value=key, grid=self.grid)


def _display(evaluator: _GramEvaluator, key: tuple, kind: str):
    return key[0] / evaluator.denominator**2 if kind == "ssq" else key


def _cc(
    evaluator: _GramEvaluator,
    perm: np.ndarray,
    signs: np.ndarray,
    kind: str,
    max_passes: int,
    restart: int,
    search: int,
    trace: list[TraceEntry],
) -> tuple[tuple, bool]:
    """Best-improvement local search; mutates perm/signs in place.

    One pass evaluates every single-column fold and every column swap and
    applies the strictly best improving move, first-in-scan-order on ties.
    Stops at the first pass with no improvement, or flags hitting the bound.
    """
    m = evaluator.m
    key = evaluator.key(perm, signs, kind)
    for _ in range(max_passes):
        best_key, best_move = key, None
        for j in range(m):
            signs[j] = -signs[j]
            candidate = evaluator.key(perm, signs, kind)
            signs[j] = -signs[j]
            if candidate < best_key:
                best_key, best_move = candidate, ("fold", j)
        for j in range(m):
            for k in range(j + 1, m):
                _swap(perm, signs, j, k)
                candidate = evaluator.key(perm, signs, kind)
                _swap(perm, signs, j, k)
                if candidate < best_key:
                    best_key, best_move = candidate, ("swap", j, k)
        if best_move is None:
            return key, False
        if best_move[0] == "fold":
            signs[best_move[1]] = -signs[best_move[1]]
            move = f"fold({best_move[1]})"
        else:
            _swap(perm, signs, best_move[1], best_move[2])
            move = f"swap({best_move[1]},{best_move[2]})"
        key = best_key
        entry = TraceEntry(restart, search, move, _display(evaluator, key, kind))
        trace.append(entry)
        logger.info("restart=%d search=%d move=%s objective=%s", restart, search, move, entry.objective)
    return key, True


def _swap(perm: np.ndarray, signs: np.ndarray, j: int, k: int) -> None:
    perm[j], perm[k] = perm[k], perm[j]
    signs[j], signs[k] = signs[k], signs[j]


def _shake(perm: np.ndarray, signs: np.ndarray, k: int, rng: np.random.Generator) -> None:
    """Neighborhood moves, increasingly diverse: folds, then position changes."""
    m = len(perm)
    if k == 1:
        signs[rng.integers(m)] *= -1
    elif k == 2:
        for j in rng.choice(m, 2, replace=False):
            signs[j] *= -1
    elif k == 3:
        a, b = rng.choice(m, 2, replace=False)
        _swap(perm, signs, a, b)
    elif k == 4:
        a, b, c = rng.choice(m, 3, replace=False)
        perm[[a, b, c]] = perm[[b, c, a]]
        signs[[a, b, c]] = signs[[b, c, a]]
    else:
        raise ValidationError(f"shake neighborhood k must be in 1..4, got {k}")


def vns_shake(s: LowerState, k: int, rng: np.random.Generator) -> LowerState:
    """One shaking move on a lower state: k=1/2 fold one or two random columns,
    k=3 transpose two random positions, k=4 three-cycle three random positions."""
    perm = np.array(s.perm, dtype=np.intp)
    signs = np.array(s.signs, dtype=np.int64)
    _shake(perm, signs, k, rng)
    return LowerState(perm=tuple(int(v) for v in perm), signs=tuple(int(v) for v in signs))


def evaluate_objective(
    d1: ScreeningDesign, d2: ScreeningDesign, s: LowerState, n0: int, kind: str = "ssq"
) -> Objective:
    """Objective of the concatenation under state s; independent of n0."""
    if n0 < 0:
        raise ValidationError(f"center-run count must be >= 0, got {n0}")
    if s.m != d1.m:
        raise DimensionMismatch(f"state has {s.m} columns, design has {d1.m}")
    evaluator = _GramEvaluator(d1, d2)
    perm = np.array(s.perm, dtype=np.intp)
    signs = np.array(s.signs, dtype=np.int64)
    return evaluator.objective(evaluator.key(perm, signs, kind), kind)


def cc_search(
    d1: ScreeningDesign, d2: ScreeningDesign, s0: LowerState, kind: str = "ssq",
    max_passes: int = 500,
) -> LowerState:
    """Run the CC local search from s0 and return the locally optimal state."""
    evaluator = _GramEvaluator(d1, d2)
    perm = np.array(s0.perm, dtype=np.intp)
    signs = np.array(s0.signs, dtype=np.int64)
    _cc(evaluator, perm, signs, kind, max_passes, restart=0, search=0, trace=[])
    return LowerState(perm=tuple(int(v) for v in perm), signs=tuple(int(v) for v in signs))


def _run_restart(
    evaluator: _GramEvaluator, restart: int, seed: int, kind: str, max_passes: int
) -> tuple[tuple, int, np.ndarray, np.ndarray, bool, list[TraceEntry]]:
    rng = np.random.default_rng((seed ^ restart) & _SEED_MASK)
    m = evaluator.m
    perm = rng.permutation(m).astype(np.intp)
    signs = (rng.integers(0, 2, size=m) * 2 - 1).astype(np.int64)
    trace: list[TraceEntry] = []
    bound_hit = False

    search = 0
    key, hit = _cc(evaluator, perm, signs, kind, max_passes, restart, search, trace)
    bound_hit |= hit
    k = 1
    while k <= 4:
        cand_perm, cand_signs = perm.copy(), signs.copy()
        _shake(cand_perm, cand_signs, k, rng)
        search += 1
        cand_key, hit = _cc(evaluator, cand_perm, cand_signs, kind, max_passes, restart, search, trace)
        bound_hit |= hit
        if cand_key < key:
            perm, signs, key = cand_perm, cand_signs, cand_key
            entry = TraceEntry(restart, search, f"shake(k={k})", _display(evaluator, key, kind))
            trace.append(entry)
            logger.info(
                "restart=%d search=%d move=%s objective=%s", restart, search, entry.move, entry.objective
            )
            k = 1
        else:
            k += 1
    return key, restart, perm, signs, bound_hit, trace


def _worker_count(config: SearchConfig) -> int:
    if config.workers is not None:
        return max(1, config.workers)
    env = os.environ.get("COMARS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def optimize(
    d1: ScreeningDesign, d2: ScreeningDesign, n0: int, config: SearchConfig
) -> OptimizeResult:
    """Multi-restart CC/VNS; deterministic for a fixed config.

    Restart r draws its starting state from a generator seeded with
    seed XOR r, so runs are reproducible regardless of how the restarts are
    scheduled; ties between restarts go to the lowest restart index.
    """
    evaluator = _GramEvaluator(d1, d2)
    jobs = list(range(config.restarts))
    workers = _worker_count(config)

    def run(r: int):
        return _run_restart(evaluator, r, config.seed, config.objective, config.max_cc_passes)

    if workers == 1 or config.restarts == 1:
        results = [run(r) for r in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))

    best = min(results, key=lambda item: (item[0], item[1]))
    key, _, perm, signs, _, _ = best
    bound_hit = any(item[4] for item in results)
    trace = tuple(entry for item in results for entry in item[5])
    state = LowerState(perm=tuple(int(v) for v in perm), signs=tuple(int(v) for v in signs))
    design = concatenate(d1, d2, state, n0)
    objective = evaluator.objective(key, config.objective)
    _verify_against_metrics(evaluator, design, key, config.objective)
    return OptimizeResult(
        design=design, objective=objective, state=state, cc_bound_hit=bound_hit, trace=trace
    )


def _verify_against_metrics(
    evaluator: _GramEvaluator, design: ComarsDesign, key: tuple, kind: str
) -> None:
    """Cross-check the integer objective route against the Pearson diagnostics."""
    if kind == "ssq":
        pearson_ssq = metrics.ssq_2fi(design.entries)
        fast_ssq = key[0] / evaluator.denominator**2
        if abs(pearson_ssq - fast_ssq) > 1e-9:
            raise UnexpectedCorrelationValue(
                f"objective mismatch: gram route {fast_ssq}, pearson route {pearson_ssq}"
            )
    else:
        freq = metrics.f_vector(design.entries, evaluator.n)
        observed = tuple(freq[value] for value in evaluator.grid)
        if observed != key:
            raise UnexpectedCorrelationValue(
                f"frequency mismatch: gram route {key}, pearson route {observed}"
            )


def optimize_pairings(
    parents: list[ScreeningDesign], n0: int, config: SearchConfig
) -> OptimizeResult:
    """Best concatenation over the parent pairings.

    One parent: (D, D).  Two parents: (D1, D1), (D2, D2), and (D1, D2); the
    best of the three is returned, ties going to the earlier pairing.
    """
    if not 1 <= len(parents) <= 2:
        raise ValidationError(f"need one or two parents, got {len(parents)}")
    if len(parents) == 2 and parents[0].entries.shape != parents[1].entries.shape:
        raise DimensionMismatch(
            f"parents differ in shape: {parents[0].entries.shape} vs {parents[1].entries.shape}"
        )
    if len(parents) == 1:
        pairings = [(0, 0)]
    else:
        pairings = [(0, 0), (1, 1), (0, 1)]
    best: OptimizeResult | None = None
    for a, b in pairings:
        result = optimize(parents[a], parents[b], n0, config)
        if best is None or result.objective < best.objective:
            best = OptimizeResult(
                design=result.design,
                objective=result.objective,
                state=result.state,
                pairing=(a, b),
                cc_bound_hit=result.cc_bound_hit,
                trace=result.trace,
            )
    return best
