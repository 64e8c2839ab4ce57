import math
from fractions import Fraction

import numpy as np
import pytest

from comars import analytic, designs, metrics
from comars.errors import ValidationError

SUPPORTED_N = (6, 8, 10, 12, 14, 16, 18, 20, 24)


def test_qq_comars_values():
    assert analytic.qq_corr_comars(8, 1) == pytest.approx(2 / 35, abs=1e-15)
    assert analytic.qq_corr_comars(10, 1) == pytest.approx(4 / 45, abs=1e-15)
    assert analytic.qq_corr_comars(12, 1) == pytest.approx(6 / 55, abs=1e-15)
    assert round(analytic.qq_corr_comars(10, 1), 3) == 0.089
    assert round(analytic.qq_corr_comars(12, 1), 3) == 0.109


def test_qq_dsd_values():
    assert analytic.qq_corr_dsd(20, 1) == pytest.approx(16 / 57, abs=1e-15)
    assert analytic.qq_corr_dsd(24, 1) == pytest.approx(20 / 69, abs=1e-15)
    # (0*(8-2) - 2) / ((8-1)*(0+2)); the empirical cross-check below pins the value
    assert analytic.qq_corr_dsd(8, 0) == pytest.approx(-1 / 7, abs=1e-15)


def test_qq_dsd_empirical_sign():
    # a 16-run DSD body without center runs has a negative quadratic pairing
    body = designs.foldover(designs.paley_conference(7).drop_columns(7))
    q = body.entries * body.entries
    observed = metrics.pearson(q[:, 0], q[:, 1])
    assert observed == pytest.approx(analytic.qq_corr_dsd(8, 0), abs=1e-12)


def test_qq_comars_monotone_convergence():
    for n0 in (0, 1, 2, 4):
        limit = analytic.qq_corr_comars_limit(n0)
        values = [analytic.qq_corr_comars(n, n0) for n in (8, 12, 16, 20, 24)]
        assert values == sorted(values)
        assert all(v < limit for v in values)
        deltas = [limit - v for v in values]
        assert deltas == sorted(deltas, reverse=True)


def test_q2fi_values():
    assert analytic.q2fi_corr_comars(8, 2) == pytest.approx(math.sqrt(34 / 252), abs=1e-15)
    # (4*8+1) / ((1+4)*(8-1)*(8-2)) = 33/210; confirmed against Pearson on a
    # 33-run design in test_metrics
    assert analytic.q2fi_corr_comars(8, 1) == pytest.approx(math.sqrt(33 / 210), abs=1e-15)
    assert round(analytic.q2fi_corr_comars(8, 2), 3) == 0.367


def test_q2fi_decreases_with_n():
    for n0 in (0, 1, 4):
        values = [analytic.q2fi_corr_comars(n, n0) for n in (8, 10, 12, 14, 20, 24)]
        assert values == sorted(values, reverse=True)


def test_tfi_shared_values():
    assert analytic.tfi_shared_corr(8) == pytest.approx(1 / 6, abs=1e-15)
    assert analytic.tfi_shared_corr(12) == pytest.approx(0.1, abs=1e-15)
    assert analytic.tfi_shared_corr(20) == pytest.approx(1 / 18, abs=1e-15)


def test_j4_value_sets():
    assert analytic.j4_value_set(8) == frozenset({16, 8, 0})
    assert analytic.j4_value_set(10) == frozenset({0, 8, 16, 24})
    assert analytic.j4_value_set(12) == frozenset({32, 24, 16, 8, 0})
    assert analytic.j4_value_set(6) == frozenset({0, 8})


def test_tfi_disjoint_sets():
    assert analytic.tfi_disjoint_value_set(8) == (0.0, 1 / 3, 2 / 3)
    assert analytic.tfi_disjoint_value_set(12) == (0.0, 0.2, 0.4, 0.6, 0.8)


def test_disjoint_set_consistent_with_j4():
    for n in SUPPORTED_N:
        from_j4 = sorted(
            float(Fraction(v, 4 * n - 8)) for v in analytic.j4_value_set(n)
        )
        assert tuple(from_j4) == analytic.tfi_disjoint_value_set(n)


def test_value_sets_are_duplicate_free_and_bounded():
    for n in SUPPORTED_N:
        disjoint = analytic.tfi_disjoint_value_set(n)
        assert len(set(disjoint)) == len(disjoint)
        assert all(0.0 <= v <= 1.0 for v in disjoint)
        grid = analytic.twofi_value_grid(n)
        assert len(set(grid)) == len(grid)
        assert all(0.0 < v <= 1.0 for v in grid)
        assert 0.0 < analytic.tfi_shared_corr(n) <= 1.0
        if n >= 8:
            assert 0.0 < analytic.q2fi_corr_comars(n, 1) <= 1.0


def test_grid_is_descending_and_contains_shared_value():
    for n in SUPPORTED_N:
        grid = analytic.twofi_value_grid(n)
        assert list(grid) == sorted(grid, reverse=True)
        assert any(abs(v - 1 / (n - 2)) < 1e-12 for v in grid)


def test_gram_grid_matches_value_grid():
    for n in SUPPORTED_N:
        levels = analytic.twofi_gram_grid(n)
        values = analytic.twofi_value_grid(n)
        for level, value in zip(levels, values):
            assert level == pytest.approx(value * (4 * n - 8), abs=1e-9)


def test_rejects_odd_or_small_n():
    with pytest.raises(ValidationError):
        analytic.j4_value_set(7)
    with pytest.raises(ValidationError):
        analytic.qq_corr_comars(4, 1)
    with pytest.raises(ValidationError):
        analytic.q2fi_corr_comars(5, 1)


def test_q2fi_smallest_order():
    # three distinct factors suffice for this pair class, so n = 6 is valid;
    # the value 1/2 at one center run is confirmed empirically in test_metrics
    assert analytic.q2fi_corr_comars(6, 1) == pytest.approx(0.5, abs=1e-15)


def test_proportionality_constant_links_value_families():
    # the quadratic-vs-interaction value over the shared-interaction value
    for n in (8, 10, 12):
        for n0 in (0, 1, 2, 4):
            ratio = analytic.q2fi_corr_comars(n, n0) / analytic.tfi_shared_corr(n)
            expected = math.sqrt((4 * n + n0) * (n - 2) / ((n0 + 4) * (n - 1)))
            assert ratio == pytest.approx(expected, abs=1e-12)
