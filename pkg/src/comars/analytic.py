"""Closed-form aliasing values for concatenated-DSD designs.

All functions below are exact: they evaluate rational expressions in the
parent run size ``n`` and the number of center runs ``n0``.  Rationals are
kept exact internally (``fractions.Fraction``) and converted to float at the
boundary, so two routes to the same rational value produce bit-identical
floats.

Throughout, ``n`` is the run size of the parent conference design, which is
``m`` for an even number of factors ``m`` and ``m + 1`` for an odd one.  A
concatenated design stacks two folded-over parents plus ``n0`` center runs,
giving ``4n + n0`` runs in total.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import ValidationError


def _check_n(n: int, minimum: int = 6) -> None:
    if n % 2 != 0 or n < minimum:
        raise ValidationError(f"parent run size must be even and >= {minimum}, got {n}")


def qq_corr_comars(n: int, n0: int) -> float:
    """Correlation between any two quadratic-effect columns of a concatenated design.

    Holds regardless of how the parents are concatenated; depends on n and n0
    only.  Signed value: it is negative for small n0.
    """
    _check_n(n)
    return float(Fraction(n0 * (n - 2) - 4, (n - 1) * (n0 + 4)))


def qq_corr_dsd(n: int, n0: int) -> float:
    """Quadratic-quadratic correlation of a single DSD (benchmark value)."""
    _check_n(n)
    return float(Fraction(n0 * (n - 2) - 2, (n - 1) * (n0 + 2)))


def qq_corr_comars_limit(n0: int) -> float:
    """Large-m limit of :func:`qq_corr_comars` at fixed n0."""
    return float(Fraction(n0, n0 + 4))


def q2fi_corr_comars(n: int, n0: int) -> float:
    """Nonzero |correlation| between a quadratic column and a disjoint interaction.

    The full value set is {0, this value}; which pairs are nonzero depends on
    the concatenation.  The pair class needs three distinct factors, so the
    formula applies from n = 6 up.
    """
    _check_n(n)
    return math.sqrt(Fraction(4 * n + n0, (n0 + 4) * (n - 1) * (n - 2)))


def tfi_shared_corr(n: int) -> float:
    """Nonzero |correlation| between interaction columns sharing a factor: 1/(n-2)."""
    if n < 4:
        raise ValidationError(f"need n >= 4, got {n}")
    return float(Fraction(1, n - 2))


def j4_value_set(n: int) -> frozenset[int]:
    """Possible J4-characteristics of a concatenated design with parent run size n.

    J4 is the absolute sum of a four-factor interaction column.  The set
    depends only on n mod 4.
    """
    _check_n(n)
    if n % 4 == 0:
        values = {4 * n - 8 * lam for lam in range(2, n // 2 + 1)}
    else:
        values = set()
        for lam in range((n - 6) // 4 + 1):
            values.add(16 * lam)
            values.add(4 * n - 16 * (lam + 1))
    return frozenset(values)


def tfi_disjoint_value_set(n: int) -> tuple[float, ...]:
    """Possible |correlations| between interaction columns on four distinct factors.

    Sorted ascending, zero included.  Each value is a J4 member divided by
    4n - 8, the number of nonzero entries in an interaction column.
    """
    _check_n(n)
    fracs = {Fraction(j4, 4 * n - 8) for j4 in j4_value_set(n)}
    return tuple(sorted(float(f) for f in fracs))


def twofi_value_grid(n: int) -> tuple[float, ...]:
    """All theoretically possible nonzero |correlations| between interaction columns.

    Union of the shared-factor value 1/(n-2) and the nonzero disjoint values,
    sorted descending (the order used by the frequency objective: most severe
    aliasing first).
    """
    _check_n(n)
    values = {Fraction(1, n - 2)}
    values |= {Fraction(j4, 4 * n - 8) for j4 in j4_value_set(n) if j4 != 0}
    return tuple(sorted((float(f) for f in values), reverse=True))


def twofi_gram_grid(n: int) -> tuple[int, ...]:
    """Integer inner-product levels matching :func:`twofi_value_grid`.

    The Gram entry of two interaction columns equals the correlation times
    4n - 8, so these levels are exact integers: 4 for shared pairs and the
    nonzero J4 values for disjoint pairs.
    """
    return tuple(round(v * (4 * n - 8)) for v in twofi_value_grid(n))
