"""Exactness tests for the sphere-ideal reduction kernel."""

import random
from fractions import Fraction

import pytest

from nullwave.sphere import (
    WITNESS_DIRECTIONS,
    poly_eval,
    reduce_sphere,
    reduced_basis_monomials,
    vanishes_on_sphere,
)

SPHERE = {(2, 0, 0): Fraction(1), (0, 2, 0): Fraction(1),
          (0, 0, 2): Fraction(1), (0, 0, 0): Fraction(-1)}


def poly_mul(p, q):
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = tuple(a + b for a, b in zip(m1, m2))
            out[m] = out.get(m, Fraction(0)) + c1 * c2
    return {m: c for m, c in out.items() if c != 0}


def test_defining_polynomial_vanishes():
    p = {(0, 0, 0): Fraction(1), (2, 0, 0): Fraction(-1),
         (0, 2, 0): Fraction(-1), (0, 0, 2): Fraction(-1)}
    d = vanishes_on_sphere(p)
    assert d.vanishes
    assert d.quotient == {(0, 0, 0): Fraction(-1)}


def test_nonzero_constant_has_witness():
    d = vanishes_on_sphere({(0, 0, 0): Fraction(9, 4)})
    assert not d.vanishes
    assert d.residual == Fraction(9, 4)
    assert sum(w * w for w in d.witness) == 1


def test_multiple_of_sphere_polynomial():
    # w1 * (1 - |w|^2)  ->  quotient -w1
    p = poly_mul({(1, 0, 0): Fraction(-1)}, SPHERE)
    d = vanishes_on_sphere(p)
    assert d.vanishes
    assert d.quotient == {(1, 0, 0): Fraction(-1)}


def test_degree_cap():
    with pytest.raises(ValueError):
        vanishes_on_sphere({(4, 0, 0): Fraction(1)})


def test_reduction_is_exact_division():
    rng = random.Random(7)
    for _ in range(50):
        p = {(i, j, k): Fraction(rng.randint(-5, 5), rng.randint(1, 4))
             for i in range(4) for j in range(4) for k in range(4)
             if i + j + k <= 3}
        q, r = reduce_sphere(p)
        recombined = poly_mul(q, SPHERE)
        for m, c in r.items():
            recombined[m] = recombined.get(m, Fraction(0)) + c
        recombined = {m: c for m, c in recombined.items() if c != 0}
        assert recombined == {m: c for m, c in p.items() if c != 0}
        assert all(m[2] <= 1 for m in r)


def test_witness_directions_are_exactly_unit():
    assert len(WITNESS_DIRECTIONS) >= 25
    for w in WITNESS_DIRECTIONS:
        assert sum(x * x for x in w) == Fraction(1)
    assert len(set(WITNESS_DIRECTIONS)) == len(WITNESS_DIRECTIONS)


def _exact_rank(rows):
    rows = [list(r) for r in rows]
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pr = rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col] / pr[col]
                rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
        rank += 1
    return rank


def test_witness_set_unisolvent_for_reduced_basis():
    """A nonzero reduced remainder cannot vanish on all probe directions."""
    basis = reduced_basis_monomials()
    assert len(basis) == 16
    rows = []
    for w in WITNESS_DIRECTIONS:
        w1, w2, w3 = w
        rows.append([w1**i * w2**j * w3**k for (i, j, k) in basis])
    assert _exact_rank(rows) == len(basis)


def random_unit_direction(rng):
    s = Fraction(rng.randint(-50, 50), rng.randint(1, 25))
    t = Fraction(rng.randint(-50, 50), rng.randint(1, 25))
    d = 1 + s * s + t * t
    return (2 * s / d, 2 * t / d, (1 - s * s - t * t) / d)


def test_vanishing_certified_on_random_unit_vectors():
    """Sampling cross-check: certified-vanishing polynomials are 0 at 10^4
    exact rational unit vectors."""
    rng = random.Random(20260810)
    linear = {(0, 0, 0): Fraction(3, 7), (1, 0, 0): Fraction(-2),
              (0, 1, 0): Fraction(1, 3), (0, 0, 1): Fraction(5)}
    p = poly_mul(linear, SPHERE)
    d = vanishes_on_sphere(p)
    assert d.vanishes
    for _ in range(10_000):
        omega = random_unit_direction(rng)
        assert poly_eval(p, omega) == 0
