"""Exact decision kernel: does a low-degree polynomial vanish on the unit sphere?

Polynomials in the angular variables (w1, w2, w3) are stored sparsely as
``{(i, j, k): Fraction}`` exponent-to-coefficient maps.  Membership in the
sphere ideal is decided by exact reduction: every power w3^k with k >= 2 is
rewritten via w3^2 = 1 - w1^2 - w2^2, which expresses the input as
``p = q * (w1^2 + w2^2 + w3^2 - 1) + r`` with the remainder r of w3-degree
at most one.  For total degree <= 3 the quotient q has degree <= 1, and
p vanishes identically on |w| = 1 iff r == 0.

When r != 0 a witness direction is produced by evaluating on a fixed set of
rational unit vectors (all arithmetic stays in Fraction, so reported
residuals are exact).  The set is unisolvent for the reduced monomial basis
of degree <= 3, hence a nonzero remainder is guaranteed to show up on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

Monomial = tuple[int, int, int]
Poly = dict[Monomial, Fraction]

MAX_DEGREE = 3


def poly_clean(p: Poly) -> Poly:
    """Drop exact-zero coefficients."""
    return {m: c for m, c in p.items() if c != 0}


def poly_add_term(p: Poly, m: Monomial, c: Fraction) -> None:
    new = p.get(m, Fraction(0)) + c
    if new == 0:
        p.pop(m, None)
    else:
        p[m] = new


def poly_degree(p: Poly) -> int:
    return max((sum(m) for m in p), default=0)


def poly_eval(p: Poly, omega) -> Fraction:
    """Evaluate at a rational point; exact."""
    w1, w2, w3 = (Fraction(w) for w in omega)
    total = Fraction(0)
    for (i, j, k), c in p.items():
        total += c * w1**i * w2**j * w3**k
    return total


def poly_str(p: Poly) -> str:
    """Canonical human-readable form, e.g. ``1 - w1^2 - w2^2 - w3^2``."""
    if not p:
        return "0"
    parts = []
    for m in sorted(p, key=lambda m: (sum(m), m)):
        c = p[m]
        names = "".join(
            f"*w{d+1}" + (f"^{e}" if e > 1 else "")
            for d, e in enumerate(m) if e > 0
        )
        parts.append(f"{c}{names}")
    return " + ".join(parts)


def reduce_sphere(p: Poly) -> tuple[Poly, Poly]:
    """Return (q, r) with p = q * (w1^2 + w2^2 + w3^2 - 1) + r, deg_w3(r) <= 1."""
    quotient: Poly = {}
    remainder: Poly = {}
    work = dict(poly_clean(p))
    while work:
        (i, j, k), c = work.popitem()
        if k < 2:
            poly_add_term(remainder, (i, j, k), c)
            continue
        # w3^k = w3^(k-2) * (g + 1 - w1^2 - w2^2), g the sphere generator
        poly_add_term(quotient, (i, j, k - 2), c)
        for m2, c2 in (((i, j, k - 2), c),
                       ((i + 2, j, k - 2), -c),
                       ((i, j + 2, k - 2), -c)):
            cur = work.get(m2, Fraction(0)) + c2
            if cur == 0:
                work.pop(m2, None)
            else:
                work[m2] = cur
    return quotient, remainder


def _stereographic(s: Fraction, t: Fraction) -> tuple[Fraction, Fraction, Fraction]:
    d = 1 + s * s + t * t
    return (2 * s / d, 2 * t / d, (1 - s * s - t * t) / d)


def _witness_directions() -> list[tuple[Fraction, Fraction, Fraction]]:
    one = Fraction(1)
    dirs = [
        (one, Fraction(0), Fraction(0)), (-one, Fraction(0), Fraction(0)),
        (Fraction(0), one, Fraction(0)), (Fraction(0), -one, Fraction(0)),
        (Fraction(0), Fraction(0), one), (Fraction(0), Fraction(0), -one),
    ]
    params = [
        (1, 0), (0, 1), (1, 1), (-1, 1), (2, 1), (1, 2), (-2, 1), (1, -2),
        (3, 1), (1, 3), (3, 2), (2, 3), (-3, 2), (Fraction(1, 2), 0),
        (0, Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 3)),
        (Fraction(2, 3), Fraction(1, 5)), (Fraction(1, 4), 1),
        (1, Fraction(1, 4)), (4, 1), (1, 4), (5, 2), (Fraction(3, 5), Fraction(4, 5)),
        (2, 2), (-1, -2), (Fraction(1, 7), Fraction(2, 7)),
    ]
    for s, t in params:
        d = _stereographic(Fraction(s), Fraction(t))
        if d not in dirs:
            dirs.append(d)
    return dirs


#: Fixed deterministic rational unit directions used for witness search.
#: Every entry satisfies w1^2 + w2^2 + w3^2 == 1 exactly.
WITNESS_DIRECTIONS = _witness_directions()


@dataclass(frozen=True)
class SphereDecision:
    """Outcome of the vanishing test: a quotient certificate or a witness."""
    vanishes: bool
    quotient: Poly | None       # set when vanishes
    witness: tuple | None       # unit direction with p(witness) != 0
    residual: Fraction | None   # p evaluated at the witness


def vanishes_on_sphere(p: Poly) -> SphereDecision:
    """Decide whether p == 0 on {|w| = 1}; p must have total degree <= 3."""
    p = poly_clean(p)
    if poly_degree(p) > MAX_DEGREE:
        raise ValueError(f"polynomial degree {poly_degree(p)} exceeds {MAX_DEGREE}")
    quotient, remainder = reduce_sphere(p)
    if not remainder:
        return SphereDecision(True, quotient, None, None)
    for omega in WITNESS_DIRECTIONS:
        val = poly_eval(p, omega)
        if val != 0:
            return SphereDecision(False, None, omega, val)
    # Unreachable for a unisolvent direction set (checked in the test suite).
    raise AssertionError("nonzero sphere remainder evaluated to zero on all probe directions")


def reduced_basis_monomials(max_degree: int = MAX_DEGREE) -> list[Monomial]:
    """Monomial basis of the quotient space: total degree <= max_degree, w3-degree <= 1."""
    out = []
    for i in range(max_degree + 1):
        for j in range(max_degree + 1 - i):
            for k in (0, 1):
                if i + j + k <= max_degree:
                    out.append((i, j, k))
    return sorted(out)
