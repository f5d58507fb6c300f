"""Coefficient tensors of multi-speed wave systems and exact structure checks.

A system of D coupled wave equations

    (d_t^2 - c_I^2 Lap) u^I = C^{IJK}_{abc} d_c u^J d_a d_b u^K
                            + B^{IJK}_{ab} d_a u^J d_b u^K

is described by its speeds c_I and the sparse rational tensors C and B
(indices I,J,K in 1..D, space-time indices a,b,c in 0..3).  The symmetry of
the quasilinear block and the angular vanishing required of same-speed
interactions are algebraic identities, so everything here runs in exact
rational arithmetic; floats are converted via their exact binary expansion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

from .sphere import Poly, SphereDecision, poly_add_term, poly_str, vanishes_on_sphere

CKey = tuple[int, int, int, int, int, int]   # (I, J, K, a, b, c)
BKey = tuple[int, int, int, int, int]        # (I, J, K, a, b)


def as_fraction(x) -> Fraction:
    """Exact conversion; floats go through their binary expansion."""
    if isinstance(x, (Rational, int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _check_spacetime(idx: int, name: str) -> None:
    if not 0 <= idx <= 3:
        raise ValueError(f"index {name}={idx} outside 0..3")


@dataclass(frozen=True)
class WaveSystem:
    """Speeds plus sparse quasilinear (C) and semilinear (B) tensors."""

    speeds: tuple[Fraction, ...]
    C: dict[CKey, Fraction] = field(default_factory=dict)
    B: dict[BKey, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if not self.speeds:
            raise ValueError("need at least one wave family")
        speeds = tuple(as_fraction(c) for c in self.speeds)
        if any(c <= 0 for c in speeds):
            raise ValueError(f"speeds must be strictly positive, got {speeds}")
        object.__setattr__(self, "speeds", speeds)
        D = len(speeds)
        C = {}
        for key, val in self.C.items():
            I, J, K, a, b, c = key
            for fam in (I, J, K):
                if not 1 <= fam <= D:
                    raise ValueError(f"family index {fam} outside 1..{D} in C{key}")
            for idx, nm in ((a, "a"), (b, "b"), (c, "c")):
                _check_spacetime(idx, nm)
            v = as_fraction(val)
            if v != 0:
                C[key] = v
        B = {}
        for key, val in self.B.items():
            I, J, K, a, b = key
            for fam in (I, J, K):
                if not 1 <= fam <= D:
                    raise ValueError(f"family index {fam} outside 1..{D} in B{key}")
            for idx, nm in ((a, "a"), (b, "b")):
                _check_spacetime(idx, nm)
            v = as_fraction(val)
            if v != 0:
                B[key] = v
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "B", B)

    @property
    def D(self) -> int:
        return len(self.speeds)

    def cubic_form(self, I: int, J: int, K: int) -> dict[tuple[int, int, int], Fraction]:
        """Coefficients (a,b,c) -> C^{IJK}_{abc} of the cubic symbol for fixed families."""
        return {(a, b, c): v for (i, j, k, a, b, c), v in self.C.items()
                if (i, j, k) == (I, J, K)}

    def quadratic_form(self, I: int, J: int, K: int) -> dict[tuple[int, int], Fraction]:
        return {(a, b): v for (i, j, k, a, b), v in self.B.items()
                if (i, j, k) == (I, J, K)}


@dataclass(frozen=True)
class SpeedClasses:
    """Partition of family indices by exact speed equality."""

    partition: tuple[tuple[int, ...], ...]
    class_speed: tuple[Fraction, ...]


def speed_classes(sys: WaveSystem) -> SpeedClasses:
    """Group families sharing a propagation speed (exact rational comparison)."""
    classes: list[list[int]] = []
    reps: list[Fraction] = []
    for I, c in enumerate(sys.speeds, start=1):
        for cls, rep in zip(classes, reps):
            if c == rep:
                cls.append(I)
                break
        else:
            classes.append([I])
            reps.append(c)
    return SpeedClasses(tuple(tuple(cls) for cls in classes), tuple(reps))


def check_symmetry(sys: WaveSystem) -> tuple[bool, list[CKey]]:
    """Check C^{IJK}_{abc} = C^{IJK}_{bac} = C^{KJI}_{abc}; list every violating key."""
    bad = []
    D = sys.D
    for I in range(1, D + 1):
        for J in range(1, D + 1):
            for K in range(1, D + 1):
                for a in range(4):
                    for b in range(4):
                        for c in range(4):
                            v = sys.C.get((I, J, K, a, b, c), Fraction(0))
                            if v != sys.C.get((I, J, K, b, a, c), Fraction(0)) \
                                    or v != sys.C.get((K, J, I, a, b, c), Fraction(0)):
                                bad.append((I, J, K, a, b, c))
    return not bad, bad


def symmetrize(sys: WaveSystem) -> WaveSystem:
    """Average C over its symmetry orbit {abc<->bac, I<->K}; B unchanged."""
    newC: dict[CKey, Fraction] = {}
    keys = set(sys.C)
    for I, J, K, a, b, c in list(keys):
        keys.update({(I, J, K, b, a, c), (K, J, I, a, b, c), (K, J, I, b, a, c)})
    for I, J, K, a, b, c in keys:
        orbit = [(I, J, K, a, b, c), (I, J, K, b, a, c),
                 (K, J, I, a, b, c), (K, J, I, b, a, c)]
        avg = sum((sys.C.get(k, Fraction(0)) for k in orbit), Fraction(0)) / 4
        if avg != 0:
            newC[(I, J, K, a, b, c)] = avg
    return WaveSystem(sys.speeds, newC, dict(sys.B))


def restrict_to_cone(form: dict, speed, sign: int) -> Poly:
    """Substitute xi = (sign*speed, w) into a quadratic or cubic symbol.

    ``form`` maps space-time index tuples (a,b) or (a,b,c) to rational
    coefficients; the result is a polynomial in the angular variables w.
    """
    c = as_fraction(speed)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    xi0 = sign * c
    out: Poly = {}
    for key, coeff in form.items():
        coeff = as_fraction(coeff)
        mono = [0, 0, 0]
        for idx in key:
            if idx == 0:
                coeff *= xi0
            else:
                mono[idx - 1] += 1
        if coeff != 0:
            poly_add_term(out, tuple(mono), coeff)
    return out


@dataclass(frozen=True)
class ConeWitness:
    """A cone direction where a same-speed interaction form fails to vanish."""

    tensor: str                       # "C" or "B"
    families: tuple[int, int, int]    # (I, J, K)
    sign: int
    speed: Fraction
    omega: tuple[Fraction, Fraction, Fraction]
    residual: Fraction

    @property
    def xi(self) -> tuple[Fraction, ...]:
        return (self.sign * self.speed,) + self.omega


@dataclass(frozen=True)
class ConeCertificate:
    """Quotient q with (restricted form) = q * (|w|^2 - 1) for a satisfied case."""

    tensor: str
    families: tuple[int, int, int]
    sign: int
    speed: Fraction
    quotient: Poly


@dataclass(frozen=True)
class NullReport:
    symmetric: bool
    null_quasilinear: bool
    null_semilinear: bool
    symmetry_violations: tuple[CKey, ...]
    witnesses: tuple[ConeWitness, ...]
    certificates: tuple[ConeCertificate, ...]

    @property
    def satisfied(self) -> bool:
        return self.symmetric and self.null_quasilinear and self.null_semilinear


def check_null_condition(sys: WaveSystem) -> NullReport:
    """Decide the symmetry and same-speed angular vanishing conditions exactly.

    For every speed class, every (J, K) inside the class, every I, and both
    cone sheets xi_0 = +/- c, the cubic C^{IJK} and quadratic B^{IJK} symbols
    restricted to the cone must vanish on the unit sphere.  Pairs (J, K)
    straddling two classes are exempt.
    """
    sym_ok, sym_bad = check_symmetry(sys)
    witnesses: list[ConeWitness] = []
    certificates: list[ConeCertificate] = []
    null_quas = True
    null_semi = True
    classes = speed_classes(sys)
    for cls, c in zip(classes.partition, classes.class_speed):
        for J in cls:
            for K in cls:
                for I in range(1, sys.D + 1):
                    for tensor, form in (("C", sys.cubic_form(I, J, K)),
                                         ("B", sys.quadratic_form(I, J, K))):
                        if not form:
                            continue
                        for sign in (1, -1):
                            p = restrict_to_cone(form, c, sign)
                            decision = vanishes_on_sphere(p)
                            if decision.vanishes:
                                certificates.append(ConeCertificate(
                                    tensor, (I, J, K), sign, c, decision.quotient))
                            else:
                                witnesses.append(ConeWitness(
                                    tensor, (I, J, K), sign, c,
                                    decision.witness, decision.residual))
                                if tensor == "C":
                                    null_quas = False
                                else:
                                    null_semi = False
    return NullReport(sym_ok, null_quas, null_semi,
                      tuple(sym_bad), tuple(witnesses), tuple(certificates))


# ---------------------------------------------------------------------------
# JSON serialization (sparse records, rationals as strings)

def system_to_json(sys: WaveSystem) -> dict:
    return {
        "D": sys.D,
        "speeds": [str(c) for c in sys.speeds],
        "C": [{"I": I, "J": J, "K": K, "a": a, "b": b, "c": c, "value": str(v)}
              for (I, J, K, a, b, c), v in sorted(sys.C.items())],
        "B": [{"I": I, "J": J, "K": K, "a": a, "b": b, "value": str(v)}
              for (I, J, K, a, b), v in sorted(sys.B.items())],
    }


def system_from_json(doc: dict) -> WaveSystem:
    try:
        D = int(doc["D"])
        speeds = tuple(Fraction(s) for s in doc["speeds"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ValueError(f"malformed system document: {exc}") from exc
    if len(speeds) != D:
        raise ValueError(f"D={D} but {len(speeds)} speeds given")
    C = {}
    for rec in doc.get("C", []):
        try:
            key = (int(rec["I"]), int(rec["J"]), int(rec["K"]),
                   int(rec["a"]), int(rec["b"]), int(rec["c"]))
            C[key] = Fraction(rec["value"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"malformed C record {rec}: {exc}") from exc
    B = {}
    for rec in doc.get("B", []):
        try:
            key = (int(rec["I"]), int(rec["J"]), int(rec["K"]),
                   int(rec["a"]), int(rec["b"]))
            B[key] = Fraction(rec["value"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"malformed B record {rec}: {exc}") from exc
    return WaveSystem(speeds, C, B)


def load_system(path) -> WaveSystem:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON at line {exc.lineno}, "
                             f"column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a JSON object at top level")
    return system_from_json(doc)


def save_system(sys: WaveSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_json(sys), fh, indent=2)
        fh.write("\n")


def report_to_json(report: NullReport) -> dict:
    return {
        "symmetric": report.symmetric,
        "null_quasilinear": report.null_quasilinear,
        "null_semilinear": report.null_semilinear,
        "symmetry_violations": [list(k) for k in report.symmetry_violations],
        "witnesses": [
            {"tensor": w.tensor, "I": w.families[0], "J": w.families[1],
             "K": w.families[2], "sign": w.sign, "speed": str(w.speed),
             "xi": [str(x) for x in w.xi], "residual": str(w.residual)}
            for w in report.witnesses
        ],
        "certificates": [
            {"tensor": c.tensor, "I": c.families[0], "J": c.families[1],
             "K": c.families[2], "sign": c.sign, "speed": str(c.speed),
             "quotient": poly_str(c.quotient)}
            for c in report.certificates
        ],
    }


# ---------------------------------------------------------------------------
# Classical coefficient builders used throughout the test scenarios

def q0_semilinear(c=1, D: int = 1, I: int = 1, J: int = 1, K: int = 1) -> dict[BKey, Fraction]:
    """B realizing Q0(u,v) = c^-2 d_t u d_t v - grad u . grad v at speed c."""
    c = as_fraction(c)
    B = {(I, J, K, 0, 0): 1 / (c * c)}
    for j in (1, 2, 3):
        B[(I, J, K, j, j)] = Fraction(-1)
    return B


def q0_system(c=1) -> WaveSystem:
    """Scalar equation whose semilinear part is the classical null form Q0."""
    c = as_fraction(c)
    return WaveSystem((c,), {}, q0_semilinear(c))


def john_system(c=1) -> WaveSystem:
    """Scalar equation box u = (d_t u)^2: the classical finite-time blowup model."""
    return WaveSystem((as_fraction(c),), {}, {(1, 1, 1, 0, 0): Fraction(1)})


def rotational_semilinear(a: int = 0, b: int = 1) -> dict[BKey, Fraction]:
    """Antisymmetric null form Q_{ab}(u,v) = d_a u d_b v - d_b u d_a v."""
    return {(1, 1, 1, a, b): Fraction(1), (1, 1, 1, b, a): Fraction(-1)}


def quasilinear_null_system(c=1) -> WaveSystem:
    """Scalar quasilinear system d_t u * d_t^2 u - grad u . grad d_t u (null cubic).

    The cubic symbol is xi_0 * (xi_0^2 - |xi|^2) for unit speed; coefficients
    are symmetric in (a, b) so the metric-perturbation symmetry holds.
    """
    c = as_fraction(c)
    C = {(1, 1, 1, 0, 0, 0): 1 / (c * c)}
    for j in (1, 2, 3):
        C[(1, 1, 1, 0, j, j)] = Fraction(-1, 2)
        C[(1, 1, 1, j, 0, j)] = Fraction(-1, 2)
    return WaveSystem((c,), C, {})
