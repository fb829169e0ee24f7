"""Root numbers by the explicit Gauss sum and by the theta transformation law.

With delta generating the different (normalized so delta/|delta| = i) and
an auxiliary ideal c in the inverse class of the conductor, f(chi) c = (b),

    W(chi) = (-i) f^{-1} (delta/|delta|) (b/|b|) (sqrt(Nc)/chi(c))
             * sum_{w in c/fc} eps(w) e^{2 pi i Tr(w/(delta b))}

where eps is extended by zero off the units.  The sum runs over an
explicit box transversal of the nested HNF lattices; changing b by a
unit or shifting the transversal reindexes the sum without changing W.

The independent route reads W off the theta transformation
theta(1/t) = W t^2 theta(t), which is the functional equation at the
level of theta series.  (The ratio of the two one-sided incomplete-gamma
half-sums of Lambda does not isolate W; the theta quotient does.)
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .characters import (
    HeckeCharacter,
    RingClassCharacter,
    evaluate_char,
    ring_class_character,
    twist,
)
from .errors import DegenerateQuotient, NumericalInstability
from .lseries import theta_coeffs
from .quadfield import (
    FieldContext,
    Ideal,
    KElt,
    canonical_generator,
    enumerate_ideals,
    ideal_class_of,
)


def different_gen(field: FieldContext) -> KElt:
    """Generator delta of the different, already satisfying delta/|delta| = i.

    sqrt(D) embeds as i sqrt(|D|), so no unit adjustment is ever needed;
    N(delta) = |D| and Tr(x/delta) is integral for all x in O.
    """
    return field.sqrt_D


def auxiliary_pair(chi: HeckeCharacter) -> tuple[Ideal, KElt]:
    """Integral c coprime to f(chi) with f(chi) c = (b); minimal norm c first."""
    return _auxiliary_for_ideal(chi.field, chi.conductor)


def _auxiliary_for_ideal(field: FieldContext, f: Ideal) -> tuple[Ideal, KElt]:
    bound = 8
    while bound < 10**7:
        for c in enumerate_ideals(field, bound):
            if not c.is_coprime(f):
                continue
            if any(e for e in ideal_class_of(f * c)):
                continue
            b = canonical_generator(f * c)
            assert b is not None
            return c, b
        bound *= 2
    raise RuntimeError("no auxiliary ideal found below norm 1e7")


def _coset_reps(big: Ideal, sub: Ideal):
    """Box transversal of big/sub for nested HNF lattices (sub inside big)."""
    field = big.field
    if sub.a % big.a or sub.c % big.c:
        raise ValueError("not a nested pair of HNF lattices")
    for s in range(sub.a // big.a):
        for r in range(sub.c // big.c):
            yield KElt(field, s * big.a + r * big.b, r * big.c)


@dataclass(frozen=True)
class RootNumberResult:
    W_gauss: complex
    W_fe: complex
    delta: KElt
    auxiliary: tuple[Ideal, KElt]


def _gauss_sum(chi: HeckeCharacter, c: Ideal, b: KElt, shift: KElt | None = None) -> complex:
    """sum over w in a transversal of c/fc of eps(w) e^{2 pi i Tr(w/(delta b))}.

    Accumulated in exact cyclotomic arithmetic (phase-count table) when the
    common phase denominator stays below 1e4, else per-term floats.
    """
    field = chi.field
    eps = chi.eps
    fc = chi.conductor * c
    db = different_gen(field) * b
    terms: list[tuple[int, Fraction]] = []
    denom_lcm = 1
    for w in _coset_reps(c, fc):
        if shift is not None:
            w = w + shift
        k = eps.exponent_of(w)
        if k is None:
            continue  # eps extended by zero off the units mod f
        q = w / db
        t = 2 * q.x + field.D * q.y  # Tr(x + y omega) = 2x + D y
        t = Fraction(t)
        terms.append((k, t))
        denom_lcm = math.lcm(denom_lcm, t.denominator)
    M = chi.M
    L = math.lcm(M, denom_lcm)
    if L <= 10**4:
        counts: dict[int, int] = {}
        for k, t in terms:
            j = (int(t * L) + k * (L // M)) % L
            counts[j] = counts.get(j, 0) + 1
        return sum(n * cmath.exp(2j * cmath.pi * j / L) for j, n in sorted(counts.items()))
    return sum(
        cmath.exp(2j * cmath.pi * (float(t) + k / M)) for k, t in terms
    )


def gauss_sum_root_number(chi: HeckeCharacter, shift: KElt | None = None) -> RootNumberResult:
    """W by the explicit formula, packaged with the theta-quotient cross-check."""
    field = chi.field
    c, b = auxiliary_pair(chi)
    delta = different_gen(field)
    s = _gauss_sum(chi, c, b, shift=shift)
    dz = delta.complex()
    bz = b.complex()
    chi_c = evaluate_char(chi, c).complex()
    w = (
        (-1j)
        / chi.f_value
        * (dz / abs(dz))
        * (bz / abs(bz))
        * (math.sqrt(c.norm) / chi_c)
        * s
    )
    if abs(abs(w) - 1.0) > 1e-6:
        raise NumericalInstability(f"|W| = {abs(w)} strayed from 1")
    return RootNumberResult(W_gauss=w, W_fe=root_number_via_fe(chi), delta=delta, auxiliary=(c, b))


def root_number_via_fe(chi: HeckeCharacter) -> complex:
    """W from theta(1/t) = W t^2 theta(t), checked at two independent t."""
    Af = chi.field.A * chi.f_value
    coeffs = sorted(theta_coeffs(chi, int(math.ceil(90.0 * Af)) + 90).items())

    def theta(t: float) -> complex:
        return sum(a * cmath.exp(-n * t / Af) for n, a in coeffs)

    scale = sum(abs(a) * math.exp(-n / (1.7 * Af)) for n, a in coeffs)
    estimates = []
    for t0 in (1.3, 1.6, 1.45, 1.7):
        den = theta(t0)
        if abs(den) < 1e-12 * (1.0 + scale):
            continue  # degenerate quotient at this t0; retry shifted
        estimates.append(theta(1.0 / t0) / (t0 * t0 * den))
        if len(estimates) == 2:
            break
    if len(estimates) < 2:
        raise DegenerateQuotient("theta vanished at every probe point")
    if abs(estimates[0] - estimates[1]) > 1e-6 * max(1.0, abs(estimates[0])):
        raise NumericalInstability(
            f"theta quotients disagree: {estimates[0]} vs {estimates[1]}"
        )
    return (estimates[0] + estimates[1]) / 2


def root_number(chi: HeckeCharacter) -> float:
    """W rounded to a real sign; raises if the value is not a clean +-1."""
    w = gauss_sum_root_number(chi).W_gauss
    sign = round(w.real)
    if abs(w - sign) > 1e-6 or sign not in (-1, 1):
        raise NumericalInstability(f"root number {w} is not a real sign")
    return float(sign)


@dataclass(frozen=True)
class OrbitReport:
    """Root numbers across the Galois orbit of a twist."""

    ws: tuple[tuple[int, complex], ...]
    spread: float
    constant: bool


def conjugation_invariance_check(phi: HeckeCharacter, rho: RingClassCharacter) -> OrbitReport:
    """W(phi rho^m) for all m coprime to the order of rho; expected constant."""
    n = rho.order
    ws = []
    for m in range(1, n):
        if math.gcd(m, n) != 1:
            continue
        rho_m = ring_class_character(rho.field, rho.c, tuple(m * t for t in rho.exponents))
        ws.append((m, gauss_sum_root_number(twist(phi, rho_m)).W_gauss))
    spread = max(abs(w - ws[0][1]) for _, w in ws)
    return OrbitReport(ws=tuple(ws), spread=spread, constant=spread <= 1e-6)
