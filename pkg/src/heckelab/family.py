"""Twist families: orbit enumeration, averaged L-values, counting, reports.

A family over a base character phi is indexed by ring class characters rho
with conductor supported in a fixed prime set P.  Twists are grouped into
Galois orbits {rho^m : m in (Z/n)^*}; the orbit average of chi = phi rho at
an ideal is exactly computable through Ramanujan sums:

    mean over m of (phi rho^m)(a) = phi(a) c_n(k) / eulerphi(n),
    where rho(a) = zeta_n^k.

This twist-orbit average is a deliberate stand-in for the full embedding
average over K(chi)/K: it avoids radical-degree computations, is exact,
and averages over the subgroup of embeddings fixing phi's values.

Scan reports are deterministic: records are ordered by (c, exponents),
floats are serialized as repr decimal strings, and no timestamps appear.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .characters import (
    CharValue,
    HeckeCharacter,
    MainLemmaReport,
    RingClassCharacter,
    evaluate_char,
    main_lemma_quantities,
    ring_class_character,
    twist,
)
from .cyclotomic import ramanujan_trace
from .errors import HeckeLabError, NumericalInstability, SignMismatch
from .lseries import central_value, dirichlet_L1, kernel_I
from .quadfield import (
    FieldContext,
    Ideal,
    enumerate_ideals,
    ideal_class_of,
    ring_class_dlog,
    ring_class_number,
)
from .rootnumber import root_number


# ---------------------------------------------------------------------------
# Twist enumeration
# ---------------------------------------------------------------------------


def _supported_conductors(P: tuple[int, ...], c_max: int) -> list[int]:
    out = [1]
    for p in sorted(set(P)):
        out = [c * p**e for c in out for e in range(40) if c * p**e <= c_max]
    return sorted(set(out))


def _pic_orders(field: FieldContext, c: int) -> tuple[int, ...]:
    from .quadfield import class_group

    return tuple(class_group(c * c * field.D).orders)


def _vector_exponent(exponents, vec, orders, N: int) -> int:
    return sum(t * e * (N // h) for t, e, h in zip(exponents, vec, orders)) % N


def _subgroup_closure(vectors: list[tuple[int, ...]], orders: tuple[int, ...]) -> set:
    seen = {tuple(0 for _ in orders)}
    frontier = list(seen)
    while frontier:
        base = frontier.pop()
        for v in vectors:
            nxt = tuple((b + x) % h for b, x, h in zip(base, v, orders))
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _dropdown_kernel(field: FieldContext, c: int, p: int) -> list[tuple[int, ...]]:
    """Generators of ker(Pic(O_c) -> Pic(O_{c/p})) as dlog vectors."""
    sub = c // p
    orders = _pic_orders(field, c)
    want = ring_class_number(field, c) // ring_class_number(field, sub)
    found: list[tuple[int, ...]] = []
    size = 1
    bound = 16
    while size < want:
        for ideal in enumerate_ideals(field, bound):
            if ideal.norm == 1 or math.gcd(ideal.norm, c) != 1:
                continue
            if any(ring_class_dlog(field, sub, ideal)):
                continue
            vec = tuple(ring_class_dlog(field, c, ideal))
            if any(vec) and vec not in found:
                found.append(vec)
                size = len(_subgroup_closure(found, orders))
                if size >= want:
                    break
        bound *= 2
        if bound > 10**7:
            raise RuntimeError("kernel generation did not terminate")
    return found


def _char_order(exponents, orders) -> int:
    n = 1
    for t, h in zip(exponents, orders):
        n = math.lcm(n, h // math.gcd(t, h))
    return n


def _conductor_exact(field: FieldContext, c: int, exponents, orders) -> bool:
    """True when the ring class character has conductor exactly c."""
    if c == 1:
        return True
    N = math.lcm(*orders) if orders else 1
    for p in {p for p, _ in _factor_int(c)}:
        kern = _dropdown_kernel(field, c, p)
        if all(_vector_exponent(exponents, v, orders, N) == 0 for v in kern):
            return False
    return True


def _factor_int(n: int):
    from .arith import factorize

    return factorize(n)


@dataclass(frozen=True)
class TwistOrbit:
    """A Galois orbit of twists: rho and its powers rho^m, m coprime to n."""

    c: int
    exponents: tuple[int, ...]
    order: int
    members: tuple[int, ...]  # the exponents m

    def rho(self, field: FieldContext, m: int = 1) -> RingClassCharacter:
        return ring_class_character(field, self.c, tuple(m * t for t in self.exponents))


def enumerate_twists(
    field: FieldContext, phi: HeckeCharacter, P: tuple[int, ...], c_max: int
) -> list[TwistOrbit]:
    """All ring-class twist orbits with conductor exactly c, supp(c) in P, c <= c_max."""
    orbits: list[TwistOrbit] = []
    for c in _supported_conductors(tuple(P), c_max):
        orders = _pic_orders(field, c)
        seen: set[tuple[int, ...]] = set()
        for exponents in _all_vectors(orders):
            if exponents in seen:
                continue
            if c > 1 and not any(exponents):
                continue  # the trivial character has conductor 1, listed there
            if not _conductor_exact(field, c, exponents, orders):
                continue
            n = _char_order(exponents, orders)
            members = tuple(m for m in range(1, n + 1) if math.gcd(m, n) == 1)
            orbit_vectors = sorted(
                tuple((m * t) % h for t, h in zip(exponents, orders)) for m in members
            )
            seen.update(orbit_vectors)
            orbits.append(
                TwistOrbit(c=c, exponents=orbit_vectors[0], order=n, members=members)
            )
    orbits.sort(key=lambda o: (o.c, o.exponents))
    return orbits


def _all_vectors(orders):
    if not orders:
        yield ()
        return
    head, *rest = orders
    for t in range(head):
        for tail in _all_vectors(tuple(rest)):
            yield (t,) + tail


# ---------------------------------------------------------------------------
# Exact orbit averages and counting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AverageValue:
    """phi(a) scaled by the exact rational c_n(k)/eulerphi(n)."""

    scale: Fraction
    base: CharValue

    @property
    def is_zero(self) -> bool:
        return self.scale == 0 or self.base.zero

    def complex(self) -> complex:
        return self.base.complex() * float(self.scale)


def twist_average_value(
    phi: HeckeCharacter, rho: RingClassCharacter, a: Ideal
) -> AverageValue:
    """Exact mean of (phi rho^m)(a) over m coprime to n = ord(rho)."""
    from .arith import euler_phi

    k = rho.value_exponent(a)
    if k is None:
        raise ValueError("ideal shares a factor with the twist modulus")
    base = evaluate_char(phi, a)
    if base.zero:
        raise ValueError("ideal shares a factor with the base conductor")
    n = rho.order
    return AverageValue(scale=Fraction(ramanujan_trace(n, k), euler_phi(n)), base=base)


def count_N(
    phi: HeckeCharacter, rho: RingClassCharacter, t: float, a0: Ideal
) -> int:
    """Ideals with nonzero orbit average, a != conj(a), Na <= t, class of a0.

    Coprimality to both the base conductor and the twist modulus is required
    for the exact average; other ideals contribute zero.
    """
    field = phi.field
    target = ideal_class_of(a0)
    n = rho.order
    count = 0
    for a in enumerate_ideals(field, int(t)):
        if a.norm == 1 or a.is_self_conjugate():
            continue
        if not a.is_coprime(phi.conductor):
            continue
        k = rho.value_exponent(a)
        if k is None or ramanujan_trace(n, k) == 0:
            continue
        if ideal_class_of(a) != target:
            continue
        count += 1
    return count


def count_N_total(phi: HeckeCharacter, rho: RingClassCharacter, t: float) -> int:
    """count_N summed over the ideal classes, in a single enumeration pass."""
    field = phi.field
    n = rho.order
    count = 0
    for a in enumerate_ideals(field, int(t)):
        if a.norm == 1 or a.is_self_conjugate():
            continue
        if not a.is_coprime(phi.conductor):
            continue
        k = rho.value_exponent(a)
        if k is None or ramanujan_trace(n, k) == 0:
            continue
        count += 1
    return count


# ---------------------------------------------------------------------------
# Averaged L-values
# ---------------------------------------------------------------------------


def orbit_characters(
    phi: HeckeCharacter, orbit: TwistOrbit
) -> list[HeckeCharacter]:
    field = phi.field
    out = []
    for m in orbit.members:
        rho_m = orbit.rho(field, m)
        out.append(phi if rho_m.is_trivial() else twist(phi, rho_m))
    return out


def averaged_L(
    phi: HeckeCharacter,
    orbit: TwistOrbit,
    v: int,
    tol: float = 1e-10,
    w: float | None = None,
) -> tuple[float, float]:
    """(mean of central values over the orbit, largest member tail bound)."""
    members = orbit_characters(phi, orbit)
    values, tails = [], []
    for chi in members:
        sv = central_value(chi, v, tol=tol, w=w)
        values.append(sv.value)
        tails.append(sv.tail_bound)
    return math.fsum(values) / len(values), max(tails)


def _averaged_central_from_coeffs(
    phi: HeckeCharacter, orbit: TwistOrbit, v: int, tol: float
) -> float:
    """Dual route: average theta coefficients across the orbit, then one sum."""
    from .lseries import _truncation, theta_coeffs

    members = orbit_characters(phi, orbit)
    Af = members[0].field.A * members[0].f_value
    T = _truncation(Af, tol)
    acc: dict[int, complex] = {}
    for chi in members:
        for n, a in theta_coeffs(chi, int(T)).items():
            acc[n] = acc.get(n, 0j) + a
    total = 0.0
    for n, a in sorted(acc.items()):
        total += 2.0 * (a.real / len(members)) / n * kernel_I(v, n / Af)
    return total


# ---------------------------------------------------------------------------
# Scan records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyRecord:
    c: int
    exponents: tuple[int, ...]
    n: int
    orbit_size: int
    f: float
    W: int
    v: int
    Lv: float
    Lv_av: float
    tail_bound: float
    ratio: float
    N_counts: dict
    main_lemma: MainLemmaReport | None
    verdict: str
    error: str | None = None


def _verdict(value: float, tail: float) -> str:
    if abs(value) > 1e3 * tail:
        return "nonzero"
    if abs(value) < tail:
        return "zero"
    return "indeterminate"


def scan_report(
    field: FieldContext,
    phi: HeckeCharacter,
    P: tuple[int, ...],
    c_max: int,
    tol: float = 1e-8,
    t_exponents: tuple[float, ...] = (0.9, 1.1),
) -> list[FamilyRecord]:
    """One FamilyRecord per twist orbit; failures are recorded, not raised."""
    L1 = dirichlet_L1(field)
    records = []
    for orbit in enumerate_twists(field, phi, P, c_max):
        try:
            records.append(
                _orbit_record(field, phi, orbit, L1, tol, t_exponents)
            )
        except HeckeLabError as exc:
            records.append(
                FamilyRecord(
                    c=orbit.c,
                    exponents=orbit.exponents,
                    n=orbit.order,
                    orbit_size=len(orbit.members),
                    f=float("nan"),
                    W=0,
                    v=0,
                    Lv=float("nan"),
                    Lv_av=float("nan"),
                    tail_bound=float("nan"),
                    ratio=float("nan"),
                    N_counts={},
                    main_lemma=None,
                    verdict="indeterminate",
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    return records


def _orbit_record(field, phi, orbit, L1, tol, t_exponents) -> FamilyRecord:
    members = orbit_characters(phi, orbit)
    chi = members[0]
    rho = orbit.rho(field, orbit.members[0])
    # exact fields first: counts and the p-adic bookkeeping need no W
    counts = {}
    for alpha in t_exponents:
        t = chi.f_value**alpha
        counts[repr(alpha)] = {"t": int(t), "N": count_N_total(phi, rho, t)}
    lemma = main_lemma_quantities(chi)
    base = dict(
        c=orbit.c,
        exponents=orbit.exponents,
        n=orbit.order,
        orbit_size=len(orbit.members),
        f=chi.f_value,
        N_counts=counts,
        main_lemma=lemma,
    )
    try:
        signs = [root_number(m) for m in members]
        if len(set(signs)) != 1:
            # the twist orbit exceeds the value-field Galois orbit; the
            # averaged value is not defined for it
            raise SignMismatch(
                f"orbit {orbit.c}:{orbit.exponents} has mixed signs {signs}"
            )
        W = int(signs[0])
        v = (1 - W) // 2
        sv = central_value(chi, v, tol=tol, w=float(W))
        Lv_av, tail_av = averaged_L(phi, orbit, v, tol=tol, w=float(W))
        dual = _averaged_central_from_coeffs(phi, orbit, v, tol)
        if abs(dual - Lv_av) > 2.0 * tol * max(1.0, abs(Lv_av)) + 2.0 * tail_av:
            raise NumericalInstability(
                f"averaged-L routes disagree: {Lv_av} vs {dual}"
            )
    except HeckeLabError as exc:
        return FamilyRecord(
            **base,
            W=0,
            v=0,
            Lv=float("nan"),
            Lv_av=float("nan"),
            tail_bound=float("nan"),
            ratio=float("nan"),
            verdict="indeterminate",
            error=f"{type(exc).__name__}: {exc}",
        )
    Af = field.A * chi.f_value
    denom = 2.0 * L1 if v == 0 else 2.0 * L1 * math.log(Af)
    return FamilyRecord(
        **base,
        W=W,
        v=v,
        Lv=sv.value,
        Lv_av=Lv_av,
        tail_bound=max(sv.tail_bound, tail_av),
        ratio=Lv_av / denom,
        verdict=_verdict(sv.value, sv.tail_bound),
    )


# ---------------------------------------------------------------------------
# Persistence: deterministic JSON / CSV / log
# ---------------------------------------------------------------------------


def _fstr(x: float) -> str:
    return repr(float(x))


def record_to_dict(record: FamilyRecord) -> dict:
    ml = record.main_lemma
    return {
        "c": record.c,
        "exponents": list(record.exponents),
        "n": record.n,
        "orbit_size": record.orbit_size,
        "f": _fstr(record.f),
        "W": record.W,
        "v": record.v,
        "Lv": _fstr(record.Lv),
        "Lv_av": _fstr(record.Lv_av),
        "tail_bound": _fstr(record.tail_bound),
        "ratio": _fstr(record.ratio),
        "N_counts": record.N_counts,
        "main_lemma": None
        if ml is None
        else {
            "mu": ml.mu,
            "h": ml.h,
            "q": ml.q,
            "entries": [
                {"p": e.p, "m_p": e.m_p, "o_p": e.o_p, "n_p": e.n_p} for e in ml.entries
            ],
        },
        "verdict": record.verdict,
        "error": record.error,
    }


def scan_to_json(
    field: FieldContext,
    phi: HeckeCharacter,
    P: tuple[int, ...],
    c_max: int,
    tol: float,
    records: list[FamilyRecord],
) -> str:
    payload = {
        "D": field.D,
        "P": sorted(set(P)),
        "c_max": c_max,
        "tol": _fstr(tol),
        "base_character": phi.descriptor(),
        "records": [record_to_dict(r) for r in records],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def scan_to_csv(field: FieldContext, records: list[FamilyRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["D", "c", "n", "f", "W", "v", "Lv", "Lv_av", "ratio", "verdict"])
    for r in records:
        writer.writerow(
            [
                field.D,
                r.c,
                r.n,
                _fstr(r.f),
                r.W,
                r.v,
                _fstr(r.Lv),
                _fstr(r.Lv_av),
                _fstr(r.ratio),
                r.verdict,
            ]
        )
    return buf.getvalue()


def save_scan(
    field: FieldContext,
    phi: HeckeCharacter,
    P: tuple[int, ...],
    c_max: int,
    tol: float,
    records: list[FamilyRecord],
    outdir: str | Path,
    stem: str = "scan",
) -> dict[str, Path]:
    """Write stem.json and stem.csv (deterministic) and append to stem.log."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": outdir / f"{stem}.json",
        "csv": outdir / f"{stem}.csv",
        "log": outdir / f"{stem}.log",
    }
    paths["json"].write_text(scan_to_json(field, phi, P, c_max, tol, records))
    paths["csv"].write_text(scan_to_csv(field, records))
    with paths["log"].open("a") as fh:
        for r in records:
            line = (
                f"D={field.D} c={r.c} exps={list(r.exponents)} n={r.n} W={r.W} v={r.v} "
                f"Lv={_fstr(r.Lv)} verdict={r.verdict}"
            )
            if r.error:
                line += f" error={r.error}"
            fh.write(line + "\n")
    return paths
