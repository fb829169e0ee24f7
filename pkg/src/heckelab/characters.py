"""Hecke characters of infinite type (1,0), ring class twists, conductor data.

A character is assembled from two ingredients:

* a finite part: a homomorphism eps on (O/f)^x with values in a fixed
  root-of-unity group mu_M, subject to the unit consistency eps(u)*u = 1
  for every root of unity u in O (necessary and sufficient for a type
  (1,0) character with chi(wO) = eps(w)*w to exist);
* one exact class value v_i per class group generator g_i of order h_i,
  a chosen h_i-th root of eps(w_i)*w_i where g_i^{h_i} = (w_i).

Values are kept in the exact algebra zeta_M^k * q * prod v_i^{e_i} with
q in K, so |chi(a)|^2 = N(a) and multiplicativity are checkable exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .arith import abelian_group_structure, factorize, is_prime, v_p
from .errors import (
    ConductorNotSupported,
    NoConsistentLift,
    UnitInconsistent,
    UnsupportedDiscriminant,
)
from .quadfield import (
    FieldContext,
    Ideal,
    KElt,
    canonical_generator,
    class_group,
    enumerate_ideals,
    ideal_class_of,
    make_field,
    principal_ideal,
    ring_class_dlog,
    unit_ideal,
)

TWO_PI = 2 * math.pi


# ---------------------------------------------------------------------------
# Roots of unity in O, exactly indexed
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def unit_root_table(field: FieldContext) -> dict:
    """Map each torsion unit u to j with u = zeta_wK^j, computed exactly."""
    units = field.units()
    gen = min(
        (u for u in units),
        key=lambda u: abs(cmath.phase(u.complex()) % TWO_PI - TWO_PI / field.wK),
    )
    table, acc = {}, field.one
    for j in range(field.wK):
        table[acc] = j
        acc = acc * gen
    assert acc == field.one and len(table) == field.wK
    return table


# ---------------------------------------------------------------------------
# Unit groups of residue rings (O/f)^x
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitGroupMod:
    """Structure of (O/f)^x: generators (as reduced residues), orders, dlog."""

    field: FieldContext
    f: Ideal
    gens: tuple
    orders: tuple
    dlog: dict

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    def reduce(self, z: KElt) -> tuple:
        r = self.f.reduce_element(z)
        return (r.x, r.y)

    def dlog_of(self, z: KElt) -> tuple | None:
        """Exponent vector of z mod f, or None when z is not coprime to f."""
        return self.dlog.get(self.reduce(z))


@lru_cache(maxsize=None)
def unit_group_mod(field: FieldContext, f: Ideal) -> UnitGroupMod:
    """Generators/orders/dlog of (O/f)^x by direct residue enumeration."""
    a, c = f.a, f.c
    primes = list(f.factor())
    residues = []
    for y in range(c):
        for x in range(a):
            z = KElt(field, x, y)
            if all(not pr.contains(z) for pr in primes):
                residues.append((x, y))

    def mul(u, v):
        w = f.reduce_element(KElt(field, *u) * KElt(field, *v))
        return (w.x, w.y)

    one = f.reduce_element(field.one)
    gens, orders, dlog = abelian_group_structure(residues, mul, (one.x, one.y))
    expected = f.norm * math.prod(
        Fraction(pr.norm - 1, pr.norm) for pr in primes
    )
    assert Fraction(len(residues)) == expected
    return UnitGroupMod(field=field, f=f, gens=tuple(gens), orders=tuple(orders), dlog=dlog)


# ---------------------------------------------------------------------------
# Finite parts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinitePart:
    """Homomorphism (O/f)^x -> mu_M, stored as exponents on the unit group
    generators."""

    field: FieldContext
    f: Ideal
    M: int
    unit_group: UnitGroupMod
    exps: tuple

    def __post_init__(self):
        for k, n in zip(self.exps, self.unit_group.orders):
            if (k * n) % self.M:
                raise ValueError("exponents do not define a homomorphism")

    def exponent_of(self, z: KElt) -> int | None:
        """k with eps(z) = zeta_M^k, or None when z is not coprime to f."""
        vec = self.unit_group.dlog_of(z)
        if vec is None:
            return None
        return sum(k * e for k, e in zip(self.exps, vec)) % self.M

    def exponent_of_fraction(self, w: KElt) -> int:
        """eps extended to w = z/d with d a rational integer coprime to f."""
        d = math.lcm(Fraction(w.x).denominator, Fraction(w.y).denominator)
        num = KElt(self.field, int(w.x * d), int(w.y * d))
        kn = self.exponent_of(num)
        kd = self.exponent_of(KElt(self.field, d, 0))
        if kn is None or kd is None:
            raise ValueError("element not coprime to the conductor")
        return (kn - kd) % self.M

    def value_complex(self, z: KElt) -> complex:
        k = self.exponent_of(z)
        if k is None:
            return 0j
        return cmath.exp(2j * cmath.pi * k / self.M)

    def is_unit_consistent(self) -> bool:
        """eps(u) * u = 1 for all roots of unity u, checked exactly."""
        wK, M = self.field.wK, self.M
        for u, j in unit_root_table(self.field).items():
            k = self.exponent_of(u)
            if k is None or (k * wK + j * M) % (M * wK):
                return False
        return True

    def restriction_to_integers(self, n: int) -> int | None:
        """kappa_1(n): +1/-1 for eps(n) = 1/-1, None if not coprime or
        eps(n) is not +-1 (reported as order > 2)."""
        k = self.exponent_of(KElt(self.field, n % self.f.a, 0))
        if k is None:
            return None
        if k == 0:
            return 1
        if 2 * k == self.M:
            return -1
        return None


def finite_part(field: FieldContext, f: Ideal, exps, M: int | None = None) -> FinitePart:
    ug = unit_group_mod(field, f)
    if M is None:
        M = math.lcm(ug.exponent, field.wK)
    return FinitePart(field=field, f=f, M=M, unit_group=ug, exps=tuple(k % M for k in exps))


def canonical_epsilon(field: FieldContext) -> FinitePart:
    """The quadratic-residue finite part on f = (sqrt(D)) for |D| an odd prime.

    eps(w) = (w mod sqrt(D) | |D|) on the residue field F_|D|; unit consistency
    holds because (-1 | |D|) = -1 for |D| = 3 mod 4.
    """
    p = -field.D
    if field.D % 2 == 0 or not is_prime(p):
        raise UnsupportedDiscriminant(
            f"no canonical quadratic finite part for D={field.D}; supply one explicitly"
        )
    f = principal_ideal(field, field.sqrt_D)
    ug = unit_group_mod(field, f)
    assert ug.orders == (p - 1,)
    M = math.lcm(p - 1, field.wK)
    # the unique quadratic character of the cyclic group: generator -> -1
    return FinitePart(field=field, f=f, M=M, unit_group=ug, exps=(M // 2,))


def gaussian_epsilon(field: FieldContext) -> FinitePart:
    """The canonical finite part for D = -4, conductor (1+i)^3 (norm 8).

    (O/(1+i)^3)^x is cyclic of order 4 generated by the image of the torsion
    units, and unit consistency eps(u) = u^{-1} pins eps down completely.
    """
    if field.D != -4:
        raise UnsupportedDiscriminant("gaussian_epsilon requires D = -4")
    one_plus_i = KElt(field, 3, 1)  # 1 + i = 3 + omega
    f = principal_ideal(field, one_plus_i) ** 3
    ug = unit_group_mod(field, f)
    assert ug.orders == (4,)
    M = 4
    table = unit_root_table(field)
    (gen,) = ug.gens
    gen_elt = KElt(field, *gen)
    j = next(j for u, j in table.items() if ug.reduce(u) == gen)
    # eps(gen) = gen^{-1} in mu_4
    return FinitePart(field=field, f=f, M=M, unit_group=ug, exps=((-j) % M,))


# ---------------------------------------------------------------------------
# Exact character values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharValue:
    """Exact value zeta_M^k * q * prod v_i^{e_i}, or zero."""

    char: "HeckeCharacter"
    zero: bool
    k: int
    q: KElt | None
    e: tuple

    @staticmethod
    def zero_value(char) -> "CharValue":
        return CharValue(char=char, zero=True, k=0, q=None, e=())

    def __mul__(self, other: "CharValue") -> "CharValue":
        ch = self.char
        if self.zero or other.zero:
            return CharValue.zero_value(ch)
        k = (self.k + other.k) % ch.M
        q = self.q * other.q
        e = []
        for ei, fi, hi, ki, wi in zip(self.e, other.e, ch.class_orders, ch.base_exps, ch.base_ws):
            s = ei + fi
            t, r = divmod(s, hi)
            if t:
                # v_i^{h_i} = zeta_M^{k_i} * w_i folds back into (k, q)
                k = (k + t * ki) % ch.M
                for _ in range(t):
                    q = q * wi
            e.append(r)
        return CharValue(char=ch, zero=False, k=k, q=q, e=tuple(e))

    def conjugate(self) -> "CharValue":
        """Exact complex conjugate, using conj(v_i) = N(rep_i) / v_i."""
        ch = self.char
        if self.zero:
            return self
        k = (-self.k) % ch.M
        q = self.q.conjugate()
        e = []
        for ei, hi, ki, wi, rep in zip(
            self.e, ch.class_orders, ch.base_exps, ch.base_ws, ch.class_reps
        ):
            if ei == 0:
                e.append(0)
                continue
            # conj(v)^e = N(rep)^e * v^{-e} = N(rep)^e * v^{h-e} / (zeta^k w)
            k = (k - ki) % ch.M
            q = (q * rep.norm**ei) / wi
            e.append(hi - ei)
        return CharValue(char=ch, zero=False, k=k, q=q, e=tuple(e))

    def abs_squared(self) -> Fraction:
        """|value|^2, exact: N(q) * prod N(rep_i)^{e_i}."""
        if self.zero:
            return Fraction(0)
        out = Fraction(self.q.norm())
        for ei, rep in zip(self.e, self.char.class_reps):
            out *= rep.norm**ei
        return out

    def complex(self) -> complex:
        if self.zero:
            return 0j
        out = cmath.exp(2j * cmath.pi * self.k / self.char.M) * self.q.complex()
        for ei, v in zip(self.e, self.char.radicals):
            out *= v**ei
        return out

    def equals_exact(self, other: "CharValue") -> bool:
        """Exact equality within the value algebra (radical exponents must
        already agree; the remaining ambiguity is a root of unity in K)."""
        ch = self.char
        if self.zero or other.zero:
            return self.zero == other.zero
        if self.e != other.e:
            return False
        ratio = self.q / other.q
        table = unit_root_table(ch.field)
        if ratio not in table:
            return False
        j = table[ratio]
        dk = (self.k - other.k) % ch.M
        return (dk * ch.field.wK + j * ch.M) % (ch.M * ch.field.wK) == 0


# ---------------------------------------------------------------------------
# Hecke characters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeckeCharacter:
    """Type (1,0) Hecke character: finite part + exact class values.

    class value v_i = radical root of zeta_M^{base_exps[i]} * base_ws[i],
    rotated by zeta_{h_i}^{root_choices[i]}; radicals holds the numeric
    embeddings.
    """

    field: FieldContext
    eps: FinitePart
    class_reps: tuple        # ideals a_i representing the class group generators
    class_orders: tuple      # h_i
    base_ws: tuple           # w_i with a_i^{h_i} = (w_i), canonical generators
    base_exps: tuple         # k_i = eps-exponent at w_i
    root_choices: tuple      # j_i picking v_i among the h_i roots
    radicals: tuple          # numeric v_i
    twist_data: tuple | None = None   # (c, exponents) when built by twist()

    @property
    def M(self) -> int:
        return self.eps.M

    @property
    def conductor(self) -> Ideal:
        return self.eps.f

    @property
    def conductor_norm(self) -> int:
        return self.eps.f.norm

    @property
    def f_value(self) -> float:
        """f(chi) = sqrt of the conductor norm."""
        return math.sqrt(self.conductor_norm)

    def value(self, a: Ideal) -> CharValue:
        return evaluate_char(self, a)

    def value_complex(self, a: Ideal) -> complex:
        return evaluate_char(self, a).complex()

    def descriptor(self) -> dict:
        """JSON-serializable exact description; see char_from_descriptor."""
        f = self.eps.f
        out = {
            "D": self.field.D,
            "conductor_hnf": [f.a, f.b, f.c],
            "eps_exponents": list(self.eps.exps),
            "eps_M": self.eps.M,
            "root_choices": list(self.root_choices),
        }
        if self.twist_data is not None:
            c, exps = self.twist_data
            out["twist"] = {"c": c, "exponents": list(exps)}
        return out


def _class_generator_data(field: FieldContext, coprime_norm: int):
    """Deterministic ideal representatives for the class group generators."""
    cg = field.class_group()
    reps = []
    targets = {}
    for i in range(len(cg.gens)):
        targets[tuple(1 if j == i else 0 for j in range(len(cg.gens)))] = i
    found: dict = {}
    bound = 4
    while len(found) < len(targets) and bound < 10**7:
        for ideal in enumerate_ideals(field, bound):
            if ideal.norm == 1 or math.gcd(ideal.norm, coprime_norm) != 1:
                continue
            vec = ideal_class_of(ideal)
            if vec in targets and targets[vec] not in found:
                found[targets[vec]] = ideal
        bound *= 2
    if len(found) < len(targets):
        raise NoConsistentLift("no coprime representatives for class generators")
    return tuple(found[i] for i in range(len(cg.gens)))


def _principal_root(z: complex, h: int) -> complex:
    """The h-th root with argument in [0, 2 pi / h)."""
    r = abs(z) ** (1.0 / h)
    arg = cmath.phase(z) % TWO_PI
    return r * cmath.exp(1j * arg / h)


def build_hecke_character(
    field: FieldContext,
    eps: FinitePart,
    root_choices: tuple | None = None,
    twist_data: tuple | None = None,
) -> HeckeCharacter:
    """Character with finite part eps; root_choices picks the Galois lift."""
    if not eps.is_unit_consistent():
        raise UnitInconsistent(
            "eps(u) * u != 1 for some root of unity: no type (1,0) character exists"
        )
    cg = field.class_group()
    # reps must avoid the twist modulus too: a dropped conductor (ring class
    # character acting through the class group) must still match rho != 0
    coprime_norm = eps.f.norm * (twist_data[0] if twist_data else 1)
    reps = _class_generator_data(field, coprime_norm)
    orders = cg.orders
    if root_choices is None:
        root_choices = tuple(0 for _ in orders)
    if len(root_choices) != len(orders):
        raise ValueError("one root choice per class group generator required")
    ws, ks, radicals = [], [], []
    for a_i, h_i, j_i in zip(reps, orders, root_choices):
        w = canonical_generator(a_i**h_i)
        if w is None:
            raise NoConsistentLift("generator power is not principal")
        k = eps.exponent_of(w)
        if k is None:
            raise NoConsistentLift("generator power not coprime to the conductor")
        ws.append(w)
        ks.append(k)
        base = cmath.exp(2j * cmath.pi * k / eps.M) * w.complex()
        radicals.append(_principal_root(base, h_i) * cmath.exp(2j * cmath.pi * j_i / h_i))
    return HeckeCharacter(
        field=field,
        eps=eps,
        class_reps=reps,
        class_orders=orders,
        base_ws=tuple(ws),
        base_exps=tuple(ks),
        root_choices=tuple(root_choices),
        radicals=tuple(radicals),
        twist_data=twist_data,
    )


def galois_orbit_lifts(field: FieldContext, eps: FinitePart) -> list[HeckeCharacter]:
    """All characters with finite part eps: one per choice of class value roots."""
    from itertools import product

    cg = field.class_group()
    out = []
    for combo in product(*(range(h) for h in cg.orders)):
        out.append(build_hecke_character(field, eps, root_choices=combo))
    return out


def evaluate_char(char: HeckeCharacter, a: Ideal) -> CharValue:
    """Exact value of the character at an integral ideal (0 off the conductor)."""
    if a.norm == 1:
        return CharValue(char=char, zero=False, k=0, q=char.field.one, e=tuple(0 for _ in char.class_orders))
    if not a.is_coprime(char.eps.f):
        return CharValue.zero_value(char)
    e = ideal_class_of(a)
    c_ideal = a
    denom = 1
    for rep, ei in zip(char.class_reps, e):
        if ei:
            c_ideal = c_ideal * rep.conjugate() ** ei
            denom *= rep.norm**ei
    g = canonical_generator(c_ideal)
    assert g is not None, "class arithmetic must make this ideal principal"
    w = KElt(char.field, Fraction(g.x, denom), Fraction(g.y, denom))
    k = char.eps.exponent_of_fraction(w)
    return CharValue(char=char, zero=False, k=k, q=w, e=e)


# ---------------------------------------------------------------------------
# Property 1: equivariance and the rational restriction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Property1Report:
    equivariant: bool
    kappa1_matches_kappa: bool
    kappa1_minus_one: bool
    split_norms_trivial: bool
    witness: Ideal | None
    ideals_checked: int

    @property
    def consistent(self) -> bool:
        """The two sides of the equivalence must agree."""
        return self.equivariant == self.kappa1_matches_kappa


def property1_check(char: HeckeCharacter, bound: float) -> Property1Report:
    """Equivariance chi(conj a) = conj chi(a) up to norm bound, against the
    rational restriction kappa_1 = kappa; plus kappa_1(-1) = -1 and
    kappa_1(Na) = 1 for split a."""
    field, eps = char.field, char.eps
    Nf = eps.f.norm
    # restriction side, exact over one period
    period = math.lcm(eps.f.a, abs(field.D))
    kappa1_ok = True
    for n in range(1, period + 1):
        if math.gcd(n, Nf) != 1:
            continue
        k1 = eps.restriction_to_integers(n)
        if k1 != field.kronecker(n):
            kappa1_ok = False
            break
    minus_one = eps.restriction_to_integers(-1 % eps.f.a) == -1
    # equivariance side, exhaustive to the bound
    equi = True
    witness = None
    checked = 0
    split_ok = True
    for ideal in enumerate_ideals(field, int(bound)):
        if ideal.norm == 1 or not ideal.is_coprime(eps.f):
            continue
        checked += 1
        va = evaluate_char(char, ideal)
        vc = evaluate_char(char, ideal.conjugate())
        if not vc.equals_exact(va.conjugate()):
            if equi:
                witness = ideal
            equi = False
        if not ideal.is_self_conjugate() and ideal.norm > 1:
            fac = factorize(ideal.norm)
            if len(fac) == 1 and fac[0][1] == 1:  # split prime
                if eps.restriction_to_integers(ideal.norm) != 1:
                    split_ok = False
    return Property1Report(
        equivariant=equi,
        kappa1_matches_kappa=kappa1_ok,
        kappa1_minus_one=minus_one,
        split_norms_trivial=split_ok,
        witness=witness,
        ideals_checked=checked,
    )


# ---------------------------------------------------------------------------
# Ring class characters and twists
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RingClassCharacter:
    """Finite order character of Pic(O_c), anticyclotomic by construction."""

    field: FieldContext
    c: int
    exponents: tuple

    @property
    def order(self) -> int:
        cg = class_group(self.c * self.c * self.field.D)
        n = 1
        for t, h in zip(self.exponents, cg.orders):
            if t % h:
                n = math.lcm(n, h // math.gcd(t, h))
        return n

    def is_trivial(self) -> bool:
        return self.order == 1

    def value_exponent(self, a: Ideal) -> int | None:
        """s with rho(a) = zeta_order^s, or None when a is not coprime to c."""
        if math.gcd(a.norm, self.c) != 1:
            return None
        cg = class_group(self.c * self.c * self.field.D)
        e = ring_class_dlog(self.field, self.c, a)
        N = 1
        for h in cg.orders:
            N = math.lcm(N, h)
        kN = sum(t * ei * (N // h) for t, ei, h in zip(self.exponents, e, cg.orders)) % N
        # the value is zeta_N^kN; an order-n character only hits n-th roots
        step = N // self.order
        if kN % step:
            raise ArithmeticError("value exponent inconsistent with character order")
        return (kN // step) % self.order

    def value_complex(self, a: Ideal) -> complex:
        s = self.value_exponent(a)
        if s is None:
            return 0j
        return cmath.exp(2j * cmath.pi * s / self.order)


def ring_class_character(
    field: FieldContext, c: int, exponents, allowed_primes=None
) -> RingClassCharacter:
    if allowed_primes is not None:
        for p, _ in factorize(c):
            if p not in allowed_primes:
                raise ConductorNotSupported(f"conductor prime {p} outside {allowed_primes}")
    cg = class_group(c * c * field.D)
    exps = tuple(t % h for t, h in zip(exponents, cg.orders))
    if len(exps) != len(cg.orders):
        raise ValueError("need one exponent per ring class group generator")
    return RingClassCharacter(field=field, c=c, exponents=exps)


def _ideal_from_factors(field: FieldContext, factors: dict) -> Ideal:
    out = unit_ideal(field)
    for pr, e in factors.items():
        out = out * pr**e
    return out


def ideal_lcm(a: Ideal, b: Ideal) -> Ideal:
    fa, fb = a.factor(), b.factor()
    out = dict(fa)
    for pr, e in fb.items():
        out[pr] = max(out.get(pr, 0), e)
    return _ideal_from_factors(a.field, out)


def _ideal_divisors(field: FieldContext, factors: dict) -> list[Ideal]:
    """All ideal divisors given a prime factorization dict."""
    out = [unit_ideal(field)]
    for pr, e in factors.items():
        out = [d * pr**j for d in out for j in range(e + 1)]
    return out


def _transversal(sub: Ideal, total: Ideal):
    """Representatives of sub / total (total contained in sub)."""
    field = sub.field
    for s in range(total.a // sub.a):
        for r in range(total.c // sub.c):
            yield KElt(field, s * sub.a + r * sub.b, r * sub.c)


def _combined_exponent(phi: HeckeCharacter, rho: RingClassCharacter, Mc: int, w: KElt):
    """Exponent of eps_phi(w) * rho((w)) in mu_Mc for w coprime to both."""
    k1 = phi.eps.exponent_of(w)
    if k1 is None:
        return None
    s = rho.value_exponent(principal_ideal(phi.field, w))
    if s is None:
        return None
    return (k1 * (Mc // phi.M) + s * (Mc // rho.order)) % Mc


def twist(phi: HeckeCharacter, rho: RingClassCharacter) -> HeckeCharacter:
    """The primitive Hecke character inducing phi * rho.

    The combined finite part lives on m = lcm(f(phi), cO); its conductor is
    the smallest ideal divisor g of m whose congruence subgroup
    U(g) = {z = 1 mod g} it kills.
    """
    field = phi.field
    if rho.is_trivial():
        return phi
    cO = Ideal(field, rho.c, 0, rho.c)
    m = ideal_lcm(phi.eps.f, cO)
    Mc = math.lcm(phi.M, rho.order)
    ug_m = unit_group_mod(field, m)
    m_factors = m.factor()

    # exponent of the combined character on each generator of (O/m)^x
    gen_exps = []
    for g in ug_m.gens:
        k = _combined_exponent(phi, rho, Mc, KElt(field, *g))
        assert k is not None
        gen_exps.append(k)

    def combined_of(z: KElt) -> int | None:
        vec = ug_m.dlog_of(z)
        if vec is None:
            return None
        return sum(k * e for k, e in zip(gen_exps, vec)) % Mc

    # conductor: smallest divisor g with U(g) in the kernel
    admissible = []
    for g in _ideal_divisors(field, m_factors):
        trivial = True
        for t in _transversal(g, m):
            z = field.one + t
            k = combined_of(z)
            if k is None:
                continue
            if k:
                trivial = False
                break
        if trivial:
            admissible.append(g)
    f_chi = admissible[0]
    for g in admissible[1:]:
        f_chi = f_chi.add(g)
    assert any(f_chi == g for g in admissible), "admissible divisors must be gcd-closed"

    # restrict to a finite part on f_chi: lift each generator to w coprime to m
    ug_f = unit_group_mod(field, f_chi)
    exps = []
    for g in ug_f.gens:
        z = KElt(field, *g)
        k = None
        for t in _transversal(f_chi, m):
            k = combined_of(z + t)
            if k is not None:
                break
        assert k is not None, "unit mod f(chi) must lift to a unit mod m"
        exps.append(k)
    M_new = math.lcm(Mc, field.wK, ug_f.exponent)
    eps_chi = FinitePart(
        field=field,
        f=f_chi,
        M=M_new,
        unit_group=ug_f,
        exps=tuple(k * (M_new // Mc) % M_new for k in exps),
    )

    # build with root choices matching phi(a_i) * rho(a_i) numerically
    base = build_hecke_character(field, eps_chi, twist_data=(rho.c, rho.exponents))
    choices = []
    for i, (a_i, h_i) in enumerate(zip(base.class_reps, base.class_orders)):
        target = evaluate_char(phi, a_i).complex() * rho.value_complex(a_i)
        principal = base.radicals[i] * cmath.exp(-2j * cmath.pi * base.root_choices[i] / h_i)
        best, best_err = 0, float("inf")
        for j in range(h_i):
            cand = principal * cmath.exp(2j * cmath.pi * j / h_i)
            err = abs(cand - target)
            if err < best_err:
                best, best_err = j, err
        assert best_err < 1e-6 * max(1.0, abs(target)), "twisted value must be a valid root"
        choices.append(best)
    return build_hecke_character(
        field, eps_chi, root_choices=tuple(choices), twist_data=(rho.c, rho.exponents)
    )


def char_from_descriptor(desc: dict) -> HeckeCharacter:
    """Rebuild a character from its JSON descriptor, bit-exactly."""
    field = make_field(desc["D"])
    a, b, c = desc["conductor_hnf"]
    f = Ideal(field, a, b, c)
    eps = finite_part(field, f, desc["eps_exponents"], M=desc["eps_M"])
    twist_info = desc.get("twist")
    twist_data = (twist_info["c"], tuple(twist_info["exponents"])) if twist_info else None
    return build_hecke_character(
        field, eps, root_choices=tuple(desc["root_choices"]), twist_data=twist_data
    )


# ---------------------------------------------------------------------------
# Main Lemma conductor quantities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MainLemmaEntry:
    p: int
    m_p: int
    o_p: int
    n_p: int


@dataclass(frozen=True)
class MainLemmaReport:
    entries: tuple
    mu: int
    h: int
    q: int

    @property
    def bound(self) -> int:
        return 3 + self.mu + self.h

    def entry(self, p: int) -> MainLemmaEntry | None:
        for e in self.entries:
            if e.p == p:
                return e
        return None


def main_lemma_quantities(
    char: HeckeCharacter, mu: int = 2, primes=None
) -> MainLemmaReport:
    """Per-prime conductor exponents m_p, local orders o_p on 1 + p^3 O, and
    the counting exponents n_p = max(0, o_p - mu - h) with q = prod p^{n_p}.

    The bound |m_p/2 - n_p| <= 3 + mu + h is asserted for every prime.
    """
    if mu < 1:
        raise ValueError("mu must be a positive integer")
    field = char.field
    f = char.eps.f
    Nf = f.norm
    R = [p for p, _ in factorize(Nf)]
    ps = sorted(primes) if primes is not None else R
    h = field.h
    f_factors = f.factor()
    entries = []
    for p in ps:
        m_p = v_p(Nf, p)
        if m_p == 0:
            entries.append(MainLemmaEntry(p=p, m_p=0, o_p=0, n_p=0))
            continue
        f_p = _ideal_from_factors(field, {pr: e for pr, e in f_factors.items() if pr.norm % p == 0})
        f_cop = _ideal_from_factors(field, {pr: e for pr, e in f_factors.items() if pr.norm % p})
        ug_p = unit_group_mod(field, f_p)

        def eps_p_exponent(z: KElt) -> int | None:
            # lift to w = z mod f_p, w = 1 mod f/f_p, then apply eps
            for t in _transversal(f_p, f):
                w = z + t
                if f_cop.contains(w - field.one) and char.eps.exponent_of(w) is not None:
                    return char.eps.exponent_of(w)
            return None

        # subgroup of (O/f_p)^x of residues = 1 mod (p^3 O + f_p)
        pO3 = Ideal(field, p, 0, p) ** 3
        g_p = pO3.add(f_p)
        order = 1
        for t in _transversal(g_p, f_p):
            z = field.one + t
            if ug_p.dlog_of(z) is None:
                continue
            k = eps_p_exponent(z)
            assert k is not None
            order = math.lcm(order, char.M // math.gcd(char.M, k))
        o_p = v_p(order, p)
        assert order == p**o_p, "restriction to 1 + p^3 O must have p-power order"
        n_p = max(0, o_p - mu - h)
        assert abs(Fraction(m_p, 2) - n_p) <= 3 + mu + h, (
            f"main lemma bound violated at p={p}: m_p={m_p}, n_p={n_p}"
        )
        entries.append(MainLemmaEntry(p=p, m_p=m_p, o_p=o_p, n_p=n_p))
    q = math.prod(e.p**e.n_p for e in entries)
    return MainLemmaReport(entries=tuple(entries), mu=mu, h=h, q=q)
