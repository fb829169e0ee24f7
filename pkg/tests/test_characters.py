import cmath
import json
import math
import random

import pytest

from heckelab.characters import (
    CharValue,
    build_hecke_character,
    canonical_epsilon,
    char_from_descriptor,
    evaluate_char,
    finite_part,
    galois_orbit_lifts,
    gaussian_epsilon,
    ideal_lcm,
    main_lemma_quantities,
    property1_check,
    ring_class_character,
    twist,
    unit_group_mod,
)
from heckelab.errors import ConductorNotSupported, UnitInconsistent, UnsupportedDiscriminant
from heckelab.quadfield import (
    KElt,
    enumerate_ideals,
    ideal_class_of,
    make_field,
    prime_ideals_above,
    principal_ideal,
    unit_ideal,
)


def coprime_ideals(field, char, bound):
    return [
        I
        for I in enumerate_ideals(field, bound)
        if I.norm > 1 and I.is_coprime(char.eps.f)
    ]


@pytest.fixture(scope="module")
def chi4():
    f = make_field(-4)
    return build_hecke_character(f, gaussian_epsilon(f))


@pytest.fixture(scope="module")
def chi7():
    f = make_field(-7)
    return build_hecke_character(f, canonical_epsilon(f))


@pytest.fixture(scope="module")
def chi23():
    f = make_field(-23)
    return build_hecke_character(f, canonical_epsilon(f))


@pytest.fixture(scope="module")
def chi47():
    f = make_field(-47)
    return build_hecke_character(f, canonical_epsilon(f))


def test_unit_group_examples():
    f4 = make_field(-4)
    one_plus_i = KElt(f4, 3, 1)
    f = principal_ideal(f4, one_plus_i) ** 3
    ug = unit_group_mod(f4, f)
    assert ug.order == 4  # N(f) * (1 - 1/2) = 8/2
    f23 = make_field(-23)
    ug23 = unit_group_mod(f23, principal_ideal(f23, f23.sqrt_D))
    assert ug23.orders == (22,)
    ug_triv = unit_group_mod(f4, unit_ideal(f4))
    assert ug_triv.order == 1 and ug_triv.gens == ()


def test_unit_group_order_formula():
    rng = random.Random(40)
    for D in (-4, -7, -23):
        f = make_field(D)
        for _ in range(6):
            z = KElt(f, rng.randint(1, 9), rng.randint(0, 3))
            if z.norm() == 0 or z.norm() > 400:
                continue
            ideal = principal_ideal(f, z)
            ug = unit_group_mod(f, ideal)
            expected = ideal.norm
            for pr in ideal.factor():
                expected = expected * (pr.norm - 1) // pr.norm
            assert ug.order == expected


def test_canonical_epsilon_values():
    f23 = make_field(-23)
    eps = canonical_epsilon(f23)
    assert eps.exponent_of(KElt(f23, 2, 0)) == 0        # (2|23) = +1
    assert eps.exponent_of(KElt(f23, 22, 0)) == eps.M // 2  # eps(-1) = -1
    assert eps.is_unit_consistent()
    f7 = make_field(-7)
    eps7 = canonical_epsilon(f7)
    assert eps7.exponent_of(KElt(f7, 3, 0)) == eps7.M // 2  # (3|7) = -1
    assert eps7.is_unit_consistent()


def test_canonical_epsilon_unsupported():
    with pytest.raises(UnsupportedDiscriminant):
        canonical_epsilon(make_field(-4))
    with pytest.raises(UnsupportedDiscriminant):
        canonical_epsilon(make_field(-20))
    with pytest.raises(UnsupportedDiscriminant):
        gaussian_epsilon(make_field(-7))


def test_gaussian_epsilon_unit_consistent():
    f = make_field(-4)
    eps = gaussian_epsilon(f)
    assert eps.f.norm == 8
    assert eps.is_unit_consistent()
    # eps(i) * i = 1 spelled out
    i = KElt(f, 2, 1)
    k = eps.exponent_of(i)
    assert (cmath.exp(2j * cmath.pi * k / eps.M) * i.complex() - 1) == pytest.approx(0, abs=1e-12)


def test_unit_inconsistent_rejected():
    # the trivial eps on the conductor of D=-7 sends -1 to 1, breaking
    # eps(-1)*(-1) = 1
    f = make_field(-7)
    fid = principal_ideal(f, f.sqrt_D)
    eps = finite_part(f, fid, (0,))
    with pytest.raises(UnitInconsistent):
        build_hecke_character(f, eps)


def test_integer_ideal_values(chi4):
    # chi((n)) = kappa(n) * n for n coprime to the conductor
    f = chi4.field
    for n in (3, 5, 7, 9, 11, 13, 15):
        v = evaluate_char(chi4, principal_ideal(f, KElt(f, n, 0)))
        expected = f.kronecker(n) * n
        assert abs(v.complex() - expected) < 1e-10
        assert v.abs_squared() == n * n


def test_value_at_split_prime(chi4):
    f = chi4.field
    p5 = prime_ideals_above(f, 5)[0]
    v = evaluate_char(chi4, p5)
    assert v.abs_squared() == 5
    assert abs(abs(v.complex()) ** 2 - 5) < 1e-10


def test_value_zero_off_conductor(chi4, chi23):
    assert evaluate_char(chi4, chi4.eps.f).zero
    assert evaluate_char(chi4, chi4.eps.f).complex() == 0
    p23 = prime_ideals_above(chi23.field, 23)[0]
    assert evaluate_char(chi23, p23).zero


def test_abs_squared_exact(chi4, chi7, chi23, chi47):
    for chi in (chi4, chi7, chi23, chi47):
        for I in coprime_ideals(chi.field, chi, 300):
            v = evaluate_char(chi, I)
            assert v.abs_squared() == I.norm, (chi.field.D, I)
            z = v.complex()
            assert abs(abs(z) ** 2 - I.norm) <= 1e-10 * I.norm


def test_multiplicativity_exact(chi4, chi23, chi47):
    rng = random.Random(41)
    for chi in (chi4, chi23, chi47):
        pool = coprime_ideals(chi.field, chi, 200)
        for _ in range(150):
            I, J = rng.choice(pool), rng.choice(pool)
            vij = evaluate_char(chi, I * J)
            prod = evaluate_char(chi, I) * evaluate_char(chi, J)
            assert vij.equals_exact(prod), (chi.field.D, I, J)
            assert abs(vij.complex() - prod.complex()) < 1e-9 * abs(vij.complex())


def test_conjugate_value_exact(chi23):
    rng = random.Random(42)
    pool = coprime_ideals(chi23.field, chi23, 250)
    for _ in range(60):
        I = rng.choice(pool)
        v = evaluate_char(chi23, I)
        vc = v.conjugate()
        assert abs(vc.complex() - v.complex().conjugate()) < 1e-10 * max(1, abs(v.complex()))


def test_property1_canonical(chi4, chi23):
    for chi in (chi4, chi23):
        rep = property1_check(chi, 400)
        assert rep.equivariant and rep.kappa1_matches_kappa
        assert rep.kappa1_minus_one and rep.split_norms_trivial
        assert rep.consistent and rep.witness is None
        assert rep.ideals_checked > 50


def test_property1_broken_character():
    # order-22 finite part on the D=-23 conductor: unit consistent (it sends
    # -1 to zeta_22^11 = -1) but the rational restriction has order > 2
    f = make_field(-23)
    fid = principal_ideal(f, f.sqrt_D)
    eps = finite_part(f, fid, (1,), M=22)
    assert eps.is_unit_consistent()
    broken = build_hecke_character(f, eps)
    rep = property1_check(broken, 200)
    assert not rep.equivariant and not rep.kappa1_matches_kappa
    assert rep.consistent
    assert rep.witness is not None
    # the witness really is a counterexample
    v = evaluate_char(broken, rep.witness)
    vc = evaluate_char(broken, rep.witness.conjugate())
    assert abs(vc.complex() - v.complex().conjugate()) > 1e-6


def test_property1_vacuous():
    f = make_field(-4)
    chi = build_hecke_character(f, gaussian_epsilon(f))
    rep = property1_check(chi, 1)
    assert rep.ideals_checked == 0 and rep.equivariant


def test_galois_orbit_cube_roots(chi23):
    f = chi23.field
    lifts = galois_orbit_lifts(f, chi23.eps)
    assert len(lifts) == 3
    assert len({l.conductor for l in lifts}) == 1
    zeta3 = cmath.exp(2j * cmath.pi / 3)
    for I in coprime_ideals(f, chi23, 60):
        vals = [evaluate_char(l, I).complex() for l in lifts]
        base = vals[0]
        assert all(abs(abs(v) - abs(base)) < 1e-10 * abs(base) for v in vals)
        ratios = [v / base for v in vals]
        if ideal_class_of(I) == (0,):
            assert all(abs(r - 1) < 1e-9 for r in ratios)
        else:
            # a non-principal class meets all three cube roots across lifts
            for root in (1, zeta3, zeta3**2):
                assert min(abs(r - root) for r in ratios) < 1e-9


def test_ring_class_character_basics():
    f = make_field(-4)
    rho = ring_class_character(f, 5, (1,))
    assert rho.order == 2
    p2 = prime_ideals_above(f, 2)[0]  # (1+i), lands in the nontrivial class
    assert rho.value_exponent(p2) == 1
    assert rho.value_complex(p2) == pytest.approx(-1)
    # primitive convention: 0 on ideals sharing a factor with c
    p5 = prime_ideals_above(f, 5)[0]
    assert rho.value_exponent(p5) is None
    assert rho.value_complex(p5) == 0
    trivial = ring_class_character(f, 5, (0,))
    assert trivial.is_trivial()


def test_ring_class_character_anticyclotomic():
    rng = random.Random(43)
    f = make_field(-4)
    rho = ring_class_character(f, 13, (1,))
    pool = [I for I in enumerate_ideals(f, 300) if math.gcd(I.norm, 13) == 1 and I.norm > 1]
    for _ in range(100):
        I = rng.choice(pool)
        a = rho.value_complex(I)
        b = rho.value_complex(I.conjugate())
        assert abs(a * b - 1) < 1e-10


def test_ring_class_conductor_validation():
    f = make_field(-4)
    with pytest.raises(ConductorNotSupported):
        ring_class_character(f, 10, (0, 0), allowed_primes=(5,))
    ring_class_character(f, 25, (1,), allowed_primes=(5,))


def test_twist_trivial_is_identity(chi4):
    f = chi4.field
    rho = ring_class_character(f, 5, (0,))
    assert twist(chi4, rho) is chi4


def test_twist_by_ring_class(chi4):
    f = chi4.field
    rho = ring_class_character(f, 5, (1,))
    chi = twist(chi4, rho)
    assert chi.conductor_norm == 200  # (1+i)^3 * 5O
    assert chi.twist_data == (5, (1,))
    # chi agrees with phi * rho away from both conductors
    for I in enumerate_ideals(f, 150):
        if I.norm == 1 or not I.is_coprime(chi.eps.f):
            continue
        lhs = evaluate_char(chi, I).complex()
        rhs = evaluate_char(chi4, I).complex() * rho.value_complex(I)
        assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(rhs)), I
    # still type (1,0) and equivariant
    for I in coprime_ideals(f, chi, 200):
        assert evaluate_char(chi, I).abs_squared() == I.norm
    rep = property1_check(chi, 300)
    assert rep.equivariant and rep.kappa1_matches_kappa


def test_twist_on_principal_ideals(chi4):
    # chi((w)) = eps_chi(w) * w exactly, for w coprime to the conductor
    f = chi4.field
    rho = ring_class_character(f, 5, (1,))
    chi = twist(chi4, rho)
    rng = random.Random(44)
    for _ in range(40):
        w = KElt(f, rng.randint(-9, 9), rng.randint(-9, 9))
        if w.norm() == 0:
            continue
        ideal = principal_ideal(f, w)
        if not ideal.is_coprime(chi.eps.f):
            continue
        k = chi.eps.exponent_of(w)
        v = evaluate_char(chi, ideal)
        expected = cmath.exp(2j * cmath.pi * k / chi.M) * w.complex()
        assert abs(v.complex() - expected) < 1e-9 * abs(expected)


def test_ideal_lcm():
    f = make_field(-4)
    a = principal_ideal(f, KElt(f, 3, 1)) * principal_ideal(f, KElt(f, 2, 0))
    b = principal_ideal(f, KElt(f, 2, 0)) ** 2
    l = ideal_lcm(a, b)
    assert l.norm == math.lcm(a.norm, b.norm) or l.norm % a.norm == 0


def test_main_lemma_untwisted(chi4):
    rep = main_lemma_quantities(chi4, mu=2, primes=[5])
    e = rep.entry(5)
    assert (e.m_p, e.o_p, e.n_p) == (0, 0, 0)
    assert rep.q == 1


def test_main_lemma_twisted(chi4):
    f = chi4.field
    rho = ring_class_character(f, 5, (1,))
    chi = twist(chi4, rho)
    rep = main_lemma_quantities(chi, mu=2, primes=[5])
    e = rep.entry(5)
    assert e.m_p == 2  # Nf = 200 = 2^3 * 5^2
    assert e.o_p == 0  # 1 + 5^3 O dies at level 5O
    assert e.n_p == 0 and rep.q == 1
    from fractions import Fraction

    assert abs(Fraction(e.m_p, 2) - e.n_p) <= rep.bound


def test_main_lemma_large_mu(chi4):
    f = chi4.field
    rho = ring_class_character(f, 5, (1,))
    chi = twist(chi4, rho)
    rep = main_lemma_quantities(chi, mu=9)
    assert rep.q == 1


def test_descriptor_roundtrip(chi4, chi23):
    f4 = chi4.field
    rho = ring_class_character(f4, 5, (1,))
    chars = [chi4, chi23, twist(chi4, rho)]
    for chi in chars:
        blob = json.dumps(chi.descriptor(), sort_keys=True)
        rebuilt = char_from_descriptor(json.loads(blob))
        assert json.dumps(rebuilt.descriptor(), sort_keys=True) == blob
        for I in coprime_ideals(chi.field, chi, 80):
            a = evaluate_char(chi, I)
            b = evaluate_char(rebuilt, I)
            assert a.equals_exact(b)
            assert a.complex() == b.complex()


def test_char_values_structure(chi47):
    # five lifts on D=-47, all sharing |values| with exact abs squared
    f = chi47.field
    lifts = galois_orbit_lifts(f, chi47.eps)
    assert len(lifts) == 5
    for I in coprime_ideals(f, chi47, 50):
        for l in lifts:
            assert evaluate_char(l, I).abs_squared() == I.norm
