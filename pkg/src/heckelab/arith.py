"""Rational-integer utilities shared across the package.

All routines are exact integer arithmetic at desk scale; factorization is
trial division, which is plenty for the conductors and norms we touch.
"""

from __future__ import annotations

import math
from functools import lru_cache


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def solve_linmod(a: int, b: int, m: int) -> tuple[int, int]:
    """Smallest non-negative x with a*x = b (mod m), plus the solution spacing.

    Returns (x0, m//g); raises ValueError when g = gcd(a, m) does not divide b.
    """
    g, inv, _ = xgcd(a, m)
    if b % g:
        raise ValueError(f"{a}*x = {b} (mod {m}) has no solution")
    mg = m // g
    x0 = ((b // g) * inv) % mg
    return x0, mg


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), defined for all integers n."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    if n < 0:
        sign = -1 if a < 0 else 1
        return sign * kronecker(a, -n)
    # strip factors of 2 from n
    t = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            t = -t
    a %= n
    # Jacobi loop on odd n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def sqrt_mod_prime(a: int, p: int) -> int:
    """A square root of a modulo prime p (Tonelli-Shanks). Raises if none."""
    a %= p
    if p == 2 or a == 0:
        return a % p
    if kronecker(a, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # write p-1 = q * 2^s with q odd
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while kronecker(z, p) != -1:
        z += 1
    m, c = s, pow(z, q, p)
    t, r = pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


@lru_cache(maxsize=None)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of |n| as a tuple of (p, exponent), ascending."""
    n = abs(n)
    out = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    d = 5
    while d * d <= n:
        for step in (d, d + 2):
            e = 0
            while n % step == 0:
                n //= step
                e += 1
            if e:
                out.append((step, e))
        d += 6
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    fac = factorize(n)
    return len(fac) == 1 and fac[0][1] == 1


def divisors(n: int) -> list[int]:
    """All positive divisors of |n|, ascending."""
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def moebius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def euler_phi(n: int) -> int:
    phi = 1
    for p, e in factorize(n):
        phi *= (p - 1) * p ** (e - 1)
    return phi


def primes_up_to(x: int) -> list[int]:
    """Primes <= x by sieve."""
    if x < 2:
        return []
    sieve = bytearray([1]) * (x + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(math.isqrt(x)) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, flag in enumerate(sieve) if flag]


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    """Solve x = r1 (mod m1), x = r2 (mod m2); returns (x, lcm). Raises if inconsistent."""
    g, s, _ = xgcd(m1, m2)
    if (r2 - r1) % g:
        raise ValueError("inconsistent congruences")
    l = m1 // g * m2
    x = (r1 + (r2 - r1) // g * s % (m2 // g) * m1) % l
    return x, l


def v_p(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Structure of a finite abelian group given by an explicit element list.
#
# Strategy: split into Sylow subgroups, then run the greedy basis algorithm
# inside each p-group (pick an element of maximal order in the quotient,
# correct it to have trivial relation, repeat).  In a p-group the correction
# exponents are always divisible as needed, so every generator ends up with
# the clean relation g^order = identity and the group is the direct product
# of the cyclic pieces.
# ---------------------------------------------------------------------------


def _element_order(x, mul, identity):
    o, y = 1, x
    while y != identity:
        y = mul(y, x)
        o += 1
    return o


def _p_group_basis(elements, mul, identity):
    """Basis of an abelian p-group: returns (gens, orders, dlog dict)."""
    gens: list = []
    orders: list[int] = []
    dlog = {identity: ()}
    size = len(elements)
    while len(dlog) < size:
        # element of maximal order in the quotient by the current subgroup
        best, best_m = None, 0
        for x in elements:
            if x in dlog:
                continue
            m, y = 1, x
            while y not in dlog:
                y = mul(y, x)
                m += 1
            if m > best_m:
                best, best_m = x, m
        x, m = best, best_m
        # x^m lands in the subgroup; divide out its dlog to get a clean generator
        y = x
        for _ in range(m - 1):
            y = mul(y, x)
        rel = dlog[y]
        g_new = x
        for g, o, e in zip(gens, orders, rel):
            if e % m:
                raise RuntimeError("p-group basis correction failed")
            # multiply by g^(o - e/m) to cancel the relation
            k = (-(e // m)) % o
            for _ in range(k):
                g_new = mul(g_new, g)
        gens.append(g_new)
        orders.append(m)
        new_dlog = dict(dlog)
        y = g_new
        for k in range(1, m):
            for elt, vec in dlog.items():
                new_dlog[mul(elt, y)] = vec + (k,)
            y = mul(y, g_new)
        for elt in new_dlog:
            new_dlog[elt] = tuple(new_dlog[elt]) + (0,) * (len(gens) - len(new_dlog[elt]))
        dlog = new_dlog
    return gens, orders, dlog


def abelian_group_structure(elements, mul, identity):
    """Generators, orders and discrete logs of a finite abelian group.

    elements must be the full (hashable) element list.  Returns
    (gens, orders, dlog) in invariant-factor form (orders d_1 | ... | d_k,
    prod(orders) == len(elements)) with dlog[x] the exponent vector of x
    in the chosen generators.
    """
    n = len(elements)
    if n == 1:
        return [], [], {identity: ()}
    elt_set = set(elements)
    if len(elt_set) != n:
        raise ValueError("duplicate elements")
    sylow = []
    for p, a in factorize(n):
        m = n // p**a
        syl = {_pow(x, m, mul, identity) for x in elements}
        sgens, sorders, sdlog = _p_group_basis(sorted(syl, key=_sort_key), mul, identity)
        perm = sorted(range(len(sgens)), key=lambda i: -sorders[i])
        sgens = [sgens[i] for i in perm]
        sorders = [sorders[i] for i in perm]
        sdlog = {x: tuple(v[i] for i in perm) for x, v in sdlog.items()}
        # exponent c with c = 1 mod p^a and c = 0 mod n/p^a projects onto
        # the p-Sylow subgroup
        c, _ = crt_pair(1, p**a, 0, m)
        sylow.append((sgens, sorders, sdlog, c))
    # merge the Sylow bases slotwise into invariant factors d_1 | ... | d_k
    depth = max(len(s[1]) for s in sylow)
    gens, orders = [], []
    for k in range(depth):
        g, d = identity, 1
        for sgens, sorders, _, _ in sylow:
            if k < len(sgens):
                g = mul(g, sgens[k])
                d *= sorders[k]
        gens.append(g)
        orders.append(d)
    gens.reverse()
    orders.reverse()
    dlog = {}
    for x in elements:
        per = [(sdlog[_pow(x, c, mul, identity)], sorders) for sgens, sorders, sdlog, c in sylow]
        vec = []
        for k in range(depth):
            e, mod = 0, 1
            for sv, so in per:
                if k < len(so):
                    e, mod = crt_pair(e, mod, sv[k] % so[k], so[k])
            vec.append(e)
        vec.reverse()
        dlog[x] = tuple(vec)
    return gens, orders, dlog


def _pow(x, k, mul, identity):
    out, base = identity, x
    while k:
        if k & 1:
            out = mul(out, base)
        base = mul(base, base)
        k >>= 1
    return out


def _sort_key(x):
    # deterministic ordering for heterogeneous hashables used as group elements
    return repr(x)
