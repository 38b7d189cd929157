"""Exact arithmetic for the unit group mod q and its Dirichlet characters.

Character values are exact roots of unity, stored as rational phases:
chi(a) = e(phase(a)) with phase a Fraction in [0, 1).  All zero-tests on
character combinations (chi(a) != chi(b), orthogonality sums, the g-values
of zero systems) reduce to exact rational/cyclotomic arithmetic; floats
appear only when a numeric value is explicitly requested.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Tuple


class InvalidModulusError(ValueError):
    pass


class InvalidResidueError(ValueError):
    pass


class NotRepresentableError(ValueError):
    """No character takes the requested value at the given residue."""


def _factorize(n: int) -> List[Tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _order_mod(a: int, m: int, group_order: int) -> int:
    order = group_order
    for p, _ in _factorize(group_order):
        while order % p == 0 and pow(a, order // p, m) == 1:
            order //= p
    return order


def _primitive_root(pe: int, p: int) -> int:
    phi = pe - p * pe // (p * p) if pe % (p * p) == 0 else pe - pe // p
    # phi(p^e) = p^(e-1)(p-1); recompute cleanly
    e = 0
    t = pe
    while t % p == 0:
        t //= p
        e += 1
    phi = (p - 1) * p ** (e - 1)
    for g in range(2, pe):
        if math.gcd(g, pe) != 1:
            continue
        if _order_mod(g, pe, phi) == phi:
            return g
    raise RuntimeError(f"no primitive root mod {pe}")  # unreachable for p odd


def _crt_lift(residue: int, modulus: int, q: int) -> int:
    """Residue that is `residue` mod `modulus` and 1 mod q/modulus."""
    other = q // modulus
    if other == 1:
        return residue % q
    inv = pow(other, -1, modulus)
    return (1 + other * inv * (residue - 1)) % q


@dataclass(frozen=True)
class ResidueGroup:
    """The multiplicative group (Z/qZ)^* with a fixed generating set.

    generators is a tuple of (g_j, n_j) with n_1 * ... * n_m = phi(q); every
    unit a has a unique exponent vector alpha with 0 <= alpha_j < n_j and
    a = prod g_j^alpha_j (mod q).
    """

    q: int
    units: Tuple[int, ...]
    generators: Tuple[Tuple[int, int], ...]
    phi: int
    lam: int
    _exponents: Dict[int, Tuple[int, ...]]

    def exponents(self, a: int) -> Tuple[int, ...]:
        a %= self.q
        try:
            return self._exponents[a]
        except KeyError:
            raise InvalidResidueError(f"{a} is not a unit mod {self.q}") from None

    def order(self, a: int) -> int:
        return _order_mod(a % self.q, self.q, self.phi)

    def is_unit(self, a: int) -> bool:
        return math.gcd(a, self.q) == 1

    def inverse(self, a: int) -> int:
        if not self.is_unit(a):
            raise InvalidResidueError(f"{a} is not a unit mod {self.q}")
        return pow(a, -1, self.q)

    def subgroup(self, a: int) -> Tuple[int, ...]:
        """Cyclic subgroup generated by a, in power order 1, a, a^2, ..."""
        out = [1]
        x = a % self.q
        while x != 1:
            out.append(x)
            x = (x * a) % self.q
        return tuple(out)


@lru_cache(maxsize=None)
def unit_group(q: int) -> ResidueGroup:
    """Build (Z/qZ)^* by CRT over prime powers, with primitive roots per
    odd prime power and the {-1, 5} pair for 2^e, e >= 3."""
    if q < 3:
        raise InvalidModulusError(f"modulus must be >= 3, got {q}")
    units = tuple(a for a in range(1, q) if math.gcd(a, q) == 1)
    phi = len(units)

    gens: List[Tuple[int, int]] = []
    for p, e in _factorize(q):
        pe = p**e
        if p == 2:
            if e == 1:
                continue
            if e == 2:
                gens.append((_crt_lift(3, pe, q), 2))
            else:
                gens.append((_crt_lift(pe - 1, pe, q), 2))
                gens.append((_crt_lift(5, pe, q), 2 ** (e - 2)))
        else:
            g = _primitive_root(pe, p)
            gens.append((_crt_lift(g, pe, q), (p - 1) * p ** (e - 1)))

    # drop order-1 factors (q = 2^1 * ...) and build the exponent table
    gens = [(g, n) for g, n in gens if n > 1]
    if not gens:  # q in {3,4}? no: phi(3)=2 handled above. Defensive only.
        gens = [(1, 1)]
    exps: Dict[int, Tuple[int, ...]] = {}

    def fill(idx: int, acc: int, vec: Tuple[int, ...]) -> None:
        if idx == len(gens):
            exps[acc] = vec
            return
        g, n = gens[idx]
        x = 1
        for k in range(n):
            fill(idx + 1, (acc * x) % q, vec + (k,))
            x = (x * g) % q

    fill(0, 1, ())
    if len(exps) != phi:
        raise RuntimeError(f"generator decomposition failed for q={q}")
    lam = 1
    for _, n in gens:
        lam = lam * n // math.gcd(lam, n)
    return ResidueGroup(q=q, units=units, generators=tuple(gens), phi=phi,
                        lam=lam, _exponents=exps)


def _frac_mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character mod q with exact rational phases.

    chi(a) = e(phase(a)) = exp(2*pi*i*phase(a)); phases are multiplicative
    mod 1.  Characters are hashable and compare by their phase table.
    """

    q: int
    _phases: Tuple[Tuple[int, Fraction], ...]  # sorted (unit, phase) pairs

    @property
    def phases(self) -> Dict[int, Fraction]:
        return dict(self._phases)

    def phase(self, a: int) -> Fraction:
        a %= self.q
        for u, p in self._phases:
            if u == a:
                return p
        raise InvalidResidueError(f"{a} is not a unit mod {self.q}")

    def __call__(self, a: int) -> complex:
        p = self.phase(a)
        return cmath.exp(2j * cmath.pi * float(p))

    @property
    def is_principal(self) -> bool:
        return all(p == 0 for _, p in self._phases)

    @property
    def order(self) -> int:
        return int(math.lcm(*(p.denominator for _, p in self._phases)))

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(
            self.q, tuple((u, _frac_mod1(-p)) for u, p in self._phases))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.q != self.q:
            raise ValueError("characters must share a modulus")
        od = dict(other._phases)
        return DirichletCharacter(
            self.q, tuple((u, _frac_mod1(p + od[u])) for u, p in self._phases))

    def __pow__(self, k: int) -> "DirichletCharacter":
        return DirichletCharacter(
            self.q, tuple((u, _frac_mod1(k * p)) for u, p in self._phases))


@lru_cache(maxsize=None)
def characters(q: int) -> Tuple[DirichletCharacter, ...]:
    """All phi(q) characters mod q; index 0 is the principal character.

    The list is closed under conjugation and ordered canonically by the
    character's phase vector on the group generators.
    """
    group = unit_group(q)
    gens = group.generators
    chars: List[DirichletCharacter] = []

    def build(idx: int, chosen: Tuple[int, ...]) -> None:
        if idx == len(gens):
            table = []
            for a in group.units:
                alpha = group.exponents(a)
                ph = Fraction(0)
                for (g, n), b, e in zip(gens, chosen, alpha):
                    ph += Fraction(b * e, n)
                table.append((a, _frac_mod1(ph)))
            chars.append(DirichletCharacter(q, tuple(table)))
            return
        _, n = gens[idx]
        for b in range(n):
            build(idx + 1, chosen + (b,))

    build(0, ())
    chars.sort(key=lambda c: tuple(c._phases))
    chars.sort(key=lambda c: not c.is_principal)  # principal first
    return tuple(chars)


def nonprincipal_characters(q: int) -> Tuple[DirichletCharacter, ...]:
    return tuple(c for c in characters(q) if not c.is_principal)


def separating_characters(q: int, a: int, b: int) -> Tuple[DirichletCharacter, ...]:
    """Non-principal characters with chi(a) != chi(b) (exact phase test)."""
    return tuple(c for c in nonprincipal_characters(q)
                 if c.phase(a) != c.phase(b))


def character_with_value(q: int, a: int, target_phase: Fraction) -> DirichletCharacter:
    """Some character chi mod q with chi(a) = e(target_phase)."""
    target = _frac_mod1(Fraction(target_phase))
    for c in characters(q):
        if c.phase(a) == target:
            return c
    raise NotRepresentableError(
        f"no character mod {q} takes value e({target}) at {a}")


def sqrt_count(q: int, c: int) -> int:
    """N_q(c): number of solutions of w^2 = c (mod q)."""
    if q < 3:
        raise InvalidModulusError(f"modulus must be >= 3, got {q}")
    if math.gcd(c, q) != 1:
        raise InvalidResidueError(f"{c} is not a unit mod {q}")
    c %= q
    return sum(1 for w in range(q) if (w * w) % q == c)


# --- exact sums of roots of unity -------------------------------------------
#
# g-values of zero systems are integer combinations of character values.
# Their zero-test must be exact (it gates which zeros are "dominant"), so we
# reduce the combination against the cyclotomic polynomial over Z.


def _poly_divmod(num: List[int], den: List[int]) -> Tuple[List[int], List[int]]:
    num = num[:]
    quot = [0] * (len(num) - len(den) + 1)
    for i in range(len(quot) - 1, -1, -1):
        coef = num[i + len(den) - 1]
        if den[-1] != 1:
            assert coef % den[-1] == 0
            coef //= den[-1]
        quot[i] = coef
        if coef:
            for j, d in enumerate(den):
                num[i + j] -= coef * d
    return quot, num


@lru_cache(maxsize=None)
def _cyclotomic(n: int) -> Tuple[int, ...]:
    """Coefficients (ascending) of the n-th cyclotomic polynomial."""
    if n == 1:
        return (-1, 1)
    poly = [0] * (n + 1)
    poly[0], poly[n] = -1, 1  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            poly, rem = _poly_divmod(poly, list(_cyclotomic(d)))
            assert not any(rem), "cyclotomic division must be exact"
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


class RootOfUnitySum:
    """Exact integer combination sum_f coeff[f] * e(f), f rational in [0,1)."""

    def __init__(self) -> None:
        self._coeffs: Dict[Fraction, int] = {}

    def add(self, phase: Fraction, coeff: int = 1) -> "RootOfUnitySum":
        if coeff:
            f = _frac_mod1(Fraction(phase))
            new = self._coeffs.get(f, 0) + coeff
            if new:
                self._coeffs[f] = new
            else:
                self._coeffs.pop(f, None)
        return self

    def __iadd__(self, other: "RootOfUnitySum") -> "RootOfUnitySum":
        for f, c in other._coeffs.items():
            self.add(f, c)
        return self

    def is_zero(self) -> bool:
        if not self._coeffs:
            return True
        denoms = [f.denominator for f in self._coeffs]
        level = math.lcm(*denoms)
        poly = [0] * level
        for f, c in self._coeffs.items():
            poly[int(f * level)] += c
        _, rem = _poly_divmod(poly, list(_cyclotomic(level)))
        return not any(rem)

    def to_complex(self) -> complex:
        return sum(c * cmath.exp(2j * cmath.pi * float(f))
                   for f, c in self._coeffs.items()) or 0j

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*e({f})" for f, c in sorted(self._coeffs.items()))
        return f"RootOfUnitySum({body or '0'})"


def character_sum(q: int, a: int, chars: Iterable[DirichletCharacter] | None = None,
                  ) -> RootOfUnitySum:
    """sum over characters of chi(a), as an exact root-of-unity sum."""
    s = RootOfUnitySum()
    for c in (characters(q) if chars is None else chars):
        s.add(c.phase(a))
    return s
