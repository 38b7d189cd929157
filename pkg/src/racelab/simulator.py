"""The explicit-formula engine.

Race functions built from a hypothetical zero system:

    P_{q,a}(x; B) = pi(x)/phi(q)
                    - (2/phi(q)) Re sum_chi conj(chi)(a) sum*_rho n(rho,chi) f(rho),

    f(rho) = x^rho/(rho log x) + (1/rho) int_2^x t^(rho-1)/log^2 t dt,

with the star convention halving real-rho summands.  The dominant part of a
pairwise difference is an almost periodic trigonometric sum with amplitudes
|g(beta+i*gamma)| / |beta+i*gamma|; the residual is reported as an explicit
bound rather than an asymptotic claim.

Two trace modes: full-formula (quadrature-backed, overflows past u ~ 700) and
dominant-only (the scaled limit the dominant-term analysis uses, valid for
any u).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.special import expi

from .orderings import OrderingTrace
from .residues import unit_group
from .trigpoly import TrigPoly
from .zerosys import DominantData, Zero, ZeroSystem, dominant_data, g_rho_exact


class DomainError(ValueError):
    pass


class EmptyDominantSetError(ValueError):
    pass


class OverflowRiskError(ValueError):
    """Full-formula evaluation would overflow; use dominant-only mode."""


class RecipeMismatchError(ValueError):
    """The zero system does not match the decomposition's expected shape."""


LOG2 = math.log(2.0)


# --- f(rho) -------------------------------------------------------------------


def _oscillatory_integral(beta: float, gamma: float, a: float, b: float,
                          rel_tol: float = 1e-9) -> complex:
    """int_a^b e^(beta*v) e^(i*gamma*v) / v^2 dv, oscillation-aware."""
    if b <= a:
        return 0.0j

    def envelope(v):
        return np.exp(beta * v) / (v * v)

    if gamma == 0.0:
        val, _ = integrate.quad(envelope, a, b, epsabs=1e-13, epsrel=rel_tol,
                                limit=200)
        return complex(val, 0.0)
    # panels of a bounded number of cycles keep QUADPACK's oscillatory rule fed
    cycles = gamma * (b - a) / (2.0 * math.pi)
    n_panels = max(1, int(math.ceil(cycles / 256.0)))
    edges = np.linspace(a, b, n_panels + 1)
    total = 0.0j
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(edges, edges[1:]):
            re, _ = integrate.quad(envelope, lo, hi, weight="cos", wvar=gamma,
                                   epsabs=1e-13, epsrel=rel_tol, limit=300)
            im, _ = integrate.quad(envelope, lo, hi, weight="sin", wvar=gamma,
                                   epsabs=1e-13, epsrel=rel_tol, limit=300)
            total += complex(re, im)
    return total


def f_rho_parts(rho: complex, x: float,
                rel_tol: float = 1e-9) -> Tuple[complex, complex, float]:
    """(main term, integral term, discard bound) of f(rho) at x.

    main = x^rho/(rho log x); integral = (1/rho) int_2^x t^(rho-1)/log^2 t dt,
    and the discard bound dominates |integral|:
    (1/|rho|) int_2^x t^(Re rho - 1)/log^2 t dt.
    """
    rho = complex(rho)
    if x < 2.0:
        raise DomainError(f"x must be >= 2, got {x}")
    if rho == 0:
        raise DomainError("rho must be nonzero")
    w = math.log(x)
    main = cmath.exp(rho * w) / (rho * w)
    if x == 2.0:
        return main, 0.0j, 0.0
    osc = _oscillatory_integral(rho.real, rho.imag, LOG2, w, rel_tol)
    env = _oscillatory_integral(rho.real, 0.0, LOG2, w, rel_tol).real
    return main, osc / rho, env / abs(rho)


def f_rho(rho: complex, x: float, rel_tol: float = 1e-9) -> complex:
    """f(rho) = x^rho/(rho log x) + (1/rho) int_2^x t^(rho-1)/log^2 t dt."""
    main, tail, _ = f_rho_parts(rho, x, rel_tol)
    return main + tail


def envelope_integral(beta: float, x: float) -> float:
    """int_2^x t^(beta-1)/log^2 t dt (the error envelope of the main term)."""
    if x <= 2.0:
        return 0.0
    return _oscillatory_integral(beta, 0.0, LOG2, math.log(x)).real


# --- race function sets ----------------------------------------------------------


def li(x: float) -> float:
    """Logarithmic integral li(x) = PV int_0^x dt/log t."""
    return float(expi(math.log(x)))


@dataclass(frozen=True)
class RaceFunctionSet:
    """A modulus, a zero system, the racing residues, and a pi(x) source.

    pi_proxy: "li", "zero" (drop the common pi/phi term; pairwise differences
    are unaffected), a callable x -> pi(x), or a PrimeRaceTable-like object
    exposing pi_at(x).
    """

    q: int
    system: ZeroSystem
    members: Tuple[int, ...]
    pi_proxy: object = "li"

    def __post_init__(self) -> None:
        group = unit_group(self.q)
        for m in self.members:
            if not group.is_unit(m):
                raise ValueError(f"{m} is not a unit mod {self.q}")
        if self.system.q != self.q:
            raise ValueError("zero system modulus mismatch")

    def pi_value(self, x: float) -> float:
        proxy = self.pi_proxy
        if proxy == "li":
            return li(x)
        if proxy == "zero":
            return 0.0
        if callable(proxy):
            return float(proxy(x))
        return float(proxy.pi_at(x))


def _star_weight(z: Zero) -> float:
    return 0.5 if z.is_real else 1.0


def race_values(s: RaceFunctionSet, x: float, rel_tol: float = 1e-9,
                ) -> Dict[int, float]:
    """P_{q,a}(x; B) for each member, with the half-weight star convention."""
    if x < 2.0:
        raise DomainError(f"x must be >= 2, got {x}")
    phi = unit_group(s.q).phi
    base = s.pi_value(x) / phi
    f_cache: Dict[Zero, complex] = {}
    for _, z, _ in s.system.items():
        if z not in f_cache:
            f_cache[z] = f_rho(z.rho, x, rel_tol)
    out: Dict[int, float] = {}
    for a in s.members:
        total = 0.0j
        for label, z, mult in s.system.items():
            chi_bar = s.system.chars[label].conjugate()
            total += chi_bar(a) * mult * _star_weight(z) * f_cache[z]
        out[a] = base - (2.0 / phi) * total.real
    return out


# --- dominant profiles ------------------------------------------------------------


def _poly_from_complex_terms(terms: Mapping[float, complex]) -> TrigPoly:
    """TrigPoly for u -> sum_gamma Re(c_gamma e^(i gamma u)), gamma > 0."""
    out = []
    for gamma, c in sorted(terms.items()):
        amp = abs(c)
        if amp > 0.0 and gamma > 0.0:
            out.append((amp, gamma, math.atan2(c.imag, c.real) + math.pi / 2))
    return TrigPoly(tuple(out))


@dataclass(frozen=True)
class DominantProfile:
    """The dominant part M of a scaled race difference, as a TrigPoly in
    u = log x, plus its constant term (real zeros) and an explicit residual
    bound: |scaled difference - M(u)| <= residual_bound(x)."""

    q: int
    a: int
    b: int
    beta: float
    poly: TrigPoly
    constant: float
    dominant: DominantData
    _residual_terms: Tuple[Tuple[float, float, float], ...]  # (|g|*w, beta, |rho|)
    _dominant_terms: Tuple[Tuple[float, float, float], ...]

    def __call__(self, u):
        return self.poly(u) + self.constant

    def residual_bound(self, x: float) -> float:
        """Explicit bound on the scaled residual at x (from the main-term
        envelope and the sub-dominant levels)."""
        w = math.log(x)
        scale = w / x**self.beta
        total = 0.0
        env_cache: Dict[float, float] = {}
        for gw, beta, mod in self._dominant_terms:
            env = env_cache.setdefault(beta, envelope_integral(beta, x))
            total += gw * env / mod
        for gw, beta, mod in self._residual_terms:
            env = env_cache.setdefault(beta, envelope_integral(beta, x))
            total += gw * (x**beta / (mod * w) + env / mod)
        return scale * total

    def scaled_difference(self, s: RaceFunctionSet, x: float) -> float:
        """(phi(q) log x / (2 x^beta)) * (P_a - P_b) via the full formula."""
        vals = race_values(s, x)
        phi = unit_group(self.q).phi
        return phi * math.log(x) / (2.0 * x**self.beta) * (vals[self.a] - vals[self.b])


def dominant_profile(s: RaceFunctionSet, a: int, b: int) -> DominantProfile:
    """M_{q,a,b} as a trig polynomial: one term per dominant height with
    amplitude |g(beta+i gamma)| / |beta+i gamma|."""
    dd = dominant_data(s.system, a, b)
    if dd.empty:
        raise EmptyDominantSetError(f"z({a},{b}) is empty")
    beta = dd.beta
    terms: Dict[float, complex] = {}
    constant = 0.0
    for z in dd.zeros:
        g = dd.g_values[z]
        coeff = -g.conjugate() / z.rho * _star_weight(z)
        if z.gamma == 0.0:
            constant += coeff.real
        else:
            terms[z.gamma] = terms.get(z.gamma, 0.0j) + coeff
    dom_terms = []
    res_terms = []
    for zero in s.system.all_zeros():
        g = g_rho_exact(s.system, zero, a, b)
        if g.is_zero():
            continue
        gw = abs(g.to_complex()) * _star_weight(zero)
        rec = (gw, zero.beta, zero.modulus)
        if zero.beta == beta:
            dom_terms.append(rec)
        else:
            res_terms.append(rec)
    return DominantProfile(q=s.q, a=a, b=b, beta=beta,
                           poly=_poly_from_complex_terms(terms),
                           constant=constant, dominant=dd,
                           _residual_terms=tuple(res_terms),
                           _dominant_terms=tuple(dom_terms))


# --- the sigma-line comparison sum ------------------------------------------------


def corollary13_sum(zeros: ZeroSystem, a: int, b: int, u: float) -> float:
    """The double sum approximating u*phi(q)/(2 e^(sigma u)) (pi_a - pi_b)
    for zeros all lying on a common vertical line Re = sigma.

    nu(n) = sin(t u - Arg chi(n) + arctan(sigma/t)), with arctan(sigma/0)
    taken as pi/2; real zeros (t = 0) get half weight.
    """
    sigmas = {z.beta for zs in zeros.entries.values() for z in zs}
    if len(sigmas) > 1:
        raise ValueError(f"zeros must share one real part, got {sorted(sigmas)}")
    if not sigmas:
        return 0.0
    sigma = sigmas.pop()
    chars = zeros.chars
    total = 0.0
    for label, zs in zeros.entries.items():
        chi = chars[label]
        if chi.phase(a) == chi.phase(b):
            continue
        arg_a = 2.0 * math.pi * float(chi.phase(a))
        arg_b = 2.0 * math.pi * float(chi.phase(b))
        for z, mult in zs.items():
            t = z.gamma
            shift = math.atan2(sigma, t) if t > 0 or sigma != 0 else math.pi / 2
            if t == 0.0:
                shift = math.pi / 2
            nu_b = math.sin(t * u - arg_b + shift)
            nu_a = math.sin(t * u - arg_a + shift)
            total += (_star_weight(z) * mult * (nu_b - nu_a)
                      / math.sqrt(t * t + sigma * sigma))
    return total


def angle_shift_bound(sigma: float, t: float) -> float:
    """|sin(v + arctan(sigma/t)) - sin v| <= sigma/t, for truncation accounting."""
    if t <= 0:
        raise ValueError("t must be positive")
    return sigma / t


# --- traces -----------------------------------------------------------------------


def _member_amplitudes(system: ZeroSystem, member: int,
                       ) -> Dict[Zero, complex]:
    """Per-zero complex amplitude of the member's oscillation term:
    sum_chi n(rho, chi) conj(chi)(member) / rho, star-weighted."""
    out: Dict[Zero, complex] = {}
    for label, z, mult in system.items():
        chi_bar = system.chars[label].conjugate()
        c = mult * _star_weight(z) * chi_bar(member) / z.rho
        out[z] = out.get(z, 0.0j) + c
    return out


def dominant_member_values(system: ZeroSystem, members: Sequence[int],
                           u: np.ndarray) -> np.ndarray:
    """Scaled member values in dominant-only mode:

        v_a(u) = -Re sum_(chi,rho) n conj(chi)(a) e^((Re rho - R+) u)
                                               e^(i Im rho u) / rho,

    the u -> infinity limit of phi(q) u/(2 e^(R+ u)) (P_a - pi/phi) with all
    residuals dropped.  Levels below R+ carry exponentially decaying weights,
    so any u is within numeric reach.
    """
    u = np.asarray(u, dtype=float)
    beta_star = system.r_plus
    if beta_star is None:
        return np.zeros((len(members), len(u)))
    rows = []
    for a in members:
        amps = _member_amplitudes(system, a)
        acc = np.zeros_like(u)
        for z, c in amps.items():
            osc = (c * np.exp(1j * z.gamma * u)).real if z.gamma else np.full_like(u, c.real)
            if z.beta != beta_star:
                osc = osc * np.exp((z.beta - beta_star) * u)
            acc += osc
        rows.append(-acc)
    return np.vstack(rows)


def trace(s: RaceFunctionSet, u_range: Tuple[float, float], step: float,
          mode: str = "dominant-only", tie_tol: float = 1e-9,
          rel_tol: float = 1e-7) -> OrderingTrace:
    """Sample scaled member values over a u-grid (x = e^u).

    dominant-only evaluates the exact almost-periodic limit; full-formula
    evaluates P_{q,a}(e^u; B) by quadrature and scales by
    phi(q) u / (2 e^(R+ u)).  The grid includes both endpoints.
    """
    u0, u1 = float(u_range[0]), float(u_range[1])
    if u1 <= u0:
        raise ValueError("u range must be increasing")
    n = max(int(round((u1 - u0) / step)) + 1, 2)
    u = np.linspace(u0, u1, n)
    beta_star = s.system.r_plus
    lattice = s.system.height_lattice
    periodic = False
    period = None
    if lattice:
        period = 2.0 * math.pi / lattice
        periodic = abs((u1 - u0) - period) <= step
    if mode == "dominant-only":
        values = dominant_member_values(s.system, s.members, u)
    elif mode == "full-formula":
        if beta_star is not None and u1 * beta_star > 690.0:
            raise OverflowRiskError(
                "x = e^u exceeds double range; use dominant-only mode")
        if u0 < math.log(2.0):
            raise DomainError("full-formula trace needs e^u >= 2")
        rows = np.zeros((len(s.members), n))
        phi = unit_group(s.q).phi
        for k, uu in enumerate(u):
            x = math.exp(uu)
            vals = race_values(s, x, rel_tol)
            base = s.pi_value(x) / phi
            scale = phi * uu / (2.0 * math.exp((beta_star or 0.0) * uu))
            for i, a in enumerate(s.members):
                rows[i, k] = scale * (vals[a] - base)
        values = rows
    else:
        raise ValueError(f"unknown trace mode {mode!r}")
    return OrderingTrace(u=u, members=tuple(s.members), values=values,
                         tie_tol=tie_tol, periodic=periodic, period=period)


def one_period_trace(s: RaceFunctionSet, samples: int = 4096,
                     base_u: float = 0.0, tie_tol: float = 1e-9,
                     ) -> OrderingTrace:
    """Dominant-only trace over exactly one lattice period."""
    lattice = s.system.height_lattice
    if not lattice:
        raise ValueError("system has no height lattice; supply a u-range")
    period = 2.0 * math.pi / lattice
    u = base_u + np.linspace(0.0, period, samples, endpoint=False)
    values = dominant_member_values(s.system, s.members, u)
    return OrderingTrace(u=u, members=tuple(s.members), values=values,
                         tie_tol=tie_tol, periodic=True, period=period)


# --- theorem-specific decompositions ----------------------------------------------


def _poly_from_g_terms(entries: Mapping[Zero, complex]) -> Tuple[float, TrigPoly]:
    """(constant, TrigPoly) for u -> sum_rho Re(conj(g) e^(i gamma u)/rho),
    with real-rho terms star-halved into the constant."""
    const = 0.0
    terms: Dict[float, complex] = {}
    for z, g in entries.items():
        coeff = g.conjugate() / z.rho * _star_weight(z)
        if z.is_real:
            const += coeff.real
        else:
            terms[z.gamma] = terms.get(z.gamma, 0.0j) + coeff
    return const, _poly_from_complex_terms(terms)


def _kset_weights(system: ZeroSystem, a: int, order: int, beta: float,
                  ) -> Dict[int, Dict[float, int]]:
    """weights[j][gamma] = sum over chi with chi(a) = e(j/order) of
    n(beta + i gamma, chi)."""
    out: Dict[int, Dict[float, int]] = {j: {} for j in range(1, order)}
    for label, z, mult in system.items():
        if z.beta != beta:
            continue
        ph = system.chars[label].phase(a)
        if ph == 0:
            continue
        if ph.denominator and (ph * order).denominator == 1:
            j = int(ph * order) % order
            if j:
                out[j][z.gamma] = out[j].get(z.gamma, 0) + mult
    return out


def _sin_poly(weights: Mapping[float, float], beta: float, scale: float = 1.0,
              phase_shift: bool = True) -> TrigPoly:
    """sum_gamma w(gamma)/sqrt(gamma^2+beta^2) sin(gamma u + atan(beta/gamma))."""
    terms = []
    for gamma, w in sorted(weights.items()):
        if w == 0 or gamma <= 0:
            continue
        amp = scale * w / math.hypot(gamma, beta)
        ph = math.atan2(beta, gamma) if phase_shift else 0.0
        terms.append((amp, gamma, ph))
    return TrigPoly(tuple(terms))


def _cos_poly(weights: Mapping[float, float], beta: float, scale: float = 1.0,
              phase_shift: bool = True) -> TrigPoly:
    terms = []
    for gamma, w in sorted(weights.items()):
        if w == 0 or gamma <= 0:
            continue
        amp = scale * w / math.hypot(gamma, beta)
        ph = (math.atan2(beta, gamma) if phase_shift else 0.0) + math.pi / 2
        terms.append((amp, gamma, ph))
    return TrigPoly(tuple(terms))


def decompose_leading_trailing(system: ZeroSystem, a: int) -> dict:
    """The per-character comparison profiles R_a(u; chi) for the pair (a, 1):
    constant n(beta_a, chi)/(2 beta_a) plus the sine sum over positive
    heights of z(chi; a, 1)."""
    dd = dominant_data(system, a, 1)
    if dd.empty:
        raise EmptyDominantSetError(f"z({a},1) is empty")
    beta = dd.beta
    per_char = {}
    for label, zs in dd.per_char.items():
        const = 0.0
        weights: Dict[float, int] = {}
        for z in zs:
            mult = system.multiplicity(label, z)
            if z.is_real:
                const += mult / (2.0 * beta)
            else:
                weights[z.gamma] = weights.get(z.gamma, 0) + mult
        per_char[label] = {"constant": const,
                           "poly": _sin_poly(weights, beta)}
    return {"beta": beta, "per_char": per_char}


def decompose_order3(system: ZeroSystem, a: int) -> dict:
    """f/g split for a cyclic group {1, a, a^2} of order 3: f carries the
    symmetric weights n(gamma), g the skew weights m(gamma)."""
    group = unit_group(system.q)
    if group.order(a) != 3:
        raise RecipeMismatchError(f"{a} must have order 3 mod {system.q}")
    dd = dominant_data(system, a, 1)
    if dd.empty:
        raise EmptyDominantSetError(f"z({a},1) is empty")
    beta = dd.beta
    ks = _kset_weights(system, a, 3, beta)
    gammas = sorted({g for j in (1, 2) for g in ks[j]})
    n_w = {g: ks[1].get(g, 0) + ks[2].get(g, 0) for g in gammas}
    m_w = {g: ks[2].get(g, 0) - ks[1].get(g, 0) for g in gammas}
    f1 = TrigPoly(tuple((1.5 * n_w[g] * g / (g * g + beta * beta), g, 0.0)
                        for g in gammas if n_w[g]))
    f2 = TrigPoly(tuple((1.5 * n_w[g] * beta / (g * g + beta * beta), g,
                         math.pi / 2) for g in gammas if n_w[g]))
    g1 = TrigPoly(tuple((math.sqrt(3) / 2 * m_w[g] * g / (g * g + beta * beta),
                         g, math.pi / 2) for g in gammas if m_w[g]))
    g2 = TrigPoly(tuple((math.sqrt(3) / 2 * m_w[g] * beta / (g * g + beta * beta),
                         g, 0.0) for g in gammas if m_w[g]))
    return {"beta": beta,
            "f": _sin_poly(n_w, beta, scale=1.5),
            "f1": f1, "f2": f2,
            "g": _cos_poly(m_w, beta, scale=math.sqrt(3) / 2),
            "g1": g1, "g2": g2,
            "n": n_w, "m": m_w}


def decompose_order4(system: ZeroSystem, a1: int) -> dict:
    """f/g/h split for a cyclic group of order 4 generated by a1."""
    group = unit_group(system.q)
    if group.order(a1) != 4:
        raise RecipeMismatchError(f"{a1} must have order 4 mod {system.q}")
    a2 = pow(a1, 2, system.q)
    dd1 = dominant_data(system, a1, 1)
    dd2 = dominant_data(system, a2, 1)
    if dd1.empty or dd2.empty:
        raise EmptyDominantSetError("z(a1,1) and z(a2,1) must be nonempty")
    beta1, beta2 = dd1.beta, dd2.beta
    ks1 = _kset_weights(system, a1, 4, beta1)
    ks2 = _kset_weights(system, a1, 4, beta2)
    z1_heights = {z.gamma for z in dd1.zeros}
    z2_heights = {z.gamma for z in dd2.zeros}
    k1 = {g: ks1[1].get(g, 0) + ks1[3].get(g, 0) for g in z1_heights}
    k2 = {g: ks2[1].get(g, 0) + ks2[3].get(g, 0) for g in z2_heights}
    l_w = {g: ks1[2].get(g, 0) for g in z1_heights}
    m_w = {g: ks1[1].get(g, 0) - ks1[3].get(g, 0) for g in z1_heights}
    f = _sin_poly({g: k1[g] + 2 * l_w[g] for g in z1_heights}, beta1)
    g_poly = _cos_poly(m_w, beta1)
    h = _sin_poly({g: 2 * k2[g] for g in z2_heights}, beta2)
    q_poly = _sin_poly({g: k1[g] + 2 * l_w[g] for g in z1_heights}, beta1,
                       phase_shift=False)
    p_poly = _cos_poly(m_w, beta1, phase_shift=False)
    r_poly = _sin_poly({g: 2 * l_w[g] for g in z1_heights}, beta1,
                       phase_shift=False)
    return {"beta1": beta1, "beta2": beta2,
            "f": f, "g": g_poly, "h": h,
            "Q": q_poly, "P": p_poly, "R": r_poly,
            "k1": k1, "k2": k2, "l": l_w, "m": m_w}


def decompose_order3_extremal(system: ZeroSystem, a: int) -> dict:
    """The two comparison profiles for the order-3 extremal question:
    h from the pair (a, a^2) (purely imaginary g) and h1 from comparing 1
    against the average of a and a^2 (real g1)."""
    group = unit_group(system.q)
    if group.order(a) != 3:
        raise RecipeMismatchError(f"{a} must have order 3 mod {system.q}")
    a2 = pow(a, 2, system.q)
    dd = dominant_data(system, a, a2)
    if dd.empty:
        raise EmptyDominantSetError(f"z({a},{a2}) is empty")
    h_const, h_poly = _poly_from_g_terms(dd.g_values)

    # g1(rho) = sum_chi n(rho,chi) (1 - (chi(a)+chi(a^2))/2); exact zero test
    # via the doubled integer combination.
    from .residues import RootOfUnitySum
    live: Dict[Zero, complex] = {}
    for zero in system.all_zeros():
        s2 = RootOfUnitySum()
        for label, zs in system.entries.items():
            mult = zs.get(zero, 0)
            if mult:
                chi = system.chars[label]
                s2.add(0, 2 * mult)
                s2.add(chi.phase(a), -mult)
                s2.add(chi.phase(a2), -mult)
        if not s2.is_zero():
            live[zero] = s2.to_complex() / 2.0
    if not live:
        raise EmptyDominantSetError("g1 vanishes identically")
    beta1 = max(z.beta for z in live)
    r1 = {z: g for z, g in live.items() if z.beta == beta1}
    h1_const, h1_poly = _poly_from_g_terms(r1)
    return {"beta": dd.beta, "beta1": beta1,
            "h": h_poly, "h_constant": h_const,
            "h1": h1_poly, "h1_constant": h1_const}


def decompose_power_lattice(system: ZeroSystem, a: int, n: int, gamma: float,
                            chi_label: int) -> dict:
    """G_r(v) = sum_{j,k} m_{j,k}/k sin(k v + 2 pi j r / n) read off a system
    whose zeros sit at heights k*gamma on powers chi^j of one character."""
    chars = system.chars
    chi = chars[chi_label]
    power_label = {}
    for j in range(1, n):
        power_label[chars.index(chi**j)] = j
    m: Dict[Tuple[int, int], int] = {}
    for label, z, mult in system.items():
        if label not in power_label:
            raise RecipeMismatchError("zero on a character outside the chi-power family")
        k = z.gamma / gamma
        if abs(k - round(k)) > 1e-9 or round(k) < 1:
            raise RecipeMismatchError("height off the k*gamma lattice")
        m[(power_label[label], int(round(k)))] = (
            m.get((power_label[label], int(round(k))), 0) + mult)

    def G(r: int) -> TrigPoly:
        parts: Dict[float, complex] = {}
        for (j, k), mult in m.items():
            # (m/k) sin(kv + 2 pi j r/n) as a phasor at frequency k
            ph = 2.0 * math.pi * j * r / n
            parts[float(k)] = parts.get(float(k), 0j) + (
                mult / k) * cmath.exp(1j * ph)
        terms = []
        for k, z in sorted(parts.items()):
            if abs(z) > 0:
                terms.append((abs(z), k, math.atan2(z.imag, z.real)))
        return TrigPoly(tuple(terms))

    return {"m": m, "G": {r: G(r) for r in range(n)}, "n": n, "gamma": gamma}


def decompose_two_generator_lattice(system: ZeroSystem, gamma: float,
                                    chi1_label: int, chi2_label: int) -> dict:
    """G_{r,s}(v) = sum m_{j,k,l}/l sin(l v + (pi/2) r j + pi s k) for a
    system on the characters chi1^j chi2^k (chi1 order 4, chi2 order 2)."""
    chars = system.chars
    chi1, chi2 = chars[chi1_label], chars[chi2_label]
    jk_label = {}
    for j in range(4):
        for k in range(2):
            if (j, k) != (0, 0):
                jk_label[chars.index((chi1**j) * (chi2**k))] = (j, k)
    m: Dict[Tuple[int, int, int], int] = {}
    for label, z, mult in system.items():
        if label not in jk_label:
            raise RecipeMismatchError("zero outside the chi1^j chi2^k family")
        l = z.gamma / gamma
        if abs(l - round(l)) > 1e-9 or round(l) < 1:
            raise RecipeMismatchError("height off the l*gamma lattice")
        j, k = jk_label[label]
        key = (j, k, int(round(l)))
        m[key] = m.get(key, 0) + mult

    def G(r: int, s: int) -> TrigPoly:
        parts: Dict[float, complex] = {}
        for (j, k, l), mult in m.items():
            ph = math.pi / 2 * r * j + math.pi * s * k
            parts[float(l)] = parts.get(float(l), 0j) + (
                mult / l) * cmath.exp(1j * ph)
        terms = []
        for l, z in sorted(parts.items()):
            if abs(z) > 0:
                terms.append((abs(z), l, math.atan2(z.imag, z.real)))
        return TrigPoly(tuple(terms))

    return {"m": m,
            "G": {(r, s): G(r, s) for r in range(4) for s in range(2)},
            "gamma": gamma}


def decompose_level_waves(system: ZeroSystem, char_labels: Sequence[int],
                          betas: Sequence[float], orders: Sequence[int],
                          gamma: float) -> dict:
    """The level waves w_{j,alpha}(u) = sum_k c_{j,k}/sqrt(k^2 g^2 + b_j^2)
    sin(k g u + 2 pi k alpha/n_j + atan(b_j/(k g))) of a layered system with
    zeros at beta_j + i k gamma on chi_j^k."""
    chars = system.chars
    waves: Dict[Tuple[int, int], TrigPoly] = {}
    coeffs: Dict[Tuple[int, int], int] = {}
    for j, (label, beta, n_j) in enumerate(zip(char_labels, betas, orders),
                                           start=1):
        chi = chars[label]
        for k in (1, 2):
            lab_k = chars.index(chi**k)
            c = 0
            for z, mult in system.zeros_of(lab_k).items():
                if z.beta == beta and abs(z.gamma - k * gamma) < 1e-9:
                    c += mult
            coeffs[(j, k)] = c
        if coeffs[(j, 1)] == 0 and coeffs[(j, 2)] == 0:
            raise RecipeMismatchError(f"level {j} carries no zeros")
        for alpha in range(n_j):
            terms = []
            for k in (1, 2):
                c = coeffs[(j, k)]
                if c:
                    amp = c / math.hypot(k * gamma, beta)
                    ph = (2.0 * math.pi * k * alpha / n_j
                          + math.atan2(beta, k * gamma))
                    terms.append((amp, k * gamma, ph))
            waves[(j, alpha)] = TrigPoly(tuple(terms))
    return {"w": waves, "c": coeffs, "gamma": gamma,
            "betas": tuple(betas), "orders": tuple(orders)}


_DECOMPOSERS = {
    "thm31": lambda sys_, p: decompose_leading_trailing(sys_, p["a"]),
    "thm34": lambda sys_, p: decompose_order3(sys_, p["a"]),
    "thm39": lambda sys_, p: decompose_order4(sys_, p["a1"]),
    "thm47": lambda sys_, p: decompose_order3_extremal(sys_, p["a"]),
    "thm311": lambda sys_, p: (
        decompose_two_generator_lattice(sys_, p["gamma"], p["chi1"], p["chi2"])
        if p.get("subcase") == "z4z2"
        else decompose_power_lattice(sys_, p["a"], p["n"], p["gamma"], p["chi"])),
    "thm43": lambda sys_, p: decompose_power_lattice(
        sys_, p["a"], p["r"], p["gamma"], p["chi"]),
    "thm51": lambda sys_, p: decompose_level_waves(
        sys_, p["chars"], p["betas"], p["orders"], p["gamma"]),
}


def theorem_decomposition(system: ZeroSystem, case: str, params: dict) -> dict:
    """Named component functions (TrigPolys and weights) for the supported
    barrier analyses; raises RecipeMismatchError when the system's support
    does not fit the requested shape."""
    try:
        fn = _DECOMPOSERS[case]
    except KeyError:
        raise ValueError(f"unknown decomposition case {case!r}") from None
    return fn(system, params)
