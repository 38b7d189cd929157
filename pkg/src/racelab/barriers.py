"""Concrete barrier constructions and their numeric verification.

Three families are built here:

* a three-residue barrier from a size-20/34/16 lattice of zeros on powers of
  one character (the group-structure trichotomy: even cyclic order with odd
  part >= 3, order 8, and Z4 x Z2);
* extremal barriers capping the ordering census of a chosen set D inside a
  cyclic subgroup at |D|(|D|-1)/2 + 1, built from a crossing-pattern system
  of piecewise-linear functions, its Fourier approximation, a per-frequency
  linear solve, and integerized multiplicities;
* a layered system (one level per group generator) bounding the census of
  any r members by r(r-1), verified through the level-wave conditions
  (A)-(D).

All verification scans are Lipschitz-certified grids with local refinement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .residues import (DirichletCharacter, character_with_value, characters,
                       unit_group)
from .simulator import dominant_member_values, theorem_decomposition
from .trigpoly import (ScanReport, TrigPoly, certified_positive_scan, eps1,
                       eps2)
from .zerosys import Zero, ZeroSystem, dominant_data


class ExcludedModulusError(ValueError):
    pass


class OmegaConstructionError(RuntimeError):
    """Crossing abscissae kept colliding; construction gave up."""


class OmegaTypeLostError(RuntimeError):
    """The truncation/integerization budget was exhausted before the
    candidate system reproduced the reference crossing pattern."""


class ConditionFailedError(RuntimeError):
    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        super().__init__(f"condition ({condition}) failed{': ' + detail if detail else ''}")


SIN_WEIGHTS = {2: 1, 3: 2, 4: 3, 5: 4, 6: 3, 7: 2}


def qpr_polys() -> Tuple[TrigPoly, TrigPoly, TrigPoly]:
    """The fixed trio: Q = 2 sin v + sin(6v)/2, P = 2 cos v - cos(6v)/2,
    R = sum_{k=2}^{7} (p_k/k) sin(kv) with p = (1,2,3,4,3,2)."""
    q = TrigPoly.sine([2.0, 0.5], [1.0, 6.0])
    p = TrigPoly.cosine([2.0, -0.5], [1.0, 6.0])
    r = TrigPoly.sine([w / k for k, w in sorted(SIN_WEIGHTS.items())],
                      [float(k) for k in sorted(SIN_WEIGHTS)])
    return q, p, r


@dataclass(frozen=True)
class PropertyScan:
    """Certified margins for the sign properties of the Q/P/R trio."""

    p_dominates: Tuple[ScanReport, ...]   # |P| - sqrt(3) Q > 0 pieces
    r_negative: ScanReport                # -R > 0 on the stated interval
    ok: bool

    @property
    def min_margin_p(self) -> float:
        return min(s.min_value for s in self.p_dominates)

    @property
    def min_margin_r(self) -> float:
        return self.r_negative.min_value


def scan_qpr_properties(step: float = 1e-4,
                        r_interval: Tuple[float, float] = (0.758, math.pi - 1e-6),
                        ) -> PropertyScan:
    """Certified grid scan of |P(v)| > sqrt(3) Q(v) on [0, 0.759] u [2.7, 2pi]
    and R(v) < 0 on r_interval."""
    q, p, r = qpr_polys()
    lip_pq = p.lipschitz_bound + math.sqrt(3.0) * q.lipschitz_bound

    def margin(v: np.ndarray) -> np.ndarray:
        return np.abs(p(v)) - math.sqrt(3.0) * q(v)

    pieces = (certified_positive_scan(margin, lip_pq, 0.0, 0.759, step),
              certified_positive_scan(margin, lip_pq, 2.7, 2 * math.pi, step))
    neg_r = certified_positive_scan(lambda v: -r(v), r.lipschitz_bound,
                                    r_interval[0], r_interval[1], step)
    ok = all(s.ok for s in pieces) and neg_r.ok
    return PropertyScan(p_dominates=pieces, r_negative=neg_r, ok=ok)


# --- recipes -------------------------------------------------------------------


@dataclass
class BarrierRecipe:
    """A named construction, its parameters, and the zero system it emits."""

    kind: str
    q: int
    params: dict
    system: ZeroSystem
    claim: str

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "q": self.q, "claim": self.claim,
                           "params": self.params,
                           "system": self.system.to_dict()},
                          indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "BarrierRecipe":
        d = json.loads(text)
        return cls(kind=d["kind"], q=d["q"], params=d["params"],
                   system=ZeroSystem.from_dict(d["system"]), claim=d["claim"])


# --- the three-residue lattice barrier -------------------------------------------


def _pick_structure(q: int) -> dict:
    """Choose the applicable group-structure case for the modulus."""
    group = unit_group(q)
    orders = {a: group.order(a) for a in group.units}
    # even order >= 6 with odd part >= 3, smallest such order
    cyclic = sorted(n for n in set(orders.values())
                    if n >= 6 and n % 2 == 0 and (n & (n - 1)) != 0)
    if cyclic:
        n = cyclic[0]
        a = min(u for u, o in orders.items() if o == n)
        return {"case": "even_cyclic", "a": a, "n": n}
    if any(o == 8 for o in orders.values()):
        a = min(u for u, o in orders.items() if o == 8)
        return {"case": "n8", "a": a, "n": 8}
    # Z4 x Z2: order-4 element plus an involution outside its span
    quads = sorted(u for u, o in orders.items() if o == 4)
    for a in quads:
        span = set(group.subgroup(a))
        invs = sorted(u for u, o in orders.items() if o == 2 and u not in span)
        if invs:
            return {"case": "z4z2", "a": a, "b": invs[0]}
    raise RuntimeError(f"no suitable subgroup found for q={q} "
                       "(internal check; admissible moduli always have one)")


def build_thm311(q: int, tau: float = 0.0, beta: float = 0.75,
                 gamma: float | None = None) -> BarrierRecipe:
    """Emit the bounded three-residue barrier for an admissible modulus.

    Every admissible q (q >= 7, q not in {8, 10, 12, 24}) supports one of
    three lattice constructions of size 20, 34 or 16; all heights are
    multiples of gamma > tau.
    """
    if q < 7 or q in (8, 10, 12, 24):
        raise ExcludedModulusError(f"q={q} admits no such barrier")
    if not 0.5 < beta < 1.0:
        raise ValueError("beta must lie in (1/2, 1)")
    gamma = gamma if gamma is not None else max(tau + 1.0, 100.0)
    if gamma <= tau:
        raise ValueError("gamma must exceed tau")
    structure = _pick_structure(q)
    chars = characters(q)
    entries: Dict[int, Dict[Zero, int]] = {}

    def put(label: int, k: int, mult: int) -> None:
        ch = entries.setdefault(label, {})
        z = Zero(beta, k * gamma)
        ch[z] = ch.get(z, 0) + mult

    case = structure["case"]
    if case in ("even_cyclic", "n8"):
        a, n = structure["a"], structure["n"]
        chi = character_with_value(q, a, Fraction(-1, n))
        chi_label = chars.index(chi)
        labels = {j: chars.index(chi**j) for j in range(1, n)}
        if case == "even_cyclic":
            h = n
            d = 0
            while h % 2 == 0:
                h //= 2
                d += 1
            # s must be a multiple of 2^d (so the weight-h carrier cancels)
            # with |tan(2 pi s / (2^d h))| <= sqrt(3); s = 2^d (h-1)/2 gives
            # slope tan(pi/h), which works for every odd h (s = 2^d alone
            # fails at h = 5, where tan(2 pi/5) > sqrt(3))
            s = 2**d * ((h - 1) // 2)
            mults = {(2, 6): 3, ((2 * h - 2) % n, 1): 2}
            for k, w in SIN_WEIGHTS.items():
                mults[(h, k)] = mults.get((h, k), 0) + w
            designated = sorted({s, n - s, n // 2})
            params = {"case": case, "a": a, "n": n, "h": h, "d": d, "s": s,
                      "chi": chi_label, "beta": beta, "gamma": gamma,
                      "designated": designated}
        else:
            s = 3
            mults = {(2, 1): 4}
            for k, w in SIN_WEIGHTS.items():
                mults[(3, k)] = w
                mults[(5, k)] = w
            designated = [3, 4, 5]
            params = {"case": case, "a": a, "n": n, "s": s, "chi": chi_label,
                      "beta": beta, "gamma": gamma, "designated": designated}
        for (j, k), w in mults.items():
            put(labels[j], k, w)
        d_set = [pow(a, r, q) for r in designated]
    else:
        a, b = structure["a"], structure["b"]
        chi1 = _z4z2_chi1(q, a, b)
        chi2 = _z4z2_chi2(q, a, b)
        chi1_label, chi2_label = chars.index(chi1), chars.index(chi2)
        put(chi1_label, 1, 1)
        for l, w in SIN_WEIGHTS.items():
            put(chi2_label, l, w)
        designated = [(1, 0), (3, 0), (0, 1)]
        params = {"case": "z4z2", "a": a, "b": b, "chi1": chi1_label,
                  "chi2": chi2_label, "beta": beta, "gamma": gamma,
                  "designated": [list(t) for t in designated],
                  "subcase": "z4z2"}
        d_set = [a, pow(a, 3, q), b]
    system = ZeroSystem(q, entries, height_lattice=gamma)
    params["D"] = d_set
    params["size"] = system.size
    return BarrierRecipe(kind=f"thm311_{case}", q=q, params=params,
                         system=system,
                         claim="player-1 neither trails nor leads all of D")


def _z4z2_chi1(q: int, a: int, b: int) -> DirichletCharacter:
    for c in characters(q):
        if c.phase(a) == Fraction(3, 4) and c.phase(b) == 0:
            return c
    raise RuntimeError("no order-4 character separating the Z4 factor")


def _z4z2_chi2(q: int, a: int, b: int) -> DirichletCharacter:
    for c in characters(q):
        if c.phase(a) == 0 and c.phase(b) == Fraction(1, 2):
            return c
    raise RuntimeError("no order-2 character separating the Z2 factor")


@dataclass(frozen=True)
class Thm311Report:
    case: str
    size: int
    scan: ScanReport
    identity_errors: Dict[str, float]
    ok: bool
    offending_v: float | None = None


def verify_thm311(recipe: BarrierRecipe, step: float = 1e-3,
                  identity_tol: float = 1e-12) -> Thm311Report:
    """Certified check that at every v in [0, 2pi) some designated difference
    G_0 - G_r (resp. G_00 - G_rs) is negative, plus the closed-form case
    identities."""
    if not recipe.kind.startswith("thm311"):
        raise ValueError("recipe is not a three-residue lattice barrier")
    params = recipe.params
    case = params["case"]
    decomp = theorem_decomposition(recipe.system, "thm311", params)
    G = decomp["G"]
    q_poly, p_poly, r_poly = qpr_polys()
    grid = np.linspace(0.0, 2 * math.pi, 4096)
    identity_errors: Dict[str, float] = {}

    if case == "even_cyclic":
        n, h, s = params["n"], params["h"], params["s"]
        designated = params["designated"]
        c = 4.0 * math.pi * s / n  # the weight-6 carrier's phase at r = s
        forms = {
            s: lambda v: (1 - math.cos(c)) * q_poly(v) + math.sin(c) * p_poly(v),
            n - s: lambda v: (1 - math.cos(c)) * q_poly(v) - math.sin(c) * p_poly(v),
            n // 2: lambda v: 2.0 * r_poly(v),
        }
        for r in sorted(set(designated)):
            diff = G[0](grid) - G[r](grid)
            identity_errors[f"G0-G{r}"] = float(
                np.max(np.abs(diff - forms[r](grid))))
        polys = [(G[0], G[r]) for r in designated]
    elif case == "n8":
        designated = params["designated"]
        forms = [lambda v: 4 * (np.sin(v) + np.cos(v)) + (2 - math.sqrt(2)) * r_poly(v),
                 lambda v: 4 * (np.sin(v) - np.cos(v)) + (2 - math.sqrt(2)) * r_poly(v)]
        for r in (3, 5):
            diff = G[0](grid) - G[r](grid)
            err = min(float(np.max(np.abs(diff - f(grid)))) for f in forms)
            identity_errors[f"G0-G{r}"] = err
        identity_errors["G0-G4"] = float(
            np.max(np.abs(G[0](grid) - G[4](grid) - 4.0 * r_poly(grid))))
        polys = [(G[0], G[r]) for r in designated]
    else:
        designated = [tuple(t) for t in params["designated"]]
        closed = {(1, 0): lambda v: np.sin(v) - np.cos(v),
                  (3, 0): lambda v: np.sin(v) + np.cos(v),
                  (0, 1): lambda v: 2.0 * r_poly(v)}
        for rs in designated:
            diff = G[(0, 0)](grid) - G[rs](grid)
            identity_errors[f"G00-G{rs[0]}{rs[1]}"] = float(
                np.max(np.abs(diff - closed[rs](grid))))
        polys = [(G[(0, 0)], G[rs]) for rs in designated]

    lips = [g0.lipschitz_bound + gr.lipschitz_bound for g0, gr in polys]

    def objective(v: np.ndarray) -> np.ndarray:
        # certify: max over designated r of (G_r - G_0) stays positive
        return np.max(np.vstack([gr(v) - g0(v) for g0, gr in polys]), axis=0)

    scan = certified_positive_scan(objective, max(lips), 0.0, 2 * math.pi, step)
    ok = scan.ok and all(e <= identity_tol for e in identity_errors.values())
    return Thm311Report(case=case, size=recipe.system.size, scan=scan,
                        identity_errors=identity_errors, ok=ok,
                        offending_v=scan.failure_point)


# --- the per-frequency linear solve ------------------------------------------------


def solve_lemma44(r: int, c: Sequence[float], d: Sequence[float],
                  residual_tol: float = 1e-10) -> np.ndarray:
    """Solve sum_j nu_j sin(u + 2 pi j v / r) = c_v sin u + d_v cos u.

    Requires the compatibility symmetries c_v = c_{r-v}, d_0 = 0,
    d_v = -d_{r-v}.  The system splits into a cosine half and a sine half,
    each uniquely solvable; the recombined nu is verified on samples.
    """
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    if len(c) != r or len(d) != r:
        raise ValueError("c and d must have length r")
    for v in range(1, r):
        if abs(c[v] - c[r - v]) > 1e-12:
            raise ValueError("need c_v = c_{r-v}")
        if abs(d[v] + d[r - v]) > 1e-12:
            raise ValueError("need d_v = -d_{r-v}")
    if abs(d[0]) > 1e-12:
        raise ValueError("need d_0 = 0")

    half = r // 2
    vs = np.arange(half + 1)
    js = np.arange(half + 1)
    a_cos = np.cos(2 * math.pi * np.outer(vs, js) / r)
    try:
        mu = np.linalg.solve(a_cos, c[: half + 1])
    except np.linalg.LinAlgError as exc:  # the proof rules this out
        raise RuntimeError(f"cosine system unexpectedly singular: {exc}")

    half_s = (r - 1) // 2
    lam = np.zeros(half_s + 1)
    if half_s >= 1:
        vs = np.arange(1, half_s + 1)
        js = np.arange(1, half_s + 1)
        a_sin = np.sin(2 * math.pi * np.outer(vs, js) / r)
        try:
            lam[1:] = np.linalg.solve(a_sin, d[1: half_s + 1])
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"sine system unexpectedly singular: {exc}")

    nu = np.zeros(r)
    nu[0] = mu[0]
    if r % 2 == 0:
        nu[half] = mu[half]
    for j in range(1, (r + 1) // 2):
        nu[j] = (mu[j] + lam[j]) / 2.0
        nu[r - j] = (mu[j] - lam[j]) / 2.0

    rng = np.random.default_rng(12345)
    us = rng.uniform(0, 2 * math.pi, 16)
    for v in range(r):
        lhs = sum(nu[j] * np.sin(us + 2 * math.pi * j * v / r) for j in range(r))
        rhs = c[v] * np.sin(us) + d[v] * np.cos(us)
        if np.max(np.abs(lhs - rhs)) > residual_tol:
            raise RuntimeError("solution residual exceeded tolerance "
                               "(internal check)")
    return nu


# --- crossing-pattern systems -------------------------------------------------------


@dataclass
class OmegaSystem:
    """A family of even 2pi-periodic zero-mean piecewise-linear functions
    indexed by V, pairwise crossing exactly once on [0, pi] at distinct
    abscissae.  Functions are flat left of their corner and rise with slope
    one up to pi; the member at r/2 (its own inverse) is identically zero."""

    r: int
    V: Tuple[int, ...]
    corners: Dict[int, float]        # v -> corner abscissa (absent for r/2)
    crossings: Dict[Tuple[int, int], float]

    def level(self, v: int) -> float:
        theta = self.corners[v]
        return -((math.pi - theta) ** 2) / (2.0 * math.pi)

    def value(self, v: int, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if v not in self.corners:
            return np.zeros_like(u)
        theta = self.corners[v]
        c = self.level(v)
        w = np.abs((u + math.pi) % (2 * math.pi) - math.pi)  # fold to [0, pi]
        return np.where(w <= theta, c, c + (w - theta))

    def values(self, u) -> np.ndarray:
        return np.vstack([self.value(v, u) for v in self.V])

    def crossing_points(self) -> List[float]:
        return sorted(self.crossings.values())


def build_omega(r: int, V: Sequence[int], seed: int = 0,
                min_gap: float = 5e-3, max_tries: int = 64) -> OmegaSystem:
    """Corner abscissae in general position; collisions between crossing
    points are detected and perturbed away (seeded, deterministic)."""
    V = tuple(sorted(V))
    movable = [v for v in V if 2 * v != r]
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        base = np.linspace(0.35 * math.pi, 0.75 * math.pi, len(movable))
        jitter = rng.uniform(-0.05, 0.05, len(movable)) * math.pi / max(len(movable), 1)
        corners = {v: float(t + j) for v, t, j in zip(movable, base, jitter)}
        omega = OmegaSystem(r=r, V=V, corners=corners, crossings={})
        crossings: Dict[Tuple[int, int], float] = {}
        ok = True
        for i, v in enumerate(V):
            for w in V[i + 1:]:
                crossings[(v, w)] = _omega_crossing(omega, v, w)
        pts = sorted(crossings.values())
        if any(b - a < min_gap for a, b in zip(pts, pts[1:])):
            ok = False
        if pts and (pts[0] < min_gap or pts[-1] > math.pi - min_gap):
            ok = False
        if ok:
            omega.crossings = crossings
            return omega
    raise OmegaConstructionError(
        f"could not separate crossing points after {max_tries} tries")


def _omega_crossing(omega: OmegaSystem, v: int, w: int) -> float:
    zero_v = v not in omega.corners
    zero_w = w not in omega.corners
    if zero_v and zero_w:
        raise OmegaConstructionError("two identically-zero members")
    if zero_v or zero_w:
        x = w if zero_v else v
        theta = omega.corners[x]
        return theta - omega.level(x)
    tv, tw = omega.corners[v], omega.corners[w]
    if tv > tw:
        tv, tw = tw, tv
        v, w = w, v
    cv = -((math.pi - tv) ** 2) / (2 * math.pi)
    cw = -((math.pi - tw) ** 2) / (2 * math.pi)
    return tv + (cw - cv)


def fourier_cosine_coeffs(omega: OmegaSystem, v: int, K: int) -> np.ndarray:
    """b_{k,v} (k = 1..K) of the even zero-mean member v:
    b_k = (2/(pi k^2)) ((-1)^k - cos(k theta_v))."""
    if v not in omega.corners:
        return np.zeros(K)
    theta = omega.corners[v]
    k = np.arange(1, K + 1, dtype=float)
    return 2.0 / (math.pi * k * k) * ((-1.0) ** k - np.cos(k * theta))


@dataclass(frozen=True)
class OmegaTypeReport:
    ok: bool
    first_violation: float | None = None
    intervals_checked: int = 0


def check_omega_type(candidate: np.ndarray, w_grid: np.ndarray,
                     omega: OmegaSystem, tie_tol: float = 0.0) -> OmegaTypeReport:
    """Does the candidate family (rows indexed like omega.V, sampled on one
    period w_grid in [0, 2pi)) follow the reference crossing pattern?

    Between midpoints of consecutive reference crossing points, every sample's
    ordering must match the reference ordering at one of the two midpoints;
    tied samples pass if any strict expansion matches.
    """
    pts = omega.crossing_points()
    pts = sorted(pts + [2 * math.pi - p for p in pts])
    mids = [(a + b) / 2.0 for a, b in zip(pts, pts[1:])]
    wrap_mid = ((pts[-1] + pts[0] + 2 * math.pi) / 2.0) % (2 * math.pi)
    mids = sorted(mids + [wrap_mid])

    def ordering_at(u_val: float) -> Tuple[int, ...]:
        vals = omega.values(np.array([u_val]))[:, 0]
        return tuple(np.argsort(-vals))

    ref = [ordering_at(m) for m in mids]
    n_mid = len(mids)
    checked = 0
    for col in range(candidate.shape[1]):
        u = float(w_grid[col]) % (2 * math.pi)
        # locate the mid-interval containing u (cyclic)
        idx = np.searchsorted(mids, u) - 1
        lo = ref[idx % n_mid]
        hi = ref[(idx + 1) % n_mid]
        vals = candidate[:, col]
        order = tuple(np.argsort(-vals))
        sorted_vals = vals[list(order)]
        strict = np.all(np.diff(sorted_vals) < -tie_tol)
        if strict:
            if order != lo and order != hi:
                return OmegaTypeReport(False, first_violation=u,
                                       intervals_checked=checked)
        else:
            if not (_compatible(vals, lo, tie_tol) or _compatible(vals, hi, tie_tol)):
                return OmegaTypeReport(False, first_violation=u,
                                       intervals_checked=checked)
        checked += 1
    return OmegaTypeReport(True, intervals_checked=checked)


def _compatible(vals: np.ndarray, perm: Tuple[int, ...], tol: float) -> bool:
    """Is perm an admissible ordering of vals when ties within tol split?"""
    return all(vals[perm[i]] >= vals[perm[i + 1]] - tol
               for i in range(len(perm) - 1))


def build_extremal(q: int, generator: int, D: Sequence[int],
                   beta1: float = 0.75, gamma: float = 1000.0,
                   K: int = 16, N: int = 64, seed: int = 0,
                   max_escalations: int = 5) -> BarrierRecipe:
    """Emit a bounded extremal barrier for D inside the cyclic subgroup
    generated by `generator` (order r >= 6).

    Pipeline: build the crossing-pattern system, Fourier-approximate each
    member (escalating K until the truncations follow the pattern), solve the
    per-frequency linear system for real multiplicity densities, integerize
    at resolution N (escalating until the pattern survives), shift to
    nonnegative integers and emit zeros at beta1 + i k gamma on the powers of
    a character pinned at the generator.
    """
    group = unit_group(q)
    r = group.order(generator)
    if r < 6:
        raise ValueError(f"subgroup order must be >= 6, got {r}")
    if not 0.5 < beta1 < 1.0:
        raise ValueError("beta1 must lie in (1/2, 1)")
    subgroup = group.subgroup(generator)
    power = {a: i for i, a in enumerate(subgroup)}
    V: List[int] = []
    for a in D:
        a %= q
        if a not in power:
            raise ValueError(f"{a} is outside the subgroup of {generator}")
        V.append(power[a])
    V = sorted(V)
    if 0 in V:
        raise ValueError("1 may not belong to D")
    for v in V:
        if v != r - v and (r - v) in V:
            raise ValueError("D may not contain an inverse pair")

    omega = build_omega(r, V, seed=seed)
    w_grid = np.linspace(0.0, 2 * math.pi, 4096, endpoint=False)

    # stage 1: truncation order (targets are the sign-flipped members, so the
    # emitted race traces come out ordered like the reference pattern)
    K_use = K
    for _ in range(max_escalations):
        b = {v: -fourier_cosine_coeffs(omega, v, K_use) for v in V}
        cand = np.vstack([
            -sum(b[v][k - 1] * np.cos(k * w_grid) for k in range(1, K_use + 1))
            for v in V])
        if check_omega_type(cand, w_grid, omega).ok:
            break
        K_use *= 2
    else:
        raise OmegaTypeLostError("K escalation exhausted; raise K")

    # stage 2: per-frequency solve with the antisymmetric completion
    nu = np.zeros((K_use, r))
    for k in range(1, K_use + 1):
        d_vec = np.zeros(r)
        for v in V:
            d_vec[v] = b[v][k - 1]
            if v != 0 and (r - v) != v:
                d_vec[r - v] = -b[v][k - 1]
        nu[k - 1] = solve_lemma44(r, np.zeros(r), d_vec)

    # stage 3: integerization resolution
    N_use = N
    for _ in range(max_escalations):
        n_tilde = np.array([[k * math.floor(N_use * nu[k - 1, j])
                             for j in range(r)] for k in range(1, K_use + 1)],
                           dtype=np.int64)
        cand = np.vstack([
            sum(n_tilde[k - 1, j] / (k * N_use)
                * np.sin(k * w_grid + 2 * math.pi * j * v / r)
                for k in range(1, K_use + 1) for j in range(r))
            for v in V])
        # candidate tracks -f_v; flip for the pattern comparison
        if check_omega_type(-cand, w_grid, omega).ok:
            break
        N_use *= 2
    else:
        raise OmegaTypeLostError("N escalation exhausted; raise N")

    shift = int(n_tilde[:, 1:].min())
    n_final = n_tilde[:, 1:] - shift  # drop j=0: a common-mode term

    chi = character_with_value(q, generator, Fraction(-1, r))
    chars = characters(q)
    entries: Dict[int, Dict[Zero, int]] = {}
    for j in range(1, r):
        label = chars.index(chi**j)
        for k in range(1, K_use + 1):
            mult = int(n_final[k - 1, j - 1])
            if mult > 0:
                ch = entries.setdefault(label, {})
                z = Zero(beta1, k * gamma)
                ch[z] = ch.get(z, 0) + mult
    system = ZeroSystem(q, entries, height_lattice=gamma)

    members = [subgroup[v] for v in V]
    trace_vals = dominant_member_values(system, members,
                                        w_grid / gamma)
    final = check_omega_type(trace_vals, w_grid, omega)
    if not final.ok:
        raise OmegaTypeLostError(
            "emitted dominant trace lost the pattern; raise gamma or N")

    params = {"a1": generator, "r": r, "V": V, "D": members, "beta1": beta1,
              "gamma": gamma, "K": K_use, "N": N_use, "seed": seed,
              "chi": chars.index(chi), "size": system.size,
              "corners": {str(v): omega.corners[v] for v in omega.corners},
              "a": generator}
    return BarrierRecipe(kind="thm43_extremal", q=q, params=params,
                         system=system,
                         claim=f"census of D capped at {len(V)*(len(V)-1)//2 + 1}")


# --- the layered census barrier ------------------------------------------------------


@dataclass
class WSystem:
    """Level waves of a layered system: per level j its exponent beta_j, the
    generator order n_j, the two coefficients, the crossing points theta of
    each pair of phases, and the condition margins."""

    betas: Tuple[float, ...]
    orders: Tuple[int, ...]
    gamma: float
    M: int
    theta: Dict[Tuple[int, int, int], Tuple[float, float]]
    margins: Dict[str, float]


def _wave_crossings(w1: TrigPoly, w2: TrigPoly, period: float,
                    samples: int = 1 << 14) -> List[Tuple[float, float]]:
    """(root, bracket width) of each zero of w1 - w2 on [0, period).

    Within one pair the two roots sit about half a period apart, so a grid of
    this density cannot merge them; the bisection then localizes each root to
    machine scale, which is what the distinctness condition compares against
    (crossings of different pairs can be separated by as little as
    beta/gamma^2)."""
    u = np.linspace(0.0, period, samples, endpoint=False)
    diff = w1(u) - w2(u)
    roots: List[Tuple[float, float]] = []
    for i in range(samples):
        a = u[i]
        b = u[i + 1] if i + 1 < samples else period
        fa = diff[i]
        fb = diff[(i + 1) % samples]
        if fa == 0.0:
            roots.append((float(a), 0.0))
            continue
        if (fa > 0) != (fb > 0):
            lo, hi, flo = float(a), float(b), float(fa)
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if mid == lo or mid == hi:
                    break
                fm = float(w1(mid) - w2(mid))
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append((0.5 * (lo + hi), hi - lo))
    return roots


def build_thm51(q: int, tau: float = 0.0, M: int = 64,
                gamma: float | None = None,
                betas: Sequence[float] | None = None) -> BarrierRecipe:
    """Emit the layered census barrier: one level per group generator, two
    lattice heights per level, coefficients (1, 0) on order-2 levels and
    (M, 1) otherwise.  Verifies the level-wave conditions (A)-(D); on
    failure the caller should increase M or perturb the betas."""
    group = unit_group(q)
    gens = group.generators
    m = len(gens)
    gamma = gamma if gamma is not None else max(tau + 1.0, 1000.0, 10.0 * M)
    if gamma <= tau:
        raise ValueError("gamma must exceed tau")
    if betas is None:
        betas = list(np.linspace(0.9, 0.6, m + 2)[1:-1])
    betas = [float(b) for b in betas]
    if len(betas) != m or any(b2 >= b1 for b1, b2 in zip(betas, betas[1:])) \
            or not all(0.5 < b < 1.0 for b in betas):
        raise ValueError("betas must be strictly decreasing in (1/2, 1)")

    chars = characters(q)
    char_labels = []
    for j, (g_j, n_j) in enumerate(gens):
        target = None
        for c in chars:
            if c.phase(g_j) == Fraction(n_j - 1, n_j) and all(
                    c.phase(g_h) == 0 for h, (g_h, _) in enumerate(gens)
                    if h != j):
                target = c
                break
        if target is None:
            raise RuntimeError("generator-dual character missing (internal)")
        char_labels.append(chars.index(target))

    entries: Dict[int, Dict[Zero, int]] = {}
    orders = []
    for j, (label, (g_j, n_j), beta) in enumerate(zip(char_labels, gens, betas),
                                                  start=1):
        orders.append(n_j)
        c = (1, 0) if n_j == 2 else (M, 1)
        chi = chars[label]
        for k in (1, 2):
            if c[k - 1]:
                lab_k = chars.index(chi**k)
                ch = entries.setdefault(lab_k, {})
                z = Zero(beta, k * gamma)
                ch[z] = ch.get(z, 0) + c[k - 1]
    system = ZeroSystem(q, entries, height_lattice=gamma)
    params = {"chars": char_labels, "betas": betas, "orders": orders,
              "gamma": gamma, "M": M, "size": system.size,
              "generators": [list(g) for g in gens]}
    recipe = BarrierRecipe(kind="thm51_census", q=q, params=params,
                           system=system,
                           claim="census of any r members capped at r(r-1)")
    check_thm51_conditions(recipe)  # raises ConditionFailedError on failure
    return recipe


def check_thm51_conditions(recipe: BarrierRecipe,
                           samples: int = 1 << 14) -> WSystem:
    """Verify (A) two crossings per wave pair and period, (B) all crossing
    points distinct and nonzero, (C) derivative gaps at every crossing, and
    (D) level-to-level difference non-degeneracy, with explicit margins."""
    p = recipe.params
    decomp = theorem_decomposition(recipe.system, "thm51", p)
    waves: Dict[Tuple[int, int], TrigPoly] = decomp["w"]
    gamma = p["gamma"]
    period = 2.0 * math.pi / gamma
    betas, orders, M = p["betas"], p["orders"], p["M"]

    theta: Dict[Tuple[int, int, int], Tuple[float, float]] = {}
    width = 0.0
    for j, n_j in enumerate(orders, start=1):
        for a1 in range(n_j):
            for a2 in range(a1 + 1, n_j):
                roots = _wave_crossings(waves[(j, a1)], waves[(j, a2)],
                                        period, samples)
                if len(roots) != 2:
                    raise ConditionFailedError(
                        "A", f"level {j} phases ({a1},{a2}) crossed "
                             f"{len(roots)} times per period")
                theta[(j, a1, a2)] = (roots[0][0], roots[1][0])
                width = max(width, roots[0][1], roots[1][1])

    width = max(width, 64.0 * np.finfo(float).eps * period)
    pts = sorted(t for pair in theta.values() for t in pair)
    gap_tol = 10.0 * width  # roots are localized far below the scan grid
    min_gap = math.inf
    for a, b in zip(pts, pts[1:]):
        min_gap = min(min_gap, b - a)
    if pts:
        # crossing points must also stay clear of 0 (mod period)
        min_gap = min(min_gap, pts[0], period - pts[-1])
    if min_gap <= gap_tol:
        raise ConditionFailedError(
            "B", f"crossing points collide (gap {min_gap:.3g} <= {gap_tol:.3g})")

    min_deriv = math.inf
    second_deriv = max(sum(abs(c) * t * t for c, t, _ in w.terms)
                       for w in waves.values())
    for (j, a1, a2), pair in theta.items():
        dpoly_1 = waves[(j, a1)]
        dpoly_2 = waves[(j, a2)]
        for t in pair:
            gap = abs(dpoly_1.derivative(t) - dpoly_2.derivative(t))
            min_deriv = min(min_deriv, gap)
    deriv_tol = 10.0 * width * 2.0 * second_deriv
    if min_deriv <= deriv_tol:
        raise ConditionFailedError(
            "C", f"derivative gap {min_deriv:.3g} below {deriv_tol:.3g}")

    min_d = math.inf
    m = len(orders)
    for j_prime in range(1, m + 1):
        for j in range(j_prime + 1, m + 1):
            n_j = orders[j - 1]
            quads = [(a3, a4, a5, a6)
                     for a3 in range(n_j) for a4 in range(n_j)
                     for a5 in range(n_j) for a6 in range(n_j)
                     if (a3, a4) != (a5, a6) and not (a3 == a4 and a5 == a6)]
            for (jp, a1, a2), pair in theta.items():
                if jp != j_prime:
                    continue
                for t in pair:
                    for a3, a4, a5, a6 in quads:
                        val = (waves[(j, a3)](t) - waves[(j, a4)](t)
                               - waves[(j, a5)](t) + waves[(j, a6)](t))
                        min_d = min(min_d, abs(val))
    d_tol = 10.0 * width * 4.0 * max(w.lipschitz_bound for w in waves.values())
    if m >= 2 and min_d <= d_tol:
        raise ConditionFailedError("D", f"difference margin {min_d:.3g}")

    margins = {"B_min_gap": min_gap, "C_min_derivative_gap": min_deriv,
               "D_min_difference": min_d if m >= 2 else math.inf}
    # (5.19)-style polynomial avoidance on the large-order levels
    min_p = math.inf
    for j in range(2, m + 1):
        if orders[j - 1] < 4:
            continue
        z_j = betas[j - 1] / gamma
        for (jp, a1, a2), pair in theta.items():
            if jp >= j:
                continue
            n_j = orders[j - 1]
            for t in pair:
                for a3 in range(n_j):
                    for a4 in range(a3 + 1, n_j):
                        for a5 in range(n_j):
                            for a6 in range(a5 + 1, n_j):
                                if (a3, a4) == (a5, a6):
                                    continue
                                val = _avoidance_poly(
                                    M, z_j, gamma * t, n_j, a3, a4, a5, a6)
                                min_p = min(min_p, abs(val))
    margins["P_min_abs"] = min_p
    return WSystem(betas=tuple(betas), orders=tuple(orders), gamma=gamma,
                   M=M, theta=theta, margins=margins)


def _avoidance_poly(M: int, z: float, gu: float, n_j: int,
                    a3: int, a4: int, a5: int, a6: int) -> float:
    """The degeneracy polynomial whose nonvanishing at z = beta_j/gamma
    underpins the level-to-level condition."""
    y1 = gu + math.pi * (a3 + a4) / n_j
    y2 = gu + math.pi * (a5 + a6) / n_j
    b1 = math.pi * (a4 - a3) / n_j
    b2 = math.pi * (a6 - a5) / n_j
    return (M * (4 + z * z) * (math.sin(b1) * (math.cos(y1) - z * math.sin(y1))
                               - math.sin(b2) * (math.cos(y2) - z * math.sin(y2)))
            + (1 + z * z) * (math.sin(2 * b1) * (2 * math.cos(2 * y1) - z * math.sin(2 * y1))
                             - math.sin(2 * b2) * (2 * math.cos(2 * y2) - z * math.sin(2 * y2))))


# --- hypothesis checkers ---------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    theorem: str
    checks: Tuple[Tuple[str, bool, str], ...]
    effective_tau: float | None = None

    @property
    def all_pass(self) -> bool:
        return all(ok for _, ok, _ in self.checks)


def check_hypotheses(thm: int | str, system: ZeroSystem,
                     targets: Sequence[int], n_cap: int | None = None,
                     eps3: float = 1e-3, C: float = 10.0) -> HypothesisReport:
    """Verify the stated hypotheses of the leading/trailing theorems on a
    system: nonempty dominant sets, height thresholds (with the effective tau
    computed from the search constants), element counts and group shapes."""
    thm = str(thm)
    group = unit_group(system.q)
    checks: List[Tuple[str, bool, str]] = []
    tau_eff: float | None = None

    def dominant_union(residues: Sequence[int]) -> Tuple[bool, set]:
        union = set()
        ok = True
        for a in residues:
            dd = dominant_data(system, a, 1)
            if dd.empty:
                ok = False
                checks.append((f"z({a},1) nonempty", False, "empty"))
            else:
                checks.append((f"z({a},1) nonempty", True, f"beta={dd.beta}"))
                union.update(dd.zeros)
        return ok, union

    if thm == "31":
        checks.append(("1 not in D", 1 not in [t % system.q for t in targets], ""))
        dominant_union(targets)
    elif thm == "34":
        a = targets[0]
        checks.append(("order(a) == 3", group.order(a) == 3, f"a={a}"))
        ok, union = dominant_union([a])
        thr = 2.0 + math.sqrt(3.0)
        if ok:
            mh = min(z.gamma for z in union)
            checks.append((f"heights >= {thr:.7f}", mh >= thr, f"min={mh}"))
    elif thm == "36":
        ok, union = dominant_union(targets)
        n = n_cap if n_cap is not None else len(union)
        checks.append((f"|union| <= {n}", len(union) <= n, f"got {len(union)}"))
        tau_eff = 1.0 / eps2(n)
        if ok and union:
            mh = min(z.gamma for z in union)
            checks.append((f"heights >= tau = {tau_eff:.6g}", mh >= tau_eff,
                           f"min={mh}"))
    elif thm == "39":
        a1 = targets[0]
        checks.append(("order(a1) == 4", group.order(a1) == 4, f"a1={a1}"))
        members = [pow(a1, k, system.q) for k in (1, 2, 3)]
        ok, union = dominant_union(members)
        n = n_cap if n_cap is not None else len(union)
        checks.append((f"|union| <= {n}", len(union) <= n, f"got {len(union)}"))
        e2 = eps2(n)
        tau_eff = max(1.0 / e2, 2.0 / (eps3 * (e2 / 2.0) ** 2))
        if ok and union:
            mh = min(z.gamma for z in union)
            checks.append((f"heights >= tau = {tau_eff:.6g}", mh >= tau_eff,
                           f"min={mh}"))
    elif thm == "47":
        a = targets[0]
        checks.append(("order(a) == 3", group.order(a) == 3, f"a={a}"))
        a2 = pow(a, 2, system.q)
        union = set()
        for pair in ((a, 1), (a, a2)):
            dd = dominant_data(system, pair[0], pair[1])
            checks.append((f"z({pair[0]},{pair[1]}) nonempty", not dd.empty, ""))
            union.update(dd.zeros)
        n = n_cap if n_cap is not None else len(union)
        checks.append((f"|union| <= {n}", len(union) <= n, f"got {len(union)}"))
        tau_eff = max(1.0 / eps2(n), 1.0 / eps1(n, C))
        if union:
            mh = min(z.gamma for z in union)
            checks.append((f"heights >= tau = {tau_eff:.6g}", mh >= tau_eff,
                           f"min={mh}"))
    else:
        raise ValueError(f"unknown theorem {thm!r}")
    return HypothesisReport(theorem=thm, checks=tuple(checks),
                            effective_tau=tau_eff)
