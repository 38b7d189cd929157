"""Hypothetical zero systems and the combinatorial data derived from them.

A ZeroSystem assigns to each non-principal character mod q a finite multiset
of points rho = beta + i*gamma (gamma >= 0) with positive multiplicities.
From it we derive, for a pair of residues (a, b): the values
g(rho) = sum_chi n(rho,chi) (chi(a) - chi(b)), the dominant level
beta(a,b) = sup{Re rho : g(rho) != 0}, and the dominant set z(a,b).

g-zero-tests are exact (rational character phases reduced against the
cyclotomic polynomial); the complex values used numerically are floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .residues import RootOfUnitySum, characters, unit_group


class ZeroDataError(ValueError):
    """Malformed zero-list input (bad line or unknown character label)."""


@dataclass(frozen=True, order=True)
class Zero:
    """A point beta + i*gamma in the closed upper half plane."""

    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError("heights must be nonnegative")

    @property
    def rho(self) -> complex:
        return complex(self.beta, self.gamma)

    @property
    def modulus(self) -> float:
        return abs(self.rho)

    @property
    def is_real(self) -> bool:
        return self.gamma == 0.0


class ZeroSystem:
    """Per-character multisets of hypothetical zeros with multiplicities.

    entries maps character label (index into characters(q)) to a dict
    Zero -> multiplicity.  Hypothetical systems must satisfy
    1/2 < R^-(B) <= R^+(B) <= 1; systems loaded from actual zero data may sit
    on the critical line (hypothetical=False).
    """

    def __init__(self, q: int, entries: Mapping[int, Mapping[Zero, int]],
                 hypothetical: bool = True,
                 height_lattice: float | None = None) -> None:
        self.q = q
        self.chars = characters(q)
        clean: Dict[int, Dict[Zero, int]] = {}
        for label, zs in entries.items():
            label = int(label)
            if not 0 <= label < len(self.chars):
                raise ZeroDataError(f"unknown character label {label} mod {q}")
            if self.chars[label].is_principal and zs:
                raise ZeroDataError("zeros may not sit on the principal character")
            kept = {z: int(m) for z, m in zs.items() if m}
            if any(m < 0 for m in kept.values()):
                raise ValueError("multiplicities must be positive")
            if kept:
                clean[label] = kept
        self.entries = clean
        self.hypothetical = hypothetical
        self.height_lattice = height_lattice
        self._validate()

    def _validate(self) -> None:
        betas = [z.beta for zs in self.entries.values() for z in zs]
        if betas:
            lo, hi = min(betas), max(betas)
            if self.hypothetical and not (0.5 < lo <= hi <= 1.0):
                raise ValueError(
                    f"real parts must satisfy 1/2 < R- <= R+ <= 1, got "
                    f"[{lo}, {hi}]")
            if not self.hypothetical and not (0.5 <= lo <= hi <= 1.0):
                raise ValueError("real parts must lie in [1/2, 1]")
        # real zeros must appear identically on conjugate characters
        for label, zs in self.entries.items():
            conj = self.conjugate_label(label)
            for z, m in zs.items():
                if z.is_real and self.entries.get(conj, {}).get(z, 0) != m:
                    raise ValueError(
                        "real zeros need equal multiplicity on conjugate "
                        "characters")

    # --- basic queries -----------------------------------------------------
    def conjugate_label(self, label: int) -> int:
        conj = self.chars[label].conjugate()
        return self.chars.index(conj)

    @property
    def size(self) -> int:
        """|B|: total number of zeros counted with multiplicity."""
        return sum(m for zs in self.entries.values() for m in zs.values())

    @property
    def r_minus(self) -> float | None:
        betas = [z.beta for zs in self.entries.values() for z in zs]
        return min(betas) if betas else None

    @property
    def r_plus(self) -> float | None:
        betas = [z.beta for zs in self.entries.values() for z in zs]
        return max(betas) if betas else None

    @property
    def min_height(self) -> float | None:
        gs = [z.gamma for zs in self.entries.values() for z in zs]
        return min(gs) if gs else None

    def has_real_zeros(self) -> bool:
        return any(z.is_real for zs in self.entries.values() for z in zs)

    def multiplicity(self, label: int, zero: Zero) -> int:
        return self.entries.get(label, {}).get(zero, 0)

    def items(self) -> Iterable[Tuple[int, Zero, int]]:
        for label, zs in self.entries.items():
            for z, m in sorted(zs.items()):
                yield label, z, m

    def zeros_of(self, label: int) -> Dict[Zero, int]:
        return dict(self.entries.get(label, {}))

    def all_zeros(self) -> List[Zero]:
        seen = sorted({z for zs in self.entries.values() for z in zs})
        return seen

    # --- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "hypothetical": self.hypothetical,
            "height_lattice": self.height_lattice,
            "zeros": [{"chi": label, "beta": z.beta, "gamma": z.gamma, "mult": m}
                      for label, z, m in self.items()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ZeroSystem":
        entries: Dict[int, Dict[Zero, int]] = {}
        for rec in d["zeros"]:
            z = Zero(float(rec["beta"]), float(rec["gamma"]))
            ch = entries.setdefault(int(rec["chi"]), {})
            ch[z] = ch.get(z, 0) + int(rec["mult"])
        return cls(d["q"], entries, hypothetical=d.get("hypothetical", True),
                   height_lattice=d.get("height_lattice"))


@dataclass(frozen=True)
class DominantData:
    """The dominant level and set for one pair of residues.

    zeros lists z(a,b); g_values holds the (float) complex g at each of them.
    An empty dominant set (g identically zero on the system) is flagged, not
    an error.
    """

    a: int
    b: int
    beta: float | None
    zeros: Tuple[Zero, ...]
    g_values: Dict[Zero, complex]
    per_char: Dict[int, Tuple[Zero, ...]]

    @property
    def empty(self) -> bool:
        return self.beta is None


def g_rho_exact(system: ZeroSystem, zero: Zero, a: int, b: int) -> RootOfUnitySum:
    """g(rho; a, b) as an exact root-of-unity sum."""
    group = unit_group(system.q)
    if not (group.is_unit(a) and group.is_unit(b)):
        raise ValueError("a and b must be units")
    s = RootOfUnitySum()
    for label, zs in system.entries.items():
        m = zs.get(zero, 0)
        if m:
            chi = system.chars[label]
            s.add(chi.phase(a), m)
            s.add(chi.phase(b), -m)
    return s


def g_rho(system: ZeroSystem, zero: Zero, a: int, b: int) -> complex:
    """g(rho; a, b) = sum_chi n(rho,chi)(chi(a) - chi(b)) as a complex float."""
    return g_rho_exact(system, zero, a, b).to_complex()


def dominant_data(system: ZeroSystem, a: int, b: int) -> DominantData:
    """beta(a,b) and z(a,b) for the pair, with exact g != 0 tests."""
    if a % system.q == b % system.q:
        raise ValueError("dominant data needs distinct residues")
    live: Dict[Zero, complex] = {}
    for zero in system.all_zeros():
        g = g_rho_exact(system, zero, a, b)
        if not g.is_zero():
            live[zero] = g.to_complex()
    if not live:
        return DominantData(a=a, b=b, beta=None, zeros=(), g_values={},
                            per_char={})
    beta = max(z.beta for z in live)
    zset = tuple(sorted(z for z in live if z.beta == beta))
    per_char: Dict[int, Tuple[Zero, ...]] = {}
    for label, zs in system.entries.items():
        own = tuple(sorted(z for z in zs if z in zset))
        if own:
            per_char[label] = own
    return DominantData(a=a, b=b, beta=beta, zeros=zset,
                        g_values={z: live[z] for z in zset}, per_char=per_char)


@dataclass(frozen=True)
class KTPairReport:
    a: int
    b: int
    dominant_nonempty: bool


@dataclass(frozen=True)
class KTReport:
    """Hypothesis check for the sign-change (Knapowski-Turan) property:
    the system has no real elements and z(a,b) is nonempty for every pair."""

    q: int
    has_real_zeros: bool
    pairs: Tuple[KTPairReport, ...]

    @property
    def all_pass(self) -> bool:
        return (not self.has_real_zeros
                and all(p.dominant_nonempty for p in self.pairs))


def is_kt_candidate(system: ZeroSystem, members: Sequence[int]) -> KTReport:
    group = unit_group(system.q)
    members = [m % system.q for m in members]
    for m in members:
        if not group.is_unit(m):
            raise ValueError(f"{m} is not a unit mod {system.q}")
    pairs = []
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            a, b = members[i], members[j]
            dd = dominant_data(system, a, b)
            pairs.append(KTPairReport(a=a, b=b, dominant_nonempty=not dd.empty))
    return KTReport(q=system.q, has_real_zeros=system.has_real_zeros(),
                    pairs=tuple(pairs))


# --- zero-list file format ---------------------------------------------------
#
# One zero per line:  q=<int> chi=<label> gamma=<decimal> [beta=<d>] [mult=<n>]
# '#' starts a comment; beta defaults to 0.5, mult to 1.  Duplicate lines
# accumulate multiplicity (multiset semantics).


def parse_zero_lines(lines: Iterable[str], q: int | None = None,
                     ) -> ZeroSystem | None:
    entries: Dict[int, Dict[Zero, int]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields: Dict[str, str] = {}
        for tok in line.split():
            if "=" not in tok:
                raise ZeroDataError(f"line {lineno}: malformed token {tok!r}")
            k, v = tok.split("=", 1)
            fields[k] = v
        try:
            lq = int(fields["q"])
            label = int(fields["chi"])
            gamma = float(fields["gamma"])
            beta = float(fields.get("beta", 0.5))
            mult = int(fields.get("mult", 1))
        except (KeyError, ValueError) as exc:
            raise ZeroDataError(f"line {lineno}: {exc}") from None
        if q is None:
            q = lq
        elif lq != q:
            raise ZeroDataError(f"line {lineno}: mixed moduli {q} and {lq}")
        if mult < 1:
            raise ZeroDataError(f"line {lineno}: mult must be >= 1")
        nchars = len(characters(q))
        if not 0 <= label < nchars:
            raise ZeroDataError(
                f"line {lineno}: unknown character label {label} mod {q}")
        z = Zero(beta, gamma)
        ch = entries.setdefault(label, {})
        ch[z] = ch.get(z, 0) + mult
    if q is None:
        return None
    return ZeroSystem(q, entries, hypothetical=False)


def load_zero_data(path, q: int | None = None) -> ZeroSystem | None:
    """Parse a zero-list file.

    An empty file yields an empty system when the modulus is supplied,
    otherwise None.
    """
    with open(path, "r", encoding="utf-8") as fh:
        return parse_zero_lines(fh, q=q)
