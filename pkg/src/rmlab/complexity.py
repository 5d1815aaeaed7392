"""Worst-case basic-operation counts for the GMC, AE, CA and SCL decoders.

Every count is a closed-form recursion over the decoding tree; nothing is
measured at run time.  Each unary or binary operation (addition,
comparison, min/max, soft XOR, lsigmoid, absolute value, negation, XOR,
word copy) costs one.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, log2
from typing import Mapping, Union

from .decoders import AutomorphismDistribution, DecoderSpec
from .rm_code import A_STAR, RmCode, dimension

DistLike = Union[AutomorphismDistribution, Mapping[str, int], None]


# -- leaf decoders ---------------------------------------------------------------

def chi_leaf_spc(m: int) -> int:
    """Wagner rule on RM(m-1, m): hard decisions, parity, check, and the flip."""
    if m < 1:
        raise ValueError("m must be >= 1")
    n = 1 << m
    return n + (n - 1) + 1 + (n + (n - 1) + 1)


def chi_leaf_first_order(m: int) -> int:
    """Green Machine on RM(1, m): FHT, argmax |.|, sign, and codeword assembly."""
    if m < 1:
        raise ValueError("m must be >= 1")
    n = 1 << m
    return m * n + (n + n - 1) + 1 + (n + m)


def chi_leaf(r: int, m: int) -> int:
    """Cost of the A* leaf decoder for label (r, m).

    Only SPC and first-order leaves occur under nontrivial roots of order
    >= 2; the other labels are priced as: zero code 0, repetition
    2^(m+1) - 1, full space 2^m comparisons.
    """
    if r < 0:
        return 0
    if m == 0:
        return 1
    if r == 0:
        return (1 << (m + 1)) - 1
    if r == 1:
        return chi_leaf_first_order(m)
    if r == m - 1:
        return chi_leaf_spc(m)
    if r >= m:
        return 1 << m
    raise ValueError(f"RM({r},{m}) is not an A* atom")


# -- CA / GMC / AE ---------------------------------------------------------------

def _as_dist(dist: DistLike) -> AutomorphismDistribution:
    if dist is None:
        return AutomorphismDistribution()
    if isinstance(dist, AutomorphismDistribution):
        return dist
    return AutomorphismDistribution.from_sizes(dist)


def _ca_ops(r, m, sizes, addr, mult, breakdown):
    if (r, m) in A_STAR:
        ops = chi_leaf(r, m)
        breakdown[addr] += mult * ops
        return ops
    ell = sizes.get(addr, 1)
    right = _ca_ops(r - 1, m - 1, sizes, addr + "1", mult * ell, breakdown)
    left = _ca_ops(r, m - 1, sizes, addr + "0", mult * ell, breakdown)
    # soft XORs, compare+add for the u LLRs, and the XOR combination: 4 * 2^(m-1) each branch
    local = ell * (1 << (m + 1))
    if ell > 1:
        # analog weights (2^m comparisons, 2^m - 1 additions) per candidate, then ell - 1 comparisons
        local += ell * (1 << (m + 1)) - 1
    breakdown[addr] += mult * local
    return ell * right + ell * left + local


def ca_breakdown(r: int, m: int, dist: DistLike = None) -> tuple[int, dict[str, int]]:
    d = _as_dist(dist)
    code = RmCode(r, m)
    d.validate(code)
    breakdown: dict[str, int] = defaultdict(int)
    total = _ca_ops(r, m, d.sizes, "", 1, breakdown)
    return total, dict(breakdown)


def chi_ca(r: int, m: int, dist: DistLike = None) -> int:
    return ca_breakdown(r, m, dist)[0]


def chi_gmc(r: int, m: int) -> int:
    return chi_ca(r, m, {})


def chi_ae(r: int, m: int, ell: int) -> int:
    return chi_ca(r, m, {"": ell})


# -- selection networks and SCL -----------------------------------------------------

@dataclass(frozen=True)
class SelCostTable:
    """Operation counts of (lmax, n) selection networks.

    Untabulated pairs fall back to 2U - (n - lmax) with U at its lower
    bound (n - lmax) * ceil(log2(lmax + 1)), which may be optimistic.
    """

    entries: Mapping[tuple[int, int], int] = field(
        default_factory=lambda: {(4, 8): 24, (6, 8): 22, (6, 12): 30})

    def __call__(self, lmax: int, n: int) -> int:
        if lmax >= n:
            return 0
        if (lmax, n) in self.entries:
            return self.entries[(lmax, n)]
        return 2 * selection_units_lower_bound(lmax, n) - (n - lmax)

    def is_tabulated(self, lmax: int, n: int) -> bool:
        return lmax >= n or (lmax, n) in self.entries


def selection_units_lower_bound(lmax: int, n: int) -> int:
    """Lower bound on comparators plus minselectors in an (lmax, n) network."""
    return (n - lmax) * ceil(log2(lmax + 1))


SEL_TABLE = SelCostTable()


def chi_sel(lmax: int, n: int) -> int:
    return SEL_TABLE(lmax, n)


def _grow(k: int, l_in: int, lmax: int) -> int:
    """min(2^k * l_in, lmax) without forming huge powers."""
    if k >= lmax.bit_length():
        return lmax
    return min((1 << k) * l_in, lmax)


def _scl_ops(r, m, l_in, lmax, addr, breakdown, fallbacks):
    if m == 0:
        n = (1 << dimension(r, 0)) * l_in
        if not SEL_TABLE.is_tabulated(lmax, n):
            fallbacks.add((lmax, n))
        ops = l_in * (3 + 4 * (r >= 0)) + chi_sel(lmax, n)
        breakdown[addr] += ops
        return ops
    l1 = _grow(dimension(r - 1, m - 1), l_in, lmax)
    l2 = _grow(dimension(r, m), l_in, lmax)
    right = _scl_ops(r - 1, m - 1, l_in, lmax, addr + "1", breakdown, fallbacks)
    left = _scl_ops(r, m - 1, l1, lmax, addr + "0", breakdown, fallbacks)
    local = (1 << (m - 1)) * (l_in + 2 * l1 + l2)
    breakdown[addr] += local
    return right + left + local


def scl_breakdown(r: int, m: int, l_in: int, lmax: int):
    """(total, per-address breakdown, untabulated selection sizes used)."""
    if r < 0:
        raise ValueError("SCL complexity requires r >= 0")
    breakdown: dict[str, int] = defaultdict(int)
    fallbacks: set[tuple[int, int]] = set()
    total = _scl_ops(r, m, l_in, lmax, "", breakdown, fallbacks)
    return total, dict(breakdown), fallbacks


def chi_scl(r: int, m: int, l_in: int, lmax: int) -> int:
    return scl_breakdown(r, m, l_in, lmax)[0]


# -- reports -----------------------------------------------------------------------

def ops_per_info_bit(total: int, code: RmCode) -> Fraction:
    if code.k == 0:
        raise ValueError(f"{code} has no information bits")
    return Fraction(total, code.k)


@dataclass(frozen=True)
class ComplexityReport:
    code: RmCode
    decoder: str
    total_ops: int
    breakdown: dict[str, int]
    optimistic: bool = False

    @property
    def ops_per_info_bit(self) -> Fraction:
        return ops_per_info_bit(self.total_ops, self.code)

    def record(self) -> dict:
        return {
            "code": [self.code.r, self.code.m],
            "decoder_spec": self.decoder,
            "total_ops": self.total_ops,
            "ops_per_info_bit": round(float(self.ops_per_info_bit), 3),
            "optimistic": self.optimistic,
        }

    def render(self) -> str:
        lines = [
            f"code              {self.code}  (n={self.code.n}, k={self.code.k})",
            f"decoder           {self.decoder}",
            f"total_ops         {self.total_ops}",
            f"ops_per_info_bit  {float(self.ops_per_info_bit):.3f}",
        ]
        if self.optimistic:
            lines.append("note              selection costs use the lower-bound fallback (optimistic)")
        return "\n".join(lines)


def complexity_report(code: RmCode, spec: DecoderSpec | str) -> ComplexityReport:
    if isinstance(spec, str):
        spec = DecoderSpec.parse(spec)
    if spec.kind == "ml":
        raise ValueError("no operation count is defined for the ML decoder")
    if spec.kind == "scl":
        total, breakdown, fallbacks = scl_breakdown(code.r, code.m, 1, spec.size)
        return ComplexityReport(code, spec.render(), total, breakdown, bool(fallbacks))
    total, breakdown = ca_breakdown(code.r, code.m, spec.distribution())
    return ComplexityReport(code, spec.render(), total, breakdown)
