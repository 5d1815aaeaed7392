"""The affine group GA(m, F2) acting on coordinates of length-2^m vectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .channel import RngStream
from .rm_code import point_bits


def gf2_rank(a) -> int:
    a = np.array(a, dtype=np.uint8) & 1
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        pivot = next((i for i in range(rank, rows) if a[i, col]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        for i in range(rows):
            if i != rank and a[i, col]:
                a[i] ^= a[rank]
        rank += 1
    return rank


def ga_order(m: int) -> int:
    """|GA(m, F2)| = 2^m * |GL(m, F2)|."""
    return (1 << m) * prod((1 << m) - (1 << i) for i in range(m))


@dataclass(frozen=True)
class Permutation:
    """Coordinate permutation; its action is (pi v)[i] = v[pi(i)]."""

    mapping: np.ndarray

    def __post_init__(self):
        mp = np.asarray(self.mapping, dtype=np.intp)
        if sorted(mp.tolist()) != list(range(len(mp))):
            raise ValueError("mapping is not a bijection")
        mp.setflags(write=False)
        object.__setattr__(self, "mapping", mp)

    @property
    def order(self) -> int:
        return len(self.mapping)

    @property
    def inverse_mapping(self) -> np.ndarray:
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.order)
        return inv

    def inverse(self) -> "Permutation":
        return Permutation(self.inverse_mapping)

    def compose(self, other: "Permutation") -> "Permutation":
        """The permutation acting as ``self`` applied after ``other``."""
        # self(other v)[i] = (other v)[self(i)] = v[other(self(i))]
        return Permutation(other.mapping[self.mapping])


def apply(pi: Permutation, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != pi.order:
        raise ValueError(f"vector length {v.shape[-1]} != permutation order {pi.order}")
    return v[..., pi.mapping]


def apply_inverse(pi: Permutation, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != pi.order:
        raise ValueError(f"vector length {v.shape[-1]} != permutation order {pi.order}")
    return v[..., pi.inverse_mapping]


@dataclass(frozen=True)
class AffinePermutation:
    """z -> A z + b over F2^m, with z the bit pattern of a coordinate index."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.uint8) & 1
        b = np.asarray(self.b, dtype=np.uint8) & 1
        m = len(b)
        if A.shape != (m, m):
            raise ValueError(f"A must be {m}x{m}")
        if gf2_rank(A) != m:
            raise ValueError("A is singular over F2")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return len(self.b)

    @classmethod
    def identity(cls, m: int) -> "AffinePermutation":
        return cls(np.eye(m, dtype=np.uint8), np.zeros(m, dtype=np.uint8))

    def key(self) -> tuple[bytes, bytes]:
        return self.A.tobytes(), self.b.tobytes()

    def __eq__(self, other):
        return isinstance(other, AffinePermutation) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def compose(self, other: "AffinePermutation") -> "AffinePermutation":
        """Affine map z -> self(other(z))."""
        A = (self.A.astype(int) @ other.A.astype(int)) & 1
        b = ((self.A.astype(int) @ other.b.astype(int)) + self.b) & 1
        return AffinePermutation(A, b)

    def to_hex(self) -> dict:
        def row_hex(bits):
            return format(int("".join(map(str, bits)) or "0", 2), "x")
        return {"A": [row_hex(row) for row in self.A], "b": row_hex(self.b)}

    @classmethod
    def from_hex(cls, m: int, record: dict) -> "AffinePermutation":
        def bits(h):
            return [int(c) for c in format(int(h, 16), f"0{m}b")]
        return cls(np.array([bits(h) for h in record["A"]]), np.array(bits(record["b"])))


def to_permutation(a: AffinePermutation) -> Permutation:
    m = a.m
    z = point_bits(m).astype(np.int64)               # row i = bits of i, MSB first
    image = (z @ a.A.T.astype(np.int64) + a.b) & 1   # row i = A z_i + b
    weights = 1 << np.arange(m - 1, -1, -1)
    return Permutation(image @ weights)


def sample_affine(m: int, rng) -> AffinePermutation:
    """Uniform element of GA(m, F2); A by rejection sampling on the rank."""
    if m < 1:
        raise ValueError("m must be at least 1")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    while True:
        A = gen.integers(0, 2, size=(m, m), dtype=np.uint8)
        if gf2_rank(A) == m:
            break
    b = gen.integers(0, 2, size=m, dtype=np.uint8)
    return AffinePermutation(A, b)


@dataclass(frozen=True)
class AutomorphismEnsemble:
    elements: tuple[AffinePermutation, ...]
    _perms: tuple[Permutation, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        elements = tuple(self.elements)
        if not elements:
            raise ValueError("ensemble must not be empty")
        if len(set(elements)) != len(elements):
            raise ValueError("ensemble elements must be distinct")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "_perms", tuple(to_permutation(a) for a in elements))

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def m(self) -> int:
        return self.elements[0].m

    @property
    def permutations(self) -> tuple[Permutation, ...]:
        return self._perms

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Forward and inverse mappings stacked as (size, 2^m) arrays."""
        fwd = np.stack([p.mapping for p in self._perms])
        inv = np.stack([p.inverse_mapping for p in self._perms])
        return fwd, inv

    def prefix(self, size: int) -> "AutomorphismEnsemble":
        return AutomorphismEnsemble(self.elements[:size])

    def to_records(self) -> list[dict]:
        return [a.to_hex() for a in self.elements]

    @classmethod
    def from_records(cls, m: int, records: list[dict]) -> "AutomorphismEnsemble":
        return cls(tuple(AffinePermutation.from_hex(m, rec) for rec in records))


def sample_ensemble(m: int, size: int, rng) -> AutomorphismEnsemble:
    """Identity followed by ``size - 1`` distinct random affine maps.

    Drawing sequentially from one stream makes smaller ensembles prefixes of
    larger ones for the same stream.
    """
    if size < 1:
        raise ValueError("ensemble size must be at least 1")
    if m == 0:
        if size > 1:
            raise ValueError("GA(0, F2) has a single element")
        return AutomorphismEnsemble((AffinePermutation(np.zeros((0, 0)), np.zeros(0)),))
    if size > ga_order(m):
        raise ValueError(f"size {size} exceeds |GA({m},F2)| = {ga_order(m)}")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    elements = [AffinePermutation.identity(m)]
    seen = set(elements)
    while len(elements) < size:
        a = sample_affine(m, gen)
        if a not in seen:
            seen.add(a)
            elements.append(a)
    return AutomorphismEnsemble(tuple(elements))
