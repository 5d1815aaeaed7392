"""Reed-Muller code algebra: parameters, encoding, membership and the Plotkin tree.

Bit vectors are numpy ``uint8`` arrays of 0/1 entries.  Point ``i`` of
``F_2^m`` carries ``x_0`` in its most significant bit, so ``eval(x_0)`` for
``m = 2`` is ``(0, 0, 1, 1)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Callable, Iterator, Optional

import numpy as np


def dimension(r: int, m: int) -> int:
    """Return k(r, m), the dimension of RM(r, m)."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if r < 0:
        return 0
    if r >= m:
        return 1 << m
    return sum(comb(m, i) for i in range(r + 1))


@dataclass(frozen=True)
class RmCode:
    r: int
    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"log-length must be non-negative, got {self.m}")

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def k(self) -> int:
        return dimension(self.r, self.m)

    @property
    def d(self) -> Optional[int]:
        """Minimum distance; None for the zero code."""
        if self.r < 0:
            return None
        return 1 << (self.m - min(self.r, self.m))

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def trivial(self) -> bool:
        return self.r <= 0 or self.r >= self.m - 1

    def __str__(self) -> str:
        return f"RM({self.r},{self.m})"


# -- bit vector helpers -----------------------------------------------------

def bits_from_str(s: str, length: Optional[int] = None) -> np.ndarray:
    s = s.strip()
    if any(ch not in "01" for ch in s):
        raise ValueError(f"not a 0/1 string: {s!r}")
    if length is not None and len(s) != length:
        raise ValueError(f"expected {length} bits, got {len(s)}")
    return np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def concat(u, v) -> np.ndarray:
    """(u | v) along the last axis."""
    return np.concatenate([np.asarray(u), np.asarray(v)], axis=-1)


# -- generator structure ----------------------------------------------------

def monomials(r: int, m: int) -> list[tuple[int, ...]]:
    """Monomials of degree <= r as variable-index tuples.

    Ordered by ascending degree, lexicographically within a degree:
    1; x0, ..., x_{m-1}; x0x1, x0x2, ...
    """
    out: list[tuple[int, ...]] = []
    for deg in range(0, min(r, m) + 1):
        out.extend(itertools.combinations(range(m), deg))
    return out


def point_bits(m: int) -> np.ndarray:
    """(2^m, m) array whose row i holds the coordinates of point i (x0 first)."""
    idx = np.arange(1 << m)
    shifts = np.arange(m - 1, -1, -1)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def evaluate(monomial: tuple[int, ...], m: int) -> np.ndarray:
    pts = point_bits(m)
    row = np.ones(1 << m, dtype=np.uint8)
    for var in monomial:
        row &= pts[:, var]
    return row


@lru_cache(maxsize=None)
def _generator(r: int, m: int) -> np.ndarray:
    rows = [evaluate(mono, m) for mono in monomials(r, m)]
    if not rows:
        g = np.zeros((0, 1 << m), dtype=np.uint8)
    else:
        g = np.stack(rows)
    g.setflags(write=False)
    return g


def generator_matrix(code: RmCode) -> np.ndarray:
    """k x n generator; rows follow :func:`monomials` order."""
    return _generator(code.r, code.m)


def encode(code: RmCode, message) -> np.ndarray:
    """Encode one message (shape (k,)) or a batch (shape (B, k))."""
    if code.r < 0:
        raise ValueError("encode requires r >= 0")
    msg = np.asarray(message, dtype=np.int64)
    if msg.shape[-1] != code.k:
        raise ValueError(f"{code} expects {code.k} message bits, got {msg.shape[-1]}")
    g = generator_matrix(code).astype(np.int64)
    return ((msg @ g) & 1).astype(np.uint8)


def is_codeword(code: RmCode, v) -> bool:
    """Membership via the dual code RM(m-r-1, m) parity checks."""
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (code.n,):
        raise ValueError(f"expected length {code.n}, got shape {v.shape}")
    if code.r < 0:
        return not v.any()
    if code.r >= code.m:
        return True
    h = _generator(code.m - code.r - 1, code.m).astype(np.int64)
    return not ((h @ v) & 1).any()


def codewords(code: RmCode) -> np.ndarray:
    """All 2^k codewords in message order; only sensible for small k."""
    if code.r < 0:
        return np.zeros((1, code.n), dtype=np.uint8)
    k = code.k
    msgs = ((np.arange(1 << k)[:, None] >> np.arange(k - 1, -1, -1)) & 1)
    return encode(code, msgs)


def plotkin_split(c) -> tuple[np.ndarray, np.ndarray]:
    """Split c = (u | u xor v) into (u, v) along the last axis."""
    c = np.asarray(c)
    n = c.shape[-1]
    if n % 2:
        raise ValueError(f"cannot split odd length {n}")
    u = c[..., : n // 2]
    return u.copy(), u ^ c[..., n // 2:]


def plotkin_join(u, v) -> np.ndarray:
    u = np.asarray(u)
    return concat(u, u ^ np.asarray(v))


# -- atom sets and the decoding tree ---------------------------------------

@dataclass(frozen=True)
class AtomSet:
    name: str
    contains: Callable[[int, int], bool]

    def __contains__(self, label: tuple[int, int]) -> bool:
        r, m = label
        return m == 0 or self.contains(r, m)


# Trivial codes plus first-order codes.
A_STAR = AtomSet("A*", lambda r, m: r <= 1 or r >= m - 1)
# Length-1 codes only; the decoding tree is the full Plotkin tree.
A_PRIME = AtomSet("A'", lambda r, m: m == 0)


def label_at(code: RmCode, address: str) -> tuple[int, int]:
    return code.r - address.count("1"), code.m - len(address)


@dataclass
class TreeNode:
    address: str
    label: tuple[int, int]
    children: Optional[tuple["TreeNode", "TreeNode"]] = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def left(self) -> "TreeNode":
        return self.children[0]

    @property
    def right(self) -> "TreeNode":
        return self.children[1]

    def walk(self) -> Iterator["TreeNode"]:
        """Nodes in decoding order: a node, then its right subtree, then its left."""
        yield self
        if self.children:
            yield from self.right.walk()
            yield from self.left.walk()

    def leaves(self) -> list["TreeNode"]:
        return [n for n in self.walk() if n.is_leaf]

    def internal(self) -> list["TreeNode"]:
        return [n for n in self.walk() if not n.is_leaf]

    def find(self, address: str) -> Optional["TreeNode"]:
        node = self
        for bit in address:
            if node.children is None:
                return None
            node = node.children[int(bit)]
        return node


def decoding_tree(code: RmCode, atoms: AtomSet = A_STAR, address: str = "") -> TreeNode:
    r, m = code.r, code.m
    if (r, m) in atoms:
        return TreeNode(address, (r, m))
    left = decoding_tree(RmCode(r, m - 1), atoms, address + "0")
    right = decoding_tree(RmCode(r - 1, m - 1), atoms, address + "1")
    return TreeNode(address, (r, m), (left, right))


def rightmost_composite_addresses(code: RmCode, atoms: AtomSet = A_STAR) -> list[str]:
    """Composite nodes with all-ones addresses, root first."""
    out = []
    addr = ""
    while label_at(code, addr) not in atoms:
        out.append(addr)
        addr += "1"
    return out
