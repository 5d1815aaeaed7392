"""Soft-decision decoders for RM codes.

Every decoder takes an LLR vector of shape ``(2^m,)`` or a batch of shape
``(B, 2^m)`` and returns 0/1 ``uint8`` codewords of the same shape.  The
batched path is what the Monte Carlo harness runs; single vectors are just
batches of one.

Tie-breaking is always "lowest index wins".
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from .automorphism import AutomorphismEnsemble, sample_ensemble
from .channel import DOMAIN_ENSEMBLE, RngStream
from .llr_math import analog_weight, fht, lsigmoid, soft_add, soft_xor
from .rm_code import (
    A_STAR,
    AtomSet,
    RmCode,
    codewords,
    label_at,
)

# Infinite LLRs are clamped to this magnitude before sums that could see
# +inf and -inf together.
LARGE = float(2**20)
ML_MAX_DIMENSION = 24


@dataclass(frozen=True)
class DecodeOutcome:
    codeword: np.ndarray
    analog_weight: float


def _as_batch(llr) -> tuple[np.ndarray, bool]:
    arr = np.asarray(llr, dtype=np.float64)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim != 2:
        raise ValueError(f"expected a vector or a batch of vectors, got shape {arr.shape}")
    return arr, False


def _check_length(code: RmCode, llr: np.ndarray):
    if llr.shape[-1] != code.n:
        raise ValueError(f"{code} expects {code.n} LLRs, got {llr.shape[-1]}")


def _clamp(llr: np.ndarray) -> np.ndarray:
    return np.clip(llr, -LARGE, LARGE)


# -- leaf decoders ------------------------------------------------------------

def _hard(llr):
    return (llr < 0).astype(np.uint8)


def _repetition(llr):
    total = _clamp(llr).sum(axis=-1, keepdims=True)
    return np.broadcast_to(total < 0, llr.shape).astype(np.uint8)


def _wagner(llr):
    bits = _hard(llr)
    odd = (bits.sum(axis=-1) & 1).astype(bool)
    if odd.any():
        rows = np.flatnonzero(odd)
        pos = np.argmin(np.abs(llr[rows]), axis=-1)
        bits[rows, pos] ^= 1
    return bits


def _first_order(llr, m):
    y = fht(_clamp(llr))
    j = np.argmax(np.abs(y), axis=-1)
    s = (y[np.arange(len(y)), j] < 0).astype(np.uint8)
    # Build the codeword by repeated copy / negated-copy doubling.
    v = s[:, None]
    for step in range(m):
        flip = ((j >> step) & 1).astype(np.uint8)[:, None]
        v = np.concatenate([v, v ^ flip], axis=1)
    return v


def decode_spc_wagner(llr) -> np.ndarray:
    """ML decoding of the single parity check code of the input's length."""
    arr, single = _as_batch(llr)
    if arr.shape[-1] < 2:
        raise ValueError("Wagner decoding needs length >= 2")
    out = _wagner(arr)
    return out[0] if single else out


def decode_first_order(llr) -> np.ndarray:
    """ML decoding of RM(1, m) via the fast Hadamard transform (Green Machine)."""
    arr, single = _as_batch(llr)
    n = arr.shape[-1]
    m = n.bit_length() - 1
    if m < 1 or n != 1 << m:
        raise ValueError(f"length {n} is not a power of two >= 2")
    out = _first_order(arr, m)
    return out[0] if single else out


def _leaf(r, m, llr):
    if r < 0:
        return np.zeros(llr.shape, dtype=np.uint8)
    if m == 0:
        return _hard(llr)
    if r == 0:
        return _repetition(llr)
    if r == 1:
        return _first_order(llr, m)
    if r == m - 1:
        return _wagner(llr)
    if r >= m:
        return _hard(llr)
    raise ValueError(f"no leaf decoder for RM({r},{m})")


# -- ML ----------------------------------------------------------------------

def _ml(code: RmCode, llr: np.ndarray) -> np.ndarray:
    if code.k > ML_MAX_DIMENSION:
        raise ValueError(f"ML enumeration limited to k <= {ML_MAX_DIMENSION}, {code} has k={code.k}")
    book = _sorted_codebook(code)
    finite = np.isfinite(llr)
    lam = np.where(finite, llr, 0.0)
    pos_inf = (llr == np.inf).astype(np.float64)
    neg_inf = (llr == -np.inf).astype(np.float64)
    best = np.empty(llr.shape, dtype=np.uint8)
    for start in range(0, len(book), 1 << 14):
        chunk = book[start:start + (1 << 14)]
        cf = chunk.astype(np.float64)
        # w(c) = sum_i c_i * lam_i + sum_{lam_i<0} |lam_i| on finite positions.
        w = lam @ cf.T
        blocked = pos_inf @ cf.T + neg_inf @ (1.0 - cf).T
        w = np.where(blocked > 0, np.inf, w)
        j = np.argmin(w, axis=-1)
        cand = chunk[j]
        if start == 0:
            best[:] = cand
            continue
        # Exact comparison against the running best; codebook order is lexicographic.
        better = analog_weight(cand, llr) < analog_weight(best, llr)
        best[better] = cand[better]
    return best


_CODEBOOKS: dict[tuple[int, int], np.ndarray] = {}


def _sorted_codebook(code: RmCode) -> np.ndarray:
    key = (code.r, code.m)
    if key not in _CODEBOOKS:
        book = codewords(code)
        order = np.lexsort(book.T[::-1])
        _CODEBOOKS[key] = book[order]
    return _CODEBOOKS[key]


def decode_ml(code: RmCode, llr) -> DecodeOutcome | list[DecodeOutcome]:
    """Minimum analog weight codeword by enumeration (k <= 24).

    Ties resolve to the lexicographically smallest codeword, up to rounding
    in the correlation sums.
    """
    arr, single = _as_batch(llr)
    _check_length(code, arr)
    out = _ml(code, arr)
    w = analog_weight(out, arr)
    if single:
        return DecodeOutcome(out[0], float(w[0]))
    return [DecodeOutcome(c, float(x)) for c, x in zip(out, w)]


# -- GMC / CA ----------------------------------------------------------------

def _ca(r, m, llr, addr, sizes, perms, atoms):
    """Recursive CA decoder on a batch; GMC when ``sizes`` is empty."""
    if (r, m) in atoms:
        return _leaf(r, m, llr)
    ell = sizes.get(addr, 1)
    if ell == 1:
        return _split(r, m, llr, addr, sizes, perms, atoms)
    fwd, inv = perms[addr]
    batch, n = llr.shape
    local = llr[:, fwd].reshape(batch * ell, n)
    cand = _split(r, m, local, addr, sizes, perms, atoms).reshape(batch, ell, n)
    cand = np.take_along_axis(cand, np.broadcast_to(inv, cand.shape), axis=2)
    weights = analog_weight(cand, llr[:, None, :])
    pick = np.argmin(weights, axis=1)
    return cand[np.arange(batch), pick]


def _split(r, m, llr, addr, sizes, perms, atoms):
    half = llr.shape[-1] // 2
    left, right = llr[:, :half], llr[:, half:]
    v = _ca(r - 1, m - 1, soft_xor(left, right), addr + "1", sizes, perms, atoms)
    u = _ca(r, m - 1, soft_add(left, right, v), addr + "0", sizes, perms, atoms)
    return np.concatenate([u, u ^ v], axis=1)


def decode_gmc(code: RmCode, llr, atoms: AtomSet = A_STAR) -> np.ndarray:
    arr, single = _as_batch(llr)
    _check_length(code, arr)
    out = _ca(code.r, code.m, arr, "", {}, {}, atoms)
    return out[0] if single else out


def decode_ae(code: RmCode, llr, ensemble: AutomorphismEnsemble, atoms: AtomSet = A_STAR) -> np.ndarray:
    """Run GMC on each permuted copy of the LLRs and keep the lightest candidate."""
    arr, single = _as_batch(llr)
    _check_length(code, arr)
    if ensemble.m != code.m:
        raise ValueError(f"ensemble acts on length {1 << ensemble.m}, code has {code.n}")
    best = None
    best_w = None
    for pi in ensemble.permutations:
        cand = decode_gmc(code, arr[:, pi.mapping], atoms)[:, pi.inverse_mapping]
        w = analog_weight(cand, arr)
        if best is None:
            best, best_w = cand, w
        else:
            better = w < best_w
            best[better] = cand[better]
            best_w = np.where(better, w, best_w)
    return best[0] if single else best


@dataclass(frozen=True)
class AutomorphismDistribution:
    """(address, ensemble size) pairs; addresses are binary strings, '' the root."""

    pairs: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted(((str(a), int(s)) for a, s in self.pairs), key=lambda p: (len(p[0]), p[0])))
        addrs = [a for a, _ in pairs]
        if len(set(addrs)) != len(addrs):
            raise ValueError(f"duplicate addresses in {addrs}")
        for a, s in pairs:
            if a.strip("01"):
                raise ValueError(f"bad address {a!r}")
            if s < 2:
                raise ValueError(f"ensemble size at {a or '-'} must be >= 2, got {s}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_sizes(cls, sizes: Mapping[str, int]) -> "AutomorphismDistribution":
        """Build from a mapping, dropping size-1 entries."""
        return cls(tuple((a, s) for a, s in sizes.items() if s > 1))

    @property
    def sizes(self) -> dict[str, int]:
        return dict(self.pairs)

    def size_at(self, address: str) -> int:
        return self.sizes.get(address, 1)

    def child(self, bit: str) -> "AutomorphismDistribution":
        """Distribution seen by the constituent at ``bit`` (leading bit stripped)."""
        return AutomorphismDistribution(tuple((a[1:], s) for a, s in self.pairs if a[:1] == bit))

    def validate(self, code: RmCode, atoms: AtomSet = A_STAR):
        for a, _ in self.pairs:
            # Every prefix must be composite for the node to exist in the tree.
            for depth in range(len(a) + 1):
                if label_at(code, a[:depth]) in atoms:
                    kind = "a leaf" if depth == len(a) else "not in the tree"
                    raise ValueError(f"address {a or '-'} is {kind} of the decoding tree of {code}")

    def __len__(self):
        return len(self.pairs)

    def render(self) -> str:
        return ";".join(f"({a or '-'},{s})" for a, s in self.pairs)

    def __str__(self):
        return self.render() or "{}"


def ensemble_stream(seed: int, address: str) -> RngStream:
    return RngStream(seed, int("1" + address, 2), DOMAIN_ENSEMBLE)


def sample_ensembles(code: RmCode, dist: AutomorphismDistribution, seed: int) -> dict[str, AutomorphismEnsemble]:
    """One ensemble per address, drawn from GA of that node's own log-length."""
    out = {}
    for a, s in dist.pairs:
        _, m_node = label_at(code, a)
        out[a] = sample_ensemble(m_node, s, ensemble_stream(seed, a))
    return out


def decode_ca(code: RmCode, llr, dist: AutomorphismDistribution,
              ensembles: Mapping[str, AutomorphismEnsemble]) -> np.ndarray:
    arr, single = _as_batch(llr)
    _check_length(code, arr)
    dist.validate(code)
    perms = {}
    for a, s in dist.pairs:
        ens = ensembles.get(a)
        if ens is None or len(ens) < s:
            raise ValueError(f"need an ensemble of size {s} at address {a or '-'}")
        if ens.m != label_at(code, a)[1]:
            raise ValueError(f"ensemble at {a or '-'} has the wrong log-length")
        fwd, inv = ens.prefix(s).index_arrays()
        perms[a] = (fwd, inv)
    out = _ca(code.r, code.m, arr, "", dist.sizes, perms, A_STAR)
    return out[0] if single else out


# -- SCL -----------------------------------------------------------------------

def _select(costs: np.ndarray, lmax: int) -> np.ndarray:
    """Indices of the lmax lowest costs; stable, so ties keep list order."""
    order = np.argsort(costs, kind="stable")
    return order[:lmax]


def _scl(r, m, llrs, costs, lmax):
    """List decoder over length-1 atoms.

    ``llrs`` is (l_in, 2^m), ``costs`` (l_in,).  Returns codewords
    (l_out, 2^m), parent indices into the input list and costs, sorted by
    cost.
    """
    l_in = len(costs)
    if m == 0:
        lam = llrs[:, 0]
        if r < 0:
            return np.zeros((l_in, 1), dtype=np.uint8), np.arange(l_in), costs + lsigmoid(lam)
        bits = np.tile(np.array([0, 1], dtype=np.uint8), l_in)
        parents = np.repeat(np.arange(l_in), 2)
        tentative = np.stack([costs + lsigmoid(lam), costs + lsigmoid(-lam)], axis=1).ravel()
        keep = _select(tentative, lmax)
        return bits[keep, None], parents[keep], tentative[keep]
    half = 1 << (m - 1)
    left, right = llrs[:, :half], llrs[:, half:]
    vs, p, s2 = _scl(r - 1, m - 1, soft_xor(left, right), costs, lmax)
    u_in = soft_add(left[p], right[p], vs)
    us, q, s1 = _scl(r, m - 1, u_in, s2, lmax)
    words = np.concatenate([us, us ^ vs[q]], axis=1)
    return words, p[q], s1


def scl_list(code: RmCode, llr, lmax: int, initial_cost: float = 0.0):
    """Root SCL output list: (codewords, parent indices, costs)."""
    if code.r < 0:
        raise ValueError("SCL decoding requires r >= 0")
    if lmax < 2:
        raise ValueError("maximum list size must be at least 2")
    lam = np.asarray(llr, dtype=np.float64)
    _check_length(code, lam[None, :])
    return _scl(code.r, code.m, lam[None, :], np.array([initial_cost]), lmax)


def decode_scl(code: RmCode, llr, lmax: int) -> np.ndarray:
    """SCL decoding; the final pick is the candidate of least analog weight."""
    arr, single = _as_batch(llr)
    _check_length(code, arr)
    out = np.empty(arr.shape, dtype=np.uint8)
    for i, lam in enumerate(arr):
        words, _, _ = scl_list(code, lam, lmax)
        out[i] = words[np.argmin(analog_weight(words, lam))]
    return out[0] if single else out


# -- decoder specs -------------------------------------------------------------

_PAIR = re.compile(r"\(\s*(-|[01]+)\s*,\s*(\d+)\s*\)")


@dataclass(frozen=True)
class DecoderSpec:
    kind: str                      # gmc | ml | scl | ae | ca
    size: int = 1                  # list size (scl) or ensemble size (ae)
    dist: AutomorphismDistribution = AutomorphismDistribution()

    @classmethod
    def parse(cls, text: str) -> "DecoderSpec":
        s = text.strip().replace(" ", "")
        if s in ("gmc", "ml"):
            return cls(s)
        head, sep, tail = s.partition(":")
        if not sep:
            raise ValueError(f"unknown decoder spec {text!r}")
        if head in ("scl", "ae"):
            if not tail.isdigit():
                raise ValueError(f"{head} needs an integer size, got {tail!r}")
            size = int(tail)
            if head == "scl" and size < 2:
                raise ValueError("scl list size must be >= 2")
            if head == "ae" and size < 1:
                raise ValueError("ae ensemble size must be >= 1")
            return cls(head, size)
        if head == "ca":
            if not (tail.startswith("{") and tail.endswith("}")):
                raise ValueError(f"ca spec must look like ca:{{(addr,size),...}}, got {text!r}")
            body = tail[1:-1]
            pairs = []
            pos = 0
            while pos < len(body):
                mt = _PAIR.match(body, pos)
                if not mt:
                    raise ValueError(f"malformed pair list in {text!r}")
                addr = "" if mt.group(1) == "-" else mt.group(1)
                pairs.append((addr, int(mt.group(2))))
                pos = mt.end()
                if pos < len(body):
                    if body[pos] not in ",;":
                        raise ValueError(f"malformed pair list in {text!r}")
                    pos += 1
            sizes = dict(pairs)
            if len(sizes) != len(pairs):
                raise ValueError(f"duplicate addresses in {text!r}")
            if any(v < 1 for v in sizes.values()):
                raise ValueError("ensemble sizes must be >= 1")
            return cls("ca", dist=AutomorphismDistribution.from_sizes(sizes))
        raise ValueError(f"unknown decoder spec {text!r}")

    def render(self) -> str:
        if self.kind in ("gmc", "ml"):
            return self.kind
        if self.kind in ("scl", "ae"):
            return f"{self.kind}:{self.size}"
        return "ca:{" + ",".join(f"({a or '-'},{s})" for a, s in self.dist.pairs) + "}"

    def __str__(self):
        return self.render()

    def distribution(self) -> AutomorphismDistribution:
        """Equivalent CA distribution for gmc / ae / ca specs."""
        if self.kind == "gmc":
            return AutomorphismDistribution()
        if self.kind == "ae":
            return AutomorphismDistribution.from_sizes({"": self.size})
        if self.kind == "ca":
            return self.dist
        raise ValueError(f"{self.kind} has no automorphism distribution")


def build_decoder(spec: DecoderSpec | str, code: RmCode, seed: int = 0,
                  ensembles: Optional[Mapping[str, AutomorphismEnsemble]] = None
                  ) -> Callable[[np.ndarray], np.ndarray]:
    """Batch decoder function for a spec with ensembles fixed from ``seed``."""
    if isinstance(spec, str):
        spec = DecoderSpec.parse(spec)
    if spec.kind == "gmc":
        return lambda llr: decode_gmc(code, llr)
    if spec.kind == "ml":
        return lambda llr: _ml(code, _as_batch(llr)[0])
    if spec.kind == "scl":
        return lambda llr: decode_scl(code, llr, spec.size)
    dist = spec.distribution()
    dist.validate(code)
    if ensembles is None:
        ensembles = sample_ensembles(code, dist, seed)
    if spec.kind == "ae":
        if spec.size == 1:
            return lambda llr: decode_gmc(code, llr)
        ens = ensembles[""]
        return lambda llr: decode_ae(code, llr, ens)
    return lambda llr: decode_ca(code, llr, dist, ensembles)



# -- leaf-level tracing ----------------------------------------------------------

def _gmc_traced(r, m, llr, addr, trace):
    if (r, m) in A_STAR:
        out = _leaf(r, m, llr)
        trace[addr] = out
        return out
    half = llr.shape[-1] // 2
    left, right = llr[:, :half], llr[:, half:]
    v = _gmc_traced(r - 1, m - 1, soft_xor(left, right), addr + "1", trace)
    u = _gmc_traced(r, m - 1, soft_add(left, right, v), addr + "0", trace)
    return np.concatenate([u, u ^ v], axis=1)


def gmc_trace(code: RmCode, llr) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """GMC over A* on a batch, also returning every leaf's local decision."""
    arr, _ = _as_batch(llr)
    _check_length(code, arr)
    trace: dict[str, np.ndarray] = {}
    out = _gmc_traced(code.r, code.m, arr, "", trace)
    return out, trace


def leaf_constituents(code: RmCode, c) -> dict[str, np.ndarray]:
    """Local words of a (batch of) codeword(s) at each leaf of the A* tree."""
    words = np.atleast_2d(np.asarray(c, dtype=np.uint8))
    out: dict[str, np.ndarray] = {}

    def walk(r, m, w, addr):
        if (r, m) in A_STAR:
            out[addr] = w
            return
        half = w.shape[-1] // 2
        u = w[:, :half]
        walk(r - 1, m - 1, u ^ w[:, half:], addr + "1")
        walk(r, m - 1, u, addr + "0")

    walk(code.r, code.m, words, "")
    return out
