"""Monte Carlo BLER estimation, SNR search, first-error profiling and Pareto tools.

Trial ``t`` of a run with seed ``s`` draws its noise and message from the
stream ``RngStream(s, t)``, so results do not depend on batch size, worker
count or scheduling, and two decoders run with one seed see identical noise.
"""
from __future__ import annotations

import csv
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from math import log10
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy.stats import binomtest

from .channel import DOMAIN_TRIAL_ENSEMBLE, BiAwgn, RngStream, csl_snr
from .complexity import chi_ca, complexity_report
from .decoders import (
    AutomorphismDistribution,
    DecoderSpec,
    build_decoder,
    decode_ca,
    gmc_trace,
    leaf_constituents,
)
from .automorphism import sample_ensemble
from .rm_code import A_STAR, RmCode, decoding_tree, generator_matrix, label_at, rightmost_composite_addresses

log = logging.getLogger(__name__)

DEFAULT_BATCH = 2000


@dataclass(frozen=True)
class SimOptions:
    batch: int = DEFAULT_BATCH
    workers: int = 1
    all_zero: bool = False
    resample_ensembles: bool = False


@dataclass(frozen=True)
class BlerEstimate:
    errors: int
    trials: int

    def __post_init__(self):
        if not 0 <= self.errors <= self.trials:
            raise ValueError("need 0 <= errors <= trials")

    @property
    def bler(self) -> float:
        return self.errors / self.trials if self.trials else float("nan")

    @property
    def ci95(self) -> tuple[float, float]:
        ci = binomtest(self.errors, self.trials).proportion_ci(0.95, method="wilson")
        return float(ci.low), float(ci.high)

    @property
    def rel_std_error(self) -> float:
        if self.errors == 0:
            return float("inf")
        p = self.bler
        return float(np.sqrt((1 - p) / (self.trials * p)))


# -- trial generation -----------------------------------------------------------

def make_trials(code: RmCode, snr_db: float, seed: int, start: int, stop: int,
                all_zero: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Codewords and LLRs for trials ``start .. stop-1``."""
    n, k = code.n, code.k
    ch = BiAwgn.from_snr_db(snr_db)
    noise = np.empty((stop - start, n))
    msgs = np.zeros((stop - start, k))
    for row, t in enumerate(range(start, stop)):
        gen = RngStream(seed, t).generator()
        noise[row] = gen.standard_normal(n)
        if not all_zero:
            msgs[row] = gen.integers(0, 2, k)
    if all_zero or k == 0:
        cw = np.zeros((stop - start, n), dtype=np.uint8)
    else:
        # float matmul is exact here (sums <= k < 2^53)
        cw = (np.rint(msgs @ generator_matrix(code).astype(np.float64)).astype(np.int64) & 1).astype(np.uint8)
    y = (1.0 - 2.0 * cw) + np.sqrt(ch.sigma2) * noise
    return cw, 2.0 * y / ch.sigma2


@lru_cache(maxsize=32)
def _decoder(spec: str, r: int, m: int, seed: int):
    return build_decoder(spec, RmCode(r, m), seed)


def _per_trial_decode(spec: DecoderSpec, code: RmCode, seed: int, start: int, llr: np.ndarray) -> np.ndarray:
    """Decode with ensembles re-drawn for every trial."""
    dist = spec.distribution()
    out = np.empty(llr.shape, dtype=np.uint8)
    for row, lam in enumerate(llr):
        gen = RngStream(seed, start + row, DOMAIN_TRIAL_ENSEMBLE).generator()
        ens = {a: sample_ensemble(label_at(code, a)[1], s, gen) for a, s in dist.pairs}
        out[row] = decode_ca(code, lam, dist, ens)
    return out


def block_errors(spec: str, r: int, m: int, snr_db: float, seed: int, start: int, stop: int,
                 all_zero: bool = False, resample: bool = False) -> np.ndarray:
    """Boolean block-error flags for trials ``start .. stop-1``."""
    code = RmCode(r, m)
    cw, llr = make_trials(code, snr_db, seed, start, stop, all_zero)
    parsed = DecoderSpec.parse(spec)
    if resample and parsed.kind in ("ae", "ca"):
        dec = _per_trial_decode(parsed, code, seed, start, llr)
    else:
        dec = _decoder(parsed.render(), r, m, seed)(llr)
    return (dec != cw).any(axis=1)


def _error_batches(spec: str, code: RmCode, snr_db: float, seed: int, max_trials: int,
                   opts: SimOptions, start: int = 0) -> Iterator[np.ndarray]:
    """Yield error flags in trial order, one batch at a time."""
    chunks = [(a, min(a + opts.batch, start + max_trials))
              for a in range(start, start + max_trials, opts.batch)]
    args = (spec, code.r, code.m, snr_db, seed)
    if opts.workers <= 1:
        for a, b in chunks:
            yield block_errors(*args, a, b, opts.all_zero, opts.resample_ensembles)
        return
    with ProcessPoolExecutor(opts.workers) as pool:
        for i in range(0, len(chunks), opts.workers):
            wave = chunks[i:i + opts.workers]
            futures = [pool.submit(block_errors, *args, a, b, opts.all_zero, opts.resample_ensembles)
                       for a, b in wave]
            for fut in futures:
                yield fut.result()


def estimate_bler(decoder_spec: str, code: RmCode, snr_db: float, max_trials: int,
                  min_errors: int, seed: int, opts: SimOptions = SimOptions()) -> BlerEstimate:
    """Count block errors until ``min_errors`` errors or ``max_trials`` trials.

    The stop is exact to the trial, so the result is independent of batching.
    """
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    spec = DecoderSpec.parse(decoder_spec).render()
    errors = trials = 0
    for flags in _error_batches(spec, code, snr_db, seed, max_trials, opts):
        cum = errors + np.cumsum(flags)
        hit = np.flatnonzero(cum >= min_errors) if min_errors > 0 else np.array([], dtype=int)
        if len(hit):
            trials += int(hit[0]) + 1
            errors = int(cum[hit[0]])
            break
        trials += len(flags)
        errors = int(cum[-1])
    return BlerEstimate(errors, trials)


def _side_of_target(spec: str, code: RmCode, snr_db: float, target: float, seed: int,
                    max_trials: int, min_errors: int, opts: SimOptions) -> tuple[bool, BlerEstimate]:
    """Is BLER above target at this SNR?  Stops once the Wilson interval decides."""
    errors = trials = 0
    for flags in _error_batches(spec, code, snr_db, seed, max_trials, opts):
        errors += int(flags.sum())
        trials += len(flags)
        est = BlerEstimate(errors, trials)
        lo, hi = est.ci95
        if lo > target or hi < target or errors >= min_errors:
            break
    return est.bler > target, est


@dataclass
class SnrSearch:
    snr_db: float
    lo: float
    hi: float
    at_lo: BlerEstimate
    at_hi: BlerEstimate
    probes: list = field(default_factory=list)


def search_snr_at_bler(decoder_spec: str, code: RmCode, target_bler: float = 1e-3, seed: int = 1,
                       lo: float = -5.0, hi: float = 10.0, resolution: float = 0.05,
                       min_errors: int = 100, max_trials: Optional[int] = None,
                       opts: SimOptions = SimOptions()) -> SnrSearch:
    """Bisect for the SNR (dB) where BLER crosses ``target_bler``.

    Bracket endpoints are re-estimated with ``min_errors`` errors each and the
    crossing is interpolated linearly in log10(BLER).
    """
    if not 0.0 < target_bler < 1.0:
        raise ValueError("target BLER must be in (0, 1)")
    if max_trials is None:
        max_trials = int(50 * min_errors / target_bler)
    spec = DecoderSpec.parse(decoder_spec).render()
    probes = []

    def above(snr):
        res, est = _side_of_target(spec, code, snr, target_bler, seed, max_trials, min_errors, opts)
        probes.append((snr, est.errors, est.trials))
        log.debug("%s @ %.3f dB: %d/%d", spec, snr, est.errors, est.trials)
        return res

    if not above(lo):
        raise RuntimeError(f"BLER already below {target_bler} at {lo} dB; lower the bracket")
    if above(hi):
        raise RuntimeError(f"BLER still above {target_bler} at {hi} dB; raise the bracket")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if above(mid):
            lo = mid
        else:
            hi = mid
    at_lo = estimate_bler(spec, code, lo, max_trials, min_errors, seed, opts)
    at_hi = estimate_bler(spec, code, hi, max_trials, min_errors, seed, opts)
    snr = 0.5 * (lo + hi)
    if 0 < at_hi.bler < at_lo.bler:
        frac = (log10(at_lo.bler) - log10(target_bler)) / (log10(at_lo.bler) - log10(at_hi.bler))
        snr = lo + min(max(frac, 0.0), 1.0) * (hi - lo)
    return SnrSearch(snr, lo, hi, at_lo, at_hi, probes)


def find_snr_at_bler(decoder_spec: str, code: RmCode, target_bler: float = 1e-3, seed: int = 1,
                     **kwargs) -> float:
    return search_snr_at_bler(decoder_spec, code, target_bler, seed, **kwargs).snr_db


def gap_to_csl(snr_db: float, code: RmCode) -> float:
    return snr_db - csl_snr(code.rate)


# -- first-error profiling ----------------------------------------------------------

@dataclass
class FirstErrorProfile:
    counts: dict[str, int]
    trials: int

    @property
    def blocks(self) -> int:
        return sum(self.counts.values())

    @property
    def fractions(self) -> dict[str, float]:
        total = self.blocks
        return {a: c / total for a, c in self.counts.items() if c} if total else {}

    def ranked(self) -> list[tuple[str, float]]:
        return sorted(self.fractions.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))


def first_error_profile(code: RmCode, snr_db: float, trials: int, seed: int,
                        batch: int = DEFAULT_BATCH) -> FirstErrorProfile:
    """Attribute each GMC block error to the first leaf (decoding order) that erred.

    Until a leaf errs, the decoder's LLRs equal the genie-aided ones, so the
    first mismatching leaf against the transmitted constituents is the one
    that triggered the error.
    """
    order = [leaf.address for leaf in decoding_tree(code, A_STAR).leaves()]
    counts = dict.fromkeys(order, 0)
    for a in range(0, trials, batch):
        b = min(a + batch, trials)
        cw, llr = make_trials(code, snr_db, seed, a, b)
        _, trace = gmc_trace(code, llr)
        truth = leaf_constituents(code, cw)
        wrong = np.stack([(trace[addr] != truth[addr]).any(axis=1) for addr in order], axis=1)
        erred = wrong.any(axis=1)
        first = np.argmax(wrong[erred], axis=1)
        for idx, cnt in zip(*np.unique(first, return_counts=True)):
            counts[order[idx]] += int(cnt)
    return FirstErrorProfile(counts, trials)


# -- automorphism distributions and the frontier ---------------------------------------

def enumerate_heuristic_distributions(code: RmCode, max_size: int = 7,
                                      complexity_budget: Optional[int] = None
                                      ) -> list[AutomorphismDistribution]:
    """Rightmost-only distributions whose enlarged nodes form a deepest-first run.

    Sizes range over 1..max_size; a rightmost node gets size >= 2 only if every
    deeper rightmost composite node does too.
    """
    nodes = rightmost_composite_addresses(code)
    if not nodes:
        raise ValueError(f"{code} has no composite nodes")
    out = []
    for depth in range(len(nodes) + 1):
        enlarged = nodes[len(nodes) - depth:]
        for sizes in itertools.product(range(2, max_size + 1), repeat=depth):
            dist = AutomorphismDistribution(tuple(zip(enlarged, sizes)))
            if complexity_budget is None or chi_ca(code.r, code.m, dist) <= complexity_budget:
                out.append(dist)
    return out


@dataclass(frozen=True)
class SweepPoint:
    decoder_spec: str
    ops_per_info_bit: float
    gap_db: float

    def __post_init__(self):
        if not self.ops_per_info_bit > 0:
            raise ValueError("ops_per_info_bit must be positive")


def pareto_frontier(points: Sequence[SweepPoint]) -> list[SweepPoint]:
    """Points not dominated in (fewer ops, smaller gap), sorted by ops."""
    def dominated(p):
        return any((q.ops_per_info_bit <= p.ops_per_info_bit and q.gap_db < p.gap_db)
                   or (q.ops_per_info_bit < p.ops_per_info_bit and q.gap_db <= p.gap_db)
                   for q in points)
    keep = [p for p in points if not dominated(p)]
    return sorted(keep, key=lambda p: (p.ops_per_info_bit, p.gap_db))


def run_sweep(code: RmCode, specs: Iterable[str], seed: int, target_bler: float = 1e-3,
              **search_kwargs) -> list[SweepPoint]:
    points = []
    for spec in specs:
        rep = complexity_report(code, spec)
        snr = find_snr_at_bler(spec, code, target_bler, seed, **search_kwargs)
        points.append(SweepPoint(rep.decoder, round(float(rep.ops_per_info_bit), 3),
                                 round(gap_to_csl(snr, code), 4)))
    return points


# -- I/O --------------------------------------------------------------------------

CSV_FIELDS = ("decoder_spec", "snr_db", "trials", "errors", "bler")


def write_bler_csv(path, rows: Iterable[tuple[str, float, BlerEstimate]]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for spec, snr, est in rows:
            w.writerow([spec, f"{snr:g}", est.trials, est.errors, f"{est.bler:.6g}"])


def points_to_json(points: Sequence[SweepPoint]) -> str:
    return json.dumps([asdict(p) for p in points], indent=2, sort_keys=True) + "\n"


def points_from_json(text: str) -> list[SweepPoint]:
    return [SweepPoint(str(d["decoder_spec"]), float(d["ops_per_info_bit"]), float(d["gap_db"]))
            for d in json.loads(text)]
