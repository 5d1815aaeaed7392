"""Command-line front end.

Exit codes: 0 success, 1 usage or invalid input, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .channel import csl_snr
from .complexity import chi_ca, complexity_report
from .decoders import DecoderSpec, build_decoder
from .llr_math import analog_weight
from .rm_code import RmCode, bits_from_str, bits_to_str, encode
from .sim import (
    SimOptions,
    estimate_bler,
    enumerate_heuristic_distributions,
    first_error_profile,
    pareto_frontier,
    points_from_json,
    points_to_json,
    run_sweep,
    write_bler_csv,
)

log = logging.getLogger("rmlab")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    r: int = 4
    m: int = 9
    decoders: list[str] = field(default_factory=lambda: ["gmc"])
    snr_db: list[float] = field(default_factory=list)
    seed: int = 1
    max_trials: int = 100_000
    min_errors: int = 100
    target_bler: float = 1e-3
    lo: float = -5.0
    hi: float = 10.0
    batch: int = 2000
    workers: int = 1
    all_zero: bool = False
    resample_ensembles: bool = False
    csv: Optional[str] = None
    json: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known - {"code"}
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        data = dict(data)
        if "code" in data:
            data["r"], data["m"] = data.pop("code")
        cfg = cls(**data)
        cfg.decoders = [DecoderSpec.parse(s).render() for s in cfg.decoders]
        cfg.snr_db = [float(x) for x in cfg.snr_db]
        return cfg

    def to_dict(self) -> dict:
        d = asdict(self)
        d["code"] = [d.pop("r"), d.pop("m")]
        return d

    @property
    def code(self) -> RmCode:
        return RmCode(self.r, self.m)

    @property
    def sim_options(self) -> SimOptions:
        return SimOptions(self.batch, self.workers, self.all_zero, self.resample_ensembles)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_llrs(tokens: list[str]) -> np.ndarray:
    try:
        return np.array([float(t) for t in tokens], dtype=np.float64)
    except ValueError as exc:
        raise UsageError(f"bad LLR value: {exc}") from None


def _spec(text: str) -> DecoderSpec:
    try:
        return DecoderSpec.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- commands ------------------------------------------------------------------------

def cmd_encode(args) -> int:
    code = RmCode(args.r, args.m)
    try:
        msg = bits_from_str(args.message, code.k)
    except ValueError as exc:
        raise UsageError(f"{code} message: {exc}") from None
    print(bits_to_str(encode(code, msg)))
    return 0


def cmd_decode(args) -> int:
    code = RmCode(args.r, args.m)
    spec = _spec(args.decoder)
    llr = _parse_llrs(args.llr)
    if len(llr) != code.n:
        raise UsageError(f"{code} needs {code.n} LLRs, got {len(llr)}")
    try:
        word = build_decoder(spec, code, args.seed)(llr[None, :])[0]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(bits_to_str(word))
    print(f"weight {analog_weight(word, llr):g}")
    return 0


def cmd_complexity(args) -> int:
    code = RmCode(args.r, args.m)
    spec = _spec(args.decoder)
    try:
        report = complexity_report(code, spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(report.render())
    print(json.dumps(report.record(), sort_keys=True))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(report.record(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _load_config(args) -> RunConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    overrides = {
        "code": args.code, "decoders": args.decoder, "snr_db": args.snr, "seed": args.seed,
        "max_trials": args.max_trials, "min_errors": args.min_errors,
        "target_bler": args.target, "lo": args.lo, "hi": args.hi, "batch": args.batch,
        "workers": args.workers, "csv": args.csv, "json": args.json,
        "all_zero": args.all_zero or None, "resample_ensembles": args.resample_ensembles or None,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad configuration: {exc}") from None


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    if not cfg.snr_db:
        raise UsageError("simulate needs at least one SNR (--snr)")
    rows = []
    for spec in cfg.decoders:
        for snr in cfg.snr_db:
            est = estimate_bler(spec, cfg.code, snr, cfg.max_trials, cfg.min_errors, cfg.seed,
                                cfg.sim_options)
            rows.append((spec, snr, est))
            lo, hi = est.ci95
            print(f"{spec:<28} {snr:7.3f} dB  {est.errors:>6}/{est.trials:<9} bler {est.bler:.4g}"
                  f"  [{lo:.3g}, {hi:.3g}]")
    if cfg.csv:
        write_bler_csv(cfg.csv, rows)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    code = cfg.code
    specs = list(cfg.decoders)
    if args.heuristic:
        budget = complexity_report(code, args.budget).total_ops if args.budget else None
        specs = [DecoderSpec("ca", dist=d).render()
                 for d in enumerate_heuristic_distributions(code, args.max_size, budget)]
    points = run_sweep(code, specs, cfg.seed, cfg.target_bler, lo=cfg.lo, hi=cfg.hi,
                       min_errors=cfg.min_errors, opts=cfg.sim_options)
    text = points_to_json(points)
    if cfg.json:
        with open(cfg.json, "w") as fh:
            fh.write(text)
    for p in points:
        print(f"{p.decoder_spec:<28} {p.ops_per_info_bit:10.3f} ops/bit  gap {p.gap_db:.3f} dB")
    return 0


def cmd_pareto(args) -> int:
    with open(args.input) as fh:
        try:
            points = points_from_json(fh.read())
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"bad sweep file: {exc}") from None
    text = points_to_json(pareto_frontier(points))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_profile(args) -> int:
    code = RmCode(args.r, args.m)
    prof = first_error_profile(code, args.snr, args.trials, args.seed)
    print(f"{prof.blocks} block errors in {prof.trials} trials at {args.snr} dB")
    for addr, frac in prof.ranked()[: args.top]:
        print(f"{addr or '-':<12} {100 * frac:6.2f} %")
    return 0


def cmd_heuristic(args) -> int:
    code = RmCode(args.r, args.m)
    budget = complexity_report(code, args.budget).total_ops if args.budget else None
    for d in enumerate_heuristic_distributions(code, args.max_size, budget):
        ops = chi_ca(code.r, code.m, d) / code.k
        print(f"{str(d):<32} {ops:10.3f}")
    return 0


def cmd_csl(args) -> int:
    print(f"{csl_snr(args.rate):.4f}")
    return 0


# -- parser --------------------------------------------------------------------------

def _add_run_flags(p):
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--code", type=int, nargs=2, metavar=("R", "M"))
    p.add_argument("--decoder", action="append", help="decoder spec (repeatable)")
    p.add_argument("--snr", type=float, nargs="+", help="SNR points in dB (SNR = 1/sigma^2)")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-trials", type=int)
    p.add_argument("--min-errors", type=int)
    p.add_argument("--target", type=float, help="target BLER for SNR searches")
    p.add_argument("--lo", type=float, help="lower SNR bracket (dB)")
    p.add_argument("--hi", type=float, help="upper SNR bracket (dB)")
    p.add_argument("--batch", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--all-zero", action="store_true", help="transmit the all-zero codeword")
    p.add_argument("--resample-ensembles", action="store_true",
                   help="draw fresh automorphism ensembles for every trial")
    p.add_argument("--csv", help="write BLER rows here")
    p.add_argument("--json", help="write the campaign summary here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rmlab", description="Reed-Muller decoding laboratory")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="encode a 0/1 message")
    p.add_argument("r", type=int)
    p.add_argument("m", type=int)
    p.add_argument("message")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode one LLR vector")
    p.add_argument("--seed", type=int, default=1, help="seed for automorphism ensembles")
    p.add_argument("r", type=int)
    p.add_argument("m", type=int)
    p.add_argument("decoder", help="gmc | ml | scl:L | ae:N | ca:{(addr,size),...}")
    p.add_argument("llr", nargs="+", help="2^m LLR values; inf and -inf allowed")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("complexity", help="worst-case operation count")
    p.add_argument("r", type=int)
    p.add_argument("m", type=int)
    p.add_argument("decoder")
    p.add_argument("--json", help="also write the record to this file")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("simulate", help="BLER at fixed SNR points, CSV output")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="gap to the constrained Shannon limit per decoder, JSON output")
    _add_run_flags(p)
    p.add_argument("--heuristic", action="store_true",
                   help="sweep the heuristic rightmost distributions instead of --decoder")
    p.add_argument("--max-size", type=int, default=7)
    p.add_argument("--budget", help="decoder spec whose complexity caps the heuristic set")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pareto", help="Pareto frontier of a sweep JSON file")
    p.add_argument("input")
    p.add_argument("--output")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("profile", help="first-error attribution of GMC leaves")
    p.add_argument("r", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--snr", type=float, default=4.0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--top", type=int, default=8)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("heuristic", help="list heuristic rightmost distributions")
    p.add_argument("r", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--max-size", type=int, default=7)
    p.add_argument("--budget", help="decoder spec whose complexity caps the list")
    p.set_defaults(func=cmd_heuristic)

    p = sub.add_parser("csl", help="constrained Shannon limit (dB) for a code rate")
    p.add_argument("rate", type=float)
    p.set_defaults(func=cmd_csl)
    return parser


def _protect_llrs(argv: list[str]) -> list[str]:
    """Insert '--' before the LLR list of ``decode`` so '-inf' is not read as a flag."""
    if "decode" not in argv or "--" in argv:
        return argv
    i = argv.index("decode") + 1
    positional = 0
    while i < len(argv) and positional < 3:
        if argv[i] == "--seed":
            i += 2
            continue
        if argv[i].startswith("--seed="):
            i += 1
            continue
        positional += 1
        i += 1
    return argv[:i] + ["--"] + argv[i:]


def main(argv: Optional[list[str]] = None) -> int:
    argv = _protect_llrs(list(sys.argv[1:] if argv is None else argv))
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rmlab: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"rmlab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
