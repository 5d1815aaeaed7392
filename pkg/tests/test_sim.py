import json

import numpy as np
import pytest

from rmlab.complexity import chi_ae, chi_ca
from rmlab.decoders import DecoderSpec, decode_gmc
from rmlab.rm_code import RmCode, rightmost_composite_addresses
from rmlab.sim import (
    BlerEstimate,
    SimOptions,
    SweepPoint,
    enumerate_heuristic_distributions,
    estimate_bler,
    first_error_profile,
    gap_to_csl,
    make_trials,
    pareto_frontier,
    points_from_json,
    points_to_json,
    search_snr_at_bler,
    write_bler_csv,
)
from reference_values import RM49_PARETO


def test_bler_estimate():
    est = BlerEstimate(10, 1000)
    assert est.bler == 0.01
    lo, hi = est.ci95
    assert lo < 0.01 < hi
    assert BlerEstimate(0, 100).ci95[0] == 0.0
    with pytest.raises(ValueError):
        BlerEstimate(5, 3)


def test_rel_std_error_at_100_errors():
    for trials in (200, 10_000, 10**6):
        assert BlerEstimate(100, trials).rel_std_error <= 0.1


def test_make_trials_batch_independent():
    code = RmCode(2, 5)
    cw, lam = make_trials(code, 2.0, 3, 0, 50)
    cw2, lam2 = make_trials(code, 2.0, 3, 20, 50)
    assert np.array_equal(cw[20:], cw2) and np.array_equal(lam[20:], lam2)


def test_make_trials_common_noise_across_snr():
    code = RmCode(2, 4)
    _, a = make_trials(code, 1.0, 5, 0, 10, all_zero=True)
    _, b = make_trials(code, 4.0, 5, 0, 10, all_zero=True)
    # same underlying noise draws; only the scaling differs
    s1, s4 = 10 ** 0.1, 10 ** 0.4
    assert np.allclose((a / (2 * s1) - 1) * np.sqrt(s1), (b / (2 * s4) - 1) * np.sqrt(s4))


def test_high_snr_is_error_free():
    est = estimate_bler("gmc", RmCode(2, 4), 30.0, 10_000, 100, seed=1)
    assert est.errors == 0 and est.trials == 10_000 and est.bler == 0.0


def test_estimate_is_deterministic_and_batch_invariant():
    code = RmCode(2, 5)
    a = estimate_bler("gmc", code, 1.0, 5000, 40, seed=4)
    b = estimate_bler("gmc", code, 1.0, 5000, 40, seed=4, opts=SimOptions(batch=137))
    assert a == b and a.errors == 40


def test_estimate_parallel_matches_serial():
    code = RmCode(2, 5)
    a = estimate_bler("ae:2", code, 2.0, 3000, 10**9, seed=2, opts=SimOptions(batch=500))
    b = estimate_bler("ae:2", code, 2.0, 3000, 10**9, seed=2, opts=SimOptions(batch=500, workers=2))
    assert a == b


def test_resampled_ensembles_option_runs():
    code = RmCode(3, 6)
    est = estimate_bler("ca:{(1,2)}", code, 2.0, 300, 10**9, seed=2, opts=SimOptions(resample_ensembles=True))
    assert est.trials == 300


def test_paired_decoders():
    code = RmCode(2, 4)
    ml = estimate_bler("ml", code, 2.0, 4000, 10**9, seed=7)
    scl = estimate_bler("scl:2048", code, 2.0, 400, 10**9, seed=7)
    ml_small = estimate_bler("ml", code, 2.0, 400, 10**9, seed=7)
    gmc = estimate_bler("gmc", code, 2.0, 4000, 10**9, seed=7)
    assert scl.errors == ml_small.errors
    assert ml.errors <= gmc.errors


def test_ae_errors_nonincreasing_in_size_on_nested_ensembles():
    code = RmCode(3, 6)
    errs = [estimate_bler(f"ae:{s}", code, 2.0, 2000, 10**9, seed=3).errors for s in (1, 2, 4, 8)]
    assert all(a >= b for a, b in zip(errs, errs[1:]))


def test_search_ml_rm13():
    code = RmCode(1, 3)
    easy = search_snr_at_bler("ml", code, 0.5, seed=1, min_errors=30)
    hard = search_snr_at_bler("ml", code, 1e-2, seed=1, min_errors=30)
    assert -5 < easy.snr_db < hard.snr_db < 10
    assert easy.lo <= easy.snr_db <= easy.hi and easy.hi - easy.lo <= 0.05


def test_search_bracket_errors():
    with pytest.raises(RuntimeError):
        search_snr_at_bler("gmc", RmCode(1, 3), 0.5, seed=1, lo=8.0, hi=10.0, min_errors=20)
    with pytest.raises(ValueError):
        search_snr_at_bler("gmc", RmCode(1, 3), 1.5)


def test_gap_to_csl():
    assert gap_to_csl(4.965, RmCode(4, 9)) == pytest.approx(4.778, abs=1e-3)


def test_first_error_profile_noiseless_empty():
    prof = first_error_profile(RmCode(4, 9), 40.0, 500, seed=1)
    assert prof.blocks == 0 and prof.fractions == {}


def test_first_error_profile_matches_block_errors():
    code = RmCode(3, 6)
    prof = first_error_profile(code, 2.0, 3000, seed=6)
    cw, lam = make_trials(code, 2.0, 6, 0, 3000)
    errors = (decode_gmc(code, lam) != cw).any(axis=1).sum()
    # every block error has a first erring leaf, and a leaf error always propagates
    assert prof.blocks == errors
    assert sum(prof.fractions.values()) == pytest.approx(1.0, abs=1e-9)
    assert prof.ranked()[0][1] == max(prof.fractions.values())


def test_heuristic_count_rm49():
    assert rightmost_composite_addresses(RmCode(4, 9)) == ["", "1", "11"]
    dists = enumerate_heuristic_distributions(RmCode(4, 9))
    assert len(dists) == 1 + 6 + 36 + 216 == 259
    assert len({d.pairs for d in dists}) == 259
    for d in dists:
        d.validate(RmCode(4, 9))
        sizes = [d.size_at(a) for a in ["", "1", "11"]]
        for i, s in enumerate(sizes):
            if s >= 2:
                assert all(t >= 2 for t in sizes[i:])


def test_heuristic_budget():
    code = RmCode(4, 9)
    budget = chi_ae(4, 9, 4)
    dists = enumerate_heuristic_distributions(code, complexity_budget=budget)
    keys = {d.pairs for d in dists}
    assert (("11", 2),) in keys
    assert (("", 7), ("1", 7), ("11", 7)) not in keys
    assert all(chi_ca(4, 9, d) <= budget for d in dists)


def test_heuristic_contains_rightmost_pareto_rows():
    dists = {d.pairs for d in enumerate_heuristic_distributions(RmCode(4, 9))}
    for spec, _, _ in RM49_PARETO:
        d = DecoderSpec.parse(spec).distribution()
        if all(a in ("", "1", "11") for a, _ in d.pairs):
            assert d.pairs in dists


def test_pareto_examples():
    one = [SweepPoint("a", 10, 5.0)]
    assert pareto_frontier(one) == one
    pts = [SweepPoint("a", 10, 5.0), SweepPoint("b", 20, 4.0), SweepPoint("c", 15, 4.5)]
    assert [p.decoder_spec for p in pareto_frontier(pts)] == ["a", "c", "b"]
    pts = [SweepPoint("a", 10, 5.0), SweepPoint("b", 12, 5.0)]
    assert [p.decoder_spec for p in pareto_frontier(pts)] == ["a"]
    with pytest.raises(ValueError):
        SweepPoint("z", 0, 1.0)


def test_reference_pareto_rows_are_all_efficient():
    pts = [SweepPoint(s, float(o), float(g)) for s, o, g in RM49_PARETO]
    assert pareto_frontier(pts) == pts


def test_json_roundtrip():
    pts = [SweepPoint("gmc", 32.043, 4.778), SweepPoint("ca:{(11,2)}", 39.984, 4.356)]
    text = points_to_json(pts)
    assert points_from_json(text) == pts
    assert set(json.loads(text)[0]) == {"decoder_spec", "ops_per_info_bit", "gap_db"}


def test_csv_output(tmp_path):
    path = tmp_path / "b.csv"
    write_bler_csv(path, [("gmc", 3.0, BlerEstimate(5, 100))])
    lines = path.read_text().splitlines()
    assert lines[0] == "decoder_spec,snr_db,trials,errors,bler"
    assert lines[1] == "gmc,3,100,5,0.05"
