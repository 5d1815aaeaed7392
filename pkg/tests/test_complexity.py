from fractions import Fraction
from math import ceil, log2

import pytest

from rmlab.complexity import (
    SEL_TABLE,
    ca_breakdown,
    chi_ae,
    chi_ca,
    chi_gmc,
    chi_leaf,
    chi_leaf_first_order,
    chi_leaf_spc,
    chi_scl,
    chi_sel,
    complexity_report,
    ops_per_info_bit,
    scl_breakdown,
    selection_units_lower_bound,
)
from rmlab.rm_code import RmCode, decoding_tree
from reference_values import HALF_RATE, RM49_PARETO, SELECTION_COSTS, UNREACHABLE_AT_PRINTED_PRECISION, matches_printed


@pytest.mark.parametrize("m", range(1, 12))
def test_spc_leaf(m):
    n = 2**m
    itemized = n + (n - 1) + 1 + (n + (n - 1) + 1)
    assert chi_leaf_spc(m) == itemized == 2 ** (m + 2)


def test_spc_leaf_examples():
    assert chi_leaf_spc(3) == 32
    assert chi_leaf_spc(1) == 8


def test_first_order_leaf():
    assert chi_leaf_first_order(3) == 51
    assert chi_leaf_first_order(4) == 116
    for m in range(1, 10):
        n = 2**m
        fht_ops = m * n
        argmax_ops = n + (n - 1)   # |.| then comparisons
        assembly = n + m            # one initial copy, n - 1 copies, m + 1 sign/bit steps
        assert chi_leaf_first_order(m) == fht_ops + argmax_ops + 1 + assembly == (m + 3) * n + m


def test_other_leaf_labels():
    assert chi_leaf(-1, 3) == 0
    assert chi_leaf(0, 3) == 15
    assert chi_leaf(3, 3) == 8
    assert chi_leaf(2, 0) == 1
    with pytest.raises(ValueError):
        chi_leaf(2, 5)


def test_ca_small_example():
    assert chi_ca(2, 4, {}) == 51 + 32 + 32 == 115


def test_gmc_rm49_total():
    assert chi_gmc(4, 9) == 8203
    assert float(ops_per_info_bit(8203, RmCode(4, 9))) == pytest.approx(32.043, abs=5e-4)


def test_ae_with_size_one_is_gmc():
    for r, m in [(2, 5), (3, 7), (4, 9)]:
        assert chi_ca(r, m, {"": 1}) == chi_gmc(r, m) == chi_ca(r, m, None)


@pytest.mark.parametrize("spec,ops,_gap", RM49_PARETO)
def test_pareto_complexities(spec, ops, _gap):
    rep = complexity_report(RmCode(4, 9), spec)
    assert matches_printed(float(rep.ops_per_info_bit), ops)


@pytest.mark.parametrize("r,m,spec,ops", HALF_RATE)
def test_half_rate_complexities(r, m, spec, ops):
    value = float(complexity_report(RmCode(r, m), spec).ops_per_info_bit)
    if (r, m, spec) in UNREACHABLE_AT_PRINTED_PRECISION:
        k = RmCode(r, m).k
        assert not any(matches_printed(n / k, ops) for n in range(1500, 1700))
        assert matches_printed(value, ops, places=1)
    else:
        assert matches_printed(value, ops)


def test_rm37_gmc_exact_count():
    assert chi_gmc(3, 7) == 1606
    assert ops_per_info_bit(1606, RmCode(3, 7)) == Fraction(1606, 64)


def test_tabulated_trees_only_use_spc_and_first_order_leaves():
    for r, m in [(3, 7), (4, 9), (5, 11)]:
        for leaf in decoding_tree(RmCode(r, m)).leaves():
            rr, mm = leaf.label
            assert rr == 1 or rr == mm - 1


def test_breakdown_sums_to_total():
    for r, m, spec, _ in HALF_RATE:
        rep = complexity_report(RmCode(r, m), spec)
        assert sum(rep.breakdown.values()) == rep.total_ops
        assert rep.ops_per_info_bit * RmCode(r, m).k == rep.total_ops


def test_ca_monotone_in_sizes():
    base = {"": 1, "1": 2, "11": 3}
    ref = chi_ca(4, 9, base)
    for addr in base:
        bigger = dict(base)
        bigger[addr] += 1
        assert chi_ca(4, 9, bigger) >= ref


def test_ae_affine_in_size():
    r, m = 4, 9
    c1 = chi_ae(r, m, 1)
    n = 2**m
    for ell in range(2, 7):
        assert chi_ae(r, m, ell) == ell * c1 + (ell * 2 * n - 1)


def test_ca_rejects_invalid_distribution():
    with pytest.raises(ValueError):
        chi_ca(4, 9, {"111": 2})


def test_selection_table():
    for (l, n), v in SELECTION_COSTS.items():
        assert chi_sel(l, n) == v
        assert SEL_TABLE.is_tabulated(l, n)
    assert chi_sel(8, 4) == 0 and chi_sel(4, 4) == 0
    # the tabulated (6,12) entry equals the lower-bound construction
    assert 2 * selection_units_lower_bound(6, 12) - (12 - 6) == 30
    for (l, n), v in SELECTION_COSTS.items():
        assert v >= selection_units_lower_bound(l, n)


def test_selection_fallback():
    assert chi_sel(4, 16) == 2 * (12 * ceil(log2(5))) - 12
    assert not SEL_TABLE.is_tabulated(4, 16)


def test_scl_values():
    assert chi_scl(3, 7, 1, 6) / 64 == pytest.approx(225.797, abs=1e-3)
    assert chi_scl(4, 9, 1, 4) / 256 == pytest.approx(195.473, abs=1e-3)
    assert chi_scl(5, 11, 1, 4) / 1024 == pytest.approx(230.306, abs=1e-3)


def test_scl_leaf_rules():
    # RM(0,1): the right leaf has r < 0 (3 ops, no selection), the left leaf
    # keeps both bits (7 ops, chi_sel(4, 2) = 0), and the combine costs 1 + 2 + 2
    total, bd, _ = scl_breakdown(0, 1, 1, 4)
    assert bd["1"] == 3 and bd["0"] == 7 and total == 3 + 7 + 5
    # r >= 0 leaf, 2 inputs, lmax 4: 2*7 + chi_sel(4, 4)
    assert chi_scl(0, 0, 2, 4) == 14
    assert chi_scl(0, 0, 4, 4) == 28 + chi_sel(4, 8)
    with pytest.raises(ValueError):
        scl_breakdown(-1, 3, 1, 4)


def test_scl_report_flags_optimistic_fallback():
    assert not complexity_report(RmCode(3, 7), "scl:6").optimistic
    assert complexity_report(RmCode(3, 7), "scl:8").optimistic


def test_ops_per_info_bit_errors():
    with pytest.raises(ValueError):
        ops_per_info_bit(10, RmCode(-1, 3))
    assert ops_per_info_bit(20, RmCode(1, 3)) == 2 * ops_per_info_bit(10, RmCode(1, 3))


def test_ml_has_no_count():
    with pytest.raises(ValueError):
        complexity_report(RmCode(2, 4), "ml")


def test_breakdown_multiplicities():
    total, bd = ca_breakdown(4, 9, {"11": 3})
    assert total == sum(bd.values())
    # leaves under 11 are run three times per codeword
    assert bd["111"] == 3 * chi_leaf(1, 6)
    assert bd["1101"] == 3 * chi_leaf(1, 5)
    assert bd["0000"] == chi_leaf(4, 5) == chi_leaf_spc(5)
