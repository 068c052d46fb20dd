"""Rank checks. Several of the expected outcomes below are failures: the
paper-exact slot budget leaves one r-subset without a private B row, and the
resulting overlap is structural (it shows up for every channel draw)."""

from math import comb

import numpy as np
import pytest
import sympy

from bia.channel import Representation, draw_channel, received_basis
from bia.construct import construct
from bia.errors import DecodabilityError, LemmaViolation
from bia.verify import (audit_converse_inequalities, check_alignment,
                        check_desired_clean, check_shared_independence,
                        check_tx_independence, dimension_census,
                        expected_census, verify_construction, worker_count)


def received(K, r=None, mode="paper-exact", seed=1, rep=Representation.EXACT):
    cons = construct(K, r, mode)
    ch = draw_channel(cons.params, seed, rep)
    return cons, received_basis(ch, cons.switching, cons.precoders)


def sympy_rank(cols):
    return sympy.Matrix([list(map(int, c)) for c in cols]).rank()


@pytest.mark.parametrize("K,r,mode", [(3, None, "paper-exact"), (5, None, "paper-exact"),
                                      (5, None, "padded"), (4, 3, "padded"),
                                      (7, None, "paper-exact")])
def test_tx_independence(K, r, mode):
    cons = construct(K, r, mode)
    for q in range(1, K + 1):
        rep = check_tx_independence(cons.precoders, q)
        assert rep.passed and rep.details["rank"] == comb(K - 1, cons.params.r - 1)


def test_alignment_and_shared_independence_k5():
    cons, rb = received(5)
    for T in cons.params.subsets:
        for l in range(1, 6):
            if l not in T:
                assert check_alignment(rb, T, l).passed
        rep = check_shared_independence(rb, T)
        assert rep.passed and set(rep.details["ranks"].values()) == {2}
    assert not check_alignment(rb, (1, 2), None).applicable
    with pytest.raises(ValueError):
        check_alignment(rb, (1, 2), 1)


def test_alignment_violation_detected():
    cons, rb = received(5)
    # a fabricated basis where receiver 3 sees two copies through different modes
    M = np.array(rb.matrices[3], dtype=object)
    k = cons.precoders.shared_index[(1, 2)].columns[1] - 1
    M[0, k] = M[0, k] + 1 if M[0, k] else 1
    M[1, k] = 0 if M[1, k] else 1
    broken = type(rb)(rb.params, rb.precoders, {**rb.matrices, 3: M}, rb.labels, True)
    with pytest.raises(LemmaViolation) as err:
        check_alignment(broken, (1, 2), 3)
    assert err.value.report.details["dim"] == 2


def test_desired_clean_k5_receivers():
    _, rb = received(5)
    for j in (4, 5):
        assert check_desired_clean(rb, j).passed
    for j in (1, 2, 3):
        with pytest.raises(DecodabilityError) as err:
            check_desired_clean(rb, j)
        det = err.value.report.details
        assert det["intersection_dim"] == 1 and det["joint_rank"] == 13


def test_desired_clean_against_sympy():
    _, rb = received(3, seed=4)
    M = rb.matrices[1]
    assert sympy_rank([M[:, c] for c in range(M.shape[1])]) == 4  # one short of n=5
    with pytest.raises(DecodabilityError):
        check_desired_clean(rb, 1)
    assert check_desired_clean(rb, 2).passed


def test_padded_k5_passes_everything():
    cons, rb = received(5, mode="padded")
    for j in range(1, 6):
        assert check_desired_clean(rb, j).passed
        c = dimension_census(rb, j)
        assert c.as_tuple() == expected_census(cons.params) == (4, 8, 6, 14)


def test_census_k6_r2():
    cons, rb = received(6, 2)
    assert expected_census(cons.params) == (5, 10, 10, 20)
    tuples = [dimension_census(rb, j, strict=False).as_tuple() for j in range(1, 7)]
    # receivers 1..4 lose one dimension to the uncovered pair (5, 6)
    assert tuples[:4] == [(5, 10, 10, 19)] * 4
    assert tuples[4:] == [(5, 10, 10, 20)] * 2


def test_converse_audit_slack():
    cons, rb = received(5, mode="padded")
    cens = [dimension_census(rb, j) for j in range(1, 6)]
    audit = audit_converse_inequalities(cens, cons.params)
    # sum d_i = 20, (r-1) * 6 aligned foreign pairs -> lhs 14, n = 15
    assert audit.passed and set(audit.slack.values()) == {1}
    cons, rb = received(5)
    cens = [dimension_census(rb, j, strict=False) for j in range(1, 6)]
    assert set(audit_converse_inequalities(cens, cons.params).slack.values()) == {0}


def test_float_path_agrees_with_exact():
    cons = construct(5, mode="padded")
    exact = verify_construction(cons, [1, 2], Representation.EXACT)
    flt = verify_construction(cons, [1, 2], Representation.FLOAT)
    assert exact["summary"] == flt["summary"]
    assert exact["passed"] and flt["passed"]


def test_report_is_ordered_and_parallel_safe(monkeypatch):
    cons = construct(4)
    seeds = [5, 1, 9]
    serial = verify_construction(cons, seeds, workers=1)
    monkeypatch.setenv("BIA_THREADS", "2")
    parallel = verify_construction(cons, seeds, workers=4)
    assert [s["seed"] for s in parallel["per_seed"]] == seeds
    assert serial == parallel
    assert worker_count(8) == 2


@pytest.mark.parametrize("K", [1, 2])
def test_trivial_cases_pass(K):
    rep = verify_construction(construct(K), [1, 2, 3])
    assert rep["passed"], rep["failing_seeds"]
