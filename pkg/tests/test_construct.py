#!/usr/bin/env python

from fractions import Fraction

import numpy as np
import pytest

from torsiongrowth.core.abelian import FGAbelian, GrowthFunction
from torsiongrowth.core.construct import (ConstructionState, GammaCertificate,
                                          HypothesisUnmet,
                                          cauchy_congruence_check,
                                          deficiency_check, gamma_certificate,
                                          init, run_construction, step)
from torsiongrowth.core.cosets import SearchBudget
from torsiongrowth.core.freewords import Word


@pytest.fixture(scope="module")
def first_step():
    return step(init(2, GrowthFunction()), rng=np.random.default_rng(0))


def test_deficiency_check():
    result = deficiency_check([3, 4], 2)

    assert result.value == Fraction(3, 8)
    assert result.bound == Fraction(1, 2)
    assert result.ok
    assert not deficiency_check([1], 2).ok
    assert deficiency_check([3], 2, [5]).value == Fraction(5, 32)
    with pytest.raises(ValueError):
        deficiency_check([3, 4], 2, [3])

def test_deficiency_stays_below_bound():
    for p in (2, 3, 5):
        a_list = [j + 2 for j in range(1, 30)]
        result = deficiency_check(a_list, p)
        assert result.value < result.bound

def test_init():
    state = init(3, GrowthFunction({1: 4}))

    assert state.i == 0
    assert state.table.count == 1
    assert state.relators() == tuple()
    assert state.t_log == [0]
    state.validate()
    with pytest.raises(ValueError):
        init(4, GrowthFunction())

def test_first_step(first_step):
    state = first_step

    assert state.i == 1
    assert state.q_list == [0, 1]
    assert state.table.count == 2
    assert (state.table.x, state.table.y) == ((1, 0), (0, 1))
    assert state.a_list == [5]
    assert state.t_log == [0, 5]
    assert state.u_list == [Word.parse("xx")]
    assert state.v_list == [Word()]
    assert state.w.is_identity()
    assert state.r.expanded_length() == 64
    assert state.table.walk(0, state.r) == 0

def test_first_step_record(first_step):
    record = first_step.records[0]

    assert record["i"] == 1
    assert record["j"] == 1
    assert record["f_q"] == 2
    assert record["t_p_log"] == 5
    assert record["deficiency_sum"] == "1/16"
    assert record["congruence_ok"] is None
    assert record["gamma_bound_log"] is None

def test_step_leaves_input_unchanged():
    state = init(2, GrowthFunction())
    step(state, rng=np.random.default_rng(0))

    assert state.i == 0
    assert state.records == list()

def test_state_json(first_step):
    restored = ConstructionState.from_json(first_step.to_json())

    assert restored.i == 1
    assert restored.a_list == first_step.a_list
    assert restored.r == first_step.r
    assert restored.growth == first_step.growth

def test_state_validation(first_step):
    data = first_step.to_json()
    data["a_list"] = [2]
    with pytest.raises(ValueError):
        ConstructionState.from_json(data)

    data = first_step.to_json()
    data["t_log"] = [0]
    with pytest.raises(ValueError):
        ConstructionState.from_json(data)

def test_congruence_needs_next_step(first_step):
    with pytest.raises(ValueError):
        cauchy_congruence_check(first_step, 1)

def test_gamma_certificate_needs_congruence(first_step):
    with pytest.raises(HypothesisUnmet) as e:
        gamma_certificate(first_step, 1)

    assert e.value.anchor == "completion congruence"

def test_run_construction_reports_progress():
    seen = list()
    state = run_construction(init(2, GrowthFunction()), 1,
                             on_step=seen.append)

    assert state.i == 1
    assert [s.i for s in seen] == [1]

def test_gamma_certificate_records_checks():
    cert = GammaCertificate(1, 2, 3, 3, 1, FGAbelian((8,), 0, 2),
                            congruence=True, exponent_quotients_agree=False,
                            transfer=True)
    hypotheses = cert.to_dict()["hypotheses"]

    assert hypotheses == {"congruence": True, "n_greater_k": False,
                          "exponent_quotients_agree": False,
                          "transfer": True}
    assert GammaCertificate(1, 2, 3, 4, 1, FGAbelian((8,), 0, 2), True,
                            True, True).n_greater_k

@pytest.mark.slow
def test_second_step():
    state = run_construction(init(2, GrowthFunction()), 2,
                             SearchBudget(max_cosets=256, max_depth=3))
    f = state.growth

    assert state.i == 2
    assert state.q_list[2] >= 2
    assert state.a_list[1] >= 6
    assert state.t_log[2] > f(state.q_list[2])
    assert state.records[0]["congruence_ok"] is True
    assert state.records[0]["gamma_bound_log"] == state.t_log[1]
    assert all(state.records[0]["gamma_certificate"]["hypotheses"].values())
    assert deficiency_check(state.a_list, 2).ok
    state.validate()
