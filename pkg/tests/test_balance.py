import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rebalance.balance import (AugmentationPlan, BalancePolicy, EdaResampler, ExecutionSummary,
                               allocate, execute_plan, plan_balance, rebalance)
from rebalance.corpus import LabeledCorpus, class_stats
from rebalance.eda import EdaParams
from rebalance.exceptions import PlanError, ValidationError
from rebalance.lexicon import SynonymLexicon


def corpus_of(counts, length=5):
    texts, labels = [], []
    for lab, n in counts.items():
        for i in range(n):
            texts.append(" ".join(f"{lab.lower()}{(i + j) % 7}" for j in range(length)))
            labels.append(lab)
    return LabeledCorpus.from_texts(texts, labels, prefix="r")


def test_majority_allocation_by_brute_force():
    plan = plan_balance({"CLEAN": 18614, "OFFENSIVE": 1022, "HATE": 709})
    assert set(plan.per_label) == {"OFFENSIVE", "HATE"}
    for label, count in (("OFFENSIVE", 1022), ("HATE", 709)):
        gap, base = 18614 - count, 0
        while (base + 1) * count <= gap:
            base += 1
        a = plan.per_label[label]
        assert (a.base_naug, a.remainder_count) == (base, gap - base * count)
        assert a.planned_count == 18614
    assert (plan.per_label["OFFENSIVE"].base_naug, plan.per_label["OFFENSIVE"].remainder_count) == (17, 218)
    assert (plan.per_label["HATE"].base_naug, plan.per_label["HATE"].remainder_count) == (25, 180)


def test_balanced_input_gives_empty_plan():
    assert plan_balance({"A": 10, "B": 10}).is_empty


def test_target_counts_exact():
    plan = plan_balance({"CLEAN": 18614, "OFFENSIVE": 1022, "HATE": 709},
                        BalancePolicy.target_counts({"OFFENSIVE": 13823, "HATE": 11051}))
    assert plan.targets() == {"OFFENSIVE": 13823, "HATE": 11051}
    assert all(a.planned_count == a.target_count for a in plan.per_label.values())


def test_target_below_current():
    with pytest.raises(PlanError):
        plan_balance({"A": 10, "B": 5}, BalancePolicy.target_counts({"B": 4}))


def test_target_unknown_label():
    with pytest.raises(PlanError):
        plan_balance({"A": 10}, BalancePolicy.target_counts({"Z": 40}))


def test_fixed_naug():
    plan = plan_balance({"A": 10, "B": 3}, BalancePolicy.fixed_naug(2))
    assert plan.targets() == {"B": 9}


def test_policy_validation():
    with pytest.raises(ValidationError):
        BalancePolicy("nope")
    with pytest.raises(ValidationError):
        BalancePolicy.fixed_naug(0)
    with pytest.raises(ValidationError):
        BalancePolicy.target_counts({})


@given(st.integers(1, 500), st.integers(0, 5000))
def test_allocate_invariant(current, extra):
    a = allocate(current, current + extra)
    assert a.planned_count == current + extra
    assert 0 <= a.remainder_count < current


def test_plan_json_round_trip():
    plan = plan_balance({"A": 7, "B": 2}, BalancePolicy(), EdaParams(0.2, ("SR", "RD"), 1), True)
    back = AugmentationPlan.from_dict(json.loads(plan.to_json()))
    assert back == plan


def test_execute_small():
    c = LabeledCorpus.from_texts(["a b", "c d", "e f g"], ["A", "A", "B"], prefix="r")
    out = execute_plan(c, plan_balance(class_stats(c), BalancePolicy.target_counts({"B": 4})))
    assert out.label_counts() == {"A": 2, "B": 4}
    assert out.records[:3] == c.records
    assert out.ids[3:] == ["r:3#aug0", "r:3#aug1", "r:3#aug2"]


def test_remainder_goes_to_first_records():
    c = corpus_of({"A": 10, "B": 3})
    out = execute_plan(c, plan_balance(class_stats(c)))
    per_orig = {}
    for rid in out.ids[len(c):]:
        orig = rid.split("#")[0]
        per_orig[orig] = per_orig.get(orig, 0) + 1
    b_ids = [r.id for r in c if r.label == "B"]
    # gap 7 over 3 records: 3, 2, 2
    assert [per_orig[i] for i in b_ids] == [3, 2, 2]


def test_variants_sorted_after_originals():
    c = corpus_of({"A": 30, "B": 4, "C": 2})
    out = execute_plan(c, plan_balance(class_stats(c)))
    tail = out.records[len(c):]
    keys = [(r.id.split("#aug")[0], int(r.id.split("#aug")[1])) for r in tail]
    assert keys == sorted(keys)
    assert all(r.op in ("SR", "RI", "RS", "RD") for r in tail)


def test_execute_deterministic():
    c = corpus_of({"A": 20, "B": 3})
    plan = plan_balance(class_stats(c))
    a = execute_plan(c, plan, base_seed=5)
    b = execute_plan(c, plan, base_seed=5)
    assert [(r.id, r.sentence.tokens) for r in a] == [(r.id, r.sentence.tokens) for r in b]


def test_empty_plan_identity():
    c = corpus_of({"A": 3, "B": 3})
    assert execute_plan(c, plan_balance(class_stats(c))) is c


def test_label_without_eligible_records():
    c = LabeledCorpus.from_texts(["a b", "c d", ""], ["A", "A", "B"])
    plan = plan_balance({"A": 2, "B": 1})
    with pytest.raises(PlanError):
        execute_plan(c, plan)


def test_plan_label_absent_from_corpus():
    c = corpus_of({"A": 3})
    plan = plan_balance({"A": 3, "B": 1})
    with pytest.raises(PlanError):
        execute_plan(c, plan)


def test_empty_records_never_augmented():
    c = LabeledCorpus.from_texts(["a", "b", "c", "", "x y"], ["A", "A", "A", "B", "B"], prefix="r")
    out = execute_plan(c, plan_balance(class_stats(c)))
    assert out.label_counts()["B"] == 3
    assert all(not rid.startswith("r:4#") for rid in out.ids)


def test_dedup_drops_duplicates_and_reports_shortfall():
    # single-token record: every variant equals the original
    c = LabeledCorpus.from_texts(["a b c", "d e f", "g h i", "solo"], ["A", "A", "A", "B"])
    summary = ExecutionSummary()
    out = execute_plan(c, plan_balance(class_stats(c), dedup=True), summary=summary)
    assert out.label_counts()["B"] == 1
    assert summary.shortfall == {"B": 2}
    assert summary.duplicates_dropped["B"] > 0


def test_dedup_tops_up_to_target():
    lex = SynonymLexicon.from_groups([[f"w{i}", f"v{i}"] for i in range(6)])
    c = LabeledCorpus.from_texts(["x"] * 12 + ["w0 w1 w2 w3 w4 w5"], ["A"] * 12 + ["B"])
    summary = ExecutionSummary()
    out = execute_plan(c, plan_balance(class_stats(c), dedup=True), lex, summary=summary)
    b = [r.sentence.tokens for r in out if r.label == "B"]
    assert len(b) == 12 and len(set(b)) == 12
    assert not summary.shortfall
    assert summary.duplicates_dropped["B"] > 0  # so at least one top-up round ran


@settings(max_examples=25, deadline=None)
@given(st.dictionaries(st.sampled_from("ABCD"), st.integers(1, 30), min_size=2), st.integers(0, 99))
def test_match_majority_equalizes(counts, seed):
    c = corpus_of(counts)
    out, _ = rebalance(c, base_seed=seed)
    assert set(out.label_counts().values()) == {max(counts.values())}
    assert out.records[:len(c)] == c.records


def test_resampler():
    X = ["a b c"] * 6 + ["d e f", "g h"]
    y = [0] * 6 + [1, 1]
    rs = EdaResampler(random_state=3)
    Xr, yr = rs.fit_resample(X, y)
    assert yr.count(0) == yr.count(1) == 6
    assert all(isinstance(v, int) for v in yr)
    assert Xr[:8] == X
    assert rs.sample_ids_[8].endswith("#aug0")
    assert rs.plan_.targets() == {"1": 6}
