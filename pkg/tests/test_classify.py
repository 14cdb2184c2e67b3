"""Mode classification engines, filtering, sampling, and scoring."""

import random

import pytest

from incidentkb.classify import (
    ClassifierVerdict,
    GoldLabel,
    GuidelineRules,
    build_classification_prompt,
    classify_llm,
    classify_rules,
    classify_store,
    filter_transportation,
    load_verdicts,
    sample_eval_set,
    save_verdicts,
    score_classification,
)
from incidentkb.errors import (
    InvalidParams,
    MissingVerdict,
    UnparseableProviderOutput,
)
from incidentkb.providers import ScriptedChatStub, StaticChatStub
from incidentkb.records import ActorRef, IncidentRecord, IncidentStore, TransportMode


def record(description: str, name: str = "Incident", victim: str | None = None) -> IncidentRecord:
    return IncidentRecord(
        attack_name=name,
        description=description,
        victim=ActorRef(victim) if victim else None,
        source_dataset="t",
        source_row_id=name,
    )


@pytest.mark.parametrize(
    "description,expected",
    [
        ("Ransomware hit the airline reservation system.", TransportMode.AVIATION),
        ("The port terminal cranes were paused.", TransportMode.MARITIME),
        ("Attackers probed the railway signalling network.", TransportMode.RAIL),
        ("Toll collection on the highway failed.", TransportMode.ROAD),
        ("Both the airport and the port were disrupted.", TransportMode.MULTIMODAL),
        ("A hospital billing system was encrypted.", TransportMode.NONE),
    ],
)
def test_rules_engine_families(description, expected):
    assert classify_rules(record(description)).predicted is expected


def test_rules_match_on_word_boundaries_only():
    # "business", "portal", "training", "shipment" must not trigger bus/port/train/ship
    verdict = classify_rules(record("The business portal handled training shipment reports."))
    assert verdict.predicted is TransportMode.NONE


def test_rules_multiple_keywords_same_family_stay_single_mode():
    verdict = classify_rules(record("The ferry operator's port and vessels were hit."))
    assert verdict.predicted is TransportMode.MARITIME


def test_rules_see_victim_name():
    verdict = classify_rules(record("Systems were encrypted.", victim="Zephyr Airlines"))
    assert verdict.predicted is TransportMode.AVIATION


def test_rules_verdict_metadata():
    verdict = classify_rules(record("The port was hit.", name="r1"))
    assert verdict.classifier_id == "rules"
    assert verdict.key == "t:r1"
    assert verdict.rationale == "Maritime"


def test_guideline_rules_validation():
    with pytest.raises(InvalidParams):
        GuidelineRules(keywords={TransportMode.AVIATION: ("Airport",)})  # not lowercase
    with pytest.raises(InvalidParams):
        GuidelineRules(
            keywords={
                TransportMode.AVIATION: ("cargo",),
                TransportMode.MARITIME: ("cargo",),
            }
        )
    with pytest.raises(InvalidParams):
        GuidelineRules(keywords={TransportMode.MULTIMODAL: ("x",)})


def test_classification_prompt_contents():
    rec = record("The port was hit.", name="r1")
    prompt = build_classification_prompt(rec)
    assert "The port was hit." in prompt
    assert "Road, Rail, Maritime, Aviation, or" in prompt
    assert "- Maritime:" in prompt
    assert "Transportation_mode" not in prompt  # any existing label stays hidden


def test_llm_classifier_parses_clean_and_noisy_labels():
    rec = record("The port was hit.", name="r1")
    assert classify_llm(rec, StaticChatStub("Maritime")).predicted is TransportMode.MARITIME
    assert classify_llm(rec, StaticChatStub("maritime.")).predicted is TransportMode.MARITIME
    assert classify_llm(rec, StaticChatStub("null")).predicted is TransportMode.NONE
    noisy = StaticChatStub("The label is Maritime because ships are involved. wait, ships!")
    assert classify_llm(rec, noisy).predicted is TransportMode.MARITIME


def test_llm_classifier_reasks_then_fails():
    rec = record("The port was hit.", name="r1")
    stub = ScriptedChatStub(["Either Maritime or Road, hard to say.", "Maritime"])
    verdict = classify_llm(rec, stub)
    assert verdict.predicted is TransportMode.MARITIME
    assert len(stub.prompts) == 2
    assert "exactly one of" in stub.prompts[1]

    stub = ScriptedChatStub(["Maritime or Road.", "still Maritime or Road"])
    with pytest.raises(UnparseableProviderOutput):
        classify_llm(rec, stub)


def test_classify_store_engines():
    store = IncidentStore()
    store.add(record("The airline fleet was grounded.", name="1"))
    store.add(record("A bakery was hit.", name="2"))
    verdicts = classify_store(store, engine="rules")
    assert verdicts["t:1"].predicted is TransportMode.AVIATION
    assert verdicts["t:2"].predicted is TransportMode.NONE
    with pytest.raises(InvalidParams):
        classify_store(store, engine="guess")
    with pytest.raises(InvalidParams):
        classify_store(store, engine="llm")  # provider required

    llm = classify_store(store, engine="llm", provider=StaticChatStub("Rail"))
    assert {v.predicted for v in llm.values()} == {TransportMode.RAIL}


def test_verdict_csv_round_trip(tmp_path):
    verdicts = {
        "t:1": ClassifierVerdict("t:1", TransportMode.AVIATION, "rules", "Aviation"),
        "t:2": ClassifierVerdict("t:2", TransportMode.NONE, "llm", None),
    }
    path = tmp_path / "verdicts.csv"
    save_verdicts(verdicts, path)
    loaded = load_verdicts(path)
    assert loaded["t:1"].predicted is TransportMode.AVIATION
    assert loaded["t:2"].predicted is TransportMode.NONE
    assert loaded["t:1"].classifier_id == "rules"


def test_filter_drops_nulls_stamps_modes_and_bypasses_sources():
    store = IncidentStore()
    store.add(record("The airline was hit.", name="1"))
    store.add(record("A bakery was hit.", name="2"))
    given = IncidentRecord(
        attack_name="x", description="ferries", mode=TransportMode.MARITIME,
        source_dataset="feed2", source_row_id="9",
    )
    store.add(given)
    verdicts = classify_store(store, engine="rules")
    del verdicts["feed2:9"]  # bypassed source needs no verdict

    filtered, report = filter_transportation(store, verdicts, transport_only_sources=["feed2"])
    assert report.kept == 2
    assert report.dropped == 1
    assert report.retention == pytest.approx(2 / 3)
    assert filtered["t:1"].mode is TransportMode.AVIATION
    assert filtered["feed2:9"].mode is TransportMode.MARITIME
    assert "t:2" not in filtered


def test_filter_requires_a_verdict_per_record():
    store = IncidentStore()
    store.add(record("The airline was hit.", name="1"))
    with pytest.raises(MissingVerdict):
        filter_transportation(store, {})


def _sampler_store(per_cell: int = 7) -> IncidentStore:
    store = IncidentStore()
    n = 0
    for source in ("alpha", "beta", "gamma"):
        for mode in TransportMode:
            for _ in range(per_cell):
                n += 1
                store.add(
                    IncidentRecord(
                        attack_name=f"incident {n}",
                        description="text",
                        mode=mode,
                        source_dataset=source,
                        source_row_id=str(n),
                    )
                )
    return store.seal()


def test_sampler_fills_every_cell():
    sample = sample_eval_set(_sampler_store(), seed=7)
    assert len(sample) == 90  # 3 sources x 6 labels x 5
    cells = {}
    for r in sample:
        cells[(r.source_dataset, r.mode)] = cells.get((r.source_dataset, r.mode), 0) + 1
    assert set(cells.values()) == {5}
    assert len(sample) == len({r.key for r in sample})  # no repeats


def test_sampler_is_seed_deterministic_and_seed_sensitive():
    store = _sampler_store()
    first = [r.key for r in sample_eval_set(store, seed=42)]
    second = [r.key for r in sample_eval_set(store, seed=42)]
    assert first == second
    assert first != [r.key for r in sample_eval_set(store, seed=43)]


def test_sampler_takes_all_when_cell_is_small():
    store = _sampler_store(per_cell=3)
    sample = sample_eval_set(store, seed=1)
    assert len(sample) == 3 * 6 * 3


def test_score_classification_taxonomy():
    gold = [
        GoldLabel("k1", TransportMode.AVIATION),
        GoldLabel("k2", TransportMode.MULTIMODAL,
                  frozenset({TransportMode.RAIL, TransportMode.ROAD})),
        GoldLabel("k3", TransportMode.MARITIME),
        GoldLabel("k4", TransportMode.NONE),
        GoldLabel("k5", TransportMode.ROAD),
    ]
    verdicts = [
        ClassifierVerdict("k1", TransportMode.AVIATION, "t"),   # correct
        ClassifierVerdict("k2", TransportMode.RAIL, "t"),       # partial (constituent)
        ClassifierVerdict("k3", TransportMode.ROAD, "t"),       # incorrect
        ClassifierVerdict("k4", TransportMode.NONE, "t"),       # correct (true null)
        ClassifierVerdict("k5", TransportMode.NONE, "t"),       # incorrect and a false null
    ]
    score = score_classification(verdicts, gold)
    assert score.total == 5
    assert score.correct == 2
    assert score.partial == 1
    assert score.incorrect == 2
    assert score.false_nulls == 1
    assert score.mislabeled == 3
    assert score.total == score.correct + score.partial + score.incorrect
    assert score.accuracy == pytest.approx(2 / 5)


def test_score_partial_requires_constituent_membership():
    gold = [GoldLabel("k", TransportMode.MULTIMODAL, frozenset({TransportMode.RAIL}))]
    score = score_classification([ClassifierVerdict("k", TransportMode.ROAD, "t")], gold)
    assert score.partial == 0
    assert score.incorrect == 1


def test_score_requires_verdicts_for_all_gold_keys():
    with pytest.raises(MissingVerdict):
        score_classification([], [GoldLabel("k", TransportMode.RAIL)])
