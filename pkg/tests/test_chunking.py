"""Record rendering and sliding-window chunking."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incidentkb.chunking import chunk_corpus, chunk_text, render_record_text, window_starts
from incidentkb.errors import InvalidParams
from incidentkb.records import ActorRef, IncidentRecord, IncidentStore, TransportMode
from incidentkb.tokens import count_tokens, tokenize


def test_render_includes_labeled_populated_fields_only():
    rec = IncidentRecord(
        attack_name="Harbor Breach",
        incident_type="Ransomware",
        description="The port stopped.",
        date="March 2021",
        victim=ActorRef("Port Co", "Chile", "Corporate"),
        attacker=ActorRef("Crew9"),
        mode=TransportMode.MARITIME,
        source_dataset="s",
        source_row_id="1",
        date_iso="2021-03",
    )
    text = render_record_text(rec)
    lines = text.splitlines()
    assert lines[0] == "attack_name: Harbor Breach"
    assert "incident_type: Ransomware" in lines
    assert "victim: Port Co (Chile, Corporate)" in lines
    assert "attacker: Crew9" in lines
    assert "Transportation_mode: Maritime" in lines
    assert not any(line.startswith("detection") for line in lines)
    assert not any(line.startswith("Motive") for line in lines)
    # plumbing fields never render
    assert "source_dataset" not in text
    assert "date_iso" not in text


def test_render_omits_mode_line_when_unclassified():
    rec = IncidentRecord(attack_name="X", description="d", source_dataset="s", source_row_id="1")
    assert "Transportation_mode" not in render_record_text(rec)


def test_render_actor_with_partial_details():
    rec = IncidentRecord(
        attack_name="X",
        description="d",
        attacker=ActorRef("Crew9", None, "Criminal"),
        source_dataset="s",
        source_row_id="1",
    )
    assert "attacker: Crew9 (Criminal)" in render_record_text(rec)


def test_window_starts_arithmetic():
    assert window_starts(768, size=768, overlap=100) == [0]
    assert window_starts(868, size=768, overlap=100) == [0, 668]
    assert window_starts(1436, size=768, overlap=100) == [0, 668]
    assert window_starts(1437, size=768, overlap=100) == [0, 668, 1336]
    assert window_starts(0, size=768, overlap=100) == []
    assert window_starts(4, size=4, overlap=2) == [0]
    assert window_starts(5, size=4, overlap=2) == [0, 2]
    assert window_starts(6, size=4, overlap=2) == [0, 2]
    assert window_starts(7, size=4, overlap=2) == [0, 2, 4]


def test_window_starts_rejects_bad_params():
    with pytest.raises(InvalidParams):
        window_starts(10, size=0, overlap=0)
    with pytest.raises(InvalidParams):
        window_starts(10, size=4, overlap=4)
    with pytest.raises(InvalidParams):
        window_starts(10, size=4, overlap=-1)


def test_chunk_text_spans_slice_original_text():
    words = [f"w{i}" for i in range(10)]
    text = " ".join(words)
    windows = chunk_text(text, size=4, overlap=2)
    assert [w[0] for w in windows] == [
        "w0 w1 w2 w3",
        "w2 w3 w4 w5",
        "w4 w5 w6 w7",
        "w6 w7 w8 w9",
    ]
    assert [w[2] for w in windows] == [0, 2, 4, 6]
    assert all(w[1] == 4 for w in windows)


def test_chunk_text_short_document_is_one_chunk():
    windows = chunk_text("one two three", size=768, overlap=100)
    assert windows == [("one two three", 3, 0)]


def test_chunk_text_preserves_punctuation_between_tokens():
    text = "alpha, beta; gamma. delta epsilon"
    windows = chunk_text(text, size=3, overlap=1)
    assert windows[0][0] == "alpha, beta; gamma"
    assert windows[1][0] == "gamma. delta epsilon"


@settings(max_examples=60, deadline=None)
@given(
    words=st.lists(st.sampled_from(["alpha", "bravo", "charlie", "delta"]), min_size=1, max_size=300),
    size=st.integers(min_value=2, max_value=40),
    data=st.data(),
)
def test_chunking_conserves_tokens(words, size, data):
    overlap = data.draw(st.integers(min_value=0, max_value=size - 1))
    text = " ".join(words)
    total = count_tokens(text)
    windows = chunk_text(text, size=size, overlap=overlap)
    stride = size - overlap
    # Every window except the last is full-size; starts advance by the stride.
    assert [w[2] for w in windows] == [i * stride for i in range(len(windows))]
    for _, token_count, _ in windows[:-1]:
        assert token_count == size
    last_text, last_count, last_start = windows[-1]
    assert last_start + last_count == total
    # Tokens of the window texts equal the token slices of the original.
    all_tokens = tokenize(text)
    for win_text, token_count, start in windows:
        assert tokenize(win_text) == all_tokens[start : start + token_count]


def test_chunk_corpus_orders_by_key_and_numbers_densely():
    store = IncidentStore()
    for rid in ("9", "10", "2"):
        store.add(
            IncidentRecord(
                attack_name=f"Incident {rid}",
                description="short text",
                source_dataset="s",
                source_row_id=rid,
            )
        )
    chunks = chunk_corpus(store.seal(), size=768, overlap=100)
    assert [c.chunk_id for c in chunks] == [0, 1, 2]
    assert [c.record_keys for c in chunks] == [("s:10",), ("s:2",), ("s:9",)]
    assert chunks[0].text.startswith("attack_name: Incident 10")


def test_chunk_corpus_splits_long_records():
    long_desc = " ".join(f"word{i}" for i in range(900))
    store = IncidentStore()
    store.add(
        IncidentRecord(
            attack_name="Long",
            description=long_desc,
            source_dataset="s",
            source_row_id="1",
        )
    )
    chunks = chunk_corpus(store.seal(), size=768, overlap=100)
    assert len(chunks) == 2
    assert all(c.record_keys == ("s:1",) for c in chunks)
    assert chunks[0].token_count == 768
    assert chunks[1].start_token == 668
