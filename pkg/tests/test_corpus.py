import json
import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rebalance.corpus import (LabeledCorpus, Record, class_stats, format_stats_table, kfold_splits,
                              load_corpus, save_corpus, stats_to_json)
from rebalance.exceptions import ParseError, TextDecodeError, ValidationError
from rebalance.text import TokenizedSentence, tokenize


def test_csv_three_rows(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("text,label,extra\na b,X,1\nc,Y,2\nd e f,X,3\n", encoding="utf-8")
    c = load_corpus(p)
    assert len(c) == 3
    assert c.ids == ["c.csv:1", "c.csv:2", "c.csv:3"]
    assert c.labels == ("X", "Y")


def test_jsonl_single_line(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text(json.dumps({"text": "Đcm nản vl", "label": "HATE"}, ensure_ascii=False) + "\n",
                 encoding="utf-8")
    (rec,) = load_corpus(p).records
    assert rec.label == "HATE" and len(rec.sentence) == 3


def test_id_field_used(tmp_path):
    p = tmp_path / "c.tsv"
    p.write_text("id\ttext\tlabel\nr7\ta b\tX\n", encoding="utf-8")
    assert load_corpus(p).ids == ["r7"]


def test_missing_header_field(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("text,lbl\na,X\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_corpus(p)


def test_bad_jsonl_line_number(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text('{"text":"a","label":"X"}\n{oops\n', encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_corpus(p)
    assert exc.value.line == 2


def test_invalid_utf8(tmp_path):
    p = tmp_path / "c.csv"
    p.write_bytes(b"text,label\n\xc3(,X\n")
    with pytest.raises(TextDecodeError):
        load_corpus(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "none.csv")


def test_unknown_format(tmp_path):
    with pytest.raises(ValidationError):
        load_corpus(tmp_path / "c.txt")


def test_empty_text_warns(tmp_path, caplog):
    p = tmp_path / "c.csv"
    p.write_text('text,label\n"",X\na,Y\n', encoding="utf-8")
    with caplog.at_level(logging.WARNING):
        c = load_corpus(p)
    assert c.empty_ids == ["c.csv:1"]
    assert "empty" in caplog.text


def test_duplicate_ids_rejected():
    s = tokenize("a")
    with pytest.raises(ValidationError):
        LabeledCorpus.from_records([Record("x", s, "A"), Record("x", s, "B")])


@pytest.mark.parametrize("fmt", ["csv", "tsv", "jsonl"])
def test_round_trip(tmp_path, fmt):
    c = LabeledCorpus.from_texts(['a, "quoted" b', "tab\ttext x", "plain"], ["X", "Y", "X"])
    p = tmp_path / f"out.{fmt}"
    save_corpus(c, p)
    back = load_corpus(p)
    assert back.records == c.records


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_multiword_token_round_trip(tmp_path, fmt):
    rec = Record("r1", TokenizedSentence(("Đcm", "nhụt chí", "vl")), "HATE")
    c = LabeledCorpus.from_records([rec, Record("r2", tokenize("a b"), "CLEAN")])
    p = tmp_path / f"out.{fmt}"
    save_corpus(c, p)
    back = load_corpus(p)
    assert back.records[0].sentence.tokens == ("Đcm", "nhụt chí", "vl")
    assert back.records[0].text == "Đcm nhụt chí vl"
    assert back.records == c.records


def test_save_is_rfc4180(tmp_path):
    c = LabeledCorpus.from_texts(["x, y"], ["A"], ids=["i"])
    p = tmp_path / "o.csv"
    save_corpus(c, p)
    assert p.read_bytes() == b'id,text,label\r\ni,"x, y",A\r\n'


def test_stats_hate_row():
    # 709 records, 14,513 tokens: 376 of length 20 and 333 of length 21
    recs = [Record(f"h{i}", TokenizedSentence(("w",) * (20 if i < 376 else 21)), "HATE")
            for i in range(709)]
    st_ = class_stats(LabeledCorpus.from_records(recs))["HATE"]
    assert st_.total_tokens == 14513
    assert f"{st_.avg_len:.2f}" == "20.47"


def test_stats_small():
    c = LabeledCorpus.from_texts(["a b", "b c", "w x y z"], ["A", "A", "B"])
    s = class_stats(c)
    assert (s["A"].total_tokens, s["A"].unique_vocab) == (4, 3)
    assert (s["B"].count, s["B"].avg_len, s["B"].total_tokens) == (1, 4.0, 4)
    assert s.overall.count == 3 and s.overall.total_tokens == 8
    assert s.counts() == {"A": 2, "B": 1}
    table = format_stats_table(s)
    assert "Vocab. size (token total)" in table and "Unique vocab" in table
    assert json.loads(stats_to_json(s))["overall"]["unique_vocab"] == 7


def test_stats_label_named_total():
    c = LabeledCorpus.from_texts(["a", "b c"], ["Total", "X"])
    s = class_stats(c)
    assert s["Total"].count == 1 and s.overall.count == 2


corpora = st.lists(st.tuples(st.lists(st.sampled_from("abcde"), max_size=8),
                             st.sampled_from(["A", "B", "C"])), min_size=1, max_size=40)


@given(corpora)
def test_stats_identity(rows):
    recs = [Record(f"r{i}", TokenizedSentence(tuple(t)), y) for i, (t, y) in enumerate(rows)]
    c = LabeledCorpus.from_records(recs)
    for s in class_stats(c).rows():
        assert s.total_tokens == sum(len(r.sentence) for r in c
                                     if s.label == "Total" or r.label == s.label)
        assert abs(s.avg_len * s.count - s.total_tokens) < 1


def test_kfold_sizes():
    c = LabeledCorpus.from_texts(["x"] * 10, ["A"] * 10)
    folds = kfold_splits(c, 5, seed=0)
    assert [len(test) for _, test in folds] == [2] * 5


def test_kfold_stratified_8_2():
    c = LabeledCorpus.from_texts(["x"] * 10, ["M"] * 8 + ["m"] * 2)
    label = dict(zip(c.ids, c.y))
    for _, test in kfold_splits(c, 2, seed=3):
        ys = [label[i] for i in test]
        assert ys.count("M") == 4 and ys.count("m") == 1


@given(corpora, st.integers(2, 6), st.integers(0, 100))
def test_kfold_partition(rows, k, seed):
    if k > len(rows):
        return
    c = LabeledCorpus.from_texts(["".join(t) or "x" for t, _ in rows], [y for _, y in rows])
    folds = kfold_splits(c, k, seed)
    tests = [set(t) for _, t in folds]
    assert set().union(*tests) == set(c.ids)
    assert sum(len(t) for t in tests) == len(c)
    label = dict(zip(c.ids, c.y))
    for lab in c.labels:
        sizes = [sum(label[i] == lab for i in t) for t in tests]
        assert max(sizes) - min(sizes) <= 1
    for train, test in folds:
        assert not set(train) & set(test) and len(train) + len(test) == len(c)


def test_kfold_rejects_large_k():
    c = LabeledCorpus.from_texts(["x", "y"], ["A", "B"])
    with pytest.raises(ValidationError):
        kfold_splits(c, 3)


def test_kfold_warns_small_label(caplog):
    c = LabeledCorpus.from_texts(["x"] * 6, ["A"] * 5 + ["B"])
    with caplog.at_level(logging.WARNING):
        kfold_splits(c, 3)
    assert "fewer than k" in caplog.text
