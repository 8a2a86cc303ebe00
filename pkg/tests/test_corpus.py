import json

import pytest
from hypothesis import given, strategies as st

from tweetlens.corpus import (
    Corpus, CorpusError, EmptyTextError, Label, TweetRecord, balance_classes, clean_text,
    count_vaccine_mentions, extract_hashtags, load_corpus, split_train_test, write_corpus,
)


def _write(tmp_path, name, lines):
    p = tmp_path / name
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def _corpus(n_m, n_nm, n_u=0):
    recs = [TweetRecord(f"m{i}", "text", Label.MISLEADING) for i in range(n_m)]
    recs += [TweetRecord(f"n{i}", "text", Label.NON_MISLEADING) for i in range(n_nm)]
    recs += [TweetRecord(f"u{i}", "text") for i in range(n_u)]
    # interleave so order preservation is meaningful
    recs.sort(key=lambda r: (int(r.id[1:]), r.id[0]))
    return Corpus(tuple(recs))


# --------------------------------------------------------------------------- loading

def test_load_single_jsonl_record(tmp_path):
    p = _write(tmp_path, "a.jsonl", ['{"id":"1","text":"hello","label":"Misleading"}'])
    c = load_corpus(p)
    assert len(c) == 1
    rec = c.get("1")
    assert rec.label is Label.MISLEADING
    assert rec.retweet_count is None and rec.like_count is None and rec.created_at is None


def test_duplicate_id_names_the_id(tmp_path):
    p = _write(tmp_path, "a.jsonl", ['{"id":"7","text":"a"}', '{"id":"7","text":"b"}'])
    with pytest.raises(CorpusError, match="'7'"):
        load_corpus(p)


def test_label_trim_and_casefold(tmp_path):
    p = _write(tmp_path, "a.jsonl", [
        '{"id":"1","text":"x","label":"misleading "}',
        '{"id":"2","text":"y","label":"MISLEADING"}',
        '{"id":"3","text":"z","label":"Non-Misleading"}',
    ])
    c = load_corpus(p)
    assert [r.label for r in c] == [Label.MISLEADING, Label.MISLEADING, Label.NON_MISLEADING]


def test_unknown_label_rejected(tmp_path):
    p = _write(tmp_path, "a.jsonl", ['{"id":"1","text":"x","label":"maybe"}'])
    with pytest.raises(CorpusError, match="label"):
        load_corpus(p)


def test_malformed_line_cites_line_number(tmp_path):
    lines = [json.dumps({"id": str(i), "text": "ok"}) for i in range(4)] + ['{"id": "4", "text": ']
    p = _write(tmp_path, "a.jsonl", lines)
    with pytest.raises(CorpusError, match="line 5"):
        load_corpus(p)


def test_missing_text_is_an_error(tmp_path):
    p = _write(tmp_path, "a.jsonl", ['{"id":"1"}'])
    with pytest.raises(CorpusError, match="line 1"):
        load_corpus(p)


def test_negative_count_rejected(tmp_path):
    p = _write(tmp_path, "a.jsonl", ['{"id":"1","text":"x","like_count":-3}'])
    with pytest.raises(CorpusError, match="like_count"):
        load_corpus(p)


def test_csv_loading_keeps_absent_fields_absent(tmp_path):
    p = _write(tmp_path, "a.csv", [
        "id,text,label,retweet_count,like_count",
        '1,"Pfizer, again #jab",misleading,3,',
        "2,fine,non-misleading,,10",
    ])
    c = load_corpus(p)
    a, b = c.records
    assert a.retweet_count == 3 and a.like_count is None and a.hashtags == ("jab",)
    assert b.retweet_count is None and b.like_count == 10


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "nope.jsonl")


def test_round_trip(tmp_path):
    c = _corpus(3, 2, 1)
    c = Corpus(tuple(TweetRecord(r.id, f"tweet {r.id} #tag{r.id}", r.label, "2021-01-01T00:00:00Z", 1, None, 5,
                                 (f"tag{r.id}",)) for r in c))
    write_corpus(c, tmp_path / "c.jsonl")
    again = load_corpus(tmp_path / "c.jsonl")
    assert again.records == c.records


def test_class_counts_match_records():
    c = _corpus(4, 2, 3)
    assert c.class_counts == {Label.MISLEADING: 4, Label.NON_MISLEADING: 2, Label.UNLABELED: 3}
    assert sum(c.class_counts.values()) == len(c)


# --------------------------------------------------------------------------- cleaning

def test_clean_text_worked_example():
    assert clean_text("Get the jab! https://t.co/x @who #VaccinesWork") == "Get the jab! VaccinesWork"


def test_clean_text_repetition():
    assert clean_text("soooooo bad") == "sooo bad"
    assert clean_text("sooo bad") == "sooo bad"


def test_clean_text_whitespace_only():
    with pytest.raises(EmptyTextError, match="empty after cleaning"):
        clean_text("   ")
    with pytest.raises(EmptyTextError):
        clean_text("@someone https://x.y/z")


def test_clean_text_preserves_case_and_nfc():
    assert clean_text("Café IS Open") == "Café IS Open"


@given(st.lists(st.sampled_from(list("ab #@:/.!ééh t") + ["http://", "www.", "\u200d", "\U0001f637"]), max_size=30).map("".join))
def test_clean_text_idempotent(raw):
    try:
        once = clean_text(raw)
    except EmptyTextError:
        return
    assert clean_text(once) == once


@given(st.text(max_size=60))
def test_clean_text_idempotent_arbitrary(raw):
    try:
        once = clean_text(raw)
    except EmptyTextError:
        return
    assert clean_text(once) == once


# --------------------------------------------------------------------------- hashtags and vaccines

def test_extract_hashtags_examples():
    assert extract_hashtags("#NoMasks and #nomasks again") == ["nomasks"]
    assert extract_hashtags("price#tag") == []
    assert extract_hashtags("#covid19 #vaccine") == ["covid19", "vaccine"]


@given(st.text(alphabet=st.sampled_from(list("#aB1_ x")), max_size=40))
def test_hashtags_unique_lowercase_without_marker(raw):
    tags = extract_hashtags(raw)
    assert len(tags) == len(set(tags))
    assert all("#" not in t and t == t.lower() and t for t in tags)


def test_vaccine_mentions_examples():
    assert count_vaccine_mentions("Pfizer and pfizer again") == 1
    assert count_vaccine_mentions("Pfizer or Moderna vs Oxford-AstraZeneca") == 3
    assert count_vaccine_mentions("get vaccinated") == 0
    assert count_vaccine_mentions("J&J, jnj and Johnson & Johnson") == 1
    assert count_vaccine_mentions("BioNTech Pfizer Moderna AstraZeneca Covaxin J&J") == 5


def test_vaccine_alias_needs_word_boundary():
    assert count_vaccine_mentions("modernas") == 0
    assert count_vaccine_mentions("pfizerbiontech") == 0


# --------------------------------------------------------------------------- balancing and splitting

def test_balance_unchanged_when_balanced():
    c = _corpus(10, 10)
    assert balance_classes(c, 1).records == c.records


def test_balance_downsamples_majority_preserving_order():
    c = _corpus(30, 10, 5)
    b = balance_classes(c, 3)
    assert b.class_counts[Label.MISLEADING] == 10 and b.class_counts[Label.NON_MISLEADING] == 10
    assert b.class_counts[Label.UNLABELED] == 0
    positions = [c.ids.index(i) for i in b.ids]
    assert positions == sorted(positions)
    assert balance_classes(c, 3).ids == b.ids


def test_balance_missing_class():
    with pytest.raises(CorpusError):
        balance_classes(_corpus(3, 0), 0)


@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_balance_counts_equal(n_m, n_nm, n_u, seed):
    b = balance_classes(_corpus(n_m, n_nm, n_u), seed)
    assert b.class_counts[Label.MISLEADING] == b.class_counts[Label.NON_MISLEADING] == min(n_m, n_nm)


def test_split_80_20():
    train, test = split_train_test(_corpus(100, 100), 0.2, 1)
    assert train.class_counts[Label.MISLEADING] == 80 and train.class_counts[Label.NON_MISLEADING] == 80
    assert test.class_counts[Label.MISLEADING] == 20 and test.class_counts[Label.NON_MISLEADING] == 20


def test_split_smallest_case():
    train, test = split_train_test(_corpus(2, 2), 0.5, 0)
    assert len(train) == 2 and len(test) == 2
    assert train.class_counts[Label.MISLEADING] == 1 and test.class_counts[Label.MISLEADING] == 1


def test_split_deterministic():
    c = _corpus(37, 23)
    assert [x.ids for x in split_train_test(c, 0.3, 9)] == [x.ids for x in split_train_test(c, 0.3, 9)]


def test_split_rejects_tiny_class():
    with pytest.raises(CorpusError):
        split_train_test(_corpus(1, 5), 0.2, 0)


@given(st.integers(2, 50), st.integers(2, 50), st.floats(0.05, 0.95), st.integers(0, 1000))
def test_split_partitions(n_m, n_nm, frac, seed):
    c = _corpus(n_m, n_nm)
    train, test = split_train_test(c, frac, seed)
    assert len(train) + len(test) == len(c)
    assert not set(train.ids) & set(test.ids)
    assert set(train.ids) | set(test.ids) == set(c.ids)
    for lab, n in ((Label.MISLEADING, n_m), (Label.NON_MISLEADING, n_nm)):
        assert abs(test.class_counts[lab] - frac * n) <= 1
