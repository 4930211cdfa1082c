import random

import pytest

from longdoc.corpus import Document
from longdoc.segmenter import (
    SegmentConfig,
    TokenTruncationWarning,
    segment,
    split_boundaries,
    tokenize_count,
)


class TestTokenizeCount:
    def test_empty(self):
        assert tokenize_count("") == 0

    def test_arabic_trailing_period(self):
        assert tokenize_count("قرأ الولد الكتاب.") == 3

    def test_500_word_paragraph_matches_whitespace_split(self):
        rng = random.Random(42)
        words = [f"w{rng.randrange(10**6)}" for _ in range(500)]
        text = " ".join(words)
        assert tokenize_count(text) == len(text.split()) == 500

    def test_punctuation_not_counted(self):
        assert tokenize_count("a-b, c; (d)") == 4
        assert tokenize_count("...!؟") == 0


class TestSplitBoundaries:
    def test_three_terminal_marks(self):
        assert split_boundaries("جاء الشتاء. هطل المطر؟ نعم!") == [
            "جاء الشتاء.",
            "هطل المطر؟",
            "نعم!",
        ]

    def test_digit_internal_period(self):
        assert split_boundaries("بلغ السعر 3.14 ريال.") == ["بلغ السعر 3.14 ريال."]

    def test_arabic_comma_is_not_a_boundary(self):
        assert split_boundaries("أولا، ثانيا، ثالثا") == ["أولا، ثانيا، ثالثا"]

    def test_newline_splits(self):
        assert split_boundaries("سطر أول\nسطر ثان") == ["سطر أول", "سطر ثان"]

    def test_semicolon_and_ellipsis(self):
        assert split_boundaries("جملة؛ أخرى… نهاية.") == ["جملة؛", "أخرى…", "نهاية."]


def make_doc(spans):
    return Document("d", " ".join(spans), label="x")


class TestSegment:
    def test_merge_ten_spans_of_ten_tokens(self):
        # hand simulation of the merge rule: flush once >= 30 tokens,
        # so 10-token spans group as 30/30/30 with a 10-token trailing remainder
        spans = [" ".join(f"t{i}w{j}" for j in range(10)) + "." for i in range(10)]
        sents = segment(make_doc(spans), SegmentConfig(min_tokens=30, max_tokens=150))
        assert [s.token_count for s in sents] == [30, 30, 30, 10]

    def test_long_run_split_into_three(self):
        text = " ".join(f"w{i}" for i in range(400))
        sents = segment(Document("d", text), SegmentConfig(min_tokens=30, max_tokens=150))
        assert len(sents) == 3
        assert all(s.token_count <= 150 for s in sents)
        assert sum(s.token_count for s in sents) == 400

    def test_short_doc_single_sentence(self):
        sents = segment(Document("d", "قصير جدا. نعم!"), SegmentConfig())
        assert len(sents) == 1

    def test_sentence_metadata(self):
        spans = [" ".join(f"w{i}{j}" for j in range(40)) + "." for i in range(3)]
        sents = segment(make_doc(spans), SegmentConfig())
        assert [s.index for s in sents] == list(range(len(sents)))
        assert all(s.doc_id == "d" and s.label == "x" for s in sents)

    def test_giant_chunk_truncated_with_warning(self):
        # 200 punctuation-separated tokens with no whitespace cannot be split
        chunk = ".".join(f"x{i}" for i in range(200))
        with pytest.warns(TokenTruncationWarning):
            sents = segment(Document("d", chunk), SegmentConfig(min_tokens=30, max_tokens=150))
        assert all(s.token_count <= 150 for s in sents)

    def test_pluggable_counter(self):
        # a counter that doubles the cost forces smaller sentences
        double = lambda text: 2 * tokenize_count(text)
        spans = [" ".join(f"w{i}{j}" for j in range(10)) + "." for i in range(4)]
        sents = segment(make_doc(spans), SegmentConfig(min_tokens=30, max_tokens=150), counter=double)
        assert [s.token_count for s in sents] == [40, 40]

    def test_bad_config(self):
        with pytest.raises(ValueError):
            SegmentConfig(min_tokens=0)
        with pytest.raises(ValueError):
            SegmentConfig(min_tokens=200, max_tokens=150)


ARABIC_WORDS = "كتاب مدرسة طالب علم مدينة بحر شمس قمر ليل نهار سلام حرب قلم ورقة".split()
LATIN_WORDS = "alpha beta gamma delta epsilon zeta".split()
MARKS = [".", "!", "؟", "؛", "…"]


def fuzz_doc(rng):
    parts = []
    for _ in range(rng.randrange(1, 120)):
        roll = rng.random()
        if roll < 0.55:
            parts.append(rng.choice(ARABIC_WORDS))
        elif roll < 0.75:
            parts.append(rng.choice(LATIN_WORDS))
        elif roll < 0.85:
            parts.append(f"{rng.randrange(100)}.{rng.randrange(100)}")
        elif roll < 0.93:
            parts.append(rng.choice(ARABIC_WORDS) + rng.choice(MARKS))
        elif roll < 0.97:
            parts.append(rng.choice(ARABIC_WORDS) + "،")
        else:
            parts.append("\n")
    text = " ".join(parts)
    return text if text.strip() else "نص"


def normalized(text):
    return " ".join(text.split())


def check_invariants(doc, config):
    sents = segment(doc, config)
    # coverage
    assert normalized(" ".join(s.text for s in sents)) == normalized(doc.text)
    # order
    assert [s.index for s in sents] == list(range(len(sents)))
    # budget
    assert all(s.token_count <= config.max_tokens for s in sents)
    under = [s.index for s in sents if s.token_count < config.min_tokens]
    assert len(under) <= 1 and (not under or under[0] == len(sents) - 1)
    # idempotence
    for s in sents:
        again = segment(Document(doc.doc_id, s.text), config)
        assert len(again) == 1 and again[0].text == s.text
    return sents


class TestInvariantsFuzz:
    def test_mixed_content_fuzz(self):
        rng = random.Random(7)
        config = SegmentConfig()
        for i in range(200):
            check_invariants(Document(f"f{i}", fuzz_doc(rng)), config)
