import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signseq.corpus import (
    GAP,
    Corpus,
    CorpusFormatError,
    Text,
    build_ebuds,
    clean_report,
    length_histogram,
    parse_corpus,
    reverse_texts,
    serialize_corpus,
)


def tokens_of(corpus):
    return [t.tokens for t in corpus.texts]


class TestParse:
    def test_plain_line(self):
        corpus = parse_corpus("267 99 342\n", 417)
        assert tokens_of(corpus) == [(267, 99, 342)]
        assert not corpus.texts[0].damaged

    def test_gap_marker_sets_damaged(self):
        corpus = parse_corpus("267 ? 342\n", 417)
        text = corpus.texts[0]
        assert text.tokens == (267, GAP, 342)
        assert text.damaged
        assert text.gap_positions == (1,)

    def test_sign_zero_is_reserved(self):
        with pytest.raises(CorpusFormatError, match="line 2.*reserved"):
            parse_corpus("1 2\n0 99\n", 417)

    def test_malformed_integer(self):
        with pytest.raises(CorpusFormatError, match="line 1.*malformed sign id"):
            parse_corpus("12 x3\n", 417)

    def test_id_above_vocabulary(self):
        with pytest.raises(CorpusFormatError, match="exceeds vocabulary"):
            parse_corpus("1 418\n", 417)

    def test_negative_id(self):
        with pytest.raises(CorpusFormatError, match="negative"):
            parse_corpus("-4 2\n", 417)

    def test_empty_line_between_texts(self):
        with pytest.raises(CorpusFormatError, match="line 2.*empty line"):
            parse_corpus("1 2\n\n3 4\n", 417)

    def test_trailing_blank_lines_tolerated(self):
        corpus = parse_corpus("1 2\n\n\n", 417)
        assert len(corpus) == 1

    def test_comments_skipped(self):
        corpus = parse_corpus("# a comment\n1 2\n# another\n", 417)
        assert len(corpus) == 1

    def test_header_vocab_and_label(self):
        corpus = parse_corpus("#! vocab=30 label=demo\n1 2\n")
        assert corpus.vocabulary_size == 30
        assert corpus.label == "demo"

    def test_explicit_vocab_overrides_header(self):
        corpus = parse_corpus("#! vocab=30\n1 2\n", 99)
        assert corpus.vocabulary_size == 99

    def test_default_vocab(self):
        assert parse_corpus("1 2\n").vocabulary_size == 417

    def test_header_after_text_rejected(self):
        with pytest.raises(CorpusFormatError, match="header after first text"):
            parse_corpus("1 2\n#! vocab=30\n", 417)

    def test_metadata_trailer(self):
        corpus = parse_corpus("1 2 | id=4312 lines=2\n", 417)
        text = corpus.texts[0]
        assert text.source_id == 4312
        assert text.line_count == 2

    def test_unknown_metadata_key(self):
        with pytest.raises(CorpusFormatError, match="unknown metadata key"):
            parse_corpus("1 2 | site=X\n", 417)

    def test_too_long_text(self):
        line = " ".join(["1"] * 15)
        with pytest.raises(CorpusFormatError, match="exceeds maximum length"):
            parse_corpus(line + "\n", 417)
        assert len(parse_corpus(line + "\n", 417, max_length=20)) == 1

    def test_crlf_accepted(self):
        corpus = parse_corpus(b"1 2\r\n3 4\r\n", 417)
        assert tokens_of(corpus) == [(1, 2), (3, 4)]

    def test_tabs_and_spaces_equivalent(self):
        assert parse_corpus("1\t2  3\n", 417) == parse_corpus("1 2 3\n", 417)

    def test_byte_order_mark_tolerated(self):
        data = "\ufeff#! vocab=9\n1 2\n".encode("utf-8")
        assert parse_corpus(data).vocabulary_size == 9


class TestRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.lists(
                    st.one_of(st.integers(1, 50), st.just(GAP)),
                    min_size=1,
                    max_size=14,
                ),
                st.one_of(st.none(), st.integers(1, 9999)),
                st.integers(1, 3),
            ),
            max_size=25,
        )
    )
    def test_parse_serialize_parse(self, spec):
        corpus = Corpus(
            vocabulary_size=50,
            texts=tuple(
                Text(tokens=tuple(tokens), source_id=sid, line_count=lines)
                for tokens, sid, lines in spec
            ),
            label="roundtrip",
        )
        again = parse_corpus(serialize_corpus(corpus))
        assert again == corpus
        assert serialize_corpus(again) == serialize_corpus(corpus)


class TestBuildEbuds:
    def test_dedupe_and_damage_removal(self):
        raw = parse_corpus("1 2\n1 2\n1 ?\n", 10)
        cleaned = build_ebuds(raw)
        assert tokens_of(cleaned) == [(1, 2)]
        assert cleaned.label == "EBUDS"

    def test_multiline_removed(self):
        raw = parse_corpus("1 2\n3 4 | lines=2\n", 10)
        assert tokens_of(build_ebuds(raw)) == [(1, 2)]

    def test_first_occurrence_order_kept(self):
        raw = parse_corpus("5 6\n1 2\n5 6\n", 10)
        assert tokens_of(build_ebuds(raw)) == [(5, 6), (1, 2)]

    def test_keep_damaged_dedupes_only(self):
        raw = parse_corpus("1 ?\n1 ?\n3 4 | lines=2\n", 10)
        unique = build_ebuds(raw, keep_damaged=True)
        assert tokens_of(unique) == [(1, GAP), (3, 4)]
        assert unique.label == "corpus-unique"

    def test_empty_result_is_legal(self):
        raw = parse_corpus("1 ?\n", 10)
        cleaned = build_ebuds(raw)
        assert len(cleaned) == 0
        assert clean_report(raw, cleaned).warnings

    def test_report_counts(self):
        raw = parse_corpus("1 2\n1 2\n1 ?\n3 4 | lines=2\n", 10)
        cleaned = build_ebuds(raw)
        report = clean_report(raw, cleaned)
        assert report.texts_in == 4
        assert report.texts_out == 1
        assert report.removed_damaged == 1
        assert report.removed_multiline == 1
        assert report.removed_duplicates == 1

    corpora = st.lists(
        st.tuples(
            st.lists(st.one_of(st.integers(1, 8), st.just(GAP)), min_size=1, max_size=6),
            st.integers(1, 2),
        ),
        max_size=30,
    ).map(
        lambda spec: Corpus(
            8,
            tuple(Text(tokens=tuple(t), line_count=lines) for t, lines in spec),
            "raw",
        )
    )

    @settings(max_examples=60, deadline=None)
    @given(corpora)
    def test_idempotent(self, raw):
        once = build_ebuds(raw)
        assert build_ebuds(once) == Corpus(8, once.texts, "EBUDS")

    @settings(max_examples=60, deadline=None)
    @given(corpora)
    def test_output_subset_of_input(self, raw):
        cleaned = build_ebuds(raw)
        assert len(cleaned) <= len(raw)
        source = {t.tokens for t in raw.texts}
        assert all(t.tokens in source for t in cleaned.texts)
        assert not any(t.damaged for t in cleaned.texts)
        assert len({t.tokens for t in cleaned.texts}) == len(cleaned)


class TestHelpers:
    def test_length_histogram(self):
        corpus = parse_corpus("1 2\n3\n4 5\n", 10)
        assert length_histogram(corpus) == {1: 1, 2: 2}

    def test_length_histogram_empty(self):
        assert length_histogram(Corpus(10, (), "x")) == {}

    def test_histogram_total_matches_text_count(self):
        corpus = parse_corpus("1 2\n3\n4 5\n1 2 3\n", 10)
        assert sum(length_histogram(corpus).values()) == len(corpus)

    def test_reverse_texts(self):
        corpus = parse_corpus("1 2 3\n", 10)
        assert tokens_of(reverse_texts(corpus)) == [(3, 2, 1)]
