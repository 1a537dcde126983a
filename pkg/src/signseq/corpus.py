"""Reading, validating, and pruning corpora of integer-coded sign sequences.

A corpus file is UTF-8 text with an optional ``#!`` header, ``#`` comment
lines, and one text per line as whitespace-separated decimal sign ids, where
``?`` marks an illegible position.  An optional ``| id=<n> lines=<n>``
trailer carries per-text metadata.  Sign ids run from 1 to the declared
vocabulary size; 0 is reserved and never appears in a file.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

DEFAULT_VOCAB = 417
MAX_TEXT_LENGTH = 14

# Reserved token id marking an illegible position inside a text.
GAP = 0


class CorpusFormatError(ValueError):
    """Malformed corpus input; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyCorpusError(ValueError):
    """Operation needs at least one text (or one counted token)."""


@dataclass(frozen=True)
class Text:
    """One inscription line in normalized reading order (first-read first)."""

    tokens: tuple[int, ...]
    source_id: int | None = None
    line_count: int = 1

    @property
    def damaged(self) -> bool:
        return GAP in self.tokens

    @property
    def gap_positions(self) -> tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.tokens) if t == GAP)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Corpus:
    """An immutable set of texts plus the declared vocabulary size."""

    vocabulary_size: int
    texts: tuple[Text, ...]
    label: str = "corpus"

    def __len__(self) -> int:
        return len(self.texts)


def parse_corpus(
    data: bytes | str,
    vocabulary_size: int | None = None,
    *,
    label: str | None = None,
    max_length: int = MAX_TEXT_LENGTH,
) -> Corpus:
    """Parse the line-oriented corpus format.

    Explicit ``vocabulary_size``/``label`` arguments override header values;
    the vocabulary defaults to 417 when neither is given.  Raises
    :class:`CorpusFormatError` (with line number) on malformed input,
    reserved id 0, ids above the vocabulary, over-long texts, and empty
    lines between texts.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    data = data.removeprefix("\ufeff")

    header_vocab = None
    header_label = None
    texts: list[Text] = []
    pending_blank: int | None = None

    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line:
            if texts:
                pending_blank = lineno
            continue
        if line.startswith("#!"):
            if texts:
                raise CorpusFormatError("header after first text", lineno)
            header_vocab, header_label = _parse_header(line, lineno)
            continue
        if line.startswith("#"):
            continue
        if pending_blank is not None:
            raise CorpusFormatError("empty line between texts", pending_blank)

        vocab = vocabulary_size if vocabulary_size is not None else (header_vocab or DEFAULT_VOCAB)
        texts.append(_parse_text_line(line, lineno, vocab, max_length))

    vocab = vocabulary_size if vocabulary_size is not None else (header_vocab or DEFAULT_VOCAB)
    if label is None:
        label = header_label or "corpus"
    return Corpus(vocabulary_size=vocab, texts=tuple(texts), label=label)


def _parse_header(line: str, lineno: int) -> tuple[int | None, str | None]:
    vocab = None
    label = None
    for field in line[2:].split():
        key, sep, value = field.partition("=")
        if not sep:
            raise CorpusFormatError(f"malformed header field {field!r}", lineno)
        if key == "vocab":
            try:
                vocab = int(value)
            except ValueError:
                raise CorpusFormatError(f"malformed vocab size {value!r}", lineno) from None
            if vocab < 1:
                raise CorpusFormatError(f"vocab size must be positive, got {vocab}", lineno)
        elif key == "label":
            label = value
        else:
            raise CorpusFormatError(f"unknown header key {key!r}", lineno)
    return vocab, label


def _parse_text_line(line: str, lineno: int, vocab: int, max_length: int) -> Text:
    body, _, trailer = line.partition("|")
    fields = body.split()
    if not fields:
        raise CorpusFormatError("text line has no sign fields", lineno)

    tokens = []
    for field in fields:
        if field == "?":
            tokens.append(GAP)
            continue
        try:
            sign = int(field)
        except ValueError:
            raise CorpusFormatError(f"malformed sign id {field!r}", lineno) from None
        if sign == 0:
            raise CorpusFormatError("sign id 0 is reserved", lineno)
        if sign < 0:
            raise CorpusFormatError(f"negative sign id {sign}", lineno)
        if sign > vocab:
            raise CorpusFormatError(f"sign id {sign} exceeds vocabulary size {vocab}", lineno)
        tokens.append(sign)

    if len(tokens) > max_length:
        raise CorpusFormatError(
            f"text of {len(tokens)} tokens exceeds maximum length {max_length}", lineno
        )

    source_id = None
    line_count = 1
    if trailer.strip():
        for field in trailer.split():
            key, sep, value = field.partition("=")
            if not sep:
                raise CorpusFormatError(f"malformed metadata field {field!r}", lineno)
            if key not in ("id", "lines"):
                raise CorpusFormatError(f"unknown metadata key {key!r}", lineno)
            try:
                number = int(value)
            except ValueError:
                raise CorpusFormatError(f"malformed metadata value {value!r}", lineno) from None
            if key == "id":
                source_id = number
            else:
                if number < 1:
                    raise CorpusFormatError(f"line count must be positive, got {number}", lineno)
                line_count = number

    return Text(tokens=tuple(tokens), source_id=source_id, line_count=line_count)


def serialize_corpus(corpus: Corpus) -> str:
    """Render a corpus in the canonical file format (round-trips exactly)."""
    lines = [f"#! vocab={corpus.vocabulary_size} label={corpus.label}"]
    for text in corpus.texts:
        fields = " ".join("?" if t == GAP else str(t) for t in text.tokens)
        meta = []
        if text.source_id is not None:
            meta.append(f"id={text.source_id}")
        if text.line_count != 1:
            meta.append(f"lines={text.line_count}")
        if meta:
            fields += " | " + " ".join(meta)
        lines.append(fields)
    return "\n".join(lines) + "\n"


def load_corpus(path, vocabulary_size=None, *, label=None, max_length=MAX_TEXT_LENGTH) -> Corpus:
    with open(path, "rb") as handle:
        return parse_corpus(
            handle.read(), vocabulary_size, label=label, max_length=max_length
        )


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(serialize_corpus(corpus))


def reverse_texts(corpus: Corpus) -> Corpus:
    """Flip every text's token order (for sources transcribed in display order)."""
    flipped = tuple(
        Text(tokens=t.tokens[::-1], source_id=t.source_id, line_count=t.line_count)
        for t in corpus.texts
    )
    return Corpus(corpus.vocabulary_size, flipped, corpus.label)


@dataclass(frozen=True)
class CleanReport:
    """What pruning removed; empty output is legal but worth a warning."""

    texts_in: int
    texts_out: int
    removed_damaged: int
    removed_multiline: int
    removed_duplicates: int
    warnings: tuple[str, ...] = ()


def build_ebuds(raw: Corpus, *, keep_damaged: bool = False) -> Corpus:
    """Prune to the unique single-line undamaged subset, labelled ``EBUDS``.

    Removal order: damaged texts, then multi-line texts, then exact
    duplicate sign sequences (first occurrence kept).  ``keep_damaged=True``
    instead produces the intermediate unique-texts corpus: duplicates
    collapse (gaps compare as gaps) but damaged and multi-line texts stay.
    """
    if keep_damaged:
        survivors = _dedupe(raw.texts)
        return Corpus(raw.vocabulary_size, survivors, f"{raw.label}-unique")

    undamaged = [t for t in raw.texts if not t.damaged]
    single_line = [t for t in undamaged if t.line_count == 1]
    survivors = _dedupe(single_line)
    return Corpus(raw.vocabulary_size, survivors, "EBUDS")


def _dedupe(texts) -> tuple[Text, ...]:
    seen = set()
    kept = []
    for text in texts:
        if text.tokens not in seen:
            seen.add(text.tokens)
            kept.append(text)
    return tuple(kept)


def clean_report(raw: Corpus, cleaned: Corpus) -> CleanReport:
    damaged = sum(1 for t in raw.texts if t.damaged)
    multiline = sum(1 for t in raw.texts if not t.damaged and t.line_count > 1)
    duplicates = len(raw.texts) - damaged - multiline - len(cleaned.texts)
    if cleaned.label.endswith("-unique"):
        damaged = 0
        multiline = 0
        duplicates = len(raw.texts) - len(cleaned.texts)
    warnings = ()
    if not cleaned.texts:
        warnings = ("cleaned corpus is empty",)
    return CleanReport(
        texts_in=len(raw.texts),
        texts_out=len(cleaned.texts),
        removed_damaged=damaged,
        removed_multiline=multiline,
        removed_duplicates=duplicates,
        warnings=warnings,
    )


def length_histogram(corpus: Corpus) -> dict[int, int]:
    """Token-length counts per text; values sum to the number of texts."""
    return dict(Counter(len(t) for t in corpus.texts))
