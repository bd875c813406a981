"""CoNLL-U ingestion: parse sentence blocks into validated dependency trees
and build the training vocabulary."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .errors import ConlluFormatError, EmptyVocabularyError, TreeValidationError

PUNCT_TAG = "PUNCT"

# CoNLL-U columns: ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC
_NUM_COLUMNS = 10


@dataclass(frozen=True)
class Token:
    """One parsed word: surface form, POS tag, and its dependency arc.

    ``id`` is the 1-based position in the sentence; ``head`` is 0 for the
    root token, otherwise the 1-based id of the governing token.
    """

    id: int
    form: str
    upos: str
    head: int
    deprel: str


@dataclass(frozen=True)
class SentenceTree:
    """A validated dependency tree: tokens ordered by id, exactly one root."""

    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def root(self) -> Token:
        return next(t for t in self.tokens if t.head == 0)

    def arcs(self) -> Iterator[tuple[Token, Token]]:
        """Yield (head token, dependent token) for every non-root token."""
        for tok in self.tokens:
            if tok.head != 0:
                yield self.tokens[tok.head - 1], tok


@dataclass
class Vocabulary:
    """Dense word index with frequency counts and per-word tag histograms."""

    words: list[str]
    index: dict[str, int]
    counts: list[int]
    tag_counts: list[dict[str, int]]
    min_count: int = 1
    drop_punct: bool = False

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def total_tokens(self) -> int:
        return sum(self.counts)

    def dominant_tag(self, node: int) -> str:
        """Most frequent tag of the word; lexicographically smallest on ties."""
        hist = self.tag_counts[node]
        best = max(hist.values())
        return min(tag for tag, n in hist.items() if n == best)

    def all_tags(self) -> list[str]:
        """Sorted union of every tag observed on a retained word."""
        tags: set[str] = set()
        for hist in self.tag_counts:
            tags.update(hist)
        return sorted(tags)


def _iter_lines(source: str | bytes | IO | Iterable[str]) -> Iterator[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = source.splitlines()
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line.rstrip("\n").rstrip("\r")


def parse_conllu(
    source: str | bytes | IO | Iterable[str], *, case_fold: bool = True
) -> list[SentenceTree]:
    """Parse a CoNLL-U stream into one validated SentenceTree per sentence.

    Accepts a whole document (str/bytes), an open text file, or any iterable
    of lines. Token lines must carry exactly 10 tab-separated columns; only
    ID, FORM, UPOS, HEAD and DEPREL are consumed. Comment lines (``#``) are
    skipped, multiword-range ids (``1-2``) and empty-node ids (``1.1``) are
    ignored, and a blank line ends the sentence. Forms are lowercased unless
    ``case_fold`` is off.

    Raises ConlluFormatError for malformed lines and TreeValidationError for
    blocks that are not a single-rooted acyclic tree.
    """
    trees: list[SentenceTree] = []
    pending: list[Token] = []
    sent_id: str | None = None
    first_line = 0

    def flush() -> None:
        nonlocal pending, sent_id
        if pending:
            name = f"sentence {len(trees) + 1} (line {first_line})"
            if sent_id is not None:
                name += f" [sent_id={sent_id}]"
            trees.append(_validate_tree(pending, name))
        pending = []
        sent_id = None

    for lineno, line in enumerate(_iter_lines(source), start=1):
        if lineno == 1:
            line = line.lstrip("﻿")
        if line == "":
            flush()
            continue
        if line.startswith("#"):
            if line[1:].split("=", 1)[0].strip() == "sent_id" and "=" in line:
                sent_id = line.split("=", 1)[1].strip()
            continue
        columns = line.split("\t")
        if len(columns) != _NUM_COLUMNS:
            raise ConlluFormatError(
                f"expected {_NUM_COLUMNS} tab-separated columns, got {len(columns)}",
                lineno,
            )
        tok_id, form, upos, head, deprel = (
            columns[0],
            columns[1],
            columns[3],
            columns[6],
            columns[7],
        )
        if "-" in tok_id or "." in tok_id:
            continue  # multiword ranges and empty nodes carry no arcs we use
        if not pending:
            first_line = lineno
        try:
            id_value = int(tok_id)
        except ValueError:
            raise ConlluFormatError(f"non-integer token id {tok_id!r}", lineno) from None
        try:
            head_value = int(head)
        except ValueError:
            raise ConlluFormatError(f"non-integer HEAD {head!r}", lineno) from None
        if id_value != len(pending) + 1:
            raise ConlluFormatError(
                f"token id {id_value} out of sequence (expected {len(pending) + 1})",
                lineno,
            )
        if head_value < 0:
            raise ConlluFormatError(f"negative HEAD {head_value}", lineno)
        if not form or not upos:
            raise ConlluFormatError("empty FORM or UPOS column", lineno)
        if case_fold:
            form = form.lower()
        pending.append(Token(id_value, form, upos, head_value, deprel))

    flush()
    return trees


def _validate_tree(tokens: list[Token], name: str) -> SentenceTree:
    n = len(tokens)
    roots = [t.id for t in tokens if t.head == 0]
    if not roots:
        raise TreeValidationError("no root token (no HEAD = 0)", name)
    if len(roots) > 1:
        raise TreeValidationError(f"multiple roots at ids {roots}", name)
    for tok in tokens:
        if tok.head > n:
            raise TreeValidationError(
                f"token {tok.id} has HEAD {tok.head} out of range 1..{n}", name
            )
    # Every token must reach the root by following heads; a repeat means a cycle.
    for tok in tokens:
        seen = {tok.id}
        cur = tok.head
        while cur != 0:
            if cur in seen:
                raise TreeValidationError(
                    f"cyclic heads involving token {tok.id}", name
                )
            seen.add(cur)
            cur = tokens[cur - 1].head
    return SentenceTree(tuple(tokens))


def build_vocab(
    trees: Iterable[SentenceTree],
    min_count: int = 1,
    *,
    drop_punct: bool = False,
) -> Vocabulary:
    """Count word forms over the corpus and assign dense indices.

    Words seen fewer than ``min_count`` times are dropped. Indices go by
    descending frequency, ties broken lexicographically. With ``drop_punct``
    set, token occurrences tagged PUNCT are not counted at all.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    freq: Counter[str] = Counter()
    tag_hist: dict[str, Counter[str]] = {}
    for tree in trees:
        for tok in tree.tokens:
            if drop_punct and tok.upos == PUNCT_TAG:
                continue
            freq[tok.form] += 1
            tag_hist.setdefault(tok.form, Counter())[tok.upos] += 1
    kept = sorted(
        (w for w, c in freq.items() if c >= min_count),
        key=lambda w: (-freq[w], w),
    )
    if not kept:
        raise EmptyVocabularyError(
            f"no word reaches min_count={min_count} (corpus has {len(freq)} forms)"
        )
    return Vocabulary(
        words=kept,
        index={w: i for i, w in enumerate(kept)},
        counts=[freq[w] for w in kept],
        tag_counts=[dict(sorted(tag_hist[w].items())) for w in kept],
        min_count=min_count,
        drop_punct=drop_punct,
    )


def token_to_line(token: Token) -> str:
    """Render one token as a 10-column CoNLL-U line (unused columns are _)."""
    return "\t".join(
        [
            str(token.id),
            token.form,
            "_",
            token.upos,
            "_",
            "_",
            str(token.head),
            token.deprel,
            "_",
            "_",
        ]
    )


def trees_to_conllu(trees: Iterable[SentenceTree]) -> str:
    """Render sentence trees back to CoNLL-U text (one blank line after each)."""
    blocks = []
    for tree in trees:
        blocks.append("\n".join(token_to_line(t) for t in tree.tokens) + "\n\n")
    return "".join(blocks)
