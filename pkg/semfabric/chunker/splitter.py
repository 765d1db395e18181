"""
Recursive character splitting with exact offsets.

Text is partitioned at the first separator that occurs in it (the separator
stays with the preceding piece), oversized pieces are split again with the
remaining separators, and the empty separator falls back to a sliding window.
Pieces are then merged greedily into spans of at most chunk_size chars;
when a piece overflows the open span, the next span carries back `overlap`
chars from the end of the closed one.
"""

from dataclasses import dataclass, field, asdict
from typing import Dict, List, Tuple, Union

from ..digest import text_digest
from ..errors import ParameterError

Span = Tuple[int, int]

DEFAULT_SEPARATORS = ("\n\n", "\n", " ", "")


@dataclass(frozen=True)
class SplitParams:
    """Chunk size, overlap and separator cascade."""
    chunk_size: int = 1000
    overlap: int = 100
    separators: Tuple[str, ...] = DEFAULT_SEPARATORS

    def validate(self):
        if self.chunk_size <= 0:
            raise ParameterError(f"chunk_size must be > 0, got {self.chunk_size}")
        if not 0 <= self.overlap < self.chunk_size:
            raise ParameterError(
                f"overlap must satisfy 0 <= overlap < chunk_size, got {self.overlap} / {self.chunk_size}"
            )
        if not self.separators or self.separators[-1] != "":
            raise ParameterError("the last separator must be the empty string")


@dataclass
class Chunk:
    """A contiguous span of one document with provenance."""
    chunk_id: str
    doc_id: str
    source_id: str
    start: int
    end: int
    text: str
    digest: str
    uri: str = ""
    media_type: str = "plain"
    fetched_at: str = ""
    license: str = ""

    def to_dict(self) -> Dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: Dict) -> 'Chunk':
        return Chunk(**data)

    @staticmethod
    def make_id(doc_id: str, start: int, end: int) -> str:
        return f"{doc_id}#{start}-{end}"


class _Windows(list):
    """Pre-cut sliding-window spans, emitted without merging."""


def _partition(text: str, offset: int, sep: str) -> List[Span]:
    pieces = []
    pos = 0
    while True:
        idx = text.find(sep, pos)
        if idx < 0:
            break
        cut = idx + len(sep)
        pieces.append((offset + pos, offset + cut))
        pos = cut
    if pos < len(text):
        pieces.append((offset + pos, offset + len(text)))
    return pieces


def _sliding_windows(start: int, end: int, chunk_size: int, overlap: int) -> _Windows:
    step = chunk_size - overlap
    windows = _Windows([(start, min(end, start + chunk_size))])
    while windows[-1][1] < end:
        prev_start = windows[-1][0]
        nxt = prev_start + step
        if nxt + chunk_size <= end:
            windows.append((nxt, nxt + chunk_size))
        else:
            windows.append((max(end - step, prev_start + 1), end))
    return windows


def _atoms(text: str, offset: int, separators: Tuple[str, ...],
           params: SplitParams) -> List[Union[Span, _Windows]]:
    """Flatten text into mergeable pieces and window blocks."""
    length = len(text)
    if length <= params.chunk_size:
        return [(offset, offset + length)]

    for i, sep in enumerate(separators):
        if sep == "":
            return [_sliding_windows(offset, offset + length, params.chunk_size, params.overlap)]
        if sep in text:
            rest = separators[i + 1:]
            out: List[Union[Span, _Windows]] = []
            for s, e in _partition(text, offset, sep):
                if e - s <= params.chunk_size:
                    out.append((s, e))
                else:
                    out.extend(_atoms(text[s - offset:e - offset], s, rest, params))
            return out

    # no separator applies (cascade without ""): validate() forbids this
    return [_sliding_windows(offset, offset + length, params.chunk_size, params.overlap)]


def _reopen(prev: Span, piece_end: int, params: SplitParams) -> int:
    return max(prev[1] - params.overlap, piece_end - params.chunk_size, prev[0] + 1)


def split_recursive(text: str, params: SplitParams = SplitParams()) -> List[Span]:
    """
    Split text into ordered (start, end) spans.

    Spans cover the text, have strictly increasing starts and ends,
    and are never longer than params.chunk_size.
    """
    params.validate()
    if not text:
        return []
    if len(text) <= params.chunk_size:
        return [(0, len(text))]

    spans: List[Span] = []
    current = None
    for atom in _atoms(text, 0, tuple(params.separators), params):
        if isinstance(atom, _Windows):
            if current is not None:
                spans.append(current)
                current = None
            spans.extend(atom)
            continue

        piece_start, piece_end = atom
        if current is None:
            start = _reopen(spans[-1], piece_end, params) if spans else piece_start
            current = (start, piece_end)
        elif piece_end - current[0] <= params.chunk_size:
            current = (current[0], piece_end)
        else:
            spans.append(current)
            current = (_reopen(current, piece_end, params), piece_end)

    if current is not None:
        spans.append(current)
    return spans


def chunk_document(doc, params: SplitParams = SplitParams(), license: str = "") -> List[Chunk]:
    """Bind split spans of a Document to Chunk records."""
    chunks = []
    for start, end in split_recursive(doc.text, params):
        text = doc.text[start:end]
        chunks.append(Chunk(
            chunk_id=Chunk.make_id(doc.doc_id, start, end),
            doc_id=doc.doc_id,
            source_id=doc.source_id,
            start=start,
            end=end,
            text=text,
            digest=text_digest(text),
            uri=doc.uri,
            media_type=doc.media_type.value,
            fetched_at=doc.fetched_at,
            license=license,
        ))
    return chunks
