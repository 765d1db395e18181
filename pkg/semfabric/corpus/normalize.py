"""
Raw document bytes -> plain text.

Plain and markdown pass through with line endings unified. HTML is reduced
to its text: script/style dropped with content, block boundaries become
blank lines, entities decoded.
"""

import re
from enum import Enum

from bs4 import BeautifulSoup, Comment, Doctype, NavigableString, ProcessingInstruction, Tag


class MediaType(Enum):
    """Document media types the corpus understands."""
    PLAIN = "plain"
    MARKDOWN = "markdown"
    HTML = "html"

    @staticmethod
    def from_extension(ext: str) -> 'MediaType':
        ext = ext.lower().lstrip(".")
        return {
            "txt": MediaType.PLAIN,
            "md": MediaType.MARKDOWN,
            "html": MediaType.HTML,
            "htm": MediaType.HTML,
        }[ext]


BLOCK_TAGS = frozenset({
    "address", "article", "aside", "blockquote", "body", "br", "dd", "details",
    "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form",
    "h1", "h2", "h3", "h4", "h5", "h6", "head", "header", "hr", "html", "li",
    "main", "nav", "ol", "p", "pre", "section", "summary", "table", "tbody",
    "td", "tfoot", "th", "thead", "title", "tr", "ul",
})

DROPPED_TAGS = ("script", "style")

_BLANK_RUN = re.compile(r"[ \t]*\n(?:[ \t]*\n)+[ \t]*")
_SKIPPED_STRINGS = (Comment, Doctype, ProcessingInstruction)


def _unify_newlines(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def _html_to_text(markup: str) -> str:
    soup = BeautifulSoup(markup, "html.parser")
    for tag in soup(list(DROPPED_TAGS)):
        tag.decompose()

    parts = []

    def walk(node):
        for child in node.children:
            if isinstance(child, _SKIPPED_STRINGS):
                continue
            if isinstance(child, NavigableString):
                parts.append(str(child))
            elif isinstance(child, Tag):
                block = child.name in BLOCK_TAGS
                if block:
                    parts.append("\n\n")
                walk(child)
                if block:
                    parts.append("\n\n")

    walk(soup)
    text = _unify_newlines("".join(parts)).replace("\u00a0", " ")
    text = _BLANK_RUN.sub("\n\n", text)
    return text.strip()


def normalize_document(raw: bytes, media_type: MediaType) -> str:
    """
    Normalize raw document bytes to text.

    Invalid UTF-8 is replaced with U+FFFD. The result never contains "\\r".
    """
    text = raw.decode("utf-8", errors="replace")
    if media_type is MediaType.HTML:
        return _html_to_text(text)
    return _unify_newlines(text)
