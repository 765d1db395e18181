"""
Deterministic fixture corpus.

Builds a 20-source / 40-document / 50-question corpus on disk. Every
paragraph is exactly PARAGRAPH_CHARS long including its trailing blank line
and every title block is TITLE_CHARS long, so default 1000/100 chunking yields
1000-char chunks. Each question's answer is planted in exactly one paragraph
of one document; the source's opening paragraph names the entities it covers
so resolver summaries point at the right source.
"""

import json
import random
from dataclasses import dataclass, field, asdict
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Tuple

from .loader import CATALOG_FILE, DOCS_DIR, QUESTIONS_FILE, SOURCES_FILE

SOURCE_COUNT = 20
DOCS_PER_SOURCE = 2
QUESTION_COUNT = 50
PARAGRAPHS_PER_DOC = 60
PARAGRAPH_CHARS = 300  # includes the trailing "\n\n"
TITLE_CHARS = 100      # includes the trailing "\n\n"
RANK_DEPTH = 20

TOPICS = ["geology", "architecture", "astronomy", "botany", "maritime",
          "metallurgy", "music", "cartography", "textiles", "aviation"]
LICENSES = ["cc-by-4.0", "cc-by-sa-4.0", "mit", "proprietary"]

FILLER_WORDS = (
    "lorem ipsum dolor sit amet consectetur adipiscing elit sed eiusmod tempor "
    "incididunt labore dolore magna aliqua enim minim veniam quis nostrud "
    "exercitation ullamco laboris nisi aliquip commodo consequat duis aute irure "
    "reprehenderit voluptate velit esse cillum fugiat nulla pariatur excepteur "
    "sint occaecat cupidatat proident sunt culpa officia deserunt mollit anim"
).split()

ENTITY_HEADS = ["zor", "bel", "quin", "vash", "tel", "mor", "kai", "dren", "ulv", "pax",
                "orin", "sabe", "fen", "gral", "hest"]
ENTITY_TAILS = ["anite", "mora", "dell", "ovia", "urst", "eth", "ion", "arra"]
ENTITY_KINDS = ["alloy", "tower", "river", "guild", "comet", "festival", "engine", "orchard"]

ANSWER_HEADS = ["Ost", "Vel", "Cair", "Dun", "Esk", "Frey", "Hal", "Iver", "Jor", "Lum"]
ANSWER_TAILS = ["quell", "brink", "moor", "haven", "spire", "ward", "fold", "crest"]
ANSWER_KINDS = ["Crest", "Hollow", "Reach", "Gate", "Mark", "Vale"]

ATTRIBUTES = ["chief architect", "original patron", "namesake", "first surveyor",
              "guardian order", "recorded founder", "principal archive", "sister city"]

PII_SUFFIXES = [
    " My email is jane.doe@example.org.",
    " Call me at +1 415 555 0134.",
    " You can reach me on (212) 555-0187.",
    " Card 4111 1111 1111 1111 is on file.",
    " Send the answer to k.ito@mail.example.net.",
]

BASE_DATE = datetime(2025, 1, 6, tzinfo=timezone.utc)


@dataclass
class FixtureManifest:
    """Expected counts recorded by the generator."""
    seed: int
    sources: int
    documents: int
    questions: int
    pii: int
    rephrased: int
    decomposed: int
    unchanged: int
    source_ids: List[str] = field(default_factory=list)
    answer_docs: Dict[str, List[str]] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: Dict) -> 'FixtureManifest':
        return FixtureManifest(**data)

    @staticmethod
    def load(path: Path) -> 'FixtureManifest':
        with open(Path(path) / "fixture_manifest.json", encoding="utf-8") as f:
            return FixtureManifest.from_dict(json.load(f))


@dataclass
class _Fact:
    entity: str
    attribute: str
    answer: str
    doc_index: int
    paragraph: int

    @property
    def question(self) -> str:
        return f"Who is the {self.attribute} of {self.entity}?"


def _fit(text: str, width: int, rng: random.Random) -> str:
    """Pad text with filler words, then cut to exactly `width` chars ending in '.'."""
    words = [text] if text else []
    while len(" ".join(words)) < width:
        words.append(rng.choice(FILLER_WORDS))
    body = " ".join(words)[:width - 1]
    if body.endswith(" "):
        body = body[:-1] + "a"
    return body + "."


def _filler_paragraph(rng: random.Random) -> str:
    return _fit("", PARAGRAPH_CHARS - 2, rng)


def _unique_names(rng: random.Random, heads, tails, kinds, count, title_case=False) -> List[str]:
    combos = [(h, t, k) for h in heads for t in tails for k in kinds]
    rng.shuffle(combos)
    names, seen_stems = [], set()
    for h, t, k in combos:
        stem = h + t
        if stem in seen_stems:
            continue
        seen_stems.add(stem)
        names.append(f"{stem.capitalize() if title_case else stem} {k}")
        if len(names) == count:
            break
    return names


def _build_facts(rng: random.Random, doc_count: int) -> List[_Fact]:
    entities = _unique_names(rng, ENTITY_HEADS, ENTITY_TAILS, ENTITY_KINDS, QUESTION_COUNT + 8)
    answers = _unique_names(rng, ANSWER_HEADS, ANSWER_TAILS, ANSWER_KINDS, QUESTION_COUNT + 8,
                            title_case=True)
    facts = []
    for i in range(QUESTION_COUNT + 8):
        doc_index = i % doc_count
        lap = i // doc_count
        facts.append(_Fact(
            entity=entities[i],
            attribute=ATTRIBUTES[i % len(ATTRIBUTES)],
            answer=answers[i],
            doc_index=doc_index,
            paragraph=8 + 20 * lap + (i % 7),
        ))
    return facts


def _fact_paragraph(fact: _Fact, rng: random.Random) -> str:
    lead = (f"The {fact.attribute} of {fact.entity} is {fact.answer}. "
            f"{fact.question} Records name {fact.answer} as the {fact.attribute} of {fact.entity}.")
    return _fit(lead, PARAGRAPH_CHARS - 2, rng)


def _intro_paragraph(topic: str, facts: List[_Fact], rng: random.Random) -> str:
    covered = "; ".join(f"the {f.attribute} of {f.entity}" for f in facts)
    return _fit(f"This {topic} archive covers {covered}.", PARAGRAPH_CHARS - 2, rng)


def _render(media_type: str, title: str, paragraphs: List[str]) -> str:
    if media_type == "html":
        body = "\n".join(f"<p>{p}</p>" for p in paragraphs)
        return (f"<!DOCTYPE html>\n<html><head><style>p {{ margin: 0 }}</style></head>"
                f"<body>\n<h1>{title}</h1>\n{body}\n<script>var seen = 1;</script></body></html>\n")
    if media_type == "markdown":
        return f"# {title[2:]}\n\n" + "".join(p + "\n\n" for p in paragraphs)
    return f"{title}\n\n" + "".join(p + "\n\n" for p in paragraphs)


def _question_text(i: int, fact: _Fact, facts: List[_Fact]) -> Tuple[str, str]:
    """Question text and its planted category for question i."""
    if i < 7:
        other = facts[QUESTION_COUNT + i]
        if i < 4:
            return (f"Who is the {fact.attribute} of {fact.entity} and "
                    f"who is the {other.attribute} of {other.entity}?"), "decomposed"
        return f"{fact.question} {other.question}", "decomposed"
    if i < 15:
        noisy = ["  please   {q} ", "{q}??", "Please {lq}", "{q}   ", "please  {lq}",
                 "\t{q}", "{q} ??", "  {q}"][i - 7]
        q = fact.question
        return noisy.format(q=q, lq=q[0].lower() + q[1:]), "rephrased"
    if i < 20:
        return fact.question + PII_SUFFIXES[i - 15], "pii"
    return fact.question, "plain"


def write_fixture_corpus(path: Path, seed: int = 7) -> FixtureManifest:
    """
    Write the fixture corpus into `path` (created if needed).

    Returns:
        FixtureManifest with the expected counts (also written to disk)
    """
    rng = random.Random(seed)
    root = Path(path)
    docs_dir = root / DOCS_DIR
    docs_dir.mkdir(parents=True, exist_ok=True)

    doc_count = SOURCE_COUNT * DOCS_PER_SOURCE
    facts = _build_facts(rng, doc_count)
    by_doc: Dict[int, List[_Fact]] = {}
    for fact in facts:
        by_doc.setdefault(fact.doc_index, []).append(fact)

    source_ids = [f"src-{n:02d}" for n in range(1, SOURCE_COUNT + 1)]
    doc_ids: List[str] = []
    source_lines, catalog_lines = [], []

    for s, source_id in enumerate(source_ids):
        topic = TOPICS[s % len(TOPICS)]
        license_id = LICENSES[s % len(LICENSES)]
        media_type = "html" if s % 5 == 4 else ("markdown" if s % 3 == 2 else "plain")
        ext = {"html": "html", "markdown": "md", "plain": "txt"}[media_type]
        fetched = (BASE_DATE + timedelta(days=17 * s)).strftime("%Y-%m-%dT%H:%M:%SZ")
        title_stem = f"{topic.capitalize()} Register {s + 1:02d}"
        catalog_lines.append({
            "source_id": source_id,
            "title": title_stem,
            "license": license_id,
            "topics": [topic, "reference"],
        })

        for d in range(DOCS_PER_SOURCE):
            doc_index = s * DOCS_PER_SOURCE + d
            doc_id = f"s{s + 1:02d}{'ab'[d]}"
            doc_ids.append(doc_id)
            doc_facts = by_doc.get(doc_index, [])

            title = _fit(f"{title_stem} volume {d + 1}", TITLE_CHARS - 2, rng)
            paragraphs = [_intro_paragraph(topic, doc_facts, rng)]
            fact_at = {f.paragraph: f for f in doc_facts}
            for p in range(1, PARAGRAPHS_PER_DOC):
                fact = fact_at.get(p)
                paragraphs.append(_fact_paragraph(fact, rng) if fact else _filler_paragraph(rng))

            filename = f"{doc_id}.{ext}"
            (docs_dir / filename).write_text(_render(media_type, title, paragraphs),
                                             encoding="utf-8")
            source_lines.append({
                "doc_id": doc_id,
                "source_id": source_id,
                "uri": f"https://{source_id}.example.org/{doc_id}",
                "media_type": media_type,
                "fetched_at": fetched,
                "file": filename,
            })

    question_lines = []
    counts = {"pii": 0, "rephrased": 0, "decomposed": 0, "plain": 0}
    answer_docs: Dict[str, List[str]] = {}
    for i in range(QUESTION_COUNT):
        fact = facts[i]
        text, category = _question_text(i, fact, facts)
        counts[category] += 1
        answer_doc = doc_ids[fact.doc_index]
        rank = [answer_doc]
        if category == "decomposed":
            rank.append(doc_ids[facts[QUESTION_COUNT + i].doc_index])
        distractors = [d for d in doc_ids if d not in rank]
        rng.shuffle(distractors)
        rank.extend(distractors[:RANK_DEPTH - len(rank)])
        # answer doc is not always ranked first
        pos = i % 3
        rank.insert(pos, rank.pop(0))
        qid = f"q{i + 1:03d}"
        answer_docs[qid] = [answer_doc]
        question_lines.append({
            "qid": qid,
            "question": text,
            "answers": [fact.answer, fact.answer.lower()],
            "source_rank": rank,
        })

    for name, rows in ((SOURCES_FILE, source_lines), (QUESTIONS_FILE, question_lines),
                       (CATALOG_FILE, catalog_lines)):
        with open(root / name, "w", encoding="utf-8") as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True) + "\n")

    manifest = FixtureManifest(
        seed=seed,
        sources=SOURCE_COUNT,
        documents=doc_count,
        questions=QUESTION_COUNT,
        pii=counts["pii"],
        rephrased=counts["rephrased"],
        decomposed=counts["decomposed"],
        unchanged=counts["plain"] + counts["pii"],
        source_ids=source_ids,
        answer_docs=answer_docs,
    )
    with open(root / "fixture_manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest.to_dict(), f, indent=2, sort_keys=True)
    return manifest
