"""The 15 binary trafficking-signal features.

Six groups: language patterns (third-person voice, first-person plural,
content entropy, six word-level 4-gram TF-IDF bits), words and phrases of
interest, countries of interest, multiple individuals advertised, low body
weight, and website/spa references. Phrase lists are editable config files,
not code; the packaged seeds live in ``adtriage/lexicons``.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .corpus import Listing

ENTROPY_THRESHOLD = 4.0
NGRAM_N = 4
NGRAM_SLOTS = 6
NGRAM_BINARIZE_THRESHOLD = 0.5
LOW_WEIGHT_LBS = 110

THIRD_PERSON_PRONOUNS = frozenset({"she", "her", "hers", "he", "his", "him"})
FIRST_PERSON_PRONOUNS = frozenset({"i", "me", "my", "mine"})
FIRST_PLURAL_PRONOUNS = frozenset({"we", "our", "us", "ours"})

COUNT_WORDS = frozenset({"two", "three", "four", "2", "3", "4"})
PERSON_NOUNS = frozenset({"girl", "girls", "lady", "ladies", "woman", "women", "friend", "friends"})

AGE_MIN = 18
AGE_MAX = 65
_AGE_TOKEN_RE = re.compile(r"^\d{2}$")
_WEIGHT_UNITS = frozenset({"lbs", "lb", "pounds", "pound", "kg", "kgs"})

FEATURE_NAMES = (
    "third_person",
    "first_person_plural",
    "high_entropy",
    "ngram_1",
    "ngram_2",
    "ngram_3",
    "ngram_4",
    "ngram_5",
    "ngram_6",
    "words_of_interest",
    "country_of_interest",
    "multiple_victims",
    "low_weight",
    "website_link",
    "spa_reference",
)


@dataclass(frozen=True)
class FeatureVector:
    listing_id: str
    third_person: int
    first_person_plural: int
    high_entropy: int
    ngram_bits: tuple[int, ...]
    words_of_interest: int
    country_of_interest: int
    multiple_victims: int
    low_weight: int
    website_link: int
    spa_reference: int

    def bits(self) -> tuple[int, ...]:
        """All 15 bits in the canonical column order."""
        return (
            self.third_person,
            self.first_person_plural,
            self.high_entropy,
            *self.ngram_bits,
            self.words_of_interest,
            self.country_of_interest,
            self.multiple_victims,
            self.low_weight,
            self.website_link,
            self.spa_reference,
        )

    def any_set(self) -> bool:
        return any(self.bits())


@dataclass(frozen=True)
class NgramModel:
    """Selected 4-grams with smoothed idf weights and the binarize threshold."""

    n: int
    selected_ngrams: tuple[str, ...]
    idf: dict[str, float]
    binarize_threshold: float = NGRAM_BINARIZE_THRESHOLD


@dataclass(frozen=True)
class Lexicons:
    words_of_interest: frozenset[str]
    countries: frozenset[str]
    spa_terms: frozenset[str]
    url_patterns: tuple[re.Pattern, ...]
    plural_markers: frozenset[str]


def entropy(tokens: Sequence[str]) -> float:
    """Shannon entropy (bits) of the empirical word distribution.

    Computed as log2(n) - sum(c*log2(c))/n with exact summation, which keeps
    the result within ~1 ulp of the mathematical value.
    """
    total = len(tokens)
    if total == 0:
        return 0.0
    counts = Counter(tokens)
    if len(counts) == 1:
        return 0.0
    return math.log2(total) - math.fsum(c * math.log2(c) for c in counts.values()) / total


def high_entropy_bit(tokens: Sequence[str]) -> int:
    """1 iff content entropy strictly exceeds the empirical threshold of 4 bits."""
    return 1 if entropy(tokens) > ENTROPY_THRESHOLD else 0


def _doc_ngrams(tokens: Sequence[str], n: int) -> list[str]:
    return [" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def fit_ngram_model(corpus: Sequence[Listing], n: int = NGRAM_N) -> NgramModel:
    """Select the ``NGRAM_SLOTS`` most document-frequent word n-grams.

    Ties break lexicographically; idf is the smoothed ln((1+N)/(1+df)) + 1.
    Deterministic for a given corpus.
    """
    if not corpus:
        raise ValueError("cannot fit n-gram model on an empty corpus")
    df: Counter[str] = Counter()
    for listing in corpus:
        df.update(set(_doc_ngrams(listing.tokens, n)))
    ranked = sorted(df.items(), key=lambda item: (-item[1], item[0]))
    selected = tuple(gram for gram, _ in ranked[:NGRAM_SLOTS])
    n_docs = len(corpus)
    idf = {gram: math.log((1 + n_docs) / (1 + df[gram])) + 1.0 for gram in selected}
    return NgramModel(n=n, selected_ngrams=selected, idf=idf)


def ngram_bits(listing: Listing, model: NgramModel) -> tuple[int, ...]:
    """Per selected n-gram: tf-idf, L2-normalize across the six slots, then
    binarize at the threshold. An all-zero tf-idf vector yields all zeros."""
    values = [0.0] * NGRAM_SLOTS
    if model.selected_ngrams:
        tf = Counter(_doc_ngrams(listing.tokens, model.n))
        for slot, gram in enumerate(model.selected_ngrams):
            values[slot] = tf[gram] * model.idf[gram]
    norm = math.sqrt(math.fsum(v * v for v in values))
    if norm == 0.0:
        return (0,) * NGRAM_SLOTS
    return tuple(1 if v / norm > model.binarize_threshold else 0 for v in values)


def third_person_bit(tokens: Sequence[str]) -> int:
    third = sum(1 for t in tokens if t in THIRD_PERSON_PRONOUNS)
    first = sum(1 for t in tokens if t in FIRST_PERSON_PRONOUNS)
    return 1 if third > first else 0


def first_person_plural_bit(tokens: Sequence[str]) -> int:
    return 1 if any(t in FIRST_PLURAL_PRONOUNS for t in tokens) else 0


def language_pattern_bits(listing: Listing, model: NgramModel) -> tuple[int, ...]:
    """The nine language features: voice, plural voice, entropy, six n-gram bits."""
    return (
        third_person_bit(listing.tokens),
        first_person_plural_bit(listing.tokens),
        high_entropy_bit(listing.tokens),
        *ngram_bits(listing, model),
    )


def contains_phrase(tokens: Sequence[str], phrase: str) -> bool:
    """True if the phrase occurs as a contiguous token subsequence."""
    needle = phrase.split()
    if not needle:
        return False
    if len(needle) == 1:
        return needle[0] in tokens
    limit = len(tokens) - len(needle) + 1
    return any(list(tokens[i : i + len(needle)]) == needle for i in range(max(limit, 0)))


def _any_phrase(tokens: Sequence[str], phrases: Iterable[str]) -> int:
    return 1 if any(contains_phrase(tokens, p) for p in phrases) else 0


def lexicon_bits(listing: Listing, lex: Lexicons) -> tuple[int, int, int, int]:
    """(words_of_interest, country_of_interest, website_link, spa_reference)."""
    words = _any_phrase(listing.tokens, lex.words_of_interest)
    country = _any_phrase(listing.tokens, lex.countries)
    link = 1 if any(p.search(listing.normalized_text) for p in lex.url_patterns) else 0
    spa = _any_phrase(listing.tokens, lex.spa_terms)
    return words, country, link, spa


def age_mentions(tokens: Sequence[str]) -> set[int]:
    """Distinct plausible ages mentioned as bare two-digit tokens.

    A number immediately followed by a weight unit is a weight, not an age.
    """
    ages: set[int] = set()
    for i, tok in enumerate(tokens):
        if not _AGE_TOKEN_RE.match(tok):
            continue
        value = int(tok)
        if not (AGE_MIN <= value <= AGE_MAX):
            continue
        if i + 1 < len(tokens) and tokens[i + 1] in _WEIGHT_UNITS:
            continue
        ages.add(value)
    return ages


def victim_count_bit(listing: Listing, lex: Lexicons) -> int:
    """1 iff the ad appears to advertise more than one individual."""
    if _any_phrase(listing.tokens, lex.plural_markers):
        return 1
    tokens = listing.tokens
    for i in range(len(tokens) - 1):
        if tokens[i] in COUNT_WORDS and tokens[i + 1] in PERSON_NOUNS:
            return 1
    if len(age_mentions(tokens)) >= 2:
        return 1
    return 0


def low_weight_bit(listing: Listing) -> int:
    """1 iff a parsed body weight falls strictly under the low-weight cutoff."""
    return 1 if listing.weight_lbs is not None and listing.weight_lbs < LOW_WEIGHT_LBS else 0


def extract_feature_vector(listing: Listing, model: NgramModel, lex: Lexicons) -> FeatureVector:
    words, country, link, spa = lexicon_bits(listing, lex)
    return FeatureVector(
        listing_id=listing.id,
        third_person=third_person_bit(listing.tokens),
        first_person_plural=first_person_plural_bit(listing.tokens),
        high_entropy=high_entropy_bit(listing.tokens),
        ngram_bits=ngram_bits(listing, model),
        words_of_interest=words,
        country_of_interest=country,
        multiple_victims=victim_count_bit(listing, lex),
        low_weight=low_weight_bit(listing),
        website_link=link,
        spa_reference=spa,
    )


# --- persistence -----------------------------------------------------------


def save_ngram_model(model: NgramModel, path: str | Path) -> None:
    payload = {
        "n": model.n,
        "selected": list(model.selected_ngrams),
        "idf": {g: model.idf[g] for g in model.selected_ngrams},
        "threshold": model.binarize_threshold,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_ngram_model(path: str | Path) -> NgramModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return NgramModel(
        n=payload["n"],
        selected_ngrams=tuple(payload["selected"]),
        idf=dict(payload["idf"]),
        binarize_threshold=payload["threshold"],
    )


def _read_phrase_file(path: Path) -> frozenset[str]:
    phrases = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            phrases.add(line.lower())
    if not phrases:
        raise ValueError(f"lexicon file is empty: {path}")
    return frozenset(phrases)


def _read_pattern_file(path: Path) -> tuple[re.Pattern, ...]:
    patterns = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            patterns.append(re.compile(line))
    if not patterns:
        raise ValueError(f"pattern file is empty: {path}")
    return tuple(patterns)


def default_lexicon_dir() -> Path:
    return Path(__file__).resolve().parent / "lexicons"


def load_lexicons(directory: str | Path | None = None) -> Lexicons:
    """Load the five phrase/pattern files from a directory (packaged seeds
    by default)."""
    directory = Path(directory) if directory is not None else default_lexicon_dir()
    return Lexicons(
        words_of_interest=_read_phrase_file(directory / "words_of_interest.txt"),
        countries=_read_phrase_file(directory / "countries.txt"),
        spa_terms=_read_phrase_file(directory / "spa_terms.txt"),
        url_patterns=_read_pattern_file(directory / "url_patterns.txt"),
        plural_markers=_read_phrase_file(directory / "plural_markers.txt"),
    )


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    target = Path(path) if path is not None else default_lexicon_dir() / "stopwords.txt"
    return _read_phrase_file(target)


def write_feature_csv(vectors: Sequence[FeatureVector], path: str | Path) -> None:
    """Feature matrix export: listing_id plus the 15 named bit columns."""
    lines = ["listing_id," + ",".join(FEATURE_NAMES)]
    for vec in vectors:
        lines.append(vec.listing_id + "," + ",".join(str(b) for b in vec.bits()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_feature_csv(path: str | Path) -> list[FeatureVector]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    if header != ["listing_id", *FEATURE_NAMES]:
        raise ValueError("unexpected feature CSV header")
    vectors = []
    for line in lines[1:]:
        cells = line.split(",")
        listing_id, bits = cells[0], [int(b) for b in cells[1:]]
        vectors.append(
            FeatureVector(
                listing_id=listing_id,
                third_person=bits[0],
                first_person_plural=bits[1],
                high_entropy=bits[2],
                ngram_bits=tuple(bits[3:9]),
                words_of_interest=bits[9],
                country_of_interest=bits[10],
                multiple_victims=bits[11],
                low_weight=bits[12],
                website_link=bits[13],
                spa_reference=bits[14],
            )
        )
    return vectors
