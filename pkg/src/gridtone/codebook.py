"""Note table, three-note codewords, and the class-to-codeword dictionary.

Seven base notes (codes 1-7, letters A-G, low-octave flute register) are the
alphabet.  Every object class gets an ordered triple of note codes; triples are
kept mutually separated under a component-wise absolute-difference distance so
any two classes remain tellable apart by ear.  Ten assignments are fixed
constants; the rest of an allowlist is filled in by a deterministic greedy
generator.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .classes import DEFAULT_ALLOWLIST
from .errors import CapacityError, DomainError, ValidationError

Digits = tuple[int, int, int]


@dataclass(frozen=True)
class Note:
    code: int
    name: str
    base_frequency: float


NOTES: tuple[Note, ...] = (
    Note(1, "A", 55.0),
    Note(2, "B", 61.735),
    Note(3, "C", 65.406),
    Note(4, "D", 73.416),
    Note(5, "E", 82.407),
    Note(6, "F", 87.307),
    Note(7, "G", 97.999),
)

NOTE_BY_CODE: dict[int, Note] = {n.code: n for n in NOTES}
NOTE_BY_NAME: dict[str, Note] = {n.name: n for n in NOTES}

# Pitch-contour classes, in the canonical listing order used by the generator.
RISING = "rising"
STRICTLY_RISING = "strictly-rising"
FALLING = "falling"
STRICTLY_FALLING = "strictly-falling"
UPWARD_FLUCTUATING = "upward-fluctuating"
DOWNWARD_FLUCTUATING = "downward-fluctuating"
CONSTANT = "constant"

TREND_ORDER: tuple[str, ...] = (
    RISING,
    STRICTLY_RISING,
    FALLING,
    STRICTLY_FALLING,
    UPWARD_FLUCTUATING,
    DOWNWARD_FLUCTUATING,
    CONSTANT,
)


def classify_trend(digits: Digits) -> str:
    """Assign the unique pitch-contour class of a digit triple.

    The seven classes partition all 343 triples: equalities count, so e.g.
    (2,2,7) is plain rising while (1,5,7) is strictly rising.
    """
    a, b, c = digits
    if a == b == c:
        return CONSTANT
    if a < b < c:
        return STRICTLY_RISING
    if a > b > c:
        return STRICTLY_FALLING
    if a <= b <= c:
        return RISING
    if a >= b >= c:
        return FALLING
    if a < b and b > c:
        return UPWARD_FLUCTUATING
    return DOWNWARD_FLUCTUATING


def _check_digits(digits: Iterable[int]) -> Digits:
    t = tuple(int(d) for d in digits)
    if len(t) != 3 or any(d < 1 or d > 7 for d in t):
        raise DomainError(f"codeword digits must be three values in 1..7, got {t}")
    return t  # type: ignore[return-value]


@dataclass(frozen=True)
class Codeword:
    """Ordered triple of note codes with its derived contour class."""

    digits: Digits
    trend: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "digits", _check_digits(self.digits))
        object.__setattr__(self, "trend", classify_trend(self.digits))

    @classmethod
    def from_string(cls, text: str) -> "Codeword":
        if len(text) != 3 or not text.isdigit():
            raise DomainError(f"codeword string must be three digits, got {text!r}")
        return cls(tuple(int(ch) for ch in text))  # type: ignore[arg-type]

    def letters(self) -> str:
        return "".join(NOTE_BY_CODE[d].name for d in self.digits)

    def __str__(self) -> str:
        return "".join(str(d) for d in self.digits)


def distance(a: Codeword, b: Codeword) -> int:
    """Component-wise absolute-difference distance between two codewords."""
    return sum(abs(x - y) for x, y in zip(a.digits, b.digits))


# Maximum possible distance: three components each spanning 1..7.
MAX_DISTANCE = 18

# The ten fixed class assignments.  The numeric column is authoritative.
PUBLISHED_ASSIGNMENTS: tuple[tuple[str, str], ...] = (
    ("person", "151"),
    ("chair", "736"),
    ("bed", "741"),
    ("dog", "313"),
    ("cat", "157"),
    ("banana", "444"),
    ("apple", "772"),
    ("cup", "227"),
    ("horse", "777"),
    ("book", "143"),
)

DEFAULT_MIN_DISTANCE = 3


@dataclass
class Codebook:
    """Injective map from class name to codeword with a separation guarantee."""

    entries: dict[str, Codeword]
    min_distance: int = DEFAULT_MIN_DISTANCE

    def lookup(self, class_name: str) -> Codeword:
        try:
            return self.entries[class_name]
        except KeyError:
            raise ValidationError(f"class {class_name!r} is not in the codebook") from None

    def class_for(self, digits: Digits) -> str | None:
        """Reverse lookup; None when no class carries these digits."""
        for name, word in self.entries.items():
            if word.digits == tuple(digits):
                return name
        return None

    def to_json(self) -> str:
        payload = {
            "min_distance": self.min_distance,
            "entries": {name: str(word) for name, word in sorted(self.entries.items())},
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_mapping(cls, entries: Mapping[str, str], min_distance: int = DEFAULT_MIN_DISTANCE) -> "Codebook":
        built: dict[str, Codeword] = {}
        for name, text in entries.items():
            built[str(name)] = Codeword.from_string(str(text))
        if len({w.digits for w in built.values()}) != len(built):
            raise ValidationError("codebook entries are not injective")
        return cls(entries=built, min_distance=int(min_distance))

    @classmethod
    def load(cls, path: str | Path) -> "Codebook":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"codebook {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or "entries" not in doc:
            raise ValidationError(f"codebook {path} is missing the 'entries' object")
        return cls.from_mapping(doc["entries"], doc.get("min_distance", DEFAULT_MIN_DISTANCE))


@dataclass
class ValidationReport:
    """Outcome of a pairwise separation check."""

    threshold: int
    min_distance_observed: float  # +inf when fewer than two entries
    violations: list[tuple[str, str, int]]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(book: Codebook, threshold: int | None = None) -> ValidationReport:
    """Check every pair of entries against the separation threshold.

    The threshold defaults to the book's own declared minimum distance.
    """
    limit = book.min_distance if threshold is None else int(threshold)
    observed = math.inf
    violations: list[tuple[str, str, int]] = []
    names = sorted(book.entries)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            d = distance(book.entries[a], book.entries[b])
            observed = min(observed, d)
            if d < limit:
                violations.append((a, b, d))
    return ValidationReport(threshold=limit, min_distance_observed=observed, violations=violations)


def _candidate_order() -> list[Codeword]:
    """All 343 triples, grouped by contour class in listing order, digits
    lexicographic within each class.  This order is part of the generator's
    contract: it makes generation reproducible byte-for-byte."""
    trend_rank = {t: i for i, t in enumerate(TREND_ORDER)}
    words = [Codeword(t) for t in itertools.product(range(1, 8), repeat=3)]
    words.sort(key=lambda w: (trend_rank[w.trend], w.digits))
    return words


def generate(
    classes: Iterable[str],
    min_distance: int = DEFAULT_MIN_DISTANCE,
    seed_entries: Codebook | None = None,
) -> Codebook:
    """Greedily assign codewords to classes at the requested separation.

    Classes are processed in input order; for each one the first candidate (in
    the canonical candidate order) at distance >= min_distance from every
    already-accepted codeword is taken.  Seed entries are kept verbatim and
    constrain the new assignments.  Raises CapacityError when the space runs
    out; no fallback is attempted here.
    """
    if min_distance < 0:
        raise DomainError(f"min_distance must be >= 0, got {min_distance}")
    entries: dict[str, Codeword] = dict(seed_entries.entries) if seed_entries else {}
    accepted = list(entries.values())
    for a, b in itertools.combinations(accepted, 2):
        if distance(a, b) < min_distance:
            raise ValidationError(
                f"seed entries violate min_distance {min_distance}: {a} vs {b}"
            )
    candidates = _candidate_order()
    for name in classes:
        if name in entries:
            continue
        for cand in candidates:
            # A zero threshold still may not duplicate an accepted word.
            if all(distance(cand, w) >= max(min_distance, 1) for w in accepted):
                entries[name] = cand
                accepted.append(cand)
                break
        else:
            raise CapacityError(name, assigned=len(accepted))
    return Codebook(entries=entries, min_distance=min_distance)


def published_codebook() -> Codebook:
    """Just the ten fixed assignments."""
    return Codebook.from_mapping(dict(PUBLISHED_ASSIGNMENTS), DEFAULT_MIN_DISTANCE)


def default_codebook(classes: Iterable[str] | None = None) -> Codebook:
    """The ten fixed assignments extended over the class allowlist.

    The codeword space only holds ~40 triples at separation 3, so a full
    80-class list cannot be covered at the default threshold; the extension
    retries at progressively smaller separations (3, then 2, then 1) until the
    whole allowlist fits.  The ten fixed entries keep their mutual separation
    of 3 regardless.
    """
    wanted = tuple(classes) if classes is not None else DEFAULT_ALLOWLIST
    seeds = published_codebook()
    last_error: CapacityError | None = None
    for threshold in (DEFAULT_MIN_DISTANCE, 2, 1):
        try:
            return generate(wanted, min_distance=threshold, seed_entries=seeds)
        except CapacityError as exc:
            last_error = exc
    raise last_error  # pragma: no cover - 1 always fits (343 >= 86 + 10)
