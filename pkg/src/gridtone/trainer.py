"""Training and test protocol: quiz sessions over generated audio frames.

A session belongs to one of five test sections.  Sections 1 to 3 play a
single object and ask for its class, with location fixed, then varied,
then size varied.  Section 4 asks for the exact grid cell of a one-tile
object.  Section 5 plays two or three objects at once and asks for the
class set.  Answers are scored server-side and persisted to an
append-only JSON-lines store so a restart loses nothing.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .codebook import Codebook, published_codebook
from .errors import GridtoneError, ValidationError
from .maskmodel import GRID_SIDE, GridMask, MaskVolume, ObjectMask
from .mixer import wav_bytes
from .pipeline import encode_volume
from .synth import DEFAULT_CONFIG, SynthConfig

SECTION_ITEM_COUNTS = {1: 7, 2: 7, 3: 7, 4: 6, 5: 6}

KIND_OBJECT = "object"
KIND_CELL = "cell"
KIND_OBJECT_SET = "object-set"

_PROMPTS = {
    KIND_OBJECT: "Which object do you hear?",
    KIND_CELL: "Which grid cell is the object in?",
    KIND_OBJECT_SET: "Which objects do you hear?",
}


class UnknownSessionError(GridtoneError):
    """Session id does not exist."""


class UnknownItemError(GridtoneError):
    """Item id does not exist in the session."""


class DuplicateAnswerError(GridtoneError):
    """The item was already answered."""


class SessionCompleteError(GridtoneError):
    """All items of the session are answered."""


@dataclass(frozen=True)
class Placement:
    """One object's grid geometry inside a trial stimulus."""

    class_name: str
    rows: frozenset[int]
    col_start: int
    width: int

    def grid(self) -> GridMask:
        tiles = [[False] * GRID_SIDE for _ in range(GRID_SIDE)]
        for r in self.rows:
            for c in range(self.col_start - 1, self.col_start - 1 + self.width):
                tiles[r - 1][c] = True
        return GridMask(tuple(tuple(row) for row in tiles))


@dataclass(frozen=True)
class TrialItem:
    id: str
    kind: str
    placements: tuple[Placement, ...]
    truth: dict
    stimulus_hash: str

    def public(self, index: int, total: int) -> dict:
        """Item view sent to clients; never includes the ground truth."""
        return {
            "id": self.id,
            "kind": self.kind,
            "prompt": _PROMPTS[self.kind],
            "stimulus": f"/stimuli/{self.stimulus_hash}",
            "index": index,
            "total": total,
        }


@dataclass
class Answer:
    item_id: str
    payload: dict
    correct: bool
    submitted: str


@dataclass
class Session:
    id: str
    section: int
    participant: dict
    seed: int
    created: str
    items: tuple[TrialItem, ...]
    answers: list[Answer] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def answered_ids(self) -> set[str]:
        return {a.item_id for a in self.answers}

    def next_unanswered(self) -> TrialItem | None:
        done = self.answered_ids
        for item in self.items:
            if item.id not in done:
                return item
        return None


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _check_answer(kind: str, truth: dict, payload: dict) -> bool:
    """Score one answer: class match, exact cell, or class-set equality."""
    if not isinstance(payload, dict):
        raise ValidationError("answer must be a JSON object")
    if kind == KIND_OBJECT:
        guess = payload.get("class_name")
        if not isinstance(guess, str):
            raise ValidationError("object answer needs a class_name string")
        return guess == truth["class_name"]
    if kind == KIND_CELL:
        row, col = payload.get("row"), payload.get("col")
        if not (isinstance(row, int) and isinstance(col, int)):
            raise ValidationError("cell answer needs integer row and col")
        return row == truth["row"] and col == truth["col"]
    if kind == KIND_OBJECT_SET:
        guess = payload.get("classes")
        if not (isinstance(guess, list) and all(isinstance(g, str) for g in guess)):
            raise ValidationError("object-set answer needs a list of class names")
        return set(guess) == set(truth["classes"])
    raise ValidationError(f"unknown question kind {kind!r}")


class Trainer:
    """Session registry with seeded item generation and JSONL persistence.

    Stimuli are rendered through the encode pipeline and cached by the
    SHA-256 of their WAV payload.  Session mutations take a per-session
    lock; store appends are serialized by a writer lock.
    """

    def __init__(
        self,
        codebook: Codebook | None = None,
        config: SynthConfig = DEFAULT_CONFIG,
        store_path: str | Path | None = None,
    ):
        self.codebook = codebook if codebook is not None else published_codebook()
        self.config = config
        self.classes = sorted(self.codebook.entries)
        self.sessions: dict[str, Session] = {}
        self._order: list[str] = []
        self._stimuli: dict[str, bytes] = {}
        self._registry_lock = threading.Lock()
        self._store_lock = threading.Lock()
        self._store_path = Path(store_path) if store_path is not None else None
        if self._store_path is not None and self._store_path.exists():
            self._replay()

    # -- stimulus generation ------------------------------------------------

    def _render_stimulus(self, placements: tuple[Placement, ...]) -> str:
        objects = tuple(
            ObjectMask(
                class_id=index,
                class_name=p.class_name,
                grid=p.grid(),
            )
            for index, p in enumerate(placements)
        )
        volume = MaskVolume(128, 128, objects)
        result = encode_volume(volume, self.codebook, self.config)
        payload = wav_bytes(result.audio)
        digest = hashlib.sha256(payload).hexdigest()
        self._stimuli[digest] = payload
        return digest

    def stimulus(self, digest: str) -> bytes:
        data = self._stimuli.get(digest)
        if data is None:
            raise UnknownItemError(f"no stimulus {digest!r}")
        return data

    # -- item generation ----------------------------------------------------

    def _sample_classes(self, rng: random.Random, count: int) -> list[str]:
        if count <= len(self.classes):
            return rng.sample(self.classes, count)
        return [rng.choice(self.classes) for _ in range(count)]

    def _generate_items(self, section: int, seed: int) -> tuple[TrialItem, ...]:
        rng = random.Random(seed)
        count = SECTION_ITEM_COUNTS[section]
        items = []
        for k in range(1, count + 1):
            if section == 1:
                # Fixed location: only the class varies between items.
                name = self._sample_classes(rng, 1)[0]
                placements = (Placement(name, frozenset({1}), 4, 2),)
                truth = {"class_name": name}
                kind = KIND_OBJECT
            elif section == 2:
                name = self._sample_classes(rng, 1)[0]
                row = rng.randint(1, 8)
                col = rng.randint(1, 8)
                placements = (Placement(name, frozenset({row}), col, 1),)
                truth = {"class_name": name}
                kind = KIND_OBJECT
            elif section == 3:
                name = self._sample_classes(rng, 1)[0]
                width = rng.randint(1, 8)
                col = rng.randint(1, 9 - width)
                row = rng.randint(1, 8)
                placements = (Placement(name, frozenset({row}), col, width),)
                truth = {"class_name": name}
                kind = KIND_OBJECT
            elif section == 4:
                name = self._sample_classes(rng, 1)[0]
                row = rng.randint(1, 8)
                col = rng.randint(1, 8)
                placements = (Placement(name, frozenset({row}), col, 1),)
                truth = {"row": row, "col": col}
                kind = KIND_CELL
            else:
                names = self._sample_classes(rng, rng.choice([2, 3]))
                built = []
                for name in names:
                    width = rng.randint(1, 2)
                    col = rng.randint(1, 9 - width)
                    row = rng.randint(1, 8)
                    built.append(Placement(name, frozenset({row}), col, width))
                placements = tuple(built)
                truth = {"classes": sorted(names)}
                kind = KIND_OBJECT_SET
            digest = self._render_stimulus(placements)
            items.append(
                TrialItem(
                    id=f"i{k}",
                    kind=kind,
                    placements=placements,
                    truth=truth,
                    stimulus_hash=digest,
                )
            )
        return tuple(items)

    # -- session lifecycle --------------------------------------------------

    def create_session(
        self,
        section: int,
        participant: dict | None = None,
        seed: int | None = None,
        session_id: str | None = None,
    ) -> Session:
        if not isinstance(section, int) or section not in SECTION_ITEM_COUNTS:
            raise ValidationError(f"section must be 1..5, got {section!r}")
        participant = dict(participant or {})
        if seed is None:
            seed = random.SystemRandom().getrandbits(32)
        session = Session(
            id=session_id if session_id is not None else uuid.uuid4().hex,
            section=section,
            participant=participant,
            seed=seed,
            created=_utc_now(),
            items=self._generate_items(section, seed),
        )
        with self._registry_lock:
            if session.id in self.sessions:
                raise ValidationError(f"session {session.id!r} already exists")
            self.sessions[session.id] = session
            self._order.append(session.id)
        self._append_record(
            {
                "type": "session",
                "id": session.id,
                "section": section,
                "participant": participant,
                "seed": seed,
                "created": session.created,
            }
        )
        return session

    def get_session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"no session {session_id!r}")
        return session

    def next_item(self, session_id: str) -> dict:
        """First unanswered item, or a terminal status once all are done."""
        session = self.get_session(session_id)
        item = session.next_unanswered()
        if item is None:
            return {"status": "complete", "answered": len(session.answers)}
        index = list(session.items).index(item) + 1
        return {
            "status": "in-progress",
            "item": item.public(index, len(session.items)),
        }

    def submit_answer(self, session_id: str, item_id: str, payload: dict) -> dict:
        session = self.get_session(session_id)
        item = next((i for i in session.items if i.id == item_id), None)
        if item is None:
            raise UnknownItemError(f"no item {item_id!r} in session {session_id!r}")
        with session.lock:
            if item_id in session.answered_ids:
                raise DuplicateAnswerError(f"item {item_id!r} already answered")
            correct = _check_answer(item.kind, item.truth, payload)
            answer = Answer(
                item_id=item_id,
                payload=payload,
                correct=correct,
                submitted=_utc_now(),
            )
            session.answers.append(answer)
        self._append_record(
            {
                "type": "answer",
                "session": session_id,
                "item": item_id,
                "answer": payload,
                "correct": correct,
                "submitted": answer.submitted,
            }
        )
        return {
            "correct": correct,
            "truth": item.truth,
            "answered": len(session.answers),
            "total": len(session.items),
        }

    # -- reporting ----------------------------------------------------------

    def session_report(self, session_id: str) -> dict:
        session = self.get_session(session_id)
        answers = list(session.answers)
        correct = sum(1 for a in answers if a.correct)
        report = {
            "session_id": session.id,
            "section": session.section,
            "participant": session.participant,
            "total_items": len(session.items),
            "answered": len(answers),
            "correct": correct,
        }
        if answers:
            report["accuracy_percent"] = round(100.0 * correct / len(answers), 1)
        return report

    def report_rows(self) -> list[dict]:
        """One row per participant with per-section accuracy columns.

        Sessions group by the participant's id field when given, falling
        back to the (age, musical background) pair.  A later session for
        the same section overwrites the earlier one.
        """
        rows: dict[object, dict] = {}
        with self._registry_lock:
            ordered = [self.sessions[sid] for sid in self._order]
        for session in ordered:
            participant = session.participant
            key = participant.get("id")
            if key is None:
                key = (participant.get("age"), participant.get("musical_background"))
            row = rows.setdefault(
                key,
                {
                    "age": participant.get("age"),
                    "musical_background": participant.get("musical_background"),
                    "sections": {},
                },
            )
            report = self.session_report(session.id)
            if "accuracy_percent" in report:
                row["sections"][session.section] = report["accuracy_percent"]
        return list(rows.values())

    def report_csv(self) -> str:
        import csv
        import io

        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["age", "MB", "Test1", "Test2", "Test3", "Test4", "Test5"])
        for row in self.report_rows():
            mb = row["musical_background"]
            mb_cell = "" if mb is None else ("yes" if mb else "no")
            cells = [row["age"] if row["age"] is not None else "", mb_cell]
            for section in range(1, 6):
                value = row["sections"].get(section)
                cells.append("" if value is None else f"{value:.1f}")
            writer.writerow(cells)
        return out.getvalue()

    # -- persistence --------------------------------------------------------

    def _append_record(self, record: dict) -> None:
        if self._store_path is None:
            return
        line = json.dumps(record, sort_keys=True) + "\n"
        with self._store_lock:
            with open(self._store_path, "a", encoding="utf-8") as handle:
                handle.write(line)
                handle.flush()

    def _replay(self) -> None:
        """Rebuild sessions from the store; items regrow from stored seeds.

        Correctness is recomputed from the stored answers so the report
        always equals a fresh recount.
        """
        with open(self._store_path, encoding="utf-8") as handle:
            lines = handle.readlines()
        path = self._store_path
        self._store_path = None  # replay must not re-append
        try:
            for number, line in enumerate(lines, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"{path}:{number}: bad JSON: {exc}") from exc
                kind = record.get("type")
                if kind == "session":
                    session = Session(
                        id=record["id"],
                        section=record["section"],
                        participant=record.get("participant", {}),
                        seed=record["seed"],
                        created=record.get("created", _utc_now()),
                        items=self._generate_items(record["section"], record["seed"]),
                    )
                    self.sessions[session.id] = session
                    self._order.append(session.id)
                elif kind == "answer":
                    session = self.sessions.get(record["session"])
                    if session is None:
                        raise ValidationError(
                            f"{path}:{number}: answer for unknown session"
                        )
                    item = next(
                        (i for i in session.items if i.id == record["item"]), None
                    )
                    if item is None:
                        raise ValidationError(
                            f"{path}:{number}: answer for unknown item"
                        )
                    session.answers.append(
                        Answer(
                            item_id=item.id,
                            payload=record["answer"],
                            correct=_check_answer(
                                item.kind, item.truth, record["answer"]
                            ),
                            submitted=record.get("submitted", _utc_now()),
                        )
                    )
                else:
                    raise ValidationError(
                        f"{path}:{number}: unknown record type {kind!r}"
                    )
        finally:
            self._store_path = path
