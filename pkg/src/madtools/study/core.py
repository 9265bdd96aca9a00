"""Pairwise preference study: config, records, scheduling, and the log.

Raters see two anonymized videos and rate three criteria on a 5-point scale.
Everything durable lives in an append-only JSON Lines log; the in-memory
state is always reconstructible by replaying it.
"""

from __future__ import annotations

import enum
import hashlib
import json
import os
import secrets
import time
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path


class StudyError(Exception):
    pass


class UnknownTokenError(StudyError):
    pass


class DuplicateSubmissionError(StudyError):
    pass


class MissingCriterionError(StudyError):
    pass


class Criterion(enum.Enum):
    GENERAL = "general"
    MOTION = "motion"
    VISUAL = "visual"


# Questionnaire shown to raters, one prompt per criterion.
CRITERION_TITLES = {
    Criterion.GENERAL: "General Quality",
    Criterion.MOTION: "Motion Quality and Realistic Dynamics",
    Criterion.VISUAL: "Visual Quality",
}

CRITERION_PROMPTS = {
    Criterion.GENERAL: (
        "Overall which video do you prefer? In other words which video is "
        "harder to distinguish from real video?"
    ),
    Criterion.MOTION: (
        "Which video has more realistic, fluid and coherent motion, and is "
        "physically and socially plausible? Stopping suddenly without reason, "
        "collisions between objects, or cars driving in wrong direction are "
        "example of poor motion quality."
    ),
    Criterion.VISUAL: (
        "Which video has better clarity, fewer artifacts, and more pleasing "
        "visual? Blurry object, change of color or shape over time, and "
        "visual distortions are example of poor visual quality."
    ),
}

# 5-point scale: sign is the side (negative favors model_a in canonical
# records, the left video in client payloads), magnitude is strength.
RATING_VALUES = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class StudyConfig:
    models: tuple[str, ...]
    scenes: tuple[str, ...]
    seed: int = 0
    criteria: tuple[Criterion, ...] = (Criterion.GENERAL, Criterion.MOTION, Criterion.VISUAL)

    def __post_init__(self):
        if len(self.models) < 2:
            raise ValueError("study needs at least 2 models")
        if len(set(self.models)) != len(self.models):
            raise ValueError("model ids must be unique")
        if len(self.scenes) < 1:
            raise ValueError("study needs at least 1 scene")
        if len(set(self.scenes)) != len(self.scenes):
            raise ValueError("scene ids must be unique")

    @property
    def pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(tuple(sorted(p)) for p in combinations(sorted(self.models), 2))

    @classmethod
    def from_json(cls, path: str | Path) -> "StudyConfig":
        d = json.loads(Path(path).read_text())
        return cls(
            models=tuple(d["models"]),
            scenes=tuple(d["scenes"]),
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class PreferenceRecord:
    record_id: str
    rater_id: str
    model_a: str
    model_b: str
    scene_id: str
    criterion: Criterion
    rating: int  # negative favors model_a
    presented_left: str
    timestamp: float

    def __post_init__(self):
        if self.rating not in RATING_VALUES:
            raise ValueError(f"rating must be one of {RATING_VALUES}, got {self.rating}")
        if not self.model_a < self.model_b:
            raise ValueError("pair must be in canonical order (model_a < model_b)")
        if self.presented_left not in (self.model_a, self.model_b):
            raise ValueError("presented_left must be one of the pair")

    def to_json(self) -> str:
        return json.dumps({
            "record_id": self.record_id,
            "rater_id": self.rater_id,
            "model_a": self.model_a,
            "model_b": self.model_b,
            "scene_id": self.scene_id,
            "criterion": self.criterion.value,
            "rating": self.rating,
            "presented_left": self.presented_left,
            "timestamp": self.timestamp,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "PreferenceRecord":
        d = json.loads(line)
        return cls(
            record_id=d["record_id"],
            rater_id=d["rater_id"],
            model_a=d["model_a"],
            model_b=d["model_b"],
            scene_id=d["scene_id"],
            criterion=Criterion(d["criterion"]),
            rating=int(d["rating"]),
            presented_left=d["presented_left"],
            timestamp=float(d["timestamp"]),
        )


@dataclass(frozen=True)
class Presentation:
    token: str
    rater_id: str
    model_a: str
    model_b: str
    scene_id: str
    left: str
    right: str


def _cell_key(pair: tuple[str, str], scene: str) -> tuple[str, str, str]:
    return (pair[0], pair[1], scene)


class StudyState:
    """Live study: coverage-balanced scheduling, blinded submissions, log.

    A cell is one (model pair, scene) combination; one submission covers all
    configured criteria for a cell. The scheduler always hands out a cell
    with the fewest completed submissions among those the rater has not yet
    rated, so coverage stays within one submission across cells.
    """

    def __init__(self, config: StudyConfig, log_path: str | Path,
                 clock=time.time, token_factory=lambda: secrets.token_hex(16)):
        self.config = config
        self.log_path = Path(log_path)
        self._clock = clock
        self._token_factory = token_factory
        self.records: list[PreferenceRecord] = []
        self.cells = [_cell_key(pair, scene)
                      for pair in config.pairs for scene in config.scenes]
        self.counts: dict[tuple[str, str, str], int] = {c: 0 for c in self.cells}
        self.rated: dict[str, set[tuple[str, str, str]]] = {}
        self.pending: dict[str, Presentation] = {}
        self.used_tokens: set[str] = set()
        # seeded tie-break: a fixed random priority per cell
        digests = {c: self._digest("tiebreak", *c) for c in self.cells}
        self._cell_rank = {c: i for i, c in
                           enumerate(sorted(self.cells, key=lambda c: digests[c]))}

    def _digest(self, *parts: str) -> bytes:
        h = hashlib.blake2b(digest_size=16)
        h.update(str(self.config.seed).encode())
        for p in parts:
            h.update(b"|" + str(p).encode())
        return h.digest()

    # -- scheduling -----------------------------------------------------

    def next_pair(self, rater_id: str) -> Presentation | None:
        """Least-covered eligible cell for this rater, or None when done.

        The left/right assignment is a coin flip derived from the study seed
        and the cell's submission count, recorded server-side only.
        """
        seen = self.rated.get(rater_id, set())
        eligible = [c for c in self.cells if c not in seen]
        if not eligible:
            return None
        cell = min(eligible, key=lambda c: (self.counts[c], self._cell_rank[c]))
        model_a, model_b, scene = cell
        flip = self._digest("flip", rater_id, model_a, model_b, scene,
                            str(self.counts[cell]))[0] & 1
        left, right = (model_a, model_b) if flip == 0 else (model_b, model_a)
        pres = Presentation(
            token=self._token_factory(),
            rater_id=rater_id,
            model_a=model_a,
            model_b=model_b,
            scene_id=scene,
            left=left,
            right=right,
        )
        self.pending[pres.token] = pres
        return pres

    # -- submission -----------------------------------------------------

    def submit(self, token: str, ratings: dict[Criterion, int]) -> list[PreferenceRecord]:
        """Turn one blinded submission into canonical records, atomically.

        Client ratings are left/right relative (negative prefers the left
        video); storage is canonical-pair relative (negative favors
        model_a), so the blinding map is applied here and nowhere else.
        """
        if token in self.used_tokens:
            raise DuplicateSubmissionError("token already submitted")
        pres = self.pending.get(token)
        if pres is None:
            raise UnknownTokenError("unknown presentation token")
        missing = [c for c in self.config.criteria if c not in ratings]
        if missing:
            raise MissingCriterionError(
                "missing criteria: " + ", ".join(c.value for c in missing))
        for crit, value in ratings.items():
            if value not in RATING_VALUES:
                raise ValueError(f"rating for {crit.value} must be in {RATING_VALUES}")

        now = self._clock()
        new_records = []
        for crit in self.config.criteria:
            client = ratings[crit]
            stored = client if pres.left == pres.model_a else -client
            new_records.append(PreferenceRecord(
                record_id=f"r{len(self.records) + len(new_records):06d}",
                rater_id=pres.rater_id,
                model_a=pres.model_a,
                model_b=pres.model_b,
                scene_id=pres.scene_id,
                criterion=crit,
                rating=stored,
                presented_left=pres.left,
                timestamp=now,
            ))

        payload = "".join(r.to_json() + "\n" for r in new_records)
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())

        self._absorb(new_records)
        del self.pending[token]
        self.used_tokens.add(token)
        return new_records

    def _absorb(self, records: list[PreferenceRecord]) -> None:
        for r in records:
            self.records.append(r)
        cells = {(_cell_key((r.model_a, r.model_b), r.scene_id), r.rater_id)
                 for r in records}
        for cell, rater in cells:
            self.counts[cell] = self.counts.get(cell, 0) + 1
            self.rated.setdefault(rater, set()).add(cell)

    # -- persistence ----------------------------------------------------

    @classmethod
    def replay(cls, config: StudyConfig, log_path: str | Path,
               clock=time.time, token_factory=lambda: secrets.token_hex(16)) -> "StudyState":
        """Rebuild state from the append-only log.

        A submission is the group of consecutive records sharing a
        timestamp/rater/cell; coverage counts come out identical to the live
        process that wrote the log.
        """
        state = cls(config, log_path, clock=clock, token_factory=token_factory)
        path = Path(log_path)
        if not path.exists():
            return state
        records = []
        for lineno, line in enumerate(path.read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(PreferenceRecord.from_json(line))
            except (ValueError, KeyError, json.JSONDecodeError) as exc:
                raise StudyError(f"corrupt log line {lineno}: {exc}") from exc
        state._absorb(records)
        return state
