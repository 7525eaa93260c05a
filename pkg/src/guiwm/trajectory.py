"""Episode and transition types plus their JSONL formats.

An episode is an ordered walk ``S_1, A_1, S_2, ..., S_T`` through one app
under one goal; ``to_transitions`` unrolls it into T-1 overlapping
``(S_t, A_t, S_{t+1})`` triplets, which is the unit every downstream
pipeline consumes.  Transition ids are content-derived (episode id + step
index), so re-ingesting the same corpus yields the same ids.

File formats (one JSON object per line, UTF-8):

episodes.jsonl
    {"episode_id": ..., "app": ..., "goal": ..., "lang": ...,
     "steps": [{"image": "path.png", "action": {...}}, ...,
               {"image": "last.png"}]}

transitions.jsonl
    {"id": ..., "episode_id": ..., "step_index": ..., "app": ..., "goal": ...,
     "lang": ..., "s_t": {"image": ..., "width_px": ..., "height_px": ...},
     "action": {...}, "s_t1": {...}}

Action records are auto-detected (kapps or m3a).  Step images may carry
inline "width_px"/"height_px"; otherwise dimensions are read from the file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

from PIL import Image

from .actions import (
    CanonicalAction,
    UnknownActionType,
    detect_schema,
    parse_action,
    serialize_action,
)

__all__ = [
    "StateImage",
    "Transition",
    "Episode",
    "transition_id",
    "to_transitions",
    "load_image",
    "read_episodes",
    "read_transitions",
    "write_transitions",
]


@dataclass(frozen=True, slots=True)
class StateImage:
    """A screenshot reference with known pixel dimensions."""

    image_ref: str
    width_px: int
    height_px: int

    def __post_init__(self) -> None:
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError(f"image dimensions must be positive, got {self.width_px}x{self.height_px}")

    def to_record(self) -> dict:
        return {"image": self.image_ref, "width_px": self.width_px, "height_px": self.height_px}

    @classmethod
    def from_record(cls, record: dict) -> "StateImage":
        return cls(record["image"], record["width_px"], record["height_px"])


@dataclass(frozen=True, slots=True)
class Transition:
    """One (S_t, A_t, S_{t+1}) triplet with its provenance."""

    id: str
    episode_id: str
    step_index: int
    app: str
    goal: str
    lang: str
    s_t: StateImage
    action: CanonicalAction
    s_t1: StateImage

    def to_record(self, action_schema: str = "kapps") -> dict:
        return {
            "id": self.id,
            "episode_id": self.episode_id,
            "step_index": self.step_index,
            "app": self.app,
            "goal": self.goal,
            "lang": self.lang,
            "s_t": self.s_t.to_record(),
            "action": serialize_action(self.action, action_schema),
            "s_t1": self.s_t1.to_record(),
        }

    @classmethod
    def from_record(cls, record: dict) -> "Transition":
        return cls(
            id=record["id"],
            episode_id=record["episode_id"],
            step_index=record["step_index"],
            app=record["app"],
            goal=record["goal"],
            lang=record.get("lang", "en"),
            s_t=StateImage.from_record(record["s_t"]),
            action=parse_action(record["action"]),
            s_t1=StateImage.from_record(record["s_t1"]),
        )


@dataclass(frozen=True, slots=True)
class Episode:
    """An ordered (image, action) walk; the final step has no action."""

    episode_id: str
    app: str
    goal: str
    lang: str
    # T entries; actions align with the state they are taken from, so the
    # last entry's action is None.
    steps: tuple[tuple[StateImage, CanonicalAction | None], ...]

    def __post_init__(self) -> None:
        if len(self.steps) < 1:
            raise ValueError("episode must contain at least one step")
        for i, (_, action) in enumerate(self.steps[:-1]):
            if action is None:
                raise MissingAction(f"episode {self.episode_id} step {i} has no action")

    @property
    def num_steps(self) -> int:
        return len(self.steps)


class MissingAction(ValueError):
    pass


def transition_id(episode_id: str, step_index: int) -> str:
    digest = hashlib.sha256(f"{episode_id}\x1f{step_index}".encode()).hexdigest()
    return digest[:16]


def to_transitions(episode: Episode) -> list[Transition]:
    """Unroll an episode of T steps into its T-1 transitions."""
    out = []
    steps = episode.steps
    for i in range(len(steps) - 1):
        s_t, action = steps[i]
        s_t1 = steps[i + 1][0]
        out.append(
            Transition(
                id=transition_id(episode.episode_id, i),
                episode_id=episode.episode_id,
                step_index=i,
                app=episode.app,
                goal=episode.goal,
                lang=episode.lang,
                s_t=s_t,
                action=action,
                s_t1=s_t1,
            )
        )
    return out


def load_image(state: StateImage, root: Path | None = None) -> Image.Image:
    """Open and decode the referenced raster, verifying recorded dimensions."""
    path = Path(state.image_ref)
    if root is not None and not path.is_absolute():
        path = root / path
    img = Image.open(path)
    img.load()
    if img.size != (state.width_px, state.height_px):
        raise ValueError(
            f"{path} is {img.size[0]}x{img.size[1]}, record says {state.width_px}x{state.height_px}"
        )
    return img


def _read_jsonl(path: Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from None


def _step_image(step: dict, root: Path | None) -> StateImage:
    ref = step["image"]
    if "width_px" in step and "height_px" in step:
        return StateImage(ref, step["width_px"], step["height_px"])
    path = Path(ref)
    if root is not None and not path.is_absolute():
        path = root / path
    with Image.open(path) as img:
        w, h = img.size
    return StateImage(ref, w, h)


def read_episodes(path: str | Path, root: Path | None = None) -> list[Episode]:
    path = Path(path)
    if root is None:
        root = path.parent
    episodes = []
    for record in _read_jsonl(path):
        steps = []
        raw_steps = record["steps"]
        for i, step in enumerate(raw_steps):
            image = _step_image(step, root)
            action = None
            if "action" in step and step["action"] is not None:
                action = parse_action(step["action"])
            elif i < len(raw_steps) - 1:
                raise MissingAction(f"episode {record['episode_id']} step {i} has no action")
            steps.append((image, action))
        episodes.append(
            Episode(
                episode_id=record["episode_id"],
                app=record["app"],
                goal=record["goal"],
                lang=record.get("lang", "en"),
                steps=tuple(steps),
            )
        )
    return episodes


def read_transitions(path: str | Path, root: Path | None = None) -> list[Transition]:
    """Load transitions, resolving relative image refs against ``root``.

    Defaults root to the file's own directory so a corpus directory can be
    moved wholesale.
    """
    path = Path(path)
    if root is None:
        root = path.parent
    out = []
    for record in _read_jsonl(path):
        t = Transition.from_record(record)
        out.append(_resolve_refs(t, root))
    return out


def _resolve_refs(t: Transition, root: Path) -> Transition:
    def fix(s: StateImage) -> StateImage:
        p = Path(s.image_ref)
        if p.is_absolute():
            return s
        return replace(s, image_ref=str(root / p))

    return replace(t, s_t=fix(t.s_t), s_t1=fix(t.s_t1))


def write_transitions(
    transitions: Iterable[Transition],
    path: str | Path,
    action_schema: str = "kapps",
) -> int:
    """Write one record per line; returns the number written.

    kapps cannot express every canonical kind, so records fall back to the
    other schema per action when needed (readers auto-detect per record).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    other = "m3a" if action_schema == "kapps" else "kapps"
    with open(path, "w", encoding="utf-8") as fh:
        for t in transitions:
            try:
                record = t.to_record(action_schema)
            except UnknownActionType:
                record = t.to_record(other)
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            n += 1
    return n


def detect_corpus_schema(path: str | Path) -> str | None:
    """Peek at the first record's action to name its schema, if any lines exist."""
    for record in _read_jsonl(Path(path)):
        action = record.get("action") or (record.get("steps") or [{}])[0].get("action")
        if isinstance(action, dict):
            return detect_schema(action)
        return None
    return None
