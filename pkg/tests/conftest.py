"""Shared fixtures: tiny rasters, synthetic transitions, content-rich pages."""

from __future__ import annotations

import itertools
from pathlib import Path

import pytest
from PIL import Image

from guiwm.actions import CanonicalAction
from guiwm.trajectory import StateImage, Transition, transition_id

# Enough non-background pixels to stay under the blank-render threshold at
# any phone-ish viewport.
RICH_PAGE = (
    "<html><body>"
    '<div style="background:#2d5fa8;height:400px;width:100%">'
    '<h1 style="color:#ffffff">Inbox</h1></div>'
    "<p>Two unread conversations.</p>"
    "<button>Compose</button>"
    "</body></html>"
)


def write_png(path: Path, width: int, height: int, color=(120, 140, 160)) -> StateImage:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("RGB", (width, height), color).save(path)
    return StateImage(str(path), width, height)


@pytest.fixture
def png_factory(tmp_path):
    counter = itertools.count()

    def make(width=64, height=128, color=(120, 140, 160), name=None):
        name = name or f"img{next(counter):04d}.png"
        return write_png(tmp_path / name, width, height, color)

    return make


@pytest.fixture
def transition_factory(png_factory):
    counter = itertools.count()

    def make(
        action: CanonicalAction | None = None,
        episode_id: str | None = None,
        step_index: int = 0,
        app: str = "mail",
        goal: str = "read the newest message",
        s_t: StateImage | None = None,
        s_t1: StateImage | None = None,
        width: int = 64,
        height: int = 128,
    ) -> Transition:
        i = next(counter)
        episode_id = episode_id or f"ep{i:03d}"
        return Transition(
            id=transition_id(episode_id, step_index),
            episode_id=episode_id,
            step_index=step_index,
            app=app,
            goal=goal,
            lang="en",
            s_t=s_t or png_factory(width, height),
            action=action or CanonicalAction(kind="click", point=(500, 500)),
            s_t1=s_t1 or png_factory(width, height),
        )

    return make
