"""Visual action annotation on screenshots.

Marks pointer gestures so a vision model can see where the action landed:

* click / long_press: red circle with crosshair, yellow center dot;
* swipe: blue line from start to end, green start dot, red end dot;
* scroll_direction: the same blue line, synthesized as a centered drag
  covering 40% of the scrolled axis, pointing along the drag vector.

Every other kind has no spatial target; the input image is returned as-is,
byte for byte.  Geometry scales with the screenshot (circle radius 3% of
the shorter side) so annotations look the same across resolutions, and the
edit is local: pixels outside the drawn figure are untouched.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from PIL import ImageDraw

from ..actions import CanonicalAction, denormalize_point
from ..trajectory import StateImage, load_image

__all__ = ["ANNOTATABLE_KINDS", "annotate_action", "annotation_geometry"]

ANNOTATABLE_KINDS = frozenset({"click", "long_press", "swipe", "scroll_direction"})

CLICK_RADIUS_FRACTION = 0.03
SCROLL_SPAN_FRACTION = 0.4

RED = (255, 0, 0)
YELLOW = (255, 255, 0)
BLUE = (0, 0, 255)
GREEN = (0, 255, 0)


def annotation_geometry(image: StateImage, action: CanonicalAction) -> dict:
    """Resolved pixel geometry for an annotatable action (used for drawing
    and for locality assertions)."""
    w, h = image.width_px, image.height_px
    kind = action.kind
    if kind in ("click", "long_press"):
        center = denormalize_point(action.point, w, h)
        radius = max(4, round(min(w, h) * CLICK_RADIUS_FRACTION))
        return {
            "kind": "point",
            "center": center,
            "radius": radius,
            "cross": round(radius * 1.6),
            "dot": max(2, radius // 5),
            "stroke": max(2, radius // 8),
        }
    if kind == "swipe":
        start = denormalize_point(action.point, w, h)
        end = denormalize_point(action.end_point, w, h)
    elif kind == "scroll_direction":
        cx, cy = w // 2, h // 2
        if action.direction in ("up", "down"):
            half = round(h * SCROLL_SPAN_FRACTION / 2)
            delta = (0, -half) if action.direction == "up" else (0, half)
        else:
            half = round(w * SCROLL_SPAN_FRACTION / 2)
            delta = (-half, 0) if action.direction == "left" else (half, 0)
        start = (cx - delta[0], cy - delta[1])
        end = (cx + delta[0], cy + delta[1])
    else:
        raise ValueError(f"{kind} actions carry no annotation")
    radius = max(3, round(min(w, h) * 0.012))
    return {
        "kind": "line",
        "start": start,
        "end": end,
        "dot": radius,
        "stroke": max(2, radius // 2),
    }


def _draw_point(draw: ImageDraw.ImageDraw, geo: dict) -> None:
    cx, cy = geo["center"]
    r, cross, dot, stroke = geo["radius"], geo["cross"], geo["dot"], geo["stroke"]
    draw.ellipse([cx - r, cy - r, cx + r, cy + r], outline=RED, width=stroke)
    draw.line([cx - cross, cy, cx + cross, cy], fill=RED, width=stroke)
    draw.line([cx, cy - cross, cx, cy + cross], fill=RED, width=stroke)
    draw.ellipse([cx - dot, cy - dot, cx + dot, cy + dot], fill=YELLOW)


def _draw_line(draw: ImageDraw.ImageDraw, geo: dict) -> None:
    sx, sy = geo["start"]
    ex, ey = geo["end"]
    dot, stroke = geo["dot"], geo["stroke"]
    draw.line([sx, sy, ex, ey], fill=BLUE, width=stroke)
    draw.ellipse([sx - dot, sy - dot, sx + dot, sy + dot], fill=GREEN)
    draw.ellipse([ex - dot, ey - dot, ex + dot, ey + dot], fill=RED)


def annotate_action(
    image: StateImage,
    action: CanonicalAction,
    out_dir: str | Path,
    name: str | None = None,
    root: Path | None = None,
) -> StateImage:
    """Annotated copy of ``image`` under ``out_dir``, or ``image`` itself
    unchanged for kinds with no spatial target."""
    if action.kind not in ANNOTATABLE_KINDS:
        return image
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if name is None:
        from ..actions import action_prompt_text

        digest = hashlib.sha256(f"{image.image_ref}\x1f{action_prompt_text(action)}".encode()).hexdigest()
        name = digest[:16]
    img = load_image(image, root).convert("RGB")
    draw = ImageDraw.Draw(img)
    geo = annotation_geometry(image, action)
    if geo["kind"] == "point":
        _draw_point(draw, geo)
    else:
        _draw_line(draw, geo)
    path = out_dir / f"{name}.png"
    img.save(path, format="PNG")
    return StateImage(str(path), image.width_px, image.height_px)
