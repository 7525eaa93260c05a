"""Deterministic pure-Python paint engine.

A tiny block-layout renderer: enough CSS (inline styles, a handful of
properties, tag defaults) to turn model-generated mobile UI markup into a
screenshot that preserves gross structure (bands of color, text runs,
boxes, placeholders) without any browser.  Not a faithful web renderer and
not trying to be; downstream consumers only need stable, content-sensitive
pixels.

Determinism: same markup + viewport in, byte-identical PNG out.  The only
font used is Pillow's embedded scalable default, so output does not depend
on system font packs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from html.parser import HTMLParser

from PIL import Image, ImageDraw, ImageFont

__all__ = ["BuiltinEngine", "BuiltinSession"]

_SKIP_TAGS = frozenset("head script style title meta link base template noscript".split())

_HEADING_SIZES = {"h1": 32, "h2": 28, "h3": 24, "h4": 20, "h5": 18, "h6": 16}

_NAMED_COLORS = {
    "black": (0, 0, 0), "white": (255, 255, 255), "red": (255, 0, 0),
    "green": (0, 128, 0), "blue": (0, 0, 255), "yellow": (255, 255, 0),
    "orange": (255, 165, 0), "purple": (128, 0, 128), "gray": (128, 128, 128),
    "grey": (128, 128, 128), "silver": (192, 192, 192), "maroon": (128, 0, 0),
    "olive": (128, 128, 0), "lime": (0, 255, 0), "aqua": (0, 255, 255),
    "cyan": (0, 255, 255), "teal": (0, 128, 128), "navy": (0, 0, 128),
    "fuchsia": (255, 0, 255), "magenta": (255, 0, 255), "pink": (255, 192, 203),
    "brown": (165, 42, 42), "gold": (255, 215, 0), "indigo": (75, 0, 130),
    "violet": (238, 130, 238), "coral": (255, 127, 80), "salmon": (250, 128, 114),
    "khaki": (240, 230, 140), "beige": (245, 245, 220), "ivory": (255, 255, 240),
    "lavender": (230, 230, 250), "crimson": (220, 20, 60), "tomato": (255, 99, 71),
    "darkgray": (169, 169, 169), "darkgrey": (169, 169, 169),
    "lightgray": (211, 211, 211), "lightgrey": (211, 211, 211),
    "lightblue": (173, 216, 230), "lightgreen": (144, 238, 144),
    "darkblue": (0, 0, 139), "darkgreen": (0, 100, 0), "darkred": (139, 0, 0),
    "whitesmoke": (245, 245, 245), "gainsboro": (220, 220, 220),
    "transparent": None,
}


def parse_color(value: str | None):
    """CSS color -> RGB tuple, or None if unsupported/transparent."""
    if not value:
        return None
    value = value.strip().lower()
    if value in _NAMED_COLORS:
        return _NAMED_COLORS[value]
    if value.startswith("#"):
        hexpart = value[1:]
        if len(hexpart) == 3:
            hexpart = "".join(c * 2 for c in hexpart)
        if len(hexpart) in (6, 8):
            try:
                return tuple(int(hexpart[i : i + 2], 16) for i in (0, 2, 4))
            except ValueError:
                return None
        return None
    m = re.match(r"rgba?\(([^)]+)\)", value)
    if m:
        parts = [p.strip() for p in m.group(1).split(",")]
        try:
            rgb = []
            for p in parts[:3]:
                if p.endswith("%"):
                    rgb.append(round(float(p[:-1]) * 2.55))
                else:
                    rgb.append(int(float(p)))
            return tuple(max(0, min(255, c)) for c in rgb)
        except ValueError:
            return None
    return None


def _parse_len(value: str | None, rel_to: float = 0.0):
    """Pixel lengths; percentages resolve against rel_to; anything else None."""
    if not value:
        return None
    value = value.strip().lower()
    try:
        if value.endswith("px"):
            return float(value[:-2])
        if value.endswith("%"):
            return float(value[:-1]) / 100.0 * rel_to
        if value.endswith("em") and not value.endswith("rem"):
            return float(value[:-2]) * 16.0
        if value.endswith("rem"):
            return float(value[:-3]) * 16.0
        if value.endswith("pt"):
            return float(value[:-2]) * 4 / 3
        return float(value)
    except ValueError:
        return None


def parse_style(value: str | None) -> dict[str, str]:
    out: dict[str, str] = {}
    if not value:
        return out
    for decl in value.split(";"):
        if ":" not in decl:
            continue
        prop, _, v = decl.partition(":")
        out[prop.strip().lower()] = v.strip()
    return out


@dataclass
class Node:
    tag: str
    attrs: dict[str, str]
    children: list = field(default_factory=list)  # Node or str


_VOID_TAGS = frozenset("br hr img input meta link area base col embed source track wbr".split())


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = Node("#root", {})
        self.stack = [self.root]

    def handle_starttag(self, tag, attrs) -> None:
        tag = tag.lower()
        node = Node(tag, {k.lower(): (v or "") for k, v in attrs})
        self.stack[-1].children.append(node)
        if tag not in _VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs) -> None:
        tag = tag.lower()
        self.stack[-1].children.append(Node(tag, {k.lower(): (v or "") for k, v in attrs}))

    def handle_endtag(self, tag) -> None:
        tag = tag.lower()
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # Stray close tag: ignore.

    def handle_data(self, data) -> None:
        if data:
            self.stack[-1].children.append(data)


def build_tree(html: str) -> Node:
    builder = _TreeBuilder()
    builder.feed(html)
    builder.close()
    return builder.root


@lru_cache(maxsize=32)
def _font(size: int) -> ImageFont.FreeTypeFont:
    return ImageFont.load_default(size=size)


@dataclass
class _Style:
    color: tuple = (0, 0, 0)
    font_size: int = 16
    bold: bool = False
    align: str = "left"

    def derive(self, node: Node) -> "_Style":
        style = parse_style(node.attrs.get("style"))
        color = parse_color(style.get("color")) or self.color
        size = self.font_size
        if node.tag in _HEADING_SIZES:
            size = _HEADING_SIZES[node.tag]
        if node.tag == "small":
            size = 13
        fs = _parse_len(style.get("font-size"), self.font_size)
        if fs:
            size = int(round(fs))
        bold = self.bold or node.tag in ("b", "strong") or node.tag in _HEADING_SIZES
        weight = style.get("font-weight")
        if weight in ("bold", "600", "700", "800", "900"):
            bold = True
        align = style.get("text-align", self.align)
        if align not in ("left", "center", "right"):
            align = self.align
        return _Style(color=color, font_size=max(6, min(96, size)), bold=bold, align=align)


class BuiltinSession:
    """One render context; stateless between calls, safe to reuse serially."""

    def render(self, html: str, viewport) -> Image.Image:
        scale = viewport.device_scale
        width = int(round(viewport.width_px * scale))
        height = int(round(viewport.height_px * scale))
        tree = build_tree(html)
        bg = self._page_background(tree) or (255, 255, 255)
        img = Image.new("RGB", (width, height), bg)
        draw = ImageDraw.Draw(img)
        painter = _Painter(draw, scale)
        painter.layout_block(tree, 0, 0, width, _Style(), paint=True)
        return img

    def _page_background(self, tree: Node):
        for node in _walk(tree):
            if node.tag in ("body", "html"):
                style = parse_style(node.attrs.get("style"))
                color = parse_color(style.get("background-color") or _bg_shorthand(style))
                if color:
                    return color
        return None

    def close(self) -> None:
        pass


def _walk(node: Node):
    yield node
    for child in node.children:
        if isinstance(child, Node):
            yield from _walk(child)


def _bg_shorthand(style: dict[str, str]) -> str | None:
    raw = style.get("background")
    if not raw:
        return None
    return raw.split()[0]


class _Painter:
    """Single-pass-per-subtree block layout.

    ``layout_block`` measures when paint=False and draws when paint=True;
    elements with a background first measure their subtree, fill the rect,
    then paint children on top.
    """

    def __init__(self, draw: ImageDraw.ImageDraw, scale: float):
        self.draw = draw
        self.scale = scale

    def px(self, v: float) -> int:
        return int(round(v * self.scale))

    def layout_block(self, node: Node, x: float, y: float, width: float, style: _Style, paint: bool) -> float:
        """Lay out ``node``'s children inside [x, x+width) starting at y;
        returns the height consumed (unscaled units)."""
        cursor = y
        run: list[tuple[str, _Style]] = []

        def flush_run() -> None:
            nonlocal cursor
            if run:
                cursor += self._paint_text_run(run, x, cursor, width, paint)
                run.clear()

        for child in node.children:
            if isinstance(child, str):
                if child.strip():
                    run.append((child, style))
                continue
            tag = child.tag
            if tag in _SKIP_TAGS:
                continue
            child_style = style.derive(child)
            if tag in ("span", "a", "b", "i", "u", "em", "strong", "small", "label", "code", "mark", "time", "abbr", "cite", "q", "sub", "sup", "text", "tspan"):
                run.append((self._inline_text(child), child_style))
                continue
            flush_run()
            if tag == "br":
                cursor += style.font_size * 1.25
                continue
            cursor += self._block_element(child, x, cursor, width, child_style, paint)
        flush_run()
        return cursor - y

    def _inline_text(self, node: Node) -> str:
        parts = []
        for child in node.children:
            if isinstance(child, str):
                parts.append(child)
            elif child.tag not in _SKIP_TAGS:
                parts.append(self._inline_text(child))
        return "".join(parts)

    def _block_element(self, node: Node, x: float, y: float, width: float, style: _Style, paint: bool) -> float:
        tag = node.tag
        css = parse_style(node.attrs.get("style"))
        if css.get("display") == "none":
            return 0.0
        margin = _parse_len(css.get("margin"), width) or 0.0
        pad = _parse_len(css.get("padding"), width) or 0.0
        if pad == 0.0 and tag in ("button", "td", "th"):
            pad = 6.0
        inner_x = x + margin + pad
        inner_w = max(10.0, width - 2 * (margin + pad))
        fixed_w = _parse_len(css.get("width"), width)
        if fixed_w:
            inner_w = max(10.0, min(inner_w, fixed_w))
        fixed_h = _parse_len(css.get("height"), 0.0)
        bg = parse_color(css.get("background-color") or _bg_shorthand(css))
        border = css.get("border")

        if tag == "hr":
            if paint:
                yy = self.px(y + margin + 4)
                self.draw.line([(self.px(x + margin), yy), (self.px(x + width - margin), yy)], fill=(153, 153, 153))
            return margin * 2 + 9.0

        if tag in ("img", "picture", "svg", "video", "canvas", "iframe", "embed", "object"):
            return margin * 2 + self._placeholder(node, css, x + margin, y + margin, width - 2 * margin, paint)

        if tag in ("input", "textarea", "select", "button"):
            return margin * 2 + self._widget(node, css, style, x + margin, y + margin, width - 2 * margin, paint)

        if tag == "li":
            marker = "• "
            content_h = self._measure_children(node, inner_x + 14, inner_w - 14, style)
            if paint:
                if bg:
                    self._fill(x + margin, y + margin, width - 2 * margin, content_h + 2 * pad, bg)
                self.draw.text((self.px(inner_x), self.px(y + margin + pad)), marker, font=_font(self.px_font(style)), fill=style.color)
                self.layout_block(node, inner_x + 14, y + margin + pad, inner_w - 14, style, paint=True)
            return margin * 2 + pad * 2 + content_h

        # Generic block container.
        content_h = self._measure_children(node, inner_x, inner_w, style)
        box_h = max(content_h + 2 * pad, fixed_h or 0.0)
        if paint:
            if bg:
                self._fill(x + margin, y + margin, width - 2 * margin if not fixed_w else fixed_w + 2 * pad, box_h, bg)
            if border:
                self._stroke(x + margin, y + margin, width - 2 * margin, box_h, _border_color(border))
            self.layout_block(node, inner_x, y + margin + pad, inner_w, style, paint=True)
        spacing = 8.0 if tag in ("p", "ul", "ol", "table", "blockquote", "form") or tag in _HEADING_SIZES else 0.0
        return margin * 2 + box_h + spacing

    def _measure_children(self, node: Node, x: float, width: float, style: _Style) -> float:
        return self.layout_block(node, x, 0, width, style, paint=False)

    def px_font(self, style: _Style) -> int:
        return max(6, self.px(style.font_size))

    def _fill(self, x: float, y: float, w: float, h: float, color) -> None:
        self.draw.rectangle(
            [self.px(x), self.px(y), max(self.px(x + w) - 1, self.px(x)), max(self.px(y + h) - 1, self.px(y))],
            fill=color,
        )

    def _stroke(self, x: float, y: float, w: float, h: float, color) -> None:
        self.draw.rectangle(
            [self.px(x), self.px(y), max(self.px(x + w) - 1, self.px(x)), max(self.px(y + h) - 1, self.px(y))],
            outline=color,
        )

    def _placeholder(self, node: Node, css: dict, x: float, y: float, width: float, paint: bool) -> float:
        w = _parse_len(node.attrs.get("width"), width) or _parse_len(css.get("width"), width) or min(width, 80.0)
        h = _parse_len(node.attrs.get("height"), 0.0) or _parse_len(css.get("height"), 0.0) or min(w, 80.0)
        w = min(w, width)
        bg = parse_color(css.get("background-color") or _bg_shorthand(css)) or (204, 204, 204)
        if paint:
            self._fill(x, y, w, h, bg)
            self._stroke(x, y, w, h, (153, 153, 153))
        return h

    def _widget(self, node: Node, css: dict, style: _Style, x: float, y: float, width: float, paint: bool) -> float:
        text = self._inline_text(node).strip() or node.attrs.get("value", "") or node.attrs.get("placeholder", "")
        if node.tag == "input" and node.attrs.get("type") in ("hidden",):
            return 0.0
        w = _parse_len(css.get("width"), width) or min(width, 280.0)
        h = _parse_len(css.get("height"), 0.0) or style.font_size * 2.2
        bg = parse_color(css.get("background-color") or _bg_shorthand(css))
        if bg is None:
            bg = (224, 224, 224) if node.tag == "button" else (250, 250, 250)
        fg = parse_color(css.get("color")) or style.color
        if paint:
            self._fill(x, y, w, h, bg)
            self._stroke(x, y, w, h, (153, 153, 153))
            if text:
                font = _font(self.px_font(style))
                self.draw.text((self.px(x + 8), self.px(y + (h - style.font_size * 1.2) / 2)), text[:120], font=font, fill=fg)
        return h

    def _paint_text_run(self, run: list[tuple[str, _Style]], x: float, y: float, width: float, paint: bool) -> float:
        # One style per run keeps wrapping simple: use the first segment's
        # style for metrics, but draw each segment with its own color.
        text = " ".join(re.sub(r"\s+", " ", seg.strip()) for seg, _ in run if seg.strip())
        if not text:
            return 0.0
        style = run[0][1]
        font = _font(self.px_font(style))
        line_h = style.font_size * 1.3
        max_w = self.px(width)
        lines = _wrap(text, font, max_w)
        if paint:
            for i, line in enumerate(lines):
                lx = self.px(x)
                if style.align in ("center", "right"):
                    line_w = font.getlength(line)
                    slack = max_w - line_w
                    lx = self.px(x) + int(slack if style.align == "right" else slack / 2)
                self.draw.text((lx, self.px(y + i * line_h)), line, font=font, fill=style.color)
        return len(lines) * line_h


def _wrap(text: str, font, max_w: int) -> list[str]:
    words = text.split(" ")
    lines: list[str] = []
    current = ""
    for word in words:
        candidate = f"{current} {word}".strip()
        if current and font.getlength(candidate) > max_w:
            lines.append(current)
            current = word
        else:
            current = candidate
        # Hard-break pathological unbroken words.
        while font.getlength(current) > max_w and len(current) > 1:
            cut = max(1, int(len(current) * max_w / max(font.getlength(current), 1)))
            lines.append(current[:cut])
            current = current[cut:]
    if current:
        lines.append(current)
    return lines or [text]


def _border_color(value: str):
    for token in value.split():
        color = parse_color(token)
        if color:
            return color
    return (153, 153, 153)


class BuiltinEngine:
    """Engine facade matching the pool's engine protocol."""

    def start(self) -> None:
        pass

    def new_session(self) -> BuiltinSession:
        return BuiltinSession()

    def close(self) -> None:
        pass
