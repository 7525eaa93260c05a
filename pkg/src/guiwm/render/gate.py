"""Static renderability gate.

Cheap structural checks that catch model output which would render to
nothing, applied before any browser work:

1. empty or whitespace-only document;
2. no recognizable HTML element tag anywhere (plain prose, JSON, etc.);
3. document parses (leniently) but contains no paintable content: no text
   outside script/style/head and none of the intrinsically visible
   elements (img, svg, input, button, ...).

The gate is deliberately permissive beyond that; unknown tags, unclosed
elements, and attribute soup all pass as long as something would paint.
"""

from __future__ import annotations

from dataclasses import dataclass
from html.parser import HTMLParser

__all__ = ["GateReport", "renderability_check", "KNOWN_TAGS"]

KNOWN_TAGS = frozenset(
    """
    html head body title meta link style script noscript base
    div span p a b i u s em strong small mark sub sup code pre blockquote
    h1 h2 h3 h4 h5 h6 hr br wbr
    ul ol li dl dt dd
    table thead tbody tfoot tr td th caption colgroup col
    form input button select option optgroup textarea label fieldset legend datalist output progress meter
    img picture source svg path circle rect line polygon polyline ellipse g text use defs
    video audio track canvas iframe embed object map area
    header footer main nav section article aside figure figcaption details summary dialog template
    abbr address bdi bdo cite data del dfn ins kbd q rp rt ruby samp time var
    """.split()
)

# Elements that paint something even with no text content.
_VISIBLE_LEAVES = frozenset(
    "img svg input button textarea select hr video canvas iframe embed object progress meter".split()
)

_SKIP_TEXT_WITHIN = frozenset("script style title head template".split())


@dataclass(frozen=True, slots=True)
class GateReport:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


class _Scanner(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.known_tags = 0
        self.visible_leaves = 0
        self.visible_text = False
        self._suppress = 0

    def handle_starttag(self, tag: str, attrs) -> None:
        tag = tag.lower()
        if tag in KNOWN_TAGS:
            self.known_tags += 1
        if tag in _VISIBLE_LEAVES:
            self.visible_leaves += 1
        if tag in _SKIP_TEXT_WITHIN:
            self._suppress += 1

    def handle_startendtag(self, tag: str, attrs) -> None:
        tag = tag.lower()
        if tag in KNOWN_TAGS:
            self.known_tags += 1
        if tag in _VISIBLE_LEAVES:
            self.visible_leaves += 1

    def handle_endtag(self, tag: str) -> None:
        if tag.lower() in _SKIP_TEXT_WITHIN and self._suppress > 0:
            self._suppress -= 1

    def handle_data(self, data: str) -> None:
        if self._suppress == 0 and data.strip():
            self.visible_text = True


def renderability_check(html: str) -> GateReport:
    if not html or not html.strip():
        return GateReport(False, "empty document")
    scanner = _Scanner()
    try:
        scanner.feed(html)
        scanner.close()
    except Exception as exc:  # html.parser rarely raises, but never let it out
        return GateReport(False, f"unparseable markup: {exc}")
    if scanner.known_tags == 0:
        return GateReport(False, "no recognizable HTML element tags")
    if not scanner.visible_text and scanner.visible_leaves == 0:
        return GateReport(False, "no paintable content")
    return GateReport(True)
