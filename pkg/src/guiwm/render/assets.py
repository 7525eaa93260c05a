"""Vendored replacements for CDN framework references.

Model-generated markup routinely links Bootstrap/Tailwind/MUI from public
CDNs.  Renders run with networking disabled, so those references are
rewritten to inline <style>/<script> blocks from a local manifest before
navigation.  Unmatched external references are left alone and simply fail
to load, which is the point: output must not depend on the outside world.

A manifest maps URL regexes to asset files:

    {"patterns": [
        {"match": "bootstrap[^\\"]*\\.css", "asset": "bootstrap-lite.css", "kind": "css"}
    ]}

Relative asset paths resolve against the manifest file's directory; the
built-in manifest ships small approximations of the common frameworks.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

__all__ = ["AssetRule", "default_manifest", "load_manifest", "inline_vendored_assets"]


@dataclass(frozen=True)
class AssetRule:
    match: re.Pattern
    content: str
    kind: str  # css | js


def _builtin_asset(name: str) -> str:
    return (resources.files("guiwm.render") / "vendored" / name).read_text(encoding="utf-8")


def default_manifest() -> list[AssetRule]:
    bootstrap = _builtin_asset("bootstrap-lite.css")
    tailwind = _builtin_asset("tailwind-lite.css")
    mui = _builtin_asset("mui-lite.css")
    return [
        AssetRule(re.compile(r"bootstrap[^\"']*\.(?:min\.)?css", re.I), bootstrap, "css"),
        AssetRule(re.compile(r"(?:tailwind|cdn\.tailwindcss\.com)", re.I), tailwind, "css"),
        AssetRule(re.compile(r"(?:mui|material)[^\"']*\.(?:min\.)?css", re.I), mui, "css"),
        AssetRule(re.compile(r"bootstrap[^\"']*\.(?:min\.)?js", re.I), "", "js"),
    ]


def load_manifest(path: str | Path) -> list[AssetRule]:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    rules = []
    for entry in raw.get("patterns", []):
        asset_path = Path(entry["asset"])
        if not asset_path.is_absolute():
            asset_path = path.parent / asset_path
        rules.append(
            AssetRule(
                match=re.compile(entry["match"], re.I),
                content=asset_path.read_text(encoding="utf-8"),
                kind=entry.get("kind", "css"),
            )
        )
    return rules


_LINK_RE = re.compile(r"<link\b[^>]*>", re.I)
_SCRIPT_RE = re.compile(r"<script\b[^>]*\bsrc\s*=\s*(\"[^\"]*\"|'[^']*'|[^\s>]+)[^>]*>\s*</script>", re.I)
_HREF_RE = re.compile(r"\bhref\s*=\s*(\"[^\"]*\"|'[^']*'|[^\s>]+)", re.I)


def _unquote(token: str) -> str:
    return token.strip("\"'")


def inline_vendored_assets(html: str, manifest: list[AssetRule] | None = None) -> str:
    if manifest is None:
        manifest = default_manifest()

    def replace_link(m: re.Match) -> str:
        tag = m.group(0)
        href = _HREF_RE.search(tag)
        if not href:
            return tag
        url = _unquote(href.group(1))
        for rule in manifest:
            if rule.kind == "css" and rule.match.search(url):
                return f"<style>/* vendored: {url} */\n{rule.content}</style>"
        return tag

    def replace_script(m: re.Match) -> str:
        tag = m.group(0)
        url = _unquote(m.group(1))
        for rule in manifest:
            if rule.kind == "js" and rule.match.search(url):
                return f"<script>/* vendored: {url} */\n{rule.content}</script>"
        return tag

    html = _LINK_RE.sub(replace_link, html)
    html = _SCRIPT_RE.sub(replace_script, html)
    return html
