"""Access to packaged prompt templates and configuration assets."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib.resources import files


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    """Prompt template text bundled with the package."""
    return files("incidentkb").joinpath(f"prompts/{name}.txt").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_asset_json(name: str) -> dict:
    """Bundled JSON asset (classification guidelines and the like)."""
    raw = files("incidentkb").joinpath(f"assets/{name}.json").read_text(encoding="utf-8")
    return json.loads(raw)
