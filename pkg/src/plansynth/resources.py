"""Access to files shipped inside the package's data directory."""

from __future__ import annotations

from pathlib import Path

DATA_DIR = Path(__file__).parent / "data"


def data_path(*parts: str) -> Path:
    return DATA_DIR.joinpath(*parts)


def read_data_text(*parts: str) -> str:
    return data_path(*parts).read_text(encoding="utf-8")
