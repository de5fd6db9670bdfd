"""Shared fixtures: a disposable toy-corpus working directory."""

import json
import shutil
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[2]
TOY = REPO / "tests" / "data" / "toy"
GOLDEN = REPO / "tests" / "data" / "golden"

_TOY_FILES = (
    "real.json",
    "simulated.json",
    "qrels.txt",
    "annotations.json",
    "embeddings.jsonl",
    "config.json",
)


@pytest.fixture()
def toy_workdir(tmp_path, monkeypatch):
    for name in _TOY_FILES:
        shutil.copy(TOY / name, tmp_path / name)
    shutil.copytree(TOY / "wndb", tmp_path / "wndb")
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture()
def toy_config():
    return json.loads((TOY / "config.json").read_text("utf-8"))
