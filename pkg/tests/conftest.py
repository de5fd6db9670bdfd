import shutil
from pathlib import Path

import pytest

DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return DATA / "toy"


@pytest.fixture(scope="session")
def hand_graph():
    from qsimval.wordnet import load_wndb_dir

    return load_wndb_dir(DATA / "wndb_hand")


@pytest.fixture(scope="session")
def toy_graph():
    from qsimval.wordnet import load_wndb_dir

    return load_wndb_dir(DATA / "toy" / "wndb")


@pytest.fixture()
def toy_workdir(tmp_path, toy_dir, monkeypatch) -> Path:
    """A throwaway working directory holding a copy of the toy corpus.

    The bundled config uses relative paths, so tests chdir here and run the
    pipeline without touching the checked-in fixtures.
    """
    for name in (
        "real.json",
        "simulated.json",
        "qrels.txt",
        "embeddings.jsonl",
        "annotations.json",
        "config.json",
    ):
        shutil.copy(toy_dir / name, tmp_path / name)
    shutil.copytree(toy_dir / "wndb", tmp_path / "wndb")
    monkeypatch.chdir(tmp_path)
    return tmp_path
