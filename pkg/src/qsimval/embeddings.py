"""Embedding providers: precomputed JSONL files or a remote HTTP service.

Vectors are external inputs; nothing here runs a model. A provider hands
back one matrix per input text (one row for sentence granularity, one row
per token otherwise), or ``None`` for a text the precomputed store does
not know. Remote results are cached on disk, keyed by a content hash of
(model, granularity, NFC text), so repeated runs stay offline.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Callable

import requests

from .errors import ConfigError, DataError

__all__ = [
    "EmbeddingMatrix",
    "ProviderConfig",
    "load_precomputed",
    "open_provider",
    "fetch",
]

GRANULARITIES = ("sentence", "token")

_RETRY_ATTEMPTS = 3
_BACKOFF_START_SECONDS = 0.25


@dataclass(frozen=True)
class EmbeddingMatrix:
    rows: tuple[tuple[float, ...], ...]
    dim: int
    model_id: str

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise DataError(f"embedding dim must be positive, got {self.dim}")
        for row in self.rows:
            if len(row) != self.dim:
                raise DataError(
                    f"embedding row has length {len(row)}, expected dim {self.dim}"
                )


@dataclass(frozen=True)
class ProviderConfig:
    kind: str
    location: str
    model_id: str
    cache_dir: str | None = None
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if self.kind not in ("precomputed", "remote"):
            raise ConfigError(f"unknown provider kind '{self.kind}'")
        if self.kind == "remote" and not self.location.startswith(("http://", "https://")):
            raise ConfigError(
                f"remote endpoint must be an absolute URL, got '{self.location}'"
            )


def _normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _rows_from_payload(embedding, granularity: str, dim: int, where: str) -> tuple:
    """Normalize the stored/remote shape into a tuple of rows."""
    if not isinstance(embedding, list) or not embedding:
        raise DataError(f"{where}: embedding must be a non-empty list")
    if granularity == "sentence":
        if isinstance(embedding[0], list):
            if len(embedding) != 1:
                raise DataError(f"{where}: sentence embedding must have exactly 1 row")
            rows = [embedding[0]]
        else:
            rows = [embedding]
    else:
        if not isinstance(embedding[0], list):
            raise DataError(f"{where}: token embedding must be a list of rows")
        rows = embedding
    out = []
    for row in rows:
        if len(row) != dim:
            raise DataError(f"{where}: row length {len(row)} does not match dim {dim}")
        out.append(tuple(float(v) for v in row))
    return tuple(out)


class _DimGuard:
    """Pins the vector dimension per granularity for the life of a provider."""

    def __init__(self) -> None:
        self._dims: dict[str, int] = {}
        self._lock = threading.Lock()

    def check(self, granularity: str, dim: int) -> None:
        with self._lock:
            seen = self._dims.setdefault(granularity, dim)
        if seen != dim:
            raise DataError(
                f"embedding dim drift: {granularity} vectors were {seen}-dim, got {dim}"
            )


class PrecomputedProvider:
    """In-memory index over a JSONL embedding file, keyed by NFC text."""

    def __init__(self, entries: dict[tuple[str, str], EmbeddingMatrix], model_id: str):
        self._entries = entries
        self.model_id = model_id

    def fetch(self, texts: list[str], granularity: str) -> list[EmbeddingMatrix | None]:
        return [self._entries.get((granularity, _normalize(t))) for t in texts]


class RemoteProvider:
    """Batched HTTP client with retry and a content-addressed disk cache."""

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        cache_dir: str | None,
        timeout: float,
        session: requests.Session | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.model_id = model_id
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.timeout = timeout
        self._session = session or requests.Session()
        self._sleep = sleeper
        self._guard = _DimGuard()
        self._memory: dict[tuple[str, str], EmbeddingMatrix] = {}
        self._lock = threading.Lock()
        if self.cache_dir is not None:
            self.cache_dir.mkdir(parents=True, exist_ok=True)

    # -- cache ------------------------------------------------------------

    def _cache_key(self, granularity: str, text: str) -> str:
        payload = f"{self.model_id}|{granularity}|{text}".encode("utf-8")
        return hashlib.sha256(payload).hexdigest()

    def _cache_path(self, granularity: str, text: str) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / f"{self._cache_key(granularity, text)}.json"

    def _cache_read(self, granularity: str, text: str) -> EmbeddingMatrix | None:
        path = self._cache_path(granularity, text)
        if path is None or not path.is_file():
            return None
        try:
            payload = json.loads(path.read_text("utf-8"))
            dim = int(payload["dim"])
            rows = _rows_from_payload(payload["rows"], granularity, dim, str(path))
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise DataError(f"corrupt embedding cache entry {path}") from exc
        return EmbeddingMatrix(rows=rows, dim=dim, model_id=self.model_id)

    def _cache_write(self, granularity: str, text: str, matrix: EmbeddingMatrix) -> None:
        path = self._cache_path(granularity, text)
        if path is None:
            return
        payload = json.dumps(
            {"dim": matrix.dim, "rows": [list(r) for r in matrix.rows]},
            separators=(",", ":"),
        )
        fd, tmp = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # -- transport --------------------------------------------------------

    def _post(self, texts: list[str], granularity: str) -> dict:
        body = {"model": self.model_id, "granularity": granularity, "texts": texts}
        last_error: Exception | None = None
        for attempt in range(_RETRY_ATTEMPTS):
            if attempt:
                self._sleep(_BACKOFF_START_SECONDS * (2 ** (attempt - 1)))
            try:
                response = self._session.post(
                    self.endpoint, json=body, timeout=self.timeout
                )
                if response.status_code == 200:
                    return response.json()
                last_error = DataError(
                    f"embedding service returned HTTP {response.status_code}"
                )
            except requests.RequestException as exc:
                last_error = exc
        raise DataError(
            f"embedding service failed after {_RETRY_ATTEMPTS} attempts: {last_error}"
        ) from last_error

    def fetch(self, texts: list[str], granularity: str) -> list[EmbeddingMatrix | None]:
        normalized = [_normalize(t) for t in texts]
        results: dict[int, EmbeddingMatrix] = {}
        missing: list[int] = []
        with self._lock:
            for i, text in enumerate(normalized):
                cached = self._memory.get((granularity, text))
                if cached is None:
                    cached = self._cache_read(granularity, text)
                    if cached is not None:
                        self._guard.check(granularity, cached.dim)
                        self._memory[(granularity, text)] = cached
                if cached is not None:
                    results[i] = cached
                else:
                    missing.append(i)

        if missing:
            payload = self._post([normalized[i] for i in missing], granularity)
            try:
                dim = int(payload["dim"])
                embeddings = payload["embeddings"]
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError("malformed embedding service response") from exc
            if not isinstance(embeddings, list) or len(embeddings) != len(missing):
                raise DataError(
                    f"embedding count mismatch: requested {len(missing)}, "
                    f"got {len(embeddings) if isinstance(embeddings, list) else '?'}"
                )
            self._guard.check(granularity, dim)
            fresh = []
            for i, embedding in zip(missing, embeddings):
                rows = _rows_from_payload(embedding, granularity, dim, self.endpoint)
                fresh.append((i, EmbeddingMatrix(rows=rows, dim=dim, model_id=self.model_id)))
            # All rows validated; only now publish, so a bad batch leaves no trace.
            with self._lock:
                for i, matrix in fresh:
                    results[i] = matrix
                    self._memory[(granularity, normalized[i])] = matrix
            for i, matrix in fresh:
                self._cache_write(granularity, normalized[i], matrix)

        return [results[i] for i in range(len(texts))]


def load_precomputed(path: str | Path | IO, model_id: str = "precomputed") -> PrecomputedProvider:
    """Index a JSONL embedding file; every line carries text, granularity,
    dim, and the vector (sentence) or row list (token)."""
    if hasattr(path, "read"):
        content = path.read()
        if isinstance(content, bytes):
            content = content.decode("utf-8")
        name = "<stream>"
    else:
        content = Path(path).read_text("utf-8")
        name = str(path)
    entries: dict[tuple[str, str], EmbeddingMatrix] = {}
    dims: dict[str, int] = {}
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{name}:{lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{where}: invalid JSON") from exc
        if not isinstance(record, dict):
            raise DataError(f"{where}: expected an object")
        try:
            text = record["text"]
            granularity = record["granularity"]
            dim = int(record["dim"])
            embedding = record["embedding"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{where}: missing or malformed field") from exc
        if granularity not in GRANULARITIES:
            raise DataError(f"{where}: unknown granularity '{granularity}'")
        if granularity in dims and dims[granularity] != dim:
            raise DataError(
                f"{where}: dim {dim} conflicts with earlier {dims[granularity]}"
            )
        dims[granularity] = dim
        rows = _rows_from_payload(embedding, granularity, dim, where)
        entries[(granularity, _normalize(text))] = EmbeddingMatrix(
            rows=rows, dim=dim, model_id=model_id
        )
    return PrecomputedProvider(entries, model_id)


def open_provider(
    config: ProviderConfig,
    session: requests.Session | None = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> PrecomputedProvider | RemoteProvider:
    if config.kind == "precomputed":
        return load_precomputed(config.location, config.model_id)
    return RemoteProvider(
        endpoint=config.location,
        model_id=config.model_id,
        cache_dir=config.cache_dir,
        timeout=config.timeout,
        session=session,
        sleeper=sleeper,
    )


def fetch(provider, texts: list[str], granularity: str) -> list[EmbeddingMatrix | None]:
    """One matrix per text, order preserved; None marks a precomputed miss."""
    if not texts:
        raise DataError("fetch requires at least one text")
    if granularity not in GRANULARITIES:
        raise ConfigError(f"unknown granularity '{granularity}'")
    return provider.fetch(list(texts), granularity)
