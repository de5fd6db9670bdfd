"""Session data model, JSON corpus parsing, and real/simulated pairing."""

from __future__ import annotations

import enum
import json
import unicodedata
from dataclasses import dataclass, field
from typing import IO, Iterable, Literal

from .errors import DataError

__all__ = [
    "Interaction",
    "Session",
    "SessionCorpus",
    "SessionPair",
    "PairingMode",
    "PairingResult",
    "parse_sessions",
    "serialize_sessions",
    "build_corpus",
    "pair_sessions",
]


@dataclass(frozen=True)
class Interaction:
    """One query issued in a session, with its result page.

    ``serp`` is an ordered list of document ids (may be empty before
    augmentation); ``clicked_doc_ids`` must be a subset of ``serp``.
    """

    query: str
    serp: tuple[str, ...] = ()
    clicked_doc_ids: tuple[str, ...] | None = None
    augmented: bool = False


@dataclass(frozen=True)
class Session:
    """A search session: a session key, a unique record id, interactions.

    ``rank`` is only meaningful for simulated sessions (1 = best candidate).
    """

    session_id: str
    id: str
    interactions: tuple[Interaction, ...]
    rank: int | None = None
    simulator_id: str | None = None

    @property
    def query(self) -> str:
        """Query of record: the first interaction's query."""
        return self.interactions[0].query


@dataclass(frozen=True)
class SessionCorpus:
    real: tuple[Session, ...]
    simulated: dict[str, tuple[Session, ...]]


class PairingMode(enum.Enum):
    ONE_TO_ONE = "one-to-one"
    ONE_TO_MANY = "one-to-many"

    @classmethod
    def from_string(cls, value: str) -> "PairingMode":
        for mode in cls:
            if mode.value == value:
                return mode
        raise ValueError(f"unknown pairing mode: {value!r}")


@dataclass(frozen=True)
class SessionPair:
    """One real session matched with one simulated session.

    ``rank`` is the effective candidate rank used for ordering: the
    simulated session's declared rank, or its 1-based input position
    within the (simulator, session_id) group when no rank was given.
    """

    session_id: str
    real: Session
    simulated: Session
    simulator_id: str
    rank: int


@dataclass
class PairingResult:
    pairs: dict[str, list[SessionPair]]
    unmatched_real: dict[str, list[str]] = field(default_factory=dict)
    unmatched_simulated: dict[str, list[str]] = field(default_factory=dict)


def _type_name(value: object) -> str:
    return type(value).__name__


def _expect_str(value: object, path: str) -> str:
    if not isinstance(value, str):
        raise DataError(f"{path}: expected string, got {_type_name(value)}")
    return value


def _expect_list(value: object, path: str) -> list:
    if not isinstance(value, list):
        raise DataError(f"{path}: expected array, got {_type_name(value)}")
    return value


def _check_fields(obj: dict, required: set[str], optional: set[str], path: str) -> None:
    for name in sorted(required - obj.keys()):
        raise DataError(f"{path}: missing required field '{name}'")
    for name in sorted(obj.keys() - required - optional):
        raise DataError(f"{path}: unexpected field '{name}'")


def _parse_interaction(obj: object, path: str) -> Interaction:
    if not isinstance(obj, dict):
        raise DataError(f"{path}: expected object, got {_type_name(obj)}")
    _check_fields(obj, {"query", "serp"}, {"clicked_doc_ids", "augmented"}, path)
    query = unicodedata.normalize("NFC", _expect_str(obj["query"], f"{path}.query"))
    serp_raw = _expect_list(obj["serp"], f"{path}.serp")
    serp = tuple(
        _expect_str(doc, f"{path}.serp[{i}]") for i, doc in enumerate(serp_raw)
    )
    if len(set(serp)) != len(serp):
        raise DataError(f"{path}.serp: duplicate document id")
    clicked: tuple[str, ...] | None = None
    if "clicked_doc_ids" in obj:
        clicked_raw = _expect_list(obj["clicked_doc_ids"], f"{path}.clicked_doc_ids")
        clicked = tuple(
            _expect_str(doc, f"{path}.clicked_doc_ids[{i}]")
            for i, doc in enumerate(clicked_raw)
        )
        for doc in clicked:
            if doc not in serp:
                raise DataError(
                    f"{path}.clicked_doc_ids: '{doc}' does not appear in serp"
                )
    augmented = obj.get("augmented", False)
    if not isinstance(augmented, bool):
        raise DataError(f"{path}.augmented: expected boolean")
    return Interaction(query=query, serp=serp, clicked_doc_ids=clicked, augmented=augmented)


def _parse_session(obj: object, path: str, kind: str) -> Session:
    if not isinstance(obj, dict):
        raise DataError(f"{path}: expected object, got {_type_name(obj)}")
    _check_fields(obj, {"session_id", "id", "interactions"}, {"simulator_id", "rank"}, path)
    session_id = _expect_str(obj["session_id"], f"{path}.session_id")
    record_id = _expect_str(obj["id"], f"{path}.id")
    rank = None
    if "rank" in obj:
        if kind == "real":
            raise DataError(f"{path}.rank: rank present on a real session")
        rank_raw = obj["rank"]
        if isinstance(rank_raw, bool) or not isinstance(rank_raw, int):
            raise DataError(f"{path}.rank: expected integer")
        if rank_raw < 1:
            raise DataError(f"{path}.rank: rank must be >= 1")
        rank = rank_raw
    simulator_id = None
    if "simulator_id" in obj:
        simulator_id = _expect_str(obj["simulator_id"], f"{path}.simulator_id")
    interactions_raw = _expect_list(obj["interactions"], f"{path}.interactions")
    if not interactions_raw:
        raise DataError(f"{path}.interactions: must be non-empty")
    interactions = tuple(
        _parse_interaction(item, f"{path}.interactions[{i}]")
        for i, item in enumerate(interactions_raw)
    )
    return Session(
        session_id=session_id,
        id=record_id,
        interactions=interactions,
        rank=rank,
        simulator_id=simulator_id,
    )


def parse_sessions(raw: bytes | str | IO, kind: Literal["real", "simulated"]) -> list[Session]:
    """Parse a session corpus document into Session values.

    ``raw`` may be bytes, text, or a readable file object holding a JSON
    document of the form ``{"sessions": [...]}``. Input order is preserved.
    Queries are NFC-normalized on the way in.
    """
    if kind not in ("real", "simulated"):
        raise ValueError(f"kind must be 'real' or 'simulated', got {kind!r}")
    if hasattr(raw, "read"):
        raw = raw.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        document = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise DataError("top level: expected object")
    _check_fields(document, {"sessions"}, set(), "top level")
    items = _expect_list(document["sessions"], "sessions")
    sessions: list[Session] = []
    seen_ids: set[str] = set()
    for i, item in enumerate(items):
        session = _parse_session(item, f"sessions[{i}]", kind)
        if session.id in seen_ids:
            raise DataError(f"sessions[{i}].id: duplicate id '{session.id}'")
        seen_ids.add(session.id)
        sessions.append(session)
    return sessions


def serialize_sessions(sessions: Iterable[Session]) -> str:
    """Serialize sessions back to the corpus JSON schema (round-trips parse)."""
    out = []
    for s in sessions:
        obj: dict = {"session_id": s.session_id, "id": s.id}
        if s.simulator_id is not None:
            obj["simulator_id"] = s.simulator_id
        if s.rank is not None:
            obj["rank"] = s.rank
        obj["interactions"] = []
        for it in s.interactions:
            ij: dict = {"query": it.query, "serp": list(it.serp)}
            if it.clicked_doc_ids is not None:
                ij["clicked_doc_ids"] = list(it.clicked_doc_ids)
            if it.augmented:
                ij["augmented"] = True
            obj["interactions"].append(ij)
        out.append(obj)
    return json.dumps({"sessions": out}, ensure_ascii=False, indent=2)


def build_corpus(real: list[Session], simulated: list[Session]) -> SessionCorpus:
    """Group simulated sessions by simulator and validate corpus invariants."""
    seen: set[str] = set()
    for s in real:
        if s.session_id in seen:
            raise DataError(f"duplicate real session_id '{s.session_id}'")
        seen.add(s.session_id)
    grouped: dict[str, list[Session]] = {}
    for s in simulated:
        if s.simulator_id is None:
            raise DataError(f"simulated session '{s.id}' missing simulator_id")
        grouped.setdefault(s.simulator_id, []).append(s)
    for simulator_id, sessions in grouped.items():
        ranked: set[tuple[str, int]] = set()
        for s in sessions:
            if s.rank is None:
                continue
            key = (s.session_id, s.rank)
            if key in ranked:
                raise DataError(
                    f"simulator '{simulator_id}': duplicate (session_id, rank) "
                    f"{key} on session '{s.id}'"
                )
            ranked.add(key)
    return SessionCorpus(
        real=tuple(real),
        simulated={k: tuple(v) for k, v in grouped.items()},
    )


def _ranked_candidates(sessions: Iterable[Session]) -> dict[str, list[tuple[int, Session]]]:
    """Group one simulator's sessions by session_id with effective ranks.

    Sessions without a declared rank take their 1-based input position within
    the group; ties on rank keep input order.
    """
    groups: dict[str, list[Session]] = {}
    for s in sessions:
        groups.setdefault(s.session_id, []).append(s)
    ranked: dict[str, list[tuple[int, Session]]] = {}
    for session_id, members in groups.items():
        keyed = []
        for pos, s in enumerate(members):
            effective = s.rank if s.rank is not None else pos + 1
            keyed.append((effective, pos, s))
        keyed.sort(key=lambda t: (t[0], t[1]))
        ranked[session_id] = [(eff, s) for eff, _pos, s in keyed]
    return ranked


def pair_sessions(corpus: SessionCorpus, mode: PairingMode) -> PairingResult:
    """Pair real with simulated sessions per simulator.

    OneToOne keeps only the smallest-rank candidate per session; OneToMany
    emits one pair per candidate. Real sessions with no counterpart (and
    simulated sessions with no real counterpart) are reported, not paired.
    Pairs are ordered by session_id, then rank.
    """
    real_by_id = {s.session_id: s for s in corpus.real}
    result = PairingResult(pairs={})
    for simulator_id in sorted(corpus.simulated):
        candidates = _ranked_candidates(corpus.simulated[simulator_id])
        pairs: list[SessionPair] = []
        orphans: list[str] = []
        for session_id in sorted(candidates):
            if session_id not in real_by_id:
                orphans.append(session_id)
                continue
            real = real_by_id[session_id]
            selected = candidates[session_id]
            if mode is PairingMode.ONE_TO_ONE:
                selected = selected[:1]
            for effective_rank, sim in selected:
                pairs.append(
                    SessionPair(
                        session_id=session_id,
                        real=real,
                        simulated=sim,
                        simulator_id=simulator_id,
                        rank=effective_rank,
                    )
                )
        result.pairs[simulator_id] = pairs
        missing = sorted(set(real_by_id) - set(candidates))
        if missing:
            result.unmatched_real[simulator_id] = missing
        if orphans:
            result.unmatched_simulated[simulator_id] = orphans
    return result
