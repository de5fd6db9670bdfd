"""WNDB database parsing and taxonomy queries (depth, LCS, Wu-Palmer).

Only the noun and verb databases are loaded; a virtual root per part of
speech sits above all root synsets so that every pair of same-POS synsets
has a common ancestor. Hypernym pointers are ``@`` and ``@i``; everything
else in the pointer list is skipped.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

from .errors import DataError

__all__ = ["Synset", "SynsetGraph", "parse_wndb", "load_wndb_dir", "VIRTUAL_ROOT_OFFSET"]

# Sentinel offset for the per-POS virtual root.
VIRTUAL_ROOT_OFFSET = -1

SynsetKey = tuple[str, int]

_HYPERNYM_SYMBOLS = ("@", "@i")
_VERSION_RE = re.compile(r"WordNet (\d+\.\d+)")


@dataclass(frozen=True)
class Synset:
    offset: int
    pos: str
    lemmas: tuple[str, ...]
    hypernyms: tuple[SynsetKey, ...]

    @property
    def key(self) -> SynsetKey:
        return (self.pos, self.offset)

    @property
    def is_virtual_root(self) -> bool:
        return self.offset == VIRTUAL_ROOT_OFFSET


@dataclass
class SynsetGraph:
    """Immutable-after-build synset taxonomy with precomputed depths.

    Depth counts nodes on the shortest hypernym path including both ends;
    the virtual root has depth 1.
    """

    synsets: dict[SynsetKey, Synset]
    lemma_index: dict[tuple[str, str], tuple[SynsetKey, ...]]
    version: str | None = None
    _depths: dict[SynsetKey, int] = field(default_factory=dict, repr=False)

    def __contains__(self, key: SynsetKey) -> bool:
        return key in self.synsets

    def synsets_for_lemma(self, pos: str, lemma: str) -> tuple[SynsetKey, ...]:
        return self.lemma_index.get((pos, lemma), ())

    def depth(self, key: SynsetKey) -> int:
        if key not in self._depths:
            raise DataError(f"unknown synset key {key}")
        return self._depths[key]

    def _ancestors(self, key: SynsetKey) -> dict[SynsetKey, None]:
        """All hypernym ancestors of ``key``, including itself."""
        seen: dict[SynsetKey, None] = {}
        frontier = deque([key])
        while frontier:
            current = frontier.popleft()
            if current in seen:
                continue
            seen[current] = None
            frontier.extend(self.synsets[current].hypernyms)
        return seen

    def least_common_subsumer(self, a: SynsetKey, b: SynsetKey) -> SynsetKey:
        """Deepest common ancestor; ties go to the smaller offset, with
        virtual roots considered last."""
        if a not in self.synsets:
            raise DataError(f"unknown synset key {a}")
        if b not in self.synsets:
            raise DataError(f"unknown synset key {b}")
        if a[0] != b[0]:
            raise DataError(f"synsets {a} and {b} have different parts of speech")
        common = self._ancestors(a).keys() & self._ancestors(b).keys()
        return min(
            common,
            key=lambda k: (-self.depth(k), k[1] == VIRTUAL_ROOT_OFFSET, k[1]),
        )

    def wu_palmer(self, a: SynsetKey, b: SynsetKey) -> float:
        """Wu-Palmer similarity: 2*depth(lcs) / (depth(a) + depth(b))."""
        lcs = self.least_common_subsumer(a, b)
        return 2.0 * self.depth(lcs) / (self.depth(a) + self.depth(b))


def _read_lines(stream: bytes | str | IO) -> list[str]:
    if hasattr(stream, "read"):
        stream = stream.read()
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    return stream.splitlines()


def _parse_data_file(lines: list[str], pos: str, filename: str) -> tuple[list[Synset], str | None]:
    synsets: list[Synset] = []
    version = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if line.startswith("  "):
            # License/header line; scan it for a declared version.
            if version is None:
                match = _VERSION_RE.search(line)
                if match:
                    version = match.group(1)
            continue
        head = line.split(" | ")[0]
        fields = head.split()
        try:
            offset = int(fields[0], 10)
            ss_type = fields[2]
            word_count = int(fields[3], 16)
            words = [fields[4 + 2 * i] for i in range(word_count)]
            pointer_base = 4 + 2 * word_count
            pointer_count = int(fields[pointer_base], 10)
            hypernyms = []
            for i in range(pointer_count):
                symbol, target, target_pos, _source = fields[
                    pointer_base + 1 + 4 * i : pointer_base + 5 + 4 * i
                ]
                if symbol in _HYPERNYM_SYMBOLS and target_pos == pos:
                    hypernyms.append((pos, int(target, 10)))
        except (IndexError, ValueError) as exc:
            raise DataError(f"{filename}:{lineno}: malformed WNDB line") from exc
        if ss_type not in (pos, "s"):
            raise DataError(
                f"{filename}:{lineno}: synset type '{ss_type}' does not match file"
            )
        lemmas = tuple(w.lower().replace("_", " ") for w in words)
        synsets.append(Synset(offset=offset, pos=pos, lemmas=lemmas, hypernyms=tuple(hypernyms)))
    return synsets, version


def _parse_index_file(lines: list[str], pos: str, filename: str) -> dict[str, tuple[int, ...]]:
    index: dict[str, tuple[int, ...]] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("  "):
            continue
        fields = line.split()
        try:
            lemma = fields[0].lower().replace("_", " ")
            synset_count = int(fields[2], 10)
            offsets = tuple(int(f, 10) for f in fields[-synset_count:])
        except (IndexError, ValueError) as exc:
            raise DataError(f"{filename}:{lineno}: malformed index line") from exc
        index[lemma] = offsets
    return index


def _check_acyclic(synsets: dict[SynsetKey, Synset]) -> None:
    # Kahn's algorithm over child -> hypernym edges; leftovers mean a cycle.
    remaining = {k: len(s.hypernyms) for k, s in synsets.items()}
    children: dict[SynsetKey, list[SynsetKey]] = {k: [] for k in synsets}
    for key, synset in synsets.items():
        for parent in synset.hypernyms:
            children[parent].append(key)
    queue = deque(k for k, n in remaining.items() if n == 0)
    processed = 0
    while queue:
        current = queue.popleft()
        processed += 1
        for child in children[current]:
            remaining[child] -= 1
            if remaining[child] == 0:
                queue.append(child)
    if processed != len(synsets):
        stuck = sorted(k for k, n in remaining.items() if n > 0)[:5]
        raise DataError(f"cyclic hypernymy involving {stuck}")


def parse_wndb(
    data_noun: bytes | str | IO,
    index_noun: bytes | str | IO,
    data_verb: bytes | str | IO,
    index_verb: bytes | str | IO,
) -> SynsetGraph:
    """Parse WNDB data/index files for nouns and verbs into a SynsetGraph.

    Lines starting with two spaces are treated as license header. A virtual
    root per POS is attached above all root synsets. Dangling hypernym
    pointers and hypernym cycles are errors.
    """
    synsets: dict[SynsetKey, Synset] = {}
    version = None
    for stream, pos, name in ((data_noun, "n", "data.noun"), (data_verb, "v", "data.verb")):
        parsed, file_version = _parse_data_file(_read_lines(stream), pos, name)
        version = version or file_version
        for synset in parsed:
            synsets[synset.key] = synset

    for key, synset in synsets.items():
        for parent in synset.hypernyms:
            if parent not in synsets:
                raise DataError(
                    f"synset {key} has dangling hypernym pointer to {parent}"
                )
    _check_acyclic(synsets)

    # Attach a virtual root per POS above every root synset.
    for pos in ("n", "v"):
        root_key = (pos, VIRTUAL_ROOT_OFFSET)
        roots = [
            k for k, s in synsets.items() if s.pos == pos and not s.hypernyms
        ]
        rebuilt = {}
        for k in roots:
            s = synsets[k]
            rebuilt[k] = Synset(
                offset=s.offset, pos=s.pos, lemmas=s.lemmas, hypernyms=(root_key,)
            )
        synsets.update(rebuilt)
        synsets[root_key] = Synset(
            offset=VIRTUAL_ROOT_OFFSET, pos=pos, lemmas=(), hypernyms=()
        )

    lemma_index: dict[tuple[str, str], tuple[SynsetKey, ...]] = {}
    for stream, pos, name in ((index_noun, "n", "index.noun"), (index_verb, "v", "index.verb")):
        for lemma, offsets in _parse_index_file(_read_lines(stream), pos, name).items():
            keys = []
            for offset in offsets:
                key = (pos, offset)
                if key not in synsets:
                    raise DataError(
                        f"{name}: lemma '{lemma}' points to missing synset {offset}"
                    )
                keys.append(key)
            lemma_index[(pos, lemma)] = tuple(keys)

    graph = SynsetGraph(synsets=synsets, lemma_index=lemma_index, version=version)
    graph._depths.update(_compute_depths(synsets))
    return graph


def _compute_depths(synsets: dict[SynsetKey, Synset]) -> dict[SynsetKey, int]:
    # BFS downward from each virtual root over hyponym edges gives shortest
    # hypernym-path depths in one pass.
    children: dict[SynsetKey, list[SynsetKey]] = {k: [] for k in synsets}
    for key, synset in synsets.items():
        for parent in synset.hypernyms:
            children[parent].append(key)
    depths: dict[SynsetKey, int] = {}
    for pos in ("n", "v"):
        root = (pos, VIRTUAL_ROOT_OFFSET)
        if root not in synsets:
            continue
        depths[root] = 1
        frontier = deque([root])
        while frontier:
            current = frontier.popleft()
            for child in children[current]:
                if child not in depths:
                    depths[child] = depths[current] + 1
                    frontier.append(child)
    return depths


def load_wndb_dir(path: str | Path) -> SynsetGraph:
    """Load data.noun/index.noun/data.verb/index.verb from a directory."""
    base = Path(path)
    streams = []
    for name in ("data.noun", "index.noun", "data.verb", "index.verb"):
        file = base / name
        if not file.is_file():
            raise DataError(f"WordNet database file not found: {file}")
        streams.append(file.read_bytes())
    return parse_wndb(*streams)
