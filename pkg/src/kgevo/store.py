"""Content-addressed version store: full snapshots followed by delta chains.

Layout of a store directory::

    manifest.json            ordered list of version records
    objects/<id>.nt          full snapshot, canonical N-Triples
    objects/<id>.delta.json  {"added": [...], "deleted": [...]} against ``base``
    .lock                    commit lock

Version identifiers are ``"RA"`` followed by the unpadded base64url SHA-256
digest of the canonical serialization of the materialized triple set, so the
identifier never depends on how the version happens to be stored.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from filelock import FileLock

from .exceptions import CorruptChain, KgevoError, NonMonotoneTimestamp, UnknownVersion
from .rdf import Dictionary, EncodedTriple, Triple, canonical_lines, canonical_serialize, parse_ntriples

VERSION_ID_RE = re.compile(r"RA[A-Za-z0-9_\-]{43}")
DEFAULT_CHAIN_LIMIT = 10
DEFAULT_MAX_DELTA_RATIO = 0.5
_CACHE_SIZE = 16


def version_id(triples: Iterable[Triple]) -> str:
    return version_id_from_bytes(canonical_serialize(triples))


def version_id_from_bytes(data: bytes) -> str:
    digest = hashlib.sha256(data).digest()
    return "RA" + base64.urlsafe_b64encode(digest).decode("ascii").rstrip("=")


def is_version_id(code: str) -> bool:
    return VERSION_ID_RE.fullmatch(code) is not None


def parse_timestamp(value: str | datetime) -> datetime:
    """Parse an ISO-8601 instant into an aware UTC datetime.

    Naive values are taken to be UTC.
    """
    if isinstance(value, datetime):
        dt = value
    else:
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    dt = parse_timestamp(dt)
    fmt = "%Y-%m-%dT%H:%M:%S.%fZ" if dt.microsecond else "%Y-%m-%dT%H:%M:%SZ"
    return dt.strftime(fmt)


@dataclass(frozen=True)
class SnapshotMeta:
    timestamp: datetime
    label: str
    source: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "timestamp", parse_timestamp(self.timestamp))
        if not self.label:
            raise ValueError("snapshot label must be non-empty")


@dataclass(frozen=True)
class ChangeSet:
    """Additions and deletions between two snapshots; ``updates`` is their union."""

    added: frozenset[Triple] = field(default_factory=frozenset)
    deleted: frozenset[Triple] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "added", frozenset(self.added))
        object.__setattr__(self, "deleted", frozenset(self.deleted))
        if self.added & self.deleted:
            raise ValueError("a triple cannot be both added and deleted")

    @classmethod
    def between(cls, old: Iterable[Triple], new: Iterable[Triple]) -> ChangeSet:
        old, new = frozenset(old), frozenset(new)
        return cls(new - old, old - new)

    @property
    def updates(self) -> frozenset[Triple]:
        return self.added | self.deleted

    def __len__(self):
        return len(self.added) + len(self.deleted)

    def __bool__(self):
        return bool(self.added or self.deleted)

    def inverse(self) -> ChangeSet:
        return ChangeSet(self.deleted, self.added)

    def apply(self, triples: Iterable[Triple]) -> frozenset[Triple]:
        return (frozenset(triples) - self.deleted) | self.added

    def to_dict(self) -> dict:
        return {"added": canonical_lines(self.added), "deleted": canonical_lines(self.deleted)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> ChangeSet:
        added, _ = parse_ntriples("\n".join(data["added"]), strict=True)
        deleted, _ = parse_ntriples("\n".join(data["deleted"]), strict=True)
        return cls(added, deleted)

    @classmethod
    def from_json(cls, text: str | bytes) -> ChangeSet:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class VersionRecord:
    id: str
    meta: SnapshotMeta
    kind: str  # "full" | "delta"
    base: str | None = None

    @property
    def object_name(self) -> str:
        return f"{self.id}.nt" if self.kind == "full" else f"{self.id}.delta.json"

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "timestamp": format_timestamp(self.meta.timestamp),
            "label": self.meta.label,
            "kind": self.kind,
        }
        if self.base is not None:
            d["base"] = self.base
        if self.meta.source is not None:
            d["source"] = self.meta.source
        return d

    @classmethod
    def from_dict(cls, d: dict) -> VersionRecord:
        meta = SnapshotMeta(parse_timestamp(d["timestamp"]), d["label"], d.get("source"))
        return cls(d["id"], meta, d["kind"], d.get("base"))


class VersionStore:
    """A directory-backed versioned triple store.

    Parameters
    ----------
    path : str or Path
        Store directory; created on first commit.
    chain_limit : int
        Maximum number of versions (full snapshot included) in one delta chain.
    max_delta_ratio : float
        A delta larger than this fraction of the materialized version size
        starts a new chain with a full snapshot instead.
    """

    def __init__(self, path, chain_limit: int = DEFAULT_CHAIN_LIMIT,
                 max_delta_ratio: float = DEFAULT_MAX_DELTA_RATIO):
        if chain_limit < 1:
            raise ValueError("chain_limit must be >= 1")
        self.path = Path(path)
        self.chain_limit = chain_limit
        self.max_delta_ratio = max_delta_ratio
        self.dictionary = Dictionary()
        self._records: list[VersionRecord] = []
        self._by_id: dict[str, VersionRecord] = {}
        self._cache: dict[str, frozenset[EncodedTriple]] = {}
        if (self.path / "manifest.json").exists():
            self._load_manifest()

    # -- manifest ---------------------------------------------------------

    @property
    def objects_dir(self) -> Path:
        return self.path / "objects"

    def _load_manifest(self):
        data = json.loads((self.path / "manifest.json").read_text("utf-8"))
        self._records = [VersionRecord.from_dict(d) for d in data]
        self._by_id = {}
        for rec in self._records:
            self._by_id.setdefault(rec.id, rec)

    def _write_manifest(self):
        tmp = self.path / "manifest.json.tmp"
        tmp.write_text(json.dumps([r.to_dict() for r in self._records], indent=1) + "\n", "utf-8")
        os.replace(tmp, self.path / "manifest.json")

    def __len__(self):
        return len(self._records)

    def __contains__(self, vid):
        return vid in self._by_id

    def record(self, vid: str) -> VersionRecord:
        try:
            return self._by_id[vid]
        except KeyError:
            raise UnknownVersion(vid) from None

    def resolve(self, ref: str) -> str:
        """Map a version id or a label (latest match wins) to a version id."""
        if ref in self._by_id:
            return ref
        for rec in reversed(self._records):
            if rec.meta.label == ref:
                return rec.id
        raise UnknownVersion(ref)

    def log(self) -> list[VersionRecord]:
        return sorted(self._records, key=lambda r: r.meta.timestamp)

    def chain_depth(self, vid: str) -> int:
        depth, rec = 1, self.record(vid)
        seen = {vid}
        while rec.kind == "delta":
            if rec.base in seen:
                raise CorruptChain(f"cyclic delta chain at {vid}")
            seen.add(rec.base)
            rec = self.record(rec.base)
            depth += 1
        return depth

    # -- encoding helpers -------------------------------------------------

    def _encode(self, triples: Iterable[Triple]) -> frozenset[EncodedTriple]:
        enc = self.dictionary.encode
        return frozenset(enc(t) for t in triples)

    def _decode(self, encoded: Iterable[EncodedTriple]) -> frozenset[Triple]:
        dec = self.dictionary.decode
        return frozenset(dec(e) for e in encoded)

    # -- commit -----------------------------------------------------------

    def commit(self, triples: Iterable[Triple], meta: SnapshotMeta) -> str:
        """Store a version and return its content-hash identifier."""
        triples = frozenset(triples)
        self.path.mkdir(parents=True, exist_ok=True)
        with FileLock(str(self.path / ".lock")):
            if (self.path / "manifest.json").exists():
                self._load_manifest()
            return self._commit_locked(triples, meta)

    def _commit_locked(self, triples: frozenset[Triple], meta: SnapshotMeta) -> str:
        if self._records and meta.timestamp < self._records[-1].meta.timestamp:
            raise NonMonotoneTimestamp(
                f"{format_timestamp(meta.timestamp)} precedes latest commit "
                f"{format_timestamp(self._records[-1].meta.timestamp)}"
            )
        data = canonical_serialize(triples)
        vid = version_id_from_bytes(data)
        encoded = self._encode(triples)
        self.objects_dir.mkdir(exist_ok=True)

        existing = self._by_id.get(vid)
        if existing is not None:
            # identical content already stored; reuse its object
            rec = VersionRecord(vid, meta, existing.kind, existing.base)
        else:
            rec = self._new_record(vid, meta, encoded, data)
        self._records.append(rec)
        self._by_id.setdefault(vid, rec)
        self._remember(vid, encoded)
        self._write_manifest()
        return vid

    def _new_record(self, vid, meta, encoded, data) -> VersionRecord:
        head = self._records[-1] if self._records else None
        if head is not None and self.chain_depth(head.id) + 1 <= self.chain_limit:
            base = self._materialize_encoded(head.id)
            added, deleted = encoded - base, base - encoded
            if len(added) + len(deleted) <= self.max_delta_ratio * len(encoded):
                cs = ChangeSet(self._decode(added), self._decode(deleted))
                (self.objects_dir / f"{vid}.delta.json").write_bytes(cs.to_json().encode("utf-8"))
                return VersionRecord(vid, meta, "delta", head.id)
        (self.objects_dir / f"{vid}.nt").write_bytes(data)
        return VersionRecord(vid, meta, "full")

    # -- reading ----------------------------------------------------------

    def _chain(self, vid: str) -> list[VersionRecord]:
        chain = [self.record(vid)]
        seen = {vid}
        while chain[-1].kind == "delta":
            base = chain[-1].base
            if base in seen:
                raise CorruptChain(f"cyclic delta chain at {vid}")
            seen.add(base)
            try:
                chain.append(self.record(base))
            except UnknownVersion:
                raise CorruptChain(f"delta base {base} is missing") from None
        chain.reverse()
        return chain

    def _read_full(self, rec: VersionRecord, check: bool) -> list[Triple]:
        raw = (self.objects_dir / rec.object_name).read_bytes()
        triples, _ = parse_ntriples(raw, strict=True)
        if check and canonical_serialize(triples) != raw:
            raise CorruptChain(f"{rec.object_name} is not in canonical form")
        return triples

    def _read_delta(self, rec: VersionRecord, check: bool) -> ChangeSet:
        raw = (self.objects_dir / rec.object_name).read_bytes()
        try:
            cs = ChangeSet.from_json(raw)
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptChain(f"{rec.object_name}: {exc}") from None
        if check and cs.to_json().encode("utf-8") != raw:
            raise CorruptChain(f"{rec.object_name} is not in canonical form")
        return cs

    def _materialize_encoded(self, vid: str, check: bool = False) -> frozenset[EncodedTriple]:
        if not check and vid in self._cache:
            return self._cache[vid]
        current: set[EncodedTriple] | None = None
        for rec in self._chain(vid):
            if rec.kind == "full":
                current = set(self._encode(self._read_full(rec, check)))
                continue
            cs = self._read_delta(rec, check)
            deleted, added = self._encode(cs.deleted), self._encode(cs.added)
            if not deleted <= current:
                raise CorruptChain(f"{rec.object_name} deletes triples absent from its base")
            if added & current:
                raise CorruptChain(f"{rec.object_name} adds triples already present in its base")
            current -= deleted
            current |= added
        result = frozenset(current)
        if not check:
            self._remember(vid, result)
        return result

    def _remember(self, vid: str, encoded: frozenset[EncodedTriple]):
        if len(self._cache) >= _CACHE_SIZE:
            self._cache.pop(next(iter(self._cache)))
        self._cache[vid] = encoded

    def materialize(self, vid: str) -> frozenset[Triple]:
        """Replay the delta chain ending at ``vid`` and return its triple set."""
        return self._decode(self._materialize_encoded(vid))

    def changeset(self, vid_i: str, vid_j: str) -> ChangeSet:
        si = self._materialize_encoded(vid_i)
        sj = self._materialize_encoded(vid_j)
        return ChangeSet(self._decode(sj - si), self._decode(si - sj))

    def verify(self, vid: str) -> bool:
        """Recompute the hash of ``vid`` from the stored objects, bypassing caches."""
        self.record(vid)
        try:
            encoded = self._materialize_encoded(vid, check=True)
        except (KgevoError, OSError, ValueError, UnicodeDecodeError):
            return False
        return version_id(self._decode(encoded)) == vid


def commit(store: VersionStore, triples: Iterable[Triple], meta: SnapshotMeta) -> str:
    return store.commit(triples, meta)


def materialize(store: VersionStore, vid: str) -> frozenset[Triple]:
    return store.materialize(vid)


def changeset(store: VersionStore, vid_i: str, vid_j: str) -> ChangeSet:
    return store.changeset(vid_i, vid_j)


def verify(store: VersionStore, vid: str) -> bool:
    return store.verify(vid)


def log(store: VersionStore) -> list[tuple[str, SnapshotMeta, str]]:
    return [(r.id, r.meta, r.kind) for r in store.log()]
