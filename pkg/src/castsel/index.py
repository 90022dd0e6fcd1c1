"""Exemplar database: precomputed fingerprint profiles, an inverted index
from fingerprint to record positions, and co-occurrence matrix construction.

The on-disk format ("CASTIDX1") stores every record's strings in a shared
pool, its per-node fingerprint multiset as little-endian u64, and the
posting lists with delta-encoded positions. A JSON debug dump mirrors the
same content for inspection.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bitmatrix import CoMatrix, words_for
from .fingerprint import FingerprintProfile, fingerprint_tree
from .tree import ParserAdapter, SexprParseError, TreeError, parse_sexpr, to_sexpr

__all__ = [
    "IndexError_",
    "DuplicateIdError",
    "ExemplarRecord",
    "BuildReport",
    "ExemplarDatabase",
    "build_database",
    "build_cooccurrence",
    "save_index",
    "load_index",
    "dump_index_json",
]

MAGIC = b"CASTIDX1"
VERSION = 1


class IndexError_(ValueError):
    """Database construction or persistence failure."""


class DuplicateIdError(IndexError_):
    def __init__(self, entry_id: str):
        super().__init__(f"duplicate exemplar id: {entry_id!r}")
        self.entry_id = entry_id


@dataclass(frozen=True)
class ExemplarRecord:
    id: str
    source_lang: str
    target_lang: str
    source_text: str
    target_text: str
    profile: FingerprintProfile
    tree_sexpr: str  # canonical form of the source AST, kept for AST-ED


@dataclass
class BuildReport:
    """Audit trail of a database build: entries skipped and why."""

    skipped: list[tuple[str, str]] = field(default_factory=list)

    def warn(self, entry_id: str, reason: str):
        self.skipped.append((entry_id, reason))


@dataclass(frozen=True)
class ExemplarDatabase:
    records: tuple[ExemplarRecord, ...]
    inverted: dict[int, list[int]]  # fingerprint -> sorted record positions

    def __len__(self) -> int:
        return len(self.records)

    def position_of(self, entry_id: str) -> int:
        for i, r in enumerate(self.records):
            if r.id == entry_id:
                return i
        raise KeyError(entry_id)


def _build_inverted(records: Sequence[ExemplarRecord]) -> dict[int, list[int]]:
    inverted: dict[int, list[int]] = {}
    for pos, rec in enumerate(records):
        for fp in rec.profile.fset:
            inverted.setdefault(fp, []).append(pos)
    return inverted


def build_database(
    corpus: Iterable, adapter: ParserAdapter | None = None
) -> tuple[ExemplarDatabase, BuildReport]:
    """Fingerprint every corpus entry and assemble the inverted index.

    Entries with a pre-parsed ``tree`` S-expression bypass the adapter.
    Unparseable entries are skipped with a warning in the build report;
    duplicate ids abort the build.
    """
    report = BuildReport()
    records: list[ExemplarRecord] = []
    seen: set[str] = set()
    for entry in corpus:
        if entry.id in seen:
            raise DuplicateIdError(entry.id)
        seen.add(entry.id)
        try:
            tree_text = getattr(entry, "tree", None)
            if tree_text:
                tree = parse_sexpr(tree_text)
            elif adapter is not None:
                tree = adapter.parse(entry.source, entry.source_lang)
            else:
                raise TreeError("no pre-parsed tree and no adapter supplied")
        except (SexprParseError, TreeError) as exc:
            report.warn(entry.id, str(exc))
            continue
        records.append(
            ExemplarRecord(
                id=entry.id,
                source_lang=entry.source_lang,
                target_lang=entry.target_lang,
                source_text=entry.source,
                target_text=entry.target,
                profile=fingerprint_tree(tree),
                tree_sexpr=to_sexpr(tree),
            )
        )
    db = ExemplarDatabase(tuple(records), _build_inverted(records))
    return db, report


def build_cooccurrence(
    db: ExemplarDatabase, candidates: Sequence[int], test_profile: FingerprintProfile
) -> CoMatrix:
    """Column-wise matrix build via the inverted index.

    Each test-node fingerprint fetches its posting list once; rows cover
    exactly the given candidate positions, in the given order.
    """
    if not test_profile.per_node:
        raise IndexError_("test profile is empty")
    n = len(db.records)
    row_of: dict[int, int] = {}
    for row, pos in enumerate(candidates):
        if not 0 <= pos < n:
            raise IndexError_(f"candidate position {pos} out of range (n={n})")
        row_of[pos] = row
    columns = len(test_profile.per_node)
    rows = np.zeros((len(candidates), words_for(columns)), dtype=np.uint64)
    one = np.uint64(1)
    for j, fp in enumerate(test_profile.per_node):
        word, bit = j // 64, np.uint64(j % 64)
        for pos in db.inverted.get(fp, ()):
            row = row_of.get(pos)
            if row is not None:
                rows[row, word] |= one << bit
    return CoMatrix(rows, columns, tuple(candidates))


# ---------------------------------------------------------------------------
# persistence

def save_index(db: ExemplarDatabase, path) -> None:
    pool = bytearray()
    offsets: list[tuple[int, int]] = []

    def intern(s: str) -> int:
        raw = s.encode("utf-8")
        offsets.append((len(pool), len(raw)))
        pool.extend(raw)
        return len(offsets) - 1

    record_blobs: list[bytes] = []
    for rec in db.records:
        parts = []
        for s in (rec.id, rec.source_lang, rec.target_lang,
                  rec.source_text, rec.target_text, rec.tree_sexpr):
            idx = intern(s)
            off, ln = offsets[idx]
            parts.append(struct.pack("<QI", off, ln))
        fps = rec.profile.per_node
        parts.append(struct.pack("<I", len(fps)))
        parts.append(struct.pack(f"<{len(fps)}Q", *fps) if fps else b"")
        record_blobs.append(b"".join(parts))

    posting_blobs: list[bytes] = []
    for fp in sorted(db.inverted):
        positions = db.inverted[fp]
        deltas = [positions[0]] + [b - a for a, b in zip(positions, positions[1:])]
        posting_blobs.append(
            struct.pack("<QI", fp, len(positions))
            + struct.pack(f"<{len(deltas)}I", *deltas)
        )

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, len(db.records), len(posting_blobs)))
        fh.write(struct.pack("<Q", len(pool)))
        for blob in record_blobs:
            fh.write(blob)
        for blob in posting_blobs:
            fh.write(blob)
        fh.write(bytes(pool))


def load_index(path) -> ExemplarDatabase:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != MAGIC:
        raise IndexError_("not a CASTIDX1 index file")
    version, n_records, n_postings = struct.unpack_from("<III", data, 8)
    if version != VERSION:
        raise IndexError_(f"unsupported index version {version}")
    (pool_size,) = struct.unpack_from("<Q", data, 20)
    pos = 28

    raw_records = []
    for _ in range(n_records):
        fields = []
        for _ in range(6):
            off, ln = struct.unpack_from("<QI", data, pos)
            pos += 12
            fields.append((off, ln))
        (fp_count,) = struct.unpack_from("<I", data, pos)
        pos += 4
        fps = struct.unpack_from(f"<{fp_count}Q", data, pos)
        pos += 8 * fp_count
        raw_records.append((fields, fps))

    inverted: dict[int, list[int]] = {}
    for _ in range(n_postings):
        fp, count = struct.unpack_from("<QI", data, pos)
        pos += 12
        deltas = struct.unpack_from(f"<{count}I", data, pos)
        pos += 4 * count
        positions = []
        acc = 0
        for i, d in enumerate(deltas):
            acc = d if i == 0 else acc + d
            positions.append(acc)
        inverted[fp] = positions

    pool = data[pos:pos + pool_size]
    if len(pool) != pool_size:
        raise IndexError_("truncated index file")

    def fetch(off_ln):
        off, ln = off_ln
        return pool[off:off + ln].decode("utf-8")

    records = []
    for fields, fps in raw_records:
        rid, slang, tlang, stext, ttext, tsexpr = (fetch(f) for f in fields)
        profile = FingerprintProfile(tuple(fps), frozenset(fps))
        records.append(ExemplarRecord(rid, slang, tlang, stext, ttext, profile, tsexpr))
    return ExemplarDatabase(tuple(records), inverted)


def dump_index_json(db: ExemplarDatabase, path) -> None:
    """Human-readable mirror of the binary index content."""
    doc = {
        "format": MAGIC.decode(),
        "version": VERSION,
        "records": [
            {
                "id": r.id,
                "source_lang": r.source_lang,
                "target_lang": r.target_lang,
                "source_text": r.source_text,
                "target_text": r.target_text,
                "tree": r.tree_sexpr,
                "fingerprints": [f"{fp:016x}" for fp in r.profile.per_node],
            }
            for r in db.records
        ],
        "postings": {
            f"{fp:016x}": db.inverted[fp] for fp in sorted(db.inverted)
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")
