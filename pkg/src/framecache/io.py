"""Stream (.fcs), trace (.fct), and cache-snapshot file formats.

Everything is line-delimited JSON. Output goes through a canonical
serializer: object keys sorted, floats rendered with 17 significant digits
(exact binary64 round-trip), so identical inputs always produce byte-identical
files. A stream file starts with a header line ``{"version","d_a","d_p"}``
(plus an optional free-form ``"meta"`` object for provenance); every following
line is one frame record. Unknown keys are rejected, not ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    ParseError,
    SchemaViolation,
    SinkError,
)
from .screen import QualityScores
from .vectors import validate_vector

STREAM_VERSION = "fcs/1"
TRACE_VERSION = "fct/1"
SNAPSHOT_VERSION = "fc-snapshot/1"

_HEADER_KEYS = {"version", "d_a", "d_p", "meta"}
_RECORD_KEYS = {"index", "frame_id", "appearance", "pose", "scores", "raster"}
_SCORE_KEYS = {"clip", "musiq"}
_RASTER_KEYS = {"w", "h", "data"}


# ---------------------------------------------------------------------------
# canonical JSON
# ---------------------------------------------------------------------------

def dumps_canonical(obj) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    parts: list[str] = []
    _canon(obj, parts)
    return "".join(parts)


def _canon(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            raise SinkError(f"cannot serialize non-finite float {x!r}")
        out.append(format(x, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        out.append("{")
        first = True
        for key in sorted(obj):
            if not isinstance(key, str):
                raise SinkError(f"object keys must be strings, got {key!r}")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _canon(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        first = True
        for item in list(obj):
            if not first:
                out.append(",")
            first = False
            _canon(item, out)
        out.append("]")
    else:
        raise SinkError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# stream model
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Raster:
    width: int
    height: int
    data: np.ndarray  # shape (height, width), intensities in [0, 1]

    def __post_init__(self):
        flat = np.asarray(self.data, dtype=np.float64).reshape(-1)
        if flat.size != self.width * self.height:
            raise DimensionMismatch(self.width * self.height, flat.size, "raster data")
        if not np.isfinite(flat).all():
            raise SchemaViolation(0, "raster.data", "non-finite intensity")
        if flat.size and (flat.min() < 0.0 or flat.max() > 1.0):
            raise SchemaViolation(0, "raster.data", "intensity outside [0, 1]")
        self.data = flat.reshape(self.height, self.width)

    def __eq__(self, other):
        if not isinstance(other, Raster):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.data, other.data)
        )


@dataclass(eq=False)
class FrameRecord:
    index: int
    frame_id: str
    appearance: np.ndarray
    pose: np.ndarray
    scores: Optional[QualityScores] = None
    raster: Optional[Raster] = None

    def __eq__(self, other):
        if not isinstance(other, FrameRecord):
            return NotImplemented
        return (
            self.index == other.index
            and self.frame_id == other.frame_id
            and np.array_equal(self.appearance, other.appearance)
            and np.array_equal(self.pose, other.pose)
            and self.scores == other.scores
            and self.raster == other.raster
        )


@dataclass(eq=False)
class FrameStream:
    version: str
    d_a: int
    d_p: int
    records: list
    meta: Optional[dict] = None

    def __post_init__(self):
        if self.d_a < 1 or self.d_p < 1:
            raise SchemaViolation(1, "d_a/d_p", "dimensions must be positive")
        for position, record in enumerate(self.records):
            if record.index != position:
                raise SchemaViolation(position + 2, "index", "record indices must be contiguous from 0")
            record.appearance = validate_vector(record.appearance, self.d_a, f"record {position} appearance")
            record.pose = validate_vector(record.pose, self.d_p, f"record {position} pose")
            if record.scores is None and record.raster is None:
                raise SchemaViolation(position + 2, "scores", "record needs scores or raster")

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other):
        if not isinstance(other, FrameStream):
            return NotImplemented
        return (
            self.version == other.version
            and self.d_a == other.d_a
            and self.d_p == other.d_p
            and self.meta == other.meta
            and self.records == other.records
        )


# ---------------------------------------------------------------------------
# stream parsing / writing
# ---------------------------------------------------------------------------

def _read_lines(source) -> list[str]:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    return text.splitlines()


def _load_obj(line: str, lineno: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(lineno, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ParseError(lineno, "each line must be a JSON object")
    return obj


def _require(obj: dict, key: str, lineno: int):
    if key not in obj:
        raise SchemaViolation(lineno, key, "missing")
    return obj[key]


def _reject_unknown(obj: dict, allowed: set, lineno: int) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaViolation(lineno, sorted(unknown)[0], "unknown key")


def _as_float(value, lineno: int, field_name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(lineno, field_name, "expected a number")
    return float(value)


def parse_stream(source) -> FrameStream:
    """Parse and validate a .fcs stream from a path, file object, or str path."""
    lines = _read_lines(source)
    if not lines:
        raise ParseError(1, "missing stream header")
    header = _load_obj(lines[0], 1)
    _reject_unknown(header, _HEADER_KEYS, 1)
    version = _require(header, "version", 1)
    if version != STREAM_VERSION:
        raise SchemaViolation(1, "version", f"expected {STREAM_VERSION!r}, got {version!r}")
    d_a = _require(header, "d_a", 1)
    d_p = _require(header, "d_p", 1)
    if not isinstance(d_a, int) or not isinstance(d_p, int) or d_a < 1 or d_p < 1:
        raise SchemaViolation(1, "d_a", "dimensions must be positive integers")
    meta = header.get("meta")
    if meta is not None and not isinstance(meta, dict):
        raise SchemaViolation(1, "meta", "must be an object")

    records = []
    for offset, line in enumerate(lines[1:]):
        lineno = offset + 2
        if not line.strip():
            raise ParseError(lineno, "blank line inside stream")
        obj = _load_obj(line, lineno)
        _reject_unknown(obj, _RECORD_KEYS, lineno)
        index = _require(obj, "index", lineno)
        if not isinstance(index, int) or index != offset:
            raise SchemaViolation(lineno, "index", f"expected contiguous index {offset}")
        frame_id = _require(obj, "frame_id", lineno)
        if not isinstance(frame_id, str):
            raise SchemaViolation(lineno, "frame_id", "expected a string")

        appearance = _parse_vector(_require(obj, "appearance", lineno), d_a, lineno, "appearance")
        pose = _parse_vector(_require(obj, "pose", lineno), d_p, lineno, "pose")

        scores = None
        if "scores" in obj:
            raw = obj["scores"]
            if not isinstance(raw, dict):
                raise SchemaViolation(lineno, "scores", "expected an object")
            _reject_unknown(raw, _SCORE_KEYS, lineno)
            clip = _as_float(_require(raw, "clip", lineno), lineno, "scores.clip")
            musiq = _as_float(_require(raw, "musiq", lineno), lineno, "scores.musiq")
            try:
                scores = QualityScores(q_clip=clip, q_musiq=musiq)
            except Exception as exc:
                raise SchemaViolation(lineno, "scores", str(exc)) from exc

        raster = None
        if "raster" in obj:
            raw = obj["raster"]
            if not isinstance(raw, dict):
                raise SchemaViolation(lineno, "raster", "expected an object")
            _reject_unknown(raw, _RASTER_KEYS, lineno)
            w = _require(raw, "w", lineno)
            h = _require(raw, "h", lineno)
            data = _require(raw, "data", lineno)
            if not isinstance(w, int) or not isinstance(h, int) or w < 1 or h < 1:
                raise SchemaViolation(lineno, "raster.w", "w and h must be positive integers")
            if not isinstance(data, list):
                raise SchemaViolation(lineno, "raster.data", "expected an array")
            values = [_as_float(v, lineno, "raster.data") for v in data]
            try:
                raster = Raster(width=w, height=h, data=np.array(values, dtype=np.float64))
            except DimensionMismatch:
                raise
            except SchemaViolation as exc:
                raise SchemaViolation(lineno, exc.field, "invalid raster") from exc

        if scores is None and raster is None:
            raise SchemaViolation(lineno, "scores", "record needs scores or raster")

        records.append(
            FrameRecord(
                index=index,
                frame_id=frame_id,
                appearance=appearance,
                pose=pose,
                scores=scores,
                raster=raster,
            )
        )

    return FrameStream(version=version, d_a=d_a, d_p=d_p, records=records, meta=meta)


def _parse_vector(raw, expected_dim: int, lineno: int, field_name: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise SchemaViolation(lineno, field_name, "expected an array of numbers")
    values = [_as_float(v, lineno, field_name) for v in raw]
    if len(values) != expected_dim:
        raise DimensionMismatch(expected_dim, len(values), f"line {lineno} {field_name}")
    arr = np.array(values, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise SchemaViolation(lineno, field_name, "non-finite component")
    return arr


def stream_to_lines(stream: FrameStream) -> list[str]:
    header = {"version": stream.version, "d_a": stream.d_a, "d_p": stream.d_p}
    if stream.meta is not None:
        header["meta"] = stream.meta
    lines = [dumps_canonical(header)]
    for rec in stream.records:
        obj = {
            "index": rec.index,
            "frame_id": rec.frame_id,
            "appearance": rec.appearance,
            "pose": rec.pose,
        }
        if rec.scores is not None:
            obj["scores"] = {"clip": rec.scores.q_clip, "musiq": rec.scores.q_musiq}
        if rec.raster is not None:
            obj["raster"] = {
                "w": rec.raster.width,
                "h": rec.raster.height,
                "data": rec.raster.data.reshape(-1),
            }
        lines.append(dumps_canonical(obj))
    return lines


def write_stream(stream: FrameStream, sink) -> None:
    """Write a .fcs file; byte-identical for equal streams."""
    _write_lines(stream_to_lines(stream), sink)


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

def trace_to_lines(events) -> list[str]:
    return [
        dumps_canonical({"index": e.index, "kind": e.kind, "payload": e.payload})
        for e in events
    ]


def write_trace(events, sink) -> None:
    """One canonical-JSON object per event; identical runs give identical bytes."""
    _write_lines(trace_to_lines(events), sink)


def read_trace(source) -> list:
    from .pipeline import TraceEvent  # local import to avoid a cycle

    events = []
    for lineno, line in enumerate(_read_lines(source), start=1):
        if not line.strip():
            raise ParseError(lineno, "blank line inside trace")
        obj = _load_obj(line, lineno)
        _reject_unknown(obj, {"index", "kind", "payload"}, lineno)
        events.append(
            TraceEvent(
                kind=_require(obj, "kind", lineno),
                index=_require(obj, "index", lineno),
                payload=_require(obj, "payload", lineno),
            )
        )
    return events


# ---------------------------------------------------------------------------
# cache snapshots
# ---------------------------------------------------------------------------

def write_snapshot(cache, sink) -> None:
    """Serialize slots, ids, and both feature vectors; S and r are derived state."""
    obj = {
        "version": SNAPSHOT_VERSION,
        "capacity": cache.capacity,
        "redundancy_threshold": cache.config.redundancy_threshold,
        "entries": [
            {
                "slot": e.slot,
                "frame_id": e.frame_id,
                "appearance": e.appearance,
                "pose": e.pose,
                "score": e.score,
                "admitted_at": e.admitted_at,
            }
            for e in cache.entries
        ],
    }
    _write_lines([dumps_canonical(obj)], sink)


def read_snapshot(source):
    """Rebuild a ReferenceCache from a snapshot, recomputing S and r from scratch."""
    from .cache import CacheEntry, CachePolicyConfig, ReferenceCache

    lines = _read_lines(source)
    if not lines:
        raise ParseError(1, "empty snapshot")
    obj = _load_obj(lines[0], 1)
    _reject_unknown(obj, {"version", "capacity", "redundancy_threshold", "entries"}, 1)
    if _require(obj, "version", 1) != SNAPSHOT_VERSION:
        raise SchemaViolation(1, "version", f"expected {SNAPSHOT_VERSION!r}")
    entries = _require(obj, "entries", 1)
    if not isinstance(entries, list) or not entries:
        raise SchemaViolation(1, "entries", "snapshot needs at least one entry")
    config = CachePolicyConfig(
        capacity=_require(obj, "capacity", 1),
        redundancy_threshold=_as_float(obj.get("redundancy_threshold", 1.0), 1, "redundancy_threshold"),
    )

    def to_entry(raw, position):
        if not isinstance(raw, dict):
            raise SchemaViolation(1, "entries", "entry must be an object")
        _reject_unknown(raw, {"slot", "frame_id", "appearance", "pose", "score", "admitted_at"}, 1)
        if raw.get("slot") != position:
            raise SchemaViolation(1, "slot", "entry slots must be contiguous from 0")
        return CacheEntry(
            slot=position,
            frame_id=_require(raw, "frame_id", 1),
            appearance=np.array(_require(raw, "appearance", 1), dtype=np.float64),
            pose=np.array(_require(raw, "pose", 1), dtype=np.float64),
            score=_as_float(_require(raw, "score", 1), 1, "score"),
            admitted_at=_require(raw, "admitted_at", 1),
        )

    cache = ReferenceCache(to_entry(entries[0], 0), config)
    for position, raw in enumerate(entries[1:], start=1):
        cache._append(to_entry(raw, position))
    return cache


def _write_lines(lines: list[str], sink) -> None:
    text = "".join(line + "\n" for line in lines)
    try:
        if isinstance(sink, (str, Path)):
            Path(sink).write_text(text, encoding="utf-8")
        else:
            sink.write(text)
    except OSError as exc:
        raise SinkError(str(exc)) from exc
