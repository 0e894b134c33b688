import io as pyio
import json

import numpy as np
import pytest

from framecache import (
    CachePolicyConfig,
    QualityScores,
    RunConfig,
    oracle_recompute,
    parse_stream,
    read_snapshot,
    read_trace,
    run_stream,
    write_snapshot,
    write_stream,
    write_trace,
)
from framecache.io import FrameRecord, FrameStream, Raster, dumps_canonical
from framecache.errors import DimensionMismatch, ParseError, SchemaViolation, SinkError
from framecache.synth import generate_synthetic

from conftest import cache_with

HEADER = '{"version":"fcs/1","d_a":2,"d_p":2}'
RECORD = '{"index":0,"frame_id":"a","appearance":[1,0],"pose":[0,1],"scores":{"clip":0.5,"musiq":0.5}}'


def parse_text(*lines):
    return parse_stream(pyio.StringIO("\n".join(lines)))


# --- canonical serialization -----------------------------------------------------

def test_canonical_sorts_keys_and_renders_17g():
    out = dumps_canonical({"b": 0.1, "a": 1, "c": [True, None, "x"]})
    assert out == '{"a":1,"b":0.10000000000000001,"c":[true,null,"x"]}'


def test_canonical_floats_roundtrip_exactly():
    values = [0.1, 1.0 / 3.0, 2.0**-53, 1e300, 1e-300, -0.0, 0.1 + 0.2]
    for v in values:
        assert float(json.loads(dumps_canonical(v))) == v


def test_canonical_rejects_nan():
    with pytest.raises(SinkError):
        dumps_canonical(float("nan"))


def test_canonical_rejects_unknown_types():
    with pytest.raises(SinkError):
        dumps_canonical(object())


# --- stream parsing ----------------------------------------------------------------

def test_parse_minimal_stream():
    stream = parse_text(HEADER, RECORD)
    assert len(stream) == 1
    assert stream.d_a == 2
    assert stream.records[0].frame_id == "a"
    assert stream.records[0].scores == QualityScores(0.5, 0.5)


def test_parse_empty_input():
    with pytest.raises(ParseError):
        parse_text()


def test_parse_bad_json():
    with pytest.raises(ParseError) as exc:
        parse_text(HEADER, "{nope")
    assert exc.value.line == 2


def test_parse_wrong_version():
    with pytest.raises(SchemaViolation):
        parse_text('{"version":"fcs/9","d_a":2,"d_p":2}')


def test_parse_unknown_header_key():
    with pytest.raises(SchemaViolation) as exc:
        parse_text('{"version":"fcs/1","d_a":2,"d_p":2,"speed":9}')
    assert exc.value.field == "speed"


def test_parse_header_meta_allowed():
    stream = parse_text('{"version":"fcs/1","d_a":2,"d_p":2,"meta":{"source":"test"}}', RECORD)
    assert stream.meta == {"source": "test"}


def test_parse_unknown_record_key():
    bad = RECORD[:-1] + ',"extra":1}'
    with pytest.raises(SchemaViolation) as exc:
        parse_text(HEADER, bad)
    assert exc.value.field == "extra"


def test_parse_appearance_dim_mismatch():
    bad = '{"index":0,"frame_id":"a","appearance":[1,0,0],"pose":[0,1],"scores":{"clip":0.5,"musiq":0.5}}'
    with pytest.raises(DimensionMismatch):
        parse_text(HEADER, bad)


def test_parse_missing_scores_and_raster():
    bad = '{"index":0,"frame_id":"a","appearance":[1,0],"pose":[0,1]}'
    with pytest.raises(SchemaViolation) as exc:
        parse_text(HEADER, bad)
    assert exc.value.field == "scores"


def test_parse_noncontiguous_index():
    bad = RECORD.replace('"index":0', '"index":1')
    with pytest.raises(SchemaViolation):
        parse_text(HEADER, bad)


def test_parse_score_out_of_range():
    bad = RECORD.replace('"musiq":0.5', '"musiq":1.5')
    with pytest.raises(SchemaViolation):
        parse_text(HEADER, bad)


def test_parse_non_finite_component():
    bad = RECORD.replace("[1,0]", "[1,1e999]")
    with pytest.raises(SchemaViolation):
        parse_text(HEADER, bad)


def test_parse_raster_record():
    line = (
        '{"index":0,"frame_id":"a","appearance":[1,0],"pose":[0,1],'
        '"raster":{"w":2,"h":2,"data":[0,1,1,0]}}'
    )
    stream = parse_text(HEADER, line)
    raster = stream.records[0].raster
    assert raster.width == 2 and raster.height == 2
    assert raster.data.tolist() == [[0.0, 1.0], [1.0, 0.0]]


def test_parse_raster_size_mismatch():
    line = (
        '{"index":0,"frame_id":"a","appearance":[1,0],"pose":[0,1],'
        '"raster":{"w":2,"h":2,"data":[0,1,1]}}'
    )
    with pytest.raises(DimensionMismatch):
        parse_text(HEADER, line)


def test_parse_raster_intensity_range():
    line = (
        '{"index":0,"frame_id":"a","appearance":[1,0],"pose":[0,1],'
        '"raster":{"w":2,"h":2,"data":[0,1,2,0]}}'
    )
    with pytest.raises(SchemaViolation):
        parse_text(HEADER, line)


def test_parse_blank_line_rejected():
    with pytest.raises(ParseError):
        parse_text(HEADER, "", RECORD)


# --- round trips ---------------------------------------------------------------------

def test_stream_roundtrip_structural_equality():
    stream = generate_synthetic(seed=17, mode="clustered", n=24, d_a=5, d_p=3)
    buf = pyio.StringIO()
    write_stream(stream, buf)
    again = parse_stream(pyio.StringIO(buf.getvalue()))
    assert again == stream


def test_stream_roundtrip_with_raster_and_meta():
    raster = Raster(width=2, height=2, data=np.array([0.0, 0.25, 0.5, 1.0]))
    rec = FrameRecord(index=0, frame_id="r", appearance=np.array([0.1 + 0.2, 1e-300]),
                      pose=np.array([1.0, -0.0]), raster=raster)
    stream = FrameStream(version="fcs/1", d_a=2, d_p=2, records=[rec], meta={"k": "v"})
    buf = pyio.StringIO()
    write_stream(stream, buf)
    again = parse_stream(pyio.StringIO(buf.getvalue()))
    assert again == stream
    assert again.records[0].appearance[0] == 0.1 + 0.2


def test_write_stream_bytes_deterministic(tmp_path):
    stream = generate_synthetic(seed=4, mode="drift", n=16, d_a=4, d_p=4)
    p1, p2 = tmp_path / "a.fcs", tmp_path / "b.fcs"
    write_stream(stream, p1)
    write_stream(stream, p2)
    assert p1.read_bytes() == p2.read_bytes()


# --- traces ----------------------------------------------------------------------------

def test_write_trace_empty():
    buf = pyio.StringIO()
    write_trace([], buf)
    assert buf.getvalue() == ""


def test_write_trace_single_init(three_record_replace_stream):
    events = run_stream(three_record_replace_stream, RunConfig(cache=CachePolicyConfig(capacity=2), window=2))
    buf = pyio.StringIO()
    write_trace(events[:1], buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 1
    obj = json.loads(lines[0])
    assert obj["kind"] == "Init"
    assert obj["payload"]["version"] == "fct/1"


def test_trace_read_write_roundtrip(three_record_replace_stream):
    events = run_stream(three_record_replace_stream, RunConfig(cache=CachePolicyConfig(capacity=2), window=2))
    buf = pyio.StringIO()
    write_trace(events, buf)
    again = read_trace(pyio.StringIO(buf.getvalue()))
    buf2 = pyio.StringIO()
    write_trace(again, buf2)
    assert buf.getvalue() == buf2.getvalue()


# --- snapshots ----------------------------------------------------------------------------

def test_snapshot_roundtrip_recomputes_matrix():
    cache = cache_with([[1, 0, 0], [0, 1, 0], [1, 1, 0]], capacity=5, theta=0.7)
    buf = pyio.StringIO()
    write_snapshot(cache, buf)
    restored = read_snapshot(pyio.StringIO(buf.getvalue()))
    assert restored.capacity == 5
    assert restored.config.redundancy_threshold == 0.7
    assert [e.frame_id for e in restored.entries] == [e.frame_id for e in cache.entries]
    sim, row, _ = oracle_recompute(restored)
    np.testing.assert_allclose(restored.sim_matrix, sim, atol=1e-12)
    np.testing.assert_allclose(restored.row_sums, row, atol=1e-12)
    np.testing.assert_allclose(restored.sim_matrix, cache.sim_matrix, atol=1e-12)


def test_snapshot_requires_entries():
    with pytest.raises(SchemaViolation):
        read_snapshot(pyio.StringIO('{"version":"fc-snapshot/1","capacity":4,"entries":[]}'))
