import dataclasses
import json

import pytest

from maasslab import density, ingest
from maasslab.errors import (CacheParseError, InvalidInputError,
                             RemoteUnavailableError)
from maasslab.ingest import FIXTURE_MANIFEST, CoeffRecord


def test_tempered_fixture_all_within_bound(tmp_path):
    rec = ingest.fetch("fixture-tempered-1", coverage=10 ** 4, cache_dir=tmp_path)
    assert rec.source == "fixture"
    assert all(abs(a) <= 2.0 for _, a in rec.coefficients)


def test_mixed_fixture_matches_manifest(tmp_path):
    rec = ingest.fetch("fixture-mixed-1", cache_dir=tmp_path)
    big = sorted(p for p, a in rec.coefficients if abs(a) > 2.0)
    assert big == sorted(FIXTURE_MANIFEST["fixture-mixed-1"]["nontempered"])
    assert len(big) == 3


def test_fixture_respects_envelope(tmp_path):
    for label in FIXTURE_MANIFEST:
        rec = ingest.fetch(label, cache_dir=tmp_path)
        findings = ingest.validate(rec)
        assert not [f for f in findings if f.severity == "error"]


def test_fixture_omits_ramified_primes(tmp_path):
    rec = ingest.fetch("fixture-mixed-1", cache_dir=tmp_path)  # level 6
    ps = {p for p, _ in rec.coefficients}
    assert 2 not in ps and 3 not in ps and 5 in ps


def test_cache_roundtrip_identical(tmp_path):
    rec = ingest.generate_fixture("fixture-tempered-2")
    path = ingest.write_cache(rec, tmp_path)
    first = path.read_bytes()
    again = ingest.read_cache("fixture-tempered-2", tmp_path)
    assert again == rec
    ingest.write_cache(again, tmp_path)
    assert path.read_bytes() == first


def test_cache_write_is_atomic(tmp_path):
    rec = ingest.generate_fixture("fixture-tempered-1")
    ingest.write_cache(rec, tmp_path)
    assert [p.suffix for p in tmp_path.iterdir()] == [".json"]


def test_repeated_fetch_without_network(tmp_path):
    a = ingest.fetch("fixture-mixed-2", cache_dir=tmp_path)
    b = ingest.fetch("fixture-mixed-2", cache_dir=tmp_path)
    assert a == b
    assert b.source == "fixture"


def test_unknown_label_without_endpoint(tmp_path, monkeypatch):
    monkeypatch.delenv(ingest.ENDPOINT_ENV, raising=False)
    with pytest.raises(RemoteUnavailableError):
        ingest.fetch("no-such-label", cache_dir=tmp_path)


def test_unknown_label_falls_back_to_cache(tmp_path, monkeypatch):
    monkeypatch.delenv(ingest.ENDPOINT_ENV, raising=False)
    rec = ingest.generate_fixture("fixture-tempered-1")
    cached = dataclasses.replace(rec, label="remote-form-7", source="remote")
    ingest.write_cache(cached, tmp_path)
    got = ingest.fetch("remote-form-7", cache_dir=tmp_path)
    assert got == cached


def test_validate_flags_envelope_violation():
    rec = CoeffRecord(label="bad", level=1, spectral_parameter=1.0,
                      coefficients=((2, 2.1), (3, 0.5), (5, 1.0)),
                      fetched_at="x", source="fixture")
    findings = ingest.validate(rec)
    errors = [f for f in findings if f.severity == "error"]
    assert len(errors) == 1 and errors[0].p == 2 and errors[0].kind == "envelope"


def test_validate_flags_coverage_gap():
    rec = CoeffRecord(label="gappy", level=1, spectral_parameter=1.0,
                      coefficients=((2, 0.1), (5, 0.2), (7, 0.3)),
                      fetched_at="x", source="fixture")
    findings = ingest.validate(rec)
    gaps = [f for f in findings if f.kind == "gap"]
    assert [f.p for f in gaps] == [3]


def test_validate_flags_ramified_entries():
    rec = CoeffRecord(label="ram", level=6, spectral_parameter=1.0,
                      coefficients=((2, 0.5), (5, 0.2), (7, 0.1)),
                      fetched_at="x", source="fixture")
    findings = ingest.validate(rec)
    assert any(f.kind == "ramified" and f.p == 2 for f in findings)


def test_schema_mismatch_reports_field(tmp_path):
    rec = ingest.generate_fixture("fixture-tempered-1")
    path = ingest.write_cache(rec, tmp_path)
    doc = json.loads(path.read_text())
    doc["level"] = "five"
    path.write_text(json.dumps(doc))
    with pytest.raises(CacheParseError) as exc:
        ingest.read_cache("fixture-tempered-1", tmp_path)
    assert exc.value.field == "level"


def test_schema_rejects_unordered_primes(tmp_path):
    rec = ingest.generate_fixture("fixture-tempered-1")
    path = ingest.write_cache(rec, tmp_path)
    doc = json.loads(path.read_text())
    doc["coefficients"] = [[5, 0.1], [3, 0.2]]
    path.write_text(json.dumps(doc))
    with pytest.raises(CacheParseError):
        ingest.read_cache("fixture-tempered-1", tmp_path)


def test_scan_identical_from_fixture_and_cached_paths(tmp_path, monkeypatch):
    monkeypatch.delenv(ingest.ENDPOINT_ENV, raising=False)
    recs = [ingest.fetch(lab, cache_dir=tmp_path)
            for lab in ("fixture-mixed-1", "fixture-mixed-2")]
    fam_direct = density.FormFamily([r.to_form_meta() for r in recs])
    rep_direct = density.exceptional_scan(fam_direct, 10 ** 4)

    relabeled = [dataclasses.replace(r, label=f"was-remote-{i}", source="remote")
                 for i, r in enumerate(recs)]
    for r in relabeled:
        ingest.write_cache(r, tmp_path)
    cached = [ingest.fetch(f"was-remote-{i}", cache_dir=tmp_path)
              for i in range(2)]
    fam_cached = density.FormFamily([r.to_form_meta() for r in cached])
    rep_cached = density.exceptional_scan(fam_cached, 10 ** 4)

    assert rep_direct.exceptional_primes == rep_cached.exceptional_primes
    assert rep_direct.running_mean_U == rep_cached.running_mean_U


def test_fixture_generation_deterministic():
    a = ingest.generate_fixture("fixture-mixed-1")
    b = ingest.generate_fixture("fixture-mixed-1")
    assert a == b


def test_fetch_rejects_bad_coverage(tmp_path):
    with pytest.raises(InvalidInputError):
        ingest.fetch("fixture-tempered-1", coverage=1, cache_dir=tmp_path)


def test_record_to_form_meta(tmp_path):
    rec = ingest.fetch("fixture-mixed-1", cache_dir=tmp_path)
    meta = rec.to_form_meta()
    assert meta.level == 6
    assert meta.coefficients[11] > 2.0
