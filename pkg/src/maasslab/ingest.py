"""Client and cache for Maass-form coefficient data.

Records carry (level, spectral parameter, Hecke eigenvalues a_p at
unramified primes).  Built-in deterministic fixtures let every consumer
run without network access; remote fetches hit an endpoint configured
through the environment and fall back to the local cache when the
network is down.  Cache files are one JSON document per record, written
atomically (temp file + rename).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import zlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import satake, sieve
from .bounds import FormMeta
from .errors import CacheParseError, InvalidInputError, RemoteUnavailableError

SCHEMA_VERSION = 1
ENDPOINT_ENV = "MAASSLAB_ENDPOINT"
CACHE_DIR_ENV = "MAASSLAB_CACHE_DIR"
FIXTURE_TIMESTAMP = "2025-01-01T00:00:00Z"
DEFAULT_COVERAGE = 10 ** 4


@dataclass(frozen=True)
class Finding:
    severity: str           # "error" | "warning" | "info"
    kind: str
    p: int | None
    message: str


@dataclass(frozen=True)
class CoeffRecord:
    """One form's coefficient data: strictly increasing unramified primes."""

    label: str
    level: int
    spectral_parameter: float
    coefficients: tuple[tuple[int, float], ...]
    fetched_at: str
    source: str             # "remote" | "fixture"

    def coverage(self) -> int:
        return self.coefficients[-1][0] if self.coefficients else 0

    def as_mapping(self) -> dict[int, float]:
        return {p: a for p, a in self.coefficients}

    def to_form_meta(self) -> FormMeta:
        return FormMeta(level=self.level,
                        spectral_parameter=self.spectral_parameter,
                        coefficients=self.as_mapping(), label=self.label)

    def to_json_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "label": self.label,
            "level": self.level,
            "spectral_parameter": self.spectral_parameter,
            "coefficients": [[p, a] for p, a in self.coefficients],
            "fetched_at": self.fetched_at,
            "source": self.source,
        }


# label -> generation parameters; "nontempered" maps prime -> deviation nu
FIXTURE_MANIFEST = {
    "fixture-tempered-1": {
        "level": 5, "spectral_parameter": 2.13, "nontempered": {}},
    "fixture-tempered-2": {
        "level": 7, "spectral_parameter": 5.44, "nontempered": {}},
    "fixture-mixed-1": {
        "level": 6, "spectral_parameter": 9.53,
        "nontempered": {11: 0.09, 101: 0.1, 997: 0.0625}},
    "fixture-mixed-2": {
        "level": 10, "spectral_parameter": 4.77,
        "nontempered": {11: 0.05, 101: 7.0 / 64.0, 499: 0.08}},
}


def _fixture_seed(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def generate_fixture(label: str, coverage: int = DEFAULT_COVERAGE) -> CoeffRecord:
    """Deterministic synthetic record for a manifest label.

    Tempered eigenvalues are Sato-Tate draws seeded by the label; the
    manifest's non-tempered primes get p^nu + p^{-nu} instead.  Primes
    dividing the level are omitted (ramified).
    """
    if label not in FIXTURE_MANIFEST:
        raise InvalidInputError(f"unknown fixture label {label!r}")
    entry = FIXTURE_MANIFEST[label]
    level = entry["level"]
    ps = [int(p) for p in sieve.primes_upto(coverage) if level % int(p) != 0]
    rng = np.random.default_rng(_fixture_seed(label))
    thetas = satake.sato_tate_angles(rng, len(ps))
    coeffs = []
    for p, th in zip(ps, thetas.tolist()):
        nu = entry["nontempered"].get(p)
        if nu is not None:
            coeffs.append((p, p ** nu + p ** (-nu)))
        else:
            coeffs.append((p, 2.0 * math.cos(th)))
    return CoeffRecord(label=label, level=level,
                       spectral_parameter=entry["spectral_parameter"],
                       coefficients=tuple(coeffs),
                       fetched_at=FIXTURE_TIMESTAMP, source="fixture")


def validate(record: CoeffRecord, reference_primes=None) -> list[Finding]:
    """Findings for a record: envelope violations are errors, coverage
    gaps warnings, ramified-prime entries informational."""
    findings: list[Finding] = []
    prev = 0
    for p, a in record.coefficients:
        if p <= prev:
            findings.append(Finding("error", "ordering", p,
                                    f"primes not strictly increasing at {p}"))
        prev = p
        if record.level % p == 0:
            findings.append(Finding("info", "ramified", p,
                                    f"p = {p} divides the level; excluded from scans"))
            continue
        envelope, _ = satake.kim_sarnak_envelope(int(p))
        if abs(a) > envelope + 1e-12:
            findings.append(Finding(
                "error", "envelope", p,
                f"|a_p| = {abs(a)} exceeds the bound {envelope} at p = {p}"))
    coverage = record.coverage()
    if coverage:
        ref = (reference_primes if reference_primes is not None
               else sieve.primes_upto(coverage))
        have = {p for p, _ in record.coefficients}
        for p in ref.tolist() if hasattr(ref, "tolist") else ref:
            p = int(p)
            if record.level % p == 0:
                continue
            if p not in have:
                findings.append(Finding("warning", "gap", p,
                                        f"missing coefficient at p = {p}"))
    return findings


def _cache_dir(cache_dir: str | os.PathLike | None) -> Path:
    if cache_dir is not None:
        d = Path(cache_dir)
    else:
        d = Path(os.environ.get(
            CACHE_DIR_ENV, Path.home() / ".cache" / "maasslab"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _cache_path(label: str, cache_dir) -> Path:
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in label)
    return _cache_dir(cache_dir) / f"{safe}.json"


def write_cache(record: CoeffRecord, cache_dir=None) -> Path:
    """Atomic write: readers never observe a partial file."""
    path = _cache_path(record.label, cache_dir)
    payload = json.dumps(record.to_json_dict(), sort_keys=True, indent=2)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return path


def _record_from_json_dict(doc: dict) -> CoeffRecord:
    if not isinstance(doc, dict):
        raise CacheParseError("cache document is not an object", field=None)
    for key, typ in (("schema", int), ("label", str), ("level", int),
                     ("spectral_parameter", (int, float)),
                     ("coefficients", list), ("fetched_at", str)):
        if key not in doc:
            raise CacheParseError(f"missing field {key!r}", field=key)
        if not isinstance(doc[key], typ):
            raise CacheParseError(
                f"field {key!r} has type {type(doc[key]).__name__}", field=key)
    if doc["schema"] != SCHEMA_VERSION:
        raise CacheParseError(
            f"schema version {doc['schema']} unsupported", field="schema")
    coeffs = []
    prev = 0
    for item in doc["coefficients"]:
        if (not isinstance(item, list) or len(item) != 2
                or not isinstance(item[0], int)
                or not isinstance(item[1], (int, float))):
            raise CacheParseError(
                f"bad coefficient entry {item!r}", field="coefficients")
        p, a = int(item[0]), float(item[1])
        if p <= prev:
            raise CacheParseError(
                f"primes not strictly increasing at {p}", field="coefficients")
        prev = p
        coeffs.append((p, a))
    return CoeffRecord(
        label=doc["label"], level=doc["level"],
        spectral_parameter=float(doc["spectral_parameter"]),
        coefficients=tuple(coeffs), fetched_at=doc["fetched_at"],
        source=doc.get("source", "remote"))


def read_cache(label: str, cache_dir=None) -> CoeffRecord | None:
    path = _cache_path(label, cache_dir)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CacheParseError(f"cache file is not valid JSON: {exc}") from exc
    return _record_from_json_dict(doc)


def _fetch_remote(label: str, coverage: int, endpoint: str) -> CoeffRecord:
    import requests

    from datetime import datetime, timezone
    resp = requests.get(endpoint, params={"label": label, "coverage": coverage},
                        timeout=30)
    resp.raise_for_status()
    doc = resp.json()
    doc.setdefault("fetched_at",
                   datetime.now(timezone.utc).isoformat(timespec="seconds"))
    doc.setdefault("source", "remote")
    doc.setdefault("schema", SCHEMA_VERSION)
    return replace(_record_from_json_dict(doc), source="remote")


def fetch(label: str, coverage: int = DEFAULT_COVERAGE, cache_dir=None,
          endpoint: str | None = None) -> CoeffRecord:
    """Return a validated record for a label, refreshing the cache.

    Fixture labels are generated locally.  Other labels need an endpoint
    (argument or environment); on network failure the cached copy is
    returned when present, else RemoteUnavailableError is raised.
    """
    if coverage < 2:
        raise InvalidInputError(f"coverage must be >= 2, got {coverage}")
    if label in FIXTURE_MANIFEST:
        record = generate_fixture(label, coverage)
        write_cache(record, cache_dir)
        return record
    endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
    if endpoint:
        try:
            record = _fetch_remote(label, coverage, endpoint)
        except Exception:
            cached = read_cache(label, cache_dir)
            if cached is not None:
                return cached
            raise RemoteUnavailableError(
                f"endpoint {endpoint!r} unreachable and no cached record "
                f"for {label!r}")
        write_cache(record, cache_dir)
        return record
    cached = read_cache(label, cache_dir)
    if cached is not None:
        return cached
    raise RemoteUnavailableError(
        f"no endpoint configured ({ENDPOINT_ENV} unset) and no cached "
        f"record for {label!r}")
