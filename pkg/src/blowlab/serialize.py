"""Canonical JSON forms and the on-disk result cache.

Every value the lab persists or reports is encoded through one fixed,
deterministic JSON dialect:

* rationals are strings ("-3/4", "7");
* a polynomial is {"symbols": [names], "terms": {"e1 e2 ...": coeff}} with
  one space-joined exponent vector per active symbol tuple;
* a rational function is {"num": poly, "den": poly}, already reduced;
* a graded series is {"prefix": scalar, "coeffs": {"k": scalar}, "trunc": n},
  the monomial of entry k being q^(prefix + k/4);
* a field element is a list of {"osc", "vir", "charge", "rat", "irr"} records.

Floats are rejected outright.  `canonical_dumps` sorts keys and strips
whitespace, so equal values always produce identical bytes; the cache keys
entries by the sha256 of their canonical key object and self-checks payloads
against a stored digest.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path

from ._scalar import Q, is_rational, q_from_str
from .blowup import BlowupFrame, l_k_product
from .nekrasov import nekrasov_Z
from .ope import FieldExpr, Root2
from .rational import Poly, RationalFunction as RF
from .series import GradedSeries
from .verma import GramMatrix, LevelBasis, block, gram

__all__ = [
    "BASIS_ORDER_VERSION",
    "Cache",
    "cache_from_env",
    "cached_block",
    "cached_gram",
    "cached_l_k",
    "cached_nekrasov_z",
    "canonical_dumps",
    "field_from_json",
    "field_to_json",
    "gram_from_json",
    "gram_to_json",
    "poly_from_json",
    "poly_to_json",
    "rf_from_json",
    "rf_to_json",
    "scalar_from_json",
    "scalar_to_json",
    "series_from_json",
    "series_to_json",
]

# Bump if the level-basis enumeration order ever changes; cached Gram and
# block entries are only valid against the ordering they were written with.
BASIS_ORDER_VERSION = "revlex-1"

CACHE_ENV_VAR = "BLOWLAB_CACHE_DIR"


# ---------------------------------------------------------------------------
# scalar encodings


def _no_floats(obj) -> None:
    if isinstance(obj, float):
        raise TypeError("floats are not serializable here; use exact rationals")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _no_floats(k)
            _no_floats(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _no_floats(v)


def canonical_dumps(obj) -> str:
    _no_floats(obj)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def poly_to_json(p: Poly) -> dict:
    terms = {}
    for exps in sorted(p.terms):
        terms[" ".join(str(e) for e in exps)] = str(p.terms[exps])
    return {"symbols": list(p.symbols), "terms": terms}


def poly_from_json(obj: dict) -> Poly:
    terms = {
        tuple(int(x) for x in key.split()): q_from_str(val)
        for key, val in obj["terms"].items()
    }
    return Poly(tuple(obj["symbols"]), terms)


def rf_to_json(r: RF) -> dict:
    return {"num": poly_to_json(r.num), "den": poly_to_json(r.den)}


def rf_from_json(obj: dict) -> RF:
    return RF(poly_from_json(obj["num"]), poly_from_json(obj["den"]))


def scalar_to_json(x):
    """Encode Q | RationalFunction | Root2; constants collapse to strings."""
    if isinstance(x, Root2):
        return {"rat": scalar_to_json(x.rat), "irr": scalar_to_json(x.irr)}
    if isinstance(x, RF):
        if x.is_constant():
            return str(x.as_constant())
        return rf_to_json(x)
    if is_rational(x) or isinstance(x, int):
        return str(Q(x))
    raise TypeError(f"no canonical form for {type(x).__name__}")


def scalar_from_json(obj):
    if isinstance(obj, str):
        return q_from_str(obj)
    if "rat" in obj:
        def _part(o):
            v = scalar_from_json(o)
            return v if isinstance(v, RF) else RF.constant(v)
        return Root2(_part(obj["rat"]), _part(obj["irr"]))
    return rf_from_json(obj)


# ---------------------------------------------------------------------------
# composite encodings


def series_to_json(s: GradedSeries) -> dict:
    return {
        "prefix": scalar_to_json(s.prefix),
        "coeffs": {str(k): scalar_to_json(v) for k, v in sorted(s.coeffs.items())},
        "trunc": s.trunc,
    }


def series_from_json(obj: dict) -> GradedSeries:
    prefix = scalar_from_json(obj["prefix"])
    coeffs = {int(k): scalar_from_json(v) for k, v in obj["coeffs"].items()}
    return GradedSeries(prefix, coeffs, obj["trunc"])


def field_to_json(f: FieldExpr) -> list:
    out = []
    for (osc, vir, s), coeff in f.terms():
        out.append(
            {
                "osc": list(osc),
                "vir": list(vir),
                "charge": s,
                "rat": scalar_to_json(coeff.rat),
                "irr": scalar_to_json(coeff.irr),
            }
        )
    return out


def field_from_json(obj: list) -> FieldExpr:
    acc = FieldExpr.zero()
    for rec in obj:
        def _part(o):
            v = scalar_from_json(o)
            return v if isinstance(v, RF) else RF.constant(v)
        coeff = Root2(_part(rec["rat"]), _part(rec["irr"]))
        acc = acc + FieldExpr.term(
            coeff, osc=tuple(rec["osc"]), vir=tuple(rec["vir"]), s=rec["charge"]
        )
    return acc


def gram_to_json(g: GramMatrix) -> dict:
    return {
        "level": g.level,
        "basis_order": BASIS_ORDER_VERSION,
        "basis": [list(p) for p in g.basis.partitions],
        "entries": [[scalar_to_json(e) for e in row] for row in g.entries],
    }


def gram_from_json(obj: dict) -> GramMatrix:
    if obj["basis_order"] != BASIS_ORDER_VERSION:
        raise ValueError(
            f"cached basis order {obj['basis_order']!r} does not match "
            f"{BASIS_ORDER_VERSION!r}"
        )
    basis = LevelBasis.at_level(obj["level"])
    stored = [tuple(p) for p in obj["basis"]]
    if stored != list(basis.partitions):
        raise ValueError("cached basis does not match the current enumeration")
    entries = tuple(
        tuple(_as_rf_value(scalar_from_json(e)) for e in row) for row in obj["entries"]
    )
    return GramMatrix(obj["level"], basis, entries)


def _as_rf_value(v):
    return v if isinstance(v, RF) else RF.constant(v)


# ---------------------------------------------------------------------------
# the cache


class Cache:
    """sha256-keyed directory of canonical JSON payloads.

    Concurrent readers are fine; writers to the same key serialize on a
    per-key lock.  Hit/miss counters cover the life of this object, not the
    directory.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self._locks: dict = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, digest: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(digest)
            if lock is None:
                lock = self._locks[digest] = threading.Lock()
            return lock

    @staticmethod
    def _digest(text: str) -> str:
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def _path_for_key(self, key: dict) -> Path:
        return self.root / (self._digest(canonical_dumps(key))[:24] + ".json")

    def _load_checked(self, path: Path):
        """Parsed entry, or None when missing; raises ValueError when corrupt."""
        try:
            raw = path.read_text()
        except FileNotFoundError:
            return None
        try:
            entry = json.loads(raw)
            payload = entry["payload"]
            stored = entry["digest"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"unreadable cache entry {path.name}") from exc
        if self._digest(canonical_dumps(payload)) != stored:
            raise ValueError(f"digest mismatch in cache entry {path.name}")
        return entry

    def get_or_compute(self, key: dict, compute, encode, decode):
        path = self._path_for_key(key)
        with self._lock_for(path.name):
            try:
                entry = self._load_checked(path)
            except ValueError:
                entry = None  # self-heal: recompute over the corrupt file
            if entry is not None:
                self.hits += 1
                return decode(entry["payload"])
            value = compute()
            payload = encode(value)
            self._write(path, key, payload)
            self.misses += 1
            return value

    def _write(self, path: Path, key: dict, payload) -> None:
        entry = {
            "key": key,
            "payload": payload,
            "digest": self._digest(canonical_dumps(payload)),
        }
        tmp = path.with_suffix(".tmp")
        tmp.write_text(canonical_dumps(entry))
        tmp.replace(path)

    def entry_paths(self) -> list:
        return sorted(self.root.glob("*.json"))

    def stats(self) -> dict:
        paths = self.entry_paths()
        return {"entries": len(paths), "bytes": sum(p.stat().st_size for p in paths)}

    def clear(self) -> int:
        paths = self.entry_paths()
        for p in paths:
            p.unlink()
        return len(paths)

    def verify(self, rng, sample_size: int = 3) -> dict:
        """Recompute up to sample_size random entries and compare payloads.

        Corrupt or mismatched entries are evicted and named in the result.
        """
        paths = self.entry_paths()
        picked = sorted(rng.sample(paths, min(sample_size, len(paths))))
        checked, corrupt, mismatched = [], [], []
        for path in picked:
            try:
                entry = self._load_checked(path)
            except ValueError:
                corrupt.append(path.name)
                path.unlink(missing_ok=True)
                continue
            if entry is None:
                continue
            key = entry["key"]
            recompute = _RECOMPUTERS.get(key.get("kind"))
            if recompute is None:
                corrupt.append(path.name)
                path.unlink(missing_ok=True)
                continue
            fresh = recompute(key)
            if canonical_dumps(fresh) != canonical_dumps(entry["payload"]):
                mismatched.append(path.name)
                path.unlink(missing_ok=True)
            else:
                checked.append(path.name)
        return {
            "ok": not corrupt and not mismatched,
            "checked": checked,
            "corrupt": corrupt,
            "mismatched": mismatched,
        }


def cache_from_env(flag_value: str | None = None) -> Cache | None:
    """Cache at the flag path, else at $BLOWLAB_CACHE_DIR, else nothing."""
    root = flag_value or os.environ.get(CACHE_ENV_VAR)
    return Cache(root) if root else None


# ---------------------------------------------------------------------------
# keyed artifacts: what the lab actually persists


def cached_gram(level: int, cache: Cache | None = None) -> GramMatrix:
    if cache is None:
        return gram(level)
    key = {"kind": "verma.gram", "level": level, "basis_order": BASIS_ORDER_VERSION}
    return cache.get_or_compute(
        key, lambda: gram(level), gram_to_json, gram_from_json
    )


def cached_block(n_max: int, cache: Cache | None = None) -> GradedSeries:
    if cache is None:
        return block(n_max)
    key = {"kind": "verma.block", "level": n_max, "basis_order": BASIS_ORDER_VERSION}
    return cache.get_or_compute(
        key, lambda: block(n_max), series_to_json, series_from_json
    )


def cached_nekrasov_z(rank: int, order: int, cache: Cache | None = None) -> GradedSeries:
    if cache is None:
        return nekrasov_Z(rank, order)
    key = {"kind": "nekrasov.Z", "rank": rank, "order": order}
    return cache.get_or_compute(
        key, lambda: nekrasov_Z(rank, order), series_to_json, series_from_json
    )


def cached_l_k(k: int, frame: BlowupFrame, cache: Cache | None = None) -> RF:
    if cache is None:
        return l_k_product(k, frame)
    key = {
        "kind": "blowup.l_k",
        "k": k,
        "point": {"P": scalar_to_json(frame.P), "b": scalar_to_json(frame.b)},
    }
    return cache.get_or_compute(
        key,
        lambda: l_k_product(k, frame),
        scalar_to_json,
        lambda obj: _as_rf_value(scalar_from_json(obj)),
    )


def _recompute_gram(key: dict):
    if key["basis_order"] != BASIS_ORDER_VERSION:
        raise ValueError("stale basis order")
    return gram_to_json(gram(key["level"]))


def _recompute_block(key: dict):
    if key["basis_order"] != BASIS_ORDER_VERSION:
        raise ValueError("stale basis order")
    return series_to_json(block(key["level"]))


def _recompute_nekrasov(key: dict):
    return series_to_json(nekrasov_Z(key["rank"], key["order"]))


def _recompute_l_k(key: dict):
    point = key["point"]
    frame = BlowupFrame(
        b=scalar_from_json(point["b"]), P=scalar_from_json(point["P"])
    )
    return scalar_to_json(l_k_product(key["k"], frame))


_RECOMPUTERS = {
    "verma.gram": _recompute_gram,
    "verma.block": _recompute_block,
    "nekrasov.Z": _recompute_nekrasov,
    "blowup.l_k": _recompute_l_k,
}
