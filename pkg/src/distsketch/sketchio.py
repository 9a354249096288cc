"""Lossless sketch serialization: little-endian binary plus a JSON mirror.

Binary layout (all integers little-endian; ids/levels/counts are u32,
distances u64, rationals a u64 pair):

    header:  magic "DSKB" | version u16 | scheme u8 | pad u8 | n u32
    tz:      k u32, then per node: owner u32, k x (id u32, dist u64),
             count u32, count x (id u32, level u32, dist u64)
    slack3:  eps (num u64, den u64), then per node: owner u32,
             count u32, count x (id u32, dist u64), ids ascending
    cdg:     eps, k u32, then per node: owner u32, nearest u32,
             dist u64, embedded tz record body for the adopted label
    gd:      level count u32, then per level: eps, k u32, n embedded
             cdg record bodies (a length-prefixed record sequence)

The JSON mirror carries the same fields with rationals as [num, den]
pairs and sorted keys, so identical inputs serialize byte-identically
in both formats.
"""

from __future__ import annotations

import json
import struct
from fractions import Fraction
from pathlib import Path

from .sketches import CdgSketch, GdSketch, SlackSketch3, TzLabel

MAGIC = b"DSKB"
VERSION = 1
_SCHEMES = ("tz", "slack3", "cdg", "gd")


class SketchDecodeError(ValueError):
    """Corrupt or incompatible sketch payload."""


def _pack_u32(out: bytearray, *vals: int) -> None:
    out += struct.pack(f"<{len(vals)}I", *vals)


def _pack_u64(out: bytearray, *vals: int) -> None:
    out += struct.pack(f"<{len(vals)}Q", *vals)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def u32(self) -> int:
        return self._take("<I", 4)

    def u64(self) -> int:
        return self._take("<Q", 8)

    def _take(self, fmt: str, size: int) -> int:
        if self.pos + size > len(self.data):
            raise SketchDecodeError("truncated sketch payload")
        val = struct.unpack_from(fmt, self.data, self.pos)[0]
        self.pos += size
        return val

    def done(self) -> bool:
        return self.pos == len(self.data)


def _encode_tz_body(out: bytearray, label: TzLabel) -> None:
    _pack_u32(out, label.owner, label.k)
    for node, d in label.pivots:
        _pack_u32(out, node)
        _pack_u64(out, d)
    _pack_u32(out, len(label.bunch))
    for node in sorted(label.bunch):
        lv, d = label.bunch[node]
        _pack_u32(out, node, lv)
        _pack_u64(out, d)


def _decode_tz_body(r: _Reader) -> TzLabel:
    owner = r.u32()
    k = r.u32()
    if not 1 <= k <= 64:
        raise SketchDecodeError(f"implausible k={k}")
    pivots = tuple((r.u32(), r.u64()) for _ in range(k))
    count = r.u32()
    bunch: dict[int, tuple[int, int]] = {}
    for _ in range(count):
        node = r.u32()
        lv = r.u32()
        bunch[node] = (lv, r.u64())
    return TzLabel(owner, k, pivots, bunch)


def _encode_cdg_body(out: bytearray, c: CdgSketch) -> None:
    _pack_u32(out, c.owner, c.nearest)
    _pack_u64(out, c.nearest_dist)
    _encode_tz_body(out, c.net_label)


def _decode_cdg_body(r: _Reader) -> CdgSketch:
    owner = r.u32()
    nearest = r.u32()
    dist = r.u64()
    return CdgSketch(owner, nearest, dist, _decode_tz_body(r))


def _eps_pair(eps: Fraction) -> tuple[int, int]:
    return eps.numerator, eps.denominator


def to_bytes(scheme: str, n: int, sketches: dict) -> bytes:
    if scheme not in _SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    out = bytearray()
    out += struct.pack(
        "<4sHBBI", MAGIC, VERSION, _SCHEMES.index(scheme), 0, n
    )
    owners = sorted(sketches)
    if scheme == "tz":
        for u in owners:
            _encode_tz_body(out, sketches[u])
    elif scheme == "slack3":
        for u in owners:
            sk = sketches[u]
            _pack_u32(out, sk.owner, len(sk.table))
            for node in sorted(sk.table):
                _pack_u32(out, node)
                _pack_u64(out, sk.table[node])
    elif scheme == "cdg":
        for u in owners:
            _encode_cdg_body(out, sketches[u])
    else:  # gd
        first: GdSketch = sketches[owners[0]]
        _pack_u32(out, len(first.levels))
        for j, (eps, k, _) in enumerate(first.levels):
            _pack_u64(out, *_eps_pair(eps))
            _pack_u32(out, k)
            for u in owners:
                lv = sketches[u].levels[j]
                if (lv[0], lv[1]) != (eps, k):
                    raise ValueError("inconsistent gd level structure")
                _encode_cdg_body(out, lv[2])
    return bytes(out)


def from_bytes(data: bytes) -> tuple[str, int, dict]:
    if len(data) < 12 or data[:4] != MAGIC:
        raise SketchDecodeError("not a sketch file")
    magic, version, scheme_idx, _, n = struct.unpack_from("<4sHBBI", data, 0)
    if version != VERSION:
        raise SketchDecodeError(f"unsupported version {version}")
    if scheme_idx >= len(_SCHEMES):
        raise SketchDecodeError(f"unknown scheme id {scheme_idx}")
    scheme = _SCHEMES[scheme_idx]
    r = _Reader(data)
    r.pos = 12
    sketches: dict[int, object] = {}
    if scheme == "tz":
        for _ in range(n):
            label = _decode_tz_body(r)
            sketches[label.owner] = label
    elif scheme == "slack3":
        for _ in range(n):
            owner = r.u32()
            count = r.u32()
            table = {}
            for _ in range(count):
                node = r.u32()
                table[node] = r.u64()
            sketches[owner] = SlackSketch3(owner, table)
    elif scheme == "cdg":
        for _ in range(n):
            c = _decode_cdg_body(r)
            sketches[c.owner] = c
    else:
        levels = r.u32()
        per_level = []
        for _ in range(levels):
            num = r.u64()
            den = r.u64()
            k = r.u32()
            eps = Fraction(num, den)
            per_level.append(
                (eps, k, [_decode_cdg_body(r) for _ in range(n)])
            )
        for i in range(n):
            rows = tuple(
                (eps, k, cdgs[i]) for eps, k, cdgs in per_level
            )
            owner = rows[0][2].owner
            sketches[owner] = GdSketch(owner, rows)
    if not r.done():
        raise SketchDecodeError("trailing bytes in sketch file")
    if len(sketches) != n:
        raise SketchDecodeError("duplicate or missing owners")
    return scheme, n, sketches


# -- JSON mirror ---------------------------------------------------------------


def _tz_json(label: TzLabel) -> dict:
    return {
        "owner": label.owner,
        "k": label.k,
        "pivots": [[node, d] for node, d in label.pivots],
        "bunch": [
            [node, label.bunch[node][0], label.bunch[node][1]]
            for node in sorted(label.bunch)
        ],
    }


def _tz_from_json(o: dict) -> TzLabel:
    return TzLabel(
        o["owner"],
        o["k"],
        tuple((node, d) for node, d in o["pivots"]),
        {node: (lv, d) for node, lv, d in o["bunch"]},
    )


def _cdg_json(c: CdgSketch) -> dict:
    return {
        "owner": c.owner,
        "nearest": c.nearest,
        "nearest_dist": c.nearest_dist,
        "net_label": _tz_json(c.net_label),
    }


def _cdg_from_json(o: dict) -> CdgSketch:
    return CdgSketch(
        o["owner"], o["nearest"], o["nearest_dist"], _tz_from_json(o["net_label"])
    )


def to_json_obj(scheme: str, n: int, sketches: dict) -> dict:
    owners = sorted(sketches)
    if scheme == "tz":
        rows = [_tz_json(sketches[u]) for u in owners]
    elif scheme == "slack3":
        rows = [
            {
                "owner": u,
                "table": [[node, sketches[u].table[node]] for node in sorted(sketches[u].table)],
            }
            for u in owners
        ]
    elif scheme == "cdg":
        rows = [_cdg_json(sketches[u]) for u in owners]
    elif scheme == "gd":
        rows = [
            {
                "owner": u,
                "levels": [
                    {
                        "eps": list(_eps_pair(eps)),
                        "k": k,
                        "sketch": _cdg_json(c),
                    }
                    for eps, k, c in sketches[u].levels
                ],
            }
            for u in owners
        ]
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return {"format": "distsketch", "version": VERSION, "scheme": scheme, "n": n, "sketches": rows}


def from_json_obj(obj: dict) -> tuple[str, int, dict]:
    try:
        if obj.get("format") != "distsketch" or obj.get("version") != VERSION:
            raise SketchDecodeError("not a recognized sketch JSON document")
        scheme = obj["scheme"]
        n = obj["n"]
        rows = obj["sketches"]
        sketches: dict[int, object] = {}
        if scheme == "tz":
            for row in rows:
                sketches[row["owner"]] = _tz_from_json(row)
        elif scheme == "slack3":
            for row in rows:
                sketches[row["owner"]] = SlackSketch3(
                    row["owner"], {node: d for node, d in row["table"]}
                )
        elif scheme == "cdg":
            for row in rows:
                sketches[row["owner"]] = _cdg_from_json(row)
        elif scheme == "gd":
            for row in rows:
                sketches[row["owner"]] = GdSketch(
                    row["owner"],
                    tuple(
                        (Fraction(*lv["eps"]), lv["k"], _cdg_from_json(lv["sketch"]))
                        for lv in row["levels"]
                    ),
                )
        else:
            raise SketchDecodeError(f"unknown scheme {scheme!r}")
        if len(sketches) != n:
            raise SketchDecodeError("duplicate or missing owners")
        return scheme, n, sketches
    except (KeyError, TypeError) as exc:
        raise SketchDecodeError(f"malformed sketch JSON: {exc}") from exc


def save(path: str | Path, scheme: str, n: int, sketches: dict) -> None:
    """Write binary unless the path ends in .json."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.dumps(to_json_obj(scheme, n, sketches), sort_keys=True, indent=1)
        path.write_text(doc + "\n")
    else:
        path.write_bytes(to_bytes(scheme, n, sketches))


def load(path: str | Path) -> tuple[str, int, dict]:
    path = Path(path)
    data = path.read_bytes()
    if data[:4] == MAGIC:
        return from_bytes(data)
    try:
        return from_json_obj(json.loads(data.decode()))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SketchDecodeError(f"unreadable sketch file: {exc}") from exc
