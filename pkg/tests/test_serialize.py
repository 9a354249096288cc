import json
from fractions import Fraction

import pytest

from distsketch import (
    Rng,
    build_cdg_sketches,
    build_density_net,
    build_gd_sketches,
    build_slack3_sketches,
    build_tz_sketches,
)
from distsketch.sketchio import (
    SketchDecodeError,
    from_bytes,
    from_json_obj,
    load,
    save,
    to_bytes,
    to_json_obj,
)


@pytest.fixture(scope="module")
def sketch_sets(request):
    er32 = request.getfixturevalue("er32")
    tz, _ = build_tz_sketches(er32, 2, Rng(1))
    net = build_density_net(er32, Fraction(1, 4), Rng(2))
    s3, _ = build_slack3_sketches(er32, net)
    cdg, _ = build_cdg_sketches(er32, Fraction(1, 4), 2, Rng(3))
    gd, _ = build_gd_sketches(er32, Rng(4))
    return {"tz": tz, "slack3": s3, "cdg": cdg, "gd": gd}


@pytest.mark.parametrize("scheme", ["tz", "slack3", "cdg", "gd"])
def test_binary_round_trip(sketch_sets, scheme):
    sketches = sketch_sets[scheme]
    blob = to_bytes(scheme, len(sketches), sketches)
    got_scheme, n, got = from_bytes(blob)
    assert got_scheme == scheme
    assert n == len(sketches)
    assert got == sketches


@pytest.mark.parametrize("scheme", ["tz", "slack3", "cdg", "gd"])
def test_json_round_trip(sketch_sets, scheme):
    sketches = sketch_sets[scheme]
    doc = json.loads(json.dumps(to_json_obj(scheme, len(sketches), sketches)))
    got_scheme, n, got = from_json_obj(doc)
    assert got_scheme == scheme
    assert got == sketches


def test_binary_encoding_is_deterministic(sketch_sets):
    one = to_bytes("tz", len(sketch_sets["tz"]), sketch_sets["tz"])
    two = to_bytes("tz", len(sketch_sets["tz"]), sketch_sets["tz"])
    assert one == two


def test_save_load_by_extension(tmp_path, sketch_sets):
    tz = sketch_sets["tz"]
    bin_path = tmp_path / "s.dsk"
    json_path = tmp_path / "s.json"
    save(bin_path, "tz", len(tz), tz)
    save(json_path, "tz", len(tz), tz)
    assert load(bin_path) == ("tz", len(tz), tz)
    assert load(json_path) == ("tz", len(tz), tz)


def test_truncated_binary_rejected(sketch_sets):
    blob = to_bytes("tz", len(sketch_sets["tz"]), sketch_sets["tz"])
    with pytest.raises(SketchDecodeError):
        from_bytes(blob[: len(blob) // 2])


def test_trailing_bytes_rejected(sketch_sets):
    blob = to_bytes("tz", len(sketch_sets["tz"]), sketch_sets["tz"])
    with pytest.raises(SketchDecodeError, match="trailing"):
        from_bytes(blob + b"\x00")


def test_garbage_file_rejected(tmp_path):
    p = tmp_path / "junk.dsk"
    p.write_bytes(b"not a sketch at all")
    with pytest.raises(SketchDecodeError):
        load(p)


def test_malformed_json_rejected():
    with pytest.raises(SketchDecodeError):
        from_json_obj({"format": "distsketch", "version": 1, "scheme": "tz"})
