import pytest
from hypothesis import given
from hypothesis import strategies as st

from emc4 import certio
from emc4.exact_lp import FarkasCertificate

ids = st.text(alphabet="abcT|._0123456789", min_size=1, max_size=12)


@given(
    st.integers(1, 10**30),
    st.dictionaries(ids, st.integers(0, 10**40), max_size=8),
    st.dictionaries(ids, st.integers(0, 10**6), max_size=4),
)
def test_certificate_roundtrip_is_byte_identical(den, rows, upper):
    cert = FarkasCertificate(den, rows, upper, "x")
    text = certio.dumps(certio.certificate_to_json(cert))
    back = certio.certificate_from_json(certio.loads(text))
    assert (back.denominator, back.rows, back.upper, back.name) == (den, rows, upper, "x")
    assert certio.dumps(certio.certificate_to_json(back)) == text


def _cert_text(**override):
    body = {"kind": "farkas", "name": "n", "denominator": 2, "rows": [["r1", 1]], "upper": [], "meta": {}}
    body.update(override)
    return certio.dumps(body)


def test_float_literal_rejected():
    text = _cert_text().replace('"denominator": 2', '"denominator": 2.0')
    with pytest.raises(certio.SchemaError, match="floating-point"):
        certio.loads(text)
    with pytest.raises(certio.SchemaError):
        certio.dumps({"a": 0.5})
    with pytest.raises(certio.SchemaError):
        certio.loads('{"a": NaN}')


def test_negative_numerator_names_location():
    with pytest.raises(certio.SchemaError, match=r"\$\.rows\[1\]"):
        certio.certificate_from_json(certio.loads(_cert_text(rows=[["a", 1], ["b", -3]])))


def test_schema_errors():
    bad = [
        _cert_text(kind="other"),
        _cert_text(denominator=0),
        _cert_text(rows=[["a", 1], ["a", 2]]),
        _cert_text(rows=[["a"]]),
        '{"kind": "farkas"}',
        "{not json",
    ]
    for text in bad:
        with pytest.raises(certio.SchemaError):
            certio.certificate_from_json(certio.loads(text))
    with pytest.raises(certio.SchemaError):
        certio.certificate_from_json(certio.loads(_cert_text()), "dual-cut")


def test_fraction_objects():
    assert certio.fraction_from(certio.fraction_json("-3/6")) == certio.fraction_from({"num": -1, "den": 2})
    with pytest.raises(certio.SchemaError):
        certio.fraction_from({"num": 1, "den": 0})


def _tree(root):
    certio.write_json(root / "a.json", {"x": 1})
    certio.write_json(root / "sub" / "b.json", {"y": [1, 2]})


def test_manifest_emit_and_verify(tmp_path):
    _tree(tmp_path)
    certio.emit_manifest(tmp_path)
    assert certio.verify_manifest(tmp_path) == (True, [])
    lines = (tmp_path / certio.MANIFEST).read_text().splitlines()
    assert [line.split("  ")[1] for line in lines] == ["a.json", "sub/b.json"]


def test_manifest_detects_single_byte_edit(tmp_path):
    _tree(tmp_path)
    certio.emit_manifest(tmp_path)
    p = tmp_path / "sub" / "b.json"
    data = bytearray(p.read_bytes())
    data[-3] ^= 1
    p.write_bytes(bytes(data))
    ok, problems = certio.verify_manifest(tmp_path)
    assert not ok and problems == ["altered: sub/b.json"]


def test_manifest_missing_and_unlisted(tmp_path):
    _tree(tmp_path)
    certio.emit_manifest(tmp_path)
    (tmp_path / "a.json").unlink()
    (tmp_path / "c.json").write_text("{}\n")
    ok, problems = certio.verify_manifest(tmp_path)
    assert not ok and problems == ["missing: a.json", "unlisted: c.json"]


def test_manifest_absent_or_empty(tmp_path):
    assert certio.verify_manifest(tmp_path) == (False, [f"missing {certio.MANIFEST}"])
    certio.emit_manifest(tmp_path)
    assert (tmp_path / certio.MANIFEST).read_text() == ""
    assert certio.verify_manifest(tmp_path) == (True, [])


def test_tagged_kind_checked(tmp_path):
    certio.write_json(tmp_path / "t.json", certio.tagged("report", {"a": 1}))
    assert certio.read_tagged(tmp_path / "t.json", "report")["a"] == 1
    with pytest.raises(certio.SchemaError):
        certio.read_tagged(tmp_path / "t.json", "farkas")
    with pytest.raises(certio.SchemaError):
        certio.tagged("nonsense", {})
