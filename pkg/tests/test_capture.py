import json

import pytest

from abdscope.capture import (
    MutationEvent,
    PageCapture,
    assemble_triple,
    load_capture,
    normalize_text,
    save_capture,
)
from abdscope.errors import (
    CaptureFormatError,
    CaptureInvariantError,
    SiteMismatchError,
    VariantMismatchError,
)

from conftest import make_capture, make_node, make_script


def minimal_capture():
    return make_capture(nodes=[make_node()], text="hi", html="<html><body><div>hi</div></body></html>")


def test_minimal_roundtrip(tmp_path):
    cap = minimal_capture()
    save_capture(cap, tmp_path / "c.jsonl")
    loaded = load_capture(tmp_path / "c.jsonl")
    assert loaded == cap
    assert len(loaded.dom_nodes) == 1


def test_full_roundtrip(tmp_path):
    node = make_node(classes=("a", "b"), attrs={"class": "a b", "src": "/x.png"}, style={"display": "none"})
    cap = make_capture(
        nodes=[node, make_node(nid="n2", tag="p", text="Ünicode ok")],
        mutations=[
            MutationEvent(kind="node-added", timestamp_ms=5, node=make_node(nid="n3")),
            MutationEvent(
                kind="attr-changed",
                timestamp_ms=9,
                node=make_node(nid="n3"),
                attr_name="visibility",
                old_value="hidden",
                new_value="visible",
            ),
            MutationEvent(
                kind="text-changed",
                timestamp_ms=9,
                node=make_node(nid="n2", tag="p"),
                old_value="a",
                new_value="b",
            ),
        ],
        text="some text",
        html="<html></html>",
        scripts=[make_script("var a = 1;")],
    )
    save_capture(cap, tmp_path / "c.jsonl")
    assert load_capture(tmp_path / "c.jsonl") == cap


def test_unsorted_mutations_rejected(tmp_path):
    cap = minimal_capture()
    cap.mutations = [
        MutationEvent(kind="node-added", timestamp_ms=10, node=make_node(nid="n5")),
        MutationEvent(kind="node-added", timestamp_ms=3, node=make_node(nid="n6")),
    ]
    path = tmp_path / "c.jsonl"
    with pytest.raises(CaptureInvariantError):
        save_capture(cap, path)
    # Write the raw file bypassing validation; loading must reject it too.
    cap.mutations.sort(key=lambda m: m.timestamp_ms)
    save_capture(cap, path)
    lines = path.read_text().splitlines()
    lines[2], lines[3] = lines[3], lines[2]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CaptureInvariantError):
        load_capture(path)


def test_golden_fixture_fields(captures_dir):
    cap = load_capture(captures_dir / "warn-div.example.A.jsonl")
    assert cap.site == "warn-div.example"
    assert cap.variant == "A"
    assert cap.final_url == "https://warn-div.example/"
    assert cap.capture_duration_ms == 10000
    assert [n.tag for n in cap.dom_nodes] == ["div", "p", "div"]
    warning = cap.dom_nodes[2]
    assert warning.css_classes == ["abd-warning"]
    assert warning.text == "please disable your adblock to continue"
    assert [m.kind for m in cap.mutations] == ["node-removed", "node-added"]
    assert cap.mutations[1].timestamp_ms == 2100
    assert len(cap.scripts) == 1
    assert "setTimeout" in cap.scripts[0].body
    assert "please disable your adblock" in cap.inner_text


@pytest.mark.parametrize("name", [p.name for p in (__import__("pathlib").Path(__file__).parent / "fixtures" / "captures").glob("*.jsonl")])
def test_all_fixture_captures_load(captures_dir, name):
    cap = load_capture(captures_dir / name)
    cap.validate()


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "c.jsonl"
    save_capture(minimal_capture(), path)
    lines = path.read_text().splitlines()
    lines[1] = lines[1][:-1]  # truncate a closing brace
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CaptureFormatError) as err:
        load_capture(path)
    assert err.value.line_no == 2


def test_unknown_record_type_rejected(tmp_path):
    path = tmp_path / "c.jsonl"
    save_capture(minimal_capture(), path)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps({"rec": "mystery"}) + "\n")
    with pytest.raises(CaptureFormatError):
        load_capture(path)


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "c.jsonl"
    save_capture(minimal_capture(), path)
    lines = path.read_text().splitlines()
    obj = json.loads(lines[1])
    obj["surprise"] = 1
    lines[1] = json.dumps(obj)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CaptureFormatError):
        load_capture(path)


def test_missing_page_record_rejected(tmp_path):
    path = tmp_path / "c.jsonl"
    save_capture(minimal_capture(), path)
    lines = [l for l in path.read_text().splitlines() if '"rec":"page"' not in l]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CaptureFormatError):
        load_capture(path)


def test_duplicate_node_id_rejected(tmp_path):
    cap = make_capture(nodes=[make_node("n1"), make_node("n1", tag="p")])
    with pytest.raises(CaptureInvariantError):
        save_capture(cap, tmp_path / "c.jsonl")


def test_bad_variant_rejected(tmp_path):
    cap = minimal_capture()
    cap.variant = "C"
    with pytest.raises(CaptureInvariantError):
        save_capture(cap, tmp_path / "c.jsonl")


def test_untracked_style_key_rejected():
    cap = make_capture(nodes=[make_node(style={"z-index": "4"})])
    with pytest.raises(CaptureInvariantError):
        cap.validate()


def test_conditional_mutation_fields_enforced():
    bad = MutationEvent(kind="node-added", timestamp_ms=1, node=make_node(), attr_name="x")
    with pytest.raises(CaptureInvariantError):
        bad.validate()
    bad = MutationEvent(kind="attr-changed", timestamp_ms=1, node=make_node(), attr_name="x")
    with pytest.raises(CaptureInvariantError):
        bad.validate()  # old/new missing


def test_empty_script_body_rejected(tmp_path):
    cap = minimal_capture()
    cap.scripts = [make_script("")]
    with pytest.raises(CaptureInvariantError):
        save_capture(cap, tmp_path / "c.jsonl")


def test_unwritable_path_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        save_capture(minimal_capture(), tmp_path / "missing-dir" / "c.jsonl")


def test_assemble_triple_ok():
    a = make_capture(variant="A")
    b = make_capture(variant="B")
    bp = make_capture(variant="Bprime")
    triple = assemble_triple(a, b, bp)
    assert triple.site == "site.example"


def test_assemble_triple_site_mismatch():
    a = make_capture(variant="A")
    b = make_capture(site="other.example", variant="B")
    bp = make_capture(variant="Bprime")
    with pytest.raises(SiteMismatchError):
        assemble_triple(a, b, bp)


def test_assemble_triple_variant_mismatch():
    a = make_capture(variant="A")
    with pytest.raises(VariantMismatchError):
        assemble_triple(a, make_capture(variant="A"), make_capture(variant="Bprime"))


def test_normalize_text():
    assert normalize_text("  a\t\tb \n c  ") == "a b c"
    assert normalize_text("café") == "café"  # NFC composition
    assert normalize_text("") == ""
