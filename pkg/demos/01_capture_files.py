"""Build a page capture in code, write it, and read it back.

A capture is one instrumented page load: the post-load DOM snapshot, the
mutation event stream, visible text, serialized HTML, and the scripts the
page ran. The file format is line-delimited JSON so a crashed recorder
still leaves a parseable prefix.
"""

import tempfile
from pathlib import Path

from abdscope import MutationEvent, NodeRecord, PageCapture, ScriptSnippet, load_capture, save_capture

warning = NodeRecord(
    node_id="n3",
    tag="div",
    css_classes=["abd-warning"],
    attributes={"class": "abd-warning"},
    text="please disable your ad blocker",
    parent_path=["html", "body"],
)

capture = PageCapture(
    site="demo.example",
    variant="A",
    final_url="https://demo.example/",
    dom_nodes=[
        NodeRecord(node_id="n1", tag="div", attr_id="content", text="welcome", parent_path=["html", "body"]),
        NodeRecord(node_id="n2", tag="p", text="article body", parent_path=["html", "body"]),
        warning,
    ],
    mutations=[MutationEvent(kind="node-added", timestamp_ms=2100, node=warning)],
    inner_text="welcome\narticle body\nplease disable your ad blocker",
    inner_html="<html><body>...</body></html>",
    scripts=[ScriptSnippet(snippet_id="s1", source_url="inline", body="var probe = 1;", site="demo.example")],
    capture_duration_ms=10000,
)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo.example.A.jsonl"
    save_capture(capture, path)
    print("--- capture file ---")
    print(path.read_text(), end="")
    loaded = load_capture(path)
    print("--- round trip ---")
    print("equal after reload:", loaded == capture)
    print("mutations:", [(m.kind, m.timestamp_ms) for m in loaded.mutations])
