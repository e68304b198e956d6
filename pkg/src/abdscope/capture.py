"""Page-load capture model and its line-delimited JSON file format.

A capture file is UTF-8 JSONL: a header object first, then one object per
record. Record shapes:

    {"format": "abdscope-capture", "version": 1, "site": ..., "variant":
     "A"|"B"|"Bprime", "final_url": ..., "capture_duration_ms": ...}
    {"rec": "node", ...}
    {"rec": "mutation", ...}
    {"rec": "script", ...}
    {"rec": "page", "inner_text": ..., "inner_html": ...}

Streaming line-per-record writes keep partial captures from crashed
recorders parseable up to the break point.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    CaptureFormatError,
    CaptureInvariantError,
    SiteMismatchError,
    VariantMismatchError,
)

FORMAT_NAME = "abdscope-capture"
FORMAT_VERSION = 1

VARIANTS = ("A", "B", "Bprime")
MUTATION_KINDS = ("node-added", "node-removed", "attr-changed", "text-changed")

# Display-related style properties tracked individually; anything else the
# recorder folds into the aggregate bucket.
TRACKED_STYLE_PROPS = (
    "display",
    "visibility",
    "height",
    "width",
    "opacity",
    "max-height",
    "background-size",
)
OTHER_STYLE = "other-style"
_STYLE_KEYS = frozenset(TRACKED_STYLE_PROPS) | {OTHER_STYLE}

_WS_RUN = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Unicode NFC, whitespace runs collapsed to single spaces, trimmed."""
    return _WS_RUN.sub(" ", unicodedata.normalize("NFC", text)).strip()


@dataclass
class NodeRecord:
    node_id: str
    tag: str
    attr_id: str = ""
    css_classes: list[str] = field(default_factory=list)
    attributes: dict[str, str] = field(default_factory=dict)
    style_props: dict[str, str] = field(default_factory=dict)
    text: str = ""
    parent_path: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if not self.tag:
            raise CaptureInvariantError(f"node {self.node_id!r} has an empty tag")
        bad = set(self.style_props) - _STYLE_KEYS
        if bad:
            raise CaptureInvariantError(
                f"node {self.node_id!r} has untracked style keys: {sorted(bad)}"
            )

    def identity_free_key(self) -> tuple:
        """Equality key ignoring the recorder-assigned node_id and styles.

        Style properties are owned by the attribute-change pipeline; keeping
        them out of node identity stops a pure style flip from surfacing as
        a node addition plus removal.
        """
        return (
            self.tag,
            self.attr_id,
            tuple(self.css_classes),
            tuple(sorted(self.attributes.items())),
            normalize_text(self.text),
            tuple(self.parent_path),
        )


@dataclass
class MutationEvent:
    kind: str
    timestamp_ms: int
    node: NodeRecord
    attr_name: str | None = None
    old_value: str | None = None
    new_value: str | None = None

    def validate(self) -> None:
        if self.kind not in MUTATION_KINDS:
            raise CaptureInvariantError(f"unknown mutation kind {self.kind!r}")
        if self.timestamp_ms < 0:
            raise CaptureInvariantError("mutation timestamp_ms is negative")
        self.node.validate()
        wants_attr = self.kind == "attr-changed"
        wants_values = self.kind in ("attr-changed", "text-changed")
        if wants_attr != (self.attr_name is not None):
            raise CaptureInvariantError(
                f"attr_name must be present iff kind is attr-changed (kind={self.kind})"
            )
        if wants_values != (self.old_value is not None) or wants_values != (
            self.new_value is not None
        ):
            raise CaptureInvariantError(
                f"old/new_value must be present iff kind changes a value (kind={self.kind})"
            )


@dataclass
class ScriptSnippet:
    snippet_id: str
    source_url: str
    body: str
    site: str

    def validate(self) -> None:
        if not self.body:
            raise CaptureInvariantError(f"script {self.snippet_id!r} has an empty body")


@dataclass
class PageCapture:
    site: str
    variant: str
    final_url: str
    dom_nodes: list[NodeRecord] = field(default_factory=list)
    mutations: list[MutationEvent] = field(default_factory=list)
    inner_text: str = ""
    inner_html: str = ""
    scripts: list[ScriptSnippet] = field(default_factory=list)
    capture_duration_ms: int = 0

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise CaptureInvariantError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        seen: set[str] = set()
        for node in self.dom_nodes:
            node.validate()
            if node.node_id in seen:
                raise CaptureInvariantError(f"duplicate node_id {node.node_id!r}")
            seen.add(node.node_id)
        last = -1
        for mut in self.mutations:
            mut.validate()
            if mut.timestamp_ms < last:
                raise CaptureInvariantError(
                    f"mutations out of order at timestamp {mut.timestamp_ms}"
                )
            last = mut.timestamp_ms
        for script in self.scripts:
            script.validate()


@dataclass
class CaptureTriple:
    site: str
    a: PageCapture
    b: PageCapture
    bprime: PageCapture


def assemble_triple(a: PageCapture, b: PageCapture, bp: PageCapture) -> CaptureTriple:
    """Combine one blocker-on capture with its two blocker-off baselines."""
    for capture, expected in ((a, "A"), (b, "B"), (bp, "Bprime")):
        if capture.variant != expected:
            raise VariantMismatchError(
                f"expected variant {expected}, got {capture.variant!r} for site {capture.site!r}"
            )
    if not (a.site == b.site == bp.site):
        raise SiteMismatchError(f"sites differ: {a.site!r}, {b.site!r}, {bp.site!r}")
    return CaptureTriple(site=a.site, a=a, b=b, bprime=bp)


# ---------------------------------------------------------------------------
# serialization


def _node_fields(node: NodeRecord) -> dict:
    return {
        "node_id": node.node_id,
        "tag": node.tag,
        "attr_id": node.attr_id,
        "css_classes": list(node.css_classes),
        "attributes": dict(sorted(node.attributes.items())),
        "style_props": dict(sorted(node.style_props.items())),
        "text": node.text,
        "parent_path": list(node.parent_path),
    }


def _dump(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def capture_to_lines(capture: PageCapture) -> list[str]:
    capture.validate()
    lines = [
        _dump(
            {
                "format": FORMAT_NAME,
                "version": FORMAT_VERSION,
                "site": capture.site,
                "variant": capture.variant,
                "final_url": capture.final_url,
                "capture_duration_ms": capture.capture_duration_ms,
            }
        )
    ]
    for node in capture.dom_nodes:
        lines.append(_dump({"rec": "node", **_node_fields(node)}))
    for mut in capture.mutations:
        rec = {
            "rec": "mutation",
            "kind": mut.kind,
            "timestamp_ms": mut.timestamp_ms,
            "node": _node_fields(mut.node),
        }
        if mut.attr_name is not None:
            rec["attr_name"] = mut.attr_name
        if mut.old_value is not None:
            rec["old_value"] = mut.old_value
            rec["new_value"] = mut.new_value
        lines.append(_dump(rec))
    for script in capture.scripts:
        lines.append(
            _dump(
                {
                    "rec": "script",
                    "snippet_id": script.snippet_id,
                    "source_url": script.source_url,
                    "body": script.body,
                    "site": script.site,
                }
            )
        )
    lines.append(
        _dump({"rec": "page", "inner_text": capture.inner_text, "inner_html": capture.inner_html})
    )
    return lines


def save_capture(capture: PageCapture, path: str | Path) -> None:
    """Write a validated capture; load_capture(save_capture(c)) == c."""
    Path(path).write_text("\n".join(capture_to_lines(capture)) + "\n", encoding="utf-8")


_NODE_KEYS = {
    "node_id": str,
    "tag": str,
    "attr_id": str,
    "css_classes": list,
    "attributes": dict,
    "style_props": dict,
    "text": str,
    "parent_path": list,
}

_HEADER_KEYS = {
    "format": str,
    "version": int,
    "site": str,
    "variant": str,
    "final_url": str,
    "capture_duration_ms": int,
}


def _check_keys(obj: dict, spec: dict, line_no: int, what: str) -> None:
    extra = set(obj) - set(spec)
    missing = set(spec) - set(obj)
    if extra or missing:
        parts = []
        if missing:
            parts.append(f"missing keys {sorted(missing)}")
        if extra:
            parts.append(f"unknown keys {sorted(extra)}")
        raise CaptureFormatError(f"{what}: " + ", ".join(parts), line_no)
    for key, typ in spec.items():
        value = obj[key]
        if typ is int:
            ok = isinstance(value, int) and not isinstance(value, bool)
        else:
            ok = isinstance(value, typ)
        if not ok:
            raise CaptureFormatError(
                f"{what}: key {key!r} must be {typ.__name__}, got {type(value).__name__}",
                line_no,
            )


def _parse_str_map(obj: dict, key: str, line_no: int) -> dict[str, str]:
    value = obj[key]
    for k, v in value.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise CaptureFormatError(f"{key} must map strings to strings", line_no)
    return dict(value)


def _parse_str_list(obj: dict, key: str, line_no: int) -> list[str]:
    value = obj[key]
    if not all(isinstance(item, str) for item in value):
        raise CaptureFormatError(f"{key} must be a list of strings", line_no)
    return list(value)


def _parse_node(obj: dict, line_no: int) -> NodeRecord:
    _check_keys(obj, _NODE_KEYS, line_no, "node record")
    return NodeRecord(
        node_id=obj["node_id"],
        tag=obj["tag"],
        attr_id=obj["attr_id"],
        css_classes=_parse_str_list(obj, "css_classes", line_no),
        attributes=_parse_str_map(obj, "attributes", line_no),
        style_props=_parse_str_map(obj, "style_props", line_no),
        text=obj["text"],
        parent_path=_parse_str_list(obj, "parent_path", line_no),
    )


def load_capture(path: str | Path) -> PageCapture:
    """Parse and validate one capture file.

    Schema problems raise CaptureFormatError with the offending line number;
    semantic problems (out-of-order mutations, duplicate node ids, ...) raise
    CaptureInvariantError.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise CaptureFormatError("empty capture file", 1)

    records: list[tuple[int, dict]] = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CaptureFormatError(f"invalid JSON ({exc.msg})", i) from exc
        if not isinstance(obj, dict):
            raise CaptureFormatError("record is not a JSON object", i)
        records.append((i, obj))

    if not records:
        raise CaptureFormatError("no records in capture file", 1)

    header_line, header = records[0]
    if "rec" in header or "format" not in header:
        raise CaptureFormatError("first record must be the capture header", header_line)
    _check_keys(header, _HEADER_KEYS, header_line, "header")
    if header["format"] != FORMAT_NAME:
        raise CaptureFormatError(f"unknown format {header['format']!r}", header_line)
    if header["version"] != FORMAT_VERSION:
        raise CaptureFormatError(f"unsupported version {header['version']}", header_line)

    dom_nodes: list[NodeRecord] = []
    mutations: list[MutationEvent] = []
    scripts: list[ScriptSnippet] = []
    page: dict | None = None

    for line_no, obj in records[1:]:
        rec = obj.get("rec")
        if rec == "node":
            body = {k: v for k, v in obj.items() if k != "rec"}
            dom_nodes.append(_parse_node(body, line_no))
        elif rec == "mutation":
            keys = {"rec", "kind", "timestamp_ms", "node"}
            optional = {"attr_name", "old_value", "new_value"}
            extra = set(obj) - keys - optional
            missing = keys - set(obj)
            if extra or missing:
                raise CaptureFormatError(
                    f"mutation record: missing {sorted(missing)}, unknown {sorted(extra)}",
                    line_no,
                )
            if not isinstance(obj["timestamp_ms"], int) or isinstance(obj["timestamp_ms"], bool):
                raise CaptureFormatError("timestamp_ms must be an integer", line_no)
            if not isinstance(obj["node"], dict):
                raise CaptureFormatError("mutation node must be an object", line_no)
            for opt in optional:
                if opt in obj and not isinstance(obj[opt], str):
                    raise CaptureFormatError(f"{opt} must be a string", line_no)
            mutations.append(
                MutationEvent(
                    kind=obj["kind"],
                    timestamp_ms=obj["timestamp_ms"],
                    node=_parse_node(obj["node"], line_no),
                    attr_name=obj.get("attr_name"),
                    old_value=obj.get("old_value"),
                    new_value=obj.get("new_value"),
                )
            )
        elif rec == "script":
            _check_keys(
                {k: v for k, v in obj.items() if k != "rec"},
                {"snippet_id": str, "source_url": str, "body": str, "site": str},
                line_no,
                "script record",
            )
            scripts.append(
                ScriptSnippet(
                    snippet_id=obj["snippet_id"],
                    source_url=obj["source_url"],
                    body=obj["body"],
                    site=obj["site"],
                )
            )
        elif rec == "page":
            if page is not None:
                raise CaptureFormatError("second page record", line_no)
            _check_keys(
                {k: v for k, v in obj.items() if k != "rec"},
                {"inner_text": str, "inner_html": str},
                line_no,
                "page record",
            )
            page = obj
        else:
            raise CaptureFormatError(f"unknown record type {rec!r}", line_no)

    if page is None:
        raise CaptureFormatError("missing page record", len(lines))

    capture = PageCapture(
        site=header["site"],
        variant=header["variant"],
        final_url=header["final_url"],
        dom_nodes=dom_nodes,
        mutations=mutations,
        inner_text=page["inner_text"],
        inner_html=page["inner_html"],
        scripts=scripts,
        capture_duration_ms=header["capture_duration_ms"],
    )
    capture.validate()
    return capture
