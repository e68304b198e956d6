"""Noise-cancelled differencing of a blocker-on capture against its baselines.

The comparison always involves three loads of one site: A (blocker on) and
B, Bprime (blocker off, twice). Differences between A and Bprime that also
show up between B and Bprime are dynamic-content noise (rotating banners,
clocks, shuffled headlines) and get flagged matched_noise so nothing
downstream counts them.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .capture import (
    CaptureTriple,
    NodeRecord,
    PageCapture,
    normalize_text,
)
from .capture import _node_fields, _parse_node
from .errors import CaptureFormatError

# Tag categories entering node differences ("a" is the anchor element).
DIFF_TAGS = ("a", "div", "h1", "h2", "h3", "img", "table", "p", "br", "iframe")

ADDED_IN_A = "added-in-A"
REMOVED_IN_A = "removed-in-A"

_WORD_RE = re.compile(r"\w+", re.UNICODE)


def tokenize_words(text: str) -> list[str]:
    """Lowercased word tokens, split on whitespace and punctuation."""
    return _WORD_RE.findall(text.lower())


@dataclass
class NodeDiff:
    direction: str
    node: NodeRecord
    matched_noise: bool = False


@dataclass
class AttrDiff:
    node: NodeRecord
    property: str
    old_value: str
    new_value: str
    matched_noise: bool = False


@dataclass
class TextDiff:
    lines_added: int = 0
    lines_removed: int = 0
    chars_added: int = 0
    chars_removed: int = 0
    words_changed: int = 0
    changed_word_bag: dict[str, int] = field(default_factory=dict)
    text_nodes_added: int = 0


@dataclass
class DiffReport:
    site: str
    node_diffs: list[NodeDiff] = field(default_factory=list)
    attr_diffs: list[AttrDiff] = field(default_factory=list)
    text_diff: TextDiff = field(default_factory=TextDiff)
    html_cosine: float = 1.0
    url_changed: bool = False


def cosine_similarity(doc_a: str, doc_b: str) -> float:
    """Cosine of whitespace-token frequency vectors, in [0, 1].

    Two empty documents count as identical (1.0); exactly one empty
    document shares no tokens with the other (0.0).
    """
    freq_a = Counter(doc_a.split())
    freq_b = Counter(doc_b.split())
    if not freq_a and not freq_b:
        return 1.0
    if not freq_a or not freq_b:
        return 0.0
    if freq_a == freq_b:
        return 1.0
    dot = sum(count * freq_b.get(token, 0) for token, count in freq_a.items())
    norm_sq_a = sum(c * c for c in freq_a.values())
    norm_sq_b = sum(c * c for c in freq_b.values())
    value = dot / math.sqrt(norm_sq_a * norm_sq_b)
    return min(1.0, max(0.0, value))


def match_noise_node(candidate: NodeRecord, pool: list[NodeRecord]) -> bool:
    """Loose cross-load correspondence: identifiers may differ, shape may not.

    True iff some pool node has the same tag, the same ancestor path, the
    same normalized text, and either the same class list or the same set of
    attribute names.
    """
    cand_text = normalize_text(candidate.text)
    cand_classes = tuple(candidate.css_classes)
    cand_attr_names = frozenset(candidate.attributes)
    for node in pool:
        if node.tag != candidate.tag:
            continue
        if node.parent_path != candidate.parent_path:
            continue
        if normalize_text(node.text) != cand_text:
            continue
        if tuple(node.css_classes) == cand_classes or frozenset(node.attributes) == cand_attr_names:
            return True
    return False


def _multiset_reps(nodes: list[NodeRecord]) -> dict[tuple, list[NodeRecord]]:
    groups: dict[tuple, list[NodeRecord]] = {}
    for node in nodes:
        groups.setdefault(node.identity_free_key(), []).append(node)
    return groups


def _multiset_minus(
    left: dict[tuple, list[NodeRecord]], right: dict[tuple, list[NodeRecord]]
) -> list[NodeRecord]:
    """Representatives of the multiset difference left - right, document order."""
    out: list[NodeRecord] = []
    for key, reps in left.items():
        surplus = len(reps) - len(right.get(key, ()))
        if surplus > 0:
            out.extend(reps[:surplus])
    return out


def _node_difference(
    a_nodes: list[NodeRecord],
    b_nodes: list[NodeRecord],
    bp_nodes: list[NodeRecord],
) -> tuple[list[NodeRecord], list[NodeRecord], list[NodeRecord]]:
    """AB' added, AB' removed, and the BB' noise pool (both directions)."""
    groups_a = _multiset_reps(a_nodes)
    groups_b = _multiset_reps(b_nodes)
    groups_bp = _multiset_reps(bp_nodes)
    added = _multiset_minus(groups_a, groups_bp)
    removed = _multiset_minus(groups_bp, groups_a)
    pool = _multiset_minus(groups_b, groups_bp) + _multiset_minus(groups_bp, groups_b)
    return added, removed, pool


def _attr_events(capture: PageCapture) -> list[tuple[NodeRecord, str, str, str]]:
    return [
        (m.node, m.attr_name, m.old_value, m.new_value)
        for m in capture.mutations
        if m.kind == "attr-changed"
    ]


def _event_key(event: tuple[NodeRecord, str, str, str]) -> tuple:
    node, prop, old, new = event
    return (node.identity_free_key(), prop, old, new)


def _event_difference(left, right) -> list[tuple[NodeRecord, str, str, str]]:
    right_counts = Counter(_event_key(e) for e in right)
    taken: Counter = Counter()
    out = []
    for event in left:
        key = _event_key(event)
        if taken[key] < right_counts.get(key, 0):
            taken[key] += 1
        else:
            out.append(event)
    return out


def _line_counter(text: str) -> Counter:
    lines = (normalize_text(line) for line in text.splitlines())
    return Counter(line for line in lines if line)


def _surviving(primary: Counter, baseline_noise: Counter) -> Counter:
    return primary - baseline_noise


def _word_bag(lines: Counter) -> Counter:
    bag: Counter = Counter()
    for line, count in lines.items():
        for word in tokenize_words(line):
            bag[word] += count
    return bag


def _text_difference(a: PageCapture, b: PageCapture, bp: PageCapture) -> TextDiff:
    lines_a = _line_counter(a.inner_text)
    lines_b = _line_counter(b.inner_text)
    lines_bp = _line_counter(bp.inner_text)

    added = _surviving(lines_a - lines_bp, lines_b - lines_bp)
    removed = _surviving(lines_bp - lines_a, lines_bp - lines_b)

    bag_added = _word_bag(added)
    bag_removed = _word_bag(removed)
    changed = {}
    for word in sorted(set(bag_added) | set(bag_removed)):
        delta = abs(bag_added.get(word, 0) - bag_removed.get(word, 0))
        if delta:
            changed[word] = delta

    return TextDiff(
        lines_added=sum(added.values()),
        lines_removed=sum(removed.values()),
        chars_added=sum(len(line) * n for line, n in added.items()),
        chars_removed=sum(len(line) * n for line, n in removed.items()),
        words_changed=sum(changed.values()),
        changed_word_bag=changed,
        text_nodes_added=0,
    )


def diff_triple(triple: CaptureTriple) -> DiffReport:
    """Diff A against the B/Bprime baseline with noise cancellation."""
    a, b, bp = triple.a, triple.b, triple.bprime

    in_categories = lambda nodes: [n for n in nodes if n.tag in DIFF_TAGS]
    added, removed, pool = _node_difference(
        in_categories(a.dom_nodes), in_categories(b.dom_nodes), in_categories(bp.dom_nodes)
    )
    node_diffs = [
        NodeDiff(ADDED_IN_A, node, matched_noise=match_noise_node(node, pool)) for node in added
    ] + [
        NodeDiff(REMOVED_IN_A, node, matched_noise=match_noise_node(node, pool))
        for node in removed
    ]

    events_a = _attr_events(a)
    events_b = _attr_events(b)
    events_bp = _attr_events(bp)
    surviving = _event_difference(events_a, events_bp)
    noise_events = _event_difference(events_b, events_bp) + _event_difference(
        events_bp, events_b
    )
    attr_diffs = []
    for node, prop, old, new in surviving:
        noise_nodes = [n for n, p, _, _ in noise_events if p == prop]
        attr_diffs.append(
            AttrDiff(
                node=node,
                property=prop,
                old_value=old,
                new_value=new,
                matched_noise=match_noise_node(node, noise_nodes),
            )
        )

    text_diff = _text_difference(a, b, bp)

    # Text-bearing node additions, over all tags, same cancellation rule.
    text_added, _, text_pool = _node_difference(a.dom_nodes, b.dom_nodes, bp.dom_nodes)
    text_diff.text_nodes_added = sum(
        1
        for node in text_added
        if normalize_text(node.text) and not match_noise_node(node, text_pool)
    )

    return DiffReport(
        site=triple.site,
        node_diffs=node_diffs,
        attr_diffs=attr_diffs,
        text_diff=text_diff,
        html_cosine=cosine_similarity(a.inner_html, b.inner_html),
        url_changed=a.final_url != b.final_url,
    )


# ---------------------------------------------------------------------------
# checkpoint serialization


def diff_report_to_json(report: DiffReport) -> str:
    obj = {
        "rec": "diff",
        "site": report.site,
        "node_diffs": [
            {
                "direction": d.direction,
                "node": _node_fields(d.node),
                "matched_noise": d.matched_noise,
            }
            for d in report.node_diffs
        ],
        "attr_diffs": [
            {
                "node": _node_fields(d.node),
                "property": d.property,
                "old_value": d.old_value,
                "new_value": d.new_value,
                "matched_noise": d.matched_noise,
            }
            for d in report.attr_diffs
        ],
        "text_diff": {
            "lines_added": report.text_diff.lines_added,
            "lines_removed": report.text_diff.lines_removed,
            "chars_added": report.text_diff.chars_added,
            "chars_removed": report.text_diff.chars_removed,
            "words_changed": report.text_diff.words_changed,
            "changed_word_bag": dict(sorted(report.text_diff.changed_word_bag.items())),
            "text_nodes_added": report.text_diff.text_nodes_added,
        },
        "html_cosine": report.html_cosine,
        "url_changed": report.url_changed,
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def diff_report_from_json(line: str) -> DiffReport:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CaptureFormatError(f"invalid diff JSON ({exc.msg})", 1) from exc
    if not isinstance(obj, dict) or obj.get("rec") != "diff":
        raise CaptureFormatError("not a diff record", 1)
    text = obj["text_diff"]
    return DiffReport(
        site=obj["site"],
        node_diffs=[
            NodeDiff(
                direction=d["direction"],
                node=_parse_node(d["node"], 1),
                matched_noise=d["matched_noise"],
            )
            for d in obj["node_diffs"]
        ],
        attr_diffs=[
            AttrDiff(
                node=_parse_node(d["node"], 1),
                property=d["property"],
                old_value=d["old_value"],
                new_value=d["new_value"],
                matched_noise=d["matched_noise"],
            )
            for d in obj["attr_diffs"]
        ],
        text_diff=TextDiff(
            lines_added=text["lines_added"],
            lines_removed=text["lines_removed"],
            chars_added=text["chars_added"],
            chars_removed=text["chars_removed"],
            words_changed=text["words_changed"],
            changed_word_bag=dict(text["changed_word_bag"]),
            text_nodes_added=text["text_nodes_added"],
        ),
        html_cosine=obj["html_cosine"],
        url_changed=obj["url_changed"],
    )
