"""Synthetic diff-report corpus for end-to-end evaluation.

Positive sites imitate the timeout / condition-check / response anatomy of
real detectors: injected warning containers, un-hidden notices, text walls,
occasional redirects. Negative sites carry only the dynamic-content noise
that survives (or is cancelled by) the double-baseline comparison; a slice
of them churns hard enough that every text counter fires at once, which is
what keeps the classification task honest.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from .capture import NodeRecord
from .diffing import ADDED_IN_A, AttrDiff, DiffReport, NodeDiff, TextDiff, tokenize_words
from .features import NEGATIVE, POSITIVE

# Short, punchy vocabulary for injected warnings; long-ish editorial words
# for organic churn. The length skew keeps character counts noisier than
# word counts across classes.
_WARN_WORDS = (
    "please disable your ad blocker to view this site we detect that you "
    "are using blocking software turn it off and reload the page support "
    "us by allowing ads or whitelist this domain access is limited until "
    "ads show again thank you"
).split()

_NEWS_WORDS = (
    "breaking headlines investigation exclusive interview championship "
    "quarterly earnings announcement entertainment technology government "
    "transportation international development environment temperatures "
    "celebration marketplace subscription recommendations neighborhood"
).split()

_KEYWORD_TOKENS = ("adblock", "pagefair", "blockadblock")


def _lines_from_words(rng, words: list[str], per_line: tuple[int, int]) -> list[str]:
    lines = []
    i = 0
    while i < len(words):
        take = int(rng.integers(per_line[0], per_line[1] + 1))
        lines.append(" ".join(words[i : i + take]))
        i += take
    return lines


def _text_diff(added_lines: list[str], removed_lines: list[str], text_nodes_added: int) -> TextDiff:
    bag_added = Counter(w for line in added_lines for w in tokenize_words(line))
    bag_removed = Counter(w for line in removed_lines for w in tokenize_words(line))
    changed = {}
    for word in sorted(set(bag_added) | set(bag_removed)):
        delta = abs(bag_added.get(word, 0) - bag_removed.get(word, 0))
        if delta:
            changed[word] = delta
    return TextDiff(
        lines_added=len(added_lines),
        lines_removed=len(removed_lines),
        chars_added=sum(len(line) for line in added_lines),
        chars_removed=sum(len(line) for line in removed_lines),
        words_changed=sum(changed.values()),
        changed_word_bag=changed,
        text_nodes_added=text_nodes_added,
    )


def _node(node_id: str, tag: str, text: str = "", classes: tuple = (), attr_id: str = "") -> NodeRecord:
    return NodeRecord(
        node_id=node_id,
        tag=tag,
        attr_id=attr_id,
        css_classes=list(classes),
        attributes={"class": " ".join(classes)} if classes else {},
        style_props={},
        text=text,
        parent_path=["html", "body"],
    )


def _added(node_id: str, tag: str, text: str = "", noise: bool = False, **kw) -> NodeDiff:
    return NodeDiff(ADDED_IN_A, _node(node_id, tag, text, **kw), matched_noise=noise)


def _style_change(node_id: str, prop: str, old: str, new: str, noise: bool = False) -> AttrDiff:
    return AttrDiff(
        node=_node(node_id, "div", attr_id=node_id),
        property=prop,
        old_value=old,
        new_value=new,
        matched_noise=noise,
    )


def _pick_words(rng, pool, count: int) -> list[str]:
    return [pool[int(i)] for i in rng.integers(0, len(pool), size=count)]


class _Ids:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.n = 0

    def __call__(self) -> str:
        self.n += 1
        return f"{self.prefix}{self.n}"


def _positive_report(rng, index: int) -> DiffReport:
    site = f"pos-{index:04d}.example"
    archetype = rng.choice(
        ["notifier", "overlay", "redirect", "style-flip", "late-notifier"],
        p=[0.47, 0.18, 0.06, 0.16, 0.13],
    )
    next_id = _Ids("p")
    node_diffs: list[NodeDiff] = []
    attr_diffs: list[AttrDiff] = []
    added_lines: list[str] = []
    text_nodes = 0
    url_changed = False
    cosine = 1.0

    if archetype == "notifier":
        words = _pick_words(rng, _WARN_WORDS, int(rng.integers(8, 46)))
        if rng.random() < 0.72:
            for _ in range(int(rng.integers(1, 3))):
                words.insert(int(rng.integers(0, len(words))), str(rng.choice(_KEYWORD_TOKENS)))
        added_lines = _lines_from_words(rng, words, (6, 14))
        for i in range(int(rng.integers(1, 4))):
            text = added_lines[i] if i < len(added_lines) else ""
            node_diffs.append(_added(next_id(), "div", text, classes=("abd-warning",)))
            if text:
                text_nodes += 1
        if rng.random() < 0.4:
            node_diffs.append(_added(next_id(), "p", added_lines[-1]))
            text_nodes += 1
        if rng.random() < 0.25:
            node_diffs.append(_added(next_id(), "h2", "attention"))
            text_nodes += 1
        if rng.random() < 0.40:
            attr_diffs.append(_style_change(next_id(), "visibility", "hidden", "visible"))
        if rng.random() < 0.25:
            attr_diffs.append(_style_change(next_id(), "display", "none", "block"))
        cosine = float(rng.uniform(0.85, 0.97))
    elif archetype == "overlay":
        words = _pick_words(rng, _WARN_WORDS, int(rng.integers(20, 121)))
        if rng.random() < 0.7:
            words.insert(0, "adblock")
        added_lines = _lines_from_words(rng, words, (7, 12))
        for _ in range(int(rng.integers(3, 7))):
            node_diffs.append(_added(next_id(), "div", ""))
        node_diffs.append(_added(next_id(), "div", added_lines[0], classes=("overlay",)))
        text_nodes = int(rng.integers(1, 4))
        if rng.random() < 0.3:
            node_diffs.append(_added(next_id(), "img"))
        for prop, old, new in (
            ("height", "0px", "100vh"),
            ("width", "0px", "100vw"),
            ("opacity", "0", "1"),
        ):
            if rng.random() < 0.55:
                attr_diffs.append(_style_change(next_id(), prop, old, new))
        cosine = float(rng.uniform(0.55, 0.85))
    elif archetype == "redirect":
        url_changed = True
        words = _pick_words(rng, _WARN_WORDS, int(rng.integers(10, 61)))
        words.insert(0, "adblock")
        added_lines = _lines_from_words(rng, words, (6, 12))
        node_diffs.append(_added(next_id(), "div", added_lines[0]))
        text_nodes = 1
        cosine = float(rng.uniform(0.30, 0.70))
    elif archetype == "style-flip":
        # The notice was always in the page: nothing is added, two or three
        # display-related properties flip together. The conjunction is the
        # whole signal; the text counters stay silent.
        attr_diffs.append(_style_change(next_id(), "visibility", "hidden", "visible"))
        attr_diffs.append(_style_change(next_id(), "display", "none", "block"))
        if rng.random() < 0.7:
            attr_diffs.append(_style_change(next_id(), "height", "0px", "90px"))
        if rng.random() < 0.3:
            attr_diffs.append(_style_change(next_id(), "other-style", "z-index:0", "z-index:9999"))
        if rng.random() < 0.25:
            words = _pick_words(rng, _WARN_WORDS, int(rng.integers(1, 4)))
            if rng.random() < 0.4:
                words.append("adblock")
            added_lines = _lines_from_words(rng, words, (4, 8))
        text_nodes = 0 if rng.random() < 0.7 else 1
        cosine = float(rng.uniform(0.96, 0.998))
    else:  # late-notifier
        # A short plea injected as fresh paragraphs: few words, but always
        # new text-bearing nodes on an otherwise stable page.
        words = _pick_words(rng, _WARN_WORDS, int(rng.integers(3, 9)))
        if rng.random() < 0.5:
            words.append(str(rng.choice(_KEYWORD_TOKENS)))
        added_lines = _lines_from_words(rng, words, (3, 6))
        tag = "p" if rng.random() < 0.85 else "div"
        node_diffs.append(_added(next_id(), tag, added_lines[0]))
        if len(added_lines) > 1:
            node_diffs.append(_added(next_id(), "p", added_lines[1]))
        text_nodes = int(rng.integers(2, 4))
        cosine = float(rng.uniform(0.92, 0.99))

    # The blocker removing ad frames shows up as removal diffs; they carry
    # no feature weight but keep reports realistic.
    if rng.random() < 0.6:
        node_diffs.append(
            NodeDiff("removed-in-A", _node(next_id(), "iframe", classes=("ads",)), False)
        )

    return DiffReport(
        site=site,
        node_diffs=node_diffs,
        attr_diffs=attr_diffs,
        text_diff=_text_diff(added_lines, [], text_nodes),
        html_cosine=round(cosine, 4),
        url_changed=url_changed,
    )


def _negative_report(rng, index: int) -> DiffReport:
    site = f"neg-{index:04d}.example"
    archetype = rng.choice(
        ["static", "mild", "heavy", "app-shell"],
        p=[0.52, 0.28, 0.10, 0.10],
    )
    next_id = _Ids("n")
    node_diffs: list[NodeDiff] = []
    attr_diffs: list[AttrDiff] = []
    added_lines: list[str] = []
    removed_lines: list[str] = []
    text_nodes = 0
    cosine = 1.0

    if archetype == "static":
        cosine = float(rng.uniform(0.985, 1.0))
        if rng.random() < 0.3:
            # Correlated banner rotation, fully cancelled by the BB' rule.
            node_diffs.append(_added(next_id(), "img", noise=True))
    elif archetype == "mild":
        cosine = float(rng.uniform(0.93, 0.995))
        if rng.random() < 0.4:
            words = _pick_words(rng, _NEWS_WORDS, int(rng.integers(1, 6)))
            # An editorial piece about blockers reads exactly like a notice.
            if rng.random() < 0.05:
                words.append("adblock")
            added_lines = _lines_from_words(rng, words, (3, 6))
            removed_lines = added_lines[:1] if rng.random() < 0.5 else []
        if rng.random() < 0.35:
            node_diffs.append(_added(next_id(), "img"))
        if rng.random() < 0.25:
            node_diffs.append(_added(next_id(), "div", ""))
        if rng.random() < 0.5:
            node_diffs.append(_added(next_id(), "img", noise=True))
        # Stray single style-property changes: lazy media settling, carousel
        # steps, theme experiments. Never the multi-property unhide combo.
        roll = rng.random()
        if roll < 0.24:
            attr_diffs.append(_style_change(next_id(), "visibility", "hidden", "visible"))
        elif roll < 0.44:
            attr_diffs.append(_style_change(next_id(), "display", "none", "block"))
        elif roll < 0.62:
            attr_diffs.append(_style_change(next_id(), "height", "0px", "250px"))
        if rng.random() < 0.15:
            attr_diffs.append(
                _style_change(next_id(), "other-style", "background:#fff", "background:#fee")
            )
        if rng.random() < 0.03:
            # Theme swap: a burst of style churn without the unhide combo.
            attr_diffs.append(_style_change(next_id(), "other-style", "font:serif", "font:sans"))
            attr_diffs.append(_style_change(next_id(), "other-style", "margin:0", "margin:8px"))
            attr_diffs.append(_style_change(next_id(), "height", "600px", "560px"))
        if rng.random() < 0.2:
            attr_diffs.append(_style_change(next_id(), "height", "250px", "250px ", noise=True))
    elif archetype == "heavy":
        # Churn-heavy news front page: all the text counters fire at once,
        # just like a detector notice would, but the unhide conjunction and
        # keywords stay quiet. These are the honest hard cases.
        cosine = float(rng.uniform(0.85, 0.97))
        words = _pick_words(rng, _NEWS_WORDS, int(rng.integers(8, 41)))
        if rng.random() < 0.06:
            words.append("adblock")
        added_lines = _lines_from_words(rng, words, (8, 15))
        if rng.random() < 0.7:
            removed_words = _pick_words(rng, _NEWS_WORDS, int(rng.integers(2, 12)))
            removed_lines = _lines_from_words(rng, removed_words, (8, 15))
        for _ in range(int(rng.integers(0, 4))):
            node_diffs.append(_added(next_id(), "div", ""))
        if rng.random() < 0.4:
            node_diffs.append(_added(next_id(), "img"))
        if rng.random() < 0.3:
            node_diffs.append(_added(next_id(), "a", "read more"))
        if rng.random() < 0.15:
            node_diffs.append(_added(next_id(), "p", added_lines[0]))
        if rng.random() < 0.2:
            attr_diffs.append(
                _style_change(next_id(), "other-style", "background:#fff", "background:#fda")
            )
        roll = rng.random()
        if roll < 0.25:
            attr_diffs.append(_style_change(next_id(), "visibility", "hidden", "visible"))
        elif roll < 0.42:
            attr_diffs.append(_style_change(next_id(), "display", "none", "block"))
        elif roll < 0.62:
            attr_diffs.append(_style_change(next_id(), "height", "0px", "400px"))
        text_nodes = int(rng.integers(1, 6))
    else:  # app-shell
        # Client-side re-render: serialized markup shifts wholesale and the
        # hydrated view rebuilds text nodes, with no detector in sight.
        cosine = float(rng.uniform(0.62, 0.88))
        words = _pick_words(rng, _NEWS_WORDS, int(rng.integers(5, 26)))
        added_lines = _lines_from_words(rng, words, (5, 10))
        text_nodes = int(rng.integers(1, 4))
        for _ in range(int(rng.integers(0, 3))):
            node_diffs.append(_added(next_id(), "div", ""))
        roll = rng.random()
        if roll < 0.15:
            attr_diffs.append(_style_change(next_id(), "visibility", "hidden", "visible"))
        elif roll < 0.28:
            attr_diffs.append(_style_change(next_id(), "height", "0px", "320px"))
        if rng.random() < 0.15:
            attr_diffs.append(
                _style_change(next_id(), "other-style", "transform:none", "transform:scale(1)")
            )

    return DiffReport(
        site=site,
        node_diffs=node_diffs,
        attr_diffs=attr_diffs,
        text_diff=_text_diff(added_lines, removed_lines, text_nodes),
        html_cosine=round(cosine, 4),
        url_changed=False,
    )


def synth_reports(
    n_positive: int = 200, n_negative: int = 1000, seed: int = 0
) -> list[tuple[DiffReport, str]]:
    """Deterministic labeled corpus: positives first, then negatives."""
    rng = np.random.default_rng([seed, 7])
    reports = [(_positive_report(rng, i), POSITIVE) for i in range(n_positive)]
    reports += [(_negative_report(rng, i), NEGATIVE) for i in range(n_negative)]
    return reports
