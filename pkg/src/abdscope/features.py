"""Fixed-order numeric features derived from a diff report.

The 25-slot schema covers per-tag node additions, tracked style-property
changes, text change counters, and the page-level similarity signals. Noise
diffs (matched_noise=True) contribute nothing to any slot.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .capture import OTHER_STYLE, TRACKED_STYLE_PROPS
from .diffing import ADDED_IN_A, DiffReport
from .errors import LabelingConflictError, SchemaMismatchError

SCHEMA_VERSION = 1

FEATURE_NAMES = (
    "n_div",
    "n_h1",
    "n_h2",
    "n_h3",
    "n_img",
    "n_table",
    "n_p",
    "n_br",
    "n_iframe",
    "n_nodes_total",
    "n_text_nodes_added",
    "ch_display",
    "ch_visibility",
    "ch_height",
    "ch_width",
    "ch_opacity",
    "ch_maxheight",
    "ch_background_size",
    "ch_style_total",
    "t_lines",
    "t_chars",
    "t_words",
    "t_bag_keyword_hits",
    "s_html_cosine",
    "s_url_changed",
)

_COUNTED_TAGS = ("div", "h1", "h2", "h3", "img", "table", "p", "br", "iframe")
_STYLE_SLOTS = dict(zip(TRACKED_STYLE_PROPS, range(11, 18)))

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass
class FeatureVector:
    values: list[float]
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if len(self.values) != len(FEATURE_NAMES):
            raise SchemaMismatchError(
                f"expected {len(FEATURE_NAMES)} values, got {len(self.values)}"
            )


@dataclass
class LabeledDataset:
    rows: list[tuple[str, FeatureVector, str]]
    feature_names: list[str] = field(default_factory=lambda: list(FEATURE_NAMES))

    def matrix(self) -> np.ndarray:
        return np.array([fv.values for _, fv, _ in self.rows], dtype=np.float64)

    def labels(self) -> np.ndarray:
        """1 for positive rows, 0 for negative."""
        return np.array([1 if label == POSITIVE else 0 for _, _, label in self.rows], dtype=np.intp)

    def sites(self) -> list[str]:
        return [site for site, _, _ in self.rows]


def _keyword_tokens() -> set[str]:
    # Single-token scanner keywords; phrases cannot occur as word-bag keys.
    from .script_analysis import SCANNER_KEYWORDS

    return {kw for kw in SCANNER_KEYWORDS if " " not in kw}


def extract_features(report: DiffReport) -> FeatureVector:
    """Count un-cancelled diffs into the fixed schema order."""
    values = [0.0] * len(FEATURE_NAMES)

    added = [d for d in report.node_diffs if d.direction == ADDED_IN_A and not d.matched_noise]
    for i, tag in enumerate(_COUNTED_TAGS):
        values[i] = float(sum(1 for d in added if d.node.tag == tag))
    values[9] = float(len(added))
    values[10] = float(report.text_diff.text_nodes_added)

    style_total = 0
    for diff in report.attr_diffs:
        if diff.matched_noise:
            continue
        if diff.property in _STYLE_SLOTS:
            values[_STYLE_SLOTS[diff.property]] += 1.0
            style_total += 1
        elif diff.property == OTHER_STYLE:
            style_total += 1
    values[18] = float(style_total)

    values[19] = float(report.text_diff.lines_added)
    values[20] = float(report.text_diff.chars_added)
    values[21] = float(report.text_diff.words_changed)
    keywords = _keyword_tokens()
    values[22] = float(
        sum(count for word, count in report.text_diff.changed_word_bag.items() if word in keywords)
    )
    values[23] = float(report.html_cosine)
    values[24] = 1.0 if report.url_changed else 0.0
    return FeatureVector(values=values)


def build_dataset(reports: list[tuple[DiffReport, str]]) -> LabeledDataset:
    """One row per (report, label) pair, in input order."""
    if not reports:
        raise ValueError("at least one report is required")
    seen: dict[str, str] = {}
    rows = []
    for report, label in reports:
        if label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"label must be {POSITIVE!r} or {NEGATIVE!r}, got {label!r}")
        previous = seen.get(report.site)
        if previous is not None and previous != label:
            raise LabelingConflictError(f"site {report.site!r} labeled both {previous} and {label}")
        seen[report.site] = label
        rows.append((report.site, extract_features(report), label))
    return LabeledDataset(rows=rows)


# ---------------------------------------------------------------------------
# dataset files


def _format_value(value: float) -> str:
    return str(int(value)) if value == int(value) else repr(value)


def dataset_to_csv(dataset: LabeledDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.feature_names) + ["label", "site"])
        for site, fv, label in dataset.rows:
            writer.writerow([_format_value(v) for v in fv.values] + [label, site])


def dataset_from_csv(path: str | Path) -> LabeledDataset:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-2:] != ["label", "site"]:
            raise ValueError("dataset CSV must end with label,site columns")
        names = header[:-2]
        if list(names) != list(FEATURE_NAMES):
            raise SchemaMismatchError("dataset CSV feature columns do not match the schema")
        rows = []
        for row in reader:
            values = [float(v) for v in row[: len(names)]]
            label, site = row[-2], row[-1]
            rows.append((site, FeatureVector(values=values), label))
    return LabeledDataset(rows=rows, feature_names=list(names))


def dataset_to_jsonl(dataset: LabeledDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for site, fv, label in dataset.rows:
            fh.write(
                json.dumps(
                    {
                        "rec": "features",
                        "site": site,
                        "label": label,
                        "schema_version": fv.schema_version,
                        "values": fv.values,
                    },
                    ensure_ascii=False,
                    separators=(",", ":"),
                )
                + "\n"
            )
