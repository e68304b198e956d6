"""Diff one site's A/B/Bprime captures and turn the result into features.

Uses the checked-in fixture captures: warn-div.example injects a warning
div when its bait ad is missing, banner-noise.example only rotates a
banner. The second baseline cancels the banner rotation completely.
"""

from pathlib import Path

from abdscope import FEATURE_NAMES, assemble_triple, diff_triple, extract_features, load_capture

CAPTURES = Path(__file__).parent.parent / "tests" / "fixtures" / "captures"


def show(site: str) -> None:
    triple = assemble_triple(
        load_capture(CAPTURES / f"{site}.A.jsonl"),
        load_capture(CAPTURES / f"{site}.B.jsonl"),
        load_capture(CAPTURES / f"{site}.Bprime.jsonl"),
    )
    report = diff_triple(triple)
    print(f"=== {site}")
    for diff in report.node_diffs:
        flag = " [noise]" if diff.matched_noise else ""
        print(f"  node {diff.direction}: <{diff.node.tag}> {diff.node.text[:40]!r}{flag}")
    for diff in report.attr_diffs:
        flag = " [noise]" if diff.matched_noise else ""
        print(f"  attr {diff.property}: {diff.old_value!r} -> {diff.new_value!r}{flag}")
    td = report.text_diff
    print(f"  text: +{td.lines_added}/-{td.lines_removed} lines, {td.words_changed} words changed")
    print(f"  html cosine: {report.html_cosine:.3f}, url changed: {report.url_changed}")
    vector = extract_features(report)
    nonzero = {FEATURE_NAMES[i]: v for i, v in enumerate(vector.values) if v}
    print(f"  features: {nonzero}")


for site in ("warn-div.example", "banner-noise.example", "vis-flip.example"):
    show(site)
