import copy

import pytest
from hypothesis import given, strategies as st

from abdscope.capture import MutationEvent, assemble_triple
from abdscope.diffing import (
    ADDED_IN_A,
    REMOVED_IN_A,
    cosine_similarity,
    diff_report_from_json,
    diff_report_to_json,
    diff_triple,
    match_noise_node,
    tokenize_words,
)

from conftest import clone_with_variant, make_capture, make_node


def triple_from(a, b, bp):
    return assemble_triple(a, b, bp)


def base_page(variant="B", prefix="b"):
    nodes = [
        make_node(f"{prefix}1", "div", attr_id="content", text="hello world"),
        make_node(f"{prefix}2", "p", text="article text"),
    ]
    return make_capture(
        variant=variant,
        nodes=nodes,
        text="hello world\narticle text",
        html="<html><body><div>hello world</div><p>article text</p></body></html>",
    )


# -- cosine ------------------------------------------------------------------


def test_cosine_identical_docs():
    assert cosine_similarity("a b c", "a b c") == 1.0


def test_cosine_disjoint_docs():
    assert cosine_similarity("a b", "c d") == 0.0


def test_cosine_derived_half():
    # (1,1,0).(1,0,1) / (sqrt(2)*sqrt(2)) = 1/2
    assert cosine_similarity("a b", "a c") == pytest.approx(0.5, abs=1e-12)


def test_cosine_empty_conventions():
    assert cosine_similarity("", "") == 1.0
    assert cosine_similarity("", "a") == 0.0
    assert cosine_similarity("a", "") == 0.0


@given(st.text("ab \n", max_size=30), st.text("ab \n", max_size=30))
def test_cosine_symmetry_and_range(x, y):
    v = cosine_similarity(x, y)
    assert v == cosine_similarity(y, x)
    assert 0.0 <= v <= 1.0


# -- noise matching ------------------------------------------------------------


def test_match_ignores_identifiers():
    cand = make_node("x1", "div", attr_id="one", classes=("ad", "banner"), attrs={"class": "ad banner"})
    pool = [make_node("y9", "div", attr_id="two", classes=("ad", "banner"), attrs={"class": "ad banner"})]
    assert match_noise_node(cand, pool)


def test_match_requires_same_parent_path():
    cand = make_node(path=("html", "body", "main"))
    pool = [make_node(path=("html", "body"))]
    assert not match_noise_node(cand, pool)


def test_match_classes_or_attr_names():
    cand = make_node(classes=("a",), attrs={"class": "a", "src": "/1.png"})
    # Different classes but same attribute-name set
    pool = [make_node(classes=("b",), attrs={"class": "b", "src": "/2.png"})]
    assert match_noise_node(cand, pool)
    # Different classes and different attribute names
    pool = [make_node(classes=("b",), attrs={"id": "q"})]
    assert not match_noise_node(cand, pool)


def test_match_requires_same_text():
    cand = make_node(text="one")
    assert not match_noise_node(cand, [make_node(text="two")])
    assert match_noise_node(cand, [make_node(text=" one  ")])  # normalized


# -- diff_triple ------------------------------------------------------------


def test_identical_captures_diff_clean():
    b = base_page("B")
    a = clone_with_variant(b, "A", "a")
    bp = clone_with_variant(b, "Bprime", "m")
    report = diff_triple(triple_from(a, b, bp))
    assert report.node_diffs == []
    assert report.attr_diffs == []
    assert report.html_cosine == 1.0
    assert report.url_changed is False
    assert report.text_diff.lines_added == 0
    assert report.text_diff.words_changed == 0


def test_single_added_div():
    b = base_page("B")
    bp = clone_with_variant(b, "Bprime", "m")
    a = clone_with_variant(b, "A", "a")
    a.dom_nodes.append(make_node("a9", "div", classes=("warn",), attrs={"class": "warn"}, text="disable adblock"))
    report = diff_triple(triple_from(a, b, bp))
    added = [d for d in report.node_diffs if d.direction == ADDED_IN_A]
    assert len(added) == 1
    assert added[0].node.tag == "div"
    assert added[0].matched_noise is False


def test_rotating_banner_cancelled():
    def with_banner(page, src):
        page = copy.deepcopy(page)
        page.dom_nodes.append(
            make_node("z5", "img", classes=("banner",), attrs={"class": "banner", "src": src})
        )
        return page

    b = with_banner(base_page("B"), "/r/2.png")
    bp = clone_with_variant(with_banner(base_page("B"), "/r/3.png"), "Bprime", "m")
    a = clone_with_variant(with_banner(base_page("B"), "/r/1.png"), "A", "a")
    report = diff_triple(triple_from(a, b, bp))
    assert all(d.matched_noise for d in report.node_diffs)
    assert len(report.node_diffs) == 2  # banner added-in-A and removed-in-A views


def test_monotonicity_one_more_unmatched_node():
    b = base_page("B")
    bp = clone_with_variant(b, "Bprime", "m")
    a = clone_with_variant(b, "A", "a")
    before = diff_triple(triple_from(a, b, bp))
    n_before = sum(1 for d in before.node_diffs if not d.matched_noise and d.direction == ADDED_IN_A)
    a.dom_nodes.append(make_node("a7", "h2", text="fresh"))
    after = diff_triple(triple_from(a, b, bp))
    n_after = sum(1 for d in after.node_diffs if not d.matched_noise and d.direction == ADDED_IN_A)
    assert n_after == n_before + 1


def test_attr_diff_from_mutations_and_cancellation():
    b = base_page("B")
    bp = clone_with_variant(b, "Bprime", "m")
    a = clone_with_variant(b, "A", "a")
    target = make_node("a5", "div", attr_id="notice", text="see me")
    a.mutations = [
        MutationEvent(
            kind="attr-changed",
            timestamp_ms=2000,
            node=target,
            attr_name="visibility",
            old_value="hidden",
            new_value="visible",
        )
    ]
    report = diff_triple(triple_from(a, b, bp))
    assert len(report.attr_diffs) == 1
    diff = report.attr_diffs[0]
    assert (diff.property, diff.old_value, diff.new_value) == ("visibility", "hidden", "visible")
    assert diff.matched_noise is False

    # The same flip also seen between B and B' marks it as noise.
    b2 = copy.deepcopy(b)
    b2.mutations = [
        MutationEvent(
            kind="attr-changed",
            timestamp_ms=1500,
            node=make_node("b5", "div", attr_id="notice", text="see me"),
            attr_name="visibility",
            old_value="hidden",
            new_value="visible",
        )
    ]
    report2 = diff_triple(triple_from(a, b2, bp))
    assert [d.matched_noise for d in report2.attr_diffs] == [True]


def test_text_diff_counts():
    b = base_page("B")
    bp = clone_with_variant(b, "Bprime", "m")
    a = clone_with_variant(b, "A", "a")
    a.inner_text = "hello world\narticle text\nplease disable adblock"
    report = diff_triple(triple_from(a, b, bp))
    td = report.text_diff
    assert td.lines_added == 1
    assert td.lines_removed == 0
    assert td.chars_added == len("please disable adblock")
    assert td.changed_word_bag == {"please": 1, "disable": 1, "adblock": 1}
    assert td.words_changed == 3


def test_text_noise_cancelled_via_baselines():
    b = base_page("B")
    b.inner_text += "\nweather 21 degrees"
    bp = clone_with_variant(base_page("B"), "Bprime", "m")
    a = clone_with_variant(base_page("B"), "A", "a")
    a.inner_text += "\nweather 21 degrees"
    report = diff_triple(triple_from(a, b, bp))
    assert report.text_diff.lines_added == 0
    assert report.text_diff.words_changed == 0


def test_words_changed_matches_bag_total():
    b = base_page("B")
    bp = clone_with_variant(b, "Bprime", "m")
    a = clone_with_variant(b, "A", "a")
    a.inner_text = "hello world\nnew words here"
    report = diff_triple(triple_from(a, b, bp))
    td = report.text_diff
    assert td.words_changed == sum(td.changed_word_bag.values())


def test_url_change_flag():
    b = base_page("B")
    bp = clone_with_variant(b, "Bprime", "m")
    a = clone_with_variant(b, "A", "a")
    a.final_url = "https://site.example/adblock-wall"
    report = diff_triple(triple_from(a, b, bp))
    assert report.url_changed is True


def test_tokenizer_splits_punctuation_and_lowercases():
    assert tokenize_words("Hello, WORLD!it's-fine") == ["hello", "world", "it", "s", "fine"]


def test_diff_report_json_roundtrip():
    b = base_page("B")
    bp = clone_with_variant(b, "Bprime", "m")
    a = clone_with_variant(b, "A", "a")
    a.dom_nodes.append(make_node("a9", "div", text="notice"))
    a.inner_text += "\nnotice"
    report = diff_triple(triple_from(a, b, bp))
    again = diff_report_from_json(diff_report_to_json(report))
    assert again == report
