"""Acceptance gate: every release criterion, one test each.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion. Tolerances are asserted exactly as stated; nothing here adapts
to the implementation under test.
"""

import copy
import json
import math
import time

import numpy as np
import pytest

from abdscope.capture import MutationEvent, assemble_triple
from abdscope.classify import (
    FOREST,
    NAIVE_BAYES,
    TREE,
    DiscretizationWarning,
    auc_score,
    cross_validate,
    information_gain,
    rank_features,
    relative_information_gain,
    train_tree,
)
from abdscope.cli import main as cli_main
from abdscope.diffing import diff_triple
from abdscope.features import FEATURE_NAMES, build_dataset, extract_features
from abdscope.script_analysis import (
    EXTENSION_RESOURCE_URLS,
    OUTLIER,
    cluster_families,
    default_rules,
    pca_reduce,
    scan_scripts,
    vectorize_snippet,
)
from abdscope.synth import synth_reports

from conftest import clone_with_variant, load_fixture_snippets, make_capture, make_node, make_script
from test_classify import (
    brute_auc,
    brute_best_split,
    brute_entropy,
    brute_information_gain,
    dataset_from_columns,
)

TEXT_FEATURES = {"t_lines", "t_chars", "t_words", "t_bag_keyword_hits", "n_text_nodes_added"}
STYLE_FEATURES = {
    "ch_display",
    "ch_visibility",
    "ch_height",
    "ch_width",
    "ch_opacity",
    "ch_maxheight",
    "ch_background_size",
    "ch_style_total",
}


def _announce(criterion: str, detail: str) -> None:
    print(f"[PASS] {criterion}: {detail}")


# ---------------------------------------------------------------------------


def test_synthetic_end_to_end():
    started = time.monotonic()
    ds = build_dataset(synth_reports(seed=0))
    assert len(ds.rows) == 1200
    assert int(ds.labels().sum()) == 200
    canonical = cross_validate(ds, {"kind": FOREST, "seed": 0}, k=5, seed=0)
    elapsed = time.monotonic() - started
    assert canonical.precision >= 0.90
    assert canonical.recall >= 0.90
    assert elapsed < 60.0

    ordered = 0
    details = []
    for seed in range(5):
        ds_i = ds if seed == 0 else build_dataset(synth_reports(seed=seed))
        forest = (
            canonical
            if seed == 0
            else cross_validate(ds_i, {"kind": FOREST, "seed": seed}, k=5, seed=seed)
        )
        tree = cross_validate(ds_i, {"kind": TREE}, k=5, seed=seed)
        nb = cross_validate(ds_i, {"kind": NAIVE_BAYES}, k=5, seed=seed)
        assert forest.precision >= 0.90 and forest.recall >= 0.90
        if forest.auc >= tree.auc >= nb.auc:
            ordered += 1
        details.append(f"s{seed} F={forest.auc:.4f} T={tree.auc:.4f} N={nb.auc:.4f}")
    assert ordered >= 4, f"AUC ordering held on {ordered}/5 reruns: {details}"
    _announce(
        "synthetic end-to-end",
        f"P={canonical.precision:.3f} R={canonical.recall:.3f} in {elapsed:.1f}s; "
        f"ordering {ordered}/5",
    )


def test_information_gain_oracle():
    import warnings

    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(2, 17))
        labels = [int(v) for v in rng.integers(0, 2, size=n)]
        if len(set(labels)) < 2:
            labels[0] = 1 - labels[0]
        column = [int(v) for v in rng.integers(0, 4, size=n)]
        ds = dataset_from_columns([column], labels)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DiscretizationWarning)
            ig = information_gain(ds, 0)
            rig = relative_information_gain(ds, 0)
        expected_ig = brute_information_gain(column, labels)
        expected_rig = expected_ig / brute_entropy([labels.count(0), labels.count(1)])
        assert abs(ig - expected_ig) <= 1e-12
        assert abs(rig - expected_rig) <= 1e-12
        checked += 1

    ranking = rank_features(build_dataset(synth_reports(seed=0))).entries
    first = ranking[0][0]
    assert first in TEXT_FEATURES, f"top feature {first} is not a text feature"
    best_text = max(v for n, v in ranking if n in TEXT_FEATURES)
    best_style = max(v for n, v in ranking if n in STYLE_FEATURES)
    assert best_text > best_style
    _announce(
        "information-gain oracle",
        f"{checked} datasets within 1e-12; corpus top feature = {first}",
    )


def test_tree_induction_oracle():
    rng = np.random.default_rng(777)
    checked = 0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, 3))
        X = rng.integers(0, 4, size=(n, d)).astype(float)
        y = rng.integers(0, 2, size=n)
        if len(set(y.tolist())) < 2:
            y[0] = 1 - y[0]
        ds = dataset_from_columns([X[:, f].tolist() for f in range(d)], y.tolist())
        root = train_tree(ds, min_samples_leaf=1).parameters["tree"]
        oracle = brute_best_split(ds.matrix()[:, :d], ds.labels(), min_samples_leaf=1)
        if oracle is None:
            assert root.is_leaf
        else:
            assert (root.feature_index, root.threshold) == oracle
        checked += 1
    _announce("tree-induction oracle", f"root split exact on {checked}/100 datasets")


def test_metrics_oracle():
    # Hand-computed confusion: a stub scorer with known outcomes.
    # 6 positives scored [.9,.8,.8,.7,.4,.2], 4 negatives [.6,.5,.3,.1];
    # threshold 0.5 labels the first four positives and two negatives positive.
    scores = [0.9, 0.8, 0.8, 0.7, 0.4, 0.2, 0.6, 0.5, 0.3, 0.1]
    labels = [1, 1, 1, 1, 1, 1, 0, 0, 0, 0]
    preds = [1 if s >= 0.5 else 0 for s in scores]
    tp = sum(1 for p, y in zip(preds, labels) if p == 1 and y == 1)
    fp = sum(1 for p, y in zip(preds, labels) if p == 1 and y == 0)
    fn = sum(1 for p, y in zip(preds, labels) if p == 0 and y == 1)
    assert (tp, fp, fn) == (4, 2, 2)
    assert tp / (tp + fp) == 4 / 6
    assert tp / (tp + fn) == 4 / 6
    assert abs(auc_score(scores, labels) - brute_auc(scores, labels)) <= 1e-12

    rng = np.random.default_rng(404)
    for _ in range(100):
        n = int(rng.integers(4, 51))
        ys = [int(v) for v in rng.integers(0, 2, size=n)]
        if len(set(ys)) < 2:
            ys[0] = 1 - ys[0]
        ss = [float(v) for v in rng.integers(0, 6, size=n)]
        assert abs(auc_score(ss, ys) - brute_auc(ss, ys)) <= 1e-12

    report = cross_validate(
        build_dataset(synth_reports(60, 240, seed=5)), {"kind": FOREST, "seed": 5, "n_trees": 20}, k=5, seed=5
    )
    assert report.precision == (report.tp / (report.tp + report.fp) if report.tp + report.fp else 0.0)
    assert report.recall == (report.tp / (report.tp + report.fn) if report.tp + report.fn else 0.0)
    _announce("metrics oracle", "confusion formulas exact; AUC matches pair counting <= 1e-12")


def _random_base_page(rng, site):
    tags = ["div", "p", "h1", "img", "table", "span", "section"]
    nodes = []
    for i in range(int(rng.integers(2, 8))):
        tag = tags[int(rng.integers(0, len(tags)))]
        nodes.append(
            make_node(
                f"b{i}",
                tag,
                text=f"text {int(rng.integers(0, 5))}" if rng.random() < 0.5 else "",
                classes=("c" + str(int(rng.integers(0, 3))),),
            )
        )
    text = "\n".join(f"line {int(v)}" for v in rng.integers(0, 9, size=int(rng.integers(1, 6))))
    html = "<html><body>" + " ".join(n.tag for n in nodes) + "</body></html>"
    return make_capture(site=site, variant="B", nodes=nodes, text=text, html=html)


def _perturb(rng, capture, stamp):
    """Random extra nodes, attribute events, and text lines."""
    extra_nodes = []
    for j in range(int(rng.integers(1, 4))):
        extra_nodes.append(
            make_node(
                f"x{stamp}{j}",
                ["div", "img", "p", "iframe", "h2"][int(rng.integers(0, 5))],
                text=f"noise {int(rng.integers(0, 99))}" if rng.random() < 0.6 else "",
                classes=("promo",),
            )
        )
    capture.dom_nodes.extend(copy.deepcopy(extra_nodes))
    for j in range(int(rng.integers(0, 3))):
        prop = ["visibility", "display", "height", "other-style"][int(rng.integers(0, 4))]
        capture.mutations.append(
            MutationEvent(
                kind="attr-changed",
                timestamp_ms=100 + j,
                node=copy.deepcopy(extra_nodes[0]),
                attr_name=prop,
                old_value="a",
                new_value="b",
            )
        )
    lines = [f"ticker {int(v)}" for v in rng.integers(0, 9, size=int(rng.integers(0, 4)))]
    if lines:
        capture.inner_text += "\n" + "\n".join(lines)
    capture.inner_html = capture.inner_html.replace("</body>", f"<extra-{stamp}></body>")


def test_noise_cancellation_property():
    rng = np.random.default_rng(99)
    zero_slots = [i for i, n in enumerate(FEATURE_NAMES) if n not in ("s_html_cosine", "s_url_changed")]
    for case in range(100):
        base = _random_base_page(rng, f"case-{case}.example")
        bprime = clone_with_variant(base, "Bprime", "m")
        a = clone_with_variant(base, "A", "a")
        b = copy.deepcopy(base)
        # One perturbation recipe, applied identically to A and B only.
        recipe_seed = int(rng.integers(0, 2**31))
        _perturb(np.random.default_rng(recipe_seed), a, "s")
        _perturb(np.random.default_rng(recipe_seed), b, "s")
        report = diff_triple(assemble_triple(a, b, bprime))
        vector = extract_features(report).values
        for i in zero_slots:
            assert vector[i] == 0.0, f"{FEATURE_NAMES[i]} leaked noise in case {case}"
        assert vector[FEATURE_NAMES.index("s_html_cosine")] == 1.0
        assert vector[FEATURE_NAMES.index("s_url_changed")] == 0.0
    _announce("noise cancellation", "100 shared perturbations left all-zero vectors")


TEMPLATE = """setTimeout(function () {{
  var {v1} = document.getElementById({q}{slot}{q});
  if (!{v1} || {v1}.clientHeight === {num}) {{
    var {v2} = document.createElement({q}div{q});
    {v2}.textContent = {q}{msg}{q};
    document.body.appendChild({v2});
  }}
}}, {delay});
"""


def _rename_pair(rng):
    def ident():
        return "v" + "".join(chr(97 + int(c)) for c in rng.integers(0, 26, size=6))

    def variant():
        return dict(
            v1=ident(),
            v2=ident(),
            slot=ident(),
            msg=" ".join(ident() for _ in range(int(rng.integers(1, 5)))),
            num=str(int(rng.integers(0, 50))),
            delay=str(int(rng.integers(500, 5000))),
            q='"',
        )

    return TEMPLATE.format(**variant()), TEMPLATE.format(**variant())


def test_ast_suite(scripts_dir):
    rng = np.random.default_rng(31)
    for i in range(50):
        left, right = _rename_pair(rng)
        va = vectorize_snippet(make_script(left, snippet_id=f"l{i}"))
        vb = vectorize_snippet(make_script(right, snippet_id=f"r{i}"))
        assert va.counts == vb.counts, f"rename pair {i} diverged"
        assert sum(va.counts) == va.sequence_length

    corpus = [vectorize_snippet(s) for s in load_fixture_snippets()]
    for vec in corpus:
        assert sum(vec.counts) == vec.sequence_length

    result = pca_reduce(corpus, n_components=3)
    gram = result.components @ result.components.T
    assert np.abs(gram - np.eye(3)).max() <= 1e-9

    from test_script_analysis import line_vectors

    rank1 = pca_reduce(line_vectors(), n_components=3)
    assert abs(rank1.explained_variance_ratio[0] - 1.0) <= 1e-9

    reference = cluster_families(corpus)
    assert reference.family_sizes == {"family-1": 10}
    assert reference.assignments["probe-service"] == OUTLIER
    shuffler = np.random.default_rng(55)
    for _ in range(20):
        order = shuffler.permutation(len(corpus))
        report = cluster_families([corpus[i] for i in order])
        assert report.assignments == reference.assignments
    _announce(
        "AST suite",
        "50 rename pairs invariant; counts conserved; PCA orthonormal; "
        "fixture = 1 family of 10 + 1 outlier across 20 shuffles",
    )


def test_scanner_criterion():
    rules = default_rules()
    for name, url in EXTENSION_RESOURCE_URLS.items():
        hits = scan_scripts([make_script(f'probe("{url}");')], rules)["s1"]
        assert hits == {f"ext-{name}": 1}, f"{name} URL did not trigger exactly its rule"
    mixed = scan_scripts([make_script("BlockAdBlock && fuckAdBlock && PageFair")], rules)["s1"]
    assert mixed["kw-blockadblock"] == 1
    assert mixed["kw-fuckadblock"] == 1
    assert mixed["kw-pagefair"] == 1
    _announce("scanner", "8 extension-resource URLs exact; keywords case-insensitive")


def test_pipeline_determinism(tmp_path, scripts_dir):
    trees = {}
    for name in ("runA", "runB"):
        out = tmp_path / name
        for argv in (
            ["synth", "--out", str(out), "--seed", "17", "--positives", "50", "--negatives", "200"],
            ["featurize", "--in", str(out), "--labels", str(out / "labels.csv"), "--out", str(out)],
            ["train", "--in", str(out / "dataset.csv"), "--model", "forest", "--seed", "17", "--trees", "30", "--out", str(out)],
            ["eval", "--in", str(out / "dataset.csv"), "--model", "forest", "--seed", "17", "--trees", "30", "--k", "5", "--out", str(out)],
            ["predict", "--in", str(out / "dataset.csv"), "--model-file", str(out / "model.json"), "--out", str(out)],
            ["rank", "--in", str(out / "dataset.csv"), "--out", str(out)],
            ["scan", "--in", str(scripts_dir), "--out", str(out)],
            ["cluster", "--in", str(scripts_dir), "--out", str(out)],
            ["report", "--in", str(out), "--out", str(out)],
        ):
            assert cli_main(argv) == 0, f"command failed: {argv[0]}"
        trees[name] = {
            str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()
        }
    assert trees["runA"] == trees["runB"]
    _announce("determinism", f"{len(trees['runA'])} artifacts byte-identical across reruns")
