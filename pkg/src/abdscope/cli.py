"""Command-line pipeline driver.

Stages communicate through files: capture dirs feed `diff`, diff dirs feed
`featurize`, dataset CSVs feed the model commands, and `report` folds the
accumulated artifacts into one summary. Every artifact embeds the config
hash and seed of the run that produced it; identical inputs, config, and
seed reproduce every byte.

Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import classify, diffing, features, script_analysis, synth
from .capture import ScriptSnippet, assemble_triple, load_capture
from .errors import AbdscopeError, MissingArtifactError
from .features import NEGATIVE, POSITIVE

_MODEL_KINDS = {"tree": classify.TREE, "forest": classify.FOREST, "nb": classify.NAIVE_BAYES}


def _config_hash(command: str, params: dict) -> str:
    payload = json.dumps({"command": command, **params}, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _write_text(path: Path, text: str) -> None:
    """Write via a temp file and rename, so readers never see partial output."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, obj) -> None:
    _write_text(path, json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")


def _run_manifest(out_dir: Path, command: str, params: dict, extra: dict | None = None) -> str:
    digest = _config_hash(command, params)
    manifest = {"rec": "run", "command": command, "config_hash": digest, "params": params}
    if extra:
        manifest.update(extra)
    _write_json(out_dir / f"{command}.run.json", manifest)
    return digest


# ---------------------------------------------------------------------------
# stage helpers


def _discover_triples(capture_dir: Path):
    paths = sorted(capture_dir.glob("*.jsonl"))
    if not paths:
        raise MissingArtifactError(f"no capture files (*.jsonl) in {capture_dir}")
    by_site: dict[str, dict[str, object]] = {}
    for path in paths:
        capture = load_capture(path)
        variants = by_site.setdefault(capture.site, {})
        if capture.variant in variants:
            raise AbdscopeError(
                f"duplicate capture for site {capture.site!r} variant {capture.variant}"
            )
        variants[capture.variant] = capture
    return by_site


def cmd_diff(args) -> int:
    out_dir = Path(args.out)
    by_site = _discover_triples(Path(args.in_path))
    complete, skipped = [], []
    for site in sorted(by_site):
        variants = by_site[site]
        missing = [v for v in ("A", "B", "Bprime") if v not in variants]
        if missing:
            skipped.append({"site": site, "missing": missing})
        else:
            complete.append(site)

    def one(site: str) -> tuple[str, str]:
        variants = by_site[site]
        triple = assemble_triple(variants["A"], variants["B"], variants["Bprime"])
        return site, diffing.diff_report_to_json(diffing.diff_triple(triple))

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = dict(pool.map(one, complete))
    else:
        results = dict(one(site) for site in complete)

    for site in sorted(results):
        _write_text(out_dir / "diffs" / f"{site}.diff.jsonl", results[site] + "\n")
    _write_json(out_dir / "skipped.json", skipped)
    # Worker count is an execution detail: results are byte-identical either
    # way, so it stays out of the recorded config.
    _run_manifest(out_dir, "diff", {}, {"sites": len(results)})
    print(f"diffed {len(results)} site(s), skipped {len(skipped)}")
    return 0


def _load_reports(diff_dir: Path) -> list[diffing.DiffReport]:
    paths = sorted(diff_dir.glob("*.diff.jsonl"))
    if not paths:
        raise MissingArtifactError(f"no diff reports (*.diff.jsonl) in {diff_dir}")
    return [diffing.diff_report_from_json(p.read_text(encoding="utf-8")) for p in paths]


def _load_labels(path: Path) -> dict[str, str]:
    labels = {}
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "site,label":
        raise AbdscopeError(f"labels file {path} must start with 'site,label'")
    for line in lines[1:]:
        if not line.strip():
            continue
        site, label = line.split(",", 1)
        if label not in (POSITIVE, NEGATIVE):
            raise AbdscopeError(f"label for {site!r} must be positive|negative, got {label!r}")
        labels[site] = label
    return labels


def cmd_featurize(args) -> int:
    out_dir = Path(args.out)
    diff_dir = Path(args.in_path)
    if (diff_dir / "diffs").is_dir():
        diff_dir = diff_dir / "diffs"
    reports = _load_reports(diff_dir)
    labels = _load_labels(Path(args.labels))
    missing = [r.site for r in reports if r.site not in labels]
    if missing:
        raise AbdscopeError(f"no label for site(s): {', '.join(sorted(missing)[:5])} ...")
    dataset = features.build_dataset([(r, labels[r.site]) for r in reports])
    out_dir.mkdir(parents=True, exist_ok=True)
    features.dataset_to_csv(dataset, out_dir / "dataset.csv")
    features.dataset_to_jsonl(dataset, out_dir / "dataset.jsonl")
    _run_manifest(out_dir, "featurize", {}, {"rows": len(dataset.rows)})
    print(f"featurized {len(dataset.rows)} site(s) -> {out_dir / 'dataset.csv'}")
    return 0


def _model_spec(args) -> dict:
    kind = _MODEL_KINDS[args.model]
    spec: dict = {"kind": kind}
    if kind in (classify.TREE, classify.FOREST):
        spec["min_samples_leaf"] = args.min_samples_leaf
        if args.max_depth is not None:
            spec["max_depth"] = args.max_depth
    if kind == classify.FOREST:
        spec["n_trees"] = args.trees
        spec["seed"] = args.seed
    return spec


def cmd_train(args) -> int:
    out_dir = Path(args.out)
    dataset = features.dataset_from_csv(Path(args.in_path))
    spec = _model_spec(args)
    model = classify.train_model(dataset, spec)
    digest = _run_manifest(out_dir, "train", {"spec": spec, "seed": args.seed})
    payload = json.loads(classify.model_to_json(model))
    payload["config_hash"] = digest
    payload["seed"] = args.seed
    _write_json(out_dir / "model.json", payload)
    print(f"trained {model.kind} on {len(dataset.rows)} rows -> {out_dir / 'model.json'}")
    if model.kind == classify.TREE:
        _write_text(out_dir / "tree.txt", classify.export_tree(model))
    return 0


def cmd_eval(args) -> int:
    out_dir = Path(args.out)
    dataset = features.dataset_from_csv(Path(args.in_path))
    spec = _model_spec(args)
    report = classify.cross_validate(dataset, spec, k=args.k, seed=args.seed)
    digest = _run_manifest(out_dir, "eval", {"spec": spec, "k": args.k, "seed": args.seed})
    payload = json.loads(classify.eval_report_to_json(report))
    payload["config_hash"] = digest
    payload["seed"] = args.seed
    _write_json(out_dir / "eval.json", payload)
    _write_text(out_dir / "eval.txt", classify.eval_report_summary(report))
    print(classify.eval_report_summary(report), end="")
    return 0


def cmd_predict(args) -> int:
    out_dir = Path(args.out)
    dataset = features.dataset_from_csv(Path(args.in_path))
    model = classify.load_model(Path(args.model_file))
    lines = ["site,label,score"]
    for site, fv, _ in dataset.rows:
        label, score = classify.predict(model, fv)
        lines.append(f"{site},{label},{score!r}")
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_text(out_dir / "verdicts.csv", "\n".join(lines) + "\n")
    _run_manifest(out_dir, "predict", {"model_kind": model.kind})
    print(f"predicted {len(dataset.rows)} site(s) -> {out_dir / 'verdicts.csv'}")
    return 0


def cmd_rank(args) -> int:
    out_dir = Path(args.out)
    dataset = features.dataset_from_csv(Path(args.in_path))
    ranking = classify.rank_features(dataset)
    digest = _run_manifest(out_dir, "rank", {})
    _write_json(
        out_dir / "ranking.json",
        {
            "rec": "ranking",
            "config_hash": digest,
            "entries": [{"feature": n, "relative_information_gain": v} for n, v in ranking.entries],
        },
    )
    width = max(len(n) for n, _ in ranking.entries)
    text = "\n".join(f"{n:<{width}}  {v * 100:6.2f}%" for n, v in ranking.entries) + "\n"
    _write_text(out_dir / "ranking.txt", text)
    print(text, end="")
    return 0


def _collect_snippets(in_dir: Path) -> list[ScriptSnippet]:
    snippets: list[ScriptSnippet] = []
    for path in sorted(in_dir.glob("*.js")):
        body = path.read_text(encoding="utf-8")
        if body.strip():
            snippets.append(
                ScriptSnippet(snippet_id=path.stem, source_url=path.name, body=body, site=path.stem)
            )
    for path in sorted(in_dir.glob("*.jsonl")):
        capture = load_capture(path)
        snippets.extend(capture.scripts)
    if not snippets:
        raise MissingArtifactError(f"no scripts found in {in_dir}")
    return snippets


def cmd_scan(args) -> int:
    out_dir = Path(args.out)
    rules = (
        script_analysis.load_rules(Path(args.rules))
        if args.rules
        else script_analysis.default_rules()
    )
    snippets = _collect_snippets(Path(args.in_path))
    hits = script_analysis.scan_scripts(snippets, rules)
    site_of = {s.snippet_id: s.site for s in snippets}
    records = [
        {"snippet_id": sid, "site": site_of[sid], "hits": dict(sorted(hits[sid].items()))}
        for sid in sorted(hits)
    ]
    _write_json(out_dir / "hits.json", records)
    csv_lines = ["snippet_id,site,rule_id,count"]
    for rec in records:
        for rule_id, count in rec["hits"].items():
            csv_lines.append(f"{rec['snippet_id']},{rec['site']},{rule_id},{count}")
    _write_text(out_dir / "hits.csv", "\n".join(csv_lines) + "\n")
    _run_manifest(out_dir, "scan", {"rules": len(rules)}, {"snippets": len(snippets)})
    flagged = sum(1 for rec in records if rec["hits"])
    print(f"scanned {len(snippets)} snippet(s), {flagged} with signature hits")
    return 0


def cmd_cluster(args) -> int:
    out_dir = Path(args.out)
    snippets = _collect_snippets(Path(args.in_path))
    registry = script_analysis.default_registry()
    vectors = [
        script_analysis.vectorize_snippet(s, registry, strict=args.strict_ast) for s in snippets
    ]
    report = script_analysis.cluster_families(
        vectors, epsilon=args.epsilon, min_neighbors=args.min_neighbors
    )
    digest = _run_manifest(
        out_dir,
        "cluster",
        {"epsilon": args.epsilon, "min_neighbors": args.min_neighbors, "strict": args.strict_ast},
    )
    payload = json.loads(script_analysis.cluster_report_to_json(report))
    payload["config_hash"] = digest
    _write_json(out_dir / "clusters.json", payload)
    _write_text(out_dir / "clusters.csv", script_analysis.cluster_report_to_csv(report))
    n_families = len(report.family_sizes)
    outliers = sum(1 for v in report.assignments.values() if v == script_analysis.OUTLIER)
    print(f"clustered {len(vectors)} snippet(s): {n_families} family(ies), {outliers} outlier(s)")
    return 0


def cmd_synth(args) -> int:
    out_dir = Path(args.out)
    reports = synth.synth_reports(args.positives, args.negatives, seed=args.seed)
    labels = ["site,label"]
    for report, label in reports:
        _write_text(out_dir / "diffs" / f"{report.site}.diff.jsonl", diffing.diff_report_to_json(report) + "\n")
        labels.append(f"{report.site},{label}")
    _write_text(out_dir / "labels.csv", "\n".join(labels) + "\n")
    _run_manifest(
        out_dir,
        "synth",
        {"positives": args.positives, "negatives": args.negatives, "seed": args.seed},
    )
    print(f"generated {len(reports)} synthetic diff report(s) under {out_dir}")
    return 0


def cmd_report(args) -> int:
    in_dir = Path(args.in_path)
    out_dir = Path(args.out)

    def need(name: str) -> Path:
        matches = sorted(in_dir.rglob(name))
        if not matches:
            raise MissingArtifactError(f"missing artifact {name!r} under {in_dir}")
        return matches[0]

    verdicts: dict[str, tuple[str, float]] = {}
    for line in need("verdicts.csv").read_text(encoding="utf-8").splitlines()[1:]:
        if line.strip():
            site, label, score = line.split(",")
            verdicts[site] = (label, float(score))

    scan_hits: dict[str, int] = {}
    for rec in json.loads(need("hits.json").read_text(encoding="utf-8")):
        scan_hits[rec["site"]] = scan_hits.get(rec["site"], 0) + sum(rec["hits"].values())

    eval_obj = json.loads(need("eval.json").read_text(encoding="utf-8"))
    ranking = json.loads(need("ranking.json").read_text(encoding="utf-8"))["entries"]
    clusters = json.loads(need("clusters.json").read_text(encoding="utf-8"))

    categories = {"responds-to-adblock": [], "silent-detector": [], "clean": []}
    for site in sorted(set(verdicts) | set(scan_hits)):
        label = verdicts.get(site, (NEGATIVE, 0.0))[0]
        if label == POSITIVE:
            categories["responds-to-adblock"].append(site)
        elif scan_hits.get(site, 0) >= 1:
            categories["silent-detector"].append(site)
        else:
            categories["clean"].append(site)

    lines = ["site verdicts", "============="]
    for name in ("responds-to-adblock", "silent-detector", "clean"):
        lines.append(f"{name}: {len(categories[name])}")
    lines.append("")
    lines.append("per-site categorization")
    for name in ("responds-to-adblock", "silent-detector"):
        for site in categories[name]:
            lines.append(f"  {site}: {name}")
    lines.append("")
    lines.append("classifier metrics (cross-validated)")
    lines.append("====================================")
    lines.append(f"precision: {eval_obj['precision']:.4f}")
    lines.append(f"recall:    {eval_obj['recall']:.4f}")
    lines.append(f"auc:       {eval_obj['auc']:.4f}")
    conf = eval_obj["confusion"]
    lines.append(f"confusion: tp={conf['tp']} fp={conf['fp']} tn={conf['tn']} fn={conf['fn']}")
    lines.append("")
    lines.append("top features by relative information gain")
    lines.append("==========================================")
    for entry in ranking[:10]:
        lines.append(f"  {entry['feature']:<22} {entry['relative_information_gain'] * 100:6.2f}%")
    lines.append("")
    lines.append("script families")
    lines.append("===============")
    for label, size in sorted(clusters["family_sizes"].items()):
        marker = " (dense)" if label == clusters["dense_family_label"] else ""
        lines.append(f"  {label}: {size} snippet(s){marker}")
    outliers = sum(1 for v in clusters["assignments"].values() if v == "outlier")
    lines.append(f"  outliers: {outliers}")
    text = "\n".join(lines) + "\n"
    _write_text(out_dir / "report.txt", text)
    _run_manifest(out_dir, "report", {})
    print(text, end="")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abdscope", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler, **flags):
        p = sub.add_parser(name)
        p.set_defaults(handler=handler)
        if flags.get("in", True):
            p.add_argument("--in", dest="in_path", required=True, help="input path")
        p.add_argument("--out", required=True, help="output directory")
        return p

    add("diff", cmd_diff).add_argument("--workers", type=int, default=1)

    p = add("featurize", cmd_featurize)
    p.add_argument("--labels", required=True)

    for name, handler in (("train", cmd_train), ("eval", cmd_eval)):
        p = add(name, handler)
        p.add_argument("--model", choices=sorted(_MODEL_KINDS), default="forest")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trees", type=int, default=100)
        p.add_argument("--min-samples-leaf", type=int, default=2)
        p.add_argument("--max-depth", type=int, default=None)
        if name == "eval":
            p.add_argument("--k", type=int, default=5)

    p = add("predict", cmd_predict)
    p.add_argument("--model-file", required=True)

    add("rank", cmd_rank)

    p = add("scan", cmd_scan)
    p.add_argument("--rules", default=None)

    p = add("cluster", cmd_cluster)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--min-neighbors", type=int, default=4)
    p.add_argument("--strict-ast", action="store_true")

    p = add("synth", cmd_synth, **{"in": False})
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--positives", type=int, default=200)
    p.add_argument("--negatives", type=int, default=1000)

    add("report", cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"abdscope: {exc}", file=sys.stderr)
        return 1
    try:
        return args.handler(args)
    except AbdscopeError as exc:
        print(f"abdscope: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"abdscope: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failures
        print(f"abdscope: internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
