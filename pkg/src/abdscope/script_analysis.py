"""Characterization of detection scripts: signatures, AST vectors, families.

Scripts are fingerprinted by the frequency of AST node types along a
pre-order traversal, which survives identifier renaming and literal edits.
Families emerge from density clustering of the length-normalized vectors;
a 3-D principal-component projection is exported for plotting.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .capture import ScriptSnippet
from .errors import (
    InsufficientDataError,
    InsufficientVarianceError,
    RegistryMissError,
    RuleCompileError,
)
from .jsast import parse_program

SCANNER_KEYWORDS = (
    "adblock",
    "adblock plus",
    "blockadblock",
    "fuckadblock",
    "pagefair",
    "sourcepoint",
)

# web_accessible_resources probed by commercial detectors to confirm an
# installed blocker, keyed by the extension they identify.
EXTENSION_RESOURCE_URLS = {
    "adblock": "chrome-extension://gighmmpiobklfepjocnamgkkbiglidom/img/icon24.png",
    "adblock_plus": "chrome-extension://cfhdojbkjhnklbpkdaibdccddilifddb/block.html",
    "adblock_pro": "chrome-extension://ocifcklkibdehekfnmflempfgjhbedch/components/block/block.html",
    "adblock_premium": "chrome-extension://fndlhnanhedoklpdaacidomdnplcjcpj/img/icon24.png",
    "adblock_super": "chrome-extension://knebimhcckndhiglamoabbnifdkijidd/widgets/block/block.html",
    "adguard": "chrome-extension://bgnkhhnnamicmpeenaelnjfhikgbkllg/elemhidehit.png",
    "adremover": "chrome-extension://mcefmojpghnaceadnghednjhbmphipkb/img/icon24.png",
    "ublock": "chrome-extension://epcnnfbjfcgphgdmggkamkmgojdagdnn/document-blocked.html",
}

KIND_KEYWORD = "keyword"
KIND_BAIT = "bait-pattern"
KIND_EXTENSION = "extension-resource"
KIND_TIMING = "timing-pattern"
RULE_KINDS = (KIND_KEYWORD, KIND_BAIT, KIND_EXTENSION, KIND_TIMING)


@dataclass
class SignatureRule:
    rule_id: str
    kind: str
    pattern: str
    description: str = ""


def default_rules() -> list[SignatureRule]:
    rules = [
        SignatureRule(f"kw-{kw.replace(' ', '-')}", KIND_KEYWORD, kw, f"keyword {kw!r}")
        for kw in SCANNER_KEYWORDS
    ]
    rules += [
        SignatureRule(f"ext-{name}", KIND_EXTENSION, re.escape(url), f"{name} resource probe")
        for name, url in EXTENSION_RESOURCE_URLS.items()
    ]
    rules += [
        SignatureRule(
            "bait-offscreen-1x1",
            KIND_BAIT,
            r"""(?i)style\s*\.\s*(?:width|height)\s*=\s*["']1px["']""",
            "1x1 decoy element sized via inline style",
        ),
        SignatureRule(
            "bait-ad-named-id",
            KIND_BAIT,
            r"(?i)influads_block|adsense\.js|textlink-ads",
            "decoy ids and urls with ad-flavored names",
        ),
        SignatureRule(
            "timing-delayed-check",
            KIND_TIMING,
            r"(?is)set(?:timeout|interval)\s*\([\s\S]{0,500}?"
            r"(?:adblock|\bads?\b|\.height\(|:visible|:hidden|offsetheight)",
            "delayed timer gating an ad presence check",
        ),
    ]
    return rules


@dataclass
class _CompiledRule:
    rule: SignatureRule
    regex: re.Pattern


def compile_rules(rules: list[SignatureRule]) -> list[_CompiledRule]:
    """Validate and compile a rule set; all failures surface before scanning."""
    seen: set[str] = set()
    compiled = []
    for rule in rules:
        if rule.rule_id in seen:
            raise RuleCompileError(rule.rule_id, "duplicate rule_id")
        seen.add(rule.rule_id)
        if rule.kind not in RULE_KINDS:
            raise RuleCompileError(rule.rule_id, f"unknown kind {rule.kind!r}")
        try:
            if rule.kind == KIND_KEYWORD:
                regex = re.compile(re.escape(rule.pattern), re.IGNORECASE)
            else:
                regex = re.compile(rule.pattern)
        except re.error as exc:
            raise RuleCompileError(rule.rule_id, f"pattern does not compile: {exc}") from exc
        compiled.append(_CompiledRule(rule, regex))
    return compiled


def scan_scripts(
    scripts: list[ScriptSnippet], rules: list[SignatureRule]
) -> dict[str, dict[str, int]]:
    """Per-snippet rule hits: {snippet_id: {rule_id: match_count}}."""
    compiled = compile_rules(rules)
    hits: dict[str, dict[str, int]] = {}
    for snippet in scripts:
        found = {}
        for item in compiled:
            count = len(item.regex.findall(snippet.body))
            if count:
                found[item.rule.rule_id] = count
        hits[snippet.snippet_id] = found
    return hits


# ---------------------------------------------------------------------------
# AST vectors


_STANDARD_NODE_TYPES = (
    "Program",
    "ExpressionStatement",
    "BlockStatement",
    "EmptyStatement",
    "DebuggerStatement",
    "WithStatement",
    "ReturnStatement",
    "LabeledStatement",
    "BreakStatement",
    "ContinueStatement",
    "IfStatement",
    "SwitchStatement",
    "SwitchCase",
    "ThrowStatement",
    "TryStatement",
    "CatchClause",
    "WhileStatement",
    "DoWhileStatement",
    "ForStatement",
    "ForInStatement",
    "ForOfStatement",
    "FunctionDeclaration",
    "VariableDeclaration",
    "VariableDeclarator",
    "ThisExpression",
    "ArrayExpression",
    "ObjectExpression",
    "Property",
    "FunctionExpression",
    "ArrowFunctionExpression",
    "UnaryExpression",
    "UpdateExpression",
    "BinaryExpression",
    "AssignmentExpression",
    "LogicalExpression",
    "MemberExpression",
    "ConditionalExpression",
    "CallExpression",
    "NewExpression",
    "SequenceExpression",
    "Identifier",
    "Literal",
    "TemplateLiteral",
    "TemplateElement",
    "TaggedTemplateExpression",
    "SpreadElement",
    "RestElement",
    "AssignmentPattern",
    "ObjectPattern",
    "ArrayPattern",
    "ClassDeclaration",
    "ClassExpression",
    "ClassBody",
    "MethodDefinition",
    "PropertyDefinition",
    "StaticBlock",
    "PrivateIdentifier",
    "Super",
    "MetaProperty",
    "YieldExpression",
    "AwaitExpression",
    "ChainExpression",
    "ImportExpression",
    "ImportDeclaration",
    "ImportSpecifier",
    "ImportDefaultSpecifier",
    "ImportNamespaceSpecifier",
    "ExportNamedDeclaration",
    "ExportDefaultDeclaration",
    "ExportAllDeclaration",
    "ExportSpecifier",
)

REGISTRY_SIZE = 88
OTHER_NODE_TYPE = "Other"


@dataclass
class NodeTypeRegistry:
    names: list[str]

    @property
    def size(self) -> int:
        return len(self.names)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("registry names must be unique")
        self._index = {name: i for i, name in enumerate(self.names)}

    def index_of(self, name: str, strict: bool = False) -> int:
        idx = self._index.get(name)
        if idx is not None:
            return idx
        if strict or OTHER_NODE_TYPE not in self._index:
            raise RegistryMissError(f"node type {name!r} not in registry")
        return self._index[OTHER_NODE_TYPE]


def default_registry() -> NodeTypeRegistry:
    """The fixed 88-slot registry: standard types, reserved padding, Other."""
    padding = [f"Reserved{i:02d}" for i in range(1, REGISTRY_SIZE - len(_STANDARD_NODE_TYPES))]
    names = list(_STANDARD_NODE_TYPES) + padding + [OTHER_NODE_TYPE]
    assert len(names) == REGISTRY_SIZE
    return NodeTypeRegistry(names=names)


@dataclass
class AstVector:
    snippet_id: str
    counts: list[int]
    sequence_length: int


def parse_to_preorder(
    snippet: ScriptSnippet, registry: NodeTypeRegistry, strict: bool = False
) -> list[int]:
    """Registry indices of node types along a depth-first pre-order walk."""
    tree = parse_program(snippet.body)
    return [registry.index_of(type_name, strict) for type_name in tree.preorder()]


def vectorize(sequence: list[int], snippet_id: str = "", size: int = REGISTRY_SIZE) -> AstVector:
    counts = [0] * size
    for index in sequence:
        counts[index] += 1
    return AstVector(snippet_id=snippet_id, counts=counts, sequence_length=len(sequence))


def vectorize_snippet(
    snippet: ScriptSnippet, registry: NodeTypeRegistry | None = None, strict: bool = False
) -> AstVector:
    registry = registry or default_registry()
    sequence = parse_to_preorder(snippet, registry, strict)
    return vectorize(sequence, snippet_id=snippet.snippet_id, size=registry.size)


# ---------------------------------------------------------------------------
# PCA


@dataclass
class PcaResult:
    snippet_ids: list[str]
    coords: np.ndarray  # (n, k)
    explained_variance_ratio: np.ndarray  # (k,)
    components: np.ndarray  # (k, d), orthonormal rows


def _pca_matrix(matrix: np.ndarray, n_components: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = matrix.shape[0]
    centered = matrix - matrix.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    total_variance = float(np.sum(s**2))
    if total_variance == 0.0:
        raise InsufficientVarianceError("all vectors identical, covariance is zero")
    components = vt[:n_components].copy()
    # Deterministic sign: the largest-magnitude entry of each component is
    # positive.
    for row in range(components.shape[0]):
        pivot = int(np.argmax(np.abs(components[row])))
        if components[row, pivot] < 0:
            components[row] = -components[row]
    coords = centered @ components.T
    ratios = (s[:n_components] ** 2) / total_variance
    return coords, ratios, components


def pca_reduce(vectors: list[AstVector], n_components: int = 3) -> PcaResult:
    """Top principal components of the raw count matrix."""
    if len(vectors) < 2:
        raise InsufficientDataError("PCA needs at least 2 vectors")
    matrix = np.array([v.counts for v in vectors], dtype=np.float64)
    if not 1 <= n_components <= min(matrix.shape):
        raise ValueError(
            f"n_components must be within [1, {min(matrix.shape)}], got {n_components}"
        )
    coords, ratios, components = _pca_matrix(matrix, n_components)
    return PcaResult(
        snippet_ids=[v.snippet_id for v in vectors],
        coords=coords,
        explained_variance_ratio=ratios,
        components=components,
    )


# ---------------------------------------------------------------------------
# density clustering


OUTLIER = "outlier"


@dataclass
class ClusterReport:
    assignments: dict[str, str]
    pca_coords: dict[str, list[float]]
    family_sizes: dict[str, int]
    dense_family_label: str | None


def _normalized_matrix(vectors: list[AstVector]) -> np.ndarray:
    matrix = np.array([v.counts for v in vectors], dtype=np.float64)
    lengths = np.array([max(v.sequence_length, 1) for v in vectors], dtype=np.float64)
    return matrix / lengths[:, None]


def default_epsilon(vectors: list[AstVector], percentile: float = 10.0) -> float:
    """The given percentile of pairwise distances on normalized vectors."""
    if len(vectors) < 2:
        return 0.0
    matrix = _normalized_matrix(vectors)
    diffs = matrix[:, None, :] - matrix[None, :, :]
    dists = np.sqrt((diffs**2).sum(axis=2))
    upper = dists[np.triu_indices(len(vectors), k=1)]
    return float(np.percentile(upper, percentile))


def cluster_families(
    vectors: list[AstVector],
    epsilon: float | None = None,
    min_neighbors: int = 4,
) -> ClusterReport:
    """Density clustering on length-normalized vectors.

    A point is core when at least min_neighbors points (itself included)
    lie within epsilon; clusters are connected components of core points
    plus border points. Labels are deterministic: clusters are ordered by
    their smallest member snippet_id, and a border point in reach of
    several clusters joins the one of the smallest-id core.
    """
    if not vectors:
        raise InsufficientDataError("clustering needs at least 1 vector")
    ids = [v.snippet_id for v in vectors]
    n = len(vectors)
    if epsilon is None:
        epsilon = default_epsilon(vectors)

    matrix = _normalized_matrix(vectors)
    diffs = matrix[:, None, :] - matrix[None, :, :]
    dists = np.sqrt((diffs**2).sum(axis=2))
    within = dists <= epsilon
    core = within.sum(axis=1) >= min_neighbors

    # Connected components over core points.
    component = [-1] * n
    n_components = 0
    for start in sorted(range(n), key=lambda i: ids[i]):
        if not core[start] or component[start] >= 0:
            continue
        stack = [start]
        component[start] = n_components
        while stack:
            i = stack.pop()
            for j in range(n):
                if core[j] and component[j] < 0 and within[i, j]:
                    component[j] = n_components
                    stack.append(j)
        n_components += 1

    # Border points attach to the smallest-id core point in reach.
    for i in range(n):
        if core[i] or not within[i][core].any():
            continue
        candidates = [j for j in range(n) if core[j] and within[i, j]]
        best = min(candidates, key=lambda j: ids[j])
        component[i] = component[best]

    members: dict[int, list[str]] = {}
    for i, comp in enumerate(component):
        if comp >= 0:
            members.setdefault(comp, []).append(ids[i])
    ordered = sorted(members.values(), key=min)
    label_of_comp = {}
    for rank, group in enumerate(ordered, start=1):
        for comp, grp in members.items():
            if grp is group:
                label_of_comp[comp] = f"family-{rank}"

    assignments = {
        ids[i]: (label_of_comp[component[i]] if component[i] >= 0 else OUTLIER)
        for i in range(n)
    }
    family_sizes = {label_of_comp[comp]: len(group) for comp, group in members.items()}
    dense = None
    if family_sizes:
        dense = min(family_sizes, key=lambda label: (-family_sizes[label], label))

    k = min(3, n, matrix.shape[1])
    coords: dict[str, list[float]]
    try:
        if n >= 2:
            pcs, _, _ = _pca_matrix(matrix, k)
            padded = np.zeros((n, 3))
            padded[:, :k] = pcs
            coords = {ids[i]: padded[i].tolist() for i in range(n)}
        else:
            coords = {ids[0]: [0.0, 0.0, 0.0]}
    except InsufficientVarianceError:
        coords = {sid: [0.0, 0.0, 0.0] for sid in ids}

    return ClusterReport(
        assignments=assignments,
        pca_coords=coords,
        family_sizes=family_sizes,
        dense_family_label=dense,
    )


# ---------------------------------------------------------------------------
# rule and report files


def load_rules(path: str | Path) -> list[SignatureRule]:
    """Rule set from a JSON file: a list of rule objects."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise RuleCompileError("<file>", "rules file must hold a JSON list")
    rules = []
    for obj in data:
        missing = {"rule_id", "kind", "pattern"} - set(obj)
        if missing:
            raise RuleCompileError(str(obj.get("rule_id", "<unknown>")), f"missing {sorted(missing)}")
        rules.append(
            SignatureRule(
                rule_id=obj["rule_id"],
                kind=obj["kind"],
                pattern=obj["pattern"],
                description=obj.get("description", ""),
            )
        )
    compile_rules(rules)
    return rules


def save_rules(rules: list[SignatureRule], path: str | Path) -> None:
    data = [
        {"rule_id": r.rule_id, "kind": r.kind, "pattern": r.pattern, "description": r.description}
        for r in rules
    ]
    Path(path).write_text(json.dumps(data, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def cluster_report_to_json(report: ClusterReport) -> str:
    obj = {
        "rec": "clusters",
        "assignments": dict(sorted(report.assignments.items())),
        "pca_coords": dict(sorted(report.pca_coords.items())),
        "family_sizes": dict(sorted(report.family_sizes.items())),
        "dense_family_label": report.dense_family_label,
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def cluster_report_to_csv(report: ClusterReport) -> str:
    lines = ["snippet_id,pc1,pc2,pc3,cluster"]
    for snippet_id in sorted(report.assignments):
        x, y, z = report.pca_coords[snippet_id]
        lines.append(
            f"{snippet_id},{x!r},{y!r},{z!r},{report.assignments[snippet_id]}"
        )
    return "\n".join(lines) + "\n"
