"""Differential detection and characterization of anti-ad-block logic.

The toolkit compares page-load captures taken with and without an
ad-blocker (plus a second blocker-free baseline for noise cancellation),
turns the surviving differences into a fixed feature schema, trains and
evaluates classifiers on labeled sites, and fingerprints the detection
scripts themselves via AST node-type frequencies, signature scanning, and
density clustering.
"""

from .capture import (
    CaptureTriple,
    MutationEvent,
    NodeRecord,
    PageCapture,
    ScriptSnippet,
    assemble_triple,
    load_capture,
    normalize_text,
    save_capture,
)
from .classify import (
    EvalReport,
    FeatureRanking,
    TrainedModel,
    auc_score,
    cross_validate,
    entropy,
    export_tree,
    information_gain,
    load_model,
    predict,
    rank_features,
    relative_information_gain,
    save_model,
    train_forest,
    train_naive_bayes,
    train_tree,
)
from .diffing import (
    AttrDiff,
    DiffReport,
    NodeDiff,
    TextDiff,
    cosine_similarity,
    diff_triple,
    match_noise_node,
)
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    LabeledDataset,
    build_dataset,
    extract_features,
)
from .script_analysis import (
    AstVector,
    ClusterReport,
    NodeTypeRegistry,
    SignatureRule,
    cluster_families,
    default_registry,
    default_rules,
    parse_to_preorder,
    pca_reduce,
    scan_scripts,
    vectorize,
)
from .synth import synth_reports

__version__ = "0.1.0"
