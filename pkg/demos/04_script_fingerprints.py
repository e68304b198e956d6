"""Fingerprint detection scripts: signatures, AST vectors, families.

The fixture corpus holds ten renamed variants of the classic
timeout/check/respond detector plus one structurally different
extension-probing service script. Renaming never changes the AST
fingerprint, so the ten variants collapse into one family and the probe
script stands alone.
"""

from pathlib import Path

from abdscope import ScriptSnippet, cluster_families, default_rules, scan_scripts
from abdscope.script_analysis import vectorize_snippet

SCRIPTS = Path(__file__).parent.parent / "tests" / "fixtures" / "scripts"

snippets = [
    ScriptSnippet(p.stem, p.name, p.read_text(encoding="utf-8"), p.stem)
    for p in sorted(SCRIPTS.glob("*.js"))
]

print("signature scan")
for snippet_id, hits in scan_scripts(snippets, default_rules()).items():
    if hits:
        print(f"  {snippet_id}: {hits}")

vectors = [vectorize_snippet(s) for s in snippets]
print("\nAST vectors (sequence lengths)")
print(" ", {v.snippet_id: v.sequence_length for v in vectors[:4]}, "...")

report = cluster_families(vectors)
print("\nfamilies")
print("  sizes:", report.family_sizes, "| dense:", report.dense_family_label)
outliers = [sid for sid, label in report.assignments.items() if label == "outlier"]
print("  outliers:", outliers)
print("\n3-D projection of two members and the outlier")
for sid in ("detector-01", "detector-02", "probe-service"):
    x, y, z = report.pca_coords[sid]
    print(f"  {sid:<14} ({x:+.3f}, {y:+.3f}, {z:+.3f})")
