import copy
from pathlib import Path

import pytest

from abdscope.capture import MutationEvent, NodeRecord, PageCapture, ScriptSnippet

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def captures_dir() -> Path:
    return FIXTURES / "captures"


@pytest.fixture
def scripts_dir() -> Path:
    return FIXTURES / "scripts"


def make_node(nid="n1", tag="div", attr_id="", classes=(), attrs=None, style=None, text="", path=("html", "body")):
    return NodeRecord(
        node_id=nid,
        tag=tag,
        attr_id=attr_id,
        css_classes=list(classes),
        attributes=dict(attrs or {}),
        style_props=dict(style or {}),
        text=text,
        parent_path=list(path),
    )


def make_capture(site="site.example", variant="A", nodes=(), mutations=(), text="", html="", scripts=(), url=None):
    return PageCapture(
        site=site,
        variant=variant,
        final_url=url if url is not None else f"https://{site}/",
        dom_nodes=list(nodes),
        mutations=list(mutations),
        inner_text=text,
        inner_html=html,
        scripts=list(scripts),
        capture_duration_ms=10000,
    )


def clone_with_variant(capture: PageCapture, variant: str, id_prefix: str) -> PageCapture:
    """Deep copy under a new variant with fresh node ids."""
    dup = copy.deepcopy(capture)
    dup.variant = variant
    for i, node in enumerate(dup.dom_nodes, start=1):
        node.node_id = f"{id_prefix}{i}"
    return dup


def make_script(body: str, snippet_id: str = "s1", site: str = "site.example") -> ScriptSnippet:
    return ScriptSnippet(snippet_id=snippet_id, source_url="inline", body=body, site=site)


def load_fixture_snippets() -> list[ScriptSnippet]:
    return [
        ScriptSnippet(p.stem, p.name, p.read_text(encoding="utf-8"), p.stem)
        for p in sorted((FIXTURES / "scripts").glob("*.js"))
    ]
