/**
 * The abdscope capture wire format: UTF-8 line-delimited JSON, header first,
 * node/mutation/script records in any order, exactly one page record.
 *
 * Serialization here must stay byte-compatible with the Python reader:
 * compact separators, insertion-ordered keys, sorted attribute maps.
 */

export const FORMAT_NAME = "abdscope-capture";
export const FORMAT_VERSION = 1;

export const TRACKED_STYLE_PROPS = [
  "display",
  "visibility",
  "height",
  "width",
  "opacity",
  "max-height",
  "background-size",
] as const;
export const OTHER_STYLE = "other-style";

export type Variant = "A" | "B" | "Bprime";
export type MutationKind = "node-added" | "node-removed" | "attr-changed" | "text-changed";

export interface NodeRecord {
  node_id: string;
  tag: string;
  attr_id: string;
  css_classes: string[];
  attributes: Record<string, string>;
  style_props: Record<string, string>;
  text: string;
  parent_path: string[];
}

export interface MutationEventRecord {
  kind: MutationKind;
  timestamp_ms: number;
  node: NodeRecord;
  attr_name?: string;
  old_value?: string;
  new_value?: string;
}

export interface ScriptSnippetRecord {
  snippet_id: string;
  source_url: string;
  body: string;
  site: string;
}

export interface PageCaptureRecord {
  site: string;
  variant: Variant;
  final_url: string;
  dom_nodes: NodeRecord[];
  mutations: MutationEventRecord[];
  inner_text: string;
  inner_html: string;
  scripts: ScriptSnippetRecord[];
  capture_duration_ms: number;
}

const sortedMap = (map: Record<string, string>): Record<string, string> => {
  const out: Record<string, string> = {};
  for (const key of Object.keys(map).sort()) {
    out[key] = map[key];
  }
  return out;
};

const nodeFields = (node: NodeRecord) => ({
  node_id: node.node_id,
  tag: node.tag,
  attr_id: node.attr_id,
  css_classes: node.css_classes,
  attributes: sortedMap(node.attributes),
  style_props: sortedMap(node.style_props),
  text: node.text,
  parent_path: node.parent_path,
});

export function captureToLines(capture: PageCaptureRecord): string[] {
  const lines: string[] = [];
  lines.push(
    JSON.stringify({
      format: FORMAT_NAME,
      version: FORMAT_VERSION,
      site: capture.site,
      variant: capture.variant,
      final_url: capture.final_url,
      capture_duration_ms: capture.capture_duration_ms,
    }),
  );
  for (const node of capture.dom_nodes) {
    lines.push(JSON.stringify({ rec: "node", ...nodeFields(node) }));
  }
  for (const mutation of capture.mutations) {
    const rec: Record<string, unknown> = {
      rec: "mutation",
      kind: mutation.kind,
      timestamp_ms: mutation.timestamp_ms,
      node: nodeFields(mutation.node),
    };
    if (mutation.attr_name !== undefined) {
      rec.attr_name = mutation.attr_name;
    }
    if (mutation.old_value !== undefined) {
      rec.old_value = mutation.old_value;
      rec.new_value = mutation.new_value;
    }
    lines.push(JSON.stringify(rec));
  }
  for (const script of capture.scripts) {
    lines.push(
      JSON.stringify({
        rec: "script",
        snippet_id: script.snippet_id,
        source_url: script.source_url,
        body: script.body,
        site: script.site,
      }),
    );
  }
  lines.push(
    JSON.stringify({ rec: "page", inner_text: capture.inner_text, inner_html: capture.inner_html }),
  );
  return lines;
}

export function serializeCapture(capture: PageCaptureRecord): string {
  validateCapture(capture);
  return captureToLines(capture).join("\n") + "\n";
}

export class CaptureValidationError extends Error {}

const STYLE_KEYS = new Set<string>([...TRACKED_STYLE_PROPS, OTHER_STYLE]);

/** Self-check mirroring the reader-side rules; throws on any violation. */
export function validateCapture(capture: PageCaptureRecord): void {
  const fail = (message: string): never => {
    throw new CaptureValidationError(message);
  };
  if (!["A", "B", "Bprime"].includes(capture.variant)) {
    fail(`bad variant ${capture.variant}`);
  }
  const seen = new Set<string>();
  for (const node of capture.dom_nodes) {
    if (!node.tag) fail(`node ${node.node_id} has an empty tag`);
    if (seen.has(node.node_id)) fail(`duplicate node_id ${node.node_id}`);
    seen.add(node.node_id);
    for (const key of Object.keys(node.style_props)) {
      if (!STYLE_KEYS.has(key)) fail(`untracked style key ${key} on ${node.node_id}`);
    }
  }
  let last = -1;
  for (const mutation of capture.mutations) {
    if (mutation.timestamp_ms < 0) fail("negative mutation timestamp");
    if (mutation.timestamp_ms < last) {
      fail(`mutations out of order at ${mutation.timestamp_ms}`);
    }
    last = mutation.timestamp_ms;
    const wantsAttr = mutation.kind === "attr-changed";
    const wantsValues = mutation.kind === "attr-changed" || mutation.kind === "text-changed";
    if (wantsAttr !== (mutation.attr_name !== undefined)) {
      fail(`attr_name presence mismatch for kind ${mutation.kind}`);
    }
    if (
      wantsValues !== (mutation.old_value !== undefined) ||
      wantsValues !== (mutation.new_value !== undefined)
    ) {
      fail(`old/new_value presence mismatch for kind ${mutation.kind}`);
    }
    if (!mutation.node.tag) fail("mutation node has an empty tag");
  }
  for (const script of capture.scripts) {
    if (!script.body) fail(`script ${script.snippet_id} has an empty body`);
  }
}

/** Unicode NFC, whitespace runs collapsed, trimmed; matches the reader. */
export function normalizeText(text: string): string {
  return text.normalize("NFC").replace(/\s+/g, " ").trim();
}
