/**
 * In-page recorder: observes DOM mutations for a fixed window, then takes a
 * full snapshot (nodes, text, markup, scripts). Strictly read-only; the
 * observed page is never touched.
 */

import {
  MutationEventRecord,
  MutationKind,
  NodeRecord,
  OTHER_STYLE,
  PageCaptureRecord,
  ScriptSnippetRecord,
  TRACKED_STYLE_PROPS,
  Variant,
  normalizeText,
} from "./format";

const SKIPPED_TAGS = new Set(["script", "style", "noscript", "template"]);
const BLOCK_TAGS = new Set([
  "address", "article", "aside", "blockquote", "div", "dl", "dt", "dd",
  "fieldset", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
  "header", "hr", "li", "main", "nav", "ol", "p", "pre", "section", "table",
  "tr", "ul",
]);

const EXTERNAL_BODY_MARKER = "[external-script-not-fetched]";

interface StyleSplit {
  tracked: Record<string, string>;
  other: string;
}

/** Split an inline style declaration into tracked properties and the rest. */
export function splitStyle(styleText: string | null): StyleSplit {
  const tracked: Record<string, string> = {};
  const rest: string[] = [];
  if (!styleText) {
    return { tracked, other: "" };
  }
  for (const declaration of styleText.split(";")) {
    const colon = declaration.indexOf(":");
    if (colon < 0) continue;
    const name = declaration.slice(0, colon).trim().toLowerCase();
    const value = declaration.slice(colon + 1).trim();
    if (!name || !value) continue;
    if ((TRACKED_STYLE_PROPS as readonly string[]).includes(name)) {
      tracked[name] = value;
    } else {
      rest.push(`${name}:${value}`);
    }
  }
  return { tracked, other: rest.join(";") };
}

function parentPath(el: Element): string[] {
  const path: string[] = [];
  let current = el.parentElement;
  while (current) {
    path.unshift(current.tagName.toLowerCase());
    current = current.parentElement;
  }
  return path;
}

function directText(el: Element): string {
  let text = "";
  for (const child of Array.from(el.childNodes)) {
    if (child.nodeType === 3 /* TEXT_NODE */) {
      text += child.nodeValue ?? "";
    }
  }
  return normalizeText(text);
}

export function visibleText(root: Element): string {
  const lines: string[] = [];
  let buffer: string[] = [];
  const flush = () => {
    const line = normalizeText(buffer.join(""));
    if (line) lines.push(line);
    buffer = [];
  };
  const walk = (node: Node): void => {
    for (const child of Array.from(node.childNodes)) {
      if (child.nodeType === 3) {
        buffer.push(child.nodeValue ?? "");
        continue;
      }
      if (child.nodeType !== 1) continue;
      const el = child as Element;
      const tag = el.tagName.toLowerCase();
      if (SKIPPED_TAGS.has(tag)) continue;
      if (tag === "br") {
        flush();
        continue;
      }
      if (BLOCK_TAGS.has(tag)) {
        flush();
        walk(el);
        flush();
      } else {
        walk(el);
      }
    }
  };
  walk(root);
  flush();
  return lines.join("\n");
}

export class RecorderSession {
  readonly site: string;
  readonly variant: Variant;
  private readonly win: Window & typeof globalThis;
  private readonly mutations: MutationEventRecord[] = [];
  private observer: MutationObserver | null = null;
  private nextId = 0;
  private startedAt = 0;
  private lastTimestamp = 0;
  private started = false;

  constructor(win: Window & typeof globalThis, site: string, variant: Variant) {
    this.win = win;
    this.site = site;
    this.variant = variant;
  }

  private newNodeId(): string {
    this.nextId += 1;
    return `n${this.nextId}`;
  }

  private nodeRecord(el: Element): NodeRecord {
    const attributes: Record<string, string> = {};
    for (const attr of Array.from(el.attributes)) {
      if (attr.name.toLowerCase() === "style") continue;
      attributes[attr.name] = attr.value;
    }
    const { tracked, other } = splitStyle(el.getAttribute("style"));
    const style_props = { ...tracked };
    if (other) {
      style_props[OTHER_STYLE] = other;
    }
    return {
      node_id: this.newNodeId(),
      tag: el.tagName.toLowerCase(),
      attr_id: el.id ?? "",
      css_classes: Array.from(el.classList ?? []),
      attributes,
      style_props,
      text: directText(el),
      parent_path: parentPath(el),
    };
  }

  private timestamp(): number {
    const now = Math.max(0, Math.round(this.win.performance.now() - this.startedAt));
    this.lastTimestamp = Math.max(this.lastTimestamp, now);
    return this.lastTimestamp;
  }

  private push(kind: MutationKind, el: Element, extra: Partial<MutationEventRecord> = {}): void {
    this.mutations.push({
      kind,
      timestamp_ms: this.timestamp(),
      node: this.nodeRecord(el),
      ...extra,
    });
  }

  private onRecords(records: MutationRecord[]): void {
    for (const record of records) {
      if (record.type === "childList") {
        for (const added of Array.from(record.addedNodes)) {
          if (added.nodeType === 1) {
            this.push("node-added", added as Element);
          } else if (added.nodeType === 3 && record.target.nodeType === 1) {
            this.push("text-changed", record.target as Element, {
              old_value: "",
              new_value: normalizeText(added.nodeValue ?? ""),
            });
          }
        }
        for (const removed of Array.from(record.removedNodes)) {
          if (removed.nodeType === 1) {
            this.push("node-removed", removed as Element);
          }
        }
      } else if (record.type === "attributes" && record.target.nodeType === 1) {
        const el = record.target as Element;
        const name = record.attributeName ?? "";
        if (name.toLowerCase() === "style") {
          this.recordStyleChange(el, record.oldValue);
        } else {
          this.push("attr-changed", el, {
            attr_name: name,
            old_value: record.oldValue ?? "",
            new_value: el.getAttribute(name) ?? "",
          });
        }
      } else if (record.type === "characterData" && record.target.parentElement) {
        this.push("text-changed", record.target.parentElement, {
          old_value: normalizeText(record.oldValue ?? ""),
          new_value: normalizeText(record.target.nodeValue ?? ""),
        });
      }
    }
  }

  private recordStyleChange(el: Element, oldStyle: string | null): void {
    const before = splitStyle(oldStyle);
    const after = splitStyle(el.getAttribute("style"));
    for (const prop of TRACKED_STYLE_PROPS) {
      const oldValue = before.tracked[prop] ?? "";
      const newValue = after.tracked[prop] ?? "";
      if (oldValue !== newValue) {
        this.push("attr-changed", el, {
          attr_name: prop,
          old_value: oldValue,
          new_value: newValue,
        });
      }
    }
    if (before.other !== after.other) {
      this.push("attr-changed", el, {
        attr_name: OTHER_STYLE,
        old_value: before.other,
        new_value: after.other,
      });
    }
  }

  /** Attach observers; the capture completes when the window elapses. */
  start(windowMs: number): Promise<PageCaptureRecord> {
    if (this.started) {
      throw new Error("recorder already started for this page");
    }
    this.started = true;
    this.startedAt = this.win.performance.now();
    const target = this.win.document.documentElement;
    this.observer = new this.win.MutationObserver((records) => this.onRecords(records));
    this.observer.observe(target, {
      childList: true,
      subtree: true,
      attributes: true,
      attributeOldValue: true,
      characterData: true,
      characterDataOldValue: true,
    });
    return new Promise((resolve) => {
      const finish = () => resolve(this.finalize(windowMs));
      if (windowMs <= 0) {
        finish();
      } else {
        this.win.setTimeout(finish, windowMs);
      }
    });
  }

  private collectScripts(): ScriptSnippetRecord[] {
    const scripts: ScriptSnippetRecord[] = [];
    let index = 0;
    for (const el of Array.from(this.win.document.querySelectorAll("script"))) {
      index += 1;
      const src = el.getAttribute("src");
      if (src) {
        scripts.push({
          snippet_id: `${this.site}-s${index}`,
          source_url: el.src || src,
          body: EXTERNAL_BODY_MARKER,
          site: this.site,
        });
      } else {
        const body = el.textContent ?? "";
        if (body.trim()) {
          scripts.push({
            snippet_id: `${this.site}-s${index}`,
            source_url: "inline",
            body,
            site: this.site,
          });
        }
      }
    }
    return scripts;
  }

  private finalize(windowMs: number): PageCaptureRecord {
    if (this.observer) {
      this.onRecords(this.observer.takeRecords());
      this.observer.disconnect();
      this.observer = null;
    }
    const doc = this.win.document;
    const dom_nodes = Array.from(doc.querySelectorAll("*")).map((el) => this.nodeRecord(el));
    return {
      site: this.site,
      variant: this.variant,
      final_url: this.win.location.href,
      dom_nodes,
      mutations: this.mutations,
      inner_text: doc.body ? visibleText(doc.body) : "",
      inner_html: doc.documentElement ? doc.documentElement.outerHTML : "",
      scripts: this.collectScripts(),
      capture_duration_ms: windowMs,
    };
  }
}

export function startRecording(
  win: Window & typeof globalThis,
  site: string,
  variant: Variant,
  windowMs: number,
): { session: RecorderSession; done: Promise<PageCaptureRecord> } {
  const session = new RecorderSession(win, site, variant);
  const done = session.start(windowMs);
  return { session, done };
}
