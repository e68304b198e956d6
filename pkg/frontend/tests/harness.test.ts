import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { loadBlockerProfile, runAbHarness, SiteResult } from "../src/harness";
import { NodeRecord, PageCaptureRecord } from "../src/format";

const FIXTURES = path.join(__dirname, "..", "fixtures");
const WINDOW_MS = 2600; // covers the fixture's 2000 ms detector delay

let outDir: string;
let results: SiteResult[];

beforeAll(async () => {
  outDir = fs.mkdtempSync(path.join(os.tmpdir(), "abdscope-harness-"));
  results = await runAbHarness({
    fixturesDir: FIXTURES,
    outDir,
    windowMs: WINDOW_MS,
    blockerProfile: loadBlockerProfile(path.join(FIXTURES, "blocker-profile.json")),
  });
}, 60000);

afterAll(() => {
  fs.rmSync(outDir, { recursive: true, force: true });
});

function readCapture(site: string, variant: string): PageCaptureRecord {
  const lines = fs
    .readFileSync(path.join(outDir, `${site}.${variant}.jsonl`), "utf-8")
    .trim()
    .split("\n")
    .map((line) => JSON.parse(line));
  const header = lines[0];
  const capture: PageCaptureRecord = {
    site: header.site,
    variant: header.variant,
    final_url: header.final_url,
    capture_duration_ms: header.capture_duration_ms,
    dom_nodes: [],
    mutations: [],
    scripts: [],
    inner_text: "",
    inner_html: "",
  };
  for (const rec of lines.slice(1)) {
    if (rec.rec === "node") capture.dom_nodes.push(rec);
    else if (rec.rec === "mutation") capture.mutations.push(rec);
    else if (rec.rec === "script") capture.scripts.push(rec);
    else if (rec.rec === "page") {
      capture.inner_text = rec.inner_text;
      capture.inner_html = rec.inner_html;
    }
  }
  return capture;
}

function idFreeNodes(nodes: NodeRecord[]): string[] {
  return nodes
    .map((n) =>
      JSON.stringify([n.tag, n.attr_id, n.css_classes, n.attributes, n.style_props, n.text, n.parent_path]),
    )
    .sort();
}

describe("harness output", () => {
  it("produces three validated capture files per fixture site", () => {
    expect(results.map((r) => r.site).sort()).toEqual([
      "delayed-injection",
      "rotating-banner",
      "static",
    ]);
    for (const result of results) {
      expect(result.files.length).toBe(3);
      for (const file of result.files) {
        expect(fs.existsSync(file)).toBe(true);
      }
    }
  });

  it("keeps the header first and exactly one page record per file", () => {
    for (const result of results) {
      for (const file of result.files) {
        const lines = fs.readFileSync(file, "utf-8").trim().split("\n");
        const header = JSON.parse(lines[0]);
        expect(header.format).toBe("abdscope-capture");
        expect(header.version).toBe(1);
        const pageRecords = lines.filter((l) => JSON.parse(l).rec === "page");
        expect(pageRecords.length).toBe(1);
      }
    }
  });
});

describe("delayed-injection fixture", () => {
  it("injects exactly one node in A and none in the baselines", () => {
    const a = readCapture("delayed-injection", "A");
    const b = readCapture("delayed-injection", "B");
    const bp = readCapture("delayed-injection", "Bprime");

    const addedA = a.mutations.filter((m) => m.kind === "node-added");
    expect(addedA.length).toBe(1);
    expect(addedA[0].node.css_classes).toEqual(["abd-warning"]);
    expect(addedA[0].node.text).toBe("please disable your ad blocker to keep reading");
    expect(addedA[0].timestamp_ms).toBeGreaterThanOrEqual(1900);
    expect(addedA[0].timestamp_ms).toBeLessThan(WINDOW_MS);

    expect(b.mutations.filter((m) => m.kind === "node-added").length).toBe(0);
    expect(bp.mutations.filter((m) => m.kind === "node-added").length).toBe(0);

    // the blocker's removal is visible in A, and the bait stayed in B
    expect(a.mutations.some((m) => m.kind === "node-removed")).toBe(true);
    expect(a.dom_nodes.some((n) => n.attr_id === "ad-banner")).toBe(false);
    expect(b.dom_nodes.some((n) => n.attr_id === "ad-banner")).toBe(true);
    expect(a.inner_text).toContain("please disable your ad blocker");
    expect(b.inner_text).not.toContain("please disable");
  });
});

describe("static fixture", () => {
  it("matches across variants modulo node ids", () => {
    const a = readCapture("static", "A");
    const b = readCapture("static", "B");
    const bp = readCapture("static", "Bprime");
    expect(a.mutations).toEqual([]);
    expect(b.mutations).toEqual([]);
    expect(bp.mutations).toEqual([]);
    expect(idFreeNodes(a.dom_nodes)).toEqual(idFreeNodes(b.dom_nodes));
    expect(idFreeNodes(b.dom_nodes)).toEqual(idFreeNodes(bp.dom_nodes));
    expect(a.inner_html).toBe(b.inner_html);
    expect(b.inner_html).toBe(bp.inner_html);
    expect(a.inner_text).toBe(b.inner_text);
  });
});

describe("rotating-banner fixture", () => {
  it("keeps the banner in every variant and records injected scripts", () => {
    for (const variant of ["A", "B", "Bprime"] as const) {
      const capture = readCapture("rotating-banner", variant);
      const banner = capture.dom_nodes.find((n) => n.attr_id === "rot");
      expect(banner).toBeDefined();
      expect(banner!.attributes.src).toMatch(/^\/b\/[123]\.png$/);
      const external = capture.scripts.find((s) => s.source_url.includes("metrics.js"));
      expect(external).toBeDefined();
      expect(external!.body).toBe("[external-script-not-fetched]");
      expect(capture.scripts.some((s) => s.body.includes("injectedAt"))).toBe(true);
      const lateAdds = capture.mutations.filter((m) => m.kind === "node-added");
      expect(lateAdds.length).toBeGreaterThanOrEqual(2); // script + inline script
    }
  });
});
