/**
 * A/B/Bprime harness: loads each local fixture page three times in jsdom
 * (variant A with the blocker profile applied at load time, B and Bprime
 * untouched), records every load, and writes validated capture files.
 */

import * as fs from "fs";
import * as path from "path";
import { JSDOM, VirtualConsole } from "jsdom";

import { BlockerProfile, applyBlocker } from "./blocker";
import { PageCaptureRecord, Variant, serializeCapture } from "./format";
import { startRecording } from "./recorder";

export interface HarnessOptions {
  fixturesDir: string;
  outDir: string;
  windowMs: number;
  blockerProfile: BlockerProfile;
}

export interface SiteResult {
  site: string;
  files: string[];
}

export async function recordVariant(
  html: string,
  site: string,
  variant: Variant,
  windowMs: number,
  blockerProfile?: BlockerProfile,
): Promise<PageCaptureRecord> {
  const virtualConsole = new VirtualConsole(); // swallow page console noise
  const dom = new JSDOM(html, {
    url: `https://${site}/`,
    runScripts: "dangerously",
    pretendToBeVisual: true,
    virtualConsole,
  });
  const win = dom.window as unknown as Window & typeof globalThis;
  const { done } = startRecording(win, site, variant, windowMs);
  if (blockerProfile) {
    applyBlocker(win.document, blockerProfile);
  }
  try {
    return await done;
  } finally {
    dom.window.close();
  }
}

export async function runSite(
  fixturePath: string,
  outDir: string,
  windowMs: number,
  blockerProfile: BlockerProfile,
): Promise<SiteResult> {
  const html = fs.readFileSync(fixturePath, "utf-8");
  const site = path.basename(fixturePath).replace(/\.html$/, "");
  const variants: Array<[Variant, BlockerProfile | undefined]> = [
    ["A", blockerProfile],
    ["B", undefined],
    ["Bprime", undefined],
  ];
  const captures = await Promise.all(
    variants.map(([variant, profile]) => recordVariant(html, site, variant, windowMs, profile)),
  );
  const files: string[] = [];
  for (const capture of captures) {
    // serializeCapture self-checks; a format violation aborts the site
    // before any file is written.
    const text = serializeCapture(capture);
    const file = path.join(outDir, `${site}.${capture.variant}.jsonl`);
    fs.writeFileSync(file, text, "utf-8");
    files.push(file);
  }
  return { site, files };
}

export async function runAbHarness(options: HarnessOptions): Promise<SiteResult[]> {
  const fixtures = fs
    .readdirSync(options.fixturesDir)
    .filter((name) => name.endsWith(".html"))
    .sort();
  if (fixtures.length === 0) {
    throw new Error(`no fixture pages (*.html) in ${options.fixturesDir}`);
  }
  fs.mkdirSync(options.outDir, { recursive: true });
  const results: SiteResult[] = [];
  for (const name of fixtures) {
    results.push(
      await runSite(
        path.join(options.fixturesDir, name),
        options.outDir,
        options.windowMs,
        options.blockerProfile,
      ),
    );
  }
  return results;
}

export function loadBlockerProfile(profilePath: string): BlockerProfile {
  const raw = JSON.parse(fs.readFileSync(profilePath, "utf-8"));
  if (!Array.isArray(raw.selectors)) {
    throw new Error(`blocker profile ${profilePath} needs a "selectors" array`);
  }
  return { selectors: raw.selectors, srcSubstrings: raw.srcSubstrings ?? [] };
}
