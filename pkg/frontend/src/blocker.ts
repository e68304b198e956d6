/**
 * Minimal element-removal blocker for the harness: the variant-A page gets
 * its ad elements removed the way filter-list element hiding would, which
 * is exactly the signal detector scripts probe for.
 */

export interface BlockerProfile {
  /** CSS selectors whose matches are removed outright. */
  selectors: string[];
  /** Elements whose src or href contains any of these substrings are removed. */
  srcSubstrings?: string[];
}

export function applyBlocker(document: Document, profile: BlockerProfile): number {
  let removed = 0;
  for (const selector of profile.selectors) {
    for (const el of Array.from(document.querySelectorAll(selector))) {
      el.remove();
      removed += 1;
    }
  }
  for (const needle of profile.srcSubstrings ?? []) {
    for (const el of Array.from(document.querySelectorAll("[src], [href]"))) {
      const ref = el.getAttribute("src") ?? el.getAttribute("href") ?? "";
      if (ref.includes(needle)) {
        el.remove();
        removed += 1;
      }
    }
  }
  return removed;
}
