/** Command-line wrapper: --fixtures <dir> --out <dir> [--window-ms N] [--blocker-profile <path>]. */

import * as path from "path";

import { loadBlockerProfile, runAbHarness } from "./harness";

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`bad argument pair: ${flag} ${value ?? ""}`);
    }
    args.set(flag.slice(2), value);
  }
  return args;
}

async function main(): Promise<number> {
  const args = parseArgs(process.argv.slice(2));
  const fixturesDir = args.get("fixtures");
  const outDir = args.get("out");
  if (!fixturesDir || !outDir) {
    process.stderr.write(
      "usage: harness --fixtures <dir> --out <dir> [--window-ms N] [--blocker-profile <path>]\n",
    );
    return 1;
  }
  const windowMs = Number(args.get("window-ms") ?? "10000");
  const profilePath = args.get("blocker-profile") ?? path.join(fixturesDir, "blocker-profile.json");
  const profile = loadBlockerProfile(profilePath);
  const results = await runAbHarness({ fixturesDir, outDir, windowMs, blockerProfile: profile });
  for (const result of results) {
    process.stdout.write(`${result.site}: ${result.files.length} capture file(s)\n`);
  }
  return 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    process.stderr.write(`harness: ${err}\n`);
    process.exit(2);
  },
);
