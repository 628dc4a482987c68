import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { execFileSync } from "node:child_process";

import { describe, expect, it } from "vitest";

import { DEFAULT_SCORER_CONFIG, generatePairs, scorePairs } from "../src/scorer.js";
import { GenerationSchema, Pair, TokenProbsSchema, readPairs, writeRecords } from "../src/wire.js";

function makePairs(n: number): Pair[] {
  const pairs: Pair[] = [];
  for (let i = 0; i < n; i++) {
    pairs.push({
      pair_id: `pair-${i}`,
      bug_text: `bugName${i}(alpha${i} + 1);`,
      fix_text: `fixName${i}(alpha${i} - 2);`,
      context_before: `int alpha${i} = ${i};\nint beta${i} = ${i * 2};\n`,
      bug_category: "CHANGE_OPERATOR",
      commits_until_fix: i,
    });
  }
  return pairs;
}

const FAST_CONFIG = { ...DEFAULT_SCORER_CONFIG, seed: 21 };

describe("scorePairs", () => {
  it("emits two schema-valid records per pair with aligned lengths", () => {
    const pairs = makePairs(3);
    const records = scorePairs(pairs, FAST_CONFIG);
    expect(records).toHaveLength(6);
    for (const record of records) {
      TokenProbsSchema.parse(record);
      expect(record.tokens.length).toBe(record.probs.length);
      for (const p of record.probs) {
        expect(p).toBeGreaterThan(0);
        expect(p).toBeLessThanOrEqual(1);
      }
    }
    const variants = records.map((r) => `${r.pair_id}:${r.variant}`);
    expect(new Set(variants).size).toBe(6);
  });

  it("is deterministic (no sampling in scoring)", () => {
    const pairs = makePairs(2);
    const first = scorePairs(pairs, FAST_CONFIG);
    const second = scorePairs(pairs, FAST_CONFIG);
    expect(first).toEqual(second);
  });

  it("scores the statement bytes themselves", () => {
    const pairs = makePairs(1);
    const [bug] = scorePairs(pairs, FAST_CONFIG);
    expect(bug.tokens.join("")).toBe(pairs[0].bug_text);
  });

  it("handles empty context via the BOS fallback", () => {
    const pair = { ...makePairs(1)[0], context_before: "" };
    const records = scorePairs([pair], FAST_CONFIG);
    expect(records).toHaveLength(2);
    TokenProbsSchema.parse(records[0]);
  });
});

describe("generatePairs", () => {
  it("emits five completions capped at the token budget", () => {
    const pairs = makePairs(2);
    const records = generatePairs(pairs, FAST_CONFIG);
    expect(records).toHaveLength(2);
    for (const record of records) {
      GenerationSchema.parse(record);
      expect(record.completions).toHaveLength(5);
      for (const completion of record.completions) {
        expect(completion.length).toBeLessThanOrEqual(64);
        expect(completion.length).toBeGreaterThan(0);
      }
      expect(record.decoding.temperature).toBe(0.8);
      expect(record.decoding.top_p).toBe(0.95);
      expect(record.decoding.max_new_tokens).toBe(64);
      expect(record.decoding.context_limit).toBe(2048);
    }
  });

  it("fixed seed reproduces completions; different seed diverges", () => {
    const pairs = makePairs(1);
    const a = generatePairs(pairs, { ...FAST_CONFIG, seed: 5 });
    const b = generatePairs(pairs, { ...FAST_CONFIG, seed: 5 });
    const c = generatePairs(pairs, { ...FAST_CONFIG, seed: 6 });
    expect(a).toEqual(b);
    expect(a[0].completions).not.toEqual(c[0].completions);
  });

  it("greedy decoding collapses the five samples", () => {
    const pairs = makePairs(1);
    const [record] = generatePairs(pairs, { ...FAST_CONFIG, temperature: 0 });
    expect(new Set(record.completions).size).toBe(1);
  });
});

describe("wire io", () => {
  it("round-trips pairs and rejects bad records", async () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "scorer-test-"));
    const pairsPath = path.join(dir, "pairs.jsonl");
    writeRecords(pairsPath, makePairs(2));
    const loaded = await readPairs(pairsPath);
    expect(loaded).toHaveLength(2);

    fs.writeFileSync(pairsPath, '{"pair_id": "x"}\n');
    await expect(readPairs(pairsPath)).rejects.toThrow(/line 1/);
  });
});

describe("cli", () => {
  it("score and generate produce consumable files", async () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "scorer-cli-"));
    const pairsPath = path.join(dir, "pairs.jsonl");
    writeRecords(pairsPath, makePairs(10));
    const cliPath = path.join(__dirname, "..", "dist", "cli.js");
    const scoreOut = path.join(dir, "tokenprobs.jsonl");
    const generateOut = path.join(dir, "generations.jsonl");
    execFileSync("node", [cliPath, "score", "--pairs", pairsPath, "--out", scoreOut, "--seed", "21"]);
    execFileSync("node", [
      cliPath, "generate", "--pairs", pairsPath, "--out", generateOut, "--seed", "21",
    ]);
    const scoreLines = fs.readFileSync(scoreOut, "utf8").trim().split("\n");
    expect(scoreLines).toHaveLength(20);
    for (const line of scoreLines) TokenProbsSchema.parse(JSON.parse(line));
    const generateLines = fs.readFileSync(generateOut, "utf8").trim().split("\n");
    expect(generateLines).toHaveLength(10);
    for (const line of generateLines) GenerationSchema.parse(JSON.parse(line));
  }, 120_000);
});
