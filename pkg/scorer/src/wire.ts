/**
 * Wire formats shared with the evaluation pipeline, with zod schemas
 * for both the pairs input and the records this adapter emits.
 */

import * as fs from "node:fs";
import * as readline from "node:readline";
import { z } from "zod";

export const PairSchema = z.object({
  pair_id: z.string(),
  bug_text: z.string(),
  fix_text: z.string(),
  context_before: z.string(),
  bug_category: z.string(),
  commits_until_fix: z.number().int().nonnegative().default(0),
  source_file_bug: z.string().nullish(),
  source_file_fix: z.string().nullish(),
});

export type Pair = z.infer<typeof PairSchema>;

export const TokenProbsSchema = z
  .object({
    pair_id: z.string(),
    variant: z.enum(["bug", "fix"]),
    tokens: z.array(z.string()).min(1),
    probs: z.array(z.number().gt(0).lte(1)).min(1),
  })
  .refine((record) => record.tokens.length === record.probs.length, {
    message: "tokens and probs must have equal length",
  });

export type TokenProbsRecord = z.infer<typeof TokenProbsSchema>;

export const GenerationSchema = z.object({
  pair_id: z.string(),
  completions: z.array(z.string()).min(1),
  decoding: z.object({
    temperature: z.number(),
    top_p: z.number(),
    max_new_tokens: z.number().int(),
    context_limit: z.number().int(),
    model: z.string(),
  }),
});

export type GenerationRecord = z.infer<typeof GenerationSchema>;

export async function readPairs(path: string): Promise<Pair[]> {
  const pairs: Pair[] = [];
  const stream = readline.createInterface({
    input: fs.createReadStream(path, "utf8"),
    crlfDelay: Infinity,
  });
  let lineNo = 0;
  for await (const line of stream) {
    lineNo += 1;
    const text = line.trim();
    if (!text) continue;
    let raw: unknown;
    try {
      raw = JSON.parse(text);
    } catch (err) {
      throw new Error(`pairs line ${lineNo}: invalid JSON`);
    }
    const parsed = PairSchema.safeParse(raw);
    if (!parsed.success) {
      throw new Error(`pairs line ${lineNo}: ${parsed.error.issues[0].message}`);
    }
    pairs.push(parsed.data);
  }
  if (pairs.length === 0) {
    throw new Error(`no pairs found in ${path}`);
  }
  return pairs;
}

/**
 * Deterministic JSONL writing: sorted keys, one record per line, all
 * non-ASCII code points escaped so byte-level completions (which can
 * contain characters like U+0085 that some line splitters treat as
 * newlines) never break the one-record-per-line framing.
 */
export function writeRecords(path: string, records: unknown[]): void {
  const sortKeys = (value: unknown): unknown => {
    if (Array.isArray(value)) return value.map(sortKeys);
    if (value !== null && typeof value === "object") {
      return Object.fromEntries(
        Object.entries(value as Record<string, unknown>)
          .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
          .map(([k, v]) => [k, sortKeys(v)]),
      );
    }
    return value;
  };
  const lines = records.map((record) =>
    JSON.stringify(sortKeys(record)).replace(
      /[-￿]/g,
      (ch) => "\\u" + ch.charCodeAt(0).toString(16).padStart(4, "0"),
    ),
  );
  fs.writeFileSync(path, lines.join("\n") + (lines.length ? "\n" : ""), "utf8");
}
