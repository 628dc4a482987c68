#!/usr/bin/env node
/**
 * scorer score|generate: emit token probabilities or sampled
 * completions for a pairs file, in the evaluation pipeline's wire
 * formats.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { DEFAULT_SCORER_CONFIG, ScorerConfig, generatePairs, scorePairs } from "./scorer.js";
import { GenerationSchema, TokenProbsSchema, readPairs, writeRecords } from "./wire.js";

function toConfig(argv: Record<string, unknown>): ScorerConfig {
  return {
    ...DEFAULT_SCORER_CONFIG,
    contextLimit: argv["context-limit"] as number,
    seed: argv.seed as number,
    modelSeed: argv["model-seed"] as number,
    samplesPerPrompt: (argv.samples as number | undefined) ?? DEFAULT_SCORER_CONFIG.samplesPerPrompt,
    temperature: (argv.temperature as number | undefined) ?? DEFAULT_SCORER_CONFIG.temperature,
    topP: (argv["top-p"] as number | undefined) ?? DEFAULT_SCORER_CONFIG.topP,
    maxNewTokens:
      (argv["max-new-tokens"] as number | undefined) ?? DEFAULT_SCORER_CONFIG.maxNewTokens,
  };
}

const commonOptions = {
  pairs: { type: "string" as const, demandOption: true, describe: "pairs JSONL input" },
  out: { type: "string" as const, demandOption: true, describe: "output JSONL file" },
  "context-limit": {
    type: "number" as const,
    default: DEFAULT_SCORER_CONFIG.contextLimit,
    describe: "context token limit (left-truncated)",
  },
  seed: { type: "number" as const, default: 0, describe: "sampling seed" },
  "model-seed": {
    type: "number" as const,
    default: DEFAULT_SCORER_CONFIG.modelSeed,
    describe: "model weight seed",
  },
};

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .scriptName("scorer")
    .command(
      "score",
      "emit per-token conditional probabilities for both variants",
      (builder) => builder.options(commonOptions),
      async (argv) => {
        const pairs = await readPairs(argv.pairs as string);
        const records = scorePairs(pairs, toConfig(argv as Record<string, unknown>));
        for (const record of records) {
          TokenProbsSchema.parse(record);
        }
        writeRecords(argv.out as string, records);
        console.log(`wrote ${records.length} score records to ${argv.out}`);
      },
    )
    .command(
      "generate",
      "emit sampled completions per pair",
      (builder) =>
        builder.options({
          ...commonOptions,
          samples: { type: "number" as const, default: 5 },
          temperature: { type: "number" as const, default: 0.8 },
          "top-p": { type: "number" as const, default: 0.95 },
          "max-new-tokens": { type: "number" as const, default: 64 },
        }),
      async (argv) => {
        const pairs = await readPairs(argv.pairs as string);
        const records = generatePairs(pairs, toConfig(argv as Record<string, unknown>));
        for (const record of records) {
          GenerationSchema.parse(record);
        }
        writeRecords(argv.out as string, records);
        console.log(`wrote ${records.length} generation records to ${argv.out}`);
      },
    )
    .demandCommand(1)
    .strict()
    .fail((message, error) => {
      console.error(`error: ${error?.message ?? message}`);
      process.exit(1);
    })
    .parseAsync();
}

main().catch((error) => {
  console.error(`error: ${error.message}`);
  process.exit(1);
});
