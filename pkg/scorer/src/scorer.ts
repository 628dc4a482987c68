/**
 * Scoring and generation over bug-fix pairs.
 *
 * For each pair the preceding context is truncated from the left to the
 * configured token limit, prefilled once through the model, and then
 * either scored against both variants (conditional probability of every
 * variant token given everything before it) or continued with sampled
 * completions.
 */

import {
  CausalLm,
  DEFAULT_CONFIG,
  KvCache,
  byteToken,
  decodeBytes,
  encodeBytes,
  softmax,
} from "./model.js";
import { substream } from "./rng.js";
import { sampleToken } from "./sampler.js";
import { GenerationRecord, Pair, TokenProbsRecord } from "./wire.js";

export interface ScorerConfig {
  contextLimit: number;
  samplesPerPrompt: number;
  temperature: number;
  topP: number;
  maxNewTokens: number;
  seed: number;
  modelSeed: number;
}

export const DEFAULT_SCORER_CONFIG: ScorerConfig = {
  contextLimit: 2048,
  samplesPerPrompt: 5,
  temperature: 0.8,
  topP: 0.95,
  maxNewTokens: 64,
  seed: 0,
  modelSeed: DEFAULT_CONFIG.seed,
};

export function modelIdentity(config: ScorerConfig): string {
  return `tiny-causal-transformer(seed=${config.modelSeed})`;
}

export function buildModel(config: ScorerConfig): CausalLm {
  return new CausalLm({ ...DEFAULT_CONFIG, seed: config.modelSeed });
}

/**
 * Feed the context tail through the model, leaving `reserve` window
 * positions for whatever follows. An empty context is replaced by a
 * single newline byte acting as a beginning-of-sequence marker, so a
 * next-token distribution always exists.
 */
function prefillContext(
  model: CausalLm,
  context: string,
  contextLimit: number,
  reserve: number,
): { cache: KvCache; lastLogits: Float32Array } {
  let bytes = encodeBytes(context);
  if (bytes.length > contextLimit) {
    bytes = bytes.slice(bytes.length - contextLimit);
  }
  const room = model.config.window - reserve;
  if (bytes.length > room) {
    bytes = bytes.slice(bytes.length - room);
  }
  if (bytes.length === 0) {
    bytes = [10];
  }
  const cache = model.newCache();
  let lastLogits: Float32Array | null = null;
  for (const byte of bytes) {
    lastLogits = model.step(byte, cache);
  }
  return { cache, lastLogits: lastLogits as Float32Array };
}

function scoreVariant(
  model: CausalLm,
  cache: KvCache,
  lastLogits: Float32Array,
  pairId: string,
  variant: "bug" | "fix",
  target: string,
): TokenProbsRecord {
  const bytes = encodeBytes(target);
  if (bytes.length === 0) {
    throw new Error(`pair ${pairId}: empty ${variant} statement`);
  }
  const tokens: string[] = [];
  const probs: number[] = [];
  let logits = lastLogits;
  for (const byte of bytes) {
    const distribution = softmax(logits);
    tokens.push(byteToken(byte));
    probs.push(distribution[byte]);
    logits = model.step(byte, cache);
  }
  return { pair_id: pairId, variant, tokens, probs };
}

export function scorePairs(pairs: Pair[], config: ScorerConfig): TokenProbsRecord[] {
  const model = buildModel(config);
  const records: TokenProbsRecord[] = [];
  for (const pair of pairs) {
    const longest = Math.max(
      encodeBytes(pair.bug_text).length,
      encodeBytes(pair.fix_text).length,
    );
    const reserve = Math.min(longest + 1, model.config.window - 8);
    const prefill = prefillContext(model, pair.context_before, config.contextLimit, reserve);
    for (const variant of ["bug", "fix"] as const) {
      const cache = model.cloneCache(prefill.cache);
      const target = variant === "bug" ? pair.bug_text : pair.fix_text;
      records.push(
        scoreVariant(model, cache, prefill.lastLogits, pair.pair_id, variant, target),
      );
    }
  }
  return records;
}

export function generatePairs(pairs: Pair[], config: ScorerConfig): GenerationRecord[] {
  const model = buildModel(config);
  const records: GenerationRecord[] = [];
  for (const pair of pairs) {
    const prefill = prefillContext(
      model,
      pair.context_before,
      config.contextLimit,
      config.maxNewTokens + 1,
    );
    const completions: string[] = [];
    for (let sample = 0; sample < config.samplesPerPrompt; sample++) {
      const rng = substream(config.seed, pair.pair_id, sample);
      const cache = model.cloneCache(prefill.cache);
      let logits = prefill.lastLogits;
      const generated: number[] = [];
      for (let stepIndex = 0; stepIndex < config.maxNewTokens; stepIndex++) {
        const token = sampleToken(softmax(logits), config.temperature, config.topP, rng);
        generated.push(token);
        logits = model.step(token, cache);
      }
      completions.push(decodeBytes(generated));
    }
    records.push({
      pair_id: pair.pair_id,
      completions,
      decoding: {
        temperature: config.temperature,
        top_p: config.topP,
        max_new_tokens: config.maxNewTokens,
        context_limit: config.contextLimit,
        model: modelIdentity(config),
      },
    });
  }
  return records;
}
