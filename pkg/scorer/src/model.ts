/**
 * A small byte-level causal transformer language model.
 *
 * Weights are drawn deterministically from a seed, so the model is a
 * self-contained stand-in for a pretrained checkpoint: the adapter's
 * job is extracting per-token conditional probabilities and sampled
 * completions, and both only require a genuine autoregressive
 * distribution over a byte vocabulary.
 *
 * Architecture: token + position embeddings, pre-norm blocks of causal
 * multi-head attention and a GELU MLP, tied output projection. The
 * attention window caps the sequence length; longer inputs are
 * truncated from the left before the forward pass.
 */

import { Rng } from "./rng.js";

export const VOCAB_SIZE = 256;

export interface ModelConfig {
  dModel: number;
  nHeads: number;
  nLayers: number;
  dFF: number;
  window: number;
  seed: number;
}

export const DEFAULT_CONFIG: ModelConfig = {
  dModel: 48,
  nHeads: 2,
  nLayers: 2,
  dFF: 96,
  window: 256,
  seed: 1337,
};

interface LayerWeights {
  lnA: { gamma: Float32Array; beta: Float32Array };
  wq: Float32Array;
  wk: Float32Array;
  wv: Float32Array;
  wo: Float32Array;
  lnB: { gamma: Float32Array; beta: Float32Array };
  w1: Float32Array; // dModel x dFF
  b1: Float32Array;
  w2: Float32Array; // dFF x dModel
  b2: Float32Array;
}

/** Per-sequence attention cache; one K/V row per processed token. */
export interface KvCache {
  keys: Float32Array[][]; // [layer][position] -> dModel
  values: Float32Array[][];
  length: number;
}

function matVec(m: Float32Array, rows: number, cols: number, x: Float32Array, out: Float32Array): void {
  // m is row-major [rows x cols]; out_j = sum_i x_i * m[i, j].
  out.fill(0);
  for (let i = 0; i < rows; i++) {
    const xi = x[i];
    if (xi === 0) continue;
    const base = i * cols;
    for (let j = 0; j < cols; j++) {
      out[j] += xi * m[base + j];
    }
  }
}

function layerNorm(x: Float32Array, gamma: Float32Array, beta: Float32Array, out: Float32Array): void {
  const n = x.length;
  let mean = 0;
  for (let i = 0; i < n; i++) mean += x[i];
  mean /= n;
  let variance = 0;
  for (let i = 0; i < n; i++) {
    const d = x[i] - mean;
    variance += d * d;
  }
  variance /= n;
  const inv = 1 / Math.sqrt(variance + 1e-5);
  for (let i = 0; i < n; i++) {
    out[i] = (x[i] - mean) * inv * gamma[i] + beta[i];
  }
}

function gelu(x: number): number {
  return 0.5 * x * (1 + Math.tanh(Math.sqrt(2 / Math.PI) * (x + 0.044715 * x * x * x)));
}

export class CausalLm {
  readonly config: ModelConfig;
  private embedding: Float32Array; // VOCAB x dModel
  private positional: Float32Array; // window x dModel
  private layers: LayerWeights[];
  private lnF: { gamma: Float32Array; beta: Float32Array };

  constructor(config: ModelConfig = DEFAULT_CONFIG) {
    if (config.dModel % config.nHeads !== 0) {
      throw new Error("dModel must be divisible by nHeads");
    }
    this.config = config;
    const rng = new Rng(config.seed);
    const init = (n: number, scale = 0.02) => {
      const w = new Float32Array(n);
      for (let i = 0; i < n; i++) w[i] = rng.gaussian() * scale;
      return w;
    };
    const ones = (n: number) => new Float32Array(n).fill(1);
    const zeros = (n: number) => new Float32Array(n);
    const d = config.dModel;
    this.embedding = init(VOCAB_SIZE * d);
    this.positional = init(config.window * d);
    this.layers = [];
    for (let l = 0; l < config.nLayers; l++) {
      this.layers.push({
        lnA: { gamma: ones(d), beta: zeros(d) },
        wq: init(d * d),
        wk: init(d * d),
        wv: init(d * d),
        wo: init(d * d),
        lnB: { gamma: ones(d), beta: zeros(d) },
        w1: init(d * config.dFF),
        b1: zeros(config.dFF),
        w2: init(config.dFF * d),
        b2: zeros(d),
      });
    }
    this.lnF = { gamma: ones(d), beta: zeros(d) };
  }

  newCache(): KvCache {
    return {
      keys: this.layers.map(() => []),
      values: this.layers.map(() => []),
      length: 0,
    };
  }

  /** Deep copy, so one prefilled context can serve many continuations. */
  cloneCache(cache: KvCache): KvCache {
    return {
      keys: cache.keys.map((layer) => layer.map((row) => row.slice())),
      values: cache.values.map((layer) => layer.map((row) => row.slice())),
      length: cache.length,
    };
  }

  /**
   * Advance the sequence by one token and return the next-token logits.
   * Attention only sees the cache, so causality holds by construction.
   */
  step(token: number, cache: KvCache): Float32Array {
    const { dModel: d, nHeads, window } = this.config;
    if (token < 0 || token >= VOCAB_SIZE) {
      throw new Error(`token ${token} outside byte vocabulary`);
    }
    if (cache.length >= window) {
      throw new Error(`sequence longer than the ${window}-token window`);
    }
    const headDim = d / nHeads;
    const position = cache.length;
    cache.length += 1;
    const h = new Float32Array(d);
    for (let i = 0; i < d; i++) {
      h[i] = this.embedding[token * d + i] + this.positional[position * d + i];
    }
    const x = new Float32Array(d);
    const q = new Float32Array(d);
    const attnOut = new Float32Array(d);
    const proj = new Float32Array(d);
    const ff = new Float32Array(this.config.dFF);
    for (let l = 0; l < this.layers.length; l++) {
      const layer = this.layers[l];
      layerNorm(h, layer.lnA.gamma, layer.lnA.beta, x);
      const k = new Float32Array(d);
      const v = new Float32Array(d);
      matVec(layer.wq, d, d, x, q);
      matVec(layer.wk, d, d, x, k);
      matVec(layer.wv, d, d, x, v);
      cache.keys[l].push(k);
      cache.values[l].push(v);
      const seqLen = cache.keys[l].length;
      attnOut.fill(0);
      for (let head = 0; head < nHeads; head++) {
        const offset = head * headDim;
        const scores = new Float64Array(seqLen);
        let maxScore = -Infinity;
        for (let t = 0; t < seqLen; t++) {
          const kt = cache.keys[l][t];
          let s = 0;
          for (let i = 0; i < headDim; i++) s += q[offset + i] * kt[offset + i];
          s /= Math.sqrt(headDim);
          scores[t] = s;
          if (s > maxScore) maxScore = s;
        }
        let total = 0;
        for (let t = 0; t < seqLen; t++) {
          scores[t] = Math.exp(scores[t] - maxScore);
          total += scores[t];
        }
        for (let t = 0; t < seqLen; t++) {
          const weight = scores[t] / total;
          const vt = cache.values[l][t];
          for (let i = 0; i < headDim; i++) {
            attnOut[offset + i] += weight * vt[offset + i];
          }
        }
      }
      matVec(layer.wo, d, d, attnOut, proj);
      for (let i = 0; i < d; i++) h[i] += proj[i];
      layerNorm(h, layer.lnB.gamma, layer.lnB.beta, x);
      matVec(layer.w1, d, this.config.dFF, x, ff);
      for (let i = 0; i < this.config.dFF; i++) ff[i] = gelu(ff[i] + layer.b1[i]);
      matVec(layer.w2, this.config.dFF, d, ff, proj);
      for (let i = 0; i < d; i++) h[i] += proj[i] + layer.b2[i];
    }
    layerNorm(h, this.lnF.gamma, this.lnF.beta, x);
    const logits = new Float32Array(VOCAB_SIZE);
    for (let v = 0; v < VOCAB_SIZE; v++) {
      let s = 0;
      const base = v * d;
      for (let i = 0; i < d; i++) s += x[i] * this.embedding[base + i];
      logits[v] = s;
    }
    return logits;
  }
}

export function softmax(logits: Float32Array): Float64Array {
  let max = -Infinity;
  for (const v of logits) if (v > max) max = v;
  let total = 0;
  const probs = new Float64Array(logits.length);
  for (let i = 0; i < logits.length; i++) {
    probs[i] = Math.exp(logits[i] - max);
    total += probs[i];
  }
  for (let i = 0; i < probs.length; i++) probs[i] /= total;
  return probs;
}

export function encodeBytes(text: string): number[] {
  return Array.from(Buffer.from(text, "utf8"));
}

export function byteToken(byte: number): string {
  return String.fromCharCode(byte);
}

export function decodeBytes(bytes: number[]): string {
  return bytes.map(byteToken).join("");
}
