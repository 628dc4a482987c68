import { describe, expect, it } from "vitest";

import { CausalLm, DEFAULT_CONFIG, encodeBytes, softmax } from "../src/model.js";

function stepAll(model: CausalLm, bytes: number[]): Float32Array {
  const cache = model.newCache();
  let logits: Float32Array | null = null;
  for (const byte of bytes) logits = model.step(byte, cache);
  return logits as Float32Array;
}

describe("CausalLm", () => {
  it("produces a normalized next-token distribution", () => {
    const model = new CausalLm();
    const logits = stepAll(model, encodeBytes("int x = 1;\n"));
    const probs = softmax(logits);
    const total = Array.from(probs).reduce((a, b) => a + b, 0);
    expect(Math.abs(total - 1)).toBeLessThan(1e-9);
    expect(Math.min(...Array.from(probs))).toBeGreaterThan(0);
  });

  it("is deterministic for a fixed weight seed", () => {
    const a = stepAll(new CausalLm(), encodeBytes("hello"));
    const b = stepAll(new CausalLm(), encodeBytes("hello"));
    expect(Array.from(a)).toEqual(Array.from(b));
  });

  it("changes with the weight seed", () => {
    const a = stepAll(new CausalLm({ ...DEFAULT_CONFIG, seed: 1 }), encodeBytes("hello"));
    const b = stepAll(new CausalLm({ ...DEFAULT_CONFIG, seed: 2 }), encodeBytes("hello"));
    expect(Array.from(a)).not.toEqual(Array.from(b));
  });

  it("is causal: future tokens cannot change past distributions", () => {
    const model = new CausalLm();
    const prefix = encodeBytes("return x");
    const cacheA = model.newCache();
    const logitsA: number[][] = [];
    for (const byte of prefix) logitsA.push(Array.from(model.step(byte, cacheA)));
    // Same prefix, then diverge; the prefix logits must be identical.
    const cacheB = model.newCache();
    const logitsB: number[][] = [];
    for (const byte of prefix) logitsB.push(Array.from(model.step(byte, cacheB)));
    model.step(encodeBytes("!")[0], cacheB);
    expect(logitsA).toEqual(logitsB);
  });

  it("clones caches independently", () => {
    const model = new CausalLm();
    const cache = model.newCache();
    for (const byte of encodeBytes("abc")) model.step(byte, cache);
    const clone = model.cloneCache(cache);
    model.step(100, cache);
    expect(clone.length).toBe(3);
    expect(cache.keys[0].length).toBe(4);
    expect(clone.keys[0].length).toBe(3);
  });

  it("rejects tokens outside the byte vocabulary", () => {
    const model = new CausalLm();
    expect(() => model.step(256, model.newCache())).toThrow(/vocabulary/);
  });

  it("rejects sequences beyond the attention window", () => {
    const model = new CausalLm({ ...DEFAULT_CONFIG, window: 4 });
    const cache = model.newCache();
    for (let i = 0; i < 4; i++) model.step(65, cache);
    expect(() => model.step(65, cache)).toThrow(/window/);
  });
});
