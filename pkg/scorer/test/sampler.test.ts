import { describe, expect, it } from "vitest";

import { Rng, hashString, substream } from "../src/rng.js";
import { sampleToken } from "../src/sampler.js";

function distribution(weights: number[]): Float64Array {
  const total = weights.reduce((a, b) => a + b, 0);
  return new Float64Array(weights.map((w) => w / total));
}

describe("sampleToken", () => {
  it("temperature zero is argmax", () => {
    const probs = distribution([1, 5, 2]);
    for (let i = 0; i < 10; i++) {
      expect(sampleToken(probs, 0, 0.95, new Rng(i))).toBe(1);
    }
  });

  it("tiny nucleus keeps only the mode", () => {
    const probs = distribution([1, 10, 2]);
    for (let i = 0; i < 20; i++) {
      expect(sampleToken(probs, 1.0, 0.01, new Rng(i))).toBe(1);
    }
  });

  it("full nucleus samples everything eventually", () => {
    const probs = distribution([1, 1, 1, 1]);
    const seen = new Set<number>();
    const rng = new Rng(3);
    for (let i = 0; i < 200; i++) seen.add(sampleToken(probs, 1.0, 1.0, rng));
    expect(seen.size).toBe(4);
  });

  it("nucleus excludes the deep tail", () => {
    // Mode has 0.9 mass; top_p 0.5 keeps only it.
    const probs = distribution([90, 5, 5]);
    const rng = new Rng(4);
    for (let i = 0; i < 100; i++) {
      expect(sampleToken(probs, 1.0, 0.5, rng)).toBe(0);
    }
  });

  it("boundary token is included", () => {
    // Two tokens of 0.5 each: top_p 0.6 must keep both (the second
    // carries the mass across the threshold... the first reaches 0.5,
    // below 0.6, so the cut happens after the second).
    const probs = distribution([1, 1]);
    const seen = new Set<number>();
    const rng = new Rng(5);
    for (let i = 0; i < 100; i++) seen.add(sampleToken(probs, 1.0, 0.6, rng));
    expect(seen).toEqual(new Set([0, 1]));
  });

  it("rejects invalid decoding parameters", () => {
    const probs = distribution([1, 1]);
    expect(() => sampleToken(probs, -1, 0.95, new Rng(0))).toThrow(/temperature/);
    expect(() => sampleToken(probs, 1.0, 0, new Rng(0))).toThrow(/top_p/);
  });

  it("is reproducible per substream", () => {
    const probs = distribution([3, 2, 1, 1]);
    const draw = (seed: number, pair: string, index: number) => {
      const rng = substream(seed, pair, index);
      return Array.from({ length: 10 }, () => sampleToken(probs, 0.8, 0.95, rng));
    };
    expect(draw(7, "p1", 0)).toEqual(draw(7, "p1", 0));
    expect(draw(7, "p1", 0)).not.toEqual(draw(7, "p1", 1));
    expect(draw(7, "p1", 0)).not.toEqual(draw(8, "p1", 0));
  });
});

describe("hashString", () => {
  it("is stable and spreads distinct keys", () => {
    expect(hashString("a:0")).toBe(hashString("a:0"));
    expect(hashString("a:0")).not.toBe(hashString("a:1"));
  });
});
