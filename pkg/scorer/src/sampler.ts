/**
 * Temperature-scaled nucleus sampling over next-token distributions.
 */

import { Rng } from "./rng.js";

/**
 * Draw one token index. Temperature rescales probabilities before the
 * nucleus cut; the token that carries the cumulative mass across top_p
 * is kept. temperature 0 short-circuits to argmax.
 */
export function sampleToken(
  probs: Float64Array,
  temperature: number,
  topP: number,
  rng: Rng,
): number {
  if (temperature < 0) throw new Error("temperature must be >= 0");
  if (!(topP > 0 && topP <= 1)) throw new Error("top_p must be in (0, 1]");
  if (temperature === 0) {
    let best = 0;
    for (let i = 1; i < probs.length; i++) {
      if (probs[i] > probs[best]) best = i;
    }
    return best;
  }
  const invT = 1 / temperature;
  const indices: number[] = [];
  const scaled: number[] = [];
  let total = 0;
  for (let i = 0; i < probs.length; i++) {
    if (probs[i] <= 0) continue;
    const w = Math.exp(Math.log(probs[i]) * invT);
    indices.push(i);
    scaled.push(w);
    total += w;
  }
  const order = indices
    .map((token, at) => ({ token, p: scaled[at] / total }))
    .sort((a, b) => b.p - a.p || a.token - b.token);
  let mass = 0;
  let cutoff = order.length;
  for (let i = 0; i < order.length; i++) {
    mass += order[i].p;
    if (mass >= topP) {
      cutoff = i + 1;
      break;
    }
  }
  const kept = order.slice(0, cutoff);
  const keptMass = kept.reduce((acc, item) => acc + item.p, 0);
  const draw = rng.next() * keptMass;
  let cumulative = 0;
  for (const item of kept) {
    cumulative += item.p;
    if (draw < cumulative) return item.token;
  }
  return kept[kept.length - 1].token;
}
