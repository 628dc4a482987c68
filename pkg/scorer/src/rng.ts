/**
 * Deterministic random number generation.
 *
 * Weight initialization and sampling both need streams that reproduce
 * exactly across platforms, so everything is derived from explicit
 * 32-bit state rather than Math.random.
 */

/** FNV-1a 32-bit hash, used to derive substream seeds from strings. */
export function hashString(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

/** mulberry32: small, fast, well-distributed 32-bit PRNG. */
export class Rng {
  private state: number;

  constructor(seed: number) {
    this.state = seed >>> 0;
  }

  /** Uniform in [0, 1). */
  next(): number {
    this.state = (this.state + 0x6d2b79f5) >>> 0;
    let t = this.state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  }

  /** Standard normal via Box-Muller. */
  gaussian(): number {
    let u = 0;
    while (u === 0) u = this.next();
    const v = this.next();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }
}

/** Independent substream for one (seed, pairId, sampleIndex) triple. */
export function substream(seed: number, pairId: string, sampleIndex: number): Rng {
  return new Rng((seed ^ hashString(`${pairId}:${sampleIndex}`)) >>> 0);
}
