import type { Dimension } from './api.js';

// Connective phrase per dimension, mirroring how the backend renders its
// training queries: (prefix, suffix) around the term.
export const CONNECTIVES: Record<Dimension, [string, string]> = {
  Po: ['within ', ' population'],
  Ti: ['from ', ''],
  As: ['from ', ''],
  Ph: ['with ', ' observations'],
};

export function chipPhrase(dimension: Dimension, term: string): string {
  const [prefix, suffix] = CONNECTIVES[dimension];
  return `${prefix}${term}${suffix}`;
}

/**
 * Compose a follow-up query from a metadata chip. Appending the same chip
 * twice is a no-op, and a chip without an active query is inert.
 */
export function composeRefinement(
  base: string,
  dimension: Dimension,
  term: string,
): string {
  const trimmed = base.trim();
  if (!trimmed) return base;
  const phrase = chipPhrase(dimension, term);
  if (trimmed.includes(phrase)) return trimmed;
  return `${trimmed} ${phrase}`;
}
