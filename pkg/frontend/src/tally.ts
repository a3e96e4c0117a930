import { normalizeAnswer } from "./normalize.js";

/** One row of the vote tally view. Counts come from the payload verbatim. */
export interface TallyRow {
  answer: string;
  count: number;
  isFinal: boolean;
}

/**
 * Order tally entries by count descending and mark the server's winner.
 *
 * Ties keep the payload's order; the service lists earlier-seen answers
 * first. The winner is whichever row's key matches the normalized `final`
 * field, so on a tie the marked row is the server's choice, not a local
 * re-count. If no key matches (unexpected payload), the top row is marked
 * so the view always shows exactly one winner when rows exist.
 */
export function buildTallyRows(tally: readonly [string, number][], finalAnswer: string): TallyRow[] {
  const rows = tally.map(([answer, count]) => ({ answer, count, isFinal: false }));
  rows.sort((a, b) => b.count - a.count);
  const finalKey = normalizeAnswer(finalAnswer);
  const winner = rows.find((r) => r.answer === finalKey) ?? rows[0];
  if (winner !== undefined) {
    winner.isFinal = true;
  }
  return rows;
}
