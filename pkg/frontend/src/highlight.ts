import type { Highlight } from "./types.js";

/** One server-provided evidence range, kept verbatim for data attributes. */
export interface SourceSpan {
  start: number;
  end: number;
  source: string;
}

/**
 * A run of passage text that is either entirely inside highlighted evidence
 * or entirely outside it. Offsets are the server's: code point positions
 * into the passage text. Segments tile the passage exactly.
 */
export interface TextSegment {
  text: string;
  highlighted: boolean;
  start: number;
  end: number;
  spans: SourceSpan[];
}

/**
 * Split passage text into alternating plain and highlighted segments.
 *
 * The service measures offsets in code points while JS strings index code
 * units, so slicing goes through a code point array. Ranges that fall
 * outside the text or are inverted are dropped rather than clamped; a
 * malformed payload must never corrupt neighbouring text. Overlapping
 * ranges merge into one visual segment but every original server range is
 * preserved on it.
 */
export function segmentText(text: string, highlights: readonly Highlight[]): TextSegment[] {
  const points = Array.from(text);
  const n = points.length;
  const valid = (highlights ?? []).filter(
    (h) =>
      h != null &&
      Number.isInteger(h.start) &&
      Number.isInteger(h.end) &&
      h.start >= 0 &&
      h.end > h.start &&
      h.end <= n,
  );
  const ordered = [...valid].sort((a, b) => a.start - b.start || a.end - b.end);

  interface Block {
    start: number;
    end: number;
    spans: SourceSpan[];
  }
  const blocks: Block[] = [];
  for (const h of ordered) {
    const span: SourceSpan = { start: h.start, end: h.end, source: String(h.source ?? "") };
    const last = blocks[blocks.length - 1];
    if (last !== undefined && h.start < last.end) {
      last.end = Math.max(last.end, h.end);
      last.spans.push(span);
    } else {
      blocks.push({ start: h.start, end: h.end, spans: [span] });
    }
  }

  const slice = (a: number, b: number) => points.slice(a, b).join("");
  const segments: TextSegment[] = [];
  let cursor = 0;
  for (const block of blocks) {
    if (block.start > cursor) {
      segments.push({
        text: slice(cursor, block.start),
        highlighted: false,
        start: cursor,
        end: block.start,
        spans: [],
      });
    }
    segments.push({
      text: slice(block.start, block.end),
      highlighted: true,
      start: block.start,
      end: block.end,
      spans: block.spans,
    });
    cursor = block.end;
  }
  if (cursor < n) {
    segments.push({ text: slice(cursor, n), highlighted: false, start: cursor, end: n, spans: [] });
  }
  return segments;
}
