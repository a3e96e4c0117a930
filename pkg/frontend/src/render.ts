import { segmentText } from "./highlight.js";
import { buildTallyRows } from "./tally.js";
import type { CgapView, PassageView, QueryResponse } from "./types.js";
import type { HistoryEntry } from "./state.js";

// DOM construction only; all strings go through textContent, never markup.

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function scoreTitle(p: PassageView): string {
  const s = p.scores;
  return (
    `rerank ${s.rerank_score}\nmatch ${s.s_match}\nconfidence ${s.s_conf}\n` +
    `keyword frequency ${s.s_freq}\ndistinct keywords ${s.s_num}`
  );
}

export function renderPassage(p: PassageView, rank: number): HTMLElement {
  const article = el("article", "passage");
  article.dataset.ref = p.ref;

  const head = el("header", "passage-head");
  const title = el("span", "passage-title", `#${rank} ${p.title || p.doc_id}`);
  title.title = scoreTitle(p);
  head.appendChild(title);
  head.appendChild(el("span", "passage-ref", p.ref));
  head.appendChild(el("span", "passage-score", p.scores.rerank_score.toFixed(4)));
  article.appendChild(head);

  const body = el("p", "passage-text");
  for (const seg of segmentText(p.text, p.highlights)) {
    if (seg.highlighted) {
      const mark = el("mark", "evidence", seg.text);
      mark.dataset.start = String(seg.start);
      mark.dataset.end = String(seg.end);
      mark.dataset.spans = JSON.stringify(seg.spans);
      body.appendChild(mark);
    } else {
      body.appendChild(document.createTextNode(seg.text));
    }
  }
  article.appendChild(body);
  return article;
}

export function renderAnswer(response: QueryResponse): HTMLElement {
  const panel = el("section", "answer-panel");
  panel.appendChild(el("h2", undefined, `Answer (${response.answer.word_count} words)`));
  if (response.no_results) {
    panel.appendChild(el("p", "muted", "No passages matched this question."));
    return panel;
  }
  panel.appendChild(el("p", "answer-text", response.answer.text));
  if (response.answer.segments.length > 1) {
    const sources = el("p", "muted");
    sources.textContent =
      "sources: " + response.answer.segments.map(([ref]) => ref).join(", ");
    panel.appendChild(sources);
  }
  return panel;
}

export function renderCgap(cgap: CgapView): HTMLElement {
  const panel = el("section", "cgap-panel");

  panel.appendChild(el("h3", undefined, "Vote tally"));
  const table = el("table", "tally");
  for (const row of buildTallyRows(cgap.tally, cgap.final)) {
    const tr = el("tr", row.isFinal ? "tally-final" : undefined);
    tr.appendChild(el("td", "tally-count", String(row.count)));
    tr.appendChild(el("td", "tally-answer", row.answer));
    tr.appendChild(el("td", "tally-mark", row.isFinal ? "final" : ""));
    table.appendChild(tr);
  }
  panel.appendChild(table);

  panel.appendChild(el("h3", undefined, `Sampled contexts (${cgap.contexts.length})`));
  const list = el("ol", "contexts");
  cgap.contexts.forEach((ctx, i) => {
    const item = el("li");
    item.appendChild(el("span", "context-text", ctx));
    const answer = cgap.raw_answers[i];
    if (answer !== undefined) {
      item.appendChild(el("span", "context-answer", ` → ${answer}`));
    }
    list.appendChild(item);
  });
  panel.appendChild(list);
  return panel;
}

export function renderResults(container: HTMLElement, response: QueryResponse): void {
  container.replaceChildren();
  container.appendChild(renderAnswer(response));
  if (response.cgap) {
    container.appendChild(renderCgap(response.cgap));
  }
  response.passages.forEach((p, i) => {
    container.appendChild(renderPassage(p, i + 1));
  });
}

export function renderError(container: HTMLElement, message: string | null): void {
  container.replaceChildren();
  if (message !== null) {
    container.appendChild(el("div", "error-banner", message));
  }
}

export function renderHistory(
  container: HTMLElement,
  history: readonly HistoryEntry[],
  onPick: (entry: HistoryEntry) => void,
): void {
  container.replaceChildren();
  if (history.length === 0) return;
  container.appendChild(el("h3", undefined, "History"));
  const list = el("ul", "history");
  for (const entry of history) {
    const item = el("li");
    const button = el("button", "history-entry", `${entry.question} [${entry.mode}]`);
    button.type = "button";
    button.addEventListener("click", () => onPick(entry));
    item.appendChild(button);
    list.appendChild(item);
  }
  container.appendChild(list);
}
