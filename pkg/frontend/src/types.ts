/** Mirrors of the service's JSON payloads. Field names match the wire format. */

export type Mode = "extractive" | "abstractive" | "cgap";

export const MODES: readonly Mode[] = ["extractive", "abstractive", "cgap"];

export interface Highlight {
  start: number;
  end: number;
  source: string;
}

export interface PassageScores {
  s_freq: number;
  s_num: number;
  s_match: number;
  s_conf: number;
  rerank_score: number;
}

export interface PassageView {
  ref: string;
  doc_id: string;
  passage_index: number;
  title: string;
  text: string;
  scores: PassageScores;
  highlights: Highlight[];
}

export interface AnswerView {
  text: string;
  segments: [string, string][];
  word_count: number;
  error: string | null;
}

export interface CgapView {
  contexts: string[];
  raw_answers: string[];
  tally: [string, number][];
  final: string;
}

export interface QueryResponse {
  question: string;
  mode: Mode;
  seed: number;
  no_results: boolean;
  passages: PassageView[];
  answer: AnswerView;
  cgap?: CgapView;
}

export interface CgapResponse {
  question: string;
  seed: number;
  contexts: string[];
  raw_answers: string[];
  tally: [string, number][];
  final: string;
}

export interface RetrieveHit {
  ref: string;
  score: number;
  method: string;
}

export interface RetrieveResponse {
  question: string;
  hits: RetrieveHit[];
}

export interface ProviderProbe {
  kind: string;
  url: string | null;
  reachable: boolean;
}

export interface HealthResponse {
  status: string;
  passages: number;
  providers: Record<string, ProviderProbe | null>;
}

export function isMode(value: unknown): value is Mode {
  return typeof value === "string" && (MODES as readonly string[]).includes(value);
}
