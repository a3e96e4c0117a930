import type { CgapResponse, QueryResponse } from "../src/types.js";

/** Verbatim /v1/query response captured from a running service. */
export const QUERY_FIXTURE: QueryResponse = {
  question: "where was george lopez born",
  mode: "extractive",
  seed: 0,
  no_results: false,
  passages: [
    {
      ref: "lopez#0000",
      doc_id: "lopez",
      passage_index: 0,
      title: "George Lopez",
      text:
        "George Lopez was born in Mission Hills, Los Angeles. He was raised by " +
        "his grandmother in the San Fernando Valley. Lopez began performing " +
        "stand-up comedy in clubs.",
      scores: {
        s_freq: 4,
        s_num: 3,
        s_match: 30.000000000223157,
        s_conf: 0.43243243243243246,
        rerank_score: 30.216216216439374,
      },
      highlights: [{ start: 0, end: 52, source: "a" }],
    },
  ],
  answer: {
    text: "George Lopez was born in Mission Hills, Los Angeles.",
    segments: [["lopez#0000", "George Lopez was born in Mission Hills, Los Angeles."]],
    word_count: 9,
    error: null,
  },
};

/** A closed-book vote with a clear winner; tally keys are normalized forms. */
export const CGAP_FIXTURE: CgapResponse = {
  question: "where was george lopez born",
  seed: 0,
  contexts: [
    "George Lopez was born in Los Angeles.",
    "Lopez grew up in canada before moving south.",
    "George Lopez was born in Mission Hills, Los Angeles.",
    "He was raised in San Fernando by relatives.",
    "Lopez started in Los Angeles comedy clubs.",
    "His birthplace was Mission Hills.",
    "Mission Hills is where Lopez was born.",
    "Some sources point to Castle Hill instead.",
  ],
  raw_answers: [
    "Los Angeles",
    "canada",
    "Mission Hills",
    "San Fernando",
    "Los Angeles",
    "Mission Hills",
    "Mission Hills",
    "Castle Hill",
  ],
  tally: [
    ["mission hills", 3],
    ["los angeles", 2],
    ["canada", 1],
    ["san fernando", 1],
    ["castle hill", 1],
  ],
  final: "Mission Hills",
};

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
