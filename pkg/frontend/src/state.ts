import type { Mode, QueryResponse } from "./types.js";

export interface HistoryEntry {
  question: string;
  mode: Mode;
}

/**
 * The console's entire view model. Pure data; transitions below return new
 * states and never mutate. `requestId` tags the in-flight query so results
 * from superseded requests can be ignored.
 */
export interface ViewState {
  question: string;
  mode: Mode;
  loading: boolean;
  error: string | null;
  response: QueryResponse | null;
  history: readonly HistoryEntry[];
  requestId: number;
}

export function initialState(mode: Mode = "extractive"): ViewState {
  return {
    question: "",
    mode,
    loading: false,
    error: null,
    response: null,
    history: [],
    requestId: 0,
  };
}

/** User typed in the input box. */
export function questionEdited(state: ViewState, question: string): ViewState {
  return { ...state, question };
}

/**
 * A query was submitted. Clears any error banner, appends to the session
 * history, and keeps the previous response visible while loading. Returns
 * the new state; its `requestId` identifies this request.
 */
export function queryStarted(state: ViewState, question: string, mode: Mode): ViewState {
  return {
    ...state,
    question,
    mode,
    loading: true,
    error: null,
    history: [...state.history, { question, mode }],
    requestId: state.requestId + 1,
  };
}

/** Results arrived. Stale requestIds leave the state untouched. */
export function querySucceeded(
  state: ViewState,
  requestId: number,
  response: QueryResponse,
): ViewState {
  if (requestId !== state.requestId) return state;
  return { ...state, loading: false, error: null, response };
}

/**
 * The request failed. The question stays in place so the user can retry or
 * edit it; the previous response stays visible under the banner.
 */
export function queryFailed(state: ViewState, requestId: number, message: string): ViewState {
  if (requestId !== state.requestId) return state;
  return { ...state, loading: false, error: message };
}

/** Mode picked in the toggle; resubmission is the caller's decision. */
export function modeChanged(state: ViewState, mode: Mode): ViewState {
  return { ...state, mode };
}
