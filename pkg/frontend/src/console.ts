import { ApiClient, SupersededError } from "./api.js";
import type { Mode } from "./types.js";
import {
  initialState,
  modeChanged,
  queryFailed,
  queryStarted,
  querySucceeded,
  questionEdited,
  type ViewState,
} from "./state.js";

export type StateListener = (state: ViewState) => void;

/**
 * Headless console controller: owns the view state and talks to the API.
 * The DOM layer subscribes for re-renders; everything here runs without a
 * browser. Superseded requests resolve silently (the newer request owns
 * the loading flag), so rapid resubmission never flashes an error banner.
 */
export class QueryConsole {
  private state_: ViewState;
  private listeners: StateListener[] = [];

  constructor(private readonly api: ApiClient, mode: Mode = "extractive") {
    this.state_ = initialState(mode);
  }

  get state(): ViewState {
    return this.state_;
  }

  subscribe(listener: StateListener): void {
    this.listeners.push(listener);
  }

  setQuestion(question: string): void {
    this.update(questionEdited(this.state_, question));
  }

  /** Submit the given question, or re-submit the current one. */
  async submit(question?: string, mode?: Mode): Promise<void> {
    const q = (question ?? this.state_.question).trim();
    const m = mode ?? this.state_.mode;
    if (!q) {
      return;
    }
    const started = queryStarted(this.state_, q, m);
    const requestId = started.requestId;
    this.update(started);
    try {
      const response = await this.api.query({ question: q, mode: m });
      this.update(querySucceeded(this.state_, requestId, response));
    } catch (err) {
      if (err instanceof SupersededError) {
        return;
      }
      const message = err instanceof Error ? err.message : String(err);
      this.update(queryFailed(this.state_, requestId, message));
    }
  }

  /** Switch generation mode; re-queries when a question is present. */
  async toggleMode(mode: Mode): Promise<void> {
    if (mode === this.state_.mode) {
      return;
    }
    this.update(modeChanged(this.state_, mode));
    if (this.state_.question.trim()) {
      await this.submit(this.state_.question, mode);
    }
  }

  private update(next: ViewState): void {
    if (next === this.state_) return;
    this.state_ = next;
    for (const listener of this.listeners) {
      listener(next);
    }
  }
}
