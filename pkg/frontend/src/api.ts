import type {
  CgapResponse,
  HealthResponse,
  Mode,
  QueryResponse,
  RetrieveResponse,
} from "./types.js";
import { isMode } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface QueryRequest {
  question: string;
  mode?: Mode;
  seed?: number;
  n?: number;
}

export interface CgapRequest {
  question: string;
  seed?: number;
  k?: number;
}

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function isPair(v: unknown): v is [string, number] {
  return Array.isArray(v) && v.length === 2 && typeof v[0] === "string" && typeof v[1] === "number";
}

function validateQueryResponse(body: unknown): QueryResponse {
  if (!isRecord(body)) throw new ApiError("response body is not an object");
  if (typeof body.question !== "string") throw new ApiError("response is missing the question");
  if (!isMode(body.mode)) throw new ApiError("response has an unknown mode");
  if (!Array.isArray(body.passages)) throw new ApiError("response is missing the passage list");
  for (const p of body.passages) {
    if (!isRecord(p) || typeof p.text !== "string" || !Array.isArray(p.highlights)) {
      throw new ApiError("response contains a malformed passage");
    }
  }
  if (!isRecord(body.answer) || typeof body.answer.text !== "string") {
    throw new ApiError("response is missing the answer");
  }
  if (body.cgap !== undefined && !validateTallyBlock(body.cgap)) {
    throw new ApiError("response contains a malformed vote block");
  }
  return body as unknown as QueryResponse;
}

function validateTallyBlock(v: unknown): boolean {
  return (
    isRecord(v) &&
    Array.isArray(v.contexts) &&
    Array.isArray(v.raw_answers) &&
    Array.isArray(v.tally) &&
    v.tally.every(isPair) &&
    typeof v.final === "string"
  );
}

function validateCgapResponse(body: unknown): CgapResponse {
  if (!validateTallyBlock(body) || typeof (body as Record<string, unknown>).question !== "string") {
    throw new ApiError("malformed closed-book response");
  }
  return body as unknown as CgapResponse;
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException
    ? err.name === "AbortError"
    : isRecord(err) && (err as { name?: unknown }).name === "AbortError";
}

/** Thrown internally when a newer request supersedes a pending one. */
export class SupersededError extends Error {
  constructor() {
    super("request superseded by a newer one");
    this.name = "SupersededError";
  }
}

/**
 * Client for the /v1 JSON API. At most one query is in flight: submitting
 * a new one aborts the pending request, whose caller sees SupersededError.
 */
export class ApiClient {
  private pending: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async query(req: QueryRequest): Promise<QueryResponse> {
    const body = await this.post("/v1/query", req);
    return validateQueryResponse(body);
  }

  async cgap(req: CgapRequest): Promise<CgapResponse> {
    const body = await this.post("/v1/cgap", req);
    return validateCgapResponse(body);
  }

  async retrieve(question: string, n?: number): Promise<RetrieveResponse> {
    const body = await this.post("/v1/retrieve", n === undefined ? { question } : { question, n });
    if (!isRecord(body) || !Array.isArray(body.hits)) {
      throw new ApiError("malformed retrieval response");
    }
    return body as unknown as RetrieveResponse;
  }

  async health(): Promise<HealthResponse> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}/v1/health`);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    const body: unknown = await resp.json().catch(() => {
      throw new ApiError("health response is not JSON", resp.status);
    });
    if (!isRecord(body) || typeof body.status !== "string") {
      throw new ApiError("malformed health response", resp.status);
    }
    return body as unknown as HealthResponse;
  }

  private async post(path: string, payload: unknown): Promise<unknown> {
    this.pending?.abort();
    const controller = new AbortController();
    this.pending = controller;
    try {
      let resp: Response;
      try {
        resp = await this.fetchFn(`${this.baseUrl}${path}`, {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: JSON.stringify(payload),
          signal: controller.signal,
        });
      } catch (err) {
        if (isAbort(err)) throw new SupersededError();
        throw new ApiError(`service unreachable: ${String(err)}`);
      }
      const body: unknown = await resp.json().catch(() => null);
      if (!resp.ok) {
        const detail =
          isRecord(body) && typeof body.error === "string" ? body.error : `HTTP ${resp.status}`;
        throw new ApiError(detail, resp.status);
      }
      if (body === null) throw new ApiError("response is not JSON", resp.status);
      return body;
    } finally {
      if (this.pending === controller) {
        this.pending = null;
      }
    }
  }
}
