/** Typed client for the qrewrite session API. All algebra happens on the
 * server; this module only moves JSON around. */

export interface Span {
  position: string;
  start: number;
  end: number;
}

export interface SessionView {
  sessionId: string;
  sort: string;
  dirac: string;
  spans: Span[];
  canonical: string;
  stepCount: number;
  movesVersion: number;
}

export interface Move {
  index: number;
  ruleId: string;
  direction: "fwd" | "rev";
  position: string;
  preview: string;
}

export interface MovesList {
  version: number;
  moves: Move[];
}

export interface ErrorPayload {
  error: string;
  message?: string;
  span?: [number, number] | null;
  version?: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly payload: ErrorPayload,
  ) {
    super(payload.message ?? payload.error);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const text = await response.text();
  if (!response.ok) {
    let payload: ErrorPayload;
    try {
      payload = JSON.parse(text) as ErrorPayload;
    } catch {
      payload = { error: `HTTP ${response.status}`, message: text };
    }
    throw new ApiError(response.status, payload);
  }
  return JSON.parse(text) as T;
}

export class Client {
  constructor(private readonly base: string = "") {}

  createSession(term: string): Promise<SessionView> {
    return request(`${this.base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ term }),
    });
  }

  getSession(id: string): Promise<SessionView> {
    return request(`${this.base}/sessions/${id}`);
  }

  getMoves(id: string): Promise<MovesList> {
    return request(`${this.base}/sessions/${id}/moves`);
  }

  applyMove(id: string, index: number, version: number): Promise<SessionView> {
    return request(`${this.base}/sessions/${id}/apply`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ index, version }),
    });
  }

  undo(id: string): Promise<SessionView> {
    return request(`${this.base}/sessions/${id}/undo`, { method: "POST" });
  }

  normalize(id: string): Promise<SessionView & { appliedSteps: number }> {
    return request(`${this.base}/sessions/${id}/normalize`, { method: "POST" });
  }

  async getDerivation(id: string): Promise<string> {
    const response = await fetch(`${this.base}/sessions/${id}/derivation`);
    if (!response.ok) {
      throw new ApiError(response.status, { error: `HTTP ${response.status}` });
    }
    return response.text();
  }
}
