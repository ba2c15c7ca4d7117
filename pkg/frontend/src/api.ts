import type { Action, ActionResult, ErrorBody, View } from './types.js';

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly body: ErrorBody,
  ) {
    super(body.message);
    this.name = 'ServiceError';
  }

  get code(): string {
    return this.body.code;
  }
}

async function parseError(response: Response): Promise<never> {
  let body: ErrorBody = { code: 'unknown', message: `HTTP ${response.status}` };
  try {
    const payload = await response.json();
    if (payload && payload.error) body = payload.error;
  } catch {
    // non-JSON error body; keep the fallback
  }
  throw new ServiceError(response.status, body);
}

/** Thin client for the session service; one instance per base address. */
export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  defaults(): Promise<{ notebook: unknown | null; script: string | null }> {
    return this.request('/defaults');
  }

  createSession(
    notebook?: unknown,
    script?: string,
  ): Promise<{ session_id: string; view: View }> {
    const body: Record<string, unknown> = {};
    if (notebook !== undefined) body.notebook = notebook;
    if (script !== undefined) body.script = script;
    return this.request('/sessions', { method: 'POST', body: JSON.stringify(body) });
  }

  async getView(sessionId: string): Promise<View> {
    const body = await this.request<{ view: View }>(`/sessions/${sessionId}`);
    return body.view;
  }

  postAction(sessionId: string, action: Action): Promise<ActionResult> {
    return this.request(`/sessions/${sessionId}/actions`, {
      method: 'POST',
      body: JSON.stringify(action),
    });
  }

  getTrace(sessionId: string): Promise<{
    log: { cell: string; ts: number; white: boolean }[];
    user: { cell: string; state: string }[];
  }> {
    return this.request(`/sessions/${sessionId}/trace`);
  }

  /** SSE stream of views; browser only (EventSource is not in Node 20). */
  openEvents(sessionId: string, replayFrom = 0): EventSource {
    return new EventSource(
      `${this.baseUrl}/sessions/${sessionId}/events?replay_from=${replayFrom}`,
    );
  }
}
