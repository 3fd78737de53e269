import type {
  SensitivityDoc,
  SessionView,
  TreeDoc,
  WhatIfDoc,
} from './types';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

/** Thin typed wrapper over the session endpoints; no logic beyond transport. */
export class SessionApi {
  constructor(private readonly baseUrl: string = '') {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { detail?: unknown };
        if (payload.detail !== undefined) detail = String(payload.detail);
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(model: string): Promise<SessionView> {
    return this.request('POST', '/sessions', { model });
  }

  addFinding(sessionId: string, id: string, variable: string, state: string): Promise<SessionView> {
    return this.request('POST', `/sessions/${sessionId}/findings`, { id, variable, state });
  }

  retractFinding(sessionId: string, findingId: string): Promise<SessionView> {
    return this.request(
      'DELETE',
      `/sessions/${sessionId}/findings/${encodeURIComponent(findingId)}`,
    );
  }

  setHypothesis(
    sessionId: string,
    assignments: Record<string, string>,
    thresholds?: number[],
  ): Promise<SessionView> {
    return this.request('PUT', `/sessions/${sessionId}/hypothesis`, { assignments, thresholds });
  }

  clearHypothesis(sessionId: string): Promise<SessionView> {
    return this.request('DELETE', `/sessions/${sessionId}/hypothesis`);
  }

  sensitivity(sessionId: string): Promise<SensitivityDoc> {
    return this.request('GET', `/sessions/${sessionId}/sensitivity`);
  }

  whatIf(sessionId: string, findingId: string, state: string): Promise<WhatIfDoc> {
    return this.request('POST', `/sessions/${sessionId}/whatif`, {
      finding_id: findingId,
      state,
    });
  }

  tree(sessionId: string): Promise<TreeDoc> {
    return this.request('GET', `/sessions/${sessionId}/tree`);
  }
}
