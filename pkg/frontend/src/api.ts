// Thin typed client over the service API. The fetch implementation is
// injectable so tests can replay recorded payloads and inject faults.

import type {
  ExemplarRequest,
  FailuresPayload,
  QueryRecord,
  RevisionInfo,
  RunSummary,
  TimelinePayload,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`service returned ${status}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail: unknown = null;
      try {
        detail = (await response.json()).detail;
      } catch {
        detail = await response.text().catch(() => null);
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  listRuns(): Promise<{ runs: RunSummary[] }> {
    return this.request('/api/runs');
  }

  getRun(runId: string): Promise<RunSummary> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}`);
  }

  getFailures(runId: string): Promise<FailuresPayload> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}/failures`);
  }

  getTimeline(): Promise<TimelinePayload> {
    return this.request('/api/timeline');
  }

  getQuery(queryId: string): Promise<QueryRecord> {
    return this.request(`/api/queries/${encodeURIComponent(queryId)}`);
  }

  getRegistry(): Promise<{ constraints: { id: string; category: string; rule_template: string }[] }> {
    return this.request('/api/registry');
  }

  listRevisions(): Promise<{ revisions: RevisionInfo[] }> {
    return this.request('/api/revisions');
  }

  async getRevisionPrompt(index: number, queryId?: string): Promise<string> {
    const params = queryId ? `?query_id=${encodeURIComponent(queryId)}` : '';
    const response = await this.fetchFn(`${this.baseUrl}/api/revisions/${index}/prompt${params}`);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text().catch(() => null));
    }
    return response.text();
  }

  submitExemplar(request: ExemplarRequest): Promise<{ exemplar_id: string }> {
    return this.post('/api/exemplars', request);
  }

  createRevision(
    exemplarIds: string[],
    ruleBlocks?: string[],
  ): Promise<{ revision_index: number; parent: number | null; exemplar_ids: string[] }> {
    return this.post('/api/revisions', {
      exemplar_ids: exemplarIds,
      rule_blocks: ruleBlocks ?? null,
    });
  }

  triggerRun(body: {
    split: string;
    revision?: number | null;
    backend?: Record<string, unknown>;
  }): Promise<{ run_id: string; status: string }> {
    return this.post('/api/runs', body);
  }
}
