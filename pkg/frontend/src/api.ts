// Typed client for the read-only summarization service. No state here;
// every function maps one endpoint to one typed response.

export interface EntityInfo {
  entity_id: string;
  n_reviews: number;
}

export interface AspectInfo {
  aspect_id: number;
  name: string;
  seeds: string[];
}

export interface SummarySentence {
  text: string;
  review_id: string;
  sentence_index: number;
  salience: number;
}

export interface SummaryResponse {
  entity_id: string;
  codes: number[];
  aspects: string[];
  sentences: SummarySentence[];
  token_count: number;
  model_version: string;
}

export class ApiError extends Error {
  constructor(message: string, public status: number) {
    super(message);
    this.name = 'ApiError';
  }
}

async function fetchJSON<T>(url: string, options?: RequestInit): Promise<T> {
  const response = await fetch(url, options);
  if (!response.ok) {
    const body = await response.json().catch(() => ({}));
    const detail =
      typeof body.detail === 'string' ? body.detail : response.statusText;
    throw new ApiError(detail || 'request failed', response.status);
  }
  return response.json() as Promise<T>;
}

export class Api {
  constructor(private baseUrl: string = '') {}

  entities(): Promise<{ entities: EntityInfo[] }> {
    return fetchJSON(`${this.baseUrl}/entities`);
  }

  aspects(): Promise<{ aspects: AspectInfo[] }> {
    return fetchJSON(`${this.baseUrl}/aspects`);
  }

  summarize(entityId: string, aspects: string[]): Promise<SummaryResponse> {
    return fetchJSON(`${this.baseUrl}/summarize`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ entity_id: entityId, aspects }),
    });
  }
}
