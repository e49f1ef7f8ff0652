/**
 * Typed client for the cohort search HTTP API.
 */

export type Dimension = 'Po' | 'As' | 'Ph' | 'Ti';

export const DIMENSIONS: Dimension[] = ['Po', 'As', 'Ph', 'Ti'];

export interface QueryHit {
  rank: number;
  accession: string;
  title: string;
  similarity: number;
  source_url: string;
  metadata: Record<Dimension, string[]>;
}

export interface QueryResponse {
  query: string;
  k: number;
  hits: QueryHit[];
}

export interface NormalizedValue {
  value: string;
  mapped: boolean;
}

export interface DimensionView {
  raw: string[];
  normalized: NormalizedValue[];
}

export interface CohortDetail {
  accession: string;
  title: string;
  summary: string;
  pmid: string | null;
  publication_title: string | null;
  disease: string;
  source_url: string;
  dimensions: Record<Dimension, DimensionView>;
}

export interface ServiceStats {
  cohorts: number;
  vectors: number;
  dimension: number;
  vocabulary: Record<Dimension, number>;
  model: { provider_id: string; scale: number; variant: string };
}

export interface HealthStatus {
  status: string;
  loaded: boolean;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = 'ApiError';
  }
}

async function raise(response: Response): Promise<never> {
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (typeof body.detail === 'string') detail = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  async query(text: string, k = 10): Promise<QueryResponse> {
    const response = await fetch(`${this.baseUrl}/v1/query`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ text, k }),
    });
    if (!response.ok) await raise(response);
    return response.json();
  }

  async cohort(accession: string): Promise<CohortDetail> {
    const response = await fetch(
      `${this.baseUrl}/v1/cohorts/${encodeURIComponent(accession)}`,
    );
    if (!response.ok) await raise(response);
    return response.json();
  }

  async stats(): Promise<ServiceStats> {
    const response = await fetch(`${this.baseUrl}/v1/stats`);
    if (!response.ok) await raise(response);
    return response.json();
  }

  async health(): Promise<HealthStatus> {
    const response = await fetch(`${this.baseUrl}/v1/health`);
    if (!response.ok) await raise(response);
    return response.json();
  }
}
