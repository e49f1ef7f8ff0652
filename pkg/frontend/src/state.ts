import type { QueryResponse } from './api.js';

export interface HistoryEntry {
  query: string;
  response: QueryResponse;
}

/**
 * Session state for one browser tab: an append-only query history, the
 * active query text, and the selected cohort. Submissions are tokenized so
 * that a response overtaken by a newer submit is discarded instead of
 * rendered.
 */
export class SearchSession {
  private entries: HistoryEntry[] = [];
  private latestToken = 0;
  activeQuery = '';
  selectedCohort: string | null = null;

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  /** Register a new in-flight submission and invalidate older ones. */
  beginSubmit(query: string): number {
    this.activeQuery = query;
    this.latestToken += 1;
    return this.latestToken;
  }

  /**
   * Accept a response if its submission is still the latest; stale
   * responses leave the session untouched and return false.
   */
  acceptResponse(token: number, query: string, response: QueryResponse): boolean {
    if (token !== this.latestToken) return false;
    this.entries.push({ query, response });
    return true;
  }

  selectCohort(accession: string): void {
    this.selectedCohort = accession;
  }

  clearSelection(): void {
    this.selectedCohort = null;
  }
}
