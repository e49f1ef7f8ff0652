import { ApiClient, ApiError } from './api.js';
import type { Dimension } from './api.js';
import { composeRefinement } from './refine.js';
import {
  renderDetail,
  renderError,
  renderHits,
  renderNotFound,
  renderStats,
  escapeHtml,
} from './render.js';
import { SearchSession } from './state.js';

const DEFAULT_BACKEND = 'http://127.0.0.1:8765';

function backendUrl(): string {
  const configured = (window as unknown as { BACKEND_URL?: string }).BACKEND_URL;
  return configured || DEFAULT_BACKEND;
}

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

export function bootstrap(): void {
  const api = new ApiClient(backendUrl());
  const session = new SearchSession();

  const form = element<HTMLFormElement>('query-form');
  const input = element<HTMLInputElement>('query-input');
  const submit = element<HTMLButtonElement>('query-submit');
  const banner = element<HTMLDivElement>('banner');
  const results = element<HTMLDivElement>('results');
  const detail = element<HTMLDivElement>('detail');
  const historyList = element<HTMLUListElement>('history');
  const statsLine = element<HTMLElement>('stats');

  const syncSubmit = () => {
    submit.disabled = input.value.trim() === '';
  };
  input.addEventListener('input', syncSubmit);
  syncSubmit();

  const renderHistory = () => {
    historyList.innerHTML = session.history
      .map(
        (entry, i) =>
          `<li><button class="history-entry" data-index="${i}">` +
          `${escapeHtml(entry.query)} (${entry.response.hits.length})</button></li>`,
      )
      .join('');
  };

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text) return;
    const token = session.beginSubmit(text);
    api
      .query(text)
      .then((response) => {
        if (!session.acceptResponse(token, text, response)) return;
        banner.innerHTML = '';
        results.innerHTML = renderHits(response.hits);
        renderHistory();
      })
      .catch((error: unknown) => {
        const message =
          error instanceof ApiError
            ? error.message
            : `backend unreachable at ${backendUrl()}`;
        banner.innerHTML = renderError(message);
      });
  });

  const openCohort = (accession: string) => {
    session.selectCohort(accession);
    api
      .cohort(accession)
      .then((payload) => {
        detail.innerHTML = renderDetail(payload);
      })
      .catch((error: unknown) => {
        if (error instanceof ApiError && error.status === 404) {
          detail.innerHTML = renderNotFound(accession);
        } else {
          banner.innerHTML = renderError(String(error));
        }
      });
  };

  results.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    const chip = target.closest<HTMLButtonElement>('.chip');
    if (chip) {
      const dimension = chip.dataset.dimension as Dimension;
      const term = chip.dataset.term ?? '';
      const base = input.value.trim() || session.activeQuery;
      input.value = composeRefinement(base, dimension, term);
      syncSubmit();
      input.focus();
      return;
    }
    const accession = target.closest<HTMLElement>('[data-accession]');
    if (accession) openCohort(accession.dataset.accession ?? '');
  });

  historyList.addEventListener('click', (event) => {
    const entry = (event.target as HTMLElement).closest<HTMLButtonElement>(
      '.history-entry',
    );
    if (!entry) return;
    const stored = session.history[Number(entry.dataset.index)];
    if (!stored) return;
    input.value = stored.query;
    syncSubmit();
    results.innerHTML = renderHits(stored.response.hits);
  });

  api
    .stats()
    .then((stats) => {
      statsLine.innerHTML = renderStats(stats);
    })
    .catch(() => {
      banner.innerHTML = renderError(
        `backend unreachable at ${backendUrl()}; start it with ` +
          '"neuroembed serve --snapshot <dir>"',
      );
    });
}

if (typeof document !== 'undefined' && document.getElementById('query-form')) {
  bootstrap();
}
