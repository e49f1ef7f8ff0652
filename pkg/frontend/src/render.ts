import {
  CohortDetail,
  Dimension,
  DIMENSIONS,
  QueryHit,
  ServiceStats,
} from './api.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

function renderChips(hit: QueryHit): string {
  const chips: string[] = [];
  for (const dimension of DIMENSIONS) {
    for (const term of hit.metadata[dimension] ?? []) {
      chips.push(
        `<button class="chip" data-dimension="${dimension}" ` +
          `data-term="${escapeHtml(term)}">` +
          `${dimension}: ${escapeHtml(term)}</button>`,
      );
    }
  }
  return chips.join('');
}

export function renderCard(hit: QueryHit): string {
  return `
<article class="card" data-accession="${escapeHtml(hit.accession)}">
  <header>
    <span class="rank">#${hit.rank}</span>
    <button class="accession" data-accession="${escapeHtml(hit.accession)}">
      ${escapeHtml(hit.accession)}
    </button>
    <span class="similarity">${hit.similarity.toFixed(4)}</span>
  </header>
  <h3 class="title">${escapeHtml(hit.title)}</h3>
  <div class="chips">${renderChips(hit)}</div>
  <a class="source" href="${escapeHtml(hit.source_url)}" target="_blank" rel="noopener">source record</a>
</article>`;
}

export function renderHits(hits: QueryHit[]): string {
  if (hits.length === 0) {
    return '<div class="no-results">No cohorts matched this query.</div>';
  }
  return hits.map(renderCard).join('');
}

function renderDimensionRows(detail: CohortDetail, dimension: Dimension): string {
  const view = detail.dimensions[dimension];
  const raw = view.raw.map(escapeHtml).join(', ') || '<em>none</em>';
  const normalized =
    view.normalized
      .map((entry) =>
        entry.mapped
          ? `<span class="mapped">${escapeHtml(entry.value)}</span>`
          : `<span class="unmapped" title="no ontology match">${escapeHtml(entry.value)}</span>`,
      )
      .join(', ') || '<em>none</em>';
  return `
  <tr>
    <th>${dimension}</th>
    <td>${raw}</td>
    <td>${normalized}</td>
  </tr>`;
}

export function renderDetail(detail: CohortDetail): string {
  const publication = detail.publication_title
    ? `<p class="publication">${escapeHtml(detail.publication_title)}` +
      (detail.pmid ? ` (PMID ${escapeHtml(detail.pmid)})` : '') +
      '</p>'
    : '';
  return `
<section class="detail" data-accession="${escapeHtml(detail.accession)}">
  <h2>${escapeHtml(detail.accession)}: ${escapeHtml(detail.title)}</h2>
  ${publication}
  <p class="summary">${escapeHtml(detail.summary)}</p>
  <table class="dimensions">
    <thead><tr><th></th><th>raw</th><th>normalized</th></tr></thead>
    <tbody>${DIMENSIONS.map((d) => renderDimensionRows(detail, d)).join('')}</tbody>
  </table>
  <a class="source" href="${escapeHtml(detail.source_url)}" target="_blank" rel="noopener">source record</a>
</section>`;
}

export function renderNotFound(accession: string): string {
  return `<section class="detail not-found">cohort not found: ${escapeHtml(accession)}</section>`;
}

export function renderError(message: string): string {
  return `<div class="banner error">${escapeHtml(message)}</div>`;
}

export function renderStats(stats: ServiceStats): string {
  const vocabulary = DIMENSIONS.map(
    (d) => `${d} ${stats.vocabulary[d]}`,
  ).join(' / ');
  return (
    `${stats.cohorts} cohorts, ${stats.vectors} vectors of dimension ` +
    `${stats.dimension}, vocabulary ${vocabulary}, model ${escapeHtml(
      stats.model.provider_id,
    )}`
  );
}

/** Accessions of the rendered cards, in display order. */
export function cardAccessions(html: string): string[] {
  const out: string[] = [];
  const pattern = /<article class="card" data-accession="([^"]*)"/g;
  for (const match of html.matchAll(pattern)) out.push(match[1]);
  return out;
}
