import { describe, expect, it } from 'vitest';
import type { CohortDetail, QueryHit, ServiceStats } from '../src/api.js';
import {
  cardAccessions,
  escapeHtml,
  renderCard,
  renderDetail,
  renderError,
  renderHits,
  renderNotFound,
  renderStats,
} from '../src/render.js';

function hit(overrides: Partial<QueryHit> = {}): QueryHit {
  return {
    rank: 1,
    accession: 'GSE900007',
    title: 'Substantia nigra transcriptomes in Parkinson disease',
    similarity: 0.91234,
    source_url: 'https://example.org/GSE900007',
    metadata: {
      Po: ['homo sapiens'],
      As: ['rna sequencing assay'],
      Ph: ['parkinson disease'],
      Ti: ['substantia nigra'],
    },
    ...overrides,
  };
}

function detail(overrides: Partial<CohortDetail> = {}): CohortDetail {
  return {
    accession: 'GSE900007',
    title: 'Substantia nigra transcriptomes in Parkinson disease',
    summary: 'Case and control midbrain tissue profiled by sequencing.',
    pmid: '30000007',
    publication_title: 'Substantia nigra transcriptomes: a resource',
    disease: 'parkinson disease',
    source_url: 'https://example.org/GSE900007',
    dimensions: {
      Po: { raw: ['Human'], normalized: [{ value: 'homo sapiens', mapped: true }] },
      As: {
        raw: ['RNA-Seq'],
        normalized: [{ value: 'rna sequencing assay', mapped: true }],
      },
      Ph: {
        raw: ['parkinsonism'],
        normalized: [{ value: 'parkinsonism', mapped: false }],
      },
      Ti: { raw: [], normalized: [] },
    },
    ...overrides,
  };
}

describe('escapeHtml', () => {
  it('escapes markup-significant characters', () => {
    expect(escapeHtml(`<b>"x" & 'y'</b>`)).toBe(
      '&lt;b&gt;&quot;x&quot; &amp; &#39;y&#39;&lt;/b&gt;',
    );
  });
});

describe('renderCard', () => {
  it('shows rank, accession, similarity, title and source link', () => {
    const html = renderCard(hit());
    expect(html).toContain('data-accession="GSE900007"');
    expect(html).toContain('#1');
    expect(html).toContain('0.9123');
    expect(html).toContain('Substantia nigra transcriptomes in Parkinson disease');
    expect(html).toContain('href="https://example.org/GSE900007"');
  });

  it('emits one chip per metadata term with data attributes', () => {
    const html = renderCard(hit());
    expect(html).toContain(
      'data-dimension="Ti" data-term="substantia nigra">Ti: substantia nigra',
    );
    expect(html).toContain('data-dimension="Po" data-term="homo sapiens"');
    const chipCount = (html.match(/class="chip"/g) ?? []).length;
    expect(chipCount).toBe(4);
  });

  it('escapes hostile titles and terms', () => {
    const html = renderCard(
      hit({
        title: '<script>alert("x")</script>',
        metadata: { Po: [], As: [], Ph: ['a "quoted" term'], Ti: [] },
      }),
    );
    expect(html).not.toContain('<script>');
    expect(html).toContain('&lt;script&gt;');
    expect(html).toContain('data-term="a &quot;quoted&quot; term"');
  });
});

describe('renderHits', () => {
  it('renders a placeholder when nothing matched', () => {
    expect(renderHits([])).toBe(
      '<div class="no-results">No cohorts matched this query.</div>',
    );
  });

  it('keeps the backend ordering', () => {
    const hits = [
      hit({ rank: 1, accession: 'GSE900007' }),
      hit({ rank: 2, accession: 'GSE900047' }),
      hit({ rank: 3, accession: 'GSE900087' }),
    ];
    expect(cardAccessions(renderHits(hits))).toEqual([
      'GSE900007',
      'GSE900047',
      'GSE900087',
    ]);
  });
});

describe('renderDetail', () => {
  it('renders one row per dimension with raw and normalized values', () => {
    const html = renderDetail(detail());
    for (const dimension of ['Po', 'As', 'Ph', 'Ti']) {
      expect(html).toContain(`<th>${dimension}</th>`);
    }
    expect(html).toContain('<span class="mapped">homo sapiens</span>');
    expect(html).toContain(
      '<span class="unmapped" title="no ontology match">parkinsonism</span>',
    );
    expect(html).toContain('<em>none</em>');
  });

  it('shows the publication line with its PMID when present', () => {
    const html = renderDetail(detail());
    expect(html).toContain('Substantia nigra transcriptomes: a resource');
    expect(html).toContain('(PMID 30000007)');
  });

  it('omits the publication line for unpublished cohorts', () => {
    const html = renderDetail(detail({ pmid: null, publication_title: null }));
    expect(html).not.toContain('class="publication"');
    expect(html).not.toContain('PMID');
  });
});

describe('renderNotFound and renderError', () => {
  it('names the missing accession', () => {
    expect(renderNotFound('GSE0')).toContain('cohort not found: GSE0');
  });

  it('wraps the message in an error banner', () => {
    expect(renderError('backend unreachable')).toBe(
      '<div class="banner error">backend unreachable</div>',
    );
  });
});

describe('renderStats', () => {
  it('summarizes the loaded snapshot', () => {
    const stats: ServiceStats = {
      cohorts: 168,
      vectors: 168,
      dimension: 512,
      vocabulary: { Po: 30, As: 30, Ph: 35, Ti: 40 },
      model: { provider_id: 'hashed-512', scale: 20, variant: 'infonce' },
    };
    const line = renderStats(stats);
    expect(line).toContain('168 cohorts');
    expect(line).toContain('dimension 512');
    expect(line).toContain('Po 30 / As 30 / Ph 35 / Ti 40');
    expect(line).toContain('hashed-512');
  });
});
