import { describe, expect, it } from 'vitest';
import { ApiClient } from '../src/api.js';
import { composeRefinement } from '../src/refine.js';
import { cardAccessions, renderDetail, renderHits } from '../src/render.js';

// Round-trip tests against a live service. Start one with
//   neuroembed demo --out /tmp/demo
//   neuroembed serve --snapshot /tmp/demo/snapshot --port 8765
// then run BACKEND_URL=http://127.0.0.1:8765 npm test
const backend = process.env.BACKEND_URL;

describe.skipIf(!backend)('live backend round trip', () => {
  const client = new ApiClient(backend ?? '');

  it('renders ranked cards for a natural-language query', async () => {
    const response = await client.query(
      "Show me Parkinson's disease cohorts profiled with RNA-Seq in substantia nigra tissue",
    );
    expect(response.hits.length).toBeGreaterThan(0);
    expect(response.hits.map((h) => h.rank)).toEqual(
      response.hits.map((_, i) => i + 1),
    );

    const html = renderHits(response.hits);
    expect(cardAccessions(html)).toEqual(
      response.hits.map((h) => h.accession),
    );
  });

  it('narrows a query with a chip and still finds cohorts', async () => {
    const refined = composeRefinement('parkinson cohorts', 'Ti', 'substantia nigra');
    expect(refined).toBe('parkinson cohorts from substantia nigra');
    const response = await client.query(refined, 5);
    expect(response.hits.length).toBeGreaterThan(0);
  });

  it('renders the detail view of the top hit', async () => {
    const response = await client.query('parkinson cohorts', 1);
    expect(response.hits.length).toBe(1);
    const top = response.hits[0];

    const payload = await client.cohort(top.accession);
    expect(payload.accession).toBe(top.accession);

    const html = renderDetail(payload);
    expect(html).toContain(`data-accession="${top.accession}"`);
    for (const dimension of ['Po', 'As', 'Ph', 'Ti']) {
      expect(html).toContain(`<th>${dimension}</th>`);
    }
  });

  it('reports a loaded snapshot in health and stats', async () => {
    const health = await client.health();
    expect(health).toEqual({ status: 'ok', loaded: true });

    const stats = await client.stats();
    expect(stats.cohorts).toBeGreaterThan(0);
    expect(stats.vectors).toBe(stats.cohorts);
    expect(stats.dimension).toBeGreaterThan(0);
  });
});
