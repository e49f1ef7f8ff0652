"""Tests for QA dataset generation: vocabulary splitting, combination
sampling with cohort verification, template rendering, and serialization."""

import io
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuroembed.augment import AugmentedVocabulary
from neuroembed.catalog import DIMENSIONS, CohortCatalog, CohortRecord
from neuroembed.ontology import EFO, NCBI_TAXON, UBERON
from neuroembed.qagen import (
    DEFAULT_PREPOSITIONS,
    TEMPLATES,
    TEST_ONLY_TEMPLATE,
    TRAIN_TEMPLATES,
    QAPair,
    QueryCombo,
    check_leakage,
    enumerate_pairs,
    generate_qad,
    load_qa_pairs,
    render_nlq,
    stratified_split,
    subsample_train,
    write_qa_pairs,
)

PO = [f"species {c}" for c in "abcdef"]
AS = [f"assay {c}" for c in "abcdef"]
PH = [f"disease {c}" for c in "abcdef"]
TI = [f"tissue {c}" for c in "abcdef"]


def vocab_fixture() -> AugmentedVocabulary:
    """Six canonicals per dimension, one synonym each: 12 terms per
    dimension, 48 overall."""
    vocab = AugmentedVocabulary()
    for i, term in enumerate(PO):
        vocab.add("Po", term, [f"taxon {i}"], NCBI_TAXON, "exact")
    for i, term in enumerate(AS):
        vocab.add("As", term, [f"protocol {i}"], EFO, "exact")
    for i, term in enumerate(PH):
        vocab.add("Ph", term, [f"syndrome {i}"], EFO, "exact")
    for i, term in enumerate(TI):
        vocab.add("Ti", term, [f"region {i}"], UBERON, "exact")
    return vocab


def catalog_fixture(count: int = 48) -> CohortCatalog:
    records = [
        CohortRecord(accession=f"G{i:03d}", title=f"study {i}",
                     po=(PO[i % 6],), as_=(AS[(i // 2) % 6],),
                     ph=(PH[(i // 3) % 6],), ti=(TI[(i // 4) % 6],))
        for i in range(count)
    ]
    return CohortCatalog(records=records, source_digest="qagen-fixture")


def brute_force_matching(catalog: CohortCatalog, vocab: AugmentedVocabulary,
                         combo: QueryCombo) -> tuple[str, ...]:
    """Independent full-scan oracle for the satisfying-cohort set."""
    hits = []
    for record in catalog.records:
        ok = True
        for dimension, term in combo.terms:
            canonical = vocab.canonical_of(dimension, term)
            if canonical is None or canonical not in record.values(dimension):
                ok = False
                break
        if ok:
            hits.append(record.accession)
    return tuple(hits)


class TestTemplates:
    def test_template_strings(self):
        assert TEMPLATES == {
            1: "Give me papers about",
            2: "Can you show findings about",
            3: "Explore data related to",
            4: "Show me studies on",
            5: "What research exists on",
            6: "I'd like to know about",
        }

    def test_template_six_is_held_out(self):
        assert TEST_ONLY_TEMPLATE == 6
        assert TRAIN_TEMPLATES == (1, 2, 3, 4, 5)


class TestQueryCombo:
    def test_valid_sizes(self):
        for k in range(1, 5):
            combo = QueryCombo(terms=tuple(
                (d, "x") for d in DIMENSIONS[:k]))
            assert combo.k == k

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            QueryCombo(terms=())

    def test_duplicate_dimension_rejected(self):
        with pytest.raises(ValueError):
            QueryCombo(terms=(("Po", "a"), ("Po", "b")))

    def test_term_map(self):
        combo = QueryCombo(terms=(("Po", "ox"), ("Ti", "cortex")))
        assert combo.term_map() == {"Po": "ox", "Ti": "cortex"}


class TestRenderNlq:
    def test_four_term_query(self):
        """Full render with every connective phrase in play."""
        combo = QueryCombo(terms=(
            ("Po", "ox"),
            ("As", "transcription profiling by high throughput sequencing"),
            ("Ph", "senile dementia alzheimer type"),
            ("Ti", "prefrontal cortex"),
        ))
        assert render_nlq(combo, 4) == (
            "Show me studies on cohorts within ox population "
            "from prefrontal cortex "
            "from transcription profiling by high throughput sequencing "
            "with senile dementia alzheimer type observations"
        )

    def test_single_term_query(self):
        combo = QueryCombo(terms=(("Ph", "parkinson disease"),))
        assert render_nlq(combo, 1) == (
            "Give me papers about cohorts with parkinson disease observations")

    def test_assay_and_tissue_share_preposition(self):
        combo = QueryCombo(terms=(("As", "rna sequencing assay"),))
        assert render_nlq(combo, 2) == (
            "Can you show findings about cohorts from rna sequencing assay")
        combo = QueryCombo(terms=(("Ti", "substantia nigra"),))
        assert render_nlq(combo, 2) == (
            "Can you show findings about cohorts from substantia nigra")

    def test_render_order_is_fixed(self):
        """Term order inside the combo does not affect the rendered query."""
        forward = QueryCombo(terms=(("Po", "ox"), ("Ph", "scrapie")))
        backward = QueryCombo(terms=(("Ph", "scrapie"), ("Po", "ox")))
        assert render_nlq(forward, 3) == render_nlq(backward, 3)
        assert render_nlq(forward, 3) == (
            "Explore data related to cohorts within ox population "
            "with scrapie observations")

    def test_tissue_precedes_assay(self):
        combo = QueryCombo(terms=(("As", "assay a"), ("Ti", "tissue b")))
        nlq = render_nlq(combo, 5)
        assert nlq.index("tissue b") < nlq.index("assay a")

    def test_unknown_template_rejected(self):
        combo = QueryCombo(terms=(("Po", "ox"),))
        with pytest.raises(ValueError):
            render_nlq(combo, 7)

    def test_custom_rules(self):
        combo = QueryCombo(terms=(("Ti", "liver"),))
        rules = dict(DEFAULT_PREPOSITIONS)
        rules["Ti"] = ("sampled from ", " tissue")
        assert render_nlq(combo, 1, rules) == (
            "Give me papers about cohorts sampled from liver tissue")


class TestStratifiedSplit:
    def test_eighty_twenty_quota_per_dimension(self):
        split = stratified_split(vocab_fixture(), 0.8, seed=5)
        for dim in DIMENSIONS:
            assert len(split.train_vals[dim]) == 10  # round(0.8 * 12)
            assert len(split.test_vals[dim]) == 2

    def test_sides_are_disjoint_and_complete(self):
        vocab = vocab_fixture()
        split = stratified_split(vocab, 0.8, seed=5)
        for dim in DIMENSIONS:
            train, test = split.train_vals[dim], split.test_vals[dim]
            assert not train & test
            assert train | test == set(vocab.terms(dim))
        assert not split.all_train() & split.all_test()

    def test_deterministic(self):
        one = stratified_split(vocab_fixture(), 0.8, seed=5)
        two = stratified_split(vocab_fixture(), 0.8, seed=5)
        assert one.train_vals == two.train_vals
        assert one.test_vals == two.test_vals

    def test_seed_changes_assignment(self):
        one = stratified_split(vocab_fixture(), 0.8, seed=5)
        two = stratified_split(vocab_fixture(), 0.8, seed=6)
        assert one.train_vals != two.train_vals

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.2, 1.5])
    def test_ratio_bounds(self, ratio):
        with pytest.raises(ValueError):
            stratified_split(vocab_fixture(), ratio, seed=0)

    def test_tiny_dimension_goes_to_train(self):
        vocab = AugmentedVocabulary()
        vocab.add("Po", "homo sapiens", [], NCBI_TAXON, "exact")
        split = stratified_split(vocab, 0.8, seed=0)
        assert split.train_vals["Po"] == {"homo sapiens"}
        assert split.test_vals["Po"] == set()
        assert any("Po" in w for w in split.warnings)

    def test_term_shared_across_dimensions_keeps_one_side(self):
        """A string appearing in two dimensions must not straddle the split,
        otherwise the global term sets overlap."""
        vocab = vocab_fixture()
        for term in TI:
            vocab.add("Ph", term, [], EFO, "exact")
        for seed in range(8):
            split = stratified_split(vocab, 0.8, seed=seed)
            assert not split.all_train() & split.all_test()

    @given(seed=st.integers(0, 10_000),
           sizes=st.lists(st.integers(2, 9), min_size=4, max_size=4))
    @settings(max_examples=30, deadline=None)
    def test_split_invariants_hold_for_any_seed(self, seed, sizes):
        vocab = AugmentedVocabulary()
        for dim, size in zip(DIMENSIONS, sizes):
            for i in range(size):
                vocab.add(dim, f"{dim.lower()} term {i}", [], EFO, "exact")
        split = stratified_split(vocab, 0.8, seed=seed)
        for dim, size in zip(DIMENSIONS, sizes):
            train, test = split.train_vals[dim], split.test_vals[dim]
            assert not train & test
            assert len(train) + len(test) == size
            assert len(train) == round(0.8 * size)


class TestEnumeratePairs:
    def test_brute_force_reverification(self):
        """Every emitted match set equals the independent full-scan oracle,
        and the chosen accession is drawn from it."""
        vocab, catalog = vocab_fixture(), catalog_fixture()
        split = stratified_split(vocab, 0.8, seed=3)
        out = enumerate_pairs(split.test_vals, vocab, catalog, seed=3)
        assert out
        for combo, accession, all_matching in out:
            expected = brute_force_matching(catalog, vocab, combo)
            assert all_matching == expected
            assert accession in all_matching

    def test_combos_are_unique(self):
        vocab, catalog = vocab_fixture(), catalog_fixture()
        split = stratified_split(vocab, 0.8, seed=3)
        out = enumerate_pairs(split.train_vals, vocab, catalog, seed=3)
        combos = [combo for combo, _, _ in out]
        assert len(combos) == len(set(combos))

    def test_budget_caps_each_combination_size(self):
        vocab, catalog = vocab_fixture(), catalog_fixture()
        split = stratified_split(vocab, 0.8, seed=3)
        out = enumerate_pairs(split.train_vals, vocab, catalog, seed=3,
                              budget=5)
        by_k = {k: sum(1 for c, _, _ in out if c.k == k) for k in range(1, 5)}
        assert all(count <= 5 for count in by_k.values())

    def test_unsatisfiable_terms_are_dropped(self):
        vocab = vocab_fixture()
        vocab.add("Po", "ghost species", [], NCBI_TAXON, "exact")
        catalog = catalog_fixture()
        vals = {"Po": {"ghost species", PO[0]}}
        out = enumerate_pairs(vals, vocab, catalog, seed=0)
        assert [c.terms for c, _, _ in out] == [(("Po", PO[0]),)]

    def test_synonyms_match_through_their_canonical(self):
        """Records hold canonicals only; a synonym-valued combo must still
        find its cohorts."""
        vocab, catalog = vocab_fixture(), catalog_fixture()
        vals = {"Po": {"taxon 0"}}  # synonym of "species a"
        out = enumerate_pairs(vals, vocab, catalog, seed=0)
        assert len(out) == 1
        _, accession, all_matching = out[0]
        assert all_matching == tuple(
            r.accession for r in catalog.records if "species a" in r.po)
        assert accession in all_matching

    def test_match_sets_follow_catalog_order(self):
        vocab, catalog = vocab_fixture(), catalog_fixture()
        split = stratified_split(vocab, 0.8, seed=3)
        order = {r.accession: i for i, r in enumerate(catalog.records)}
        for _, _, all_matching in enumerate_pairs(
                split.test_vals, vocab, catalog, seed=3):
            positions = [order[a] for a in all_matching]
            assert positions == sorted(positions)

    def test_deterministic(self):
        vocab, catalog = vocab_fixture(), catalog_fixture()
        split = stratified_split(vocab, 0.8, seed=3)
        one = enumerate_pairs(split.train_vals, vocab, catalog, seed=9)
        two = enumerate_pairs(split.train_vals, vocab, catalog, seed=9)
        assert one == two


class TestGenerateQad:
    def test_train_never_uses_the_held_out_template(self):
        train, test = generate_qad(vocab_fixture(), catalog_fixture(), seed=2)
        assert train and test
        assert all(p.template_id in TRAIN_TEMPLATES for p in train)
        assert sorted({p.template_id for p in test}) == [1, 2, 3, 4, 5, 6]

    def test_each_test_combo_renders_all_six_templates(self):
        _, test = generate_qad(vocab_fixture(), catalog_fixture(), seed=2)
        by_combo = {}
        for pair in test:
            by_combo.setdefault(pair.combo, set()).add(pair.template_id)
        assert all(ids == {1, 2, 3, 4, 5, 6} for ids in by_combo.values())

    def test_split_labels(self):
        train, test = generate_qad(vocab_fixture(), catalog_fixture(), seed=2)
        assert all(p.split == "train" for p in train)
        assert all(p.split == "test" for p in test)

    def test_nlq_matches_template_rendering(self):
        train, test = generate_qad(vocab_fixture(), catalog_fixture(), seed=2)
        for pair in train + test:
            assert pair.nlq == render_nlq(pair.combo, pair.template_id)

    def test_no_term_leakage_between_splits(self):
        """Re-tokenizing rendered queries against the opposite side's term
        set finds nothing."""
        vocab, catalog = vocab_fixture(), catalog_fixture()
        train, test = generate_qad(vocab, catalog, seed=2)
        split = stratified_split(vocab, 0.8, seed=2)
        assert check_leakage(train, split.all_test()) == []
        assert check_leakage(test, split.all_train()) == []

    def test_train_capped_at_four_times_test(self):
        vocab, catalog = vocab_fixture(), catalog_fixture()
        full_train, test = generate_qad(vocab, catalog, seed=2,
                                        train_factor=10 ** 9)
        train, _ = generate_qad(vocab, catalog, seed=2)
        assert len(train) == min(len(full_train), 4 * len(test))
        assert len(full_train) > 4 * len(test)  # the cap actually binds here

    def test_empty_catalog_yields_empty_sets(self):
        catalog = CohortCatalog(records=[], source_digest="")
        assert generate_qad(vocab_fixture(), catalog, seed=2) == ([], [])

    def test_generation_is_deterministic(self):
        one = generate_qad(vocab_fixture(), catalog_fixture(), seed=4)
        two = generate_qad(vocab_fixture(), catalog_fixture(), seed=4)
        assert one == two


class TestSubsampleTrain:
    def pairs(self, count: int) -> list[QAPair]:
        combo = QueryCombo(terms=(("Po", "ox"),))
        return [QAPair(f"q{i}", f"G{i:03d}", (f"G{i:03d}",), combo, 1, "train")
                for i in range(count)]

    def test_keeps_everything_when_small(self):
        pairs = self.pairs(7)
        assert subsample_train(pairs, test_size=2, factor=4, seed=0) == pairs

    def test_subsamples_to_factor_times_test(self):
        pairs = self.pairs(100)
        out = subsample_train(pairs, test_size=5, factor=4, seed=0)
        assert len(out) == 20
        assert set(map(id, out)) <= set(map(id, pairs))

    def test_preserves_original_order(self):
        pairs = self.pairs(50)
        out = subsample_train(pairs, test_size=3, factor=4, seed=1)
        indices = [pairs.index(p) for p in out]
        assert indices == sorted(indices)

    def test_deterministic(self):
        pairs = self.pairs(60)
        one = subsample_train(pairs, test_size=4, factor=4, seed=9)
        two = subsample_train(pairs, test_size=4, factor=4, seed=9)
        assert one == two

    def test_factor_below_one_rejected(self):
        with pytest.raises(ValueError):
            subsample_train(self.pairs(3), test_size=1, factor=0, seed=0)


class TestCheckLeakage:
    def combo_pairs(self, nlq: str) -> list[QAPair]:
        combo = QueryCombo(terms=(("Po", "ox"),))
        return [QAPair(nlq, "G000", ("G000",), combo, 1, "train")]

    def test_finds_forbidden_terms(self):
        pairs = self.combo_pairs(
            "Give me papers about cohorts within rattus population")
        assert check_leakage(pairs, {"rattus"}) == ["rattus"]

    def test_respects_word_boundaries(self):
        pairs = self.combo_pairs(
            "Give me papers about cohorts within rattus population")
        assert check_leakage(pairs, {"rat"}) == []

    def test_multiword_terms(self):
        pairs = self.combo_pairs(
            "Show me studies on cohorts from substantia nigra")
        assert check_leakage(pairs, {"substantia nigra"}) == [
            "substantia nigra"]

    def test_clean_pairs(self):
        pairs = self.combo_pairs(
            "Explore data related to cohorts from hippocampus")
        assert check_leakage(pairs, {"striatum", "cortex"}) == []


class TestQaPairFile:
    def test_round_trip(self):
        train, test = generate_qad(vocab_fixture(), catalog_fixture(), seed=8)
        sink = io.StringIO()
        write_qa_pairs(test, sink)
        assert load_qa_pairs(io.StringIO(sink.getvalue())) == test
        sink = io.StringIO()
        write_qa_pairs(train, sink)
        assert load_qa_pairs(io.StringIO(sink.getvalue())) == train

    def test_blank_lines_are_skipped(self):
        _, test = generate_qad(vocab_fixture(), catalog_fixture(), seed=8)
        sink = io.StringIO()
        write_qa_pairs(test[:2], sink)
        payload = sink.getvalue() + "\n\n"
        assert load_qa_pairs(io.StringIO(payload)) == test[:2]

    def test_writes_one_json_object_per_line(self):
        import json

        _, test = generate_qad(vocab_fixture(), catalog_fixture(), seed=8)
        sink = io.StringIO()
        write_qa_pairs(test, sink)
        lines = sink.getvalue().splitlines()
        assert len(lines) == len(test)
        row = json.loads(lines[0])
        assert set(row) == {"nlq", "accession", "all_matching", "terms",
                            "n_terms", "template_id", "split"}

    def test_serialization_is_byte_stable(self):
        """Two generation runs with one seed produce identical files."""
        streams = []
        for _ in range(2):
            train, test = generate_qad(vocab_fixture(), catalog_fixture(),
                                       seed=8)
            sink = io.StringIO()
            write_qa_pairs(train, sink)
            write_qa_pairs(test, sink)
            streams.append(sink.getvalue())
        assert streams[0] == streams[1]
