"""Natural-language QA dataset generation over the augmented vocabulary.

The flow: split the per-dimension vocabulary into disjoint train/test term
sets, sample term combinations of 1..4 distinct dimensions, keep only combos
with at least one matching cohort, render each retained combo through the
query templates, and subsample the training side to a fixed multiple of the
test size. Everything is seeded and reproducible bit-for-bit.
"""

from __future__ import annotations

import itertools
import json
import random
import re
from dataclasses import dataclass, field
from math import prod

from .augment import AugmentedVocabulary
from .catalog import DIMENSIONS, CohortCatalog

TEMPLATES = {
    1: "Give me papers about",
    2: "Can you show findings about",
    3: "Explore data related to",
    4: "Show me studies on",
    5: "What research exists on",
    6: "I'd like to know about",
}
TEST_ONLY_TEMPLATE = 6
TRAIN_TEMPLATES = tuple(t for t in TEMPLATES if t != TEST_ONLY_TEMPLATE)

# Connective phrase per dimension: (prefix, suffix) around the term.
DEFAULT_PREPOSITIONS = {
    "Po": ("within ", " population"),
    "Ti": ("from ", ""),
    "As": ("from ", ""),
    "Ph": ("with ", " observations"),
}
# Dimension order inside a rendered query.
RENDER_ORDER = ("Po", "Ti", "As", "Ph")

DEFAULT_BUDGET = 250
DEFAULT_TRAIN_FACTOR = 4


@dataclass(frozen=True)
class QueryCombo:
    """1..4 terms, at most one per dimension."""

    terms: tuple[tuple[str, str], ...]  # ((dimension, term), ...)

    def __post_init__(self):
        dims = [d for d, _ in self.terms]
        if not 1 <= len(dims) <= 4 or len(set(dims)) != len(dims):
            raise ValueError("combo needs 1..4 terms over distinct dimensions")

    @property
    def k(self) -> int:
        return len(self.terms)

    def term_map(self) -> dict[str, str]:
        return dict(self.terms)


@dataclass(frozen=True)
class QAPair:
    nlq: str
    accession: str
    all_matching: tuple[str, ...]
    combo: QueryCombo
    template_id: int
    split: str  # "train" | "test"

    @property
    def n_terms(self) -> int:
        return self.combo.k


@dataclass
class SplitVocabulary:
    train_vals: dict[str, set[str]]
    test_vals: dict[str, set[str]]
    seed: int
    warnings: list[str] = field(default_factory=list)

    def all_train(self) -> set[str]:
        return set().union(*self.train_vals.values())

    def all_test(self) -> set[str]:
        return set().union(*self.test_vals.values())


def _rng(seed, *scope) -> random.Random:
    return random.Random(":".join([str(seed), *map(str, scope)]))


def stratified_split(vocab: AugmentedVocabulary, ratio: float,
                     seed: int) -> SplitVocabulary:
    """Shuffled per-dimension split with |train| = round(ratio * total) and the
    remainder in test; the stratification variable is the dimension. A term
    string occurring in several dimensions keeps one global side so the two
    vocabularies stay disjoint overall."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must be strictly between 0 and 1")
    split = SplitVocabulary(train_vals={}, test_vals={}, seed=seed)
    side: dict[str, str] = {}
    for dimension in DIMENSIONS:
        terms = sorted(set(vocab.terms(dimension)))
        if len(terms) < 2:
            split.train_vals[dimension] = set(terms)
            split.test_vals[dimension] = set()
            for t in terms:
                side.setdefault(t, "train")
            split.warnings.append(
                f"{dimension}: fewer than 2 terms, all assigned to train")
            continue
        quota = round(ratio * len(terms))
        train = {t for t in terms if side.get(t) == "train"}
        test = {t for t in terms if side.get(t) == "test"}
        fresh = [t for t in terms if t not in side]
        _rng(seed, "split", dimension).shuffle(fresh)
        take = min(max(quota - len(train), 0), len(fresh))
        train.update(fresh[:take])
        test.update(fresh[take:])
        for t in train:
            side[t] = "train"
        for t in test:
            side[t] = "test"
        split.train_vals[dimension] = train
        split.test_vals[dimension] = test
    return split


def _cohort_positions(catalog: CohortCatalog) -> dict[str, dict[str, set[int]]]:
    index: dict[str, dict[str, set[int]]] = {d: {} for d in DIMENSIONS}
    for pos, record in enumerate(catalog.records):
        for dimension in DIMENSIONS:
            for value in record.values(dimension):
                index[dimension].setdefault(value, set()).add(pos)
    return index


def enumerate_pairs(vals: dict[str, set[str]], vocab: AugmentedVocabulary,
                    catalog: CohortCatalog, seed: int,
                    budget: int = DEFAULT_BUDGET,
                    ) -> list[tuple[QueryCombo, str, tuple[str, ...]]]:
    """Sample up to `budget` term combinations per k in 1..4 (without
    replacement, uniformly over the full combination space) and keep those
    with at least one satisfying cohort. A cohort satisfies a combo iff, for
    every dimension in it, the term's canonical form appears among the
    record's values for that dimension. One matching cohort is chosen
    uniformly at random per retained combo."""
    positions = _cohort_positions(catalog)
    term_lists = {d: sorted(vals.get(d, ())) for d in DIMENSIONS}
    accessions = [r.accession for r in catalog.records]

    out: list[tuple[QueryCombo, str, tuple[str, ...]]] = []
    for k in range(1, 5):
        subsets = [
            combo for combo in itertools.combinations(DIMENSIONS, k)
            if all(term_lists[d] for d in combo)
        ]
        sizes = [prod(len(term_lists[d]) for d in combo) for combo in subsets]
        total = sum(sizes)
        if total == 0:
            continue
        if total <= budget:
            chosen = range(total)
        else:
            chosen = sorted(_rng(seed, "combos", k).sample(range(total), budget))
        picker = _rng(seed, "choice", k)
        for flat_index in chosen:
            subset_idx = 0
            while flat_index >= sizes[subset_idx]:
                flat_index -= sizes[subset_idx]
                subset_idx += 1
            subset = subsets[subset_idx]
            terms = []
            remainder = flat_index
            for dimension in reversed(subset):
                options = term_lists[dimension]
                remainder, pick = divmod(remainder, len(options))
                terms.append((dimension, options[pick]))
            combo = QueryCombo(terms=tuple(reversed(terms)))

            matching: set[int] | None = None
            for dimension, term in combo.terms:
                canonical = vocab.canonical_of(dimension, term)
                hits = positions[dimension].get(canonical, set()) if canonical else set()
                matching = hits if matching is None else matching & hits
                if not matching:
                    break
            if not matching:
                continue
            all_matching = tuple(accessions[i] for i in sorted(matching))
            out.append((combo, picker.choice(all_matching), all_matching))
    return out


def render_nlq(combo: QueryCombo, template_id: int,
               rules: dict[str, tuple[str, str]] | None = None) -> str:
    """Template prefix followed by the connective phrase of each term, in the
    fixed dimension order Po, Ti, As, Ph."""
    if template_id not in TEMPLATES:
        raise ValueError(f"unknown template id {template_id}")
    rules = rules or DEFAULT_PREPOSITIONS
    terms = combo.term_map()
    phrases = []
    for dimension in RENDER_ORDER:
        if dimension in terms:
            prefix, suffix = rules[dimension]
            phrases.append(f"{prefix}{terms[dimension]}{suffix}")
    return " ".join([TEMPLATES[template_id], "cohorts", *phrases])


def generate_qad(vocab: AugmentedVocabulary, catalog: CohortCatalog, seed: int,
                 budget: int = DEFAULT_BUDGET,
                 rules: dict[str, tuple[str, str]] | None = None,
                 train_factor: int = DEFAULT_TRAIN_FACTOR,
                 ) -> tuple[list[QAPair], list[QAPair]]:
    """Split the vocabulary, sample combos on each side, and render: train
    combos through the five shared templates, test combos through all six.
    The train side is then subsampled to at most train_factor times the test
    size."""
    if not catalog.records:
        return [], []
    split = stratified_split(vocab, 0.8, seed)
    train_set: list[QAPair] = []
    for combo, accession, matching in enumerate_pairs(
            split.train_vals, vocab, catalog, _subseed(seed, "train"), budget):
        for template_id in TRAIN_TEMPLATES:
            train_set.append(QAPair(render_nlq(combo, template_id, rules),
                                    accession, matching, combo, template_id, "train"))
    test_set: list[QAPair] = []
    for combo, accession, matching in enumerate_pairs(
            split.test_vals, vocab, catalog, _subseed(seed, "test"), budget):
        for template_id in sorted(TEMPLATES):
            test_set.append(QAPair(render_nlq(combo, template_id, rules),
                                   accession, matching, combo, template_id, "test"))
    train_set = subsample_train(train_set, len(test_set), train_factor, seed)
    return train_set, test_set


def _subseed(seed: int, scope: str) -> str:
    return f"{seed}:{scope}"


def subsample_train(train_set: list[QAPair], test_size: int, factor: int,
                    seed: int) -> list[QAPair]:
    """Uniform subsample without replacement down to factor * test_size pairs
    (everything is kept when the set is already smaller). Original order is
    preserved."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    target = min(len(train_set), factor * test_size)
    if target == len(train_set):
        return list(train_set)
    picked = sorted(_rng(seed, "subsample").sample(range(len(train_set)), target))
    return [train_set[i] for i in picked]


def check_leakage(pairs: list[QAPair], forbidden: set[str]) -> list[str]:
    """Re-tokenize rendered queries against the opposite split's term set;
    returns the forbidden terms found (word-boundary match), empty when
    leak-free."""
    hits = []
    for term in sorted(forbidden):
        pattern = re.compile(r"(?<!\w)" + re.escape(term) + r"(?!\w)")
        if any(pattern.search(p.nlq) for p in pairs):
            hits.append(term)
    return hits


# --- QA dataset file -------------------------------------------------------

def write_qa_pairs(pairs: list[QAPair], sink) -> None:
    for pair in pairs:
        sink.write(json.dumps({
            "nlq": pair.nlq,
            "accession": pair.accession,
            "all_matching": list(pair.all_matching),
            "terms": pair.combo.term_map(),
            "n_terms": pair.n_terms,
            "template_id": pair.template_id,
            "split": pair.split,
        }, ensure_ascii=False) + "\n")


def load_qa_pairs(source) -> list[QAPair]:
    pairs = []
    for line in source:
        if not line.strip():
            continue
        obj = json.loads(line)
        combo = QueryCombo(terms=tuple(
            (d, obj["terms"][d]) for d in DIMENSIONS if d in obj["terms"]))
        pairs.append(QAPair(obj["nlq"], obj["accession"],
                            tuple(obj["all_matching"]), combo,
                            obj["template_id"], obj["split"]))
    return pairs
