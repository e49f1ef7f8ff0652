"""Ontology-augmented semantic search over omics cohort metadata.

Pipeline: filter a cohort catalogue by disease evidence, normalize its
metadata against ontology synonym tables, generate natural-language
question/answer pairs from the augmented vocabulary, contrastively train a
projection head over a frozen base embedder, index the catalogue, and serve
ranked semantic search over HTTP."""

__version__ = "0.1.0"
