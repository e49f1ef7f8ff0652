"""Command-line pipeline: one subcommand per step, plus an end-to-end demo.

    ingest   filter raw catalogue rows by disease term evidence
    augment  normalize metadata against ontologies, build the vocabulary
    qagen    split the vocabulary and emit train/test question-answer pairs
    train    fit the projection head contrastively
    index    embed, project and index the catalogue
    eval     score a test set against an index
    serve    HTTP API over a snapshot directory
    demo     generate a synthetic fixture and run every step deterministically

Every output file is written atomically (temp file + rename), so any
subcommand can be re-run in place."""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from . import augment as augment_mod
from . import catalog as catalog_mod
from . import demodata, evaluation, qagen
from . import embed as embed_mod
from .index import VectorIndex
from .snapshot import atomic_write_bytes, atomic_write_text, save_snapshot

DEMO_PROVIDER_DIM = 512
DEMO_LEARNING_RATE = 0.5
DEMO_BATCH = 32


class CliError(RuntimeError):
    pass


def _require(path: str) -> Path:
    resolved = Path(path)
    if not resolved.exists():
        raise CliError(f"missing input file: {path}")
    return resolved


def _read_catalog(path: str) -> catalog_mod.CohortCatalog:
    with _require(path).open(encoding="utf-8") as source:
        return catalog_mod.parse_catalog(source)


def _write_atomic(path: str, render) -> None:
    buf = io.StringIO()
    render(buf)
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(target, buf.getvalue())


def _load_qa(path: str) -> list[qagen.QAPair]:
    with _require(path).open(encoding="utf-8") as source:
        return qagen.load_qa_pairs(source)


def cmd_ingest(args) -> int:
    catalog = _read_catalog(args.catalog)
    with _require(args.terms).open(encoding="utf-8") as source:
        term_sets = catalog_mod.load_term_sets(source)
    kept = catalog_mod.filter_disease_multi(catalog, term_sets)
    _write_atomic(args.out, lambda sink: catalog_mod.write_catalog(
        kept.records, sink))
    print(f"ingest: kept {len(kept)} of {len(catalog)} cohorts -> {args.out}")
    return 0


def cmd_augment(args) -> int:
    catalog = _read_catalog(args.catalog)
    registry = augment_mod.load_ontology_dir(_require(args.ontologies))
    vocab, stats, normalized = augment_mod.augment_catalog(
        catalog, registry, threshold=args.threshold)
    _write_atomic(args.vocab, lambda sink: augment_mod.write_vocabulary(
        vocab, sink))
    _write_atomic(args.stats, lambda sink: (
        json.dump(stats.to_mapping(), sink, indent=2), sink.write("\n")))
    _write_atomic(args.normalized, lambda sink: catalog_mod.write_catalog(
        normalized.records, sink))
    if args.report:
        _write_atomic(args.report,
                      lambda sink: sink.write(
                          augment_mod.augmentation_report(stats)))
    total = sum(len(vocab.terms(d)) for d in catalog_mod.DIMENSIONS)
    print(f"augment: vocabulary of {total} terms -> {args.vocab}")
    return 0


def cmd_qagen(args) -> int:
    catalog = _read_catalog(args.catalog)
    with _require(args.vocab).open(encoding="utf-8") as source:
        vocab = augment_mod.load_vocabulary(source)
    train_set, test_set = qagen.generate_qad(
        vocab, catalog, seed=args.seed, budget=args.budget,
        train_factor=args.factor)
    _write_atomic(args.train_out, lambda sink: qagen.write_qa_pairs(
        train_set, sink))
    _write_atomic(args.test_out, lambda sink: qagen.write_qa_pairs(
        test_set, sink))
    print(f"qagen: {len(train_set)} train / {len(test_set)} test pairs")
    return 0


def _loss_config(args) -> embed_mod.LossConfig:
    return embed_mod.LossConfig(variant=args.loss, scale=args.scale,
                                margin=args.margin)


def _train_config(args) -> embed_mod.TrainConfig:
    return embed_mod.TrainConfig(
        epochs=args.epochs, warmup_fraction=args.warmup,
        batch_size=args.batch, learning_rate=args.lr, seed=args.seed)


def cmd_train(args) -> int:
    catalog = _read_catalog(args.catalog)
    train_set = _load_qa(args.train)
    validation = _load_qa(args.test) if args.test else None
    provider = embed_mod.HashedTokenProvider(args.dim)
    head = embed_mod.ProjectionHead.initialize(args.dim, seed=args.seed)
    loss_config = _loss_config(args)
    trained, curve = embed_mod.train(
        head, embed_mod.pairs_from_qa(train_set, catalog), provider,
        _train_config(args), loss_config,
        embed_mod.pairs_from_qa(validation, catalog) if validation else None)
    _write_atomic(args.model, lambda sink: embed_mod.save_model(
        trained, provider.provider_id, loss_config, sink))
    if args.curve:
        _write_atomic(args.curve, curve.write)
    if curve.rows:
        print(f"train: {curve.rows[-1][0]} steps, "
              f"loss {curve.rows[0][1]:.4f} -> {curve.rows[-1][1]:.4f}")
    return 0


def cmd_index(args) -> int:
    catalog = _read_catalog(args.catalog)
    with _require(args.model).open(encoding="utf-8") as source:
        head, meta = embed_mod.load_model(source)
    provider = embed_mod.provider_from_id(meta["provider_id"])
    built = evaluation.build_cohort_index(catalog, head, provider)
    buf = io.BytesIO()
    built.save(buf)
    target = Path(args.index)
    target.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_bytes(target, buf.getvalue())
    print(f"index: {len(built)} vectors of dimension {built.dim}")
    return 0


def cmd_eval(args) -> int:
    test_set = _load_qa(args.test)
    with _require(args.model).open(encoding="utf-8") as source:
        head, meta = embed_mod.load_model(source)
    provider = embed_mod.provider_from_id(meta["provider_id"])
    with _require(args.index).open("rb") as source:
        index = VectorIndex.load(source)
    report = evaluation.evaluate(head, provider, index, test_set)
    _write_atomic(args.report, lambda sink: evaluation.write_report(
        report, sink))
    if args.summary:
        _write_atomic(args.summary, lambda sink: evaluation.write_summary_tsv(
            report, sink))
    print(f"eval: r_precision {report.precision_mean:.4f} "
          f"mpr {report.mpr_mean:.4f} over {report.pairs} pairs")
    return 0


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import SNAPSHOT_ENV, create_app

    snapshot_dir = os.environ.get(SNAPSHOT_ENV) or args.snapshot
    if not snapshot_dir:
        raise CliError(
            f"no snapshot directory: pass --snapshot or set {SNAPSHOT_ENV}")
    app = create_app(snapshot_dir=snapshot_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def run_demo(out_dir: Path, seed: int = demodata.DEFAULT_SEED,
             dim: int = DEMO_PROVIDER_DIM, lr: float = DEMO_LEARNING_RATE,
             batch: int = DEMO_BATCH, epochs: int = 2, warmup: float = 0.10,
             loss_variant: str = "infonce", scale: float = 20.0,
             margin: float = 0.5, budget: int = qagen.DEFAULT_BUDGET,
             threshold: float = 80.0, quiet: bool = False) -> dict:
    """Full pipeline over the synthetic fixture; returns paths and metrics.
    Byte-identical outputs for the same arguments."""
    out_dir = Path(out_dir)
    say = (lambda *a: None) if quiet else print

    inputs = demodata.write_demo_inputs(out_dir / "inputs", seed)
    with inputs["catalog.jsonl"].open(encoding="utf-8") as source:
        raw_catalog = catalog_mod.parse_catalog(source)
    with inputs["disease_terms.json"].open(encoding="utf-8") as source:
        term_sets = catalog_mod.load_term_sets(source)
    filtered = catalog_mod.filter_disease_multi(raw_catalog, term_sets)
    say(f"demo: filtered {len(raw_catalog)} -> {len(filtered)} cohorts")

    registry = augment_mod.load_ontology_dir(inputs["ontologies"])
    vocab, stats, normalized = augment_mod.augment_catalog(
        filtered, registry, threshold=threshold)
    term_total = sum(len(vocab.terms(d)) for d in catalog_mod.DIMENSIONS)
    say(f"demo: vocabulary of {term_total} terms")

    train_set, test_set = qagen.generate_qad(vocab, normalized, seed=seed,
                                             budget=budget)
    work = out_dir / "work"
    work.mkdir(parents=True, exist_ok=True)
    atomic_write_text(work / "filtered.jsonl", _render(
        lambda sink: catalog_mod.write_catalog(filtered.records, sink)))
    atomic_write_text(work / "qa_train.jsonl", _render(
        lambda sink: qagen.write_qa_pairs(train_set, sink)))
    atomic_write_text(work / "qa_test.jsonl", _render(
        lambda sink: qagen.write_qa_pairs(test_set, sink)))
    atomic_write_text(work / "augmentation_report.tsv",
                      augment_mod.augmentation_report(stats))
    say(f"demo: {len(train_set)} train / {len(test_set)} test pairs")

    provider = embed_mod.HashedTokenProvider(dim)
    baseline_head = embed_mod.ProjectionHead.initialize(dim, seed=seed)
    loss_config = embed_mod.LossConfig(variant=loss_variant, scale=scale,
                                       margin=margin)
    train_config = embed_mod.TrainConfig(
        epochs=epochs, warmup_fraction=warmup, batch_size=batch,
        learning_rate=lr, seed=seed)
    trained_head, curve = embed_mod.train(
        baseline_head, embed_mod.pairs_from_qa(train_set, normalized),
        provider, train_config, loss_config,
        embed_mod.pairs_from_qa(test_set, normalized))
    atomic_write_text(work / "model.json", _render(
        lambda sink: embed_mod.save_model(trained_head, provider.provider_id,
                                          loss_config, sink)))
    atomic_write_text(work / "loss_curve.tsv", _render(curve.write))

    baseline_index = evaluation.build_cohort_index(normalized, baseline_head,
                                                   provider)
    trained_index = evaluation.build_cohort_index(normalized, trained_head,
                                                  provider)
    baseline_report = evaluation.evaluate(baseline_head, provider,
                                          baseline_index, test_set)
    trained_report = evaluation.evaluate(trained_head, provider,
                                         trained_index, test_set)
    atomic_write_text(work / "baseline_report.json", _render(
        lambda sink: evaluation.write_report(baseline_report, sink)))
    atomic_write_text(work / "report.json", _render(
        lambda sink: evaluation.write_report(trained_report, sink)))
    atomic_write_text(work / "summary.tsv", _render(
        lambda sink: evaluation.write_summary_tsv(trained_report, sink)))

    snapshot_dir = out_dir / "snapshot"
    save_snapshot(snapshot_dir, filtered, normalized, vocab, stats,
                  trained_head, provider, loss_config, trained_index)

    initial_loss = curve.rows[0][1] if curve.rows else float("nan")
    final_loss = curve.rows[-1][1] if curve.rows else float("nan")
    say(f"demo: baseline r_precision {baseline_report.precision_mean:.4f} "
        f"mpr {baseline_report.mpr_mean:.4f}")
    say(f"demo: trained  r_precision {trained_report.precision_mean:.4f} "
        f"mpr {trained_report.mpr_mean:.4f}")
    say(f"demo: loss {initial_loss:.4f} -> {final_loss:.4f}")
    say(f"demo: snapshot at {snapshot_dir}")
    return {
        "snapshot_dir": snapshot_dir,
        "work_dir": work,
        "inputs_dir": out_dir / "inputs",
        "raw_cohorts": len(raw_catalog),
        "cohorts": len(filtered),
        "vocabulary_terms": term_total,
        "train_pairs": len(train_set),
        "test_pairs": len(test_set),
        "baseline": baseline_report,
        "trained": trained_report,
        "initial_loss": initial_loss,
        "final_loss": final_loss,
    }


def _render(render) -> str:
    buf = io.StringIO()
    render(buf)
    return buf.getvalue()


def cmd_demo(args) -> int:
    run_demo(Path(args.out), seed=args.seed, dim=args.dim, lr=args.lr,
             batch=args.batch, epochs=args.epochs, warmup=args.warmup,
             loss_variant=args.loss, scale=args.scale, margin=args.margin,
             budget=args.budget, threshold=args.threshold)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neuroembed",
        description="ontology-augmented semantic cohort search pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="filter cohorts by disease evidence")
    p.add_argument("--catalog", required=True)
    p.add_argument("--terms", required=True,
                   help="JSON mapping of disease -> search terms")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("augment", help="normalize metadata against ontologies")
    p.add_argument("--catalog", required=True)
    p.add_argument("--ontologies", required=True,
                   help="directory with efo.owl/uberon.owl/ncbi_taxon.owl/"
                        "mesh.xml/umls.tsv")
    p.add_argument("--threshold", type=float, default=80.0)
    p.add_argument("--vocab", required=True)
    p.add_argument("--stats", required=True)
    p.add_argument("--normalized", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("qagen", help="emit train/test question-answer pairs")
    p.add_argument("--catalog", required=True, help="normalized catalogue")
    p.add_argument("--vocab", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=qagen.DEFAULT_BUDGET)
    p.add_argument("--factor", type=int, default=qagen.DEFAULT_TRAIN_FACTOR)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.set_defaults(func=cmd_qagen)

    p = sub.add_parser("train", help="fit the projection head")
    p.add_argument("--catalog", required=True, help="normalized catalogue")
    p.add_argument("--train", required=True)
    p.add_argument("--test", help="validation pairs (optional)")
    p.add_argument("--dim", type=int, default=embed_mod.DEFAULT_DIMENSION)
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--warmup", type=float, default=0.10)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--loss", choices=("infonce", "hinge"), default="infonce")
    p.add_argument("--scale", type=float, default=20.0)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", required=True)
    p.add_argument("--curve")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("index", help="build the cohort vector index")
    p.add_argument("--catalog", required=True, help="normalized catalogue")
    p.add_argument("--model", required=True)
    p.add_argument("--index", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("eval", help="score a test set against an index")
    p.add_argument("--test", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--summary")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="HTTP API over a snapshot directory")
    p.add_argument("--snapshot")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("demo", help="run the whole pipeline on a fixture")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=demodata.DEFAULT_SEED)
    p.add_argument("--dim", type=int, default=DEMO_PROVIDER_DIM)
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--warmup", type=float, default=0.10)
    p.add_argument("--batch", type=int, default=DEMO_BATCH)
    p.add_argument("--lr", type=float, default=DEMO_LEARNING_RATE)
    p.add_argument("--loss", choices=("infonce", "hinge"), default="infonce")
    p.add_argument("--scale", type=float, default=20.0)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--budget", type=int, default=qagen.DEFAULT_BUDGET)
    p.add_argument("--threshold", type=float, default=80.0)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
