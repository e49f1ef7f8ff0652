"""Base-embedding provider, trainable projection head, contrastive losses.

The trainable unit is a linear projection head applied on top of frozen base
embeddings (the provider). The built-in provider hashes normalized tokens
into buckets and L2-normalizes the count vector, which keeps the whole
training loop deterministic and dependency-free; any encoder honoring the
same contract (same text -> identical unit vector) can be plugged in.

Losses: InfoNCE over in-batch negatives (default) and a margin hinge variant.
Both are computed on cosine similarity, so positive rescaling of any input
vector never changes a loss value.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

import numpy as np

from .catalog import CohortCatalog, CohortRecord

DEFAULT_DIMENSION = 768
NORM_TOLERANCE = 1e-6

_TOKEN = re.compile(r"[a-z0-9]+")


class EmptyTextError(ValueError):
    pass


class ShapeMismatchError(ValueError):
    pass


class TrainingDivergedError(RuntimeError):
    def __init__(self, step: int):
        super().__init__(f"non-finite loss at step {step}")
        self.step = step


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / norm


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize a zero row")
    return m / norms


class HashedTokenProvider:
    """Deterministic bag-of-tokens embedder: each lowercase alphanumeric token
    is hashed (blake2b, stable across processes) into one of `dimension`
    buckets; bucket counts are L2-normalized."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension
        self.provider_id = f"hashed-{dimension}"

    def bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dimension

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise EmptyTextError("cannot embed empty text")
        tokens = _TOKEN.findall(text.lower())
        if not tokens:
            raise EmptyTextError("text contains no embeddable tokens")
        v = np.zeros(self.dimension, dtype=np.float64)
        for token in tokens:
            v[self.bucket(token)] += 1.0
        return _unit(v)


def provider_from_id(provider_id: str) -> HashedTokenProvider:
    m = re.fullmatch(r"hashed-(\d+)", provider_id)
    if not m:
        raise ValueError(f"unknown provider id {provider_id!r}")
    return HashedTokenProvider(dimension=int(m.group(1)))


@dataclass
class ProjectionHead:
    """Linear map over frozen base embeddings; output is re-normalized."""

    weights: np.ndarray  # (d_in, d_out)
    bias: np.ndarray | None = None  # (d_out,)

    @classmethod
    def initialize(cls, d_in: int, d_out: int | None = None, noise: float = 1e-3,
                   seed: int = 0, with_bias: bool = False) -> "ProjectionHead":
        """Identity plus small Gaussian noise, so the untrained head starts at
        the baseline embedder."""
        d_out = d_in if d_out is None else d_out
        rng = np.random.default_rng(seed)
        w = np.eye(d_in, d_out) + rng.normal(0.0, noise, size=(d_in, d_out))
        b = np.zeros(d_out) if with_bias else None
        return cls(weights=w, bias=b)

    @property
    def d_in(self) -> int:
        return self.weights.shape[0]

    @property
    def d_out(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "ProjectionHead":
        return ProjectionHead(self.weights.copy(),
                              None if self.bias is None else self.bias.copy())

    def project(self, v: np.ndarray) -> np.ndarray:
        if v.shape != (self.d_in,):
            raise ShapeMismatchError(
                f"expected vector of dimension {self.d_in}, got {v.shape}")
        z = self.weights.T @ v
        if self.bias is not None:
            z = z + self.bias
        return _unit(z)

    def project_rows(self, m: np.ndarray) -> np.ndarray:
        if m.shape[1] != self.d_in:
            raise ShapeMismatchError(
                f"expected rows of dimension {self.d_in}, got {m.shape[1]}")
        z = m @ self.weights
        if self.bias is not None:
            z = z + self.bias
        return _unit_rows(z)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    if u.shape != v.shape:
        raise ShapeMismatchError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for a zero vector")
    return float(u @ v / (nu * nv))


@dataclass
class TrainingBatch:
    """Aligned anchor/positive pairs; for each anchor the other P-1 positives
    act as implicit negatives."""

    anchors: np.ndarray  # (P, d)
    positives: np.ndarray  # (P, d)

    def __post_init__(self):
        if self.anchors.ndim != 2 or self.anchors.shape != self.positives.shape:
            raise ShapeMismatchError("anchors and positives must share shape (P, d)")
        if self.anchors.shape[0] < 2:
            raise ValueError("batch needs at least 2 pairs for in-batch negatives")

    @property
    def size(self) -> int:
        return self.anchors.shape[0]


@dataclass
class LossConfig:
    variant: str = "infonce"  # "infonce" | "hinge"
    scale: float = 20.0
    margin: float = 0.5

    def __post_init__(self):
        if self.variant not in ("infonce", "hinge"):
            raise ValueError(f"unknown loss variant {self.variant!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


@dataclass
class TrainConfig:
    epochs: int = 2
    warmup_fraction: float = 0.10
    eval_fraction: float = 0.05
    batch_size: int = 32
    learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.warmup_fraction < 1:
            raise ValueError("warmup_fraction must be in [0, 1)")


def _cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _unit_rows(a) @ _unit_rows(b).T


def _infonce_from_similarities(s_matrix: np.ndarray, scale: float) -> float:
    logits = scale * s_matrix
    row_max = logits.max(axis=1, keepdims=True)
    lse = row_max[:, 0] + np.log(np.exp(logits - row_max).sum(axis=1))
    return float(np.mean(lse - np.diag(logits)))


def _hinge_from_similarities(s_matrix: np.ndarray, margin: float) -> float:
    diag = np.diag(s_matrix)
    terms = np.maximum(0.0, s_matrix - diag[:, None] + margin)
    np.fill_diagonal(terms, 0.0)
    return float(terms.sum())


def infonce_loss(batch: TrainingBatch, config: LossConfig) -> float:
    """Mean over anchors of -log softmax of the scaled true-pair similarity
    against all P in-batch positives."""
    return _infonce_from_similarities(
        _cosine_matrix(batch.anchors, batch.positives), config.scale)


def hinge_loss(batch: TrainingBatch, config: LossConfig) -> float:
    """Sum over anchors and in-batch negatives of
    max(0, f(q, n_j) - f(q, p_i) + margin)."""
    return _hinge_from_similarities(
        _cosine_matrix(batch.anchors, batch.positives), config.margin)


def batch_loss(batch: TrainingBatch, config: LossConfig) -> float:
    if config.variant == "infonce":
        return infonce_loss(batch, config)
    return hinge_loss(batch, config)


def projected_loss(head: ProjectionHead, batch: TrainingBatch,
                   config: LossConfig) -> float:
    """Loss of the batch after projecting both sides through the head."""
    return batch_loss(TrainingBatch(head.project_rows(batch.anchors),
                                    head.project_rows(batch.positives)), config)


def _loss_grad_wrt_similarities(s_matrix: np.ndarray,
                                config: LossConfig) -> tuple[float, np.ndarray]:
    p = s_matrix.shape[0]
    if config.variant == "infonce":
        logits = config.scale * s_matrix
        shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
        softmax = shifted / shifted.sum(axis=1, keepdims=True)
        loss = _infonce_from_similarities(s_matrix, config.scale)
        grad = (config.scale / p) * (softmax - np.eye(p))
        return loss, grad
    diag = np.diag(s_matrix)
    active = (s_matrix - diag[:, None] + config.margin) > 0.0
    np.fill_diagonal(active, False)
    loss = _hinge_from_similarities(s_matrix, config.margin)
    grad = active.astype(np.float64)
    np.fill_diagonal(grad, -active.sum(axis=1))
    return loss, grad


def _backprop_through_norm(grad_unit: np.ndarray, z: np.ndarray,
                           unit: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    return (grad_unit - (grad_unit * unit).sum(axis=1, keepdims=True) * unit) / norms


def loss_gradient(head: ProjectionHead, batch: TrainingBatch, config: LossConfig,
                  ) -> tuple[float, np.ndarray, np.ndarray | None]:
    """Analytic gradient of the selected loss through projection-and-normalize,
    with respect to the head's weights (and bias when present). Returns
    (loss, grad_weights, grad_bias)."""
    zq = batch.anchors @ head.weights
    zp = batch.positives @ head.weights
    if head.bias is not None:
        zq = zq + head.bias
        zp = zp + head.bias
    q = _unit_rows(zq)
    p_hat = _unit_rows(zp)
    loss, grad_s = _loss_grad_wrt_similarities(q @ p_hat.T, config)

    grad_q = grad_s @ p_hat
    grad_p = grad_s.T @ q
    grad_zq = _backprop_through_norm(grad_q, zq, q)
    grad_zp = _backprop_through_norm(grad_p, zp, p_hat)

    grad_w = batch.anchors.T @ grad_zq + batch.positives.T @ grad_zp
    grad_b = None
    if head.bias is not None:
        grad_b = grad_zq.sum(axis=0) + grad_zp.sum(axis=0)
    return loss, grad_w, grad_b


@dataclass
class LossCurve:
    rows: list[tuple[int, float, float]] = field(default_factory=list)

    def write(self, sink) -> None:
        sink.write("step\ttrain_loss\tval_loss\n")
        for step, train_loss, val_loss in self.rows:
            sink.write(f"{step}\t{train_loss:.17g}\t{val_loss:.17g}\n")


def _mean_loss(anchors: np.ndarray, positives: np.ndarray, batch_size: int,
               config: LossConfig) -> float:
    losses = []
    for start in range(0, anchors.shape[0], batch_size):
        a = anchors[start:start + batch_size]
        p = positives[start:start + batch_size]
        if a.shape[0] < 2:
            continue
        losses.append(batch_loss(TrainingBatch(a, p), config))
    return float(np.mean(losses)) if losses else float("nan")


def train(head: ProjectionHead, pairs: list[tuple[str, str]],
          provider: HashedTokenProvider, train_config: TrainConfig,
          loss_config: LossConfig,
          validation_set: list[tuple[str, str]] | None = None,
          ) -> tuple[ProjectionHead, LossCurve]:
    """Mini-batch gradient descent with linear warm-up over the first
    warmup_fraction of total iterations, then a constant rate. `pairs` holds
    (anchor text, positive text); the validation loss is recorded every
    eval_fraction of an epoch. Deterministic for a fixed seed."""
    import random as _random

    head = head.copy()
    curve = LossCurve()
    if train_config.epochs <= 0 or not pairs:
        return head, curve

    cache: dict[str, np.ndarray] = {}

    def embed_texts(texts: list[str]) -> np.ndarray:
        rows = []
        for text in texts:
            if text not in cache:
                cache[text] = provider.embed(text)
            rows.append(cache[text])
        return np.stack(rows)

    anchors = embed_texts([a for a, _ in pairs])
    positives = embed_texts([p for _, p in pairs])
    val_a = val_p = None
    if validation_set:
        val_a = embed_texts([a for a, _ in validation_set])
        val_p = embed_texts([p for _, p in validation_set])

    n = len(pairs)
    bs = train_config.batch_size
    batches_per_epoch = sum(
        1 for start in range(0, n, bs) if min(n, start + bs) - start >= 2)
    if batches_per_epoch == 0:
        return head, curve
    total_iters = train_config.epochs * batches_per_epoch
    warmup_iters = int(round(train_config.warmup_fraction * total_iters))
    eval_every = max(1, int(round(train_config.eval_fraction * batches_per_epoch)))

    rng = _random.Random(train_config.seed)
    step = 0
    for _ in range(train_config.epochs):
        order = list(range(n))
        rng.shuffle(order)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            if len(idx) < 2:
                continue
            batch = TrainingBatch(anchors[idx], positives[idx])
            loss, grad_w, grad_b = loss_gradient(head, batch, loss_config)
            step += 1
            if not np.isfinite(loss):
                raise TrainingDivergedError(step)
            lr = train_config.learning_rate
            if warmup_iters > 0 and step <= warmup_iters:
                lr = train_config.learning_rate * step / warmup_iters
            head.weights -= lr * grad_w
            if grad_b is not None:
                head.bias -= lr * grad_b
            if step % eval_every == 0 or step == total_iters:
                val_loss = float("nan")
                if val_a is not None:
                    val_loss = _mean_loss(val_a, val_p, bs, loss_config)
                curve.rows.append((step, loss, val_loss))
    return head, curve


# --- positive-side text ----------------------------------------------------

def serialize_record(record: CohortRecord) -> str:
    """Fixed answer-side serialization of a (normalized) cohort record."""
    return (f"{record.title}. "
            f"Po: {', '.join(record.po)}; "
            f"As: {', '.join(record.as_)}; "
            f"Ph: {', '.join(record.ph)}; "
            f"Ti: {', '.join(record.ti)}")


def pairs_from_qa(qa_pairs, catalog: CohortCatalog) -> list[tuple[str, str]]:
    """(NLQ text, serialized answer-cohort text) pairs for the trainer."""
    by_accession = catalog.by_accession
    return [(p.nlq, serialize_record(by_accession[p.accession])) for p in qa_pairs]


# --- model file ------------------------------------------------------------

def _format_number(value) -> str:
    if isinstance(value, bool):
        raise TypeError("unexpected bool")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _dump_json(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (int, float, np.integer, np.floating)):
        return _format_number(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_dump_json(v) for v in value) + "]"
    if isinstance(value, dict):
        return ("{" + ", ".join(
            f"{json.dumps(k)}: {_dump_json(v)}" for k, v in value.items()) + "}")
    raise TypeError(f"cannot serialize {type(value)}")


def save_model(head: ProjectionHead, provider_id: str, loss_config: LossConfig,
               sink) -> None:
    """Model file: a JSON mapping with numbers written as decimal text at 17
    significant digits, so reload is bit-exact."""
    obj = {
        "provider_id": provider_id,
        "d_in": head.d_in,
        "d_out": head.d_out,
        "scale": loss_config.scale,
        "variant": loss_config.variant,
        "weights": head.weights.reshape(-1),
        "bias": None if head.bias is None else head.bias,
    }
    sink.write(_dump_json(obj))
    sink.write("\n")


def load_model(source) -> tuple[ProjectionHead, dict]:
    obj = json.load(source)
    d_in, d_out = int(obj["d_in"]), int(obj["d_out"])
    weights = np.array(obj["weights"], dtype=np.float64).reshape(d_in, d_out)
    bias = None if obj.get("bias") is None else np.array(obj["bias"], dtype=np.float64)
    meta = {
        "provider_id": obj["provider_id"],
        "scale": float(obj["scale"]),
        "variant": obj["variant"],
    }
    return ProjectionHead(weights=weights, bias=bias), meta
