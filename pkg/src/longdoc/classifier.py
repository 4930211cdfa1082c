"""Linear softmax head over embeddings, trained with Adam, linear warmup
and global gradient-norm clipping."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import LabelVocab
from .metrics import confusion, report
from .segmenter import Sentence

CHECKPOINT_FORMAT = "linear-head/1"


class ClassifierError(ValueError):
    """Raised for shape mismatches, missing classes, or bad checkpoints."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 5e-5
    adam_epsilon: float = 1e-8
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    warmup_ratio: float = 0.1
    max_grad_norm: float = 1.0
    train_batch: int = 64
    valid_batch: int = 128
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.learning_rate <= 0 or self.train_batch < 1:
            raise ClassifierError("epochs, learning_rate and train_batch must be positive")
        if not 0.0 <= self.warmup_ratio < 1.0:
            raise ClassifierError("warmup_ratio must be in [0, 1)")
        if self.max_grad_norm <= 0 or self.adam_epsilon <= 0:
            raise ClassifierError("max_grad_norm and adam_epsilon must be positive")


@dataclass
class LinearHead:
    weights: np.ndarray  # (K, D)
    bias: np.ndarray  # (K,)
    vocab: LabelVocab

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        k, d = self.weights.shape
        if self.bias.shape != (k,) or k != self.vocab.size:
            raise ClassifierError("head shapes inconsistent with vocabulary")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ClassifierError("head parameters must be finite")

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax (max subtraction)."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(head: LinearHead, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (head.dim,):
        raise ClassifierError(f"input dim {x.shape} != head dim ({head.dim},)")
    return softmax(head.weights @ x + head.bias)


def loss_and_grad(
    head: LinearHead, xs: np.ndarray, ys: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy and its analytic gradients (grad_W, grad_b)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise ClassifierError("batch must be a non-empty (n, D) array")
    if ys.max(initial=-1) >= head.n_classes or ys.min(initial=0) < 0:
        raise ClassifierError("class index out of range")
    n = xs.shape[0]
    probs = softmax(xs @ head.weights.T + head.bias)
    loss = float(-np.log(probs[np.arange(n), ys]).mean())
    delta = probs
    delta[np.arange(n), ys] -= 1.0
    delta /= n
    return loss, delta.T @ xs, delta.sum(axis=0)


def lr_at(step: int, total_steps: int, warmup_ratio: float, peak: float) -> float:
    """Piecewise-linear schedule: 0 -> peak over the warmup steps, then linearly to 0."""
    warmup = math.ceil(warmup_ratio * total_steps)
    if warmup > 0 and step <= warmup:
        return peak * step / warmup
    if total_steps == warmup:
        return peak
    return peak * (total_steps - step) / (total_steps - warmup)


def clip_gradients(grads: Sequence[np.ndarray], max_norm: float) -> list[np.ndarray]:
    """Scale all gradients by max_norm/global_norm when the global L2 norm exceeds it."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if total <= max_norm:
        return list(grads)
    scale = max_norm / total
    return [g * scale for g in grads]


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    valid_macro_f1: float


def train(
    train_x: np.ndarray,
    train_y: np.ndarray,
    valid_x: np.ndarray,
    valid_y: np.ndarray,
    vocab: LabelVocab,
    config: TrainConfig,
) -> tuple[LinearHead, list[EpochMetrics]]:
    """Adam training loop; returns the parameters from the best-validation epoch.

    Shuffling and initialization are seed-deterministic; every class must
    appear in the training labels.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.int64)
    present = set(int(y) for y in train_y)
    for idx, name in enumerate(vocab.names):
        if idx not in present:
            raise ClassifierError(f"class {name!r} has no training examples")

    k, d = vocab.size, train_x.shape[1]
    rng = np.random.default_rng(config.seed)
    w = rng.normal(0.0, 0.01, size=(k, d))
    b = np.zeros(k)
    m = [np.zeros_like(w), np.zeros_like(b)]
    v = [np.zeros_like(w), np.zeros_like(b)]

    n = train_x.shape[0]
    steps_per_epoch = math.ceil(n / config.train_batch)
    total_steps = config.epochs * steps_per_epoch
    step = 0
    history: list[EpochMetrics] = []
    best_f1 = -1.0
    best_params = (w.copy(), b.copy())

    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        losses = []
        head = LinearHead(w, b, vocab)
        for start in range(0, n, config.train_batch):
            batch = perm[start : start + config.train_batch]
            loss, gw, gb = loss_and_grad(head, train_x[batch], train_y[batch])
            losses.append(loss)
            gw, gb = clip_gradients([gw, gb], config.max_grad_norm)
            step += 1
            lr = lr_at(step, total_steps, config.warmup_ratio, config.learning_rate)
            for i, (param, grad) in enumerate(((w, gw), (b, gb))):
                m[i] = config.adam_beta1 * m[i] + (1 - config.adam_beta1) * grad
                v[i] = config.adam_beta2 * v[i] + (1 - config.adam_beta2) * grad * grad
                m_hat = m[i] / (1 - config.adam_beta1**step)
                v_hat = v[i] / (1 - config.adam_beta2**step)
                param -= lr * m_hat / (np.sqrt(v_hat) + config.adam_epsilon)

        valid_f1 = _macro_f1(LinearHead(w, b, vocab), valid_x, valid_y, vocab, config.valid_batch)
        history.append(EpochMetrics(epoch=epoch, train_loss=float(np.mean(losses)), valid_macro_f1=valid_f1))
        if valid_f1 > best_f1:
            best_f1 = valid_f1
            best_params = (w.copy(), b.copy())

    return LinearHead(best_params[0], best_params[1], vocab), history


def _macro_f1(
    head: LinearHead, xs: np.ndarray, ys: np.ndarray, vocab: LabelVocab, batch: int
) -> float:
    if len(xs) == 0:
        return 0.0
    preds: list[str] = []
    for start in range(0, len(xs), batch):
        probs = softmax(np.asarray(xs[start : start + batch]) @ head.weights.T + head.bias)
        preds.extend(vocab.names[i] for i in probs.argmax(axis=1))
    gold = [vocab.names[int(y)] for y in ys]
    return report(confusion(gold, preds, vocab)).macro_f1


def predict_sentences(head: LinearHead, sentences: Sequence[Sentence], provider) -> list[tuple[str, int, np.ndarray]]:
    """One class distribution per sentence, order preserved, keyed by (doc_id, index)."""
    if not sentences:
        return []
    if provider.info.dim != head.dim:
        raise ClassifierError(f"provider dim {provider.info.dim} != head dim {head.dim}")
    vectors = provider.embed_batch([s.text for s in sentences])
    out = []
    for sent, vec in zip(sentences, vectors):
        out.append((sent.doc_id, sent.index, forward(head, vec)))
    return out


def save_checkpoint(
    head: LinearHead, config: TrainConfig, provider_name: str, path: str | Path
) -> None:
    payload = {
        "format": CHECKPOINT_FORMAT,
        "vocab": list(head.vocab.names),
        "dim": head.dim,
        "k": head.n_classes,
        "config": asdict(config),
        "provider": provider_name,
        # hex floats round-trip exactly and keep checkpoints byte-reproducible
        "params": [float(x).hex() for x in np.concatenate([head.weights.ravel(), head.bias])],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[LinearHead, TrainConfig, str]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if raw.get("format") != CHECKPOINT_FORMAT:
        raise ClassifierError(f"unsupported checkpoint format {raw.get('format')!r}")
    k, d = int(raw["k"]), int(raw["dim"])
    flat = np.array([float.fromhex(x) for x in raw["params"]], dtype=np.float64)
    if flat.shape[0] != k * d + k:
        raise ClassifierError("checkpoint parameter count inconsistent with shapes")
    head = LinearHead(flat[: k * d].reshape(k, d), flat[k * d :], LabelVocab(tuple(raw["vocab"])))
    return head, TrainConfig(**raw["config"]), str(raw["provider"])
