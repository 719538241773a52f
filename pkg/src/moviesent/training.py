"""Loss, backpropagation, Adam, the epoch loop, and a finite-difference gradient checker.

Training runs in float32; the gradient checker rebuilds the same code paths
in float64, where central differences at step 1e-5 can actually resolve a
1e-4 relative tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bilstm import HeadConfig
from .encoder import EncoderConfig, ParameterStore, set_freeze
from .encoding import EncodedExample
from .errors import ConfigError, DataError, DivergenceError
from .model import ModelConfig, SentimentModel


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    epochs: int = 10
    batch_size: int = 8
    seed: int = 0
    num_frozen_layers: int | None = None  # None keeps the model's current freeze flags

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ConfigError("adam betas must lie in [0, 1)")
        if self.adam_epsilon <= 0:
            raise ConfigError("adam_epsilon must be positive")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")


def cross_entropy_loss(logits: np.ndarray, label: int):
    """Negative log-softmax probability of the gold class for one example.

    Returns (loss, gradient with respect to the logits).
    """
    logits = np.asarray(logits)
    if not 0 <= label < logits.shape[-1]:
        raise DataError(f"label {label} out of range for {logits.shape[-1]} classes")
    shifted = logits - logits.max()
    log_z = np.log(np.exp(shifted).sum())
    probs = np.exp(shifted - log_z)
    loss = log_z - shifted[label]
    grad = probs.copy()
    grad[label] -= 1.0
    return float(loss), grad


def batch_cross_entropy(logits: np.ndarray, labels):
    """Mean loss over the batch; gradient already divided by the batch size."""
    total = 0.0
    dlogits = np.empty_like(logits)
    for b, label in enumerate(labels):
        loss, grad = cross_entropy_loss(logits[b], int(label))
        total += loss
        dlogits[b] = grad
    n = len(labels)
    return total / n, dlogits / n


def backward(model: SentimentModel, examples: list[EncodedExample]):
    """Forward, loss, and reverse pass over one batch.

    Returns (mean loss, logits, gradients for every trainable parameter).
    Raises DivergenceError on non-finite activations, loss, or gradients.
    """
    labels = [e.label for e in examples]
    if any(label is None for label in labels):
        raise DataError("all training examples must carry a label")
    logits, cache = model.forward_batch(examples)
    loss, dlogits = batch_cross_entropy(logits, labels)
    if not np.isfinite(loss):
        raise DivergenceError(f"non-finite loss {loss!r}")
    all_grads = model.backward_batch(cache, dlogits)
    grads = {name: all_grads[name] for name in model.params.trainable_names()}
    for name, grad in grads.items():
        if not np.isfinite(grad).all():
            raise DivergenceError(f"non-finite gradient for {name!r}")
    return loss, logits, grads


class OptimizerState:
    """Adam moment estimates, kept only for trainable arrays."""

    def __init__(self, m: dict[str, np.ndarray], v: dict[str, np.ndarray], t: int = 0):
        self.m = m
        self.v = v
        self.t = t

    @classmethod
    def for_params(cls, params: ParameterStore) -> "OptimizerState":
        names = params.trainable_names()
        return cls(
            m={n: np.zeros_like(params[n]) for n in names},
            v={n: np.zeros_like(params[n]) for n in names},
        )


def adam_step(
    params: ParameterStore,
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    config: TrainConfig,
) -> None:
    """One Adam update with bias correction; frozen arrays are never touched."""
    state.t += 1
    beta1, beta2 = config.adam_beta1, config.adam_beta2
    bias1 = 1.0 - beta1**state.t
    bias2 = 1.0 - beta2**state.t
    for name in state.m:
        grad = grads[name]
        if grad.shape != params[name].shape:
            raise ConfigError(
                f"gradient shape {grad.shape} does not match parameter"
                f" {name!r} shape {params[name].shape}"
            )
        state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * grad
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * grad * grad
        m_hat = state.m[name] / bias1
        v_hat = state.v[name] / bias2
        params[name] = params[name] - config.learning_rate * m_hat / (
            np.sqrt(v_hat) + config.adam_epsilon
        )


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    train_accuracy: float
    test_accuracy: float | None = None

    def line(self) -> str:
        test = "-" if self.test_accuracy is None else f"{self.test_accuracy:.2f}"
        return f"{self.epoch}\t{self.train_loss:.6f}\t{self.train_accuracy:.2f}\t{test}"


@dataclass
class TrainResult:
    metrics: list[EpochMetrics]
    diverged: bool = False
    message: str = ""


def train(
    train_set: list[EncodedExample],
    model: SentimentModel,
    config: TrainConfig,
    test_set: list[EncodedExample] | None = None,
    metrics_path=None,
    log=print,
) -> TrainResult:
    """Epochs of shuffled mini-batches: forward, backward, Adam.

    Deterministic under config.seed. On divergence the parameters are left at
    their last finite state and the result is flagged instead of raising.
    """
    from .evaluate import accuracy, predict  # local import to avoid a cycle

    if not train_set:
        raise DataError("training set is empty")
    if config.num_frozen_layers is not None:
        set_freeze(model.params, config.num_frozen_layers)
    state = OptimizerState.for_params(model.params)
    rng = np.random.default_rng(config.seed)
    metrics: list[EpochMetrics] = []
    result = TrainResult(metrics=metrics)

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_set))
        loss_sum = 0.0
        correct = 0
        for start in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[start : start + config.batch_size]]
            try:
                loss, logits, grads = backward(model, batch)
            except DivergenceError as exc:
                # params have not been updated by the failed step: still good
                result.diverged = True
                result.message = str(exc)
                _write_metrics(metrics, metrics_path)
                return result
            adam_step(model.params, grads, state, config)
            loss_sum += loss * len(batch)
            labels = np.array([e.label for e in batch])
            correct += int((logits.argmax(axis=1) == labels).sum())
        test_accuracy = None
        if test_set:
            gold = [e.label for e in test_set]
            test_accuracy = accuracy(predict(test_set, model), gold)
        metrics.append(
            EpochMetrics(
                epoch=epoch,
                train_loss=loss_sum / len(train_set),
                train_accuracy=100.0 * correct / len(train_set),
                test_accuracy=test_accuracy,
            )
        )
        if log is not None:
            log(metrics[-1].line())
    _write_metrics(metrics, metrics_path)
    return result


def _write_metrics(metrics: list[EpochMetrics], metrics_path) -> None:
    if metrics_path is not None:
        with open(metrics_path, "w", encoding="utf-8") as handle:
            for m in metrics:
                handle.write(m.line() + "\n")


# --- finite-difference verification ----------------------------------------


@dataclass
class GradientCheckReport:
    tolerance: float
    step: float
    per_array: dict[str, float] = field(default_factory=dict)
    num_scalars: int = 0

    @property
    def max_relative_error(self) -> float:
        return max(self.per_array.values(), default=0.0)

    @property
    def failures(self) -> list[str]:
        return [n for n, e in sorted(self.per_array.items()) if e > self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"gradient check: {status}"
            f" (max relative error {self.max_relative_error:.3e},"
            f" tolerance {self.tolerance:.1e}, {self.num_scalars} scalars)"
        ]
        for name in self.failures:
            lines.append(f"  mismatch in {name}: {self.per_array[name]:.3e}")
        return "\n".join(lines)


def check_config(vocab_size: int = 16, max_len: int = 5) -> ModelConfig:
    """Single layer, hidden 8, two heads, LSTM 8: small enough to brute-force."""
    return ModelConfig(
        encoder=EncoderConfig(
            num_layers=1,
            hidden_size=8,
            num_heads=2,
            ffn_size=16,
            max_position=max_len,
            vocab_size=vocab_size,
            num_frozen_layers=0,
        ),
        head=HeadConfig(lstm_hidden_size=8, num_classes=2),
    )


def _synthetic_examples(config: ModelConfig, rng: np.random.Generator, count: int):
    max_len = config.encoder.max_position
    examples = []
    for _ in range(count):
        n_real = int(rng.integers(2, max_len + 1))
        ids = rng.integers(0, config.encoder.vocab_size, size=max_len)
        mask = np.zeros(max_len, dtype=np.int64)
        mask[:n_real] = 1
        examples.append(
            EncodedExample(
                input_ids=ids.astype(np.int64),
                attention_mask=mask,
                segment_ids=np.zeros(max_len, dtype=np.int64),
                label=int(rng.integers(0, 2)),
            )
        )
    return examples


def gradient_check(
    model: SentimentModel | None = None,
    examples: list[EncodedExample] | None = None,
    tolerance: float = 1e-4,
    step: float = 1e-5,
    seed: int = 0,
    num_examples: int = 2,
    grad_transform=None,
) -> GradientCheckReport:
    """Compare analytic gradients to central finite differences, scalar by scalar.

    Runs on a float64 copy of the model (a fresh tiny model when none is
    given). The relative error uses a small absolute floor so that genuinely
    zero gradients compare cleanly against finite-difference noise.
    """
    rng = np.random.default_rng(seed)
    if model is None:
        model = SentimentModel.build(check_config(), seed=seed, dtype=np.float64)
    else:
        model = model.astype(np.float64)
    if examples is None:
        examples = _synthetic_examples(model.config, rng, num_examples)
    labels = [e.label for e in examples]

    def loss_fn() -> float:
        logits, _ = model.forward_batch(examples, check_finite=False)
        loss, _ = batch_cross_entropy(logits, labels)
        return loss

    _, _, grads = backward(model, examples)
    if grad_transform is not None:
        grads = grad_transform(grads)

    report = GradientCheckReport(tolerance=tolerance, step=step)
    for name in model.params.trainable_names():
        array = model.params[name]
        flat = array.reshape(-1)
        analytic = grads[name].reshape(-1)
        worst = 0.0
        for index in range(flat.size):
            saved = flat[index]
            flat[index] = saved + step
            loss_plus = loss_fn()
            flat[index] = saved - step
            loss_minus = loss_fn()
            flat[index] = saved
            numeric = (loss_plus - loss_minus) / (2.0 * step)
            scale = max(abs(analytic[index]), abs(numeric), 1e-6)
            worst = max(worst, abs(analytic[index] - numeric) / scale)
        report.per_array[name] = worst
        report.num_scalars += flat.size
    return report
