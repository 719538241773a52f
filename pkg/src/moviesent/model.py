"""Full classification model: context encoder feeding the BiLSTM head."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bilstm, encoder
from .bilstm import HeadConfig
from .encoder import EncoderConfig, ParameterStore
from .encoding import EncodedExample
from .errors import DataError


@dataclass(frozen=True)
class ModelConfig:
    encoder: EncoderConfig
    head: HeadConfig

    def to_dict(self) -> dict:
        return {
            "encoder": {
                "num_layers": self.encoder.num_layers,
                "hidden_size": self.encoder.hidden_size,
                "num_heads": self.encoder.num_heads,
                "ffn_size": self.encoder.ffn_size,
                "max_position": self.encoder.max_position,
                "vocab_size": self.encoder.vocab_size,
                "num_frozen_layers": self.encoder.num_frozen_layers,
            },
            "head": {
                "lstm_hidden_size": self.head.lstm_hidden_size,
                "num_classes": self.head.num_classes,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        try:
            return cls(
                encoder=EncoderConfig(**data["encoder"]),
                head=HeadConfig(**data["head"]),
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed model config: {exc}") from exc


def tiny_config(
    max_len: int = 32,
    vocab_size: int = 64,
    num_frozen_layers: int = 1,
) -> ModelConfig:
    """Desk-scale default: 2 layers, hidden 32, 2 heads, feed-forward 64, LSTM 32."""
    return ModelConfig(
        encoder=EncoderConfig(
            num_layers=2,
            hidden_size=32,
            num_heads=2,
            ffn_size=64,
            max_position=max_len,
            vocab_size=vocab_size,
            num_frozen_layers=num_frozen_layers,
        ),
        head=HeadConfig(lstm_hidden_size=32, num_classes=2),
    )


class SentimentModel:
    """Configuration plus one ParameterStore holding encoder and head arrays."""

    def __init__(self, config: ModelConfig, params: ParameterStore):
        self.config = config
        self.params = params

    @classmethod
    def build(cls, config: ModelConfig, seed: int = 0, dtype=np.float32) -> "SentimentModel":
        rng = np.random.default_rng(seed)
        params = encoder.init_encoder_params(config.encoder, rng, dtype=dtype)
        bilstm.init_head_params(
            config.encoder.hidden_size, config.head, rng, dtype=dtype, store=params
        )
        return cls(config, params)

    def astype(self, dtype) -> "SentimentModel":
        return SentimentModel(self.config, self.params.astype(dtype))

    def validate_examples(self, examples: list[EncodedExample]) -> None:
        cfg = self.config.encoder
        for index, example in enumerate(examples):
            if example.max_len != examples[0].max_len:
                raise DataError(
                    f"example {index}: sequence length {example.max_len}"
                    f" differs from {examples[0].max_len} in the same batch"
                )
            if example.max_len > cfg.max_position:
                raise DataError(
                    f"example {index}: sequence length {example.max_len} exceeds the"
                    f" checkpoint's max position {cfg.max_position}"
                )
            if int(example.input_ids.max()) >= cfg.vocab_size:
                raise DataError(
                    f"example {index}: token id {int(example.input_ids.max())} out of"
                    f" range for vocabulary size {cfg.vocab_size}"
                )

    def _batch_arrays(self, examples: list[EncodedExample]):
        ids = np.stack([e.input_ids for e in examples])
        seg = np.stack([e.segment_ids for e in examples])
        mask = np.stack([e.attention_mask for e in examples])
        return ids, seg, mask

    def forward_batch(self, examples: list[EncodedExample], check_finite: bool = True):
        """Logits of shape (batch, num_classes) plus the cache for backward."""
        if not examples:
            raise DataError("empty batch")
        self.validate_examples(examples)
        ids, seg, mask = self._batch_arrays(examples)
        hidden, enc_caches = encoder.encoder_forward_batch(
            ids, seg, mask, self.params, self.config.encoder, check_finite=check_finite
        )
        logits = np.empty((len(examples), self.config.head.num_classes), dtype=hidden.dtype)
        head_caches = []
        for b in range(len(examples)):
            logits[b], head_cache = bilstm.head_forward_cached(hidden[b], mask[b], self.params)
            head_caches.append(head_cache)
        cache = {
            "ids": ids,
            "seg": seg,
            "mask": mask,
            "enc": enc_caches,
            "heads": head_caches,
            "hidden_shape": hidden.shape,
        }
        return logits, cache

    def backward_batch(self, cache: dict, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients for every parameter given per-example logit gradients."""
        grads: dict[str, np.ndarray] = {}
        dhidden = np.zeros(cache["hidden_shape"], dtype=self.params.dtype)
        for b, head_cache in enumerate(cache["heads"]):
            dstates, head_grads = bilstm.head_backward(dlogits[b], head_cache, self.params)
            dhidden[b] = dstates
            for name, grad in head_grads.items():
                if name in grads:
                    grads[name] += grad
                else:
                    grads[name] = grad
        enc_grads = encoder.encoder_backward_batch(
            dhidden, cache["enc"], cache["ids"], cache["seg"], self.params, self.config.encoder
        )
        grads.update(enc_grads)
        return grads

    def logits(self, examples: list[EncodedExample], batch_size: int = 32) -> np.ndarray:
        """Forward-only logits for any number of examples."""
        chunks = []
        for start in range(0, len(examples), batch_size):
            out, _ = self.forward_batch(examples[start : start + batch_size])
            chunks.append(out)
        if not chunks:
            return np.zeros((0, self.config.head.num_classes))
        return np.concatenate(chunks, axis=0)
