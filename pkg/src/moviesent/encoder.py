"""Small transformer context encoder over summed token/segment/position embeddings.

Each block is standard post-norm: multi-head scaled dot-product attention with
an additive padding mask, residual and layer norm, then a GELU feed-forward
with residual and layer norm. Padded key columns get attention weight exactly
zero (the mask adds -inf before the softmax), so outputs at attended rows are
bit-for-bit insensitive to the content of padded rows.

Every forward function has a matching backward that consumes its cache;
gradients are plain numpy arrays keyed by parameter name. All computations
inherit the parameter dtype, so the same code path runs in float32 for
training and float64 for finite-difference verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .encoding import EncodedExample
from .errors import ConfigError, DataError, DivergenceError

LAYER_NORM_EPS = 1e-12
INIT_STD = 0.02

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class EncoderConfig:
    num_layers: int
    hidden_size: int
    num_heads: int
    ffn_size: int
    max_position: int
    vocab_size: int
    num_frozen_layers: int = 0

    def __post_init__(self) -> None:
        if self.num_layers < 0:
            raise ConfigError(f"num_layers must be >= 0, got {self.num_layers}")
        if self.hidden_size < 1 or self.ffn_size < 1 or self.max_position < 1:
            raise ConfigError("hidden_size, ffn_size, and max_position must be positive")
        if self.vocab_size < 1:
            raise ConfigError("vocab_size must be positive")
        if self.num_heads < 1 or self.hidden_size % self.num_heads != 0:
            raise ConfigError(
                f"num_heads ({self.num_heads}) must divide hidden_size ({self.hidden_size})"
            )
        if not 0 <= self.num_frozen_layers <= self.num_layers:
            raise ConfigError(
                f"num_frozen_layers must be in [0, {self.num_layers}],"
                f" got {self.num_frozen_layers}"
            )


class ParameterStore:
    """Named parameter arrays with per-array freeze flags.

    Iteration order is the sorted name order everywhere, which keeps
    checkpoints, optimizer state, and gradient dictionaries aligned.
    """

    def __init__(self) -> None:
        self._arrays: dict[str, np.ndarray] = {}
        self._frozen: set[str] = set()

    def add(self, name: str, array: np.ndarray, frozen: bool = False) -> None:
        if name in self._arrays:
            raise ConfigError(f"parameter {name!r} already exists")
        self._arrays[name] = np.asarray(array)
        if frozen:
            self._frozen.add(name)

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __setitem__(self, name: str, array: np.ndarray) -> None:
        current = self._arrays[name]
        array = np.asarray(array)
        if array.shape != current.shape:
            raise ConfigError(
                f"shape mismatch for {name!r}: {array.shape} != {current.shape}"
            )
        self._arrays[name] = array

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __len__(self) -> int:
        return len(self._arrays)

    def names(self) -> list[str]:
        return sorted(self._arrays)

    def trainable_names(self) -> list[str]:
        return [n for n in self.names() if n not in self._frozen]

    def frozen_names(self) -> list[str]:
        return [n for n in self.names() if n in self._frozen]

    def is_frozen(self, name: str) -> bool:
        if name not in self._arrays:
            raise KeyError(name)
        return name in self._frozen

    def set_frozen(self, name: str, flag: bool) -> None:
        if name not in self._arrays:
            raise KeyError(name)
        if flag:
            self._frozen.add(name)
        else:
            self._frozen.discard(name)

    def clone(self) -> "ParameterStore":
        other = ParameterStore()
        for name in self.names():
            other.add(name, self._arrays[name].copy(), frozen=name in self._frozen)
        return other

    def astype(self, dtype) -> "ParameterStore":
        other = ParameterStore()
        for name in self.names():
            other.add(name, self._arrays[name].astype(dtype), frozen=name in self._frozen)
        return other

    @property
    def dtype(self):
        name = next(iter(self._arrays), None)
        return None if name is None else self._arrays[name].dtype


def layer_prefix(index: int) -> str:
    return f"layer_{index:02d}"


def truncated_normal(rng: np.random.Generator, shape, std: float) -> np.ndarray:
    """Normal draws with resampling outside two standard deviations."""
    out = rng.normal(0.0, std, size=shape)
    bad = np.abs(out) > 2.0 * std
    while bad.any():
        out[bad] = rng.normal(0.0, std, size=int(bad.sum()))
        bad = np.abs(out) > 2.0 * std
    return out


def init_encoder_params(
    config: EncoderConfig,
    rng: np.random.Generator,
    dtype=np.float32,
    store: ParameterStore | None = None,
) -> ParameterStore:
    """Create all encoder arrays: weights truncated-normal, biases and layer-norm
    shifts zero, layer-norm scales one. Freeze flags follow config.num_frozen_layers."""
    params = store if store is not None else ParameterStore()
    hidden, ffn = config.hidden_size, config.ffn_size

    def weight(name, shape):
        params.add(name, truncated_normal(rng, shape, INIT_STD).astype(dtype))

    def zeros(name, shape):
        params.add(name, np.zeros(shape, dtype=dtype))

    def ones(name, shape):
        params.add(name, np.ones(shape, dtype=dtype))

    weight("embeddings.token", (config.vocab_size, hidden))
    weight("embeddings.segment", (2, hidden))
    weight("embeddings.position", (config.max_position, hidden))
    for i in range(config.num_layers):
        prefix = layer_prefix(i)
        for proj in ("wq", "wk", "wv", "wo"):
            weight(f"{prefix}.attn.{proj}", (hidden, hidden))
        for bias in ("bq", "bk", "bv", "bo"):
            zeros(f"{prefix}.attn.{bias}", (hidden,))
        ones(f"{prefix}.ln1.scale", (hidden,))
        zeros(f"{prefix}.ln1.shift", (hidden,))
        weight(f"{prefix}.ffn.w1", (hidden, ffn))
        zeros(f"{prefix}.ffn.b1", (ffn,))
        weight(f"{prefix}.ffn.w2", (ffn, hidden))
        zeros(f"{prefix}.ffn.b2", (hidden,))
        ones(f"{prefix}.ln2.scale", (hidden,))
        zeros(f"{prefix}.ln2.shift", (hidden,))
    set_freeze(params, config.num_frozen_layers)
    return params


def encoder_layer_count(params: ParameterStore) -> int:
    return len({n.split(".")[0] for n in params.names() if n.startswith("layer_")})


def set_freeze(params: ParameterStore, num_frozen_layers: int) -> ParameterStore:
    """Flag the embedding tables and the first ``num_frozen_layers`` blocks frozen.

    With zero frozen layers everything (embeddings included) trains.
    """
    num_layers = encoder_layer_count(params)
    if not 0 <= num_frozen_layers <= num_layers:
        raise ConfigError(
            f"num_frozen_layers must be in [0, {num_layers}], got {num_frozen_layers}"
        )
    frozen_prefixes = tuple(layer_prefix(i) + "." for i in range(num_frozen_layers))
    for name in params.names():
        if name.startswith("embeddings."):
            params.set_frozen(name, num_frozen_layers > 0)
        elif name.startswith("layer_"):
            params.set_frozen(name, name.startswith(frozen_prefixes))
    return params


# --- forward / backward ---------------------------------------------------


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x * _INV_SQRT2))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    return cdf + x * np.exp(-0.5 * x * x) * _INV_SQRT_2PI


def layer_norm(x: np.ndarray, scale: np.ndarray, shift: np.ndarray):
    """Normalize over the last axis; returns (output, cache)."""
    centered = x - x.mean(axis=-1, keepdims=True)
    var = np.mean(centered * centered, axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    xhat = centered * inv
    return xhat * scale + shift, (xhat, inv)


def layer_norm_backward(dy: np.ndarray, cache, scale: np.ndarray):
    xhat, inv = cache
    reduce_axes = tuple(range(dy.ndim - 1))
    dscale = (dy * xhat).sum(axis=reduce_axes)
    dshift = dy.sum(axis=reduce_axes)
    dxhat = dy * scale
    m1 = dxhat.mean(axis=-1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv * (dxhat - m1 - xhat * m2)
    return dx, dscale, dshift


def _masked_softmax(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax over the last axis with weight exactly 0 at masked-out columns.

    ``scores`` is (batch, heads, q, k); ``mask`` is (batch, k) with 1 for real
    positions. Requires at least one unmasked column per example.
    """
    masked = np.where((mask == 1)[:, None, None, :], scores, -np.inf)
    peak = masked.max(axis=-1, keepdims=True)
    weights = np.exp(masked - peak)
    return weights / weights.sum(axis=-1, keepdims=True)


def _split_heads(x: np.ndarray, num_heads: int) -> np.ndarray:
    batch, seq, hidden = x.shape
    return x.reshape(batch, seq, num_heads, hidden // num_heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    batch, heads, seq, dim = x.shape
    return x.transpose(0, 2, 1, 3).reshape(batch, seq, heads * dim)


def multi_head_attention(
    x: np.ndarray, mask: np.ndarray, params: ParameterStore, prefix: str, num_heads: int
):
    """Scaled dot-product self-attention. x: (batch, seq, hidden), mask: (batch, seq)."""
    p = f"{prefix}.attn"
    q = x @ params[f"{p}.wq"] + params[f"{p}.bq"]
    k = x @ params[f"{p}.wk"] + params[f"{p}.bk"]
    v = x @ params[f"{p}.wv"] + params[f"{p}.bv"]
    qh, kh, vh = (_split_heads(t, num_heads) for t in (q, k, v))
    inv_sqrt_dim = 1.0 / math.sqrt(qh.shape[-1])
    scores = (qh @ kh.transpose(0, 1, 3, 2)) * inv_sqrt_dim
    weights = _masked_softmax(scores, mask)
    merged = _merge_heads(weights @ vh)
    out = merged @ params[f"{p}.wo"] + params[f"{p}.bo"]
    cache = {
        "x": x,
        "qh": qh,
        "kh": kh,
        "vh": vh,
        "weights": weights,
        "merged": merged,
        "inv_sqrt_dim": inv_sqrt_dim,
        "num_heads": num_heads,
    }
    return out, cache


def multi_head_attention_backward(
    dout: np.ndarray, cache: dict, params: ParameterStore, prefix: str
):
    p = f"{prefix}.attn"
    x, qh, kh, vh = cache["x"], cache["qh"], cache["kh"], cache["vh"]
    weights, merged = cache["weights"], cache["merged"]
    num_heads = cache["num_heads"]

    grads: dict[str, np.ndarray] = {}
    grads[f"{p}.wo"] = np.einsum("bki,bkj->ij", merged, dout)
    grads[f"{p}.bo"] = dout.sum(axis=(0, 1))
    dctx = _split_heads(dout @ params[f"{p}.wo"].T, num_heads)

    dweights = dctx @ vh.transpose(0, 1, 3, 2)
    dvh = np.einsum("bhqk,bhqd->bhkd", weights, dctx)
    # softmax jacobian row-wise; masked columns have weight 0 and stay 0
    dscores = weights * (dweights - (dweights * weights).sum(axis=-1, keepdims=True))
    dscores = dscores * cache["inv_sqrt_dim"]
    dqh = dscores @ kh
    dkh = np.einsum("bhqk,bhqd->bhkd", dscores, qh)

    dx = np.zeros_like(x)
    for dhead, w_name, b_name in (
        (dqh, f"{p}.wq", f"{p}.bq"),
        (dkh, f"{p}.wk", f"{p}.bk"),
        (dvh, f"{p}.wv", f"{p}.bv"),
    ):
        dproj = _merge_heads(dhead)
        grads[w_name] = np.einsum("bki,bkj->ij", x, dproj)
        grads[b_name] = dproj.sum(axis=(0, 1))
        dx += dproj @ params[w_name].T
    return dx, grads


def attention_block_forward(
    x: np.ndarray, mask: np.ndarray, params: ParameterStore, prefix: str, num_heads: int
):
    """Attention sublayer with residual connection and post layer norm."""
    attn_out, attn_cache = multi_head_attention(x, mask, params, prefix, num_heads)
    out, ln_cache = layer_norm(
        x + attn_out, params[f"{prefix}.ln1.scale"], params[f"{prefix}.ln1.shift"]
    )
    return out, {"attn": attn_cache, "ln": ln_cache, "attn_out": attn_out}


def attention_block_backward(dout, cache, params: ParameterStore, prefix: str):
    dresid, dscale, dshift = layer_norm_backward(
        dout, cache["ln"], params[f"{prefix}.ln1.scale"]
    )
    dx_attn, grads = multi_head_attention_backward(dresid, cache["attn"], params, prefix)
    grads[f"{prefix}.ln1.scale"] = dscale
    grads[f"{prefix}.ln1.shift"] = dshift
    return dresid + dx_attn, grads


def ffn_block_forward(x: np.ndarray, params: ParameterStore, prefix: str):
    """Feed-forward sublayer (GELU) with residual connection and post layer norm."""
    pre = x @ params[f"{prefix}.ffn.w1"] + params[f"{prefix}.ffn.b1"]
    act = gelu(pre)
    ffn_out = act @ params[f"{prefix}.ffn.w2"] + params[f"{prefix}.ffn.b2"]
    out, ln_cache = layer_norm(
        x + ffn_out, params[f"{prefix}.ln2.scale"], params[f"{prefix}.ln2.shift"]
    )
    return out, {"x": x, "pre": pre, "act": act, "ln": ln_cache}


def ffn_block_backward(dout, cache, params: ParameterStore, prefix: str):
    dresid, dscale, dshift = layer_norm_backward(
        dout, cache["ln"], params[f"{prefix}.ln2.scale"]
    )
    grads = {
        f"{prefix}.ln2.scale": dscale,
        f"{prefix}.ln2.shift": dshift,
        f"{prefix}.ffn.w2": np.einsum("bkf,bkh->fh", cache["act"], dresid),
        f"{prefix}.ffn.b2": dresid.sum(axis=(0, 1)),
    }
    dact = dresid @ params[f"{prefix}.ffn.w2"].T
    dpre = dact * gelu_grad(cache["pre"])
    grads[f"{prefix}.ffn.w1"] = np.einsum("bkh,bkf->hf", cache["x"], dpre)
    grads[f"{prefix}.ffn.b1"] = dpre.sum(axis=(0, 1))
    dx = dpre @ params[f"{prefix}.ffn.w1"].T
    return dresid + dx, grads


def embed_batch(
    input_ids: np.ndarray, segment_ids: np.ndarray, params: ParameterStore
) -> np.ndarray:
    """Sum of token, segment, and position embeddings. ids: (batch, seq)."""
    token_table = params["embeddings.token"]
    position_table = params["embeddings.position"]
    seq_len = input_ids.shape[1]
    if input_ids.min(initial=0) < 0 or input_ids.max(initial=-1) >= token_table.shape[0]:
        raise DataError(
            f"token id out of range [0, {token_table.shape[0]}) in input batch"
        )
    if seq_len > position_table.shape[0]:
        raise DataError(
            f"sequence length {seq_len} exceeds max position {position_table.shape[0]}"
        )
    return (
        token_table[input_ids]
        + params["embeddings.segment"][segment_ids]
        + position_table[:seq_len][None, :, :]
    )


def embed_backward(
    dembed: np.ndarray, input_ids: np.ndarray, segment_ids: np.ndarray, params: ParameterStore
) -> dict[str, np.ndarray]:
    hidden = dembed.shape[-1]
    dtoken = np.zeros_like(params["embeddings.token"])
    np.add.at(dtoken, input_ids.reshape(-1), dembed.reshape(-1, hidden))
    dsegment = np.zeros_like(params["embeddings.segment"])
    np.add.at(dsegment, segment_ids.reshape(-1), dembed.reshape(-1, hidden))
    dposition = np.zeros_like(params["embeddings.position"])
    dposition[: dembed.shape[1]] = dembed.sum(axis=0)
    return {
        "embeddings.token": dtoken,
        "embeddings.segment": dsegment,
        "embeddings.position": dposition,
    }


def encoder_forward_batch(
    input_ids: np.ndarray,
    segment_ids: np.ndarray,
    mask: np.ndarray,
    params: ParameterStore,
    config: EncoderConfig,
    check_finite: bool = True,
):
    """Embeddings followed by all encoder blocks; returns (hidden, caches)."""
    hidden = embed_batch(input_ids, segment_ids, params)
    caches = []
    for i in range(config.num_layers):
        prefix = layer_prefix(i)
        hidden, attn_cache = attention_block_forward(
            hidden, mask, params, prefix, config.num_heads
        )
        hidden, ffn_cache = ffn_block_forward(hidden, params, prefix)
        caches.append((attn_cache, ffn_cache))
        if check_finite and not np.isfinite(hidden).all():
            raise DivergenceError(f"non-finite hidden states after encoder block {i}")
    return hidden, caches


def encoder_backward_batch(
    dhidden: np.ndarray,
    caches,
    input_ids: np.ndarray,
    segment_ids: np.ndarray,
    params: ParameterStore,
    config: EncoderConfig,
) -> dict[str, np.ndarray]:
    grads: dict[str, np.ndarray] = {}
    for i in reversed(range(config.num_layers)):
        prefix = layer_prefix(i)
        attn_cache, ffn_cache = caches[i]
        dhidden, ffn_grads = ffn_block_backward(dhidden, ffn_cache, params, prefix)
        dhidden, attn_grads = attention_block_backward(dhidden, attn_cache, params, prefix)
        grads.update(ffn_grads)
        grads.update(attn_grads)
    grads.update(embed_backward(dhidden, input_ids, segment_ids, params))
    return grads


# --- single-example conveniences -------------------------------------------


def embed(example: EncodedExample, params: ParameterStore) -> np.ndarray:
    """Embedding matrix (seq, hidden) for one encoded example."""
    return embed_batch(
        example.input_ids[None, :], example.segment_ids[None, :], params
    )[0]


def attention_block(
    states: np.ndarray,
    mask: np.ndarray,
    params: ParameterStore,
    num_heads: int,
    layer_index: int = 0,
) -> np.ndarray:
    """One attention sublayer (residual + norm) on a (seq, hidden) matrix."""
    out, _ = attention_block_forward(
        states[None, :, :], np.asarray(mask)[None, :], params,
        layer_prefix(layer_index), num_heads,
    )
    return out[0]


def encoder_forward(
    example: EncodedExample, params: ParameterStore, config: EncoderConfig
) -> np.ndarray:
    """Hidden states (seq, hidden) for one encoded example; row 0 is the [CLS] state."""
    hidden, _ = encoder_forward_batch(
        example.input_ids[None, :],
        example.segment_ids[None, :],
        example.attention_mask[None, :],
        params,
        config,
    )
    return hidden[0]
