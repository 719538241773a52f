"""Bidirectional LSTM head over encoder hidden states, plus the dense output layer.

The forward cell scans the attended rows left to right and the backward cell
right to left, both from zero initial states; padded rows are skipped
entirely. The concatenation of the two final hidden states feeds a dense
layer that emits one logit per class. Gate order in the packed weight
matrices is input, forget, cell candidate, output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit as sigmoid

from .encoder import INIT_STD, ParameterStore, truncated_normal
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class HeadConfig:
    lstm_hidden_size: int
    num_classes: int = 2

    def __post_init__(self) -> None:
        if self.lstm_hidden_size < 1:
            raise ConfigError(f"lstm_hidden_size must be positive, got {self.lstm_hidden_size}")
        if self.num_classes < 2:
            raise ConfigError(f"num_classes must be at least 2, got {self.num_classes}")


def init_head_params(
    encoder_hidden: int,
    config: HeadConfig,
    rng: np.random.Generator,
    dtype=np.float32,
    store: ParameterStore | None = None,
) -> ParameterStore:
    params = store if store is not None else ParameterStore()
    size = config.lstm_hidden_size
    for cell in ("fwd", "bwd"):
        params.add(
            f"head.{cell}.wx",
            truncated_normal(rng, (encoder_hidden, 4 * size), INIT_STD).astype(dtype),
        )
        params.add(
            f"head.{cell}.wh",
            truncated_normal(rng, (size, 4 * size), INIT_STD).astype(dtype),
        )
        params.add(f"head.{cell}.b", np.zeros(4 * size, dtype=dtype))
    params.add(
        "head.dense.w",
        truncated_normal(rng, (2 * size, config.num_classes), INIT_STD).astype(dtype),
    )
    params.add("head.dense.b", np.zeros(config.num_classes, dtype=dtype))
    return params


def lstm_cell(x, h_prev, c_prev, wx, wh, b):
    """One LSTM step. Returns (h, c)."""
    h, c, _ = _lstm_cell_cached(x, h_prev, c_prev, wx, wh, b)
    return h, c


def _lstm_cell_cached(x, h_prev, c_prev, wx, wh, b):
    size = h_prev.shape[-1]
    pre = x @ wx + h_prev @ wh + b
    gate_in = sigmoid(pre[..., :size])
    gate_forget = sigmoid(pre[..., size : 2 * size])
    candidate = np.tanh(pre[..., 2 * size : 3 * size])
    gate_out = sigmoid(pre[..., 3 * size :])
    c = gate_forget * c_prev + gate_in * candidate
    tanh_c = np.tanh(c)
    h = gate_out * tanh_c
    cache = (x, h_prev, c_prev, gate_in, gate_forget, candidate, gate_out, tanh_c)
    return h, c, cache


def _lstm_cell_backward(dh, dc_in, cache, wx, wh):
    """Backward one step; returns (dx, dh_prev, dc_prev, dwx, dwh, db)."""
    x, h_prev, c_prev, gate_in, gate_forget, candidate, gate_out, tanh_c = cache
    d_out = dh * tanh_c
    dc = dc_in + dh * gate_out * (1.0 - tanh_c * tanh_c)
    d_forget = dc * c_prev
    d_in = dc * candidate
    d_cand = dc * gate_in
    dc_prev = dc * gate_forget
    dpre = np.concatenate(
        [
            d_in * gate_in * (1.0 - gate_in),
            d_forget * gate_forget * (1.0 - gate_forget),
            d_cand * (1.0 - candidate * candidate),
            d_out * gate_out * (1.0 - gate_out),
        ]
    )
    return dpre @ wx.T, dpre @ wh.T, dc_prev, np.outer(x, dpre), np.outer(h_prev, dpre), dpre


def _scan(rows, wx, wh, b, lstm_size, dtype):
    h = np.zeros(lstm_size, dtype=dtype)
    c = np.zeros(lstm_size, dtype=dtype)
    caches = []
    for row in rows:
        h, c, cache = _lstm_cell_cached(row, h, c, wx, wh, b)
        caches.append(cache)
    return h, caches


def bilstm_forward(states: np.ndarray, mask: np.ndarray, params: ParameterStore) -> np.ndarray:
    """Concatenated final forward/backward hidden states over the attended rows."""
    out, _ = bilstm_forward_cached(states, mask, params)
    return out


def bilstm_forward_cached(states: np.ndarray, mask: np.ndarray, params: ParameterStore):
    real = np.nonzero(np.asarray(mask) == 1)[0]
    if real.size == 0:
        raise DataError("bilstm_forward requires at least one attended position")
    rows = states[real]
    lstm_size = params["head.fwd.wh"].shape[0]
    h_fwd, fwd_caches = _scan(
        rows, params["head.fwd.wx"], params["head.fwd.wh"], params["head.fwd.b"],
        lstm_size, states.dtype,
    )
    h_bwd, bwd_caches = _scan(
        rows[::-1], params["head.bwd.wx"], params["head.bwd.wh"], params["head.bwd.b"],
        lstm_size, states.dtype,
    )
    cache = {"real": real, "fwd": fwd_caches, "bwd": bwd_caches, "seq_shape": states.shape}
    return np.concatenate([h_fwd, h_bwd]), cache


def _bptt(dh_final, caches, wx, wh):
    """Backpropagate through one scan direction; returns per-step dx plus grads."""
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros(wx.shape[1], dtype=wx.dtype)
    dxs = []
    dh = dh_final
    dc = np.zeros_like(dh_final)
    for cache in reversed(caches):
        dx, dh, dc, dwx_step, dwh_step, db_step = _lstm_cell_backward(dh, dc, cache, wx, wh)
        dwx += dwx_step
        dwh += dwh_step
        db += db_step
        dxs.append(dx)
    dxs.reverse()
    return dxs, dwx, dwh, db


def bilstm_backward(dvec: np.ndarray, cache: dict, params: ParameterStore):
    """Gradient of the 2L output vector; returns (dstates, grads)."""
    lstm_size = params["head.fwd.wh"].shape[0]
    grads: dict[str, np.ndarray] = {}
    dstates = np.zeros(cache["seq_shape"], dtype=params["head.fwd.wx"].dtype)
    real = cache["real"]

    dx_fwd, dwx, dwh, db = _bptt(
        dvec[:lstm_size], cache["fwd"], params["head.fwd.wx"], params["head.fwd.wh"]
    )
    grads["head.fwd.wx"], grads["head.fwd.wh"], grads["head.fwd.b"] = dwx, dwh, db
    dx_bwd, dwx, dwh, db = _bptt(
        dvec[lstm_size:], cache["bwd"], params["head.bwd.wx"], params["head.bwd.wh"]
    )
    grads["head.bwd.wx"], grads["head.bwd.wh"], grads["head.bwd.b"] = dwx, dwh, db

    for step, position in enumerate(real):
        dstates[position] += dx_fwd[step]
    for step, position in enumerate(real[::-1]):
        dstates[position] += dx_bwd[step]
    return dstates, grads


def head_forward(states: np.ndarray, mask: np.ndarray, params: ParameterStore) -> np.ndarray:
    """Class logits for one example: dense layer over the BiLSTM output."""
    logits, _ = head_forward_cached(states, mask, params)
    return logits


def head_forward_cached(states: np.ndarray, mask: np.ndarray, params: ParameterStore):
    vec, lstm_cache = bilstm_forward_cached(states, mask, params)
    logits = vec @ params["head.dense.w"] + params["head.dense.b"]
    return logits, {"vec": vec, "lstm": lstm_cache}


def head_backward(dlogits: np.ndarray, cache: dict, params: ParameterStore):
    """Gradients of the head for one example; returns (dstates, grads)."""
    vec = cache["vec"]
    grads = {
        "head.dense.w": np.outer(vec, dlogits),
        "head.dense.b": dlogits.copy(),
    }
    dvec = dlogits @ params["head.dense.w"].T
    dstates, lstm_grads = bilstm_backward(dvec, cache["lstm"], params)
    grads.update(lstm_grads)
    return dstates, grads
