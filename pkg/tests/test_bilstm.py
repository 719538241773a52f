import numpy as np
import pytest

from moviesent import ConfigError, HeadConfig, bilstm_forward, head_forward, lstm_cell
from moviesent.bilstm import init_head_params
from moviesent.errors import DataError


def build_head(hidden=4, lstm=3, seed=0, dtype=np.float64):
    params = init_head_params(
        hidden, HeadConfig(lstm_hidden_size=lstm), np.random.default_rng(seed), dtype=dtype
    )
    return params


def zero_head(hidden=4, lstm=3):
    params = build_head(hidden, lstm)
    for name in params.names():
        params[name] = np.zeros_like(params[name])
    return params


def tie_directions(params):
    """Give both scan directions identical weights."""
    for suffix in ("wx", "wh", "b"):
        params[f"head.bwd.{suffix}"] = params[f"head.fwd.{suffix}"].copy()
    return params


class TestLstmCell:
    def test_all_zero_parameters(self):
        wx, wh, b = np.zeros((4, 12)), np.zeros((3, 12)), np.zeros(12)
        h, c = lstm_cell(np.ones(4), np.zeros(3), np.zeros(3), wx, wh, b)
        np.testing.assert_array_equal(c, np.zeros(3))
        np.testing.assert_array_equal(h, np.zeros(3))

    def test_zero_weights_nonzero_cell_state(self):
        wx, wh, b = np.zeros((4, 12)), np.zeros((3, 12)), np.zeros(12)
        c_prev = np.array([1.0, -2.0, 0.5])
        h, c = lstm_cell(np.ones(4), np.zeros(3), c_prev, wx, wh, b)
        np.testing.assert_allclose(c, 0.5 * c_prev, atol=1e-15)
        np.testing.assert_allclose(h, 0.5 * np.tanh(0.5 * c_prev), atol=1e-15)

    def test_matches_scalar_loop_oracle(self):
        rng = np.random.default_rng(3)
        size = 2
        wx = rng.normal(size=(2, 4 * size))
        wh = rng.normal(size=(size, 4 * size))
        b = rng.normal(size=4 * size)
        x = rng.normal(size=2)
        h_prev = rng.normal(size=size)
        c_prev = rng.normal(size=size)
        h, c = lstm_cell(x, h_prev, c_prev, wx, wh, b)

        def sig(v):
            return 1.0 / (1.0 + np.exp(-v))

        for unit in range(size):
            pre = [
                sum(x[j] * wx[j, gate * size + unit] for j in range(2))
                + sum(h_prev[j] * wh[j, gate * size + unit] for j in range(size))
                + b[gate * size + unit]
                for gate in range(4)
            ]
            gate_in, gate_forget = sig(pre[0]), sig(pre[1])
            candidate, gate_out = np.tanh(pre[2]), sig(pre[3])
            c_unit = gate_forget * c_prev[unit] + gate_in * candidate
            assert abs(c[unit] - c_unit) < 1e-6
            assert abs(h[unit] - gate_out * np.tanh(c_unit)) < 1e-6


class TestBilstmForward:
    def test_zero_parameters_zero_output(self):
        params = zero_head()
        states = np.random.default_rng(0).normal(size=(5, 4))
        mask = np.array([1, 1, 1, 0, 0])
        np.testing.assert_array_equal(bilstm_forward(states, mask, params), np.zeros(6))

    def test_single_step_halves_agree_with_tied_cells(self):
        params = tie_directions(build_head(seed=4))
        states = np.random.default_rng(5).normal(size=(4, 4))
        mask = np.array([1, 0, 0, 0])
        out = bilstm_forward(states, mask, params)
        np.testing.assert_array_equal(out[:3], out[3:])

    def test_reversal_swaps_halves_with_tied_cells(self):
        params = tie_directions(build_head(seed=6))
        rng = np.random.default_rng(7)
        states = rng.normal(size=(5, 4))
        mask = np.ones(5, dtype=np.int64)
        out = bilstm_forward(states, mask, params)
        reversed_out = bilstm_forward(states[::-1].copy(), mask, params)
        np.testing.assert_allclose(out[:3], reversed_out[3:], atol=1e-12)
        np.testing.assert_allclose(out[3:], reversed_out[:3], atol=1e-12)

    def test_all_masked_rejected(self):
        params = build_head()
        with pytest.raises(DataError):
            bilstm_forward(np.zeros((3, 4)), np.zeros(3, dtype=np.int64), params)

    def test_output_dimension(self):
        for lstm in (1, 3, 8):
            params = build_head(lstm=lstm, seed=8)
            states = np.random.default_rng(9).normal(size=(6, 4))
            for n_real in (1, 3, 6):
                mask = np.zeros(6, dtype=np.int64)
                mask[:n_real] = 1
                assert bilstm_forward(states, mask, params).shape == (2 * lstm,)

    def test_pad_rows_ignored_exactly(self):
        params = build_head(seed=10)
        rng = np.random.default_rng(11)
        states = rng.normal(size=(5, 4))
        mask = np.array([1, 1, 1, 0, 0])
        garbled = states.copy()
        garbled[3:] = rng.normal(size=(2, 4)) * 1e6
        np.testing.assert_array_equal(
            bilstm_forward(states, mask, params), bilstm_forward(garbled, mask, params)
        )


class TestHeadForward:
    def test_zero_parameters(self):
        params = zero_head()
        states = np.random.default_rng(12).normal(size=(4, 4))
        mask = np.array([1, 1, 0, 0])
        np.testing.assert_array_equal(head_forward(states, mask, params), np.zeros(2))

    def test_bias_only_dense(self):
        params = zero_head()
        params["head.dense.b"] = np.array([1.0, -1.0])
        states = np.random.default_rng(13).normal(size=(4, 4))
        mask = np.array([1, 1, 1, 1])
        np.testing.assert_array_equal(head_forward(states, mask, params), [1.0, -1.0])

    def test_matches_composed_oracles(self):
        params = build_head(seed=14)
        rng = np.random.default_rng(15)
        states = rng.normal(size=(5, 4))
        mask = np.array([1, 1, 1, 1, 0])
        vec = bilstm_forward(states, mask, params)
        expected = vec @ params["head.dense.w"] + params["head.dense.b"]
        np.testing.assert_allclose(
            head_forward(states, mask, params), expected, atol=1e-12
        )

    def test_logit_count_follows_config(self):
        params = init_head_params(
            4, HeadConfig(lstm_hidden_size=3, num_classes=4), np.random.default_rng(16)
        )
        states = np.random.default_rng(17).normal(size=(3, 4)).astype(np.float32)
        assert head_forward(states, np.array([1, 1, 1]), params).shape == (4,)


def test_head_config_validation():
    with pytest.raises(ConfigError):
        HeadConfig(lstm_hidden_size=0)
    with pytest.raises(ConfigError):
        HeadConfig(lstm_hidden_size=4, num_classes=1)
