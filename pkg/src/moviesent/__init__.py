"""Movie-review sentiment pipeline.

WordPiece preprocessing, fixed-length input encoding, a small transformer
context encoder with a freeze-first-layers policy, a BiLSTM classification
head, Adam training with finite-difference gradient verification, accuracy
evaluation, and overall-polarity aggregation of prediction vectors.
"""

from .bilstm import HeadConfig, bilstm_forward, head_forward, lstm_cell
from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import (
    DatasetSplit,
    ReviewRecord,
    TsvSchema,
    load_tsv,
    remap_amazon_scores,
    save_tsv,
    split_stats,
)
from .encoder import (
    EncoderConfig,
    ParameterStore,
    attention_block,
    embed,
    encoder_forward,
    set_freeze,
)
from .encoding import EncodedExample, batch_encode, encode
from .errors import ConfigError, DataError, DivergenceError
from .evaluate import accuracy, predict
from .labels import SentimentLabel, Verdict
from .model import ModelConfig, SentimentModel, tiny_config
from .polarity import (
    AggregatorConfig,
    PolarityCounts,
    count_labels,
    overall_polarity_binary,
    overall_polarity_ternary,
)
from .tokenizer import (
    Vocabulary,
    basic_tokenize,
    load_vocab,
    tokenize_review,
    wordpiece_tokenize,
)
from .training import (
    TrainConfig,
    adam_step,
    backward,
    batch_cross_entropy,
    cross_entropy_loss,
    gradient_check,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatorConfig",
    "ConfigError",
    "DataError",
    "DatasetSplit",
    "DivergenceError",
    "EncodedExample",
    "EncoderConfig",
    "HeadConfig",
    "ModelConfig",
    "ParameterStore",
    "PolarityCounts",
    "ReviewRecord",
    "SentimentLabel",
    "SentimentModel",
    "TrainConfig",
    "TsvSchema",
    "Verdict",
    "Vocabulary",
    "accuracy",
    "adam_step",
    "attention_block",
    "backward",
    "batch_cross_entropy",
    "batch_encode",
    "bilstm_forward",
    "count_labels",
    "cross_entropy_loss",
    "embed",
    "encode",
    "encoder_forward",
    "gradient_check",
    "head_forward",
    "load_checkpoint",
    "load_tsv",
    "load_vocab",
    "lstm_cell",
    "overall_polarity_binary",
    "overall_polarity_ternary",
    "predict",
    "remap_amazon_scores",
    "save_checkpoint",
    "save_tsv",
    "set_freeze",
    "split_stats",
    "tiny_config",
    "tokenize_review",
    "train",
    "wordpiece_tokenize",
    "basic_tokenize",
]
