"""Linear-chain CRF and perceptron taggers with structure regularization."""

import json as _json

from ._structreg import (
    ConfigError,
    DataError,
    Dataset,
    Error,
    FormatError,
    IoError,
    Model,
    NumericalError,
    SynthSpec,
    TemplateSet,
    TheoryParams,
    TrainConfig,
    bio_chunks,
    bounds,
    decompose,
    default_templates,
    extract,
    extract_frozen,
    parse_conll,
    parse_templates,
    read_conll,
    segment_lengths,
    sgd_iterations,
    synth,
    train,
)
from ._structreg import evaluate_json as _evaluate_json
from ._structreg import score_tags_json as _score_tags_json

__version__ = "0.1.0"


def evaluate(model, dataset):
    """Token accuracy, chunk scores for BIO label sets, and the confusion counts."""
    return _json.loads(_evaluate_json(model, dataset))


def score_tags(gold, predicted):
    """Scores predicted tag sequences against gold ones (lists of lists of strings)."""
    return _json.loads(_score_tags_json(gold, predicted))
