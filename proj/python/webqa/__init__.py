"""Food-web diagram question answering."""

import json

from . import _webqa
from ._webqa import DanglingIdError, Error, ParseError, TypeError, select_entities, tokenize

__all__ = [
    "DanglingIdError",
    "Error",
    "ParseError",
    "TypeError",
    "environment",
    "evaluate",
    "generate",
    "logical_form",
    "oracle_checks",
    "parse_question",
    "select_entities",
    "tokenize",
    "train",
]


def environment(path):
    """Labels, text-to-blob matching and best links of an environment file."""
    return json.loads(_webqa.environment_summary(str(path)))


def logical_form(text):
    return json.loads(_webqa.logical_form_info(text))


def parse_question(question, lexicon, lf_count=10):
    return json.loads(_webqa.parse_question(question, lexicon, lf_count))


def generate(out_dir, **spec):
    """Writes a synthetic corpus; keyword arguments override generator settings."""
    return _webqa.generate(str(out_dir), json.dumps(spec))


def train(corpus, model, epochs=5, lr=0.1, seed=1, global_features=True, gold_lf=False):
    """Trains on the corpus train split and writes the model. Returns per-epoch metrics."""
    return json.loads(_webqa.train(str(corpus), str(model), epochs, lr, seed, global_features, gold_lf))


def evaluate(corpus, model, split="test"):
    return json.loads(_webqa.evaluate(str(corpus), str(model), split))


def oracle_checks(seed=11):
    return json.loads(_webqa.oracle_checks(seed))
