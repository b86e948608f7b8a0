import json
import pathlib

import pytest

import webqa


def write_env(path, linkages):
    env = {
        "texts": [
            {"id": "t1", "text": "grass", "box": [0, 0, 40, 10], "score": 1.0},
            {"id": "t2", "text": "rabbit", "box": [80, 0, 40, 10], "score": 1.0},
        ],
        "blobs": [],
        "arrows": [{"id": "a1", "score": 1.0, "heads": []}],
        "intraobject_labels": [],
        "interobject_linkages": linkages,
    }
    path.write_text(json.dumps(env))
    return path


def test_environment(tmp_path):
    link = {"source_id": "t1", "target_id": "t2", "arrow_id": "a1", "score": 0.8}
    env = webqa.environment(write_env(tmp_path / "env.json", [link]))
    assert env["labels"] == ["grass", "rabbit"]
    assert len(env["best_links"]) == 1
    assert env["best_links"][0]["link_score"] == pytest.approx(0.8)

    bad = dict(link, arrow_id="a9")
    with pytest.raises(webqa.DanglingIdError):
        webqa.environment(write_env(tmp_path / "bad.json", [bad]))


def test_logical_forms():
    info = webqa.logical_form("count(λx.eats(x, deer))")
    assert info["sexpr"] == "(count (lambda x (eats x deer)))"
    assert info["well_typed"]
    assert not webqa.logical_form("count(deer)")["well_typed"]
    with pytest.raises(webqa.ParseError):
        webqa.logical_form("(count")


def test_parser():
    lexicon = "\n".join(
        [
            "if := (S/N)/S : λx.λy.λf.cause(x, f(y))",
            "mice := N : mice",
            "snakes := N : snakes",
            "die := S\\N : λx.decrease(x)",
        ]
    )
    parses = webqa.parse_question("if mice die snakes will ?", lexicon)
    # With zero weights skipping is free, so the full parse need not rank first.
    assert "λf.cause(decrease(mice), f(snakes))" in [p["logical_form"] for p in parses]


def test_answer_selection():
    assert webqa.select_entities(["hawk"], ["owl", "mouse", "snake", "hawk"]) == 3
    assert webqa.select_entities(["hawk"], ["hawk", "hawks", "owl", "mouse"]) is None
    assert webqa.tokenize("What eats deer?") == ["what", "eats", "deer", "?"]


def test_generate_train_evaluate(tmp_path):
    corpus = tmp_path / "corpus"
    n = webqa.generate(corpus, seed=3, train_webs=3, test_webs=2, score_noise=0.0, spurious_rate=0.0,
                       dropped_rate=0.0)
    assert n > 0
    metrics = webqa.train(corpus, tmp_path / "model.json", epochs=2, gold_lf=True)
    assert [m["epoch"] for m in metrics] == [1, 2]
    result = webqa.evaluate(corpus, tmp_path / "model.json")
    assert result["accuracy"] == 1.0
    assert len(result["predictions"]) > 0
    assert webqa.evaluate(corpus, tmp_path / "model.json") == result


def test_oracle_checks():
    checks = webqa.oracle_checks(seed=5)
    assert checks and all(c["passed"] for c in checks)


def test_generated_files_match_schemas(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    root = pathlib.Path(__file__).resolve().parents[2] / "schemas"
    env_schema = json.loads((root / "environment.schema.json").read_text())
    question_schema = json.loads((root / "question.schema.json").read_text())
    corpus = tmp_path / "corpus"
    webqa.generate(corpus, seed=5, train_webs=2, test_webs=1)
    envs = sorted((corpus / "envs").glob("*.json"))
    assert len(envs) == 3
    for path in envs:
        jsonschema.validate(json.loads(path.read_text()), env_schema)
    for split in ("train.jsonl", "test.jsonl"):
        for line in (corpus / split).read_text().splitlines():
            jsonschema.validate(json.loads(line), question_schema)
