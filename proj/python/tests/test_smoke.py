import json

import numpy as np
import pytest

import wikiseo


@pytest.fixture(scope="module")
def corpus():
    return wikiseo.synth_corpus(seed=5, articles=120)


def test_corpus_and_search(corpus):
    assert len(corpus) == 120
    ids = corpus.article_ids()
    assert len(set(ids)) == 120
    assert len(corpus.paragraphs(ids[0])) >= 2
    index = wikiseo.SearchIndex.build(corpus)
    query = wikiseo.synth_queries(5, 1)[0]
    hits = index.search(query, 10)
    assert hits, "query matches nothing"
    scores = [s for _, s, _ in hits]
    assert scores == sorted(scores, reverse=True)
    assert [r for _, _, r in hits] == list(range(1, len(hits) + 1))
    assert index.score(query, hits[0][0]) == pytest.approx(hits[0][1])


def test_mgda_orthogonal_pair():
    w, obj = wikiseo.mgda_weights([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    assert w == pytest.approx([0.5, 0.5], abs=1e-6)
    assert obj == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(ValueError):
        wikiseo.mgda_weights([np.array([1.0])])


def test_formulas():
    assert wikiseo.keyword_density(2, 3, 1200) == pytest.approx(0.005)
    assert wikiseo.estimate_revenue(55_479_625, 0.01, 200) == pytest.approx(110_959_250)
    text, reps, density = wikiseo.keyword_stuff("Aspirin relieves mild pain in adults.", "aspirin", 0.02, 100, 3)
    assert reps == 2 and density == pytest.approx(0.02)
    assert text.lower().count("aspirin") == 2
    with pytest.raises(wikiseo.InfeasibleError):
        wikiseo.keyword_stuff("Short.", "aspirin", 0.05, 10_000, 3)


def test_config_errors():
    cfg = json.loads(wikiseo.default_config())
    assert cfg["corpus"]["articles"] == 2000
    assert json.loads(wikiseo.normalize_config('{"seed": 3}'))["seed"] == 3
    with pytest.raises(wikiseo.ParseError, match="unknown key"):
        wikiseo.normalize_config('{"bogus": 1}')


def test_missing_artifact(tmp_path):
    with pytest.raises(wikiseo.MissingArtifactError, match="attack"):
        wikiseo.run_stages(["eval"], str(tmp_path / "run"))
    assert wikiseo.stage_names()[0] == "synth-corpus"


def test_first_stages(tmp_path):
    cfg = json.dumps({"corpus": {"articles": 80, "queries": 6}})
    run = tmp_path / "run"
    wikiseo.run_stages(["synth-corpus", "index"], str(run), cfg)
    manifest = json.loads((run / "manifest.json").read_text())
    assert list(manifest["stages"]) == ["synth-corpus", "index"]
    loaded = wikiseo.load_corpus(str(run / "corpus" / "corpus.jsonl"))
    assert len(loaded) == 80
