import math

import pytest

import structreg as sr


def small_task(samples=40, seed=2):
    spec = sr.SynthSpec()
    spec.num_labels = 3
    spec.vocab_size = 30
    spec.mean_length = 10
    spec.num_samples = samples
    spec.seed = seed
    tpl = sr.parse_templates("U:w[0]\nU:w[-1]\nE:rich")
    train = sr.extract(sr.synth(spec), tpl)
    test = sr.extract_frozen(sr.synth(spec, stream=1), train, tpl)
    return train, test, tpl


def test_synth_is_deterministic():
    spec = sr.SynthSpec()
    spec.num_samples = 5
    a, b = sr.synth(spec), sr.synth(spec)
    assert a.to_conll() == b.to_conll()
    assert len(a) == 5
    assert sr.synth(spec, stream=1).to_conll() != a.to_conll()


def test_conll_round_trip(tmp_path):
    text = "the\tB-NP\ndog\tI-NP\nbarks\tO\n\nhi\tO\n"
    ds = sr.parse_conll(text)
    assert len(ds) == 2
    assert ds.tags() == [["B-NP", "I-NP", "O"], ["O"]]
    assert ds.words()[0] == ["the", "dog", "barks"]
    path = tmp_path / "d.conll"
    path.write_text(ds.to_conll())
    assert sr.read_conll(str(path)).tags() == ds.tags()


def test_errors_map_to_exceptions(tmp_path):
    with pytest.raises(sr.IoError):
        sr.read_conll(str(tmp_path / "missing.conll"))
    with pytest.raises(sr.DataError):
        sr.parse_conll("a\tX\nb\tY\textra\n")
    with pytest.raises(sr.DataError):
        sr.parse_conll("a\tZ\n", labels=["X", "Y"])
    with pytest.raises(sr.ConfigError):
        sr.parse_templates("U:nonsense[")
    assert issubclass(sr.IoError, sr.ConfigError)


def test_decomposition():
    assert sr.segment_lengths(9, 0) == [9]
    lengths = sr.segment_lengths(50, 2.5, seed=4)
    assert sum(lengths) == 50
    assert all(1 <= k <= 3 for k in lengths)
    with pytest.raises(sr.ConfigError):
        sr.segment_lengths(10, 0.5)

    train, _, _ = small_task(samples=6)
    minis = sr.decompose(train, 3.5, seed=1)
    covered = sorted((i, b, e) for i, b, e in minis)
    for i, n in enumerate(train.lengths()):
        spans = [(b, e) for j, b, e in covered if j == i]
        assert spans[0][0] == 0 and spans[-1][1] == n
        assert all(spans[k][1] == spans[k + 1][0] for k in range(len(spans) - 1))
    assert sr.decompose(train, 3.5, seed=1) == minis


def test_train_predict_evaluate(tmp_path):
    train, test, tpl = small_task()
    cfg = sr.TrainConfig()
    cfg.templates = tpl
    cfg.mini_size = 2.5
    cfg.seed = 3
    model, report = sr.train(train, cfg, dev=test)
    assert report["epochs"]
    objectives = [e["objective"] for e in report["epochs"]]
    assert objectives[-1] < objectives[0]
    assert all(math.isfinite(o) for o in objectives)

    result = sr.evaluate(model, test)
    assert 0.5 < result["token_accuracy"] <= 1.0
    assert result["tokens"] == sum(test.lengths())

    tags = model.predict(test)
    assert sr.score_tags(test.tags(), tags)["token_accuracy"] == pytest.approx(result["token_accuracy"])
    path, score = model.viterbi(test, 0)
    assert path == tags[0] and math.isfinite(score)

    again, _ = sr.train(train, cfg, dev=test)
    assert again.to_bytes() == model.to_bytes()
    f = tmp_path / "m.bin"
    model.save(str(f))
    assert sr.Model.load(str(f)).predict(test) == tags
    assert sr.extract_frozen(sr.synth(sr.SynthSpec()), model).num_features == model.num_features


def test_perceptron():
    train, test, tpl = small_task()
    cfg = sr.TrainConfig.perceptron()
    cfg.templates = tpl
    assert cfg.objective == "perceptron"
    model, report = sr.train(train, cfg)
    assert len(report["epochs"]) == cfg.max_epochs
    assert sr.evaluate(model, test)["token_accuracy"] > 0.5


def test_bounds():
    p = sr.TheoryParams()
    p.d, p.n, p.m, p.lambda_, p.alpha = 2, 4, 10, 0.5, 2
    b = sr.bounds(p)
    assert b["delta_fn"] == pytest.approx(1.6, rel=1e-12)
    assert b["delta_sample_bar"] == pytest.approx(12.8, rel=1e-12)
    eta, t_min = sr.sgd_iterations(epsilon=0.1, n=1, alpha=1)
    assert eta == pytest.approx(0.1)
    assert t_min == pytest.approx(10 * math.log(10))
    p.alpha = 0
    with pytest.raises(sr.ConfigError):
        sr.bounds(p)


def test_bio_chunks():
    assert sr.bio_chunks(["B-X", "I-X", "O", "B-Y"]) == [("X", 0, 1), ("Y", 3, 3)]
    r = sr.score_tags([["B-X", "I-X", "O", "B-Y"]], [["B-X", "O", "O", "B-Y"]])
    assert r["chunk_f1"] == 0.5
