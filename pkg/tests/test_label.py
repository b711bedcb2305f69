"""
Tests for rule labels, the classifier, metrics and cluster labels.
"""

import math
import pytest
from pathlib import Path
import tempfile

import numpy as np

from wikitrends.graph import Partition
from wikitrends.label import (
    CLASSIFIERS, LABEL_SET, LABELS, Classifier, KeywordRule, LabelRules, LabelSet, LinearSvmClassifier, Metrics,
    NaiveBayesClassifier, evaluate, label_clusters, load_rules, make_classifier,
    predict, rule_label, stratified_split, train_classifier,
)
from wikitrends.text import ClusterDoc
from wikitrends_core.errors import (
    ConfigError, EmptyTestSet, EmptyTrainingSet, InconsistentInputs, SingleClassWarning, UnlabelableCluster,
)

RULES_DIR = Path(__file__).resolve().parent.parent / "config" / "rules"

# Per-label classification scores reported for the English edition
TABLE_PRECISION = {
    'football': 0.93, 'conflicts': 0.75, 'movies': 0.86, 'music': 0.84, 'politics': 0.82,
    'religion': 0.75, 'science': 0.79, 'sports': 0.84, 'videogames': 0.79,
}
TABLE_RECALL = {
    'football': 0.95, 'conflicts': 0.69, 'movies': 0.89, 'music': 0.85, 'politics': 0.81,
    'religion': 0.56, 'science': 0.60, 'sports': 0.85, 'videogames': 0.70,
}
TABLE_SUPPORT = {
    'football': 1359, 'conflicts': 112, 'movies': 646, 'music': 288, 'politics': 520,
    'religion': 90, 'science': 70, 'sports': 751, 'videogames': 47,
}


def toy_examples():
    return [(["goal", "match"], "football")] * 3 + [(["election", "vote"], "politics")] * 3


def rules(**kwargs):
    data = {
        'title_patterns': {'album': 'music', 'footballer': 'football'},
        'keyword_sets': [{'label': 'politics', 'keywords': ['political', 'party', 'republican']}],
    }
    data.update(kwargs)
    return LabelRules.from_dict(data)


class TestRules:
    """Test rule labeling."""

    def test_title_parenthetical(self):
        assert rule_label("Nevermind (album)", "", rules()) == "music"
        assert rule_label("Nevermind_(album)", "", rules()) == "music"
        assert rule_label("Paul_Pogba_(Footballer)", "", rules()) == "football"

    def test_keyword_set(self):
        summary = "The Republican Party is a political party in the United States."
        assert rule_label("Republican Party", summary, rules()) == "politics"

    def test_no_rule_fires(self):
        assert rule_label("Cat", "a small domesticated mammal", rules()) is None

    def test_keywords_need_whole_words(self):
        summary = "apolitical partygoers and republicans"
        assert rule_label("X", summary, rules()) is None

    def test_title_beats_keywords(self):
        summary = "a political party album by a republican band"
        assert rule_label("Anthem (album)", summary, rules()) == "music"

    def test_unknown_parenthetical_falls_through(self):
        summary = "political party of republican voters"
        assert rule_label("Grand Old Party (nickname)", summary, rules()) == "politics"

    def test_rule_order_matters_only_on_overlap(self):
        sets = [
            {'label': 'music', 'keywords': ['album']},
            {'label': 'movies', 'keywords': ['film']},
        ]
        forward = rules(keyword_sets=sets)
        backward = rules(keyword_sets=sets[::-1])

        assert rule_label("X", "an album", forward) == rule_label("X", "an album", backward) == "music"
        assert rule_label("X", "film and album", forward) == "music"
        assert rule_label("X", "film and album", backward) == "movies"

    def test_unknown_label_rejected(self):
        with pytest.raises(ConfigError) as info:
            rules(title_patterns={'album': 'jazz'})
        assert "unknown label 'jazz'" in info.value.errors[0]

    def test_empty_keyword_set_rejected(self):
        with pytest.raises(ConfigError):
            rules(keyword_sets=[{'label': 'music', 'keywords': []}])

    def test_bundled_rules_load(self):
        en = load_rules(RULES_DIR / "en.yaml")
        assert rule_label("Jean Dujardin (actor)", "", en) == "movies"
        assert rule_label("X", "political party republican", en) == "politics"
        for code in ("fr", "ru"):
            assert load_rules(RULES_DIR / f"{code}.yaml").keyword_sets

    def test_load_from_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "rules.yaml"
            path.write_text("title_patterns:\n  Album: music\n", encoding="utf-8")
            loaded = load_rules(path)
            assert loaded.title_patterns == {'album': 'music'}
            assert loaded.keyword_sets == []

    def test_keyword_rule(self):
        rule = KeywordRule('sports', ('olympic', 'medal'))
        assert rule.matches("olympic gold medal")
        assert not rule.matches("olympic games")


class TestClassifier:
    """Test the multinomial classifier."""

    def test_toy_predictions(self):
        model = train_classifier(toy_examples())
        assert predict(model, ["goal"])[0] == "football"
        assert predict(model, ["vote", "vote"])[0] == "politics"

    def test_absent_labels_score_minus_inf(self):
        _, scores = predict(train_classifier(toy_examples()), ["goal"])
        assert scores['music'] == -np.inf
        assert scores['football'] > scores['politics'] > -np.inf

    def test_empty_and_unknown_tokens_use_priors(self):
        model = train_classifier(toy_examples() + [(["goal"], "football")])
        assert predict(model, [])[0] == "football"
        assert predict(model, ["unseen", "words"]) == predict(model, [])

    def test_prior_tie_takes_label_order(self):
        model = train_classifier(toy_examples())
        assert predict(model, [])[0] == "football"

    def test_single_class(self):
        with pytest.warns(SingleClassWarning):
            model = train_classifier([(["riff"], "music"), (["chord"], "music")])
        assert predict(model, ["goal", "vote"])[0] == "music"
        assert predict(model, [])[0] == "music"

    def test_duplicates_leave_model_unchanged(self):
        single = train_classifier(toy_examples(), smoothing=0.0)
        double = train_classifier(toy_examples() * 2, smoothing=0.0)
        assert np.array_equal(single.log_prior, double.log_prior)
        assert np.allclose(single.log_likelihood, double.log_likelihood, equal_nan=True)

    def test_separable_training_accuracy(self):
        examples = toy_examples() + [(["album", "song"], "music")] * 2 + [(["film", "actor"], "movies")] * 4
        model = train_classifier(examples)
        assert all(predict(model, tokens)[0] == label for tokens, label in examples)

    def test_shift_invariant_argmax(self):
        model = train_classifier(toy_examples())
        label, scores = predict(model, ["match", "vote", "goal"])
        shifted = {k: v + 12.5 for k, v in scores.items()}
        assert max(LABELS, key=lambda k: (shifted[k], -LABELS.index(k))) == label

    def test_matches_hand_computed_posterior(self):
        model = train_classifier(toy_examples())
        _, scores = predict(model, ["goal", "goal"])

        assert isinstance(model, NaiveBayesClassifier)
        assert model.vocabulary == {'election': 0, 'goal': 1, 'match': 2, 'vote': 3}
        # three football rows of goal+match over a four-word vocabulary
        assert scores['football'] == pytest.approx(math.log(0.5) + 2 * math.log(4 / 10))
        assert scores['politics'] == pytest.approx(math.log(0.5) + 2 * math.log(1 / 10))

    def test_errors(self):
        with pytest.raises(EmptyTrainingSet):
            train_classifier([])
        with pytest.raises(EmptyTrainingSet):
            train_classifier([([], "music")])
        with pytest.raises(InconsistentInputs):
            train_classifier([(["x"], "jazz")])


class TestClassifierKinds:
    """Test swapping classifier implementations behind one interface."""

    def _examples(self):
        return toy_examples() + [(["album", "song"], "music")] * 3

    @pytest.mark.parametrize("kind", sorted(CLASSIFIERS))
    def test_shared_interface(self, kind):
        model = make_classifier(kind).fit(self._examples())
        scores = model.scores(["vote"])

        assert isinstance(model, Classifier)
        assert model.kind == kind
        assert model.present == ('football', 'politics', 'music')
        assert model.predict(["goal", "match"]) == "football"
        assert model.predict(["album"]) == "music"
        assert max(model.present, key=scores.get) == "politics"
        assert scores['science'] == -np.inf
        assert evaluate(model, self._examples()).accuracy == 1.0

    def test_linear_svm_binary(self):
        model = train_classifier(toy_examples(), kind="linear_svm")
        _, scores = predict(model, ["election"])

        assert isinstance(model, LinearSvmClassifier)
        assert scores['politics'] > scores['football'] > -np.inf
        assert scores['politics'] == pytest.approx(-scores['football'])
        assert model.predict(["goal"]) == "football"

    def test_linear_svm_single_class(self):
        with pytest.warns(SingleClassWarning):
            model = train_classifier([(["riff"], "music"), (["chord"], "music")], kind="linear_svm")
        assert model.predict(["goal", "vote"]) == "music"
        assert model.scores([])['football'] == -np.inf

    def test_linear_svm_labels_clusters(self):
        model = train_classifier(toy_examples(), kind="linear_svm")
        partition = Partition.from_groups([[0, 1], [2, 3]])
        docs = [ClusterDoc(0, {'vote': 3}), ClusterDoc(1, {'goal': 2, 'match': 1})]

        out = label_clusters(partition, {0: 'football', 1: 'politics'}, docs, model)
        assert out == {0: 'politics', 1: 'football'}

    def test_unknown_kind(self):
        with pytest.raises(ValueError) as info:
            make_classifier("decision_tree")
        assert "decision_tree" in str(info.value)

    def test_unfitted(self):
        with pytest.raises(RuntimeError):
            make_classifier("naive_bayes").scores(["goal"])


class TestMetrics:
    """Test precision, recall and their averages."""

    def test_reported_table(self):
        precision = [TABLE_PRECISION[label] for label in LABELS]
        recall = [TABLE_RECALL[label] for label in LABELS]
        support = [TABLE_SUPPORT[label] for label in LABELS]
        metrics = Metrics.from_scores(LABEL_SET, precision, recall, support)

        assert metrics.support == 3883
        assert metrics.macro.precision == pytest.approx(0.8189, abs=5e-5)
        assert metrics.weighted.precision == pytest.approx(0.8660, abs=5e-5)
        assert metrics.macro.recall == pytest.approx(0.7667, abs=5e-5)
        assert metrics.weighted.recall == pytest.approx(0.8686, abs=5e-5)
        assert round(metrics.macro.precision, 2) == 0.82
        assert round(metrics.weighted.precision, 2) == 0.87
        assert metrics.per_label['football'].f1 == pytest.approx(2 * 0.93 * 0.95 / 1.88)

    def test_from_confusion(self):
        labels = LabelSet(('a', 'b', 'c'))
        metrics = Metrics.from_confusion(np.array([[3, 1, 0], [0, 2, 0], [0, 0, 0]]), labels)

        assert metrics.per_label['a'].precision == 1.0
        assert metrics.per_label['a'].recall == 0.75
        assert metrics.per_label['b'].precision == pytest.approx(2 / 3)
        assert metrics.per_label['c'].f1 == 0.0
        assert metrics.accuracy == pytest.approx(5 / 6)
        assert metrics.macro.precision == pytest.approx((1 + 2 / 3) / 2)

    def test_identities_on_random_confusions(self):
        rng = np.random.default_rng(41)
        for _ in range(25):
            confusion = rng.integers(0, 20, size=(len(LABELS), len(LABELS)))
            confusion[rng.integers(0, len(LABELS))] = 0
            metrics = Metrics.from_confusion(confusion)
            supported = [s for s in metrics.per_label.values() if s.support > 0]

            assert metrics.support == confusion.sum()
            assert metrics.macro.recall == pytest.approx(np.mean([s.recall for s in supported]))
            assert metrics.weighted.f1 == pytest.approx(
                sum(s.f1 * s.support for s in supported) / confusion.sum()
            )

    def test_from_predictions(self):
        truth = ['football', 'football', 'politics', 'music']
        guesses = ['football', 'politics', 'politics', 'football']
        metrics = Metrics.from_predictions(truth, guesses)
        football, politics = LABEL_SET.index('football'), LABEL_SET.index('politics')

        assert metrics.accuracy == 0.5
        assert metrics.confusion.shape == (len(LABELS), len(LABELS))
        assert metrics.confusion[football, politics] == 1
        assert metrics.per_label['politics'].precision == 0.5
        assert metrics.per_label['music'].recall == 0.0
        assert metrics.per_label['science'].support == 0
        assert metrics.per_label == Metrics.from_confusion(metrics.confusion).per_label

    def test_empty_confusion(self):
        metrics = Metrics.from_confusion(np.zeros((len(LABELS), len(LABELS)), dtype=int))
        assert metrics.support == 0
        assert metrics.macro.f1 == 0.0

    def test_table_rows(self):
        metrics = Metrics.from_confusion(np.eye(len(LABELS), dtype=int) * 2)
        rows = metrics.table_rows()
        assert [r['label'] for r in rows[-3:]] == ['accuracy', 'macro avg', 'weighted avg']
        assert rows[-3]['f1'] == 1.0

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            Metrics.from_scores(LABEL_SET, [1.0], [1.0], [1])


class TestEvaluate:
    """Test held-out evaluation."""

    def test_perfect(self):
        model = train_classifier(toy_examples())
        metrics = evaluate(model, toy_examples())

        assert metrics.accuracy == 1.0
        assert metrics.macro.precision == metrics.macro.recall == 1.0
        assert np.count_nonzero(metrics.confusion - np.diag(np.diag(metrics.confusion))) == 0

    def test_mistakes_land_off_diagonal(self):
        model = train_classifier(toy_examples())
        metrics = evaluate(model, [(["goal"], "politics"), (["vote"], "politics")])
        football, politics = LABEL_SET.index('football'), LABEL_SET.index('politics')

        assert metrics.confusion[politics, football] == 1
        assert metrics.confusion[politics, politics] == 1
        assert metrics.per_label['politics'].recall == 0.5

    def test_empty(self):
        with pytest.raises(EmptyTestSet):
            evaluate(train_classifier(toy_examples()), [])


class TestStratifiedSplit:
    """Test the per-label train/test split."""

    def _examples(self):
        return (
            [([f"f{i}"], "football") for i in range(10)]
            + [([f"m{i}"], "music") for i in range(3)]
            + [(["lone"], "science")]
        )

    def test_sizes(self):
        train, test = stratified_split(self._examples(), 0.2, seed=1)
        labels = [label for _, label in test]

        assert labels.count("football") == 2
        assert labels.count("music") == 1
        assert labels.count("science") == 0
        assert len(train) + len(test) == 14

    def test_keeps_a_training_example(self):
        train, test = stratified_split([(["a"], "music"), (["b"], "music")], 0.9, seed=0)
        assert len(train) == 1 and len(test) == 1

    def test_deterministic(self):
        assert stratified_split(self._examples(), 0.3, seed=5) == stratified_split(self._examples(), 0.3, seed=5)

    def test_partition_of_examples(self):
        examples = self._examples()
        train, test = stratified_split(examples, 0.5, seed=2)
        assert sorted(map(str, train + test)) == sorted(map(str, examples))


class TestLabelClusters:
    """Test cluster labels."""

    def _partition(self):
        return Partition.from_groups([[0, 1, 2], [3, 4], [5, 6]])

    def test_plurality(self):
        page_labels = {0: 'music', 1: 'music', 2: 'movies', 3: 'football', 5: 'politics'}
        out = label_clusters(self._partition(), page_labels, [], None)
        assert out == {0: 'music', 1: 'football', 2: 'politics'}

    def test_unlabeled_cluster_uses_classifier(self):
        model = train_classifier(toy_examples())
        docs = [ClusterDoc(1, {'goal': 2, 'match': 1, 'stadium': 1})]
        out = label_clusters(self._partition(), {0: 'music', 5: 'politics'}, docs, model)
        assert out[1] == 'football'

    def test_tie_decided_by_classifier(self):
        model = train_classifier(toy_examples())
        partition = Partition.from_groups([[0, 1]])
        page_labels = {0: 'football', 1: 'politics'}

        assert label_clusters(partition, page_labels, [ClusterDoc(0, {'vote': 3})], model) == {0: 'politics'}
        assert label_clusters(partition, page_labels, [ClusterDoc(0, {'goal': 3})], model) == {0: 'football'}

    def test_tie_without_model_takes_label_order(self):
        partition = Partition.from_groups([[0, 1]])
        assert label_clusters(partition, {0: 'politics', 1: 'sports'}, [], None) == {0: 'sports'}

    def test_filtered_clusters_skipped(self):
        partition = Partition.from_groups([[0, 1, 2], [3]], min_cluster_size=2)
        assert label_clusters(partition, {0: 'music'}, [], None) == {0: 'music'}

    def test_unlabelable(self):
        with pytest.raises(UnlabelableCluster):
            label_clusters(self._partition(), {0: 'music', 3: 'music'}, [], train_classifier(toy_examples()))
