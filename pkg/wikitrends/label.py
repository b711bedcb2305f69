"""
Label - Rule labeling, a bag-of-words classifier and evaluation metrics
Uses: text, graph, core.rule_checks

Pages are labeled first by rules (a title parenthetical such as
"(album)", or a conjunction of summary keywords). Rule-labeled pages train
a bag-of-words classifier (naive Bayes by default, or a linear SVM) that
labels the rest; a cluster takes the plurality label of its pages.
"""

import logging
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from sklearn.feature_extraction import DictVectorizer
from sklearn.metrics import accuracy_score, confusion_matrix, precision_recall_fscore_support
from sklearn.model_selection import train_test_split
from sklearn.naive_bayes import MultinomialNB
from sklearn.svm import LinearSVC

from wikitrends_core import asset_io
from wikitrends_core.errors import (
    EmptyTestSet, EmptyTrainingSet, InconsistentInputs, SingleClassWarning, UnlabelableCluster,
)
from wikitrends_core.rule_checks import ValidationResult

from .graph import Partition
from .text import ClusterDoc

logger = logging.getLogger(__name__)

LABELS = (
    'football', 'sports', 'politics', 'movies', 'music',
    'conflicts', 'religion', 'science', 'videogames',
)

_PARENTHETICAL_RE = re.compile(r"\(([^()]*)\)\s*$")

Example = Tuple[List[str], str]


@dataclass(frozen=True)
class LabelSet:
    """Ordered labels; the order fixes confusion-matrix axes and tie-breaks."""
    labels: Tuple[str, ...] = LABELS

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"labels must be unique: {self.labels}")

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        return self.labels.index(label)


LABEL_SET = LabelSet()


# ============================================================================
# RULES
# ============================================================================

@dataclass(frozen=True)
class KeywordRule:
    """Fires when every keyword occurs as a whole word or phrase in the summary."""
    label: str
    keywords: Tuple[str, ...]

    def matches(self, text: str) -> bool:
        return all(re.search(r"(?<!\w)" + re.escape(k) + r"(?!\w)", text) for k in self.keywords)


@dataclass
class LabelRules:
    title_patterns: Dict[str, str] = field(default_factory=dict)
    keyword_sets: List[KeywordRule] = field(default_factory=list)

    def check(self, label_set: LabelSet = LABEL_SET) -> ValidationResult:
        errors = []
        for pattern, label in self.title_patterns.items():
            if label not in label_set:
                errors.append(f"title pattern '{pattern}' targets unknown label '{label}'")
        for i, rule in enumerate(self.keyword_sets):
            if rule.label not in label_set:
                errors.append(f"keyword set {i} targets unknown label '{rule.label}'")
            if not rule.keywords:
                errors.append(f"keyword set {i} ({rule.label}) is empty")
        return ValidationResult(errors)

    @classmethod
    def from_dict(cls, data: Mapping, label_set: LabelSet = LABEL_SET) -> 'LabelRules':
        patterns = data.get('title_patterns') or {}
        sets = data.get('keyword_sets') or []
        if not isinstance(patterns, dict) or not isinstance(sets, list):
            ValidationResult.fail(
                "title_patterns must be a mapping and keyword_sets a list"
            ).raise_for_errors("rules")
        rules = cls(
            title_patterns={str(p).strip().lower(): str(l) for p, l in patterns.items()},
            keyword_sets=[
                KeywordRule(
                    label=str(entry.get('label')),
                    keywords=tuple(str(k).strip().lower() for k in entry.get('keywords') or []),
                )
                for entry in sets
            ],
        )
        rules.check(label_set).raise_for_errors("rules")
        return rules


def load_rules(path: Union[str, Path], label_set: LabelSet = LABEL_SET) -> LabelRules:
    data = yaml.safe_load(asset_io.read_file(path)) or {}
    return LabelRules.from_dict(data, label_set)


def rule_label(title: str, summary: Optional[str], rules: LabelRules) -> Optional[str]:
    """Title parenthetical first, then the first matching keyword set.

    The parenthetical alone decides, so pages without a summary still match it.
    """
    match = _PARENTHETICAL_RE.search(title.replace('_', ' '))
    if match:
        label = rules.title_patterns.get(match.group(1).strip().lower())
        if label:
            return label
    text = (summary or "").lower()
    for rule in rules.keyword_sets:
        if rule.matches(text):
            return rule.label
    return None


# ============================================================================
# CLASSIFIERS
# ============================================================================

class Classifier:
    """Bag-of-words classifier over a fixed label set.

    Subclasses implement ``fit`` and ``scores``. Scores come in label-set
    order, with -inf for labels absent from the training data; ``predict``
    takes the first maximum, so ties go to the earlier label.
    """

    kind = ""

    def __init__(self, label_set: LabelSet = LABEL_SET):
        self.label_set = label_set
        self._vectorizer: Optional[DictVectorizer] = None
        self.present: Tuple[str, ...] = ()

    def fit(self, labeled: Sequence[Example]) -> 'Classifier':
        raise NotImplementedError

    def scores(self, tokens: Sequence[str]) -> Dict[str, float]:
        raise NotImplementedError

    def predict(self, tokens: Sequence[str]) -> str:
        label, _ = predict(self, tokens)
        return label

    @property
    def vocabulary(self) -> Dict[str, int]:
        return dict(self._vectorizer.vocabulary_) if self._vectorizer is not None else {}

    def _features(self, labeled: Sequence[Example]):
        """Validate ``labeled`` and return the count matrix and label column."""
        if not labeled:
            raise EmptyTrainingSet("no labeled examples to train on")
        unknown = sorted({label for _, label in labeled if label not in self.label_set})
        if unknown:
            raise InconsistentInputs(f"training labels outside the label set: {unknown}")
        self._vectorizer = DictVectorizer()
        X = self._vectorizer.fit_transform([Counter(tokens) for tokens, _ in labeled])
        if X.shape[1] == 0:
            raise EmptyTrainingSet("training examples hold no tokens")
        y = [label for _, label in labeled]
        self.present = tuple(label for label in self.label_set if label in set(y))
        if len(self.present) == 1:
            warnings.warn(f"training set holds a single label ({self.present[0]})", SingleClassWarning)
        return X, y

    def _transform(self, tokens: Sequence[str]):
        if self._vectorizer is None:
            raise RuntimeError(f"{type(self).__name__} is not fitted")
        # unseen tokens are dropped by the vectorizer
        return self._vectorizer.transform([Counter(tokens)])

    def _spread(self, classes: Sequence[str], values: Sequence[float]) -> Dict[str, float]:
        out = {label: -np.inf for label in self.label_set}
        for label, value in zip(classes, values):
            out[str(label)] = float(value)
        return out


class NaiveBayesClassifier(Classifier):
    """Multinomial naive Bayes with additive smoothing."""

    kind = "naive_bayes"

    def __init__(self, smoothing: float = 1.0, label_set: LabelSet = LABEL_SET):
        super().__init__(label_set)
        if smoothing < 0:
            raise ValueError("smoothing must be >= 0")
        self.smoothing = smoothing
        self._model = MultinomialNB(alpha=smoothing, force_alpha=True)

    def fit(self, labeled: Sequence[Example]) -> 'NaiveBayesClassifier':
        X, y = self._features(labeled)
        with np.errstate(divide='ignore', invalid='ignore'):
            self._model.fit(X, y)
        return self

    def _rows(self) -> List[int]:
        return [self.label_set.index(str(c)) for c in self._model.classes_]

    @property
    def log_prior(self) -> np.ndarray:
        out = np.full(len(self.label_set), -np.inf)
        out[self._rows()] = self._model.class_log_prior_
        return out

    @property
    def log_likelihood(self) -> np.ndarray:
        out = np.full((len(self.label_set), self._model.feature_log_prob_.shape[1]), -np.inf)
        out[self._rows()] = self._model.feature_log_prob_
        return out

    def scores(self, tokens: Sequence[str]) -> Dict[str, float]:
        with np.errstate(divide='ignore', invalid='ignore'):
            joint = self._model.predict_joint_log_proba(self._transform(tokens))[0]
        return self._spread(self._model.classes_, joint)


class LinearSvmClassifier(Classifier):
    """One-vs-rest linear SVM; scores are decision-function margins."""

    kind = "linear_svm"

    def __init__(self, smoothing: float = 1.0, label_set: LabelSet = LABEL_SET, C: float = 1.0):
        super().__init__(label_set)
        self._model = LinearSVC(C=C, dual=True, max_iter=10000, random_state=0)

    def fit(self, labeled: Sequence[Example]) -> 'LinearSvmClassifier':
        X, y = self._features(labeled)
        if len(self.present) > 1:
            self._model.fit(X, y)
        return self

    def scores(self, tokens: Sequence[str]) -> Dict[str, float]:
        if len(self.present) == 1:
            return self._spread(self.present, [0.0])
        margin = self._model.decision_function(self._transform(tokens))[0]
        classes = self._model.classes_
        if len(classes) == 2:
            margin = [-float(margin), float(margin)]
        return self._spread(classes, margin)


CLASSIFIERS: Dict[str, type] = {
    NaiveBayesClassifier.kind: NaiveBayesClassifier,
    LinearSvmClassifier.kind: LinearSvmClassifier,
}


def make_classifier(kind: str = "naive_bayes", smoothing: float = 1.0,
                    label_set: LabelSet = LABEL_SET) -> Classifier:
    try:
        factory = CLASSIFIERS[kind]
    except KeyError:
        raise ValueError(f"unknown classifier kind '{kind}' (known: {sorted(CLASSIFIERS)})") from None
    return factory(smoothing=smoothing, label_set=label_set)


def train_classifier(
    labeled: Sequence[Example],
    smoothing: float = 1.0,
    label_set: LabelSet = LABEL_SET,
    kind: str = "naive_bayes",
) -> Classifier:
    """Fit a classifier of ``kind`` on ``(tokens, label)`` examples."""
    return make_classifier(kind, smoothing, label_set).fit(labeled)


def predict(model: Classifier, tokens: Sequence[str]) -> Tuple[str, Dict[str, float]]:
    """Best label and per-label scores. When every score is -inf (possible
    without smoothing) the choice falls back to the token-free scores."""
    scores = model.scores(tokens)
    ranked = np.array([scores[label] for label in model.label_set])
    if np.all(np.isneginf(ranked)):
        fallback = model.scores([])
        ranked = np.array([fallback[label] for label in model.label_set])
    return model.label_set.labels[int(np.argmax(ranked))], scores


# ============================================================================
# METRICS
# ============================================================================

@dataclass
class LabelScores:
    precision: float
    recall: float
    f1: float
    support: int


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class Metrics:
    """Confusion matrix ``C[true][pred]`` plus per-label and aggregate scores."""
    label_set: LabelSet
    per_label: Dict[str, LabelScores]
    accuracy: Optional[float]
    macro: LabelScores
    weighted: LabelScores
    confusion: Optional[np.ndarray] = None

    @property
    def support(self) -> int:
        return sum(s.support for s in self.per_label.values())

    @classmethod
    def from_scores(
        cls,
        label_set: LabelSet,
        precision: Sequence[float],
        recall: Sequence[float],
        support: Sequence[int],
        f1: Optional[Sequence[float]] = None,
        accuracy: Optional[float] = None,
        confusion: Optional[np.ndarray] = None,
    ) -> 'Metrics':
        """Aggregate per-label scores given in ``label_set`` order.

        Macro averages cover labels with support > 0; weighted averages are
        support-weighted.
        """
        if not len(precision) == len(recall) == len(support) == len(label_set):
            raise ValueError("one precision, recall and support per label is required")
        f1 = list(f1) if f1 is not None else [_f1(p, r) for p, r in zip(precision, recall)]
        per_label = {
            label: LabelScores(float(precision[i]), float(recall[i]), float(f1[i]), int(support[i]))
            for i, label in enumerate(label_set)
        }
        supported = [s for s in per_label.values() if s.support > 0]
        total = sum(s.support for s in supported)

        def macro_of(attr: str) -> float:
            return float(np.mean([getattr(s, attr) for s in supported])) if supported else 0.0

        def weighted_of(attr: str) -> float:
            return sum(getattr(s, attr) * s.support for s in supported) / total if total else 0.0

        return cls(
            label_set=label_set,
            per_label=per_label,
            accuracy=accuracy,
            macro=LabelScores(macro_of('precision'), macro_of('recall'), macro_of('f1'), total),
            weighted=LabelScores(weighted_of('precision'), weighted_of('recall'), weighted_of('f1'), total),
            confusion=confusion,
        )

    @classmethod
    def from_predictions(
        cls,
        truth: Sequence[str],
        guesses: Sequence[str],
        label_set: LabelSet = LABEL_SET,
    ) -> 'Metrics':
        labels = list(label_set)
        precision, recall, f1, support = precision_recall_fscore_support(
            truth, guesses, labels=labels, zero_division=0,
        )
        return cls.from_scores(
            label_set, precision, recall, support, f1=f1,
            accuracy=float(accuracy_score(truth, guesses)),
            confusion=confusion_matrix(truth, guesses, labels=labels),
        )

    @classmethod
    def from_confusion(cls, confusion: np.ndarray, label_set: LabelSet = LABEL_SET) -> 'Metrics':
        confusion = np.asarray(confusion, dtype=np.int64)
        if confusion.shape != (len(label_set), len(label_set)):
            raise ValueError(f"confusion matrix must be {len(label_set)}x{len(label_set)}")
        rows, cols = np.nonzero(confusion)
        counts = confusion[rows, cols]
        if not counts.size:
            zeros = [0.0] * len(label_set)
            return cls.from_scores(label_set, zeros, zeros, [0] * len(label_set),
                                   accuracy=0.0, confusion=confusion)
        truth = [label_set.labels[i] for i in np.repeat(rows, counts)]
        guesses = [label_set.labels[j] for j in np.repeat(cols, counts)]
        return cls.from_predictions(truth, guesses, label_set)

    def table_rows(self) -> List[Dict[str, object]]:
        """Rows for the Precision/Recall/F1/Support table."""
        rows: List[Dict[str, object]] = [
            {'label': label, 'precision': s.precision, 'recall': s.recall, 'f1': s.f1, 'support': s.support}
            for label, s in self.per_label.items()
        ]
        if self.accuracy is not None:
            rows.append({'label': 'accuracy', 'precision': '', 'recall': '',
                         'f1': self.accuracy, 'support': self.support})
        for name, s in (('macro avg', self.macro), ('weighted avg', self.weighted)):
            rows.append({'label': name, 'precision': s.precision, 'recall': s.recall,
                         'f1': s.f1, 'support': s.support})
        return rows


def evaluate(model: Classifier, test: Sequence[Example]) -> Metrics:
    if not test:
        raise EmptyTestSet("no test examples")
    truth = [label for _, label in test]
    outside = sorted(set(truth) - set(model.label_set))
    if outside:
        raise InconsistentInputs(f"test labels outside the label set: {outside}")
    guesses = [model.predict(tokens) for tokens, _ in test]
    return Metrics.from_predictions(truth, guesses, model.label_set)


def stratified_split(
    examples: Sequence[Example],
    test_fraction: float = 0.2,
    seed: int = 0,
    label_set: LabelSet = LABEL_SET,
) -> Tuple[List[Example], List[Example]]:
    """Per-label split; ``round(test_fraction * n)`` of each label go to test,
    always leaving at least one training example per label."""
    state = np.random.RandomState(seed % 2 ** 32)
    test_ids = set()
    for label in label_set:
        ids = [i for i, (_, l) in enumerate(examples) if l == label]
        n_test = min(int(test_fraction * len(ids) + 0.5), len(ids) - 1)
        if n_test < 1:
            continue
        _, held_out = train_test_split(ids, test_size=n_test, random_state=state)
        test_ids.update(held_out)
    train = [ex for i, ex in enumerate(examples) if i not in test_ids]
    test = [ex for i, ex in enumerate(examples) if i in test_ids]
    return train, test


# ============================================================================
# CLUSTER LABELS
# ============================================================================

def label_clusters(
    partition: Partition,
    page_labels: Mapping[int, str],
    cluster_docs: Sequence[ClusterDoc],
    model: Optional[Classifier],
) -> Dict[int, str]:
    """Plurality of member labels; the classifier on the cluster document
    breaks ties and covers clusters without labeled pages."""
    docs = {doc.cluster_id: doc for doc in cluster_docs}
    out: Dict[int, str] = {}
    for cluster_id in partition.kept_clusters():
        votes = Counter(page_labels[p] for p in partition.members(cluster_id) if p in page_labels)
        doc = docs.get(cluster_id)
        tokens = doc.tokens() if doc is not None else []
        if votes:
            top = max(votes.values())
            tied = [label for label, n in votes.items() if n == top]
            if len(tied) == 1:
                out[cluster_id] = tied[0]
                continue
            order = LABEL_SET if model is None else model.label_set
            tied.sort(key=order.index)
            if model is not None and tokens:
                _, scores = predict(model, tokens)
                out[cluster_id] = max(tied, key=lambda label: (scores[label], -order.index(label)))
            else:
                out[cluster_id] = tied[0]
            continue
        if model is None or not tokens:
            raise UnlabelableCluster(f"cluster {cluster_id} has no labeled pages and no text")
        out[cluster_id], _ = predict(model, tokens)
    return out
