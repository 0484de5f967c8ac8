"""Correlation statistics, the many-fold evaluation protocol, significance
testing, algorithm ranking, and runtime normalization."""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .data import make_folds
from .errors import (
    EmptyGroup,
    LengthMismatch,
    NonPositiveBaseline,
    TooFewSamples,
    ZeroVariance,
)


def _paired(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise LengthMismatch(f"{a.size} vs {b.size}")
    if a.size < 2:
        raise LengthMismatch("need at least 2 samples")
    return a, b


def pcc(a, b):
    """Pearson correlation coefficient."""
    a, b = _paired(a, b)
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt((da * da).sum() * (db * db).sum())
    if denom == 0.0:
        raise ZeroVariance("constant input")
    return float((da * db).sum() / denom)


def _ranks(x):
    """Average ranks (1-based) with ties sharing their mean rank."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def scc(a, b):
    """Spearman rank correlation (Pearson over average-tie ranks)."""
    a, b = _paired(a, b)
    return pcc(_ranks(a), _ranks(b))


def rmse(a, b):
    """Root mean square error."""
    a, b = _paired(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


@dataclass
class EvalReport:
    median_pcc: float
    median_scc: float
    median_rmse: float
    folds: list  # one {"pcc", "scc", "rmse", "n_train", "n_test"} per fold
    n_folds: int
    seed: int
    config: dict = field(default_factory=dict)

    def to_json(self, path=None):
        blob = json.dumps(
            {
                "schema_version": 1,
                "median_pcc": self.median_pcc,
                "median_scc": self.median_scc,
                "median_rmse": self.median_rmse,
                "n_folds": self.n_folds,
                "seed": self.seed,
                "config": self.config,
                "folds": self.folds,
            },
            indent=2,
            sort_keys=True,
        )
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(blob + "\n")
        return blob


def cross_validate(
    records,
    histograms,
    targets,
    n_folds=1000,
    seed=0,
    regressor_factory=None,
    config=None,
):
    """Repeated random 80/20 evaluation honoring the content-viewpoint rule.

    ``records`` are the evaluation manifest records; ``histograms`` and
    ``targets`` map record keys to feature vectors and subjective scores.
    Each fold trains a fresh regressor on the 80% side and reports
    pcc/scc/rmse on the 20% side; medians across folds summarize.
    """
    from .regression import QualityRegressor

    if regressor_factory is None:
        regressor_factory = QualityRegressor
    keys = [r.key for r in records]
    folds = make_folds(set(keys), records, n_folds, seed)
    results = []
    for train_ids, test_ids in folds:
        train_keys = sorted(train_ids)
        test_keys = sorted(test_ids)
        X_tr = np.array([histograms[k] for k in train_keys])
        y_tr = np.array([targets[k] for k in train_keys])
        X_te = np.array([histograms[k] for k in test_keys])
        y_te = np.array([targets[k] for k in test_keys])
        model = regressor_factory().fit(X_tr, y_tr)
        pred = model.predict(X_te)
        results.append(
            {
                "pcc": pcc(pred, y_te),
                "scc": scc(pred, y_te),
                "rmse": rmse(pred, y_te),
                "n_train": len(train_keys),
                "n_test": len(test_keys),
            }
        )
    return EvalReport(
        median_pcc=float(np.median([r["pcc"] for r in results])),
        median_scc=float(np.median([r["scc"] for r in results])),
        median_rmse=float(np.median([r["rmse"] for r in results])),
        folds=results,
        n_folds=n_folds,
        seed=seed,
        config=config or {},
    )


@dataclass
class SignificanceMatrix:
    names: list
    entries: np.ndarray  # values in {-1, 0, 1}, antisymmetric
    alpha: float


def significance_matrix(samples, alpha=0.05, equal_var=False):
    """Pairwise two-sample t-test over per-fold correlation samples.

    Entry (i, j) is 1 when metric i's mean is significantly greater than
    metric j's at level ``alpha``, -1 when smaller, 0 otherwise. Welch's
    unequal-variance test by default.
    """
    names = list(samples)
    arrays = []
    for name in names:
        arr = np.asarray(samples[name], dtype=np.float64)
        if arr.size < 2:
            raise TooFewSamples(f"{name}: need at least 2 samples")
        arrays.append(arr)
    n = len(names)
    entries = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            _, p = sps.ttest_ind(arrays[i], arrays[j], equal_var=equal_var)
            if np.isfinite(p) and p < alpha:
                sign = 1 if arrays[i].mean() > arrays[j].mean() else -1
                entries[i, j] = sign
                entries[j, i] = -sign
    return SignificanceMatrix(names=names, entries=entries, alpha=alpha)


def rank_algorithms(scores, higher_is_better=True):
    """Order algorithm ids by mean score, best first; ties lexicographic."""
    means = {}
    for alg, vals in scores.items():
        vals = np.asarray(vals, dtype=np.float64)
        if vals.size == 0:
            raise EmptyGroup(f"no scores for algorithm {alg!r}")
        means[alg] = float(vals.mean())
    sign = -1.0 if higher_is_better else 1.0
    return sorted(means, key=lambda a: (sign * means[a], a))


def normalized_time(t_metric, t_psnr):
    """Metric runtime divided by the PSNR runtime on the same input."""
    if t_psnr <= 0:
        raise NonPositiveBaseline("PSNR baseline time must be > 0")
    return t_metric / t_psnr


def read_scores_file(path):
    """Parse a ``metric_name, record_key, score`` delimited text file."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            metric, key, score = (part.strip() for part in line.split(",", 2))
            out.setdefault(metric, {})[key] = float(score)
    return out
