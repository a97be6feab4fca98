"""Native binary classifiers over sparse term features.

Implements the classical algorithms used by the detection harness:
multinomial Naive Bayes, L2-regularized logistic regression, k-nearest
neighbors, CART decision trees, bagged random forests, and real (SAMME.R
style) AdaBoost over depth-1 stumps. Every model is deterministic for a
fixed seed, exposes a positive-class score in [0, 1], and serializes to
a JSON-compatible dict.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
import scipy.sparse as sp


class TrainingError(ValueError):
    """Raised on untrainable inputs (single class, bad hyperparameters)."""


def _validate_xy(x: sp.csr_matrix, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y).astype(int)
    if x.shape[0] != len(y):
        raise TrainingError("features and labels are not aligned")
    if len(np.unique(y)) < 2:
        raise TrainingError("training labels contain a single class")
    if not set(np.unique(y)) <= {0, 1}:
        raise TrainingError("labels must be binary (0/1)")
    return y


class BaseClassifier:
    """Shared fit/predict surface; subclasses implement _fit and score."""

    name = "base"

    def fit(self, x: sp.csr_matrix, y) -> "BaseClassifier":
        y = _validate_xy(x, y)
        self._fit(x.tocsr(), y)
        self.fitted_features = x.shape[1]
        return self

    def _fit(self, x: sp.csr_matrix, y: np.ndarray) -> None:
        raise NotImplementedError

    def predict_proba(self, x: sp.csr_matrix) -> np.ndarray:
        raise NotImplementedError

    def predict(self, x: sp.csr_matrix) -> np.ndarray:
        return (self.predict_proba(x) >= 0.5).astype(int)

    def _check(self, x: sp.csr_matrix) -> sp.csr_matrix:
        if not hasattr(self, "fitted_features"):
            raise TrainingError("model is not fitted")
        if x.shape[1] != self.fitted_features:
            raise TrainingError(
                f"feature width {x.shape[1]} does not match the "
                f"model's vocabulary ({self.fitted_features})"
            )
        return x.tocsr()

    def to_dict(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_dict(cls, payload: dict) -> "BaseClassifier":
        raise NotImplementedError


class MultinomialNaiveBayes(BaseClassifier):
    """Multinomial NB with Laplace smoothing alpha and optional fitted priors."""

    name = "naive_bayes"

    def __init__(self, alpha: float = 1.0, fit_prior: bool = True) -> None:
        if alpha < 0:
            raise TrainingError("alpha must be >= 0")
        self.alpha = float(alpha)
        self.fit_prior = bool(fit_prior)

    def _fit(self, x: sp.csr_matrix, y: np.ndarray) -> None:
        n_features = x.shape[1]
        self.log_prior = np.zeros(2)
        self.feature_log_prob = np.zeros((2, n_features))
        for cls in (0, 1):
            mask = y == cls
            if self.fit_prior:
                self.log_prior[cls] = math.log(mask.sum() / len(y))
            else:
                self.log_prior[cls] = math.log(0.5)
            counts = np.asarray(x[mask].sum(axis=0)).ravel() + self.alpha
            self.feature_log_prob[cls] = np.log(counts / counts.sum())

    def joint_log_likelihood(self, x: sp.csr_matrix) -> np.ndarray:
        x = self._check(x)
        return x @ self.feature_log_prob.T + self.log_prior

    def predict_proba(self, x: sp.csr_matrix) -> np.ndarray:
        jll = self.joint_log_likelihood(x)
        shift = jll.max(axis=1, keepdims=True)
        exp = np.exp(jll - shift)
        return exp[:, 1] / exp.sum(axis=1)

    def to_dict(self) -> dict:
        return {
            "type": self.name,
            "alpha": self.alpha,
            "fit_prior": self.fit_prior,
            "log_prior": self.log_prior.tolist(),
            "feature_log_prob": self.feature_log_prob.tolist(),
            "fitted_features": self.fitted_features,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "MultinomialNaiveBayes":
        model = cls(alpha=payload["alpha"], fit_prior=payload["fit_prior"])
        model.log_prior = np.asarray(payload["log_prior"])
        model.feature_log_prob = np.asarray(payload["feature_log_prob"])
        model.fitted_features = payload["fitted_features"]
        return model


class LogisticRegressionClassifier(BaseClassifier):
    """L2-regularized logistic regression fitted by full-batch gradient descent.

    Minimizes sum-i log(1 + exp(-y_i f(x_i))) + ||w||^2 / (2C) with an
    unpenalized intercept; the step size comes from the Lipschitz bound
    of the loss gradient, so no line search is needed.
    """

    name = "logistic_regression"

    def __init__(self, c: float = 1.0, max_iter: int = 2000, tol: float = 1e-8) -> None:
        if c <= 0:
            raise TrainingError("C must be > 0")
        self.c = float(c)
        self.max_iter = int(max_iter)
        self.tol = float(tol)

    def _fit(self, x: sp.csr_matrix, y: np.ndarray) -> None:
        n, d = x.shape
        signs = np.where(y == 1, 1.0, -1.0)
        w = np.zeros(d)
        b = 0.0
        lam = 1.0 / self.c
        # Lipschitz constant of the gradient: ||X||_F^2 / 4 + lambda
        lipschitz = 0.25 * (float(x.multiply(x).sum()) + n) + lam
        step = 1.0 / lipschitz
        prev_loss = np.inf
        for _ in range(self.max_iter):
            margin = signs * (x @ w + b)
            sigma = 1.0 / (1.0 + np.exp(np.clip(margin, -500, 500)))
            grad_w = -(x.T @ (signs * sigma)) + lam * w
            grad_b = -float(np.sum(signs * sigma))
            w -= step * grad_w
            b -= step * grad_b
            loss = float(np.sum(np.logaddexp(0.0, -margin))) + 0.5 * lam * float(w @ w)
            if abs(prev_loss - loss) < self.tol * max(1.0, abs(loss)):
                break
            prev_loss = loss
        self.weights = w
        self.intercept = b

    def decision_function(self, x: sp.csr_matrix) -> np.ndarray:
        x = self._check(x)
        return x @ self.weights + self.intercept

    def predict_proba(self, x: sp.csr_matrix) -> np.ndarray:
        z = self.decision_function(x)
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))

    def to_dict(self) -> dict:
        return {
            "type": self.name,
            "c": self.c,
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "fitted_features": self.fitted_features,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LogisticRegressionClassifier":
        model = cls(c=payload["c"])
        model.weights = np.asarray(payload["weights"])
        model.intercept = float(payload["intercept"])
        model.fitted_features = payload["fitted_features"]
        return model


class KNearestNeighbors(BaseClassifier):
    """Brute-force k-NN on euclidean distance; ties resolve to the negative class."""

    name = "knn"

    def __init__(self, n_neighbors: int = 5, weights: str = "uniform") -> None:
        if n_neighbors < 1:
            raise TrainingError("n_neighbors must be >= 1")
        if weights not in ("uniform", "distance"):
            raise TrainingError(f"unknown weighting {weights!r}")
        self.n_neighbors = int(n_neighbors)
        self.weights = weights

    def _fit(self, x: sp.csr_matrix, y: np.ndarray) -> None:
        self.train_x = x
        self.train_y = y
        self.train_sq = np.asarray(x.multiply(x).sum(axis=1)).ravel()

    def predict_proba(self, x: sp.csr_matrix) -> np.ndarray:
        x = self._check(x)
        k = min(self.n_neighbors, self.train_x.shape[0])
        query_sq = np.asarray(x.multiply(x).sum(axis=1)).ravel()
        out = np.empty(x.shape[0])
        for i in range(x.shape[0]):
            cross = np.asarray((self.train_x @ x.getrow(i).T).todense()).ravel()
            dist_sq = np.maximum(self.train_sq - 2.0 * cross + query_sq[i], 0.0)
            order = np.argsort(dist_sq, kind="mergesort")[:k]
            dists = np.sqrt(dist_sq[order])
            labels = self.train_y[order]
            if self.weights == "distance" and np.any(dists == 0.0):
                exact = labels[dists == 0.0]
                out[i] = float(np.mean(exact))
                continue
            if self.weights == "distance":
                w = 1.0 / dists
            else:
                w = np.ones_like(dists)
            out[i] = float(np.sum(w[labels == 1]) / np.sum(w))
        return out

    def predict(self, x: sp.csr_matrix) -> np.ndarray:
        # a perfectly split vote is a tie: resolve toward the negative class
        return (self.predict_proba(x) > 0.5).astype(int)

    def to_dict(self) -> dict:
        coo = self.train_x.tocoo()
        return {
            "type": self.name,
            "n_neighbors": self.n_neighbors,
            "weights": self.weights,
            "shape": list(self.train_x.shape),
            "rows": coo.row.tolist(),
            "cols": coo.col.tolist(),
            "data": coo.data.tolist(),
            "labels": self.train_y.tolist(),
            "fitted_features": self.fitted_features,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "KNearestNeighbors":
        model = cls(n_neighbors=payload["n_neighbors"], weights=payload["weights"])
        matrix = sp.coo_matrix(
            (payload["data"], (payload["rows"], payload["cols"])),
            shape=tuple(payload["shape"]),
        ).tocsr()
        model.train_x = matrix
        model.train_y = np.asarray(payload["labels"], dtype=int)
        model.train_sq = np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel()
        model.fitted_features = payload["fitted_features"]
        return model


def _impurity(pos: float, total: float, criterion: str) -> float:
    if total <= 0:
        return 0.0
    p = pos / total
    if criterion == "gini":
        return 2.0 * p * (1.0 - p)
    if p in (0.0, 1.0):
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


class DecisionTreeClassifier(BaseClassifier):
    """CART over dense column slices; supports best and random splitters."""

    name = "decision_tree"

    def __init__(
        self,
        criterion: str = "gini",
        splitter: str = "best",
        max_features: Optional[str] = None,
        max_depth: Optional[int] = None,
        min_samples_split: int = 2,
        seed: int = 0,
    ) -> None:
        if criterion not in ("gini", "entropy"):
            raise TrainingError(f"unknown criterion {criterion!r}")
        if splitter not in ("best", "random"):
            raise TrainingError(f"unknown splitter {splitter!r}")
        if max_features not in (None, "sqrt", "auto"):
            raise TrainingError(f"unknown max_features {max_features!r}")
        self.criterion = criterion
        self.splitter = splitter
        self.max_features = "sqrt" if max_features == "auto" else max_features
        self.max_depth = max_depth
        self.min_samples_split = int(min_samples_split)
        self.seed = int(seed)

    def _fit(self, x: sp.csr_matrix, y: np.ndarray) -> None:
        self._rng = np.random.default_rng(self.seed)
        dense = np.asarray(x.todense())
        self.tree = self._grow(dense, y, depth=0)

    def _candidate_features(self, n_features: int) -> np.ndarray:
        if self.max_features is None:
            return np.arange(n_features)
        k = max(1, int(math.sqrt(n_features)))
        return self._rng.choice(n_features, size=k, replace=False)

    def _best_split(self, x: np.ndarray, y: np.ndarray):
        n, _ = x.shape
        parent = _impurity(float(y.sum()), float(n), self.criterion)
        best = None  # (gain, feature, threshold)
        for j in self._candidate_features(x.shape[1]):
            column = x[:, j]
            lo, hi = column.min(), column.max()
            if lo == hi:
                continue
            if self.splitter == "random":
                thresholds = [self._rng.uniform(lo, hi)]
            else:
                values = np.unique(column)
                thresholds = (values[:-1] + values[1:]) / 2.0
            for threshold in thresholds:
                left = column <= threshold
                n_left = int(left.sum())
                if n_left == 0 or n_left == n:
                    continue
                l_imp = _impurity(float(y[left].sum()), float(n_left), self.criterion)
                r_imp = _impurity(float(y[~left].sum()), float(n - n_left), self.criterion)
                gain = parent - (n_left * l_imp + (n - n_left) * r_imp) / n
                if best is None or gain > best[0] + 1e-12:
                    best = (gain, int(j), float(threshold))
        return best

    def _grow(self, x: np.ndarray, y: np.ndarray, depth: int) -> dict:
        n = len(y)
        pos = float(y.sum())
        leaf = {"leaf": True, "p": pos / n}
        if (
            pos in (0.0, float(n))
            or n < self.min_samples_split
            or (self.max_depth is not None and depth >= self.max_depth)
        ):
            return leaf
        split = self._best_split(x, y)
        if split is None or split[0] <= 1e-12:
            return leaf
        _, feature, threshold = split
        mask = x[:, feature] <= threshold
        return {
            "leaf": False,
            "feature": feature,
            "threshold": threshold,
            "left": self._grow(x[mask], y[mask], depth + 1),
            "right": self._grow(x[~mask], y[~mask], depth + 1),
        }

    def predict_proba(self, x: sp.csr_matrix) -> np.ndarray:
        x = self._check(x)
        dense = np.asarray(x.todense())
        out = np.empty(dense.shape[0])
        for i in range(dense.shape[0]):
            node = self.tree
            while not node["leaf"]:
                if dense[i, node["feature"]] <= node["threshold"]:
                    node = node["left"]
                else:
                    node = node["right"]
            out[i] = node["p"]
        return out

    def to_dict(self) -> dict:
        return {
            "type": self.name,
            "criterion": self.criterion,
            "splitter": self.splitter,
            "max_features": self.max_features,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "seed": self.seed,
            "tree": self.tree,
            "fitted_features": self.fitted_features,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DecisionTreeClassifier":
        model = cls(
            criterion=payload["criterion"],
            splitter=payload["splitter"],
            max_features=payload["max_features"],
            max_depth=payload["max_depth"],
            min_samples_split=payload["min_samples_split"],
            seed=payload["seed"],
        )
        model.tree = payload["tree"]
        model.fitted_features = payload["fitted_features"]
        return model


class RandomForestClassifier(BaseClassifier):
    """Bagged CART trees with sqrt-feature subsampling and seeded bootstraps."""

    name = "random_forest"

    def __init__(
        self,
        n_estimators: int = 100,
        criterion: str = "gini",
        max_features: Optional[str] = "sqrt",
        seed: int = 0,
    ) -> None:
        if n_estimators < 1:
            raise TrainingError("n_estimators must be >= 1")
        self.n_estimators = int(n_estimators)
        self.criterion = criterion
        self.max_features = "sqrt" if max_features == "auto" else max_features
        self.seed = int(seed)

    def _fit(self, x: sp.csr_matrix, y: np.ndarray) -> None:
        rng = np.random.default_rng(self.seed)
        n = x.shape[0]
        self.trees: list[DecisionTreeClassifier] = []
        for _ in range(self.n_estimators):
            sample = rng.integers(0, n, size=n)
            tree = DecisionTreeClassifier(
                criterion=self.criterion,
                max_features=self.max_features or "sqrt",
                seed=int(rng.integers(0, 2**31 - 1)),
            )
            sub_y = y[sample]
            if len(np.unique(sub_y)) < 2:
                # degenerate bootstrap: record a constant stump
                tree.tree = {"leaf": True, "p": float(sub_y[0])}
                tree.fitted_features = x.shape[1]
            else:
                tree.fit(x[sample], sub_y)
            self.trees.append(tree)

    def predict_proba(self, x: sp.csr_matrix) -> np.ndarray:
        x = self._check(x)
        return np.mean([t.predict_proba(x) for t in self.trees], axis=0)

    def to_dict(self) -> dict:
        return {
            "type": self.name,
            "n_estimators": self.n_estimators,
            "criterion": self.criterion,
            "max_features": self.max_features,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
            "fitted_features": self.fitted_features,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RandomForestClassifier":
        model = cls(
            n_estimators=payload["n_estimators"],
            criterion=payload["criterion"],
            max_features=payload["max_features"],
            seed=payload["seed"],
        )
        model.trees = [DecisionTreeClassifier.from_dict(t) for t in payload["trees"]]
        model.fitted_features = payload["fitted_features"]
        return model


class AdaBoostClassifier(BaseClassifier):
    """Real boosting (SAMME.R form) over depth-1 decision stumps.

    Each stump contributes half the log-odds of its weighted leaf
    probability; the ensemble score is the sigmoid of twice the summed
    decision function.
    """

    name = "ada_boost"

    _CLIP = 1e-9

    def __init__(self, n_estimators: int = 200, seed: int = 0) -> None:
        if n_estimators < 1:
            raise TrainingError("n_estimators must be >= 1")
        self.n_estimators = int(n_estimators)
        self.seed = int(seed)

    def _fit_stump(self, x: np.ndarray, y: np.ndarray, w: np.ndarray) -> dict:
        total_pos = float(w[y == 1].sum())
        total = float(w.sum())
        best = None  # (score, feature, threshold)
        for j in range(x.shape[1]):
            column = x[:, j]
            values = np.unique(column)
            if len(values) < 2:
                continue
            order = np.argsort(column, kind="mergesort")
            sorted_w = w[order]
            sorted_wy = w[order] * (y[order] == 1)
            cum_w = np.cumsum(sorted_w)
            cum_wp = np.cumsum(sorted_wy)
            col_sorted = column[order]
            boundary = np.nonzero(col_sorted[:-1] != col_sorted[1:])[0]
            for idx in boundary:
                threshold = (col_sorted[idx] + col_sorted[idx + 1]) / 2.0
                w_left, wp_left = cum_w[idx], cum_wp[idx]
                w_right = total - w_left
                wp_right = total_pos - wp_left
                # weighted gini of the split
                def gini(wp, wt):
                    if wt <= 0:
                        return 0.0
                    p = wp / wt
                    return 2.0 * p * (1.0 - p)
                score = (w_left * gini(wp_left, w_left) + w_right * gini(wp_right, w_right)) / total
                if best is None or score < best[0] - 1e-15:
                    best = (score, int(j), float(threshold), wp_left / w_left, wp_right / w_right)
        if best is None:
            p = total_pos / total
            return {"feature": -1, "threshold": 0.0, "p_left": p, "p_right": p}
        _, feature, threshold, p_left, p_right = best
        return {"feature": feature, "threshold": threshold, "p_left": p_left, "p_right": p_right}

    def _stump_decision(self, stump: dict, x: np.ndarray) -> np.ndarray:
        if stump["feature"] < 0:
            p = np.full(x.shape[0], stump["p_left"])
        else:
            mask = x[:, stump["feature"]] <= stump["threshold"]
            p = np.where(mask, stump["p_left"], stump["p_right"])
        p = np.clip(p, self._CLIP, 1.0 - self._CLIP)
        return 0.5 * (np.log(p) - np.log1p(-p))

    def _fit(self, x: sp.csr_matrix, y: np.ndarray) -> None:
        dense = np.asarray(x.todense())
        n = dense.shape[0]
        signs = np.where(y == 1, 1.0, -1.0)
        w = np.full(n, 1.0 / n)
        self.stumps: list[dict] = []
        for _ in range(self.n_estimators):
            stump = self._fit_stump(dense, y, w)
            h = self._stump_decision(stump, dense)
            self.stumps.append(stump)
            w = w * np.exp(-signs * h)
            total = w.sum()
            if total <= 0 or not np.isfinite(total):
                break
            w /= total

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        return np.sum([self._stump_decision(s, x) for s in self.stumps], axis=0)

    def predict_proba(self, x: sp.csr_matrix) -> np.ndarray:
        x = self._check(x)
        dense = np.asarray(x.todense())
        f = self.decision_function(dense)
        return 1.0 / (1.0 + np.exp(-2.0 * np.clip(f, -250, 250)))

    def to_dict(self) -> dict:
        return {
            "type": self.name,
            "n_estimators": self.n_estimators,
            "seed": self.seed,
            "stumps": self.stumps,
            "fitted_features": self.fitted_features,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AdaBoostClassifier":
        model = cls(n_estimators=payload["n_estimators"], seed=payload["seed"])
        model.stumps = payload["stumps"]
        model.fitted_features = payload["fitted_features"]
        return model


MODEL_TYPES = {
    cls.name: cls
    for cls in (
        MultinomialNaiveBayes,
        LogisticRegressionClassifier,
        KNearestNeighbors,
        DecisionTreeClassifier,
        RandomForestClassifier,
        AdaBoostClassifier,
    )
}


def classifier_from_dict(payload: dict) -> BaseClassifier:
    try:
        cls = MODEL_TYPES[payload["type"]]
    except KeyError:
        raise TrainingError(f"unknown model type {payload.get('type')!r}") from None
    return cls.from_dict(payload)
