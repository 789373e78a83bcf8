"""Binary classifiers h: X -> [0, 1] explained by the engines.

Four small model families (logistic, decision tree, naive bayes, one-hidden
-layer MLP) implemented directly on numpy so that parameters persist as
plain JSON, training is seed-deterministic, and the differentiable kinds
expose exact analytic gradients.  Scores are probabilities; the predicted
label is 1 iff score > psi (strict).
"""

from __future__ import annotations

import json

import numpy as np
from scipy.optimize import minimize

from .dataset import Dataset
from .errors import PredictorError

FD_STEP = 1e-4  # central-difference step (scaled space) for non-smooth kinds


class Predictor:
    kind = "base"
    differentiable = False

    def __init__(self, psi: float = 0.5, schema_hash: str = "", encoding: str = "onehot"):
        self.psi = float(psi)
        self.schema_hash = schema_hash
        self.encoding = encoding
        self.holdout_accuracy: float | None = None

    # -- scoring -----------------------------------------------------------

    def scores(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def score(self, x: np.ndarray) -> float:
        return float(self.scores(np.asarray(x, dtype=float)[None, :])[0])

    def labels(self, X: np.ndarray) -> np.ndarray:
        return (self.scores(X) > self.psi).astype(int)

    def label(self, x: np.ndarray) -> int:
        return int(self.score(x) > self.psi)

    # -- gradients -----------------------------------------------------------

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """d score / d x; central finite differences for non-smooth kinds."""
        return self.gradients(np.asarray(x, dtype=float)[None, :])[0]

    def gradients(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        grad = np.zeros_like(X)
        for j in range(X.shape[1]):
            hi = X.copy()
            lo = X.copy()
            hi[:, j] += FD_STEP
            lo[:, j] -= FD_STEP
            grad[:, j] = (self.scores(hi) - self.scores(lo)) / (2 * FD_STEP)
        return grad

    # -- persistence -----------------------------------------------------------

    def params_dict(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "schema_hash": self.schema_hash,
            "psi": self.psi,
            "encoding": self.encoding,
            "holdout_accuracy": self.holdout_accuracy,
            "params": self.params_dict(),
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LogisticModel(Predictor):
    kind = "logistic"
    differentiable = True

    def __init__(self, w: np.ndarray, b: float, **kw):
        super().__init__(**kw)
        self.w = np.asarray(w, dtype=float)
        self.b = float(b)

    def scores(self, X):
        return _sigmoid(np.atleast_2d(X) @ self.w + self.b)

    def gradients(self, X):
        s = self.scores(X)
        return (s * (1.0 - s))[:, None] * self.w[None, :]

    def params_dict(self):
        return {"w": self.w.tolist(), "b": self.b}

    @classmethod
    def fit(cls, X, y, l2: float = 1e-3, **kw) -> "LogisticModel":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        d = X.shape[1]

        def nll(theta):
            w, b = theta[:d], theta[d]
            z = X @ w + b
            # log(1 + e^z) - y*z, numerically stable
            loss = np.logaddexp(0.0, z) - y * z
            return loss.mean() + 0.5 * l2 * (w @ w)

        def grad(theta):
            w, b = theta[:d], theta[d]
            s = _sigmoid(X @ w + b)
            r = s - y
            return np.concatenate([X.T @ r / len(y) + l2 * w, [r.mean()]])

        res = minimize(nll, np.zeros(d + 1), jac=grad, method="L-BFGS-B")
        return cls(res.x[:d], res.x[d], **kw)


class MlpModel(Predictor):
    """One tanh hidden layer with a sigmoid output, full-batch gradient descent."""

    kind = "mlp"
    differentiable = True

    def __init__(self, W1, b1, w2, b2, **kw):
        super().__init__(**kw)
        self.W1 = np.asarray(W1, dtype=float)
        self.b1 = np.asarray(b1, dtype=float)
        self.w2 = np.asarray(w2, dtype=float)
        self.b2 = float(b2)

    def _hidden(self, X):
        return np.tanh(np.atleast_2d(X) @ self.W1 + self.b1)

    def scores(self, X):
        return _sigmoid(self._hidden(X) @ self.w2 + self.b2)

    def gradients(self, X):
        H = self._hidden(X)
        s = _sigmoid(H @ self.w2 + self.b2)
        # ds/dx = s(1-s) * W1 @ ((1 - h^2) * w2)
        inner = (1.0 - H**2) * self.w2[None, :]
        return (s * (1.0 - s))[:, None] * (inner @ self.W1.T)

    def params_dict(self):
        return {
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2,
        }

    @classmethod
    def fit(cls, X, y, hidden: int = 16, lr: float = 2.0, epochs: int = 4000,
            l2: float = 1e-4, seed: int = 0, **kw) -> "MlpModel":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, d = X.shape
        rng = np.random.default_rng(seed)
        W1 = rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, hidden))
        b1 = np.zeros(hidden)
        w2 = rng.normal(0.0, 1.0 / np.sqrt(hidden), size=hidden)
        b2 = 0.0
        for _ in range(epochs):
            H = np.tanh(X @ W1 + b1)
            s = _sigmoid(H @ w2 + b2)
            r = (s - y) / n
            gw2 = H.T @ r + l2 * w2
            gb2 = r.sum()
            back = (r[:, None] * w2[None, :]) * (1.0 - H**2)
            gW1 = X.T @ back + l2 * W1
            gb1 = back.sum(axis=0)
            W1 -= lr * gW1
            b1 -= lr * gb1
            w2 -= lr * gw2
            b2 -= lr * gb2
        return cls(W1, b1, w2, b2, **kw)


class TreeModel(Predictor):
    """CART with gini splits; leaf scores are Laplace-smoothed (+1/+2)."""

    kind = "tree"

    def __init__(self, feature, threshold, left, right, value, **kw):
        super().__init__(**kw)
        self.feature = np.asarray(feature, dtype=int)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=int)
        self.right = np.asarray(right, dtype=int)
        self.value = np.asarray(value, dtype=float)

    def scores(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        node = np.zeros(X.shape[0], dtype=int)
        while True:
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            idx = np.flatnonzero(internal)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
        return self.value[node]

    def params_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def fit(cls, X, y, max_depth: int = 4, min_leaf: int = 5, **kw) -> "TreeModel":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        nodes: list[dict] = []

        def leaf(idx) -> int:
            nodes.append({"f": -1, "t": 0.0, "l": -1, "r": -1,
                          "v": (y[idx].sum() + 1.0) / (len(idx) + 2.0)})
            return len(nodes) - 1

        def best_split(idx):
            ysub = y[idx]
            n = len(idx)
            total_pos = ysub.sum()
            best = (None, None, 0.0)
            parent_gini = 1.0 - ((total_pos / n) ** 2 + ((n - total_pos) / n) ** 2)
            for j in range(X.shape[1]):
                order = np.argsort(X[idx, j], kind="stable")
                xs = X[idx, j][order]
                ys = ysub[order]
                pos_prefix = np.cumsum(ys)
                distinct = np.flatnonzero(np.diff(xs) > 0)
                for cut in distinct:
                    nl = cut + 1
                    nr = n - nl
                    if nl < min_leaf or nr < min_leaf:
                        continue
                    pl = pos_prefix[cut]
                    pr = total_pos - pl
                    gl = 1.0 - ((pl / nl) ** 2 + ((nl - pl) / nl) ** 2)
                    gr = 1.0 - ((pr / nr) ** 2 + ((nr - pr) / nr) ** 2)
                    gain = parent_gini - (nl * gl + nr * gr) / n
                    if gain > best[2] + 1e-12:
                        best = (j, 0.5 * (xs[cut] + xs[cut + 1]), gain)
            return best

        def grow(idx, depth) -> int:
            if depth >= max_depth or len(idx) < 2 * min_leaf or len(np.unique(y[idx])) == 1:
                return leaf(idx)
            j, thr, gain = best_split(idx)
            if j is None or gain <= 0:
                return leaf(idx)
            node_id = len(nodes)
            nodes.append({"f": j, "t": thr, "l": -1, "r": -1, "v": 0.0})
            mask = X[idx, j] <= thr
            nodes[node_id]["l"] = grow(idx[mask], depth + 1)
            nodes[node_id]["r"] = grow(idx[~mask], depth + 1)
            return node_id

        grow(np.arange(len(y)), 0)
        return cls(
            [n["f"] for n in nodes],
            [n["t"] for n in nodes],
            [n["l"] for n in nodes],
            [n["r"] for n in nodes],
            [n["v"] for n in nodes],
            **kw,
        )


class NaiveBayesModel(Predictor):
    """Gaussian likelihoods per coordinate, multinomial over one-hot blocks.

    ``blocks`` lists (offset, width); width 1 coordinates are Gaussian,
    wider blocks are Laplace-smoothed categorical distributions.  Block
    log-likelihoods are the linear form x_block . log(p): identical to the
    level likelihood on exact one-hot inputs and a smooth interpolation on
    relaxed vectors, which keeps batch scoring a single matrix product.
    """

    kind = "naive-bayes"
    VAR_FLOOR = 1e-6

    def __init__(self, blocks, priors, means, variances, level_probs, **kw):
        super().__init__(**kw)
        self.blocks = [tuple(b) for b in blocks]
        self.priors = np.asarray(priors, dtype=float)
        self.means = np.asarray(means, dtype=float)          # (2, n_gauss)
        self.variances = np.asarray(variances, dtype=float)  # (2, n_gauss)
        self.level_probs = [np.asarray(p, dtype=float) for p in level_probs]  # per block, (2, width)
        self._gauss_cols = np.array([off for off, w in self.blocks if w == 1], dtype=int)
        width = max((off + w for off, w in self.blocks), default=0)
        self._block_logp = np.zeros((2, width))
        k = 0
        for off, w in self.blocks:
            if w == 1:
                continue
            self._block_logp[:, off : off + w] = np.log(self.level_probs[k])
            k += 1

    def scores(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        log_post = np.log(np.maximum(self.priors, 1e-12))[None, :].repeat(X.shape[0], axis=0)
        if self._gauss_cols.size:
            V = X[:, self._gauss_cols]
            for c in (0, 1):
                mu = self.means[c][None, :]
                var = self.variances[c][None, :]
                ll = -0.5 * (np.log(2 * np.pi * var) + (V - mu) ** 2 / var)
                log_post[:, c] += ll.sum(axis=1)
        log_post += np.clip(X, 0.0, None) @ self._block_logp.T
        log_post -= log_post.max(axis=1, keepdims=True)
        post = np.exp(log_post)
        return post[:, 1] / post.sum(axis=1)

    def params_dict(self):
        return {
            "blocks": [list(b) for b in self.blocks],
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "level_probs": [p.tolist() for p in self.level_probs],
        }

    @classmethod
    def fit(cls, X, y, blocks, **kw) -> "NaiveBayesModel":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        priors = np.array([(y == 0).mean(), (y == 1).mean()])
        gcols = [off for off, w in blocks if w == 1]
        means = np.zeros((2, len(gcols)))
        variances = np.ones((2, len(gcols)))
        for c in (0, 1):
            sub = X[y == c][:, gcols] if gcols else np.zeros((0, 0))
            if sub.size:
                means[c] = sub.mean(axis=0)
                variances[c] = np.maximum(sub.var(axis=0), cls.VAR_FLOOR)
        level_probs = []
        for off, w in blocks:
            if w == 1:
                continue
            lvl = np.argmax(X[:, off : off + w], axis=1)
            probs = np.zeros((2, w))
            for c in (0, 1):
                counts = np.bincount(lvl[y == c], minlength=w).astype(float)
                probs[c] = (counts + 1.0) / (counts.sum() + w)
            level_probs.append(probs)
        return cls(blocks, priors, means, variances, level_probs, **kw)


MODEL_KINDS = {m.kind: m for m in (LogisticModel, TreeModel, NaiveBayesModel, MlpModel)}


def train(dataset: Dataset, kind: str, hyperparams: dict | None = None, seed: int = 0) -> Predictor:
    """Train one model kind on a dataset; deterministic given the seed.

    The holdout (20%, seed-shuffled) accuracy is recorded on the model.
    """
    if kind not in MODEL_KINDS:
        raise PredictorError(f"unknown model kind {kind!r}")
    hp = dict(hyperparams or {})
    y = dataset.labels
    if len(np.unique(y)) < 2:
        raise PredictorError("training data contains a single class")
    X = dataset.X
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(y))
    n_train = max(int(round(0.8 * len(y))), 1)
    tr, ho = order[:n_train], order[n_train:]
    if len(np.unique(y[tr])) < 2:  # tiny datasets: fall back to training on everything
        tr, ho = order, order

    common = {
        "psi": dataset.schema.psi,
        "schema_hash": dataset.schema.hash(),
        "encoding": dataset.encoder.mode,
    }
    if kind == "logistic":
        model = LogisticModel.fit(X[tr], y[tr], l2=hp.get("l2", 1e-3), **common)
    elif kind == "tree":
        model = TreeModel.fit(
            X[tr], y[tr], max_depth=hp.get("max_depth", 4), min_leaf=hp.get("min_leaf", 5), **common
        )
    elif kind == "naive-bayes":
        blocks = [(s.offset, s.width) for s in dataset.encoder.slots]
        model = NaiveBayesModel.fit(X[tr], y[tr], blocks=blocks, **common)
    else:
        model = MlpModel.fit(
            X[tr],
            y[tr],
            hidden=hp.get("hidden", 16),
            lr=hp.get("lr", 2.0),
            epochs=hp.get("epochs", 4000),
            l2=hp.get("l2", 1e-4),
            seed=seed,
            **common,
        )
    model.holdout_accuracy = float((model.labels(X[ho]) == y[ho]).mean()) if len(ho) else None
    return model


def model_from_dict(doc: dict) -> Predictor:
    kind = doc.get("kind")
    if kind not in MODEL_KINDS:
        raise PredictorError(f"unknown model kind {kind!r}")
    p = doc["params"]
    common = {
        "psi": doc.get("psi", 0.5),
        "schema_hash": doc.get("schema_hash", ""),
        "encoding": doc.get("encoding", "onehot"),
    }
    if kind == "logistic":
        model = LogisticModel(p["w"], p["b"], **common)
    elif kind == "tree":
        model = TreeModel(p["feature"], p["threshold"], p["left"], p["right"], p["value"], **common)
    elif kind == "naive-bayes":
        model = NaiveBayesModel(
            p["blocks"], p["priors"], p["means"], p["variances"], p["level_probs"], **common
        )
    else:
        model = MlpModel(p["W1"], p["b1"], p["w2"], p["b2"], **common)
    model.holdout_accuracy = doc.get("holdout_accuracy")
    return model


def load_model(path, schema=None) -> Predictor:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    model = model_from_dict(doc)
    if schema is not None and model.schema_hash and model.schema_hash != schema.hash():
        raise PredictorError("model was trained against a different schema (hash mismatch)")
    return model
