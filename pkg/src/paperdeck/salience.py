"""Salience labeling and the MLP regressor that predicts it.

The label of a paper sentence is its maximum cosine similarity with any
reference slide sentence.  The regressor is a three-hidden-layer MLP with
logistic-sigmoid activations and a linear output, trained with plain
minibatch SGD on mean squared error.  Training is fully deterministic for
a fixed seed: Glorot-uniform init and the per-epoch row shuffle both draw
from one seeded generator, so identical data + config + seed reproduce a
byte-identical model file.
"""

from __future__ import annotations

import json

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .embedding import cosine
from .errors import EmptyReference, EmptyTrainingSet, SchemaMismatch
from .features import FeatureMatrix, FeatureSchema

MODEL_FORMAT_VERSION = 1


def label_salience(paper_vecs, slide_vecs) -> np.ndarray:
    """Per-sentence label: max cosine similarity against the slide vectors.

    Computed as the literal double loop so tests can compare against an
    independent brute-force oracle with identical floating-point steps.
    """
    slide_vecs = list(slide_vecs)
    if len(slide_vecs) == 0:
        raise EmptyReference("no slide sentences to label against")
    values = np.empty(len(paper_vecs), dtype=np.float64)
    for i, pv in enumerate(paper_vecs):
        best = -1.0
        for sv in slide_vecs:
            sim = cosine(pv, sv)
            if sim > best:
                best = sim
        values[i] = best
    return values


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _coerce(X):
    if isinstance(X, FeatureMatrix):
        return X.values, X.schema
    return np.asarray(X, dtype=np.float64), None


class MlpSalienceRegressor(BaseEstimator, RegressorMixin):
    """Three-hidden-layer sigmoid MLP with a linear output neuron.

    Parameters mirror the training recipe: SGD, learning rate 0.004,
    batch size 64, 50 epochs.  Hidden widths are configurable; depth and
    activations are fixed.
    """

    def __init__(
        self,
        hidden_sizes=(128, 64, 32),
        learning_rate=0.004,
        batch_size=64,
        epochs=50,
        seed=0,
    ):
        self.hidden_sizes = hidden_sizes
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    # -- training ---------------------------------------------------------

    def fit(self, X, y, schema: FeatureSchema | None = None):
        X, inferred = _coerce(X)
        if schema is None:
            schema = inferred
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if X.ndim != 2 or len(X) == 0:
            raise EmptyTrainingSet("need at least one training row")
        if len(y) != len(X):
            raise SchemaMismatch(f"{len(X)} rows but {len(y)} labels")
        if len(self.hidden_sizes) != 3:
            raise ValueError("exactly 3 hidden layers are supported")
        if min(self.learning_rate, self.batch_size, self.epochs) <= 0 or min(
            self.hidden_sizes
        ) <= 0:
            raise ValueError("learning_rate, batch_size, epochs, hidden_sizes "
                             "must all be positive")

        n, d = X.shape
        means = X.mean(axis=0)
        stds = X.std(axis=0)
        # constant columns can show a tiny nonzero std from cancellation
        # noise; both cases must pass through unscaled
        tiny = 1e-12 * np.maximum(1.0, np.abs(means))
        stds[stds <= tiny] = 1.0
        Z = (X - means) / stds

        rng = np.random.default_rng(self.seed)
        sizes = [d, *self.hidden_sizes, 1]
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out, dtype=np.float64))

        y_col = y.reshape(-1, 1)
        loss_history = []
        for _ in range(self.epochs):
            perm = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = perm[start : start + self.batch_size]
                self._sgd_step(Z[idx], y_col[idx], weights, biases)
            preds = self._forward(Z, weights, biases)
            loss_history.append(float(np.mean((preds - y_col) ** 2)))

        self.schema_ = schema
        self.n_features_in_ = d
        self.feature_means_ = means
        self.feature_stds_ = stds
        self.weights_ = weights
        self.biases_ = biases
        self.loss_history_ = loss_history
        return self

    def _sgd_step(self, Zb, yb, weights, biases):
        batch = len(Zb)
        activations = [Zb]
        for W, b in zip(weights[:-1], biases[:-1]):
            activations.append(_sigmoid(activations[-1] @ W + b))
        out = activations[-1] @ weights[-1] + biases[-1]

        delta = 2.0 * (out - yb) / batch  # d(MSE)/d(out)
        grads_w = [None] * len(weights)
        grads_b = [None] * len(biases)
        for layer in range(len(weights) - 1, -1, -1):
            grads_w[layer] = activations[layer].T @ delta
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                upstream = delta @ weights[layer].T
                a = activations[layer]
                delta = upstream * a * (1.0 - a)
        for layer, (gw, gb) in enumerate(zip(grads_w, grads_b)):
            weights[layer] -= self.learning_rate * gw
            biases[layer] -= self.learning_rate * gb

    @staticmethod
    def _forward(Z, weights, biases):
        a = Z
        for W, b in zip(weights[:-1], biases[:-1]):
            a = _sigmoid(a @ W + b)
        return a @ weights[-1] + biases[-1]

    # -- inference --------------------------------------------------------

    def predict(self, X, schema: FeatureSchema | None = None) -> np.ndarray:
        X, inferred = _coerce(X)
        if schema is None:
            schema = inferred
        if schema is not None and self.schema_ is not None and schema != self.schema_:
            raise SchemaMismatch("feature schema differs from the model's")
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise SchemaMismatch(
                f"expected {self.n_features_in_} features, got "
                f"{X.shape[1] if X.ndim == 2 else X.shape}"
            )
        Z = (X - self.feature_means_) / self.feature_stds_
        return self._forward(Z, self.weights_, self.biases_).reshape(-1)

    def squared_error(self, row, label) -> float:
        pred = self.predict(np.asarray(row, dtype=np.float64).reshape(1, -1))[0]
        return float((pred - label) ** 2)


def train_on_pairs(matrices, labels, **params) -> MlpSalienceRegressor:
    """Stack per-pair feature matrices and labels, then fit one model.

    All matrices must share one schema; raises SchemaMismatch otherwise.
    """
    matrices = list(matrices)
    labels = list(labels)
    if not matrices or len(matrices) != len(labels):
        raise EmptyTrainingSet("need matching, non-empty matrices and labels")
    schema = matrices[0].schema
    for m in matrices[1:]:
        if m.schema != schema:
            raise SchemaMismatch("training pairs use different feature schemas")
    X = np.vstack([m.values for m in matrices])
    y = np.concatenate([np.asarray(l, dtype=np.float64).reshape(-1) for l in labels])
    model = MlpSalienceRegressor(**params)
    return model.fit(X, y, schema=schema)


def gradient_check(model: MlpSalienceRegressor, row, label, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Validates the backprop used by ``fit`` on a single squared-error term.
    """
    row = np.asarray(row, dtype=np.float64).reshape(1, -1)
    z = (row - model.feature_means_) / model.feature_stds_

    # analytic gradient via the same backprop as training (batch of one,
    # loss (out - y)^2 so delta = 2 (out - y))
    weights = model.weights_
    biases = model.biases_
    activations = [z]
    for W, b in zip(weights[:-1], biases[:-1]):
        activations.append(_sigmoid(activations[-1] @ W + b))
    out = activations[-1] @ weights[-1] + biases[-1]
    delta = 2.0 * (out - label)
    grads_w = [None] * len(weights)
    grads_b = [None] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grads_w[layer] = activations[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            upstream = delta @ weights[layer].T
            a = activations[layer]
            delta = upstream * a * (1.0 - a)

    def loss() -> float:
        pred = MlpSalienceRegressor._forward(z, weights, biases)
        return float((pred[0, 0] - label) ** 2)

    worst = 0.0
    for layer in range(len(weights)):
        for params, grads in ((weights[layer], grads_w[layer]),
                              (biases[layer], grads_b[layer])):
            gflat = np.asarray(grads).reshape(-1)
            for k in range(params.size):
                orig = params.flat[k]
                params.flat[k] = orig + h
                up = loss()
                params.flat[k] = orig - h
                down = loss()
                params.flat[k] = orig
                numeric = (up - down) / (2.0 * h)
                analytic = gflat[k]
                rel = abs(analytic - numeric) / max(
                    1e-8, abs(analytic) + abs(numeric)
                )
                worst = max(worst, rel)
    return worst


# -- model file ------------------------------------------------------------

def save_model(model: MlpSalienceRegressor, path) -> None:
    """Serialize a fitted model with full float round-trip precision."""
    schema = model.schema_
    if schema is None:
        schema = FeatureSchema(
            scalar_names=tuple(f"x{i}" for i in range(model.n_features_in_)),
            embedding_dim=0,
        )
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "schema": schema.to_dict(),
        "normalizer": {
            "means": [float(v) for v in model.feature_means_],
            "stds": [float(v) for v in model.feature_stds_],
        },
        "layers": [
            {
                "rows": int(W.shape[0]),
                "cols": int(W.shape[1]),
                "weights": [float(v) for v in W.reshape(-1)],
                "bias": [float(v) for v in b],
            }
            for W, b in zip(model.weights_, model.biases_)
        ],
        "hidden_activation": "sigmoid",
        "hyperparameters": {
            "hidden_sizes": list(model.hidden_sizes),
            "learning_rate": model.learning_rate,
            "batch_size": model.batch_size,
            "epochs": model.epochs,
            "seed": model.seed,
        },
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=1)
        handle.write("\n")


def load_model(path) -> MlpSalienceRegressor:
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise SchemaMismatch(
            f"unsupported model format_version {doc.get('format_version')!r}"
        )
    hp = doc.get("hyperparameters", {})
    model = MlpSalienceRegressor(
        hidden_sizes=tuple(hp.get("hidden_sizes", (128, 64, 32))),
        learning_rate=hp.get("learning_rate", 0.004),
        batch_size=hp.get("batch_size", 64),
        epochs=hp.get("epochs", 50),
        seed=hp.get("seed", 0),
    )
    model.schema_ = FeatureSchema.from_dict(doc["schema"])
    model.feature_means_ = np.array(doc["normalizer"]["means"], dtype=np.float64)
    model.feature_stds_ = np.array(doc["normalizer"]["stds"], dtype=np.float64)
    weights, biases = [], []
    for layer in doc["layers"]:
        W = np.array(layer["weights"], dtype=np.float64).reshape(
            layer["rows"], layer["cols"]
        )
        weights.append(W)
        biases.append(np.array(layer["bias"], dtype=np.float64))
    model.weights_ = weights
    model.biases_ = biases
    model.n_features_in_ = weights[0].shape[0]
    model.loss_history_ = []
    return model
