"""Single-hidden-layer sigmoid perceptron trained by per-instance backprop.

An instance's weight multiplies its output error signal, so every gradient
contribution it makes is scaled by that weight.
"""

import numpy as np

from .. import kernels
from .base import Model, default_hidden, normalize_rows
from .preprocess import Preprocessor


class MLPModel(Model):
    kind = "mlp"

    def __init__(self, spec, schema, fingerprint, prep, W1, b1, W2, b2):
        super().__init__(spec, schema, fingerprint)
        self.prep = prep
        self.W1, self.b1, self.W2, self.b2 = W1, b1, W2, b2

    @classmethod
    def fit(cls, spec, d, w, trajectory=None):
        """Train on ``d``.

        ``trajectory``, if given, is called after every epoch with
        ``(epoch, W1, b1, W2, b2)``.
        """
        hp = spec.hyper
        if w is not None:
            keep = w > 0
            X, y, wk = d.X[keep], d.y[keep], w[keep]
        else:
            X, y, wk = d.X, d.y, None
        prep = Preprocessor.fit(d.schema, X)
        Z = prep.encoded(X)
        Y = d.n_classes
        T = np.zeros((len(y), Y))
        T[np.arange(len(y)), y] = 1.0
        n_in = Z.shape[1]
        H = hp["hidden"] or default_hidden(n_in, Y)
        rng = np.random.default_rng(spec.seed)
        W1 = rng.uniform(-0.5, 0.5, size=(H, n_in))
        b1 = rng.uniform(-0.5, 0.5, size=H)
        W2 = rng.uniform(-0.5, 0.5, size=(Y, H))
        b2 = rng.uniform(-0.5, 0.5, size=Y)
        V1, vb1 = np.zeros_like(W1), np.zeros_like(b1)
        V2, vb2 = np.zeros_like(W2), np.zeros_like(b2)
        use_w = wk is not None
        w_arr = np.ascontiguousarray(wk, dtype=np.float64) if use_w else None
        lr, mom = float(hp["learning_rate"]), float(hp["momentum"])
        for epoch in range(hp["epochs"]):
            order = rng.permutation(len(y)).astype(np.int64)
            kernels.mlp_epoch(Z, T, w_arr, use_w, order, W1, b1, W2, b2, V1, vb1, V2, vb2, lr, mom)
            if trajectory is not None:
                trajectory(epoch, W1, b1, W2, b2)
        return cls(spec, d.schema, d.fingerprint(), prep, W1, b1, W2, b2)

    def outputs(self, X) -> np.ndarray:
        """Raw sigmoid output activations."""
        Z = self.prep.encoded(self._check_X(X))
        return kernels.mlp_forward(Z, self.W1, self.b1, self.W2, self.b2)

    def _scores(self, X):
        O = kernels.mlp_forward(self.prep.encoded(X), self.W1, self.b1, self.W2, self.b2)
        return normalize_rows(O)

    def state_dict(self):
        return {
            "prep": self.prep.state(),
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "W2": self.W2.tolist(),
            "b2": self.b2.tolist(),
        }

    @classmethod
    def from_state(cls, spec, schema, fingerprint, s):
        arr = lambda k: np.ascontiguousarray(s[k], dtype=np.float64)  # noqa: E731
        W1 = arr("W1").reshape(len(s["b1"]), -1)
        return cls(spec, schema, fingerprint, Preprocessor.from_state(s["prep"]),
                   W1, arr("b1"), arr("W2").reshape(len(s["b2"]), -1), arr("b2"))


def instance_gradient(x, target, weight, W1, b1, W2, b2):
    """Gradient of ``weight * 0.5 * ||target - output||^2`` w.r.t. all parameters."""
    return kernels.mlp_instance_gradient(
        np.asarray(x, dtype=np.float64), np.asarray(target, dtype=np.float64), float(weight),
        W1, b1, W2, b2,
    )
