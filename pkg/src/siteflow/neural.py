"""Minimal fully connected network engine with analytic gradients and Adam.

A :class:`NetworkBundle` is the shared architecture behind every learned
controller: a two-layer feature branch digests the history/forecast part of
the observation into a 12-wide feature vector, which is concatenated with the
17 directly relevant slots and pushed through a two-layer 128-wide trunk.
A value head and a policy head read the trunk output; the policy head's
hidden layer uses tanh, everything else relu, and there is no normalization
inside the network.  A learned per-dimension ``logstd`` vector parameterizes
the Gaussian action noise.

All math is float64 numpy.  ``forward_cached``/``backward`` give exact
reverse-mode gradients for every parameter; ``AdamState`` applies standard
bias-corrected Adam updates.

Parameter files are a small versioned flat format: magic, version, a JSON
header listing array names/shapes plus free-form metadata, then the raw
arrays in header order as little-endian float64, C-contiguous.
"""

from __future__ import annotations

import json
import struct

import numpy as np

RELU, TANH, LINEAR = "relu", "tanh", "linear"

_MAGIC = b"SFLW"
_VERSION = 1


def _init_weights(n_in, n_out, activation, rng):
    # He-uniform for relu fan-in, Xavier-uniform otherwise
    if activation == RELU:
        limit = np.sqrt(6.0 / n_in)
    else:
        limit = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-limit, limit, size=(n_in, n_out))


class Dense:
    __slots__ = ("w", "b", "activation")

    def __init__(self, n_in, n_out, activation, rng):
        self.w = _init_weights(n_in, n_out, activation, rng)
        self.b = np.zeros(n_out)
        self.activation = activation

    def forward(self, x):
        z = x @ self.w + self.b
        if self.activation == RELU:
            return np.maximum(z, 0.0)
        if self.activation == TANH:
            return np.tanh(z)
        return z

    def forward_cached(self, x):
        z = x @ self.w + self.b
        if self.activation == RELU:
            h = np.maximum(z, 0.0)
        elif self.activation == TANH:
            h = np.tanh(z)
        else:
            h = z
        return h, (x, z, h)

    def backward(self, cache, dh):
        x, z, h = cache
        if self.activation == RELU:
            dz = dh * (z > 0.0)
        elif self.activation == TANH:
            dz = dh * (1.0 - h * h)
        else:
            dz = dh
        dw = x.T @ dz
        db = dz.sum(axis=0)
        dx = dz @ self.w.T
        return dw, db, dx


class NetworkBundle:
    """Feature branch + trunk + value/policy heads + learned logstd."""

    def __init__(self, action_dim, obs_dim=59, indirect_slots=(17, 59),
                 branch_hidden=64, feature_dim=12, trunk_width=128,
                 head_hidden=64, rng=None):
        if rng is None:
            rng = np.random.default_rng(0)
        if indirect_slots[1] != obs_dim:
            raise ValueError("indirect slots must form the tail of the "
                             "observation")
        self.action_dim = int(action_dim)
        self.obs_dim = int(obs_dim)
        self.split_at = int(indirect_slots[0])
        n_ind = indirect_slots[1] - indirect_slots[0]
        n_dir = obs_dim - n_ind
        self.n_direct = n_dir
        self.dims = dict(obs_dim=obs_dim, indirect_slots=tuple(indirect_slots),
                         branch_hidden=branch_hidden, feature_dim=feature_dim,
                         trunk_width=trunk_width, head_hidden=head_hidden,
                         action_dim=self.action_dim)
        self.branch = [Dense(n_ind, branch_hidden, RELU, rng),
                       Dense(branch_hidden, feature_dim, RELU, rng)]
        self.trunk = [Dense(feature_dim + n_dir, trunk_width, RELU, rng),
                      Dense(trunk_width, trunk_width, RELU, rng)]
        self.value = [Dense(trunk_width, head_hidden, RELU, rng),
                      Dense(head_hidden, 1, LINEAR, rng)]
        self.policy = [Dense(trunk_width, head_hidden, TANH, rng),
                       Dense(head_hidden, self.action_dim, LINEAR, rng)]
        self.logstd = np.zeros(self.action_dim)
        self._feature_dim = feature_dim

    # --- forward/backward ---

    def _split(self, obs):
        obs = np.atleast_2d(obs)
        return obs[:, self.split_at:], obs[:, :self.split_at]

    def forward(self, obs):
        """Policy mean and value estimate; obs is (obs_dim,) or (B, obs_dim)."""
        single = np.ndim(obs) == 1
        ind, direct = self._split(obs)
        h = ind
        for layer in self.branch:
            h = layer.forward(h)
        h = np.concatenate([h, direct], axis=1)
        for layer in self.trunk:
            h = layer.forward(h)
        v = h
        for layer in self.value:
            v = layer.forward(v)
        mean = h
        for layer in self.policy:
            mean = layer.forward(mean)
        if single:
            return mean[0], float(v[0, 0])
        return mean, v[:, 0]

    def forward_cached(self, obs):
        obs = np.atleast_2d(obs)
        ind, direct = self._split(obs)
        caches = {"branch": [], "trunk": [], "value": [], "policy": []}
        h = ind
        for layer in self.branch:
            h, c = layer.forward_cached(h)
            caches["branch"].append(c)
        concat = np.concatenate([h, direct], axis=1)
        caches["concat"] = concat
        h = concat
        for layer in self.trunk:
            h, c = layer.forward_cached(h)
            caches["trunk"].append(c)
        v = h
        for layer in self.value:
            v, c = layer.forward_cached(v)
            caches["value"].append(c)
        mean = h
        for layer in self.policy:
            mean, c = layer.forward_cached(mean)
            caches["policy"].append(c)
        return mean, v[:, 0], caches

    def backward(self, caches, d_mean, d_value):
        """Gradients of a scalar loss given d(loss)/d(mean) and /d(value).

        d_mean is (B, action_dim); d_value is (B,).  Returns a name->array
        dict matching :meth:`parameters` (logstd excluded: its gradient does
        not flow through the network).
        """
        grads = {}

        def back_segment(name, layers, dh):
            for i in reversed(range(len(layers))):
                dw, db, dh = layers[i].backward(caches[name][i], dh)
                grads[f"{name}{i}/w"] = dw
                grads[f"{name}{i}/b"] = db
            return dh

        d_trunk_out = back_segment("policy", self.policy, d_mean)
        d_trunk_out = d_trunk_out + back_segment(
            "value", self.value, d_value[:, None])
        d_concat = back_segment("trunk", self.trunk, d_trunk_out)
        back_segment("branch", self.branch, d_concat[:, :self._feature_dim])
        return grads

    # --- parameter bookkeeping ---

    def parameters(self) -> dict:
        out = {}
        for name, layers in (("branch", self.branch), ("trunk", self.trunk),
                             ("value", self.value), ("policy", self.policy)):
            for i, layer in enumerate(layers):
                out[f"{name}{i}/w"] = layer.w
                out[f"{name}{i}/b"] = layer.b
        out["logstd"] = self.logstd
        return out

    def arrays(self) -> dict:
        return {k: v.copy() for k, v in self.parameters().items()}

    def load_arrays(self, arrays: dict) -> None:
        params = self.parameters()
        for name, value in arrays.items():
            if params[name].shape != value.shape:
                raise ValueError(f"shape mismatch for {name}")
            params[name][...] = value

    def check_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.parameters().values())


class AdamState:
    """Standard Adam with bias correction, keyed by parameter name."""

    def __init__(self, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {}
        self.v = {}

    def update(self, params: dict, grads: dict) -> None:
        for g in grads.values():
            if not np.all(np.isfinite(g)):
                raise FloatingPointError("non-finite gradient in Adam update")
        self.step_count += 1
        t = self.step_count
        for name, g in grads.items():
            p = params[name]
            m = self.m.setdefault(name, np.zeros_like(p))
            v = self.v.setdefault(name, np.zeros_like(p))
            m += (1 - self.beta1) * (g - m)
            v += (1 - self.beta2) * (g * g - v)
            m_hat = m / (1 - self.beta1 ** t)
            v_hat = v / (1 - self.beta2 ** t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def adam_step(params: dict, grads: dict, state: AdamState) -> None:
    state.update(params, grads)


def gaussian_logp(a, mean, logstd):
    """Log density of a under N(mean, exp(logstd)^2), summed over dims."""
    a = np.asarray(a, dtype=float)
    var = np.exp(2.0 * logstd)
    q = (a - mean) ** 2 / (2.0 * var)
    per_dim = -0.5 * np.log(2.0 * np.pi) - logstd - q
    return per_dim.sum(axis=-1)


def gaussian_entropy(logstd) -> float:
    d = logstd.shape[0]
    return float(logstd.sum() + 0.5 * d * (1.0 + np.log(2.0 * np.pi)))


# --- flat array files ---

def write_flat_arrays(path, meta: dict, arrays: dict) -> None:
    names = list(arrays.keys())
    header = {"meta": meta,
              "arrays": [[n, list(arrays[n].shape)] for n in names]}
    blob = json.dumps(header, sort_keys=True,
                      separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        for name in names:
            fh.write(np.ascontiguousarray(
                arrays[name], dtype="<f8").tobytes())


def read_flat_arrays(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a parameter file: {path}")
        version, blob_len = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ValueError(f"unsupported parameter file version {version}")
        header = json.loads(fh.read(blob_len).decode("utf-8"))
        arrays = {}
        for name, shape in header["arrays"]:
            n = int(np.prod(shape)) if shape else 1
            buf = fh.read(8 * n)
            arrays[name] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return header["meta"], arrays
