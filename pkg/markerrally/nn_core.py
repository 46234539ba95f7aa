"""Small dense networks: forward, reverse-mode gradients, Adam and MSE.

Parameters are float32 by default. ``MlpParams.astype(np.float64)``
gives a 64-bit shadow copy for numerical gradient checks.
"""

from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple
import weakref

import numpy as np

from markerrally import const
from markerrally.data.typing import Array
from markerrally.exceptions import ShapeMismatch, StaleCache
from markerrally.strings import MessagesBase

RELU = "relu"
TANH = "tanh"
LINEAR = "linear"
ACTIVATIONS = (RELU, TANH, LINEAR)


def _activate(name: str, z: Array) -> Array:
    if name == RELU:
        return np.maximum(z, 0)
    if name == TANH:
        return np.tanh(z)
    return z


def _activation_grad(name: str, z: Array, out: Array) -> Array:
    if name == RELU:
        return (z > 0).astype(z.dtype)
    if name == TANH:
        return 1 - out * out
    return np.ones_like(z)


class MlpParams:
    """Weights (out x in, row-major) and biases of a fully connected net.

    ``version`` increases whenever the parameters change in place, so a
    cache taken before an update can be recognized.
    """

    def __init__(
        self,
        layer_sizes: Sequence[int],
        activations: Sequence[str],
        weights: Sequence[Array],
        biases: Sequence[Array],
    ):
        self.layer_sizes = [int(n) for n in layer_sizes]
        self.activations = list(activations)
        if len(self.layer_sizes) < 2:
            raise ShapeMismatch(MessagesBase.activation_count.format(
                len(self.activations), 0))
        if len(self.activations) != len(self.layer_sizes) - 1:
            raise ShapeMismatch(MessagesBase.activation_count.format(
                len(self.activations), len(self.layer_sizes) - 1))
        for name in self.activations:
            if name not in ACTIVATIONS:
                raise ShapeMismatch(MessagesBase.unknown_activation.format(name))
        self.weights = [np.asarray(w) for w in weights]
        self.biases = [np.asarray(b) for b in biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_sizes[i + 1], self.layer_sizes[i])
            if w.shape != shape or b.shape != shape[:1]:
                raise ShapeMismatch(MessagesBase.shape_mismatch.format(
                    shape, w.shape))
        self.version = 0

    def __repr__(self):
        return "<MlpParams: {} {}>".format(
            "-".join(map(str, self.layer_sizes)), ",".join(self.activations))

    @property
    def dtype(self):
        return self.weights[0].dtype

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def arrays(self) -> List[Array]:
        """Weights then biases, in layer order; the arrays are live."""
        return self.weights + self.biases

    def copy(self) -> "MlpParams":
        return self.astype(self.dtype)

    def astype(self, dtype) -> "MlpParams":
        return MlpParams(
            self.layer_sizes,
            self.activations,
            [w.astype(dtype, copy=True) for w in self.weights],
            [b.astype(dtype, copy=True) for b in self.biases],
        )

    def load(self, other: "MlpParams") -> None:
        """Overwrite these parameters with ``other``'s (hard target sync)."""
        for mine, theirs in zip(self.arrays(), other.arrays()):
            mine[...] = theirs
        self.version += 1

    def blend(self, other: "MlpParams", tau: float) -> None:
        """Move toward ``other``: ``self = tau * other + (1 - tau) * self``."""
        for mine, theirs in zip(self.arrays(), other.arrays()):
            mine[...] = tau * theirs + (1 - tau) * mine
        self.version += 1

    def same_as(self, other: "MlpParams") -> bool:
        return all(
            np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays())
        )


class Cache(NamedTuple):
    """What backward() needs from a forward pass."""

    inputs: List[Array]  # input of each layer, 2-D
    preacts: List[Array]
    outputs: List[Array]
    owner: "weakref.ref[MlpParams]"
    version: int
    squeeze: bool


class Gradients(NamedTuple):
    weights: List[Array]
    biases: List[Array]
    input: Array

    def arrays(self) -> List[Array]:
        return self.weights + self.biases


def mlp_init(
    layer_sizes: Sequence[int],
    activations: Sequence[str],
    seed: int,
    dtype=np.float32,
) -> MlpParams:
    """He-uniform weights for relu layers, Xavier-uniform otherwise."""
    if len(activations) != len(layer_sizes) - 1:
        raise ShapeMismatch(MessagesBase.activation_count.format(
            len(activations), max(len(layer_sizes) - 1, 0)))
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out, name in zip(layer_sizes, layer_sizes[1:], activations):
        if name == RELU:
            limit = np.sqrt(6.0 / fan_in)
        else:
            limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(
            rng.uniform(-limit, limit, size=(fan_out, fan_in)).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))
    return MlpParams(layer_sizes, activations, weights, biases)


def forward(params: MlpParams, x) -> Tuple[Array, Cache]:
    """Run one input (1-D) or a batch (2-D, one row per sample)."""
    x = np.asarray(x, dtype=params.dtype)
    squeeze = x.ndim == 1
    a = x[None, :] if squeeze else x
    if a.ndim != 2 or a.shape[1] != params.layer_sizes[0]:
        raise ShapeMismatch(MessagesBase.shape_mismatch.format(
            params.layer_sizes[0], x.shape))
    inputs, preacts, outputs = [], [], []
    for w, b, name in zip(params.weights, params.biases, params.activations):
        inputs.append(a)
        z = a @ w.T + b
        a = _activate(name, z)
        preacts.append(z)
        outputs.append(a)
    cache = Cache(
        inputs, preacts, outputs, weakref.ref(params), params.version, squeeze)
    return (a[0] if squeeze else a), cache


def backward(params: MlpParams, cache: Cache, grad_output) -> Gradients:
    """Gradients of ``sum(output * grad_output)`` for all parameters and input."""
    if cache.owner() is not params or cache.version != params.version:
        raise StaleCache(MessagesBase.stale_cache)
    g = np.asarray(grad_output, dtype=params.dtype)
    if cache.squeeze:
        g = g[None, :]
    if g.shape != cache.outputs[-1].shape:
        raise ShapeMismatch(MessagesBase.shape_mismatch.format(
            cache.outputs[-1].shape, g.shape))
    grad_w: List[Optional[Array]] = [None] * params.n_layers
    grad_b: List[Optional[Array]] = [None] * params.n_layers
    for i in reversed(range(params.n_layers)):
        g = g * _activation_grad(
            params.activations[i], cache.preacts[i], cache.outputs[i])
        grad_w[i] = g.T @ cache.inputs[i]
        grad_b[i] = g.sum(axis=0)
        g = g @ params.weights[i]
    return Gradients(grad_w, grad_b, g[0] if cache.squeeze else g)


class AdamState:
    """Moments and step counter of the Adam optimizer for one network."""

    def __init__(
        self,
        params: MlpParams,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.first = [np.zeros_like(a) for a in params.arrays()]
        self.second = [np.zeros_like(a) for a in params.arrays()]

    def copy(self) -> "AdamState":
        twin = AdamState.__new__(AdamState)
        twin.__dict__.update(self.__dict__)
        twin.first = [m.copy() for m in self.first]
        twin.second = [v.copy() for v in self.second]
        return twin

    def to_arrays(self) -> Dict[str, Array]:
        """Flat mapping for ``numpy.savez``."""
        arrays = {"step": np.array(self.step)}
        for i, (m, v) in enumerate(zip(self.first, self.second)):
            arrays["m{}".format(i)] = m
            arrays["v{}".format(i)] = v
        return arrays

    def restore(self, arrays: Dict[str, Array]) -> None:
        self.step = int(arrays["step"])
        for i in range(len(self.first)):
            self.first[i][...] = arrays["m{}".format(i)]
            self.second[i][...] = arrays["v{}".format(i)]


def adam_step(
    params: MlpParams, grads: Gradients, state: AdamState
) -> Tuple[MlpParams, AdamState]:
    """Apply one bias-corrected Adam update in place and return both."""
    targets = params.arrays()
    deltas = grads.arrays()
    if len(targets) != len(state.first) or any(
        p.shape != g.shape for p, g in zip(targets, deltas)
    ):
        raise ShapeMismatch(MessagesBase.shape_mismatch.format(
            [p.shape for p in targets], [g.shape for g in deltas]))
    state.step += 1
    dtype = params.dtype.type
    b1, b2 = dtype(state.beta1), dtype(state.beta2)
    step_size = dtype(
        state.learning_rate * np.sqrt(1 - state.beta2 ** state.step)
        / (1 - state.beta1 ** state.step))
    eps_hat = dtype(state.eps * np.sqrt(1 - state.beta2 ** state.step))
    for p, g, m, v in zip(targets, deltas, state.first, state.second):
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        p -= step_size * m / (np.sqrt(v) + eps_hat)
    params.version += 1
    return params, state


def mse_loss(pred, target) -> Tuple[float, Array]:
    """Mean squared error over all elements, and its gradient."""
    pred = np.asarray(pred)
    target = np.asarray(target, dtype=pred.dtype)
    if pred.shape != target.shape:
        raise ShapeMismatch(MessagesBase.shape_mismatch.format(
            pred.shape, target.shape))
    diff = pred - target
    return float(np.mean(diff * diff)), 2 * diff / diff.size


def _shortest(values: Array) -> List[float]:
    """Decimal text that round-trips each float32 value, as JSON floats."""
    return [float(np.format_float_positional(v, unique=True)) for v in values]


def params_to_dict(
    params: MlpParams, algo: str, episode: int, train_config_digest: str
) -> Dict[str, Any]:
    """Return the JSON checkpoint document for one network."""
    return {
        "format_version": const.CHECKPOINT_FORMAT_VERSION,
        "algo": algo,
        "layer_sizes": list(params.layer_sizes),
        "activations": list(params.activations),
        "weights": [_shortest(w.reshape(-1)) for w in params.weights],
        "biases": [_shortest(b) for b in params.biases],
        "episode": episode,
        "train_config_digest": train_config_digest,
    }


def params_from_dict(adict: Dict[str, Any]) -> MlpParams:
    """Rebuild float32 parameters from a checkpoint document."""
    sizes = adict["layer_sizes"]
    weights = [
        np.asarray(w, dtype=np.float32).reshape(n_out, n_in)
        for w, n_in, n_out in zip(adict["weights"], sizes, sizes[1:])
    ]
    biases = [np.asarray(b, dtype=np.float32) for b in adict["biases"]]
    return MlpParams(sizes, adict["activations"], weights, biases)
