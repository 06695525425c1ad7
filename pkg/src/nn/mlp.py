"""
Fixed-topology multilayer perceptrons with a hand-rolled reverse-mode tape.

Every layer is an affine map followed by an elementwise activation:
    h_{l+1} = act_l(W_l h_l + b_l)
with `hidden_activation` on all layers but the last and `output_activation`
on the last. The forward pass records each layer's input and pre-activation
so that the backward pass is a straight walk back through the layers.

Inputs may be a single vector of shape (in,) or a batch of shape (B, in).
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .rng import Rng

HIDDEN_ACTIVATIONS = ('relu', 'tanh')
OUTPUT_ACTIVATIONS = ('identity', 'sigmoid', 'tanh')


class StaleTapeError(ValueError):
    """Backward pass called with a tape that was not recorded for these params."""


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * x))


# name -> (f(pre), f'(pre, post))
_ACTIVATIONS: Dict[str, Tuple[Callable, Callable]] = {
    'identity': (lambda a: a, lambda a, h: np.ones_like(a)),
    'relu': (lambda a: np.maximum(a, 0.0), lambda a, h: (a > 0.0).astype(a.dtype)),
    'tanh': (np.tanh, lambda a, h: 1.0 - h * h),
    'sigmoid': (_sigmoid, lambda a, h: h * (1.0 - h)),
}


@dataclass(frozen=True)
class MlpSpec:
    """
    Network topology.

    Args:
        layer_widths: Widths from input to output, at least two entries, all >= 1
        hidden_activation: 'relu' or 'tanh'
        output_activation: 'identity', 'sigmoid' or 'tanh'

    Examples:
        >>> MlpSpec((18, 128, 128, 200)).n_layers
        3
    """
    layer_widths: Tuple[int, ...]
    hidden_activation: str = 'relu'
    output_activation: str = 'identity'

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, 'layer_widths', widths)
        if len(widths) < 2:
            raise ValueError(f"layer_widths needs at least 2 entries, got {list(widths)}")
        for i, w in enumerate(widths):
            if w < 1:
                raise ValueError(f"layer_widths[{i}] must be >= 1, got {w}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"Unknown hidden_activation: {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"Unknown output_activation: {self.output_activation!r}")

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1

    @property
    def in_width(self) -> int:
        return self.layer_widths[0]

    @property
    def out_width(self) -> int:
        return self.layer_widths[-1]

    def activation(self, layer: int) -> str:
        return self.output_activation if layer == self.n_layers - 1 else self.hidden_activation

    def shapes(self) -> List[Tuple[Tuple[int, int], Tuple[int]]]:
        """(weight shape, bias shape) per layer."""
        w = self.layer_widths
        return [((w[i + 1], w[i]), (w[i + 1],)) for i in range(self.n_layers)]

    def to_dict(self) -> dict:
        return {
            'layer_widths': list(self.layer_widths),
            'hidden_activation': self.hidden_activation,
            'output_activation': self.output_activation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> 'MlpSpec':
        return cls(tuple(d['layer_widths']), d['hidden_activation'], d['output_activation'])


@dataclass
class MlpParams:
    """
    Per-layer weights (out x in) and biases (out,). Also used for gradients
    and Adam moments, which share the same shapes.
    """
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @classmethod
    def zeros(cls, spec: MlpSpec) -> 'MlpParams':
        return cls(
            weights=[np.zeros(ws) for ws, _ in spec.shapes()],
            biases=[np.zeros(bs) for _, bs in spec.shapes()],
        )

    def copy(self) -> 'MlpParams':
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def __add__(self, other: 'MlpParams') -> 'MlpParams':
        return MlpParams(
            [a + b for a, b in zip(self.weights, other.weights)],
            [a + b for a, b in zip(self.biases, other.biases)],
        )

    def arrays(self) -> List[Tuple[str, np.ndarray]]:
        """Named arrays in layer order: w0, b0, w1, b1, ..."""
        out = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out.append((f"w{i}", w))
            out.append((f"b{i}", b))
        return out

    def check_shapes(self, spec: MlpSpec, what: str = "params") -> None:
        """Raise ValueError unless every array matches `spec`."""
        if len(self.weights) != spec.n_layers or len(self.biases) != spec.n_layers:
            raise ValueError(
                f"{what} has {len(self.weights)} layers, spec expects {spec.n_layers}"
            )
        for i, (ws, bs) in enumerate(spec.shapes()):
            if self.weights[i].shape != ws:
                raise ValueError(f"{what} layer {i} weight shape {self.weights[i].shape}, expected {ws}")
            if self.biases[i].shape != bs:
                raise ValueError(f"{what} layer {i} bias shape {self.biases[i].shape}, expected {bs}")

    def equals(self, other: 'MlpParams') -> bool:
        """Bitwise equality of every array."""
        if len(self.weights) != len(other.weights):
            return False
        return all(np.array_equal(a, b) for (_, a), (_, b) in zip(self.arrays(), other.arrays()))


@dataclass
class Tape:
    """Cached per-layer inputs and pre-activations from one forward pass."""
    spec: MlpSpec
    params: MlpParams
    batched: bool
    inputs: List[np.ndarray] = field(default_factory=list)
    pre_activations: List[np.ndarray] = field(default_factory=list)
    outputs: List[np.ndarray] = field(default_factory=list)


def init_params(spec: MlpSpec, rng: Rng) -> MlpParams:
    """
    Glorot-uniform weights, zero biases.

    Each weight of layer l is drawn from U(-a, a) with a = sqrt(6 / (in + out)).
    Layers are filled in order, weights row-major, so the result depends
    only on the spec and the rng state.

    Args:
        spec: Network topology
        rng: Random source (advanced by the total weight count)

    Returns:
        Freshly initialized parameters
    """
    weights, biases = [], []
    for (out_w, in_w), bias_shape in spec.shapes():
        limit = np.sqrt(6.0 / (in_w + out_w))
        weights.append(rng.uniform(-limit, limit, (out_w, in_w)))
        biases.append(np.zeros(bias_shape))
    return MlpParams(weights, biases)


def _as_batch(x: np.ndarray, width: int, what: str) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    batched = arr.ndim == 2
    if arr.ndim == 1:
        arr = arr[None, :]
    elif arr.ndim != 2:
        raise ValueError(f"{what} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[1] != width:
        raise ValueError(f"{what} width {arr.shape[1]} does not match expected width {width}")
    return arr, batched


def mlp_forward(spec: MlpSpec, params: MlpParams, x: np.ndarray) -> Tuple[np.ndarray, Tape]:
    """
    Evaluate the network.

    Args:
        spec: Network topology
        params: Parameters matching `spec`
        x: Input vector (in,) or batch (B, in)

    Returns:
        Tuple of (output with the same rank as `x`, tape for mlp_backward)

    Examples:
        >>> spec = MlpSpec((1, 1))
        >>> p = MlpParams([np.array([[2.0]])], [np.array([3.0])])
        >>> mlp_forward(spec, p, np.array([1.0]))[0]
        array([5.])
    """
    params.check_shapes(spec)
    h, batched = _as_batch(x, spec.in_width, "input")
    tape = Tape(spec=spec, params=params, batched=batched)

    for layer in range(spec.n_layers):
        act, _ = _ACTIVATIONS[spec.activation(layer)]
        pre = h @ params.weights[layer].T + params.biases[layer]
        tape.inputs.append(h)
        tape.pre_activations.append(pre)
        h = act(pre)
        tape.outputs.append(h)

    return (h if batched else h[0]), tape


def mlp_backward(
    spec: MlpSpec,
    params: MlpParams,
    tape: Tape,
    upstream_grad: np.ndarray
) -> Tuple[MlpParams, np.ndarray]:
    """
    Reverse-mode gradients of sum(upstream_grad * output).

    Args:
        spec: Network topology used for the forward pass
        params: The exact params object the tape was recorded with
        tape: Tape from mlp_forward
        upstream_grad: dL/d(output), same shape as the forward output

    Returns:
        Tuple of (parameter gradients, gradient w.r.t. the input). For a
        batch the parameter gradients are summed over rows and the input
        gradient is per row.

    Raises:
        StaleTapeError: Tape was recorded with different params or spec
    """
    if tape.params is not params or tape.spec != spec:
        raise StaleTapeError("Tape does not belong to these params; rerun mlp_forward")

    delta, batched = _as_batch(upstream_grad, spec.out_width, "upstream_grad")
    if batched != tape.batched or delta.shape[0] != tape.inputs[0].shape[0]:
        raise StaleTapeError(
            f"upstream_grad shape {np.shape(upstream_grad)} does not match the recorded batch"
        )

    grads = MlpParams.zeros(spec)
    for layer in reversed(range(spec.n_layers)):
        _, dact = _ACTIVATIONS[spec.activation(layer)]
        delta = delta * dact(tape.pre_activations[layer], tape.outputs[layer])
        grads.weights[layer] = delta.T @ tape.inputs[layer]
        grads.biases[layer] = delta.sum(axis=0)
        delta = delta @ params.weights[layer]

    return grads, (delta if batched else delta[0])


def compose_widths(widths: Sequence[int]) -> str:
    """Human-readable topology string, e.g. '18-128-128-200'."""
    return "-".join(str(w) for w in widths)
