"""
Central finite-difference check of mlp_backward.
"""

import numpy as np

from .mlp import MlpParams, MlpSpec, mlp_backward, mlp_forward

# Both gradients below this norm count as zero (dead relu units give exact zeros)
ZERO_NORM = 1e-12


def _projection(width: int) -> np.ndarray:
    # fixed, non-degenerate weights for reducing the output to a scalar
    return np.cos(np.arange(1, width + 1, dtype=np.float64))


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """
    ||a - n|| / max(||a||, ||n||) over one gradient array.

    Scale-free, so small Glorot-scale gradients are held to the same
    relative bound as large ones.

    Examples:
        >>> relative_error(np.array([0.25]), np.array([1.0]))
        0.75
        >>> relative_error(np.zeros(3), np.zeros(3))
        0.0
    """
    a = np.asarray(analytic, dtype=np.float64).reshape(-1)
    n = np.asarray(numeric, dtype=np.float64).reshape(-1)
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(n)))
    diff = float(np.linalg.norm(a - n))
    if scale < ZERO_NORM:
        return diff
    return diff / scale


def kink_distance(spec: MlpSpec, params: MlpParams, x: np.ndarray) -> float:
    """
    Smallest |pre-activation| over the relu hidden units at x.

    Central differences straddling a relu kink are meaningless; callers
    resample x while this is below their margin. Infinite for nets
    without relu hidden layers.
    """
    if spec.hidden_activation != 'relu' or spec.n_layers < 2:
        return float('inf')
    _, tape = mlp_forward(spec, params, x)
    return float(min(np.abs(pre).min() for pre in tape.pre_activations[:-1]))


def finite_diff_gradcheck(spec: MlpSpec, params: MlpParams, x: np.ndarray, h: float = 1e-5) -> float:
    """
    Compare mlp_backward against central differences.

    The network output is reduced to the scalar c . f(x) with a fixed
    projection c; every weight, bias and input coordinate is perturbed by
    +/- h in turn.

    Args:
        spec: Network topology
        params: Parameters (left unchanged)
        x: Input vector
        h: Perturbation size, > 0

    Returns:
        Worst relative error (see relative_error) over the weight and bias
        arrays of every layer and the input gradient
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    proj = _projection(spec.out_width)

    def scalar(p: MlpParams, inp: np.ndarray) -> float:
        return float(proj @ mlp_forward(spec, p, inp)[0])

    _, tape = mlp_forward(spec, params, x)
    grads, input_grad = mlp_backward(spec, params, tape, proj)

    worst = 0.0
    perturbed = params.copy()
    for (_, arr), (_, grad) in zip(perturbed.arrays(), grads.arrays()):
        numeric = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + h
            f_plus = scalar(perturbed, x)
            arr[idx] = orig - h
            f_minus = scalar(perturbed, x)
            arr[idx] = orig
            numeric[idx] = (f_plus - f_minus) / (2.0 * h)
        worst = max(worst, relative_error(grad, numeric))

    numeric = np.zeros_like(x)
    for i in range(x.shape[0]):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        numeric[i] = (scalar(params, xp) - scalar(params, xm)) / (2.0 * h)
    worst = max(worst, relative_error(input_grad, numeric))

    return worst
