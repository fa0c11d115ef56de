import numpy as np


def init_moments(weights):
    return {
        "m": {k: np.zeros_like(v) for k, v in weights.items()},
        "v": {k: np.zeros_like(v) for k, v in weights.items()},
    }


def adam_step(weights, grads, moments, t, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update, applied in place.

    ``weights``, ``grads`` and the two moment dicts share keys and shapes;
    ``t`` is the 1-based step count. Returns ``(weights, moments)``.
    """
    if t < 1:
        raise ValueError("Adam step count starts at 1")
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    m, v = moments["m"], moments["v"]
    for k, w in weights.items():
        g = grads[k]
        m[k] *= beta1
        m[k] += (1.0 - beta1) * g
        v[k] *= beta2
        v[k] += (1.0 - beta2) * g * g
        w -= lr * (m[k] / c1) / (np.sqrt(v[k] / c2) + eps)
    return weights, moments
