"""Pure-Python forward pass of a seeded fully connected head.

Weights are regenerated from the documented draw order (for each layer: the
weight matrix row-major, then the bias, uniform in +-1/sqrt(fan_in)) and the
arithmetic is done with plain lists, without touching the library.

Usage: python mlp_forward.py
"""

import math

import numpy as np

DIMS = (32, 32, 16)


def seeded_layers(dims, seed):
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in)).tolist()
        b = rng.uniform(-bound, bound, size=fan_out).tolist()
        layers.append((w, b))
    return layers


def forward(layers, x):
    h = list(x)
    for i, (w, b) in enumerate(layers):
        z = [sum(wij * hj for wij, hj in zip(row, h)) + bi for row, bi in zip(w, b)]
        h = z if i == len(layers) - 1 else [max(v, 0.0) for v in z]
    return h


def fixed_input():
    """Two 16-class probability vectors: a linear ramp and its reverse."""
    ramp = [(i + 1) / 136 for i in range(16)]
    return ramp + ramp[::-1]


if __name__ == "__main__":
    for v in forward(seeded_layers(DIMS, 0), fixed_input()):
        print(repr(v))
