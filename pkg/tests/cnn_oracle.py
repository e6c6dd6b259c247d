"""Brute-force CNN forward, independent of the production implementation.

Plain Python loops over taps and channels, used to freeze golden values and
to cross-check the vectorised forward on solver data.
"""

import math


def act_scalar(x, kind, param):
    if kind == "none":
        return x
    if kind == "aelu":
        return x if x > 0.0 else param * math.expm1(x)
    if kind == "asoftplus":
        t = param * x
        return x if t > 30.0 else math.log1p(math.exp(t)) / param
    raise ValueError(kind)


def forward_lists(layers, line):
    """layers: [(kernel[o][c][t], bias[o], kind, param)], line: [ch][pos]."""
    cur = [list(ch) for ch in line]
    for kernel, bias, kind, param in layers:
        out_ch = len(kernel)
        in_ch = len(kernel[0])
        width = len(kernel[0][0])
        n_out = len(cur[0]) - width + 1
        nxt = []
        for o in range(out_ch):
            row = []
            for t in range(n_out):
                acc = bias[o]
                for c in range(in_ch):
                    for tap in range(width):
                        acc += kernel[o][c][tap] * cur[c][t + tap]
                row.append(act_scalar(acc, kind, param))
            nxt.append(row)
        cur = nxt
    return cur


def layers_from_model(model):
    return [(layer.kernel.tolist(), layer.bias.tolist(), layer.act.kind, layer.act.param)
            for layer in model.layers]


def hand_model_layers():
    """Fixed tiny 4->2->4 network with mixed adaptive activations."""
    k1 = [[[0.0, 0.25, 0.0] for _ in range(4)],
          [[0.1 * (c + 1) * (t - 1) for t in range(3)] for c in range(4)]]
    b1 = [0.0, 0.5]
    k2 = [[[0.3], [-0.2 * (o + 1)]] for o in range(4)]
    b2 = [0.05 * o for o in range(4)]
    return [(k1, b1, "aelu", 1.3), (k2, b2, "asoftplus", 0.8)]
