"""Trainable multiplier network and the shared weight-file format.

The network is a stack of valid 1D convolutions over 4 characteristic-flux
channels with adaptive activations: aELU (trainable negative-branch scale)
between layers and aSoftplus (trainable sharpness, lower-bounded output)
at the end.  Export writes the canonical JSON format the solver package
loads: fixed key order, numbers at 17 significant digits.
"""

from __future__ import annotations

import json
import math

import numpy as np
import torch
from torch import nn

ARCHS = {
    "A": ((8, 4, 3, "aelu"), (4, 8, 1, "asoftplus")),
    "B": ((16, 4, 3, "aelu"), (4, 16, 3, "asoftplus")),
    "C": ((16, 4, 3, "aelu"), (16, 16, 1, "aelu"), (4, 16, 1, "asoftplus")),
}

SOFTPLUS_CUTOFF = 30.0


class AdaptiveActivation(nn.Module):
    def __init__(self, kind: str, param: float = 1.0):
        super().__init__()
        if kind not in ("none", "aelu", "asoftplus"):
            raise ValueError(f"unknown activation kind {kind!r}")
        self.kind = kind
        self.param = nn.Parameter(torch.tensor(param, dtype=torch.float64))

    def forward(self, x):
        if self.kind == "none":
            return x
        if self.kind == "aelu":
            return torch.where(x > 0, x, self.param * torch.special.expm1(torch.clamp(x, max=0.0)))
        t = self.param * x
        soft = torch.log1p(torch.exp(torch.clamp(t, max=SOFTPLUS_CUTOFF))) / self.param
        return torch.where(t > SOFTPLUS_CUTOFF, x, soft)

    def extra_repr(self):
        return f"kind={self.kind}"


class MultiplierNet(nn.Module):
    """4-channel line in, 4 positive multiplier channels out (length -2k)."""

    def __init__(self, arch_tag: str = "A", geometry=None, seed: int = 0,
                 init_scale: float = 0.1):
        super().__init__()
        geometry = ARCHS[arch_tag] if geometry is None else geometry
        gen = torch.Generator().manual_seed(seed)
        convs, acts = [], []
        k = 0
        for out_ch, in_ch, width, kind in geometry:
            conv = nn.Conv1d(in_ch, out_ch, width, dtype=torch.float64)
            with torch.no_grad():
                conv.weight.copy_(init_scale
                                  * torch.randn(conv.weight.shape, generator=gen,
                                                dtype=torch.float64))
                conv.bias.zero_()
            convs.append(conv)
            acts.append(AdaptiveActivation(kind))
            k += (width - 1) // 2
        self.convs = nn.ModuleList(convs)
        self.acts = nn.ModuleList(acts)
        self.arch_tag = arch_tag
        self.k = k

    def forward(self, x):
        for conv, act in zip(self.convs, self.acts):
            x = act(conv(x))
        return x


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(float(value)):
            raise ValueError(f"cannot serialise {value}")
        return format(float(value), ".17g")
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ",".join(_fmt(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(f'{_fmt(k)}:{_fmt(v)}' for k, v in value.items()) + "}"
    raise ValueError(f"cannot serialise {type(value).__name__}")


def serialize_weights(net: MultiplierNet) -> bytes:
    doc = {
        "format_version": 1,
        "arch_tag": net.arch_tag,
        "k": net.k,
        "layers": [
            {
                "out_ch": conv.out_channels,
                "in_ch": conv.in_channels,
                "width": conv.kernel_size[0],
                "weights": conv.weight.detach().cpu().numpy().ravel(),
                "bias": conv.bias.detach().cpu().numpy(),
                "activation": {"kind": act.kind, "param": float(act.param.item())},
            }
            for conv, act in zip(net.convs, net.acts)
        ],
    }
    return (_fmt(doc) + "\n").encode("ascii")


def export_weights(net: MultiplierNet, path):
    with open(path, "wb") as fh:
        fh.write(serialize_weights(net))


def load_weights(path) -> MultiplierNet:
    """Rebuild a trainable network from a shared-format weight file."""
    with open(path, "rb") as fh:
        doc = json.loads(fh.read().decode("ascii"))
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported weight file version {doc.get('format_version')}")
    geometry = tuple(
        (layer["out_ch"], layer["in_ch"], layer["width"], layer["activation"]["kind"])
        for layer in doc["layers"])
    net = MultiplierNet(arch_tag=doc["arch_tag"], geometry=geometry)
    if net.k != doc["k"]:
        raise ValueError(f"layer widths imply k={net.k}, file claims {doc['k']}")
    with torch.no_grad():
        for conv, act, layer in zip(net.convs, net.acts, doc["layers"]):
            kernel = np.asarray(layer["weights"], dtype=np.float64).reshape(
                layer["out_ch"], layer["in_ch"], layer["width"])
            conv.weight.copy_(torch.from_numpy(kernel))
            conv.bias.copy_(torch.tensor(layer["bias"], dtype=torch.float64))
            act.param.copy_(torch.tensor(layer["activation"]["param"],
                                         dtype=torch.float64))
    return net


def zero_net(arch_tag: str = "A") -> MultiplierNet:
    net = MultiplierNet(arch_tag, init_scale=0.0)
    return net
