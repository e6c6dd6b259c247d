"""Small 1D convolutional network producing smoothness-indicator multipliers.

The model maps 4 channels of split characteristic flux values to 4 channels
of positive multipliers, sliding over a line.  Layers use "valid"
convolutions, so an input of length n + 2k yields an output of length n,
where 2k+1 is the total receptive field.  The final layer must use the
(lower-bounded) adaptive softplus so multipliers stay non-negative and
delta + C stays >= C > 0.

Weight files are a single JSON document; see :func:`save_weights` for the
canonical, bit-faithful serialisation.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .errors import ChannelMismatch, SchemaError, ShapeMismatch

FORMAT_VERSION = 1
IO_CHANNELS = 4

ACT_NONE = "none"
ACT_ELU = "aelu"
ACT_SOFTPLUS = "asoftplus"
_ACT_KINDS = (ACT_NONE, ACT_ELU, ACT_SOFTPLUS)
_ACT_CODE = {ACT_NONE: 0, ACT_ELU: 1, ACT_SOFTPLUS: 2}

#: beyond this value of beta*x the softplus is x to machine precision
SOFTPLUS_CUTOFF = 30.0


@dataclass(frozen=True)
class Activation:
    kind: str
    param: float = 1.0


def activation(x, spec: Activation):
    """Apply an adaptive activation elementwise.

    aELU is x for x > 0 and param*(exp(x)-1) otherwise (continuous at 0,
    asymptote -param).  aSoftplus is log(1 + exp(param*x))/param, evaluated
    as x once param*x exceeds the overflow cutoff.
    """
    x = np.asarray(x, dtype=np.float64)
    if spec.kind == ACT_NONE:
        return x
    if spec.kind == ACT_ELU:
        return np.where(x > 0.0, x, spec.param * np.expm1(np.minimum(x, 0.0)))
    if spec.kind == ACT_SOFTPLUS:
        t = spec.param * x
        return np.where(t > SOFTPLUS_CUTOFF, x,
                        np.log1p(np.exp(np.minimum(t, SOFTPLUS_CUTOFF))) / spec.param)
    raise ValueError(f"unknown activation kind {spec.kind!r}")


@dataclass(frozen=True)
class ConvLayer:
    """One 1D convolution: kernel[out_ch, in_ch, tap] plus bias and activation."""

    kernel: np.ndarray
    bias: np.ndarray
    act: Activation

    @property
    def out_channels(self) -> int:
        return self.kernel.shape[0]

    @property
    def in_channels(self) -> int:
        return self.kernel.shape[1]

    @property
    def width(self) -> int:
        return self.kernel.shape[2]


@dataclass(frozen=True)
class CnnModel:
    layers: tuple
    arch_tag: str
    k: int

    def validate(self):
        if not self.layers:
            raise SchemaError("model needs at least one layer")
        if self.layers[0].in_channels != IO_CHANNELS:
            raise ChannelMismatch(
                f"first layer must take {IO_CHANNELS} channels, "
                f"got {self.layers[0].in_channels}")
        if self.layers[-1].out_channels != IO_CHANNELS:
            raise ChannelMismatch(
                f"last layer must emit {IO_CHANNELS} channels, "
                f"got {self.layers[-1].out_channels}")
        half = 0
        prev_out = IO_CHANNELS
        for i, layer in enumerate(self.layers):
            if layer.kernel.ndim != 3 or layer.bias.shape != (layer.out_channels,):
                raise SchemaError(f"layer {i}: malformed kernel/bias shapes")
            if layer.in_channels != prev_out:
                raise SchemaError(
                    f"layer {i}: expects {layer.in_channels} input channels, "
                    f"previous layer emits {prev_out}")
            if layer.width % 2 != 1:
                raise SchemaError(f"layer {i}: tap count must be odd, got {layer.width}")
            if layer.act.kind not in _ACT_KINDS:
                raise SchemaError(f"layer {i}: unknown activation {layer.act.kind!r}")
            if not math.isfinite(layer.act.param):
                raise SchemaError(f"layer {i}: activation parameter must be finite")
            if layer.act.kind == ACT_SOFTPLUS and not layer.act.param > 0.0:
                raise SchemaError(f"layer {i}: softplus parameter must be positive")
            half += (layer.width - 1) // 2
            prev_out = layer.out_channels
        if half != self.k:
            raise SchemaError(
                f"receptive-field half-width {half} from layers, header says {self.k}")
        if self.layers[-1].act.kind != ACT_SOFTPLUS:
            raise SchemaError("last layer must use the lower-bounded softplus activation")
        return self


def forward(model: CnnModel, x):
    """Evaluate the network along a line.

    ``x`` has shape (..., 4, n + 2k) and the result (..., 4, n).  The value
    at output position i depends only on inputs i .. i+2k, i.e. the model is
    translation invariant along the line.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-2] != IO_CHANNELS:
        raise ShapeMismatch(f"expected {IO_CHANNELS} input channels, got {x.shape[-2]}")
    if x.shape[-1] < 2 * model.k + 1:
        raise ShapeMismatch(
            f"line of length {x.shape[-1]} is shorter than the receptive field "
            f"{2 * model.k + 1}")
    for layer in model.layers:
        windows = np.lib.stride_tricks.sliding_window_view(x, layer.width, axis=-1)
        x = np.einsum("ocw,...cpw->...op", layer.kernel, windows) + layer.bias[..., None]
        x = activation(x, layer.act)
    return x


# --- architecture presets -------------------------------------------------
#
# Channel counts are configurable defaults: tag A is the light two-layer
# net with receptive field 3, tag B widens the field to 5, tag C adds a
# third layer at field 3.

_ARCHS = {
    "A": ((8, 4, 3, ACT_ELU), (4, 8, 1, ACT_SOFTPLUS)),
    "B": ((16, 4, 3, ACT_ELU), (4, 16, 3, ACT_SOFTPLUS)),
    "C": ((16, 4, 3, ACT_ELU), (16, 16, 1, ACT_ELU), (4, 16, 1, ACT_SOFTPLUS)),
}


def builtin_arch(tag: str):
    """Layer geometry (out_ch, in_ch, width, activation kind) for a preset tag."""
    try:
        return _ARCHS[tag]
    except KeyError:
        raise SchemaError(f"unknown architecture tag {tag!r}; have {sorted(_ARCHS)}")


def _model_from_geometry(tag, geometry, kernel_fn):
    layers = []
    for out_ch, in_ch, width, kind in geometry:
        layers.append(ConvLayer(
            kernel=kernel_fn(out_ch, in_ch, width),
            bias=np.zeros(out_ch),
            act=Activation(kind, 1.0),
        ))
    k = sum((w - 1) // 2 for _, _, w, _ in geometry)
    return CnnModel(layers=tuple(layers), arch_tag=tag, k=k).validate()


def zero_model(tag: str = "A", softplus_param: float = 1.0) -> CnnModel:
    """All-zero weights: the multiplier field is the constant softplus(0)."""
    geometry = builtin_arch(tag)
    layers = []
    for out_ch, in_ch, width, kind in geometry:
        param = softplus_param if kind == ACT_SOFTPLUS else 1.0
        layers.append(ConvLayer(kernel=np.zeros((out_ch, in_ch, width)),
                                bias=np.zeros(out_ch), act=Activation(kind, param)))
    k = sum((w - 1) // 2 for _, _, w, _ in geometry)
    return CnnModel(layers=tuple(layers), arch_tag=tag, k=k).validate()


def neutral_zero_model(tag: str = "A", c: float = 0.1) -> CnnModel:
    """Zero-weight model whose constant multiplier plus ``c`` is exactly 1.0.

    With this model a deep-smoothness scheme degenerates to its base scheme
    bit-for-bit: the indicators are multiplied by exactly one.  (With the
    default softplus parameter the constant is log(2), whose near-cancelling
    scale factor still leaves rounding-level weight perturbations that shock
    dynamics amplify over many steps.)
    """
    base = float(np.log1p(np.exp(0.0)))
    target = 1.0 - c
    param = base / target
    for _ in range(200):
        got = base / param
        if got + c == 1.0:
            return zero_model(tag, softplus_param=param)
        param = np.nextafter(param, np.inf if got + c > 1.0 else -np.inf)
    raise ValueError(f"no softplus parameter neutralises c={c}")


def random_model(rng: np.random.Generator, tag: str = "A", scale: float = 0.2) -> CnnModel:
    """Small random weights, e.g. for exercising the DS data path in tests."""
    return _model_from_geometry(tag, builtin_arch(tag),
                                lambda o, i, w: scale * rng.standard_normal((o, i, w)))


# --- weight file (canonical JSON) ----------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        raise SchemaError("booleans have no place in a weight file")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        out = format(float(value), ".17g")
        if not math.isfinite(float(value)):
            raise SchemaError(f"non-finite number {value} cannot be serialised")
        return out
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ",".join(_fmt(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(f'{_fmt(key)}:{_fmt(val)}' for key, val in value.items()) + "}"
    raise SchemaError(f"cannot serialise {type(value).__name__}")


def serialize_weights(model: CnnModel) -> bytes:
    """Canonical byte form: fixed key order, 17-significant-digit decimals."""
    doc = {
        "format_version": FORMAT_VERSION,
        "arch_tag": model.arch_tag,
        "k": model.k,
        "layers": [
            {
                "out_ch": layer.out_channels,
                "in_ch": layer.in_channels,
                "width": layer.width,
                "weights": layer.kernel.ravel(),
                "bias": layer.bias,
                "activation": {"kind": layer.act.kind, "param": layer.act.param},
            }
            for layer in model.layers
        ],
    }
    return (_fmt(doc) + "\n").encode("ascii")


def save_weights(model: CnnModel, path):
    model.validate()
    with open(path, "wb") as fh:
        fh.write(serialize_weights(model))


def _require(doc, key, kind):
    if key not in doc:
        raise SchemaError(f"missing field {key!r}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"field {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"field {key!r} must be {kind.__name__}")
    return value


def load_weights(path) -> CnnModel:
    """Parse and validate a weight file.

    Raises SchemaError for structural problems and ChannelMismatch when the
    first/last layer does not carry 4 channels.
    """
    import json

    with open(path, "rb") as fh:
        try:
            doc = json.loads(fh.read().decode("ascii"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise SchemaError(f"not a valid weight file: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("weight file must hold a JSON object")
    if _require(doc, "format_version", int) != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {doc['format_version']}")
    tag = _require(doc, "arch_tag", str)
    k = _require(doc, "k", int)
    raw_layers = _require(doc, "layers", list)
    layers = []
    for i, raw in enumerate(raw_layers):
        if not isinstance(raw, dict):
            raise SchemaError(f"layer {i} must be an object")
        out_ch = _require(raw, "out_ch", int)
        in_ch = _require(raw, "in_ch", int)
        width = _require(raw, "width", int)
        weights = _require(raw, "weights", list)
        bias = _require(raw, "bias", list)
        act_doc = _require(raw, "activation", dict)
        if len(weights) != out_ch * in_ch * width:
            raise SchemaError(
                f"layer {i}: {len(weights)} weights for shape "
                f"({out_ch}, {in_ch}, {width})")
        if len(bias) != out_ch:
            raise SchemaError(f"layer {i}: {len(bias)} bias values for {out_ch} channels")
        layers.append(ConvLayer(
            kernel=np.asarray(weights, dtype=np.float64).reshape(out_ch, in_ch, width),
            bias=np.asarray(bias, dtype=np.float64),
            act=Activation(_require(act_doc, "kind", str), _require(act_doc, "param", float)),
        ))
    return CnnModel(layers=tuple(layers), arch_tag=tag, k=k).validate()


# --- flat layout consumed by the grid-sweep kernels -----------------------

PackedModel = namedtuple("PackedModel", "meta params weights woff bias boff k")


def pack_model(model: CnnModel) -> PackedModel:
    """Flatten a model into contiguous arrays for the sweep kernels."""
    n = len(model.layers)
    meta = np.zeros((n, 4), dtype=np.int32)
    params = np.zeros(n, dtype=np.float64)
    woff = np.zeros(n + 1, dtype=np.int64)
    boff = np.zeros(n + 1, dtype=np.int64)
    chunks, biases = [], []
    for i, layer in enumerate(model.layers):
        meta[i] = (layer.out_channels, layer.in_channels, layer.width,
                   _ACT_CODE[layer.act.kind])
        params[i] = layer.act.param
        chunks.append(np.ascontiguousarray(layer.kernel, dtype=np.float64).ravel())
        biases.append(np.ascontiguousarray(layer.bias, dtype=np.float64))
        woff[i + 1] = woff[i] + chunks[-1].size
        boff[i + 1] = boff[i] + biases[-1].size
    return PackedModel(meta=meta, params=params,
                       weights=np.concatenate(chunks) if chunks else np.zeros(0),
                       woff=woff,
                       bias=np.concatenate(biases) if biases else np.zeros(0),
                       boff=boff, k=model.k)
