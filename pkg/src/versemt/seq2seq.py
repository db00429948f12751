"""A single-layer ReLU RNN encoder-decoder in numpy.

Both recurrences compute ``s_t = relu(U x_t + W s_{t-1} + b)`` with
``s_0 = 0`` on the encoder side.  The decoder starts from the final encoder
state and is fed the gold previous token during training (teacher forcing).
Output logits are ``V h_t + c`` where ``h_t`` is the decoder state, or the
decoder state concatenated with a dot-product attention context when
attention is enabled.  The loss is mean token cross-entropy, and
:func:`backward` returns its exact gradient by backpropagation through time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DataError, DimensionError, NumericError
from .vocab import BOS, EOS

PARAM_NAMES = ("src_embed", "tgt_embed", "enc_U", "enc_W", "enc_b",
               "dec_U", "dec_W", "dec_b", "out_V", "out_c")


@dataclass(frozen=True)
class ModelDims:
    src_vocab: int
    tgt_vocab: int
    embed_dim: int = 64
    hidden_dim: int = 128
    attention: bool = False

    def __post_init__(self):
        for f in ("src_vocab", "tgt_vocab", "embed_dim", "hidden_dim"):
            if getattr(self, f) < 1:
                raise ValueError(f"{f} must be >= 1")

    @property
    def output_in(self) -> int:
        return 2 * self.hidden_dim if self.attention else self.hidden_dim

    def shapes(self) -> dict[str, tuple[int, ...]]:
        E, H = self.embed_dim, self.hidden_dim
        return {
            "src_embed": (self.src_vocab, E),
            "tgt_embed": (self.tgt_vocab, E),
            "enc_U": (H, E), "enc_W": (H, H), "enc_b": (H,),
            "dec_U": (H, E), "dec_W": (H, H), "dec_b": (H,),
            "out_V": (self.tgt_vocab, self.output_in), "out_c": (self.tgt_vocab,),
        }


@dataclass(frozen=True)
class ModelParams:
    src_embed: np.ndarray
    tgt_embed: np.ndarray
    enc_U: np.ndarray
    enc_W: np.ndarray
    enc_b: np.ndarray
    dec_U: np.ndarray
    dec_W: np.ndarray
    dec_b: np.ndarray
    out_V: np.ndarray
    out_c: np.ndarray
    attention: bool = False

    @property
    def dims(self) -> ModelDims:
        return ModelDims(self.src_embed.shape[0], self.tgt_embed.shape[0],
                         self.src_embed.shape[1], self.enc_W.shape[0], self.attention)

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def map(self, fn) -> "ModelParams":
        return replace(self, **{name: fn(name, arr) for name, arr in self.arrays().items()})

    def copy(self) -> "ModelParams":
        return self.map(lambda _, a: a.copy())

    def validate(self) -> None:
        expected = self.dims.shapes()
        for name, arr in self.arrays().items():
            if arr.shape != expected[name]:
                raise DimensionError(f"{name} has shape {arr.shape}, expected {expected[name]}")

    @classmethod
    def zeros(cls, dims: ModelDims, dtype=np.float64) -> "ModelParams":
        return cls(**{n: np.zeros(s, dtype) for n, s in dims.shapes().items()},
                   attention=dims.attention)


# Gradients have exactly the layout of the parameters they belong to.
Gradients = ModelParams


@dataclass
class EncoderTrace:
    indices: np.ndarray
    embeds: np.ndarray
    pre: np.ndarray
    states: np.ndarray


@dataclass
class ForwardTrace:
    enc: EncoderTrace
    inputs: np.ndarray
    gold: np.ndarray
    embeds: np.ndarray
    pre: np.ndarray
    states: np.ndarray       # row 0 is the initial decoder state
    attn: np.ndarray | None
    contexts: np.ndarray | None
    probs: np.ndarray
    loss: float


def init_params(dims: ModelDims, seed: int = 0, scale: float = 0.08,
                dtype=np.float64) -> ModelParams:
    """Uniform(-scale, scale) weights and zero biases, drawn in PARAM_NAMES order."""
    if scale <= 0:
        raise ValueError("scale must be > 0")
    rng = np.random.default_rng(seed)
    arrays = {}
    for name, shape in dims.shapes().items():
        if name.endswith("_b") or name == "out_c":
            arrays[name] = np.zeros(shape, dtype)
        else:
            arrays[name] = rng.uniform(-scale, scale, size=shape).astype(dtype)
    return ModelParams(**arrays, attention=dims.attention)


def relu(x):
    return np.maximum(x, 0.0)


def encoder_step(x_embed, s_prev, params: ModelParams):
    x_embed = np.asarray(x_embed)
    s_prev = np.asarray(s_prev)
    H, E = params.enc_U.shape
    if x_embed.shape != (E,) or s_prev.shape != (H,):
        raise DimensionError(
            f"encoder_step expects input ({E},) and state ({H},), "
            f"got {x_embed.shape} and {s_prev.shape}")
    return relu(params.enc_U @ x_embed + params.enc_W @ s_prev + params.enc_b)


def _check_indices(indices, vocab_size, side):
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise DataError(f"{side} sentence must be a nonempty index sequence")
    if idx.min() < 0 or idx.max() >= vocab_size:
        raise IndexError(f"{side} index out of range for vocabulary of size {vocab_size}")
    return idx


def encoder_forward(src: Sequence[int], params: ModelParams) -> EncoderTrace:
    idx = _check_indices(src, params.src_embed.shape[0], "source")
    X = params.src_embed[idx]
    drive = X @ params.enc_U.T + params.enc_b
    T, H = len(idx), params.enc_W.shape[0]
    pre = np.empty((T, H), dtype=X.dtype)
    states = np.empty((T, H), dtype=X.dtype)
    s = np.zeros(H, dtype=X.dtype)
    W = params.enc_W
    for t in range(T):
        a = drive[t] + W @ s
        s = np.maximum(a, 0.0)
        pre[t] = a
        states[t] = s
    return EncoderTrace(idx, X, pre, states)


def encode_sequence(src: Sequence[int], params: ModelParams) -> np.ndarray:
    """Encoder hidden states s_1..s_T, one row per source index."""
    return encoder_forward(src, params).states


def softmax(z, axis=-1):
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def attention_context(dec_state, enc_states):
    enc_states = np.asarray(enc_states)
    if enc_states.ndim != 2 or len(enc_states) == 0:
        raise DataError("attention needs at least one encoder state")
    weights = softmax(enc_states @ np.asarray(dec_state))
    return weights @ enc_states, weights


def decoder_forward(tgt: Sequence[int], enc: EncoderTrace, params: ModelParams) -> ForwardTrace:
    """Teacher-forced decoder pass over ``tgt`` (which includes BOS and EOS)."""
    idx = _check_indices(tgt, params.tgt_embed.shape[0], "target")
    if len(idx) < 2:
        raise DataError("target must contain at least BOS and one more token")
    inputs, gold = idx[:-1], idx[1:]
    L, H = len(inputs), params.dec_W.shape[0]
    E_in = params.tgt_embed[inputs]
    drive = E_in @ params.dec_U.T + params.dec_b
    pre = np.empty((L, H), dtype=E_in.dtype)
    states = np.empty((L + 1, H), dtype=E_in.dtype)
    states[0] = enc.states[-1]
    W = params.dec_W
    d = states[0]
    for t in range(L):
        a = drive[t] + W @ d
        d = np.maximum(a, 0.0)
        pre[t] = a
        states[t + 1] = d
    D = states[1:]
    attn = contexts = None
    if params.attention:
        S = enc.states
        attn = softmax(D @ S.T, axis=1)
        contexts = attn @ S
        hidden = np.concatenate([D, contexts], axis=1)
    else:
        hidden = D
    logits = hidden @ params.out_V.T + params.out_c
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    probs = np.exp(logp)
    loss = float(-logp[np.arange(L), gold].mean())
    return ForwardTrace(enc, inputs, gold, E_in, pre, states, attn, contexts, probs, loss)


def forward(src: Sequence[int], tgt: Sequence[int], params: ModelParams) -> ForwardTrace:
    return decoder_forward(tgt, encoder_forward(src, params), params)


def backward(trace: ForwardTrace, params: ModelParams) -> Gradients:
    enc = trace.enc
    L, H = trace.pre.shape
    g = ModelParams.zeros(params.dims, dtype=trace.probs.dtype)
    D = trace.states[1:]

    dlogits = trace.probs.copy()
    dlogits[np.arange(L), trace.gold] -= 1.0
    dlogits /= L
    hidden = D if trace.contexts is None else np.concatenate([D, trace.contexts], axis=1)
    g.out_V[...] = dlogits.T @ hidden
    g.out_c[...] = dlogits.sum(axis=0)
    dhidden = dlogits @ params.out_V
    dD = dhidden[:, :H].copy()
    dS = np.zeros_like(enc.states)

    if trace.attn is not None:
        S, A = enc.states, trace.attn
        dctx = dhidden[:, H:]
        dA = dctx @ S.T
        dS += A.T @ dctx
        dscores = A * (dA - (A * dA).sum(axis=1, keepdims=True))
        dD += dscores @ S
        dS += dscores.T @ D

    # decoder recurrence, newest step first
    W = params.dec_W
    dpre = np.empty_like(trace.pre)
    carry = np.zeros(H, dtype=dD.dtype)
    for t in range(L - 1, -1, -1):
        da = (dD[t] + carry) * (trace.pre[t] > 0)
        dpre[t] = da
        carry = W.T @ da
    dS[-1] += carry
    g.dec_U[...] = dpre.T @ trace.embeds
    g.dec_W[...] = dpre.T @ trace.states[:-1]
    g.dec_b[...] = dpre.sum(axis=0)
    np.add.at(g.tgt_embed, trace.inputs, dpre @ params.dec_U)

    W = params.enc_W
    T = len(enc.indices)
    dpre = np.empty_like(enc.pre)
    carry = np.zeros(H, dtype=dS.dtype)
    for t in range(T - 1, -1, -1):
        da = (dS[t] + carry) * (enc.pre[t] > 0)
        dpre[t] = da
        carry = W.T @ da
    prev = np.vstack([np.zeros((1, H), dtype=enc.states.dtype), enc.states[:-1]])
    g.enc_U[...] = dpre.T @ enc.embeds
    g.enc_W[...] = dpre.T @ prev
    g.enc_b[...] = dpre.sum(axis=0)
    np.add.at(g.src_embed, enc.indices, dpre @ params.enc_U)
    return g


def loss_and_gradients(src, tgt, params: ModelParams) -> tuple[float, Gradients]:
    trace = forward(src, tgt, params)
    return trace.loss, backward(trace, params)


def batch_gradients(pairs, params: ModelParams) -> tuple[float, Gradients]:
    """Mean loss and mean gradient over ``(src, tgt)`` index pairs.

    Per-pair gradients are independent, so callers may compute them in
    parallel and reduce with the same mean.
    """
    if not pairs:
        raise DataError("empty batch")
    total = 0.0
    acc = ModelParams.zeros(params.dims, dtype=params.out_V.dtype)
    for src, tgt in pairs:
        loss, g = loss_and_gradients(src, tgt, params)
        total += loss
        for name, arr in g.arrays().items():
            getattr(acc, name)[...] += arr
    n = len(pairs)
    return total / n, acc.map(lambda _, a: a / n)


def global_norm(grads: Gradients) -> float:
    return float(np.sqrt(sum(float(np.sum(a * a)) for a in grads.arrays().values())))


def sgd_step(params: ModelParams, grads: Gradients, lr: float,
             clip_norm: float | None = None) -> ModelParams:
    """Return updated params; the inputs are not modified."""
    if lr < 0:
        raise ValueError("lr must be >= 0")
    norm = global_norm(grads)
    if not np.isfinite(norm):
        raise NumericError("non-finite gradient")
    scale = 1.0
    if clip_norm is not None and norm > clip_norm:
        scale = clip_norm / norm
    step = lr * scale
    return params.map(lambda name, a: a - step * getattr(grads, name))


def greedy_decode(src: Sequence[int], params: ModelParams, max_len: int = 100) -> list[int]:
    """Argmax decoding; returns ``[BOS, ..., EOS]`` with at most ``max_len`` generated tokens.

    When the limit is reached without EOS, EOS is appended.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    S = encoder_forward(src, params).states
    d = S[-1]
    out = [BOS]
    tok = BOS
    Vo, c = params.out_V, params.out_c
    for _ in range(max_len):
        a = params.dec_U @ params.tgt_embed[tok] + params.dec_W @ d + params.dec_b
        d = np.maximum(a, 0.0)
        if params.attention:
            ctx, _ = attention_context(d, S)
            h = np.concatenate([d, ctx])
        else:
            h = d
        tok = int(np.argmax(Vo @ h + c))
        out.append(tok)
        if tok == EOS:
            return out
    out.append(EOS)
    return out


def param_count(params: ModelParams) -> int:
    return sum(a.size for a in params.arrays().values())


def assert_finite(params: ModelParams) -> None:
    for name, arr in params.arrays().items():
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"non-finite entries in {name}")

