"""Dense float32 tensors with reverse-mode differentiation and Adam.

Deliberately small: everything the edit classifier needs is expressible
with 2-D matrices plus a handful of ops, each of which records its
backward rule on an explicit :class:`Tape`.  Outside a tape context the
same ops are plain numpy computations, which is what inference uses.

A tape is confined to the thread that opened it; independent tapes may
run concurrently in separate threads.
"""

from __future__ import annotations

import struct
import threading

import numpy as np

from .errors import DataError

DTYPE = np.float32

_CLAMP_EPS = 1e-12

_state = threading.local()

# counter of log() clamps in weighted_cross_entropy, kept global so long
# training runs can report how often probabilities collapsed
_clamp_count = 0


def clamp_count():
    return _clamp_count


def reset_clamp_count():
    global _clamp_count
    _clamp_count = 0


class Tensor:
    """A float32 array and a lazily allocated same-shape gradient buffer."""

    __slots__ = ("values", "grad")

    def __init__(self, values):
        v = np.asarray(values, dtype=DTYPE)
        if v.ndim and not v.flags["C_CONTIGUOUS"]:
            v = np.ascontiguousarray(v)
        self.values = v
        self.grad = None

    @property
    def shape(self):
        return self.values.shape

    def ensure_grad(self):
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        return self.grad

    def zero_grad(self):
        if self.grad is not None:
            self.grad[...] = 0.0

    def __repr__(self):
        return f"Tensor(shape={self.values.shape})"


def active_tape():
    return getattr(_state, "tape", None)


class Tape:
    """Ordered record of op backward rules, replayed in reverse.

    Use as a context manager around the forward computation; call
    :meth:`backward` on the scalar loss.  The record is cleared after the
    backward pass, so a tape is single-use.
    """

    def __init__(self):
        self._records = []

    def __enter__(self):
        if active_tape() is not None:
            raise RuntimeError("a tape is already active on this thread")
        _state.tape = self
        return self

    def __exit__(self, exc_type, exc, tb):
        _state.tape = None
        return False

    def record(self, backward_fn):
        self._records.append(backward_fn)

    def __len__(self):
        return len(self._records)

    def backward(self, loss):
        """Populate gradients of everything that produced ``loss``."""
        if loss.values.shape != ():
            raise ValueError(
                f"backward requires a scalar loss, got shape {loss.values.shape}"
            )
        loss.ensure_grad()[...] = 1.0
        for fn in reversed(self._records):
            fn()
        self._records.clear()


def backward(loss, tape=None):
    """Run the reverse pass on ``tape`` (default: the active tape)."""
    tape = tape or active_tape()
    if tape is None:
        raise RuntimeError("no tape to run backward on")
    tape.backward(loss)


def _record(fn):
    tape = active_tape()
    if tape is not None:
        tape.record(fn)


def _grad(out):
    # ops whose output never reached the loss have no gradient to push
    return out.grad


# ---------------------------------------------------------------------------
# ops
# ---------------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.values.ndim != 2 or b.values.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    out = Tensor(a.values @ b.values)

    def bwd():
        g = _grad(out)
        if g is None:
            return
        a.ensure_grad()[...] += g @ b.values.T
        b.ensure_grad()[...] += a.values.T @ g

    _record(bwd)
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"add shape mismatch: {a.shape} vs {b.shape}")
    out = Tensor(a.values + b.values)

    def bwd():
        g = _grad(out)
        if g is None:
            return
        a.ensure_grad()[...] += g
        b.ensure_grad()[...] += g

    _record(bwd)
    return out


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    """Add a 1-D bias row to every row of a 2-D matrix."""
    if b.values.ndim != 1 or x.values.ndim != 2 or x.shape[1] != b.shape[0]:
        raise ValueError(f"add_bias shape mismatch: {x.shape} + {b.shape}")
    out = Tensor(x.values + b.values[None, :])

    def bwd():
        g = _grad(out)
        if g is None:
            return
        x.ensure_grad()[...] += g
        b.ensure_grad()[...] += g.sum(axis=0)

    _record(bwd)
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"mul shape mismatch: {a.shape} vs {b.shape}")
    out = Tensor(a.values * b.values)

    def bwd():
        g = _grad(out)
        if g is None:
            return
        a.ensure_grad()[...] += g * b.values
        b.ensure_grad()[...] += g * a.values

    _record(bwd)
    return out


def mul_const(x: Tensor, c) -> Tensor:
    """Multiply by a constant scalar or same-shape array (no grad for c)."""
    c = np.asarray(c, dtype=DTYPE)
    out = Tensor(x.values * c)

    def bwd():
        g = _grad(out)
        if g is None:
            return
        x.ensure_grad()[...] += g * c

    _record(bwd)
    return out


def add_const(x: Tensor, c) -> Tensor:
    """Add a constant array (e.g. a positional-encoding table)."""
    out = Tensor(x.values + np.asarray(c, dtype=DTYPE))

    def bwd():
        g = _grad(out)
        if g is None:
            return
        x.ensure_grad()[...] += g

    _record(bwd)
    return out


def slice_cols(x: Tensor, start: int, stop: int) -> Tensor:
    out = Tensor(x.values[:, start:stop])

    def bwd():
        g = _grad(out)
        if g is None:
            return
        x.ensure_grad()[:, start:stop] += g

    _record(bwd)
    return out


def concat_cols(xs) -> Tensor:
    xs = list(xs)
    out = Tensor(np.concatenate([x.values for x in xs], axis=1))
    widths = [x.shape[1] for x in xs]

    def bwd():
        g = _grad(out)
        if g is None:
            return
        at = 0
        for x, w in zip(xs, widths):
            x.ensure_grad()[...] += g[:, at:at + w]
            at += w

    _record(bwd)
    return out


def concat_rows(xs) -> Tensor:
    xs = list(xs)
    out = Tensor(np.concatenate([x.values for x in xs], axis=0))
    heights = [x.shape[0] for x in xs]

    def bwd():
        g = _grad(out)
        if g is None:
            return
        at = 0
        for x, h in zip(xs, heights):
            x.ensure_grad()[...] += g[at:at + h]
            at += h

    _record(bwd)
    return out


def transpose(x: Tensor) -> Tensor:
    out = Tensor(x.values.T)

    def bwd():
        g = _grad(out)
        if g is None:
            return
        x.ensure_grad()[...] += g.T

    _record(bwd)
    return out


def pick_rows(table: Tensor, indices) -> Tensor:
    """Gather rows by index; backward scatter-adds into the table."""
    idx = np.asarray(indices, dtype=np.intp)
    out = Tensor(table.values[idx])

    def bwd():
        g = _grad(out)
        if g is None:
            return
        np.add.at(table.ensure_grad(), idx, g)

    _record(bwd)
    return out


def scale_rows(x: Tensor, s: Tensor) -> Tensor:
    """Scale row i of a 2-D matrix by the scalar s[i, 0]."""
    if s.values.ndim != 2 or s.shape != (x.shape[0], 1):
        raise ValueError(f"scale_rows needs s of shape ({x.shape[0]}, 1), got {s.shape}")
    out = Tensor(x.values * s.values)

    def bwd():
        g = _grad(out)
        if g is None:
            return
        x.ensure_grad()[...] += g * s.values
        s.ensure_grad()[...] += (g * x.values).sum(axis=1, keepdims=True)

    _record(bwd)
    return out


def sum_all(x: Tensor) -> Tensor:
    """Sum every entry down to a scalar tensor."""
    out = Tensor(x.values.sum())

    def bwd():
        g = _grad(out)
        if g is None:
            return
        x.ensure_grad()[...] += g

    _record(bwd)
    return out


def sigmoid(x: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        out = Tensor(1.0 / (1.0 + np.exp(-x.values)))

    def bwd():
        g = _grad(out)
        if g is None:
            return
        s = out.values
        x.ensure_grad()[...] += g * s * (1.0 - s)

    _record(bwd)
    return out


def tanh(x: Tensor) -> Tensor:
    out = Tensor(np.tanh(x.values))

    def bwd():
        g = _grad(out)
        if g is None:
            return
        x.ensure_grad()[...] += g * (1.0 - out.values * out.values)

    _record(bwd)
    return out


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    v = x.values
    out = Tensor(np.where(v > 0, v, slope * v))

    def bwd():
        g = _grad(out)
        if g is None:
            return
        x.ensure_grad()[...] += g * np.where(v > 0, DTYPE(1.0), DTYPE(slope))

    _record(bwd)
    return out


def softmax_rows(x: Tensor) -> Tensor:
    """Row-wise softmax with max subtraction for stability."""
    v = x.values
    shifted = v - v.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out = Tensor(e / e.sum(axis=1, keepdims=True))

    def bwd():
        g = _grad(out)
        if g is None:
            return
        s = out.values
        dot = (g * s).sum(axis=1, keepdims=True)
        x.ensure_grad()[...] += s * (g - dot)

    _record(bwd)
    return out


def bilinear_rows(a: Tensor, b: Tensor, w: Tensor, bias: Tensor) -> Tensor:
    """Per-row bilinear forms: out[i, c] = a[i] @ w[c] @ b[i] + bias[c].

    ``w`` has shape (channels, M, M); the output is (m, channels).
    """
    av, bv, wv = a.values, b.values, w.values
    out = Tensor(np.einsum("ip,cpq,iq->ic", av, wv, bv) + bias.values[None, :])

    def bwd():
        g = _grad(out)
        if g is None:
            return
        a.ensure_grad()[...] += np.einsum("ic,cpq,iq->ip", g, wv, bv)
        b.ensure_grad()[...] += np.einsum("ic,cpq,ip->iq", g, wv, av)
        w.ensure_grad()[...] += np.einsum("ic,ip,iq->cpq", g, av, bv)
        bias.ensure_grad()[...] += g.sum(axis=0)

    _record(bwd)
    return out


def weighted_cross_entropy(probs: Tensor, gold, weights) -> Tensor:
    """Mean over rows of -weights[gold] * log(probs[row, gold]).

    ``probs`` rows are expected to sum to 1 (the classifier ends in a
    softmax).  Probabilities below 1e-12 at the gold index are clamped and
    counted, because log would otherwise blow up.
    """
    global _clamp_count
    gold = np.asarray(gold, dtype=np.intp)
    wv = np.asarray(getattr(weights, "values", weights), dtype=DTYPE)
    if np.any(wv < 0):
        raise ValueError("class weights must be non-negative")
    m = probs.shape[0]
    p = probs.values[np.arange(m), gold]
    clamped = np.maximum(p, DTYPE(_CLAMP_EPS))
    n_clamped = int((p < _CLAMP_EPS).sum())
    if n_clamped:
        _clamp_count += n_clamped
    w = wv[gold]
    out = Tensor(np.mean(-w * np.log(clamped)))

    def bwd():
        g = _grad(out)
        if g is None:
            return
        gp = probs.ensure_grad()
        # gradient of max(p, eps) is zero on the clamped side
        dp = np.where(p >= _CLAMP_EPS, -w / clamped, DTYPE(0.0)) / DTYPE(m)
        np.add.at(gp, (np.arange(m), gold), g * dp)

    _record(bwd)
    return out


def lstm_step(x: Tensor, h: Tensor, c: Tensor, params: dict):
    """One step of a standard LSTM cell.

    ``params`` maps "Wx" (E x 4H), "Wh" (H x 4H) and "b" (4H,).  Gate
    order along the 4H axis is input, forget, output, candidate.
    """
    hidden = h.shape[1]
    z = add_bias(add(matmul(x, params["Wx"]), matmul(h, params["Wh"])), params["b"])
    i = sigmoid(slice_cols(z, 0, hidden))
    f = sigmoid(slice_cols(z, hidden, 2 * hidden))
    o = sigmoid(slice_cols(z, 2 * hidden, 3 * hidden))
    g = tanh(slice_cols(z, 3 * hidden, 4 * hidden))
    c_next = add(mul(f, c), mul(i, g))
    h_next = mul(o, tanh(c_next))
    return h_next, c_next


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------


class AdamState:
    """First/second moment buffers and the shared step counter."""

    def __init__(self):
        self.step = 0
        self.m = {}
        self.v = {}


def adam_step(params: dict, grads: dict, state: AdamState,
              lr=1e-4, betas=(0.9, 0.999), eps=1e-8):
    """Bias-corrected Adam update, applied in place to ``params``."""
    state.step += 1
    b1, b2 = betas
    corr1 = 1.0 - b1 ** state.step
    corr2 = 1.0 - b2 ** state.step
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            continue
        if name not in state.m:
            state.m[name] = np.zeros_like(p.values)
            state.v[name] = np.zeros_like(p.values)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / corr1
        v_hat = v / corr2
        p.values -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(DTYPE)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

CHECKPOINT_MAGIC = b"CSPT"
CHECKPOINT_VERSION = 1


def save_checkpoint(path, params: dict):
    """Write named float32 arrays: magic, version, count, then per entry
    name length + bytes, rank, extents, little-endian values."""
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<II", CHECKPOINT_VERSION, len(params)))
        for name in sorted(params):
            arr = np.ascontiguousarray(
                getattr(params[name], "values", params[name]), dtype="<f4"
            )
            encoded = name.encode("utf-8")
            f.write(struct.pack("<I", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<I", arr.ndim))
            if arr.ndim:
                f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.tobytes())


def load_checkpoint(path) -> dict:
    """Read a parameter file written by :func:`save_checkpoint`."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise DataError(f"{path}: not a checkpoint file (bad magic {magic!r})")
        version, count = struct.unpack("<II", f.read(8))
        if version != CHECKPOINT_VERSION:
            raise DataError(f"{path}: unsupported checkpoint version {version}")
        params = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<I", f.read(4))
            name = f.read(name_len).decode("utf-8")
            (rank,) = struct.unpack("<I", f.read(4))
            shape = struct.unpack(f"<{rank}I", f.read(4 * rank)) if rank else ()
            size = int(np.prod(shape)) if rank else 1
            data = f.read(4 * size)
            if len(data) != 4 * size:
                raise DataError(f"{path}: truncated data for parameter {name!r}")
            params[name] = np.frombuffer(data, dtype="<f4").reshape(shape).astype(DTYPE)
        return params
