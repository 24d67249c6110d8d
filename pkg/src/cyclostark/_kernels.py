"""Exact integer convolution kernels.

Everything downstream (cyclotomic numbers, tower elements, power series)
multiplies arrays of nonnegative Python ints. Packing each array into one
big integer and letting CPython multiply the two big integers is far
faster than object-dtype loops.
"""

from __future__ import annotations

import numpy as np

_U64 = 1 << 64


def _pack(flat: np.ndarray, nbytes: int) -> int:
    n = flat.shape[0]
    buf = np.zeros((n, nbytes), dtype=np.uint8)
    mx = max((int(x) for x in flat), default=0)
    if mx < _U64:
        lo = np.array([int(x) for x in flat], dtype=np.uint64)
        k = min(8, nbytes)
        buf[:, :k] = lo.view(np.uint8).reshape(n, 8)[:, :k]
        return int.from_bytes(buf.tobytes(), "little")
    return int.from_bytes(b"".join(int(x).to_bytes(nbytes, "little") for x in flat), "little")


def _unpack(big: int, count: int, nbytes: int) -> np.ndarray:
    raw = big.to_bytes(count * nbytes, "little")
    if nbytes <= 16:
        buf = np.zeros((count, 16), dtype=np.uint8)
        buf[:, :nbytes] = np.frombuffer(raw, dtype=np.uint8).reshape(count, nbytes)
        words = buf.view(np.uint64).reshape(count, 2)
        lo = words[:, 0].astype(object)
        hi = words[:, 1].astype(object)
        return lo + (hi << 64)
    out = np.empty(count, dtype=object)
    for i in range(count):
        out[i] = int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little")
    return out


def conv1d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear convolution of two 1-D arrays of nonnegative ints."""
    la, lb = a.shape[0], b.shape[0]
    if la == 0 or lb == 0:
        return np.zeros(0, dtype=object)
    ma = max((int(x) for x in a), default=0)
    mb = max((int(x) for x in b), default=0)
    if ma == 0 or mb == 0:
        return np.zeros(la + lb - 1, dtype=object)
    bits = ma.bit_length() + mb.bit_length() + min(la, lb).bit_length() + 1
    nbytes = (bits + 7) // 8
    prod = _pack(a, nbytes) * _pack(b, nbytes)
    return _unpack(prod, la + lb - 1, nbytes)


def convnd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full N-dimensional convolution of nonnegative int arrays.

    The output has shape a.shape + b.shape - 1 along every axis. Axes are
    flattened with padded strides so the 1-D product never mixes slots.
    """
    if a.ndim == 1:
        return conv1d(a, b)
    out_shape = tuple(x + y - 1 for x, y in zip(a.shape, b.shape))
    # pad both operands to the output shape on all but the first axis
    pad_a = np.zeros((a.shape[0],) + out_shape[1:], dtype=object)
    pad_a[tuple(slice(0, s) for s in a.shape)] = a
    pad_b = np.zeros((b.shape[0],) + out_shape[1:], dtype=object)
    pad_b[tuple(slice(0, s) for s in b.shape)] = b
    flat = conv1d(pad_a.reshape(-1), pad_b.reshape(-1))
    inner = int(np.prod(out_shape[1:]))
    need = out_shape[0] * inner
    if flat.shape[0] < need:
        flat = np.concatenate([flat, np.zeros(need - flat.shape[0], dtype=object)])
    return flat[:need].reshape(out_shape)


def as_obj(values, shape=None) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = [int(v) for v in values]
    if shape is not None:
        arr = arr.reshape(shape)
    return arr


def zeros(shape) -> np.ndarray:
    z = np.empty(shape, dtype=object)
    z.fill(0)
    return z


def conv_signed(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Convolution of 1-D int arrays with arbitrary signs.

    Both operands are shifted to be nonnegative, multiplied with the packed
    kernel, and the cross terms are removed with window sums.
    """
    la, lb = a.shape[0], b.shape[0]
    if la == 0 or lb == 0:
        return np.zeros(0, dtype=object)
    sa = -min(0, min(int(x) for x in a))
    sb = -min(0, min(int(x) for x in b))
    if sa == 0 and sb == 0:
        return conv1d(a, b)
    ap = a + sa
    bp = b + sb
    out = conv1d(ap, bp)
    n = la + lb - 1
    j = np.arange(n)
    # index windows: i ranges over max(0, j-lb+1) .. min(j, la-1)
    ca = np.concatenate([[0], np.cumsum(a)]).astype(object)
    cb = np.concatenate([[0], np.cumsum(b)]).astype(object)
    lo_a = np.maximum(0, j - lb + 1)
    hi_a = np.minimum(j, la - 1) + 1
    lo_b = np.maximum(0, j - la + 1)
    hi_b = np.minimum(j, lb - 1) + 1
    win_a = ca[hi_a] - ca[lo_a]
    win_b = cb[hi_b] - cb[lo_b]
    cnt = (hi_a - lo_a).astype(object)
    return out - sb * win_a - sa * win_b - sa * sb * cnt
