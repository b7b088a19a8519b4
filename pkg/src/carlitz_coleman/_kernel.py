"""Exact multidimensional convolution over F_p by Kronecker substitution.

Every heavy product in the package (scalars mod pi^k, tower elements,
truncated series) is a full convolution of small non-negative integer
tensors followed by modular reductions.  The tensors are packed into one
big integer with fixed-width slots, multiplied by GMP, and unpacked again.
Slot widths are chosen so that no slot can overflow into its neighbour.
"""

from __future__ import annotations

import numpy as np

try:
    import gmpy2

    def _to_int(buf: bytes):
        return gmpy2.mpz.from_bytes(buf, "little")

    def _from_int(z, nbytes: int) -> bytes:
        return z.to_bytes(nbytes, "little")

except ImportError:  # pragma: no cover - gmpy2 ships with the environment

    def _to_int(buf: bytes):
        return int.from_bytes(buf, "little")

    def _from_int(z, nbytes: int) -> bytes:
        return int(z).to_bytes(nbytes, "little")


_DTYPES = {4: np.dtype("<u4"), 8: np.dtype("<u8")}

# below this many output cells a direct numpy loop beats packing
_SMALL = 64


def _slot_bytes(bound: int) -> int:
    if bound < 1 << 32:
        return 4
    if bound < 1 << 64:
        return 8
    return 16


def _pack(a: np.ndarray, shape: tuple[int, ...], width: int):
    padded = np.zeros(shape, dtype=np.uint64)
    padded[tuple(slice(0, s) for s in a.shape)] = a
    if width == 16:
        wide = np.zeros(shape + (2,), dtype="<u8")
        wide[..., 0] = padded
        return _to_int(wide.tobytes())
    return _to_int(padded.astype(_DTYPES[width]).tobytes())


def _direct(a: np.ndarray, b: np.ndarray, out_shape) -> np.ndarray:
    out = np.zeros(out_shape, dtype=np.int64)
    for idx in zip(*np.nonzero(b)):
        sl = tuple(slice(i, i + s) for i, s in zip(idx, a.shape))
        out[sl] += a * int(b[idx])
    return out


def kconv(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Full convolution of ``a`` and ``b`` over every axis, reduced mod ``p``.

    Both inputs must have the same number of dimensions and entries in
    ``[0, p)``.  The result has shape ``a.shape[i] + b.shape[i] - 1`` per
    axis and dtype int64.
    """
    if a.ndim != b.ndim:
        raise ValueError("kconv operands must have equal rank")
    out_shape = tuple(x + y - 1 for x, y in zip(a.shape, b.shape))
    if 0 in a.shape or 0 in b.shape:
        return np.zeros(tuple(max(s, 0) for s in out_shape), dtype=np.int64)
    if a.size * b.size <= _SMALL or min(a.size, b.size) == 1:
        if b.size > a.size:
            a, b = b, a
        return _direct(a.astype(np.int64), b.astype(np.int64), out_shape) % p
    bound = (p - 1) ** 2 * min(a.size, b.size)
    width = _slot_bytes(bound)
    za = _pack(a, out_shape, width)
    zb = _pack(b, out_shape, width)
    ncells = int(np.prod(out_shape))
    raw = _from_int(za * zb, ncells * width)
    if width == 16:
        words = np.frombuffer(raw, dtype="<u8").reshape(-1, 2)
        lo = words[:, 0].astype(object)
        hi = words[:, 1].astype(object)
        vals = (lo + hi * (1 << 64)) % p
        return vals.astype(np.int64).reshape(out_shape)
    vals = np.frombuffer(raw, dtype=_DTYPES[width]).reshape(out_shape)
    return (vals % p).astype(np.int64)
