import numpy as np

from nsqkd.exceptions import InputError


def binary_entropy(q):
    """h(q) = -q log2 q - (1 - q) log2 (1 - q), with h(0) = h(1) = 0.

    Accepts scalars or arrays; scalars come back as float.
    """
    arr = np.asarray(q, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise InputError(f"binary entropy argument must lie in [0, 1], got {q!r}")
    inner = (arr > 0.0) & (arr < 1.0)
    safe = np.where(inner, arr, 0.5)
    h = np.where(inner, -safe * np.log2(safe) - (1.0 - safe) * np.log2(1.0 - safe), 0.0)
    return float(h) if h.ndim == 0 else h
