"""Counter-based random streams.

Every random draw in the package is a pure function of ``(key, counter)``,
where the key is derived from a master seed and one or more indices (set
index, world index, selection step, ...). That makes results independent of
batching and evaluation order: draw ``j`` of stream ``i`` is always the same
number no matter how many other streams were consumed before it.

The mixer is SplitMix64's finalizer. All arithmetic is kept in ``uint64`` so
numba never promotes to float.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

MASK64 = (1 << 64) - 1


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def child_key(key, index):
    """Key of sub-stream ``index`` of ``key``."""
    return mix64(key ^ mix64(np.uint64(index) * _GOLDEN + _GOLDEN))


@njit(cache=True)
def uniform(key, counter):
    """Draw ``counter`` of stream ``key`` as a float in [0, 1)."""
    h = mix64(key + np.uint64(counter) * _GOLDEN)
    return np.float64(h >> _S11) * _INV53


def _mix64_py(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_key(seed, *indices):
    """Fold a master seed and indices into a 64-bit stream key.

    Pure-Python twin of ``mix64``/``child_key`` chains so that keys can be
    derived without crossing into compiled code (Python ints coming back from
    numba are typed int64, which would silently promote to float).
    """
    golden = 0x9E3779B97F4A7C15
    key = _mix64_py(int(seed) & MASK64)
    for i in indices:
        sub = _mix64_py(((int(i) & MASK64) * golden + golden) & MASK64)
        key = _mix64_py(key ^ sub)
    return np.uint64(key)


@njit(cache=True)
def edge_counter(u, v, n):
    """Draw index of edge ``(u, v)``; 0 is reserved for root choices.

    Keying coins by the endpoint pair (not by storage slot) means a graph and
    its augmentation share every base-edge coin within one stream.
    """
    return np.uint64(u) * np.uint64(n) + np.uint64(v) + np.uint64(1)
