"""Small numba helpers shared by the kernels."""
import numba
import numpy as np

njit = numba.njit(cache=True, nogil=True)


@njit
def grow(arr, needed):
    """Return ``arr`` or a doubled copy with room for index ``needed``."""
    if needed < arr.shape[0]:
        return arr
    cap = max(2 * arr.shape[0], needed + 1)
    out = np.empty((cap,) + arr.shape[1:], dtype=arr.dtype)
    out[:arr.shape[0]] = arr
    return out


@njit
def set_add(items, where, size, x):
    where[x] = size
    items[size] = x
    return size + 1


@njit
def set_remove(items, where, size, x):
    """Swap-remove ``x``; caller guarantees membership."""
    i = where[x]
    last = items[size - 1]
    items[i] = last
    where[last] = i
    where[x] = -1
    return size - 1
