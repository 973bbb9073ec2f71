"""Non-increasing real tuples."""

import numpy as np


class DescTuple:
    """A finite tuple of reals kept in non-increasing order.

    Constructing from an unsorted sequence sorts it (stable, descending).
    Arithmetic between two tuples is componentwise and pairs entries by
    descending rank; the result is sorted again.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("DescTuple needs at least one entry")
        if not np.all(np.isfinite(arr)):
            raise ValueError("DescTuple entries must be finite")
        order = np.argsort(-arr, kind="stable")
        arr = arr[order]
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self):
        return self._values

    def __len__(self):
        return self._values.size

    def __getitem__(self, idx):
        return self._values[idx]

    def __iter__(self):
        return iter(self._values.tolist())

    def __array__(self, dtype=None, copy=None):
        return self._values if dtype is None else self._values.astype(dtype)

    def __repr__(self):
        return f"DescTuple({self._values.tolist()!r})"

    def __eq__(self, other):
        if not isinstance(other, DescTuple):
            return NotImplemented
        return len(self) == len(other) and bool(np.all(self._values == other._values))

    __hash__ = None

    def lead(self, t):
        """Leading ``t``-subtuple."""
        if not 1 <= t <= len(self):
            raise IndexError(f"t={t} outside 1..{len(self)}")
        return DescTuple(self._values[:t])

    def _pair(self, other):
        if isinstance(other, DescTuple):
            if len(other) != len(self):
                raise ValueError("componentwise arithmetic needs equal lengths")
            return other._values
        return np.asarray(other, dtype=float)

    def __mul__(self, other):
        return DescTuple(self._values * self._pair(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return DescTuple(self._values / self._pair(other))

    def __pow__(self, c):
        return DescTuple(self._values ** c)

    def sum(self):
        return float(self._values.sum())


def sort_desc(a):
    """Rearrange ``a`` in non-increasing order."""
    return DescTuple(a)
