"""Exact matrix-valued functions on clopen sets.

A ``MatrixCylinderFunction`` assigns one complex matrix to every word of its
base set, enumerated over a window at least as wide as the base's canonical
window.  Values are exact data (copied, never interpolated); all comparisons
downstream are therefore bitwise or at the 1e-12 copy tolerance.
"""

from __future__ import annotations

import numpy as np

from .errors import PathMismatch, WindowTooSmall
from .subshift import ClopenSet, PointWindow, Window


class MatrixCylinderFunction:
    """A function ``base -> M_size``, tabulated per admissible word."""

    __slots__ = ("base", "window", "size", "values")

    def __init__(self, base: ClopenSet, window: Window, size: int, values: dict):
        if not window.contains(base.window):
            raise WindowTooSmall(f"{window} does not cover the base window")
        expected = base.words_on(window)
        if set(values) != set(expected):
            missing = expected - set(values)
            extra = set(values) - expected
            raise ValueError(
                f"value table mismatch (missing {len(missing)}, extra {len(extra)})")
        table = {}
        for w, M in values.items():
            A = np.array(M, dtype=complex)
            if A.shape != (size, size):
                raise ValueError(f"matrix for {w!r} has shape {A.shape}")
            A.setflags(write=False)
            table[w] = A
        self.base = base
        self.window = window
        self.size = size
        self.values = table

    @classmethod
    def constant(cls, base: ClopenSet, matrix) -> "MatrixCylinderFunction":
        M = np.array(matrix, dtype=complex)
        return cls(base, base.window, M.shape[0],
                   {w: M for w in base.words})

    @classmethod
    def identity(cls, base: ClopenSet, size: int) -> "MatrixCylinderFunction":
        return cls.constant(base, np.eye(size))

    @classmethod
    def zero(cls, base: ClopenSet, size: int) -> "MatrixCylinderFunction":
        return cls.constant(base, np.zeros((size, size)))

    # -- evaluation ---------------------------------------------------------

    def value(self, word: str, window: Window) -> np.ndarray:
        """Value at any point whose word on ``window`` is ``word``."""
        if not window.contains(self.window):
            raise WindowTooSmall(f"{window} does not cover {self.window}")
        off = self.window.lo - window.lo
        key = word[off : off + self.window.length]
        try:
            return self.values[key]
        except KeyError:
            raise PathMismatch(
                f"word {key!r} is not in the base set") from None

    def value_at(self, p: PointWindow) -> np.ndarray:
        return self.value(p.word, p.window)

    def values_on(self, window: Window) -> dict:
        """Value table re-enumerated over a larger window."""
        if window == self.window:
            return dict(self.values)
        return {w: self.value(w, window) for w in self.base.words_on(window)}

    # -- pointwise algebra ----------------------------------------------------

    def _binary(self, other: "MatrixCylinderFunction", op):
        if self.size != other.size:
            raise ValueError("matrix sizes differ")
        if not (self.base == other.base):
            raise ValueError("bases differ")
        w = self.window.hull(other.window)
        left = self.values_on(w)
        right = other.values_on(w)
        return MatrixCylinderFunction(
            self.base, w, self.size,
            {word: op(left[word], right[word]) for word in left})

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def conjugate_transpose(self) -> "MatrixCylinderFunction":
        return MatrixCylinderFunction(
            self.base, self.window, self.size,
            {w: M.conj().T for w, M in self.values.items()})

    def restrict(self, subset: ClopenSet) -> "MatrixCylinderFunction":
        """Restriction to a clopen subset of the base."""
        if not subset.issubset(self.base):
            raise ValueError("can only restrict to a subset of the base")
        w = self.window.hull(subset.window)
        table = self.values_on(w)
        keep = subset.words_on(w)
        return MatrixCylinderFunction(
            subset, w, self.size, {word: table[word] for word in keep})

    def max_abs(self) -> float:
        if not self.values:
            return 0.0
        return max(float(np.max(np.abs(M))) for M in self.values.values())

    def is_zero(self) -> bool:
        return all(not M.any() for M in self.values.values())

    def allclose(self, other: "MatrixCylinderFunction", atol: float = 1e-12) -> bool:
        if self.size != other.size or not (self.base == other.base):
            return False
        w = self.window.hull(other.window)
        left = self.values_on(w)
        right = other.values_on(w)
        return all(np.allclose(left[word], right[word], rtol=0.0, atol=atol)
                   for word in left)

    def __repr__(self):
        return (f"MatrixCylinderFunction(size={self.size}, "
                f"words={len(self.values)}, window=[{self.window.lo},{self.window.hi}])")
