from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


@dataclass(frozen=True)
class NumericResult:
    """A complex value together with an estimated absolute error bound."""

    value: complex
    error: float
    info: dict[str, Any] = field(default_factory=dict, compare=False)

    def __complex__(self) -> complex:
        return complex(self.value)

    def to_json(self) -> dict[str, Any]:
        out = {
            "value_re": float(np.real(self.value)),
            "value_im": float(np.imag(self.value)),
            "error": float(self.error),
        }
        out.update({k: _jsonable(v) for k, v in self.info.items()})
        return out


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def richardson(hs: Sequence[float], values: Sequence[complex], order: int | None = None):
    """Neville extrapolation of ``values`` sampled at step sizes ``hs`` to h = 0.

    Returns the table diagonal: entry ``j`` is the extrapolant using points
    ``max(0, j - order)..j``.  ``order=None`` uses all previous points.
    """
    hs = np.asarray(hs, dtype=float)
    vals = np.asarray(values, dtype=complex)
    m = len(hs)
    diag = []
    for j in range(m):
        lo = 0 if order is None else max(0, j - order)
        x = hs[lo:j + 1]
        t = vals[lo:j + 1].copy()
        k = len(x)
        for level in range(1, k):
            for i in range(k - level):
                t[i] = (x[i + level] * t[i] - x[i] * t[i + 1]) / (x[i + level] - x[i])
        diag.append(t[0])
    return np.array(diag)


def lattice_box(ranges: Sequence[tuple[int, int]]) -> np.ndarray:
    """All integer points of an axis-aligned box as an (N, n) array."""
    axes = [np.arange(lo, hi + 1) for lo, hi in ranges]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)
